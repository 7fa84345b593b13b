#include <catch2/catch_amalgamated.hpp>

#include "csgrav/algebra.hpp"

using namespace csgrav;

namespace {
const Signature kSig = Signature::lorentz3();

GlElt random_gl(Rng& rng, int m = 3) { return GlElt(rng.uniform_matrix(m, m, -1.0, 1.0)); }

AffElt random_aff(Rng& rng) {
  return AffElt(random_gl(rng), rng.uniform_vector(3, -1.0, 1.0));
}

AffElt random_kr3(Rng& rng) {
  // element of k (+) R^3: zero p part by construction
  return AffElt(iso_k_r3(rng.uniform_vector(3, -1.0, 1.0), kSig),
                rng.uniform_vector(3, -1.0, 1.0));
}

double aff_norm(const AffElt& x) { return x.lin.mat.norm() + x.trans.norm(); }
}  // namespace

TEST_CASE("project_kp splits gl(3) against eta", "[algebra]") {
  SECTION("rotation generator lies in k") {
    GlElt a(Eigen::Matrix3d{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}});  // E^2_3 - E^3_2
    auto [k, p] = project_kp(a, kSig);
    CHECK((k.mat - a.mat).norm() == 0.0);
    CHECK(p.mat.norm() == 0.0);
  }
  SECTION("identity lies in p") {
    auto [k, p] = project_kp(GlElt::identity(3), kSig);
    CHECK(k.mat.norm() == 0.0);
    CHECK((p.mat - Eigen::Matrix3d::Identity()).norm() == 0.0);
  }
  SECTION("complementary projectors and defining equations") {
    Rng rng(101);
    const Eigen::Matrix3d eta = kSig.eta();
    for (int trial = 0; trial < 100; ++trial) {
      GlElt a = random_gl(rng);
      auto [k, p] = project_kp(a, kSig);
      CHECK((k.mat + p.mat - a.mat).norm() <= 1e-14);
      CHECK((k.mat * eta + eta * k.mat.transpose()).norm() <= 1e-14);
      CHECK((p.mat * eta - eta * p.mat.transpose()).norm() <= 1e-14);
      auto [kk, kp] = project_kp(k, kSig);
      CHECK((kk.mat - k.mat).norm() <= 1e-14);
      CHECK(kp.mat.norm() <= 1e-14);
    }
  }
  SECTION("dimension mismatch is rejected") {
    CHECK_THROWS_AS(project_kp(GlElt::identity(2), kSig), DimensionError);
  }
}

TEST_CASE("iso_k_r3 matches the evaluated index formula", "[algebra]") {
  // xi = e1: only a^3_2 = 1 and a^2_3 = -1 survive.
  Eigen::Matrix3d m1 = iso_k_r3(Eigen::Vector3d::Unit(0), kSig).mat;
  Eigen::Matrix3d e1{{0, 0, 0}, {0, 0, -1}, {0, 1, 0}};
  CHECK((m1 - e1).norm() == 0.0);

  // xi = e3: a^2_1 = 1 and a^1_2 = 1, a boost generator.
  Eigen::Matrix3d m3 = iso_k_r3(Eigen::Vector3d::Unit(2), kSig).mat;
  Eigen::Matrix3d e3{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}};
  CHECK((m3 - e3).norm() == 0.0);

  CHECK(iso_k_r3(Eigen::Vector3d::Zero(), kSig).mat.norm() == 0.0);

  SECTION("image lies in k and the inverse recovers xi") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd xi = rng.uniform_vector(3, -2.0, 2.0);
      GlElt a = iso_k_r3(xi, kSig);
      auto [k, p] = project_kp(a, kSig);
      CHECK(p.mat.norm() <= 1e-15);
      CHECK((iso_r3_k(a, kSig) - xi).norm() <= 1e-15);
    }
  }
  SECTION("m != 3 rejected") {
    Signature sig2(2, Eigen::Vector2d(1.0, 1.0));
    CHECK_THROWS_AS(iso_k_r3(Eigen::Vector3d::Zero(), sig2), DimensionError);
  }
}

TEST_CASE("iso intertwines rotations with conjugation", "[algebra]") {
  // R in the rotation subgroup of K (exponentials of iso(e1)); this test
  // pins the eps/eta index conventions of the isomorphism.
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = rng.uniform(-3.0, 3.0);
    Eigen::MatrixXd r = exp_gl(GlElt(t * iso_k_r3(Eigen::Vector3d::Unit(0), kSig).mat));
    Eigen::VectorXd xi = rng.uniform_vector(3, -1.0, 1.0);
    Eigen::MatrixXd lhs = iso_k_r3(r * xi, kSig).mat;
    Eigen::MatrixXd rhs = r * iso_k_r3(xi, kSig).mat * r.inverse();
    CHECK((lhs - rhs).norm() <= 1e-10);
  }
}

TEST_CASE("pair_gl on elementary matrices", "[algebra]") {
  GlElt e11 = GlElt::elementary(3, 0, 0);
  GlElt e12 = GlElt::elementary(3, 0, 1);
  GlElt e21 = GlElt::elementary(3, 1, 0);
  CHECK(pair_gl(e11, e11, kSig) == 1.0);
  CHECK(pair_gl(e12, e12, kSig) == -1.0);
  CHECK(pair_gl(e12, e21, kSig) == 0.0);

  SECTION("symmetry") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      GlElt a = random_gl(rng), b = random_gl(rng);
      CHECK(pair_gl(a, b, kSig) == Catch::Approx(pair_gl(b, a, kSig)).epsilon(1e-14));
    }
  }
}

TEST_CASE("pair_gl is K-invariant", "[algebra]") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    GlElt a = random_gl(rng), b = random_gl(rng);
    Eigen::VectorXd xi = rng.uniform_vector(3, -1.0, 1.0);
    if (xi.norm() > 1.0) xi /= xi.norm();
    Eigen::MatrixXd g = exp_gl(GlElt(iso_k_r3(xi, kSig).mat));
    Eigen::MatrixXd gi = g.inverse();
    const double base = pair_gl(a, b, kSig);
    const double moved = pair_gl(GlElt(g * a.mat * gi), GlElt(g * b.mat * gi), kSig);
    CHECK(std::abs(moved - base) <= 1e-9 * (1.0 + std::abs(base)));
  }
}

TEST_CASE("pair_aff frozen values", "[algebra]") {
  AffElt x(iso_k_r3(Eigen::Vector3d::Unit(2), kSig), Eigen::Vector3d::Zero());
  AffElt y(GlElt::zero(3), Eigen::Vector3d::Unit(2));
  CHECK(pair_aff(x, y, kSig) == -2.0);

  AffElt pure_p = AffElt::from_linear(GlElt::identity(3));
  AffElt mixed(iso_k_r3(Eigen::Vector3d::Unit(0), kSig), Eigen::Vector3d::Unit(1));
  CHECK(pair_aff(pure_p, mixed, kSig) == 0.0);

  CHECK(pair_aff(pure_p, pure_p, kSig) == 3.0);

  SECTION("symmetry") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      AffElt a = random_aff(rng), b = random_aff(rng);
      CHECK(pair_aff(a, b, kSig) == Catch::Approx(pair_aff(b, a, kSig)).epsilon(1e-14));
    }
  }
}

TEST_CASE("pair_aff invariant on k (+) R^3 under its group", "[algebra]") {
  Rng rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    AffElt x = random_kr3(rng), y = random_kr3(rng);
    AffGroupElt g = exp_aff(random_kr3(rng));
    const double base = pair_aff(x, y, kSig);
    const double moved = pair_aff(adjoint_aff(g, x), adjoint_aff(g, y), kSig);
    CHECK(std::abs(moved - base) <= 1e-9 * (1.0 + std::abs(base)));
  }
}

TEST_CASE("bracket_aff block commutator", "[algebra]") {
  Rng rng(5);
  SECTION("translations commute") {
    AffElt x = AffElt::from_translation(rng.uniform_vector(3, -1, 1));
    AffElt y = AffElt::from_translation(rng.uniform_vector(3, -1, 1));
    AffElt b = bracket_aff(x, y);
    CHECK(b.lin.mat.norm() == 0.0);
    CHECK(b.trans.norm() == 0.0);
  }
  SECTION("linear on translation acts by the matrix") {
    GlElt a = random_gl(rng);
    Eigen::VectorXd z = rng.uniform_vector(3, -1, 1);
    AffElt b = bracket_aff(AffElt::from_linear(a), AffElt::from_translation(z));
    CHECK(b.lin.mat.norm() == 0.0);
    CHECK((b.trans - a.mat * z).norm() <= 1e-15);
  }
  SECTION("gl commutator") {
    AffElt b = bracket_aff(AffElt::from_linear(GlElt::elementary(3, 0, 1)),
                           AffElt::from_linear(GlElt::elementary(3, 1, 0)));
    Eigen::Matrix3d want = Eigen::Matrix3d::Zero();
    want(0, 0) = 1.0;
    want(1, 1) = -1.0;
    CHECK((b.lin.mat - want).norm() == 0.0);
    CHECK(b.trans.norm() == 0.0);
  }
  SECTION("antisymmetry and Jacobi on 200 triples") {
    for (int trial = 0; trial < 200; ++trial) {
      AffElt x = random_aff(rng), y = random_aff(rng), z = random_aff(rng);
      AffElt xy = bracket_aff(x, y), yx = bracket_aff(y, x);
      CHECK(aff_norm(AffElt(GlElt(xy.lin.mat + yx.lin.mat), xy.trans + yx.trans)) <= 1e-14);
      AffElt j1 = bracket_aff(x, bracket_aff(y, z));
      AffElt j2 = bracket_aff(y, bracket_aff(z, x));
      AffElt j3 = bracket_aff(z, bracket_aff(x, y));
      Eigen::Matrix3d lin = j1.lin.mat + j2.lin.mat + j3.lin.mat;
      Eigen::Vector3d tr = j1.trans + j2.trans + j3.trans;
      CHECK(lin.norm() + tr.norm() <= 1e-12);
    }
  }
}

TEST_CASE("adjoint_aff block conjugation", "[algebra]") {
  Rng rng(6);
  GlElt a = random_gl(rng);
  Eigen::VectorXd xi = rng.uniform_vector(3, -1, 1);
  Eigen::VectorXd t = rng.uniform_vector(3, -1, 1);

  AffElt translated = adjoint_aff(AffGroupElt(Eigen::Matrix3d::Identity(), t), AffElt(a, xi));
  CHECK((translated.lin.mat - a.mat).norm() <= 1e-15);
  CHECK((translated.trans - (xi - a.mat * t)).norm() <= 1e-15);

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3) + 0.3 * rng.uniform_matrix(3, 3, -1, 1);
  AffElt rotated = adjoint_aff(AffGroupElt(h, Eigen::Vector3d::Zero()), AffElt(a, xi));
  CHECK((rotated.lin.mat - h * a.mat * h.inverse()).norm() <= 1e-13);
  CHECK((rotated.trans - h * xi).norm() <= 1e-14);

  AffGroupElt g(h, t);
  AffElt z = adjoint_aff(g, AffElt::zero(3));
  CHECK(aff_norm(z) == 0.0);

  SECTION("homomorphism property") {
    for (int trial = 0; trial < 30; ++trial) {
      AffGroupElt g1 = exp_aff(random_aff(rng));
      AffGroupElt g2 = exp_aff(random_aff(rng));
      AffElt x = random_aff(rng);
      AffElt lhs = adjoint_aff(g1.compose(g2), x);
      AffElt rhs = adjoint_aff(g1, adjoint_aff(g2, x));
      CHECK((lhs.lin.mat - rhs.lin.mat).norm() + (lhs.trans - rhs.trans).norm() <= 1e-11);
    }
  }
}

TEST_CASE("exp_aff", "[algebra]") {
  Rng rng(8);
  SECTION("pure translation: nilpotent series terminates") {
    Eigen::VectorXd xi = rng.uniform_vector(3, -2, 2);
    AffGroupElt g = exp_aff(AffElt::from_translation(xi));
    CHECK((g.lin - Eigen::Matrix3d::Identity()).norm() <= 1e-15);
    CHECK((g.trans - xi).norm() <= 1e-15);
  }
  SECTION("zero maps to the identity element") {
    AffGroupElt g = exp_aff(AffElt::zero(3));
    CHECK((g.lin - Eigen::Matrix3d::Identity()).norm() == 0.0);
    CHECK(g.trans.norm() == 0.0);
  }
  SECTION("block-diagonal series") {
    GlElt a = random_gl(rng);
    AffGroupElt g = exp_aff(AffElt::from_linear(a));
    CHECK((g.lin - exp_gl(a)).norm() <= 1e-14);
    CHECK(g.trans.norm() == 0.0);
  }
  SECTION("one-parameter subgroup property") {
    AffElt x = random_aff(rng);
    AffGroupElt whole = exp_aff(x);
    AffGroupElt half = exp_aff(AffElt(GlElt(0.5 * x.lin.mat), 0.5 * x.trans));
    AffGroupElt composed = half.compose(half);
    CHECK((whole.lin - composed.lin).norm() <= 1e-13);
    CHECK((whole.trans - composed.trans).norm() <= 1e-13);
  }
}

TEST_CASE("gram matrices and nondegeneracy", "[algebra]") {
  Eigen::MatrixXd g = gram(PairingKind::GlEta, kSig);
  CHECK(g.rows() == 9);
  CHECK(std::abs(std::abs(g.determinant()) - 1.0) <= 1e-3);
  CHECK((g - g.transpose()).norm() == 0.0);

  Eigen::MatrixXd ga = gram(PairingKind::Aff3, kSig);
  CHECK(ga.rows() == 12);
  // measured value: det = -8 for eta = diag(-1,1,1)
  CHECK(std::abs(ga.determinant() - (-8.0)) <= 1e-12);
  CHECK(std::abs(ga.determinant()) >= 1e-6);

  Signature euclid1(1, Eigen::VectorXd::Ones(1));
  Eigen::MatrixXd g1 = gram(PairingKind::GlEta, euclid1);
  CHECK(g1.rows() == 1);
  CHECK(g1(0, 0) == 1.0);
}

TEST_CASE("other signatures are accepted", "[algebra]") {
  Signature euclid(3, Eigen::Vector3d::Ones());
  Rng rng(12);

  // for the identity form, k is the antisymmetric part
  GlElt a = GlElt(rng.uniform_matrix(3, 3, -1, 1));
  auto [k, p] = project_kp(a, euclid);
  CHECK((k.mat + k.mat.transpose()).norm() <= 1e-15);
  CHECK((p.mat - p.mat.transpose()).norm() <= 1e-15);

  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd xi = rng.uniform_vector(3, -1, 1);
    GlElt rot = iso_k_r3(xi, euclid);
    CHECK((rot.mat + rot.mat.transpose()).norm() <= 1e-15);
    CHECK((iso_r3_k(rot, euclid) - xi).norm() <= 1e-15);

    GlElt b(rng.uniform_matrix(3, 3, -1, 1)), c(rng.uniform_matrix(3, 3, -1, 1));
    Eigen::Matrix3d g = exp_gl(rot);
    Eigen::Matrix3d gi = g.inverse();
    const double base = pair_gl(b, c, euclid);
    const double moved = pair_gl(GlElt(g * b.mat * gi), GlElt(g * c.mat * gi), euclid);
    CHECK(std::abs(moved - base) <= 1e-9 * (1.0 + std::abs(base)));
  }
  CHECK(std::abs(gram(PairingKind::Aff3, euclid).determinant()) >= 1e-6);
}
