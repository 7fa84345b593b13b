#include <catch2/catch_amalgamated.hpp>

#include "csgrav/fieldgen.hpp"
#include "csgrav/forms.hpp"

using namespace csgrav;

namespace {

const double kPi = std::numbers::pi;

Chart torus3() { return Chart::unit_torus(3); }
Chart box3() { return Chart::box(Pt::Zero(3), Pt::Ones(3)); }

ScalarJetField coord(const Chart& c, int i) { return ScalarJetField::coordinate(c, i); }

/// dx^axis as a scalar-valued 1-form.
ValuedForm dx(const Chart& chart, int axis) {
  std::vector<std::vector<ScalarJetField>> coeffs(chart.n);
  for (int r = 0; r < chart.n; ++r)
    coeffs[r].push_back(r == axis ? ScalarJetField::constant(chart.n, 1.0)
                                  : ScalarJetField::zero(chart.n));
  return ValuedForm::from_coeffs(chart, ValueSpace::scalar(), 1, coeffs);
}

double block_max_abs(const FormBlock& b) { return b.value.cwiseAbs().maxCoeff(); }

double max_block_diff(const ValuedForm& a, const ValuedForm& b, const std::vector<Pt>& pts) {
  double sup = 0.0;
  for (const Pt& x : pts) {
    FormBlock ba = a.eval_block(x, 0);
    FormBlock bb = b.eval_block(x, 0);
    sup = std::max(sup, (ba.value - bb.value).cwiseAbs().maxCoeff());
  }
  return sup;
}

/// Brute-force alternating sum over all permutations:
/// B(a /\ b)(v_1..v_{p+q}) = 1/(p! q!) sum_s sgn(s) B(a(v_s..), b(v_s..)).
CompVec wedge_oracle(const BilinearMap& bmap, const ValuedForm& alpha, const ValuedForm& beta,
                     const Pt& x, const std::vector<Pt>& vs) {
  const int p = alpha.degree(), q = beta.degree();
  std::vector<int> perm(p + q);
  for (int i = 0; i < p + q; ++i) perm[i] = i;
  CompVec acc = CompVec::Zero(bmap.out.dim());
  std::sort(perm.begin(), perm.end());
  do {
    int inversions = 0;
    for (int i = 0; i < p + q; ++i)
      for (int j = i + 1; j < p + q; ++j)
        if (perm[i] > perm[j]) ++inversions;
    const double sign = (inversions % 2 == 0) ? 1.0 : -1.0;
    std::vector<Pt> va_pts, vb_pts;
    for (int i = 0; i < p; ++i) va_pts.push_back(vs[perm[i]]);
    for (int i = p; i < p + q; ++i) vb_pts.push_back(vs[perm[i]]);
    CompVec av = eval_form(alpha, x, va_pts);
    CompVec bv = eval_form(beta, x, vb_pts);
    CompVec term = CompVec::Zero(bmap.out.dim());
    for (const auto& t : bmap.triplets) term[t.c] += t.coef * av[t.u] * bv[t.v];
    acc += sign * term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  for (int i = 2; i <= q; ++i) fact *= i;
  return acc / fact;
}

}  // namespace

TEST_CASE("trig fields carry exact jets", "[jets]") {
  Chart chart = torus3();

  SECTION("empty spec is the zero field") {
    ScalarJetField f = make_trig_field(chart, {});
    JetScalar j = f.eval(Pt::Zero(3), 2);
    CHECK(j.v == 0.0);
    CHECK(j.g.norm() == 0.0);
    CHECK(j.h.norm() == 0.0);
  }

  SECTION("single cosine mode") {
    TrigTerm t;
    t.freq.resize(3);
    t.freq << 1, 0, 0;
    t.amplitude = 1.0;
    t.phase = 0.0;
    ScalarJetField f = make_trig_field(chart, {t});
    JetScalar j = f.eval(Pt::Zero(3), 2);
    CHECK(j.v == Catch::Approx(1.0));
    CHECK(j.g.norm() <= 1e-15);
    CHECK(j.h(0, 0) == Catch::Approx(-4.0 * kPi * kPi));
    CHECK(std::abs(j.h(1, 1)) <= 1e-15);
  }

  SECTION("linearity of jets and periodicity") {
    Rng rng(17);
    ScalarJetField f1 = fieldgen::random_trig_scalar(chart, rng);
    ScalarJetField f2 = fieldgen::random_trig_scalar(chart, rng);
    ScalarJetField sum = f1 + f2;
    for (int trial = 0; trial < 10; ++trial) {
      Pt x = rng.uniform_vector(3, 0.0, 1.0);
      JetScalar a = f1.eval(x, 2), b = f2.eval(x, 2), s = sum.eval(x, 2);
      CHECK(std::abs(s.v - a.v - b.v) <= 1e-15);
      CHECK((s.g - a.g - b.g).norm() <= 1e-14);
      CHECK((s.h - a.h - b.h).norm() <= 1e-13);
      Pt shifted = x + Pt::Ones(3);
      JetScalar p = f1.eval(shifted, 2);
      CHECK(std::abs(p.v - a.v) <= 1e-12);
      CHECK((p.g - a.g).norm() <= 1e-11);
    }
  }

  SECTION("gradient and Hessian match finite differences") {
    Rng rng(29);
    ScalarJetField f = fieldgen::random_trig_scalar(chart, rng, {2, 0.8, 4, true});
    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
      Pt x = rng.uniform_vector(3, 0.0, 1.0);
      JetScalar j = f.eval(x, 2);
      CHECK((j.h - j.h.transpose()).norm() <= 1e-13);
      for (int i = 0; i < 3; ++i) {
        Pt xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (f.eval(xp, 0).v - f.eval(xm, 0).v) / (2 * h);
        CHECK(std::abs(fd - j.g[i]) <= 1e-6);
        const double fd2 = (f.eval(xp, 1).g[i] - f.eval(xm, 1).g[i]) / (2 * h);
        CHECK(std::abs(fd2 - j.h(i, i)) <= 1e-5);
      }
    }
  }

  SECTION("product rule") {
    Rng rng(31);
    ScalarJetField f = fieldgen::random_trig_scalar(chart, rng);
    ScalarJetField g = fieldgen::random_trig_scalar(chart, rng);
    ScalarJetField fg = f * g;
    for (int trial = 0; trial < 10; ++trial) {
      Pt x = rng.uniform_vector(3, 0.0, 1.0);
      JetScalar a = f.eval(x, 2), b = g.eval(x, 2), p = fg.eval(x, 2);
      CHECK(std::abs(p.v - a.v * b.v) <= 1e-15);
      CHECK((p.g - (a.v * b.g + b.v * a.g)).norm() <= 1e-14);
      HessMat want = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
      CHECK((p.h - want).norm() <= 1e-14);
      CHECK((p.h - p.h.transpose()).norm() <= 1e-13);
    }
  }

  SECTION("trig fields require a periodic chart") {
    CHECK_THROWS(make_trig_field(box3(), {}));
    CHECK_THROWS(ScalarJetField::coordinate(torus3(), 0));
  }
}

TEST_CASE("exterior derivative", "[forms]") {
  Chart chart = box3();

  SECTION("d(x1 dx2) = dx1 ^ dx2") {
    std::vector<std::vector<ScalarJetField>> coeffs(3);
    coeffs[0].push_back(ScalarJetField::zero(3));
    coeffs[1].push_back(coord(chart, 0));  // x^1 on dx^2
    coeffs[2].push_back(ScalarJetField::zero(3));
    ValuedForm alpha = ValuedForm::from_coeffs(chart, ValueSpace::scalar(), 1, coeffs);
    ValuedForm d = ext_d(alpha);
    Rng rng(3);
    Pt x = rng.uniform_vector(3, 0.0, 1.0);
    FormBlock b = d.eval_block(x, 0);
    // increasing pairs in lex order: (0,1), (0,2), (1,2)
    CHECK(b.value(0, 0) == Catch::Approx(1.0));
    CHECK(std::abs(b.value(1, 0)) <= 1e-15);
    CHECK(std::abs(b.value(2, 0)) <= 1e-15);
  }

  SECTION("d of a constant-coefficient form vanishes") {
    Rng rng(5);
    std::vector<std::vector<ScalarJetField>> coeffs(3);
    for (int r = 0; r < 3; ++r)
      coeffs[r].push_back(ScalarJetField::constant(3, rng.uniform(-1, 1)));
    ValuedForm alpha = ValuedForm::from_coeffs(chart, ValueSpace::scalar(), 1, coeffs);
    ValuedForm d = ext_d(alpha);
    for (const Pt& x : sample_points(chart, 10, 7))
      CHECK(block_max_abs(d.eval_block(x, 0)) == 0.0);
  }

  SECTION("d o d = 0 on random trig forms, dims 3 and 4") {
    for (int n : {3, 4}) {
      Chart torus = Chart::unit_torus(n);
      Rng rng(1000 + n);
      for (int degree = 0; degree <= n - 2; ++degree) {
        ValuedForm alpha =
            fieldgen::random_trig_form(torus, ValueSpace::gl(3), degree, rng, {2, 0.7, 3, true});
        ValuedForm dd = ext_d(ext_d(alpha));
        for (const Pt& x : sample_points(torus, 100, 99))
          CHECK(block_max_abs(dd.eval_block(x, 0)) <= 1e-12);
      }
    }
  }

  SECTION("degree overflow and jet exhaustion are reported") {
    Rng rng(8);
    ValuedForm top = fieldgen::random_trig_form(torus3(), ValueSpace::scalar(), 3, rng);
    CHECK_THROWS_AS(ext_d(top), DimensionError);
    ValuedForm alpha = fieldgen::random_trig_form(torus3(), ValueSpace::scalar(), 0, rng);
    ValuedForm dd = ext_d(ext_d(alpha));  // order 0 output: fine
    CHECK(dd.order() == 0);
    CHECK_THROWS_AS(ext_d(dd), JetExhausted);
  }
}

TEST_CASE("wedge products", "[forms]") {
  const Signature sig = Signature::lorentz3();
  Chart chart = torus3();
  Rng rng(202);

  SECTION("constant 1-forms against the pairing") {
    GlElt a(rng.uniform_matrix(3, 3, -1, 1)), b(rng.uniform_matrix(3, 3, -1, 1));
    auto constant_1form = [&](const GlElt& v, int axis) {
      std::vector<std::vector<ScalarJetField>> coeffs(3);
      CompVec comp = components_of(v);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 9; ++c)
          coeffs[r].push_back(r == axis ? ScalarJetField::constant(3, comp[c])
                                        : ScalarJetField::zero(3));
      return ValuedForm::from_coeffs(chart, ValueSpace::gl(3), 1, coeffs);
    };
    ValuedForm alpha = constant_1form(a, 0);
    ValuedForm beta = constant_1form(b, 1);
    ValuedForm w = wedge_pair(PairingKind::GlEta, sig, alpha, beta);
    Pt x = rng.uniform_vector(3, 0, 1);
    FormBlock blk = w.eval_block(x, 0);
    CHECK(blk.value(0, 0) == Catch::Approx(pair_gl(a, b, sig)));  // dx1^dx2 slot
    CHECK(std::abs(blk.value(1, 0)) <= 1e-15);
    CHECK(std::abs(blk.value(2, 0)) <= 1e-15);

    ValuedForm zero = ValuedForm::zero(chart, ValueSpace::gl(3), 1);
    ValuedForm wz = wedge_pair(PairingKind::GlEta, sig, alpha, zero);
    CHECK(block_max_abs(wz.eval_block(x, 0)) == 0.0);
  }

  SECTION("graded symmetry of the pairing wedge") {
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}}) {
      ValuedForm alpha = fieldgen::random_trig_form(chart, ValueSpace::gl(3), p, rng);
      ValuedForm beta = fieldgen::random_trig_form(chart, ValueSpace::gl(3), q, rng);
      ValuedForm ab = wedge_pair(PairingKind::GlEta, sig, alpha, beta);
      ValuedForm ba = wedge_pair(PairingKind::GlEta, sig, beta, alpha);
      const double sign = ((p * q) % 2 == 0) ? 1.0 : -1.0;
      CHECK(max_block_diff(ab, sign * ba, sample_points(chart, 20, 55)) <= 1e-12);
    }
  }

  SECTION("wedge against brute-force shuffle oracle") {
    BilinearMap bmap = make_pair_bilinear(PairingKind::GlEta, sig);
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {0, 2}}) {
      ValuedForm alpha = fieldgen::random_trig_form(chart, ValueSpace::gl(3), p, rng);
      ValuedForm beta = fieldgen::random_trig_form(chart, ValueSpace::gl(3), q, rng);
      ValuedForm w = wedge_bilinear(bmap, alpha, beta);
      for (int trial = 0; trial < 20; ++trial) {
        Pt x = rng.uniform_vector(3, 0, 1);
        std::vector<Pt> vs;
        for (int i = 0; i < p + q; ++i) vs.push_back(rng.uniform_vector(3, -1, 1));
        CompVec direct = eval_form(w, x, vs);
        CompVec oracle = wedge_oracle(bmap, alpha, beta, x, vs);
        CHECK(std::abs(direct[0] - oracle[0]) <= 1e-12);
      }
    }
  }

  SECTION("bracket wedge of constant 1-forms") {
    GlElt a(rng.uniform_matrix(3, 3, -1, 1)), b(rng.uniform_matrix(3, 3, -1, 1));
    std::vector<std::vector<ScalarJetField>> coeffs(3);
    CompVec ca = components_of(a), cb = components_of(b);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 9; ++c) {
        double v = r == 0 ? ca[c] : (r == 1 ? cb[c] : 0.0);
        coeffs[r].push_back(ScalarJetField::constant(3, v));
      }
    ValuedForm alpha = ValuedForm::from_coeffs(chart, ValueSpace::gl(3), 1, coeffs);
    ValuedForm br = wedge_bracket(alpha, alpha);
    Pt x = rng.uniform_vector(3, 0, 1);
    FormBlock blk = br.eval_block(x, 0);
    CompVec want = 2.0 * components_of(bracket_gl(a, b));
    for (int c = 0; c < 9; ++c) CHECK(blk.value(0, c) == Catch::Approx(want[c]).margin(1e-14));

    // commuting values: bracket of a diagonal family vanishes
    std::vector<std::vector<ScalarJetField>> dcoeffs(3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 9; ++c) {
        const bool diag = (c % 4 == 0);
        dcoeffs[r].push_back(ScalarJetField::constant(3, diag ? rng.uniform(-1, 1) : 0.0));
      }
    ValuedForm diag_form = ValuedForm::from_coeffs(chart, ValueSpace::gl(3), 1, dcoeffs);
    CHECK(block_max_abs(wedge_bracket(diag_form, diag_form).eval_block(x, 0)) <= 1e-15);
  }

  SECTION("graded antisymmetry of the bracket wedge") {
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}}) {
      ValuedForm alpha = fieldgen::random_trig_form(chart, ValueSpace::aff(3), p, rng);
      ValuedForm beta = fieldgen::random_trig_form(chart, ValueSpace::aff(3), q, rng);
      ValuedForm ab = wedge_bracket(alpha, beta);
      ValuedForm ba = wedge_bracket(beta, alpha);
      const double sign = ((p * q) % 2 == 0) ? -1.0 : 1.0;  // [a^b] = -(-1)^{pq} [b^a]
      CHECK(max_block_diff(ab, sign * ba, sample_points(chart, 20, 56)) <= 1e-12);
    }
  }

  SECTION("graded Leibniz rule") {
    for (auto [p, q] : std::vector<std::pair<int, int>>{{0, 1}, {1, 1}}) {
      ValuedForm alpha = fieldgen::random_trig_form(chart, ValueSpace::gl(3), p, rng);
      ValuedForm beta = fieldgen::random_trig_form(chart, ValueSpace::gl(3), q, rng);
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;

      ValuedForm lhs_pair = ext_d(wedge_pair(PairingKind::GlEta, sig, alpha, beta));
      ValuedForm rhs_pair = wedge_pair(PairingKind::GlEta, sig, ext_d(alpha), beta) +
                            sign * wedge_pair(PairingKind::GlEta, sig, alpha, ext_d(beta));
      CHECK(max_block_diff(lhs_pair, rhs_pair, sample_points(chart, 40, 57)) <= 1e-10);

      ValuedForm lhs_br = ext_d(wedge_bracket(alpha, beta));
      ValuedForm rhs_br =
          wedge_bracket(ext_d(alpha), beta) + sign * wedge_bracket(alpha, ext_d(beta));
      CHECK(max_block_diff(lhs_br, rhs_br, sample_points(chart, 40, 58)) <= 1e-10);
    }
  }

  SECTION("shape errors") {
    ValuedForm a2 = fieldgen::random_trig_form(chart, ValueSpace::gl(3), 2, rng);
    CHECK_THROWS_AS(wedge_pair(PairingKind::GlEta, sig, a2, a2), DimensionError);
    ValuedForm vec = fieldgen::random_trig_form(chart, ValueSpace::vec(3), 1, rng);
    CHECK_THROWS_AS(wedge_bracket(vec, vec), DimensionError);
    ValuedForm gl1 = fieldgen::random_trig_form(chart, ValueSpace::gl(3), 1, rng);
    CHECK_THROWS_AS(wedge_pair(PairingKind::Aff3, sig, gl1, gl1), DimensionError);
  }
}

TEST_CASE("evaluation on tangent vectors", "[forms]") {
  Chart chart = torus3();
  Rng rng(71);

  SECTION("basis evaluations") {
    ValuedForm d1 = dx(chart, 0);
    Pt x = rng.uniform_vector(3, 0, 1);
    CHECK(eval_form(d1, x, {Pt(Eigen::Vector3d::Unit(0))})[0] == 1.0);
    ValuedForm w = wedge_bilinear(
        BilinearMap::from_function(ValueSpace::scalar(), ValueSpace::scalar(),
                                   ValueSpace::scalar(),
                                   [](const CompVec& a, const CompVec& b) {
                                     CompVec r(1);
                                     r[0] = a[0] * b[0];
                                     return r;
                                   }),
        dx(chart, 0), dx(chart, 1));
    CHECK(eval_form(w, x, {Pt(Eigen::Vector3d::Unit(1)), Pt(Eigen::Vector3d::Unit(0))})[0] ==
          -1.0);
  }

  SECTION("antisymmetry is exact and matches the determinant expansion") {
    ValuedForm beta = fieldgen::random_trig_form(chart, ValueSpace::vec(3), 2, rng);
    for (int trial = 0; trial < 20; ++trial) {
      Pt x = rng.uniform_vector(3, 0, 1);
      Pt u = rng.uniform_vector(3, -1, 1), v = rng.uniform_vector(3, -1, 1);
      CompVec uv = eval_form(beta, x, {u, v});
      CompVec vu = eval_form(beta, x, {v, u});
      CHECK((uv + vu).norm() == 0.0);  // 2x2 cofactor minors: sign flip is exact

      // naive oracle: sum over index pairs of coeff * (u_i v_j - u_j v_i)
      FormBlock b = beta.eval_block(x, 0);
      const auto idx = multi_indices(3, 2);
      CompVec want = CompVec::Zero(3);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const double minor = u[idx[r][0]] * v[idx[r][1]] - u[idx[r][1]] * v[idx[r][0]];
        want += minor * b.value.row(static_cast<int>(r)).transpose();
      }
      CHECK((uv - want).norm() <= 1e-13);
    }
  }
}

TEST_CASE("quadrature on periodic charts", "[forms]") {
  Chart chart = torus3();
  Rng rng(88);

  SECTION("volume form integrates to one") {
    std::vector<std::vector<ScalarJetField>> coeffs(1);
    coeffs[0].push_back(ScalarJetField::constant(3, 1.0));
    ValuedForm vol = ValuedForm::from_coeffs(chart, ValueSpace::scalar(), 3, coeffs);
    CHECK(integrate_top(vol, QuadratureGrid::cubic(3, 4)) == Catch::Approx(1.0));
  }

  SECTION("pure modes integrate to zero once resolved") {
    TrigTerm t;
    t.freq.resize(3);
    t.freq << 1, 0, 0;
    t.amplitude = 1.0;
    t.phase = -0.5 * std::numbers::pi;  // sin(2 pi x1)
    std::vector<std::vector<ScalarJetField>> coeffs(1);
    coeffs[0].push_back(make_trig_field(chart, {t}));
    ValuedForm alpha = ValuedForm::from_coeffs(chart, ValueSpace::scalar(), 3, coeffs);
    CHECK(std::abs(integrate_top(alpha, QuadratureGrid::cubic(3, 3))) <= 1e-14);
  }

  SECTION("band-limited quadrature matches a 4x denser grid") {
    ValuedForm alpha =
        fieldgen::random_trig_form(chart, ValueSpace::scalar(), 3, rng, {2, 1.0, 5, true});
    const double coarse = integrate_top(alpha, QuadratureGrid::cubic(3, 9));
    const double fine = integrate_top(alpha, QuadratureGrid::cubic(3, 36));
    CHECK(std::abs(coarse - fine) <= 1e-12 * std::max(1.0, std::abs(fine)));
  }

  SECTION("integrals of exact forms vanish") {
    ValuedForm beta =
        fieldgen::random_trig_form(chart, ValueSpace::scalar(), 2, rng, {2, 1.0, 4, true});
    ValuedForm d = ext_d(beta);
    const double integral = integrate_top(d, QuadratureGrid::cubic(3, 9));
    const double magnitude = integrate_abs_top(d, QuadratureGrid::cubic(3, 9));
    CHECK(std::abs(integral) <= 1e-11 * std::max(1.0, magnitude));
  }

  SECTION("thread count does not change the result") {
    ValuedForm alpha =
        fieldgen::random_trig_form(chart, ValueSpace::scalar(), 3, rng, {2, 1.0, 5, true});
    threads::set(1);
    const double serial = integrate_top(alpha, QuadratureGrid::cubic(3, 17));
    threads::set(4);
    const double parallel = integrate_top(alpha, QuadratureGrid::cubic(3, 17));
    threads::set(1);
    CHECK(serial == parallel);
  }

  SECTION("contract violations") {
    std::vector<std::vector<ScalarJetField>> coeffs(1);
    coeffs[0].push_back(ScalarJetField::constant(3, 1.0));
    ValuedForm two = fieldgen::random_trig_form(chart, ValueSpace::scalar(), 2, rng);
    CHECK_THROWS(integrate_top(two, QuadratureGrid::cubic(3, 4)));
    Chart box = Chart::box(Pt::Zero(3), Pt::Ones(3));
    std::vector<std::vector<ScalarJetField>> bcoeffs(1);
    bcoeffs[0].push_back(ScalarJetField::constant(3, 1.0));
    ValuedForm bvol = ValuedForm::from_coeffs(box, ValueSpace::scalar(), 3, bcoeffs);
    CHECK_THROWS(integrate_top(bvol, QuadratureGrid::cubic(3, 4)));
  }
}
