#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "csgrav/core.hpp"

/// Linear algebra of gl(m), its eta-orthogonal subalgebra k, the
/// complementary subspace p, the affine algebra a(m) = gl(m) (+) R^m and
/// the affine group A(m,R), together with the invariant pairings, the
/// k <-> R^3 isomorphism, brackets, adjoint action and exponentials.
///
/// All operations are pure functions of their arguments; values are
/// immutable after construction and safe for concurrent use.
namespace csgrav {

/// Element of gl(m,R).
struct GlElt {
  Eigen::MatrixXd mat;

  GlElt() = default;
  explicit GlElt(Eigen::MatrixXd m_) : mat(std::move(m_)) {
    if (mat.rows() != mat.cols()) throw DimensionError("GlElt: matrix must be square");
  }
  static GlElt zero(int m) { return GlElt(Eigen::MatrixXd::Zero(m, m)); }
  static GlElt identity(int m) { return GlElt(Eigen::MatrixXd::Identity(m, m)); }
  /// Elementary matrix E^i_j: single 1 at row i, column j (0-based).
  static GlElt elementary(int m, int i, int j) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, m);
    e(i, j) = 1.0;
    return GlElt(e);
  }
  int dim() const { return static_cast<int>(mat.rows()); }
};

/// Element of the affine algebra a(m) = gl(m) (+) R^m, realized as the
/// block matrix [[lin, trans], [0, 0]] inside gl(m+1).
struct AffElt {
  GlElt lin;
  Eigen::VectorXd trans;

  AffElt() = default;
  AffElt(GlElt l, Eigen::VectorXd t) : lin(std::move(l)), trans(std::move(t)) {
    if (lin.dim() != trans.size()) throw DimensionError("AffElt: block sizes differ");
  }
  static AffElt zero(int m) { return AffElt(GlElt::zero(m), Eigen::VectorXd::Zero(m)); }
  static AffElt from_linear(GlElt a) {
    const int m = a.dim();
    return AffElt(std::move(a), Eigen::VectorXd::Zero(m));
  }
  static AffElt from_translation(Eigen::VectorXd t) {
    const int m = static_cast<int>(t.size());
    return AffElt(GlElt::zero(m), std::move(t));
  }
  int dim() const { return lin.dim(); }
};

/// Element of A(m,R), the block matrix [[lin, trans], [0, 1]].
struct AffGroupElt {
  Eigen::MatrixXd lin;
  Eigen::VectorXd trans;

  AffGroupElt() = default;
  AffGroupElt(Eigen::MatrixXd l, Eigen::VectorXd t) : lin(std::move(l)), trans(std::move(t)) {
    if (lin.rows() != lin.cols() || lin.rows() != trans.size())
      throw DimensionError("AffGroupElt: block sizes differ");
    if (std::abs(lin.determinant()) <= kDetTol)
      throw SingularValue("AffGroupElt: linear part is singular");
  }
  static AffGroupElt identity(int m) {
    return AffGroupElt(Eigen::MatrixXd::Identity(m, m), Eigen::VectorXd::Zero(m));
  }
  int dim() const { return static_cast<int>(lin.rows()); }

  AffGroupElt compose(const AffGroupElt& o) const {
    return AffGroupElt(lin * o.lin, lin * o.trans + trans);
  }
  AffGroupElt inverse() const {
    Eigen::MatrixXd li = lin.inverse();
    return AffGroupElt(li, -(li * trans));
  }
};

enum class PairingKind {
  GlEta,  ///< pairing <a,b> = eta^{ij} eta_{kl} a^k_i b^l_j on gl(m)
  Aff3,   ///< its extension to a(3): p + 0 orthogonal to k (+) R^3, cross pairing via iso
};

/// Splits a into its k and p parts:
///   k = (a - eta a^T eta)/2  satisfies  x eta + eta x^T = 0,
///   p = (a + eta a^T eta)/2  satisfies  x eta - eta x^T = 0.
inline std::pair<GlElt, GlElt> project_kp(const GlElt& a, const Signature& sig) {
  if (a.dim() != sig.m) throw DimensionError("project_kp: dimension mismatch");
  const Eigen::MatrixXd eta = sig.eta();
  Eigen::MatrixXd conj = eta * a.mat.transpose() * eta;
  return {GlElt(0.5 * (a.mat - conj)), GlElt(0.5 * (a.mat + conj))};
}

/// Isomorphism R^3 -> k, xi |-> a with a^j_i = eta^{jk} eps_{ikl} xi^l
/// (upper index = row). eps_{123} = +1 throughout.
inline GlElt iso_k_r3(const Eigen::VectorXd& xi, const Signature& sig) {
  if (sig.m != 3 || xi.size() != 3) throw DimensionError("iso_k_r3: requires m = 3");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l)
        a(j, i) += sig.diag[j] * levi_civita3(i, j, l) * xi[l];
  return GlElt(a);
}

/// Inverse of iso_k_r3 on k: xi^n = (1/2) eps_{imn} eta_{jm} a^j_i.
inline Eigen::VectorXd iso_r3_k(const GlElt& a, const Signature& sig) {
  if (sig.m != 3 || a.dim() != 3) throw DimensionError("iso_r3_k: requires m = 3");
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(3);
  for (int n = 0; n < 3; ++n)
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m)
        xi[n] += 0.5 * levi_civita3(i, m, n) * sig.diag[m] * a.mat(m, i);
  return xi;
}

/// <a,b> = eta^{ij} eta_{kl} a^k_i b^l_j = tr(eta a^T eta b). Symmetric.
inline double pair_gl(const GlElt& a, const GlElt& b, const Signature& sig) {
  if (a.dim() != sig.m || b.dim() != sig.m) throw DimensionError("pair_gl: dimension mismatch");
  return (sig.eta_inv() * a.mat.transpose() * sig.eta() * b.mat).trace();
}

/// Extension of pair_gl to a(3): linear parts split through project_kp,
/// translations enter through iso_k_r3, k and R^3 pair only across:
///   <x,y> = <k_x, iso(t_y)> + <k_y, iso(t_x)> + <p_x, p_y>.
inline double pair_aff(const AffElt& x, const AffElt& y, const Signature& sig) {
  if (sig.m != 3) throw DimensionError("pair_aff: requires m = 3");
  if (x.dim() != 3 || y.dim() != 3) throw DimensionError("pair_aff: dimension mismatch");
  auto [kx, px] = project_kp(x.lin, sig);
  auto [ky, py] = project_kp(y.lin, sig);
  return pair_gl(kx, iso_k_r3(y.trans, sig), sig) +
         pair_gl(ky, iso_k_r3(x.trans, sig), sig) + pair_gl(px, py, sig);
}

inline GlElt bracket_gl(const GlElt& a, const GlElt& b) {
  if (a.dim() != b.dim()) throw DimensionError("bracket_gl: dimension mismatch");
  return GlElt(a.mat * b.mat - b.mat * a.mat);
}

/// Bracket of a(m) read off the block commutator:
///   [(a,xi),(b,zeta)] = ([a,b], a zeta - b xi).
inline AffElt bracket_aff(const AffElt& x, const AffElt& y) {
  if (x.dim() != y.dim()) throw DimensionError("bracket_aff: dimension mismatch");
  return AffElt(bracket_gl(x.lin, y.lin), x.lin.mat * y.trans - y.lin.mat * x.trans);
}

/// Adjoint action of g = (h,t) on x = (a,xi):
///   Ad_g x = (h a h^{-1}, h xi - h a h^{-1} t).
inline AffElt adjoint_aff(const AffGroupElt& g, const AffElt& x) {
  if (g.dim() != x.dim()) throw DimensionError("adjoint_aff: dimension mismatch");
  Eigen::MatrixXd conj = g.lin * x.lin.mat * g.lin.inverse();
  return AffElt(GlElt(conj), g.lin * x.trans - conj * g.trans);
}

namespace detail {
/// Scaling-and-squaring matrix exponential with series truncation at
/// relative term norm tol. The scale s is chosen so ||x||/2^s <= 0.5.
inline Eigen::MatrixXd exp_matrix(const Eigen::MatrixXd& x, double tol) {
  const int n = static_cast<int>(x.rows());
  const double norm = x.norm();
  int s = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++s;
  }
  const Eigen::MatrixXd a = x / std::pow(2.0, s);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 64; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (term.norm() < tol * std::max(1.0, result.norm())) break;
  }
  for (int i = 0; i < s; ++i) result = result * result;
  return result;
}
}  // namespace detail

inline Eigen::MatrixXd exp_gl(const GlElt& a, double tol = 1e-16) {
  return detail::exp_matrix(a.mat, tol);
}

/// Exponential of the (m+1)x(m+1) block embedding of x.
inline AffGroupElt exp_aff(const AffElt& x, double tol = 1e-16) {
  const int m = x.dim();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m + 1, m + 1);
  block.topLeftCorner(m, m) = x.lin.mat;
  block.topRightCorner(m, 1) = x.trans;
  Eigen::MatrixXd e = detail::exp_matrix(block, tol);
  return AffGroupElt(e.topLeftCorner(m, m), e.topRightCorner(m, 1));
}

/// Standard basis of gl(m): elementary matrices E^i_j in row-major order
/// of (i, j).
inline std::vector<GlElt> gl_basis(int m) {
  std::vector<GlElt> basis;
  basis.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) basis.push_back(GlElt::elementary(m, i, j));
  return basis;
}

/// Basis of p for m = 3: the six matrices (E^i_j + eta E^j_i eta)/2 over
/// row-major pairs i <= j (duplicates removed by the i <= j restriction).
inline std::vector<GlElt> p_basis3(const Signature& sig) {
  if (sig.m != 3) throw DimensionError("p_basis3: requires m = 3");
  const Eigen::MatrixXd eta = sig.eta();
  std::vector<GlElt> basis;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3, 3);
      e(i, j) += 0.5;
      Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 3);
      f(j, i) = 1.0;
      basis.push_back(GlElt(e + 0.5 * eta * f * eta));
    }
  return basis;
}

/// Basis of a(3) ordered p-block (6), k-block iso(e1..e3), translations
/// e1..e3. This fixes rows and columns of gram(Aff3).
inline std::vector<AffElt> aff3_basis(const Signature& sig) {
  std::vector<AffElt> basis;
  for (const GlElt& p : p_basis3(sig)) basis.push_back(AffElt::from_linear(p));
  for (int i = 0; i < 3; ++i)
    basis.push_back(AffElt::from_linear(iso_k_r3(Eigen::Vector3d::Unit(i), sig)));
  for (int i = 0; i < 3; ++i)
    basis.push_back(AffElt::from_translation(Eigen::Vector3d::Unit(i)));
  return basis;
}

/// Gram matrix of the chosen pairing over its standard basis. The caller
/// checks invertibility; nondegeneracy is a measured property.
inline Eigen::MatrixXd gram(PairingKind pk, const Signature& sig) {
  if (pk == PairingKind::GlEta) {
    const auto basis = gl_basis(sig.m);
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = pair_gl(basis[i], basis[j], sig);
    return g;
  }
  const auto basis = aff3_basis(sig);
  const int n = static_cast<int>(basis.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = pair_aff(basis[i], basis[j], sig);
  return g;
}

}  // namespace csgrav
