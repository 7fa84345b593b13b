#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "csgrav/algebra.hpp"
#include "csgrav/jets.hpp"

/// Differential forms on a chart with values in a tagged vector space.
/// Antisymmetry is structural: only coefficients over strictly
/// increasing multi-indices are stored. A form evaluates as a block
/// (all multi-indices x all value components at once) carrying jets up
/// to its declared order.
namespace csgrav {

// ---------------------------------------------------------------------------
// value spaces

struct ValueSpace {
  enum class Kind { Scalar, Vec, Gl, Aff };
  Kind kind = Kind::Scalar;
  int m = 0;

  static ValueSpace scalar() { return {Kind::Scalar, 0}; }
  static ValueSpace vec(int m) { return {Kind::Vec, m}; }
  static ValueSpace gl(int m) { return {Kind::Gl, m}; }
  static ValueSpace aff(int m) { return {Kind::Aff, m}; }

  /// Component count. Layout: Vec = xi^i; Gl = row-major a(r,c);
  /// Aff = Gl block row-major followed by the translation block.
  int dim() const {
    switch (kind) {
      case Kind::Scalar: return 1;
      case Kind::Vec: return m;
      case Kind::Gl: return m * m;
      case Kind::Aff: return m * m + m;
    }
    return 0;
  }

  bool operator==(const ValueSpace& o) const { return kind == o.kind && m == o.m; }
  bool operator!=(const ValueSpace& o) const { return !(*this == o); }
};

using CompVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 12, 1>;

inline CompVec components_of(const GlElt& a) {
  const int m = a.dim();
  CompVec v(m * m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) v[r * m + c] = a.mat(r, c);
  return v;
}

inline CompVec components_of(const AffElt& x) {
  const int m = x.dim();
  CompVec v(m * m + m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) v[r * m + c] = x.lin.mat(r, c);
  for (int i = 0; i < m; ++i) v[m * m + i] = x.trans[i];
  return v;
}

inline GlElt gl_from_components(const CompVec& v, int m) {
  Eigen::MatrixXd a(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a(r, c) = v[r * m + c];
  return GlElt(a);
}

inline AffElt aff_from_components(const CompVec& v, int m) {
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd t(m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a(r, c) = v[r * m + c];
  for (int i = 0; i < m; ++i) t[i] = v[m * m + i];
  return AffElt(GlElt(a), t);
}

// ---------------------------------------------------------------------------
// multi-index utilities (n <= 4)

inline int binom(int n, int p) {
  if (p < 0 || p > n) return 0;
  int r = 1;
  for (int i = 0; i < p; ++i) r = r * (n - i) / (i + 1);
  return r;
}

using MultiIndex = std::vector<int>;

/// Strictly increasing multi-indices of length p over {0..n-1}, in
/// lexicographic order. This order fixes the coefficient layout.
inline std::vector<MultiIndex> multi_indices(int n, int p) {
  std::vector<MultiIndex> out;
  MultiIndex idx(p);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == p) {
      out.push_back(idx);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (p == 0)
    out.push_back({});
  else
    rec(0, 0);
  return out;
}

inline int multi_index_rank(int n, const MultiIndex& I) {
  const auto all = multi_indices(n, static_cast<int>(I.size()));
  for (std::size_t r = 0; r < all.size(); ++r)
    if (all[r] == I) return static_cast<int>(r);
  throw DimensionError("multi_index_rank: not an increasing multi-index");
}

/// Merges increasing I and J. Returns the permutation sign relative to
/// the sorted concatenation, or 0 if they intersect.
inline int merge_sign(const MultiIndex& I, const MultiIndex& J, MultiIndex& K) {
  K.clear();
  K.reserve(I.size() + J.size());
  int inversions = 0;
  for (int j : J) {
    for (int i : I) {
      if (i == j) return 0;
      if (i > j) ++inversions;
    }
  }
  K.insert(K.end(), I.begin(), I.end());
  K.insert(K.end(), J.begin(), J.end());
  std::sort(K.begin(), K.end());
  return (inversions % 2 == 0) ? 1 : -1;
}

// ---------------------------------------------------------------------------
// form blocks

/// All coefficients of a form at one point: rows = increasing
/// multi-indices in lexicographic order, columns = value components.
/// Fixed-capacity storage (C(4,2) = 6 rows, aff(3) = 12 columns), so
/// evaluation does not touch the heap.
using BlockMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, 6, 12>;

struct FormBlock {
  int rows = 0, cols = 0, n = 0, order = 0;
  BlockMat value;
  std::array<BlockMat, 4> grad;    // grad[nu], valid when order >= 1
  std::array<BlockMat, 16> hess;   // hess[nu * n + rho], valid when order >= 2

  static FormBlock zeros(int rows, int cols, int n, int order) {
    FormBlock b;
    b.rows = rows;
    b.cols = cols;
    b.n = n;
    b.order = order;
    b.value = BlockMat::Zero(rows, cols);
    if (order >= 1)
      for (int nu = 0; nu < n; ++nu) b.grad[nu] = BlockMat::Zero(rows, cols);
    if (order >= 2)
      for (int i = 0; i < n * n; ++i) b.hess[i] = BlockMat::Zero(rows, cols);
    return b;
  }
};

// ---------------------------------------------------------------------------
// ValuedForm

class ValuedForm {
 public:
  using EvalFn = std::function<FormBlock(const Pt&, int)>;

  ValuedForm() = default;
  ValuedForm(Chart chart, ValueSpace space, int degree, int order, EvalFn fn)
      : chart_(std::move(chart)),
        space_(space),
        degree_(degree),
        order_(order),
        fn_(std::make_shared<EvalFn>(std::move(fn))) {
    if (degree_ < 0 || degree_ > chart_.n)
      throw DimensionError("ValuedForm: degree must be in [0, n]");
  }

  const Chart& chart() const { return chart_; }
  ValueSpace space() const { return space_; }
  int degree() const { return degree_; }
  int order() const { return order_; }
  int rows() const { return binom(chart_.n, degree_); }
  int cols() const { return space_.dim(); }

  FormBlock eval_block(const Pt& x, int want) const {
    if (want > order_) throw JetExhausted("ValuedForm: jet exhausted");
    return (*fn_)(x, want);
  }

  /// Assembles a form from one coefficient field per (multi-index,
  /// component) slot; coeffs[rank][component].
  static ValuedForm from_coeffs(const Chart& chart, ValueSpace space, int degree,
                                const std::vector<std::vector<ScalarJetField>>& coeffs) {
    const int rows = binom(chart.n, degree);
    const int cols = space.dim();
    if (static_cast<int>(coeffs.size()) != rows)
      throw DimensionError("from_coeffs: wrong number of multi-indices");
    int order = 2;
    for (const auto& row : coeffs) {
      if (static_cast<int>(row.size()) != cols)
        throw DimensionError("from_coeffs: wrong number of components");
      for (const auto& f : row) order = std::min(order, f.order());
    }
    const int n = chart.n;
    auto grid = std::make_shared<std::vector<std::vector<ScalarJetField>>>(coeffs);
    return ValuedForm(chart, space, degree, order,
                      [grid, rows, cols, n](const Pt& x, int want) {
                        FormBlock b = FormBlock::zeros(rows, cols, n, want);
                        for (int r = 0; r < rows; ++r)
                          for (int c = 0; c < cols; ++c) {
                            JetScalar j = (*grid)[r][c].eval(x, want);
                            b.value(r, c) = j.v;
                            if (want >= 1)
                              for (int nu = 0; nu < n; ++nu) b.grad[nu](r, c) = j.g[nu];
                            if (want >= 2)
                              for (int nu = 0; nu < n; ++nu)
                                for (int rho = 0; rho < n; ++rho)
                                  b.hess[nu * n + rho](r, c) = j.h(nu, rho);
                          }
                        return b;
                      });
  }

  static ValuedForm zero(const Chart& chart, ValueSpace space, int degree) {
    const int rows = binom(chart.n, degree);
    const int cols = space.dim();
    const int n = chart.n;
    return ValuedForm(chart, space, degree, 2, [rows, cols, n](const Pt&, int want) {
      return FormBlock::zeros(rows, cols, n, want);
    });
  }

 private:
  Chart chart_;
  ValueSpace space_{};
  int degree_ = 0;
  int order_ = 0;
  std::shared_ptr<const EvalFn> fn_;
};

inline ValuedForm operator+(const ValuedForm& a, const ValuedForm& b) {
  if (a.degree() != b.degree() || a.space() != b.space() || a.chart().n != b.chart().n)
    throw DimensionError("ValuedForm +: shape mismatch");
  auto fa = std::make_shared<ValuedForm>(a);
  auto fb = std::make_shared<ValuedForm>(b);
  return ValuedForm(a.chart(), a.space(), a.degree(), std::min(a.order(), b.order()),
                    [fa, fb](const Pt& x, int want) {
                      FormBlock ba = fa->eval_block(x, want);
                      FormBlock bb = fb->eval_block(x, want);
                      ba.value += bb.value;
                      if (want >= 1)
                        for (int nu = 0; nu < ba.n; ++nu) ba.grad[nu] += bb.grad[nu];
                      if (want >= 2)
                        for (int i = 0; i < ba.n * ba.n; ++i) ba.hess[i] += bb.hess[i];
                      return ba;
                    });
}

inline ValuedForm operator*(double c, const ValuedForm& a) {
  auto fa = std::make_shared<ValuedForm>(a);
  return ValuedForm(a.chart(), a.space(), a.degree(), a.order(),
                    [fa, c](const Pt& x, int want) {
                      FormBlock b = fa->eval_block(x, want);
                      b.value *= c;
                      if (want >= 1)
                        for (int nu = 0; nu < b.n; ++nu) b.grad[nu] *= c;
                      if (want >= 2)
                        for (int i = 0; i < b.n * b.n; ++i) b.hess[i] *= c;
                      return b;
                    });
}

inline ValuedForm operator-(const ValuedForm& a, const ValuedForm& b) {
  return a + (-1.0) * b;
}

/// Applies a constant linear map to the value components (e.g. a
/// projector or an algebra embedding).
inline ValuedForm linear_map(const ValuedForm& a, const Eigen::MatrixXd& map,
                             ValueSpace out_space) {
  if (map.cols() != a.cols() || map.rows() != out_space.dim())
    throw DimensionError("linear_map: shape mismatch");
  auto fa = std::make_shared<ValuedForm>(a);
  auto m = std::make_shared<Eigen::MatrixXd>(map);
  const int rows = a.rows();
  const int out_cols = out_space.dim();
  return ValuedForm(a.chart(), out_space, a.degree(), a.order(),
                    [fa, m, rows, out_cols](const Pt& x, int want) {
                      FormBlock in = fa->eval_block(x, want);
                      FormBlock out = FormBlock::zeros(rows, out_cols, in.n, want);
                      out.value = in.value * m->transpose();
                      if (want >= 1)
                        for (int nu = 0; nu < in.n; ++nu)
                          out.grad[nu] = in.grad[nu] * m->transpose();
                      if (want >= 2)
                        for (int i = 0; i < in.n * in.n; ++i)
                          out.hess[i] = in.hess[i] * m->transpose();
                      return out;
                    });
}

// ---------------------------------------------------------------------------
// exterior derivative

/// (d alpha)_{k0<...<kp} = sum_a (-1)^a d_{k_a} alpha_{K \ k_a}.
/// The output carries one jet level less than the input.
inline ValuedForm ext_d(const ValuedForm& alpha) {
  const int n = alpha.chart().n;
  const int p = alpha.degree();
  if (p >= n) throw DimensionError("ext_d: degree overflow");
  if (alpha.order() < 1) throw JetExhausted("ext_d: jet exhausted");

  struct Term {
    int axis, in_rank;
    double sign;
  };
  const auto out_indices = multi_indices(n, p + 1);
  const auto in_indices = multi_indices(n, p);
  std::vector<std::vector<Term>> plan(out_indices.size());
  for (std::size_t r = 0; r < out_indices.size(); ++r) {
    const MultiIndex& K = out_indices[r];
    for (std::size_t a = 0; a < K.size(); ++a) {
      MultiIndex rest;
      for (std::size_t b = 0; b < K.size(); ++b)
        if (b != a) rest.push_back(K[b]);
      plan[r].push_back({K[a], multi_index_rank(n, rest), (a % 2 == 0) ? 1.0 : -1.0});
    }
  }

  auto fa = std::make_shared<ValuedForm>(alpha);
  auto pl = std::make_shared<std::vector<std::vector<Term>>>(std::move(plan));
  const int out_rows = static_cast<int>(out_indices.size());
  const int cols = alpha.cols();
  return ValuedForm(
      alpha.chart(), alpha.space(), p + 1, alpha.order() - 1,
      [fa, pl, out_rows, cols, n](const Pt& x, int want) {
        FormBlock in = fa->eval_block(x, want + 1);
        FormBlock out = FormBlock::zeros(out_rows, cols, n, want);
        for (int r = 0; r < out_rows; ++r)
          for (const auto& t : (*pl)[r]) {
            out.value.row(r) += t.sign * in.grad[t.axis].row(t.in_rank);
            if (want >= 1)
              for (int nu = 0; nu < n; ++nu)
                out.grad[nu].row(r) += t.sign * in.hess[t.axis * n + nu].row(t.in_rank);
          }
        return out;
      });
}

// ---------------------------------------------------------------------------
// wedge products against a constant bilinear map

/// Constant bilinear map between component spaces, stored as sparse
/// triplets out[c] += coef * a[u] * b[v].
struct BilinearMap {
  ValueSpace a, b, out;
  struct Triplet {
    int c, u, v;
    double coef;
  };
  std::vector<Triplet> triplets;

  /// Builds the triplet table by evaluating fn on all basis pairs.
  static BilinearMap from_function(
      ValueSpace a, ValueSpace b, ValueSpace out,
      const std::function<CompVec(const CompVec&, const CompVec&)>& fn) {
    BilinearMap map{a, b, out, {}};
    const int da = a.dim(), db = b.dim();
    CompVec ea = CompVec::Zero(da), eb = CompVec::Zero(db);
    for (int u = 0; u < da; ++u) {
      ea[u] = 1.0;
      for (int v = 0; v < db; ++v) {
        eb[v] = 1.0;
        CompVec r = fn(ea, eb);
        for (int c = 0; c < out.dim(); ++c)
          if (r[c] != 0.0) map.triplets.push_back({c, u, v, r[c]});
        eb[v] = 0.0;
      }
      ea[u] = 0.0;
    }
    return map;
  }
};

/// B(alpha /\ beta): shuffle antisymmetrization of the pointwise
/// bilinear map. Satisfies B(a/\b) = (-1)^{pq} B(b/\a) for symmetric B
/// and the graded Leibniz rule with ext_d.
inline ValuedForm wedge_bilinear(const BilinearMap& bmap, const ValuedForm& alpha,
                                 const ValuedForm& beta) {
  if (alpha.space() != bmap.a || beta.space() != bmap.b)
    throw DimensionError("wedge_bilinear: value-space mismatch");
  if (alpha.chart().n != beta.chart().n)
    throw DimensionError("wedge_bilinear: chart mismatch");
  const int n = alpha.chart().n;
  const int p = alpha.degree(), q = beta.degree();
  if (p + q > n) throw DimensionError("wedge_bilinear: degree overflow");

  struct Split {
    int ra, rb;
    double sign;
  };
  const auto out_indices = multi_indices(n, p + q);
  std::vector<std::vector<Split>> plan(out_indices.size());
  const auto ais = multi_indices(n, p);
  const auto bis = multi_indices(n, q);
  for (std::size_t ra = 0; ra < ais.size(); ++ra)
    for (std::size_t rb = 0; rb < bis.size(); ++rb) {
      MultiIndex merged;
      const int s = merge_sign(ais[ra], bis[rb], merged);
      if (s == 0) continue;
      plan[multi_index_rank(n, merged)].push_back(
          {static_cast<int>(ra), static_cast<int>(rb), static_cast<double>(s)});
    }

  auto fa = std::make_shared<ValuedForm>(alpha);
  auto fb = std::make_shared<ValuedForm>(beta);
  auto pl = std::make_shared<std::vector<std::vector<Split>>>(std::move(plan));
  auto trips = std::make_shared<std::vector<BilinearMap::Triplet>>(bmap.triplets);
  const int out_rows = static_cast<int>(out_indices.size());
  const int out_cols = bmap.out.dim();
  return ValuedForm(
      alpha.chart(), bmap.out, p + q, std::min(alpha.order(), beta.order()),
      [fa, fb, pl, trips, out_rows, out_cols, n](const Pt& x, int want) {
        FormBlock ba = fa->eval_block(x, want);
        FormBlock bb = fb->eval_block(x, want);
        FormBlock out = FormBlock::zeros(out_rows, out_cols, n, want);
        for (int r = 0; r < out_rows; ++r)
          for (const auto& sp : (*pl)[r])
            for (const auto& t : *trips) {
              const double cf = sp.sign * t.coef;
              const double av = ba.value(sp.ra, t.u), bv = bb.value(sp.rb, t.v);
              out.value(r, t.c) += cf * av * bv;
              if (want >= 1)
                for (int nu = 0; nu < n; ++nu)
                  out.grad[nu](r, t.c) +=
                      cf * (ba.grad[nu](sp.ra, t.u) * bv + av * bb.grad[nu](sp.rb, t.v));
              if (want >= 2)
                for (int nu = 0; nu < n; ++nu)
                  for (int rho = 0; rho < n; ++rho)
                    out.hess[nu * n + rho](r, t.c) +=
                        cf * (ba.hess[nu * n + rho](sp.ra, t.u) * bv +
                              ba.grad[nu](sp.ra, t.u) * bb.grad[rho](sp.rb, t.v) +
                              ba.grad[rho](sp.ra, t.u) * bb.grad[nu](sp.rb, t.v) +
                              av * bb.hess[nu * n + rho](sp.rb, t.v));
            }
        return out;
      });
}

inline BilinearMap make_pair_bilinear(PairingKind pk, const Signature& sig) {
  if (pk == PairingKind::GlEta) {
    ValueSpace s = ValueSpace::gl(sig.m);
    return BilinearMap::from_function(s, s, ValueSpace::scalar(),
                                      [sig, s](const CompVec& a, const CompVec& b) {
                                        CompVec r(1);
                                        r[0] = pair_gl(gl_from_components(a, sig.m),
                                                       gl_from_components(b, sig.m), sig);
                                        return r;
                                      });
  }
  ValueSpace s = ValueSpace::aff(3);
  return BilinearMap::from_function(s, s, ValueSpace::scalar(),
                                    [sig](const CompVec& a, const CompVec& b) {
                                      CompVec r(1);
                                      r[0] = pair_aff(aff_from_components(a, 3),
                                                      aff_from_components(b, 3), sig);
                                      return r;
                                    });
}

inline BilinearMap make_bracket_bilinear(ValueSpace s) {
  if (s.kind == ValueSpace::Kind::Gl)
    return BilinearMap::from_function(s, s, s, [s](const CompVec& a, const CompVec& b) {
      return components_of(bracket_gl(gl_from_components(a, s.m), gl_from_components(b, s.m)));
    });
  if (s.kind == ValueSpace::Kind::Aff)
    return BilinearMap::from_function(s, s, s, [s](const CompVec& a, const CompVec& b) {
      return components_of(
          bracket_aff(aff_from_components(a, s.m), aff_from_components(b, s.m)));
    });
  throw DimensionError("make_bracket_bilinear: not an algebra-valued space");
}

/// gl(m) x R^m -> R^m, (a, xi) |-> a xi. Used for connection wedges
/// acting on vector-valued forms.
inline BilinearMap make_action_bilinear(int m) {
  return BilinearMap::from_function(
      ValueSpace::gl(m), ValueSpace::vec(m), ValueSpace::vec(m),
      [m](const CompVec& a, const CompVec& b) {
        CompVec r = CompVec::Zero(m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) r[i] += a[i * m + j] * b[j];
        return r;
      });
}

/// Scalar-valued wedge of two algebra- (or vector-) valued forms under
/// the chosen pairing.
inline ValuedForm wedge_pair(PairingKind pk, const Signature& sig, const ValuedForm& alpha,
                             const ValuedForm& beta) {
  return wedge_bilinear(make_pair_bilinear(pk, sig), alpha, beta);
}

/// [alpha /\ beta] for forms valued in the same matrix algebra.
inline ValuedForm wedge_bracket(const ValuedForm& alpha, const ValuedForm& beta) {
  if (alpha.space() != beta.space())
    throw DimensionError("wedge_bracket: algebra mismatch");
  return wedge_bilinear(make_bracket_bilinear(alpha.space()), alpha, beta);
}

// ---------------------------------------------------------------------------
// evaluation and quadrature

namespace detail {
/// Cofactor determinant for the tiny minors of eval_form. Closed-form
/// expansion (no pivoting), so transposing two columns negates the
/// result exactly for 2x2 minors.
inline double small_det(const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>& m) {
  switch (m.rows()) {
    case 0: return 1.0;
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: {
      double det = 0.0;
      for (int j = 0; j < 4; ++j) {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> minor(3, 3);
        for (int r = 1; r < 4; ++r) {
          int cc = 0;
          for (int c = 0; c < 4; ++c)
            if (c != j) minor(r - 1, cc++) = m(r, c);
        }
        det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * small_det(minor);
      }
      return det;
    }
  }
}
}  // namespace detail

/// Full antisymmetric evaluation on tangent vectors:
/// sum_I alpha_I(x) det(rows I of [v1 ... vp]).
inline CompVec eval_form(const ValuedForm& alpha, const Pt& x, const std::vector<Pt>& vs) {
  const int p = alpha.degree();
  const int n = alpha.chart().n;
  if (static_cast<int>(vs.size()) != p) throw DimensionError("eval_form: need p vectors");
  for (const Pt& v : vs)
    if (v.size() != n) throw DimensionError("eval_form: vector dimension mismatch");
  FormBlock b = alpha.eval_block(x, 0);
  const auto indices = multi_indices(n, p);
  CompVec out = CompVec::Zero(alpha.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> minor(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) minor(i, j) = vs[j][indices[r][i]];
    out += detail::small_det(minor) * b.value.row(r).transpose();
  }
  return out;
}

namespace detail {
inline Pt grid_point(const Chart& chart, const QuadratureGrid& grid, std::size_t flat) {
  Pt x = Pt::Zero(chart.n);
  for (int axis = chart.n - 1; axis >= 0; --axis) {
    const std::size_t c = static_cast<std::size_t>(grid.counts[axis]);
    const std::size_t i = flat % c;
    flat /= c;
    x[axis] = chart.lo[axis] +
              (chart.hi[axis] - chart.lo[axis]) * static_cast<double>(i) / static_cast<double>(c);
  }
  return x;
}
}  // namespace detail

/// Rectangle rule on the periodic chart (exact for trigonometric
/// polynomials of per-axis bandwidth below the sample count). Values
/// are accumulated with the fixed pairwise reduction, so the result is
/// bit-identical for any worker count.
inline double integrate_top(const ValuedForm& alpha, const QuadratureGrid& grid) {
  if (!alpha.chart().periodic_kind())
    throw std::invalid_argument("integrate_top: chart must be periodic");
  if (alpha.degree() != alpha.chart().n)
    throw DimensionError("integrate_top: form must have top degree");
  if (alpha.space() != ValueSpace::scalar())
    throw DimensionError("integrate_top: form must be scalar-valued");
  if (grid.n != alpha.chart().n) throw DimensionError("integrate_top: grid dimension");
  const std::size_t total = grid.total();
  std::vector<double> samples(total);
  const Chart chart = alpha.chart();
  parallel_for(total, [&](std::size_t flat) {
    samples[flat] = alpha.eval_block(detail::grid_point(chart, grid, flat), 0).value(0, 0);
  });
  return pairwise_sum(samples) * chart.volume() / static_cast<double>(total);
}

/// L^1-type magnitude of a top form: quadrature of |coefficient|.
inline double integrate_abs_top(const ValuedForm& alpha, const QuadratureGrid& grid) {
  if (alpha.degree() != alpha.chart().n || alpha.space() != ValueSpace::scalar())
    throw DimensionError("integrate_abs_top: need a scalar top form");
  const std::size_t total = grid.total();
  std::vector<double> samples(total);
  const Chart chart = alpha.chart();
  parallel_for(total, [&](std::size_t flat) {
    samples[flat] =
        std::abs(alpha.eval_block(detail::grid_point(chart, grid, flat), 0).value(0, 0));
  });
  return pairwise_sum(samples) * chart.volume() / static_cast<double>(total);
}

/// Max absolute coefficient of a form over the given points.
inline double sup_norm(const ValuedForm& alpha, const std::vector<Pt>& points) {
  double sup = 0.0;
  for (const Pt& x : points) {
    FormBlock b = alpha.eval_block(x, 0);
    sup = std::max(sup, b.value.cwiseAbs().maxCoeff());
  }
  return sup;
}

/// Uniformly sampled points of the chart for pointwise residual checks.
inline std::vector<Pt> sample_points(const Chart& chart, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Pt> pts(count, Pt::Zero(chart.n));
  for (Pt& x : pts)
    for (int i = 0; i < chart.n; ++i) x[i] = rng.uniform(chart.lo[i], chart.hi[i]);
  return pts;
}

}  // namespace csgrav
