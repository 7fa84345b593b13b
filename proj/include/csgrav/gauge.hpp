#pragma once

#include <utility>
#include <vector>

#include "csgrav/forms.hpp"

/// Connection potentials, curvature, gauge transformations and the
/// Chern-Simons family of forms on a chart.
///
/// A gauge map is stored as a product of exponential factors
/// g(x) = exp(chi_1(x)) ... exp(chi_r(x)); Maurer-Cartan forms and
/// adjoint actions are evaluated by term-wise differentiation of the
/// exponential series, never by finite differences, so every identity
/// below holds at roundoff level.
namespace csgrav {

/// Local connection potential: a degree-1 form valued in gl(m) or a(m).
using GaugePotential = ValuedForm;

namespace detail {

inline void check_potential(const ValuedForm& a, const char* who) {
  if (a.degree() != 1) throw DimensionError(std::string(who) + ": potential must be degree 1");
  if (a.space().kind != ValueSpace::Kind::Gl && a.space().kind != ValueSpace::Kind::Aff)
    throw DimensionError(std::string(who) + ": potential must be algebra-valued");
}

/// Algebra-valued first-order jet: value and first derivatives of an
/// algebra element along the chart axes.
struct AlgJet {
  CompVec val;
  std::array<CompVec, 4> d;
  int n = 0;
  int order = 0;

  static AlgJet zeros(int dim, int n, int order) {
    AlgJet j;
    j.n = n;
    j.order = order;
    j.val = CompVec::Zero(dim);
    if (order >= 1)
      for (int nu = 0; nu < n; ++nu) j.d[nu] = CompVec::Zero(dim);
    return j;
  }

  double norm() const {
    double s = val.cwiseAbs().maxCoeff();
    if (order >= 1)
      for (int nu = 0; nu < n; ++nu) s = std::max(s, d[nu].cwiseAbs().maxCoeff());
    return s;
  }
};

inline CompVec apply_bilinear(const std::vector<BilinearMap::Triplet>& trips, int out_dim,
                              const CompVec& a, const CompVec& b) {
  CompVec out = CompVec::Zero(out_dim);
  for (const auto& t : trips) out[t.c] += t.coef * a[t.u] * b[t.v];
  return out;
}

inline AlgJet bracket_jet(const BilinearMap& br, const AlgJet& a, const AlgJet& b) {
  AlgJet out = AlgJet::zeros(br.out.dim(), a.n, std::min(a.order, b.order));
  out.val = apply_bilinear(br.triplets, br.out.dim(), a.val, b.val);
  if (out.order >= 1)
    for (int nu = 0; nu < a.n; ++nu)
      out.d[nu] = apply_bilinear(br.triplets, br.out.dim(), a.d[nu], b.val) +
                  apply_bilinear(br.triplets, br.out.dim(), a.val, b.d[nu]);
  return out;
}

inline constexpr double kSeriesTol = 1e-16;
inline constexpr int kSeriesMaxTerms = 64;

/// Ad_{exp(chi)^{-1}} x = e^{-ad_chi} x = sum_k (-1)^k ad_chi^k(x) / k!.
inline AlgJet ad_exp_inverse(const BilinearMap& br, const AlgJet& chi, const AlgJet& x) {
  AlgJet acc = x;
  AlgJet term = x;
  for (int k = 1; k <= kSeriesMaxTerms; ++k) {
    term = bracket_jet(br, chi, term);
    const double scale = -1.0 / static_cast<double>(k);
    term.val *= scale;
    if (term.order >= 1)
      for (int nu = 0; nu < term.n; ++nu) term.d[nu] *= scale;
    acc.val += term.val;
    if (acc.order >= 1)
      for (int nu = 0; nu < acc.n; ++nu) acc.d[nu] += term.d[nu];
    if (term.norm() < kSeriesTol * (1.0 + acc.norm())) return acc;
  }
  throw std::runtime_error("ad_exp_inverse: series did not converge in 64 terms");
}

/// One direction of the left Maurer-Cartan form of exp(chi):
/// lambda_mu = sum_k (-ad_chi)^k (d_mu chi) / (k+1)!.
inline AlgJet mc_direction(const BilinearMap& br, const AlgJet& chi, const AlgJet& dchi_mu) {
  AlgJet acc = dchi_mu;
  AlgJet term = dchi_mu;  // term = (-1)^k ad^k(dchi)/k!
  for (int k = 1; k <= kSeriesMaxTerms; ++k) {
    term = bracket_jet(br, chi, term);
    const double scale = -1.0 / static_cast<double>(k);
    term.val *= scale;
    if (term.order >= 1)
      for (int nu = 0; nu < term.n; ++nu) term.d[nu] *= scale;
    const double weight = 1.0 / static_cast<double>(k + 1);
    acc.val += weight * term.val;
    if (acc.order >= 1)
      for (int nu = 0; nu < acc.n; ++nu) acc.d[nu] += weight * term.d[nu];
    if (term.norm() < kSeriesTol * (1.0 + acc.norm())) return acc;
  }
  throw std::runtime_error("mc_direction: series did not converge in 64 terms");
}

/// Reads the jet of an algebra-valued 0-form block as an AlgJet.
inline AlgJet chi_jet(const FormBlock& b, int order) {
  AlgJet j = AlgJet::zeros(b.cols, b.n, order);
  j.val = b.value.row(0).transpose();
  if (order >= 1)
    for (int nu = 0; nu < b.n; ++nu) j.d[nu] = b.grad[nu].row(0).transpose();
  return j;
}

/// Jet of d_mu chi: value = grad, derivatives = Hessian row.
inline AlgJet dchi_jet(const FormBlock& b, int mu, int order) {
  AlgJet j = AlgJet::zeros(b.cols, b.n, order);
  j.val = b.grad[mu].row(0).transpose();
  if (order >= 1)
    for (int nu = 0; nu < b.n; ++nu) j.d[nu] = b.hess[mu * b.n + nu].row(0).transpose();
  return j;
}

}  // namespace detail

/// Product of exponential factors g(x) = exp(chi_1(x)) ... exp(chi_r(x)).
/// The empty product is the identity map.
class GaugeMap {
 public:
  static GaugeMap identity(const Chart& chart, ValueSpace space) {
    GaugeMap g;
    g.chart_ = chart;
    g.space_ = space;
    return g;
  }

  static GaugeMap from_generator(const ValuedForm& chi) {
    if (chi.degree() != 0) throw DimensionError("GaugeMap: generator must be a 0-form");
    if (chi.space().kind != ValueSpace::Kind::Gl && chi.space().kind != ValueSpace::Kind::Aff)
      throw DimensionError("GaugeMap: generator must be algebra-valued");
    GaugeMap g;
    g.chart_ = chi.chart();
    g.space_ = chi.space();
    g.factors_.push_back(chi);
    return g;
  }

  /// Pointwise product g * h (this factors first, then h's).
  GaugeMap compose(const GaugeMap& h) const {
    if (!(space_ == h.space_)) throw DimensionError("GaugeMap::compose: algebra mismatch");
    GaugeMap g = *this;
    for (const auto& f : h.factors_) g.factors_.push_back(f);
    return g;
  }

  const Chart& chart() const { return chart_; }
  ValueSpace space() const { return space_; }
  const std::vector<ValuedForm>& factors() const { return factors_; }
  bool is_identity() const { return factors_.empty(); }

  /// Realized group value at a point (for diagnostics; always invertible).
  AffGroupElt value_aff(const Pt& x) const {
    if (space_.kind != ValueSpace::Kind::Aff) throw DimensionError("value_aff: not affine");
    AffGroupElt g = AffGroupElt::identity(space_.m);
    for (const auto& f : factors_) {
      FormBlock b = f.eval_block(x, 0);
      g = g.compose(exp_aff(aff_from_components(b.value.row(0).transpose(), space_.m)));
    }
    return g;
  }

  Eigen::MatrixXd value_gl(const Pt& x) const {
    if (space_.kind != ValueSpace::Kind::Gl) throw DimensionError("value_gl: not linear");
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(space_.m, space_.m);
    for (const auto& f : factors_) {
      FormBlock b = f.eval_block(x, 0);
      g = g * exp_gl(gl_from_components(b.value.row(0).transpose(), space_.m));
    }
    return g;
  }

 private:
  Chart chart_;
  ValueSpace space_{};
  std::vector<ValuedForm> factors_;
};

/// F = dA + (1/2) [A /\ A].
inline ValuedForm curvature(const GaugePotential& a) {
  detail::check_potential(a, "curvature");
  return ext_d(a) + 0.5 * wedge_bracket(a, a);
}

namespace detail {
/// Shared evaluator folding the factors of g left to right over the
/// directions of the chart:
///   A |-> Ad_{exp(chi)^{-1}} A (+ lambda_{exp(chi)} when include_mc).
/// Starting from A = 0 with include_mc gives the Maurer-Cartan form of
/// g; starting from a potential gives Ad_{g^{-1}} A or the full gauge
/// transform. Every component and direction is evaluated in one pass
/// per point.
inline ValuedForm transform_core(const ValuedForm* a, const GaugeMap& g, bool include_mc) {
  const ValueSpace space = g.space();
  if (a != nullptr) {
    if (a->space().kind != ValueSpace::Kind::Gl && a->space().kind != ValueSpace::Kind::Aff)
      throw DimensionError("gauge transform: form must be algebra-valued");
    if (!(a->space() == space)) throw DimensionError("gauge transform: algebra mismatch");
    if (include_mc && a->degree() != 1)
      throw DimensionError("gauge_transform: potential must be degree 1");
  }
  const Chart chart = a != nullptr ? a->chart() : g.chart();
  const int degree = a != nullptr ? a->degree() : 1;
  const int n = chart.n;
  const int rows = binom(n, degree);
  const int dim = space.dim();
  auto bracket = std::make_shared<BilinearMap>(make_bracket_bilinear(space));
  auto factors = std::make_shared<std::vector<ValuedForm>>(g.factors());
  std::shared_ptr<ValuedForm> base =
      a != nullptr ? std::make_shared<ValuedForm>(*a) : nullptr;

  int order = base ? std::min(base->order(), 1) : 1;
  for (const auto& f : *factors) order = std::min(order, f.order() - 1);

  return ValuedForm(
      chart, space, degree, order,
      [bracket, factors, base, include_mc, rows, n, dim](const Pt& x, int want) {
        std::vector<detail::AlgJet> out(rows, detail::AlgJet::zeros(dim, n, want));
        if (base) {
          FormBlock ab = base->eval_block(x, want);
          for (int r = 0; r < rows; ++r) {
            out[r].val = ab.value.row(r).transpose();
            if (want >= 1)
              for (int nu = 0; nu < n; ++nu) out[r].d[nu] = ab.grad[nu].row(r).transpose();
          }
        }
        for (const auto& f : *factors) {
          FormBlock cb = f.eval_block(x, want + 1);
          detail::AlgJet chi = detail::chi_jet(cb, want);
          for (int r = 0; r < rows; ++r) {
            detail::AlgJet moved = detail::ad_exp_inverse(*bracket, chi, out[r]);
            if (include_mc) {
              detail::AlgJet mc =
                  detail::mc_direction(*bracket, chi, detail::dchi_jet(cb, r, want));
              moved.val += mc.val;
              if (want >= 1)
                for (int nu = 0; nu < n; ++nu) moved.d[nu] += mc.d[nu];
            }
            out[r] = moved;
          }
        }
        FormBlock blk = FormBlock::zeros(rows, dim, n, want);
        for (int r = 0; r < rows; ++r) {
          blk.value.row(r) = out[r].val.transpose();
          if (want >= 1)
            for (int nu = 0; nu < n; ++nu) blk.grad[nu].row(r) = out[r].d[nu].transpose();
        }
        return blk;
      });
}
}  // namespace detail

/// Left Maurer-Cartan potential g^{-1} dg, computed by term-wise
/// differentiation of the exponential series. Output carries a 1-jet
/// (second derivatives of the generators propagate through the series).
inline GaugePotential maurer_cartan(const GaugeMap& g) {
  return detail::transform_core(nullptr, g, true);
}

/// Ad_{g^{-1}} applied pointwise to the values of an algebra-valued
/// form of any degree.
inline ValuedForm adjoint_inverse(const ValuedForm& a, const GaugeMap& g) {
  return detail::transform_core(&a, g, false);
}

/// Right-action gauge transformation A |-> Ad_{g^{-1}} A + g^{-1} dg.
/// The composition law transform(transform(A,g),h) = transform(A, g*h)
/// pins this convention.
inline GaugePotential gauge_transform(const GaugePotential& a, const GaugeMap& g) {
  return detail::transform_core(&a, g, true);
}

/// Local model of pulling a canonical connection back along a section in
/// the gauge g: identical to gauge_transform.
inline GaugePotential section_pullback(const GaugeMap& g, const GaugePotential& a) {
  return gauge_transform(a, g);
}

/// <A /\ dA> + (1/3) <A /\ [A /\ A]>.
inline ValuedForm cs_form(const GaugePotential& a, PairingKind pk, const Signature& sig) {
  detail::check_potential(a, "cs_form");
  if (a.chart().n < 3) throw DimensionError("cs_form: chart dimension must be >= 3");
  return wedge_pair(pk, sig, a, ext_d(a)) +
         (1.0 / 3.0) * wedge_pair(pk, sig, a, wedge_bracket(a, a));
}

/// Transgression Tq(A, F) = <A /\ F> - (1/6) <A /\ [A /\ A]>. Computed
/// through the curvature route; agrees with cs_form identically.
inline ValuedForm transgression_form(const GaugePotential& a, PairingKind pk,
                                     const Signature& sig) {
  detail::check_potential(a, "transgression_form");
  if (a.chart().n < 3) throw DimensionError("transgression_form: chart dimension must be >= 3");
  return wedge_pair(pk, sig, a, curvature(a)) -
         (1.0 / 6.0) * wedge_pair(pk, sig, a, wedge_bracket(a, a));
}

/// q(F) = <F /\ F>, a 4-form.
inline ValuedForm chern_weil_form(const GaugePotential& a, PairingKind pk,
                                  const Signature& sig) {
  detail::check_potential(a, "chern_weil_form");
  if (a.chart().n < 4) throw DimensionError("chern_weil_form: chart dimension must be >= 4");
  ValuedForm f = curvature(a);
  return wedge_pair(pk, sig, f, f);
}

/// (1/6) <lambda /\ [lambda /\ lambda]> for lambda = g^{-1} dg.
inline ValuedForm wzw_form(const GaugeMap& g, PairingKind pk, const Signature& sig) {
  if (g.chart().n < 3) throw DimensionError("wzw_form: chart dimension must be >= 3");
  GaugePotential lambda = maurer_cartan(g);
  return (1.0 / 6.0) * wedge_pair(pk, sig, lambda, wedge_bracket(lambda, lambda));
}

/// Residual of the gauge transformation identity for the Chern-Simons
/// form: cs(A^g) - cs(A) - d<Ad_{g^{-1}} A /\ lambda> + wzw(g).
/// Vanishes whenever the pairing is invariant on the sector where the
/// potential and the gauge generators take values.
inline ValuedForm gauge_defect(const GaugePotential& a, const GaugeMap& g, PairingKind pk,
                               const Signature& sig) {
  GaugePotential transformed = gauge_transform(a, g);
  GaugePotential moved = adjoint_inverse(a, g);
  GaugePotential lambda = maurer_cartan(g);
  return cs_form(transformed, pk, sig) - cs_form(a, pk, sig) -
         ext_d(wedge_pair(pk, sig, moved, lambda)) + wzw_form(g, pk, sig);
}

}  // namespace csgrav
