#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "csgrav/chart.hpp"

/// Scalar coefficient fields carrying 2-jets: every evaluation returns
/// (value, gradient, Hessian) computed from closed-form rules, so the
/// exterior derivatives built on top of them are exact to roundoff.
/// Each field declares how many derivative levels are valid ("order");
/// consuming more than that raises JetExhausted instead of silently
/// returning wrong derivatives.
namespace csgrav {

struct JetScalar {
  double v = 0.0;
  Pt g;        // gradient, valid when order >= 1
  HessMat h;   // symmetric Hessian, valid when order >= 2
  int order = 0;

  static JetScalar zeros(int n, int order) {
    JetScalar j;
    j.order = order;
    j.v = 0.0;
    if (order >= 1) j.g = Pt::Zero(n);
    if (order >= 2) j.h = HessMat::Zero(n, n);
    return j;
  }
};

/// A term a * cos(2 pi k.x / L + phi) of a trigonometric polynomial;
/// the frequency vector k has integer entries.
struct TrigTerm {
  Eigen::Matrix<int, Eigen::Dynamic, 1, 0, 4, 1> freq;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Evaluation rule x -> (f, df, d2f) with a declared jet order.
class ScalarJetField {
 public:
  using Fn = std::function<JetScalar(const Pt&, int)>;

  ScalarJetField() = default;
  ScalarJetField(int n, int order, Fn fn)
      : n_(n), order_(order), fn_(std::make_shared<Fn>(std::move(fn))) {}

  int dim() const { return n_; }
  int order() const { return order_; }

  JetScalar eval(const Pt& x, int want) const {
    if (want > order_)
      throw JetExhausted("ScalarJetField: jet exhausted (want " + std::to_string(want) +
                         ", have " + std::to_string(order_) + ")");
    return (*fn_)(x, want);
  }

  static ScalarJetField zero(int n) {
    return ScalarJetField(n, 2, [n](const Pt&, int want) { return JetScalar::zeros(n, want); });
  }

  static ScalarJetField constant(int n, double c) {
    return ScalarJetField(n, 2, [n, c](const Pt&, int want) {
      JetScalar j = JetScalar::zeros(n, want);
      j.v = c;
      return j;
    });
  }

  /// Coordinate function x^i. Only meaningful on box charts; a periodic
  /// chart has no globally defined coordinate function.
  static ScalarJetField coordinate(const Chart& chart, int i) {
    if (chart.periodic_kind())
      throw std::invalid_argument("coordinate field: chart must be a box");
    if (i < 0 || i >= chart.n) throw DimensionError("coordinate field: axis out of range");
    const int n = chart.n;
    return ScalarJetField(n, 2, [n, i](const Pt& x, int want) {
      JetScalar j = JetScalar::zeros(n, want);
      j.v = x[i];
      if (want >= 1) j.g[i] = 1.0;
      return j;
    });
  }

  ScalarJetField partial(int axis) const {
    if (order_ < 1) throw JetExhausted("partial: jet exhausted");
    if (axis < 0 || axis >= n_) throw DimensionError("partial: axis out of range");
    auto base = fn_;
    const int n = n_;
    return ScalarJetField(n, order_ - 1, [base, axis, n](const Pt& x, int want) {
      JetScalar in = (*base)(x, want + 1);
      JetScalar out = JetScalar::zeros(n, want);
      out.v = in.g[axis];
      if (want >= 1) out.g = in.h.row(axis).transpose();
      return out;
    });
  }

  ScalarJetField scaled(double c) const {
    auto base = fn_;
    return ScalarJetField(n_, order_, [base, c](const Pt& x, int want) {
      JetScalar j = (*base)(x, want);
      j.v *= c;
      if (want >= 1) j.g *= c;
      if (want >= 2) j.h *= c;
      return j;
    });
  }

  friend ScalarJetField operator+(const ScalarJetField& a, const ScalarJetField& b) {
    if (a.n_ != b.n_) throw DimensionError("ScalarJetField: dimension mismatch");
    auto fa = a.fn_, fb = b.fn_;
    return ScalarJetField(a.n_, std::min(a.order_, b.order_),
                          [fa, fb](const Pt& x, int want) {
                            JetScalar ja = (*fa)(x, want);
                            JetScalar jb = (*fb)(x, want);
                            ja.v += jb.v;
                            if (want >= 1) ja.g += jb.g;
                            if (want >= 2) ja.h += jb.h;
                            return ja;
                          });
  }

  /// Pointwise product with full jet propagation (Leibniz for gradient
  /// and Hessian).
  friend ScalarJetField operator*(const ScalarJetField& a, const ScalarJetField& b) {
    if (a.n_ != b.n_) throw DimensionError("ScalarJetField: dimension mismatch");
    auto fa = a.fn_, fb = b.fn_;
    const int n = a.n_;
    return ScalarJetField(n, std::min(a.order_, b.order_),
                          [fa, fb, n](const Pt& x, int want) {
                            JetScalar ja = (*fa)(x, want);
                            JetScalar jb = (*fb)(x, want);
                            JetScalar out = JetScalar::zeros(n, want);
                            out.v = ja.v * jb.v;
                            if (want >= 1) out.g = ja.v * jb.g + jb.v * ja.g;
                            if (want >= 2)
                              out.h = ja.v * jb.h + jb.v * ja.h +
                                      ja.g * jb.g.transpose() + jb.g * ja.g.transpose();
                            return out;
                          });
  }

 private:
  int n_ = 0;
  int order_ = 0;
  std::shared_ptr<const Fn> fn_;
};

/// f(x) = sum_i a_i cos(2 pi k_i . x / L + phi_i) with analytically
/// exact gradient and Hessian. Requires a periodic chart; the jets are
/// periodic by construction.
inline ScalarJetField make_trig_field(const Chart& chart, const std::vector<TrigTerm>& terms) {
  if (!chart.periodic_kind())
    throw std::invalid_argument("make_trig_field: chart must be periodic");
  const int n = chart.n;
  const Pt periods = chart.periods();
  for (const TrigTerm& t : terms)
    if (t.freq.size() != n) throw DimensionError("make_trig_field: frequency dimension");

  // Precompute angular frequency vectors 2 pi k / L.
  std::vector<Pt> omegas;
  std::vector<double> amps, phases;
  omegas.reserve(terms.size());
  for (const TrigTerm& t : terms) {
    Pt w = Pt::Zero(n);
    for (int i = 0; i < n; ++i)
      w[i] = 2.0 * std::numbers::pi * static_cast<double>(t.freq[i]) / periods[i];
    omegas.push_back(w);
    amps.push_back(t.amplitude);
    phases.push_back(t.phase);
  }

  return ScalarJetField(n, 2, [n, omegas, amps, phases](const Pt& x, int want) {
    JetScalar j = JetScalar::zeros(n, want);
    for (std::size_t t = 0; t < amps.size(); ++t) {
      const double arg = omegas[t].dot(x) + phases[t];
      const double c = amps[t] * std::cos(arg);
      j.v += c;
      if (want >= 1) {
        const double s = amps[t] * std::sin(arg);
        j.g -= s * omegas[t];
        if (want >= 2) j.h -= c * (omegas[t] * omegas[t].transpose());
      }
    }
    return j;
  });
}

}  // namespace csgrav
