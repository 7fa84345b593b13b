#pragma once

#include <vector>

#include "csgrav/forms.hpp"
#include "csgrav/gravity.hpp"

/// Seeded generators for the random test fields used by the property
/// suites and the CLI. Everything is a deterministic function of the
/// Rng state passed in.
namespace csgrav::fieldgen {

struct TrigFieldSpec {
  int max_frequency = 1;
  double amplitude = 0.3;
  int terms = 3;
  bool include_constant = true;
};

inline ScalarJetField random_trig_scalar(const Chart& chart, Rng& rng,
                                         const TrigFieldSpec& spec = {}) {
  std::vector<TrigTerm> terms;
  terms.reserve(spec.terms);
  for (int t = 0; t < spec.terms; ++t) {
    TrigTerm term;
    term.freq.resize(chart.n);
    bool all_zero = true;
    for (int i = 0; i < chart.n; ++i) {
      term.freq[i] = rng.uniform_int(-spec.max_frequency, spec.max_frequency);
      all_zero = all_zero && term.freq[i] == 0;
    }
    if (all_zero && !spec.include_constant) term.freq[0] = 1;
    term.amplitude = rng.uniform(-spec.amplitude, spec.amplitude);
    term.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    terms.push_back(term);
  }
  return make_trig_field(chart, terms);
}

/// A form of the given degree and value space whose coefficients are
/// independent random trigonometric polynomials.
inline ValuedForm random_trig_form(const Chart& chart, ValueSpace space, int degree, Rng& rng,
                                   const TrigFieldSpec& spec = {}) {
  const int rows = binom(chart.n, degree);
  std::vector<std::vector<ScalarJetField>> coeffs(rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < space.dim(); ++c)
      coeffs[r].push_back(random_trig_scalar(chart, rng, spec));
  return ValuedForm::from_coeffs(chart, space, degree, coeffs);
}

/// Columns are the components of iso(e_i): embeds R^3 coefficient
/// fields as k-valued gl(3) fields.
inline Eigen::MatrixXd iso_embedding(const Signature& sig) {
  Eigen::MatrixXd m(9, 3);
  for (int i = 0; i < 3; ++i)
    m.col(i) = components_of(iso_k_r3(Eigen::Vector3d::Unit(i), sig)).head(9);
  return m;
}

/// Embeds (w, t) in R^3 x R^3 as the a(3) element (iso(w), t).
inline Eigen::MatrixXd kr3_embedding(const Signature& sig) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, 6);
  m.topLeftCorner(9, 3) = iso_embedding(sig);
  m.bottomRightCorner(3, 3) = Eigen::Matrix3d::Identity();
  return m;
}

/// gl(3)-valued form with k-valued coefficients (the sector on which
/// the eta pairing is invariant).
inline ValuedForm random_k_form(const Chart& chart, int degree, Rng& rng, const Signature& sig,
                                const TrigFieldSpec& spec = {}) {
  ValuedForm w = random_trig_form(chart, ValueSpace::vec(3), degree, rng, spec);
  return linear_map(w, iso_embedding(sig), ValueSpace::gl(3));
}

/// a(3)-valued form with values in k (+) R^3 (the sector on which the
/// extended pairing is invariant).
inline ValuedForm random_kr3_form(const Chart& chart, int degree, Rng& rng,
                                  const Signature& sig, const TrigFieldSpec& spec = {}) {
  ValuedForm w = random_trig_form(chart, ValueSpace::vec(6), degree, rng, spec);
  return linear_map(w, kr3_embedding(sig), ValueSpace::aff(3));
}

struct SectionSpec {
  int max_frequency = 1;
  double theta_amplitude = 0.08;  // size of the coframe perturbation per term
  double omega_amplitude = 0.3;
  int terms = 3;
};

/// Identity coframe plus a trig perturbation. Invertibility is
/// re-checked on a sample of points; the perturbation amplitudes keep
/// the determinant near one.
inline CoframeField random_coframe(const Chart& chart, Rng& rng, const SectionSpec& spec = {}) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<std::vector<ScalarJetField>> coeffs(3);
    for (int mu = 0; mu < 3; ++mu)
      for (int i = 0; i < 3; ++i) {
        ScalarJetField pert = random_trig_scalar(
            chart, rng, {spec.max_frequency, spec.theta_amplitude, spec.terms, true});
        coeffs[mu].push_back(mu == i ? ScalarJetField::constant(3, 1.0) + pert : pert);
      }
    CoframeField theta(ValuedForm::from_coeffs(chart, ValueSpace::vec(3), 1, coeffs));
    bool ok = true;
    for (const Pt& x : sample_points(chart, 64, rng.next_u64()))
      if (std::abs(theta.matrix_at(x).determinant()) <= 0.1) {
        ok = false;
        break;
      }
    if (ok) return theta;
  }
  throw std::runtime_error("random_coframe: could not build an invertible coframe");
}

/// Admissible section: omega is built on the k basis (its p part is
/// structurally zero), theta is a perturbed identity coframe.
inline GravSection random_grav_section(const Chart& chart, Rng& rng, const Signature& sig,
                                       const SectionSpec& spec = {}) {
  CoframeField theta = random_coframe(chart, rng, spec);
  SpinConnection omega(random_k_form(chart, 1, rng, sig,
                                     {spec.max_frequency, spec.omega_amplitude, spec.terms, true}));
  return GravSection{theta, omega};
}

}  // namespace csgrav::fieldgen
