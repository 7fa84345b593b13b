#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "csgrav/fieldgen.hpp"
#include "csgrav/lattice.hpp"
#include "csgrav/report.hpp"

/// The verification suites behind the CLI commands. Every suite is a
/// pure function of its RunSpec: sample points, random fields and
/// solver runs all derive from the spec seed through fixed salts.
namespace csgrav::checks {

struct SuiteResult {
  std::vector<CheckResult> checks;
  nlohmann::json payload;
  std::vector<std::string> warnings;
};

namespace detail {

inline Signature spec_signature(const RunSpec& spec) {
  Eigen::VectorXd diag(spec.signature.size());
  for (std::size_t i = 0; i < spec.signature.size(); ++i) diag[i] = spec.signature[i];
  return Signature(static_cast<int>(spec.signature.size()), diag);
}

inline Chart spec_chart(const RunSpec& spec) {
  Pt periods(spec.chart_dim);
  for (int i = 0; i < spec.chart_dim; ++i) periods[i] = spec.periods[i];
  return Chart::periodic(periods);
}

inline QuadratureGrid spec_grid(const RunSpec& spec) {
  QuadratureGrid g;
  g.n = spec.chart_dim;
  for (int i = 0; i < spec.chart_dim; ++i) g.counts[i] = spec.grid[i];
  return g;
}

inline double max_coeff_diff(const ValuedForm& a, const ValuedForm& b,
                             const std::vector<Pt>& pts) {
  double sup = 0.0;
  for (const Pt& x : pts) {
    FormBlock ba = a.eval_block(x, 0);
    FormBlock bb = b.eval_block(x, 0);
    sup = std::max(sup, (ba.value - bb.value).cwiseAbs().maxCoeff());
  }
  return sup;
}

inline bool flat_fields(const RunSpec& spec) { return spec.field.kind == "flat"; }

inline fieldgen::TrigFieldSpec trig_spec(const RunSpec& spec, double amplitude_scale = 1.0) {
  return {spec.field.max_frequency, spec.field.amplitude * amplitude_scale, 3, true};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// verify

inline SuiteResult run_verify(const RunSpec& spec) {
  if (spec.chart_dim != 3) throw SpecError("verify: chart.dim must be 3");
  const Signature sig = detail::spec_signature(spec);
  if (sig.m != 3) throw SpecError("verify: signature must have three entries");
  const Chart chart = detail::spec_chart(spec);
  const Chart torus4 = Chart::unit_torus(4);
  const bool flat = detail::flat_fields(spec);
  SuiteResult out;
  auto add_max = [&](const std::string& name, const std::string& anchor, double measured,
                     double fallback_tol) {
    out.checks.push_back(
        CheckResult::bounded(name, anchor, measured, spec.tolerance_or(name, fallback_tol)));
  };

  // --- algebra ---
  {
    Rng rng(spec.seed ^ 0xa1u);
    double worst = 0.0;
    const Eigen::Matrix3d eta = sig.eta();
    for (int trial = 0; trial < 100; ++trial) {
      GlElt a(rng.uniform_matrix(3, 3, -1, 1));
      auto [k, p] = project_kp(a, sig);
      worst = std::max({worst, (k.mat + p.mat - a.mat).norm(),
                        (k.mat * eta + eta * k.mat.transpose()).norm(),
                        (p.mat * eta - eta * p.mat.transpose()).norm(),
                        (project_kp(k, sig).first.mat - k.mat).norm()});
    }
    add_max("projector-algebra", "transvection splitting of gl(3)", worst, 1e-14);
  }
  {
    Rng rng(spec.seed ^ 0xa2u);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      GlElt a(rng.uniform_matrix(3, 3, -1, 1)), b(rng.uniform_matrix(3, 3, -1, 1));
      Eigen::VectorXd xi = rng.uniform_vector(3, -1, 1);
      if (xi.norm() > 1.0) xi /= xi.norm();
      Eigen::Matrix3d g = exp_gl(GlElt(iso_k_r3(xi, sig).mat));
      Eigen::Matrix3d gi = g.inverse();
      const double base = pair_gl(a, b, sig);
      const double moved = pair_gl(GlElt(g * a.mat * gi), GlElt(g * b.mat * gi), sig);
      worst = std::max(worst, std::abs(moved - base) / (1.0 + std::abs(base)));
    }
    add_max("pairing-k-invariance", "eta pairing invariance under K", worst, 1e-9);
  }
  {
    Rng rng(spec.seed ^ 0xa3u);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      auto kr3 = [&]() {
        return AffElt(iso_k_r3(rng.uniform_vector(3, -1, 1), sig),
                      rng.uniform_vector(3, -1, 1));
      };
      AffElt x = kr3(), y = kr3();
      AffGroupElt g = exp_aff(kr3());
      const double base = pair_aff(x, y, sig);
      const double moved = pair_aff(adjoint_aff(g, x), adjoint_aff(g, y), sig);
      worst = std::max(worst, std::abs(moved - base) / (1.0 + std::abs(base)));
    }
    add_max("pairing-extension-invariance", "extended pairing invariance on k+R3", worst, 1e-9);
  }
  {
    const double det_gl = std::abs(gram(PairingKind::GlEta, sig).determinant());
    add_max("gram-gl-determinant", "nondegeneracy of the eta pairing", std::abs(det_gl - 1.0),
            spec.tolerance_or("gram-gl-determinant", 1e-3));
    const double det_aff = std::abs(gram(PairingKind::Aff3, sig).determinant());
    out.checks.push_back(CheckResult::at_least("gram-aff-determinant",
                                               "nondegeneracy of the extended pairing", det_aff,
                                               spec.tolerance_or("gram-aff-determinant", 1e-6)));
    out.payload["gram_aff_determinant"] = gram(PairingKind::Aff3, sig).determinant();
  }
  {
    Rng rng(spec.seed ^ 0xa4u);
    double worst = 0.0;
    auto rnd = [&]() {
      return AffElt(GlElt(rng.uniform_matrix(3, 3, -1, 1)), rng.uniform_vector(3, -1, 1));
    };
    for (int trial = 0; trial < 200; ++trial) {
      AffElt x = rnd(), y = rnd(), z = rnd();
      AffElt j1 = bracket_aff(x, bracket_aff(y, z));
      AffElt j2 = bracket_aff(y, bracket_aff(z, x));
      AffElt j3 = bracket_aff(z, bracket_aff(x, y));
      worst = std::max(worst, (j1.lin.mat + j2.lin.mat + j3.lin.mat).norm() +
                                  (j1.trans + j2.trans + j3.trans).norm());
    }
    add_max("jacobi-identity", "affine bracket Jacobi identity", worst, 1e-12);
  }
  {
    Rng rng(spec.seed ^ 0xa5u);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const double t = rng.uniform(-3.0, 3.0);
      Eigen::Matrix3d r = exp_gl(GlElt(t * iso_k_r3(Eigen::Vector3d::Unit(0), sig).mat));
      Eigen::VectorXd xi = rng.uniform_vector(3, -1, 1);
      worst = std::max(worst,
                       (iso_k_r3(r * xi, sig).mat - r * iso_k_r3(xi, sig).mat * r.inverse())
                           .cwiseAbs()
                           .maxCoeff());
    }
    add_max("iso-rotation-intertwining", "k/R3 isomorphism equivariance", worst, 1e-10);
  }

  // --- exterior calculus ---
  {
    double worst_dd = 0.0, worst_leibniz = 0.0;
    for (int n : {3, 4}) {
      const Chart torus = n == 3 ? chart : torus4;
      Rng rng(spec.seed ^ (0xb0u + n));
      auto pts = sample_points(torus, 100, spec.seed ^ (0xb8u + n));
      for (int degree = 0; degree <= n - 2; ++degree) {
        ValuedForm alpha =
            flat ? ValuedForm::zero(torus, ValueSpace::gl(3), degree)
                 : fieldgen::random_trig_form(torus, ValueSpace::gl(3), degree, rng,
                                              detail::trig_spec(spec));
        worst_dd = std::max(worst_dd, sup_norm(ext_d(ext_d(alpha)), pts));
      }
      for (int degree = 0; degree <= 1; ++degree) {
        ValuedForm alpha =
            flat ? ValuedForm::zero(torus, ValueSpace::gl(3), degree)
                 : fieldgen::random_trig_form(torus, ValueSpace::gl(3), degree, rng,
                                              detail::trig_spec(spec));
        ValuedForm beta = flat ? ValuedForm::zero(torus, ValueSpace::gl(3), 1)
                               : fieldgen::random_trig_form(torus, ValueSpace::gl(3), 1, rng,
                                                            detail::trig_spec(spec));
        const double sign = (degree % 2 == 0) ? 1.0 : -1.0;
        ValuedForm lhs = ext_d(wedge_pair(PairingKind::GlEta, sig, alpha, beta));
        ValuedForm rhs = wedge_pair(PairingKind::GlEta, sig, ext_d(alpha), beta) +
                         sign * wedge_pair(PairingKind::GlEta, sig, alpha, ext_d(beta));
        worst_leibniz = std::max(worst_leibniz, detail::max_coeff_diff(lhs, rhs, pts));
        ValuedForm lhs_b = ext_d(wedge_bracket(alpha, beta));
        ValuedForm rhs_b =
            wedge_bracket(ext_d(alpha), beta) + sign * wedge_bracket(alpha, ext_d(beta));
        worst_leibniz = std::max(worst_leibniz, detail::max_coeff_diff(lhs_b, rhs_b, pts));
      }
    }
    add_max("dd-zero", "exterior derivative squares to zero", worst_dd, 1e-12);
    add_max("graded-leibniz", "graded Leibniz rule for pairing and bracket wedges",
            worst_leibniz, 1e-10);
  }
  {
    Rng rng(spec.seed ^ 0xb5u);
    ValuedForm beta = flat ? ValuedForm::zero(chart, ValueSpace::scalar(), 2)
                           : fieldgen::random_trig_form(chart, ValueSpace::scalar(), 2, rng,
                                                        {2, 1.0, 4, true});
    ValuedForm d = ext_d(beta);
    QuadratureGrid grid = QuadratureGrid::cubic(3, 9);
    const double integral = std::abs(integrate_top(d, grid));
    const double magnitude = integrate_abs_top(d, grid);
    add_max("stokes-closed-chart", "exact forms integrate to zero on the torus",
            integral / std::max(1.0, magnitude), 1e-11);

    ValuedForm top = flat ? ValuedForm::zero(chart, ValueSpace::scalar(), 3)
                          : fieldgen::random_trig_form(chart, ValueSpace::scalar(), 3, rng,
                                                       {2, 1.0, 5, true});
    const double coarse = integrate_top(top, QuadratureGrid::cubic(3, 9));
    const double fine = integrate_top(top, QuadratureGrid::cubic(3, 36));
    add_max("quadrature-band-limited", "rectangle rule exactness below the sample bound",
            std::abs(coarse - fine) / std::max(1.0, std::abs(fine)), 1e-12);
  }

  // --- gauge identities ---
  {
    double worst = 0.0;
    for (int n : {3, 4}) {
      const Chart torus = n == 3 ? chart : torus4;
      Rng rng(spec.seed ^ (0xc0u + n));
      auto pts = sample_points(torus, 50, spec.seed ^ (0xc8u + n));
      for (ValueSpace space : {ValueSpace::gl(3), ValueSpace::aff(3)}) {
        ValuedForm a = flat ? ValuedForm::zero(torus, space, 1)
                            : fieldgen::random_trig_form(torus, space, 1, rng,
                                                         detail::trig_spec(spec, 2.0));
        ValuedForm f = curvature(a);
        worst = std::max(worst, sup_norm(ext_d(f) + wedge_bracket(a, f), pts));
      }
    }
    add_max("bianchi-identity", "Bianchi identity for gl(3) and a(3) potentials", worst, 1e-9);
  }
  {
    Rng rng(spec.seed ^ 0xc3u);
    auto pts = sample_points(chart, spec.sample_points, spec.seed ^ 0xc4u);
    ValuedForm a = flat ? ValuedForm::zero(chart, ValueSpace::aff(3), 1)
                        : fieldgen::random_trig_form(chart, ValueSpace::aff(3), 1, rng,
                                                     detail::trig_spec(spec, 2.0));
    add_max("cs-transgression", "Chern-Simons density equals the transgression",
            detail::max_coeff_diff(cs_form(a, PairingKind::Aff3, sig),
                                   transgression_form(a, PairingKind::Aff3, sig), pts),
            1e-12);
  }
  {
    Rng rng(spec.seed ^ 0xc5u);
    auto pts = sample_points(chart, 50, spec.seed ^ 0xc6u);
    double worst_mc = 0.0, worst_comp = 0.0, worst_equiv = 0.0;
    for (ValueSpace space : {ValueSpace::gl(3), ValueSpace::aff(3)}) {
      ValuedForm chi = flat ? ValuedForm::zero(chart, space, 0)
                            : fieldgen::random_trig_form(chart, space, 0, rng,
                                                         detail::trig_spec(spec, 1.5));
      GaugeMap g = GaugeMap::from_generator(chi);
      ValuedForm lambda = maurer_cartan(g);
      worst_mc = std::max(worst_mc,
                          sup_norm(ext_d(lambda) + 0.5 * wedge_bracket(lambda, lambda), pts));
      ValuedForm a = flat ? ValuedForm::zero(chart, space, 1)
                          : fieldgen::random_trig_form(chart, space, 1, rng,
                                                       detail::trig_spec(spec));
      ValuedForm chi2 = flat ? ValuedForm::zero(chart, space, 0)
                             : fieldgen::random_trig_form(chart, space, 0, rng,
                                                          detail::trig_spec(spec));
      GaugeMap h = GaugeMap::from_generator(chi2);
      worst_comp = std::max(
          worst_comp, detail::max_coeff_diff(gauge_transform(gauge_transform(a, g), h),
                                             gauge_transform(a, g.compose(h)), pts));
      worst_equiv = std::max(
          worst_equiv, detail::max_coeff_diff(curvature(gauge_transform(a, g)),
                                              adjoint_inverse(curvature(a), g), pts));
    }
    add_max("maurer-cartan-structure", "structure equation of the Maurer-Cartan form",
            worst_mc, 1e-9);
    add_max("gauge-composition", "gauge transformations compose with the map product",
            worst_comp, 1e-9);
    add_max("curvature-equivariance", "curvature transforms by the adjoint action",
            worst_equiv, 1e-9);
  }
  {
    Rng rng(spec.seed ^ 0xc7u);
    auto pts = sample_points(chart, spec.sample_points, spec.seed ^ 0xc9u);
    QuadratureGrid grid = QuadratureGrid::cubic(3, 17);
    double worst_pointwise = 0.0, worst_integral = 0.0, worst_action = 0.0;
    // affine lane: potentials and maps in k (+) R^3
    {
      ValuedForm a = flat ? ValuedForm::zero(chart, ValueSpace::aff(3), 1)
                          : fieldgen::random_kr3_form(chart, 1, rng, sig,
                                                      detail::trig_spec(spec, 1.5));
      GaugeMap g = GaugeMap::from_generator(
          flat ? ValuedForm::zero(chart, ValueSpace::aff(3), 0)
               : fieldgen::random_kr3_form(chart, 0, rng, sig, detail::trig_spec(spec, 1.3)));
      ValuedForm defect = gauge_defect(a, g, PairingKind::Aff3, sig);
      worst_pointwise = std::max(worst_pointwise, sup_norm(defect, pts));
      const double scale =
          std::max(1.0, integrate_abs_top(cs_form(a, PairingKind::Aff3, sig), grid));
      worst_integral =
          std::max(worst_integral, std::abs(integrate_top(defect, grid)) / scale);
      const double before = integrate_top(cs_form(a, PairingKind::Aff3, sig), grid);
      const double after =
          integrate_top(cs_form(gauge_transform(a, g), PairingKind::Aff3, sig), grid);
      const double wzw = integrate_top(wzw_form(g, PairingKind::Aff3, sig), grid);
      worst_action = std::max(worst_action,
                              std::abs(after - before + wzw) / std::max(1.0, std::abs(before)));
    }
    // linear lane: potentials and maps in k
    {
      ValuedForm a = flat ? ValuedForm::zero(chart, ValueSpace::gl(3), 1)
                          : fieldgen::random_k_form(chart, 1, rng, sig,
                                                    detail::trig_spec(spec, 1.5));
      GaugeMap g = GaugeMap::from_generator(
          flat ? ValuedForm::zero(chart, ValueSpace::gl(3), 0)
               : fieldgen::random_k_form(chart, 0, rng, sig, detail::trig_spec(spec, 1.3)));
      ValuedForm defect = gauge_defect(a, g, PairingKind::GlEta, sig);
      worst_pointwise = std::max(worst_pointwise, sup_norm(defect, pts));
    }
    add_max("gauge-defect-pointwise", "gauge transformation identity of the CS density",
            worst_pointwise, 1e-8);
    add_max("gauge-defect-integral", "integrated gauge defect over the torus", worst_integral,
            1e-10);
    add_max("action-gauge-invariance", "CS action shifts only by the closed WZW term",
            worst_action, 1e-9);
  }
  {
    Rng rng(spec.seed ^ 0xcau);
    auto pts4 = sample_points(torus4, 50, spec.seed ^ 0xcbu);
    GaugeMap g = GaugeMap::from_generator(
        flat ? ValuedForm::zero(torus4, ValueSpace::aff(3), 0)
             : fieldgen::random_kr3_form(torus4, 0, rng, sig, detail::trig_spec(spec, 1.5)));
    add_max("wzw-closed", "the WZW 3-form is closed",
            sup_norm(ext_d(wzw_form(g, PairingKind::Aff3, sig)), pts4), 1e-8);
  }

  // --- gravity identities ---
  {
    Rng rng(spec.seed ^ 0xd0u);
    auto pts = sample_points(chart, 50, spec.seed ^ 0xd1u);
    double worst_relation = 0.0, worst_admissible = 0.0, worst_complete = 0.0;
    Eigen::MatrixXd times_minus2eta(9, 9);
    for (int u = 0; u < 9; ++u) {
      GlElt e = GlElt::zero(3);
      e.mat(u / 3, u % 3) = 1.0;
      times_minus2eta.col(u) = components_of(GlElt(-2.0 * e.mat * sig.eta())).head(9);
    }
    for (int trial = 0; trial < 50; ++trial) {
      GravSection s = flat ? GravSection::flat(chart)
                           : fieldgen::random_grav_section(chart, rng, sig);
      MetricityResidual m = metricity_residual(s, sig);
      worst_admissible = std::max(worst_admissible, sup_norm(m.nabla, pts));
      GravSection generic{
          s.theta, SpinConnection(flat ? ValuedForm::zero(chart, ValueSpace::gl(3), 1)
                                       : fieldgen::random_trig_form(
                                             chart, ValueSpace::gl(3), 1, rng,
                                             detail::trig_spec(spec)))};
      MetricityResidual mg = metricity_residual(generic, sig);
      ValuedForm relation =
          mg.nabla - linear_map(mg.p_part, times_minus2eta, ValueSpace::gl(3));
      worst_relation = std::max(worst_relation, sup_norm(relation, pts));
      OrthogonalityReport rep =
          orthogonality_check(s, metric_from_frame(s, sig), sig, 1e-12, pts);
      worst_complete = std::max(worst_complete, rep.sup_residual);
    }
    add_max("metricity-linear-relation",
            "covariant metric derivative equals -2 p eta in frame components", worst_relation,
            1e-12);
    add_max("metricity-admissible", "k-valued connections parallelize the induced metric",
            worst_admissible, 1e-10);
    add_max("orthogonality-completeness",
            "every frame is orthogonal for its induced metric", worst_complete, 1e-14);
  }
  {
    Rng rng(spec.seed ^ 0xd2u);
    auto pts = sample_points(chart, 50, spec.seed ^ 0xd3u);
    GravSection s =
        flat ? GravSection::flat(chart) : fieldgen::random_grav_section(chart, rng, sig);
    ValuedForm f = curvature(witten_lift(s));
    ValuedForm f_omega = curvature(s.omega.form);
    ValuedForm tors = torsion(s);
    double worst_split = 0.0;
    for (const Pt& x : pts) {
      FormBlock bf = f.eval_block(x, 0);
      FormBlock bo = f_omega.eval_block(x, 0);
      FormBlock bt = tors.eval_block(x, 0);
      worst_split = std::max(worst_split,
                             (bf.value.leftCols(9) - bo.value).cwiseAbs().maxCoeff());
      worst_split = std::max(worst_split,
                             (bf.value.rightCols(3) - bt.value).cwiseAbs().maxCoeff());
    }
    add_max("witten-curvature-split",
            "lifted curvature splits into curvature and torsion", worst_split, 1e-10);

    ReduceResult r = reduce_connection(witten_lift(s), sig, 1e-10, pts);
    double round_trip = r.reducible
                            ? detail::max_coeff_diff(
                                  witten_lift(GravSection{*r.theta, *r.omega_k}),
                                  witten_lift(s), pts)
                            : std::numeric_limits<double>::infinity();
    add_max("reduce-round-trip", "reduction of a lifted potential inverts the lift",
            round_trip, 1e-15);

    auto [eps_route, pair_route] = palatini_form_routes(s, sig);
    add_max("palatini-two-routes",
            "contraction and pairing routes of the gravity density agree",
            detail::max_coeff_diff(eps_route, pair_route, pts), 1e-10);
  }
  return out;
}

// ---------------------------------------------------------------------------
// correspond

inline SuiteResult run_correspond(const RunSpec& spec) {
  if (spec.chart_dim != 3) throw SpecError("correspond: chart.dim must be 3");
  const Signature sig = detail::spec_signature(spec);
  const Chart chart = detail::spec_chart(spec);
  const QuadratureGrid grid = detail::spec_grid(spec);
  const bool flat = detail::flat_fields(spec);
  SuiteResult out;

  Rng rng(spec.seed ^ 0xe0u);
  nlohmann::json sections = nlohmann::json::array();
  std::vector<CorrespondenceResult> results;
  for (int k = 0; k < spec.sections; ++k) {
    GravSection s =
        flat ? GravSection::flat(chart)
             : fieldgen::random_grav_section(
                   chart, rng, sig,
                   {spec.field.max_frequency, 0.25 * spec.field.amplitude,
                    spec.field.amplitude, 3});
    CorrespondenceResult r = correspondence(s, sig, grid);
    results.push_back(r);
    sections.push_back({{"integral_pg", r.integral_pg},
                        {"integral_cs", r.integral_cs},
                        {"ratio", r.ratio_defined ? nlohmann::json(r.ratio) : nlohmann::json()},
                        {"ratio_defined", r.ratio_defined}});
  }

  double mean_ratio = 0.0;
  int defined = 0;
  for (const auto& r : results)
    if (r.ratio_defined) {
      mean_ratio += r.ratio;
      ++defined;
    }
  if (defined > 0) mean_ratio /= defined;

  double worst_spread = 0.0, worst_identity = 0.0;
  for (const auto& r : results) {
    if (r.ratio_defined && defined > 0)
      worst_spread =
          std::max(worst_spread, std::abs(r.ratio - mean_ratio) / std::abs(mean_ratio));
    const double ratio_used = defined > 0 ? mean_ratio : kActionRatio;
    worst_identity = std::max(worst_identity,
                              std::abs(r.integral_cs - ratio_used * r.integral_pg) /
                                  std::max(1.0, std::abs(r.integral_pg)));
  }

  out.checks.push_back(CheckResult::bounded(
      "correspondence-ratio-spread", "proportionality constant of the two actions",
      worst_spread, spec.tolerance_or("correspondence-ratio-spread", 1e-9)));
  out.checks.push_back(CheckResult::bounded(
      "correspondence-integral-identity", "lifted CS action is proportional to the PG action",
      worst_identity, spec.tolerance_or("correspondence-integral-identity", 1e-9)));
  out.payload["sections"] = sections;
  out.payload["mean_ratio"] = defined > 0 ? nlohmann::json(mean_ratio) : nlohmann::json();
  out.payload["ratio_defined_count"] = defined;
  return out;
}

// ---------------------------------------------------------------------------
// chern

inline SuiteResult run_chern(const RunSpec& spec) {
  if (spec.chart_dim != 4) throw SpecError("chern: chart.dim must be 4");
  const Signature sig = detail::spec_signature(spec);
  const Chart chart = detail::spec_chart(spec);
  const QuadratureGrid grid = detail::spec_grid(spec);
  const bool flat = detail::flat_fields(spec);
  SuiteResult out;

  Rng rng(spec.seed ^ 0xf0u);
  auto pts = sample_points(chart, spec.sample_points, spec.seed ^ 0xf1u);

  double worst_pointwise = 0.0;
  ValuedForm a_k = flat ? ValuedForm::zero(chart, ValueSpace::gl(3), 1)
                        : fieldgen::random_k_form(chart, 1, rng, sig, detail::trig_spec(spec));
  worst_pointwise = std::max(
      worst_pointwise,
      detail::max_coeff_diff(ext_d(cs_form(a_k, PairingKind::GlEta, sig)),
                             chern_weil_form(a_k, PairingKind::GlEta, sig), pts));
  ValuedForm a_aff = flat
                         ? ValuedForm::zero(chart, ValueSpace::aff(3), 1)
                         : fieldgen::random_kr3_form(chart, 1, rng, sig, detail::trig_spec(spec));
  worst_pointwise = std::max(
      worst_pointwise,
      detail::max_coeff_diff(ext_d(cs_form(a_aff, PairingKind::Aff3, sig)),
                             chern_weil_form(a_aff, PairingKind::Aff3, sig), pts));
  out.checks.push_back(CheckResult::bounded(
      "chern-weil-pointwise", "d of the CS density reproduces the quadratic curvature form",
      worst_pointwise, spec.tolerance_or("chern-weil-pointwise", 1e-9)));

  // integral over the closed chart: the 4-form is exact, so it vanishes
  nlohmann::json integrals = nlohmann::json::array();
  double worst_integral = 0.0;
  for (const ValuedForm* a : {&a_k, &a_aff}) {
    PairingKind pk = a == &a_k ? PairingKind::GlEta : PairingKind::Aff3;
    ValuedForm cw = chern_weil_form(*a, pk, sig);
    const double integral = integrate_top(cw, grid);
    const double magnitude = integrate_abs_top(cw, grid);
    worst_integral = std::max(worst_integral, std::abs(integral) / std::max(1.0, magnitude));
    integrals.push_back({{"integral", integral}, {"l1_magnitude", magnitude}});
  }
  out.checks.push_back(CheckResult::bounded(
      "chern-weil-integral", "quadratic curvature form integrates to zero on the 4-torus",
      worst_integral, spec.tolerance_or("chern-weil-integral", 1e-9)));
  out.payload["integrals"] = integrals;
  return out;
}

// ---------------------------------------------------------------------------
// extremize

inline SuiteResult run_extremize(const RunSpec& spec, std::ostream* csv) {
  if (spec.chart_dim != 3) throw SpecError("extremize: chart.dim must be 3");
  const Signature sig = detail::spec_signature(spec);
  const Chart chart = detail::spec_chart(spec);
  const QuadratureGrid grid = detail::spec_grid(spec);
  SuiteResult out;

  LatticeConfig start = LatticeConfig::flat(chart, grid, sig);
  if (spec.field.kind == "perturbed-flat") {
    Rng rng(spec.seed ^ 0x50u);
    Perturbation p = Perturbation::random_unit(start, rng);
    start = apply_perturbation(start, p, spec.field.magnitude);
  } else if (spec.field.kind == "trig-random") {
    Rng rng(spec.seed ^ 0x51u);
    GravSection s = fieldgen::random_grav_section(
        chart, rng, sig,
        {spec.field.max_frequency, 0.25 * spec.field.amplitude, spec.field.amplitude, 3});
    start = LatticeConfig::sample_section(s, grid, sig);
  }

  if (csv) *csv << "iter,objective,step,action_pg,action_cs\n";
  DescentObserver observer = [&](int iter, const LatticeConfig& cfg, double objective,
                                 double step) {
    if (!csv) return;
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g\n", iter, objective, step,
                  discrete_action(cfg, DiscreteAction::Palatini),
                  discrete_action(cfg, DiscreteAction::ChernSimons));
    *csv << line;
  };

  auto [cfg, report] = descend(start, spec.solver.max_iters, spec.solver.step0,
                               spec.solver.tol, observer);
  if (report.line_search_failed)
    out.warnings.push_back("line search stalled before reaching the tolerance");

  const double r0 = report.objective_history.front();
  const double rf = report.objective_history.back();
  double reduction = r0 > 0.0 ? r0 / std::max(rf, 1e-300) : 0.0;
  reduction = std::min(reduction, 1e300);
  CheckResult red = CheckResult::at_least("objective-reduction",
                                          "descent reduces the extremal residual", reduction,
                                          spec.tolerance_or("objective-reduction", 1e3));
  if (rf <= spec.solver.tol) red.pass = true;  // already at an extremal
  out.checks.push_back(red);

  StationarityReport st =
      stationarity_report(cfg, spec.directions, 1e-5, spec.seed ^ 0x52u);
  const double scale = 1.0 + std::abs(discrete_action(cfg, DiscreteAction::Palatini));
  out.checks.push_back(CheckResult::bounded(
      "stationarity-pg", "descended configuration is stationary for the gravity action",
      st.max_abs_pg / scale, spec.tolerance_or("stationarity-pg", 1e-6)));
  out.checks.push_back(CheckResult::bounded(
      "stationarity-cs", "descended configuration is stationary for the CS action",
      st.max_abs_cs / scale, spec.tolerance_or("stationarity-cs", 1e-6)));

  out.payload["iterations"] = report.iterations;
  out.payload["converged"] = report.converged;
  out.payload["line_search_failed"] = report.line_search_failed;
  out.payload["objective_initial"] = r0;
  out.payload["objective_final"] = rf;
  out.payload["final_curv_sup"] = report.final_curv_sup;
  out.payload["final_tors_sup"] = report.final_tors_sup;
  out.payload["max_dd_pg"] = st.max_abs_pg;
  out.payload["max_dd_cs"] = st.max_abs_cs;
  out.payload["max_normalized_dd_diff"] = st.max_normalized_diff;
  return out;
}

inline SuiteResult run_command(const RunSpec& spec, std::ostream* csv = nullptr) {
  if (spec.command == "verify") return run_verify(spec);
  if (spec.command == "correspond") return run_correspond(spec);
  if (spec.command == "chern") return run_chern(spec);
  return run_extremize(spec, csv);
}

/// Built-in defaults per command, used when no spec file is given.
inline RunSpec default_spec(const std::string& command) {
  RunSpec spec;
  spec.command = command;
  if (command == "chern") {
    spec.chart_dim = 4;
    spec.periods = {1.0, 1.0, 1.0, 1.0};
    spec.grid = {9, 9, 9, 9};
    spec.seed = 11;
  } else if (command == "correspond") {
    spec.seed = 7;
    spec.grid = {33, 33, 33};
    spec.sections = 20;
  } else if (command == "extremize") {
    spec.seed = 5;
    spec.grid = {16, 16, 16};
    spec.field.kind = "perturbed-flat";
    spec.field.magnitude = 0.01;
  }
  return spec;
}

}  // namespace csgrav::checks
