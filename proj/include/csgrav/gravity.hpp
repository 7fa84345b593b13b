#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "csgrav/gauge.hpp"

/// Local model of frame-bundle sections on a 3-chart: coframes, induced
/// metrics, metricity, torsion, the first-order gravity Lagrangian, the
/// lift to an affine potential and the correspondence between the two
/// action densities.
namespace csgrav {

/// With eps_{123} = +1, eta = diag(-1,1,1) and the iso/pairing
/// conventions of `algebra`, the pairing route for the gravity
/// Lagrangian evaluates to minus the epsilon contraction; this constant
/// reconciles the two routes. (The measured cross Gram of iso images is
/// -2 eta, so the proportionality of the two action densities is -2.)
inline constexpr double kPairingVsEpsilonSign = -1.0;

/// Coframe theta^i_mu: an R^3-valued 1-form whose 3x3 coefficient
/// matrix is invertible wherever it is sampled.
struct CoframeField {
  ValuedForm form;

  explicit CoframeField(ValuedForm f) : form(std::move(f)) {
    if (form.degree() != 1 || !(form.space() == ValueSpace::vec(3)) || form.chart().n != 3)
      throw DimensionError("CoframeField: need an R^3-valued 1-form on a 3-chart");
  }

  /// theta as a matrix, rows = frame index i, columns = direction mu.
  Eigen::Matrix3d matrix_at(const Pt& x) const {
    FormBlock b = form.eval_block(x, 0);
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
      for (int mu = 0; mu < 3; ++mu) t(i, mu) = b.value(mu, i);
    return t;
  }
};

/// Local connection potential omega^i_j in the frame gauge.
struct SpinConnection {
  ValuedForm form;

  explicit SpinConnection(ValuedForm f) : form(std::move(f)) {
    if (form.degree() != 1 || !(form.space() == ValueSpace::gl(3)) || form.chart().n != 3)
      throw DimensionError("SpinConnection: need a gl(3)-valued 1-form on a 3-chart");
  }
};

struct GravSection {
  CoframeField theta;
  SpinConnection omega;

  static GravSection flat(const Chart& chart) {
    std::vector<std::vector<ScalarJetField>> coeffs(3);
    for (int mu = 0; mu < 3; ++mu)
      for (int i = 0; i < 3; ++i)
        coeffs[mu].push_back(mu == i ? ScalarJetField::constant(3, 1.0)
                                     : ScalarJetField::zero(3));
    return GravSection{
        CoframeField(ValuedForm::from_coeffs(chart, ValueSpace::vec(3), 1, coeffs)),
        SpinConnection(ValuedForm::zero(chart, ValueSpace::gl(3), 1))};
  }
};

/// Contravariant metric zeta^{mu nu} as a degree-0 form with gl(3)
/// component layout; symmetric with eta's signature at every sample.
struct MetricField {
  ValuedForm field;

  Eigen::Matrix3d matrix_at(const Pt& x) const {
    FormBlock b = field.eval_block(x, 0);
    Eigen::Matrix3d z;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) z(r, c) = b.value(0, r * 3 + c);
    return z;
  }
};

/// zeta = eta^{ij} X_i (x) X_j for the dual frame X = theta^{-1}, with
/// jets propagated through the matrix inversion.
inline MetricField metric_from_frame(const GravSection& sigma, const Signature& sig) {
  if (sig.m != 3) throw DimensionError("metric_from_frame: requires m = 3");
  auto theta = std::make_shared<ValuedForm>(sigma.theta.form);
  const Eigen::Matrix3d eta = sig.eta();
  ValuedForm field(
      theta->chart(), ValueSpace::gl(3), 0, theta->order(),
      [theta, eta](const Pt& x, int want) {
        FormBlock tb = theta->eval_block(x, want);
        Eigen::Matrix3d t;
        for (int i = 0; i < 3; ++i)
          for (int mu = 0; mu < 3; ++mu) t(i, mu) = tb.value(mu, i);
        if (std::abs(t.determinant()) <= kDetTol)
          throw SingularValue("metric_from_frame: singular coframe");
        const Eigen::Matrix3d inv = t.inverse();
        std::array<Eigen::Matrix3d, 3> dt, dinv;
        if (want >= 1)
          for (int nu = 0; nu < 3; ++nu) {
            for (int i = 0; i < 3; ++i)
              for (int mu = 0; mu < 3; ++mu) dt[nu](i, mu) = tb.grad[nu](mu, i);
            dinv[nu] = -inv * dt[nu] * inv;
          }
        FormBlock out = FormBlock::zeros(1, 9, 3, want);
        auto pack = [](BlockMat& row, int r, const Eigen::Matrix3d& m) {
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) row(r, a * 3 + b) = m(a, b);
        };
        pack(out.value, 0, inv * eta * inv.transpose());
        if (want >= 1)
          for (int nu = 0; nu < 3; ++nu)
            pack(out.grad[nu], 0,
                 dinv[nu] * eta * inv.transpose() + inv * eta * dinv[nu].transpose());
        if (want >= 2)
          for (int nu = 0; nu < 3; ++nu)
            for (int rho = 0; rho < 3; ++rho) {
              Eigen::Matrix3d ddt;
              for (int i = 0; i < 3; ++i)
                for (int mu = 0; mu < 3; ++mu) ddt(i, mu) = tb.hess[nu * 3 + rho](mu, i);
              const Eigen::Matrix3d ddinv = -inv * ddt * inv + inv * dt[nu] * inv * dt[rho] * inv +
                                            inv * dt[rho] * inv * dt[nu] * inv;
              pack(out.hess[nu * 3 + rho], 0,
                   ddinv * eta * inv.transpose() + inv * eta * ddinv.transpose() +
                       dinv[nu] * eta * dinv[rho].transpose() +
                       dinv[rho] * eta * dinv[nu].transpose());
            }
        return out;
      });
  return MetricField{field};
}

struct OrthogonalityReport {
  bool orthogonal = false;
  double sup_residual = 0.0;
  ValuedForm residual;  // degree-0 gl(3)-component field
};

/// Membership check for the subbundle of zeta-orthogonal frames: the
/// residual eta^{ij} X_i X_j - zeta is reported, true iff its sup over
/// the sample points stays below tol.
inline OrthogonalityReport orthogonality_check(const GravSection& sigma, const MetricField& zeta,
                                               const Signature& sig, double tol,
                                               const std::vector<Pt>& points) {
  MetricField induced = metric_from_frame(sigma, sig);
  ValuedForm residual = induced.field - zeta.field;
  const double sup = sup_norm(residual, points);
  return {sup <= tol, sup, residual};
}

namespace detail {
/// 9x9 component matrix of a linear map on gl(3).
inline Eigen::MatrixXd gl3_linear_map(const std::function<GlElt(const GlElt&)>& fn) {
  Eigen::MatrixXd m(9, 9);
  for (int u = 0; u < 9; ++u) {
    GlElt basis = GlElt::zero(3);
    basis.mat(u / 3, u % 3) = 1.0;
    m.col(u) = components_of(fn(basis)).head(9);
  }
  return m;
}
}  // namespace detail

struct MetricityResidual {
  ValuedForm p_part;  // gl(3)-valued 1-form, the p projection of omega
  ValuedForm nabla;   // in-frame covariant derivative of the metric
};

/// Two routes to the metricity conditions: the p projection of the
/// connection, and the covariant derivative of the induced metric in
/// frame components, nabla_mu = -(omega_mu eta + eta omega_mu^T).
/// They satisfy nabla = -2 (p eta) exactly.
inline MetricityResidual metricity_residual(const GravSection& sigma, const Signature& sig) {
  Eigen::MatrixXd proj_p = detail::gl3_linear_map(
      [&sig](const GlElt& a) { return project_kp(a, sig).second; });
  Eigen::MatrixXd nabla_map = detail::gl3_linear_map([&sig](const GlElt& a) {
    return GlElt(-(a.mat * sig.eta() + sig.eta() * a.mat.transpose()));
  });
  return {linear_map(sigma.omega.form, proj_p, ValueSpace::gl(3)),
          linear_map(sigma.omega.form, nabla_map, ValueSpace::gl(3))};
}

/// Torsion 2-form Theta^i = d theta^i + omega^i_j /\ theta^j.
inline ValuedForm torsion(const GravSection& sigma) {
  return ext_d(sigma.theta.form) +
         wedge_bilinear(make_action_bilinear(3), sigma.omega.form, sigma.theta.form);
}

namespace detail {
/// eps-contraction density: (xi, Omega) |-> eta^{kl} eps_{lij} xi^i Omega^j_k.
inline BilinearMap make_palatini_bilinear(const Signature& sig) {
  return BilinearMap::from_function(
      ValueSpace::vec(3), ValueSpace::gl(3), ValueSpace::scalar(),
      [&sig](const CompVec& xi, const CompVec& om) {
        CompVec r = CompVec::Zero(1);
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              r[0] += sig.diag[k] * levi_civita3(k, i, j) * xi[i] * om[j * 3 + k];
        return r;
      });
}

inline Eigen::MatrixXd aff_lin_embedding() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, 9);
  m.topRows(9) = Eigen::MatrixXd::Identity(9, 9);
  return m;
}

inline Eigen::MatrixXd aff_trans_embedding() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, 3);
  m.bottomRows(3) = Eigen::Matrix3d::Identity();
  return m;
}
}  // namespace detail

/// Both evaluation routes for the gravity Lagrangian 3-form:
/// the eta-eps contraction eta^{kl} eps_{lij} theta^i /\ Omega^j_k and
/// the extended pairing of the lifted pieces (with the reconciliation
/// sign). They agree pointwise at roundoff.
inline std::pair<ValuedForm, ValuedForm> palatini_form_routes(const GravSection& sigma,
                                                              const Signature& sig) {
  if (sigma.theta.form.chart().n != 3)
    throw DimensionError("palatini_form: chart dimension must be 3");
  ValuedForm omega_curv = curvature(sigma.omega.form);
  ValuedForm eps_route =
      wedge_bilinear(detail::make_palatini_bilinear(sig), sigma.theta.form, omega_curv);
  ValuedForm theta_aff =
      linear_map(sigma.theta.form, detail::aff_trans_embedding(), ValueSpace::aff(3));
  ValuedForm curv_aff = linear_map(omega_curv, detail::aff_lin_embedding(), ValueSpace::aff(3));
  ValuedForm pair_route =
      kPairingVsEpsilonSign * wedge_pair(PairingKind::Aff3, sig, theta_aff, curv_aff);
  return {eps_route, pair_route};
}

/// Gravity Lagrangian density; checks the two routes against each other
/// at a fixed probe set before returning the contraction route.
inline ValuedForm palatini_form(const GravSection& sigma, const Signature& sig) {
  auto [eps_route, pair_route] = palatini_form_routes(sigma, sig);
  const auto probes = sample_points(sigma.theta.form.chart(), 20, 0x9e3779b9ULL);
  for (const Pt& x : probes) {
    const double a = eps_route.eval_block(x, 0).value(0, 0);
    const double b = pair_route.eval_block(x, 0).value(0, 0);
    if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a)))
      throw std::logic_error("palatini_form: evaluation routes disagree");
  }
  return eps_route;
}

/// Affine potential with linear part omega and translation part theta.
/// If omega is k-valued the result is k (+) R^3 valued.
inline GaugePotential witten_lift(const GravSection& sigma) {
  return linear_map(sigma.omega.form, detail::aff_lin_embedding(), ValueSpace::aff(3)) +
         linear_map(sigma.theta.form, detail::aff_trans_embedding(), ValueSpace::aff(3));
}

/// Pullback of the Chern-Simons density through the lift (the gauge
/// factor is the identity in this local model).
inline ValuedForm cs_of_section(const GravSection& sigma, const Signature& sig) {
  if (sigma.theta.form.chart().n != 3)
    throw DimensionError("cs_of_section: chart dimension must be 3");
  return cs_form(witten_lift(sigma), PairingKind::Aff3, sig);
}

struct ReduceResult {
  bool reducible = false;
  double p_sup = 0.0;
  std::optional<SpinConnection> omega_k;
  std::optional<CoframeField> theta;
};

/// Splits an affine potential into (linear, translation) parts and
/// tests whether the linear part is k-valued; when it is, the k part
/// and the translation part form a section-compatible pair and
/// witten_lift inverts the split exactly.
inline ReduceResult reduce_connection(const GaugePotential& a, const Signature& sig, double tol,
                                      const std::vector<Pt>& points) {
  if (!(a.space() == ValueSpace::aff(3)))
    throw DimensionError("reduce_connection: potential must be a(3)-valued");
  Eigen::MatrixXd split_lin = Eigen::MatrixXd::Zero(9, 12);
  split_lin.leftCols(9) = Eigen::MatrixXd::Identity(9, 9);
  Eigen::MatrixXd split_trans = Eigen::MatrixXd::Zero(3, 12);
  split_trans.rightCols(3) = Eigen::Matrix3d::Identity();
  ValuedForm lin = linear_map(a, split_lin, ValueSpace::gl(3));
  ValuedForm trans = linear_map(a, split_trans, ValueSpace::vec(3));

  Eigen::MatrixXd proj_p =
      detail::gl3_linear_map([&sig](const GlElt& g) { return project_kp(g, sig).second; });
  Eigen::MatrixXd proj_k =
      detail::gl3_linear_map([&sig](const GlElt& g) { return project_kp(g, sig).first; });
  ReduceResult out;
  out.p_sup = sup_norm(linear_map(lin, proj_p, ValueSpace::gl(3)), points);
  out.reducible = out.p_sup <= tol;
  if (out.reducible) {
    out.omega_k = SpinConnection(linear_map(lin, proj_k, ValueSpace::gl(3)));
    out.theta = CoframeField(trans);
  }
  return out;
}

struct CorrespondenceResult {
  double integral_pg = 0.0;
  double integral_cs = 0.0;
  double ratio = 0.0;       // integral_cs / integral_pg when defined
  bool ratio_defined = false;
  ValuedForm pointwise_diff;  // cs density minus pg density
};

/// Integrates both action densities of an admissible section over the
/// periodic chart. Inadmissible sections (nonzero p part of omega) are
/// rejected: the correspondence statement presupposes metricity.
inline CorrespondenceResult correspondence(const GravSection& sigma, const Signature& sig,
                                           const QuadratureGrid& grid,
                                           double admissibility_tol = 1e-10) {
  const Chart& chart = sigma.theta.form.chart();
  if (!chart.periodic_kind() || chart.n != 3)
    throw DimensionError("correspondence: need a periodic 3-chart");

  MetricityResidual metricity = metricity_residual(sigma, sig);
  std::vector<Pt> grid_pts;
  grid_pts.reserve(grid.total());
  for (std::size_t flat = 0; flat < grid.total(); ++flat)
    grid_pts.push_back(detail::grid_point(chart, grid, flat));
  const double p_sup = sup_norm(metricity.p_part, grid_pts);
  if (p_sup > admissibility_tol)
    throw std::invalid_argument(
        "correspondence: inadmissible section, sup |p part of omega| = " + std::to_string(p_sup));

  ValuedForm pg = palatini_form(sigma, sig);
  ValuedForm cs = cs_of_section(sigma, sig);
  CorrespondenceResult out{.integral_pg = integrate_top(pg, grid),
                           .integral_cs = integrate_top(cs, grid),
                           .ratio = 0.0,
                           .ratio_defined = false,
                           .pointwise_diff = cs - pg};
  if (std::abs(out.integral_pg) > 1e-12) {
    out.ratio = out.integral_cs / out.integral_pg;
    out.ratio_defined = true;
  }
  return out;
}

}  // namespace csgrav
