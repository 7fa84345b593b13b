#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "csgrav/gravity.hpp"

/// Discrete variational layer on a periodic 3-chart: lattice sampling
/// of sections, discrete actions, Euler-Lagrange residuals, directional
/// derivatives and residual-norm descent.
///
/// The connection is parametrized by its k-basis coefficients, so the
/// metricity constraint holds structurally for every configuration and
/// every perturbation. Derivatives are second-order central differences
/// with periodic wrap; flat configurations are exactly stationary.
namespace csgrav {

enum class DiscreteAction { Palatini, ChernSimons };

/// Measured proportionality between the lifted Chern-Simons action and
/// the gravity action under this library's pairing conventions (see
/// kPairingVsEpsilonSign); the continuum layer reproduces it to 1e-12.
inline constexpr double kActionRatio = -2.0;

struct LatticeConfig {
  Chart chart;          // periodic 3-chart
  QuadratureGrid grid;  // site counts per axis
  Signature sig;
  // theta[s]: coframe matrix theta^i_mu (rows i, columns mu);
  // w[s][mu]: k-basis coefficients of omega_mu, i.e. omega_mu = iso(w_mu).
  std::vector<Eigen::Matrix3d> theta;
  std::vector<std::array<Eigen::Vector3d, 3>> w;

  std::size_t sites() const { return theta.size(); }
  int count(int axis) const { return grid.counts[axis]; }

  std::size_t flat_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * count(1) + j) * count(2) + k;
  }

  std::size_t neighbor(std::size_t s, int axis, int step) const {
    int idx[3];
    std::size_t rest = s;
    idx[2] = static_cast<int>(rest % count(2));
    rest /= count(2);
    idx[1] = static_cast<int>(rest % count(1));
    idx[0] = static_cast<int>(rest / count(1));
    idx[axis] = (idx[axis] + step + count(axis)) % count(axis);
    return flat_index(idx[0], idx[1], idx[2]);
  }

  Pt site_point(std::size_t s) const {
    int idx[3];
    std::size_t rest = s;
    idx[2] = static_cast<int>(rest % count(2));
    rest /= count(2);
    idx[1] = static_cast<int>(rest % count(1));
    idx[0] = static_cast<int>(rest / count(1));
    Pt x = Pt::Zero(3);
    for (int a = 0; a < 3; ++a)
      x[a] = chart.lo[a] + (chart.hi[a] - chart.lo[a]) * idx[a] / static_cast<double>(count(a));
    return x;
  }

  double spacing(int axis) const {
    return (chart.hi[axis] - chart.lo[axis]) / static_cast<double>(count(axis));
  }

  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }

  double min_coframe_det() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : theta) best = std::min(best, std::abs(t.determinant()));
    return best;
  }

  static LatticeConfig flat(const Chart& chart, const QuadratureGrid& grid,
                            const Signature& sig) {
    if (!chart.periodic_kind() || chart.n != 3 || grid.n != 3)
      throw DimensionError("LatticeConfig: need a periodic 3-chart");
    LatticeConfig cfg{chart, grid, sig, {}, {}};
    cfg.theta.assign(grid.total(), Eigen::Matrix3d::Identity());
    cfg.w.assign(grid.total(), {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                Eigen::Vector3d::Zero()});
    return cfg;
  }

  /// Samples an admissible continuum section at the lattice sites. The
  /// connection must be k-valued (p part below tol).
  static LatticeConfig sample_section(const GravSection& section, const QuadratureGrid& grid,
                                      const Signature& sig, double admissibility_tol = 1e-10) {
    LatticeConfig cfg = flat(section.theta.form.chart(), grid, sig);
    for (std::size_t s = 0; s < cfg.sites(); ++s) {
      const Pt x = cfg.site_point(s);
      cfg.theta[s] = section.theta.matrix_at(x);
      FormBlock ob = section.omega.form.eval_block(x, 0);
      for (int mu = 0; mu < 3; ++mu) {
        GlElt om = gl_from_components(ob.value.row(mu).transpose(), 3);
        auto [k, p] = project_kp(om, sig);
        if (p.mat.cwiseAbs().maxCoeff() > admissibility_tol)
          throw std::invalid_argument("sample_section: connection is not k-valued");
        cfg.w[s][mu] = iso_r3_k(k, sig);
      }
    }
    return cfg;
  }

  /// Samples an affine potential whose linear part is k-valued.
  static LatticeConfig sample_potential(const GaugePotential& a, const QuadratureGrid& grid,
                                        const Signature& sig, double admissibility_tol = 1e-8) {
    if (!(a.space() == ValueSpace::aff(3)))
      throw DimensionError("sample_potential: potential must be a(3)-valued");
    LatticeConfig cfg = flat(a.chart(), grid, sig);
    for (std::size_t s = 0; s < cfg.sites(); ++s) {
      const Pt x = cfg.site_point(s);
      FormBlock b = a.eval_block(x, 0);
      for (int mu = 0; mu < 3; ++mu) {
        GlElt lin = gl_from_components(b.value.row(mu).transpose().head(9), 3);
        auto [k, p] = project_kp(lin, sig);
        if (p.mat.cwiseAbs().maxCoeff() > admissibility_tol)
          throw std::invalid_argument("sample_potential: linear part is not k-valued");
        cfg.w[s][mu] = iso_r3_k(k, sig);
        for (int i = 0; i < 3; ++i) cfg.theta[s](i, mu) = b.value(mu, 9 + i);
      }
    }
    return cfg;
  }
};

/// Same dof layout as LatticeConfig; the k-parametrization keeps every
/// perturbed configuration admissible.
struct Perturbation {
  std::vector<Eigen::Matrix3d> theta;
  std::vector<std::array<Eigen::Vector3d, 3>> w;

  static Perturbation zeros(const LatticeConfig& cfg) {
    Perturbation p;
    p.theta.assign(cfg.sites(), Eigen::Matrix3d::Zero());
    p.w.assign(cfg.sites(), {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                             Eigen::Vector3d::Zero()});
    return p;
  }

  static Perturbation random_unit(const LatticeConfig& cfg, Rng& rng) {
    Perturbation p = zeros(cfg);
    for (std::size_t s = 0; s < cfg.sites(); ++s) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.theta[s](i, j) = rng.uniform(-1.0, 1.0);
      for (int mu = 0; mu < 3; ++mu)
        for (int i = 0; i < 3; ++i) p.w[s][mu][i] = rng.uniform(-1.0, 1.0);
    }
    p.scale(1.0 / p.norm());
    return p;
  }

  void scale(double c) {
    for (auto& t : theta) t *= c;
    for (auto& ws : w)
      for (auto& v : ws) v *= c;
  }

  double norm() const {
    double sq = 0.0;
    for (const auto& t : theta) sq += t.squaredNorm();
    for (const auto& ws : w)
      for (const auto& v : ws) sq += v.squaredNorm();
    return std::sqrt(sq);
  }
};

inline LatticeConfig apply_perturbation(const LatticeConfig& cfg, const Perturbation& p,
                                        double eps) {
  LatticeConfig out = cfg;
  for (std::size_t s = 0; s < cfg.sites(); ++s) {
    out.theta[s] += eps * p.theta[s];
    for (int mu = 0; mu < 3; ++mu) out.w[s][mu] += eps * p.w[s][mu];
  }
  return out;
}

namespace detail {
inline Eigen::Vector3d eta_cross(const Signature& sig, const Eigen::Vector3d& a,
                                 const Eigen::Vector3d& b) {
  Eigen::Vector3d c = a.cross(b);
  for (int i = 0; i < 3; ++i) c[i] *= sig.diag[i];
  return c;
}

inline Eigen::Vector3d eta_mul(const Signature& sig, const Eigen::Vector3d& a) {
  Eigen::Vector3d c = a;
  for (int i = 0; i < 3; ++i) c[i] *= sig.diag[i];
  return c;
}

inline constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
}  // namespace detail

/// Discrete 1-jet of the configuration: central differences
/// D_mu f = (f(s + e_mu) - f(s - e_mu)) / (2 h_mu) with periodic wrap.
struct Prolongation {
  std::vector<std::array<Eigen::Matrix3d, 3>> dtheta;                 // [s][mu] = D_mu theta
  std::vector<std::array<std::array<Eigen::Vector3d, 3>, 3>> dw;      // [s][mu][nu] = D_mu w_nu
};

inline Prolongation prolong(const LatticeConfig& cfg) {
  for (int a = 0; a < 3; ++a)
    if (cfg.count(a) < 3)
      throw std::invalid_argument("prolong: need at least 3 sites per axis");
  Prolongation out;
  out.dtheta.resize(cfg.sites());
  out.dw.resize(cfg.sites());
  parallel_for(cfg.sites(), [&](std::size_t s) {
    for (int mu = 0; mu < 3; ++mu) {
      const std::size_t up = cfg.neighbor(s, mu, +1);
      const std::size_t dn = cfg.neighbor(s, mu, -1);
      const double inv2h = 0.5 / cfg.spacing(mu);
      out.dtheta[s][mu] = (cfg.theta[up] - cfg.theta[dn]) * inv2h;
      for (int nu = 0; nu < 3; ++nu)
        out.dw[s][mu][nu] = (cfg.w[up][nu] - cfg.w[dn][nu]) * inv2h;
    }
  });
  return out;
}

/// Per-site curvature and torsion components over the increasing pairs
/// (0,1), (0,2), (1,2):
///   curv_{mu nu} = D_mu w_nu - D_nu w_mu + eta(w_mu x w_nu),
///   tors_{mu nu} = D_mu th_nu - D_nu th_mu + eta(w_mu x th_nu) - eta(w_nu x th_mu).
struct ResidualFields {
  std::vector<std::array<Eigen::Vector3d, 3>> curv;
  std::vector<std::array<Eigen::Vector3d, 3>> tors;
  double curv_sup = 0.0, tors_sup = 0.0;
  double curv_l2sq = 0.0, tors_l2sq = 0.0;  // cell-volume weighted

  double objective() const { return curv_l2sq + tors_l2sq; }
};

inline ResidualFields el_residual(const LatticeConfig& cfg) {
  const Prolongation pro = prolong(cfg);
  ResidualFields out;
  out.curv.resize(cfg.sites());
  out.tors.resize(cfg.sites());
  std::vector<double> curv_sq(cfg.sites()), tors_sq(cfg.sites());
  parallel_for(cfg.sites(), [&](std::size_t s) {
    double csq = 0.0, tsq = 0.0;
    for (int p = 0; p < 3; ++p) {
      const int mu = detail::kPairs[p][0], nu = detail::kPairs[p][1];
      out.curv[s][p] = pro.dw[s][mu][nu] - pro.dw[s][nu][mu] +
                       detail::eta_cross(cfg.sig, cfg.w[s][mu], cfg.w[s][nu]);
      out.tors[s][p] = pro.dtheta[s][mu].col(nu) - pro.dtheta[s][nu].col(mu) +
                       detail::eta_cross(cfg.sig, cfg.w[s][mu], cfg.theta[s].col(nu)) -
                       detail::eta_cross(cfg.sig, cfg.w[s][nu], cfg.theta[s].col(mu));
      csq += out.curv[s][p].squaredNorm();
      tsq += out.tors[s][p].squaredNorm();
    }
    curv_sq[s] = csq;
    tors_sq[s] = tsq;
  });
  for (std::size_t s = 0; s < cfg.sites(); ++s)
    for (int p = 0; p < 3; ++p) {
      out.curv_sup = std::max(out.curv_sup, out.curv[s][p].cwiseAbs().maxCoeff());
      out.tors_sup = std::max(out.tors_sup, out.tors[s][p].cwiseAbs().maxCoeff());
    }
  out.curv_l2sq = pairwise_sum(curv_sq) * cfg.cell_volume();
  out.tors_l2sq = pairwise_sum(tors_sq) * cfg.cell_volume();
  return out;
}

namespace detail {
/// Lifted Chern-Simons density at one site from values and discrete
/// derivatives; the extended pairing restricted to k (+) R^3 reads
/// <(a,s),(b,t)> = -2 (a.eta t + b.eta s).
inline double cs_site_density(const Signature& sig, const std::array<Eigen::Vector3d, 3>& w,
                              const Eigen::Matrix3d& th,
                              const std::array<std::array<Eigen::Vector3d, 3>, 3>& dw,
                              const std::array<Eigen::Matrix3d, 3>& dth) {
  auto pair_kr3 = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& s,
                      const Eigen::Vector3d& b, const Eigen::Vector3d& t) {
    return -2.0 * (a.dot(eta_mul(sig, t)) + b.dot(eta_mul(sig, s)));
  };
  double density = 0.0;
  for (int p = 0; p < 3; ++p) {
    // slot (a; b, c) with sign: (0;1,2) +, (1;0,2) -, (2;0,1) +
    const int a = (p == 0) ? 0 : (p == 1 ? 1 : 2);
    const int b = (p == 0) ? 1 : (p == 1 ? 0 : 0);
    const int c = (p == 0) ? 2 : (p == 1 ? 2 : 1);
    const double sign = (p == 1) ? -1.0 : 1.0;
    const Eigen::Vector3d dw_bc = dw[b][c] - dw[c][b];
    const Eigen::Vector3d dth_bc = dth[b].col(c) - dth[c].col(b);
    density += sign * pair_kr3(w[a], th.col(a), dw_bc, dth_bc);
    const Eigen::Vector3d br_lin = 2.0 * eta_cross(sig, w[b], w[c]);
    const Eigen::Vector3d br_tr =
        2.0 * (eta_cross(sig, w[b], th.col(c)) - eta_cross(sig, w[c], th.col(b)));
    density += sign * pair_kr3(w[a], th.col(a), br_lin, br_tr) / 3.0;
  }
  return density;
}

/// Gravity density at one site: 2 eta_ij theta^i /\ curv^j with
/// curv = dw + eta(w x w) on the k basis.
inline double pg_site_density(const Signature& sig, const std::array<Eigen::Vector3d, 3>& w,
                              const Eigen::Matrix3d& th,
                              const std::array<std::array<Eigen::Vector3d, 3>, 3>& dw) {
  auto curv = [&](int mu, int nu) {
    return Eigen::Vector3d(dw[mu][nu] - dw[nu][mu] + eta_cross(sig, w[mu], w[nu]));
  };
  const Eigen::Vector3d c12 = curv(1, 2), c02 = curv(0, 2), c01 = curv(0, 1);
  return 2.0 * (th.col(0).dot(eta_mul(sig, c12)) - th.col(1).dot(eta_mul(sig, c02)) +
                th.col(2).dot(eta_mul(sig, c01)));
}
}  // namespace detail

/// Evaluates the chosen action density per site from the prolonged data
/// and sums with the fixed pairwise reduction times the cell volume.
inline double discrete_action(const LatticeConfig& cfg, DiscreteAction which) {
  const Prolongation pro = prolong(cfg);
  std::vector<double> density(cfg.sites());
  std::atomic<bool> singular{false};
  parallel_for(cfg.sites(), [&](std::size_t s) {
    if (std::abs(cfg.theta[s].determinant()) <= kDetTol) {
      singular.store(true);
      density[s] = 0.0;
      return;
    }
    density[s] = which == DiscreteAction::Palatini
                     ? detail::pg_site_density(cfg.sig, cfg.w[s], cfg.theta[s], pro.dw[s])
                     : detail::cs_site_density(cfg.sig, cfg.w[s], cfg.theta[s], pro.dw[s],
                                               pro.dtheta[s]);
  });
  if (singular.load()) throw SingularValue("discrete_action: singular coframe at a site");
  return pairwise_sum(density) * cfg.cell_volume();
}

/// Central difference of the action along a perturbation.
inline double directional_derivative(const LatticeConfig& cfg, const Perturbation& pert,
                                     DiscreteAction which, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("directional_derivative: eps must be positive");
  const double plus = discrete_action(apply_perturbation(cfg, pert, eps), which);
  const double minus = discrete_action(apply_perturbation(cfg, pert, -eps), which);
  return (plus - minus) / (2.0 * eps);
}

/// Analytic gradient of the residual objective
/// R = ||curv||_{L2}^2 + ||tors||_{L2}^2.
inline Perturbation objective_gradient(const LatticeConfig& cfg, const ResidualFields& res) {
  Perturbation grad = Perturbation::zeros(cfg);
  const double c = 2.0 * cfg.cell_volume();
  for (std::size_t s = 0; s < cfg.sites(); ++s) {
    for (int p = 0; p < 3; ++p) {
      const int mu = detail::kPairs[p][0], nu = detail::kPairs[p][1];
      const Eigen::Vector3d r = c * res.curv[s][p];
      const Eigen::Vector3d t = c * res.tors[s][p];
      const double i2hmu = 0.5 / cfg.spacing(mu);
      const double i2hnu = 0.5 / cfg.spacing(nu);
      const std::size_t up_mu = cfg.neighbor(s, mu, +1), dn_mu = cfg.neighbor(s, mu, -1);
      const std::size_t up_nu = cfg.neighbor(s, nu, +1), dn_nu = cfg.neighbor(s, nu, -1);

      // curvature residual: central-difference couplings
      grad.w[up_mu][nu] += r * i2hmu;
      grad.w[dn_mu][nu] -= r * i2hmu;
      grad.w[up_nu][mu] -= r * i2hnu;
      grad.w[dn_nu][mu] += r * i2hnu;
      // curvature residual: bracket couplings
      const Eigen::Vector3d etar = detail::eta_mul(cfg.sig, r);
      grad.w[s][mu] += cfg.w[s][nu].cross(etar);
      grad.w[s][nu] += etar.cross(cfg.w[s][mu]);

      // torsion residual: central-difference couplings on theta columns
      grad.theta[up_mu].col(nu) += t * i2hmu;
      grad.theta[dn_mu].col(nu) -= t * i2hmu;
      grad.theta[up_nu].col(mu) -= t * i2hnu;
      grad.theta[dn_nu].col(mu) += t * i2hnu;
      // torsion residual: bracket couplings
      const Eigen::Vector3d etat = detail::eta_mul(cfg.sig, t);
      grad.w[s][mu] += Eigen::Vector3d(cfg.theta[s].col(nu)).cross(etat);
      grad.theta[s].col(nu) += etat.cross(cfg.w[s][mu]);
      grad.w[s][nu] -= Eigen::Vector3d(cfg.theta[s].col(mu)).cross(etat);
      grad.theta[s].col(mu) -= etat.cross(cfg.w[s][nu]);
    }
  }
  return grad;
}

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<double> objective_history;  // R at start and after each accepted step
  std::vector<double> step_history;
  double final_curv_sup = 0.0, final_tors_sup = 0.0;
  double final_curv_l2sq = 0.0, final_tors_l2sq = 0.0;
  double wall_time_s = 0.0;
};

namespace detail {
/// Quartic coefficients of R(t) = sum |r + t u + t^2 v|^2 * Vcell along
/// a descent direction d: each residual family is quadratic in the
/// dofs, so the restriction to a ray is an exact degree-4 polynomial.
struct RayPolynomial {
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0;

  double value(double t) const { return c0 + t * (c1 + t * (c2 + t * (c3 + t * c4))); }
  double slope(double t) const { return c1 + t * (2 * c2 + t * (3 * c3 + t * 4 * c4)); }
};

inline RayPolynomial ray_polynomial(const LatticeConfig& cfg, const ResidualFields& res,
                                    const Perturbation& d) {
  const Prolongation dpro = prolong(LatticeConfig{
      cfg.chart, cfg.grid, cfg.sig, d.theta, d.w});
  std::vector<double> s1(cfg.sites()), s2(cfg.sites()), s2b(cfg.sites()), s3(cfg.sites()),
      s4(cfg.sites());
  parallel_for(cfg.sites(), [&](std::size_t s) {
    double ru = 0, uu = 0, rv = 0, uv = 0, vv = 0;
    for (int p = 0; p < 3; ++p) {
      const int mu = kPairs[p][0], nu = kPairs[p][1];
      // curvature family
      Eigen::Vector3d u = dpro.dw[s][mu][nu] - dpro.dw[s][nu][mu] +
                          eta_cross(cfg.sig, cfg.w[s][mu], d.w[s][nu]) +
                          eta_cross(cfg.sig, d.w[s][mu], cfg.w[s][nu]);
      Eigen::Vector3d v = eta_cross(cfg.sig, d.w[s][mu], d.w[s][nu]);
      ru += res.curv[s][p].dot(u);
      uu += u.squaredNorm();
      rv += res.curv[s][p].dot(v);
      uv += u.dot(v);
      vv += v.squaredNorm();
      // torsion family
      Eigen::Vector3d ut = dpro.dtheta[s][mu].col(nu) - dpro.dtheta[s][nu].col(mu) +
                           eta_cross(cfg.sig, cfg.w[s][mu], d.theta[s].col(nu)) +
                           eta_cross(cfg.sig, d.w[s][mu], cfg.theta[s].col(nu)) -
                           eta_cross(cfg.sig, cfg.w[s][nu], d.theta[s].col(mu)) -
                           eta_cross(cfg.sig, d.w[s][nu], cfg.theta[s].col(mu));
      Eigen::Vector3d vt = eta_cross(cfg.sig, d.w[s][mu], d.theta[s].col(nu)) -
                           eta_cross(cfg.sig, d.w[s][nu], d.theta[s].col(mu));
      ru += res.tors[s][p].dot(ut);
      uu += ut.squaredNorm();
      rv += res.tors[s][p].dot(vt);
      uv += ut.dot(vt);
      vv += vt.squaredNorm();
    }
    s1[s] = 2.0 * ru;
    s2[s] = uu;
    s2b[s] = 2.0 * rv;
    s3[s] = 2.0 * uv;
    s4[s] = vv;
  });
  const double vol = cfg.cell_volume();
  RayPolynomial poly;
  poly.c0 = res.objective();
  poly.c1 = pairwise_sum(s1) * vol;
  poly.c2 = (pairwise_sum(s2) + pairwise_sum(s2b)) * vol;
  poly.c3 = pairwise_sum(s3) * vol;
  poly.c4 = pairwise_sum(s4) * vol;
  return poly;
}

/// Deterministic minimizer of the ray polynomial for t > 0: expand until
/// the slope turns positive, then bisect on the slope.
inline double minimize_ray(const RayPolynomial& poly, double t_start) {
  if (poly.slope(0.0) >= 0.0) return 0.0;
  double hi = t_start;
  int guard = 0;
  while (poly.slope(hi) < 0.0 && guard++ < 200) hi *= 2.0;
  if (guard >= 200) return hi;
  double lo = 0.0;
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (poly.slope(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Called after the initial evaluation and after every accepted step.
using DescentObserver = std::function<void(int iter, const LatticeConfig&, double objective,
                                           double step)>;

/// Gradient descent with an exact polynomial line search on the
/// residual objective R(cfg) = ||curv||^2 + ||tors||^2. Steps that
/// would make a coframe singular are treated as infinite objective and
/// shrunk; accepted steps never increase R.
inline std::pair<LatticeConfig, SolveReport> descend(const LatticeConfig& cfg0, int max_iters,
                                                     double step0, double tol,
                                                     const DescentObserver& observe = {}) {
  const auto t_begin = std::chrono::steady_clock::now();
  LatticeConfig cfg = cfg0;
  SolveReport report;
  ResidualFields res = el_residual(cfg);
  report.objective_history.push_back(res.objective());
  if (observe) observe(0, cfg, res.objective(), 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    if (res.objective() < tol) {
      report.converged = true;
      break;
    }
    Perturbation grad = objective_gradient(cfg, res);
    const double gnorm = grad.norm();
    if (gnorm == 0.0) {
      report.converged = res.objective() < tol;
      break;
    }
    Perturbation dir = grad;
    dir.scale(-1.0);
    detail::RayPolynomial poly = detail::ray_polynomial(cfg, res, dir);
    double t = detail::minimize_ray(poly, step0);
    if (t <= 0.0) {
      report.line_search_failed = true;
      break;
    }
    // keep the coframe inside the chart: singular determinant = +inf
    LatticeConfig cand = apply_perturbation(cfg, dir, t);
    int shrink = 0;
    while ((cand.min_coframe_det() <= kDetTol || poly.value(t) > res.objective()) &&
           shrink++ < 60) {
      t *= 0.5;
      cand = apply_perturbation(cfg, dir, t);
    }
    if (shrink >= 60) {
      report.line_search_failed = true;
      break;
    }
    ResidualFields cand_res = el_residual(cand);
    if (cand_res.objective() > res.objective()) {
      report.line_search_failed = true;
      break;
    }
    cfg = std::move(cand);
    res = std::move(cand_res);
    report.objective_history.push_back(res.objective());
    report.step_history.push_back(t);
    report.iterations = iter + 1;
    if (observe) observe(report.iterations, cfg, res.objective(), t);
    if (res.objective() < tol) {
      report.converged = true;
      break;
    }
  }

  report.final_curv_sup = res.curv_sup;
  report.final_tors_sup = res.tors_sup;
  report.final_curv_l2sq = res.curv_l2sq;
  report.final_tors_l2sq = res.tors_l2sq;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return {cfg, report};
}

struct StationarityEntry {
  double dd_pg = 0.0;
  double dd_cs = 0.0;
  double dd_pg_2eps = 0.0;
  double dd_cs_2eps = 0.0;
};

struct StationarityReport {
  std::vector<StationarityEntry> directions;
  double max_abs_pg = 0.0;
  double max_abs_cs = 0.0;
  /// max |dd_cs / ratio - dd_pg| over the sampled directions
  double max_normalized_diff = 0.0;
};

/// Central-difference directional derivatives of both actions along
/// seeded random unit perturbations, with a doubled-step entry for a
/// refinement check.
inline StationarityReport stationarity_report(const LatticeConfig& cfg, int n_dirs, double eps,
                                              std::uint64_t seed,
                                              double ratio = kActionRatio) {
  Rng rng(seed);
  StationarityReport out;
  out.directions.reserve(n_dirs);
  for (int k = 0; k < n_dirs; ++k) {
    Perturbation p = Perturbation::random_unit(cfg, rng);
    StationarityEntry e;
    e.dd_pg = directional_derivative(cfg, p, DiscreteAction::Palatini, eps);
    e.dd_cs = directional_derivative(cfg, p, DiscreteAction::ChernSimons, eps);
    e.dd_pg_2eps = directional_derivative(cfg, p, DiscreteAction::Palatini, 2 * eps);
    e.dd_cs_2eps = directional_derivative(cfg, p, DiscreteAction::ChernSimons, 2 * eps);
    out.max_abs_pg = std::max(out.max_abs_pg, std::abs(e.dd_pg));
    out.max_abs_cs = std::max(out.max_abs_cs, std::abs(e.dd_cs));
    out.max_normalized_diff =
        std::max(out.max_normalized_diff, std::abs(e.dd_cs / ratio - e.dd_pg));
    out.directions.push_back(e);
  }
  return out;
}

}  // namespace csgrav
