#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/nonlinear.hpp"
#include "galtrap/parallel.hpp"

namespace galtrap {

enum class Scheme { rk4_integrating_factor, rk4_plain };

inline std::string to_string(Scheme s) { return s == Scheme::rk4_plain ? "rk4-plain" : "rk4-integrating-factor"; }

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "rk4-plain") return Scheme::rk4_plain;
  if (s == "rk4-integrating-factor" || s == "rk4-if") return Scheme::rk4_integrating_factor;
  throw ParameterError("unknown scheme '" + s + "'");
}

struct IntegratorConfig {
  double h = 1e-2;
  double T = 1.0;
  Scheme scheme = Scheme::rk4_integrating_factor;
  int stride = 1;
  bool linear_only = false;  ///< drop the nonlinear term (testing hook)
  double invariant_tol = 1e-9;

  /// Number of steps; T must be an integer multiple of h.
  long steps() const {
    validate();
    const double n = T / h;
    const long r = std::lround(n);
    if (std::abs(n - double(r)) > 1e-9 * std::max(1.0, n)) throw ParameterError("T must be a multiple of h");
    return r;
  }

  void validate() const {
    if (!(h > 0.0)) throw ParameterError("step h must be positive");
    if (!(T >= h * (1.0 - 1e-12))) throw ParameterError("horizon T must be at least h");
    if (stride < 1) throw ParameterError("output stride must be at least 1");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<double> enstrophy;

  const SpectralField& final_state() const { return states.back(); }
};

/// G(u) = N(u) + P f on u's own mode set (everything but the linear term).
inline SpectralField forcing_and_nonlinear(const SpectralField& u, const ForceField& f, bool linear_only) {
  SpectralField g = linear_only ? SpectralField(u.modeset()) : nonlinear_term(u, u.modeset());
  if (!f.is_zero())
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] + f.projected(u.modes()[i]);
  return g;
}

namespace detail {

/// out_i = a_i * x_i + s * b_i * y_i, for per-mode real factors a, b.
inline SpectralField combine(const std::vector<double>& a, const SpectralField& x, double s, const std::vector<double>& b,
                             const SpectralField& y) {
  SpectralField out(x.modeset());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a[i] * x[i] + (s * b[i]) * y[i];
  return out;
}

inline void check_step(const SpectralField& u, double tol, double t) {
  const double scale = std::max(1.0, u.max_modulus());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!std::isfinite(u[i][0].real() + u[i][0].imag() + u[i][1].real() + u[i][1].imag() + u[i][2].real() +
                       u[i][2].imag()))
      throw StepRejected("non-finite coefficient at k=" + u.modes()[i].str() + ", t=" + std::to_string(t));
  if (u.incompressibility_defect() > tol * scale || u.reality_defect() > tol * scale)
    throw StepRejected("invariant drift beyond tolerance at t=" + std::to_string(t) + "; reduce h");
}

}  // namespace detail

/// One step of the chosen scheme. The integrating-factor variant (Lawson
/// RK4) treats -nu|k|^2 exactly.
inline SpectralField step(const SpectralField& u, const ForceField& f, const PhysicsParams& p, double h, Scheme scheme,
                          bool linear_only = false) {
  const std::size_t n = u.size();
  std::vector<double> one(n, 1.0), E(n), E2(n), lam(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam[i] = -p.nu * double(u.modes()[i].norm2());
    E[i] = std::exp(lam[i] * h / 2.0);
    E2[i] = E[i] * E[i];
  }
  auto G = [&](const SpectralField& v) { return forcing_and_nonlinear(v, f, linear_only); };
  if (scheme == Scheme::rk4_plain) {
    auto F = [&](const SpectralField& v) {
      SpectralField g = G(v);
      for (std::size_t i = 0; i < n; ++i) g[i] = g[i] + lam[i] * v[i];
      return g;
    };
    const auto k1 = F(u);
    const auto k2 = F(detail::combine(one, u, h / 2.0, one, k1));
    const auto k3 = F(detail::combine(one, u, h / 2.0, one, k2));
    const auto k4 = F(detail::combine(one, u, h, one, k3));
    SpectralField out(u.modeset());
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] + (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    return out;
  }
  const auto k1 = G(u);
  const auto k2 = G(detail::combine(E, u, h / 2.0, E, k1));
  const auto k3 = G(detail::combine(E, u, h / 2.0, one, k2));
  const auto k4 = G(detail::combine(E2, u, h, E, k3));
  SpectralField out(u.modeset());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = E2[i] * u[i] + (h / 6.0) * (E2[i] * k1[i] + (2.0 * E[i]) * (k2[i] + k3[i]) + k4[i]);
  return out;
}

inline Trajectory integrate(const SpectralField& u0, const ForceField& f, const PhysicsParams& p,
                            const IntegratorConfig& cfg) {
  p.validate();
  if (u0.dim() != p.dim) throw ParameterError("field and physics dimensions differ");
  u0.check_invariants();
  const long steps = cfg.steps();
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(u0);
  tr.enstrophy.push_back(enstrophy(u0));
  SpectralField u = u0;
  for (long s = 1; s <= steps; ++s) {
    u = step(u, f, p, cfg.h, cfg.scheme, cfg.linear_only);
    const double t = double(s) * cfg.h;
    detail::check_step(u, cfg.invariant_tol, t);
    if (s % cfg.stride == 0 || s == steps) {
      tr.times.push_back(t);
      tr.states.push_back(u);
      tr.enstrophy.push_back(enstrophy(u));
    }
  }
  return tr;
}

/// Real coordinates: for each representative k (lexicographic order) and
/// each vector e_b of an orthonormal basis of k-perp, (Re, Im) of e_b . u_k.
class RealCoordinates {
 public:
  explicit RealCoordinates(ModeSetPtr set) : set_(std::move(set)) {
    for (int r : set_->representatives()) {
      reps_.push_back(static_cast<std::size_t>(r));
      bases_.push_back(perp_basis((*set_)[static_cast<std::size_t>(r)]));
    }
    per_mode_ = set_->dim() == 2 ? 2 : 4;
  }

  int size() const { return static_cast<int>(reps_.size()) * per_mode_; }
  const ModeSetPtr& modeset() const { return set_; }
  std::size_t rep_count() const { return reps_.size(); }
  std::size_t rep_index(std::size_t r) const { return reps_[r]; }
  const PerpBasis& basis(std::size_t r) const { return bases_[r]; }
  int per_mode() const { return per_mode_; }

  Eigen::VectorXd to_coords(const SpectralField& u) const {
    Eigen::VectorXd x(size());
    for (std::size_t r = 0; r < reps_.size(); ++r)
      for (int b = 0; b < bases_[r].count; ++b) {
        const cplx c = component(u[reps_[r]], bases_[r].e[b]);
        x(index(r, b, 0)) = c.real();
        x(index(r, b, 1)) = c.imag();
      }
    return x;
  }

  SpectralField from_coords(const Eigen::VectorXd& x) const {
    SpectralField u(set_);
    for (std::size_t r = 0; r < reps_.size(); ++r) {
      CVec v{};
      for (int b = 0; b < bases_[r].count; ++b) {
        const cplx c(x(index(r, b, 0)), x(index(r, b, 1)));
        for (int d = 0; d < 3; ++d) v[d] += c * bases_[r].e[b][d];
      }
      u.set_pair((*set_)[reps_[r]], v);
    }
    return u;
  }

  int index(std::size_t r, int b, int part) const { return static_cast<int>(r) * per_mode_ + 2 * b + part; }

 private:
  ModeSetPtr set_;
  std::vector<std::size_t> reps_;
  std::vector<PerpBasis> bases_;
  int per_mode_ = 2;
};

/// Jacobian of the Galerkin vector field at u in RealCoordinates(u.modeset()).
inline Eigen::MatrixXd jacobian(const SpectralField& u, const PhysicsParams& p) {
  p.validate();
  const RealCoordinates rc(u.modeset());
  const ModeSet& set = u.modes();
  const int n = rc.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const cplx minus_i(0.0, -1.0);
  const std::size_t R = rc.rep_count();
  parallel_for(R, [&](std::size_t qr) {
    const std::size_t qi = rc.rep_index(qr);
    const Mode& q = set[qi];
    for (int bq = 0; bq < rc.basis(qr).count; ++bq)
      for (int part = 0; part < 2; ++part) {
        const int col = rc.index(qr, bq, part);
        const cplx c = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
        CVec dq{}, dmq{};
        for (int d = 0; d < 3; ++d) {
          dq[d] = c * rc.basis(qr).e[bq][d];
          dmq[d] = std::conj(c) * rc.basis(qr).e[bq][d];
        }
        for (std::size_t kr = 0; kr < R; ++kr) {
          const std::size_t ki = rc.rep_index(kr);
          const Mode& k = set[ki];
          CVec s{};
          // perturbation at +q and -q, entering either slot of the bilinear sum
          for (int sign : {1, -1}) {
            const Mode qs = sign > 0 ? q : -q;
            const CVec& dv = sign > 0 ? dq : dmq;
            const int j = set.index_of(k - qs);
            if (j < 0) continue;
            const CVec& w = u[static_cast<std::size_t>(j)];
            s = s + dot(dv, k) * w + dot(w, k) * dv;
          }
          const CVec dn = minus_i * leray_project(k, s);
          for (int bk = 0; bk < rc.basis(kr).count; ++bk) {
            const cplx v = component(dn, rc.basis(kr).e[bk]);
            J(rc.index(kr, bk, 0), col) = v.real();
            J(rc.index(kr, bk, 1), col) = v.imag();
          }
        }
      }
  }, 4);
  for (std::size_t r = 0; r < R; ++r) {
    const double lam = -p.nu * double(set[rc.rep_index(r)].norm2());
    for (int b = 0; b < rc.basis(r).count; ++b)
      for (int part = 0; part < 2; ++part) J(rc.index(r, b, part), rc.index(r, b, part)) += lam;
  }
  return J;
}

/// Galerkin vector field in real coordinates.
inline Eigen::VectorXd vector_field_coords(const RealCoordinates& rc, const Eigen::VectorXd& x, const ForceField& f,
                                           const PhysicsParams& p) {
  const auto u = rc.from_coords(x);
  return rc.to_coords(rhs(u, f, p, rc.modeset()));
}

/// Largest eigenvalue of (J + J^T)/2.
inline double lognorm_euclidean(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols()) throw ParameterError("log norm needs a square matrix");
  if (J.rows() == 0) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd S = 0.5 * (J + J.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// max_i [S_ii + sum_{j != i} |S_ij|], S = (J + J^T)/2.
inline double lognorm_gershgorin(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols()) throw ParameterError("log norm needs a square matrix");
  if (J.rows() == 0) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd S = 0.5 * (J + J.transpose());
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < S.rows(); ++i) best = std::max(best, S(i, i) + S.row(i).cwiseAbs().sum() - std::abs(S(i, i)));
  return best;
}

enum class LogNormMethod { euclidean_eig, gershgorin, condition_D };

inline std::string to_string(LogNormMethod m) {
  switch (m) {
    case LogNormMethod::euclidean_eig: return "euclidean-eig";
    case LogNormMethod::gershgorin: return "gershgorin";
    case LogNormMethod::condition_D: return "condition-D";
  }
  return "?";
}

struct LogNormBound {
  LogNormMethod method = LogNormMethod::euclidean_eig;
  double value = 0.0;
  std::size_t projection_modes = 0;
  double projection_radius = 0.0;
  std::string states;  ///< description of the state set the bound covers
};

struct LipschitzReport {
  double max_ratio = 0.0;
  double initial_separation = 0.0;
  double max_separation = 0.0;
  bool pass = false;
};

/// max over output times of |u(t) - v(t)| / (e^{lt} |u0 - v0|); pass iff <= 1 + 1e-6.
inline LipschitzReport lipschitz_experiment(const SpectralField& u0, const SpectralField& v0, const ForceField& f,
                                            const PhysicsParams& p, const IntegratorConfig& cfg, double l) {
  if (!(u0.modes() == v0.modes())) throw ParameterError("the two initial states live on different mode sets");
  const auto a = integrate(u0, f, p, cfg);
  const auto b = integrate(v0, f, p, cfg);
  LipschitzReport rep;
  rep.initial_separation = (u0 - v0).l2_norm();
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double sep = (a.states[i] - b.states[i]).l2_norm();
    rep.max_separation = std::max(rep.max_separation, sep);
    if (rep.initial_separation > 0.0)
      rep.max_ratio = std::max(rep.max_ratio, sep / (std::exp(l * a.times[i]) * rep.initial_separation));
  }
  rep.pass = rep.initial_separation > 0.0 ? rep.max_ratio <= 1.0 + 1e-6 : rep.max_separation <= 1e-12;
  return rep;
}

/// e^{lt} rho + delta (e^{lt} - 1)/l, with the l = 0 limit rho + delta t.
inline double difference_bound(double rho, double delta, double l, double t) {
  if (std::abs(l) < 1e-12) return rho + delta * t;
  return std::exp(l * t) * rho + delta * std::expm1(l * t) / l;
}

struct GalerkinDifferenceReport {
  double delta_n = 0.0;  ///< trajectory-wise defect
  std::vector<double> times;
  std::vector<double> difference;  ///< |x_n(t) - P_n x_m(t)|
  std::vector<double> bound;
  double max_excess = -std::numeric_limits<double>::infinity();  ///< max (difference - bound)
  double min_slack = std::numeric_limits<double>::infinity();     ///< min (bound - difference)
  bool pass = false;
};

/// Integrates on m and on n, measures delta_n along the m-trajectory and
/// checks the difference bound at every output time.
inline GalerkinDifferenceReport galerkin_difference_experiment(const SpectralField& u0, const ForceField& f,
                                                               const PhysicsParams& p, const IntegratorConfig& cfg,
                                                               const ModeSetPtr& n, const ModeSetPtr& m, double l,
                                                               double tol = 1e-10) {
  if (!n->subset_of(*m)) throw ParameterError("the smaller projection must be contained in the larger");
  const auto xm = integrate(project(u0, m), f, p, cfg);
  const auto xn = integrate(project(u0, n), f, p, cfg);
  GalerkinDifferenceReport rep;
  for (const auto& x : xm.states) {
    const auto full = rhs(x, f, p, n);
    const auto trunc = rhs(project(x, n), f, p, n);
    rep.delta_n = std::max(rep.delta_n, (full - trunc).l2_norm());
  }
  const double rho = (xn.states[0] - project(xm.states[0], n)).l2_norm();
  for (std::size_t i = 0; i < xm.times.size(); ++i) {
    const double t = xm.times[i];
    const double diff = (xn.states[i] - project(xm.states[i], n)).l2_norm();
    const double b = difference_bound(rho, rep.delta_n, l, t);
    rep.times.push_back(t);
    rep.difference.push_back(diff);
    rep.bound.push_back(b);
    rep.max_excess = std::max(rep.max_excess, diff - b);
    rep.min_slack = std::min(rep.min_slack, b - diff);
  }
  rep.pass = rep.max_excess <= tol;
  return rep;
}

struct EnstrophyCheckReport {
  std::size_t states = 0;
  double max_excess = -std::numeric_limits<double>::infinity();  ///< max dV/dt - (bound + slack)
  double max_rate = -std::numeric_limits<double>::infinity();
  bool strictly_decaying = true;  ///< dV/dt < 0 at every nonzero state
  bool pass = false;
};

/// dV/dt = 2 Re sum |k|^2 conj(u_k) . rhs_k against -2 nu V + 2 V(F) sqrt(V).
inline EnstrophyCheckReport enstrophy_inequality_check(const Trajectory& traj, const ForceField& f,
                                                       const PhysicsParams& p) {
  EnstrophyCheckReport rep;
  const double vf = force_enstrophy_norm(f);
  for (const auto& u : traj.states) {
    const auto r = rhs(u, f, p, u.modeset());
    CompensatedSum s;
    for (std::size_t i = 0; i < u.size(); ++i) s.add(2.0 * double(u.modes()[i].norm2()) * inner(u[i], r[i]).real());
    const double rate = s.value();
    const double V = enstrophy(u);
    const double bound = -2.0 * p.nu * V + 2.0 * vf * std::sqrt(V);
    rep.max_excess = std::max(rep.max_excess, rate - (bound + 1e-9 * (1.0 + V)));
    rep.max_rate = std::max(rep.max_rate, rate);
    if (V > 0.0 && !(rate < 0.0)) rep.strictly_decaying = false;
    ++rep.states;
  }
  rep.pass = rep.max_excess <= 0.0;
  return rep;
}

struct RichardsonReport {
  double h = 0.0;
  double diff_coarse = 0.0;  ///< |u_h - u_{h/2}| at T
  double diff_fine = 0.0;    ///< |u_{h/2} - u_{h/4}| at T
  double order = 0.0;
};

inline RichardsonReport richardson_order(const SpectralField& u0, const ForceField& f, const PhysicsParams& p,
                                         IntegratorConfig cfg) {
  RichardsonReport rep;
  rep.h = cfg.h;
  cfg.stride = std::numeric_limits<int>::max();
  const auto a = integrate(u0, f, p, cfg).final_state();
  cfg.h /= 2.0;
  const auto b = integrate(u0, f, p, cfg).final_state();
  cfg.h /= 2.0;
  const auto c = integrate(u0, f, p, cfg).final_state();
  rep.diff_coarse = (a - b).l2_norm();
  rep.diff_fine = (b - c).l2_norm();
  rep.order = std::log2(rep.diff_coarse / rep.diff_fine);
  return rep;
}

}  // namespace galtrap
