#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/io.hpp"
#include "galtrap/lattice.hpp"
#include "galtrap/nonlinear.hpp"
#include "galtrap/parallel.hpp"
#include "galtrap/random.hpp"

namespace galtrap {

/// V(u) <= V0 and |u_k| <= D/|k|^gamma for |k| > K.
struct PolyRegion {
  int dim = 2;
  double nu = 1.0;
  double V0 = 0.0;
  double K = 0.0;
  double gamma = 4.0;
  double D = 0.0;
  double V_star = 0.0;
  ConstantEstimate C;  ///< nonlinear-bound constant used for K
};

/// Poly base intersected with |u_k| <= D2 e^{-a|k|}/|k|^gamma for |k| > K_e.
struct ExpRegion {
  PolyRegion base;
  double D2 = 0.0;
  double K_e = 0.0;
  double a = 0.0;
  ConstantEstimate C_Q;
};

/// Poly base intersected with |u_k| <= D3 e^{-a3|k|t}/|k|^gamma for |k| > K_e, 0 <= t <= t0.
struct TimeExpRegion {
  PolyRegion base;
  double D3 = 0.0;
  double K_e = 0.0;
  double a3 = 0.0;
  double t0 = 0.0;
  ConstantEstimate C_Q;
};

/// |u_k| <= D/|k|^gamma for every k (unforced 3D).
struct SmallData3DRegion {
  double nu = 1.0;
  double D = 0.0;
  double gamma = 4.0;
  double D0 = 0.0;
  ConstantEstimate C_Q;
};

using TrapRegion = std::variant<PolyRegion, ExpRegion, TimeExpRegion, SmallData3DRegion>;

inline std::string region_kind(const TrapRegion& r) {
  switch (r.index()) {
    case 0: return "poly";
    case 1: return "exp";
    case 2: return "time_exp";
    default: return "small_data_3d";
  }
}

inline int region_dim(const TrapRegion& r) {
  if (std::holds_alternative<SmallData3DRegion>(r)) return 3;
  if (const auto* e = std::get_if<ExpRegion>(&r)) return e->base.dim;
  if (const auto* t = std::get_if<TimeExpRegion>(&r)) return t->base.dim;
  return std::get<PolyRegion>(r).dim;
}

inline double region_nu(const TrapRegion& r) {
  if (const auto* s = std::get_if<SmallData3DRegion>(&r)) return s->nu;
  if (const auto* e = std::get_if<ExpRegion>(&r)) return e->base.nu;
  if (const auto* t = std::get_if<TimeExpRegion>(&r)) return t->base.nu;
  return std::get<PolyRegion>(r).nu;
}

/// Base polynomial region, if the variant has one.
inline const PolyRegion* region_base(const TrapRegion& r) {
  if (const auto* p = std::get_if<PolyRegion>(&r)) return p;
  if (const auto* e = std::get_if<ExpRegion>(&r)) return &e->base;
  if (const auto* t = std::get_if<TimeExpRegion>(&r)) return &t->base;
  return nullptr;
}

inline std::vector<ConstantEstimate> region_constants(const TrapRegion& r) {
  std::vector<ConstantEstimate> out;
  if (const auto* b = region_base(r)) out.push_back(b->C);
  if (const auto* e = std::get_if<ExpRegion>(&r)) out.push_back(e->C_Q);
  if (const auto* t = std::get_if<TimeExpRegion>(&r)) out.push_back(t->C_Q);
  if (const auto* s = std::get_if<SmallData3DRegion>(&r)) out.push_back(s->C_Q);
  return out;
}

namespace detail {

inline void check_margin(double margin) {
  if (!(margin > 0.0) || !(margin < 1.0)) throw ParameterError("construction margin must lie in (0, 1)");
}

}  // namespace detail

/// Threshold V* = (V(F)/nu)^2 of the enstrophy inequality.
inline double enstrophy_threshold(const ForceField& f, const PhysicsParams& p) {
  const double r = force_enstrophy_norm(f) / p.nu;
  return r * r;
}

/// Polynomial region: K = ceil(max(C^2 V0/nu^2, K_force)) (1+m), D = sqrt(V0) K^{gamma-1} (1+m).
inline PolyRegion build_trap1(double V0, double gamma, const ForceField& f, const PhysicsParams& p,
                              const ConstantEstimate& C, double margin = 0.1) {
  p.validate();
  detail::check_margin(margin);
  if (p.dim != 2) throw HypothesisError("the polynomial trapping region is built for d = 2");
  if (!(gamma >= 2.5)) throw HypothesisError("the polynomial trapping region needs gamma >= 2.5");
  if (!(C.reported() > 0.0)) throw ParameterError("nonlinear-bound constant must be positive");
  PolyRegion r;
  r.dim = p.dim;
  r.nu = p.nu;
  r.gamma = gamma;
  r.V0 = V0;
  r.V_star = enstrophy_threshold(f, p);
  if (!(V0 > r.V_star))
    throw HypothesisError("V0 = " + format_double(V0) + " does not exceed the threshold V* = " + format_double(r.V_star));
  r.C = C;
  const double c = C.reported();
  const double k_raw = std::max(c * c * V0 / (p.nu * p.nu), double(f.cutoff()));
  r.K = std::max(1.0, std::ceil(k_raw)) * (1.0 + margin);
  r.D = std::sqrt(V0) * std::pow(r.K, gamma - 1.0) * (1.0 + margin);
  return r;
}

inline ExpRegion build_trap2(const PolyRegion& base, double D2, const PhysicsParams& p, const ConstantEstimate& C_Q,
                             double margin = 0.1) {
  p.validate();
  detail::check_margin(margin);
  if (!(D2 > base.D)) throw ParameterError("D2 must exceed the base region's D");
  ExpRegion r;
  r.base = base;
  r.D2 = D2;
  r.C_Q = C_Q;
  r.K_e = std::ceil(C_Q.reported() * D2 / p.nu) * (1.0 + margin);
  r.a = (1.0 - margin) * std::log(D2 / base.D) / r.K_e;
  return r;
}

inline TimeExpRegion build_trap3(const PolyRegion& base, double D3, double t0, const PhysicsParams& p,
                                 const ConstantEstimate& C_Q, double margin = 0.1) {
  p.validate();
  detail::check_margin(margin);
  if (!(D3 > base.D)) throw ParameterError("D3 must exceed the base region's D");
  if (!(t0 > 0.0)) throw ParameterError("t0 must be positive");
  TimeExpRegion r;
  r.base = base;
  r.D3 = D3;
  r.t0 = t0;
  r.C_Q = C_Q;
  r.K_e = std::ceil(D3 * C_Q.reported() / p.nu) * (1.0 + margin);
  r.a3 = (1.0 - margin) * std::log(D3 / base.D) / (r.K_e * t0);
  return r;
}

inline SmallData3DRegion build_smalldata_3d(double gamma, const ForceField& f, const PhysicsParams& p,
                                            const ConstantEstimate& C_Q, double margin = 0.1) {
  p.validate();
  detail::check_margin(margin);
  if (p.dim != 3) throw HypothesisError("the small-data region is three-dimensional");
  if (!(gamma > 3.5)) throw HypothesisError("the small-data region needs gamma > 3.5");
  if (!f.is_zero()) throw HypothesisError("the small-data region assumes zero force");
  if (C_Q.dim != 3 || C_Q.name != ConstantName::C_Q) throw ParameterError("expected a 3D C_Q estimate");
  SmallData3DRegion r;
  r.nu = p.nu;
  r.gamma = gamma;
  r.C_Q = C_Q;
  r.D0 = p.nu / C_Q.reported();
  r.D = (1.0 - margin) * r.D0;
  return r;
}

/// Throws ParameterError naming the first strict inequality of the region's
/// hypotheses that fails.
inline void check_region_invariants(const TrapRegion& region) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError("region invariant fails: " + what);
  };
  if (const auto* s = std::get_if<SmallData3DRegion>(&region)) {
    need(s->gamma > 3.5, "gamma > 3.5");
    need(s->D > 0.0 && s->D < s->nu / s->C_Q.reported(), "0 < D < nu / C_Q(3,gamma)");
    return;
  }
  const PolyRegion& b = *region_base(region);
  const double c = b.C.reported();
  need(b.V0 > b.V_star, "V0 > V*");
  need(b.gamma >= 2.5, "gamma >= 2.5");
  need(b.K > c * c * b.V0 / (b.nu * b.nu), "K > C^2 V0 / nu^2");
  need(b.D > std::sqrt(b.V0) * std::pow(b.K, b.gamma - 1.0), "D > sqrt(V0) K^(gamma-1)");
  if (const auto* e = std::get_if<ExpRegion>(&region)) {
    need(e->D2 > b.D, "D2 > D");
    need(e->K_e > e->C_Q.reported() * e->D2 / b.nu, "K_e > C_Q D2 / nu");
    need(e->a > 0.0 && e->a < std::log(e->D2 / b.D) / e->K_e, "0 < a < ln(D2/D) / K_e");
  }
  if (const auto* t = std::get_if<TimeExpRegion>(&region)) {
    need(t->D3 > b.D, "D3 > D");
    need(t->t0 > 0.0, "t0 > 0");
    need(t->K_e > t->D3 * t->C_Q.reported() / b.nu, "K_e > D3 C_Q / nu");
    need(t->a3 > 0.0 && t->a3 < std::log(t->D3 / b.D) / (t->K_e * t->t0), "0 < a3 < ln(D3/D) / (K_e t0)");
  }
}

/// Modulus bound at mode k and time t, with its time derivative; bound is
/// +inf when no modulus constraint applies to k.
struct Envelope {
  double bound = std::numeric_limits<double>::infinity();
  double rate = 0.0;
  bool constrained() const { return std::isfinite(bound); }
};

inline Envelope envelope(const TrapRegion& region, const Mode& k, double t = 0.0) {
  Envelope e;
  const double kn = k.norm();
  if (const auto* s = std::get_if<SmallData3DRegion>(&region)) {
    e.bound = s->D / std::pow(kn, s->gamma);
    return e;
  }
  const PolyRegion& b = *region_base(region);
  const double scale = std::pow(kn, -b.gamma);
  if (kn > b.K) e.bound = b.D * scale;
  if (const auto* x = std::get_if<ExpRegion>(&region)) {
    if (kn > x->K_e) e.bound = std::min(e.bound, x->D2 * std::exp(-x->a * kn) * scale);
  }
  if (const auto* x = std::get_if<TimeExpRegion>(&region)) {
    if (kn > x->K_e) {
      const double timed = x->D3 * std::exp(-x->a3 * kn * t) * scale;
      if (timed < e.bound) {
        e.bound = timed;
        e.rate = -x->a3 * kn * timed;
      }
    }
  }
  return e;
}

inline std::optional<double> region_V0(const TrapRegion& r) {
  if (const auto* b = region_base(r)) return b->V0;
  return std::nullopt;
}

struct Slack {
  std::string constraint;  ///< "enstrophy" or "modulus"
  Mode k{};
  double value = 0.0;      ///< bound minus measured value (>= 0 inside)
};

struct Membership {
  bool inside = true;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<Slack> slacks;
};

/// Closed-set membership at time t; relative tolerance `tol` admits boundary roundoff.
inline Membership contains(const TrapRegion& region, const SpectralField& u, double t = 0.0, double tol = 1e-12) {
  if (u.dim() != region_dim(region)) throw ParameterError("region and field dimensions differ");
  Membership m;
  auto record = [&](Slack s, double scale) {
    if (s.value < -tol * scale) m.inside = false;
    m.min_slack = std::min(m.min_slack, s.value);
    m.slacks.push_back(std::move(s));
  };
  if (const auto V0 = region_V0(region)) record({"enstrophy", Mode{}, *V0 - enstrophy(u)}, *V0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Mode& k = u.modes()[i];
    if (!k.is_representative()) continue;
    const Envelope e = envelope(region, k, t);
    if (!e.constrained()) continue;
    record({"modulus", k, e.bound - norm(u[i])}, e.bound);
  }
  return m;
}

/// 64-bit FNV-1a of the coefficient bytes.
inline std::string state_digest(const SpectralField& u) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int d = 0; d < 3; ++d)
      for (double x : {u[i][d].real(), u[i][d].imag()}) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        for (int b = 0; b < 8; ++b) {
          h ^= (bits >> (8 * b)) & 0xffU;
          h *= 0x100000001b3ULL;
        }
      }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// dV/dt = 2 Re sum |k|^2 conj(u_k) . rhs_k.
inline double enstrophy_rate(const SpectralField& u, const SpectralField& r) {
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) s.add(2.0 * double(u.modes()[i].norm2()) * inner(u[i], r[i]).real());
  return s.value();
}

struct FacetEvaluation {
  std::string kind;       ///< "enstrophy" or "modulus"
  Mode k{};               ///< saturated mode for modulus facets
  double t = 0.0;
  double margin = -std::numeric_limits<double>::infinity();
  std::string digest;
};

struct Certificate {
  TrapRegion region;
  ModeSetPtr projection;
  int samples = 0;
  std::uint64_t seed = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  FacetEvaluation worst;
  std::map<std::string, double> class_worst;
  std::map<std::string, int> class_count;
  int skipped = 0;  ///< facets that are unreachable inside the region
  bool hypotheses_hold = true;
  std::vector<ConstantEstimate> constants_used;
  bool pass = false;
};

namespace detail {

/// Random direction times amplitude on one representative pair.
inline void fill_pair(SpectralField& u, std::size_t i, double amp, Rng& rng) {
  u.set_pair(u.modes()[i], amp * random_direction(u.modes()[i], rng));
}

/// Random state: constrained modes at U(0,1) times their envelope, free
/// modes at random amplitude, free part rescaled so V(u) = target when a
/// target is given. Returns false when the target is unreachable.
inline bool sample_state(const TrapRegion& region, SpectralField& u, double t, Rng& rng, std::optional<double> target,
                         int skip_index = -1) {
  const ModeSet& set = u.modes();
  CompensatedSum fixed, free_part;
  std::vector<std::size_t> free_modes;
  for (int r : set.representatives()) {
    const auto i = static_cast<std::size_t>(r);
    if (r == skip_index) {
      fixed.add(2.0 * double(set[i].norm2()) * norm2(u[i]));
      continue;
    }
    const Envelope e = envelope(region, set[i], t);
    if (e.constrained()) {
      fill_pair(u, i, e.bound * rng.uniform(), rng);
      fixed.add(2.0 * double(set[i].norm2()) * norm2(u[i]));
    } else {
      fill_pair(u, i, rng.uniform() / set[i].norm(), rng);
      free_modes.push_back(i);
      free_part.add(2.0 * double(set[i].norm2()) * norm2(u[i]));
    }
  }
  if (!target) return true;
  double have_fixed = fixed.value();
  double saturated = 0.0;
  if (skip_index >= 0) {
    const auto s = static_cast<std::size_t>(skip_index);
    saturated = 2.0 * double(set[s].norm2()) * norm2(u[s]);
  }
  const double tail = have_fixed - saturated;
  if (saturated >= *target) return false;
  if (free_modes.empty()) {
    // Only constrained modes: scale the unsaturated tail up to the target if the envelope allows.
    if (tail <= 0.0) return false;
    const double s = std::sqrt((*target - saturated) / tail);
    for (int r : set.representatives()) {
      const auto i = static_cast<std::size_t>(r);
      if (r == skip_index) continue;
      const Envelope e = envelope(region, set[i], t);
      if (norm(u[i]) * s > e.bound) return false;
    }
    for (int r : set.representatives()) {
      const auto i = static_cast<std::size_t>(r);
      if (r != skip_index) u.set_pair(set[i], s * u[i]);
    }
    return true;
  }
  if (tail > 0.5 * (*target - saturated)) {
    const double s = std::sqrt(0.5 * (*target - saturated) / tail);
    for (int r : set.representatives()) {
      const auto i = static_cast<std::size_t>(r);
      if (r != skip_index && envelope(region, set[i], t).constrained()) u.set_pair(set[i], s * u[i]);
    }
    have_fixed = saturated + 0.5 * (*target - saturated);
  }
  const double want = *target - have_fixed;
  const double s = std::sqrt(want / free_part.value());
  for (std::size_t i : free_modes) u.set_pair(set[i], s * u[i]);
  return true;
}

/// Facet state built around one triad: u_q on its envelope, enstrophy on the
/// pair (k1, q - k1) that feeds q hardest, u_q turned along that transfer.
/// Returns false when no pair fits.
inline bool triad_state(const TrapRegion& region, SpectralField& u, std::size_t qi, double t, Rng& rng,
                        std::optional<double> V0) {
  const ModeSet& set = u.modes();
  const Mode& q = set[qi];
  const double bq = envelope(region, q, t).bound;
  double budget = 0.0;
  if (V0) {
    budget = *V0 - 2.0 * double(q.norm2()) * bq * bq;
    if (budget <= 0.0) return false;
  }
  double best = 0.0;
  Mode b1, b2;
  CVec v1{}, v2{};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Mode& k1 = set[i];
    const Mode k2 = q - k1;
    if (k2.norm2() == 0 || !set.contains(k2) || k1 == k2) continue;
    if (k1 == q || k1 == -q || k2 == q || k2 == -q || k1 == -k2) continue;
    const Envelope e1 = envelope(region, k1, t), e2 = envelope(region, k2, t);
    double a1, a2;
    if (V0) {
      a1 = std::sqrt(budget / 4.0) / k1.norm();
      a2 = std::sqrt(budget / 4.0) / k2.norm();
      if (a1 > e1.bound) {
        a1 = e1.bound;
        a2 = std::sqrt(budget / 2.0 - double(k1.norm2()) * a1 * a1) / k2.norm();
      }
      if (a2 > e2.bound) {
        a2 = e2.bound;
        a1 = std::min(e1.bound, std::sqrt(budget / 2.0 - double(k2.norm2()) * a2 * a2) / k1.norm());
      }
    } else {
      if (!e1.constrained() || !e2.constrained()) continue;
      a1 = e1.bound;
      a2 = e2.bound;
    }
    const CVec w1 = a1 * random_direction(k1, rng), w2 = a2 * random_direction(k2, rng);
    const CVec n = leray_project(q, dot(w1, q) * w2 + dot(w2, q) * w1);
    if (norm(n) > best) {
      best = norm(n);
      b1 = k1;
      b2 = k2;
      v1 = w1;
      v2 = w2;
    }
  }
  if (best == 0.0) return false;
  u.set_pair(b1, v1);
  u.set_pair(b2, v2);
  const auto target = ModeSet::from_modes(set.dim(), {q, -q});
  const CVec n = nonlinear_term(u, target).at(q);
  if (norm(n) == 0.0) return false;
  u.set_pair(q, (bq / norm(n)) * n);
  return true;
}

}  // namespace detail

/// Random state strictly inside the region at time t: constrained modes at
/// U(0,1) times their envelope, enstrophy (when bounded) at U(0.1,0.9) V0.
inline SpectralField sample_interior_state(const TrapRegion& region, const ModeSetPtr& set, Rng& rng, double t = 0.0) {
  SpectralField u(set);
  std::optional<double> target;
  if (const auto V0 = region_V0(region)) target = rng.uniform(0.1, 0.9) * *V0;
  if (!detail::sample_state(region, u, t, rng, target))
    throw PreconditionError("cannot place a state with the requested enstrophy inside the region");
  return u;
}

/// Samples the region's boundary facets on a Galerkin projection and records
/// the outward derivative on each; pass iff every sampled derivative is < 0.
inline Certificate certify_inward(const TrapRegion& region, const ModeSetPtr& projection, const ForceField& f,
                                  const PhysicsParams& p, int samples, std::uint64_t seed,
                                  bool enforce_hypotheses = true) {
  bool hypotheses_hold = true;
  try {
    check_region_invariants(region);
  } catch (const ParameterError&) {
    if (enforce_hypotheses) throw;
    hypotheses_hold = false;
  }
  p.validate();
  if (projection->dim() != region_dim(region) || p.dim != region_dim(region))
    throw ParameterError("projection, physics and region dimensions differ");
  if (samples < 1) throw ParameterError("need at least one sample");

  const auto V0 = region_V0(region);
  const auto* time_region = std::get_if<TimeExpRegion>(&region);
  const double t_max = time_region ? time_region->t0 : 0.0;

  std::vector<int> constrained;  // representative indices carrying a modulus constraint (at t = 0 or t0)
  for (int r : projection->representatives()) {
    const Mode& k = (*projection)[static_cast<std::size_t>(r)];
    if (envelope(region, k, 0.0).constrained() || envelope(region, k, t_max).constrained()) constrained.push_back(r);
  }

  struct SampleResult {
    std::vector<FacetEvaluation> facets;
    int skipped = 0;
  };
  std::vector<SampleResult> results(static_cast<std::size_t>(samples));

  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    Rng rng(seed, s);
    SampleResult& out = results[s];
    double t = 0.0;
    if (time_region) t = s == 0 ? 0.0 : (s == 1 ? t_max : rng.uniform(0.0, t_max));

    if (V0) {
      SpectralField u(projection);
      if (detail::sample_state(region, u, t, rng, *V0)) {
        const auto r = rhs(u, f, p, projection);
        out.facets.push_back({"enstrophy", Mode{}, t, enstrophy_rate(u, r), state_digest(u)});
      } else {
        ++out.skipped;
      }
    }
    if (!constrained.empty()) {
      const int q = constrained[rng.index(constrained.size())];
      const auto qi = static_cast<std::size_t>(q);
      const Mode& k = (*projection)[qi];
      const Envelope e = envelope(region, k, t);
      SpectralField u(projection);
      detail::fill_pair(u, qi, e.bound, rng);
      std::optional<double> target;
      if (V0) {
        const double sat = 2.0 * double(k.norm2()) * e.bound * e.bound;
        target = sat + rng.uniform(0.05, 1.0) * std::max(0.0, *V0 - sat);
      }
      if (detail::sample_state(region, u, t, rng, target, q)) {
        const double mod = norm(u[qi]);
        if (mod == 0.0) throw DegenerateFacet("modulus facet at k=" + k.str() + " has |u_k| = 0");
        const auto r = rhs(u, f, p, projection);
        const double dmod = inner(u[qi], r[qi]).real() / mod;
        out.facets.push_back({"modulus", k, t, dmod - e.rate, state_digest(u)});
      } else {
        ++out.skipped;
      }
      const int q2 = constrained[rng.index(constrained.size())];
      const auto q2i = static_cast<std::size_t>(q2);
      const Mode& k2 = (*projection)[q2i];
      const Envelope e2 = envelope(region, k2, t);
      SpectralField w(projection);
      if (detail::triad_state(region, w, q2i, t, rng, V0)) {
        const auto r = rhs(w, f, p, projection);
        const double dmod = inner(w[q2i], r[q2i]).real() / norm(w[q2i]);
        out.facets.push_back({"modulus", k2, t, dmod - e2.rate, state_digest(w)});
      } else {
        ++out.skipped;
      }
    }
  }, 1);

  Certificate c;
  c.region = region;
  c.projection = projection;
  c.samples = samples;
  c.seed = seed;
  c.constants_used = region_constants(region);
  c.hypotheses_hold = hypotheses_hold;
  bool any = false;
  for (const auto& r : results) {
    c.skipped += r.skipped;
    for (const auto& fe : r.facets) {
      ++c.class_count[fe.kind];
      auto it = c.class_worst.find(fe.kind);
      if (it == c.class_worst.end() || fe.margin > it->second) c.class_worst[fe.kind] = fe.margin;
      if (!any || fe.margin > c.worst_margin || (fe.margin == c.worst_margin && fe.digest < c.worst.digest)) {
        c.worst_margin = fe.margin;
        c.worst = fe;
        any = true;
      }
    }
  }
  c.pass = any && c.worst_margin < 0.0;
  return c;
}

inline nlohmann::json region_to_json(const TrapRegion& region) {
  using nlohmann::json;
  auto poly = [](const PolyRegion& b) {
    return json{{"dimension", b.dim}, {"nu", b.nu},   {"V0", b.V0},         {"K", b.K},
                {"gamma", b.gamma},   {"D", b.D},     {"V_star", b.V_star}, {"C", b.C.to_json()}};
  };
  json j;
  j["kind"] = region_kind(region);
  if (const auto* b = std::get_if<PolyRegion>(&region)) j.update(poly(*b));
  if (const auto* e = std::get_if<ExpRegion>(&region)) {
    j["base"] = poly(e->base);
    j.update(json{{"D2", e->D2}, {"K_e", e->K_e}, {"a", e->a}, {"C_Q", e->C_Q.to_json()}});
  }
  if (const auto* t = std::get_if<TimeExpRegion>(&region)) {
    j["base"] = poly(t->base);
    j.update(json{{"D3", t->D3}, {"K_e", t->K_e}, {"a3", t->a3}, {"t0", t->t0}, {"C_Q", t->C_Q.to_json()}});
  }
  if (const auto* s = std::get_if<SmallData3DRegion>(&region))
    j.update(json{{"dimension", 3}, {"nu", s->nu}, {"D", s->D}, {"gamma", s->gamma}, {"D0", s->D0}, {"C_Q", s->C_Q.to_json()}});
  return j;
}

inline nlohmann::json certificate_to_json(const Certificate& c) {
  using nlohmann::json;
  json constants = json::array();
  for (const auto& k : c.constants_used) constants.push_back(k.to_json());
  json worst{{"kind", c.worst.kind}, {"time", c.worst.t}, {"margin", c.worst.margin}, {"state_digest", c.worst.digest}};
  worst["mode"] = c.worst.kind == "modulus" ? mode_to_json(c.worst.k) : json(nullptr);
  json classes = json::object();
  for (const auto& [k, v] : c.class_worst) classes[k] = {{"worst_margin", v}, {"samples", c.class_count.at(k)}};
  return json{{"region", region_to_json(c.region)},
              {"projection", {{"shape", "ball"}, {"radius", c.projection->max_norm()}, {"modes", c.projection->size()}}},
              {"samples", c.samples},
              {"seed", c.seed},
              {"worst_margin", c.worst_margin},
              {"worst_facet", worst},
              {"worst_state_digest", c.worst.digest},
              {"facet_classes", classes},
              {"skipped_unreachable_facets", c.skipped},
              {"hypotheses_hold", c.hypotheses_hold},
              {"constants_used", constants},
              {"verdict", c.pass ? "pass" : "fail"},
              {"note", "sampled boundary facets; a passing certificate is numerical evidence, not a proof"}};
}

/// Threshold tests for the compactness and log-norm conditions on W(D, gamma).
struct ConditionReport {
  int dim = 2;
  double gamma = 0.0;
  double D = 0.0;
  bool C1 = true;   ///< P_n(W) in W for ball projections
  bool C2 = false;  ///< gamma > d/2
  bool C3 = false;  ///< gamma - 2 > d/2 and gamma > d
  bool D_cond = false;  ///< gamma > d + 1
  double majorant_norm = std::numeric_limits<double>::infinity();  ///< D sqrt(C(d, 2 gamma)) with tail
  double majorant_tail = 0.0;
};

inline ConditionReport check_C_conditions(int d, double gamma, double D) {
  if (d != 2 && d != 3) throw ParameterError("dimension must be 2 or 3");
  ConditionReport r;
  r.dim = d;
  r.gamma = gamma;
  r.D = D;
  r.C2 = gamma > d / 2.0;
  r.C3 = gamma - 2.0 > d / 2.0 && gamma > double(d);
  r.D_cond = gamma > double(d) + 1.0;
  if (r.C2) {
    const auto s = power_sum(d, 2.0 * gamma, default_power_sum_radius(d));
    r.majorant_norm = D * std::sqrt(s.upper());
    r.majorant_tail = D * std::sqrt(s.upper()) - D * std::sqrt(s.value);
  }
  return r;
}

inline nlohmann::json conditions_to_json(const ConditionReport& r) {
  nlohmann::json j{{"dimension", r.dim}, {"gamma", r.gamma},   {"D", r.D},  {"C1", r.C1},
                   {"C2", r.C2},         {"C3", r.C3},         {"D_condition", r.D_cond}};
  j["majorant_norm"] = r.C2 ? nlohmann::json(r.majorant_norm) : nlohmann::json(nullptr);
  j["majorant_tail"] = r.majorant_tail;
  return j;
}

}  // namespace galtrap
