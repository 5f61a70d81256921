#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/mode.hpp"
#include "galtrap/nonlinear.hpp"
#include "galtrap/parallel.hpp"
#include "galtrap/random.hpp"

namespace galtrap {

enum class ConstantName { C_Q, C_estmLin, C_dgamma, A };

inline std::string to_string(ConstantName n) {
  switch (n) {
    case ConstantName::C_Q: return "C_Q";
    case ConstantName::C_estmLin: return "C_estmLin";
    case ConstantName::C_dgamma: return "C_dgamma";
    case ConstantName::A: return "A";
  }
  return "?";
}

inline ConstantName constant_name_from_string(const std::string& s) {
  if (s == "C_Q") return ConstantName::C_Q;
  if (s == "C_estmLin") return ConstantName::C_estmLin;
  if (s == "C_dgamma") return ConstantName::C_dgamma;
  if (s == "A") return ConstantName::A;
  throw ParameterError("unknown constant name '" + s + "'");
}

/// A numerically estimated constant. `reported()` = value + tail_bound is the
/// number downstream code uses.
struct ConstantEstimate {
  ConstantName name = ConstantName::C_Q;
  int dim = 2;
  double gamma = 0.0;
  std::optional<double> epsilon;
  double value = 0.0;
  int truncation_radius = 0;
  double tail_bound = 0.0;
  Mode mode_of_supremum{};
  std::string note;

  double reported() const { return value + tail_bound; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", to_string(name)},
                     {"dimension", dim},
                     {"gamma", gamma},
                     {"value", value},
                     {"truncation_radius", truncation_radius},
                     {"tail_bound", tail_bound},
                     {"reported", reported()},
                     {"note", note}};
    j["epsilon"] = epsilon ? nlohmann::json(*epsilon) : nlohmann::json(nullptr);
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < mode_of_supremum.dim; ++i) m.push_back(mode_of_supremum.c[i]);
    j["mode_of_supremum"] = m;
    return j;
  }

  static ConstantEstimate from_json(const nlohmann::json& j) {
    ConstantEstimate c;
    c.name = constant_name_from_string(j.at("name").get<std::string>());
    c.dim = j.at("dimension").get<int>();
    c.gamma = j.at("gamma").get<double>();
    if (j.contains("epsilon") && !j.at("epsilon").is_null()) c.epsilon = j.at("epsilon").get<double>();
    c.value = j.at("value").get<double>();
    c.truncation_radius = j.value("truncation_radius", 0);
    c.tail_bound = j.value("tail_bound", 0.0);
    c.note = j.value("note", std::string{});
    if (j.contains("mode_of_supremum")) {
      std::vector<int> m = j.at("mode_of_supremum").get<std::vector<int>>();
      if (static_cast<int>(m.size()) == c.dim) c.mode_of_supremum = Mode::of(c.dim, m);
    }
    return c;
  }
};

/// Surface area of the unit sphere in R^d.
inline double sphere_area(int d) { return d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

/// Upper bound on sum_{k in Z^d, |k| > R} |k|^{-p} for p > d, by comparing
/// each lattice point with its unit cell: omega_d rho^{d-1} (R-2c)^{d-p}/(p-d),
/// c = sqrt(d)/2, rho = (R-c)/(R-2c).
inline double lattice_tail_bound(int d, double p, double R) {
  if (!(p > double(d))) throw HypothesisError("lattice tail diverges unless exponent exceeds dimension");
  const double c = std::sqrt(double(d)) / 2.0;
  if (!(R > 2.0 * c)) throw ParameterError("truncation radius too small for the tail bound");
  const double rho = (R - c) / (R - 2.0 * c);
  return sphere_area(d) * std::pow(rho, d - 1) * std::pow(R - 2.0 * c, double(d) - p) / (p - double(d));
}

namespace detail {

inline std::int64_t isqrt(std::int64_t n) {
  if (n <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(double(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Number of lattice points with |k|^2 = n for n <= R^2.
inline std::vector<std::int64_t> norm_histogram(int d, int R) {
  const std::int64_t r2 = std::int64_t(R) * R;
  std::vector<std::int64_t> h(static_cast<std::size_t>(r2 + 1), 0);
  for (std::int64_t x = -R; x <= R; ++x) {
    const std::int64_t rx = r2 - x * x;
    const std::int64_t ym = isqrt(rx);
    for (std::int64_t y = -ym; y <= ym; ++y) {
      if (d == 2) {
        ++h[static_cast<std::size_t>(x * x + y * y)];
        continue;
      }
      const std::int64_t ry = rx - y * y;
      const std::int64_t zm = isqrt(ry);
      for (std::int64_t z = -zm; z <= zm; ++z) ++h[static_cast<std::size_t>(x * x + y * y + z * z)];
    }
  }
  return h;
}

}  // namespace detail

struct TruncatedSum {
  double value = 0.0;
  double tail = 0.0;
  double upper() const { return value + tail; }
};

/// sum_{0 < |k| <= R} |k|^{-p} over Z^d with its integral tail bound.
inline TruncatedSum power_sum(int d, double p, int R) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, TruncatedSum> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({d, p, R}); it != cache.end()) return it->second;
  }
  const auto h = detail::norm_histogram(d, R);
  CompensatedSum s;
  for (std::size_t n = 1; n < h.size(); ++n)
    if (h[n]) s.add(double(h[n]) * std::pow(double(n), -p / 2.0));
  TruncatedSum out{s.value(), lattice_tail_bound(d, p, double(R))};
  std::lock_guard lock(mu);
  cache[{d, p, R}] = out;
  return out;
}

inline int default_power_sum_radius(int d) { return d == 2 ? 600 : 150; }

/// C(d, gamma) = sum_{k != 0} |k|^{-gamma}, truncated with tail bound.
inline ConstantEstimate lattice_constant(int d, double gamma, int radius = 0) {
  if (!(gamma > double(d))) throw HypothesisError("C(d,gamma) needs gamma > d");
  if (radius <= 0) radius = default_power_sum_radius(d);
  const auto s = power_sum(d, gamma, radius);
  ConstantEstimate c;
  c.name = ConstantName::C_dgamma;
  c.dim = d;
  c.gamma = gamma;
  c.value = s.value;
  c.tail_bound = s.tail;
  c.truncation_radius = radius;
  c.mode_of_supremum = d == 2 ? Mode(1, 0) : Mode(1, 0, 0);
  c.note = "truncated lattice sum plus integral tail bound";
  return c;
}

namespace detail {

template <int D>
double convolution_sum_kernel(const Mode& k, double gamma, std::int64_t R) {
  const std::int64_t kx = k.c[0], ky = k.c[1], kz = D == 3 ? k.c[2] : 0;
  const double kn = k.norm();
  const auto nmax = static_cast<std::int64_t>(std::ceil((double(R) + kn) * (double(R) + kn))) + 4;
  std::vector<double> inv(static_cast<std::size_t>(nmax + 1));
  inv[0] = 0.0;  // excluded points k1 = 0 and k1 = k contribute nothing
  for (std::int64_t n = 1; n <= nmax; ++n) inv[static_cast<std::size_t>(n)] = std::pow(double(n), -gamma / 2.0);
  const std::int64_t r2 = R * R;
  CompensatedSum total;
  for (std::int64_t x = -R; x <= R; ++x) {
    const std::int64_t rx = r2 - x * x;
    const std::int64_t ym = isqrt(rx);
    const std::int64_t dx2 = (kx - x) * (kx - x);
    for (std::int64_t y = -ym; y <= ym; ++y) {
      const std::int64_t dy2 = (ky - y) * (ky - y);
      if constexpr (D == 2) {
        const auto n1 = static_cast<std::size_t>(x * x + y * y);
        const auto n2 = static_cast<std::size_t>(dx2 + dy2);
        total.add(inv[n1] * inv[n2]);
      } else {
        const std::int64_t zm = isqrt(rx - y * y);
        const std::int64_t a1 = x * x + y * y, a2 = dx2 + dy2;
        double row = 0.0;
        for (std::int64_t z = -zm; z <= zm; ++z) {
          const std::int64_t dz = kz - z;
          row += inv[static_cast<std::size_t>(a1 + z * z)] * inv[static_cast<std::size_t>(a2 + dz * dz)];
        }
        total.add(row);
      }
    }
  }
  return total.value();
}

}  // namespace detail

/// S(k) = sum_{k1 != 0, k} |k1|^{-gamma} |k - k1|^{-gamma}, truncated to
/// |k1| <= radius. The tail uses |k - k1| >= |k1| (1 - |k|/R) beyond R.
inline TruncatedSum convolution_lattice_sum(const Mode& k, double gamma, int d, int radius) {
  if (!(gamma > double(d))) throw HypothesisError("convolution lattice sum diverges unless gamma > d");
  if (k.dim != d) throw ParameterError("mode dimension differs from d");
  if (k.is_zero()) throw ParameterError("k must be nonzero");
  const double kn = k.norm();
  if (double(radius) < 2.0 * kn) throw PreconditionError("truncation radius must be at least 2|k|");
  const double value = d == 2 ? detail::convolution_sum_kernel<2>(k, gamma, radius)
                              : detail::convolution_sum_kernel<3>(k, gamma, radius);
  const double shrink = std::pow(1.0 - kn / double(radius), -gamma);
  return {value, shrink * lattice_tail_bound(d, 2.0 * gamma, double(radius))};
}

/// One scanned mode of the C_Q search (canonical orbit representative).
struct CQScanEntry {
  Mode k;
  int radius = 0;
  double scaled_value = 0.0;  ///< |k|^gamma S(k)
  double scaled_tail = 0.0;   ///< |k|^gamma * tail
};

struct CQScan {
  ConstantEstimate estimate;
  std::vector<CQScanEntry> entries;
};

namespace detail {
inline std::string format_k_max(double k) {
  std::ostringstream os;
  os << k;
  return os.str();
}
}  // namespace detail

/// Canonical representatives of signed-permutation orbits: k_1 >= ... >= k_d >= 0.
inline std::vector<Mode> canonical_modes(int d, double k_max) {
  std::vector<Mode> out;
  const int b = static_cast<int>(std::floor(k_max + 1e-9));
  const auto r2 = static_cast<std::int64_t>(std::floor(k_max * k_max + 1e-9));
  for (int x = 0; x <= b; ++x)
    for (int y = 0; y <= x; ++y) {
      if (d == 2) {
        Mode m(x, y);
        if (!m.is_zero() && m.norm2() <= r2) out.push_back(m);
        continue;
      }
      for (int z = 0; z <= y; ++z) {
        Mode m(x, y, z);
        if (!m.is_zero() && m.norm2() <= r2) out.push_back(m);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

/// Scans |k|^gamma (S(k) + tail) over 0 < |k| <= k_max. Each mode uses
/// truncation radius max(radius, ceil(2|k|)). S is invariant under signed
/// permutations, so only canonical representatives are evaluated.
inline CQScan scan_CQ(int d, double gamma, double k_max, int radius) {
  if (!(gamma > double(d))) throw HypothesisError("C_Q(d,gamma) requires gamma > d");
  if (k_max < 1.0) throw ParameterError("k_max must be at least 1");
  const auto modes = canonical_modes(d, k_max);
  CQScan scan;
  scan.entries.resize(modes.size());
  parallel_for(modes.size(), [&](std::size_t i) {
    const Mode& k = modes[i];
    const int r = std::max(radius, static_cast<int>(std::ceil(2.0 * k.norm() - 1e-12)));
    const auto s = convolution_lattice_sum(k, gamma, d, r);
    const double scale = std::pow(k.norm(), gamma);
    scan.entries[i] = {k, r, scale * s.value, scale * s.tail};
  }, 1);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.entries.size(); ++i)
    if (scan.entries[i].scaled_value + scan.entries[i].scaled_tail >
        scan.entries[best].scaled_value + scan.entries[best].scaled_tail)
      best = i;
  auto& e = scan.estimate;
  e.name = ConstantName::C_Q;
  e.dim = d;
  e.gamma = gamma;
  e.value = scan.entries[best].scaled_value;
  e.tail_bound = scan.entries[best].scaled_tail;
  e.truncation_radius = radius;
  e.mode_of_supremum = scan.entries[best].k;
  e.note = "empirical sup over 0<|k|<=" + detail::format_k_max(k_max) +
           "; larger |k| are not covered by this scan";
  return scan;
}

inline ConstantEstimate estimate_CQ(int d, double gamma, double k_max, int radius) {
  return scan_CQ(d, gamma, k_max, radius).estimate;
}

/// Condition-D log-norm bound
/// l = max_{0<|k|<=k_max} (D C(d,gamma) + 2 D C(d,gamma-1)) |k| - nu |k|^2.
struct ConditionDBound {
  double l = 0.0;
  double at_norm = 0.0;   ///< |k| attaining the max
  double vertex = 0.0;    ///< unconstrained maximiser of the parabola
  double slope = 0.0;     ///< D C(d,gamma) + 2 D C(d,gamma-1)
  ConstantEstimate c_gamma;
  ConstantEstimate c_gamma_minus_1;
  bool scan_exhaustive = false;  ///< true when the vertex lies below k_max
};

inline ConditionDBound estimate_conditionD_bound(double D, double gamma, int d, double nu, double k_max) {
  if (!(gamma > double(d) + 1.0)) throw HypothesisError("condition D needs gamma > d + 1");
  if (!(nu > 0.0)) throw ParameterError("viscosity must be positive");
  if (!(D >= 0.0)) throw ParameterError("D must be nonnegative");
  ConditionDBound b;
  b.c_gamma = lattice_constant(d, gamma);
  b.c_gamma_minus_1 = lattice_constant(d, gamma - 1.0);
  b.slope = D * b.c_gamma.reported() + 2.0 * D * b.c_gamma_minus_1.reported();
  b.vertex = b.slope / (2.0 * nu);
  const auto r2 = static_cast<std::int64_t>(std::floor(k_max * k_max + 1e-9));
  // Squared norms that occur in Z^d.
  std::vector<char> present(static_cast<std::size_t>(r2 + 1), 0);
  for (const auto& m : canonical_modes(d, k_max)) present[static_cast<std::size_t>(m.norm2())] = 1;
  b.l = -std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= r2; ++n) {
    if (!present[static_cast<std::size_t>(n)]) continue;
    const double kn = std::sqrt(double(n));
    const double v = b.slope * kn - nu * double(n);
    if (v > b.l) {
      b.l = v;
      b.at_norm = kn;
    }
  }
  b.scan_exhaustive = b.vertex < k_max;
  return b;
}

/// Per-mode breakdown of the nonlinear-term bound.
struct EstmLinEntry {
  Mode k;
  double nonlinear_norm = 0.0;           ///< |N(u)_k|
  double ratio = 0.0;                    ///< |N_k| |k|^exponent / (sqrt(V0) D)
  std::array<double, 3> case_sum{};      ///< |P_k sum over the case|
  std::array<double, 3> case_abs{};      ///< sum |u_{k1}| |k - k1| |u_{k-k1}| over the case
  std::array<double, 3> case_bound{};    ///< proof-stage bound for the case
};

struct EstmLinReport {
  double exponent = 0.0;
  double max_ratio = 0.0;
  Mode argmax{};
  std::vector<EstmLinEntry> entries;
};

/// Lattice sums used by the three case bounds; depend on |k|^2 only.
struct EstmLinCaseSums {
  double inv_sq_inner = 0.0;  ///< sum_{0 < |k1| <= |k|/2} |k1|^{-2}
  double annulus_count = 0.0; ///< #{k1 : |k|/2 < |k1| <= 2|k|}
  double outer_tail = 0.0;    ///< sum_{|k1| > 2|k|} |k1|^{2 - 2 gamma} (upper bound)
};

inline EstmLinCaseSums estmLin_case_sums(int d, double gamma, std::int64_t n) {
  EstmLinCaseSums s;
  const double kn = std::sqrt(double(n));
  const int b = static_cast<int>(std::ceil(2.0 * kn)) + 1;
  const auto full = power_sum(d, 2.0 * gamma - 2.0, default_power_sum_radius(d));
  CompensatedSum inner, near;
  const auto ball = ModeSet::ball(d, double(b));
  for (const auto& m : *ball) {
    const std::int64_t m2 = m.norm2();
    if (4 * m2 <= n) inner.add(1.0 / double(m2));
    else if (m2 <= 4 * n) s.annulus_count += 1.0;
    if (m2 <= 4 * n) near.add(std::pow(double(m2), 1.0 - gamma));
  }
  s.inv_sq_inner = inner.value();
  s.outer_tail = std::max(0.0, full.upper() - near.value());
  return s;
}

/// Checks |sum_{k1} (u_{k1}|k) P_k u_{k-k1}| against C sqrt(V0) D / |k|^{gamma - d/2 (- eps)}
/// on every representative mode of u, splitting the sum into
/// I: |k1| <= |k|/2, II: |k|/2 < |k1| <= 2|k|, III: |k1| > 2|k| (ties go to the lower case).
inline EstmLinReport estmLin_bound_check(const SpectralField& u, double V0, double D, double gamma,
                                         double epsilon = 0.5) {
  const int d = u.dim();
  if (!(gamma > 1.0 + d / 2.0)) throw HypothesisError("the nonlinear bound needs gamma > 1 + d/2");
  if (!(D > 0.0) || !(V0 > 0.0)) throw ParameterError("D and V0 must be positive");
  const ModeSet& set = u.modes();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double env = D / std::pow(set[i].norm(), gamma);
    if (norm(u[i]) > env * (1.0 + 1e-12))
      throw PreconditionError("field leaves W(D,gamma) at k=" + set[i].str());
  }
  if (enstrophy(u) > V0 * (1.0 + 1e-12)) throw PreconditionError("field enstrophy exceeds V0");

  EstmLinReport rep;
  rep.exponent = d == 2 ? gamma - d / 2.0 - epsilon : gamma - d / 2.0;
  const auto reps = set.representatives();
  rep.entries.resize(reps.size());
  std::map<std::int64_t, EstmLinCaseSums> sums;
  for (int r : reps) {
    const auto n = set[static_cast<std::size_t>(r)].norm2();
    if (!sums.count(n)) sums[n] = estmLin_case_sums(d, gamma, n);
  }
  const double sv0 = std::sqrt(V0);
  parallel_for(reps.size(), [&](std::size_t ri) {
    const auto t = static_cast<std::size_t>(reps[ri]);
    const Mode& k = set[t];
    const std::int64_t n = k.norm2();
    std::array<CompensatedVec, 3> part;
    std::array<CompensatedSum, 3> abs_part;
    for (std::size_t i1 = 0; i1 < set.size(); ++i1) {
      const Mode& k1 = set[i1];
      const int j = set.index_of(k - k1);
      if (j < 0) continue;
      const std::int64_t m2 = k1.norm2();
      const int c = 4 * m2 <= n ? 0 : (m2 <= 4 * n ? 1 : 2);
      const CVec& v = u[static_cast<std::size_t>(j)];
      part[c].add(dot(u[i1], k) * v);
      abs_part[c].add(norm(u[i1]) * (k - k1).norm() * norm(v));
    }
    EstmLinEntry e;
    e.k = k;
    CVec total{};
    for (int c = 0; c < 3; ++c) {
      const CVec pc = leray_project(k, part[c].value());
      e.case_sum[c] = norm(pc);
      e.case_abs[c] = abs_part[c].value();
      total = total + pc;
    }
    e.nonlinear_norm = norm(total);
    e.ratio = e.nonlinear_norm * std::pow(k.norm(), rep.exponent) / (sv0 * D);
    const auto& s = sums.at(n);
    const double kn = k.norm();
    e.case_bound[0] = std::pow(2.0, gamma - 1.0) * D * std::pow(kn, 1.0 - gamma) * sv0 * std::sqrt(s.inv_sq_inner);
    e.case_bound[1] = std::pow(2.0, gamma) * D * std::pow(kn, -gamma) * sv0 * std::sqrt(s.annulus_count);
    e.case_bound[2] = sv0 * D / kn * std::sqrt(s.outer_tail);
    rep.entries[ri] = e;
  }, 4);
  for (const auto& e : rep.entries)
    if (e.ratio > rep.max_ratio) {
      rep.max_ratio = e.ratio;
      rep.argmax = e.k;
    }
  return rep;
}

/// Monte Carlo estimate of the nonlinear-bound constant: max ratio over
/// random fields in W(D, gamma) on the ball of `radius`, with V0 = V(u).
inline ConstantEstimate estimate_estmLin_constant(int d, double gamma, double epsilon, int radius, int samples,
                                                  std::uint64_t seed, double D = 1.0) {
  if (samples < 1) throw ParameterError("need at least one sample");
  const auto set = ModeSet::ball(d, double(radius));
  const PowerEnvelope env{D, gamma};
  std::vector<EstmLinReport> reports(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed, static_cast<std::uint64_t>(s));
    const auto u = random_field(set, env, rng, AmplitudeProfile::mixed);
    const double v = enstrophy(u);
    if (v <= 0.0) continue;
    reports[static_cast<std::size_t>(s)] = estmLin_bound_check(u, v, D, gamma, epsilon);
  }
  ConstantEstimate c;
  c.name = ConstantName::C_estmLin;
  c.dim = d;
  c.gamma = gamma;
  if (d == 2) c.epsilon = epsilon;
  c.truncation_radius = radius;
  c.tail_bound = 0.0;
  for (const auto& r : reports)
    if (r.max_ratio > c.value) {
      c.value = r.max_ratio;
      c.mode_of_supremum = r.argmax;
    }
  c.note = "Monte Carlo sup over " + std::to_string(samples) + " random fields in W(D,gamma), seed " +
           std::to_string(seed) + "; empirical, not a proven bound";
  return c;
}

}  // namespace galtrap
