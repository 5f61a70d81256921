#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>

#include "galtrap/field.hpp"
#include "galtrap/mode.hpp"

namespace galtrap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counted splittable generator: stream i of seed s is independent of how
/// many other streams were drawn, so partitioned sampling is reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  Rng split(std::uint64_t stream) { return Rng(engine_(), stream); }

  /// Uniform on [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; spare value discarded so the stream stays position-independent.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * double(n)) % n; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Unit-modulus complex vector orthogonal to k, uniformly distributed.
inline CVec random_direction(const Mode& k, Rng& rng) {
  const PerpBasis b = perp_basis(k);
  std::array<cplx, 2> c{};
  double n2 = 0.0;
  while (n2 < 1e-20) {
    n2 = 0.0;
    for (int j = 0; j < b.count; ++j) {
      c[j] = cplx(rng.normal(), rng.normal());
      n2 += std::norm(c[j]);
    }
  }
  const double inv = 1.0 / std::sqrt(n2);
  CVec v{};
  for (int j = 0; j < b.count; ++j)
    for (int d = 0; d < 3; ++d) v[d] += (c[j] * inv) * b.e[j][d];
  return v;
}

/// Modulus envelope D / |k|^gamma.
struct PowerEnvelope {
  double D = 1.0;
  double gamma = 4.0;
  double operator()(const Mode& k) const { return D / std::pow(k.norm(), gamma); }
};

enum class AmplitudeProfile {
  saturate,  ///< |u_k| equal to the envelope
  uniform,   ///< |u_k| = U(0,1) * envelope
  mixed,     ///< per-field coin flip between the two
};

/// Admissible random field with |u_k| <= envelope(k) and random phases.
inline SpectralField random_field(const ModeSetPtr& set, const std::function<double(const Mode&)>& envelope, Rng& rng,
                                  AmplitudeProfile profile = AmplitudeProfile::uniform) {
  SpectralField u(set);
  bool saturate = profile == AmplitudeProfile::saturate;
  if (profile == AmplitudeProfile::mixed) saturate = rng.uniform() < 0.5;
  for (int r : set->representatives()) {
    const Mode& k = (*set)[static_cast<std::size_t>(r)];
    const double amp = envelope(k) * (saturate ? 1.0 : rng.uniform());
    u.set_pair(k, amp * random_direction(k, rng));
  }
  return u;
}

inline SpectralField random_field(const ModeSetPtr& set, const PowerEnvelope& env, Rng& rng,
                                  AmplitudeProfile profile = AmplitudeProfile::uniform) {
  return random_field(set, std::function<double(const Mode&)>(env), rng, profile);
}

}  // namespace galtrap
