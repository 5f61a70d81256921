#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/mode.hpp"

namespace galtrap {

/// Smallest per-axis resolution for which the quadratic product of fields on
/// `source` has no aliasing onto modes of `target`.
inline int alias_free_resolution(const ModeSet& source, const ModeSet& target) {
  return 2 * source.bound() + target.bound() + 1;
}

/// Uniform M^d grid on the torus [0, 2pi)^d with direct (non-FFT) transforms.
class PhysicalGrid {
 public:
  PhysicalGrid(int dim, int resolution, int max_wavenumber) : dim_(dim), m_(resolution), kmax_(max_wavenumber) {
    if (dim != 2 && dim != 3) throw ParameterError("grid dimension must be 2 or 3");
    if (resolution < 1) throw ParameterError("grid resolution must be positive");
    const int w = 2 * kmax_ + 1;
    phase_.resize(static_cast<std::size_t>(m_ * w));
    for (int x = 0; x < m_; ++x)
      for (int k = -kmax_; k <= kmax_; ++k) {
        // Reduce k*x mod M before scaling to keep the angle accurate.
        const long r = ((long(k) * x) % m_ + m_) % m_;
        const double ang = 2.0 * std::numbers::pi * double(r) / double(m_);
        phase_[static_cast<std::size_t>(x * w + (k + kmax_))] = std::polar(1.0, ang);
      }
    points_ = 1;
    for (int d = 0; d < dim_; ++d) points_ *= static_cast<std::size_t>(m_);
  }

  int dim() const { return dim_; }
  int resolution() const { return m_; }
  std::size_t points() const { return points_; }

  /// e^{i k.x} at grid point `p`.
  cplx wave(const Mode& k, std::size_t p) const {
    cplx r(1.0, 0.0);
    const int w = 2 * kmax_ + 1;
    for (int d = dim_ - 1; d >= 0; --d) {
      const int x = static_cast<int>(p % static_cast<std::size_t>(m_));
      p /= static_cast<std::size_t>(m_);
      r *= phase_[static_cast<std::size_t>(x * w + (k.c[d] + kmax_))];
    }
    return r;
  }

  /// Velocity u(x) and gradient du_i/dx_l at every grid point.
  struct Sample {
    std::vector<CVec> u;
    std::vector<std::array<CVec, 3>> grad;  // grad[p][l][i] = d u_i / d x_l
  };

  Sample synthesize(const SpectralField& f) const {
    Sample s{std::vector<CVec>(points_), std::vector<std::array<CVec, 3>>(points_)};
    for (std::size_t p = 0; p < points_; ++p) {
      CompensatedVec uv;
      std::array<CompensatedVec, 3> gv;
      for (std::size_t j = 0; j < f.size(); ++j) {
        const Mode& k = f.modes()[j];
        const CVec term = wave(k, p) * f[j];
        uv.add(term);
        for (int l = 0; l < dim_; ++l) gv[l].add(cplx(0.0, double(k.c[l])) * term);
      }
      s.u[p] = uv.value();
      for (int l = 0; l < dim_; ++l) s.grad[p][l] = gv[l].value();
    }
    return s;
  }

  /// Fourier coefficient M^{-d} sum_x w(x) e^{-i k.x}.
  CVec coefficient(const std::vector<CVec>& values, const Mode& k) const {
    CompensatedVec acc;
    for (std::size_t p = 0; p < points_; ++p) acc.add(std::conj(wave(k, p)) * values[p]);
    return (1.0 / double(points_)) * acc.value();
  }

 private:
  int dim_;
  int m_;
  int kmax_;
  std::size_t points_ = 1;
  std::vector<cplx> phase_;
};

/// (u . grad) u evaluated pointwise on `grid`.
inline std::vector<CVec> advection_on_grid(const PhysicalGrid& grid, const SpectralField& u) {
  const auto s = grid.synthesize(u);
  std::vector<CVec> w(grid.points());
  for (std::size_t p = 0; p < grid.points(); ++p) {
    CVec acc{};
    for (int l = 0; l < grid.dim(); ++l) acc = acc + s.u[p][l] * s.grad[p][l];
    w[p] = acc;
  }
  return w;
}

/// Independent route to the nonlinear term: form (u . grad) u on a physical
/// grid, transform back and apply -P_k. `resolution` 0 selects the minimal
/// alias-free grid.
inline SpectralField nonlinear_term_grid(const SpectralField& u, const ModeSetPtr& target, int resolution = 0) {
  const int need = alias_free_resolution(u.modes(), *target);
  if (resolution == 0) resolution = need;
  if (resolution < need)
    throw ResolutionError("grid resolution " + std::to_string(resolution) + " aliases; need at least " +
                          std::to_string(need));
  SpectralField out(target);
  if (target->empty()) return out;
  const PhysicalGrid grid(u.dim(), resolution, std::max(u.modes().bound(), target->bound()));
  const auto w = advection_on_grid(grid, u);
  for (std::size_t i = 0; i < target->size(); ++i) {
    const Mode& k = (*target)[i];
    out[i] = -1.0 * leray_project(k, grid.coefficient(w, k));
  }
  return out;
}

}  // namespace galtrap
