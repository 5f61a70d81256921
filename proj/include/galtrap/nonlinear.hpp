#pragma once

#include <cstddef>
#include <vector>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/mode.hpp"
#include "galtrap/parallel.hpp"

namespace galtrap {

namespace detail {

/// Dense lookup for `src` over the box [-P, P]^d with P = src.bound() + pad,
/// so that k - k1 for any |k_i| <= pad, k1 in src stays inside the table.
struct PaddedLookup {
  int dim = 2;
  int half = 0;
  std::array<std::ptrdiff_t, 3> stride{0, 0, 0};
  std::ptrdiff_t center = 0;
  std::vector<int> table;
  std::vector<std::ptrdiff_t> offset;  // linear offset of each src mode

  PaddedLookup(const ModeSet& src, int pad) : dim(src.dim()), half(src.bound() + pad) {
    const std::ptrdiff_t w = 2 * half + 1;
    std::ptrdiff_t cells = 1;
    for (int d = dim - 1; d >= 0; --d) {
      stride[d] = cells;
      cells *= w;
    }
    for (int d = 0; d < dim; ++d) center += half * stride[d];
    table.assign(static_cast<std::size_t>(cells), -1);
    offset.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      offset[i] = linear(src[i]);
      table[static_cast<std::size_t>(center + offset[i])] = static_cast<int>(i);
    }
  }

  std::ptrdiff_t linear(const Mode& m) const {
    std::ptrdiff_t s = 0;
    for (int d = 0; d < dim; ++d) s += m.c[d] * stride[d];
    return s;
  }
};

/// Raw sums s_k = sum_{k1} (a_{k1} | k) b_{k - k1} over k1 in a's set with
/// k - k1 also there, for each representative k of `target`. The conjugate
/// mode satisfies s_{-k} = -conj(s_k) when a and b are real fields.
template <int D>
std::vector<CVec> convolution_sums(const SpectralField& a, const SpectralField& b, const ModeSet& target) {
  const ModeSet& src = a.modes();
  const PaddedLookup lut(src, target.bound());
  const auto reps = target.representatives();
  std::vector<CVec> out(reps.size());
  const auto ac = a.coeffs();
  const auto bc = b.coeffs();
  const std::size_t n = src.size();
  parallel_for(reps.size(), [&](std::size_t r) {
    const Mode& k = target[static_cast<std::size_t>(reps[r])];
    const std::ptrdiff_t base = lut.center + lut.linear(k);
    double kc[3] = {double(k.c[0]), double(k.c[1]), double(k.c[2])};
    std::array<CompensatedSum, 2 * D> acc{};
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      const int j = lut.table[static_cast<std::size_t>(base - lut.offset[i1])];
      if (j < 0) continue;
      cplx s = ac[i1][0] * kc[0];
      for (int d = 1; d < D; ++d) s += ac[i1][d] * kc[d];
      const CVec& v = bc[static_cast<std::size_t>(j)];
      for (int d = 0; d < D; ++d) {
        const cplx t = s * v[d];
        acc[2 * d].add(t.real());
        acc[2 * d + 1].add(t.imag());
      }
    }
    CVec res{};
    for (int d = 0; d < D; ++d) res[d] = cplx(acc[2 * d].value(), acc[2 * d + 1].value());
    out[r] = res;
  }, 4);
  return out;
}

inline std::vector<CVec> convolution_sums(const SpectralField& a, const SpectralField& b, const ModeSet& target) {
  if (a.modeset() != b.modeset() && !(a.modes() == b.modes()))
    throw ParameterError("convolution operands must share a mode set");
  if (a.dim() != target.dim()) throw ParameterError("target dimension differs from field dimension");
  return a.dim() == 2 ? convolution_sums<2>(a, b, target) : convolution_sums<3>(a, b, target);
}

}  // namespace detail

/// Galerkin-truncated bilinear term B(a, b)_k = -i sum (a_{k1} | k) P_k b_{k-k1}.
inline SpectralField bilinear_term(const SpectralField& a, const SpectralField& b, const ModeSetPtr& target) {
  SpectralField out(target);
  if (target->empty()) return out;
  const auto sums = detail::convolution_sums(a, b, *target);
  const auto reps = target->representatives();
  const cplx minus_i(0.0, -1.0);
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto t = static_cast<std::size_t>(reps[r]);
    const CVec v = minus_i * leray_project((*target)[t], sums[r]);
    out[t] = v;
    out[static_cast<std::size_t>(target->conj_index(t))] = conj(v);
  }
  return out;
}

/// N(u)_k = -i sum_{k1} (u_{k1} | k) P_k u_{k-k1} for k in target.
inline SpectralField nonlinear_term(const SpectralField& u, const ModeSetPtr& target) {
  return bilinear_term(u, u, target);
}

/// Galerkin vector field: N(u)_k - nu |k|^2 u_k + P_k f_k on `target`.
inline SpectralField rhs(const SpectralField& u, const ForceField& f, const PhysicsParams& p, const ModeSetPtr& target) {
  p.validate();
  if (u.dim() != p.dim || target->dim() != p.dim) throw ParameterError("dimension mismatch in rhs");
  SpectralField out = nonlinear_term(u, target);
  const bool same = u.modeset() == target || u.modes() == *target;
  for (std::size_t i = 0; i < target->size(); ++i) {
    const Mode& k = (*target)[i];
    const CVec uk = same ? u[i] : u.at(k);
    out[i] = out[i] - (p.nu * double(k.norm2())) * uk + f.projected(k);
  }
  return out;
}

/// Scalar pressure coefficients p_k on u's mode set.
struct PressureField {
  ModeSetPtr modes;
  std::vector<cplx> p;

  cplx at(const Mode& k) const {
    const int i = modes->index_of(k);
    return i < 0 ? cplx{} : p[static_cast<std::size_t>(i)];
  }
};

/// Solves i p_k k = -i sum (u_{k1}|k)(I - P_k) u_{k-k1} + (I - P_k) f_k by
/// dotting with k / |k|^2. Throws ConsistencyError when the right side is
/// not parallel to k.
inline PressureField pressure_coefficients(const SpectralField& u, const ForceField& f) {
  const ModeSetPtr& set = u.modeset();
  PressureField out{set, std::vector<cplx>(set->size())};
  if (set->empty()) return out;
  const auto sums = detail::convolution_sums(u, u, *set);
  const auto reps = set->representatives();
  const cplx minus_i(0.0, -1.0), i_unit(0.0, 1.0);
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto t = static_cast<std::size_t>(reps[r]);
    const Mode& k = (*set)[t];
    const CVec fk = f.coeffs().modeset() ? f.coeffs().at(k) : CVec{};
    const CVec rhs_vec = minus_i * (sums[r] - leray_project(k, sums[r])) + (fk - leray_project(k, fk));
    const double k2 = double(k.norm2());
    const cplx along = dot(rhs_vec, k) / k2;
    CVec residual = rhs_vec;
    for (int d = 0; d < k.dim; ++d) residual[d] -= along * double(k.c[d]);
    if (norm(residual) > 1e-9 * (1.0 + norm(rhs_vec)))
      throw ConsistencyError("pressure equation at k=" + k.str() + " has a right side not parallel to k");
    const cplx pk = along / i_unit;
    out.p[t] = pk;
    out.p[static_cast<std::size_t>(set->conj_index(t))] = std::conj(pk);
  }
  return out;
}

}  // namespace galtrap
