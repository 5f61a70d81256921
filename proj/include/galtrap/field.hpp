#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "galtrap/errors.hpp"
#include "galtrap/mode.hpp"

namespace galtrap {

using cplx = std::complex<double>;

/// Complex d-vector; the third slot is unused (and kept at 0) for d = 2.
using CVec = std::array<cplx, 3>;

inline constexpr double kInvariantTol = 1e-12;

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Compensated accumulator for a complex d-vector.
struct CompensatedVec {
  std::array<CompensatedSum, 6> parts{};

  void add(const CVec& v) {
    for (int i = 0; i < 3; ++i) {
      parts[2 * i].add(v[i].real());
      parts[2 * i + 1].add(v[i].imag());
    }
  }
  CVec value() const {
    CVec r;
    for (int i = 0; i < 3; ++i) r[i] = cplx(parts[2 * i].value(), parts[2 * i + 1].value());
    return r;
  }
};

/// Bilinear (unconjugated) product (v | k).
inline cplx dot(const CVec& v, const Mode& k) {
  return v[0] * double(k.c[0]) + v[1] * double(k.c[1]) + v[2] * double(k.c[2]);
}

inline double norm2(const CVec& v) { return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]); }
inline double norm(const CVec& v) { return std::sqrt(norm2(v)); }

inline CVec conj(const CVec& v) { return {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])}; }

inline CVec operator+(const CVec& a, const CVec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline CVec operator-(const CVec& a, const CVec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline CVec operator*(cplx s, const CVec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline CVec operator*(double s, const CVec& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Hermitian inner product sum_i conj(a_i) b_i.
inline cplx inner(const CVec& a, const CVec& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

/// Orthogonal projection onto the hyperplane perpendicular to k: v - ((v.k)/|k|^2) k.
inline CVec leray_project(const Mode& k, const CVec& v) {
  const cplx s = dot(v, k) / double(k.norm2());
  CVec r = v;
  for (int i = 0; i < k.dim; ++i) r[i] -= s * double(k.c[i]);
  return r;
}

/// Real orthonormal basis of the plane perpendicular to k (d-1 vectors).
struct PerpBasis {
  int count = 1;
  std::array<std::array<double, 3>, 2> e{};
};

inline PerpBasis perp_basis(const Mode& k) {
  PerpBasis b;
  const double n = k.norm();
  if (k.dim == 2) {
    b.count = 1;
    b.e[0] = {-k.c[1] / n, k.c[0] / n, 0.0};
    return b;
  }
  b.count = 2;
  const std::array<double, 3> kh{k.c[0] / n, k.c[1] / n, k.c[2] / n};
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(k.c[i]) < std::abs(k.c[axis])) axis = i;
  std::array<double, 3> a{0.0, 0.0, 0.0};
  a[axis] = 1.0;
  auto cross = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
    return std::array<double, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
  };
  auto e1 = cross(kh, a);
  const double l1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (auto& x : e1) x /= l1;
  b.e[0] = e1;
  b.e[1] = cross(kh, e1);
  return b;
}

inline cplx component(const CVec& v, const std::array<double, 3>& e) { return v[0] * e[0] + v[1] * e[1] + v[2] * e[2]; }

/// Velocity coefficients u_k on a symmetric mode set.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(ModeSetPtr set) : set_(std::move(set)), coeffs_(set_ ? set_->size() : 0) {}
  SpectralField(ModeSetPtr set, std::vector<CVec> coeffs) : set_(std::move(set)), coeffs_(std::move(coeffs)) {
    if (!set_ || coeffs_.size() != set_->size()) throw ParameterError("coefficient count does not match mode set");
  }

  static SpectralField zero(ModeSetPtr set) { return SpectralField(std::move(set)); }

  const ModeSet& modes() const { return *set_; }
  const ModeSetPtr& modeset() const { return set_; }
  int dim() const { return set_->dim(); }
  std::size_t size() const { return coeffs_.size(); }

  CVec& operator[](std::size_t i) { return coeffs_[i]; }
  const CVec& operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<const CVec> coeffs() const { return coeffs_; }
  std::span<CVec> coeffs() { return coeffs_; }

  /// u_k, or the zero vector when k is not stored.
  CVec at(const Mode& k) const {
    const int i = set_->index_of(k);
    return i < 0 ? CVec{} : coeffs_[static_cast<std::size_t>(i)];
  }

  /// Sets u_k and u_{-k} = conj(u_k).
  void set_pair(const Mode& k, const CVec& v) {
    const int i = set_->index_of(k);
    if (i < 0) throw ParameterError("mode " + k.str() + " not in field mode set");
    coeffs_[static_cast<std::size_t>(i)] = v;
    coeffs_[static_cast<std::size_t>(set_->conj_index(static_cast<std::size_t>(i)))] = conj(v);
  }

  /// Euclidean norm over every stored coefficient.
  double l2_norm() const {
    CompensatedSum s;
    for (const auto& v : coeffs_) s.add(norm2(v));
    return std::sqrt(s.value());
  }

  double max_modulus() const {
    double m = 0.0;
    for (const auto& v : coeffs_) m = std::max(m, norm(v));
    return m;
  }

  /// Largest |(u_k, k)| / |k| over the set.
  double incompressibility_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      worst = std::max(worst, std::abs(dot(coeffs_[i], (*set_)[i])) / (*set_)[i].norm());
    return worst;
  }

  /// Largest |conj(u_{-k}) - u_k| over the set.
  double reality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      worst = std::max(worst, norm(conj(coeffs_[static_cast<std::size_t>(set_->conj_index(i))]) - coeffs_[i]));
    return worst;
  }

  /// Throws InvariantError naming the first offending mode; tolerance is relative to max |u_k| (absolute below 1).
  void check_invariants(double tol = kInvariantTol) const {
    const double scale = std::max(1.0, max_modulus());
    for (std::size_t i = 0; i < size(); ++i) {
      const Mode& k = (*set_)[i];
      if (std::abs(dot(coeffs_[i], k)) / k.norm() > tol * scale)
        throw InvariantError("coefficient at k=" + k.str() + " is not orthogonal to k");
      if (norm(conj(coeffs_[static_cast<std::size_t>(set_->conj_index(i))]) - coeffs_[i]) > tol * scale)
        throw InvariantError("coefficient at k=" + k.str() + " violates conj(u_{-k}) = u_k");
      if (k.dim == 2 && coeffs_[i][2] != cplx{})
        throw InvariantError("coefficient at k=" + k.str() + " has a third component in 2D");
    }
  }

  SpectralField& operator+=(const SpectralField& o) {
    same_set(o);
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] = coeffs_[i] + o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    same_set(o);
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] = coeffs_[i] - o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& v : coeffs_) v = s * v;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  friend bool operator==(const SpectralField& a, const SpectralField& b) {
    return *a.set_ == *b.set_ && a.coeffs_ == b.coeffs_;
  }

 private:
  void same_set(const SpectralField& o) const {
    if (set_ != o.set_ && !(*set_ == *o.set_)) throw ParameterError("fields live on different mode sets");
  }

  ModeSetPtr set_;
  std::vector<CVec> coeffs_;
};

/// Finitely supported forcing f_k.
class ForceField {
 public:
  ForceField() = default;
  explicit ForceField(SpectralField coeffs) : coeffs_(std::move(coeffs)) {
    cutoff_ = 0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (norm2(coeffs_[i]) > 0.0)
        cutoff_ = std::max(cutoff_, static_cast<int>(std::ceil(coeffs_.modes()[i].norm() - 1e-12)));
  }

  static ForceField zero(int dim) { return ForceField(SpectralField::zero(ModeSet::ball(dim, 0.0))); }

  const SpectralField& coeffs() const { return coeffs_; }
  /// K with f_k = 0 for |k| > K.
  int cutoff() const { return cutoff_; }
  bool is_zero() const {
    for (const auto& v : coeffs_.coeffs())
      if (norm2(v) > 0.0) return false;
    return true;
  }
  int dim() const { return coeffs_.modeset() ? coeffs_.dim() : 2; }

  /// Leray-projected f_k (zero when k is outside the support).
  CVec projected(const Mode& k) const {
    if (!coeffs_.modeset()) return {};
    return leray_project(k, coeffs_.at(k));
  }

 private:
  SpectralField coeffs_;
  int cutoff_ = 0;
};

struct PhysicsParams {
  double nu = 1.0;
  int dim = 2;

  void validate() const {
    if (!(nu > 0.0)) throw ParameterError("viscosity must be positive");
    if (dim != 2 && dim != 3) throw ParameterError("dimension must be 2 or 3");
  }
};

/// V(u) = sum |k|^2 |u_k|^2.
inline double enstrophy(const SpectralField& u) {
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) s.add(double(u.modes()[i].norm2()) * norm2(u[i]));
  return s.value();
}

/// V(F) = sqrt(sum |k|^2 |f_k|^2).
inline double force_enstrophy_norm(const ForceField& f) {
  if (!f.coeffs().modeset()) return 0.0;
  return std::sqrt(enstrophy(f.coeffs()));
}

/// Restriction of u to `target` (modes absent from u become 0).
inline SpectralField project(const SpectralField& u, const ModeSetPtr& target) {
  SpectralField r(target);
  for (std::size_t i = 0; i < target->size(); ++i) r[i] = u.at((*target)[i]);
  return r;
}

}  // namespace galtrap
