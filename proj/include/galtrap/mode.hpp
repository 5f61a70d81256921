#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "galtrap/errors.hpp"

namespace galtrap {

/// Integer wave vector in Z^d (d = 2 or 3). Unused trailing components are 0.
struct Mode {
  int dim = 2;
  std::array<int, 3> c{0, 0, 0};

  Mode() = default;
  Mode(int x, int y) : dim(2), c{x, y, 0} {}
  Mode(int x, int y, int z) : dim(3), c{x, y, z} {}

  static Mode of(int dim, std::span<const int> comps) {
    if (dim != 2 && dim != 3) throw ParameterError("mode dimension must be 2 or 3");
    if (static_cast<int>(comps.size()) != dim)
      throw ParameterError("mode has " + std::to_string(comps.size()) + " components, expected " +
                           std::to_string(dim));
    Mode m;
    m.dim = dim;
    for (int i = 0; i < dim; ++i) m.c[i] = comps[i];
    return m;
  }

  int operator[](int i) const { return c[i]; }

  std::int64_t norm2() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += std::int64_t(c[i]) * c[i];
    return s;
  }
  double norm() const { return std::sqrt(double(norm2())); }
  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }

  Mode operator-() const {
    Mode m = *this;
    for (auto& x : m.c) x = -x;
    return m;
  }
  friend Mode operator-(Mode a, const Mode& b) {
    for (int i = 0; i < 3; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend Mode operator+(Mode a, const Mode& b) {
    for (int i = 0; i < 3; ++i) a.c[i] += b.c[i];
    return a;
  }

  /// Leading nonzero component positive: one representative per conjugate pair.
  bool is_representative() const {
    for (int i = 0; i < dim; ++i) {
      if (c[i] > 0) return true;
      if (c[i] < 0) return false;
    }
    return false;
  }

  int max_abs() const {
    int m = 0;
    for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
    return m;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) {
      if (i) s += ",";
      s += std::to_string(c[i]);
    }
    return s + ")";
  }

  friend auto operator<=>(const Mode&, const Mode&) = default;
  friend bool operator==(const Mode&, const Mode&) = default;
};

/// Symmetric finite subset of Z^d \ {0}, stored in lexicographic order.
///
/// Lookup goes through a dense index over the bounding box [-B, B]^d, so
/// `index_of` is O(1); the convolution kernels rely on this.
class ModeSet {
 public:
  ModeSet() = default;

  /// Canonical Galerkin projection {k : 0 < |k| <= radius}.
  static std::shared_ptr<const ModeSet> ball(int dim, double radius) {
    check_dim(dim);
    const auto r2 = static_cast<std::int64_t>(std::floor(radius * radius + 1e-9));
    const int b = static_cast<int>(std::floor(radius + 1e-9));
    std::vector<Mode> modes;
    for_box(dim, b, [&](const Mode& m) {
      const auto n = m.norm2();
      if (n > 0 && n <= r2) modes.push_back(m);
    });
    return make(dim, std::move(modes));
  }

  /// Cube {k : 0 < max|k_i| <= n}.
  static std::shared_ptr<const ModeSet> square(int dim, int n) {
    check_dim(dim);
    std::vector<Mode> modes;
    for_box(dim, n, [&](const Mode& m) {
      if (!m.is_zero()) modes.push_back(m);
    });
    return make(dim, std::move(modes));
  }

  /// Shell {k : inner < |k| <= outer}.
  static std::shared_ptr<const ModeSet> annulus(int dim, double inner, double outer) {
    check_dim(dim);
    std::vector<Mode> modes;
    const int b = static_cast<int>(std::floor(outer + 1e-9));
    for_box(dim, b, [&](const Mode& m) {
      const double n = m.norm();
      if (!m.is_zero() && n > inner + 1e-12 && n <= outer + 1e-12) modes.push_back(m);
    });
    return make(dim, std::move(modes));
  }

  /// Arbitrary set; throws if it contains 0, mixes dimensions, or is not symmetric.
  static std::shared_ptr<const ModeSet> from_modes(int dim, std::vector<Mode> modes) {
    check_dim(dim);
    for (const auto& m : modes) {
      if (m.dim != dim) throw ParameterError("mode " + m.str() + " has wrong dimension");
      if (m.is_zero()) throw ParameterError("the zero mode is excluded from every mode set");
    }
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    auto set = make(dim, std::move(modes));
    for (const auto& m : set->modes_)
      if (set->index_of(-m) < 0) throw InvariantError("mode set is not symmetric: missing " + (-m).str());
    return set;
  }

  int dim() const { return dim_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  const Mode& operator[](std::size_t i) const { return modes_[i]; }
  std::span<const Mode> modes() const { return modes_; }
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }

  /// Largest |k_i| over the set (0 if empty).
  int bound() const { return bound_; }
  double max_norm() const { return max_norm_; }

  /// Index of `m`, or -1 when absent.
  int index_of(const Mode& m) const {
    if (modes_.empty()) return -1;
    std::int64_t flat = 0;
    const int w = 2 * bound_ + 1;
    for (int i = 0; i < dim_; ++i) {
      const int x = m.c[i] + bound_;
      if (x < 0 || x >= w) return -1;
      flat = flat * w + x;
    }
    return lookup_[static_cast<std::size_t>(flat)];
  }
  bool contains(const Mode& m) const { return index_of(m) >= 0; }

  /// Index of -k for the mode at index i.
  int conj_index(std::size_t i) const { return conj_[i]; }

  /// Indices of the representative half (leading nonzero component positive).
  std::span<const int> representatives() const { return reps_; }

  bool subset_of(const ModeSet& other) const {
    if (other.dim_ != dim_) return false;
    return std::all_of(modes_.begin(), modes_.end(), [&](const Mode& m) { return other.contains(m); });
  }

  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.dim_ == b.dim_ && a.modes_ == b.modes_;
  }

 private:
  static void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw ParameterError("dimension must be 2 or 3");
  }

  template <class F>
  static void for_box(int dim, int b, F&& f) {
    if (dim == 2) {
      for (int x = -b; x <= b; ++x)
        for (int y = -b; y <= b; ++y) f(Mode(x, y));
    } else {
      for (int x = -b; x <= b; ++x)
        for (int y = -b; y <= b; ++y)
          for (int z = -b; z <= b; ++z) f(Mode(x, y, z));
    }
  }

  static std::shared_ptr<const ModeSet> make(int dim, std::vector<Mode> modes) {
    auto s = std::make_shared<ModeSet>();
    s->dim_ = dim;
    std::sort(modes.begin(), modes.end());
    s->modes_ = std::move(modes);
    s->bound_ = 0;
    s->max_norm_ = 0.0;
    for (const auto& m : s->modes_) {
      s->bound_ = std::max(s->bound_, m.max_abs());
      s->max_norm_ = std::max(s->max_norm_, m.norm());
    }
    const std::size_t w = 2 * static_cast<std::size_t>(s->bound_) + 1;
    std::size_t cells = 1;
    for (int i = 0; i < dim; ++i) cells *= w;
    s->lookup_.assign(s->modes_.empty() ? 0 : cells, -1);
    for (std::size_t i = 0; i < s->modes_.size(); ++i) {
      std::size_t flat = 0;
      for (int d = 0; d < dim; ++d) flat = flat * w + static_cast<std::size_t>(s->modes_[i].c[d] + s->bound_);
      s->lookup_[flat] = static_cast<int>(i);
    }
    s->conj_.resize(s->modes_.size());
    for (std::size_t i = 0; i < s->modes_.size(); ++i) {
      s->conj_[i] = s->index_of(-s->modes_[i]);
      if (s->modes_[i].is_representative()) s->reps_.push_back(static_cast<int>(i));
    }
    return s;
  }

  int dim_ = 2;
  std::vector<Mode> modes_;
  std::vector<int> lookup_;
  std::vector<int> conj_;
  std::vector<int> reps_;
  int bound_ = 0;
  double max_norm_ = 0.0;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

}  // namespace galtrap
