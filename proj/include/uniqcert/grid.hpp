#ifndef UNIQCERT_GRID_HPP
#define UNIQCERT_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uniqcert/errors.hpp"

namespace uniqcert {

/// Axis-aligned box with a uniform interior grid per axis. Boundary nodes
/// carry homogeneous Dirichlet data and are never stored; interior node
/// (i+1) along an axis sits at lo + (i+1)*spacing.
struct GridDomain {
  int dimension = 1;
  std::array<double, 3> lower{};
  std::array<double, 3> upper{};
  std::array<int, 3> counts{1, 1, 1};
  std::array<double, 3> spacing{};

  static GridDomain box(int dimension, std::array<double, 3> lower,
                        std::array<double, 3> upper,
                        std::array<int, 3> counts) {
    if (dimension < 1 || dimension > 3)
      throw GridMismatchError("dimension must be 1, 2, or 3");
    GridDomain d;
    d.dimension = dimension;
    for (int k = 0; k < 3; ++k) {
      if (k < dimension) {
        if (!(std::isfinite(lower[k]) && std::isfinite(upper[k]) &&
              lower[k] < upper[k]))
          throw GridMismatchError("axis " + std::to_string(k) +
                                  " bounds must be finite with lower < upper");
        if (counts[k] < 1)
          throw GridMismatchError("axis " + std::to_string(k) +
                                  " needs at least one interior node");
        d.lower[k] = lower[k];
        d.upper[k] = upper[k];
        d.counts[k] = counts[k];
        d.spacing[k] = (upper[k] - lower[k]) / (counts[k] + 1);
      } else {
        d.lower[k] = 0.0;
        d.upper[k] = 0.0;
        d.counts[k] = 1;
        d.spacing[k] = 0.0;
      }
    }
    return d;
  }

  int interior_count() const {
    int n = 1;
    for (int k = 0; k < dimension; ++k) n *= counts[k];
    return n;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < dimension; ++k) v *= spacing[k];
    return v;
  }

  /// Flat index with axis 0 (x) fastest.
  int flat_index(std::array<int, 3> idx) const {
    int flat = 0;
    for (int k = dimension - 1; k >= 0; --k) flat = flat * counts[k] + idx[k];
    return flat;
  }

  std::array<int, 3> multi_index(int flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int k = 0; k < dimension; ++k) {
      idx[k] = flat % counts[k];
      flat /= counts[k];
    }
    return idx;
  }

  double coordinate(int axis, int idx) const {
    return lower[axis] + (idx + 1) * spacing[axis];
  }

  std::array<double, 3> node_coords(int flat) const {
    const std::array<int, 3> idx = multi_index(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int k = 0; k < dimension; ++k) x[k] = coordinate(k, idx[k]);
    return x;
  }

  friend bool operator==(const GridDomain& a, const GridDomain& b) {
    return a.dimension == b.dimension && a.lower == b.lower &&
           a.upper == b.upper && a.counts == b.counts;
  }
  friend bool operator!=(const GridDomain& a, const GridDomain& b) {
    return !(a == b);
  }
};

/// Real-valued field over the interior nodes of a GridDomain.
struct GridField {
  GridDomain domain;
  std::vector<double> values;

  static GridField zeros(const GridDomain& domain) {
    GridField f;
    f.domain = domain;
    f.values.assign(static_cast<std::size_t>(domain.interior_count()), 0.0);
    return f;
  }

  static GridField constant(const GridDomain& domain, double v) {
    GridField f = zeros(domain);
    for (double& x : f.values) x = v;
    return f;
  }

  /// fn receives (x, y, z); unused coordinates are 0.
  template <class Fn>
  static GridField from_fn(const GridDomain& domain, Fn&& fn) {
    GridField f = zeros(domain);
    const int n = domain.interior_count();
    for (int i = 0; i < n; ++i) {
      const std::array<double, 3> x = domain.node_coords(i);
      f.values[static_cast<std::size_t>(i)] = fn(x[0], x[1], x[2]);
    }
    return f;
  }

  int size() const { return static_cast<int>(values.size()); }
};

inline void require_same_domain(const GridField& a, const GridField& b,
                                const char* where) {
  if (a.domain != b.domain)
    throw GridMismatchError(std::string(where) +
                            ": fields live on different grids");
}

/// Discrete L2 inner product, cellVolume * sum(u_i v_i). Accumulation is
/// serial so the result is bit-identical regardless of thread budget.
inline double dot_h(const GridField& a, const GridField& b) {
  require_same_domain(a, b, "dot_h");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    acc += a.values[i] * b.values[i];
  return a.domain.cell_volume() * acc;
}

inline double norm_h(const GridField& a) { return std::sqrt(dot_h(a, a)); }

inline double norm_inf(const GridField& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, const GridField& x, GridField& y) {
  require_same_domain(x, y, "axpy");
  for (std::size_t i = 0; i < y.values.size(); ++i)
    y.values[i] += alpha * x.values[i];
}

inline GridField add_scaled(const GridField& a, double alpha,
                            const GridField& b) {
  require_same_domain(a, b, "add_scaled");
  GridField out = a;
  axpy(alpha, b, out);
  return out;
}

inline bool all_finite(const GridField& a) {
  for (double v : a.values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace uniqcert

#endif  // UNIQCERT_GRID_HPP
