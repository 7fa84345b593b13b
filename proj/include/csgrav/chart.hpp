#pragma once

#include <array>

#include "csgrav/core.hpp"

namespace csgrav {

/// Capacity-4 point/gradient type: charts have dimension <= 4, so all
/// per-point data lives on the stack.
using Pt = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using HessMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

/// Axis-aligned coordinate chart. Either a periodic box (a torus with
/// the given periods) or a plain box with corners. No atlases and no
/// transition maps; every construction in this library is local.
struct Chart {
  enum class Kind { Periodic, Box };

  int n = 3;
  Kind kind = Kind::Periodic;
  Pt lo, hi;  // Periodic: lo = 0, hi = periods

  static Chart periodic(const Pt& periods) {
    Chart c;
    c.n = static_cast<int>(periods.size());
    if (c.n < 1 || c.n > 4) throw DimensionError("Chart: dimension must be 1..4");
    for (int i = 0; i < c.n; ++i)
      if (!(periods[i] > 0.0)) throw std::invalid_argument("Chart: periods must be positive");
    c.kind = Kind::Periodic;
    c.lo = Pt::Zero(c.n);
    c.hi = periods;
    return c;
  }

  static Chart box(const Pt& lo, const Pt& hi) {
    Chart c;
    c.n = static_cast<int>(lo.size());
    if (c.n < 1 || c.n > 4 || hi.size() != c.n) throw DimensionError("Chart: bad corners");
    for (int i = 0; i < c.n; ++i)
      if (!(hi[i] > lo[i])) throw std::invalid_argument("Chart: extents must be positive");
    c.kind = Kind::Box;
    c.lo = lo;
    c.hi = hi;
    return c;
  }

  static Chart unit_torus(int n) {
    return periodic(Pt::Ones(n));
  }

  bool periodic_kind() const { return kind == Kind::Periodic; }
  Pt periods() const { return hi - lo; }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= hi[i] - lo[i];
    return v;
  }
};

/// Per-axis sample counts for quadrature on a periodic chart.
struct QuadratureGrid {
  std::array<int, 4> counts{2, 2, 2, 2};
  int n = 3;

  QuadratureGrid() = default;
  QuadratureGrid(std::initializer_list<int> c) {
    n = static_cast<int>(c.size());
    if (n < 1 || n > 4) throw DimensionError("QuadratureGrid: dimension must be 1..4");
    int i = 0;
    for (int v : c) {
      if (v < 2) throw std::invalid_argument("QuadratureGrid: counts must be >= 2");
      counts[i++] = v;
    }
  }
  static QuadratureGrid cubic(int n, int per_axis) {
    QuadratureGrid g;
    g.n = n;
    for (int i = 0; i < n; ++i) {
      if (per_axis < 2) throw std::invalid_argument("QuadratureGrid: counts must be >= 2");
      g.counts[i] = per_axis;
    }
    return g;
  }
  std::size_t total() const {
    std::size_t t = 1;
    for (int i = 0; i < n; ++i) t *= static_cast<std::size_t>(counts[i]);
    return t;
  }
};

}  // namespace csgrav
