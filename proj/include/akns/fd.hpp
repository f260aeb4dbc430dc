#pragma once

#include <cmath>
#include <type_traits>
#include <utility>
#include <vector>

#include "akns/errors.hpp"

namespace akns {

/// Uniform 1D grid x_i = x0 + i*dx, i = 0..n-1.
struct Grid1 {
  double x0 = 0.0;
  double dx = 1.0;
  int n = 0;

  double at(int i) const { return x0 + i * dx; }
  double back() const { return at(n - 1); }

  /// Grid covering [a, b] with step as close to dx as divides the interval.
  static Grid1 span(double a, double b, double dx);
  /// Every k-th point of this grid.
  Grid1 subsample(int k) const;
  bool matches(const Grid1& o, double tol = 1e-12) const;
};

enum class Boundary { ShrinkDomain, OneSided };

/// Finite-difference scheme: nominal accuracy order (even) and what happens
/// where a centered stencil does not fit.
struct FdScheme {
  int order = 4;
  Boundary boundary = Boundary::ShrinkDomain;

  /// Half-width of the centered stencil for derivative order d.
  int half_width(int d) const { return d == 0 ? 0 : (d + 1) / 2 + order / 2 - 1; }
};

/// Fornberg weights for the d-th derivative at x0 from the given nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int d);

struct Stencil {
  int start = 0;            // first sample index used
  std::vector<double> w;    // already divided by dx^d
};

/// d-th derivative operator on a grid of n points with spacing dx.
class FdOperator {
 public:
  FdOperator(int n, double dx, int d, FdScheme scheme);

  int derivative() const { return d_; }
  int first_valid() const { return lo_; }
  int last_valid() const { return hi_; }
  bool valid(int i) const { return i >= lo_ && i <= hi_; }
  struct Ref {
    int start;
    const std::vector<double>* w;
  };
  Ref stencil(int i) const;

  /// Apply at index i; sample(k) returns the value at grid index k.
  template <class F>
  auto apply(int i, F&& sample) const {
    using T = std::decay_t<decltype(sample(0))>;
    const Ref s = stencil(i);
    const std::vector<double>& w = *s.w;
    T acc = w[0] * sample(s.start);
    for (std::size_t k = 1; k < w.size(); ++k) acc += w[k] * sample(s.start + static_cast<int>(k));
    return acc;
  }

 private:
  int n_, d_, r_, lo_, hi_;
  FdScheme scheme_;
  Stencil centered_;                 // start relative to i
  std::vector<Stencil> left_, right_; // one-sided, absolute starts
};

/// Derivative of sampled data; values outside [first, first+values.size())
/// are not produced under the shrink-domain policy.
template <class T>
struct FdResult {
  int first = 0;
  std::vector<T> values;
  bool contains(int i) const { return i >= first && i < first + static_cast<int>(values.size()); }
  const T& at(int i) const { return values.at(static_cast<std::size_t>(i - first)); }
};

template <class T>
FdResult<T> fd_derivative(const std::vector<T>& samples, double dx, int d, const FdScheme& scheme) {
  const int n = static_cast<int>(samples.size());
  FdOperator op(n, dx, d, scheme);
  FdResult<T> out;
  out.first = op.first_valid();
  for (int i = op.first_valid(); i <= op.last_valid(); ++i) {
    out.values.push_back(op.apply(i, [&](int k) -> const T& { return samples[static_cast<std::size_t>(k)]; }));
  }
  return out;
}

}  // namespace akns
