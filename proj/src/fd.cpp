#include "akns/fd.hpp"

#include <algorithm>
#include <string>

namespace akns {

Grid1 Grid1::span(double a, double b, double dx) {
  if (!(b > a) || !(dx > 0)) throw GridMismatch("span requires a < b and dx > 0");
  const int cells = std::max(1, static_cast<int>(std::lround((b - a) / dx)));
  return Grid1{a, (b - a) / cells, cells + 1};
}

Grid1 Grid1::subsample(int k) const { return Grid1{x0, dx * k, (n - 1) / k + 1}; }

bool Grid1::matches(const Grid1& o, double tol) const {
  return n == o.n && std::abs(x0 - o.x0) <= tol * (1 + std::abs(x0)) && std::abs(dx - o.dx) <= tol * dx;
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
  // Fornberg (1988), weights c[j][k] for derivative k at node j.
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(x.size(), std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) w[j] = c[j][m];
  return w;
}

namespace {

Stencil make_stencil(int start, int len, int at, double dx, int d) {
  std::vector<double> nodes(static_cast<std::size_t>(len));
  for (int k = 0; k < len; ++k) nodes[static_cast<std::size_t>(k)] = start + k;
  Stencil s{start, fornberg_weights(at, nodes, d)};
  const double scale = std::pow(dx, d);
  for (double& w : s.w) w /= scale;
  return s;
}

}  // namespace

FdOperator::FdOperator(int n, double dx, int d, FdScheme scheme)
    : n_(n), d_(d), r_(scheme.half_width(d)), scheme_(scheme) {
  if (d < 0 || scheme.order < 2 || scheme.order % 2 != 0) {
    throw StencilOutOfRange("unsupported derivative order or accuracy");
  }
  const int width = 2 * r_ + 1;
  if (n < width) {
    throw StencilOutOfRange("grid of " + std::to_string(n) + " points too small for d=" + std::to_string(d));
  }
  centered_ = make_stencil(-r_, width, 0, dx, d);
  if (scheme.boundary == Boundary::ShrinkDomain || r_ == 0) {
    lo_ = r_;
    hi_ = n - 1 - r_;
    return;
  }
  // One-sided stencils with d + order points keep the nominal order.
  const int len = std::max(width, d + scheme.order);
  if (n < len) throw StencilOutOfRange("grid too small for one-sided stencil");
  lo_ = 0;
  hi_ = n - 1;
  for (int i = 0; i < r_; ++i) left_.push_back(make_stencil(0, len, i, dx, d));
  for (int i = n - r_; i < n; ++i) right_.push_back(make_stencil(n - len, len, i, dx, d));
}

FdOperator::Ref FdOperator::stencil(int i) const {
  if (i < lo_ || i > hi_) {
    throw StencilOutOfRange("index " + std::to_string(i) + " outside valid range [" + std::to_string(lo_) +
                            ", " + std::to_string(hi_) + "] for d=" + std::to_string(d_));
  }
  if (i < r_ && !left_.empty()) {
    const Stencil& s = left_[static_cast<std::size_t>(i)];
    return {s.start, &s.w};
  }
  if (i > n_ - 1 - r_ && !right_.empty()) {
    const Stencil& s = right_[static_cast<std::size_t>(i - (n_ - r_))];
    return {s.start, &s.w};
  }
  return {i - r_, &centered_.w};
}

}  // namespace akns
