#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "akns/errors.hpp"
#include "akns/fd.hpp"
#include "akns/parallel.hpp"

using namespace akns;

namespace {

std::vector<double> sample(const Grid1& g, double (*f)(double)) {
  std::vector<double> v(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) v[static_cast<std::size_t>(i)] = f(g.at(i));
  return v;
}

double max_err(const FdResult<double>& r, const Grid1& g, double (*exact)(double)) {
  double e = 0;
  for (std::size_t k = 0; k < r.values.size(); ++k) e = std::max(e, std::abs(r.values[k] - exact(g.at(r.first + static_cast<int>(k)))));
  return e;
}

double msin(double x) { return -std::sin(x); }
double sq(double x) { return x * x; }
double twice(double x) { return 2 * x; }
double e3(double x) { return std::exp(std::sin(x)); }
double e3d(double x) {
  const double c = std::cos(x), s = std::sin(x);
  return std::exp(s) * (c * c * c - 3 * s * c - c);  // d³/dx³ e^{sin x}
}

}  // namespace

TEST_CASE("grid helpers") {
  const Grid1 g = Grid1::span(-1, 1, 0.1);
  CHECK(g.n == 21);
  CHECK(g.back() == doctest::Approx(1.0));
  const Grid1 s = g.subsample(2);
  CHECK(s.n == 11);
  CHECK(s.dx == doctest::Approx(0.2));
  CHECK(g.matches(Grid1{-1, 0.1, 21}));
}

TEST_CASE("Fornberg weights reproduce the classical stencils") {
  const auto w1 = fornberg_weights(0, {-1, 0, 1}, 1);
  CHECK(w1[0] == doctest::Approx(-0.5));
  CHECK(w1[1] == doctest::Approx(0.0));
  CHECK(w1[2] == doctest::Approx(0.5));
  const auto w2 = fornberg_weights(0, {-1, 0, 1}, 2);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));
  const auto w4 = fornberg_weights(0, {-2, -1, 0, 1, 2}, 1);
  CHECK(w4[0] == doctest::Approx(1.0 / 12));
  CHECK(w4[1] == doctest::Approx(-8.0 / 12));
}

TEST_CASE("fd_derivative examples") {
  const Grid1 g = Grid1::span(-2, 2, 0.05);
  const auto x2 = sample(g, sq);
  // order-2 scheme is exact on quadratics
  CHECK(max_err(fd_derivative(x2, g.dx, 1, FdScheme{2}), g, twice) < 1e-12);
  // d = 0 is the identity
  const auto id = fd_derivative(x2, g.dx, 0, FdScheme{});
  CHECK(id.first == 0);
  CHECK(id.values == x2);

  const Grid1 h = Grid1::span(0, 6, 1e-2);
  const auto s = sample(h, [](double x) { return std::sin(x); });
  CHECK(max_err(fd_derivative(s, h.dx, 2, FdScheme{4}), h, msin) < 1e-7);
}

TEST_CASE("centered stencils are symmetric and the valid range shrinks") {
  FdOperator op(50, 0.1, 2, FdScheme{4});
  CHECK(op.first_valid() == 2);
  CHECK(op.last_valid() == 47);
  const auto st = op.stencil(10);
  const auto& w = *st.w;
  REQUIRE(w.size() == 5);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(w[k] == doctest::Approx(w[w.size() - 1 - k]));
  CHECK_THROWS_AS(op.stencil(1), StencilOutOfRange);
  CHECK_THROWS_AS(FdOperator(3, 0.1, 2, FdScheme{4}), StencilOutOfRange);

  FdOperator one(50, 0.1, 2, FdScheme{4, Boundary::OneSided});
  CHECK(one.first_valid() == 0);
  CHECK(one.last_valid() == 49);
}

TEST_CASE("observed convergence order matches the nominal order") {
  for (int order : {2, 4}) {
    for (int d : {1, 2, 3}) {
      double e[2];
      for (int r = 0; r < 2; ++r) {
        const Grid1 g = Grid1::span(-1, 1, 0.02 / (1 << r));
        const auto v = sample(g, e3);
        const auto res = fd_derivative(v, g.dx, d, FdScheme{order});
        // compare on the common interior [-0.5, 0.5]
        double m = 0;
        for (std::size_t k = 0; k < res.values.size(); ++k) {
          const double x = g.at(res.first + static_cast<int>(k));
          if (std::abs(x) > 0.5) continue;
          double ex = d == 1 ? std::cos(x) * e3(x)
                             : d == 2 ? e3(x) * (std::cos(x) * std::cos(x) - std::sin(x)) : e3d(x);
          m = std::max(m, std::abs(res.values[k] - ex));
        }
        e[r] = m;
      }
      const double p = std::log2(e[0] / e[1]);
      INFO("order " << order << " d " << d << " observed " << p);
      CHECK(std::abs(p - order) < 0.2);
    }
  }
}

TEST_CASE("one-sided boundary stencils keep the order") {
  const Grid1 g = Grid1::span(0, 1, 0.01), g2 = Grid1::span(0, 1, 0.005);
  auto err = [](const Grid1& gg) {
    std::vector<double> v(static_cast<std::size_t>(gg.n));
    for (int i = 0; i < gg.n; ++i) v[static_cast<std::size_t>(i)] = std::sin(gg.at(i));
    const auto r = fd_derivative(v, gg.dx, 1, FdScheme{4, Boundary::OneSided});
    return std::abs(r.values.front() - 1.0);
  };
  CHECK(std::log2(err(g) / err(g2)) > 3.5);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK(worker_count() >= 1);
}
