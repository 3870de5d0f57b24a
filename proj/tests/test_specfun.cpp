#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "twogamma/specfun.hpp"
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numeric>

using namespace twogamma;

TEST_CASE("spherical bessel: closed forms and limits") {
  CHECK(std::abs(spherical_bessel_j(0, M_PI)) < 1e-16);
  CHECK(spherical_bessel_j(1, 0.0) == 0.0);
  CHECK(spherical_bessel_j(0, 0.0) == 1.0);
  // x^2/15 (1 - x^2/14 + x^4/504)
  const double x = 0.1;
  const double series = x * x / 15.0 * (1.0 - x * x / 14.0 + std::pow(x, 4) / 504.0);
  CHECK(spherical_bessel_j(2, x) == doctest::Approx(series).epsilon(1e-12));
  CHECK(spherical_bessel_j(2, x) == doctest::Approx(6.6657e-4).epsilon(1e-4));
  for (double t : {0.3, 1.7, 5.0, 23.0, 400.0}) {
    const double s = std::sin(t), c = std::cos(t);
    CHECK(spherical_bessel_j(0, t) == doctest::Approx(s / t).epsilon(1e-13));
    CHECK(spherical_bessel_j(1, t) == doctest::Approx(s / (t * t) - c / t).epsilon(1e-12));
    CHECK(spherical_bessel_j(2, t) ==
          doctest::Approx((3 / (t * t) - 1) * s / t - 3 * c / (t * t)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(spherical_bessel_j(1, -1.0), std::domain_error);
}

TEST_CASE("spherical bessel: agreement with boost") {
  double worst = 0.0;
  for (int L = 0; L <= 12; ++L)
    for (double x = 0.01; x <= 1000.0; x *= 1.37) {
      const double ref = boost::math::sph_bessel(L, x);
      const double v = spherical_bessel_j(L, x);
      if (std::abs(ref) > 1e-250)
        worst = std::max(worst, std::abs(v - ref) / std::max(std::abs(ref), 1e-3 * std::abs(spherical_bessel_j(0, x)) + 1e-300));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("spherical bessel: recurrence residual") {
  double worst = 0.0;
  for (int L = 1; L <= 12; ++L)
    for (double x = 0.01; x <= 1000.0; x *= 1.1) {
      const auto j = spherical_bessel_j_all(L + 1, x);
      const double res =
          std::abs(j[L - 1] + j[L + 1] - (2 * L + 1) / x * j[L]);
      const double scale = std::max(std::abs(j[L - 1]), std::abs(j[L]));
      worst = std::max(worst, res / scale);
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("gauss-legendre") {
  auto q1 = gauss_legendre(1, -1, 1);
  CHECK(q1.nodes[0] == doctest::Approx(0.0));
  CHECK(q1.weights[0] == doctest::Approx(2.0));
  auto q5 = gauss_legendre(5, -1, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    s += q5.weights[i] * std::pow(q5.nodes[i], 8);
  CHECK(std::abs(s - 2.0 / 9.0) <= 1e-15);
  auto q16 = gauss_legendre(16, 0, M_PI);
  s = 0.0;
  for (std::size_t i = 0; i < 16; ++i)
    s += q16.weights[i] * std::sin(q16.nodes[i]);
  CHECK(std::abs(s - 2.0) <= 1e-13);
  for (int n : {2, 7, 20, 64}) {
    auto q = gauss_legendre(n, 0.5, 3.0);
    const double wsum = std::accumulate(q.weights.begin(), q.weights.end(), 0.0);
    CHECK(wsum == doctest::Approx(2.5).epsilon(1e-14));
    for (int i = 0; i < n; ++i) {
      CHECK(q.weights[i] > 0.0);
      CHECK(q.nodes[i] + q.nodes[n - 1 - i] == doctest::Approx(3.5).epsilon(1e-14));
      CHECK(q.weights[i] == doctest::Approx(q.weights[n - 1 - i]).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(3, 1, 0), std::invalid_argument);
}

namespace {
SplineBasis make_basis(int k) {
  return SplineBasis(log_linear_breakpoints(20, 1e-3, 40.0, 2.0), k);
}
} // namespace

TEST_CASE("splines: partition of unity and non-negativity") {
  for (int k : {2, 4, 7, 9}) {
    const auto b = make_basis(k);
    CHECK(b.size() == 20 + k - 1);
    for (double r = 0.0; r < b.r_max(); r += 0.0137 + r * 0.05) {
      double s = 0.0;
      for (int i = 0; i < b.size(); ++i) {
        const double v = b.eval(i, r);
        CHECK(v >= -1e-15);
        s += v;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("splines: linear hat functions") {
  SplineBasis b({0.0, 1.0}, 2);
  REQUIRE(b.size() == 2);
  for (double r : {0.0, 0.25, 0.6, 1.0}) {
    CHECK(b.eval(0, r) == doctest::Approx(1.0 - r));
    CHECK(b.eval(1, r) == doctest::Approx(r));
  }
  SplineBasis c({0.0, 1.0, 3.0}, 2);
  CHECK(c.eval(1, 0.5) == doctest::Approx(0.5));
  CHECK(c.eval(1, 2.0) == doctest::Approx(0.5));
  CHECK(c.eval(1, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("splines: continuity of derivatives at interior knots") {
  const int k = 7;
  const auto b = make_basis(k);
  const auto &br = b.breakpoints();
  double worst = 0.0;
  for (std::size_t m = 1; m + 1 < br.size(); ++m) {
    const double t = br[m];
    const double h = 1e-7 * std::max(t, 1e-3);
    for (int i = 0; i < b.size(); ++i)
      for (int d = 0; d <= 1; ++d) {
        const double l = b.eval(i, t - h, d), r = b.eval(i, t + h, d);
        const double scale = 1.0 + std::abs(l);
        worst = std::max(worst, std::abs(l - r) / scale);
      }
  }
  CHECK(worst < 1e-4);
  // the (k-2)th derivative is continuous, the (k-1)th generally not:
  // compare one-sided values of d^(k-2) through finite differences of d^2
  const double t = br[5];
  double jump = 0.0;
  for (int i = 0; i < b.size(); ++i) {
    const double h = 1e-9 * t;
    jump = std::max(jump, std::abs(b.eval(i, t - h, 2) - b.eval(i, t + h, 2)) /
                              (1.0 + std::abs(b.eval(i, t, 2))));
  }
  CHECK(jump < 1e-4);
}

TEST_CASE("splines: integrals match knot closed form") {
  const int k = 9;
  const auto b = make_basis(k);
  const auto &t = b.knots();
  const auto &br = b.breakpoints();
  const auto q = gauss_legendre(k, 0.0, 1.0);
  for (int i = 0; i < b.size(); ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m + 1 < br.size(); ++m) {
      const double a = br[m], h = br[m + 1] - br[m];
      for (std::size_t g = 0; g < q.nodes.size(); ++g)
        s += h * q.weights[g] * b.eval(i, a + h * q.nodes[g]);
    }
    const double exact = (t[i + k] - t[i]) / k;
    CHECK(std::abs(s - exact) <= 1e-13 * std::max(exact, 1.0));
  }
}

TEST_CASE("radial grid") {
  const auto br = log_linear_breakpoints(30, 1e-4, 50.0, 3.0);
  RadialGrid g(br, 12);
  CHECK(g.size() == 30u * 12u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.r(i) > 0.0);
    CHECK(g.w(i) > 0.0);
    if (i > 0)
      CHECK(g.r(i) > g.r(i - 1));
  }
  // int_0^50 r^3 e^{-r} dr
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    f[i] = std::pow(g.r(i), 3) * std::exp(-g.r(i));
  const double exact = 6.0 - std::exp(-50.0) * (50.0 * 50 * 50 + 3 * 50 * 50 + 6 * 50 + 6);
  CHECK(g.integrate(f) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(br.front() == 0.0);
  CHECK(br.back() == doctest::Approx(50.0));
}
