#include "doctest.h"

#include "aftxs/error.hpp"
#include "aftxs/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace aftxs;

TEST_SUITE("quadrature") {

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  auto rule = quad::gauss_legendre(7);
  REQUIRE(rule.nodes.size() == 7);
  for (int p = 0; p <= 13; ++p) {
    double s = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
    double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("adaptive integrals") {
  auto r = quad::integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi, "sin");
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  auto g = quad::integrate_to_infinity([](double x) { return std::exp(-x * x); }, 0, 1, "gauss");
  CHECK(g.value == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-10));
  // integrable endpoint singularity
  auto s = quad::integrate([](double x) { return x > 0 ? 1 / std::sqrt(x) : 0.0; }, 0, 1, "rsqrt");
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("non-finite integrand names the integral") {
  try {
    quad::integrate([](double) { return std::nan(""); }, 0, 1, "broken integral");
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("broken integral") != std::string::npos);
  }
}

TEST_CASE("composite rule on breakpoints") {
  std::vector<double> br{0, 0.5, 1, 2};
  double v = quad::composite([](double x) { return std::abs(x - 1); }, br);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

}
