#include "doctest.h"
#include "oracle.hpp"

#include "aftxs/error.hpp"
#include "aftxs/hazard.hpp"
#include "aftxs/rng.hpp"
#include "aftxs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace aftxs;

namespace {

// g_Y for Exponential(1) is e^{-y}: Y = U V with V ~ Gamma(2).
std::vector<double> exp_gy_sample(std::size_t n, std::uint64_t seed) {
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng r(SeedSpec{seed, 0}, 0, i);
    ys[i] = r.uniform_pos() * (r.exponential() + r.exponential());
  }
  return ys;
}

// Simpson's rule on a fine uniform grid; the fitted functions are only piecewise smooth.
template <class F>
double simpson(F f, double a, double b, int cells = 20000) {
  double h = (b - a) / cells, s = f(a) + f(b);
  for (int i = 1; i < cells; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

double weighted_error(const HazardFit& fit) {
  return simpson([&](double y) {
    double d = fit.ylambda_hat(y) - y;
    return d * d * std::exp(-y);
  }, 0, 40, 40000);
}

}  // namespace

TEST_SUITE("hazard") {

TEST_CASE("kernel density of g_Y") {
  auto ys = exp_gy_sample(10000, 1);
  HazardOptions opts;
  auto kd = fit_kernel_density(ys, opts);
  CHECK(std::abs(kd->value(1.0) - std::exp(-1.0)) < 0.05);
  double top = *std::max_element(ys.begin(), ys.end());
  double mass = simpson([&](double y) { return kd->value(y); }, 0, top + 5 * kd->bandwidth());
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  // tabulated values against the direct kernel sums
  for (double y : {0.0, 0.013, 0.5, 1.7, 4.2}) {
    CHECK(kd->value(y) == doctest::Approx(kd->exact_value(y)).epsilon(1e-7));
    CHECK(kd->derivative(y) == doctest::Approx(kd->exact_derivative(y)).epsilon(1e-6).scale(1e-3));
  }
}

TEST_CASE("single observation has its mode at the observation") {
  HazardOptions opts;
  opts.bandwidth = FixedBandwidth{0.2};
  std::vector<double> one{1.0};
  auto kd = fit_kernel_density(one, opts);
  double best = 0, arg = 0;
  for (double y = 0; y < 3; y += 0.001)
    if (kd->value(y) > best) best = kd->value(y), arg = y;
  CHECK(arg == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(kd->exact_derivative(1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("bad inputs") {
  std::vector<double> empty;
  CHECK_THROWS_AS(estimate_hazard(empty), InvalidArgument);
  std::vector<double> neg{1.0, -2.0};
  CHECK_THROWS_AS(estimate_hazard(neg), InvalidArgument);
  CHECK_THROWS_AS(fit_kernel_density(neg, {}), InvalidArgument);
}

TEST_CASE("weighted error and I1 on Exponential(1)") {
  auto ys = exp_gy_sample(10000, 2);
  auto fit = estimate_hazard(ys);
  CHECK(weighted_error(fit) < 0.1);
  CHECK(estimate_i1(fit) >= 1.6);
  CHECK(estimate_i1(fit) <= 2.4);
  CHECK(fit.i1_hat() == estimate_i1(fit));
  auto sym = estimate_hazard_symmetrized(ys, {4, 0});
  CHECK(weighted_error(sym) < 0.1);
}

TEST_CASE("I1 on Weibull(2,1)") {
  // g_Y ∝ e^{-y²}: half-normal with variance 1/2.
  std::vector<double> ys(10000);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CounterRng r(SeedSpec{5, 0}, 0, i);
    ys[i] = std::abs(r.normal()) / std::sqrt(2.0);
  }
  double i1 = estimate_i1(estimate_hazard(ys));
  CHECK(i1 >= 2.4);
  CHECK(i1 <= 3.6);
  double oracle_i1 = oracle::half_line([](double y) { return 4 * std::pow(y, 4) * 2 / std::sqrt(M_PI) * std::exp(-y * y); });
  CHECK(oracle_i1 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("fit invariants hold on a grid") {
  for (std::size_t n : {50u, 1000u, 10000u}) {
    auto ys = exp_gy_sample(n, 7);
    for (int method = 0; method < 2; ++method) {
      auto fit = method == 0 ? estimate_hazard(ys) : estimate_hazard_symmetrized(ys, {8, 1});
      const auto& info = fit.info();
      CHECK(info.n == n);
      CHECK(info.bandwidth > 0);
      CHECK(info.clip_bound == doctest::Approx(std::max(std::log(double(n)), 1.0)));
      double top = *std::max_element(ys.begin(), ys.end());
      for (double y = 0; y < top + 3; y += 0.01) {
        double yl = fit.ylambda_hat(y);
        REQUIRE(yl >= 0.0);
        REQUIRE(yl <= info.clip_bound * (1 + 1e-12));
        if (method == 0 && fit.g_hat(y) < info.trim_floor) REQUIRE(yl == 0.0);
      }
      double mass = simpson([&](double y) { return fit.g_hat(y); }, 0, top + 10 * info.bandwidth);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("trimming zeroes the hazard where the density is small") {
  auto ys = exp_gy_sample(2000, 9);
  HazardOptions opts;
  opts.trim_floor = 0.05;
  auto fit = estimate_hazard(ys, opts);
  CHECK(fit.info().trimmed > 0);
  bool saw_trim = false;
  for (double y = 0; y < 12; y += 0.01)
    if (fit.g_hat(y) < 0.05) {
      saw_trim = true;
      REQUIRE(fit.lambda_hat(y) == 0.0);
    }
  CHECK(saw_trim);
}

TEST_CASE("symmetrized estimate is seed-controlled") {
  auto ys = exp_gy_sample(3000, 10);
  auto a = estimate_hazard_symmetrized(ys, {1, 2});
  auto b = estimate_hazard_symmetrized(ys, {1, 2});
  auto c = estimate_hazard_symmetrized(ys, {1, 3});
  bool differs = false;
  for (double y = 0.05; y < 5; y += 0.05) {
    REQUIRE(a.ylambda_hat(y) == b.ylambda_hat(y));
    differs |= a.ylambda_hat(y) != c.ylambda_hat(y);
  }
  CHECK(differs);
  REQUIRE(a.info().seed);
  CHECK(*a.info().seed == SeedSpec{1, 2});
}

TEST_CASE("symmetrized pointwise accuracy on [0.5, 2]") {
  auto ys = exp_gy_sample(10000, 12);
  for (double y : {0.5, 1.0, 1.5, 2.0}) {
    std::vector<double> vals;
    for (std::uint64_t s = 0; s < 50; ++s) vals.push_back(estimate_hazard_symmetrized(ys, {100, s}).ylambda_hat(y));
    CHECK_MESSAGE(std::abs(stats::median(vals) - y) <= 0.15, y);
  }
}

TEST_CASE("zero hazard gives zero I1") {
  auto fit = HazardFit::from_functions([](double) { return 0.0; }, [](double y) { return std::exp(-y); },
                                       {0.0, 1.0, 5.0, 40.0});
  CHECK(estimate_i1(fit) == 0.0);
  std::vector<double> grid;
  for (double y = 0; y <= 50; y += 0.25) grid.push_back(y);
  auto truth = HazardFit::from_functions([](double y) { return y; }, [](double y) { return std::exp(-y); }, grid);
  CHECK(estimate_i1(truth) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("convergence trends over seeds") {
  for (int method = 0; method < 2; ++method) {
    std::vector<double> err_small, err_large, i1_small, i1_large;
    for (std::uint64_t s = 0; s < 20; ++s) {
      for (std::size_t n : {1000u, 16000u}) {
        auto ys = exp_gy_sample(n, 1000 + s);
        auto fit = method == 0 ? estimate_hazard(ys) : estimate_hazard_symmetrized(ys, {2000, s});
        (n == 1000 ? err_small : err_large).push_back(weighted_error(fit));
        (n == 1000 ? i1_small : i1_large).push_back(std::abs(fit.i1_hat() - 2));
      }
    }
    CHECK(stats::median(err_large) < stats::median(err_small));
    if (method == 0) CHECK(stats::median(i1_large) < stats::median(i1_small));
  }
}

TEST_CASE("method names") {
  CHECK(hazard_method_from_string("kernel") == HazardMethod::kKernel);
  CHECK(hazard_method_from_string("symmetrized") == HazardMethod::kSymmetrized);
  CHECK(to_string(HazardMethod::kSymmetrized) == "symmetrized");
  CHECK_THROWS_AS(hazard_method_from_string("spline"), InvalidArgument);
}

}
