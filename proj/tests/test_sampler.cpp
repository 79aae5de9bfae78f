#include "doctest.h"
#include "oracle.hpp"

#include "aftxs/error.hpp"
#include "aftxs/sampler.hpp"
#include "aftxs/stats.hpp"

#include <cmath>

using namespace aftxs;

namespace {

ModelSpec spec_with(BaselineModel b, double theta) {
  return ModelSpec(RegressionParam{theta}, std::move(b),
                   CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}), Variant::kKnownH);
}

std::vector<double> column_x(const Dataset& d) {
  std::vector<double> v;
  for (auto& r : d.records) v.push_back(r.x);
  return v;
}
std::vector<double> column_z(const Dataset& d, int j = 0) {
  std::vector<double> v;
  for (auto& r : d.records) v.push_back(r.z(j));
  return v;
}

bool same(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.records[i].x != b.records[i].x || a.records[i].z != b.records[i].z) return false;
  return true;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("direct sampler is deterministic") {
  auto s = spec_with(BaselineModel(Exponential{1.0}), 0.5);
  auto a = sample_direct(s, 500, {3, 4});
  auto b = sample_direct(s, 500, {3, 4});
  CHECK(same(a, b));
  CHECK_FALSE(same(a, sample_direct(s, 500, {3, 5})));
  REQUIRE(a.seed);
  CHECK(*a.seed == SeedSpec{3, 4});
  // record i depends only on (seed, i)
  auto prefix = sample_direct(s, 100, {3, 4});
  for (std::size_t i = 0; i < 100; ++i) CHECK(prefix.records[i].x == a.records[i].x);
}

TEST_CASE("mechanistic sampler is deterministic") {
  auto s = spec_with(BaselineModel(Weibull{2.0, 1.0}), 0.5);
  CHECK(same(sample_mechanistic(s, 300, {8, 1}), sample_mechanistic(s, 300, {8, 1})));
  CHECK_THROWS_AS(sample_mechanistic(s, 10, {1, 1}, PoolConfig{1}), InvalidArgument);
}

TEST_CASE("mean of Y for the exponential baseline") {
  auto s = spec_with(BaselineModel(Exponential{1.0}), 0.5);
  const std::size_t n = 100000;
  auto d = sample_direct(s, n, {11, 0});
  auto ys = pseudo_responses(s.theta.value(), d);
  double ey = oracle::half_line([](double y) { return y * std::exp(-y); });
  double sd = std::sqrt(stats::variance(ys));
  CHECK(std::abs(stats::mean(ys) - ey) < 3 * sd / std::sqrt(double(n)));
  for (auto& r : d.records) REQUIRE(r.x > 0);
}

TEST_CASE("untilted covariate mean") {
  auto s = spec_with(BaselineModel(Exponential{1.0}), 0.0);
  const std::size_t n = 20000;
  auto zd = column_z(sample_direct(s, n, {5, 0}));
  auto zm = column_z(sample_mechanistic(s, n, {5, 0}));
  CHECK(std::abs(stats::mean(zd)) < 3 / std::sqrt(double(n)));
  CHECK(std::abs(stats::mean(zm)) < 4 / std::sqrt(double(n)));
}

TEST_CASE("length-biased draws") {
  const int n = 100000;
  for (auto [b, name] : {std::pair{BaselineModel(Exponential{1.0}), "exp"},
                         std::pair{BaselineModel(Weibull{2.0, 1.0}), "weibull"}}) {
    double ev = oracle::half_line([&](double v) { return v * b.density(v); });
    double ev2 = oracle::half_line([&](double v) { return v * v * b.density(v); });
    double ev3 = oracle::half_line([&](double v) { return v * v * v * b.density(v); });
    double m = ev2 / ev, sd = std::sqrt(ev3 / ev - m * m);
    std::vector<double> draws;
    for (int i = 0; i < n; ++i) draws.push_back(length_biased_draw(b, SeedSpec{77, std::uint64_t(i)}));
    CHECK_MESSAGE(std::abs(stats::mean(draws) - m) < 3 * sd / std::sqrt(double(n)), name);
  }
  CHECK(length_biased_draw(BaselineModel(Exponential{1.0}), {1, 2}) ==
        length_biased_draw(BaselineModel(Exponential{1.0}), {1, 2}));
  double ew = oracle::half_line([](double v) { return v * v * 2 * v * std::exp(-v * v); }) /
              oracle::half_line([](double v) { return v * 2 * v * std::exp(-v * v); });
  CHECK(ew == doctest::Approx(2 / std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("direct and mechanistic samplers agree in distribution") {
  auto s = spec_with(BaselineModel(Exponential{1.0}), 0.5);
  auto a = sample_direct(s, 20000, {21, 0});
  auto b = sample_mechanistic(s, 20000, {21, 1});
  CHECK(stats::ks_two_sample(column_x(a), column_x(b)).p_value > 0.001);
  CHECK(stats::ks_two_sample(column_z(a), column_z(b)).p_value > 0.001);
}

TEST_CASE("pseudo-responses follow g_Y and are independent of Z") {
  Tabulated tri{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}};
  for (auto b : {BaselineModel(Exponential{1.0}), BaselineModel(Weibull{2.0, 1.0}), BaselineModel(Gamma{2.5, 1.5}),
                 BaselineModel(tri)}) {
    auto s = spec_with(b, 0.5);
    const std::size_t n = 100000;
    auto d = sample_direct(s, n, {31, 0});
    auto ys = pseudo_responses(s.theta.value(), d);
    auto cdf = [&](double y) {
      if (y <= 0) return 0.0;
      return oracle::interval([&](double t) { return density_gy(b, t); }, 0, std::min(y, b.support_end()));
    };
    // a coarse CDF table keeps the oracle cheap
    std::vector<double> knots, vals;
    double top = *std::max_element(ys.begin(), ys.end());
    for (int i = 0; i <= 400; ++i) {
      knots.push_back(top * i / 400);
      vals.push_back(cdf(knots.back()));
    }
    auto table = [&](double y) {
      if (y >= top) return 1.0;
      double pos = y / top * 400;
      int i = int(pos);
      double w = pos - i;
      // linear interpolation error is far below 1/sqrt(n) at this resolution for smooth g_Y
      return (1 - w) * vals[i] + w * vals[i + 1];
    };
    CHECK_MESSAGE(stats::ks_one_sample(ys, table) < 1.5 / std::sqrt(double(n)), b.name());
    CHECK_MESSAGE(std::abs(stats::correlation(ys, column_z(d))) < 4 / std::sqrt(double(n)), b.name());
  }
}

TEST_CASE("tilted discrete and product covariates") {
  Vector m1(1), p1(1);
  m1 << -1;
  p1 << 1;
  ModelSpec s(RegressionParam{0.6}, BaselineModel(Exponential{1.0}), CovariateModel(DiscreteSupport{{m1, p1}, {0.5, 0.5}}),
              Variant::kKnownH);
  const std::size_t n = 40000;
  auto z = column_z(sample_direct(s, n, {2, 2}));
  CHECK(std::abs(stats::mean(z) + std::tanh(0.6)) < 4 / std::sqrt(double(n)));

  ModelSpec u(RegressionParam{1.0}, BaselineModel(Exponential{1.0}),
              CovariateModel(ProductOfScalars{{UniformLaw{-1, 1}}}), Variant::kKnownH);
  auto zu = column_z(sample_direct(u, n, {2, 3}));
  // tilted uniform: density ∝ e^{-z} on [-1, 1]
  double num = oracle::interval([](double t) { return t * std::exp(-t); }, -1, 1);
  double den = oracle::interval([](double t) { return std::exp(-t); }, -1, 1);
  CHECK(std::abs(stats::mean(zu) - num / den) < 4 * 0.6 / std::sqrt(double(n)));
}

}
