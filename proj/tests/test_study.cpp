#include "doctest.h"

#include "aftxs/error.hpp"
#include "aftxs/io.hpp"
#include "aftxs/study.hpp"

#include <cmath>

using namespace aftxs;

namespace {

ModelSpec flagship(Variant v = Variant::kKnownH) {
  return ModelSpec(RegressionParam{0.5}, BaselineModel(Exponential{1.0}),
                   CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}), v);
}

StudyConfig small_config(std::size_t n, std::size_t reps) {
  StudyConfig c(flagship());
  c.n = n;
  c.replications = reps;
  c.estimators = {EstimatorKind::kPrelim, EstimatorKind::kOneStepSplit, EstimatorKind::kOneStepPlugin};
  c.base_seed = 99;
  return c;
}

}  // namespace

TEST_SUITE("study") {

TEST_CASE("two-replication accounting") {
  auto rep = run_study(small_config(50, 2));
  REQUIRE(rep.estimators.size() == 3);
  CHECK(rep.oracle.info(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
  for (auto& e : rep.estimators) {
    CHECK(e.successes + e.failures.size() == 2);
    CHECK(e.mean.size() == 1);
    CHECK(e.bias.size() == 1);
    CHECK(e.n_var.rows() == 1);
    CHECK(e.coverage.size() == 1);
    CHECK(e.efficiency_ratio.size() == 1);
    CHECK(e.mean_stderr.size() == 1);
    if (e.successes == 2) {
      CHECK(std::isfinite(e.mean(0)));
      CHECK(e.bias(0) == doctest::Approx(e.mean(0) - 0.5));
      CHECK(e.efficiency_ratio(0) == doctest::Approx(e.n_var(0, 0) / 0.5));
    }
  }
  CHECK(rep.find(EstimatorKind::kOneStepPlugin) != nullptr);
}

TEST_CASE("reports are identical across runs and thread counts") {
  auto c = small_config(120, 16);
  c.keep_estimates = true;
  auto a = io::to_json(run_study(c, 1)).dump();
  CHECK(a == io::to_json(run_study(c, 1)).dump());
  CHECK(a == io::to_json(run_study(c, 5)).dump());
  CHECK(a == io::to_json(run_study(c, 0)).dump());
  c.base_seed = 100;
  CHECK(a != io::to_json(run_study(c, 1)).dump());
}

TEST_CASE("failed replications are recorded, not fatal") {
  // a single binary covariate: tiny samples often have one sign only
  StudyConfig c(ModelSpec(RegressionParam{1.5}, BaselineModel(Exponential{1.0}),
                          CovariateModel(DiscreteSupport{{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}, {0.5, 0.5}}),
                          Variant::kUnknownHMeanZero));
  c.n = 8;
  c.replications = 40;
  c.estimators = {EstimatorKind::kPrelim};
  c.base_seed = 5;
  auto rep = run_study(c, 2);
  auto& e = rep.estimators.front();
  CHECK(e.successes + e.failures.size() == 40);
  REQUIRE(!e.failures.empty());
  CHECK(e.failure_counts.at("NoRoot") > 0);
  CHECK(e.failures.front().message.find("does not pass through zero") != std::string::npos);
}

TEST_CASE("validation failure aborts before the first replication") {
  StudyConfig c(ModelSpec(RegressionParam{0.5}, BaselineModel(Exponential{1.0}),
                          CovariateModel(DiscreteSupport{{Vector::Constant(1, 1.0)}, {1.0}}), Variant::kKnownH));
  c.n = 20;
  c.replications = 3;
  CHECK_THROWS_AS(run_study(c), ModelError);
}

TEST_CASE("config checks") {
  auto c = small_config(4, 2);
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.n = 50;
  c.replications = 0;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.replications = 1;
  c.estimators = {EstimatorKind::kPrelim, EstimatorKind::kPrelim};
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.estimators = {};
  CHECK_THROWS_AS(c.check(), InvalidArgument);
}

TEST_CASE("replication seeds") {
  CHECK(replication_seed(7, 3) == replication_seed(7, 3));
  CHECK_FALSE(replication_seed(7, 3) == replication_seed(7, 4));
  CHECK_FALSE(replication_seed(7, 3) == replication_seed(8, 3));
}

TEST_CASE("names round-trip") {
  for (auto e : {EstimatorKind::kPrelim, EstimatorKind::kOneStepSplit, EstimatorKind::kOneStepPlugin})
    CHECK(estimator_from_string(to_string(e)) == e);
  for (auto s : {SamplerKind::kDirect, SamplerKind::kMechanistic}) CHECK(sampler_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(estimator_from_string("mle"), InvalidArgument);
  CHECK(error_code_name(ErrorCode::kNoRoot) == "NoRoot");
}

TEST_CASE("estimate_from_file") {
  std::string ex = AFTXS_EXAMPLES_DIR;
  try {
    estimate_from_file(ex + "/all_positive.csv", Variant::kUnknownHMeanZero, std::nullopt, EstimatorKind::kOneStepSplit);
    FAIL("expected NoRootError");
  } catch (const NoRootError& e) {
    CHECK(std::string(e.what()).find("does not pass through zero") != std::string::npos);
  }
  try {
    estimate_from_file(ex + "/bad_row.csv", Variant::kUnknownHMeanZero, std::nullopt, EstimatorKind::kPrelim);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("simulated file gives a sensible known-h estimate") {
  auto spec = flagship();
  auto d = sample_direct(spec, 2000, {61, 0});
  std::string path = "study_sim.csv";
  io::write_dataset_csv(d, path);
  auto r = estimate_from_file(path, Variant::kKnownH, spec.covariates, EstimatorKind::kOneStepSplit);
  CHECK(std::abs(r.theta_hat(0) - 0.5) < 4 * r.stderr(0));
  std::remove(path.c_str());
}

}
