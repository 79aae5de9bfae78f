#include "doctest.h"

#include "aftxs/aftxs.h"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

const std::string kEx = AFTXS_EXAMPLES_DIR;

std::string take(char* s) {
  std::string out = s ? s : "";
  aftxs_string_free(s);
  return out;
}

aftxs_spec* read_spec(const std::string& name) {
  aftxs_spec* spec = nullptr;
  REQUIRE(aftxs_spec_read((kEx + "/" + name).c_str(), &spec) == AFTXS_OK);
  return spec;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(aftxs_version()).size() > 0);
  CHECK(std::string(aftxs_status_name(AFTXS_E_NO_ROOT)) == "no root");
  CHECK(std::string(aftxs_status_name(AFTXS_OK)) == "ok");
}

TEST_CASE("spec handles") {
  auto* spec = read_spec("exp_gauss.json");
  size_t k = 0;
  CHECK(aftxs_spec_dim(spec, &k) == AFTXS_OK);
  CHECK(k == 1);
  aftxs_variant v;
  CHECK(aftxs_spec_variant(spec, &v) == AFTXS_OK);
  CHECK(v == AFTXS_KNOWN_H);
  char* json = nullptr;
  REQUIRE(aftxs_spec_to_json(spec, &json) == AFTXS_OK);
  auto text = take(json);
  aftxs_spec* again = nullptr;
  CHECK(aftxs_spec_from_json(text.c_str(), &again) == AFTXS_OK);
  aftxs_spec_free(again);
  int ok = 0;
  char* rep = nullptr;
  CHECK(aftxs_spec_validate(spec, &ok, &rep) == AFTXS_OK);
  CHECK(ok == 1);
  CHECK(take(rep).find("C5") != std::string::npos);
  aftxs_spec_free(spec);

  aftxs_spec* bad = nullptr;
  CHECK(aftxs_spec_from_json("{\"theta\": [1]", &bad) == AFTXS_E_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(std::string(aftxs_last_error()).size() > 0);
  CHECK(aftxs_spec_read((kEx + "/nothing.json").c_str(), &bad) == AFTXS_E_IO);
  CHECK(aftxs_spec_dim(nullptr, &k) == AFTXS_E_INVALID_ARGUMENT);
}

TEST_CASE("information bounds") {
  auto* spec = read_spec("exp_gauss.json");
  double info = 0, bound = 0;
  char* json = nullptr;
  REQUIRE(aftxs_information_bound(spec, AFTXS_KNOWN_H, &json, &info, &bound) == AFTXS_OK);
  CHECK(info == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(bound == doctest::Approx(0.5).epsilon(1e-8));
  auto j = nlohmann::json::parse(take(json));
  CHECK(j["info"][0][0].get<double>() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(aftxs_information_bound(spec, AFTXS_UNKNOWN_H_MEAN_ZERO, nullptr, &info, nullptr) == AFTXS_OK);
  CHECK(info == doctest::Approx(5.6230).epsilon(1e-4));
  aftxs_spec_free(spec);

  auto* pareto = read_spec("pareto_gauss.json");
  CHECK(aftxs_information_bound(pareto, AFTXS_KNOWN_H, nullptr, &info, nullptr) == AFTXS_E_MODEL);
  CHECK(std::string(aftxs_last_error()).find("C1") != std::string::npos);
  int ok = 1;
  char* rep = nullptr;
  CHECK(aftxs_spec_validate(pareto, &ok, &rep) == AFTXS_OK);
  CHECK(ok == 0);
  aftxs_string_free(rep);
  aftxs_spec_free(pareto);
}

TEST_CASE("simulate, csv and estimate") {
  auto* spec = read_spec("exp_gauss.json");
  aftxs_dataset* data = nullptr;
  REQUIRE(aftxs_simulate(spec, 2000, 42, AFTXS_SAMPLER_DIRECT, &data) == AFTXS_OK);
  size_t n = 0, k = 0;
  aftxs_dataset_shape(data, &n, &k);
  CHECK(n == 2000);
  CHECK(k == 1);

  std::string path = "capi_roundtrip.csv";
  REQUIRE(aftxs_dataset_write_csv(data, path.c_str()) == AFTXS_OK);
  aftxs_dataset* back = nullptr;
  REQUIRE(aftxs_dataset_read_csv(path.c_str(), &back) == AFTXS_OK);
  for (size_t i = 0; i < n; i += 97) {
    double x1, z1, x2, z2;
    aftxs_dataset_record(data, i, &x1, &z1);
    aftxs_dataset_record(back, i, &x2, &z2);
    CHECK(x1 == x2);
    CHECK(z1 == z2);
  }
  std::remove(path.c_str());
  double x, z;
  CHECK(aftxs_dataset_record(data, n, &x, &z) == AFTXS_E_INVALID_ARGUMENT);

  aftxs_estimate_options opts;
  aftxs_estimate_options_init(&opts);
  CHECK(opts.variant == AFTXS_KNOWN_H);
  CHECK(opts.estimator == AFTXS_ONE_STEP_SPLIT);
  double theta = 0;
  char* json = nullptr;
  REQUIRE(aftxs_estimate(back, spec, &opts, &json, &theta) == AFTXS_OK);
  auto j = nlohmann::json::parse(take(json));
  double se = j["stderr"][0].get<double>();
  CHECK(std::abs(theta - 0.5) < 4 * se);
  CHECK(aftxs_estimate(back, nullptr, &opts, nullptr, &theta) == AFTXS_E_INVALID_ARGUMENT);

  opts.variant = AFTXS_UNKNOWN_H_MEAN_ZERO;
  opts.hazard = AFTXS_HAZARD_SYMMETRIZED;
  CHECK(aftxs_estimate(back, nullptr, &opts, nullptr, &theta) == AFTXS_OK);
  CHECK(std::abs(theta - 0.5) < 0.3);

  aftxs_dataset_free(back);
  aftxs_dataset_free(data);
  aftxs_spec_free(spec);
}

TEST_CASE("estimation errors map to status codes") {
  double x[3] = {0.7, 1.3, 2.1};
  double z[3] = {1, 1, 1};
  aftxs_dataset* d = nullptr;
  REQUIRE(aftxs_dataset_from_arrays(3, 1, x, z, &d) == AFTXS_OK);
  aftxs_estimate_options opts;
  aftxs_estimate_options_init(&opts);
  opts.variant = AFTXS_UNKNOWN_H_MEAN_ZERO;
  opts.estimator = AFTXS_PRELIM;
  CHECK(aftxs_estimate(d, nullptr, &opts, nullptr, nullptr) == AFTXS_E_NO_ROOT);
  CHECK(std::string(aftxs_last_error()).find("does not pass through zero") != std::string::npos);
  aftxs_dataset_free(d);

  double badx[2] = {1.0, -1.0};
  aftxs_dataset* b = nullptr;
  CHECK(aftxs_dataset_from_arrays(2, 1, badx, z, &b) == AFTXS_E_INVALID_ARGUMENT);
  CHECK(aftxs_dataset_read_csv((kEx + "/bad_row.csv").c_str(), &b) == AFTXS_E_INVALID_ARGUMENT);
  CHECK(std::string(aftxs_last_error()).find("line 3") != std::string::npos);
}

TEST_CASE("study through the C API is deterministic") {
  char* a = nullptr;
  char* b = nullptr;
  std::string cfg = kEx + "/study_small.json";
  REQUIRE(aftxs_study_run(cfg.c_str(), 1, 0, &a) == AFTXS_OK);
  REQUIRE(aftxs_study_run(cfg.c_str(), 4, 0, &b) == AFTXS_OK);
  auto ta = take(a), tb = take(b);
  CHECK(ta == tb);
  auto j = nlohmann::json::parse(ta);
  CHECK(j["estimators"].size() == 3);
}
