#include "aftxs/study.hpp"

#include "aftxs/error.hpp"
#include "aftxs/io.hpp"
#include "aftxs/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace aftxs {

std::string to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::kPrelim:
      return "prelim";
    case EstimatorKind::kOneStepSplit:
      return "one_step_split";
    case EstimatorKind::kOneStepPlugin:
      return "one_step_plugin";
  }
  return "?";
}

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "prelim") return EstimatorKind::kPrelim;
  if (s == "one_step_split") return EstimatorKind::kOneStepSplit;
  if (s == "one_step_plugin") return EstimatorKind::kOneStepPlugin;
  throw InvalidArgument("unknown estimator '" + s + "' (prelim, one_step_split, one_step_plugin)");
}

std::string to_string(SamplerKind s) { return s == SamplerKind::kDirect ? "direct" : "mechanistic"; }

SamplerKind sampler_from_string(const std::string& s) {
  if (s == "direct") return SamplerKind::kDirect;
  if (s == "mechanistic") return SamplerKind::kMechanistic;
  throw InvalidArgument("unknown sampler '" + s + "' (direct, mechanistic)");
}

std::string error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kModel:
      return "Model";
    case ErrorCode::kNumerical:
      return "Numerical";
    case ErrorCode::kNoRoot:
      return "NoRoot";
    case ErrorCode::kNoSolution:
      return "NoSolution";
    case ErrorCode::kDomain:
      return "Domain";
    case ErrorCode::kIo:
      return "Io";
  }
  return "Unknown";
}

void StudyConfig::check() const {
  if (replications < 1) throw InvalidArgument("study needs at least one replication");
  if (n < 8) throw InvalidArgument("study sample size must be at least 8");
  if (estimators.empty()) throw InvalidArgument("study needs at least one estimator");
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    for (std::size_t j = i + 1; j < estimators.size(); ++j) {
      if (estimators[i] == estimators[j]) throw InvalidArgument("duplicate estimator " + to_string(estimators[i]));
    }
  }
  if (pool.pool_factor < 1) throw InvalidArgument("pool_factor must be positive");
}

const EstimatorSummary* StudyReport::find(EstimatorKind kind) const {
  for (const auto& e : estimators) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

SeedSpec replication_seed(std::uint64_t base_seed, std::size_t r) {
  return SeedSpec{base_seed, 0}.child(static_cast<std::uint64_t>(r));
}

namespace {

struct Outcome {
  bool ok = false;
  Vector theta;
  Vector stderr;
  ReplicationFailure failure;
};

EstimationResult run_estimator(EstimatorKind kind, const Dataset& data, Variant variant,
                               const std::optional<CovariateModel>& known_h, const EstimatorOptions& opts) {
  switch (kind) {
    case EstimatorKind::kPrelim:
      return preliminary(data, variant, known_h, opts);
    case EstimatorKind::kOneStepSplit:
      return one_step_split(data, variant, known_h, opts);
    case EstimatorKind::kOneStepPlugin:
      return one_step_plugin(data, variant, known_h, opts);
  }
  throw InvalidArgument("unknown estimator");
}

std::vector<Outcome> run_replication(const StudyConfig& cfg, std::size_t r) {
  const SeedSpec seed = replication_seed(cfg.base_seed, r);
  const Variant variant = cfg.spec.variant;
  const std::optional<CovariateModel> known_h =
      variant == Variant::kKnownH ? std::optional<CovariateModel>(cfg.spec.covariates) : std::nullopt;
  EstimatorOptions opts;
  opts.hazard = cfg.hazard_method;
  opts.hazard_options = cfg.hazard;
  opts.seed = seed.child(1);

  std::vector<Outcome> out(cfg.estimators.size());
  auto fail_all = [&](const std::string& code, const std::string& msg) {
    for (auto& o : out) o.failure = {r, code, msg};
  };
  Dataset data;
  try {
    data = cfg.sampler == SamplerKind::kDirect ? sample_direct(cfg.spec, cfg.n, seed.child(0))
                                               : sample_mechanistic(cfg.spec, cfg.n, seed.child(0), cfg.pool);
  } catch (const Error& e) {
    fail_all(error_code_name(e.code()), e.what());
    return out;
  } catch (const std::exception& e) {
    fail_all("Internal", e.what());
    return out;
  }
  for (std::size_t j = 0; j < cfg.estimators.size(); ++j) {
    try {
      const EstimationResult res = run_estimator(cfg.estimators[j], data, variant, known_h, opts);
      out[j].ok = true;
      out[j].theta = res.theta_hat;
      out[j].stderr = res.stderr;
    } catch (const Error& e) {
      out[j].failure = {r, error_code_name(e.code()), e.what()};
    } catch (const std::exception& e) {
      out[j].failure = {r, "Internal", e.what()};
    }
  }
  return out;
}

EstimatorSummary summarise(const StudyConfig& cfg, const InformationBound& oracle, std::size_t j,
                           const std::vector<std::vector<Outcome>>& outcomes) {
  const Eigen::Index k = cfg.spec.theta.value().size();
  const Vector& truth = cfg.spec.theta.value();
  EstimatorSummary s;
  s.kind = cfg.estimators[j];
  std::vector<Vector> thetas, ses;
  for (const auto& rep : outcomes) {
    const Outcome& o = rep[j];
    if (o.ok) {
      thetas.push_back(o.theta);
      ses.push_back(o.stderr);
    } else {
      s.failures.push_back(o.failure);
      ++s.failure_counts[o.failure.code];
    }
    if (cfg.keep_estimates) {
      s.estimates.push_back(o.ok ? o.theta : Vector::Constant(k, std::numeric_limits<double>::quiet_NaN()));
    }
  }
  s.successes = thetas.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean = Vector::Constant(k, nan);
  s.bias = Vector::Constant(k, nan);
  s.n_var = Matrix::Constant(k, k, nan);
  s.coverage = Vector::Constant(k, nan);
  s.efficiency_ratio = Vector::Constant(k, nan);
  s.mean_stderr = Vector::Constant(k, nan);
  if (thetas.empty()) return s;
  s.mean = stats::mean(thetas);
  s.bias = s.mean - truth;
  s.mean_stderr = stats::mean(ses);
  const double z975 = 1.959963984540054;
  s.coverage = Vector::Zero(k);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      if (std::abs(thetas[i](c) - truth(c)) <= z975 * ses[i](c)) s.coverage(c) += 1.0;
    }
  }
  s.coverage /= static_cast<double>(thetas.size());
  if (thetas.size() >= 2) {
    s.n_var = static_cast<double>(cfg.n) * stats::covariance(thetas);
    s.efficiency_ratio = s.n_var.diagonal().array() / oracle.bound.diagonal().array();
  }
  return s;
}

}  // namespace

StudyReport run_study(const StudyConfig& config, unsigned jobs) {
  config.check();
  validate_model(config.spec).require();
  StudyReport report{config, fisher_information(config.spec, config.spec.variant), {}};

  const std::size_t R = config.replications;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, R));

  std::vector<std::vector<Outcome>> outcomes(R);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < R;) outcomes[r] = run_replication(config, r);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  for (std::size_t j = 0; j < config.estimators.size(); ++j) {
    report.estimators.push_back(summarise(config, report.oracle, j, outcomes));
  }
  return report;
}

EstimationResult estimate_from_file(const std::string& path, Variant variant,
                                    const std::optional<CovariateModel>& known_h, EstimatorKind estimator,
                                    const EstimatorOptions& options) {
  const Dataset data = io::read_dataset_csv(path);
  return run_estimator(estimator, data, variant, known_h, options);
}

}  // namespace aftxs
