#pragma once

#include "aftxs/error.hpp"
#include "aftxs/estimators.hpp"
#include "aftxs/information.hpp"
#include "aftxs/sampler.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aftxs {

enum class EstimatorKind { kPrelim, kOneStepSplit, kOneStepPlugin };
enum class SamplerKind { kDirect, kMechanistic };

std::string to_string(EstimatorKind e);
EstimatorKind estimator_from_string(const std::string& s);
std::string to_string(SamplerKind s);
SamplerKind sampler_from_string(const std::string& s);

struct StudyConfig {
  explicit StudyConfig(ModelSpec s) : spec(std::move(s)) {}

  ModelSpec spec;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::vector<EstimatorKind> estimators{EstimatorKind::kPrelim, EstimatorKind::kOneStepSplit};
  SamplerKind sampler = SamplerKind::kDirect;
  PoolConfig pool;
  HazardMethod hazard_method = HazardMethod::kKernel;
  HazardOptions hazard;
  std::uint64_t base_seed = 0;
  /// Keep every replication's estimate in the report.
  bool keep_estimates = false;

  /// Throws InvalidArgument unless R >= 1, n >= 8 and the estimator list is
  /// nonempty without duplicates.
  void check() const;
};

struct ReplicationFailure {
  std::size_t replication = 0;
  std::string code;
  std::string message;
};

struct EstimatorSummary {
  EstimatorKind kind = EstimatorKind::kPrelim;
  std::size_t successes = 0;
  std::vector<ReplicationFailure> failures;
  std::map<std::string, std::size_t> failure_counts;  // by error code name
  Vector mean;
  Vector bias;
  Matrix n_var;
  Vector coverage;          // per coordinate, nominal 95% Wald intervals
  Vector efficiency_ratio;  // diag(n Var) / diag(I⁻¹)
  Vector mean_stderr;
  /// Per-replication estimates (NaN rows for failures) when requested.
  std::vector<Vector> estimates;
};

struct StudyReport {
  StudyConfig config;
  InformationBound oracle;
  std::vector<EstimatorSummary> estimators;

  const EstimatorSummary* find(EstimatorKind kind) const;
};

/// Seed of replication r; its dataset and estimator randomness use children 0 and 1.
SeedSpec replication_seed(std::uint64_t base_seed, std::size_t r);

/// Runs R replications on `jobs` worker threads (0 = hardware concurrency).
/// The report depends only on the config. Throws ModelError before the first
/// replication when the spec fails validation.
StudyReport run_study(const StudyConfig& config, unsigned jobs = 1);

/// Reads a `x,z1..zk` CSV and runs the preliminary and the chosen estimator.
EstimationResult estimate_from_file(const std::string& path, Variant variant,
                                    const std::optional<CovariateModel>& known_h, EstimatorKind estimator,
                                    const EstimatorOptions& options = {});

std::string error_code_name(ErrorCode code);

}  // namespace aftxs
