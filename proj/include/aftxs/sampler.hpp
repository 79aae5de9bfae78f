#pragma once

#include "aftxs/model.hpp"

#include <cstddef>

namespace aftxs {

struct PoolConfig {
  /// The mechanistic sampler simulates pool_factor * n core individuals.
  std::size_t pool_factor = 20;
};

/// Exact sampler: Z from the tilted covariate marginal, V from the
/// length-biased baseline, U on (0, 1]; Y = U V and X = e^{-θᵀZ} Y.
/// Record i depends only on (seed, i), so the output is order independent.
Dataset sample_direct(const ModelSpec& spec, std::size_t n, const SeedSpec& seed);

/// Simulates the core population (W ~ h, V ~ g, T = e^{-θᵀW} V), resamples n
/// individuals with probability proportional to T and censors X = U T.
/// Approximate: the pool is finite.
Dataset sample_mechanistic(const ModelSpec& spec, std::size_t n, const SeedSpec& seed, const PoolConfig& pool = {});

/// One draw from v g(v) / E_g V.
double length_biased_draw(const BaselineModel& baseline, const SeedSpec& seed);

/// Pseudo-responses e^{θᵀz_i} x_i for every record.
std::vector<double> pseudo_responses(const Vector& theta, const Dataset& data);

}  // namespace aftxs
