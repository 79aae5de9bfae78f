#include "aftxs/sampler.hpp"

#include "aftxs/error.hpp"

#include <algorithm>
#include <cmath>

namespace aftxs {
namespace {

// Substreams of the counter-based generator.
enum Substream : std::uint32_t {
  kDirectRecord = 1,
  kPoolMember = 2,
  kResample = 3,
  kSingleDraw = 4,
};

}  // namespace

Dataset sample_direct(const ModelSpec& spec, std::size_t n, const SeedSpec& seed) {
  if (n == 0) throw InvalidArgument("sample size must be positive");
  const Vector& theta = spec.theta.value();
  Dataset out;
  out.seed = seed;
  out.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, kDirectRecord, i);
    Observation& obs = out.records[i];
    obs.z = spec.covariates.draw_tilted(theta, rng);
    const double v = spec.baseline.draw_length_biased(rng);
    const double y = rng.uniform_pos() * v;
    obs.x = std::exp(-theta.dot(obs.z)) * y;
    if (!(obs.x > 0.0) || !std::isfinite(obs.x)) {
      throw NumericalError("direct sampler produced a non-positive or non-finite time at record " + std::to_string(i));
    }
  }
  return out;
}

Dataset sample_mechanistic(const ModelSpec& spec, std::size_t n, const SeedSpec& seed, const PoolConfig& pool) {
  if (n == 0) throw InvalidArgument("sample size must be positive");
  if (pool.pool_factor < 2) throw InvalidArgument("pool_factor must be at least 2");
  const Vector& theta = spec.theta.value();
  const Vector zero = Vector::Zero(theta.size());
  const std::size_t m = pool.pool_factor * n;

  std::vector<Vector> w(m);
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) {
    CounterRng rng(seed, kPoolMember, j);
    w[j] = spec.covariates.draw_tilted(zero, rng);
    t[j] = std::exp(-theta.dot(w[j])) * spec.baseline.draw(rng);
  }
  std::vector<double> cum(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    total += t[j];
    cum[j] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("mechanistic sampler: all pool weights are zero or the total is not finite");
  }

  Dataset out;
  out.seed = seed;
  out.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, kResample, i);
    const double target = rng.uniform_pos() * total;
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    const std::size_t j = std::min(static_cast<std::size_t>(it - cum.begin()), m - 1);
    out.records[i].z = w[j];
    out.records[i].x = rng.uniform_pos() * t[j];
  }
  return out;
}

double length_biased_draw(const BaselineModel& baseline, const SeedSpec& seed) {
  CounterRng rng(seed, kSingleDraw, 0);
  return baseline.draw_length_biased(rng);
}

std::vector<double> pseudo_responses(const Vector& theta, const Dataset& data) {
  std::vector<double> ys(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) ys[i] = pseudo_response(theta, data.records[i], i);
  return ys;
}

}  // namespace aftxs
