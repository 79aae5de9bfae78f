#pragma once

#include "aftxs/hazard.hpp"
#include "aftxs/information.hpp"
#include "aftxs/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aftxs {

struct NewtonOptions {
  double tolerance = 1e-10;  // on the norm of the estimating equation
  int max_iterations = 100;
  double bracket = 20.0;     // scalar bisection fallback on [-bracket, bracket]
};

struct RootResult {
  Vector theta;
  int iterations = 0;
  bool used_bisection = false;
};

/// Moment estimator under a known core law: solves Z̄_n = E_θ Z, closed form
/// θ = Σ⁻¹(mean_h - Z̄_n) for Gaussian h. Throws NoSolutionError when Z̄_n
/// lies outside the range of θ ↦ E_θ Z.
RootResult preliminary_known_h(const Dataset& data, const CovariateModel& cov, const NewtonOptions& opts = {});

/// M-estimator: root of (1/n) Σ Z_i e^{θᵀZ_i} = 0 by damped Newton from 0.
/// Throws NoRootError when a covariate coordinate never changes sign.
RootResult preliminary_unknown_h(const Dataset& data, const NewtonOptions& opts = {});

/// -(z - E Z) y λ̂(y) with y = e^{θᵀz} x.
Vector efficient_score_known_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                               const Observation& obs);

/// (Î₁ Σ_Z)⁻¹ times the known-h score.
Vector influence_known_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                         const Observation& obs);

/// -(z - Z̄)(1 + y λ̂(y)) + M̂₁ M̂₂⁻¹ z e^{θᵀz}.
Vector efficient_score_unknown_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                                 const Observation& obs);

/// Î = S_Z² Ê(1 + Yλ̂)² + M̂₁ M̂₂⁻¹ M̂₁ with Ê(1 + Yλ̂)² = 1 + 2∫yλ̂ĝ + ∫(yλ̂)²ĝ.
Matrix fisher_estimate_unknown_h(const TiltedMoments& moments, const HazardFit& fit);

/// Î⁻¹ times the unknown-h score.
Vector influence_unknown_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                           const Observation& obs);

struct EstimatorOptions {
  HazardMethod hazard = HazardMethod::kKernel;
  HazardOptions hazard_options;
  /// Used for every part when `hazard` is kSupplied (e.g. the true hazard).
  std::optional<HazardFit> supplied_hazard;
  /// Seeds the sign randomisation of the symmetrized hazard estimator.
  SeedSpec seed;
  NewtonOptions newton;
};

struct EstimationDiagnostics {
  std::string estimator;
  Variant variant = Variant::kKnownH;
  std::size_t n = 0;
  int newton_iterations = 0;
  bool used_bisection = false;
  std::string split_scheme;
  std::vector<HazardFitInfo> hazard_fits;
};

struct EstimationResult {
  Vector theta_hat;
  Vector theta_prelim;
  Matrix info_hat;
  Vector stderr;  // sqrt(diag(info_hat⁻¹) / n); +inf when info_hat is singular
  EstimationDiagnostics diagnostics;
};

/// Preliminary estimate with its asymptotic standard errors (Σ_Z⁻¹ for the
/// moment estimator, M̂₁⁻¹M̂₂M̂₁⁻¹ for the M-estimator).
EstimationResult preliminary(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                             const EstimatorOptions& opts = {});

/// One-step estimator with sample splitting: nuisance fits on the even-index
/// half correct with influence averages over the odd half and vice versa.
EstimationResult one_step_split(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                                const EstimatorOptions& opts = {});

/// One-step estimator with nuisance fits and correction on the full sample.
EstimationResult one_step_plugin(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                                 const EstimatorOptions& opts = {});

}  // namespace aftxs
