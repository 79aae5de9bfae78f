#pragma once

#include "aftxs/model.hpp"

namespace aftxs {

/// Moments of the observed covariate Z (tilted law) at a given θ.
struct TiltedMoments {
  Vector e_z;          // E Z
  Matrix sigma_z;      // Cov Z
  Matrix m1;           // E ZZᵀ e^{θᵀZ}
  Matrix m2;           // E ZZᵀ e^{2θᵀZ}
  double norm_const;   // E_h e^{-θᵀW}
};

/// Population tilted moments from the core law h.
TiltedMoments tilted_moments(const CovariateModel& cov, const Vector& theta);

/// Sample analogues: Z̄_n, S_Z² (divisor n-1), M̂₁, M̂₂ and 1/mean(e^{θᵀZ}).
TiltedMoments sample_tilted_moments(const std::vector<const Vector*>& zs, const Vector& theta);

struct YLambdaMoments {
  double m1;   // E Yλ(Y)
  double m2;   // E (Yλ(Y))²
  double m2p;  // E (1 + Yλ(Y))²
};

/// Quadrature of powers of yλ(y) against g_Y.
YLambdaMoments expected_ylambda_moments(const BaselineModel& baseline);

struct InformationBound {
  Matrix info;
  Matrix bound;  // info⁻¹
  Variant variant;
};

/// Σ_Z E(Yλ)².
InformationBound fisher_known_h(const ModelSpec& spec);

/// Σ_Z E(1 + Yλ)² + M₁ M₂⁻¹ M₁.
InformationBound fisher_unknown_h(const ModelSpec& spec);

InformationBound fisher_information(const ModelSpec& spec, Variant variant);

}  // namespace aftxs
