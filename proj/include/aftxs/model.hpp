#pragma once

#include "aftxs/linalg.hpp"
#include "aftxs/quadrature.hpp"
#include "aftxs/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aftxs {

/// Regression coefficient vector, length k >= 1, finite entries.
class RegressionParam {
 public:
  explicit RegressionParam(Vector theta);
  RegressionParam(std::initializer_list<double> values);

  const Vector& value() const { return theta_; }
  Eigen::Index dim() const { return theta_.size(); }

 private:
  Vector theta_;
};

// ---------------------------------------------------------------------------
// Baseline law G of V.

struct Exponential {
  double rate = 1.0;
};
struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};

/// Density tabulated at ascending knots and interpolated linearly between them
/// (so the survival function is piecewise quadratic and monotone). When the
/// last tabulated value is positive the density continues past the grid as a
/// power law whose exponent is read off the last two knots; the support is
/// truncated where the survival function drops below kTailTruncation.
struct Tabulated {
  std::vector<double> v;
  std::vector<double> g;
};

inline constexpr double kTailTruncation = 1e-12;

using BaselineKind = std::variant<Exponential, Weibull, Gamma, Tabulated>;

class BaselineModel {
 public:
  /// Throws InvalidArgument for non-positive parameters or a tabulated density
  /// that cannot be normalised.
  explicit BaselineModel(BaselineKind kind);

  const BaselineKind& kind() const { return kind_; }
  std::string name() const;

  double density(double v) const;
  double survival(double v) const;
  /// g/Ḡ. Throws DomainError where Ḡ(v) = 0 or past a tabulated support.
  double hazard(double v) const;
  /// v * hazard(v), evaluated without forming Ḡ where a closed form exists.
  double v_hazard(double v) const;

  /// E_g V (may be +inf for a heavy tabulated tail).
  double mean_v() const { return mean_v_; }
  /// Right end of the support used by quadratures (+inf for parametric laws).
  double support_end() const { return support_end_; }
  /// Natural time scale used to map [0, inf) quadratures.
  double time_scale() const;

  /// Draw from g.
  double draw(CounterRng& rng) const;
  /// Draw from the length-biased density v g(v) / E_g V.
  double draw_length_biased(CounterRng& rng) const;

  /// Tail diagnostics for tabulated laws: exponent beta of g(v) ~ v^{-beta}
  /// past the grid (nullopt when the density ends at zero or for parametric laws).
  std::optional<double> tail_exponent() const;

  /// ∫ v^2 g^2/Ḡ over the power-law tail past support_end() (tabulated
  /// only; +inf when divergent, 0 for parametric laws).
  double tail_c2_integral() const;

  /// Knots of a tabulated law (empty for parametric laws).
  std::vector<double> breakpoints() const;

  /// ∫ f over [0, support_end()), split at tabulated knots.
  quad::Result integrate_over_support(const quad::Integrand& f, const std::string& name,
                                      const quad::Options& opts = {}) const;

 private:
  struct TableData;
  BaselineKind kind_;
  double mean_v_ = 0.0;
  double support_end_ = 0.0;
  std::shared_ptr<const TableData> table_;
};

// ---------------------------------------------------------------------------
// Core covariate law h of W.

struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};
struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};
struct DiscreteLaw {
  std::vector<double> points;
  std::vector<double> probs;
};
using ScalarLaw = std::variant<NormalLaw, UniformLaw, DiscreteLaw>;

struct GaussianVector {
  Vector mean;
  Matrix cov;
};
struct DiscreteSupport {
  std::vector<Vector> points;
  std::vector<double> probs;
};
struct ProductOfScalars {
  std::vector<ScalarLaw> laws;
};
using CovariateKind = std::variant<GaussianVector, DiscreteSupport, ProductOfScalars>;

/// Exponential moments E_h[e^{tᵀW}], E_h[W e^{tᵀW}], E_h[WWᵀ e^{tᵀW}].
struct ExpMoments {
  double m0 = 0.0;
  Vector m1;
  Matrix m2;
};

class CovariateModel {
 public:
  /// Throws InvalidArgument on shape mismatch, negative or non-normalised
  /// probabilities, non-symmetric covariance.
  explicit CovariateModel(CovariateKind kind);

  const CovariateKind& kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  std::string name() const;
  bool is_discrete() const;

  /// h(z) with respect to the law's dominating measure (counting measure for
  /// discrete coordinates, Lebesgue otherwise).
  double density(const Vector& z) const;

  /// Closed forms for Gaussian coordinates, exact sums for discrete ones,
  /// adaptive quadrature for uniform coordinates.
  ExpMoments exp_moments(const Vector& t) const;

  Vector mean() const;
  Matrix covariance() const;

  /// Draw from the tilted law e^{-θᵀz} h(z) / E_h e^{-θᵀW}; theta = 0 gives h.
  Vector draw_tilted(const Vector& theta, CounterRng& rng) const;

 private:
  CovariateKind kind_;
  Eigen::Index dim_ = 0;
  Matrix chol_;  // lower Cholesky factor for GaussianVector
};

enum class Variant { kKnownH, kUnknownHMeanZero };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelSpec {
  ModelSpec(RegressionParam theta, BaselineModel baseline, CovariateModel covariates, Variant variant);

  RegressionParam theta;
  BaselineModel baseline;
  CovariateModel covariates;
  Variant variant;
};

struct Observation {
  double x = 0.0;
  Vector z;
};

struct Dataset {
  std::vector<Observation> records;
  std::optional<SeedSpec> seed;

  std::size_t size() const { return records.size(); }
  Eigen::Index dim() const { return records.empty() ? 0 : records.front().z.size(); }
  /// Checks x > 0, finite covariates of common dimension, nonempty.
  void check() const;
};

// ---------------------------------------------------------------------------
// Validation.

struct ConditionCheck {
  std::string id;        // "C1", ..., "H2"
  std::string quantity;  // what was evaluated
  double value = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;
  bool ok() const;
  const ConditionCheck* find(const std::string& id) const;
  /// Throws ModelError listing failing conditions.
  void require() const;
};

inline constexpr double kMeanZeroTolerance = 1e-8;

ValidationReport validate_model(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Densities.

/// y = exp(θᵀz) x. Throws NumericalError on overflow, naming `record`.
double pseudo_response(const RegressionParam& theta, const Observation& obs, std::size_t record = 0);
double pseudo_response(const Vector& theta, const Observation& obs, std::size_t record = 0);

/// g_Y(y) = Ḡ(y) / E_g V on [0, inf), 0 for y < 0.
double density_gy(const BaselineModel& baseline, double y);

/// Joint density of (X, Z): Ḡ(e^{θᵀz}x) h(z) / (E_g V · E_h e^{-θᵀW}); 0 for x <= 0.
double joint_density(const ModelSpec& spec, double x, const Vector& z);

/// Marginal of Z: e^{-θᵀz} h(z) / E_h e^{-θᵀW}.
double covariate_density(const ModelSpec& spec, const Vector& z);

/// e^{θᵀz} Ḡ(e^{θᵀz} x) / E_g V.
double conditional_density(const ModelSpec& spec, double x, const Vector& z);

/// λ(y) = g(y)/Ḡ(y).
double true_hazard(const BaselineModel& baseline, double y);

}  // namespace aftxs
