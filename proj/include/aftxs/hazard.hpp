#pragma once

#include "aftxs/rng.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace aftxs {

struct SilvermanScaled {
  double c = 2.0;  // h = c * 1.06 * sd(Y) * n^{-1/5}
};
struct FixedBandwidth {
  double h = 1.0;
};
using BandwidthRule = std::variant<SilvermanScaled, FixedBandwidth>;

struct HazardOptions {
  BandwidthRule bandwidth = SilvermanScaled{};
  /// Density floor δ_n = n^{-trim_exponent} * max ĝ_Y unless `trim_floor` is set.
  double trim_exponent = 1.0;
  std::optional<double> trim_floor;
  /// Clip |y λ̂(y)| <= c_n with c_n = max(ln n, 1) unless `clip_bound` is set.
  std::optional<double> clip_bound;
  /// Number of cells of the evaluation grid.
  std::size_t grid_cells = 1024;
};

enum class HazardMethod { kKernel, kSymmetrized, kSupplied };

std::string to_string(HazardMethod m);
HazardMethod hazard_method_from_string(const std::string& s);

/// Gaussian-kernel density estimate of a sample on the real line. Values and
/// first derivatives are tabulated with their two next derivatives on a
/// uniform grid and evaluated by cubic Hermite interpolation; `exact_*`
/// evaluate the kernel sums directly.
class KernelDensity {
 public:
  /// `points` are the kernel centres; the estimate is Σ φ((x - p)/h) / (n h)
  /// with n = `normaliser` (the reflected estimator passes 2n centres and n).
  KernelDensity(std::vector<double> points, double normaliser, double bandwidth, double lo, double hi,
                std::size_t cells);

  double value(double x) const;
  double derivative(double x) const;
  double exact_value(double x) const;
  double exact_derivative(double x) const;

  double bandwidth() const { return h_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::span<const double> grid() const { return grid_; }
  double max_value() const;

 private:
  struct Sums {
    double d0, d1, d2, d3;
  };
  Sums sums(double x) const;
  double hermite(std::span<const double> f, std::span<const double> df, double x) const;

  std::vector<double> points_;  // sorted
  double norm_, h_, lo_, hi_, step_;
  std::vector<double> grid_, f0_, f1_, f2_, f3_;
};

/// Reflected (at 0) Gaussian-kernel estimate of the density of positive data
/// and its derivative, with grid [0, max + 8h].
std::shared_ptr<const KernelDensity> fit_kernel_density(std::span<const double> ys, const HazardOptions& opts);

struct HazardFitInfo {
  HazardMethod method = HazardMethod::kKernel;
  std::size_t n = 0;
  double bandwidth = 0.0;
  double trim_floor = 0.0;
  double clip_bound = 0.0;
  std::size_t trimmed = 0;  // grid nodes where the density floor zeroed λ̂
  std::size_t clipped = 0;  // grid nodes where |y λ̂| hit the clip bound
  std::optional<SeedSpec> seed;
};

/// Immutable estimate of g_Y, λ and I₁ = ∫ y² λ² g_Y.
class HazardFit {
 public:
  using Fn = std::function<double(double)>;

  /// A fit built from given functions (e.g. the true hazard); `breaks` is the
  /// grid used for ∫ quadratures over the support.
  static HazardFit from_functions(Fn ylambda, Fn g, std::vector<double> breaks, std::size_t n = 0);

  double ylambda_hat(double y) const;
  /// ylambda_hat(y) / y for y > 0 and 0 at y = 0.
  double lambda_hat(double y) const;
  double g_hat(double y) const;
  double i1_hat() const { return i1_; }
  const HazardFitInfo& info() const { return info_; }
  std::span<const double> breaks() const { return *breaks_; }

  /// ∫ f(y) ĝ_Y(y) dy over the support grid.
  double integrate_against_g(const Fn& f) const;

 private:
  friend HazardFit estimate_hazard(std::span<const double>, const HazardOptions&);
  friend HazardFit estimate_hazard_symmetrized(std::span<const double>, const SeedSpec&, const HazardOptions&);
  HazardFit() = default;

  Fn ylambda_;
  Fn g_;
  std::shared_ptr<const std::vector<double>> breaks_;
  double i1_ = 0.0;
  HazardFitInfo info_;
};

/// λ̂ = max(0, -ĝ'/ĝ) where ĝ >= δ_n (else 0), then y λ̂ clipped at c_n.
HazardFit estimate_hazard(std::span<const double> ys, const HazardOptions& opts = {});

/// Randomly signed sample X_i = B_i Y_i; ĥ(x) = x ĝ'/ĝ on the symmetric
/// sample (same trim/clip); y λ̂(y) = (|ĥ(y)| + |ĥ(-y)|) / 2.
HazardFit estimate_hazard_symmetrized(std::span<const double> ys, const SeedSpec& seed, const HazardOptions& opts = {});

HazardFit estimate_hazard_with(HazardMethod method, std::span<const double> ys, const SeedSpec& seed,
                               const HazardOptions& opts = {});

/// Î₁ = ∫ y² λ̂² ĝ_Y dy.
double estimate_i1(const HazardFit& fit);

/// Writes "y,g_hat,lambda_hat" rows on the fit's grid.
void write_hazard_csv(const HazardFit& fit, const std::string& path);

}  // namespace aftxs
