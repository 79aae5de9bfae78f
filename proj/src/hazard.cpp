#include "aftxs/hazard.hpp"

#include "aftxs/error.hpp"
#include "aftxs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace aftxs {
namespace {

constexpr double kWindow = 8.0;  // kernel support cut-off in bandwidths; φ(8) ≈ 5e-15
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_sample(std::span<const double> ys) {
  if (ys.empty()) throw InvalidArgument("hazard estimation needs a nonempty sample");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!(ys[i] > 0.0) || !std::isfinite(ys[i])) {
      throw InvalidArgument("hazard estimation: observation " + std::to_string(i) + " is not positive and finite");
    }
  }
}

double sample_sd(std::span<const double> ys) {
  if (ys.size() < 2) return 0.0;
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / static_cast<double>(ys.size() - 1));
}

double choose_bandwidth(std::span<const double> ys, const HazardOptions& opts) {
  const double h = std::visit(
      Overloaded{[&](const SilvermanScaled& s) {
                   if (!(s.c > 0.0)) throw InvalidArgument("bandwidth scale c must be positive");
                   return s.c * 1.06 * sample_sd(ys) * std::pow(static_cast<double>(ys.size()), -0.2);
                 },
                 [](const FixedBandwidth& f) { return f.h; }},
      opts.bandwidth);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("kernel bandwidth must be positive (Silverman's rule needs a sample with spread)");
  }
  return h;
}

double clip_bound(std::size_t n, const HazardOptions& opts) {
  const double c = opts.clip_bound ? *opts.clip_bound : std::max(std::log(static_cast<double>(n)), 1.0);
  if (!(c > 0.0)) throw InvalidArgument("clip bound must be positive");
  return c;
}

double trim_floor(std::size_t n, double max_density, const HazardOptions& opts) {
  const double d = opts.trim_floor ? *opts.trim_floor
                                   : std::pow(static_cast<double>(n), -opts.trim_exponent) * max_density;
  if (!(d >= 0.0)) throw InvalidArgument("density floor must be nonnegative");
  return d;
}

}  // namespace

std::string to_string(HazardMethod m) {
  switch (m) {
    case HazardMethod::kKernel: return "kernel";
    case HazardMethod::kSymmetrized: return "symmetrized";
    case HazardMethod::kSupplied: return "supplied";
  }
  return "?";
}

HazardMethod hazard_method_from_string(const std::string& s) {
  if (s == "kernel") return HazardMethod::kKernel;
  if (s == "symmetrized") return HazardMethod::kSymmetrized;
  throw InvalidArgument("unknown hazard estimator '" + s + "' (expected kernel or symmetrized)");
}

// ---------------------------------------------------------------------------

KernelDensity::KernelDensity(std::vector<double> points, double normaliser, double bandwidth, double lo, double hi,
                             std::size_t cells)
    : points_(std::move(points)), norm_(normaliser), h_(bandwidth), lo_(lo), hi_(hi) {
  if (points_.empty() || !(norm_ > 0.0) || !(h_ > 0.0) || !(hi_ > lo_) || cells < 2) {
    throw InvalidArgument("kernel density: invalid configuration");
  }
  std::sort(points_.begin(), points_.end());
  step_ = (hi_ - lo_) / static_cast<double>(cells);
  const std::size_t nodes = cells + 1;
  grid_.resize(nodes);
  f0_.resize(nodes);
  f1_.resize(nodes);
  f2_.resize(nodes);
  f3_.resize(nodes);
  const double c0 = kInvSqrt2Pi / (norm_ * h_);
  const double c1 = c0 / h_, c2 = c1 / h_, c3 = c2 / h_;
  for (std::size_t i = 0; i < nodes; ++i) grid_[i] = i + 1 == nodes ? hi_ : lo_ + step_ * static_cast<double>(i);

  // Each centre is scattered onto the nodes within its window. Along the
  // uniform grid exp(-u²/2) obeys k_{i+1} = k_i r_i with r_{i+1} = r_i e^{-δ²},
  // so only three exponentials are needed per centre.
  const double delta = step_ / h_;
  const double q = std::exp(-delta * delta);
  const double last_node = static_cast<double>(nodes - 1);
  for (double p : points_) {
    const double from = std::ceil((p - kWindow * h_ - lo_) / step_);
    const double to = std::floor((p + kWindow * h_ - lo_) / step_);
    if (to < 0.0 || from > last_node) continue;
    const auto i0 = static_cast<std::size_t>(std::max(from, 0.0));
    const auto i1 = static_cast<std::size_t>(std::min(to, last_node));
    double u = (lo_ + step_ * static_cast<double>(i0) - p) / h_;
    double k = std::exp(-0.5 * u * u);
    double r = std::exp(-u * delta - 0.5 * delta * delta);
    for (std::size_t i = i0; i <= i1; ++i) {
      const double u2 = u * u;
      f0_[i] += k;
      f1_[i] -= u * k;
      f2_[i] += (u2 - 1.0) * k;
      f3_[i] += (3.0 - u2) * u * k;
      k *= r;
      r *= q;
      u += delta;
    }
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    f0_[i] *= c0;
    f1_[i] *= c1;
    f2_[i] *= c2;
    f3_[i] *= c3;
  }
}

KernelDensity::Sums KernelDensity::sums(double x) const {
  auto first = std::lower_bound(points_.begin(), points_.end(), x - kWindow * h_);
  auto last = std::upper_bound(first, points_.end(), x + kWindow * h_);
  Sums s{0.0, 0.0, 0.0, 0.0};
  for (auto it = first; it != last; ++it) {
    const double u = (x - *it) / h_;
    const double k = std::exp(-0.5 * u * u);
    s.d0 += k;
    s.d1 -= u * k;
  }
  return s;
}

double KernelDensity::exact_value(double x) const { return kInvSqrt2Pi / (norm_ * h_) * sums(x).d0; }

double KernelDensity::exact_derivative(double x) const { return kInvSqrt2Pi / (norm_ * h_ * h_) * sums(x).d1; }

double KernelDensity::hermite(std::span<const double> f, std::span<const double> df, double x) const {
  const double pos = (x - lo_) / step_;
  std::size_t i = static_cast<std::size_t>(pos);
  if (i >= grid_.size() - 1) i = grid_.size() - 2;
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  const double d = grid_[i + 1] - grid_[i];
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * f[i] + h10 * d * df[i] + h01 * f[i + 1] + h11 * d * df[i + 1];
}

double KernelDensity::value(double x) const {
  if (x < lo_ || x > hi_) return exact_value(x);
  return std::max(0.0, hermite(f0_, f1_, x));
}

double KernelDensity::derivative(double x) const {
  if (x < lo_ || x > hi_) return exact_derivative(x);
  return hermite(f1_, f2_, x);
}

double KernelDensity::max_value() const { return *std::max_element(f0_.begin(), f0_.end()); }

std::shared_ptr<const KernelDensity> fit_kernel_density(std::span<const double> ys, const HazardOptions& opts) {
  check_sample(ys);
  const double h = choose_bandwidth(ys, opts);
  std::vector<double> centres;
  centres.reserve(2 * ys.size());
  for (double y : ys) {
    centres.push_back(y);
    centres.push_back(-y);
  }
  const double top = *std::max_element(ys.begin(), ys.end()) + kWindow * h;
  return std::make_shared<const KernelDensity>(std::move(centres), static_cast<double>(ys.size()), h, 0.0, top,
                                               opts.grid_cells);
}

// ---------------------------------------------------------------------------

HazardFit HazardFit::from_functions(Fn ylambda, Fn g, std::vector<double> breaks, std::size_t n) {
  if (breaks.size() < 2 || !std::is_sorted(breaks.begin(), breaks.end())) {
    throw InvalidArgument("supplied hazard fit needs an ascending grid of at least two points");
  }
  HazardFit fit;
  fit.ylambda_ = std::move(ylambda);
  fit.g_ = std::move(g);
  fit.breaks_ = std::make_shared<const std::vector<double>>(std::move(breaks));
  fit.info_.method = HazardMethod::kSupplied;
  fit.info_.n = n;
  fit.i1_ = estimate_i1(fit);
  return fit;
}

double HazardFit::ylambda_hat(double y) const { return y <= 0.0 ? 0.0 : ylambda_(y); }

double HazardFit::lambda_hat(double y) const { return y <= 0.0 ? 0.0 : ylambda_(y) / y; }

double HazardFit::g_hat(double y) const { return y < 0.0 ? 0.0 : g_(y); }

double HazardFit::integrate_against_g(const Fn& f) const {
  return quad::composite([&](double y) { return f(y) * g_hat(y); }, *breaks_);
}

double estimate_i1(const HazardFit& fit) {
  const double v = fit.integrate_against_g([&](double y) {
    const double s = fit.ylambda_hat(y);
    return s * s;
  });
  if (!std::isfinite(v) || v < 0.0) throw NumericalError("quadrature of I1 estimate failed");
  return v;
}

HazardFit estimate_hazard(std::span<const double> ys, const HazardOptions& opts) {
  auto kde = fit_kernel_density(ys, opts);
  const std::size_t n = ys.size();
  const double delta = trim_floor(n, kde->max_value(), opts);
  const double clip = clip_bound(n, opts);
  const double top = kde->hi();

  auto ylambda = [kde, delta, clip, top](double y) {
    if (y <= 0.0 || y > top) return 0.0;
    const double g = kde->value(y);
    if (g < delta || !(g > 0.0)) return 0.0;
    const double lam = std::max(0.0, -kde->derivative(y) / g);
    return std::min(y * lam, clip);
  };
  auto g_hat = [kde](double y) { return y < 0.0 ? 0.0 : kde->value(y); };

  HazardFit fit;
  fit.info_ = {HazardMethod::kKernel, n, kde->bandwidth(), delta, clip, 0, 0, std::nullopt};
  for (double y : kde->grid()) {
    if (y <= 0.0) continue;
    const double g = kde->value(y);
    if (g < delta) {
      ++fit.info_.trimmed;
    } else if (g > 0.0 && y * std::max(0.0, -kde->derivative(y) / g) >= clip) {
      ++fit.info_.clipped;
    }
  }
  fit.ylambda_ = ylambda;
  fit.g_ = g_hat;
  fit.breaks_ = std::make_shared<const std::vector<double>>(kde->grid().begin(), kde->grid().end());
  fit.i1_ = estimate_i1(fit);
  return fit;
}

HazardFit estimate_hazard_symmetrized(std::span<const double> ys, const SeedSpec& seed, const HazardOptions& opts) {
  check_sample(ys);
  const std::size_t n = ys.size();
  const double h = choose_bandwidth(ys, opts);
  std::vector<double> signed_sample(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, 7, i);
    signed_sample[i] = rng.sign() * ys[i];
  }
  const double top = *std::max_element(ys.begin(), ys.end()) + kWindow * h;
  auto kde = std::make_shared<const KernelDensity>(std::move(signed_sample), static_cast<double>(n), h, -top, top,
                                                   2 * opts.grid_cells);

  // ĝ_Y(y) = ĝ_X(y) + ĝ_X(-y), which coincides with the reflected estimator.
  auto g_hat = [kde](double y) { return y < 0.0 ? 0.0 : kde->value(y) + kde->value(-y); };
  std::vector<double> breaks;
  double max_gy = 0.0;
  for (double x : kde->grid()) {
    if (x < 0.0) continue;
    breaks.push_back(x);
    max_gy = std::max(max_gy, g_hat(x));
  }
  if (breaks.front() > 0.0) breaks.insert(breaks.begin(), 0.0);
  const double delta = trim_floor(n, max_gy, opts);
  const double clip = clip_bound(n, opts);

  // Score estimate x ĝ'/ĝ on the symmetric sample, trimmed at half the floor
  // (ĝ_X carries half of the mass of ĝ_Y) and clipped.
  auto score = [kde, delta, clip](double x) {
    const double g = kde->value(x);
    if (g < 0.5 * delta || !(g > 0.0)) return 0.0;
    const double s = x * kde->derivative(x) / g;
    return std::clamp(s, -clip, clip);
  };
  auto ylambda = [score, g_hat, delta, top](double y) {
    if (y <= 0.0 || y > top) return 0.0;
    if (g_hat(y) < delta) return 0.0;
    return 0.5 * (std::abs(score(y)) + std::abs(score(-y)));
  };

  HazardFit fit;
  fit.info_ = {HazardMethod::kSymmetrized, n, h, delta, clip, 0, 0, seed};
  for (double y : breaks) {
    if (y <= 0.0) continue;
    if (g_hat(y) < delta) {
      ++fit.info_.trimmed;
    } else if (std::abs(score(y)) >= clip || std::abs(score(-y)) >= clip) {
      ++fit.info_.clipped;
    }
  }
  fit.ylambda_ = ylambda;
  fit.g_ = g_hat;
  fit.breaks_ = std::make_shared<const std::vector<double>>(std::move(breaks));
  fit.i1_ = estimate_i1(fit);
  return fit;
}

HazardFit estimate_hazard_with(HazardMethod method, std::span<const double> ys, const SeedSpec& seed,
                               const HazardOptions& opts) {
  switch (method) {
    case HazardMethod::kKernel: return estimate_hazard(ys, opts);
    case HazardMethod::kSymmetrized: return estimate_hazard_symmetrized(ys, seed, opts);
    case HazardMethod::kSupplied: break;
  }
  throw InvalidArgument("a supplied hazard fit cannot be estimated from data");
}

void write_hazard_csv(const HazardFit& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "y,g_hat,lambda_hat\n";
  for (double y : fit.breaks()) out << y << ',' << fit.g_hat(y) << ',' << fit.lambda_hat(y) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace aftxs
