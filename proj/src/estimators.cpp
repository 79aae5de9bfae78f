#include "aftxs/estimators.hpp"

#include "aftxs/error.hpp"
#include "aftxs/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

namespace aftxs {

namespace {

Vector sample_mean_z(const Dataset& data) {
  Vector m = Vector::Zero(data.dim());
  for (const auto& r : data.records) m += r.z;
  return m / static_cast<double>(data.size());
}

std::vector<const Vector*> covariates_of(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<const Vector*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&data.records[i].z);
  return out;
}

// Bisection for a decreasing scalar function f with f(lo) > 0 > f(hi).
double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string trace_string(const std::vector<double>& norms) {
  std::ostringstream os;
  for (std::size_t i = 0; i < norms.size(); ++i) os << (i ? ", " : "") << norms[i];
  return os.str();
}

}  // namespace

RootResult preliminary_known_h(const Dataset& data, const CovariateModel& cov, const NewtonOptions& opts) {
  data.check();
  if (data.dim() != cov.dim()) throw InvalidArgument("preliminary estimator: covariate dimension mismatch");
  const Vector zbar = sample_mean_z(data);
  const Eigen::Index k = zbar.size();

  if (const auto* g = std::get_if<GaussianVector>(&cov.kind())) {
    RootResult r;
    r.theta = solve_checked(g->cov, g->mean - zbar, "Gaussian covariance");
    return r;
  }

  auto residual = [&](const Vector& th) { return Vector(tilted_moments(cov, th).e_z - zbar); };

  if (k == 1) {
    // E_θ Z is strictly decreasing in θ.
    auto f = [&](double t) { return residual(Vector::Constant(1, t))(0); };
    const double lo = -opts.bracket, hi = opts.bracket;
    const double flo = f(lo), fhi = f(hi);
    if (!(flo > 0.0 && fhi < 0.0)) {
      std::ostringstream os;
      os << "sample mean " << zbar(0) << " lies outside the range (" << zbar(0) + fhi << ", " << zbar(0) + flo
         << ") of the covariate mean map";
      throw NoSolutionError(os.str());
    }
  }

  RootResult r;
  r.theta = Vector::Zero(k);
  Vector res = residual(r.theta);
  std::vector<double> norms{res.norm()};
  bool ok = false;
  try {
    for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
      if (res.norm() <= opts.tolerance) {
        ok = true;
        break;
      }
      // d/dθ E_θ Z = -Σ_Z(θ).
      const Matrix sigma = tilted_moments(cov, r.theta).sigma_z;
      const Vector step = solve_checked(sigma, res, "tilted covariance");
      double t = 1.0;
      Vector cand, cand_res;
      bool accepted = false;
      for (int half = 0; half < 40; ++half, t *= 0.5) {
        cand = r.theta + t * step;
        try {
          cand_res = residual(cand);
        } catch (const ModelError&) {
          continue;
        }
        if (cand_res.allFinite() && cand_res.norm() < res.norm()) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      r.theta = cand;
      res = cand_res;
      norms.push_back(res.norm());
      if (r.theta.lpNorm<Eigen::Infinity>() > opts.bracket) break;
    }
    if (!ok && res.norm() <= opts.tolerance) ok = true;
  } catch (const NumericalError&) {
    ok = false;
  }
  if (ok) return r;

  if (k == 1) {
    auto f = [&](double t) { return residual(Vector::Constant(1, t))(0); };
    r.theta = Vector::Constant(1, bisect_decreasing(f, -opts.bracket, opts.bracket, 1e-14));
    r.used_bisection = true;
    return r;
  }
  if (r.theta.lpNorm<Eigen::Infinity>() > opts.bracket) {
    throw NoSolutionError("sample mean lies outside the range of the covariate mean map (iterates diverge)");
  }
  throw NumericalError("Newton iteration for the moment equation did not converge; residual norms: " +
                       trace_string(norms));
}

RootResult preliminary_unknown_h(const Dataset& data, const NewtonOptions& opts) {
  data.check();
  const Eigen::Index k = data.dim();
  for (Eigen::Index j = 0; j < k; ++j) {
    bool pos = false, neg = false;
    for (const auto& r : data.records) {
      pos = pos || r.z(j) > 0.0;
      neg = neg || r.z(j) < 0.0;
    }
    if (!(pos && neg)) {
      std::ostringstream os;
      os << "component " << j + 1 << " of (1/n) sum Z_i exp(theta'Z_i) does not pass through zero: all Z_i" << j + 1
         << (pos ? " >= 0" : " <= 0");
      throw NoRootError(os.str());
    }
  }
  const double n = static_cast<double>(data.size());

  // Minimises the convex F(θ) = mean exp(θᵀZ); its gradient is the estimating function.
  struct Eval {
    double f;
    Vector grad;
    Matrix hess;
  };
  auto eval = [&](const Vector& th) {
    Eval e{0.0, Vector::Zero(k), Matrix::Zero(k, k)};
    for (const auto& r : data.records) {
      const double w = std::exp(th.dot(r.z));
      e.f += w;
      e.grad += w * r.z;
      e.hess += w * r.z * r.z.transpose();
    }
    e.f /= n;
    e.grad /= n;
    e.hess /= n;
    return e;
  };

  RootResult r;
  r.theta = Vector::Zero(k);
  Eval cur = eval(r.theta);
  std::vector<double> norms{cur.grad.norm()};
  bool ok = false;
  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    if (cur.grad.norm() <= opts.tolerance) {
      ok = true;
      break;
    }
    const Vector step = -solve_checked(cur.hess, cur.grad, "Jacobian of the estimating equation");
    const double slope = cur.grad.dot(step);
    double t = 1.0;
    bool accepted = false;
    Eval next;
    Vector cand;
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      cand = r.theta + t * step;
      next = eval(cand);
      // Near the root the decrease of F drops below its rounding error; a step
      // that halves the gradient is then taken instead.
      if (std::isfinite(next.f) &&
          (next.f <= cur.f + 1e-4 * t * slope || next.grad.norm() <= 0.5 * cur.grad.norm())) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Line search stalls only at rounding level; accept if already at the root.
      ok = cur.grad.norm() <= 1e3 * opts.tolerance;
      break;
    }
    r.theta = cand;
    cur = next;
    norms.push_back(cur.grad.norm());
    if (r.theta.lpNorm<Eigen::Infinity>() > 1e3) break;
  }
  if (!ok && cur.grad.norm() <= opts.tolerance) ok = true;
  if (ok) return r;

  if (k == 1) {
    auto f = [&](double t) { return -eval(Vector::Constant(1, t)).grad(0); };
    if (f(-opts.bracket) > 0.0 && f(opts.bracket) < 0.0) {
      r.theta = Vector::Constant(1, bisect_decreasing(f, -opts.bracket, opts.bracket, 1e-14));
      r.used_bisection = true;
      return r;
    }
  }
  if (r.theta.lpNorm<Eigen::Infinity>() > 1e3) {
    throw NoRootError("the estimating equation has no root: Newton iterates diverge");
  }
  throw NumericalError("Newton iteration for the estimating equation did not converge; gradient norms: " +
                       trace_string(norms));
}

Vector efficient_score_known_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                               const Observation& obs) {
  const double y = pseudo_response(theta, obs);
  return -(obs.z - moments.e_z) * fit.ylambda_hat(y);
}

Vector influence_known_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                         const Observation& obs) {
  const Matrix info = fit.i1_hat() * moments.sigma_z;
  return solve_checked(info, efficient_score_known_h(theta, moments, fit, obs), "estimated information");
}

Vector efficient_score_unknown_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                                 const Observation& obs) {
  const double y = pseudo_response(theta, obs);
  const Vector correction = moments.m1 * solve_checked(moments.m2, obs.z, "M2") * std::exp(theta.dot(obs.z));
  return -(obs.z - moments.e_z) * (1.0 + fit.ylambda_hat(y)) + correction;
}

Matrix fisher_estimate_unknown_h(const TiltedMoments& moments, const HazardFit& fit) {
  const double m1 = fit.integrate_against_g([&](double y) { return fit.ylambda_hat(y); });
  const double second = 1.0 + 2.0 * m1 + fit.i1_hat();
  const Matrix m2inv = inverse_symmetric(moments.m2, "M2");
  return symmetrize(moments.sigma_z * second + moments.m1 * m2inv * moments.m1);
}

Vector influence_unknown_h(const Vector& theta, const TiltedMoments& moments, const HazardFit& fit,
                           const Observation& obs) {
  return solve_checked(fisher_estimate_unknown_h(moments, fit), efficient_score_unknown_h(theta, moments, fit, obs),
                       "estimated information");
}

namespace {

void require_known(Variant variant, const std::optional<CovariateModel>& known_h) {
  if (variant == Variant::kKnownH && !known_h) {
    throw InvalidArgument("the known-h variant needs the covariate law h");
  }
}

RootResult run_preliminary(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                           const NewtonOptions& opts) {
  require_known(variant, known_h);
  return variant == Variant::kKnownH ? preliminary_known_h(data, *known_h, opts) : preliminary_unknown_h(data, opts);
}

Vector stderr_from(const Matrix& info, std::size_t n) {
  Matrix inv;
  try {
    inv = inverse_symmetric(info, "estimated information");
  } catch (const NumericalError&) {
    return Vector::Constant(info.rows(), std::numeric_limits<double>::infinity());
  }
  return (inv.diagonal().array().max(0.0) / static_cast<double>(n)).sqrt();
}

// Nuisance fits on one part of the sample: hazard of the pseudo-responses,
// covariate moments, and the information matrix used to scale the score.
struct PartFit {
  HazardFit hazard;
  TiltedMoments moments;
  Matrix info;
};

PartFit fit_part(const Dataset& data, std::span<const std::size_t> idx, const Vector& theta, Variant variant,
                 const std::optional<CovariateModel>& known_h, const EstimatorOptions& opts, const SeedSpec& seed) {
  std::vector<double> ys;
  ys.reserve(idx.size());
  for (std::size_t i : idx) ys.push_back(pseudo_response(theta, data.records[i], i));
  HazardFit hazard = [&] {
    if (opts.hazard != HazardMethod::kSupplied) return estimate_hazard_with(opts.hazard, ys, seed, opts.hazard_options);
    if (!opts.supplied_hazard) throw InvalidArgument("hazard method 'supplied' needs a supplied hazard fit");
    return *opts.supplied_hazard;
  }();
  TiltedMoments moments = variant == Variant::kKnownH ? tilted_moments(*known_h, theta)
                                                      : sample_tilted_moments(covariates_of(data, idx), theta);
  Matrix info = variant == Variant::kKnownH ? Matrix(hazard.i1_hat() * moments.sigma_z)
                                            : fisher_estimate_unknown_h(moments, hazard);
  return {std::move(hazard), std::move(moments), std::move(info)};
}

Vector mean_influence(const Dataset& data, std::span<const std::size_t> idx, const Vector& theta, Variant variant,
                      const PartFit& part) {
  const Eigen::Index k = theta.size();
  Vector sum = Vector::Zero(k);
  Matrix m1_m2inv;
  if (variant == Variant::kUnknownHMeanZero) m1_m2inv = part.moments.m1 * inverse_symmetric(part.moments.m2, "M2");
  for (std::size_t i : idx) {
    const Observation& obs = data.records[i];
    const double y = pseudo_response(theta, obs, i);
    const double yl = part.hazard.ylambda_hat(y);
    if (variant == Variant::kKnownH) {
      sum += -(obs.z - part.moments.e_z) * yl;
    } else {
      sum += -(obs.z - part.moments.e_z) * (1.0 + yl) + m1_m2inv * obs.z * std::exp(theta.dot(obs.z));
    }
  }
  // A vanishing score needs no scaling, even when the information estimate is singular.
  if (sum.isZero(0.0)) return sum;
  return solve_checked(part.info, sum / static_cast<double>(idx.size()), "estimated information");
}

void check_size(const Dataset& data, std::size_t min_n, const char* what) {
  data.check();
  if (data.size() < min_n) {
    throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(min_n) + " observations");
  }
}

}  // namespace

EstimationResult preliminary(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                             const EstimatorOptions& opts) {
  check_size(data, 2, "preliminary estimator");
  const RootResult root = run_preliminary(data, variant, known_h, opts.newton);
  EstimationResult res;
  res.theta_prelim = root.theta;
  res.theta_hat = root.theta;
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (variant == Variant::kKnownH) {
    res.info_hat = tilted_moments(*known_h, root.theta).sigma_z;
  } else {
    const TiltedMoments m = sample_tilted_moments(covariates_of(data, all), root.theta);
    // Inverse of the sandwich M₁⁻¹ M₂ M₁⁻¹.
    res.info_hat = symmetrize(m.m1 * inverse_symmetric(m.m2, "M2") * m.m1);
  }
  res.stderr = stderr_from(res.info_hat, data.size());
  res.diagnostics.estimator = "prelim";
  res.diagnostics.variant = variant;
  res.diagnostics.n = data.size();
  res.diagnostics.newton_iterations = root.iterations;
  res.diagnostics.used_bisection = root.used_bisection;
  res.diagnostics.split_scheme = "none";
  return res;
}

EstimationResult one_step_split(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                                const EstimatorOptions& opts) {
  data.check();
  // The preliminary root comes first so that a missing root is reported as such.
  const RootResult root = run_preliminary(data, variant, known_h, opts.newton);
  check_size(data, 8, "one-step estimator with sample splitting");
  const Vector& theta = root.theta;

  std::vector<std::size_t> even, odd;
  for (std::size_t i = 0; i < data.size(); ++i) (i % 2 == 0 ? even : odd).push_back(i);

  const PartFit fit_a = fit_part(data, even, theta, variant, known_h, opts, opts.seed.child(0));
  const PartFit fit_b = fit_part(data, odd, theta, variant, known_h, opts, opts.seed.child(1));
  const Vector corr = 0.5 * (mean_influence(data, odd, theta, variant, fit_a) +
                             mean_influence(data, even, theta, variant, fit_b));

  EstimationResult res;
  res.theta_prelim = theta;
  res.theta_hat = theta + corr;
  if (!res.theta_hat.allFinite()) throw NumericalError("one-step correction is not finite");
  res.info_hat = symmetrize(0.5 * (fit_a.info + fit_b.info));
  res.stderr = stderr_from(res.info_hat, data.size());
  res.diagnostics.estimator = "one_step_split";
  res.diagnostics.variant = variant;
  res.diagnostics.n = data.size();
  res.diagnostics.newton_iterations = root.iterations;
  res.diagnostics.used_bisection = root.used_bisection;
  res.diagnostics.split_scheme = "even/odd halves, swapped and averaged";
  res.diagnostics.hazard_fits = {fit_a.hazard.info(), fit_b.hazard.info()};
  return res;
}

EstimationResult one_step_plugin(const Dataset& data, Variant variant, const std::optional<CovariateModel>& known_h,
                                 const EstimatorOptions& opts) {
  data.check();
  const RootResult root = run_preliminary(data, variant, known_h, opts.newton);
  check_size(data, 4, "one-step plug-in estimator");
  const Vector& theta = root.theta;
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  const PartFit fit = fit_part(data, all, theta, variant, known_h, opts, opts.seed.child(0));
  EstimationResult res;
  res.theta_prelim = theta;
  res.theta_hat = theta + mean_influence(data, all, theta, variant, fit);
  if (!res.theta_hat.allFinite()) throw NumericalError("one-step correction is not finite");
  res.info_hat = fit.info;
  res.stderr = stderr_from(res.info_hat, data.size());
  res.diagnostics.estimator = "one_step_plugin";
  res.diagnostics.variant = variant;
  res.diagnostics.n = data.size();
  res.diagnostics.newton_iterations = root.iterations;
  res.diagnostics.used_bisection = root.used_bisection;
  res.diagnostics.split_scheme = "none";
  res.diagnostics.hazard_fits = {fit.hazard.info()};
  return res;
}

}  // namespace aftxs
