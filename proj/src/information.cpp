#include "aftxs/information.hpp"

#include "aftxs/error.hpp"

#include <cmath>

namespace aftxs {

TiltedMoments tilted_moments(const CovariateModel& cov, const Vector& theta) {
  if (theta.size() != cov.dim()) throw InvalidArgument("tilted moments: dimension mismatch");
  const ExpMoments neg = cov.exp_moments(-theta);
  const ExpMoments zero = cov.exp_moments(Vector::Zero(theta.size()));
  const ExpMoments pos = cov.exp_moments(theta);
  const double c = neg.m0;
  if (!(c > 0.0) || !std::isfinite(c) || !neg.m2.allFinite()) {
    throw ModelError("E_h exp(-theta'W) or E_h |W|^2 exp(-theta'W) is not finite (conditions C4/C5)");
  }
  if (!pos.m2.allFinite()) throw ModelError("E_h |W|^2 exp(theta'W) is not finite (condition H2)");
  TiltedMoments t;
  t.norm_const = c;
  t.e_z = neg.m1 / c;
  t.sigma_z = symmetrize(neg.m2 / c - t.e_z * t.e_z.transpose());
  t.m1 = symmetrize(zero.m2 / c);
  t.m2 = symmetrize(pos.m2 / c);
  return t;
}

TiltedMoments sample_tilted_moments(const std::vector<const Vector*>& zs, const Vector& theta) {
  if (zs.size() < 2) throw InvalidArgument("sample moments need at least two observations");
  const Eigen::Index k = theta.size();
  const double n = static_cast<double>(zs.size());
  TiltedMoments t;
  t.e_z = Vector::Zero(k);
  t.m1 = Matrix::Zero(k, k);
  t.m2 = Matrix::Zero(k, k);
  double mean_exp = 0.0;
  for (const Vector* z : zs) {
    const double e = std::exp(theta.dot(*z));
    const Matrix zz = (*z) * z->transpose();
    t.e_z += *z;
    t.m1 += e * zz;
    t.m2 += e * e * zz;
    mean_exp += e;
  }
  t.e_z /= n;
  t.m1 /= n;
  t.m2 /= n;
  mean_exp /= n;
  t.sigma_z = Matrix::Zero(k, k);
  for (const Vector* z : zs) {
    const Vector d = *z - t.e_z;
    t.sigma_z += d * d.transpose();
  }
  t.sigma_z /= (n - 1.0);
  t.norm_const = 1.0 / mean_exp;
  if (!t.m2.allFinite()) throw NumericalError("sample moment M2 overflowed");
  return t;
}

YLambdaMoments expected_ylambda_moments(const BaselineModel& baseline) {
  const double ev = baseline.mean_v();
  if (!std::isfinite(ev)) throw ModelError("E_g V is infinite (condition C1)");
  // yλ(y) g_Y(y) = y g(y) / E V, so the integrands never divide by Ḡ.
  auto power = [&](int p, const char* name) {
    return baseline
        .integrate_over_support(
            [&](double y) {
              const double g = baseline.density(y);
              if (g == 0.0) return 0.0;
              const double s = baseline.v_hazard(y);
              return std::pow(s, p - 1) * y * g / ev;
            },
            name)
        .value;
  };
  YLambdaMoments m;
  m.m1 = power(1, "E Y lambda(Y)");
  const double tail = baseline.tail_c2_integral();
  if (!std::isfinite(tail)) throw ModelError("E (Y lambda(Y))^2 is infinite (condition C2)");
  m.m2 = power(2, "E (Y lambda(Y))^2") + tail / ev;
  m.m2p = 1.0 + 2.0 * m.m1 + m.m2;
  return m;
}

namespace {

InformationBound finish(Matrix info, Variant variant, const char* what) {
  info = symmetrize(info);
  InformationBound b{info, inverse_symmetric(info, what), variant};
  return b;
}

// Conditions C1-C5; the bounds are meaningless without them.
void require_regular(const ModelSpec& spec) {
  std::string failed;
  for (const auto& c : validate_model(spec).checks) {
    if (c.id.front() == 'C' && !c.passed) failed += (failed.empty() ? "" : "; ") + c.id + ": " + c.detail;
  }
  if (!failed.empty()) throw ModelError("regularity conditions fail: " + failed);
}

}  // namespace

InformationBound fisher_known_h(const ModelSpec& spec) {
  require_regular(spec);
  const TiltedMoments t = tilted_moments(spec.covariates, spec.theta.value());
  if (!(min_eigenvalue(t.sigma_z) > 0.0) || symmetric_condition(t.sigma_z) > kMaxConditionNumber) {
    throw ModelError("covariance of Z is singular (condition C3 / nonsingularity of Sigma_Z)");
  }
  const YLambdaMoments ym = expected_ylambda_moments(spec.baseline);
  return finish(t.sigma_z * ym.m2, Variant::kKnownH, "known-h information");
}

InformationBound fisher_unknown_h(const ModelSpec& spec) {
  const double dev = spec.covariates.mean().cwiseAbs().maxCoeff();
  if (dev > kMeanZeroTolerance) {
    throw ModelError("E_h W is not zero (condition H1); max |E_h W_j| = " + std::to_string(dev));
  }
  require_regular(spec);
  const TiltedMoments t = tilted_moments(spec.covariates, spec.theta.value());
  if (!(min_eigenvalue(t.sigma_z) > 0.0) || symmetric_condition(t.sigma_z) > kMaxConditionNumber) {
    throw ModelError("covariance of Z is singular (condition C3 / nonsingularity of Sigma_Z)");
  }
  const YLambdaMoments ym = expected_ylambda_moments(spec.baseline);
  const Matrix m2inv = inverse_symmetric(t.m2, "M2 = E ZZ' exp(2 theta'Z)");
  return finish(t.sigma_z * ym.m2p + t.m1 * m2inv * t.m1, Variant::kUnknownHMeanZero, "unknown-h information");
}

InformationBound fisher_information(const ModelSpec& spec, Variant variant) {
  return variant == Variant::kKnownH ? fisher_known_h(spec) : fisher_unknown_h(spec);
}

}  // namespace aftxs
