#include "aftxs/model.hpp"

#include "aftxs/error.hpp"

#include <cmath>
#include <sstream>

namespace aftxs {

RegressionParam::RegressionParam(Vector theta) : theta_(std::move(theta)) {
  if (theta_.size() < 1) throw InvalidArgument("regression parameter must have at least one entry");
  if (!theta_.allFinite()) throw InvalidArgument("regression parameter must be finite");
}

RegressionParam::RegressionParam(std::initializer_list<double> values)
    : RegressionParam(Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

std::string to_string(Variant v) { return v == Variant::kKnownH ? "known-h" : "unknown-h-mean-zero"; }

Variant variant_from_string(const std::string& s) {
  if (s == "known-h" || s == "KnownH") return Variant::kKnownH;
  if (s == "unknown-h-mean-zero" || s == "unknown-h" || s == "UnknownHMeanZero") return Variant::kUnknownHMeanZero;
  throw InvalidArgument("unknown model variant '" + s + "' (expected known-h or unknown-h-mean-zero)");
}

ModelSpec::ModelSpec(RegressionParam theta_in, BaselineModel baseline_in, CovariateModel covariates_in, Variant variant_in)
    : theta(std::move(theta_in)),
      baseline(std::move(baseline_in)),
      covariates(std::move(covariates_in)),
      variant(variant_in) {
  if (theta.dim() != covariates.dim()) {
    throw InvalidArgument("theta has dimension " + std::to_string(theta.dim()) + " but covariates have dimension " +
                          std::to_string(covariates.dim()));
  }
}

void Dataset::check() const {
  if (records.empty()) throw InvalidArgument("dataset is empty");
  const Eigen::Index k = records.front().z.size();
  if (k == 0) throw InvalidArgument("dataset records have no covariates");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.x > 0.0) || !std::isfinite(r.x)) {
      throw InvalidArgument("record " + std::to_string(i) + ": observed time must be positive and finite");
    }
    if (r.z.size() != k) throw InvalidArgument("record " + std::to_string(i) + ": covariate dimension mismatch");
    if (!r.z.allFinite()) throw InvalidArgument("record " + std::to_string(i) + ": non-finite covariate");
  }
}

// ---------------------------------------------------------------------------

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

const ConditionCheck* ValidationReport::find(const std::string& id) const {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

void ValidationReport::require() const {
  if (ok()) return;
  std::ostringstream os;
  os << "model violates regularity conditions:";
  for (const auto& c : checks) {
    if (!c.passed) os << " (" << c.id << ") " << c.quantity << " = " << c.value << (c.detail.empty() ? "" : ": ") << c.detail << ";";
  }
  throw ModelError(os.str());
}

namespace {

ConditionCheck finite_check(std::string id, std::string quantity, double value, std::string fail_detail) {
  ConditionCheck c{std::move(id), std::move(quantity), value, std::isfinite(value), ""};
  if (!c.passed) c.detail = std::move(fail_detail);
  return c;
}

template <class F>
ConditionCheck guarded(const std::string& id, const std::string& quantity, F&& eval) {
  try {
    return eval();
  } catch (const NumericalError& e) {
    return {id, quantity, std::numeric_limits<double>::quiet_NaN(), false,
            std::string("evaluation of ") + quantity + " failed: " + e.what()};
  }
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec) {
  ValidationReport report;
  const auto& base = spec.baseline;
  const auto& cov = spec.covariates;
  const Vector& theta = spec.theta.value();

  report.checks.push_back(guarded("C1", "E_g V", [&] {
    return finite_check("C1", "E_g V", base.mean_v(), "E_g V is infinite (integral of v g(v) diverges)");
  }));

  report.checks.push_back(guarded("C2", "int v^2 g^2/Gbar dv", [&] {
    if (!std::isfinite(base.mean_v())) {
      return ConditionCheck{"C2", "int v^2 g^2/Gbar dv", std::numeric_limits<double>::infinity(), false,
                            "not evaluated: (C1) fails"};
    }
    double value = base.tail_c2_integral();
    if (std::isfinite(value)) {
      value += base
                   .integrate_over_support(
                       [&](double v) {
                         const double g = base.density(v);
                         return g == 0.0 ? 0.0 : v * base.v_hazard(v) * g;
                       },
                       "int v^2 g^2/Gbar dv")
                   .value;
    }
    return finite_check("C2", "int v^2 g^2/Gbar dv", value, "integral diverges");
  }));

  report.checks.push_back(guarded("C3", "min eigenvalue of Sigma_W", [&] {
    const Matrix sigma = cov.covariance();
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sigma), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    ConditionCheck c{"C3", "min eigenvalue of Sigma_W", lo, lo > 0.0 && lo > hi / kMaxConditionNumber, ""};
    if (!c.passed) c.detail = "Sigma_W is singular";
    return c;
  }));

  const ExpMoments neg = cov.exp_moments(-theta);
  report.checks.push_back(guarded("C4", "E_h exp(-theta'W)", [&] {
    return finite_check("C4", "E_h exp(-theta'W)", neg.m0, "exponential moment is infinite");
  }));
  report.checks.push_back(guarded("C5", "E_h |W|^2 exp(-theta'W)", [&] {
    return finite_check("C5", "E_h |W|^2 exp(-theta'W)", neg.m2.trace(), "moment is infinite");
  }));

  if (spec.variant == Variant::kUnknownHMeanZero) {
    report.checks.push_back(guarded("H1", "max_j |E_h W_j|", [&] {
      const double dev = cov.mean().cwiseAbs().maxCoeff();
      ConditionCheck c{"H1", "max_j |E_h W_j|", dev, dev <= kMeanZeroTolerance, ""};
      if (!c.passed) c.detail = "core covariate mean is not zero";
      return c;
    }));
    report.checks.push_back(guarded("H2", "E_h |W|^2 exp(theta'W)", [&] {
      return finite_check("H2", "E_h |W|^2 exp(theta'W)", cov.exp_moments(theta).m2.trace(), "moment is infinite");
    }));
  }
  return report;
}

// ---------------------------------------------------------------------------

double pseudo_response(const Vector& theta, const Observation& obs, std::size_t record) {
  if (!(obs.x > 0.0)) {
    throw InvalidArgument("record " + std::to_string(record) + ": observed time must be positive");
  }
  const double lin = theta.dot(obs.z);
  const double y = std::exp(lin) * obs.x;
  if (!std::isfinite(y) || lin > 709.0) {
    throw NumericalError("record " + std::to_string(record) + ": exp(theta'z) overflows (theta'z = " +
                         std::to_string(lin) + ")");
  }
  return y;
}

double pseudo_response(const RegressionParam& theta, const Observation& obs, std::size_t record) {
  return pseudo_response(theta.value(), obs, record);
}

double density_gy(const BaselineModel& baseline, double y) {
  if (y < 0.0 || !std::isfinite(baseline.mean_v())) return 0.0;
  return baseline.survival(y) / baseline.mean_v();
}

double joint_density(const ModelSpec& spec, double x, const Vector& z) {
  if (x < 0.0) return 0.0;
  const Vector& theta = spec.theta.value();
  const double h = spec.covariates.density(z);
  if (h == 0.0) return 0.0;
  const double norm = spec.baseline.mean_v() * spec.covariates.exp_moments(-theta).m0;
  return spec.baseline.survival(std::exp(theta.dot(z)) * x) * h / norm;
}

double covariate_density(const ModelSpec& spec, const Vector& z) {
  const Vector& theta = spec.theta.value();
  const double h = spec.covariates.density(z);
  if (h == 0.0) return 0.0;
  return std::exp(-theta.dot(z)) * h / spec.covariates.exp_moments(-theta).m0;
}

double conditional_density(const ModelSpec& spec, double x, const Vector& z) {
  if (x < 0.0) return 0.0;
  const double scale = std::exp(spec.theta.value().dot(z));
  return scale * density_gy(spec.baseline, scale * x);
}

double true_hazard(const BaselineModel& baseline, double y) { return baseline.hazard(y); }

}  // namespace aftxs
