#include "aftxs/error.hpp"
#include "aftxs/model.hpp"
#include "aftxs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace aftxs {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kProbTolerance = 1e-9;

void check_probs(const std::vector<double>& probs, std::size_t count, const char* what) {
  if (probs.size() != count || count == 0) {
    throw InvalidArgument(std::string(what) + ": points and probabilities must be nonempty and of equal length");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument(std::string(what) + ": probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw InvalidArgument(std::string(what) + ": probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

void check_scalar(const ScalarLaw& law) {
  std::visit(Overloaded{[](const NormalLaw& n) {
                          if (!(n.sd > 0.0) || !std::isfinite(n.mean) || !std::isfinite(n.sd)) {
                            throw InvalidArgument("normal covariate law needs finite mean and sd > 0");
                          }
                        },
                        [](const UniformLaw& u) {
                          if (!(u.lo < u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi)) {
                            throw InvalidArgument("uniform covariate law needs finite lo < hi");
                          }
                        },
                        [](const DiscreteLaw& d) {
                          check_probs(d.probs, d.points.size(), "discrete covariate law");
                          for (double x : d.points) {
                            if (!std::isfinite(x)) throw InvalidArgument("discrete covariate law: non-finite point");
                          }
                        }},
             law);
}

// E[e^{tW}], E[W e^{tW}]/E[e^{tW}], E[W² e^{tW}]/E[e^{tW}] for one coordinate.
struct ScalarMoments {
  double a0, r1, r2;
};

ScalarMoments scalar_moments(const ScalarLaw& law, double t) {
  return std::visit(
      Overloaded{
          [&](const NormalLaw& n) {
            const double var = n.sd * n.sd;
            const double shifted = n.mean + var * t;
            return ScalarMoments{std::exp(t * n.mean + 0.5 * var * t * t), shifted, var + shifted * shifted};
          },
          [&](const UniformLaw& u) {
            // Shift the exponent by its maximum over [lo, hi] so nothing overflows.
            const double c = t > 0.0 ? u.hi : u.lo;
            const double width = u.hi - u.lo;
            quad::Options opts;
            opts.abs_tol = 1e-15;
            opts.rel_tol = 1e-13;
            auto moment = [&](int p) {
              return quad::integrate(
                         [&](double w) { return std::pow(w, p) * std::exp(t * (w - c)); }, u.lo, u.hi,
                         "uniform exponential moment", opts)
                         .value /
                     width;
            };
            const double i0 = moment(0);
            return ScalarMoments{std::exp(t * c) * i0, moment(1) / i0, moment(2) / i0};
          },
          [&](const DiscreteLaw& d) {
            double shift = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < d.points.size(); ++j) {
              if (d.probs[j] > 0.0) shift = std::max(shift, t * d.points[j]);
            }
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < d.points.size(); ++j) {
              const double w = d.probs[j] * std::exp(t * d.points[j] - shift);
              s0 += w;
              s1 += w * d.points[j];
              s2 += w * d.points[j] * d.points[j];
            }
            return ScalarMoments{std::exp(shift) * s0, s1 / s0, s2 / s0};
          }},
      law);
}

double scalar_density(const ScalarLaw& law, double w) {
  return std::visit(Overloaded{[&](const NormalLaw& n) {
                                 const double u = (w - n.mean) / n.sd;
                                 return std::exp(-0.5 * u * u) / (n.sd * std::sqrt(2.0 * std::numbers::pi));
                               },
                               [&](const UniformLaw& u) { return (w >= u.lo && w <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                               [&](const DiscreteLaw& d) {
                                 double p = 0.0;
                                 for (std::size_t j = 0; j < d.points.size(); ++j) {
                                   if (std::abs(d.points[j] - w) <= 1e-12 * std::max(1.0, std::abs(w))) p += d.probs[j];
                                 }
                                 return p;
                               }},
                    law);
}

std::size_t categorical(const std::vector<double>& log_weights, double u) {
  const double shift = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> cum(log_weights.size());
  double total = 0.0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    total += std::exp(log_weights[j] - shift);
    cum[j] = total;
  }
  const double target = u * total;
  auto it = std::lower_bound(cum.begin(), cum.end(), target);
  std::size_t j = static_cast<std::size_t>(it - cum.begin());
  return std::min(j, cum.size() - 1);
}

double draw_scalar_tilted(const ScalarLaw& law, double theta, CounterRng& rng) {
  return std::visit(
      Overloaded{[&](const NormalLaw& n) { return n.mean - n.sd * n.sd * theta + n.sd * rng.normal(); },
                 [&](const UniformLaw& u) {
                   // Density ∝ e^{c w} on [lo, hi] with c = -theta.
                   const double c = -theta;
                   const double width = u.hi - u.lo;
                   const double p = rng.uniform_pos();
                   if (std::abs(c * width) < 1e-12) return u.lo + p * width;
                   if (c > 0.0) return u.hi + std::log(p + (1.0 - p) * std::exp(-c * width)) / c;
                   return u.lo + std::log1p(p * std::expm1(c * width)) / c;
                 },
                 [&](const DiscreteLaw& d) {
                   std::vector<double> lw(d.points.size());
                   for (std::size_t j = 0; j < lw.size(); ++j) {
                     lw[j] = d.probs[j] > 0.0 ? std::log(d.probs[j]) - theta * d.points[j]
                                              : -std::numeric_limits<double>::infinity();
                   }
                   return d.points[categorical(lw, rng.uniform_pos())];
                 }},
      law);
}

}  // namespace

CovariateModel::CovariateModel(CovariateKind kind) : kind_(std::move(kind)) {
  std::visit(
      Overloaded{
          [&](const GaussianVector& g) {
            if (g.mean.size() == 0 || g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size()) {
              throw InvalidArgument("gaussian covariate law: mean and covariance dimensions disagree");
            }
            if (!g.mean.allFinite() || !g.cov.allFinite()) {
              throw InvalidArgument("gaussian covariate law: non-finite parameters");
            }
            if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cov.cwiseAbs().maxCoeff())) {
              throw InvalidArgument("gaussian covariate law: covariance is not symmetric");
            }
            Eigen::SelfAdjointEigenSolver<Matrix> es(g.cov);
            if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
              throw InvalidArgument("gaussian covariate law: covariance is not positive semidefinite");
            }
            dim_ = g.mean.size();
            Eigen::LLT<Matrix> llt(g.cov);
            if (llt.info() == Eigen::Success) {
              chol_ = llt.matrixL();
            } else {
              chol_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
            }
          },
          [&](const DiscreteSupport& d) {
            check_probs(d.probs, d.points.size(), "discrete covariate support");
            dim_ = d.points.front().size();
            if (dim_ == 0) throw InvalidArgument("discrete covariate support: zero-dimensional points");
            for (const auto& p : d.points) {
              if (p.size() != dim_ || !p.allFinite()) {
                throw InvalidArgument("discrete covariate support: points must be finite and of equal dimension");
              }
            }
          },
          [&](const ProductOfScalars& p) {
            if (p.laws.empty()) throw InvalidArgument("product covariate law needs at least one coordinate");
            for (const auto& law : p.laws) check_scalar(law);
            dim_ = static_cast<Eigen::Index>(p.laws.size());
          }},
      kind_);
}

std::string CovariateModel::name() const {
  return std::visit(Overloaded{[](const GaussianVector& g) { return "Gaussian(k=" + std::to_string(g.mean.size()) + ")"; },
                               [](const DiscreteSupport& d) {
                                 return "Discrete(" + std::to_string(d.points.size()) + " points)";
                               },
                               [](const ProductOfScalars& p) { return "Product(k=" + std::to_string(p.laws.size()) + ")"; }},
                    kind_);
}

bool CovariateModel::is_discrete() const { return std::holds_alternative<DiscreteSupport>(kind_); }

double CovariateModel::density(const Vector& z) const {
  if (z.size() != dim_) throw InvalidArgument("covariate density: dimension mismatch");
  return std::visit(
      Overloaded{[&](const GaussianVector& g) {
                   Eigen::LLT<Matrix> llt(g.cov);
                   if (llt.info() != Eigen::Success) {
                     throw ModelError("gaussian covariate law with singular covariance has no density");
                   }
                   const Vector r = llt.matrixL().solve(z - g.mean);
                   const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
                   return std::exp(-0.5 * r.squaredNorm() - 0.5 * logdet -
                                   0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi));
                 },
                 [&](const DiscreteSupport& d) {
                   double p = 0.0;
                   for (std::size_t j = 0; j < d.points.size(); ++j) {
                     if ((d.points[j] - z).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
                       p += d.probs[j];
                     }
                   }
                   return p;
                 },
                 [&](const ProductOfScalars& p) {
                   double d = 1.0;
                   for (std::size_t j = 0; j < p.laws.size(); ++j) d *= scalar_density(p.laws[j], z(static_cast<Eigen::Index>(j)));
                   return d;
                 }},
      kind_);
}

ExpMoments CovariateModel::exp_moments(const Vector& t) const {
  if (t.size() != dim_) throw InvalidArgument("exponential moments: dimension mismatch");
  ExpMoments out;
  std::visit(Overloaded{[&](const GaussianVector& g) {
                          const Vector shifted = g.mean + g.cov * t;
                          out.m0 = std::exp(t.dot(g.mean) + 0.5 * t.dot(g.cov * t));
                          out.m1 = out.m0 * shifted;
                          out.m2 = out.m0 * (g.cov + shifted * shifted.transpose());
                        },
                        [&](const DiscreteSupport& d) {
                          double shift = -std::numeric_limits<double>::infinity();
                          for (std::size_t j = 0; j < d.points.size(); ++j) {
                            if (d.probs[j] > 0.0) shift = std::max(shift, t.dot(d.points[j]));
                          }
                          double s0 = 0.0;
                          Vector s1 = Vector::Zero(dim_);
                          Matrix s2 = Matrix::Zero(dim_, dim_);
                          for (std::size_t j = 0; j < d.points.size(); ++j) {
                            const double w = d.probs[j] * std::exp(t.dot(d.points[j]) - shift);
                            s0 += w;
                            s1 += w * d.points[j];
                            s2 += w * d.points[j] * d.points[j].transpose();
                          }
                          const double scale = std::exp(shift);
                          out.m0 = scale * s0;
                          out.m1 = scale * s1;
                          out.m2 = scale * s2;
                        },
                        [&](const ProductOfScalars& p) {
                          out.m0 = 1.0;
                          Vector r1(dim_), r2(dim_);
                          for (Eigen::Index j = 0; j < dim_; ++j) {
                            const auto sm = scalar_moments(p.laws[static_cast<std::size_t>(j)], t(j));
                            out.m0 *= sm.a0;
                            r1(j) = sm.r1;
                            r2(j) = sm.r2;
                          }
                          out.m1 = out.m0 * r1;
                          Matrix m = r1 * r1.transpose();
                          m.diagonal() = r2;
                          out.m2 = out.m0 * m;
                        }},
             kind_);
  return out;
}

Vector CovariateModel::mean() const { return exp_moments(Vector::Zero(dim_)).m1; }

Matrix CovariateModel::covariance() const {
  if (const auto* g = std::get_if<GaussianVector>(&kind_)) return g->cov;
  const ExpMoments m = exp_moments(Vector::Zero(dim_));
  return symmetrize(m.m2 - m.m1 * m.m1.transpose());
}

Vector CovariateModel::draw_tilted(const Vector& theta, CounterRng& rng) const {
  if (theta.size() != dim_) throw InvalidArgument("covariate draw: dimension mismatch");
  return std::visit(Overloaded{[&](const GaussianVector& g) -> Vector {
                                 Vector e(dim_);
                                 for (Eigen::Index j = 0; j < dim_; ++j) e(j) = rng.normal();
                                 return g.mean - g.cov * theta + chol_ * e;
                               },
                               [&](const DiscreteSupport& d) -> Vector {
                                 std::vector<double> lw(d.points.size());
                                 for (std::size_t j = 0; j < lw.size(); ++j) {
                                   lw[j] = d.probs[j] > 0.0 ? std::log(d.probs[j]) - theta.dot(d.points[j])
                                                            : -std::numeric_limits<double>::infinity();
                                 }
                                 return d.points[categorical(lw, rng.uniform_pos())];
                               },
                               [&](const ProductOfScalars& p) -> Vector {
                                 Vector z(dim_);
                                 for (Eigen::Index j = 0; j < dim_; ++j) {
                                   z(j) = draw_scalar_tilted(p.laws[static_cast<std::size_t>(j)], theta(j), rng);
                                 }
                                 return z;
                               }},
                    kind_);
}

}  // namespace aftxs
