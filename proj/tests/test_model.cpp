#include "doctest.h"
#include "oracle.hpp"

#include "aftxs/error.hpp"
#include "aftxs/information.hpp"
#include "aftxs/model.hpp"

#include <cmath>

using namespace aftxs;

namespace {

ModelSpec flagship(double theta = 0.5, Variant v = Variant::kKnownH) {
  return ModelSpec(RegressionParam{theta}, BaselineModel(Exponential{1.0}),
                   CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}), v);
}

CovariateModel binary() {
  Vector a(1), b(1);
  a << -1;
  b << 1;
  return CovariateModel(DiscreteSupport{{a, b}, {0.5, 0.5}});
}

Observation obs(double x, std::initializer_list<double> z) {
  Observation o;
  o.x = x;
  o.z = Vector(static_cast<Eigen::Index>(z.size()));
  int i = 0;
  for (double v : z) o.z(i++) = v;
  return o;
}

Tabulated pareto_table() {
  Tabulated t;
  for (int i = 0; i <= 12; ++i) {
    double v = 1 + 0.25 * i;
    t.v.push_back(v);
    t.g.push_back(1 / (v * v));
  }
  return t;
}

std::vector<BaselineModel> builtin_baselines() {
  Tabulated tri{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}};
  return {BaselineModel(Exponential{1.0}), BaselineModel(Exponential{2.5}), BaselineModel(Weibull{2.0, 1.0}),
          BaselineModel(Weibull{0.7, 1.3}), BaselineModel(Gamma{2.5, 1.5}), BaselineModel(Gamma{0.6, 1.0}),
          BaselineModel(tri)};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("validation of the flagship spec") {
  auto rep = validate_model(flagship());
  CHECK(rep.ok());
  for (auto id : {"C1", "C2", "C3", "C4", "C5"}) {
    auto c = rep.find(id);
    REQUIRE_MESSAGE(c, id);
    CHECK(c->passed);
  }
  // E_h e^{-θW} = e^{θ²/2}
  REQUIRE(rep.find("C4"));
  CHECK(rep.find("C4")->value == doctest::Approx(std::exp(0.125)).epsilon(1e-9));
}

TEST_CASE("heavy tabulated tail fails C1") {
  BaselineModel b(pareto_table());
  CHECK(std::isinf(b.mean_v()));
  ModelSpec s(RegressionParam{0.5}, b, CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}),
              Variant::kKnownH);
  auto rep = validate_model(s);
  CHECK_FALSE(rep.ok());
  REQUIRE(rep.find("C1"));
  CHECK_FALSE(rep.find("C1")->passed);
  CHECK_THROWS_AS(rep.require(), ModelError);
}

TEST_CASE("single-point covariate fails C3") {
  Vector p(1);
  p << 1;
  ModelSpec s(RegressionParam{0.5}, BaselineModel(Exponential{1.0}), CovariateModel(DiscreteSupport{{p}, {1.0}}),
              Variant::kKnownH);
  auto rep = validate_model(s);
  REQUIRE(rep.find("C3"));
  CHECK_FALSE(rep.find("C3")->passed);
  try {
    rep.require();
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("C3") != std::string::npos);
  }
}

TEST_CASE("mean-zero conditions for the unknown-h variant") {
  auto ok = validate_model(flagship(0.5, Variant::kUnknownHMeanZero));
  CHECK(ok.ok());
  CHECK(ok.find("H1"));
  CHECK(ok.find("H2"));
  Vector m(1);
  m << 0.3;
  ModelSpec shifted(RegressionParam{0.5}, BaselineModel(Exponential{1.0}),
                    CovariateModel(GaussianVector{m, Matrix::Identity(1, 1)}), Variant::kUnknownHMeanZero);
  auto bad = validate_model(shifted);
  REQUIRE(bad.find("H1"));
  CHECK_FALSE(bad.find("H1")->passed);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(RegressionParam(Vector(0)), InvalidArgument);
  CHECK_THROWS_AS(RegressionParam{std::nan("")}, InvalidArgument);
  CHECK_THROWS_AS(BaselineModel(Exponential{0.0}), InvalidArgument);
  CHECK_THROWS_AS(BaselineModel(Weibull{-1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(BaselineModel(Tabulated{{0.0, 1.0}, {0.0, 0.0}}), InvalidArgument);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(CovariateModel(GaussianVector{Vector::Zero(2), asym}), InvalidArgument);
  CHECK_THROWS_AS(CovariateModel(DiscreteSupport{{Vector::Zero(1)}, {0.5}}), InvalidArgument);
}

TEST_CASE("pseudo_response") {
  CHECK(pseudo_response(RegressionParam{0.0}, obs(3.7, {2.0})) == 3.7);
  CHECK(pseudo_response(RegressionParam{std::log(2.0)}, obs(3.0, {1.0})) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(pseudo_response(RegressionParam{1.0, -1.0}, obs(2.0, {0.5, 0.5})) == 2.0);
  try {
    pseudo_response(RegressionParam{1.0}, obs(1.0, {1000.0}), 41);
    FAIL("expected overflow error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("41") != std::string::npos);
  }
}

TEST_CASE("density_gy") {
  CHECK(density_gy(BaselineModel(Exponential{1.0}), 0.0) == doctest::Approx(1.0));
  double ev = oracle::half_line([](double v) { return 2 * v * v * std::exp(-v * v); });
  CHECK(ev == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));
  CHECK(density_gy(BaselineModel(Weibull{2.0, 1.0}), 0.0) == doctest::Approx(1 / ev).epsilon(1e-10));
  CHECK(density_gy(BaselineModel(Weibull{2.0, 1.0}), 0.0) == doctest::Approx(1.12838).epsilon(1e-5));
  for (auto& b : builtin_baselines()) CHECK(density_gy(b, -1.0) == 0.0);
}

TEST_CASE("joint_density") {
  auto s = flagship();
  Vector z0 = Vector::Zero(1);
  CHECK(joint_density(s, 0.0, z0) == doctest::Approx(0.35208).epsilon(1e-4));
  double mgf = oracle::real_line([](double w) { return std::exp(-0.5 * w) * oracle::normal_pdf(w); });
  CHECK(joint_density(s, 0.0, z0) == doctest::Approx(oracle::normal_pdf(0) / mgf).epsilon(1e-10));
  CHECK(joint_density(s, -0.1, z0) == 0.0);

  auto s0 = flagship(0.0);
  for (double x : {0.1, 1.0, 3.0})
    for (double z : {-1.0, 0.4}) {
      Vector zz(1);
      zz << z;
      CHECK(joint_density(s0, x, zz) == doctest::Approx(std::exp(-x) * oracle::normal_pdf(z)).epsilon(1e-12));
    }
}

TEST_CASE("joint density factorisation on a grid") {
  ModelSpec s(RegressionParam{0.7}, BaselineModel(Weibull{2.0, 1.0}),
              CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}), Variant::kKnownH);
  for (double x = 0.05; x < 3; x += 0.35)
    for (double z = -2; z <= 2; z += 0.5) {
      Vector zz(1);
      zz << z;
      Observation o{x, zz};
      double y = pseudo_response(s.theta, o);
      double rhs = density_gy(s.baseline, y) * std::exp(0.7 * z) * covariate_density(s, zz);
      CHECK(joint_density(s, x, zz) == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("covariate_density") {
  double sigma = 1.5, th = 0.4;
  Matrix cov = Matrix::Identity(2, 2) * sigma * sigma;
  ModelSpec s(RegressionParam{th, -th}, BaselineModel(Exponential{1.0}),
              CovariateModel(GaussianVector{Vector::Zero(2), cov}), Variant::kKnownH);
  // tilted law is N(-σ²θ, σ²I); its normalisation by quadrature
  double mass = oracle::real_line([&](double a) {
    return oracle::real_line([&](double b) {
      Vector z(2);
      z << a, b;
      return covariate_density(s, z);
    });
  });
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  for (double a : {-1.0, 0.0, 2.0}) {
    Vector z(2);
    z << a, 0.3;
    double expect = oracle::normal_pdf(a, -sigma * sigma * th, sigma) * oracle::normal_pdf(0.3, sigma * sigma * th, sigma);
    CHECK(covariate_density(s, z) == doctest::Approx(expect).epsilon(1e-12));
  }

  auto s0 = flagship(0.0);
  Vector z(1);
  z << 0.8;
  CHECK(covariate_density(s0, z) == doctest::Approx(oracle::normal_pdf(0.8)).epsilon(1e-14));

  ModelSpec sb(RegressionParam{0.0}, BaselineModel(Exponential{1.0}), binary(), Variant::kKnownH);
  Vector one(1);
  one << 1;
  CHECK(covariate_density(sb, one) == doctest::Approx(0.5));
  Vector off(1);
  off << 0.5;
  CHECK(covariate_density(sb, off) == 0.0);
}

TEST_CASE("conditional_density") {
  auto s0 = flagship(0.0);
  Vector z(1);
  z << 0.9;
  for (double x : {0.2, 1.0, 4.0}) CHECK(conditional_density(s0, x, z) == doctest::Approx(std::exp(-x)).epsilon(1e-14));

  auto s = flagship(std::log(2.0));
  Vector one(1);
  one << 1;
  CHECK(conditional_density(s, 1.0, one) == doctest::Approx(2 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(conditional_density(s, 1.0, one) == doctest::Approx(0.27067).epsilon(1e-5));

  for (auto& b : builtin_baselines()) {
    ModelSpec sw(RegressionParam{0.7}, b, CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}),
                 Variant::kKnownH);
    Vector zz(1);
    zz << 0.3;
    double total = oracle::half_line([&](double x) { return conditional_density(sw, x, zz); });
    CHECK_MESSAGE(total == doctest::Approx(1.0).epsilon(1e-8), b.name());
  }
}

TEST_CASE("true_hazard") {
  BaselineModel e(Exponential{1.0});
  for (double y : {0.0, 0.3, 5.0, 30.0}) CHECK(true_hazard(e, y) == doctest::Approx(1.0));
  BaselineModel w(Weibull{2.0, 1.0});
  CHECK(true_hazard(w, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(true_hazard(w, 2.0) == doctest::Approx(4.0).epsilon(1e-14));
  BaselineModel t(Tabulated{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}});
  CHECK_THROWS_AS(true_hazard(t, 2.5), DomainError);
  // g/Ḡ against the definition
  BaselineModel g(Gamma{2.5, 1.5});
  for (double y : {0.2, 1.0, 3.0}) {
    double surv = oracle::half_line([&](double u) { return g.density(y + u); });
    CHECK(true_hazard(g, y) == doctest::Approx(g.density(y) / surv).epsilon(1e-9));
  }
}

TEST_CASE("normalisation and E Yλ = 1 for built-in baselines") {
  for (auto& b : builtin_baselines()) {
    double end = b.support_end();
    double mass, eyl;
    if (std::isfinite(end)) {
      mass = oracle::interval([&](double y) { return density_gy(b, y); }, 0, end);
      eyl = oracle::interval([&](double y) { return y * b.density(y) / b.mean_v(); }, 0, end);
    } else {
      mass = oracle::half_line([&](double y) { return density_gy(b, y); });
      eyl = oracle::half_line([&](double y) { return y * b.density(y) / b.mean_v(); });
    }
    CHECK_MESSAGE(std::abs(mass - 1) < 1e-8, b.name());
    CHECK_MESSAGE(std::abs(eyl - 1) < 1e-6, b.name());
    CHECK_MESSAGE(std::abs(expected_ylambda_moments(b).m1 - 1) < 1e-6, b.name());
  }
}

TEST_CASE("tilted covariance is positive definite") {
  Vector a(2), b(2), c(2);
  a << -1, 0;
  b << 1, 1;
  c << 0, -1;
  std::vector<CovariateModel> laws{
      CovariateModel(GaussianVector{Vector::Zero(1), Matrix::Identity(1, 1)}), binary(),
      CovariateModel(DiscreteSupport{{a, b, c}, {0.3, 0.3, 0.4}}),
      CovariateModel(ProductOfScalars{{NormalLaw{0, 1}, UniformLaw{-1, 1}}})};
  for (auto& cov : laws) {
    Vector th = Vector::Constant(cov.dim(), 0.4);
    auto m = tilted_moments(cov, th);
    CHECK(min_eigenvalue(m.sigma_z) > 0);
  }
}

}
