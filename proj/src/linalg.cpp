#include "aftxs/linalg.hpp"

#include "aftxs/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace aftxs {

double symmetric_condition(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix inverse_symmetric(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidArgument(std::string(what) + ": matrix is not square");
  }
  if (!a.allFinite()) throw NumericalError(std::string(what) + ": matrix has non-finite entries");
  const double cond = symmetric_condition(a);
  if (!(cond <= kMaxConditionNumber)) {
    throw NumericalError(std::string(what) + ": matrix is singular or ill-conditioned (condition " +
                         std::to_string(cond) + ")");
  }
  Eigen::LDLT<Matrix> ldlt(symmetrize(a));
  return symmetrize(ldlt.solve(Matrix::Identity(a.rows(), a.cols())));
}

Vector solve_checked(const Matrix& a, const Vector& b, std::string_view what) {
  if (!a.allFinite() || !b.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite system");
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) == 0.0 ||
      sv(0) / sv(sv.size() - 1) > kMaxConditionNumber) {
    throw NumericalError(std::string(what) + ": matrix is singular or ill-conditioned");
  }
  return svd.solve(b);
}

}  // namespace aftxs
