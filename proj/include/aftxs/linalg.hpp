#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace aftxs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Inverses whose 2-norm condition number exceeds this are refused.
inline constexpr double kMaxConditionNumber = 1e12;

/// Condition number of a symmetric matrix from its eigenvalues (|max|/|min|).
/// Returns +inf for a singular matrix.
double symmetric_condition(const Matrix& a);

/// Inverse of a symmetric nonsingular matrix. Throws NumericalError naming
/// `what` when the condition number exceeds kMaxConditionNumber.
Matrix inverse_symmetric(const Matrix& a, std::string_view what);

/// Solves a x = b for a general square matrix, with the same conditioning guard
/// (singular values).
Vector solve_checked(const Matrix& a, const Vector& b, std::string_view what);

Matrix symmetrize(const Matrix& a);

double min_eigenvalue(const Matrix& a);

}  // namespace aftxs
