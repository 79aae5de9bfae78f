#pragma once

#include "aftxs/linalg.hpp"

#include <functional>
#include <span>
#include <vector>

namespace aftxs::stats {

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);
/// Unbiased sample variance (divisor n-1).
double variance(std::span<const double> xs);
double correlation(std::span<const double> xs, std::span<const double> ys);

/// Column mean and covariance (divisor n-1) of vectors, with pairwise sums.
Vector mean(const std::vector<Vector>& xs);
Matrix covariance(const std::vector<Vector>& xs);

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov–Smirnov test with the asymptotic Kolmogorov
/// distribution (Stephens' small-sample correction of the argument).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// sup_y |F_n(y) - F(y)| for a sample against a continuous CDF.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// P(K > t) for the Kolmogorov distribution.
double kolmogorov_survival(double t);

double median(std::vector<double> xs);

}  // namespace aftxs::stats
