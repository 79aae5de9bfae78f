#include "aftxs/stats.hpp"

#include "aftxs/error.hpp"

#include <algorithm>
#include <cmath>

namespace aftxs::stats {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean of an empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("variance needs at least two values");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("correlation needs paired samples");
  const double mx = mean(xs), my = mean(ys);
  std::vector<double> cxy(xs.size()), cxx(xs.size()), cyy(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    cxy[i] = dx * dy;
    cxx[i] = dx * dx;
    cyy[i] = dy * dy;
  }
  return pairwise_sum(cxy) / std::sqrt(pairwise_sum(cxx) * pairwise_sum(cyy));
}

namespace {

// Pairwise sum of f(x_i) component (r, c) over all vectors.
template <class F>
double pairwise_entry(const std::vector<Vector>& xs, F f) {
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = f(xs[i]);
  return pairwise_sum(v);
}

}  // namespace

Vector mean(const std::vector<Vector>& xs) {
  if (xs.empty()) throw InvalidArgument("mean of an empty sample");
  const Eigen::Index k = xs.front().size();
  Vector m(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    m(j) = pairwise_entry(xs, [j](const Vector& x) { return x(j); }) / static_cast<double>(xs.size());
  }
  return m;
}

Matrix covariance(const std::vector<Vector>& xs) {
  if (xs.size() < 2) throw InvalidArgument("covariance needs at least two values");
  const Vector m = mean(xs);
  const Eigen::Index k = m.size();
  Matrix c(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index s = r; s < k; ++s) {
      c(r, s) = c(s, r) =
          pairwise_entry(xs, [&](const Vector& x) { return (x(r) - m(r)) * (x(s) - m(s)); }) /
          static_cast<double>(xs.size() - 1);
    }
  }
  return c;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    s += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw InvalidArgument("KS test needs a nonempty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median of an empty sample");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(xs.begin(), xs.begin() + mid));
}

}  // namespace aftxs::stats
