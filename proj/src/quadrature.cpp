#include "aftxs/quadrature.hpp"

#include "aftxs/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <vector>

namespace aftxs::quad {
namespace {

struct RuleData {
  std::vector<double> nodes;
  std::vector<double> weights;
};

RuleData make_rule(int n) {
  RuleData r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

double apply(const Integrand& f, double a, double b, const Rule& rule, const std::string& name) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double fx = f(mid + half * rule.nodes[i]);
    if (!std::isfinite(fx)) {
      throw NumericalError("quadrature of " + name + ": integrand is not finite at x=" +
                           std::to_string(mid + half * rule.nodes[i]));
    }
    sum += rule.weights[i] * fx;
  }
  return half * sum;
}

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

constexpr int kPanelPoints = 15;

Panel make_panel(const Integrand& f, double a, double b, int depth, const std::string& name) {
  const Rule rule = gauss_legendre(kPanelPoints);
  const double m = 0.5 * (a + b);
  const double whole = apply(f, a, b, rule, name);
  const double halves = apply(f, a, m, rule, name) + apply(f, m, b, rule, name);
  return {a, b, halves, std::abs(halves - whole), depth};
}

}  // namespace

Rule gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, RuleData> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return {it->second.nodes, it->second.weights};
}

Result integrate(const Integrand& f, double a, double b, const std::string& name, const Options& opts) {
  if (!(a <= b)) throw InvalidArgument("quadrature of " + name + ": bad interval");
  if (a == b) return {};
  std::priority_queue<Panel> heap;
  heap.push(make_panel(f, a, b, 0, name));
  double total = heap.top().value;
  double err = heap.top().error;
  while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    Panel p = heap.top();
    heap.pop();
    if (p.depth >= opts.max_depth || heap.size() + 2 > opts.max_intervals) {
      throw NumericalError("quadrature of " + name + " did not converge (error estimate " +
                           std::to_string(err) + ")");
    }
    const double m = 0.5 * (p.a + p.b);
    Panel left = make_panel(f, p.a, m, p.depth + 1, name);
    Panel right = make_panel(f, m, p.b, p.depth + 1, name);
    total += left.value + right.value - p.value;
    err += left.error + right.error - p.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  Result r;
  r.intervals = heap.size();
  r.value = 0.0;
  r.error = 0.0;
  while (!heap.empty()) {
    r.value += heap.top().value;
    r.error += heap.top().error;
    heap.pop();
  }
  return r;
}

Result integrate_to_infinity(const Integrand& f, double a, double scale, const std::string& name,
                             const Options& opts) {
  if (!(scale > 0.0)) throw InvalidArgument("quadrature of " + name + ": scale must be positive");
  auto mapped = [&](double t) {
    const double s = 1.0 - t;
    const double x = a + scale * t / s;
    if (!std::isfinite(x)) return 0.0;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx * scale / (s * s);
  };
  return integrate(mapped, 0.0, 1.0, name, opts);
}

double composite(const Integrand& f, std::span<const double> breaks, int points) {
  const Rule rule = gauss_legendre(points);
  double sum = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double a = breaks[i - 1], b = breaks[i];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double cell = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) cell += rule.weights[j] * f(mid + half * rule.nodes[j]);
    sum += half * cell;
  }
  return sum;
}

}  // namespace aftxs::quad
