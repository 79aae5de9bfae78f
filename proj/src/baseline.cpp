#include "aftxs/error.hpp"
#include "aftxs/model.hpp"
#include "aftxs/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace aftxs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Tail exponents read off two knots carry rounding error; an exact v^{-2} tail
// must still count as having an infinite mean.
constexpr double kExponentSlack = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InvalidArgument(std::string("baseline parameter '") + what + "' must be positive and finite");
  }
}

// Hazard of Gamma(a, rate r) at v without cancellation in the upper tail.
double gamma_hazard(double a, double r, double v) {
  const double x = r * v;
  const double q = boost::math::gamma_q(a, x);
  const double dp = boost::math::gamma_p_derivative(a, x);  // x^{a-1} e^{-x} / Γ(a)
  if (q > 1e-280) return r * dp / q;
  // Asymptotic expansion of Γ(a, x) x^{1-a} e^{x} for large x.
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= (a - k) / x;
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return r / sum;
}

}  // namespace

// Piecewise-linear density on knots plus optional power-law tail.
struct BaselineModel::TableData {
  std::vector<double> v;       // knots, ascending
  std::vector<double> g;       // normalised density at knots
  std::vector<double> surv;    // Ḡ at knots
  std::vector<double> cum_vg;  // ∫_0^{v_i} u g(u) du
  std::optional<double> beta;  // tail exponent when g_N > 0
  double tail_mass = 0.0;      // ∫_{v_N}^∞ g
  double v_trunc = 0.0;        // support end

  double seg_density(std::size_t i, double x) const {
    const double w = (x - v[i]) / (v[i + 1] - v[i]);
    return g[i] + w * (g[i + 1] - g[i]);
  }
  // ∫_{v_i}^{x} g
  double seg_mass(std::size_t i, double x) const { return 0.5 * (x - v[i]) * (g[i] + seg_density(i, x)); }
  // ∫_{v_i}^{x} u g(u) du; the integrand is quadratic so Simpson is exact.
  double seg_vg(std::size_t i, double x) const {
    const double m = 0.5 * (v[i] + x);
    return (x - v[i]) / 6.0 * (v[i] * g[i] + 4.0 * m * seg_density(i, m) + x * seg_density(i, x));
  }
  std::size_t segment(double x) const {
    auto it = std::upper_bound(v.begin(), v.end(), x);
    const auto idx = static_cast<std::size_t>(it - v.begin());
    return std::min<std::size_t>(idx == 0 ? 0 : idx - 1, v.size() - 2);
  }
  double tail_density(double x) const {
    return g.back() * std::pow(x / v.back(), -*beta);
  }
  double density(double x) const {
    if (x < v.front()) return 0.0;
    if (x <= v.back()) return seg_density(segment(x), x);
    if (!beta || x > v_trunc) return 0.0;
    return tail_density(x);
  }
  double survival(double x) const {
    if (x <= v.front()) return 1.0;
    if (x <= v.back()) {
      const std::size_t i = segment(x);
      return std::max(0.0, surv[i] - seg_mass(i, x));
    }
    if (!beta || x > v_trunc) return 0.0;
    return tail_density(x) * x / (*beta - 1.0);
  }
  double mean() const {
    if (!beta) return cum_vg.back();
    if (*beta <= 2.0 + kExponentSlack) return kInf;
    return cum_vg.back() + g.back() * v.back() * v.back() / (*beta - 2.0);
  }
  // Smallest x with ∫_0^x w(u) du >= target where cum holds the knot cumulatives.
  template <class SegIntegral>
  double invert_in_segment(std::size_t i, double remaining, SegIntegral seg) const {
    double lo = v[i], hi = v[i + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (seg(i, mid) < remaining) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }
  double draw(double u) const {
    // u uniform on (0, 1]; target upper-tail mass Ḡ(v) = u.
    if (beta && u <= tail_mass) {
      const double b = *beta;
      return v.back() * std::pow(u / tail_mass, -1.0 / (b - 1.0));
    }
    // Find segment with surv[i] >= u > surv[i+1].
    std::size_t i = 0;
    while (i + 2 < v.size() && surv[i + 1] >= u) ++i;
    return invert_in_segment(i, surv[i] - u, [this](std::size_t s, double x) { return seg_mass(s, x); });
  }
  double draw_length_biased(double u, double mean_v) const {
    const double target = u * mean_v;
    if (target > cum_vg.back()) {
      if (!beta || *beta <= 2.0) return v.back();
      const double b = *beta;
      const double rem = target - cum_vg.back();
      const double c = g.back() * std::pow(v.back(), b);
      const double base = std::pow(v.back(), 2.0 - b) - rem * (b - 2.0) / c;
      if (base <= 0.0) return v_trunc;
      return std::min(v_trunc, std::pow(base, 1.0 / (2.0 - b)));
    }
    auto it = std::lower_bound(cum_vg.begin(), cum_vg.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cum_vg.begin());
    i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, v.size() - 2);
    return invert_in_segment(i, target - cum_vg[i], [this](std::size_t s, double x) { return seg_vg(s, x); });
  }
};

BaselineModel::BaselineModel(BaselineKind kind) : kind_(std::move(kind)) {
  std::visit(
      Overloaded{
          [&](const Exponential& e) {
            require_positive(e.rate, "rate");
            mean_v_ = 1.0 / e.rate;
            support_end_ = kInf;
          },
          [&](const Weibull& w) {
            require_positive(w.shape, "shape");
            require_positive(w.scale, "scale");
            mean_v_ = w.scale * std::tgamma(1.0 + 1.0 / w.shape);
            support_end_ = kInf;
          },
          [&](const Gamma& g) {
            require_positive(g.shape, "shape");
            require_positive(g.rate, "rate");
            mean_v_ = g.shape / g.rate;
            support_end_ = kInf;
          },
          [&](const Tabulated& t) {
            if (t.v.size() != t.g.size() || t.v.size() < 2) {
              throw InvalidArgument("tabulated baseline needs >= 2 knots with matching v and g arrays");
            }
            auto data = std::make_shared<TableData>();
            data->v = t.v;
            data->g = t.g;
            if (data->v.front() < 0.0) throw InvalidArgument("tabulated baseline knots must be >= 0");
            for (std::size_t i = 0; i < data->v.size(); ++i) {
              if (!std::isfinite(data->v[i]) || !std::isfinite(data->g[i]) || data->g[i] < 0.0) {
                throw InvalidArgument("tabulated baseline: density values must be finite and >= 0");
              }
              if (i > 0 && !(data->v[i] > data->v[i - 1])) {
                throw InvalidArgument("tabulated baseline knots must be strictly increasing");
              }
            }
            const std::size_t n = data->v.size();
            double body = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) body += data->seg_mass(i, data->v[i + 1]);
            double tail = 0.0;
            if (data->g.back() > 0.0) {
              const double g1 = data->g[n - 2], g2 = data->g[n - 1];
              const double v1 = data->v[n - 2], v2 = data->v[n - 1];
              if (!(g1 > 0.0) || !(v1 > 0.0)) {
                throw InvalidArgument("tabulated baseline: cannot extrapolate the tail from the last two knots");
              }
              const double beta = -std::log(g2 / g1) / std::log(v2 / v1);
              if (!(beta > 1.0 + kExponentSlack)) {
                throw InvalidArgument("tabulated baseline: tail exponent " + std::to_string(beta) +
                                      " <= 1, density is not normalisable");
              }
              data->beta = beta;
              tail = g2 * v2 / (beta - 1.0);
            }
            const double total = body + tail;
            if (!(total > 0.0)) throw InvalidArgument("tabulated baseline has zero mass");
            for (double& gi : data->g) gi /= total;
            data->tail_mass = tail / total;
            data->surv.assign(n, 0.0);
            data->surv[n - 1] = data->tail_mass;
            for (std::size_t i = n - 1; i-- > 0;) data->surv[i] = data->surv[i + 1] + data->seg_mass(i, data->v[i + 1]);
            // Pin Ḡ at the first knot to exactly one.
            const double s0 = data->surv[0];
            for (double& s : data->surv) s /= s0;
            for (double& gi : data->g) gi /= s0;
            data->tail_mass /= s0;
            data->cum_vg.assign(n, 0.0);
            for (std::size_t i = 0; i + 1 < n; ++i) data->cum_vg[i + 1] = data->cum_vg[i] + data->seg_vg(i, data->v[i + 1]);
            if (data->beta && data->tail_mass > kTailTruncation) {
              const double b = *data->beta;
              data->v_trunc = data->v.back() * std::pow(kTailTruncation / data->tail_mass, -1.0 / (b - 1.0));
            } else {
              data->v_trunc = data->v.back();
              if (data->beta && data->tail_mass <= kTailTruncation) data->beta.reset();
            }
            mean_v_ = data->mean();
            support_end_ = data->v_trunc;
            table_ = std::move(data);
          },
      },
      kind_);
}

std::string BaselineModel::name() const {
  return std::visit(Overloaded{[](const Exponential& e) { return "Exponential(" + std::to_string(e.rate) + ")"; },
                               [](const Weibull& w) {
                                 return "Weibull(" + std::to_string(w.shape) + "," + std::to_string(w.scale) + ")";
                               },
                               [](const Gamma& g) {
                                 return "Gamma(" + std::to_string(g.shape) + "," + std::to_string(g.rate) + ")";
                               },
                               [](const Tabulated& t) { return "Tabulated(" + std::to_string(t.v.size()) + " knots)"; }},
                    kind_);
}

double BaselineModel::density(double v) const {
  if (v < 0.0) return 0.0;
  return std::visit(Overloaded{[&](const Exponential& e) { return e.rate * std::exp(-e.rate * v); },
                               [&](const Weibull& w) {
                                 const double s = v / w.scale;
                                 return w.shape / w.scale * std::pow(s, w.shape - 1.0) * std::exp(-std::pow(s, w.shape));
                               },
                               [&](const Gamma& g) { return g.rate * boost::math::gamma_p_derivative(g.shape, g.rate * v); },
                               [&](const Tabulated&) { return table_->density(v); }},
                    kind_);
}

double BaselineModel::survival(double v) const {
  if (v <= 0.0) return 1.0;
  return std::visit(Overloaded{[&](const Exponential& e) { return std::exp(-e.rate * v); },
                               [&](const Weibull& w) { return std::exp(-std::pow(v / w.scale, w.shape)); },
                               [&](const Gamma& g) { return boost::math::gamma_q(g.shape, g.rate * v); },
                               [&](const Tabulated&) { return table_->survival(v); }},
                    kind_);
}

double BaselineModel::hazard(double v) const {
  if (v < 0.0) throw DomainError("hazard evaluated at negative time " + std::to_string(v));
  return std::visit(Overloaded{[&](const Exponential& e) { return e.rate; },
                               [&](const Weibull& w) {
                                 return w.shape / w.scale * std::pow(v / w.scale, w.shape - 1.0);
                               },
                               [&](const Gamma& g) { return gamma_hazard(g.shape, g.rate, v); },
                               [&](const Tabulated&) {
                                 if (v > table_->v_trunc) {
                                   throw DomainError("hazard evaluated past the tabulated support at " +
                                                     std::to_string(v));
                                 }
                                 const double s = table_->survival(v);
                                 if (!(s > 0.0)) {
                                   throw DomainError("hazard undefined where the survival function is zero (v=" +
                                                     std::to_string(v) + ")");
                                 }
                                 return table_->density(v) / s;
                               }},
                    kind_);
}

double BaselineModel::v_hazard(double v) const {
  if (v == 0.0) return 0.0;
  return v * hazard(v);
}

double BaselineModel::time_scale() const {
  if (std::isfinite(mean_v_) && mean_v_ > 0.0) return mean_v_;
  if (table_) return table_->v.back();
  return 1.0;
}

double BaselineModel::draw(CounterRng& rng) const {
  return std::visit(Overloaded{[&](const Exponential& e) { return rng.exponential() / e.rate; },
                               [&](const Weibull& w) { return w.scale * std::pow(rng.exponential(), 1.0 / w.shape); },
                               [&](const Gamma& g) { return rng.gamma(g.shape) / g.rate; },
                               [&](const Tabulated&) { return table_->draw(rng.uniform_pos()); }},
                    kind_);
}

double BaselineModel::draw_length_biased(CounterRng& rng) const {
  if (!std::isfinite(mean_v_)) {
    throw ModelError("length-biased law undefined: E_g V is infinite (condition C1)");
  }
  return std::visit(
      Overloaded{[&](const Exponential& e) { return (rng.exponential() + rng.exponential()) / e.rate; },
                 [&](const Weibull& w) { return w.scale * std::pow(rng.gamma(1.0 + 1.0 / w.shape), 1.0 / w.shape); },
                 [&](const Gamma& g) { return rng.gamma(g.shape + 1.0) / g.rate; },
                 [&](const Tabulated&) { return table_->draw_length_biased(rng.uniform_pos(), mean_v_); }},
      kind_);
}

std::optional<double> BaselineModel::tail_exponent() const {
  if (!table_) return std::nullopt;
  return table_->beta;
}

double BaselineModel::tail_c2_integral() const {
  if (!table_ || !table_->beta) return 0.0;
  // Past the last knot g²/Ḡ = (β-1) g / v, so v² g²/Ḡ = (β-1) v g.
  const double b = *table_->beta;
  if (b <= 2.0 + kExponentSlack) return kInf;
  const double vn = table_->v.back();
  const double vt = table_->v_trunc;
  return (b - 1.0) * table_->g.back() * std::pow(vn, b) * std::pow(vt, 2.0 - b) / (b - 2.0);
}

std::vector<double> BaselineModel::breakpoints() const {
  if (!table_) return {};
  return table_->v;
}

quad::Result BaselineModel::integrate_over_support(const quad::Integrand& f, const std::string& name,
                                                   const quad::Options& opts) const {
  if (!table_) return quad::integrate_to_infinity(f, 0.0, time_scale(), name, opts);
  quad::Result total;
  const auto& v = table_->v;
  if (v.front() > 0.0) {
    const auto r = quad::integrate(f, 0.0, v.front(), name, opts);
    total.value += r.value;
    total.error += r.error;
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const auto r = quad::integrate(f, v[i], v[i + 1], name, opts);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
  }
  if (table_->beta && table_->v_trunc > v.back()) {
    // Tail panels on a log scale: x = v_N e^s.
    auto g = [&](double s) {
      const double x = v.back() * std::exp(s);
      return f(x) * x;
    };
    const auto r = quad::integrate(g, 0.0, std::log(table_->v_trunc / v.back()), name, opts);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
  }
  return total;
}

}  // namespace aftxs
