#include "hessflow/cone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hessflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// (mu_hat - lambda_hat) . (Df(lambda), -1), unnormalized.
double lifted_pairing(std::span<const double> grad, const LiftedPoint& mu, const LiftedPoint& lam) {
  double s = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) s += grad[i] * (mu.lambda[i] - lam.lambda[i]);
  return s - (mu.p - lam.p);
}

}  // namespace

double lifted_value(const OperatorSpec& spec, const LiftedPoint& x) {
  return eval_f(spec, x.lambda) - x.p;
}

UnitNormal normal(const OperatorSpec& spec, std::span<const double> lambda) {
  auto g = grad_f(spec, lambda);
  const double len = norm2(g);
  for (double& x : g) x /= len;
  return {g};
}

std::vector<double> lifted_normal(const OperatorSpec& spec, const LiftedPoint& point) {
  const auto g = grad_f(spec, point.lambda);
  const double len = std::sqrt(1.0 + dot(g, g));
  std::vector<double> out(g.size() + 1);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] / len;
  out.back() = -1.0 / len;
  return out;
}

double distance_to_orthant_boundary(std::span<const double> unit) {
  return std::max(0.0, *std::min_element(unit.begin(), unit.end()));
}

double beta_margin(const OperatorSpec& spec, const std::vector<std::vector<double>>& mu_samples) {
  if (mu_samples.empty()) throw std::invalid_argument("beta_margin: empty sample list");
  double worst = kInf;
  for (const auto& mu : mu_samples)
    worst = std::min(worst, distance_to_orthant_boundary(normal(spec, mu).direction));
  return 0.5 * worst;
}

ConcavityGapResult verify_concavity_gap(const OperatorSpec& spec,
                                        const std::vector<std::vector<double>>& K, double beta,
                                        int budget, std::uint64_t seed) {
  spec.validate();
  if (K.empty()) throw std::invalid_argument("verify_concavity_gap: K is empty");
  if (beta < 0.0) throw std::invalid_argument("verify_concavity_gap: beta must be >= 0");
  if (budget < 1) throw std::invalid_argument("verify_concavity_gap: budget must be >= 1");

  struct MuData {
    std::vector<double> nu;
    double f;
  };
  std::vector<MuData> mus;
  for (const auto& mu : K) mus.push_back({normal(spec, mu).direction, eval_f(spec, mu)});

  ConcavityGapResult res;
  Rng rng(seed);
  double best = kInf;
  const int n = spec.n;
  std::vector<double> g(n), diff(n);
  for (int s = 0; s < budget; ++s) {
    const auto lam = sample_interior(spec.cone(), rng);
    ++res.sampled;
    const double f_lam = eval_f_grad_unchecked(spec, lam, g);
    const double gsum = sum(g);
    const double glen = norm2(g);
    for (std::size_t m = 0; m < K.size(); ++m) {
      for (int i = 0; i < n; ++i) diff[i] = mus[m].nu[i] - g[i] / glen;
      if (norm2(diff) < beta) continue;
      ++res.constrained;
      double pair = 0.0;
      for (int i = 0; i < n; ++i) pair += g[i] * (K[m][i] - lam[i]);
      const double gap = (pair - mus[m].f + f_lam) / (1.0 + gsum);
      if (gap <= 0.0) ++res.violations;
      if (gap < best) {
        best = gap;
        res.worst_mu = K[m];
        res.worst_lambda = lam;
      }
    }
  }
  if (res.constrained > 0) res.epsilon_hat = best;
  return res;
}

std::vector<LiftedPoint> sample_level_set_at_radius(const OperatorSpec& spec, double sigma,
                                                    double radius, double p_lo, double p_hi,
                                                    int count, Rng& rng) {
  const int n = spec.n;
  const ConeId cone = spec.cone();
  const double cinv = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<LiftedPoint> out;
  std::vector<double> lam(n), w(n);

  for (int j = 0; j < count; ++j) {
    const double target = p_lo + (p_hi - p_lo) * (count == 1 ? 0.5 : (j + rng.uniform()) / count);
    // Unit tangent direction orthogonal to the diagonal.
    w = rng.direction(n);
    const double wc = sum(w) * cinv;
    for (double& x : w) x -= wc * cinv;
    const double wl = norm2(w);
    if (wl < 1e-8) continue;
    for (double& x : w) x /= wl;

    auto point = [&](double theta) {
      const double c = std::cos(theta), s = std::sin(theta);
      for (int i = 0; i < n; ++i) lam[i] = radius * (c * cinv + s * w[i]);
      return std::span<const double>(lam);
    };
    auto inside = [&](double theta) { return cone_margin(cone, point(theta)) > 0.0; };

    const double level = sigma + target;
    if (eval_f_grad_unchecked(spec, point(0.0), {}) < level) continue;

    double in = 0.0, out_theta = 3.14159265358979323846;
    for (int it = 0; it < 200 && out_theta - in > 0.0; ++it) {
      const double mid = 0.5 * (in + out_theta);
      if (mid <= in || mid >= out_theta) break;
      (inside(mid) ? in : out_theta) = mid;
    }
    const double edge = in;
    // The level must be crossed before the cone boundary.
    if (eval_f_grad_unchecked(spec, point(edge), {}) >= level) continue;

    double lo = 0.0, hi = edge;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double f = eval_f_grad_unchecked(spec, point(mid), {});
      if (std::abs(f - level) <= 1e-12 * (1.0 + std::abs(level))) {
        lo = mid;
        break;
      }
      (f >= level ? lo : hi) = mid;
    }
    point(lo);
    if (!(cone_margin(cone, lam) > 0.0)) continue;
    const double p = eval_f_grad_unchecked(spec, lam, {}) - sigma;
    const double slack = 1e-9 * (1.0 + std::abs(p));
    if (p < p_lo - slack || p > p_hi + slack) continue;
    out.push_back({lam, p});
  }
  return out;
}

bool CapSample::cap_bounded_on(double r0, double r1, double tolerance) const {
  bool any = false;
  for (const auto& r : radii) {
    if (r.radius < r0 || r.radius > r1 || r.skipped) continue;
    any = true;
    if (!(r.h_min > tolerance)) return false;
  }
  return any;
}

CapSample cap_set_sample(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat,
                         double p_lo, double p_hi, const std::vector<double>& radii, int budget,
                         std::uint64_t seed) {
  spec.validate();
  if (budget < 1) throw std::invalid_argument("cap_set_sample: budget must be >= 1");
  if (!(p_lo <= p_hi)) throw std::invalid_argument("cap_set_sample: empty p band");
  for (double r : radii)
    if (!(r > 0.0)) throw std::invalid_argument("cap_set_sample: radii must be positive");

  CapSample out;
  out.sigma = sigma;
  out.mu_hat = mu_hat;
  Rng rng(seed);
  std::vector<double> g(spec.n);
  for (double r : radii) {
    const auto pts = sample_level_set_at_radius(spec, sigma, r, p_lo, p_hi, budget, rng);
    RadiusSummary summary{r, static_cast<int>(pts.size()), kInf, pts.empty()};
    if (pts.empty()) {
      std::ostringstream os;
      os << "radius " << r << ": no admissible level-set point with p in [" << p_lo << ", "
         << p_hi << "]; skipped";
      out.notices.push_back(os.str());
    }
    for (const auto& lp : pts) {
      eval_f_grad_unchecked(spec, lp.lambda, g);
      const double inner = lifted_pairing(g, mu_hat, lp) / std::sqrt(1.0 + dot(g, g));
      summary.h_min = std::min(summary.h_min, inner);
      out.points.push_back(lp);
      out.inner.push_back(inner);
      out.in_cap.push_back(inner <= 0.0);
    }
    out.radii.push_back(summary);
  }
  return out;
}

double segment_lift_max(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat,
                        const LiftedPoint& lambda_hat) {
  const int n = spec.n;
  std::vector<double> x(n);
  auto value = [&](double t) {
    for (int i = 0; i < n; ++i) x[i] = t * mu_hat.lambda[i] + (1.0 - t) * lambda_hat.lambda[i];
    const double p = t * mu_hat.p + (1.0 - t) * lambda_hat.p;
    return eval_f_grad_unchecked(spec, x, {}) - p - sigma;
  };
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = value(d);
    }
  }
  return std::max({fc, fd, value(0.0), value(1.0)});
}

double theta_R(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat, double radius,
               double delta, int budget, std::uint64_t seed) {
  spec.validate();
  if (!(radius > norm2(mu_hat.lambda)))
    throw std::invalid_argument("theta_R: radius must exceed |mu|");
  if (!(delta > 0.0)) throw std::invalid_argument("theta_R: delta must be positive");
  if (budget < 1) throw std::invalid_argument("theta_R: budget must be >= 1");
  Rng rng(seed);
  const auto pts = sample_level_set_at_radius(spec, sigma, radius, mu_hat.p - delta,
                                              mu_hat.p + delta, budget, rng);
  if (pts.empty())
    throw InvalidConfiguration("theta_R: no level-set point at radius " + std::to_string(radius) +
                               " within the p band");
  double theta = kInf;
  for (const auto& lp : pts) theta = std::min(theta, segment_lift_max(spec, sigma, mu_hat, lp));
  return std::max(0.0, theta);
}

ParabolicGapResult verify_parabolic_gap(const OperatorSpec& spec, double sigma,
                                        const std::vector<LiftedPoint>& K, double eps, int budget,
                                        std::uint64_t seed, double eta) {
  spec.validate();
  if (K.empty()) throw std::invalid_argument("verify_parabolic_gap: K is empty");
  if (eps < 0.0) throw std::invalid_argument("verify_parabolic_gap: eps must be >= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("verify_parabolic_gap: eta must be positive");
  if (budget < 2) throw std::invalid_argument("verify_parabolic_gap: budget must be >= 2");

  double q_lo = kInf, q_hi = -kInf, mu_norm = 0.0;
  for (const auto& mu : K) {
    eval_f(spec, mu.lambda);
    q_lo = std::min(q_lo, mu.p);
    q_hi = std::max(q_hi, mu.p);
    mu_norm = std::max(mu_norm, norm2(mu.lambda));
  }
  ParabolicGapResult res;
  res.band_lo = q_lo - eta;
  res.band_hi = q_hi + eta;

  constexpr int kRadii = 24;
  std::vector<double> radii(kRadii);
  for (int j = 0; j < kRadii; ++j) radii[j] = 0.25 * (1.0 + mu_norm) * std::ldexp(1.0, j);
  const int per_radius = std::max(1, budget / (2 * kRadii));

  std::vector<double> g(spec.n);
  struct Worst {
    double value = kInf;
    LiftedPoint mu, lam;
  };
  // Per-radius minimum of the gap over one sample stream.
  auto scan = [&](Rng& rng, std::vector<Worst>& per, int& count) {
    per.assign(kRadii, Worst{});
    for (int j = 0; j < kRadii; ++j) {
      const auto pts = sample_level_set_at_radius(spec, sigma, radii[j], res.band_lo, res.band_hi,
                                                  per_radius, rng);
      for (const auto& lp : pts) {
        ++count;
        eval_f_grad_unchecked(spec, lp.lambda, g);
        const double gsum = sum(g);
        for (const auto& mu : K) {
          const double v = lifted_pairing(g, mu, lp) - eps * gsum;
          if (v < per[j].value) per[j] = {v, mu, lp};
        }
      }
    }
  };

  Rng search_rng(seed);
  Rng holdout_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Worst> search, holdout;
  scan(search_rng, search, res.sampled);

  // Smallest grid radius whose tail minimum is positive.
  int start = -1;
  double tail = kInf;
  for (int j = kRadii - 1; j >= 0; --j) {
    tail = std::min(tail, search[j].value);
    if (tail > 0.0 && tail < kInf) start = j;
    if (!(tail > 0.0)) break;
  }

  const auto overall = std::min_element(search.begin(), search.end(),
                                        [](const Worst& a, const Worst& b) { return a.value < b.value; });
  res.worst_mu = overall->mu;
  res.worst_lambda = overall->lam;
  res.worst_value = overall->value;
  if (start < 0) return res;

  scan(holdout_rng, holdout, res.sampled);
  double theta = kInf;
  for (int j = start; j < kRadii; ++j) {
    theta = std::min({theta, search[j].value, holdout[j].value});
    if (!(holdout[j].value > 0.0)) {
      ++res.violations;
      if (holdout[j].value < res.worst_value || res.violations == 1) {
        res.worst_mu = holdout[j].mu;
        res.worst_lambda = holdout[j].lam;
        res.worst_value = holdout[j].value;
      }
    }
  }
  res.radius_k = radii[start];
  res.theta_k = theta;
  res.certified = res.violations == 0 && theta > 0.0;
  return res;
}

}  // namespace hessflow
