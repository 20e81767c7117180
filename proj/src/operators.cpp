#include "hessflow/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hessflow {

std::vector<double> Rng::direction(int n) {
  std::vector<double> v(n);
  double len = 0.0;
  while (len < 1e-12) {
    for (double& x : v) x = normal();
    len = norm2(v);
  }
  for (double& x : v) x /= len;
  return v;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string ConeId::name() const {
  switch (kind) {
    case ConeKind::GammaK: return "GammaK(" + std::to_string(k) + ")";
    case ConeKind::PK: return "PK(" + std::to_string(k) + ")";
    case ConeKind::GammaN: return "GammaN";
  }
  return "?";
}

OperatorSpec OperatorSpec::sigma_root(int k, int n) { return {Family::SigmaKRoot, k, 0, n}; }
OperatorSpec OperatorSpec::sigma_quotient(int k, int l, int n) {
  return {Family::SigmaQuotient, k, l, n};
}
OperatorSpec OperatorSpec::log_pk(int k, int n) { return {Family::LogPK, k, 0, n}; }

ConeId OperatorSpec::cone() const {
  return family == Family::LogPK ? ConeId::p_k(k, n) : ConeId::gamma_k(k, n);
}

std::string OperatorSpec::name() const {
  std::ostringstream os;
  switch (family) {
    case Family::SigmaKRoot: os << "SigmaKRoot(" << k << ")"; break;
    case Family::SigmaQuotient: os << "SigmaQuotient(" << k << "," << l << ")"; break;
    case Family::LogPK: os << "LogPK(" << k << ")"; break;
  }
  os << " n=" << n;
  return os.str();
}

void OperatorSpec::validate() const {
  if (n < 2) throw std::invalid_argument("operator dimension n must be >= 2");
  if (k < 1 || k > n)
    throw std::invalid_argument("operator order k=" + std::to_string(k) + " outside [1, n=" +
                                std::to_string(n) + "]");
  if (family == Family::SigmaQuotient && (l < 0 || l >= k))
    throw std::invalid_argument("quotient order l=" + std::to_string(l) + " must satisfy 0 <= l < k");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

namespace {

void check_dim(std::span<const double> lambda, int n, const char* who) {
  if (static_cast<int>(lambda.size()) != n)
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(n) +
                                " eigenvalues, got " + std::to_string(lambda.size()));
}

// Calls fn(sum, indices, count) for every k-subset of {0..n-1}.
template <typename Fn>
void for_each_subset(std::span<const double> lambda, int k, Fn&& fn) {
  const int n = static_cast<int>(lambda.size());
  std::array<int, 32> buf;
  std::vector<int> dyn;
  if (k > 32) dyn.resize(k);
  const std::span<int> idx = k > 32 ? std::span<int>(dyn) : std::span<int>(buf.data(), k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    double s = 0.0;
    for (int i : idx) s += lambda[i];
    fn(s, std::span<const int>(idx));
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

void require_inside(const OperatorSpec& spec, std::span<const double> lambda) {
  const double m = cone_margin(spec.cone(), lambda);
  if (!(m > 0.0)) {
    std::ostringstream os;
    os << spec.name() << ": lambda outside " << spec.cone().name() << " (relative margin " << m
       << ")";
    throw ConeViolation(os.str(), m);
  }
}

// Scratch storage that stays on the stack for the dimensions grids use.
class Scratch {
 public:
  explicit Scratch(std::size_t size) {
    if (size > buf_.size()) dyn_.resize(size);
    data_ = size > buf_.size() ? dyn_.data() : buf_.data();
  }
  double* data() { return data_; }

 private:
  std::array<double, 32> buf_{};
  std::vector<double> dyn_;
  double* data_;
};

// q = sigma_k / sigma_l and its gradient (written to `grad`), plus the
// Hessian when `hess` is non-null.
double quotient(std::span<const double> lambda, int k, int l, double* grad, Matrix* hess) {
  const int n = static_cast<int>(lambda.size());
  const double a = sigma_k(lambda, k);
  const double b = l == 0 ? 1.0 : sigma_k(lambda, l);
  Scratch sa(n), sb(n);
  double* ai = sa.data();
  double* bi = sb.data();
  for (int i = 0; i < n; ++i) {
    ai[i] = sigma_k_without(lambda, k - 1, i);
    bi[i] = l > 0 ? sigma_k_without(lambda, l - 1, i) : 0.0;
  }
  for (int i = 0; i < n; ++i) grad[i] = (ai[i] * b - a * bi[i]) / (b * b);
  if (hess) {
    *hess = Matrix(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double aij = i == j ? 0.0 : sigma_k_without(lambda, k - 2, i, j);
        const double bij = (i == j || l == 0) ? 0.0 : sigma_k_without(lambda, l - 2, i, j);
        double v = aij / b;
        if (l > 0)
          v += -(ai[i] * bi[j] + ai[j] * bi[i]) / (b * b) - a * bij / (b * b) +
               2.0 * a * bi[i] * bi[j] / (b * b * b);
        (*hess)(i, j) = v;
      }
    }
  }
  return a / b;
}

double sigma_family_eval(const OperatorSpec& spec, std::span<const double> lambda,
                         std::span<double> grad, Matrix* hess) {
  const int n = static_cast<int>(lambda.size());
  const int m = spec.k - spec.l;
  Matrix qh;
  Scratch sg(n);
  double* qg = sg.data();
  const double q = quotient(lambda, spec.k, spec.l, qg, hess ? &qh : nullptr);
  const double inv_m = 1.0 / m;
  const double f = m == 1 ? q : std::pow(q, inv_m);
  // f_i = (1/m) q^{1/m - 1} q_i
  const double scale = m == 1 ? 1.0 : inv_m * f / q;
  if (!grad.empty())
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = scale * qg[i];
  if (hess) {
    *hess = Matrix(n);
    const double curv = (inv_m - 1.0) / q;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) (*hess)(i, j) = scale * (qh(i, j) + curv * qg[i] * qg[j]);
  }
  return f;
}

double log_pk_eval(const OperatorSpec& spec, std::span<const double> lambda,
                   std::span<double> grad, Matrix* hess) {
  const int n = static_cast<int>(lambda.size());
  double f = 0.0;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  if (hess) *hess = Matrix(n);
  for_each_subset(lambda, spec.k, [&](double s, std::span<const int> idx) {
    f += std::log(s);
    if (!grad.empty())
      for (int i : idx) grad[i] += 1.0 / s;
    if (hess) {
      const double c = -1.0 / (s * s);
      for (int i : idx)
        for (int j : idx) (*hess)(i, j) += c;
    }
  });
  return f;
}

}  // namespace

double sigma_k(std::span<const double> lambda, int k) {
  if (k < 0 || k > static_cast<int>(lambda.size()))
    throw std::invalid_argument("sigma_k: order " + std::to_string(k) + " outside [0, " +
                                std::to_string(lambda.size()) + "]");
  return sigma_k_without(lambda, k, -1, -1);
}

double sigma_k_without(std::span<const double> lambda, int k, int skip_a, int skip_b) {
  if (k < 0) return 0.0;
  if (k == 0) return 1.0;
  const int n = static_cast<int>(lambda.size());
  if (k > n) return 0.0;
  // e[j] holds e_j over the prefix processed so far.
  double buf[16];
  std::vector<double> dyn;
  double* e = buf;
  if (k + 1 > 16) {
    dyn.assign(k + 1, 0.0);
    e = dyn.data();
  }
  e[0] = 1.0;
  for (int j = 1; j <= k; ++j) e[j] = 0.0;
  int seen = 0;
  for (int m = 0; m < n; ++m) {
    if (m == skip_a || m == skip_b) continue;
    ++seen;
    const int top = std::min(k, seen);
    for (int j = top; j >= 1; --j) e[j] += lambda[m] * e[j - 1];
  }
  return e[k];
}

double p_k(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 1 || k > n) throw std::invalid_argument("p_k: k must satisfy 1 <= k <= n");
  double prod = 1.0;
  for_each_subset(lambda, k, [&](double s, std::span<const int>) { prod *= s; });
  return prod;
}

double cone_margin(const ConeId& cone, std::span<const double> lambda) {
  check_dim(lambda, cone.n, "cone_margin");
  const double scale = 1.0 + norm2(lambda);
  double worst = std::numeric_limits<double>::infinity();
  switch (cone.kind) {
    case ConeKind::GammaN:
      for (double x : lambda) worst = std::min(worst, x / scale);
      break;
    case ConeKind::GammaK: {
      double pw = 1.0;
      for (int j = 1; j <= cone.k; ++j) {
        pw *= scale;
        worst = std::min(worst, sigma_k(lambda, j) / pw);
      }
      break;
    }
    case ConeKind::PK:
      for_each_subset(lambda, cone.k,
                      [&](double s, std::span<const int>) { worst = std::min(worst, s / scale); });
      break;
  }
  return worst;
}

bool cone_contains(const ConeId& cone, std::span<const double> lambda, double margin) {
  if (margin < 0.0) throw std::invalid_argument("cone_contains: margin must be >= 0");
  return cone_margin(cone, lambda) > margin;
}

double eval_f_grad_unchecked(const OperatorSpec& spec, std::span<const double> lambda,
                             std::span<double> grad) {
  if (spec.family == Family::LogPK) return log_pk_eval(spec, lambda, grad, nullptr);
  return sigma_family_eval(spec, lambda, grad, nullptr);
}

double eval_f(const OperatorSpec& spec, std::span<const double> lambda) {
  check_dim(lambda, spec.n, "eval_f");
  require_inside(spec, lambda);
  return eval_f_grad_unchecked(spec, lambda, {});
}

std::vector<double> grad_f(const OperatorSpec& spec, std::span<const double> lambda) {
  check_dim(lambda, spec.n, "grad_f");
  require_inside(spec, lambda);
  std::vector<double> g(spec.n);
  eval_f_grad_unchecked(spec, lambda, g);
  return g;
}

Matrix hess_f(const OperatorSpec& spec, std::span<const double> lambda) {
  check_dim(lambda, spec.n, "hess_f");
  require_inside(spec, lambda);
  Matrix h;
  if (spec.family == Family::LogPK)
    log_pk_eval(spec, lambda, {}, &h);
  else
    sigma_family_eval(spec, lambda, {}, &h);
  return h;
}

std::vector<double> sample_interior(const ConeId& cone, Rng& rng, double min_margin) {
  const int n = cone.n;
  const double diag = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> lambda(n);
  while (true) {
    const std::vector<double> w = rng.direction(n);
    const double shift = rng.uniform(0.0, 2.0);
    const double radius = std::exp(rng.uniform(-3.0, 3.0));
    for (int i = 0; i < n; ++i) lambda[i] = radius * (w[i] + shift * diag);
    if (cone_margin(cone, lambda) > min_margin) return lambda;
  }
}

const ConditionResult& StructureReport::at(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw std::out_of_range("no structure condition named " + id);
}

bool StructureReport::all_hold() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.holds; });
}

namespace {

ConditionResult make_result(const char* id, double margin) {
  ConditionResult r;
  r.id = id;
  r.holds = true;
  r.margin = margin;
  return r;
}

std::vector<double> scaled(std::span<const double> v, double s) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x *= s;
  return out;
}

// Moves lambda along its ray so that f equals `target`, using homogeneity.
std::vector<double> rescale_to_level(const OperatorSpec& spec, std::span<const double> lambda,
                                     double target) {
  const double f = eval_f(spec, lambda);
  double s;
  if (spec.degree_one()) {
    s = target / f;
  } else {
    s = std::exp((target - f) / binomial(spec.n, spec.k));
  }
  return scaled(lambda, s);
}

ConditionResult check_monotone_concave(const OperatorSpec& spec,
                                       const std::vector<std::vector<double>>& pts,
                                       ConditionResult& concave) {
  ConditionResult mono = make_result(condition::kMonotone, std::numeric_limits<double>::infinity());
  concave = make_result(condition::kConcave, -std::numeric_limits<double>::infinity());
  for (const auto& lam : pts) {
    const auto g = grad_f(spec, lam);
    const double gsum = std::accumulate(g.begin(), g.end(), 0.0);
    const double gmin = *std::min_element(g.begin(), g.end());
    if (gmin / (1.0 + gsum) < mono.margin) {
      mono.margin = gmin / (1.0 + gsum);
      mono.witness = lam;
    }
    const Matrix h = hess_f(spec, lam);
    const auto ev = symmetric_eigenvalues(h);
    const double rel = ev.back() / (1.0 + h.frobenius());
    if (rel > concave.margin) {
      concave.margin = rel;
      concave.witness = lam;
    }
  }
  mono.holds = mono.margin > 0.0;
  concave.holds = concave.margin <= 1e-10;
  mono.note = "min_i f_i / (1 + sum f_i) over interior samples";
  concave.note = "max eigenvalue of D^2 f / (1 + |D^2 f|) over interior samples";
  return mono;
}

ConditionResult check_boundary(const OperatorSpec& spec, const ConeId& cone, Rng& rng,
                               int sequences) {
  ConditionResult res = make_result(condition::kBoundarySup, -std::numeric_limits<double>::infinity());
  const int n = spec.n;
  int monotone_failures = 0;
  for (int s = 0; s < sequences; ++s) {
    const auto inner = sample_interior(cone, rng);
    auto d = rng.direction(n);
    double dsum = std::accumulate(d.begin(), d.end(), 0.0);
    if (dsum > 0.0) {
      for (double& x : d) x = -x;
      dsum = -dsum;
    }
    // sigma_1 must decrease along d so the ray leaves every cone.
    if (dsum > -0.1)
      for (double& x : d) x += (-0.1 - dsum) / n;
    auto at = [&](double t) {
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = inner[i] + t * d[i];
      return p;
    };
    double lo = 0.0, hi = 1.0;
    while (cone_margin(cone, at(hi)) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (cone_margin(cone, at(mid)) > 0.0 ? lo : hi) = mid;
    }
    const auto edge = at(lo);
    double prev = std::numeric_limits<double>::infinity();
    double last = prev;
    bool monotone = true;
    for (int e = 1; e <= 12; ++e) {
      const double tau = std::pow(10.0, -e);
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = edge[i] + tau * (inner[i] - edge[i]);
      if (!(cone_margin(cone, p) > 0.0)) break;
      const double f = eval_f(spec, p);
      if (f > prev + 1e-12 * (1.0 + std::abs(prev))) monotone = false;
      prev = f;
      last = f;
    }
    const double rel = last / (1.0 + norm2(edge));
    if (!monotone) ++monotone_failures;
    if (rel > res.margin) {
      res.margin = rel;
      res.witness = edge;
    }
  }
  // Boundary limits must be approached from above and end near or below 0.
  res.holds = monotone_failures == 0 && res.margin <= 1e-2;
  res.note = "estimated sup of f on the boundary, relative to 1+|lambda_0|, from " +
             std::to_string(sequences) + " boundary-approaching sequences (tau down to 1e-12)";
  return res;
}

}  // namespace

StructureReport check_structure(const OperatorSpec& spec, int sample_budget, std::uint64_t seed,
                                double band_lo, double band_hi) {
  spec.validate();
  if (sample_budget < 1) throw std::invalid_argument("check_structure: sample budget must be >= 1");
  if (!(band_lo < band_hi)) throw std::invalid_argument("check_structure: band requires a < b");

  StructureReport report{spec, seed, {}};
  const ConeId cone = spec.cone();
  const int n = spec.n;
  Rng rng(seed);

  std::vector<std::vector<double>> interior;
  interior.reserve(sample_budget);
  for (int s = 0; s < sample_budget; ++s) interior.push_back(sample_interior(cone, rng));

  ConditionResult concave;
  report.entries.push_back(check_monotone_concave(spec, interior, concave));
  report.entries.push_back(concave);

  const int sequences = std::clamp(sample_budget / 50, 8, 2000);
  report.entries.push_back(check_boundary(spec, cone, rng, sequences));

  // Growth of f and of |lambda|^2 sum f_i along R*1, R = 10^0 .. 10^6.
  {
    ConditionResult ray = make_result(condition::kUnboundedRay, std::numeric_limits<double>::infinity());
    ConditionResult trace = make_result(condition::kTraceGrowth, 0.0);
    double prev_f = -std::numeric_limits<double>::infinity();
    double prev_g = -std::numeric_limits<double>::infinity();
    double first_g = 0.0, last_g = 0.0;
    for (int e = 0; e <= 6; ++e) {
      const double r = std::pow(10.0, e);
      const std::vector<double> lam(n, r);
      const double f = eval_f(spec, lam);
      const auto g = grad_f(spec, lam);
      const double gval = norm2(lam) * norm2(lam) * std::accumulate(g.begin(), g.end(), 0.0);
      if (e > 0) {
        ray.margin = std::min(ray.margin, f - prev_f);
        if (!(gval > prev_g)) trace.holds = false;
      } else {
        first_g = gval;
      }
      prev_f = f;
      prev_g = gval;
      last_g = gval;
      ray.witness = lam;
      trace.witness = lam;
    }
    ray.holds = ray.margin > 0.0;
    ray.constant = prev_f;
    ray.note = "min increment of f(R*1) between consecutive decades; constant = f(1e6*1)";
    trace.margin = std::log10(last_g / first_g);
    trace.holds = trace.holds && trace.margin >= 3.0;
    trace.note = "decades of growth of |lambda|^2 sum f_i along R*1 over R in [1, 1e6]";
    report.entries.push_back(ray);
    report.entries.push_back(trace);
  }

  // K1 on the band a <= f <= b and delta0 on positive level sets.
  {
    ConditionResult euler = make_result(condition::kEulerLowerBound, -std::numeric_limits<double>::infinity());
    ConditionResult weight = make_result(condition::kNegativeWeight, std::numeric_limits<double>::infinity());
    int negative_samples = 0;
    for (int s = 0; s < sample_budget; ++s) {
      const auto base = sample_interior(cone, rng);
      const double target = rng.uniform(band_lo, band_hi);
      const auto lam = rescale_to_level(spec, base, target);
      if (!(cone_margin(cone, lam) > 0.0)) continue;
      const double f = eval_f(spec, lam);
      if (f < band_lo || f > band_hi) continue;
      const auto g = grad_f(spec, lam);
      const double gsum = std::accumulate(g.begin(), g.end(), 0.0);
      const double ratio = -dot(g, lam) / (1.0 + gsum);
      if (ratio > euler.margin) {
        euler.margin = ratio;
        euler.witness = lam;
      }
      if (f > 0.0) {
        for (int j = 0; j < n; ++j) {
          if (lam[j] < 0.0) {
            ++negative_samples;
            if (g[j] / gsum < weight.margin) {
              weight.margin = g[j] / gsum;
              weight.witness = lam;
            }
          }
        }
      }
    }
    euler.constant = std::max(0.0, euler.margin);
    euler.holds = std::isfinite(euler.constant);
    euler.note = "K1 = max(0, max of -sum f_i lambda_i / (1 + sum f_i)) over the band sample";
    if (negative_samples == 0) {
      weight.margin = 1.0;
      weight.constant = 1.0;
      weight.note = "vacuous: no sampled point has a negative entry";
    } else {
      weight.constant = weight.margin;
      weight.note = "delta0 = min f_j / sum f_i over sampled entries lambda_j < 0 on positive levels";
    }
    weight.holds = weight.margin > 0.0;
    report.entries.push_back(euler);
    report.entries.push_back(weight);
  }
  return report;
}

}  // namespace hessflow
