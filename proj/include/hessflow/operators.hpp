#pragma once

// Symmetric concave operators f(lambda) on Garding-type cones, with exact
// first and second derivatives and sampled structure-condition checks.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hessflow/common.hpp"
#include "hessflow/linalg.hpp"

namespace hessflow {

enum class ConeKind { GammaK, PK, GammaN };

struct ConeId {
  ConeKind kind = ConeKind::GammaN;
  int k = 1;
  int n = 2;

  static ConeId gamma_k(int k, int n) { return {ConeKind::GammaK, k, n}; }
  static ConeId p_k(int k, int n) { return {ConeKind::PK, k, n}; }
  static ConeId gamma_n(int n) { return {ConeKind::GammaN, n, n}; }

  std::string name() const;
};

enum class Family { SigmaKRoot, SigmaQuotient, LogPK };

struct OperatorSpec {
  Family family = Family::SigmaKRoot;
  int k = 1;
  int l = 0;  // only used by SigmaQuotient
  int n = 2;

  static OperatorSpec sigma_root(int k, int n);
  static OperatorSpec sigma_quotient(int k, int l, int n);
  static OperatorSpec log_pk(int k, int n);

  /// The cone the family is paired with.
  ConeId cone() const;
  /// Degree of homogeneity; LogPK is log-homogeneous and reports 0.
  bool degree_one() const { return family != Family::LogPK; }
  std::string name() const;
  /// Throws std::invalid_argument when k, l, n are inconsistent.
  void validate() const;
};

double binomial(int n, int k);

/// Elementary symmetric polynomial via the prefix recurrence
/// e_j(l_1..l_m) = e_j(l_1..l_{m-1}) + l_m e_{j-1}(l_1..l_{m-1}).
/// sigma_0 = 1 and sigma_j = 0 for j < 0 or j > n.
double sigma_k(std::span<const double> lambda, int k);

/// sigma_k of lambda with the entries at the listed indices removed.
double sigma_k_without(std::span<const double> lambda, int k, int skip_a, int skip_b = -1);

/// Product over all k-subsets of the subset sums.
double p_k(std::span<const double> lambda, int k);

/// Smallest defining inequality divided by (1 + |lambda|)^degree.
double cone_margin(const ConeId& cone, std::span<const double> lambda);
bool cone_contains(const ConeId& cone, std::span<const double> lambda, double margin);

/// f(lambda); throws ConeViolation unless lambda is strictly inside the cone.
double eval_f(const OperatorSpec& spec, std::span<const double> lambda);
std::vector<double> grad_f(const OperatorSpec& spec, std::span<const double> lambda);
Matrix hess_f(const OperatorSpec& spec, std::span<const double> lambda);

/// Value and gradient in one pass, writing into `grad` (size n). The cone
/// check is the caller's responsibility.
double eval_f_grad_unchecked(const OperatorSpec& spec, std::span<const double> lambda,
                             std::span<double> grad);

/// Seeded interior sample: random rays with log-uniform radius, kept when
/// the relative cone margin exceeds `min_margin`.
std::vector<double> sample_interior(const ConeId& cone, Rng& rng, double min_margin = 1e-6);

namespace condition {
inline constexpr const char* kMonotone = "monotone";
inline constexpr const char* kConcave = "concave";
inline constexpr const char* kBoundarySup = "boundary_sup_nonpositive";
inline constexpr const char* kUnboundedRay = "unbounded_along_diagonal";
inline constexpr const char* kEulerLowerBound = "euler_sum_lower_bound";
inline constexpr const char* kNegativeWeight = "negative_entry_weight";
inline constexpr const char* kTraceGrowth = "diagonal_trace_growth";
}  // namespace condition

struct ConditionResult {
  std::string id;
  bool holds = false;
  std::vector<double> witness;
  double margin = 0.0;
  double constant = 0.0;  // K1 or delta0 where the condition has one
  std::string note;
};

struct StructureReport {
  OperatorSpec spec;
  std::uint64_t seed = 0;
  std::vector<ConditionResult> entries;

  const ConditionResult& at(const std::string& id) const;
  bool all_hold() const;
};

/// Sampled certification of monotonicity, concavity, boundary behaviour,
/// unboundedness along R*1, the K1 and delta0 conditions, and the growth
/// of |lambda|^2 sum f_i. Deterministic given the seed.
StructureReport check_structure(const OperatorSpec& spec, int sample_budget,
                                std::uint64_t seed, double band_lo, double band_hi);

}  // namespace hessflow
