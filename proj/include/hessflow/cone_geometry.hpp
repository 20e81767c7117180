#pragma once

// Level-set normals of f and sampled certification of the concavity-gap
// inequalities on f and on the lifted function f(lambda) - p.
//
// Everything here is numerical evidence over explicit, seeded samples; no
// result is a proof. Budgets and seeds are part of every result so a run
// can be reproduced exactly.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hessflow/operators.hpp"

namespace hessflow {

struct UnitNormal {
  std::vector<double> direction;
};

/// A point (lambda, p) of Gamma x R; p occupies the time-derivative slot.
struct LiftedPoint {
  std::vector<double> lambda;
  double p = 0.0;
};

/// f(lambda) - p
double lifted_value(const OperatorSpec& spec, const LiftedPoint& x);

UnitNormal normal(const OperatorSpec& spec, std::span<const double> lambda);

/// (Df, -1) / sqrt(1 + |Df|^2), length n + 1.
std::vector<double> lifted_normal(const OperatorSpec& spec, const LiftedPoint& point);

/// Distance of a unit vector to the boundary of the positive orthant:
/// its smallest coordinate, clamped at 0.
double distance_to_orthant_boundary(std::span<const double> unit);

/// Half the smallest orthant-boundary distance of the normals at the samples.
double beta_margin(const OperatorSpec& spec, const std::vector<std::vector<double>>& mu_samples);

struct ConcavityGapResult {
  /// Empty when no sampled lambda satisfied the normal-separation constraint.
  std::optional<double> epsilon_hat;
  std::vector<double> worst_mu;
  std::vector<double> worst_lambda;
  int sampled = 0;
  int constrained = 0;
  int violations = 0;  // constrained samples with a non-positive gap
};

/// Minimum over seeded lambda with |nu_mu - nu_lambda| >= beta of
///   [sum f_i(lambda)(mu_i - lambda_i) - f(mu) + f(lambda)] / (1 + sum f_i(lambda)).
/// The lambda sample depends only on (spec, budget, seed), so shrinking beta
/// can only lower the result.
ConcavityGapResult verify_concavity_gap(const OperatorSpec& spec,
                                        const std::vector<std::vector<double>>& K, double beta,
                                        int budget, std::uint64_t seed);

/// Points of the level set f(lambda) - p = sigma with |lambda| = R and p in
/// [p_lo, p_hi]. For each point a target p is drawn (stratified over the
/// band) and a random great-circle arc leaving the diagonal is bisected for
/// f(R w) = sigma + p; directions without an admissible root are dropped.
std::vector<LiftedPoint> sample_level_set_at_radius(const OperatorSpec& spec, double sigma,
                                                    double radius, double p_lo, double p_hi,
                                                    int count, Rng& rng);

struct RadiusSummary {
  double radius = 0.0;
  int points = 0;
  double h_min = 0.0;  // min of (mu_hat - lambda_hat) . nu_lambda_hat
  bool skipped = false;
};

struct CapSample {
  double sigma = 0.0;
  LiftedPoint mu_hat;
  std::vector<LiftedPoint> points;
  std::vector<double> inner;        // (mu_hat - lambda_hat) . nu_lambda_hat per point
  std::vector<bool> in_cap;         // inner <= 0
  std::vector<RadiusSummary> radii;
  std::vector<std::string> notices;

  /// The compactness proxy: every sampled radius in [r0, r1] has H above
  /// `tolerance`. Sampled evidence only.
  bool cap_bounded_on(double r0, double r1, double tolerance) const;
};

CapSample cap_set_sample(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat,
                         double p_lo, double p_hi, const std::vector<double>& radii, int budget,
                         std::uint64_t seed);

/// Max over t in [0, 1] of f~(t mu_hat + (1 - t) lambda_hat) - sigma, for a
/// concave restriction found by golden-section search.
double segment_lift_max(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat,
                        const LiftedPoint& lambda_hat);

/// Sampled infimum of segment_lift_max over level-set points with |lambda| = R
/// and |p - q| <= delta. Throws InvalidConfiguration on an empty sample.
double theta_R(const OperatorSpec& spec, double sigma, const LiftedPoint& mu_hat, double radius,
               double delta, int budget, std::uint64_t seed);

struct ParabolicGapResult {
  bool certified = false;
  double theta_k = 0.0;
  double radius_k = 0.0;
  int sampled = 0;
  int violations = 0;  // held-out samples with |lambda| >= R_K failing the inequality
  LiftedPoint worst_mu;
  LiftedPoint worst_lambda;
  double worst_value = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
};

/// Searches for (theta_K, R_K) with
///   sum f_i(lambda)(mu_i - lambda_i) - (q - p) >= theta_K + eps sum f_i(lambda)
/// for all sampled level-set points with |lambda| >= R_K and p within `eta`
/// of the q-range of K. R_K is the smallest radius on a doubling grid whose
/// tail is positive on a search sample; the pair is then checked on an
/// independent held-out sample.
ParabolicGapResult verify_parabolic_gap(const OperatorSpec& spec, double sigma,
                                        const std::vector<LiftedPoint>& K, double eps, int budget,
                                        std::uint64_t seed, double eta = 1.0);

}  // namespace hessflow
