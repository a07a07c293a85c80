#pragma once

#include <cstdint>
#include <vector>

#include "lindley/dists.hpp"

namespace lindley::sim {

// One recursion step: max{0, b - a - w}. The clamp produces an exact 0.0,
// which is what makes zero-counting and regeneration detection exact.
inline double step(double w, double b, double a) {
  const double d = b - a - w;
  return d > 0.0 ? d : 0.0;
}

struct SimConfig {
  dists::DistSpec a;
  dists::DistSpec b;
  std::uint64_t n_steps = 0;
  std::uint64_t n_replications = 1;
  double w1 = 0.0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  double ecdf_bin = 1e-3;
  // Opt-in for the no-negative-drift regime, where the zero-visit argument
  // is probabilistic (hitting pattern) rather than driven by P[X<0] > 0.
  bool allow_zero_negative_part = false;
};

// Default burn-in: 1% of the run, at least 1000 steps, always < n_steps.
std::uint64_t default_burn_in(std::uint64_t n_steps);

struct EmpiricalSummary {
  // ecdf over bins [0, h, 2h, ...]; f[i] = fraction of samples <= xs[i].
  // Bin 0 holds the exact zeros, so f[0] == pi0_hat.
  std::vector<double> xs;
  std::vector<double> f;
  double bin_width = 0.0;
  double pi0_hat = 0.0;
  double pi0_se = 0.0;
  double mean_w = 0.0;
  double mean_w_se = 0.0;
  std::uint64_t samples = 0;
  std::vector<std::uint32_t> cycle_lengths;
  std::uint64_t n_replications = 0;
  std::vector<std::uint64_t> replication_streams;

  // Step-function evaluation of the ecdf at arbitrary x.
  double at(double x) const;
};

EmpiricalSummary simulate(const SimConfig& config);

struct CycleBoundRow {
  int n = 0;
  double p_hat = 0.0;       // empirical P[cycle > n]
  double bound = 0.0;       // p_x_pos^n
  double se = 0.0;          // binomial standard error of p_hat
  bool violated = false;    // p_hat > bound + 3 se
};

struct CycleBoundReport {
  std::vector<CycleBoundRow> rows;
  bool any_violation = false;
};

// Checks the geometric domination of regeneration-cycle lengths:
// P[cycle > n] <= p_x_pos^n, with 3-sigma sampling slack.
CycleBoundReport cycle_bound_check(const EmpiricalSummary& summary,
                                   double p_x_pos, int n_max = 10);

struct HittingProbeRow {
  int k = 0;
  double p_hat = 0.0;   // empirical P[tau >= (2n+1) k]
  double bound = 0.0;   // (2n+1) (1-q)^k
  double se = 0.0;
  bool violated = false;
};

struct HittingProbeReport {
  double epsilon = 0.0;
  int n = 0;
  double q = 0.0;       // analytic pattern probability
  double q_hat = 0.0;   // direct Monte-Carlo estimate of the same pattern
  std::vector<HittingProbeRow> rows;  // k = 0..k_max
  std::uint64_t occurrences = 0;      // detected pattern occurrences
  std::uint64_t pathwise_failures = 0;  // occurrences where W did not hit 0
  bool any_violation = false;
};

// Probes the zero-hitting mechanism when X = B - A is nonnegative: the
// alternating pattern of n+1 small and n large increments forces W to 0,
// and the time to see the pattern has a geometrically bounded tail.
// x_spec is the distribution of X itself.
HittingProbeReport hitting_probe(const dists::DistSpec& x_spec, double epsilon,
                                 int n, std::uint64_t reps, std::uint64_t seed,
                                 int k_max = 20);

}  // namespace lindley::sim
