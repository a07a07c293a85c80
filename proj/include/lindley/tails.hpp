#pragma once

#include <string>
#include <vector>

#include "lindley/dists.hpp"
#include "lindley/fpsolve.hpp"
#include "lindley/sim.hpp"
#include "lindley/theorem.hpp"

namespace lindley::tails {

struct TailRegime {
  enum class Kind { regularly_varying, rapidly_varying };
  Kind kind = Kind::regularly_varying;
  double kappa = 0.0;  // decay rate, meaningful for regularly_varying
};

struct ProbeRow {
  double x = 0.0;
  double ratio = 0.0;
};

struct TailReport {
  TailRegime regime;
  std::vector<ProbeRow> rows;  // increasing probe positions
  double band = 0.05;          // acceptance band around 1 at the last probe
  bool pass = false;
  // Rapidly-varying runs also record P[X>x+1]/P[X>x] at the deepest probe.
  double lemma_ratio = 0.0;
  std::string note;  // finite-x convention and any auxiliary checks
};

// Tail regime of B from its spec: exponential-type tails are regularly
// varying for e^B with index -kappa = -(dominant decay rate); Weibull-type
// tails are rapidly varying.
TailRegime classify(const dists::DistSpec& b);

// E[e^{-kappa A}] for the supported specs (exact via the term algebra when
// a density function is available).
double breiman_factor(const dists::DistSpec& a, double kappa);

// Probe positions x with P[X > x] log-spaced in [p_lo, p_hi].
std::vector<double> default_probes(const dists::DistSpec& a,
                                   const dists::DistSpec& b, int count = 6,
                                   double p_hi = 1e-3, double p_lo = 1e-12);

// Regularly varying regime: ratio P[W>x] / (P[X>x] E[e^{-kappa W}]) at the
// probes; passes if the last probe lands within the band.
TailReport regvar_check(const theorem::ClosedFormW& w,
                        const dists::DistSpec& a, const dists::DistSpec& b,
                        double kappa, const std::vector<double>& probes,
                        double band = 0.05);

// Empirical overload: P[W>x] read directly off the ecdf; probes beyond the
// ecdf's resolution raise ResolutionError.
TailReport regvar_check(const sim::EmpiricalSummary& w,
                        const dists::DistSpec& a, const dists::DistSpec& b,
                        double kappa, const std::vector<double>& probes,
                        double band = 0.05);

// Sanity ratio P[X>x] / (P[B>x] E[e^{-kappa A}]) at the probes.
TailReport breiman_check(const dists::DistSpec& a, const dists::DistSpec& b,
                         double kappa, const std::vector<double>& probes,
                         double band = 0.05);

// Rapidly varying regime: ratio P[W>x] / (P[X>x] pi0). The W tail at deep
// probes is obtained by one exact step of the recursion from the supplied
// representation of F_W: P[W>x] = E[P[X > x + W']]. Also reports the
// vanishing-ratio lemma value P[X>x+1]/P[X>x] at the deepest probe and
// checks the lower-bound direction P[W>x] >= P[X>x] pi0 (1-tol) everywhere.
TailReport rapidvar_check(const sim::EmpiricalSummary& w,
                          const dists::DistSpec& a, const dists::DistSpec& b,
                          const std::vector<double>& probes,
                          double band = 0.05);
TailReport rapidvar_check(const fpsolve::GridFun& w, const dists::DistSpec& a,
                          const dists::DistSpec& b,
                          const std::vector<double>& probes,
                          double band = 0.05);

// Weibull increment-tail law: P[X>x] ~ P[B>x] mu / (p x^{p-1}) for
// A = Exponential(mu), B = WeibullTail(p). Reports the scaled ratio
// P[X>x] p x^{p-1} e^{x^p} / mu at the probes (computed in factored form,
// immune to underflow); passes if the deviation from 1 shrinks
// monotonically and the last probe is within the band.
TailReport weibull_x_tail_check(double mu, int p,
                                const std::vector<double>& probes,
                                double band = 0.10);

}  // namespace lindley::tails
