#pragma once

#include <cstddef>
#include <vector>

#include "lindley/dists.hpp"
#include "lindley/symfun.hpp"

namespace lindley::theorem {

// Dense (n+1)x(n+1) system for the unknowns (pi0, c_1..c_n), row-major.
// Row 0 is the normalization row; rows 1..n pin the projection constants.
// The decomposition context is carried along so the solver can validate the
// induced distribution against the defining integral equation.
struct SystemSigma {
  std::size_t n = 0;                // number of c unknowns
  std::vector<double> matrix;       // (n+1)*(n+1), row-major
  std::vector<double> rhs;          // n+1
  double mu = 0.0;
  dists::KernelDecomposition dec;
  symfun::Fun b_tail;

  double at(std::size_t r, std::size_t col) const {
    return matrix[r * (n + 1) + col];
  }
};

struct SigmaSolution {
  double pi0 = 0.0;
  std::vector<double> c;
  int rank = 0;
  double residual_norm = 0.0;
  double condition = 0.0;
};

// Stable evaluators for the closed-form waiting-time law. The survival
// function is precomputed as an exp-poly-trig function via the substitution
// u = s - x, which removes the unbounded exponential prefactor from the
// defining expression.
class ClosedFormW {
 public:
  ClosedFormW(double mu, double pi0, std::vector<double> c,
              symfun::Fun b_tail, std::vector<symfun::Fun> g);

  double mu() const { return mu_; }
  double pi0() const { return pi0_; }
  const std::vector<double>& c() const { return c_; }
  const symfun::Fun& b_tail() const { return b_tail_; }
  const std::vector<symfun::Fun>& g() const { return g_; }
  const symfun::Fun& fw_tail() const { return fw_tail_; }   // P[W > x], x >= 0
  const symfun::Fun& density() const { return density_; }   // f_W on (0, inf)

  double cdf(double x) const;
  double pdf(double x) const;
  // E[e^{-kappa W}] = pi0 + Laplace transform of the density at kappa.
  double lt(double kappa) const;

 private:
  double mu_ = 0.0;
  double pi0_ = 0.0;
  std::vector<double> c_;
  symfun::Fun b_tail_;
  std::vector<symfun::Fun> g_;
  symfun::Fun fw_tail_;
  symfun::Fun density_;
};

double cdf(const ClosedFormW& w, double x);
double pdf(const ClosedFormW& w, double x);

// Assembles the linear system with every coefficient computed exactly in
// the term algebra (Laplace transforms and half-line integrals of
// exp-poly-trig functions).
SystemSigma build_sigma(double mu, const dists::KernelDecomposition& dec,
                        const symfun::Fun& b_tail);

// Solves the system (minimum-norm least squares on rank deficiency) and
// validates the induced distribution: pi0 in range, cdf(0) = pi0, cdf
// nondecreasing, and the defining integral equation satisfied pointwise.
SigmaSolution solve_sigma(const SystemSigma& sys);

ClosedFormW closed_form(const SystemSigma& sys, const SigmaSolution& sol);

struct WaitingTimeSolution {
  SystemSigma sigma;
  SigmaSolution solution;
  ClosedFormW w;
};

// End-to-end closed-form route: requires A exponential and B with an
// exp-poly-trig tail admitting a finite kernel decomposition.
WaitingTimeSolution solve_waiting_time(const dists::DistSpec& a,
                                       const dists::DistSpec& b);

}  // namespace lindley::theorem
