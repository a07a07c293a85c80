#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lindley/rng.hpp"
#include "lindley/symfun.hpp"

namespace lindley::dists {

enum class Kind {
  exponential,
  deterministic,
  uniform,
  rational_lt,
  exp_poly_trig_tail,
  weibull_tail,
};

// Partial-fraction form of a rational Laplace transform P(s)/Q(s).
// Groups with imag(root) > 0 stand for a conjugate pair; their residue
// coefficients at the conjugate root are the complex conjugates.
struct ResidueGroup {
  std::complex<double> root;
  int multiplicity = 0;
  // coeffs[j-1] multiplies (s - root)^{-j}, j = 1..multiplicity.
  std::vector<std::complex<double>> coeffs;
  bool is_pair() const { return root.imag() != 0.0; }
};

struct ResidueExpansion {
  std::vector<double> numer, denom;  // ascending coefficients
  std::vector<ResidueGroup> groups;
  // Sum of multiplicities counting conjugate pairs twice; equals deg(denom).
  int total_degree() const;
  std::complex<double> eval_fractions(std::complex<double> s) const;
};

// deg(numer) < deg(denom) required; roots via companion matrix, polished by
// Newton steps, clustered at distance 1e-8 into multiplicities; residue
// coefficients by exact Taylor-series division of the deflated fraction.
ResidueExpansion residues(const std::vector<double>& numer,
                          const std::vector<double>& denom);

// Inverse transform as a density term sum; requires all roots in the open
// left half-plane.  If `warning` is given it receives a note when the
// reconstruction dips below -1e-9 on a test grid (input was not a density).
symfun::Fun density_from_lt(const ResidueExpansion& exp,
                            std::string* warning = nullptr);

// The tail 1 - F of the inverse transform.
symfun::Fun cdf_from_lt(const ResidueExpansion& exp,
                        std::string* warning = nullptr);

// Tail factorization sum g_i(x) h_i(y) = tail_B(x+y) with integrable g_i and
// bounded h_i.
struct KernelDecomposition {
  std::vector<symfun::Fun> g, h;
  int n() const { return static_cast<int>(g.size()); }
};

class DistSpec {
 public:
  static DistSpec exponential(double mu);
  static DistSpec deterministic(double d);
  static DistSpec uniform(double lo, double hi);
  static DistSpec rational_lt(std::vector<double> numer,
                              std::vector<double> denom);
  static DistSpec exp_poly_trig_tail(symfun::Fun tail);
  static DistSpec weibull_tail(int p);

  Kind kind() const { return kind_; }
  double cdf(double x) const;
  double tail(double x) const;
  double mean() const;

  // Exact tail as a term sum (exponential / rational_lt / exp_poly_trig_tail).
  const std::optional<symfun::Fun>& tail_fun() const { return tail_fun_; }
  // Density where one exists in the term-sum family.
  const std::optional<symfun::Fun>& density_fun() const { return density_fun_; }
  bool has_density() const;
  double density(double x) const;

  double sample(CounterRng& rng) const;

  // Parameter accessors (valid for the matching kind only).
  double rate() const { return p1_; }          // exponential mu
  double value() const { return p1_; }         // deterministic d
  double lo() const { return p1_; }            // uniform
  double hi() const { return p2_; }            // uniform
  int weibull_p() const { return ip_; }        // weibull_tail
  const std::vector<double>& numer() const { return numer_; }
  const std::vector<double>& denom() const { return denom_; }

  const std::vector<std::string>& warnings() const { return warnings_; }

  // A default-constructed spec is the point mass at 0, the least surprising
  // placeholder; every consumer validates what it actually needs.
  DistSpec() = default;

 private:
  Kind kind_ = Kind::deterministic;
  double p1_ = 0.0, p2_ = 0.0;
  int ip_ = 0;
  std::vector<double> numer_, denom_;
  std::optional<symfun::Fun> tail_fun_;
  std::optional<symfun::Fun> density_fun_;
  double mean_ = 0.0;
  std::vector<std::string> warnings_;
};

// Rejects specs without a continuous exp-poly-trig tail.  The g_i all get
// strictly negative rates or the decomposition is refused (a constant g would
// not be absolutely integrable).
KernelDecomposition decompose_kernel(const DistSpec& b);

// Prepared evaluator for P[B - A > x], valid for all real x.  Closed form
// when A is exponential and B has a term-sum tail; adaptive quadrature
// against A's density otherwise.
class XTailFn {
 public:
  XTailFn(const DistSpec& a, const DistSpec& b);
  double operator()(double x) const;
  double p_x_pos() const { return (*this)(0.0); }

  // Weibull-B support: P[X > x] = e^{-x^p} * scaled(x) for x >= 0, with
  // scaled(x) = int f_A(z) exp(x^p - (x+z)^p) dz kept in a sane range no
  // matter how deep x is. Throws unless B is WeibullTail.
  double weibull_scaled(double x) const;

 private:
  enum class Route { both_det, b_det, exact_exp, weibull_b, quadrature };
  Route route_;
  DistSpec a_, b_;
  double step_threshold_ = 0.0;           // both_det: d_b - d_a
  std::optional<symfun::Fun> ti_;         // exact route: tail_integral(T_B, mu)
  double one_minus_mu_beta_ = 0.0;        // exact route: 1 - mu*beta(mu)
  double a_cutoff_ = 0.0;                 // quadrature route upper limit
};

double x_tail(const DistSpec& a, const DistSpec& b, double x);

// P[B - A < 0]; the simulation stability gate.
double x_neg_prob(const DistSpec& a, const DistSpec& b);

}  // namespace lindley::dists
