#include "lindley/theorem.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lindley/errors.hpp"

namespace lindley::theorem {

using symfun::Fun;

SystemSigma build_sigma(double mu, const dists::KernelDecomposition& dec,
                        const Fun& b_tail) {
  if (!(mu > 0.0)) throw SpecError("build_sigma: mu must be positive");
  if (dec.g.empty() || b_tail.is_zero()) {
    throw SpecError("build_sigma: empty decomposition or degenerate tail");
  }
  const std::size_t n = static_cast<std::size_t>(dec.n());
  SystemSigma sys;
  sys.n = n;
  sys.mu = mu;
  sys.dec = dec;
  sys.b_tail = b_tail;
  sys.matrix.assign((n + 1) * (n + 1), 0.0);
  sys.rhs.assign(n + 1, 0.0);

  try {
    // Normalization row: pi0 (1 + mu beta(mu)) + sum_j mu gamma_j(mu) c_j = 1.
    sys.matrix[0] = 1.0 + mu * laplace(b_tail, mu);
    for (std::size_t j = 0; j < n; ++j) {
      sys.matrix[1 + j] = mu * laplace(dec.g[j], mu);
    }
    sys.rhs[0] = 1.0;

    // Projection rows: c_i = mu pi0 D_i + mu sum_j E_ij c_j with
    //   D_i = int h_i (b_tail - mu TI(b_tail)),  E_ij = int h_i (g_j - mu TI(g_j)),
    // where TI is the exponentially weighted upper-tail integral at rate mu.
    const Fun b_core = b_tail - tail_integral(b_tail, mu) * mu;
    std::vector<Fun> g_core;
    g_core.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      g_core.push_back(dec.g[j] - tail_integral(dec.g[j], mu) * mu);
    }
    for (std::size_t i = 1; i <= n; ++i) {
      const Fun& h = dec.h[i - 1];
      const double d_i = integral_0_inf(multiply(h, b_core));
      sys.matrix[i * (n + 1)] = -mu * d_i;
      for (std::size_t j = 1; j <= n; ++j) {
        const double e_ij = integral_0_inf(multiply(h, g_core[j - 1]));
        sys.matrix[i * (n + 1) + j] = (i == j ? 1.0 : 0.0) - mu * e_ij;
      }
      sys.rhs[i] = 0.0;
    }
  } catch (const DivergenceError& e) {
    throw SpecError(std::string("build_sigma: hypothesis violation, a system "
                                "integral diverges: ") +
                    e.what());
  }
  for (double v : sys.matrix) {
    if (!std::isfinite(v)) {
      throw ValidationError("build_sigma: non-finite system entry");
    }
  }
  return sys;
}

namespace {

// Validation of the induced law against the defining integral equation
//   F_W(x) = pi0 (1 - psi(x)) + J0 - sum_k gtilde_k(x) I_k,
// where psi(x) = P[B > x + A] = mu TI(b_tail)(x), psi(x+y) expands as
// sum_k gtilde_k(x) htilde_k(y), J0 = int f_W, and I_k = int htilde_k f_W.
void validate_integral_equation(const ClosedFormW& w) {
  const double mu = w.mu();
  const Fun psi = tail_integral(w.b_tail(), mu) * mu;
  const auto pairs = symfun::expand_sum_arg(psi);
  std::vector<double> proj;
  proj.reserve(pairs.size());
  const double j0 = integral_0_inf(w.density());
  for (const auto& [gt, ht] : pairs) {
    proj.push_back(integral_0_inf(multiply(ht, w.density())));
  }
  const double span = 6.0 / -symfun::max_rate(w.fw_tail());
  for (int p = 0; p < 20; ++p) {
    const double x = span * p / 19.0;
    double rhs = w.pi0() * (1.0 - eval(psi, x)) + j0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      rhs -= eval(pairs[k].first, x) * proj[k];
    }
    if (std::abs(w.cdf(x) - rhs) > 1e-8) {
      throw ValidationError(
          "solve_sigma: induced distribution fails the defining integral "
          "equation; the solution is not usable");
    }
  }
}

void validate_closed_form(const ClosedFormW& w) {
  if (std::abs(w.cdf(0.0) - w.pi0()) > 1e-10) {
    throw ValidationError("solve_sigma: cdf(0) does not reproduce pi0");
  }
  const double span = 40.0 / -symfun::max_rate(w.fw_tail());
  double prev = w.cdf(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double cur = w.cdf(span * i / 200.0);
    if (cur < prev - 1e-12) {
      throw ValidationError("solve_sigma: induced cdf is not nondecreasing");
    }
    prev = cur;
  }
  validate_integral_equation(w);
}

}  // namespace

SigmaSolution solve_sigma(const SystemSigma& sys) {
  const std::size_t m = sys.n + 1;
  if (sys.matrix.size() != m * m || sys.rhs.size() != m) {
    throw SpecError("solve_sigma: malformed system");
  }
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd b(m);
  for (std::size_t r = 0; r < m; ++r) {
    b[static_cast<Eigen::Index>(r)] = sys.rhs[r];
    for (std::size_t c = 0; c < m; ++c) {
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          sys.matrix[r * m + c];
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  Eigen::VectorXd x;
  if (rank == static_cast<int>(m)) {
    x = qr.solve(b);
  } else {
    // Rank deficiency is legitimate when the h_i are linearly dependent;
    // take the minimum-norm least-squares solution.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-10);
    x = cod.solve(b);
  }

  SigmaSolution sol;
  sol.pi0 = x[0];
  sol.c.assign(x.data() + 1, x.data() + m);
  sol.rank = rank;
  sol.residual_norm = (a * x - b).norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const double smin = svd.singularValues().minCoeff();
  sol.condition = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                             : std::numeric_limits<double>::infinity();

  double rhs_norm = 0.0;
  for (double v : sys.rhs) rhs_norm += v * v;
  rhs_norm = std::sqrt(rhs_norm);
  if (sol.residual_norm > 1e-9 * (1.0 + rhs_norm)) {
    throw ValidationError("solve_sigma: linear-system residual too large");
  }
  if (sol.pi0 < -1e-10 || sol.pi0 > 1.0 + 1e-10) {
    throw ValidationError(
        "solve_sigma: pi0 outside [0,1]; refusing to clamp a system defect");
  }
  validate_closed_form(closed_form(sys, sol));
  return sol;
}

ClosedFormW::ClosedFormW(double mu, double pi0, std::vector<double> c,
                         Fun b_tail, std::vector<Fun> g)
    : mu_(mu), pi0_(pi0), c_(std::move(c)), b_tail_(std::move(b_tail)),
      g_(std::move(g)) {
  if (c_.size() != g_.size()) {
    throw SpecError("closed form: coefficient/function count mismatch");
  }
  // P[W > x] = mu pi0 TI(b_tail)(x) + mu sum_i c_i TI(g_i)(x), with
  // TI(f)(x) = int_0^inf e^{-mu u} f(x + u) du expanded in closed form.
  fw_tail_ = tail_integral(b_tail_, mu_) * (mu_ * pi0_);
  for (std::size_t i = 0; i < g_.size(); ++i) {
    fw_tail_ += tail_integral(g_[i], mu_) * (mu_ * c_[i]);
  }
  // f_W = -d/dx P[W > x] = -mu P[W > x] + mu pi0 b_tail + mu sum c_i g_i.
  density_ = fw_tail_ * -mu_ + b_tail_ * (mu_ * pi0_);
  for (std::size_t i = 0; i < g_.size(); ++i) {
    density_ += g_[i] * (mu_ * c_[i]);
  }
}

double ClosedFormW::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return 1.0 - eval(fw_tail_, x);
}

double ClosedFormW::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return eval(density_, x);
}

double ClosedFormW::lt(double kappa) const {
  return pi0_ + laplace(density_, kappa);
}

double cdf(const ClosedFormW& w, double x) { return w.cdf(x); }
double pdf(const ClosedFormW& w, double x) { return w.pdf(x); }

ClosedFormW closed_form(const SystemSigma& sys, const SigmaSolution& sol) {
  return ClosedFormW(sys.mu, sol.pi0, sol.c, sys.b_tail, sys.dec.g);
}

WaitingTimeSolution solve_waiting_time(const dists::DistSpec& a,
                                       const dists::DistSpec& b) {
  if (a.kind() != dists::Kind::exponential) {
    throw SpecError(
        "solve_waiting_time: the closed form requires exponential A");
  }
  if (!b.tail_fun()) {
    throw SpecError(
        "solve_waiting_time: B must have an exp-poly-trig tail (continuous "
        "with finite kernel decomposition)");
  }
  const dists::KernelDecomposition dec = dists::decompose_kernel(b);
  SystemSigma sys = build_sigma(a.rate(), dec, *b.tail_fun());
  SigmaSolution sol = solve_sigma(sys);
  ClosedFormW w = closed_form(sys, sol);
  return WaitingTimeSolution{std::move(sys), std::move(sol), std::move(w)};
}

}  // namespace lindley::theorem
