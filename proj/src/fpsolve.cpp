#include "lindley/fpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "lindley/errors.hpp"
#include "lindley/threads.hpp"

namespace lindley::fpsolve {

Grid::Grid(double xmax, std::size_t n) : x_max(xmax), n_points(n) {
  if (!(xmax > 0.0) || n < 2) {
    throw SpecError("grid: requires x_max > 0 and at least two nodes");
  }
}

Grid Grid::with_spacing(double x_max_hint, double h) {
  if (!(h > 0.0) || !(x_max_hint > 0.0)) {
    throw SpecError("grid: spacing and extent must be positive");
  }
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(x_max_hint / h)) + 1;
  return Grid(static_cast<double>(n - 1) * h, n);
}

GridFun::GridFun(const Grid& g, double fill) : grid(g), v(g.n_points, fill) {}

GridFun::GridFun(const Grid& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
  if (v.size() != g.n_points) throw SpecError("grid function: size mismatch");
}

double GridFun::value(double x) const {
  if (x <= 0.0) return v.front();
  if (x >= grid.x_max) return v.back();
  const double t = x / grid.h();
  const std::size_t i = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

double sup_dist(const GridFun& f, const GridFun& g) {
  if (!(f.grid == g.grid)) throw SpecError("sup_dist: grid mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    d = std::max(d, std::abs(f.v[i] - g.v[i]));
  }
  return d;
}

XRep build_x_rep(const dists::DistSpec& a, const dists::DistSpec& b,
                 const Grid& grid) {
  dists::XTailFn xt(a, b);
  const std::size_t n = grid.n_points;
  XRep rep;
  rep.grid = grid;
  rep.tail.resize(2 * n - 1);
  const double h = grid.h();
  for (std::size_t i = 0; i < 2 * n - 1; ++i) {
    const double x =
        (static_cast<double>(i) - static_cast<double>(n - 1)) * h;
    rep.tail[i] = xt(x);
  }
  // The tail must be nonincreasing; quadrature jitter beyond 1e-9 would
  // indicate a real defect, smaller wiggles are flattened.
  for (std::size_t i = 1; i < rep.tail.size(); ++i) {
    if (rep.tail[i] > rep.tail[i - 1] + 1e-9) {
      throw ValidationError("build_x_rep: tail of X is not nonincreasing");
    }
    rep.tail[i] = std::min(rep.tail[i], rep.tail[i - 1]);
  }
  rep.rho = rep.tail[n - 1];
  return rep;
}

double default_x_max(const dists::DistSpec& a, const dists::DistSpec& b) {
  dists::XTailFn xt(a, b);
  const double cap = std::max(1.0, 50.0 * b.mean());
  constexpr double kThreshold = 1e-9;
  if (xt(cap) >= kThreshold) return cap;
  double lo = 0.0, hi = std::min(1.0, cap);
  while (xt(hi) >= kThreshold) {
    lo = hi;
    hi = std::min(2.0 * hi, cap);
    if (hi == cap) break;
  }
  for (int it = 0; it < 100 && hi - lo > 1e-3; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (xt(mid) >= kThreshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

GridFun map_T(const GridFun& f, const XRep& x_rep) {
  if (!(f.grid == x_rep.grid)) throw SpecError("map_T: grid mismatch");
  const std::size_t n = f.grid.n_points;
  const std::vector<double>& tail = x_rep.tail;
  const std::vector<double>& F = f.v;

  // Cell masses d[m] over X-cells [x_m, x_{m+1}], m = 0..2n-3, and the
  // residual mass beyond x_max.
  std::vector<double> d(2 * n - 2);
  for (std::size_t m = 0; m + 1 < tail.size(); ++m) {
    d[m] = tail[m] - tail[m + 1];
  }
  const double mass_beyond = tail.back();

  std::vector<double> phi(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) phi[k] = 0.5 * (F[k] + F[k + 1]);

  GridFun out(f.grid, 0.0);
  const double f_end = F[n - 1];
  auto compute_node = [&](std::size_t i) {
    // Integral over y >= x_i: X-cells m = (n-1)+i .. 2n-3 hit F-cells
    // k = m-(n-1)-i, and the residual mass sees the constant extension.
    const double* dp = d.data() + (n - 1 + i);
    const std::size_t count = n - 1 - i;
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) acc += dp[k] * phi[k];
    out.v[i] = 1.0 - acc - mass_beyond * f_end;
  };

  const unsigned workers = n >= 4096 ? thread_budget() : 1u;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) compute_node(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += workers) compute_node(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

SolveResult solve(const XRep& x_rep, const GridFun& f0, double tol,
                  std::size_t max_iterations) {
  if (!(tol > 0.0)) throw SpecError("solve: tolerance must be positive");
  if (!(x_rep.rho < 1.0)) {
    throw StabilityError(
        "solve: P[X > 0] >= 1, the map is not a contraction; use the "
        "simulation route for the no-negative-part regime");
  }
  const double rho = x_rep.rho;
  SolveResult res;
  res.rho = rho;
  if (rho == 0.0) {
    // X <= 0 almost surely: T maps everything to the fixed point directly.
    res.f = map_T(f0, x_rep);
    res.iterations = 1;
    res.first_step = res.last_diff = sup_dist(res.f, f0);
    res.diff_log.push_back(res.first_step);
    res.error_bound = 0.0;
    return res;
  }
  const double threshold = tol * (1.0 - rho) / rho;
  GridFun cur = f0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    GridFun next = map_T(cur, x_rep);
    const double diff = sup_dist(next, cur);
    cur = std::move(next);
    res.diff_log.push_back(diff);
    res.iterations = it;
    res.last_diff = diff;
    if (it == 1) res.first_step = diff;
    if (diff <= threshold) {
      res.f = std::move(cur);
      res.error_bound = rho > 0.0 ? std::pow(rho, static_cast<double>(it)) *
                                        res.first_step / (1.0 - rho)
                                  : 0.0;
      return res;
    }
  }
  throw ConvergenceError("solve: iteration cap reached before convergence");
}

double contraction_check(const GridFun& f1, const GridFun& f2,
                         const XRep& x_rep) {
  const double denom = sup_dist(f1, f2);
  if (denom == 0.0) {
    throw SpecError("contraction_check: the two functions coincide");
  }
  const double numer = sup_dist(map_T(f1, x_rep), map_T(f2, x_rep));
  return numer / denom;
}

}  // namespace lindley::fpsolve
