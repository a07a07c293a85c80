#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lindley/dists.hpp"
#include "lindley/errors.hpp"
#include "lindley/fpsolve.hpp"
#include "lindley/rng.hpp"
#include "lindley/symfun.hpp"
#include "lindley/theorem.hpp"

using lindley::CounterRng;
using lindley::SpecError;
using lindley::StabilityError;
using namespace lindley::fpsolve;
using lindley::dists::DistSpec;
using lindley::symfun::Fun;
using lindley::symfun::Trig;

namespace {

Fun osc_exp_tail() {
  return Fun::term(2.0 / 3.0, 0, -1.0) +
         Fun::term(1.0 / 3.0, 0, -1.0, Trig::sine, 1.0) +
         Fun::term(1.0 / 3.0, 0, -1.0, Trig::cosine, 1.0);
}

DistSpec osc_b() { return DistSpec::exp_poly_trig_tail(osc_exp_tail()); }

constexpr double kOscRho = 32.0 / 45.0;

}  // namespace

TEST_CASE("Grid and GridFun basics") {
  const Grid g = Grid::with_spacing(5.0, 1e-3);
  CHECK(g.n_points == 5001);
  CHECK(g.x_max == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(g.h() == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(5000) == doctest::Approx(5.0).epsilon(1e-12));

  // Spacing that does not divide the hint grows x_max to the next node.
  const Grid g2 = Grid::with_spacing(1.0, 0.3);
  CHECK(g2.n_points == 5);
  CHECK(g2.x_max == doctest::Approx(1.2).epsilon(1e-12));

  CHECK_THROWS_AS(Grid(1.0, 1), SpecError);
  CHECK_THROWS_AS(Grid(-1.0, 10), SpecError);

  GridFun f(Grid(2.0, 3), {0.0, 1.0, 4.0});
  CHECK(f.value(0.0) == 0.0);
  CHECK(f.value(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.value(1.5) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.value(-3.0) == 0.0);   // constant extension below
  CHECK(f.value(9.0) == 4.0);    // constant extension above
  CHECK(sup_dist(f, f) == 0.0);
}

TEST_CASE("build_x_rep: increment tail on the symmetric grid") {
  const DistSpec a = DistSpec::exponential(2.0);
  const Grid grid = Grid::with_spacing(12.0, 0.01);
  const XRep rep = build_x_rep(a, osc_b(), grid);
  REQUIRE(rep.tail.size() == 2 * grid.n_points - 1);
  CHECK(rep.rho == doctest::Approx(kOscRho).epsilon(1e-12));
  CHECK(rep.tail[grid.n_points - 1] == doctest::Approx(kOscRho).epsilon(1e-12));
  CHECK(rep.tail.front() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.tail.back() < 1e-4);
  double prev = 1.0;
  for (double t : rep.tail) {
    CHECK(t <= prev + 1e-15);
    prev = t;
  }
}

TEST_CASE("build_x_rep: degenerate and exponential cases") {
  const Grid grid = Grid::with_spacing(5.0, 0.01);
  const XRep zero = build_x_rep(DistSpec::exponential(1.0),
                                DistSpec::deterministic(0.0), grid);
  CHECK(zero.rho == 0.0);
  for (std::size_t i = grid.n_points - 1; i < zero.tail.size(); ++i) {
    CHECK(zero.tail[i] == 0.0);
  }

  const XRep ee = build_x_rep(DistSpec::exponential(1.0),
                              DistSpec::exponential(1.0), grid);
  CHECK(ee.rho == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("default_x_max: tail threshold with a mean-scaled cap") {
  const double xm = default_x_max(DistSpec::exponential(2.0), osc_b());
  CHECK(xm > 18.0);
  CHECK(xm < 24.0);
  CHECK(lindley::dists::x_tail(DistSpec::exponential(2.0), osc_b(), xm) <= 1e-9);
}

TEST_CASE("map_T: constant inputs hit the exact images") {
  const Grid grid = Grid::with_spacing(10.0, 0.01);
  const XRep rep = build_x_rep(DistSpec::exponential(2.0), osc_b(), grid);

  const GridFun one(grid, 1.0);
  const GridFun t_one = map_T(one, rep);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    CHECK(t_one.v[i] ==
          doctest::Approx(1.0 - rep.tail[grid.n_points - 1 + i]).epsilon(1e-12));
  }

  const GridFun zero(grid, 0.0);
  const GridFun t_zero = map_T(zero, rep);
  for (double v : t_zero.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("map_T: the closed-form distribution is nearly a fixed point") {
  const DistSpec a = DistSpec::exponential(2.0);
  const auto sol = lindley::theorem::solve_waiting_time(a, osc_b());

  for (double h : {0.01, 0.005}) {
    const Grid grid = Grid::with_spacing(14.0, h);
    const XRep rep = build_x_rep(a, osc_b(), grid);
    std::vector<double> v(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      v[i] = sol.w.cdf(grid.node(i));
    }
    const GridFun f(grid, std::move(v));
    const double err = sup_dist(map_T(f, rep), f);
    CHECK(err <= 0.3 * h);  // discretization-level residual only
  }
}

TEST_CASE("solve: zero preparation time converges in one application") {
  const Grid grid = Grid::with_spacing(5.0, 0.01);
  const XRep rep = build_x_rep(DistSpec::exponential(1.0),
                               DistSpec::deterministic(0.0), grid);
  CHECK(rep.rho == 0.0);
  const SolveResult res = solve(rep, GridFun(grid, 0.0), 1e-8);
  CHECK(res.iterations == 1);
  for (double v : res.f.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("solve: rho >= 1 has no contraction and is refused") {
  const Grid grid = Grid::with_spacing(5.0, 0.01);
  const XRep rep = build_x_rep(DistSpec::deterministic(0.0),
                               DistSpec::exponential(1.0), grid);
  CHECK(rep.rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve(rep, GridFun(grid, 1.0), 1e-6), StabilityError);
}

TEST_CASE("solve: oscillating example against the closed form") {
  const DistSpec a = DistSpec::exponential(2.0);
  const auto closed = lindley::theorem::solve_waiting_time(a, osc_b());

  const Grid grid = Grid::with_spacing(default_x_max(a, osc_b()), 4e-3);
  const XRep rep = build_x_rep(a, osc_b(), grid);
  const double tol = 1e-6;
  const SolveResult res = solve(rep, GridFun(grid, 1.0), tol);

  // Iteration count within the Banach a-priori prediction.
  const double thr = tol * (1.0 - rep.rho) / rep.rho;
  const std::size_t predicted = static_cast<std::size_t>(std::ceil(
                                    std::log(thr / res.first_step) /
                                    std::log(rep.rho))) +
                                1;
  CHECK(res.iterations <= predicted + 1);
  CHECK(res.last_diff <= thr);

  // Successive differences contract at least geometrically.
  for (std::size_t i = 1; i < res.diff_log.size(); ++i) {
    CHECK(res.diff_log[i] <= rep.rho * res.diff_log[i - 1] * (1.0 + 1e-9) + 1e-15);
  }

  // Fixed-point residual at the solver's own tolerance.
  CHECK(sup_dist(map_T(res.f, rep), res.f) <= 2.0 * tol);

  double err = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    err = std::max(err, std::abs(res.f.v[i] - closed.w.cdf(grid.node(i))));
  }
  CHECK(err <= 3e-4);

  // pi0 read off the grid solution.
  CHECK(res.f.v[0] == doctest::Approx(closed.w.pi0()).epsilon(5e-4));
}

TEST_CASE("solve: the fixed point does not depend on the starting function") {
  const DistSpec a = DistSpec::exponential(2.0);
  const Grid grid = Grid::with_spacing(10.0, 0.01);
  const XRep rep = build_x_rep(a, osc_b(), grid);
  const double tol = 1e-8;
  const SolveResult from_one = solve(rep, GridFun(grid, 1.0), tol);
  const SolveResult from_zero = solve(rep, GridFun(grid, 0.0), tol);
  CHECK(sup_dist(from_one.f, from_zero.f) <= 2.0 * tol);
}

TEST_CASE("solve: grid refinement changes the answer at discretization order") {
  const DistSpec a = DistSpec::exponential(2.0);
  const double x_max = 12.0;
  const Grid coarse = Grid::with_spacing(x_max, 0.02);
  const Grid fine = Grid::with_spacing(x_max, 0.01);
  const SolveResult rc = solve(build_x_rep(a, osc_b(), coarse),
                               GridFun(coarse, 1.0), 1e-8);
  const SolveResult rf =
      solve(build_x_rep(a, osc_b(), fine), GridFun(fine, 1.0), 1e-8);
  double d = 0.0;
  for (std::size_t i = 0; i < coarse.n_points; ++i) {
    d = std::max(d, std::abs(rc.f.v[i] - rf.f.value(coarse.node(i))));
  }
  CHECK(d <= 0.1 * coarse.h());
}

TEST_CASE("contraction_check: constant shifts realize the contraction factor") {
  const DistSpec a = DistSpec::exponential(2.0);
  const Grid grid = Grid::with_spacing(10.0, 0.01);
  const XRep rep = build_x_rep(a, osc_b(), grid);

  const GridFun f1(grid, 0.4);
  const GridFun f2(grid, 0.9);
  CHECK(contraction_check(f1, f2, rep) == doctest::Approx(rep.rho).epsilon(1e-10));

  CHECK_THROWS_AS(contraction_check(f1, f1, rep), SpecError);
}

TEST_CASE("contraction_check: random pairs never beat the modulus") {
  const DistSpec a = DistSpec::exponential(2.0);
  const Grid grid = Grid::with_spacing(8.0, 0.02);
  const XRep rep = build_x_rep(a, osc_b(), grid);
  CounterRng rng(31415);
  for (int rep_i = 0; rep_i < 100; ++rep_i) {
    std::vector<double> v1(grid.n_points), v2(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      v1[i] = rng.next_unit();
      v2[i] = rng.next_unit();
    }
    const double ratio = contraction_check(GridFun(grid, std::move(v1)),
                                           GridFun(grid, std::move(v2)), rep);
    CHECK(ratio <= kOscRho + 1e-3);
  }

  // rho = 0: the map is constant, any two inputs land on the same image.
  const XRep zero = build_x_rep(DistSpec::exponential(1.0),
                                DistSpec::deterministic(0.0), grid);
  CHECK(contraction_check(GridFun(grid, 0.2), GridFun(grid, 0.8), zero) == 0.0);
}
