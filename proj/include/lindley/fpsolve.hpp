#pragma once

#include <cstddef>
#include <vector>

#include "lindley/dists.hpp"

namespace lindley::fpsolve {

// Uniform grid 0, h, 2h, ..., x_max with h = x_max / (n_points - 1).
struct Grid {
  double x_max = 0.0;
  std::size_t n_points = 0;

  Grid() = default;
  Grid(double xmax, std::size_t n);
  static Grid with_spacing(double x_max_hint, double h);

  double h() const { return x_max / static_cast<double>(n_points - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * h(); }
  bool operator==(const Grid& o) const {
    return x_max == o.x_max && n_points == o.n_points;
  }
};

// Function values on a Grid; evaluation linearly interpolates inside
// [0, x_max] and extends by the boundary values outside.
struct GridFun {
  Grid grid;
  std::vector<double> v;

  GridFun() = default;
  GridFun(const Grid& g, double fill);
  GridFun(const Grid& g, std::vector<double> values);

  double value(double x) const;
};

double sup_dist(const GridFun& f, const GridFun& g);

// Tail of X = B - A sampled on the symmetric grid -x_max, ..., 0, ..., x_max
// (2 n_points - 1 nodes at the same spacing as the F grid), plus the
// contraction factor rho = P[X > 0].
struct XRep {
  Grid grid;
  std::vector<double> tail;
  double rho = 0.0;

  double tail_at_index(std::size_t i) const { return tail[i]; }
};

XRep build_x_rep(const dists::DistSpec& a, const dists::DistSpec& b,
                 const Grid& grid);

// Default truncation point: the smallest x with P[X > x] < 1e-9, capped at
// 50 mean-of-B units.
double default_x_max(const dists::DistSpec& a, const dists::DistSpec& b);

// One application of the integral map
//   (T F)(x) = 1 - integral_x^inf F(y - x) dF_X(y),
// with cell masses taken by differencing the tail (exact total mass) and F
// evaluated at cell midpoints (trapezoid of node values).
GridFun map_T(const GridFun& f, const XRep& x_rep);

struct SolveResult {
  GridFun f;
  std::size_t iterations = 0;
  double rho = 0.0;
  double first_step = 0.0;        // ||T f0 - f0||
  double last_diff = 0.0;         // final successive difference
  double error_bound = 0.0;       // a-priori rho^k ||f1-f0|| / (1-rho)
  std::vector<double> diff_log;   // successive sup-differences
};

// Iterates T from f0 until the successive sup-difference is at most
// tol (1-rho)/rho, which bounds the distance to the fixed point by tol.
SolveResult solve(const XRep& x_rep, const GridFun& f0, double tol,
                  std::size_t max_iterations = 10000);

// Measured contraction ratio ||T f1 - T f2|| / ||f1 - f2||.
double contraction_check(const GridFun& f1, const GridFun& f2,
                         const XRep& x_rep);

}  // namespace lindley::fpsolve
