#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "lindley/dists.hpp"
#include "lindley/errors.hpp"
#include "lindley/rng.hpp"
#include "lindley/symfun.hpp"
#include "support/simpson.hpp"

using lindley::CounterRng;
using lindley::SpecError;
using namespace lindley::dists;
using lindley::symfun::eval;
using lindley::symfun::Fun;
using lindley::symfun::Trig;

namespace {

Fun osc_exp_tail() {
  return Fun::term(2.0 / 3.0, 0, -1.0) +
         Fun::term(1.0 / 3.0, 0, -1.0, Trig::sine, 1.0) +
         Fun::term(1.0 / 3.0, 0, -1.0, Trig::cosine, 1.0);
}

// Laplace transform of the density (2/3)(1 + sin x) e^{-x}:
// (2/3)(s^2 + 3s + 3) / ((s+1)(s^2+2s+2)), in ascending coefficients.
const std::vector<double> kOscNumer = {2.0, 2.0, 2.0 / 3.0};
const std::vector<double> kOscDenom = {2.0, 4.0, 3.0, 1.0};

// One-sample Kolmogorov-Smirnov distance against a model cdf.
template <typename Cdf>
double ks_distance(std::vector<double> xs, const Cdf& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fx = cdf(xs[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - fx));
    d = std::max(d, std::abs(static_cast<double>(i) / n - fx));
  }
  return d;
}

}  // namespace

TEST_CASE("cdf and tail: exponential, deterministic, uniform") {
  const DistSpec e2 = DistSpec::exponential(2.0);
  CHECK(e2.cdf(0.0) == 0.0);
  CHECK(e2.cdf(1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(e2.tail(1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(e2.tail(-0.5) == 1.0);
  CHECK(e2.mean() == doctest::Approx(0.5).epsilon(1e-15));

  const DistSpec d3 = DistSpec::deterministic(3.0);
  CHECK(d3.cdf(2.9) == 0.0);
  CHECK(d3.cdf(3.0) == 1.0);
  CHECK(d3.tail(3.0) == 0.0);
  CHECK(d3.mean() == 3.0);

  const DistSpec u = DistSpec::uniform(1.0, 3.0);
  CHECK(u.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(u.cdf(0.5) == 0.0);
  CHECK(u.tail(3.5) == 0.0);
  CHECK(u.mean() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cdf: oscillating exponential tail") {
  const DistSpec b = DistSpec::exp_poly_trig_tail(osc_exp_tail());
  CHECK(b.tail(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : {0.0, 0.5, 1.7, 4.2}) {
    const double expect =
        std::exp(-x) * (2.0 + std::sin(x) + std::cos(x)) / 3.0;
    CHECK(b.tail(x) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(b.cdf(x) == doctest::Approx(1.0 - expect).epsilon(1e-13));
  }
  CHECK(b.mean() == doctest::Approx(1.0).epsilon(1e-13));
  REQUIRE(b.has_density());
  // density = (2/3)(1 + sin x) e^{-x}
  for (double x : {0.0, 0.9, 2.4}) {
    CHECK(b.density(x) ==
          doctest::Approx(2.0 / 3.0 * (1.0 + std::sin(x)) * std::exp(-x))
              .epsilon(1e-13));
  }
}

TEST_CASE("spec validation errors") {
  CHECK_THROWS_AS(DistSpec::exponential(0.0), SpecError);
  CHECK_THROWS_AS(DistSpec::uniform(2.0, 1.0), SpecError);
  CHECK_THROWS_AS(DistSpec::weibull_tail(1), SpecError);
  // tail(0) != 1
  CHECK_THROWS_AS(DistSpec::exp_poly_trig_tail(Fun::term(0.5, 0, -1.0)),
                  SpecError);
  // increasing on part of the half-line
  CHECK_THROWS_AS(DistSpec::exp_poly_trig_tail(
                      Fun::term(1.0, 0, -1.0, Trig::cosine, 6.0)),
                  SpecError);
  // transform mass at s = 0 is 1/2, not a probability density
  CHECK_THROWS_AS(DistSpec::rational_lt({1.0}, {2.0, 3.0, 1.0}), SpecError);
}

TEST_CASE("sample: deterministic is exact, exponential passes a KS test") {
  CounterRng rng(12345);
  const DistSpec d3 = DistSpec::deterministic(3.0);
  for (int i = 0; i < 10; ++i) CHECK(d3.sample(rng) == 3.0);

  const DistSpec e2 = DistSpec::exponential(2.0);
  const std::size_t n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = e2.sample(rng);
  const double d = ks_distance(xs, [&](double x) { return e2.cdf(x); });
  // 1% critical value of the one-sample KS statistic
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));

  const DistSpec u = DistSpec::uniform(1.0, 3.0);
  std::vector<double> us(n);
  for (auto& x : us) x = u.sample(rng);
  CHECK(*std::min_element(us.begin(), us.end()) >= 1.0);
  CHECK(*std::max_element(us.begin(), us.end()) <= 3.0);
  const double du = ks_distance(us, [&](double x) { return u.cdf(x); });
  CHECK(du < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample: oscillating tail via tail inversion has the right law") {
  const DistSpec b = DistSpec::exp_poly_trig_tail(osc_exp_tail());
  CounterRng rng(777);
  const std::size_t n = 200000;
  std::vector<double> xs(n);
  double sum = 0.0, sumsq = 0.0;
  for (auto& x : xs) {
    x = b.sample(rng);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - mean * mean;
  const double se = std::sqrt(var / static_cast<double>(n));
  CHECK(std::abs(mean - 1.0) < 3.0 * se);
  const double d = ks_distance(xs, [&](double x) { return b.cdf(x); });
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("residues: simple poles") {
  // 1 / (s + 1)
  const ResidueExpansion e1 = residues({1.0}, {1.0, 1.0});
  REQUIRE(e1.groups.size() == 1);
  CHECK(e1.groups[0].root.real() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e1.groups[0].root.imag() == 0.0);
  REQUIRE(e1.groups[0].coeffs.size() == 1);
  CHECK(e1.groups[0].coeffs[0].real() == doctest::Approx(1.0).epsilon(1e-12));

  // 1 / ((s+1)(s+2)) = 1/(s+1) - 1/(s+2)
  const ResidueExpansion e2 = residues({1.0}, {2.0, 3.0, 1.0});
  REQUIRE(e2.groups.size() == 2);
  CHECK(e2.total_degree() == 2);
  for (const auto& g : e2.groups) {
    const double expect = g.root.real() < -1.5 ? -1.0 : 1.0;
    CHECK(g.coeffs[0].real() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("residues: repeated root") {
  // 1 / (s+1)^2: pure second-order fraction
  const ResidueExpansion e = residues({1.0}, {1.0, 2.0, 1.0});
  REQUIRE(e.groups.size() == 1);
  CHECK(e.groups[0].multiplicity == 2);
  CHECK(std::abs(e.groups[0].coeffs[0]) < 1e-9);
  CHECK(e.groups[0].coeffs[1].real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("residues: complex pair with a real pole, recomposition identity") {
  const ResidueExpansion e = residues(kOscNumer, kOscDenom);
  CHECK(e.total_degree() == 3);
  bool saw_real = false, saw_pair = false;
  for (const auto& g : e.groups) {
    if (g.is_pair()) {
      saw_pair = true;
      CHECK(g.root.real() == doctest::Approx(-1.0).epsilon(1e-10));
      CHECK(std::abs(g.root.imag()) == doctest::Approx(1.0).epsilon(1e-10));
    } else {
      saw_real = true;
      CHECK(g.root.real() == doctest::Approx(-1.0).epsilon(1e-10));
    }
  }
  CHECK(saw_real);
  CHECK(saw_pair);

  CounterRng rng(5150);
  for (int i = 0; i < 20; ++i) {
    const std::complex<double> s(4.0 * rng.next_unit(),
                                 -3.0 + 6.0 * rng.next_unit());
    std::complex<double> pn = 0.0, qn = 0.0;
    for (std::size_t k = kOscNumer.size(); k-- > 0;)
      pn = pn * s + kOscNumer[k];
    for (std::size_t k = kOscDenom.size(); k-- > 0;)
      qn = qn * s + kOscDenom[k];
    const std::complex<double> direct = pn / qn;
    const std::complex<double> recomposed = e.eval_fractions(s);
    CHECK(std::abs(recomposed - direct) <= 1e-9 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("residues: degree violations are rejected") {
  CHECK_THROWS_AS(residues({1.0, 1.0}, {1.0, 1.0}), SpecError);
  CHECK_THROWS_AS(residues({1.0, 0.0, 2.0}, {1.0, 1.0}), SpecError);
  CHECK_THROWS_AS(residues({1.0}, {}), SpecError);
}

TEST_CASE("density_from_lt: known inversions") {
  // 1/(s+1) -> e^{-x}
  const Fun f1 = density_from_lt(residues({1.0}, {1.0, 1.0}));
  for (double x : {0.0, 0.8, 3.0})
    CHECK(eval(f1, x) == doctest::Approx(std::exp(-x)).epsilon(1e-11));

  // 1/(s+1)^2 -> x e^{-x}
  const Fun f2 = density_from_lt(residues({1.0}, {1.0, 2.0, 1.0}));
  for (double x : {0.0, 0.8, 3.0})
    CHECK(eval(f2, x) == doctest::Approx(x * std::exp(-x)).epsilon(1e-9));

  // oscillating example -> (2/3)(1 + sin x) e^{-x}
  const Fun f3 = density_from_lt(residues(kOscNumer, kOscDenom));
  for (double x : {0.0, 0.4, 1.3, 2.9, 5.5}) {
    CHECK(eval(f3, x) ==
          doctest::Approx(2.0 / 3.0 * (1.0 + std::sin(x)) * std::exp(-x))
              .epsilon(1e-10));
  }
}

TEST_CASE("density_from_lt: warning on signed reconstructions, error on bad poles") {
  // 3 e^{-x} - 4 e^{-2x} has transform (2 - s)/((s+1)(s+2)); mass 1 but dips
  // negative near 0.
  std::string warning;
  const Fun f = density_from_lt(residues({2.0, -1.0}, {2.0, 3.0, 1.0}), &warning);
  CHECK(!warning.empty());
  CHECK(eval(f, 0.0) == doctest::Approx(-1.0).epsilon(1e-9));

  // 1/(s-1) inverts to a growing exponential: not a density transform.
  CHECK_THROWS_AS(static_cast<void>(density_from_lt(residues({1.0}, {-1.0, 1.0}))),
                  SpecError);
}

TEST_CASE("cdf_from_lt: survival functions of known inversions") {
  const Fun t1 = cdf_from_lt(residues({1.0}, {1.0, 1.0}));
  for (double x : {0.0, 1.1, 4.0})
    CHECK(eval(t1, x) == doctest::Approx(std::exp(-x)).epsilon(1e-11));

  const Fun t2 = cdf_from_lt(residues({1.0}, {1.0, 2.0, 1.0}));
  for (double x : {0.0, 1.1, 4.0})
    CHECK(eval(t2, x) == doctest::Approx((1.0 + x) * std::exp(-x)).epsilon(1e-9));

  const Fun t3 = cdf_from_lt(residues(kOscNumer, kOscDenom));
  for (double x : {0.0, 0.7, 2.2, 6.0}) {
    CHECK(eval(t3, x) ==
          doctest::Approx(std::exp(-x) * (2.0 + std::sin(x) + std::cos(x)) / 3.0)
              .epsilon(1e-10));
  }
}

TEST_CASE("rational_lt spec: density, tail, and mean are consistent") {
  const DistSpec b = DistSpec::rational_lt(kOscNumer, kOscDenom);
  CHECK(b.mean() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(b.warnings().empty());
  // density == -tail' by finite differences
  const double h = 1e-6;
  for (double x : {0.3, 1.0, 2.5}) {
    const double fd = (b.tail(x - h) - b.tail(x + h)) / (2.0 * h);
    CHECK(b.density(x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("decompose_kernel: exponential tail is a single product pair") {
  const KernelDecomposition dec = decompose_kernel(DistSpec::exponential(1.5));
  REQUIRE(dec.n() == 1);
  for (double x : {0.0, 0.5, 2.0}) {
    for (double y : {0.0, 0.7, 1.4}) {
      CHECK(eval(dec.g[0], x) * eval(dec.h[0], y) ==
            doctest::Approx(std::exp(-1.5 * (x + y))).epsilon(1e-12));
    }
  }
}

TEST_CASE("decompose_kernel: oscillating tail, three pairs, matches a manual five-pair split") {
  const DistSpec b = DistSpec::exp_poly_trig_tail(osc_exp_tail());
  const KernelDecomposition dec = decompose_kernel(b);
  CHECK(dec.n() == 3);

  std::vector<std::pair<Fun, Fun>> manual;
  manual.push_back({Fun::term(2.0 / 3.0, 0, -1.0), Fun::term(1.0, 0, -1.0)});
  manual.push_back({Fun::term(1.0, 0, -1.0, Trig::sine, 1.0),
                    Fun::term(1.0 / 3.0, 0, -1.0, Trig::cosine, 1.0)});
  manual.push_back({Fun::term(1.0 / 3.0, 0, -1.0, Trig::cosine, 1.0),
                    Fun::term(1.0, 0, -1.0, Trig::sine, 1.0)});
  manual.push_back({Fun::term(1.0, 0, -1.0, Trig::cosine, 1.0),
                    Fun::term(1.0 / 3.0, 0, -1.0, Trig::cosine, 1.0)});
  manual.push_back({Fun::term(1.0, 0, -1.0, Trig::sine, 1.0),
                    Fun::term(-1.0 / 3.0, 0, -1.0, Trig::sine, 1.0)});

  for (double x : {0.0, 0.6, 1.9, 3.3}) {
    for (double y : {0.0, 0.8, 2.6}) {
      double via_dec = 0.0;
      for (int i = 0; i < dec.n(); ++i)
        via_dec += eval(dec.g[i], x) * eval(dec.h[i], y);
      double via_manual = 0.0;
      for (const auto& [g, h] : manual) via_manual += eval(g, x) * eval(h, y);
      CHECK(via_dec == doctest::Approx(via_manual).epsilon(1e-12));
      CHECK(via_dec == doctest::Approx(b.tail(x + y)).epsilon(1e-12));
    }
  }

  // g factors integrable, h factors bounded
  for (int i = 0; i < dec.n(); ++i) {
    CHECK(lindley::symfun::integrable_on_halfline(dec.g[i]));
    CHECK(lindley::symfun::bounded_on_halfline(dec.h[i]));
  }
}

TEST_CASE("decompose_kernel: second-order rational tail gives two pairs") {
  // density x e^{-x}, tail (1 + x) e^{-x}
  const DistSpec b = DistSpec::rational_lt({1.0}, {1.0, 2.0, 1.0});
  const KernelDecomposition dec = decompose_kernel(b);
  CHECK(dec.n() == 2);
  for (double x : {0.0, 0.9, 2.8}) {
    for (double y : {0.0, 1.2}) {
      double sum = 0.0;
      for (int i = 0; i < dec.n(); ++i)
        sum += eval(dec.g[i], x) * eval(dec.h[i], y);
      CHECK(sum ==
            doctest::Approx((1.0 + x + y) * std::exp(-(x + y))).epsilon(1e-11));
    }
  }
}

TEST_CASE("decompose_kernel: rejects specs without a term-sum tail") {
  CHECK_THROWS_AS(decompose_kernel(DistSpec::deterministic(1.0)), SpecError);
  CHECK_THROWS_AS(decompose_kernel(DistSpec::uniform(0.0, 1.0)), SpecError);
  CHECK_THROWS_AS(decompose_kernel(DistSpec::weibull_tail(2)), SpecError);
}

TEST_CASE("x_tail: exponential service, oscillating preparation") {
  const DistSpec a = DistSpec::exponential(2.0);
  const DistSpec b = DistSpec::exp_poly_trig_tail(osc_exp_tail());
  CHECK(x_tail(a, b, 0.0) == doctest::Approx(32.0 / 45.0).epsilon(1e-13));
  for (double x : {0.0, 0.5, 1.5, 4.0, 9.0}) {
    const double expect = std::exp(-x) * (4.0 / 9.0 + 2.0 / 15.0 * std::sin(x) +
                                          4.0 / 15.0 * std::cos(x));
    CHECK(x_tail(a, b, x) == doctest::Approx(expect).epsilon(1e-12));
  }
  for (double x : {-0.5, -2.0, -6.0}) {
    const double expect = 1.0 - 13.0 / 45.0 * std::exp(2.0 * x);
    CHECK(x_tail(a, b, x) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(x_neg_prob(a, b) == doctest::Approx(13.0 / 45.0).epsilon(1e-12));
}

TEST_CASE("x_tail: two exponentials") {
  const DistSpec a = DistSpec::exponential(1.0);
  const DistSpec b = DistSpec::exponential(1.0);
  for (double x : {0.0, 0.8, 3.1}) {
    CHECK(x_tail(a, b, x) == doctest::Approx(0.5 * std::exp(-x)).epsilon(1e-13));
  }
  for (double x : {-0.8, -3.1}) {
    CHECK(x_tail(a, b, x) ==
          doctest::Approx(1.0 - 0.5 * std::exp(x)).epsilon(1e-13));
  }
}

TEST_CASE("x_tail: degenerate preparation time") {
  const DistSpec a = DistSpec::exponential(1.0);
  const DistSpec b0 = DistSpec::deterministic(0.0);
  CHECK(x_tail(a, b0, 0.0) == 0.0);
  CHECK(x_tail(a, b0, 1.0) == 0.0);
  // X = -A: P[X > -1] = P[A < 1]
  CHECK(x_tail(a, b0, -1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));

  const DistSpec d1 = DistSpec::deterministic(1.0);
  const DistSpec d3 = DistSpec::deterministic(3.0);
  CHECK(x_tail(d1, d3, 1.9) == 1.0);  // X = 2 surely
  CHECK(x_tail(d1, d3, 2.0) == 0.0);
  CHECK(x_neg_prob(d1, d3) == 0.0);
  CHECK(x_neg_prob(d3, d1) == 1.0);
  CHECK(x_neg_prob(d1, d1) == 0.0);  // X = 0: no negative part
}

TEST_CASE("x_tail: quadrature route against closed forms") {
  const DistSpec a = DistSpec::uniform(0.0, 2.0);
  const DistSpec b = DistSpec::exponential(1.0);
  for (double x : {0.0, 0.5, 2.0}) {
    const double expect = 0.5 * std::exp(-x) * (1.0 - std::exp(-2.0));
    CHECK(x_tail(a, b, x) == doctest::Approx(expect).epsilon(1e-9));
  }
  // x = -1: P[B - A > -1] = 1/2 + (1 - e^{-1}) / 2
  CHECK(x_tail(a, b, -1.0) ==
        doctest::Approx(0.5 + 0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-9));
  CHECK(x_neg_prob(a, b) ==
        doctest::Approx(1.0 - 0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-9));
}

TEST_CASE("x_tail: nonincreasing in x") {
  const DistSpec a = DistSpec::exponential(2.0);
  const DistSpec b = DistSpec::exp_poly_trig_tail(osc_exp_tail());
  const XTailFn xt(a, b);
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = -5.0 + 10.0 * i / 200.0;
    const double v = xt(x);
    CHECK(v <= prev + 1e-12);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("weibull_scaled: factored tail matches direct quadrature") {
  const DistSpec a = DistSpec::exponential(1.0);
  const DistSpec b = DistSpec::weibull_tail(2);
  const XTailFn xt(a, b);

  // P[X > x] = e^{-x^2} scaled(x) with scaled(x) = int e^{-z} e^{x^2-(x+z)^2} dz
  for (double x : {0.0, 0.5, 1.5, 3.0}) {
    const double direct = testsupport::simpson_panels(
        [&](double z) {
          return std::exp(-z) * std::exp(-(x + z) * (x + z));
        },
        0.0, 8.0);
    CHECK(xt(x) == doctest::Approx(direct).epsilon(1e-8));
    CHECK(xt.weibull_scaled(x) ==
          doctest::Approx(direct * std::exp(x * x)).epsilon(1e-8));
  }

  // The factored form stays finite far beyond where e^{-x^2} underflows.
  const double deep = 40.0;
  const double s = xt.weibull_scaled(deep);
  CHECK(std::isfinite(s));
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  // scaled is decreasing in x
  CHECK(xt.weibull_scaled(1.0) < xt.weibull_scaled(0.0));
  CHECK(xt.weibull_scaled(5.0) < xt.weibull_scaled(1.0));
}
