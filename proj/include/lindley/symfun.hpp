#pragma once

#include <utility>
#include <vector>

namespace lindley::symfun {

enum class Trig { none, sine, cosine };

// One summand c * x^power * e^{rate*x} * {1 | sin(freq*x) | cos(freq*x)}.
// Canonical terms have power >= 0 and freq > 0 exactly when trig != none.
struct Term {
  double coeff = 0.0;
  int power = 0;
  double rate = 0.0;
  Trig trig = Trig::none;
  double freq = 0.0;
};

// Finite sum of exponential-polynomial-trigonometric terms.  The family is
// closed under addition, multiplication, differentiation, the weighted upper
// integral below, and two-variable expansion of f(x+y); Laplace transforms
// at admissible points are evaluated in closed form.  Construction
// canonicalizes: trig terms get positive frequency, like terms merge, and
// coefficients with magnitude below 1e-14 are dropped.
class Fun {
 public:
  Fun() = default;
  explicit Fun(std::vector<Term> terms);

  static Fun constant(double c);
  // c * x^power * e^{rate*x} * trig(freq*x)
  static Fun term(double coeff, int power, double rate, Trig trig = Trig::none,
                  double freq = 0.0);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double operator()(double x) const;

  Fun& operator+=(const Fun& o);
  Fun& operator-=(const Fun& o);
  Fun& operator*=(double s);

 private:
  std::vector<Term> terms_;
};

Fun operator+(Fun a, const Fun& b);
Fun operator-(Fun a, const Fun& b);
Fun operator*(Fun a, double s);
Fun operator*(double s, Fun a);

double eval(const Fun& f, double x);

// Exact product (trig products reduced to sums).
Fun multiply(const Fun& a, const Fun& b);

// int_0^inf e^{-s x} f(x) dx.  Requires s > rate for every term; throws
// DivergenceError otherwise.
double laplace(const Fun& f, double s);

// x -> int_x^inf e^{-mu (s - x)} f(s) ds as a Fun with the same rates and
// frequencies as f.  Requires mu >= 0 and every term rate < 0.
Fun tail_integral(const Fun& f, double mu);

// x -> int_x^inf f(s) ds.  Requires every term rate < 0.
Fun upper_integral(const Fun& f);

// int_0^inf f(x) dx.  Requires every term rate < 0.
double integral_0_inf(const Fun& f);

Fun derivative(const Fun& f);

// Writes f(x+y) as sum_i g_i(x) h_i(y).  Each h_i is a single monomial term
// with coefficient 1; pairs are grouped by that monomial, so the count is the
// number of distinct y-side monomials, not terms() * binomials.
std::vector<std::pair<Fun, Fun>> expand_sum_arg(const Fun& f);

// Largest rate among surviving terms.  Requires a nonempty Fun.
double max_rate(const Fun& f);

// True when every term has rate < 0, or rate == 0 with power == 0.
bool bounded_on_halfline(const Fun& f);

// True when every term has rate < 0 (so |f| is integrable on [0, inf)).
bool integrable_on_halfline(const Fun& f);

}  // namespace lindley::symfun
