#include "lindley/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <tuple>

#include "lindley/errors.hpp"

namespace lindley::symfun {

namespace {

constexpr double kCoeffDrop = 1e-14;

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// z^{-n}, n >= 1, by repeated multiplication (exponents here are small).
std::complex<double> inv_pow(std::complex<double> z, int n) {
  std::complex<double> inv = 1.0 / z;
  std::complex<double> r = 1.0;
  for (int i = 0; i < n; ++i) r *= inv;
  return r;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

// Flips trig terms into freq > 0 form; returns false for terms that are
// identically zero (sin of frequency 0).
bool normalize(Term& t) {
  if (t.power < 0) throw SpecError("symfun: negative power");
  if (t.trig == Trig::none) {
    t.freq = 0.0;
    return t.coeff != 0.0;
  }
  if (t.freq == 0.0) {
    if (t.trig == Trig::sine) return false;  // sin(0) = 0
    t.trig = Trig::none;                     // cos(0) = 1
    return t.coeff != 0.0;
  }
  if (t.freq < 0.0) {
    t.freq = -t.freq;
    if (t.trig == Trig::sine) t.coeff = -t.coeff;
  }
  return t.coeff != 0.0;
}

}  // namespace

Fun::Fun(std::vector<Term> terms) {
  std::vector<Term> in;
  in.reserve(terms.size());
  for (Term& t : terms) {
    if (normalize(t)) in.push_back(t);
  }
  std::sort(in.begin(), in.end(), [](const Term& a, const Term& b) {
    if (a.power != b.power) return a.power < b.power;
    if (!close(a.rate, b.rate)) return a.rate < b.rate;
    if (a.trig != b.trig) return static_cast<int>(a.trig) < static_cast<int>(b.trig);
    if (!close(a.freq, b.freq)) return a.freq < b.freq;
    return false;
  });
  for (const Term& t : in) {
    if (!terms_.empty()) {
      Term& last = terms_.back();
      if (last.power == t.power && close(last.rate, t.rate) &&
          last.trig == t.trig && close(last.freq, t.freq)) {
        last.coeff += t.coeff;
        continue;
      }
    }
    terms_.push_back(t);
  }
  std::erase_if(terms_, [](const Term& t) { return std::abs(t.coeff) < kCoeffDrop; });
}

Fun Fun::constant(double c) { return Fun({Term{c, 0, 0.0, Trig::none, 0.0}}); }

Fun Fun::term(double coeff, int power, double rate, Trig trig, double freq) {
  return Fun({Term{coeff, power, rate, trig, freq}});
}

double Fun::operator()(double x) const { return symfun::eval(*this, x); }

Fun& Fun::operator+=(const Fun& o) {
  std::vector<Term> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  *this = Fun(std::move(t));
  return *this;
}

Fun& Fun::operator-=(const Fun& o) {
  std::vector<Term> t = terms_;
  for (Term x : o.terms_) {
    x.coeff = -x.coeff;
    t.push_back(x);
  }
  *this = Fun(std::move(t));
  return *this;
}

Fun& Fun::operator*=(double s) {
  std::vector<Term> t = terms_;
  for (Term& x : t) x.coeff *= s;
  *this = Fun(std::move(t));
  return *this;
}

Fun operator+(Fun a, const Fun& b) { return a += b; }
Fun operator-(Fun a, const Fun& b) { return a -= b; }
Fun operator*(Fun a, double s) { return a *= s; }
Fun operator*(double s, Fun a) { return a *= s; }

double eval(const Fun& f, double x) {
  double acc = 0.0;
  for (const Term& t : f.terms()) {
    double v = t.coeff;
    for (int i = 0; i < t.power; ++i) v *= x;
    v *= std::exp(t.rate * x);
    if (t.trig == Trig::sine) {
      v *= std::sin(t.freq * x);
    } else if (t.trig == Trig::cosine) {
      v *= std::cos(t.freq * x);
    }
    acc += v;
  }
  return acc;
}

Fun multiply(const Fun& a, const Fun& b) {
  std::vector<Term> out;
  out.reserve(a.terms().size() * b.terms().size() * 2);
  for (const Term& s : a.terms()) {
    for (const Term& t : b.terms()) {
      const double c = s.coeff * t.coeff;
      const int k = s.power + t.power;
      const double r = s.rate + t.rate;
      if (s.trig == Trig::none && t.trig == Trig::none) {
        out.push_back({c, k, r, Trig::none, 0.0});
      } else if (s.trig == Trig::none || t.trig == Trig::none) {
        const Term& w = (s.trig == Trig::none) ? t : s;
        out.push_back({c, k, r, w.trig, w.freq});
      } else {
        const double bp = s.freq + t.freq;
        const double bm = s.freq - t.freq;
        if (s.trig == Trig::sine && t.trig == Trig::sine) {
          // sin sin = (cos(b-) - cos(b+)) / 2
          out.push_back({0.5 * c, k, r, Trig::cosine, bm});
          out.push_back({-0.5 * c, k, r, Trig::cosine, bp});
        } else if (s.trig == Trig::cosine && t.trig == Trig::cosine) {
          out.push_back({0.5 * c, k, r, Trig::cosine, bm});
          out.push_back({0.5 * c, k, r, Trig::cosine, bp});
        } else {
          // sin(u)cos(v) = (sin(u+v) + sin(u-v)) / 2, with u the sine factor
          const double su = (s.trig == Trig::sine) ? s.freq : t.freq;
          const double cv = (s.trig == Trig::sine) ? t.freq : s.freq;
          out.push_back({0.5 * c, k, r, Trig::sine, su + cv});
          out.push_back({0.5 * c, k, r, Trig::sine, su - cv});
        }
      }
    }
  }
  return Fun(std::move(out));
}

double laplace(const Fun& f, double s) {
  double acc = 0.0;
  for (const Term& t : f.terms()) {
    const double sigma = s - t.rate;
    if (!(sigma > 0.0)) {
      throw DivergenceError("laplace: transform diverges (requires s > rate)");
    }
    // int_0^inf x^k e^{-sigma x} e^{i freq x} dx = k! / (sigma - i freq)^{k+1}
    const std::complex<double> v =
        factorial(t.power) * inv_pow({sigma, -t.freq}, t.power + 1);
    acc += t.coeff * (t.trig == Trig::sine ? v.imag() : v.real());
  }
  return acc;
}

namespace {

Fun tail_integral_impl(const Fun& f, double mu, const char* op) {
  std::vector<Term> out;
  for (const Term& t : f.terms()) {
    if (!(t.rate < 0.0)) {
      throw DivergenceError(std::string(op) + ": requires every rate < 0");
    }
    // With z = rate + i*freq and w = mu - z:
    //   e^{mu x} int_x^inf s^k e^{-w s} ds = k! e^{z x} sum_j w^{j-k-1} x^j / j!
    // and the real part (cosine source) / imaginary part (sine source) of
    // beta_j e^{i freq x} splits into one cos and one sin term per j.
    const std::complex<double> w{mu - t.rate, -t.freq};
    const double kfac = factorial(t.power);
    for (int j = 0; j <= t.power; ++j) {
      const std::complex<double> beta =
          t.coeff * kfac / factorial(j) * inv_pow(w, t.power + 1 - j);
      if (t.trig == Trig::none) {
        out.push_back({beta.real(), j, t.rate, Trig::none, 0.0});
      } else if (t.trig == Trig::cosine) {
        out.push_back({beta.real(), j, t.rate, Trig::cosine, t.freq});
        out.push_back({-beta.imag(), j, t.rate, Trig::sine, t.freq});
      } else {
        out.push_back({beta.real(), j, t.rate, Trig::sine, t.freq});
        out.push_back({beta.imag(), j, t.rate, Trig::cosine, t.freq});
      }
    }
  }
  return Fun(std::move(out));
}

}  // namespace

Fun tail_integral(const Fun& f, double mu) {
  if (!(mu >= 0.0)) throw DivergenceError("tail_integral: requires mu >= 0");
  return tail_integral_impl(f, mu, "tail_integral");
}

Fun upper_integral(const Fun& f) { return tail_integral_impl(f, 0.0, "upper_integral"); }

double integral_0_inf(const Fun& f) {
  for (const Term& t : f.terms()) {
    if (!(t.rate < 0.0)) {
      throw DivergenceError("integral_0_inf: requires every rate < 0");
    }
  }
  return laplace(f, 0.0);
}

Fun derivative(const Fun& f) {
  std::vector<Term> out;
  for (const Term& t : f.terms()) {
    if (t.power > 0) out.push_back({t.coeff * t.power, t.power - 1, t.rate, t.trig, t.freq});
    if (t.rate != 0.0) out.push_back({t.coeff * t.rate, t.power, t.rate, t.trig, t.freq});
    if (t.trig == Trig::sine) {
      out.push_back({t.coeff * t.freq, t.power, t.rate, Trig::cosine, t.freq});
    } else if (t.trig == Trig::cosine) {
      out.push_back({-t.coeff * t.freq, t.power, t.rate, Trig::sine, t.freq});
    }
  }
  return Fun(std::move(out));
}

std::vector<std::pair<Fun, Fun>> expand_sum_arg(const Fun& f) {
  // Key: the y-side monomial (power, rate, trig, freq); value: x-side terms.
  using Key = std::tuple<int, double, int, double>;
  std::map<Key, std::vector<Term>> groups;
  auto put = [&groups](const Term& x_part, int hp, double hr, Trig ht, double hf) {
    Term h{1.0, hp, hr, ht, hf};
    if (!normalize(h)) return;  // never: coeff 1, trig freq pinned by caller
    groups[{h.power, h.rate, static_cast<int>(h.trig), h.freq}].push_back(x_part);
  };
  for (const Term& t : f.terms()) {
    for (int j = 0; j <= t.power; ++j) {
      const double c = t.coeff * binomial(t.power, j);
      const int xp = j;
      const int yp = t.power - j;
      if (t.trig == Trig::none) {
        put({c, xp, t.rate, Trig::none, 0.0}, yp, t.rate, Trig::none, 0.0);
      } else if (t.trig == Trig::sine) {
        // sin(b(x+y)) = sin(bx)cos(by) + cos(bx)sin(by)
        put({c, xp, t.rate, Trig::sine, t.freq}, yp, t.rate, Trig::cosine, t.freq);
        put({c, xp, t.rate, Trig::cosine, t.freq}, yp, t.rate, Trig::sine, t.freq);
      } else {
        // cos(b(x+y)) = cos(bx)cos(by) - sin(bx)sin(by)
        put({c, xp, t.rate, Trig::cosine, t.freq}, yp, t.rate, Trig::cosine, t.freq);
        put({-c, xp, t.rate, Trig::sine, t.freq}, yp, t.rate, Trig::sine, t.freq);
      }
    }
  }
  std::vector<std::pair<Fun, Fun>> out;
  out.reserve(groups.size());
  for (auto& [key, xs] : groups) {
    Fun g(std::move(xs));
    if (g.is_zero()) continue;
    const auto& [hp, hr, ht, hf] = key;
    out.emplace_back(std::move(g), Fun::term(1.0, hp, hr, static_cast<Trig>(ht), hf));
  }
  return out;
}

double max_rate(const Fun& f) {
  if (f.is_zero()) throw SpecError("max_rate: empty function");
  double m = f.terms().front().rate;
  for (const Term& t : f.terms()) m = std::max(m, t.rate);
  return m;
}

bool bounded_on_halfline(const Fun& f) {
  for (const Term& t : f.terms()) {
    if (t.rate > 0.0) return false;
    if (t.rate == 0.0 && t.power > 0) return false;
  }
  return true;
}

bool integrable_on_halfline(const Fun& f) {
  for (const Term& t : f.terms()) {
    if (t.rate >= 0.0) return false;
  }
  return true;
}

}  // namespace lindley::symfun
