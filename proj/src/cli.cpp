#include "lindley/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "lindley/errors.hpp"
#include "lindley/fpsolve.hpp"
#include "lindley/sim.hpp"
#include "lindley/tails.hpp"
#include "lindley/theorem.hpp"

namespace lindley::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using dists::DistSpec;
using dists::Kind;

namespace {

// ---------------------------------------------------------------------------
// Spec <-> JSON

std::string trig_name(symfun::Trig t) {
  switch (t) {
    case symfun::Trig::none:
      return "none";
    case symfun::Trig::sine:
      return "sin";
    case symfun::Trig::cosine:
      return "cos";
  }
  return "none";
}

symfun::Trig trig_from_name(const std::string& s, const std::string& ctx) {
  if (s == "none") return symfun::Trig::none;
  if (s == "sin") return symfun::Trig::sine;
  if (s == "cos") return symfun::Trig::cosine;
  throw SpecError("config error at " + ctx + ": trig must be none|sin|cos");
}

double need_number(const json& j, const std::string& key,
                   const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw SpecError("config error at " + ctx + "." + key +
                    ": required number missing");
  }
  return j[key].get<double>();
}

DistSpec dist_from_json_obj(const json& j, const std::string& ctx) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw SpecError("config error at " + ctx +
                    ": spec must be an object with a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "exponential") {
    return DistSpec::exponential(need_number(j, "rate", ctx));
  }
  if (kind == "deterministic") {
    return DistSpec::deterministic(need_number(j, "value", ctx));
  }
  if (kind == "uniform") {
    return DistSpec::uniform(need_number(j, "lo", ctx),
                             need_number(j, "hi", ctx));
  }
  if (kind == "rational_lt") {
    if (!j.contains("numer") || !j.contains("denom") ||
        !j["numer"].is_array() || !j["denom"].is_array()) {
      throw SpecError("config error at " + ctx +
                      ": rational_lt needs numer/denom arrays");
    }
    std::vector<double> numer, denom;
    for (const auto& v : j["numer"]) numer.push_back(v.get<double>());
    for (const auto& v : j["denom"]) denom.push_back(v.get<double>());
    return DistSpec::rational_lt(numer, denom);
  }
  if (kind == "exp_poly_trig_tail") {
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
      throw SpecError("config error at " + ctx +
                      ": exp_poly_trig_tail needs a nonempty terms array");
    }
    std::vector<symfun::Term> terms;
    int idx = 0;
    for (const auto& t : j["terms"]) {
      const std::string tctx = ctx + ".terms[" + std::to_string(idx++) + "]";
      symfun::Term term;
      term.coeff = need_number(t, "coeff", tctx);
      term.power = t.contains("power") ? t["power"].get<int>() : 0;
      term.rate = need_number(t, "rate", tctx);
      term.trig = t.contains("trig")
                      ? trig_from_name(t["trig"].get<std::string>(), tctx)
                      : symfun::Trig::none;
      term.freq = t.contains("freq") ? t["freq"].get<double>() : 0.0;
      terms.push_back(term);
    }
    return DistSpec::exp_poly_trig_tail(symfun::Fun(std::move(terms)));
  }
  if (kind == "weibull_tail") {
    if (!j.contains("p") || !j["p"].is_number_integer()) {
      throw SpecError("config error at " + ctx +
                      ": weibull_tail needs integer p");
    }
    return DistSpec::weibull_tail(j["p"].get<int>());
  }
  throw SpecError("config error at " + ctx + ": unknown kind '" + kind + "'");
}

json dist_to_json_obj(const DistSpec& d) {
  json j;
  switch (d.kind()) {
    case Kind::exponential:
      j["kind"] = "exponential";
      j["rate"] = d.rate();
      break;
    case Kind::deterministic:
      j["kind"] = "deterministic";
      j["value"] = d.value();
      break;
    case Kind::uniform:
      j["kind"] = "uniform";
      j["lo"] = d.lo();
      j["hi"] = d.hi();
      break;
    case Kind::rational_lt:
      j["kind"] = "rational_lt";
      j["numer"] = d.numer();
      j["denom"] = d.denom();
      break;
    case Kind::exp_poly_trig_tail: {
      j["kind"] = "exp_poly_trig_tail";
      json terms = json::array();
      for (const auto& t : d.tail_fun()->terms()) {
        json tj;
        tj["coeff"] = t.coeff;
        tj["power"] = t.power;
        tj["rate"] = t.rate;
        tj["trig"] = trig_name(t.trig);
        tj["freq"] = t.freq;
        terms.push_back(tj);
      }
      j["terms"] = terms;
      break;
    }
    case Kind::weibull_tail:
      j["kind"] = "weibull_tail";
      j["p"] = d.weibull_p();
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string format_sig17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void atomic_write(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string curve_csv(const std::vector<double>& xs,
                      const std::vector<double>& ys, const char* header) {
  std::string out = header;
  out += '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += format_sig17(xs[i]);
    out += ',';
    out += format_sig17(ys[i]);
    out += '\n';
  }
  return out;
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string("non-finite value in report: ") + what);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string command;
  DistSpec a;
  DistSpec b;
  std::uint64_t seed = 0x5eed;
  std::uint64_t n_steps = 1000000;
  std::uint64_t replications = 1;
  std::optional<std::uint64_t> burn_in;  // absent: 1% of n_steps, >= 1000
  double w1 = 0.0;
  double ecdf_bin = 1e-3;
  bool allow_zero_negative_part = false;
  double grid_h = 1e-3;
  double grid_x_max = 0.0;  // 0: automatic truncation point
  double tol = 1e-8;
  std::optional<std::vector<double>> probes;
  std::optional<double> kappa;
  double band = 0.05;
  double weibull_band = 0.10;
  double agreement_tol = 0.01;
  double curve_x_max = 0.0;  // 0: automatic
  std::size_t curve_points = 501;
  std::string out_dir = ".";
};

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw SpecError("config error: top level must be an object");
  if (!j.contains("command") || !j["command"].is_string()) {
    throw SpecError("config error at command: required string missing");
  }
  RunConfig cfg;
  cfg.command = j["command"].get<std::string>();
  static const char* kCommands[] = {"simulate", "iterate", "solve", "tail",
                                    "compare"};
  bool known = false;
  for (const char* c : kCommands) known = known || cfg.command == c;
  if (!known) {
    throw SpecError("config error at command: '" + cfg.command +
                    "' is not one of simulate|iterate|solve|tail|compare");
  }
  if (!j.contains("a") || !j.contains("b")) {
    throw SpecError("config error: both 'a' and 'b' specs are required");
  }
  cfg.a = dist_from_json_obj(j["a"], "a");
  cfg.b = dist_from_json_obj(j["b"], "b");
  auto get_u64 = [&](const char* key, std::uint64_t dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer()) {
      throw SpecError(std::string("config error at ") + key +
                      ": must be a nonnegative integer");
    }
    return j[key].get<std::uint64_t>();
  };
  auto get_num = [&](const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) {
      throw SpecError(std::string("config error at ") + key +
                      ": must be a number");
    }
    return j[key].get<double>();
  };
  cfg.seed = get_u64("seed", cfg.seed);
  cfg.n_steps = get_u64("n_steps", cfg.n_steps);
  cfg.replications = get_u64("replications", cfg.replications);
  if (j.contains("burn_in")) cfg.burn_in = get_u64("burn_in", 0);
  cfg.w1 = get_num("w1", cfg.w1);
  cfg.ecdf_bin = get_num("ecdf_bin", cfg.ecdf_bin);
  if (j.contains("allow_zero_negative_part")) {
    cfg.allow_zero_negative_part = j["allow_zero_negative_part"].get<bool>();
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    cfg.grid_h = g.contains("h") ? g["h"].get<double>() : 1e-3;
    cfg.grid_x_max = g.contains("x_max") ? g["x_max"].get<double>() : 0.0;
  }
  cfg.tol = get_num("tol", cfg.tol);
  if (j.contains("probes")) {
    if (!j["probes"].is_array()) {
      throw SpecError("config error at probes: must be an array of numbers");
    }
    std::vector<double> p;
    for (const auto& v : j["probes"]) p.push_back(v.get<double>());
    cfg.probes = std::move(p);
  }
  if (j.contains("kappa")) cfg.kappa = get_num("kappa", 0.0);
  cfg.band = get_num("band", cfg.band);
  cfg.weibull_band = get_num("weibull_band", cfg.weibull_band);
  cfg.agreement_tol = get_num("agreement_tol", cfg.agreement_tol);
  cfg.curve_x_max = get_num("curve_x_max", cfg.curve_x_max);
  cfg.curve_points = static_cast<std::size_t>(get_u64("curve_points", 501));
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

struct CheckRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

json summary_to_json(const sim::EmpiricalSummary& s) {
  json e;
  e["pi0_hat"] = finite_or_throw(s.pi0_hat, "pi0_hat");
  e["pi0_se"] = s.pi0_se;
  e["mean_w"] = finite_or_throw(s.mean_w, "mean_w");
  e["mean_w_se"] = finite_or_throw(s.mean_w_se, "mean_w_se");
  e["samples"] = s.samples;
  e["replications"] = s.n_replications;
  e["complete_cycles"] = s.cycle_lengths.size();
  e["ecdf_bin"] = s.bin_width;
  return e;
}

json tail_report_to_json(const tails::TailReport& r) {
  json t;
  t["regime"] = r.regime.kind == tails::TailRegime::Kind::regularly_varying
                    ? "regularly_varying"
                    : "rapidly_varying";
  if (r.regime.kind == tails::TailRegime::Kind::regularly_varying) {
    t["kappa"] = r.regime.kappa;
  }
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"x", finite_or_throw(row.x, "probe x")},
                    {"ratio", finite_or_throw(row.ratio, "probe ratio")}});
  }
  t["rows"] = rows;
  t["band"] = r.band;
  if (r.lemma_ratio != 0.0) t["lemma_ratio"] = r.lemma_ratio;
  t["pass"] = r.pass;
  t["note"] = r.note;
  return t;
}

// ---------------------------------------------------------------------------
// Engines

fpsolve::Grid make_grid(const RunConfig& cfg) {
  const double x_max = cfg.grid_x_max > 0.0
                           ? cfg.grid_x_max
                           : fpsolve::default_x_max(cfg.a, cfg.b);
  return fpsolve::Grid::with_spacing(x_max, cfg.grid_h);
}

sim::SimConfig make_sim_config(const RunConfig& cfg) {
  sim::SimConfig sc;
  sc.a = cfg.a;
  sc.b = cfg.b;
  sc.n_steps = cfg.n_steps;
  sc.n_replications = cfg.replications;
  sc.w1 = cfg.w1;
  sc.burn_in = cfg.burn_in ? *cfg.burn_in : sim::default_burn_in(cfg.n_steps);
  sc.seed = cfg.seed;
  sc.ecdf_bin = cfg.ecdf_bin;
  sc.allow_zero_negative_part = cfg.allow_zero_negative_part;
  return sc;
}

struct Outputs {
  json report;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  std::vector<CheckRow> checks;
};

void run_simulate(const RunConfig& cfg, Outputs& out) {
  Timer timer;
  const sim::EmpiricalSummary s = sim::simulate(make_sim_config(cfg));
  json engine = summary_to_json(s);
  // Cycle-length bound against the geometric tail when defined.
  if (!s.cycle_lengths.empty()) {
    const double rho = dists::x_tail(cfg.a, cfg.b, 0.0);
    if (rho < 1.0) {
      const auto rep = sim::cycle_bound_check(s, rho);
      json rows = json::array();
      for (const auto& r : rep.rows) {
        rows.push_back({{"n", r.n},
                        {"p_hat", r.p_hat},
                        {"bound", r.bound},
                        {"se", r.se},
                        {"violated", r.violated}});
      }
      engine["cycle_bound"] = {{"p_x_pos", rho},
                               {"rows", rows},
                               {"any_violation", rep.any_violation}};
      out.checks.push_back({"cycle_bound", !rep.any_violation,
                            "empirical cycle tail under the geometric bound"});
    }
  }
  engine["elapsed_ms"] = timer.ms();
  out.report["engines"]["simulate"] = engine;
  out.files.emplace_back("ecdf.csv", curve_csv(s.xs, s.f, "x,F"));
}

fpsolve::SolveResult run_iterate_engine(const RunConfig& cfg,
                                        const fpsolve::Grid& grid) {
  const fpsolve::XRep xrep = fpsolve::build_x_rep(cfg.a, cfg.b, grid);
  const fpsolve::GridFun f0(grid, 1.0);
  return fpsolve::solve(xrep, f0, cfg.tol);
}

void run_iterate(const RunConfig& cfg, Outputs& out) {
  Timer timer;
  const fpsolve::Grid grid = make_grid(cfg);
  const fpsolve::XRep xrep = fpsolve::build_x_rep(cfg.a, cfg.b, grid);
  const fpsolve::GridFun f0(grid, 1.0);
  const fpsolve::SolveResult res = fpsolve::solve(xrep, f0, cfg.tol);
  const double residual = fpsolve::sup_dist(fpsolve::map_T(res.f, xrep), res.f);
  json engine;
  engine["rho"] = res.rho;
  engine["iterations"] = res.iterations;
  engine["first_step"] = res.first_step;
  engine["last_diff"] = res.last_diff;
  engine["a_priori_error_bound"] = res.error_bound;
  engine["fixed_point_residual"] = residual;
  engine["grid"] = {{"x_max", grid.x_max}, {"n_points", grid.n_points},
                    {"h", grid.h()}};
  json log = json::array();
  for (double d : res.diff_log) log.push_back(d);
  engine["diff_log"] = log;
  engine["elapsed_ms"] = timer.ms();
  out.report["engines"]["iterate"] = engine;
  out.checks.push_back({"fixed_point_residual", residual <= 2.0 * cfg.tol,
                        "||T F* - F*|| <= 2 tol"});
  std::vector<double> xs(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) xs[i] = grid.node(i);
  out.files.emplace_back("fw_curve.csv", curve_csv(xs, res.f.v, "x,F"));
}

void run_solve(const RunConfig& cfg, Outputs& out) {
  Timer timer;
  const theorem::WaitingTimeSolution sol =
      theorem::solve_waiting_time(cfg.a, cfg.b);
  json engine;
  engine["mu"] = sol.sigma.mu;
  engine["n_constants"] = sol.sigma.n;
  engine["pi0"] = finite_or_throw(sol.solution.pi0, "pi0");
  engine["c"] = sol.solution.c;
  engine["rank"] = sol.solution.rank;
  engine["residual_norm"] = sol.solution.residual_norm;
  engine["condition"] = sol.solution.condition;
  const double mass = sol.w.pi0() + integral_0_inf(sol.w.density());
  engine["total_mass"] = mass;
  engine["elapsed_ms"] = timer.ms();
  out.report["engines"]["solve"] = engine;
  out.checks.push_back({"pi0_in_range",
                        sol.solution.pi0 >= 0.0 && sol.solution.pi0 <= 1.0,
                        "0 <= pi0 <= 1"});
  out.checks.push_back(
      {"cdf0_matches_pi0",
       std::abs(sol.w.cdf(0.0) - sol.solution.pi0) <= 1e-10,
       "distribution at 0 reproduces the atom"});
  out.checks.push_back({"total_mass", std::abs(mass - 1.0) <= 1e-10,
                        "P[W=0] + P[W>0] = 1"});
  const double x_max =
      cfg.curve_x_max > 0.0 ? cfg.curve_x_max
                            : fpsolve::default_x_max(cfg.a, cfg.b);
  std::vector<double> xs(cfg.curve_points), fw(cfg.curve_points);
  for (std::size_t i = 0; i < cfg.curve_points; ++i) {
    xs[i] = x_max * static_cast<double>(i) /
            static_cast<double>(cfg.curve_points - 1);
    fw[i] = sol.w.cdf(xs[i]);
  }
  out.files.emplace_back("fw_curve.csv", curve_csv(xs, fw, "x,F"));
}

void run_tail(const RunConfig& cfg, Outputs& out) {
  Timer timer;
  const tails::TailRegime regime = tails::classify(cfg.b);
  const std::vector<double> probes =
      cfg.probes ? *cfg.probes : tails::default_probes(cfg.a, cfg.b);
  tails::TailReport report;
  json engine;
  if (regime.kind == tails::TailRegime::Kind::regularly_varying) {
    const double kappa = cfg.kappa ? *cfg.kappa : regime.kappa;
    if (cfg.a.kind() == Kind::exponential && cfg.b.tail_fun()) {
      const theorem::WaitingTimeSolution sol =
          theorem::solve_waiting_time(cfg.a, cfg.b);
      report = tails::regvar_check(sol.w, cfg.a, cfg.b, kappa, probes,
                                   cfg.band);
      engine["route"] = "closed_form";
      engine["transform_at_kappa"] = sol.w.lt(kappa);
    } else {
      const sim::EmpiricalSummary s = sim::simulate(make_sim_config(cfg));
      report = tails::regvar_check(s, cfg.a, cfg.b, kappa, probes, cfg.band);
      engine["route"] = "simulation";
    }
    engine["breiman_factor"] = tails::breiman_factor(cfg.a, kappa);
  } else {
    // Rapidly varying: converge the fixed point, then probe its tail.
    const fpsolve::Grid grid = make_grid(cfg);
    const fpsolve::SolveResult res = run_iterate_engine(cfg, grid);
    report = tails::rapidvar_check(res.f, cfg.a, cfg.b, probes, cfg.band);
    engine["route"] = "fixed_point";
    if (cfg.a.kind() == Kind::exponential) {
      const tails::TailReport wx = tails::weibull_x_tail_check(
          cfg.a.rate(), cfg.b.weibull_p(), probes, cfg.weibull_band);
      engine["weibull_x_tail"] = tail_report_to_json(wx);
      out.checks.push_back({"weibull_x_tail", wx.pass,
                            "increment tail matches the scaled Weibull law"});
    }
  }
  engine["report"] = tail_report_to_json(report);
  engine["elapsed_ms"] = timer.ms();
  out.report["engines"]["tail"] = engine;
  out.checks.push_back(
      {"tail_band", report.pass, "deepest probe within the stated band"});
  std::vector<double> xs, ratios;
  for (const auto& row : report.rows) {
    xs.push_back(row.x);
    ratios.push_back(row.ratio);
  }
  out.files.emplace_back("ratio_curve.csv", curve_csv(xs, ratios, "x,ratio"));
}

void run_compare(const RunConfig& cfg, Outputs& out) {
  Timer timer;
  struct Curve {
    std::string name;
    std::function<double(double)> cdf;
  };
  std::vector<Curve> curves;
  json notes = json::array();

  // Closed form, when the hypotheses admit it.
  std::optional<theorem::WaitingTimeSolution> closed;
  try {
    closed = theorem::solve_waiting_time(cfg.a, cfg.b);
    out.report["engines"]["solve"] = {{"pi0", closed->solution.pi0},
                                      {"c", closed->solution.c}};
    const theorem::ClosedFormW& w = closed->w;
    curves.push_back({"solve", [&w](double x) { return w.cdf(x); }});
  } catch (const SpecError& e) {
    notes.push_back(std::string("solve excluded: ") + e.what());
  }

  // Fixed-point iteration.
  std::optional<fpsolve::SolveResult> fp;
  fpsolve::Grid grid(1.0, 2);
  try {
    grid = make_grid(cfg);
    fp = run_iterate_engine(cfg, grid);
    out.report["engines"]["iterate"] = {{"rho", fp->rho},
                                        {"iterations", fp->iterations}};
    const fpsolve::GridFun& f = fp->f;
    curves.push_back({"iterate", [&f](double x) { return f.value(x); }});
  } catch (const StabilityError& e) {
    notes.push_back(std::string("iterate excluded: ") + e.what());
  }

  // Simulation.
  std::optional<sim::EmpiricalSummary> summary;
  try {
    summary = sim::simulate(make_sim_config(cfg));
    out.report["engines"]["simulate"] = summary_to_json(*summary);
    const sim::EmpiricalSummary& s = *summary;
    curves.push_back({"simulate", [&s](double x) { return s.at(x); }});
  } catch (const StabilityError& e) {
    notes.push_back(std::string("simulate excluded: ") + e.what());
  }

  if (curves.size() < 2) {
    throw SpecError("compare: fewer than two engines are applicable");
  }
  // Common evaluation grid for the sup-distance.
  const double x_max = grid.n_points > 2 ? grid.x_max
                                         : fpsolve::default_x_max(cfg.a, cfg.b);
  const std::size_t n_eval = 2001;
  json pairs = json::array();
  double max_dist = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < n_eval; ++k) {
        const double x = x_max * static_cast<double>(k) /
                         static_cast<double>(n_eval - 1);
        d = std::max(d, std::abs(curves[i].cdf(x) - curves[j].cdf(x)));
      }
      max_dist = std::max(max_dist, d);
      pairs.push_back({{"engines", curves[i].name + "-" + curves[j].name},
                       {"sup_dist", d},
                       {"threshold", cfg.agreement_tol},
                       {"pass", d <= cfg.agreement_tol}});
    }
  }
  out.report["cross_validation"] = {{"pairs", pairs},
                                    {"max_sup_dist", max_dist},
                                    {"notes", notes},
                                    {"elapsed_ms", timer.ms()}};
  out.checks.push_back({"engine_agreement", max_dist <= cfg.agreement_tol,
                        "pairwise sup-distances within tolerance"});

  // Reference curve: prefer the closed form, then the fixed point.
  std::vector<double> xs(1001), fw(1001);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xs[k] = x_max * static_cast<double>(k) / static_cast<double>(xs.size() - 1);
    fw[k] = curves.front().cdf(xs[k]);
  }
  out.files.emplace_back("fw_curve.csv", curve_csv(xs, fw, "x,F"));
  if (summary) {
    out.files.emplace_back("ecdf.csv", curve_csv(summary->xs, summary->f, "x,F"));
  }
}

}  // namespace

DistSpec dist_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("config error: ") + e.what());
  }
  return dist_from_json_obj(j, "spec");
}

std::string dist_to_json(const DistSpec& spec) {
  return dist_to_json_obj(spec).dump(2);
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Steady-state waiting times of the alternating-service "
               "recursion W' = max(0, B - A - W)"};
  app.name("lindley-alt");
  std::string command;
  std::string config_path;
  std::string out_dir_flag;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  bool quiet = false;
  app.add_option("command", command,
                 "simulate|iterate|solve|tail|compare (must match the config)")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration")
      ->required();
  app.add_option("--out", out_dir_flag, "output directory (default: config or .)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "seed override");
  app.add_flag("--quiet", quiet, "suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  seed_given = seed_opt->count() > 0;

  RunConfig cfg;
  json config_echo;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "lindley-alt: cannot open config: " << config_path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      config_echo = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      std::cerr << "lindley-alt: config parse error in " << config_path
                << ": " << e.what() << "\n";
      return 2;
    }
    cfg = parse_config(config_echo);
  } catch (const Error& e) {
    std::cerr << "lindley-alt: " << e.what() << "\n";
    return 2;
  }
  if (command != cfg.command) {
    std::cerr << "lindley-alt: command '" << command
              << "' does not match config command '" << cfg.command << "'\n";
    return 2;
  }
  if (seed_given) {
    cfg.seed = seed_flag;
    config_echo["seed"] = seed_flag;
  }
  if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;

  Outputs out;
  out.report["command"] = cfg.command;
  out.report["config"] = config_echo;
  Timer total;
  try {
    if (cfg.command == "simulate") {
      run_simulate(cfg, out);
    } else if (cfg.command == "iterate") {
      run_iterate(cfg, out);
    } else if (cfg.command == "solve") {
      run_solve(cfg, out);
    } else if (cfg.command == "tail") {
      run_tail(cfg, out);
    } else {
      run_compare(cfg, out);
    }
  } catch (const Error& e) {
    std::cerr << "lindley-alt: " << e.what() << "\n";
    return 3;
  }

  json checks = json::array();
  json failures = json::array();
  bool all_pass = true;
  for (const auto& c : out.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    if (!c.pass) {
      all_pass = false;
      failures.push_back(c.name);
    }
  }
  out.report["checks"] = checks;
  out.report["failures"] = failures;
  out.report["pass"] = all_pass;
  out.report["elapsed_ms"] = total.ms();

  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    for (const auto& [name, content] : out.files) {
      atomic_write(dir / name, content);
    }
    atomic_write(dir / "report.json", out.report.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "lindley-alt: output error: " << e.what() << "\n";
    return 3;
  }
  if (!quiet) {
    std::cout << "lindley-alt " << cfg.command << ": "
              << (all_pass ? "all checks passed" : "CHECK FAILURES") << " ("
              << out.checks.size() << " checks); report in " << cfg.out_dir
              << "/report.json\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace lindley::cli
