#include "larch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string_view>
#include <ostream>
#include <utility>

#include <CLI11.hpp>

#include "larch/asymptotics.hpp"
#include "larch/coeff_model.hpp"
#include "larch/csv.hpp"
#include "larch/diagnostics.hpp"
#include "larch/errors.hpp"
#include "larch/estimator.hpp"
#include "larch/likelihood.hpp"
#include "larch/montecarlo.hpp"
#include "larch/simulator.hpp"

namespace larch::cli {

namespace {

namespace fs = std::filesystem;
using csv::format;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  double d = 0.1;
  double c = 0.2;
  double a = 1.0;
  std::vector<double> eps{0.01};
  double beta = 0.799;
  std::vector<std::size_t> ns{1000};
  std::size_t burn_in = 10000;
  std::size_t trunc = 2000;
  std::uint64_t seed = 1;
  std::size_t replicates = 100;
  std::size_t trim = 10;
  unsigned threads = 1;
  std::string out = ".";
  int case_number = 0;
  std::string input;
  std::string family = "power";
  std::string variant = "trunc";
  std::size_t max_lag = 100;
  std::size_t fit_min = 5;
  std::size_t path_length = 500000;
  std::size_t grid_points = 91;
  bool levels = false;
  std::string free = "dca";
};

using Fields = std::vector<std::pair<std::string, std::string>>;

CoeffSpec coeff_spec(const Options& o) {
  CoeffSpec spec;
  spec.family = o.family == "farima" ? CoeffFamily::Farima0d0 : CoeffFamily::PowerLaw;
  return spec;
}

Theta theta(const Options& o) { return {o.d, o.c, o.a}; }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format(v[i]);
  return s;
}

Fields base_fields(const std::string& command, const Options& o) {
  std::string ns;
  for (std::size_t i = 0; i < o.ns.size(); ++i) ns += (i ? ";" : "") + std::to_string(o.ns[i]);
  return {{"command", command},         {"seed", std::to_string(o.seed)},
          {"d", format(o.d)},           {"c", format(o.c)},
          {"a", format(o.a)},           {"eps", join(o.eps)},
          {"beta", format(o.beta)},     {"n", ns},
          {"burn_in", std::to_string(o.burn_in)}, {"trunc", std::to_string(o.trunc)},
          {"family", o.family}};
}

fs::path output_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

SimConfig sim_config(const Options& o, std::size_t n) {
  SimConfig cfg;
  cfg.n = n;
  cfg.burn_in = o.burn_in;
  cfg.J = o.trunc;
  cfg.seed = o.seed;
  return cfg;
}

double single_eps(const Options& o) {
  if (o.eps.size() != 1) throw UsageError("--eps takes a single value for this command");
  return o.eps.front();
}

std::size_t single_n(const Options& o) {
  if (o.ns.size() != 1) throw UsageError("--n takes a single value for this command");
  return o.ns.front();
}

FreeMask free_mask(const Options& o) {
  FreeMask m{false, false, false};
  for (const char ch : o.free) {
    const auto pos = std::string_view("dca").find(ch);
    if (pos == std::string_view::npos) throw UsageError("--free takes letters from 'dca'");
    m[pos] = true;
  }
  if (!m[0] && !m[1] && !m[2]) throw UsageError("--free needs at least one parameter");
  return m;
}

/// Non-free coordinates are held at `at`.
std::array<std::optional<double>, 3> fixed_at(const FreeMask& m, const Theta& at) {
  std::array<std::optional<double>, 3> fixed{};
  const double values[] = {at.d, at.c, at.a};
  for (std::size_t i = 0; i < 3; ++i)
    if (!m[i]) fixed[i] = values[i];
  return fixed;
}

std::string yes_no(bool b) { return b ? "1" : "0"; }

std::string opt_format(const std::optional<double>& v) {
  return v ? format(*v) : std::string("nan");
}

void cmd_simulate(const Options& o, std::ostream& out) {
  const Sample s = simulate(coeff_spec(o), theta(o), sim_config(o, single_n(o)));
  const fs::path path = output_dir(o) / "simulate.csv";
  csv::Writer w(path);
  w.comment(base_fields("simulate", o));
  w.header({"t", "x", "sigma", "eps"});
  const auto x = s.window_x();
  const auto sigma = s.window_sigma();
  const auto eps = s.window_eps();
  for (std::size_t t = 0; t < s.n(); ++t)
    w.row({std::to_string(t + 1), format(x[t]), format(sigma[t]), format(eps[t])});
  out << "wrote " << path.string() << '\n';
}

void cmd_estimate(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw UsageError("estimate needs --input");
  const std::vector<double> x = csv::load_series(o.input);
  LossSpec lspec;
  lspec.variant = o.variant == "bar" ? LossVariant::Bar : LossVariant::Trunc;
  lspec.epsilon = single_eps(o);
  lspec.beta = o.beta;
  lspec.J = o.trunc;
  OptimOptions opts;
  opts.threads = o.threads;
  opts.fixed = fixed_at(free_mask(o), theta(o));
  const EstimationResult r = estimate(lspec, coeff_spec(o), x, ParamSpace{}, opts);

  const fs::path path = output_dir(o) / "estimate.csv";
  csv::Writer w(path);
  Fields f = base_fields("estimate", o);
  f.emplace_back("input", o.input);
  f.emplace_back("variant", o.variant);
  f.emplace_back("free", o.free);
  f.emplace_back("observations", std::to_string(x.size()));
  w.comment(f);
  w.header({"d_hat", "c_hat", "a_hat", "loss", "converged", "at_boundary"});
  w.row({format(r.theta_hat.d), format(r.theta_hat.c), format(r.theta_hat.a), format(r.loss_at_opt),
         yes_no(r.converged), yes_no(r.at_boundary)});
  out << "d_hat=" << format(r.theta_hat.d) << " c_hat=" << format(r.theta_hat.c)
      << " a_hat=" << format(r.theta_hat.a) << " loss=" << format(r.loss_at_opt)
      << (r.at_boundary ? " (at boundary)" : "") << '\n';
}

void cmd_mc(const Options& o, const CLI::App& app, std::ostream& out) {
  StudyConfig cfg;
  if (o.case_number != 0) cfg = case_preset(o.case_number);
  const auto given = [&](const char* name) { return app.count(name) > 0; };
  if (o.case_number == 0 || given("--d")) cfg.theta0.d = o.d;
  if (o.case_number == 0 || given("--c")) cfg.theta0.c = o.c;
  if (o.case_number == 0 || given("--a")) cfg.theta0.a = o.a;
  if (o.case_number == 0 || given("--eps")) cfg.epsilon = single_eps(o);
  if (o.case_number == 0 || given("--beta")) cfg.beta = o.beta;
  if (o.case_number == 0 || given("--n")) cfg.ns = o.ns;
  if (o.case_number == 0 || given("--replicates")) cfg.replicates = o.replicates;
  cfg.base_seed = o.seed;
  cfg.trim = o.trim;
  cfg.burn_in = o.burn_in;
  cfg.J = o.trunc;
  cfg.spec = coeff_spec(o);
  cfg.threads = o.threads;
  if (o.case_number == 0 || given("--free")) cfg.free = free_mask(o);
  const McReport rep = run_study(cfg);

  const fs::path dir = output_dir(o);
  Fields f = base_fields("mc", o);
  f.emplace_back("case", cfg.label);
  f.emplace_back("theta0", format(cfg.theta0.d) + ";" + format(cfg.theta0.c) + ";" + format(cfg.theta0.a));
  f.emplace_back("epsilon", format(cfg.epsilon));
  f.emplace_back("beta_used", format(cfg.beta));
  f.emplace_back("replicates", std::to_string(cfg.replicates));
  f.emplace_back("trim", std::to_string(cfg.trim));
  f.emplace_back("free", std::string(cfg.free[0] ? "d" : "") + (cfg.free[1] ? "c" : "") + (cfg.free[2] ? "a" : ""));

  {
    csv::Writer w(dir / "mc_rows.csv");
    w.comment(f);
    w.header({"case", "n", "replicate", "seed", "d_hat", "c_hat", "a_hat", "loss", "converged", "at_boundary"});
    for (const auto& r : rep.rows)
      w.row({rep.label, std::to_string(r.n), std::to_string(r.replicate), std::to_string(r.seed),
             format(r.theta_hat.d), format(r.theta_hat.c), format(r.theta_hat.a), format(r.loss),
             yes_no(r.converged), yes_no(r.at_boundary)});
  }
  {
    csv::Writer w(dir / "mc_summary.csv");
    w.comment(f);
    w.header({"case", "n", "trimmed", "stat", "value"});
    for (const auto& s : rep.summaries) {
      const auto emit = [&](const SummaryStats& st, bool trimmed) {
        const std::string n = std::to_string(s.n);
        const std::string t = yes_no(trimmed);
        w.row({rep.label, n, t, "count", std::to_string(st.count)});
        w.row({rep.label, n, t, "mean", format(st.mean)});
        w.row({rep.label, n, t, "median", format(st.median)});
        w.row({rep.label, n, t, "s", format(st.s)});
        w.row({rep.label, n, t, "s_tilde", format(st.s_tilde)});
        w.row({rep.label, n, t, "scaled_s", format(st.scaled_s)});
        w.row({rep.label, n, t, "scaled_s_tilde", format(st.scaled_s_tilde)});
        w.row({rep.label, n, t, "skewness", opt_format(st.skewness)});
        w.row({rep.label, n, t, "q_skewness", opt_format(st.q_skewness)});
      };
      emit(s.d_hat.all, false);
      emit(s.d_hat.trimmed, true);
      w.row({rep.label, std::to_string(s.n), "0", "boundary_hits", std::to_string(s.boundary_hits)});
      w.row({rep.label, std::to_string(s.n), "0", "non_converged", std::to_string(s.non_converged)});
    }
  }
  for (const std::size_t n : cfg.ns) {
    std::vector<double> d_hat;
    for (const auto& r : rep.rows)
      if (r.n == n && std::isfinite(r.theta_hat.d)) d_hat.push_back(r.theta_hat.d);
    if (d_hat.size() < 2) continue;
    csv::Writer w(dir / ("mc_qq_n" + std::to_string(n) + ".csv"));
    Fields qf = f;
    qf.emplace_back("qq_n", std::to_string(n));
    w.comment(qf);
    w.header({"q_theoretical", "value"});
    for (const auto& [q, v] : normal_plot_data(d_hat)) w.row({format(q), format(v)});
  }
  for (const auto& s : rep.summaries)
    out << rep.label << " n=" << s.n << " median=" << format(s.d_hat.trimmed.median)
        << " scaled_s_tilde=" << format(s.d_hat.trimmed.scaled_s_tilde) << " (trimmed)"
        << " boundary_hits=" << s.boundary_hits << '\n';
  out << "wrote " << (dir / "mc_rows.csv").string() << ", " << (dir / "mc_summary.csv").string() << '\n';
}

void cmd_landscape(const Options& o, std::ostream& out) {
  const std::size_t n = single_n(o);
  const Sample s = simulate(coeff_spec(o), theta(o), sim_config(o, n));
  if (o.grid_points < 2) throw UsageError("--grid-points must be at least 2");
  const ParamSpace space;
  std::vector<double> d_grid(o.grid_points);
  for (std::size_t i = 0; i < o.grid_points; ++i)
    d_grid[i] = space.d_u * static_cast<double>(i) / static_cast<double>(o.grid_points - 1);
  LossSpec tmpl;
  tmpl.variant = o.variant == "bar" ? LossVariant::Bar : LossVariant::Trunc;
  tmpl.beta = o.beta;
  tmpl.J = o.trunc;
  const auto rows = landscape(tmpl, coeff_spec(o), o.c, o.a, s.window_x(), d_grid, o.eps);

  const fs::path path = output_dir(o) / "landscape.csv";
  csv::Writer w(path);
  Fields f = base_fields("landscape", o);
  f.emplace_back("variant", o.variant);
  w.comment(f);
  w.header({"epsilon", "d", "loss"});
  for (const auto& r : rows) w.row({format(r.epsilon), format(r.d), format(r.loss)});
  for (const double e : o.eps) {
    std::vector<double> curve;
    for (const auto& r : rows)
      if (r.epsilon == e) curve.push_back(r.loss);
    out << "eps=" << format(e) << " local_minima=" << count_local_minima(curve) << '\n';
  }
  out << "wrote " << path.string() << '\n';
}

void cmd_acf(const Options& o, std::ostream& out) {
  std::vector<double> x;
  if (!o.input.empty()) {
    x = csv::load_series(o.input);
  } else {
    const Sample s = simulate(coeff_spec(o), theta(o), sim_config(o, single_n(o)));
    x.assign(s.window_x().begin(), s.window_x().end());
  }
  const auto rho = acf(x, o.max_lag, !o.levels);
  if (!rho) throw DomainError("autocorrelations undefined: the series has zero variance");

  std::vector<double> k(o.max_lag), v(o.max_lag);
  for (std::size_t i = 1; i <= o.max_lag; ++i) {
    k[i - 1] = static_cast<double>(i);
    v[i - 1] = (*rho)[i];
  }
  const fs::path path = output_dir(o) / "acf.csv";
  csv::Writer w(path);
  Fields f = base_fields("acf", o);
  f.emplace_back("series", o.levels ? "x" : "x^2");
  if (!o.input.empty()) f.emplace_back("input", o.input);
  w.comment(f);
  w.header({"k", "value", "log_k", "log_value"});
  w.row({"0", format((*rho)[0]), "nan", format(std::log((*rho)[0]))});
  for (std::size_t i = 0; i < k.size(); ++i)
    w.row({format(k[i]), format(v[i]), format(std::log(k[i])), v[i] > 0.0 ? format(std::log(v[i])) : "nan"});
  try {
    const DecayFit fit = fit_decay(k, v, static_cast<double>(o.fit_min), static_cast<double>(o.max_lag));
    w.comment(Fields{{"fit_slope", format(fit.slope)},
                     {"fit_intercept", format(fit.intercept)},
                     {"fit_r2", format(fit.r2)},
                     {"fit_k_min", format(fit.k_min)},
                     {"fit_k_max", format(fit.k_max)},
                     {"fit_points", std::to_string(fit.points)},
                     {"implied_d", format((fit.slope + 1.0) / 2.0)}});
    out << "decay slope=" << format(fit.slope) << " implied d=" << format((fit.slope + 1.0) / 2.0) << '\n';
  } catch (const InsufficientDataError& e) {
    w.comment(std::string("fit unavailable: ") + e.what());
  }
  out << "wrote " << path.string() << '\n';
}

void cmd_asymcov(const Options& o, std::ostream& out) {
  PathAverageSettings mc;
  mc.path_length = o.path_length;
  mc.burn_in = o.burn_in;
  mc.J = o.trunc;
  mc.seed = o.seed;
  const SandwichResult r = sandwich(coeff_spec(o), theta(o), single_eps(o), gaussian_moments(4), mc, free_mask(o));

  const fs::path path = output_dir(o) / "asymcov.csv";
  csv::Writer w(path);
  Fields f = base_fields("asymcov", o);
  f.emplace_back("path_length", std::to_string(o.path_length));
  f.emplace_back("free", o.free);
  w.comment(f);
  w.header({"entry_i", "entry_j", "G", "H", "cov"});
  static constexpr const char* names[] = {"d", "c", "a"};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w.row({names[i], names[j], format(r.G(i, j)), format(r.H(i, j)), format(r.cov(i, j))});
  w.comment(Fields{{"sd_d", format(r.sd[0])}, {"sd_c", format(r.sd[1])}, {"sd_a", format(r.sd[2])},
                   {"h_condition", format(r.h_condition)}});
  out << "sd_d=" << format(r.sd[0]) << " sd_c=" << format(r.sd[1]) << " sd_a=" << format(r.sd[2]) << '\n';
  out << "wrote " << path.string() << '\n';
}

void cmd_check_moments(const Options& o, std::ostream& out) {
  const std::vector<int> orders{2, 3, 4, 5, 6, 7, 8};
  const MomentReport rep = check_moment_conditions(coeff_spec(o), theta(o), gaussian_moments(8), orders);
  const auto line = [&](const std::string& name, const ConditionValue& v) {
    out << name << ": lhs=" << format(v.lhs) << " (needs < 1) " << (v.holds ? "holds" : "fails") << '\n';
  };
  out << "# theta=(" << format(o.d) << ", " << format(o.c) << ", " << format(o.a) << ") gaussian innovations\n";
  line("M3", rep.m3);
  for (const auto& [p, v] : rep.mp_prime) line("M'_" + std::to_string(p), v);
  for (const auto& [p, v] : rep.mp_dblprime) line("M''_" + std::to_string(p), v);
}

void cmd_rates(const Options& o, std::ostream& out) {
  ScoreGapSettings gs;
  gs.replicates = o.replicates;
  gs.base_seed = o.seed;
  gs.burn_in = o.burn_in;
  gs.J = o.trunc;
  gs.threads = o.threads;
  const double eps = single_eps(o);

  const fs::path path = output_dir(o) / "rates.csv";
  csv::Writer w(path);
  Fields f = base_fields("rates", o);
  f.emplace_back("replicates", std::to_string(o.replicates));
  w.comment(f);
  w.header({"n", "window", "score_gap_order", "rate_exponent", "clt_regime", "mean_abs_gap", "gap_se",
            "mean_norm_gap"});
  for (const std::size_t n : o.ns) {
    // the full-history side must reach before the window, so J and the burn-in grow with n
    ScoreGapSettings at_n = gs;
    at_n.J = std::max(gs.J, n);
    at_n.burn_in = std::max(gs.burn_in, at_n.J);
    const ScoreGap g = score_gap(coeff_spec(o), theta(o), eps, n, o.beta, at_n);
    w.row({std::to_string(n), std::to_string(g.window), format(g.predicted.score_gap_order),
           format(g.predicted.rate_exponent), yes_no(g.predicted.clt_regime), format(g.mean_abs),
           format(g.std_error), format(g.mean_norm)});
    out << "n=" << n << " gap=" << format(g.mean_abs) << " predicted_order=" << format(g.predicted.score_gap_order)
        << " rate_exponent=" << format(g.predicted.rate_exponent)
        << (g.predicted.clt_regime ? " (CLT regime)" : " (beyond the CLT border)") << '\n';
  }
  out << "wrote " << path.string() << '\n';
}

void write_sidecar(const CLI::App& app, const Options& o, const std::string& command) {
  const fs::path path = output_dir(o) / (command + ".config");
  std::ofstream side(path);
  if (!side) throw Error("cannot write " + path.string());
  side << "# resolved configuration for '" << command << "'\n" << app.config_to_str(true, false);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Simulation and pseudo-maximum likelihood estimation for long-memory LARCH processes", "larch"};
  app.set_config("--config", "", "read `key = value` defaults from a file (flags override)");
  app.require_subcommand(1);

  app.add_option("--d", o.d, "memory parameter d")->capture_default_str();
  app.add_option("--c", o.c, "coefficient scale c")->capture_default_str();
  app.add_option("--a", o.a, "intercept a")->capture_default_str();
  app.add_option("--eps", o.eps, "regularization epsilon (comma list for landscape)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--beta", o.beta, "truncation exponent beta")->capture_default_str();
  app.add_option("--n", o.ns, "sample size (comma list for mc and rates)")->delimiter(',')->capture_default_str();
  app.add_option("--burn-in", o.burn_in, "discarded pre-sample length")->capture_default_str();
  app.add_option("--trunc", o.trunc, "lag truncation J")->capture_default_str();
  app.add_option("--seed", o.seed, "base random seed")->capture_default_str();
  app.add_option("--replicates", o.replicates, "Monte Carlo replicates")->capture_default_str();
  app.add_option("--trim", o.trim, "smallest d-hat values dropped in trimmed summaries")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--case", o.case_number, "simulation design preset (1 or 2)")->check(CLI::IsMember({0, 1, 2}));
  app.add_option("--input", o.input, "series file (one column, or CSV with column x)");
  app.add_option("--family", o.family, "coefficient family")
      ->check(CLI::IsMember({"power", "farima"}))
      ->capture_default_str();
  app.add_option("--variant", o.variant, "loss for estimate/landscape")
      ->check(CLI::IsMember({"trunc", "bar"}))
      ->capture_default_str();
  app.add_option("--max-lag", o.max_lag, "largest autocorrelation lag")->capture_default_str();
  app.add_option("--fit-min", o.fit_min, "smallest lag in the decay fit")->capture_default_str();
  app.add_option("--path-length", o.path_length, "path length for ergodic averages")->capture_default_str();
  app.add_option("--grid-points", o.grid_points, "number of d values in the landscape")->capture_default_str();
  app.add_option("--free", o.free, "parameters estimated (others held at --d/--c/--a)")->capture_default_str();
  app.add_flag("--levels", o.levels, "autocorrelations of x instead of x^2");

  const std::map<std::string, std::string> commands{
      {"simulate", "simulate one path (t,x,sigma,eps)"},
      {"estimate", "estimate theta from --input"},
      {"mc", "Monte Carlo replication study"},
      {"landscape", "loss as a function of d for several epsilon"},
      {"acf", "sample autocorrelations of x^2 with a log-log decay fit"},
      {"asymcov", "sandwich covariance by ergodic averaging"},
      {"check-moments", "evaluate the sufficient moment conditions"},
      {"rates", "predicted rates and Monte Carlo score gap"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    if (command == "simulate") cmd_simulate(o, out);
    else if (command == "estimate") cmd_estimate(o, out);
    else if (command == "mc") cmd_mc(o, app, out);
    else if (command == "landscape") cmd_landscape(o, out);
    else if (command == "acf") cmd_acf(o, out);
    else if (command == "asymcov") cmd_asymcov(o, out);
    else if (command == "check-moments") cmd_check_moments(o, out);
    else if (command == "rates") cmd_rates(o, out);
    if (command != "check-moments") write_sidecar(app, o, command);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace larch::cli
