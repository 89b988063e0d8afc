// duality_lab: run identity suites, sweeps, simulations and tables.

#include "run_config.hpp"

#include <duality_lab/registry.hpp>
#include <duality_lab/simulate.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace duality_lab;
using cli::RunConfig;
using nlohmann::json;

namespace {

// Raw flag values; only flags given on the command line override the config file.
struct Flags {
  std::string config, save_config;
  std::vector<std::string> suites;
  bool all = false;
  std::string q, k, lambda, rho, v, sigma, initial, n, x;
  int sites = 0, max_n = 0, max_index = 0, n_trunc = 0, jobs = 0;
  double tol = 0, horizon = 0, dt = 0;
  long samples = 0;
  std::uint64_t seed = 0;
  std::string output, format, precision, process, family;
  bool richardson = false;
};

struct Options {
  std::map<std::string, CLI::Option*> by_name;
  bool given(const std::string& name) const {
    const auto it = by_name.find(name);
    return it != by_name.end() && it->second->count() > 0;
  }
};

int default_jobs() {
  if (const char* s = std::getenv("DUALITY_LAB_JOBS")) {
    const int j = std::atoi(s);
    if (j > 0) return j;
  }
  return 1;
}

void add_grid_flags(CLI::App* app, Flags& f, Options& o) {
  o.by_name["q"] = app->add_option("--q", f.q, "q value(s), comma separated");
  o.by_name["k"] = app->add_option("--k", f.k, "k vector(s): 1,1 or 1,1;0.5,2");
  o.by_name["M"] = app->add_option("--M", f.sites, "number of sites (repeats a single k)");
  o.by_name["lambda"] = app->add_option("--lambda", f.lambda, "left boundary value(s)");
  o.by_name["rho"] = app->add_option("--rho", f.rho, "right boundary value(s)");
  o.by_name["v"] = app->add_option("--v", f.v, "v value(s)");
  o.by_name["sigma"] = app->add_option("--sigma", f.sigma, "sigma value(s)");
  o.by_name["precision"] = app->add_option("--precision", f.precision, "high | standard");
}

void add_common_flags(CLI::App* app, Flags& f, Options& o) {
  o.by_name["config"] = app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--save-config", f.save_config, "write the effective config to this file");
  o.by_name["seed"] = app->add_option("--seed", f.seed, "random seed");
  o.by_name["output"] = app->add_option("--output,-o", f.output, "output file");
  o.by_name["format"] = app->add_option("--format", f.format, "json | csv");
  o.by_name["jobs"] = app->add_option("--jobs,-j", f.jobs, "worker threads (default: $DUALITY_LAB_JOBS or 1)");
}

void add_suite_flags(CLI::App* app, Flags& f, Options& o) {
  o.by_name["suite"] = app->add_option("--suite,-s", f.suites, "suite name(s)")->delimiter(',');
  o.by_name["max-n"] = app->add_option("--max-n", f.max_n, "particle bound of the state sets");
  o.by_name["max-index"] = app->add_option("--max-index", f.max_index, "index bound for orthogonality");
  o.by_name["n-trunc"] = app->add_option("--n-trunc", f.n_trunc, "truncation of the algebra representations");
  o.by_name["tol"] = app->add_option("--tol", f.tol, "tolerance override for the selected suites");
  o.by_name["richardson"] = app->add_flag("--richardson", f.richardson, "Richardson-extrapolated finite differences");
}

RunConfig build_config(const std::string& command, const Flags& f, const Options& o) {
  RunConfig c;
  if (o.given("config")) {
    std::ifstream is(f.config);
    if (!is) throw Error(ErrorKind::config, "cannot read config " + f.config);
    try {
      c = json::parse(is).get<RunConfig>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::config, std::string("bad config: ") + e.what());
    }
  }
  c.command = command;
  if (o.given("jobs")) c.jobs = f.jobs;
  else if (!o.given("config")) c.jobs = default_jobs();
  if (o.given("suite")) c.suites = f.suites;
  if (f.all) {
    c.suites.clear();
    for (const auto& s : suites()) c.suites.push_back(s.name);
  }
  if (o.given("q")) c.q = cli::parse_list(f.q);
  if (o.given("k")) c.k = cli::parse_k_list(f.k);
  if (o.given("M")) c.sites = f.sites;
  if (o.given("lambda")) c.lambda = cli::parse_list(f.lambda);
  if (o.given("rho")) c.rho = cli::parse_list(f.rho);
  if (o.given("v")) c.v = cli::parse_list(f.v);
  if (o.given("sigma")) c.sigma = cli::parse_list(f.sigma);
  if (o.given("max-n")) c.max_n = f.max_n;
  if (o.given("max-index")) c.max_index = f.max_index;
  if (o.given("n-trunc")) c.n_trunc = f.n_trunc;
  if (o.given("tol")) c.tolerance = f.tol;
  if (o.given("seed")) c.seed = f.seed;
  if (o.given("output")) c.output = f.output;
  if (o.given("format")) c.format = f.format;
  if (o.given("precision")) c.precision = f.precision;
  if (o.given("richardson")) c.richardson = f.richardson;
  if (o.given("process")) c.process = f.process;
  if (o.given("initial")) c.initial = cli::parse_list(f.initial);
  if (o.given("horizon")) c.horizon = f.horizon;
  if (o.given("dt")) c.dt = f.dt;
  if (o.given("samples")) c.samples = f.samples;
  if (o.given("family")) c.family = f.family;
  if (o.given("n")) c.n_values = cli::parse_range(f.n);
  if (o.given("x")) c.x_values = cli::parse_range(f.x);
  return c;
}

void emit(const RunConfig& c, const std::string& contents) {
  if (c.output.empty()) std::cout << contents;
  else cli::write_atomically(c.output, contents);
}

int run_suites(const RunConfig& c) {
  GridSpec g = c.grid();
  // check runs one point: the first value of each list.
  if (c.command == "check" && !g.empty()) {
    auto first = [](auto& v) {
      if (v.size() > 1) v.resize(1);
    };
    first(g.q), first(g.k), first(g.lambda), first(g.rho), first(g.v), first(g.sigma);
  }
  const auto reports =
      g.empty() ? default_sweep(c.suites, c.suite_options(), c.jobs) : grid_sweep(c.suites, g, c.suite_options(), c.jobs);
  const auto summary = summarize(reports);

  std::string out;
  if (c.format == "csv") {
    out = cli::report_csv_header() + "\n";
    for (const auto& r : reports) out += cli::report_csv_row(r) + "\n";
  } else {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(cli::report_json(r));
    out = arr.dump(2) + "\n";
  }
  if (!c.output.empty()) cli::write_atomically(c.output, out);

  bool ok = true;
  for (const auto& s : summary) {
    long skipped = 0, points = 0;
    std::set<std::string> reasons;
    for (const auto& r : reports)
      if (r.suite == s.suite) {
        ++points;
        if (!is_skipped(r)) continue;
        ++skipped;
        for (const auto& n : r.notes) reasons.insert(n);
      }
    if (skipped == points && points > 0) {
      std::cerr << "warning: " << s.suite << ": every point skipped";
      for (const auto& n : reasons) std::cerr << "; " << n;
      std::cerr << "\n";
    }
    json line = cli::report_json(s);
    line.erase("notes");
    line["points"] = points;
    line["skipped"] = skipped;
    std::cout << line.dump() << "\n";
    ok = ok && s.pass;
  }
  if (c.output.empty() && c.format == "csv") std::cout << out;
  return ok ? 0 : 1;
}

ProcessKind parse_process(const std::string& s) {
  for (auto k : {ProcessKind::ASIP, ProcessKind::ASIP_L, ProcessKind::ASIP_R, ProcessKind::SIP, ProcessKind::SIP_L,
                 ProcessKind::SIP_R, ProcessKind::ABEP, ProcessKind::ABEP_L, ProcessKind::ABEP_R, ProcessKind::BEP,
                 ProcessKind::BEP_L})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::config, "unknown process: " + s);
}

Params single_point(const RunConfig& c) {
  const auto g = c.grid();
  if (g.empty()) throw Error(ErrorKind::config, "needs --q and --k");
  const auto pts = g.points();
  if (pts.size() != 1) throw Error(ErrorKind::config, "expected a single parameter point");
  pts.front().validate();
  return pts.front();
}

int run_simulate(const RunConfig& c) {
  const ProcessSpec<double> spec{parse_process(c.process), single_point(c)};
  spec.validate();
  const bool discrete = is_discrete(spec.kind);
  Config eta;
  for (double x : c.initial) eta.push_back(static_cast<int>(x));
  if (c.initial.size() != spec.params.k.size())
    throw Error(ErrorKind::config, "initial state needs one entry per site");

  if (c.samples == 1) {
    std::ostringstream os;
    if (discrete) write_csv(os, gillespie_trajectory(spec, eta, c.horizon, c.seed));
    else write_csv(os, euler_maruyama_trajectory(spec, c.initial, c.horizon, c.dt, c.seed));
    emit(c, os.str());
    return 0;
  }
  // Ensemble: mean and stderr of every site at the horizon.
  const int M = spec.params.sites();
  std::vector<std::vector<double>> finals(M);
  for (int j = 0; j < M; ++j) {
    finals[j] = parallel_samples(c.samples, c.seed, c.jobs, [&](long, Rng& rng) {
      if (discrete) return static_cast<double>(gillespie_state_at(spec, eta, c.horizon, rng)[j]);
      return euler_maruyama_state_at(spec, c.initial, c.horizon, c.dt, rng)[j];
    });
  }
  json j{{"process", c.process}, {"params", describe(spec.params)}, {"horizon", c.horizon},
         {"samples", c.samples}, {"seed", c.seed}};
  for (int s = 0; s < M; ++s) {
    const auto e = estimate(finals[s]);
    j["sites"].push_back({{"mean", cli::number_json(e.mean)}, {"stderr", cli::number_json(e.stderr_)}});
  }
  emit(c, j.dump(2) + "\n");
  return 0;
}

Family parse_family(const std::string& s) {
  if (s == "asc") return Family::ASC;
  if (s == "aw") return Family::AW;
  if (s == "bigqjacobi") return Family::BigQJacobi;
  if (s == "qmeixner") return Family::QMeixner;
  if (s == "bigqlaguerre") return Family::BigQLaguerre;
  if (s == "wilson") return Family::Wilson;
  throw Error(ErrorKind::config, "unknown family: " + s + " (asc, aw, bigqjacobi, qmeixner, bigqlaguerre, wilson)");
}

int run_tabulate(const RunConfig& c) {
  const Params p = single_point(c);
  const Family fam = parse_family(c.family);
  auto value = [&](auto tag, int n, int x) {
    using T = decltype(tag);
    const auto pt = p.as<T>();
    const T a = fam == Family::ASC ? pt.need_rho() : pt.need_lambda();
    const T b = fam == Family::ASC ? T(0) : pt.need_rho();
    return to_double(one_site_poly<T>(fam, n, T(x), a, b, pt.v, pt.k.at(0), pt.q));
  };
  std::string out = "n";
  for (int x : c.x_values) out += ",x=" + std::to_string(x);
  out += "\n";
  for (int n : c.n_values) {
    out += std::to_string(n);
    for (int x : c.x_values)
      out += "," + format_real(c.precision == "high" ? value(hp{}, n, x) : value(double{}, n, x));
    out += "\n";
  }
  emit(c, out);
  return 0;
}

int run_list() {
  for (const auto& s : suites())
    std::cout << s.name << "\t" << s.group << "\t" << format_real(s.tolerance) << "\t" << s.description << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dualities of dynamic inclusion and energy processes: identity checks, sweeps, simulation"};
  app.require_subcommand(1);
  Flags f;
  Options o;

  auto* check = app.add_subcommand("check", "run suites at one parameter point (default grids when none given)");
  add_suite_flags(check, f, o);
  add_grid_flags(check, f, o);
  add_common_flags(check, f, o);

  Flags fs;
  Options os_;
  auto* sweep = app.add_subcommand("sweep", "run suites over a parameter grid (default grids when none given)");
  add_suite_flags(sweep, fs, os_);
  add_grid_flags(sweep, fs, os_);
  add_common_flags(sweep, fs, os_);
  os_.by_name["all"] = sweep->add_flag("--all", fs.all, "every registered suite");

  Flags fm;
  Options om;
  auto* simulate = app.add_subcommand("simulate", "simulate a trajectory (CSV) or an ensemble summary (JSON)");
  add_grid_flags(simulate, fm, om);
  add_common_flags(simulate, fm, om);
  om.by_name["process"] = simulate->add_option("--process", fm.process, "ASIP, ASIP_L, ..., BEP, BEP_L")->required();
  om.by_name["initial"] = simulate->add_option("--initial", fm.initial, "initial state, comma separated")->required();
  om.by_name["horizon"] = simulate->add_option("--horizon", fm.horizon, "final time");
  om.by_name["dt"] = simulate->add_option("--dt", fm.dt, "Euler-Maruyama step");
  om.by_name["samples"] = simulate->add_option("--samples", fm.samples, "ensemble size (1: write the trajectory)");

  Flags ft;
  Options ot;
  auto* tabulate = app.add_subcommand("tabulate", "tabulate one-site polynomials (CSV, rows n, columns x)");
  add_grid_flags(tabulate, ft, ot);
  add_common_flags(tabulate, ft, ot);
  ot.by_name["family"] = tabulate->add_option("--family", ft.family, "asc, aw, bigqjacobi, qmeixner, bigqlaguerre, wilson")
                             ->required();
  ot.by_name["n"] = tabulate->add_option("--n", ft.n, "degrees: 0..3 or 0,1,2")->required();
  ot.by_name["x"] = tabulate->add_option("--x", ft.x, "arguments: 0..3 or 0,1,2")->required();

  auto* list = app.add_subcommand("list", "list the registered suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig c;
    const Flags* used = nullptr;
    std::string save;
    if (check->parsed()) c = build_config("check", f, o), save = f.save_config, used = &f;
    else if (sweep->parsed()) c = build_config("sweep", fs, os_), save = fs.save_config, used = &fs;
    else if (simulate->parsed()) c = build_config("simulate", fm, om), save = fm.save_config, used = &fm;
    else if (tabulate->parsed()) c = build_config("tabulate", ft, ot), save = ft.save_config, used = &ft;
    else if (list->parsed()) return run_list();
    (void)used;
    if (c.command == "check" || c.command == "sweep") {
      if (c.suites.empty()) {
        std::cerr << "error: no suite selected\n\n" << (c.command == "check" ? check : sweep)->help();
        return 2;
      }
    }
    cli::validate(c);
    if (!save.empty()) cli::write_atomically(save, json(c).dump(2) + "\n");
    if (c.command == "simulate") return run_simulate(c);
    if (c.command == "tabulate") return run_tabulate(c);
    return run_suites(c);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
