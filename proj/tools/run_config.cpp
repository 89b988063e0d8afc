#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace duality_lab::cli {

using nlohmann::json;

GridSpec RunConfig::grid() const {
  GridSpec g;
  g.q = q;
  g.k = k;
  if (sites)
    for (auto& kk : g.k)
      if (kk.size() == 1) kk.assign(*sites, kk.front());
  g.lambda = lambda;
  g.rho = rho;
  g.v = v;
  g.sigma = sigma;
  // A partial grid (say only rho) borrows q and k from defaults.
  if (!g.k.empty() && g.q.empty()) g.q = {0.5};
  if (!g.q.empty() && g.k.empty()) g.k = {std::vector<double>(sites.value_or(2), 1.0)};
  return g;
}

SuiteOptions RunConfig::suite_options() const {
  SuiteOptions o;
  o.max_total = max_n;
  o.max_index = max_index;
  o.n_trunc = n_trunc;
  o.precision = precision == "standard" ? Precision::standard : Precision::high;
  o.richardson = richardson;
  o.seed = seed;
  if (tolerance)
    for (const auto& s : suites) o.tolerances[s] = *tolerance;
  return o;
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"suites", c.suites},
           {"q", c.q},
           {"k", c.k},
           {"lambda", c.lambda},
           {"rho", c.rho},
           {"v", c.v},
           {"sigma", c.sigma},
           {"max_n", c.max_n},
           {"max_index", c.max_index},
           {"n_trunc", c.n_trunc},
           {"seed", c.seed},
           {"output", c.output},
           {"format", c.format},
           {"precision", c.precision},
           {"richardson", c.richardson},
           {"jobs", c.jobs},
           {"process", c.process},
           {"initial", c.initial},
           {"horizon", c.horizon},
           {"dt", c.dt},
           {"samples", c.samples},
           {"family", c.family},
           {"n", c.n_values},
           {"x", c.x_values}};
  if (c.sites) j["M"] = *c.sites;
  if (c.tolerance) j["tolerance"] = *c.tolerance;
}

namespace {

template <class V>
void read(const json& j, const char* key, V& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const char* known[] = {"command", "suites", "q",       "k",        "lambda",     "rho",     "v",
                                  "sigma",   "M",      "max_n",   "max_index", "n_trunc",   "tolerance", "seed",
                                  "output",  "format", "precision", "richardson", "jobs",   "process", "initial",
                                  "horizon", "dt",     "samples", "family",   "n",          "x"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return it.key() == s; }) ==
        std::end(known))
      throw Error(ErrorKind::config, "unknown config key: " + it.key());
  }
  read(j, "command", c.command);
  read(j, "suites", c.suites);
  read(j, "q", c.q);
  read(j, "k", c.k);
  read(j, "lambda", c.lambda);
  read(j, "rho", c.rho);
  read(j, "v", c.v);
  read(j, "sigma", c.sigma);
  if (j.contains("M")) c.sites = j.at("M").get<int>();
  read(j, "max_n", c.max_n);
  read(j, "max_index", c.max_index);
  read(j, "n_trunc", c.n_trunc);
  if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
  read(j, "seed", c.seed);
  read(j, "output", c.output);
  read(j, "format", c.format);
  read(j, "precision", c.precision);
  read(j, "richardson", c.richardson);
  read(j, "jobs", c.jobs);
  read(j, "process", c.process);
  read(j, "initial", c.initial);
  read(j, "horizon", c.horizon);
  read(j, "dt", c.dt);
  read(j, "samples", c.samples);
  read(j, "family", c.family);
  read(j, "n", c.n_values);
  read(j, "x", c.x_values);
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& s) { throw Error(ErrorKind::config, s); };
  static const char* commands[] = {"check", "sweep", "simulate", "tabulate", "list"};
  if (std::find(std::begin(commands), std::end(commands), c.command) == std::end(commands))
    fail("unknown command: " + c.command);
  if (c.command == "check" || c.command == "sweep") {
    if (c.suites.empty()) fail("no suite selected");
    for (const auto& s : c.suites)
      if (!find_suite(s)) fail("unknown suite: " + s);
    if (c.sites && (*c.sites < 1 || *c.sites > 6)) fail("M must be in 1..6");
    for (const auto& kk : c.k)
      if (kk.size() > 6) fail("at most 6 sites");
    if (c.max_n < 0 || c.max_n > 8) fail("max-n must be in 0..8");
  }
  if (c.format != "json" && c.format != "csv") fail("format must be json or csv");
  if (c.precision != "high" && c.precision != "standard") fail("precision must be high or standard");
  if (c.jobs < 1) fail("jobs must be positive");
  if (c.command == "simulate") {
    if (c.process.empty()) fail("simulate needs --process");
    if (c.q.size() > 1 || c.k.size() > 1) fail("simulate takes a single parameter point");
    if (!(c.horizon >= 0) || !(c.dt > 0)) fail("need horizon >= 0 and dt > 0");
    if (c.samples < 1) fail("samples must be positive");
  }
  if (c.command == "tabulate") {
    if (c.family.empty()) fail("tabulate needs --family");
    if (c.n_values.empty() || c.x_values.empty()) fail("tabulate needs --n and --x");
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::config, "not a number: '" + item + "'");
    out.push_back(x);
  }
  return out;
}

std::vector<std::vector<double>> parse_k_list(const std::string& s) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_list(item));
  return out;
}

std::vector<int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  std::vector<int> out;
  if (dots != std::string::npos) {
    const int a = static_cast<int>(parse_list(s.substr(0, dots)).at(0));
    const int b = static_cast<int>(parse_list(s.substr(dots + 2)).at(0));
    for (int i = a; i <= b; ++i) out.push_back(i);
    return out;
  }
  for (double x : parse_list(s)) {
    if (x != std::floor(x)) throw Error(ErrorKind::config, "not an integer: " + format_real(x));
    out.push_back(static_cast<int>(x));
  }
  return out;
}

json number_json(double x) {
  if (!std::isfinite(x)) return format_real(x);
  if (x != 0 && std::abs(std::log10(std::abs(x))) > 300) return format_real(x);
  return x;
}

json report_json(const CheckReport& r) {
  json j{{"suite", r.suite},
         {"params", r.params},
         {"n_cases", r.n_cases},
         {"max_abs", number_json(r.max_abs)},
         {"max_rel", number_json(r.max_rel)},
         {"tolerance", number_json(r.tolerance)},
         {"pass", r.pass},
         {"worst_case", r.worst_case}};
  if (r.tail_bound) j["tail_bound"] = number_json(*r.tail_bound);
  if (!r.flags.empty()) j["flags"] = r.flags;
  if (!r.errors.empty()) j["errors"] = r.errors;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv_header() { return "suite,params,n_cases,max_abs,max_rel,tolerance,pass,worst_case"; }

std::string report_csv_row(const CheckReport& r) {
  return csv_quote(r.suite) + "," + csv_quote(r.params) + "," + std::to_string(r.n_cases) + "," +
         format_real(r.max_abs) + "," + format_real(r.max_rel) + "," + format_real(r.tolerance) + "," +
         (r.pass ? "true" : "false") + "," + csv_quote(r.worst_case);
}

void write_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorKind::config, "cannot write " + tmp);
    os << contents;
    if (!os) throw Error(ErrorKind::config, "write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace duality_lab::cli
