#include "stark/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stark/cli/report.hpp"
#include "stark/errors.hpp"
#include "stark/oscillatory.hpp"
#include "stark/potentials.hpp"
#include "stark/prufer.hpp"
#include "stark/subordinacy.hpp"
#include "stark/version.hpp"

namespace stark::cli {
namespace {

namespace fs = std::filesystem;

// Raised for anything the user can fix on the command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

struct PotentialFlags {
  std::string text = "zero";
  std::optional<std::string> a, beta, phi, decay, alpha, k, file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--potential", text, "Preset name, optionally with parameters: power_law{A=1,beta=0.5}");
    cmd->add_option("--A", a, "Amplitude (power_law, resonant)");
    cmd->add_option("--beta", beta, "Decay exponent (power_law)");
    cmd->add_option("--phi", phi, "Phase (resonant)");
    cmd->add_option("--decay", decay, "Decay exponent (resonant)");
    cmd->add_option("--alpha", alpha, "Hölder exponent (weierstrass_smooth)");
    cmd->add_option("--K", k, "Number of terms (weierstrass_smooth)");
    cmd->add_option("--file", file, "Two-column CSV (tabulated)");
  }

  // Resolves the spec and its canonical text. Flags override brace parameters.
  std::pair<PotentialSpec, std::string> resolve() const {
    std::string s = trim(text);
    std::string name = s;
    std::map<std::string, std::string> params;
    if (const auto brace = s.find('{'); brace != std::string::npos) {
      if (s.back() != '}') throw UsageError("potential '" + s + "' is missing a closing brace");
      name = trim(s.substr(0, brace));
      std::stringstream ss(s.substr(brace + 1, s.size() - brace - 2));
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("potential parameter '" + item + "' lacks '='");
        params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
      }
    }
    const std::pair<const char*, const std::optional<std::string>*> flags[] = {
        {"A", &a}, {"beta", &beta}, {"phi", &phi}, {"decay", &decay}, {"alpha", &alpha}, {"K", &k}, {"file", &file}};
    for (const auto& [key, value] : flags) {
      if (*value) params[key] = **value;
    }
    try {
      PotentialSpec spec = make_potential(name, params);
      if (spec.family == Family::tabulated) return {spec, "tabulated{file=" + params.at("file") + "}"};
      return {spec, describe(spec)};
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
};

struct OutputFlags {
  std::string dir;
  std::string name;
  bool plots = false;

  void attach(CLI::App* cmd, const std::string& default_name) {
    name = default_name;
    cmd->add_option("--out", dir, "Output directory (default: $STARK_OUT_DIR or .)");
    cmd->add_option("--name", name, "Base name of the output files");
    cmd->add_flag("--plots", plots, "Also write SVG plots");
  }

  fs::path base() const {
    fs::path d = dir;
    if (d.empty()) {
      const char* env = std::getenv("STARK_OUT_DIR");
      d = env && *env ? fs::path(env) : fs::path(".");
    }
    return d;
  }

  fs::path path(const std::string& suffix) const { return base() / (name + suffix); }
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
  std::cerr << "wrote " << path.string() << "\n";
}

// Flat key-value rendering of a canonical config; readable back through --config.
std::string config_file_text(const Json& canonical, std::string_view command) {
  std::string out = "# stark ";
  out += kVersion;
  out += " ";
  out += command;
  out += " config_hash=" + config_hash(canonical) + "\n";
  out += "[" + std::string(command) + "]\n";
  for (const auto& [key, value] : canonical.items()) {
    if (key == "command") continue;
    out += key + " = ";
    if (value.is_string()) {
      out += "\"" + value.get<std::string>() + "\"";
    } else if (value.is_number_float()) {
      out += format_double(value.get<double>());
    } else if (value.is_boolean()) {
      out += value.get<bool>() ? "true" : "false";
    } else {
      out += value.dump();
    }
    out += "\n";
  }
  return out;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

std::vector<double> lambda_grid(const std::string& text) {
  try {
    return parse_lambda_grid(text);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

Json number_array(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

// survey ----------------------------------------------------------------------------

struct SurveyFlags {
  PotentialFlags potential;
  OutputFlags output;
  std::string lambda;
  SurveyConfig config;
  bool csv = false;
};

int cmd_survey(const SurveyFlags& f) {
  const auto [q, potential_text] = f.potential.resolve();
  check(!f.lambda.empty(), "--lambda is required");
  const std::vector<double> lambdas = lambda_grid(f.lambda);
  const SurveyConfig& c = f.config;
  check(c.xi0 > 0, "--xi0 must be positive");
  check(c.xi_max >= 100 * c.xi0, "--Xi must be at least 100 xi0");
  check(c.tail_factor >= 1, "--tail-factor must be >= 1");
  check(c.rtol >= 1e-14 && c.rtol <= 1e-3, "--rtol must lie in [1e-14, 1e-3]");
  check(c.integral6_tolerance > 0, "--integral6-tol must be positive");
  check(c.ratio_low > 0 && c.ratio_low < c.ratio_high, "need 0 < --ratio-low < --ratio-high");
  check(c.control_lo >= c.xi0 && c.control_lo < c.control_hi && c.control_hi <= c.xi_max,
        "need xi0 <= --control-lo < --control-hi <= --Xi");

  Json canonical;
  canonical["command"] = "survey";
  canonical["potential"] = potential_text;
  canonical["lambda"] = trim(f.lambda);
  canonical["xi0"] = c.xi0;
  canonical["Xi"] = c.xi_max;
  canonical["tail-factor"] = c.tail_factor;
  canonical["rtol"] = c.rtol;
  canonical["theta0"] = c.theta0;
  canonical["integral6-tol"] = c.integral6_tolerance;
  canonical["ratio-low"] = c.ratio_low;
  canonical["ratio-high"] = c.ratio_high;
  canonical["ratio-slope-tol"] = c.ratio_slope_tolerance;
  canonical["resonant-rate"] = c.resonant_rate;
  canonical["control-lo"] = c.control_lo;
  canonical["control-hi"] = c.control_hi;
  canonical["subordinacy-x"] = c.subordinacy_x;
  const std::string hash = config_hash(canonical);

  std::cerr << "survey " << potential_text << " at " << lambdas.size() << " energies\n";
  const SurveyReport report = spectral_survey(q, lambdas, c);

  Json config_json = canonical;
  config_json["lambda_values"] = number_array(lambdas);
  write_file(f.output.path(".json"), survey_json(report, config_json, hash).dump(2) + "\n");
  write_file(f.output.path(".conf"), config_file_text(canonical, "survey"));

  if (f.csv) {
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
      const auto& v = report.verdicts[i];
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_lambda%03zu.csv", i);
      write_file(f.output.path(suffix), trajectory_csv(q, v.lambda, v.diagnostic, hash));
    }
  }

  if (f.output.plots) {
    PlotSpec amplitude{"log R along the trajectory", "xi", "log R - log R(xi0)", true, false, {}};
    PlotSpec partials{"partials of int V sin(2 theta)", "N", "partial sum", true, false, {}};
    PlotSpec l2{"L2 growth", "N", "int_0^N u^2 / N^(1/2)", true, false, {}};
    for (const auto& v : report.verdicts) {
      const std::string label = "lambda=" + format_double(v.lambda);
      Series a{label, {}, {}};
      if (!v.diagnostic.empty()) {
        for (const auto& s : v.diagnostic) {
          a.x.push_back(s.xi);
          a.y.push_back(s.log_r - v.diagnostic.front().log_r);
        }
      }
      amplitude.series.push_back(std::move(a));
      Series p{label, {}, {}};
      for (const auto& pt : v.integral6) {
        p.x.push_back(pt.n);
        p.y.push_back(pt.value);
      }
      partials.series.push_back(std::move(p));
      Series g{label, {}, {}};
      for (const auto& pt : v.l2_profile) {
        g.x.push_back(pt[0]);
        g.y.push_back(pt[1]);
      }
      l2.series.push_back(std::move(g));
    }
    write_file(f.output.path("_logR.svg"), svg_plot(amplitude));
    write_file(f.output.path("_integral6.svg"), svg_plot(partials));
    write_file(f.output.path("_l2.svg"), svg_plot(l2));
  }

  for (const auto& v : report.verdicts) {
    std::cerr << "  lambda=" << format_double(v.lambda) << "  " << to_string(v.verdict);
    if (!v.error.empty()) std::cerr << "  (" << v.error << ")";
    std::cerr << "\n";
  }
  return !report.verdicts.empty() && report.failures() == report.verdicts.size() ? 1 : 0;
}

// trajectory ------------------------------------------------------------------------

struct TrajectoryFlags {
  PotentialFlags potential;
  OutputFlags output;
  double lambda = 0.0;
  double theta0 = 0.0;
  double xi0 = 1.0;
  double xi_max = 1e4;
  double rtol = 1e-12;
  int per_decade = 64;
};

int cmd_trajectory(const TrajectoryFlags& f) {
  const auto [q, potential_text] = f.potential.resolve();
  check(f.xi0 > 0 && f.xi_max > f.xi0, "need 0 < --xi0 < --Xi");
  check(f.rtol >= 1e-14 && f.rtol <= 1e-3, "--rtol must lie in [1e-14, 1e-3]");
  check(f.per_decade >= 1, "--per-decade must be positive");

  Json canonical;
  canonical["command"] = "trajectory";
  canonical["potential"] = potential_text;
  canonical["lambda"] = f.lambda;
  canonical["theta0"] = f.theta0;
  canonical["xi0"] = f.xi0;
  canonical["Xi"] = f.xi_max;
  canonical["rtol"] = f.rtol;
  canonical["per-decade"] = f.per_decade;
  const std::string hash = config_hash(canonical);

  TrajectoryOptions options;
  options.diagnostic_per_decade = f.per_decade;
  const PruferState start = initial_state(q, f.lambda, f.theta0, f.xi0);
  const PruferTrajectory traj = integrate_prufer(q, f.lambda, start, f.xi_max, f.rtol, options);

  write_file(f.output.path(".csv"), trajectory_csv(traj, traj.diagnostic_grid(), hash));
  if (f.output.plots) {
    Series s{"lambda=" + format_double(f.lambda), {}, {}};
    for (const auto& row : traj.diagnostic_grid()) {
      s.x.push_back(row.xi);
      s.y.push_back(row.log_r);
    }
    write_file(f.output.path("_logR.svg"), svg_plot({potential_text, "xi", "log R", true, false, {s}}));
  }
  return 0;
}

// tails -----------------------------------------------------------------------------

struct TailsFlags {
  OutputFlags output;
  std::string kind;
  std::string ns = "1e2,1e3,1e4";
  double p = -2.0 / 3.0;
  double cubic_root = 0.0;
  double xi_factor = 100.0;
  double decay = 0.9;
  double lambda = 1.0;
  double y_factor = 1000.0;
};

int cmd_tails(const TailsFlags& f) {
  const std::vector<double> ns = lambda_grid(f.ns);
  Json canonical;
  canonical["command"] = "tails";
  canonical["kind"] = f.kind;
  canonical["N"] = trim(f.ns);
  std::vector<OscillatoryTail> table;
  if (f.kind == "power_phase") {
    check(f.p <= 0, "--p must be <= 0");
    check(f.xi_factor >= 100, "--xi-factor must be >= 100");
    for (double n : ns) check(n >= 1, "every N must be >= 1");
    canonical["p"] = f.p;
    canonical["cubic-root"] = f.cubic_root;
    canonical["xi-factor"] = f.xi_factor;
    PhaseSpec phase;
    phase.cubic_root_coeff = f.cubic_root;
    table = tail_power_phase_table(f.p, phase, ns, f.xi_factor);
  } else {
    check(f.decay > 0, "--decay must be positive");
    check(f.y_factor > 1, "--y-factor must exceed 1");
    for (double n : ns) check(n > 0, "every N must be positive");
    canonical["decay"] = f.decay;
    canonical["lambda"] = f.lambda;
    canonical["y-factor"] = f.y_factor;
    const double decay = f.decay;
    const DecayingFunction fn{[decay](double xi) { return std::pow(1.0 + xi, -decay); }, decay};
    table = cubic_phase_tail_table(fn, f.lambda, ns, f.y_factor);
  }
  const std::string hash = config_hash(canonical);
  write_file(f.output.path(".csv"), tails_csv(table, hash));
  if (f.output.plots) {
    Series s{f.kind, {}, {}};
    for (const auto& t : table) {
      s.x.push_back(t.n);
      s.y.push_back(std::abs(t.value));
    }
    write_file(f.output.path(".svg"), svg_plot({"oscillatory tails", "N", "|tail|", true, true, {s}}));
  }
  return 0;
}

// sset ------------------------------------------------------------------------------

struct SSetFlags {
  PotentialFlags potential;
  OutputFlags output;
  std::string lambda;
  std::string ns = "100,200,400";
  std::string variant = "proof";
  double k_spacing = 0.0078125;
  int h_levels = 5;
};

int cmd_sset(const SSetFlags& f) {
  const auto [q, potential_text] = f.potential.resolve();
  check(!f.lambda.empty(), "--lambda is required");
  const std::vector<double> lambdas = lambda_grid(f.lambda);
  const std::vector<double> ns = lambda_grid(f.ns);
  for (double n : ns) check(n > 0, "every N must be positive");
  check(f.k_spacing > 0, "--k-spacing must be positive");
  check(f.h_levels >= 1, "--h-levels must be positive");

  SSetOptions options;
  options.variant = f.variant == "statement" ? SSetVariant::statement : SSetVariant::proof;
  options.k_spacing = f.k_spacing;
  options.h_levels = f.h_levels;

  Json canonical;
  canonical["command"] = "sset";
  canonical["potential"] = potential_text;
  canonical["lambda"] = trim(f.lambda);
  canonical["N"] = trim(f.ns);
  canonical["variant"] = f.variant;
  canonical["k-spacing"] = f.k_spacing;
  canonical["h-levels"] = f.h_levels;
  const std::string hash = config_hash(canonical);

  Json records = Json::array();
  int failures = 0;
  for (double lambda : lambdas) {
    for (double n : ns) {
      Json r;
      r["lambda"] = lambda;
      try {
        const Json d = sset_json(s_set_diagnostic(q, lambda, n, options));
        for (const auto& [key, value] : d.items()) r[key] = value;
        r["error"] = nullptr;
      } catch (const Error& e) {
        r["N"] = n;
        r["error"] = e.what();
        ++failures;
      }
      records.push_back(std::move(r));
    }
  }
  Json out;
  out["toolkit"] = "stark";
  out["version"] = std::string(kVersion);
  out["config_hash"] = hash;
  out["config"] = canonical;
  out["records"] = records;
  write_file(f.output.path(".json"), out.dump(2) + "\n");
  return failures > 0 && failures == static_cast<int>(records.size()) ? 1 : 0;
}

// presets ---------------------------------------------------------------------------

int cmd_presets() {
  for (const auto& p : presets()) {
    std::cout << p.name << "\n    parameters: " << (p.parameters.empty() ? "-" : p.parameters)
              << "\n    " << p.formula << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Numerical spectral diagnostics for perturbed Stark operators", "stark"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value config file with one [command] section; flags override it");

  SurveyFlags survey;
  auto* s = app.add_subcommand("survey", "Spectral verdicts over a lambda grid");
  survey.potential.attach(s);
  survey.output.attach(s, "survey");
  s->add_option("--lambda", survey.lambda, "Energies: a:b:n or v1,v2,...");
  s->add_option("--xi0", survey.config.xi0, "Start of the Prüfer integration in xi");
  s->add_option("--Xi", survey.config.xi_max, "End of the diagnostic range in xi");
  s->add_option("--tail-factor", survey.config.tail_factor, "Trajectories run to tail-factor * Xi");
  s->add_option("--rtol", survey.config.rtol, "Integrator tolerance");
  s->add_option("--theta0", survey.config.theta0, "Boundary angle at x = 0");
  s->add_option("--integral6-tol", survey.config.integral6_tolerance, "Oscillation tolerance of the partials");
  s->add_option("--ratio-low", survey.config.ratio_low, "Lower end of the subordinacy band");
  s->add_option("--ratio-high", survey.config.ratio_high, "Upper end of the subordinacy band");
  s->add_option("--ratio-slope-tol", survey.config.ratio_slope_tolerance, "Allowed log-log slope of the ratio");
  s->add_option("--resonant-rate", survey.config.resonant_rate, "Decay rate below which growth counts as resonant");
  s->add_option("--control-lo", survey.config.control_lo, "Start of the control regression range");
  s->add_option("--control-hi", survey.config.control_hi, "End of the control regression range");
  s->add_option("--subordinacy-x", survey.config.subordinacy_x, "Upper x of the subordinacy solves (<= 0 skips)");
  s->add_option("--threads", survey.config.threads, "Worker threads (0: hardware concurrency)");
  s->add_flag("--csv", survey.csv, "Write one trajectory CSV per energy");

  TrajectoryFlags trajectory;
  auto* t = app.add_subcommand("trajectory", "CSV dump of one Prüfer trajectory");
  trajectory.potential.attach(t);
  trajectory.output.attach(t, "trajectory");
  t->add_option("--lambda", trajectory.lambda, "Energy");
  t->add_option("--theta0", trajectory.theta0, "Boundary angle at x = 0");
  t->add_option("--xi0", trajectory.xi0, "Start of the Prüfer integration");
  t->add_option("--Xi", trajectory.xi_max, "End of the integration");
  t->add_option("--rtol", trajectory.rtol, "Integrator tolerance");
  t->add_option("--per-decade", trajectory.per_decade, "Diagnostic rows per decade of xi");

  TailsFlags tails;
  auto* o = app.add_subcommand("tails", "Tables of truncated oscillatory tails");
  tails.output.attach(o, "tails");
  o->add_option("kind", tails.kind, "power_phase or cubic_phase")
      ->required()
      ->check(CLI::IsMember({"power_phase", "cubic_phase"}));
  o->add_option("--N", tails.ns, "Lower limits: list or a:b:n");
  o->add_option("--p", tails.p, "power_phase: power of the amplitude xi^p");
  o->add_option("--cubic-root", tails.cubic_root, "power_phase: coefficient of xi^(1/3) in the phase");
  o->add_option("--xi-factor", tails.xi_factor, "power_phase: upper limit is xi-factor * N");
  o->add_option("--decay", tails.decay, "cubic_phase: f = (1+xi)^(-decay)");
  o->add_option("--lambda", tails.lambda, "cubic_phase: frequency of xi^(1/3)");
  o->add_option("--y-factor", tails.y_factor, "cubic_phase: upper limit in xi^(1/3) is y-factor * N^(1/3)");

  SSetFlags sset;
  auto* e = app.add_subcommand("sset", "Maximal-function diagnostics of the exceptional set");
  sset.potential.attach(e);
  sset.output.attach(e, "sset");
  e->add_option("--lambda", sset.lambda, "Energies: a:b:n or v1,v2,...");
  e->add_option("--N", sset.ns, "Window lengths: list or a:b:n");
  e->add_option("--variant", sset.variant, "proof or statement")->check(CLI::IsMember({"proof", "statement"}));
  e->add_option("--k-spacing", sset.k_spacing, "Frequency grid spacing");
  e->add_option("--h-levels", sset.h_levels, "Dyadic averaging radii 2^-1 .. 2^-levels");

  auto* p = app.add_subcommand("presets", "List the potential presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_survey(survey);
    if (*t) return cmd_trajectory(trajectory);
    if (*o) return cmd_tails(tails);
    if (*e) return cmd_sset(sset);
    if (*p) return cmd_presets();
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "failed: " << err.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace stark::cli
