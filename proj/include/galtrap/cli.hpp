#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/flow.hpp"
#include "galtrap/io.hpp"
#include "galtrap/lattice.hpp"
#include "galtrap/parallel.hpp"
#include "galtrap/random.hpp"
#include "galtrap/trapping.hpp"

namespace galtrap::cli {

inline constexpr const char* kVersion = "0.1.0";

inline std::string digest_bytes(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& x : split(s, ',')) out.push_back(parse_double(x));
  return out;
}

/// Parses args (in order, without program name) into app.
inline void parse_args(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

/// Field generator specs:
///   random --radius R --envelope D=..,gamma=.. --seed S [--profile uniform|saturate|mixed] [--dim d]
///   pair --k 1,0 --amp a [--nu v]
inline SpectralField generate_field(const std::string& spec) {
  std::vector<std::string> tok = split(spec, ' ');
  if (tok.empty()) throw ParameterError("empty generator spec");
  const std::string kind = tok.front();
  tok.erase(tok.begin());
  CLI::App g{"generator"};
  if (kind == "random") {
    double radius = 6.0;
    int dim = 2;
    std::uint64_t seed = 0;
    std::string env = "D=1,gamma=4", profile = "uniform";
    g.add_option("--radius", radius);
    g.add_option("--dim", dim);
    g.add_option("--seed", seed);
    g.add_option("--envelope", env);
    g.add_option("--profile", profile);
    try {
      parse_args(g, tok);
    } catch (const CLI::ParseError& e) {
      throw ParameterError("bad generator spec '" + spec + "': " + e.what());
    }
    PowerEnvelope pe;
    for (const auto& kv : split(env, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParameterError("envelope entries are key=value");
      const std::string key = kv.substr(0, eq);
      const double v = parse_double(kv.substr(eq + 1));
      if (key == "D") pe.D = v;
      else if (key == "gamma") pe.gamma = v;
      else throw ParameterError("unknown envelope key '" + key + "'");
    }
    AmplitudeProfile prof = AmplitudeProfile::uniform;
    if (profile == "saturate") prof = AmplitudeProfile::saturate;
    else if (profile == "mixed") prof = AmplitudeProfile::mixed;
    else if (profile != "uniform") throw ParameterError("unknown profile '" + profile + "'");
    Rng rng(seed);
    return random_field(ModeSet::ball(dim, radius), pe, rng, prof);
  }
  if (kind == "pair") {
    std::string k = "1,0";
    double amp = 1.0;
    g.add_option("--k", k);
    g.add_option("--amp", amp);
    try {
      parse_args(g, tok);
    } catch (const CLI::ParseError& e) {
      throw ParameterError("bad generator spec '" + spec + "': " + e.what());
    }
    std::vector<int> c;
    for (double x : parse_list(k)) c.push_back(static_cast<int>(x));
    const Mode m = Mode::of(static_cast<int>(c.size()), c);
    auto set = ModeSet::from_modes(m.dim, {m, -m});
    SpectralField u(set);
    const auto b = perp_basis(m);
    u.set_pair(m, CVec{amp * b.e[0][0], amp * b.e[0][1], amp * b.e[0][2]});
    return u;
  }
  throw ParameterError("unknown generator '" + kind + "'");
}

/// A file path, or a generator spec starting with "random" or "pair".
inline SpectralField load_field(const std::string& source, bool symmetrize = false) {
  if (source.rfind("random", 0) == 0 || source.rfind("pair", 0) == 0) return generate_field(source);
  return load_field_file(source, symmetrize);
}

inline ForceField load_force(const std::string& path, int dim) {
  if (path.empty()) return ForceField::zero(dim);
  auto f = load_field_file(path);
  if (f.dim() != dim) throw ParameterError("force and field dimensions differ");
  return ForceField(std::move(f));
}

/// Output of one subcommand; the dispatcher routes text to --out or stdout.
struct Result {
  std::string text;
  int code = 0;
  std::optional<std::uint64_t> seed;
  std::vector<ConstantEstimate> constants;
};

/// Trajectory CSV: time, per representative mode and component re/im, enstrophy.
inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  const ModeSet& set = tr.states.front().modes();
  const int d = set.dim();
  os << "time";
  for (int r : set.representatives()) {
    std::string name = set[static_cast<std::size_t>(r)].str();
    std::replace(name.begin(), name.end(), ',', ';');
    for (int c = 0; c < d; ++c) os << ",u" << name << "[" << c << "].re,u" << name << "[" << c << "].im";
  }
  os << ",enstrophy\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << format_double(tr.times[i]);
    for (int r : set.representatives())
      for (int c = 0; c < d; ++c) {
        const cplx v = tr.states[i][static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        os << "," << format_double(v.real()) << "," << format_double(v.imag());
      }
    os << "," << format_double(tr.enstrophy[i]) << "\n";
  }
  return os.str();
}

struct Options {
  // shared
  std::string init, force, scheme = "rk4-integrating-factor";
  double nu = 1.0, radius = 0.0, h = 1e-2, T = 1.0;
  int stride = 1;
  bool symmetrize = false;
  std::uint64_t seed = 1;
  // certify
  std::string region;
  double proj_radius = 8.0, margin = 0.1;
  int samples = 200;
  int c_samples = 200, c_radius = 12;
  double cq_kmax = 40.0;
  int cq_radius = 80;
  // constants / conditions
  int d = 2;
  double gamma = 4.0, kmax = 40.0, epsilon = 0.5, D = 1.0;
  int const_radius = 0;
  std::string name = "C_Q", gamma_grid;
  bool table = false;
  // converge / lognorm
  std::string radii = "4,6,8", method = "all";
  double m = 12.0;
  std::optional<double> l;
};

namespace detail {

inline ConstantEstimate estmlin_constant(const Options& o, double gamma) {
  return estimate_estmLin_constant(2, gamma, o.epsilon, o.c_radius, o.c_samples, o.seed);
}

/// Builds a region from a recipe JSON document.
inline TrapRegion build_region(const json& recipe, const Options& o, ForceField& force, PhysicsParams& p,
                               bool& enforce) {
  const std::string kind = recipe.at("kind").get<std::string>();
  const int dim = recipe.value("dimension", kind == "small_data_3d" ? 3 : 2);
  p = PhysicsParams{recipe.value("nu", o.nu), dim};
  p.validate();
  force = recipe.contains("force") && !recipe.at("force").is_null() ? ForceField(field_from_json(recipe.at("force")))
                                                                      : ForceField::zero(dim);
  const double gamma = recipe.value("gamma", o.gamma);
  const double margin = o.margin;
  auto cq = [&](int d) {
    if (recipe.contains("C_Q")) return ConstantEstimate::from_json(recipe.at("C_Q"));
    return estimate_CQ(d, gamma, o.cq_kmax, o.cq_radius);
  };
  if (kind == "small_data_3d") return build_smalldata_3d(gamma, force, p, cq(3), margin);
  const ConstantEstimate C = recipe.contains("C") ? ConstantEstimate::from_json(recipe.at("C")) : estmlin_constant(o, gamma);
  PolyRegion base = build_trap1(recipe.at("V0").get<double>(), gamma, force, p, C, margin);
  if (recipe.contains("D_scale")) {
    // Negative-control hook: rescales D relative to sqrt(V0) K^{gamma-1}.
    base.D = recipe.at("D_scale").get<double>() * std::sqrt(base.V0) * std::pow(base.K, gamma - 1.0);
    enforce = false;
  }
  if (kind == "poly") return base;
  if (kind == "exp") return build_trap2(base, recipe.value("D2_over_D", 2.0) * base.D, p, cq(dim), margin);
  if (kind == "time_exp")
    return build_trap3(base, recipe.value("D3_over_D", 2.0) * base.D, recipe.value("t0", 1.0), p, cq(dim), margin);
  throw ParameterError("unknown region kind '" + kind + "'");
}

inline Result run_simulate(const Options& o) {
  if (o.init.empty()) throw ParameterError("simulate needs --init");
  SpectralField u0 = load_field(o.init, o.symmetrize);
  if (o.radius > 0.0) u0 = project(u0, ModeSet::ball(u0.dim(), o.radius));
  const PhysicsParams p{o.nu, u0.dim()};
  const ForceField f = load_force(o.force, u0.dim());
  IntegratorConfig cfg;
  cfg.h = o.h;
  cfg.T = o.T;
  cfg.stride = o.stride;
  cfg.scheme = scheme_from_string(o.scheme);
  return {trajectory_csv(integrate(u0, f, p, cfg)), 0, std::nullopt, {}};
}

inline Result run_certify(const Options& o) {
  if (o.region.empty()) throw ParameterError("certify needs --region");
  json recipe;
  try {
    recipe = json::parse(read_text(o.region));
  } catch (const json::parse_error& e) {
    throw ParameterError("malformed region file: " + std::string(e.what()));
  }
  ForceField f;
  PhysicsParams p;
  bool enforce = true;
  const TrapRegion region = build_region(recipe, o, f, p, enforce);
  const auto cert = certify_inward(region, ModeSet::ball(p.dim, o.proj_radius), f, p, o.samples, o.seed, enforce);
  return {certificate_to_json(cert).dump(2) + "\n", cert.pass ? 0 : 2, o.seed, cert.constants_used};
}

inline Result run_constants(const Options& o) {
  auto one = [&](double gamma) {
    const ConstantName n = constant_name_from_string(o.name);
    const int radius = o.const_radius > 0 ? o.const_radius : static_cast<int>(std::ceil(2.0 * o.kmax));
    switch (n) {
      case ConstantName::C_Q: return estimate_CQ(o.d, gamma, o.kmax, radius);
      case ConstantName::C_estmLin:
        return estimate_estmLin_constant(o.d, gamma, o.epsilon, o.c_radius, o.c_samples, o.seed);
      case ConstantName::C_dgamma: return lattice_constant(o.d, gamma, o.const_radius);
      case ConstantName::A: break;
    }
    throw ParameterError("constant A is the fixed factor 2 of condition D; nothing to estimate");
  };
  if (!o.table) {
    const auto c = one(o.gamma);
    return {c.to_json().dump(2) + "\n", 0, o.name == "C_estmLin" ? std::optional<std::uint64_t>(o.seed) : std::nullopt,
            {c}};
  }
  if (o.gamma_grid.empty()) throw ParameterError("--table needs --gamma-grid");
  std::ostringstream os;
  os << "gamma,value,tail_bound,reported,mode_of_supremum\n";
  Result r;
  for (double g : parse_list(o.gamma_grid)) {
    const auto c = one(g);
    std::string m = c.mode_of_supremum.str();
    std::replace(m.begin(), m.end(), ',', ';');
    os << format_double(g) << "," << format_double(c.value) << "," << format_double(c.tail_bound) << ","
       << format_double(c.reported()) << "," << m << "\n";
    r.constants.push_back(c);
  }
  r.text = os.str();
  return r;
}

inline Result run_converge(const Options& o) {
  if (o.init.empty()) throw ParameterError("converge needs --init");
  const SpectralField u0 = load_field(o.init, o.symmetrize);
  const int dim = u0.dim();
  const PhysicsParams p{o.nu, dim};
  const ForceField f = load_force(o.force, dim);
  const auto m = ModeSet::ball(dim, o.m);
  Result r;
  double l = 0.0;
  if (o.l) {
    l = *o.l;
  } else {
    const auto b = estimate_conditionD_bound(o.D, o.gamma, dim, o.nu, 4.0 * o.m);
    l = b.l;
    r.constants = {b.c_gamma, b.c_gamma_minus_1};
  }
  IntegratorConfig cfg;
  cfg.h = o.h;
  cfg.T = o.T;
  cfg.scheme = scheme_from_string(o.scheme);
  std::ostringstream os;
  os << "n,delta_n,min_bound_slack,pass\n";
  bool ok = true;
  for (double n : parse_list(o.radii)) {
    const auto rep = galerkin_difference_experiment(u0, f, p, cfg, ModeSet::ball(dim, n), m, l);
    os << format_double(n) << "," << format_double(rep.delta_n) << "," << format_double(rep.min_slack) << ","
       << (rep.pass ? "true" : "false") << "\n";
    ok = ok && rep.pass;
  }
  r.text = os.str();
  r.code = ok ? 0 : 2;
  return r;
}

inline Result run_lognorm(const Options& o) {
  if (o.init.empty()) throw ParameterError("lognorm needs --init");
  SpectralField u = load_field(o.init, o.symmetrize);
  if (o.radius > 0.0) u = project(u, ModeSet::ball(u.dim(), o.radius));
  const PhysicsParams p{o.nu, u.dim()};
  const auto J = jacobian(u, p);
  json out = json::array();
  auto emit = [&](LogNormMethod m, double v, const std::string& states) {
    out.push_back({{"method", to_string(m)},
                   {"value", v},
                   {"projection", {{"modes", u.size()}, {"radius", u.modes().max_norm()}}},
                   {"states", states}});
  };
  const bool all = o.method == "all";
  if (all || o.method == "euclidean-eig") emit(LogNormMethod::euclidean_eig, lognorm_euclidean(J), "input state");
  if (all || o.method == "gershgorin") emit(LogNormMethod::gershgorin, lognorm_gershgorin(J), "input state");
  Result r;
  if (all || o.method == "condition-D") {
    const auto b = estimate_conditionD_bound(o.D, o.gamma, u.dim(), o.nu, 200.0);
    emit(LogNormMethod::condition_D, b.l,
         "all of W(" + format_double(o.D) + "," + format_double(o.gamma) + ") on every ball projection");
    r.constants = {b.c_gamma, b.c_gamma_minus_1};
  }
  if (out.empty()) throw ParameterError("unknown log-norm method '" + o.method + "'");
  r.text = out.dump(2) + "\n";
  return r;
}

inline Result run_conditions(const Options& o) {
  return {conditions_to_json(check_C_conditions(o.d, o.gamma, o.D)).dump(2) + "\n", 0, std::nullopt, {}};
}

/// Appends "--key value" for config entries whose flag is not on the command line.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  if (path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParameterError("malformed config file: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw ParameterError("config file must be a flat JSON object");
  std::vector<std::string> merged;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    merged.push_back(args[i]);
  }
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : merged)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_string()) {
      merged.push_back(flag);
      merged.push_back(value.get<std::string>());
    } else if (value.is_number_integer()) {
      merged.push_back(flag);
      merged.push_back(std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      merged.push_back(flag);
      merged.push_back(format_double(value.get<double>()));
    } else {
      throw ParameterError("config value for '" + key + "' must be a scalar");
    }
  }
  return merged;
}

}  // namespace detail

struct Invocation {
  Result result;
  std::string subcommand;
  std::string out_path, manifest_path;
  bool help = false;
  std::string help_text;
};

/// Parses args (after config merge) and executes the subcommand.
inline Invocation execute(const std::vector<std::string>& args) {
  Options o;
  Invocation inv;
  int threads = 0;
  CLI::App app{"Spectral Galerkin trapping-region toolkit", "galtrap"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", inv.out_path, "output file (default stdout)");
  app.add_option("--manifest", inv.manifest_path, "manifest path (default <out>.manifest.json)");
  app.add_option("--threads", threads, "worker threads (default GALERKIN_TRAP_THREADS or all cores)");
  app.add_option("--config", "flat JSON key-value config file");
  app.set_version_flag("--version", kVersion);

  auto add_flow = [&](CLI::App* s) {
    s->add_option("--init", o.init, "field file or generator spec");
    s->add_option("--force", o.force, "force field file");
    s->add_option("--nu", o.nu, "viscosity");
    s->add_option("--h", o.h, "time step");
    s->add_option("--T", o.T, "horizon");
    s->add_option("--scheme", o.scheme, "rk4-integrating-factor or rk4-plain");
    s->add_flag("--symmetrize", o.symmetrize, "complete missing conjugate modes");
  };
  auto* sim = app.add_subcommand("simulate", "integrate a Galerkin projection; CSV trajectory");
  add_flow(sim);
  sim->add_option("--radius", o.radius, "project the initial field to this ball");
  sim->add_option("--stride", o.stride, "output every stride steps");

  auto* cert = app.add_subcommand("certify", "sample a trapping region's boundary; certificate JSON");
  cert->add_option("--region", o.region, "region recipe JSON")->required();
  cert->add_option("--proj-radius", o.proj_radius, "Galerkin ball radius");
  cert->add_option("--samples", o.samples);
  cert->add_option("--seed", o.seed);
  cert->add_option("--margin", o.margin, "construction margin on strict inequalities");
  cert->add_option("--nu", o.nu);
  cert->add_option("--gamma", o.gamma);
  cert->add_option("--c-samples", o.c_samples, "fields for the nonlinear-bound constant");
  cert->add_option("--c-radius", o.c_radius);
  cert->add_option("--cq-kmax", o.cq_kmax);
  cert->add_option("--cq-radius", o.cq_radius);

  auto* cons = app.add_subcommand("constants", "estimate a lattice constant; JSON or CSV table");
  cons->add_option("--d", o.d);
  cons->add_option("--gamma", o.gamma);
  cons->add_option("--kmax", o.kmax);
  cons->add_option("--radius", o.const_radius, "truncation radius (default 2 kmax)");
  cons->add_option("--name", o.name, "C_Q, C_estmLin or C_dgamma");
  cons->add_option("--epsilon", o.epsilon);
  cons->add_option("--c-samples", o.c_samples);
  cons->add_option("--c-radius", o.c_radius);
  cons->add_option("--seed", o.seed);
  cons->add_flag("--table", o.table);
  cons->add_option("--gamma-grid", o.gamma_grid, "comma-separated gamma values for --table");

  auto* conv = app.add_subcommand("converge", "Galerkin difference bound over a radius ladder; CSV");
  add_flow(conv);
  conv->add_option("--radii", o.radii, "comma-separated small radii");
  conv->add_option("--m", o.m, "large radius");
  conv->add_option("--l", o.l, "log-norm bound (default: condition D from --D, --gamma)");
  conv->add_option("--D", o.D);
  conv->add_option("--gamma", o.gamma);

  auto* ln = app.add_subcommand("lognorm", "log-norm bounds of the Jacobian at a state; JSON");
  ln->add_option("--init", o.init)->required();
  ln->add_option("--nu", o.nu);
  ln->add_option("--radius", o.radius);
  ln->add_option("--method", o.method, "all, euclidean-eig, gershgorin or condition-D");
  ln->add_option("--D", o.D);
  ln->add_option("--gamma", o.gamma);
  ln->add_flag("--symmetrize", o.symmetrize);

  auto* cc = app.add_subcommand("check-conditions", "threshold tests for W(D, gamma); JSON");
  cc->add_option("--d", o.d);
  cc->add_option("--gamma", o.gamma);
  cc->add_option("--D", o.D);

  try {
    parse_args(app, args);
  } catch (const CLI::CallForHelp& e) {
    inv.help = true;
    inv.help_text = app.help();
    return inv;
  } catch (const CLI::CallForVersion&) {
    inv.help = true;
    inv.help_text = std::string(kVersion) + "\n";
    return inv;
  } catch (const CLI::ParseError& e) {
    throw ParameterError(e.what());
  }
  if (threads > 0) set_thread_count(threads);
  CLI::App* sub = app.get_subcommands().front();
  inv.subcommand = sub->get_name();
  if (inv.subcommand == "simulate") inv.result = detail::run_simulate(o);
  else if (inv.subcommand == "certify") inv.result = detail::run_certify(o);
  else if (inv.subcommand == "constants") inv.result = detail::run_constants(o);
  else if (inv.subcommand == "converge") inv.result = detail::run_converge(o);
  else if (inv.subcommand == "lognorm") inv.result = detail::run_lognorm(o);
  else inv.result = detail::run_conditions(o);
  return inv;
}

inline json manifest_json(const Invocation& inv, const std::vector<std::string>& args, double seconds) {
  json constants = json::array();
  for (const auto& c : inv.result.constants) constants.push_back(c.to_json());
  json m{{"subcommand", inv.subcommand},
         {"args", args},
         {"constants_used", constants},
         {"version", kVersion},
         {"wall_clock_seconds", seconds},
         {"exit_code", inv.result.code},
         {"output_digest", digest_bytes(inv.result.text)},
         {"output_bytes", inv.result.text.size()}};
  m["seed"] = inv.result.seed ? json(*inv.result.seed) : json(nullptr);
  m["output"] = inv.out_path.empty() ? json(nullptr) : json(inv.out_path);
  return m;
}

/// replay <manifest> [--out path]: re-runs the recorded arguments and
/// compares the output digest. Exit 0 identical, 2 different.
inline int replay(const std::vector<std::string>& args, std::ostream& out) {
  if (args.empty()) throw ParameterError("replay needs a manifest path");
  json m;
  try {
    m = json::parse(read_text(args[0]));
  } catch (const json::parse_error& e) {
    throw ParameterError("malformed manifest: " + std::string(e.what()));
  }
  std::vector<std::string> recorded = m.at("args").get<std::vector<std::string>>();
  std::string new_out;
  for (std::size_t i = 1; i + 1 < args.size(); ++i)
    if (args[i] == "--out") new_out = args[i + 1];
  std::vector<std::string> rerun;
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (recorded[i] == "--out" || recorded[i] == "--manifest") {
      ++i;
      continue;
    }
    rerun.push_back(recorded[i]);
  }
  const Invocation inv = execute(rerun);
  if (!new_out.empty()) write_text(new_out, inv.result.text);
  const bool same = digest_bytes(inv.result.text) == m.at("output_digest").get<std::string>() &&
                    inv.result.code == m.value("exit_code", inv.result.code);
  out << json{{"identical", same},
              {"recorded_digest", m.at("output_digest")},
              {"replayed_digest", digest_bytes(inv.result.text)}}
             .dump()
      << "\n";
  return same ? 0 : 2;
}

/// Entry point: exit 0 success, 1 usage/IO/parameter error, 2 certification or check failure.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (!args.empty() && args[0] == "replay") return replay({args.begin() + 1, args.end()}, out);
    args = detail::merge_config(std::move(args));
    const auto start = std::chrono::steady_clock::now();
    Invocation inv = execute(args);
    if (inv.help) {
      out << inv.help_text;
      return 0;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (inv.out_path.empty())
      out << inv.result.text;
    else
      write_text(inv.out_path, inv.result.text);
    std::string mpath = inv.manifest_path;
    if (mpath.empty() && !inv.out_path.empty()) mpath = inv.out_path + ".manifest.json";
    if (!mpath.empty()) write_text(mpath, manifest_json(inv, args, seconds).dump(2) + "\n");
    return inv.result.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace galtrap::cli
