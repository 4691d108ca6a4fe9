#include "sellab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sellab/bifurcation.hpp"
#include "sellab/io.hpp"
#include "sellab/karamata.hpp"
#include "sellab/profile.hpp"
#include "sellab/radial.hpp"

namespace sellab::cli {

using nlohmann::ordered_json;

namespace {

enum class Kind { Number, Integer, List, Text, Expr, Bool };

struct KeyInfo {
  const char* section;
  const char* key;
  Kind kind;
};

const std::vector<KeyInfo>& key_table() {
  static const std::vector<KeyInfo> t = {
      {"problem", "command", Kind::Text},     {"problem", "N", Kind::Integer},
      {"problem", "R", Kind::Number},         {"problem", "R0", Kind::Number},
      {"problem", "lambda", Kind::Number},    {"problem", "mu", Kind::Number},
      {"problem", "grad_p", Kind::Number},    {"problem", "a_lin", Kind::Number},
      {"problem", "b0", Kind::Number},        {"problem", "a", Kind::Number},
      {"problem", "b", Kind::Number},         {"problem", "domain", Kind::Text},
      {"problem", "n1_mode", Kind::Text},     {"problem", "variant", Kind::Text},
      {"problem", "lef_mode", Kind::Text},    {"problem", "k_kind", Kind::Text},
      {"problem", "alpha", Kind::Number},     {"problem", "D", Kind::Number},
      {"problem", "nu", Kind::Number},        {"problem", "c", Kind::Number},
      {"problem", "xi0", Kind::Number},       {"problem", "direction", Kind::Text},
      {"problem", "lower", Kind::Number},     {"problem", "upper", Kind::Number},
      {"problem", "rho", Kind::Number},       {"problem", "zeta", Kind::Number},
      {"problem", "theta", Kind::Number},     {"problem", "ell_lower", Kind::Number},
      {"problem", "ell_upper", Kind::Number}, {"problem", "c_tilde", Kind::Number},
      {"problem", "two_term_case", Kind::Text}, {"problem", "outer_value", Kind::Number},
      {"problem", "omega0_radius", Kind::Number}, {"problem", "p", Kind::Number},
      {"problem", "a_lim", Kind::Number},     {"problem", "lambda1", Kind::Number},
      {"problem", "Lambda", Kind::Number},
      {"functions", "f", Kind::Expr},         {"functions", "g", Kind::Expr},
      {"functions", "k", Kind::Expr},         {"functions", "p", Kind::Expr},
      {"functions", "q", Kind::Expr},         {"functions", "K", Kind::Expr},
      {"functions", "a", Kind::Expr},         {"functions", "source", Kind::Expr},
      {"functions", "b", Kind::Expr},         {"functions", "S", Kind::Expr},
      {"functions", "phi", Kind::Expr},       {"functions", "psi", Kind::Expr},
      {"functions", "fn", Kind::Expr},
      {"numerics", "tol", Kind::Number},      {"numerics", "ko_tol", Kind::Number},
      {"numerics", "panels", Kind::Integer},  {"numerics", "max_iterations", Kind::Integer},
      {"numerics", "levels", Kind::List},     {"numerics", "lambda_grid", Kind::List},
      {"numerics", "mu_grid", Kind::List},    {"numerics", "t_max", Kind::Number},
      {"numerics", "t_min", Kind::Number},    {"numerics", "points_per_octave", Kind::Integer},
      {"numerics", "s_max", Kind::Number},    {"numerics", "probes", Kind::Integer},
      {"numerics", "eps_b", Kind::Number},    {"numerics", "regularize_levels", Kind::Integer},
      {"numerics", "u_max", Kind::Number},    {"numerics", "profile_levels", Kind::Integer},
      {"output", "dir", Kind::Text},          {"output", "prefix", Kind::Text},
      {"output", "csv", Kind::Bool},          {"output", "json", Kind::Bool},
  };
  return t;
}

const KeyInfo* find_key(const std::string& section, const std::string& key) {
  for (const KeyInfo& k : key_table()) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

bool is_quoted(const std::string& s) {
  return s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Type-checks a value as soon as it is read.
void check_value(const KeyInfo& k, const Value& v) {
  try {
    switch (k.kind) {
      case Kind::Number: parse_number(v.text); break;
      case Kind::Integer: {
        const double x = parse_number(v.text);
        if (x != std::floor(x)) throw ConfigError("'" + std::string(k.key) + "' must be an integer", v.line);
        break;
      }
      case Kind::List:
        for (const std::string& item : split_list(v.text)) parse_number(item);
        break;
      case Kind::Expr:
        if (!is_quoted(v.text)) {
          throw ConfigError("expression '" + std::string(k.key) + "' must be a quoted string", v.line);
        }
        expr::parse(unquote(v.text));
        break;
      case Kind::Bool:
        if (v.text != "true" && v.text != "false") {
          throw ConfigError("'" + std::string(k.key) + "' must be true or false", v.line);
        }
        break;
      case Kind::Text: break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("bad value for '" + std::string(k.key) + "': " + e.what(), v.line);
  }
}

struct CommandInfo {
  const char* name;
  std::vector<const char*> required;  // "section.key"
};

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> t = {
      {"check-ko", {"functions.f"}},
      {"classify", {"functions.fn"}},
      {"analyze-f", {"functions.f"}},
      {"ell", {"functions.k"}},
      {"make-k", {"problem.k_kind"}},
      {"profile", {"functions.f", "functions.k"}},
      {"xi0", {"functions.f", "functions.k"}},
      {"chi", {"problem.rho", "problem.zeta", "problem.theta"}},
      {"solve-entire", {"functions.f", "functions.psi", "problem.N", "problem.R", "problem.b0"}},
      {"solve-system",
       {"functions.p", "functions.q", "functions.f", "functions.g", "problem.N", "problem.R"}},
      {"blowup", {"functions.b", "functions.f", "problem.domain", "problem.N", "problem.R"}},
      {"rate",
       {"functions.b", "functions.f", "functions.k", "problem.domain", "problem.N", "problem.R"}},
      {"eigen", {"problem.N", "problem.R"}},
      {"lef", {"problem.lef_mode", "functions.f", "functions.g", "problem.N", "problem.lambda"}},
      {"sweep", {"problem.lef_mode", "functions.f", "functions.g", "problem.N", "numerics.lambda_grid"}},
      {"gelfand", {"functions.g", "problem.N"}},
      {"young", {"problem.p", "problem.lambda1"}},
  };
  return t;
}

}  // namespace

// ------------------------------------------------------------------- spec

bool ProblemSpec::has(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

const Value& ProblemSpec::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError("missing required key '" + section + "." + key + "'", 0);
  return sections.at(section).at(key);
}

double ProblemSpec::number(const std::string& section, const std::string& key) const {
  const Value& v = get(section, key);
  try {
    return parse_number(v.text);
  } catch (const Error& e) {
    throw ConfigError("bad number for '" + key + "': " + e.what(), v.line);
  }
}

double ProblemSpec::number_or(const std::string& section, const std::string& key,
                              double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

int ProblemSpec::integer(const std::string& section, const std::string& key) const {
  const double x = number(section, key);
  if (x != std::floor(x)) throw ConfigError("'" + key + "' must be an integer", get(section, key).line);
  return static_cast<int>(x);
}

int ProblemSpec::integer_or(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

std::vector<double> ProblemSpec::list(const std::string& section, const std::string& key) const {
  const Value& v = get(section, key);
  std::vector<double> out;
  for (const std::string& item : split_list(v.text)) {
    try {
      out.push_back(parse_number(item));
    } catch (const Error& e) {
      throw ConfigError("bad list entry for '" + key + "': " + e.what(), v.line);
    }
  }
  return out;
}

std::string ProblemSpec::text(const std::string& section, const std::string& key) const {
  return unquote(get(section, key).text);
}

std::string ProblemSpec::text_or(const std::string& section, const std::string& key,
                                 const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

double parse_number(const std::string& text) {
  static const std::regex pi_re("\\bpi\\b");
  const std::string src =
      std::regex_replace(unquote(trim(text)), pi_re, "3.141592653589793238462643383279");
  if (src.empty()) throw ParseError("empty number", 0);
  const expr::Expr e = expr::parse(src);
  const double v = expr::evaluate(e, 0.0);
  if (expr::to_string(expr::differentiate(e)) != "0" && !expr::is_constant(expr::differentiate(e), 0.0)) {
    throw ParseError("number may not depend on t", 0);
  }
  return v;
}

ProblemSpec parse_config_text(const std::string& text) {
  ProblemSpec spec;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section != "problem" && section != "functions" && section != "numerics" &&
          section != "output") {
        throw ConfigError("unknown section [" + section + "]", line);
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    if (section.empty()) throw ConfigError("key outside of any section", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const KeyInfo* info = find_key(section, key);
    if (!info) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line);
    if (spec.has(section, key)) {
      throw ConfigError("duplicate key '" + key + "' (first on line " +
                            std::to_string(spec.get(section, key).line) + ")",
                        line);
    }
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    Value v{value, line};
    check_value(*info, v);
    spec.sections[section][key] = v;
  }
  if (spec.has("problem", "command")) spec.command = spec.text("problem", "command");
  return spec;
}

ProblemSpec parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(ProblemSpec& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' needs key=value", 0);
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::string section;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  } else {
    for (const KeyInfo& k : key_table()) {
      if (key != k.key) continue;
      if (!section.empty()) throw ConfigError("ambiguous override '" + key + "'; use section.key", 0);
      section = k.section;
    }
  }
  const KeyInfo* info = find_key(section, key);
  if (!info) throw ConfigError("unknown override key '" + key + "'", 0);
  Value v{info->kind == Kind::Expr && !is_quoted(value) ? "\"" + value + "\"" : value, 0};
  check_value(*info, v);
  spec.sections[section][key] = v;
  if (section == "problem" && key == "command") spec.command = unquote(value);
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const CommandInfo& c : command_table()) v.push_back(c.name);
    return v;
  }();
  return names;
}

void validate(const ProblemSpec& spec) {
  if (spec.command.empty()) throw ConfigError("no command given", 0);
  const CommandInfo* info = nullptr;
  for (const CommandInfo& c : command_table()) {
    if (spec.command == c.name) info = &c;
  }
  if (!info) throw ConfigError("unknown command '" + spec.command + "'", 0);
  for (const char* req : info->required) {
    const std::string r(req);
    const auto dot = r.find('.');
    if (!spec.has(r.substr(0, dot), r.substr(dot + 1))) {
      throw ConfigError("command " + spec.command + " needs key '" + r + "'", 0);
    }
  }
  if (spec.has("problem", "N") && spec.integer("problem", "N") < 1) {
    throw ConfigError("N must be >= 1", spec.get("problem", "N").line);
  }
}

// ------------------------------------------------------------------- run

namespace {

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> summary;
  ordered_json details = ordered_json::object();
  std::vector<std::pair<std::string, std::string>> files;  // suffix, content

  void put(const std::string& k, const std::string& v) { summary.emplace_back(k, v); }
  void put(const std::string& k, double v) { summary.emplace_back(k, io::fmt(v)); }
};

std::string verdict_name(const ConvergenceVerdict& v) {
  if (is_convergent(v)) return "Convergent";
  if (is_divergent(v)) return "Divergent";
  return "Inconclusive";
}

ordered_json verdict_json(const ConvergenceVerdict& v) {
  ordered_json j;
  j["verdict"] = verdict_name(v);
  if (const auto* c = std::get_if<Convergent>(&v)) {
    j["value"] = c->value;
    j["err"] = c->err;
  } else if (const auto* d = std::get_if<Divergent>(&v)) {
    j["growth_exponent"] = d->growth_exponent;
  } else {
    j["diagnostics"] = std::get<Inconclusive>(v).diagnostics;
  }
  return j;
}

void put_verdict(Artifacts& a, const std::string& key, const ConvergenceVerdict& v) {
  a.put(key, verdict_name(v));
  if (const auto* c = std::get_if<Convergent>(&v)) a.put(key + "_value", c->value);
  a.details[key] = verdict_json(v);
}

ordered_json limit_json(const Limit& l) {
  ordered_json j;
  switch (l.kind) {
    case Limit::Kind::Finite:
      j["value"] = l.value;
      j["err"] = l.err;
      break;
    case Limit::Kind::PlusInfinity: j["value"] = "inf"; break;
    case Limit::Kind::Unavailable: j["value"] = "unavailable"; break;
  }
  return j;
}

std::string limit_text(const Limit& l) {
  if (l.finite()) return io::fmt(l.value);
  return l.kind == Limit::Kind::PlusInfinity ? "inf" : "unavailable";
}

expr::ScalarFn fn_of(const ProblemSpec& s, const std::string& key, const std::string& fallback = "") {
  if (!s.has("functions", key)) {
    if (fallback.empty()) s.get("functions", key);
    return expr::ScalarFn::parse(fallback, 0.0);
  }
  return expr::ScalarFn::parse(s.text("functions", key), 0.0);
}

Nonlinearity nl_of(const ProblemSpec& s, const std::string& key, bool monotone = true) {
  return analyze_nonlinearity(s.text("functions", key), s.number_or("numerics", "u_max", 1e8),
                              monotone);
}

KFunction k_of(const ProblemSpec& s) {
  if (s.has("problem", "k_kind")) {
    const std::string kind = s.text("problem", "k_kind");
    if (kind == "power") return power_k(s.number("problem", "alpha"), s.number_or("problem", "nu", 1.0));
    KKind kk;
    if (kind == "expA") kk = KKind::ExpA;
    else if (kind == "invS") kk = KKind::InvS;
    else if (kind == "invLnS") kk = KKind::InvLnS;
    else throw ConfigError("unknown k_kind '" + kind + "' (expected power, expA, invS, invLnS)",
                           s.get("problem", "k_kind").line);
    return make_k(kk, s.text("functions", "S"), s.number("problem", "D"));
  }
  return user_k(s.text("functions", "k"), s.number_or("problem", "nu", 1.0));
}

EigenMode n1_mode_of(const ProblemSpec& s) {
  const int N = s.integer("problem", "N");
  if (N != 1) return EigenMode::Symmetric;
  if (!s.has("problem", "n1_mode")) {
    throw ConfigError("N = 1 needs problem.n1_mode (symmetric or interval)", 0);
  }
  return parse_eigen_mode(s.text("problem", "n1_mode"));
}

void add_solution(Artifacts& a, const RadialSolution& sol) {
  a.files.emplace_back(".csv", solution_csv(sol));
  a.put("classification", to_string(sol.classification));
  a.details["notes"] = sol.notes;
}

BlowupProfile profile_of(const ProblemSpec& s, const Nonlinearity& f, const KFunction& k) {
  const ProfileVariant var = parse_profile_variant(s.text_or("problem", "variant", "kIntegrand"));
  ProfileOptions po;
  po.c = s.number_or("problem", "c", 1.0);
  po.ko_tol = s.number_or("numerics", "ko_tol", 1e-4);
  if (s.has("problem", "xi0")) po.xi0 = s.number("problem", "xi0");
  return build_profile(f, k, var, profile_grid(k.nu, s.integer_or("numerics", "profile_levels", 30)),
                       po);
}

LogisticProblem logistic_of(const ProblemSpec& s) {
  LogisticProblem p;
  p.a_lin = s.number_or("problem", "a_lin", 0.0);
  p.b = fn_of(s, "b");
  p.f = nl_of(s, "f");
  const std::string dom = s.text("problem", "domain");
  if (dom == "ball") p.domain = DomainKind::Ball;
  else if (dom == "annulus") p.domain = DomainKind::Annulus;
  else if (dom == "exterior") p.domain = DomainKind::Exterior;
  else if (dom == "whole") p.domain = DomainKind::WholeSpace;
  else throw ConfigError("unknown domain '" + dom + "'", s.get("problem", "domain").line);
  p.R0 = s.number_or("problem", "R0", 0.0);
  p.R = s.number("problem", "R");
  p.outer_value = s.number_or("problem", "outer_value", 1.0);
  p.N = s.integer("problem", "N");
  if (s.has("problem", "omega0_radius")) p.omega0_radius = s.number("problem", "omega0_radius");
  p.b_normalization = parse_profile_variant(s.text_or("problem", "variant", "kIntegrand"));
  return p;
}

BlowupOptions blowup_options(const ProblemSpec& s, int jobs) {
  BlowupOptions o;
  if (s.has("numerics", "levels")) o.n_levels = s.list("numerics", "levels");
  o.points_per_octave = s.integer_or("numerics", "points_per_octave", 8);
  o.jobs = jobs;
  return o;
}

LEFProblem lef_of(const ProblemSpec& s) {
  LEFProblem p = make_lef(parse_lef_mode(s.text("problem", "lef_mode")), s.text("functions", "f"),
                          s.text("functions", "g"), s.integer("problem", "N"),
                          s.number_or("problem", "R", 1.0), n1_mode_of(s));
  p.lambda = s.number_or("problem", "lambda", 0.0);
  p.mu = s.number_or("problem", "mu", 0.0);
  p.grad_p = s.number_or("problem", "grad_p", 0.0);
  if (s.has("functions", "a")) p.a_pot = RadialPotential::radial(fn_of(s, "a"));
  if (s.has("functions", "K")) p.K_pot = RadialPotential::radial(fn_of(s, "K"));
  if (s.has("functions", "source")) p.source = RadialPotential::radial(fn_of(s, "source"));
  return p;
}

LefOptions lef_options(const ProblemSpec& s) {
  LefOptions o;
  o.eps_b = s.number_or("numerics", "eps_b", o.eps_b);
  o.s_max = s.number_or("numerics", "s_max", o.s_max);
  o.probes = s.integer_or("numerics", "probes", o.probes);
  o.regularize_levels = s.integer_or("numerics", "regularize_levels", 0);
  return o;
}

void add_lef(Artifacts& a, const LefResult& r) {
  a.put("status", r.solved ? "Solved" : "NoSolution");
  if (r.solved) {
    a.files.emplace_back(".csv", solution_csv(r.sol));
    a.put("center_value", r.center);
    a.put("sup_norm", r.sup_norm);
    a.put("c1", r.c1);
    a.put("c2", r.c2);
    a.put("d_bounds", r.d_bounds ? "true" : "false");
    a.details["shoot_residual"] = r.shoot_residual;
    a.details["flagged"] = r.flagged;
    if (!r.k_levels.empty()) a.details["regularized_monotone"] = r.regularized_monotone;
  } else {
    io::Csv csv({"s", "F"});
    csv.comment("shooting map probes: zero position minus half-width");
    for (const auto& [sv, F] : r.probes) csv.row({sv, F});
    a.files.emplace_back(".csv", csv.str());
  }
  a.details["monotone_map"] = r.monotone_map;
  a.details["notes"] = r.sol.notes;
}

Artifacts dispatch(const ProblemSpec& s, const RunOptions& ro) {
  Artifacts a;
  const std::string& cmd = s.command;
  const double tol = s.number_or("numerics", "tol", 1e-8);
  const double ko_tol = s.number_or("numerics", "ko_tol", 1e-4);

  if (cmd == "check-ko") {
    put_verdict(a, "ko", keller_osserman(nl_of(s, "f"), ko_tol));
  } else if (cmd == "classify") {
    const expr::ScalarFn fn = fn_of(s, "fn");
    const std::string dir = s.text_or("problem", "direction", "tail");
    RealFn f = [&fn](double t) { return fn(t); };
    if (dir == "tail") {
      put_verdict(a, "integral", classify_tail_integral(f, s.number_or("problem", "lower", 1.0), tol));
    } else if (dir == "origin") {
      put_verdict(a, "integral", classify_origin_integral(f, s.number_or("problem", "upper", 1.0), tol));
    } else {
      throw ConfigError("direction must be tail or origin", s.get("problem", "direction").line);
    }
  } else if (cmd == "analyze-f") {
    const Nonlinearity f = nl_of(s, "f", false);
    for (const auto& [name, lim] : std::vector<std::pair<std::string, const Limit*>>{
             {"theta", &f.theta}, {"gamma", &f.gamma}, {"rho", &f.rho}, {"m", &f.m},
             {"Lambda", &f.Lambda}}) {
      a.put(name, limit_text(*lim));
      a.details[name] = limit_json(*lim);
    }
    if (f.singular) {
      a.put("alpha", f.singular->alpha);
      a.details["C0"] = f.singular->C0;
    }
    a.details["notes"] = f.notes;
  } else if (cmd == "ell") {
    const EllLimits e = ell_limits(fn_of(s, "k"), s.number_or("problem", "nu", 1.0));
    a.put("ell0", e.ell0);
    a.put("ell1", e.ell1);
    a.details["ell0_err"] = e.ell0_err;
    a.details["ell1_err"] = e.ell1_err;
    io::Csv csv({"t", "ratio", "slope"});
    for (std::size_t i = 0; i < e.t.size(); ++i) csv.row({e.t[i], e.ratio[i], e.slope[i]});
    a.files.emplace_back(".csv", csv.str());
  } else if (cmd == "make-k") {
    const KFunction k = k_of(s);
    a.put("kind", to_string(k.kind));
    a.put("ell1", k.ell1);
    if (k.ell1_predicted) a.put("ell1_predicted", *k.ell1_predicted);
    a.details["ell0"] = k.ell0;
    a.details["ell1_err"] = k.ell1_err;
    a.details["k"] = k.k.to_string();
  } else if (cmd == "profile" || cmd == "xi0") {
    const BlowupProfile p = profile_of(s, nl_of(s, "f"), k_of(s));
    a.put("variant", to_string(p.variant));
    a.put("xi0", p.xi0);
    a.put("ell1", p.kappa_ell1);
    a.details["roundtrip_err"] = p.max_roundtrip_err;
    if (cmd == "profile") {
      const ProfileChecks c = check_profile(p);
      a.details["h2_predicted"] = c.h2_predicted;
      a.details["decreasing"] = c.decreasing;
      a.files.emplace_back(".csv", profile_csv(p));
    }
  } else if (cmd == "chi") {
    TwoTermSpec t;
    t.rho = s.number("problem", "rho");
    t.zeta = s.number("problem", "zeta");
    t.theta = s.number("problem", "theta");
    t.ell_lower = s.number_or("problem", "ell_lower", 0.0);
    t.ell_upper = s.number_or("problem", "ell_upper", 0.0);
    t.c_tilde = s.number_or("problem", "c_tilde", 0.0);
    const std::string kind = s.text_or("problem", "two_term_case", "pure_power");
    if (kind == "pure_power") t.kind = TwoTermCase::PurePower;
    else if (kind == "eta_nonzero") t.kind = TwoTermCase::EtaNonzero;
    else if (kind == "eta_zero_tau") t.kind = TwoTermCase::EtaZeroTau;
    else throw ConfigError("unknown two_term_case '" + kind + "'", s.get("problem", "two_term_case").line);
    const TwoTerm r = chi_two_term(t);
    a.put("varpi", r.varpi);
    a.put("chi", r.chi);
    a.put("tau1", r.tau1);
    a.details["tie_warning"] = r.tie_warning;
  } else if (cmd == "solve-entire") {
    PicardOptions po;
    po.panels = s.integer_or("numerics", "panels", po.panels);
    po.max_iterations = s.integer_or("numerics", "max_iterations", po.max_iterations);
    if (s.has("functions", "phi")) po.phi = fn_of(s, "phi");
    if (s.has("problem", "Lambda")) po.Lambda = s.number("problem", "Lambda");
    const PicardResult r =
        picard_gradient_entire(fn_of(s, "psi"), nl_of(s, "f"), s.number("problem", "b0"),
                               s.number("problem", "R"), s.integer("problem", "N"), tol, po);
    add_solution(a, r.w);
    a.put("growth_ratio", r.growth_ratio);
    a.put("iterations", std::to_string(r.w.iterations));
    a.put("large_condition", verdict_name(r.large_condition));
    a.details["M"] = r.M;
    a.details["monotone"] = r.monotone;
    a.details["growth_bound"] = r.growth_bound;
    if (r.b_star) a.details["b_star"] = *r.b_star;
    if (r.ordered) a.details["ordered"] = *r.ordered;
  } else if (cmd == "solve-system") {
    SystemProblem sp{RadialPotential::radial(fn_of(s, "p")), RadialPotential::radial(fn_of(s, "q")),
                     nl_of(s, "f"), nl_of(s, "g"), s.number_or("problem", "a", 1.0),
                     s.number_or("problem", "b", 1.0)};
    SystemOptions so;
    so.panels = s.integer_or("numerics", "panels", so.panels);
    so.max_iterations = s.integer_or("numerics", "max_iterations", so.max_iterations);
    const SystemResult r =
        solve_system(sp, s.number("problem", "R"), s.integer("problem", "N"), tol, so);
    add_solution(a, r.sol);
    a.put("predicted", to_string(r.predicted));
    a.put("observed", to_string(r.observed));
    a.put("growth_ratio", r.growth_ratio);
    a.details["lower_bound"] = r.lower_bound;
    a.details["h3_holds"] = r.h3_holds;
    a.details["p_condition"] = verdict_json(r.p_condition);
    a.details["q_condition"] = verdict_json(r.q_condition);
  } else if (cmd == "blowup" || cmd == "rate") {
    const LogisticProblem p = logistic_of(s);
    const RadialSolution sol = boundary_blowup(p, s.number_or("numerics", "tol", 1e-10),
                                               blowup_options(s, ro.jobs));
    a.put("classification", to_string(sol.classification));
    double err = 0.0;
    int unresolved = 0;
    for (double e : sol.u_err) {
      if (std::isfinite(e)) err = std::max(err, e);
      else ++unresolved;
    }
    a.details["u_err_max"] = err;
    a.details["unresolved_points"] = unresolved;
    a.details["notes"] = sol.notes;
    if (s.has("functions", "k") || s.has("problem", "k_kind")) {
      const BlowupProfile prof = profile_of(s, p.f, k_of(s));
      const RateTable t = measure_boundary_rate(p, sol, prof);
      a.put("xi0", prof.xi0);
      a.put("rate_ratio", t.limit);
      a.put("drift", t.drift);
      if (cmd == "rate") {
        io::Csv csv({"d", "u_over_h", "u_over_xi0h"});
        for (const RateRow& r : t.rows) csv.row({r.d, r.u_over_h, r.u_over_xi0h});
        a.files.emplace_back(".csv", csv.str());
      }
    }
    if (cmd == "blowup") a.files.emplace_back(".csv", solution_csv(sol));
  } else if (cmd == "eigen") {
    const EigenResult e = lambda1_ball(s.integer("problem", "N"), s.number("problem", "R"), n1_mode_of(s));
    a.put("lambda1", e.lambda1);
    a.put("residual", e.residual);
    a.details["scaling_err"] = e.scaling_err;
    a.details["phi_end"] = e.phi_end;
    a.files.emplace_back(".csv", eigen_csv(e));
  } else if (cmd == "lef") {
    const LEFProblem p = lef_of(s);
    a.put("lambda_star", p.lambda_star());
    add_lef(a, solve_lef(p, lef_options(s)));
  } else if (cmd == "sweep") {
    const LEFProblem p = lef_of(s);
    const BifurcationDiagram d = sweep(p, s.list("numerics", "lambda_grid"), ro.jobs, lef_options(s));
    a.files.emplace_back(".csv", diagram_csv(d));
    a.put("lambda_star_theoretical", d.lambda_star_theoretical);
    if (d.bracket) {
      a.put("lambda_star_bracket", "[" + io::fmt(d.bracket->first) + "," + io::fmt(d.bracket->second) + "]");
    } else {
      a.put("lambda_star_bracket", "none");
    }
    a.put("monotone", d.monotone ? "true" : "false");
  } else if (cmd == "gelfand") {
    const expr::ScalarFn g = fn_of(s, "g");
    const int N = s.integer("problem", "N");
    const double R = s.number_or("problem", "R", 1.0);
    const EigenMode mode = n1_mode_of(s);
    const double a_lim = s.number_or("problem", "a_lim", 0.0);
    const double l1 = lambda1_ball(N, R, mode).lambda1;
    a.put("lambda1", l1);
    const LefOptions lo = lef_options(s);
    if (s.has("numerics", "lambda_grid") && s.has("numerics", "mu_grid")) {
      io::Csv csv({"lambda", "mu", "predicted", "solved"});
      int agree = 0, total = 0;
      for (double lam : s.list("numerics", "lambda_grid")) {
        for (double mu : s.list("numerics", "mu_grid")) {
          const bool pred = gelfand_solvable(lam, mu, a_lim, l1);
          const bool solved = lam > 0.0 ? solve_gelfand(g, lam, mu, N, R, mode, lo).solved : pred;
          csv.row(std::vector<std::string>{io::fmt(lam), io::fmt(mu), pred ? "1" : "0", solved ? "1" : "0"});
          ++total;
          agree += pred == solved;
        }
      }
      a.put("agree", std::to_string(agree) + "/" + std::to_string(total));
      a.files.emplace_back(".csv", csv.str());
    } else {
      const double lam = s.number("problem", "lambda"), mu = s.number_or("problem", "mu", 0.0);
      a.put("predicted", gelfand_solvable(lam, mu, a_lim, l1) ? "true" : "false");
      add_lef(a, solve_gelfand(g, lam, mu, N, R, mode, lo));
    }
  } else if (cmd == "young") {
    const YoungConstant y =
        young_constant(s.number_or("problem", "a_lim", 0.0), s.number("problem", "p"),
                       s.number("problem", "lambda1"));
    a.put("C", y.C);
    a.put("inq_holds", y.inq_holds ? "true" : "false");
    a.details["cc_lhs"] = y.cc_lhs;
    a.details["inq_max"] = y.inq_max;
    a.details["inq_derived_max"] = y.inq_derived_max;
  }
  return a;
}

std::string summary_line(const std::string& cmd, const Artifacts& a) {
  std::string line = "command=" + cmd;
  for (const auto& [k, v] : a.summary) line += " " + k + "=" + v;
  return line;
}

}  // namespace

int run(const ProblemSpec& spec, const RunOptions& ro, std::ostream& out, std::ostream& err) {
  const std::string dir = ro.out_dir;
  const std::string prefix = spec.has("output", "prefix") ? spec.text("output", "prefix") : spec.command;
  const bool want_csv = spec.text_or("output", "csv", "true") == "true";
  const bool want_json = spec.text_or("output", "json", "true") == "true";
  Artifacts a;
  try {
    validate(spec);
    a = dispatch(spec, ro);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "precondition: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    ordered_json j;
    j["command"] = spec.command;
    j["status"] = "failed";
    j["error"] = e.what();
    io::write_atomic(dir + "/" + prefix + ".error.json", j.dump(2) + "\n");
    err << "numerical failure: " << e.what() << "\n";
    out << "command=" << spec.command << " status=failed\n";
    return 3;
  }
  std::vector<std::string> written;
  if (want_csv) {
    for (const auto& [suffix, content] : a.files) {
      const std::string path = dir + "/" + prefix + suffix;
      io::write_atomic(path, content);
      written.push_back(path);
    }
  }
  if (want_json) {
    ordered_json j;
    j["command"] = spec.command;
    j["status"] = "ok";
    ordered_json sum = ordered_json::object();
    for (const auto& [k, v] : a.summary) sum[k] = v;
    j["summary"] = sum;
    j["details"] = a.details;
    const std::string path = dir + "/" + prefix + ".json";
    io::write_atomic(path, j.dump(2) + "\n");
    written.push_back(path);
  }
  if (ro.verbose) {
    for (const std::string& w : written) err << "wrote " << w << "\n";
  }
  out << summary_line(spec.command, a) << "\n";
  return 0;
}

}  // namespace sellab::cli
