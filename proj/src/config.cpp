#include "tclsde/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model",      "theta",        "T",          "deltas",         "delta_ref",
      "paths",      "phi",          "seed",       "coupling",       "clock",
      "alpha",      "lepage_terms", "lepage_drift", "delta",        "path_index",
      "newton.tol", "newton.max_iter", "jump.kind", "jump.c",         "ou.a1",
      "ou.a2",      "ou.a3",        "ou.a4",      "ou.x0",          "kubo.a",
      "kubo.sigma", "kubo.gamma",   "kubo.x1_0",  "kubo.x2_0"};
  return keys;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  const auto caret = token.find('^');
  if (caret != std::string_view::npos) {
    double base, exponent;
    if (!parse_number(token.substr(0, caret), base) || !parse_number(token.substr(caret + 1), exponent)) {
      return false;
    }
    out = std::pow(base, exponent);
    return std::isfinite(out);
  }
  const std::string s(token);
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

ConfigValue parse_value(std::string_view token, std::size_t line) {
  token = trim(token);
  ConfigValue v;
  if (token.empty()) parse_error(line, "missing value");
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') parse_error(line, "unterminated string");
    v.kind = ConfigValue::Kind::string;
    v.text = std::string(token.substr(1, token.size() - 2));
    return v;
  }
  if (token.front() == '[') {
    if (token.back() != ']') parse_error(line, "unterminated list");
    v.kind = ConfigValue::Kind::list;
    v.text = std::string(token);
    std::string_view body = trim(token.substr(1, token.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      double x;
      if (!parse_number(item, x)) parse_error(line, "list items must be numbers");
      v.list.push_back(x);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) parse_error(line, "trailing comma in list");
    }
    return v;
  }
  if (token == "true" || token == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.boolean = token == "true";
    v.text = std::string(token);
    return v;
  }
  if (parse_number(token, v.number)) {
    v.kind = ConfigValue::Kind::number;
    v.text = std::string(token);
    return v;
  }
  for (char c : token) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      parse_error(line, "cannot parse value '" + std::string(token) + "'");
    }
  }
  v.kind = ConfigValue::Kind::string;
  v.text = std::string(token);
  return v;
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

ConfigValue from_json(const nlohmann::json& j, const std::string& key) {
  ConfigValue v;
  if (j.is_boolean()) {
    v.kind = ConfigValue::Kind::boolean;
    v.boolean = j.get<bool>();
    v.text = v.boolean ? "true" : "false";
  } else if (j.is_number()) {
    v.kind = ConfigValue::Kind::number;
    v.number = j.get<double>();
    v.text = j.dump();
  } else if (j.is_string()) {
    v.kind = ConfigValue::Kind::string;
    v.text = j.get<std::string>();
  } else if (j.is_array()) {
    v.kind = ConfigValue::Kind::list;
    v.text = j.dump();
    for (const auto& item : j) {
      if (!item.is_number()) {
        throw Error(ErrorCode::ParseError, "manifest key '" + key + "' must be a list of numbers");
      }
      v.list.push_back(item.get<double>());
    }
  } else {
    throw Error(ErrorCode::ParseError, "manifest key '" + key + "' has an unsupported type");
  }
  return v;
}

// Typed access that records problems instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {
    for (const auto& [key, value] : doc.entries()) {
      if (!known_keys().count(key)) issues.push_back("unknown key '" + key + "'");
    }
  }

  double number(const std::string& key, double fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::number) {
      issues.push_back(key + " must be a number");
      return fallback;
    }
    return v->number;
  }

  long long integer(const std::string& key, long long fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::number || v->number != std::floor(v->number)) {
      issues.push_back(key + " must be an integer");
      return fallback;
    }
    return static_cast<long long>(v->number);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    const std::string& t = v->text;
    if (v->kind != ConfigValue::Kind::number || t.empty() ||
        t.find_first_not_of("0123456789") != std::string::npos || t.size() > 20) {
      issues.push_back(key + " must be a decimal 64-bit unsigned integer");
      return fallback;
    }
    try {
      return std::stoull(t);
    } catch (const std::exception&) {
      issues.push_back(key + " does not fit in 64 bits");
      return fallback;
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::boolean) {
      issues.push_back(key + " must be true or false");
      return fallback;
    }
    return v->boolean;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::string) {
      issues.push_back(key + " must be a string");
      return fallback;
    }
    return v->text;
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind == ConfigValue::Kind::number) return {v->number};
    if (v->kind != ConfigValue::Kind::list) {
      issues.push_back(key + " must be a list of numbers");
      return fallback;
    }
    return v->list;
  }

  template <typename Enum, typename Parse>
  Enum choice(const std::string& key, Enum fallback, Parse&& parse) {
    const std::string s = string(key, "");
    if (s.empty()) return fallback;
    try {
      return parse(s);
    } catch (const Error& e) {
      issues.push_back(e.what());
      return fallback;
    }
  }

  std::vector<std::string> issues;

 private:
  const ConfigValue* find(const std::string& key) const {
    const auto it = doc_.entries().find(key);
    return it == doc_.entries().end() ? nullptr : &it->second;
  }
  const ConfigDocument& doc_;
};

ModelConfig read_model(Reader& r) {
  ModelConfig m;
  m.id = r.choice("model", ModelId::ou, model_id_from_string);
  m.ou.a1 = r.number("ou.a1", m.ou.a1);
  m.ou.a2 = r.number("ou.a2", m.ou.a2);
  m.ou.a3 = r.number("ou.a3", m.ou.a3);
  m.ou.a4 = r.number("ou.a4", m.ou.a4);
  m.ou.x0 = r.number("ou.x0", m.ou.x0);
  m.kubo.a = r.number("kubo.a", m.kubo.a);
  m.kubo.sigma = r.number("kubo.sigma", m.kubo.sigma);
  m.kubo.gamma = r.number("kubo.gamma", m.kubo.gamma);
  m.kubo.x1_0 = r.number("kubo.x1_0", m.kubo.x1_0);
  m.kubo.x2_0 = r.number("kubo.x2_0", m.kubo.x2_0);
  m.jump_kind = r.choice("jump.kind", MeasureKind::paper_gaussian, measure_kind_from_string);
  m.jump_c = r.number("jump.c", m.jump_c);
  if (!(m.jump_c > 0.0)) r.issues.push_back("jump.c must be positive");
  return m;
}

bool read_identity_clock(Reader& r) {
  const std::string clock = r.string("clock", "subordinator");
  if (clock == "identity") return true;
  if (clock != "subordinator") r.issues.push_back("clock must be 'subordinator' or 'identity'");
  return false;
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& s : from) {
    if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
  }
}

std::string format_list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_double(xs[i]);
  }
  return out + "]";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    const nlohmann::json& cfg = j.contains("config") ? j.at("config") : j;
    if (!cfg.is_object()) throw Error(ErrorCode::ParseError, "manifest 'config' must be an object");
    for (const auto& [key, value] : cfg.items()) doc.entries_[key] = from_json(value, key);
  } else {
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string stripped = strip_comment(raw);
      const std::string_view line = trim(stripped);
      if (line.empty()) continue;
      if (line.front() == '[' && line.find('=') == std::string_view::npos) {
        if (line.back() != ']') parse_error(line_no, "malformed section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (section.empty()) parse_error(line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) parse_error(line_no, "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) parse_error(line_no, "empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (doc.entries_.count(full)) parse_error(line_no, "duplicate key '" + full + "'");
      doc.entries_[full] = parse_value(line.substr(eq + 1), line_no);
    }
  }
  if (doc.entries_.empty()) throw Error(ErrorCode::ParseError, "configuration is empty");
  return doc;
}

ConfigDocument ConfigDocument::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ConfigDocument::set(const std::string& key, std::string_view value_text) {
  entries_[key] = parse_value(value_text, 0);
}

ModelConfig load_model_config(const ConfigDocument& doc) {
  Reader r(doc);
  auto m = read_model(r);
  if (!r.issues.empty()) throw ValidationError(r.issues);
  return m;
}

ExperimentPlan load_experiment_plan(const ConfigDocument& doc) {
  Reader r(doc);
  ExperimentPlan plan;
  plan.model = read_model(r);
  plan.theta = r.number("theta", plan.theta);
  plan.T = r.number("T", plan.T);
  plan.delta_ladder = r.list("deltas", {0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9});
  plan.delta_reference = r.number("delta_ref", 0x1p-12);
  const long long paths = r.integer("paths", 10000);
  if (paths < 1) {
    r.issues.push_back("paths must be >= 1");
  } else {
    plan.paths = static_cast<std::size_t>(paths);
  }
  plan.phi = r.string("phi", plan.model.id == ModelId::kubo ? "product" : "exp_neg_square");
  plan.seed = r.u64("seed", plan.seed);
  plan.coupling = r.choice("coupling", Coupling::coupled, coupling_from_string);
  plan.identity_clock = read_identity_clock(r);
  plan.alpha = r.number("alpha", plan.alpha);
  plan.lepage_terms = static_cast<int>(r.integer("lepage_terms", plan.lepage_terms));
  plan.lepage_drift = r.boolean("lepage_drift", plan.lepage_drift);
  plan.newton_tol = r.number("newton.tol", plan.newton_tol);
  plan.newton_max_iter = static_cast<int>(r.integer("newton.max_iter", plan.newton_max_iter));
  append_unique(r.issues, plan_issues(plan));
  if (!r.issues.empty()) throw ValidationError(r.issues);
  return plan;
}

PathPlan load_path_plan(const ConfigDocument& doc) {
  Reader r(doc);
  PathPlan plan;
  plan.model = read_model(r);
  auto& p = plan.path;
  p.theta.theta = r.number("theta", 0.5);
  p.theta.delta = r.number("delta", 0x1p-10);
  p.theta.newton_tol = r.number("newton.tol", 1e-5);
  p.theta.newton_max_iter = static_cast<int>(r.integer("newton.max_iter", 50));
  p.T = r.number("T", 1.0);
  p.alpha = r.number("alpha", 0.8);
  p.lepage_terms = static_cast<int>(r.integer("lepage_terms", 1000));
  p.lepage_drift = r.boolean("lepage_drift", true);
  p.identity_clock = read_identity_clock(r);
  p.seed = r.u64("seed", 0);
  p.path_index = r.u64("path_index", 0);

  if (!(p.T > 0.0)) r.issues.push_back("T must be positive");
  if (!p.identity_clock && !(p.alpha > 0.0 && p.alpha < 1.0)) r.issues.push_back("alpha must lie in (0, 1)");
  if (p.lepage_terms < 1) r.issues.push_back("lepage_terms must be >= 1");
  try {
    check_well_posed(build_model(plan.model), p.theta);
  } catch (const ValidationError& e) {
    append_unique(r.issues, e.issues());
  } catch (const Error& e) {
    r.issues.push_back(std::string("model: ") + e.what());
  }
  if (!r.issues.empty()) throw ValidationError(r.issues);
  return plan;
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentPlan& plan) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("model", to_string(plan.model.id));
  if (plan.model.id == ModelId::ou) {
    e.emplace_back("ou.a1", format_double(plan.model.ou.a1));
    e.emplace_back("ou.a2", format_double(plan.model.ou.a2));
    e.emplace_back("ou.a3", format_double(plan.model.ou.a3));
    e.emplace_back("ou.a4", format_double(plan.model.ou.a4));
    e.emplace_back("ou.x0", format_double(plan.model.ou.x0));
  } else {
    e.emplace_back("kubo.a", format_double(plan.model.kubo.a));
    e.emplace_back("kubo.sigma", format_double(plan.model.kubo.sigma));
    e.emplace_back("kubo.gamma", format_double(plan.model.kubo.gamma));
    e.emplace_back("kubo.x1_0", format_double(plan.model.kubo.x1_0));
    e.emplace_back("kubo.x2_0", format_double(plan.model.kubo.x2_0));
  }
  e.emplace_back("jump.kind", to_string(plan.model.jump_kind));
  e.emplace_back("jump.c", format_double(plan.model.jump_c));
  e.emplace_back("theta", format_double(plan.theta));
  e.emplace_back("T", format_double(plan.T));
  e.emplace_back("deltas", format_list(plan.delta_ladder));
  e.emplace_back("delta_ref", format_double(plan.delta_reference));
  e.emplace_back("paths", std::to_string(plan.paths));
  e.emplace_back("phi", plan.phi);
  e.emplace_back("seed", std::to_string(plan.seed));
  e.emplace_back("coupling", to_string(plan.coupling));
  e.emplace_back("clock", plan.identity_clock ? "identity" : "subordinator");
  e.emplace_back("alpha", format_double(plan.alpha));
  e.emplace_back("lepage_terms", std::to_string(plan.lepage_terms));
  e.emplace_back("lepage_drift", plan.lepage_drift ? "true" : "false");
  e.emplace_back("newton.tol", format_double(plan.newton_tol));
  e.emplace_back("newton.max_iter", std::to_string(plan.newton_max_iter));
  return e;
}

std::string to_config_text(const ExperimentPlan& plan) {
  std::string out;
  for (const auto& [key, value] : resolved_entries(plan)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace tclsde
