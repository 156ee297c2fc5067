#include "friedrichs/config_io.hpp"

#include <fstream>
#include <sstream>

#include "friedrichs/error.hpp"

namespace friedrichs {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigParse, where + ": " + what);
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::array<double, 3> get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
  return {get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]"), get_number(j[2], where + "[2]")};
}

std::array<int, 3> get_ivec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 integers");
  return {get_int(j[0], where + "[0]"), get_int(j[1], where + "[1]"), get_int(j[2], where + "[2]")};
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(where, "unknown key '" + it.key() + "'");
  }
}

std::vector<FourierTerm> get_terms(const json& j, const std::string& where, bool allow_p) {
  if (!j.is_array()) fail(where, "expected an array of terms");
  std::vector<FourierTerm> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& t = j[i];
    if (!t.is_object()) fail(at, "expected an object");
    reject_unknown(t, {"index", "p_index", "value", "kind"}, at);
    if (!t.contains("index") || !t.contains("value")) fail(at, "terms need 'index' and 'value'");
    FourierTerm term;
    term.q_index = get_ivec3(t["index"], at + ".index");
    term.value = get_number(t["value"], at + ".value");
    if (t.contains("p_index")) {
      if (!allow_p) fail(at, "form-factor terms cannot depend on p");
      term.p_index = get_ivec3(t["p_index"], at + ".p_index");
    }
    if (t.contains("kind")) {
      const json& k = t["kind"];
      if (k == "cos") {
        term.kind = TermKind::Cos;
      } else if (k == "sin") {
        term.kind = TermKind::Sin;
      } else {
        fail(at + ".kind", "expected \"cos\" or \"sin\"");
      }
    }
    out.push_back(term);
  }
  return out;
}

json term_json(const FourierTerm& t, bool with_p) {
  json j;
  j["index"] = t.q_index;
  if (with_p) j["p_index"] = t.p_index;
  j["value"] = t.value;
  j["kind"] = t.kind == TermKind::Cos ? "cos" : "sin";
  return j;
}

}  // namespace

ConfigFile parse_config(const json& j) {
  if (!j.is_object()) fail("config", "top level must be an object");
  reject_unknown(j, {"family", "hopping", "phi", "w_terms", "phi_terms", "quadrature"}, "config");
  ConfigFile cfg;
  ModelConfig& m = cfg.model;
  const std::string family = j.value("family", std::string("two_particle"));
  if (family == "two_particle") {
    m.family = Family::TwoParticle;
  } else if (family == "trig_poly") {
    m.family = Family::TrigPoly;
  } else {
    fail("family", "expected \"two_particle\" or \"trig_poly\", got \"" + family + "\"");
  }
  if (j.contains("hopping")) m.hopping = get_vec3(j["hopping"], "hopping");
  if (j.contains("phi")) {
    const json& ph = j["phi"];
    if (!ph.is_object()) fail("phi", "expected an object");
    reject_unknown(ph, {"a0", "cos", "sin", "cos2", "sin2"}, "phi");
    // An explicit phi table starts from zero so that {"cos": [...]} means no constant.
    m.phi = FormFactorHarmonics{};
    m.phi.a0 = ph.contains("a0") ? get_number(ph["a0"], "phi.a0") : 0.0;
    if (ph.contains("cos")) m.phi.cos1 = get_vec3(ph["cos"], "phi.cos");
    if (ph.contains("sin")) m.phi.sin1 = get_vec3(ph["sin"], "phi.sin");
    if (ph.contains("cos2")) m.phi.cos2 = get_vec3(ph["cos2"], "phi.cos2");
    if (ph.contains("sin2")) m.phi.sin2 = get_vec3(ph["sin2"], "phi.sin2");
  }
  if (j.contains("w_terms")) m.w_terms = get_terms(j["w_terms"], "w_terms", true);
  if (j.contains("phi_terms")) m.phi_terms = get_terms(j["phi_terms"], "phi_terms", false);

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    if (!q.is_object()) fail("quadrature", "expected an object");
    reject_unknown(q,
                   {"grid", "rho", "radial_nodes", "angular_nodes", "bump_order", "plateau_fraction", "rel_tol",
                    "max_refinements"},
                   "quadrature");
    QuadratureSpec& s = cfg.quadrature;
    if (q.contains("grid")) s.grid = get_int(q["grid"], "quadrature.grid");
    if (q.contains("rho")) s.rho = get_number(q["rho"], "quadrature.rho");
    if (q.contains("radial_nodes")) s.radial_nodes = get_int(q["radial_nodes"], "quadrature.radial_nodes");
    if (q.contains("angular_nodes")) s.angular_nodes = get_int(q["angular_nodes"], "quadrature.angular_nodes");
    if (q.contains("bump_order")) s.bump_order = get_int(q["bump_order"], "quadrature.bump_order");
    if (q.contains("plateau_fraction")) {
      s.plateau_fraction = get_number(q["plateau_fraction"], "quadrature.plateau_fraction");
    }
    if (q.contains("rel_tol")) s.rel_tol = get_number(q["rel_tol"], "quadrature.rel_tol");
    if (q.contains("max_refinements")) {
      s.max_refinements = get_int(q["max_refinements"], "quadrature.max_refinements");
    }
    try {
      validate(s);
    } catch (const Error& e) {
      fail("quadrature", e.what());
    }
  }
  return cfg;
}

ConfigFile parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("config", e.what());
  }
  return parse_config(j);
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ModelConfig& m) {
  json j;
  j["family"] = m.family == Family::TwoParticle ? "two_particle" : "trig_poly";
  j["hopping"] = m.hopping;
  j["phi"] = {{"a0", m.phi.a0}, {"cos", m.phi.cos1}, {"sin", m.phi.sin1}, {"cos2", m.phi.cos2}, {"sin2", m.phi.sin2}};
  json w = json::array();
  for (const auto& t : m.w_terms) w.push_back(term_json(t, true));
  json f = json::array();
  for (const auto& t : m.phi_terms) f.push_back(term_json(t, false));
  j["w_terms"] = w;
  j["phi_terms"] = f;
  return j;
}

json to_json(const QuadratureSpec& s) {
  return {{"grid", s.grid},
          {"rho", s.rho},
          {"radial_nodes", s.radial_nodes},
          {"angular_nodes", s.angular_nodes},
          {"bump_order", s.bump_order},
          {"plateau_fraction", s.plateau_fraction},
          {"rel_tol", s.rel_tol},
          {"max_refinements", s.max_refinements}};
}

json to_json(const ConfigFile& cfg) {
  json j = to_json(cfg.model);
  j["quadrature"] = to_json(cfg.quadrature);
  return j;
}

std::string serialize_config(const ConfigFile& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace friedrichs
