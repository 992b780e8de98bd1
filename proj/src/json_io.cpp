#include "tinysol/json_io.hpp"

#include "tinysol/parser.hpp"
#include "tinysol/printer.hpp"

namespace tinysol {

Json to_json(const Value& v) {
  if (is_nat(v)) return as_nat(v);
  if (is_bool(v)) return as_bool(v);
  return as_addr(v);
}

Value value_from_json(const Json& j) {
  if (j.is_boolean()) return boolean(j.get<bool>());
  if (j.is_number_unsigned()) return nat(j.get<std::uint64_t>());
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError("negative value " + j.dump());
    return nat(static_cast<std::uint64_t>(j.get<std::int64_t>()));
  }
  if (j.is_string()) return addr(j.get<std::string>());
  throw ConfigError("not a value: " + j.dump());
}

Json to_json(const CallRecord& r) {
  Json args = Json::array();
  for (const auto& a : r.args) args.push_back(to_json(a));
  return {{"caller", r.caller}, {"callee", r.callee}, {"method", r.method}, {"args", args},
          {"amount", r.amount}};
}

Json to_json(const Trace& t) {
  Json out = Json::array();
  for (const auto& r : t) out.push_back(to_json(r));
  return out;
}

Json to_json(const State& s) {
  Json out = Json::object();
  for (const auto& [x, fields] : s) {
    Json f = Json::object();
    for (const auto& [p, v] : fields.items())
      if (!f.contains(p)) f[p] = to_json(v);
    out[x] = f;
  }
  return out;
}

Json to_json(const MethodTable& t) {
  Json out = Json::object();
  for (const auto& [x, methods] : t) {
    Json m = Json::object();
    for (const auto& [f, def] : methods.items())
      if (!m.contains(f)) m[f] = {{"params", def.params}, {"body", print_stmt(*def.body)}};
    out[x] = m;
  }
  return out;
}

Json to_json(const Transaction& t) {
  Json args = Json::array();
  for (const auto& a : t.args) args.push_back(to_json(a));
  return {{"text", print_transaction(t)}, {"caller", t.caller}, {"callee", t.callee},
          {"method", t.method},           {"args", args},         {"amount", t.amount}};
}

Json to_json(const Outcome& o) {
  Json out = {{"status", status_name(o.status)}, {"trace", to_json(o.trace)}, {"fuel_used", o.fuel_used}};
  if (o.reason) out["reason"] = reason_name(*o.reason);
  if (!o.detail.empty()) out["detail"] = o.detail;
  return out;
}

Json to_json(const Derivation& d) {
  Json out = {{"rule", d.rule}, {"judgment", d.judgment}, {"ok", d.ok}};
  if (!d.failure.empty()) out["failure"] = d.failure;
  if (!d.code.empty()) out["code"] = d.code;
  Json kids = Json::array();
  for (const auto& c : d.children) kids.push_back(to_json(c));
  out["children"] = kids;
  return out;
}

Json to_json(const Diagnostic& d) {
  Json out = {{"code", d.code}, {"message", d.message}, {"severity", d.warning ? "warning" : "error"}};
  if (d.span.line > 0) {
    out["file"] = d.span.file;
    out["line"] = d.span.line;
    out["column"] = d.span.column;
  }
  return out;
}

Json to_json(const Context& c) {
  return {{"label", c.label}, {"state", to_json(c.state)}, {"methods", to_json(c.methods)}};
}

Json state_document(const State& s, const MethodTable& t) {
  return {{"schema", kStateSchema}, {"state", to_json(s)}, {"methods", to_json(t)}};
}

namespace {

Json witness_json(const Witness& w, const std::string& program_text, std::uint64_t fuel, bool traces) {
  Json side1 = {{"index", w.first}, {"context", to_json(w.first_context)}, {"outcome", to_json(w.first_run)},
                {"final_state", to_json(w.first_run.state)}};
  Json side2 = {{"index", w.second}, {"context", to_json(w.second_context)},
                {"outcome", to_json(w.second_run)}, {"final_state", to_json(w.second_run.state)}};
  if (traces) {
    side1["projection"] = to_json(w.first_observed);
    side2["projection"] = to_json(w.second_observed);
  }
  return {{"detail", w.detail},
          {"first", side1},
          {"second", side2},
          {"replay", {{"program", program_text}, {"tx", print_transaction(w.tx)}, {"fuel", fuel}}}};
}

}  // namespace

Json verdict_document(const std::string& property, const std::string& program_text,
                      const PropertyVerdict& v, const std::string& subject, const Transaction& t,
                      std::uint64_t fuel) {
  Json out = {{"schema", kVerdictSchema},
              {"property", property},
              {"subject", subject},
              {"tx", print_transaction(t)},
              {"fuel", fuel},
              {"verdict", verdict_name(v.verdict)},
              {"degraded", v.degraded},
              {"contexts_checked", v.contexts_checked},
              {"notes", v.notes}};
  out["witness"] = v.witness ? witness_json(*v.witness, program_text, fuel, property == "CI") : Json(nullptr);
  return out;
}

std::map<std::string, BaseTypeExpr> parse_levels(const std::string& text, const Blockchain& b) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("levels: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("levels: expected an object of address assignments");
  std::map<std::string, BaseTypeExpr> out;
  for (const auto& [x, v] : j.items()) {
    const ContractDecl* c = b.contract(x);
    if (!c) throw ConfigError("levels: no contract " + x);
    BaseTypeExpr t;
    if (v.is_object()) {
      if (!v.contains("level") || !v["level"].is_string())
        throw ConfigError("levels: " + x + " needs a string \"level\"");
      t.level = v["level"].get<std::string>();
      if (v.contains("interface")) {
        if (!v["interface"].is_string()) throw ConfigError("levels: " + x + ": \"interface\" is not a string");
        t.iface = v["interface"].get<std::string>();
      }
    } else if (v.is_string()) {
      try {
        t = parse_base_type(v.get<std::string>(), "levels.json");
      } catch (const std::exception& e) {
        throw ConfigError("levels: " + x + ": " + e.what());
      }
    } else {
      throw ConfigError("levels: " + x + ": expected a string or an object");
    }
    if (t.iface.empty()) {
      if (!c->type || c->type->iface.empty())
        throw ConfigError("levels: " + x + " has no source interface; give \"I<" + t.level + ">\"");
      t.iface = c->type->iface;
    }
    out[x] = t;
  }
  return out;
}

FamilySpec parse_family(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("family: expected an object");
  FamilySpec spec;
  for (const auto& [key, v] : j.items()) {
    if (key != "fields" && key != "bodies") throw ConfigError("family: unknown key " + key);
    if (!v.is_object()) throw ConfigError("family: " + key + " must be an object");
  }
  if (j.contains("fields"))
    for (const auto& [member, dom] : j["fields"].items()) {
      if (!dom.is_array()) throw ConfigError("family: fields." + member + " must be an array");
      auto& out = spec.fields[member];
      for (const auto& x : dom) out.push_back(value_from_json(x));
    }
  if (j.contains("bodies"))
    for (const auto& [member, alts] : j["bodies"].items()) {
      if (!alts.is_array()) throw ConfigError("family: bodies." + member + " must be an array");
      auto& out = spec.bodies[member];
      for (const auto& x : alts) {
        if (!x.is_string()) throw ConfigError("family: bodies." + member + " holds a non-string");
        out.push_back(x.get<std::string>());
      }
    }
  return spec;
}

int exit_code_for(const Json& report) {
  if (!report.is_object() || !report.contains("schema")) return 2;
  const std::string schema = report["schema"].get<std::string>();
  if (schema == kErrorSchema) return 2;
  if (schema == kParseSchema || schema == kStateSchema) return 0;
  if (schema == kDerivationSchema) return report.value("accepted", false) ? 0 : 1;
  if (schema == kVerdictSchema) {
    const std::string v = report.value("verdict", "");
    if (v == "holds") return 0;
    if (v == "violated") return 1;
    return 3;
  }
  if (schema == kRunSchema) {
    int code = 0;
    for (const auto& t : report["transactions"]) {
      const std::string s = t["outcome"]["status"].get<std::string>();
      if (s == "OutOfFuel") return 3;
      if (s == "Thrown" || s == "Stuck") code = 1;
    }
    return code;
  }
  if (schema == kCorpusSchema) return report.value("failed", 0) == 0 ? 0 : 1;
  return 2;
}

}  // namespace tinysol
