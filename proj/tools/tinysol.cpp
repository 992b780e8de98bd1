// tinysol: parse, type-check, run and property-check TinySol programs.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tinysol/corpus.hpp"
#include "tinysol/json_io.hpp"
#include "tinysol/parser.hpp"
#include "tinysol/printer.hpp"
#include "tinysol/props.hpp"
#include "tinysol/typecheck.hpp"

using namespace tinysol;

namespace {

struct Config {
  std::string input;
  std::string lattice;
  std::string levels;
  std::string family;
  std::string trusted;
  std::string tx;
  std::string dump_state;
  std::string trace_out;
  std::string derivation_out;
  std::string corpus_dir = "tests/corpus";
  std::uint64_t fuel = kDefaultFuel;
  std::uint64_t seed = 0;
  bool strict_impl = false;
  bool permissive_this = false;
  bool json = false;
  bool print = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Blockchain load(const Config& c) {
  Blockchain b = parse_program(read_file(c.input), c.input);
  if (!c.lattice.empty()) {
    b.lattice = parse_lattice(read_file(c.lattice), c.lattice);
    b.lattice_explicit = true;
  }
  return b;
}

std::set<std::string> split_names(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

Transaction the_tx(const Config& c, const Blockchain& b) {
  if (!c.tx.empty()) return parse_transaction(c.tx);
  if (b.transactions.size() == 1) return b.transactions.front();
  throw UsageError("--tx is required unless the chain has exactly one transaction");
}

// ---- subcommands: each returns its report ---------------------------------

Json cmd_parse(const Config& c) {
  Blockchain b = load(c);
  Json diags = Json::array();
  for (const auto& d : validate_program(b)) diags.push_back(to_json(d));
  if (!diags.empty())
    return {{"schema", kErrorSchema}, {"code", "InvalidProgram"}, {"message", "structural errors"},
            {"diagnostics", diags}};
  Json contracts = Json::array(), ifaces = Json::array(), txs = Json::array();
  for (const auto& x : b.contracts) contracts.push_back(x.address);
  for (const auto& i : b.interfaces) ifaces.push_back(i.name);
  for (const auto& t : b.transactions) txs.push_back(print_transaction(t));
  Json out = {{"schema", kParseSchema}, {"contracts", contracts}, {"interfaces", ifaces},
              {"transactions", txs}, {"lattice", print_lattice(b.lattice)}};
  if (c.print) out["program"] = print_program(b);
  return out;
}

Json cmd_typecheck(const Config& c) {
  Blockchain b = load(c);
  std::map<std::string, BaseTypeExpr> levels;
  if (!c.levels.empty()) levels = parse_levels(read_file(c.levels), b);
  TypeReport r = check_program(b, levels, TypeOptions{c.permissive_this, c.strict_impl});
  Json errors = Json::array(), warnings = Json::array(), derivs = Json::array();
  for (const auto& d : r.errors) errors.push_back(to_json(d));
  for (const auto& d : r.warnings) warnings.push_back(to_json(d));
  for (const auto& [label, d] : r.derivations) derivs.push_back({{"label", label}, {"tree", to_json(d)}});
  Json out = {{"schema", kDerivationSchema}, {"accepted", r.accepted}, {"errors", errors},
              {"warnings", warnings}, {"derivations", derivs}};
  if (!c.derivation_out.empty()) write_json(c.derivation_out, out);
  if (!c.json) {
    std::cout << (r.accepted ? "accepted" : "rejected") << "\n";
    for (const auto& d : r.errors) std::cout << "error " << d.code << ": " << d.message << "\n";
    for (const auto& d : r.warnings) std::cout << "warning " << d.code << ": " << d.message << "\n";
    for (const auto& [label, d] : r.derivations)
      if (!d.ok) std::cout << "\n" << label << ":\n" << render(d);
  }
  return out;
}

Json cmd_run(const Config& c, bool trace_only) {
  Blockchain b = load(c);
  ChainResult r = run_blockchain(b, c.fuel);
  Json txs = Json::array();
  Trace all;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const Outcome& o = r.outcomes[i];
    txs.push_back({{"tx", print_transaction(b.transactions[i])}, {"outcome", to_json(o)}});
    all.insert(all.end(), o.trace.begin(), o.trace.end());
    if (!c.json) {
      std::cout << i + 1 << " " << print_transaction(b.transactions[i]) << " " << status_name(o.status);
      if (o.reason) std::cout << " (" << reason_name(*o.reason) << ")";
      if (!trace_only && !o.detail.empty()) std::cout << ": " << o.detail;
      std::cout << "\n";
      for (const auto& rec : o.trace) std::cout << "  " << to_string(rec) << "\n";
    }
  }
  if (!c.dump_state.empty()) write_json(c.dump_state, state_document(r.final_state, r.methods));
  if (!c.trace_out.empty()) write_json(c.trace_out, to_json(all));
  Json out = {{"schema", kRunSchema}, {"fuel", c.fuel}, {"transactions", txs}};
  if (!trace_only) out["final_state"] = to_json(r.final_state);
  return out;
}

// Worst of several verdicts: inconclusive, then violated, then holds.
int severity(Verdict v) { return v == Verdict::Inconclusive ? 2 : v == Verdict::Violated ? 1 : 0; }

Json cmd_check(const Config& c, bool ci) {
  Blockchain b = load(c);
  const std::set<std::string> trusted = split_names(c.trusted);
  if (trusted.empty()) throw UsageError("--trusted needs at least one address");
  FamilySpec spec;
  if (!c.family.empty()) spec = parse_family(read_file(c.family));
  const Transaction tx = the_tx(c, b);
  ContextFamily fam = generate_context_family(b, trusted, spec, c.seed);
  const std::string text = print_program(b);

  Json out;
  if (ci) {
    Json per = Json::object();
    int worst = -1;
    for (const auto& x : trusted) {
      PropertyVerdict v = check_call_integrity(fam, x, tx, c.fuel);
      Json doc = verdict_document("CI", text, v, x, tx, c.fuel);
      per[x] = doc["verdict"];
      if (severity(v.verdict) > worst) {
        worst = severity(v.verdict);
        out = doc;
      }
    }
    out["subject"] = c.trusted;
    out["per_contract"] = per;
  } else {
    std::map<std::string, Level> lambda;
    for (const auto& d : b.contracts)
      lambda[d.address] = trusted.count(d.address) ? b.lattice.bottom() : b.lattice.top();
    PropertyVerdict v = check_noninterference(fam, lambda, tx, c.fuel);
    out = verdict_document("NI", text, v, c.trusted, tx, c.fuel);
  }
  out["contexts_enumerated"] = fam.enumerated;
  if (!c.json) {
    std::cout << (ci ? "call integrity" : "noninterference") << " for " << c.trusted << " under "
              << print_transaction(tx) << ": " << out["verdict"].get<std::string>() << " over "
              << out["contexts_checked"] << " contexts";
    if (out["degraded"].get<bool>()) std::cout << " (degraded)";
    std::cout << "\n";
    for (const auto& n : out["notes"]) std::cout << "  note: " << n.get<std::string>() << "\n";
    if (!out["witness"].is_null()) {
      const Json& w = out["witness"];
      std::cout << "  witness: " << w["detail"].get<std::string>() << "\n"
                << "    context " << w["first"]["context"]["label"].get<std::string>() << "\n"
                << "    context " << w["second"]["context"]["label"].get<std::string>() << "\n";
    }
  }
  return out;
}

Json cmd_corpus(const Config& c) {
  Json r = run_corpus(c.corpus_dir);
  if (!c.json) {
    for (const auto& f : r["fixtures"]) {
      std::cout << (f["pass"].get<bool>() ? "PASS " : "FAIL ") << f["fixture"].get<std::string>() << "\n";
      for (const auto& k : f["checks"])
        std::cout << "  " << (k["pass"].get<bool>() ? "ok   " : "FAIL ") << k["check"].get<std::string>()
                  << " expected " << k["expected"].dump() << " got " << k["actual"].dump() << "\n";
    }
    std::cout << r["passed"] << " passed, " << r["failed"] << " failed\n";
  }
  return r;
}

Json error_doc(const std::string& code, const std::string& message) {
  return {{"schema", kErrorSchema}, {"code", code}, {"message", message}};
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"TinySol toolchain: parser, evaluator, security type checker, property checkers"};
  app.require_subcommand(1, 1);
  app.add_flag("--json", c.json, "Print the JSON report instead of text");

  auto input = [&](CLI::App* s) { s->add_option("file", c.input, "Program (.tsol)")->required(); };
  auto fuel = [&](CLI::App* s) {
    s->add_option("--fuel", c.fuel, "Rule applications allowed per transaction")->check(CLI::PositiveNumber);
  };

  auto* parse = app.add_subcommand("parse", "Parse and validate a program");
  input(parse);
  parse->add_flag("--print", c.print, "Include the pretty-printed program");

  auto* typecheck = app.add_subcommand("typecheck", "Type-check a program");
  input(typecheck);
  typecheck->add_option("--lattice", c.lattice, "Lattice file (.lat)");
  typecheck->add_option("--levels", c.levels, "levels.json: address -> interface instance");
  typecheck->add_flag("--strict-impl", c.strict_impl, "Missing implementations are errors");
  typecheck->add_flag("--permissive-this", c.permissive_this, "Let `this` be subsumed");
  typecheck->add_option("--emit-derivation", c.derivation_out, "Write derivations as JSON");

  auto* run = app.add_subcommand("run", "Run the chain");
  input(run);
  fuel(run);
  run->add_option("--dump-state", c.dump_state, "Write the final state and methods as JSON");
  run->add_option("--trace", c.trace_out, "Write the call trace as JSON");

  auto* trace = app.add_subcommand("trace", "Run the chain and print its call traces");
  input(trace);
  fuel(trace);

  auto* ci = app.add_subcommand("check-ci", "Check call integrity over a context family");
  auto* ni = app.add_subcommand("check-ni", "Check noninterference over a context family");
  for (auto* s : {ci, ni}) {
    input(s);
    fuel(s);
    s->add_option("--trusted", c.trusted, "Trusted (low) addresses, comma separated")->required();
    s->add_option("--family", c.family, "family.json: field domains and body alternatives");
    s->add_option("--tx", c.tx, "Transaction, e.g. \"A->X.f(1):0\"");
    s->add_option("--seed", c.seed, "Sampling seed for large families");
  }

  auto* corpus = app.add_subcommand("corpus", "Check every fixture against its expectations");
  corpus->add_option("dir", c.corpus_dir, "Fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Json report;
  try {
    if (parse->parsed())
      report = cmd_parse(c);
    else if (typecheck->parsed())
      report = cmd_typecheck(c);
    else if (run->parsed())
      report = cmd_run(c, false);
    else if (trace->parsed())
      report = cmd_run(c, true);
    else if (ci->parsed())
      report = cmd_check(c, true);
    else if (ni->parsed())
      report = cmd_check(c, false);
    else
      report = cmd_corpus(c);
  } catch (const ParseError& e) {
    report = error_doc(e.code(), e.what());
  } catch (const LatticeError& e) {
    report = error_doc("LatticeError", e.what());
  } catch (const ConfigError& e) {
    report = error_doc("ConfigError", e.what());
  } catch (const PropsError& e) {
    report = error_doc(e.code(), e.what());
  } catch (const UsageError& e) {
    report = error_doc("UsageError", e.what());
  }

  if (c.json)
    std::cout << report.dump(2) << "\n";
  else if (report["schema"] == kErrorSchema) {
    std::cerr << "error " << report["code"].get<std::string>() << ": " << report["message"].get<std::string>() << "\n";
    if (report.contains("diagnostics"))
      for (const auto& d : report["diagnostics"]) std::cerr << "  " << d["message"].get<std::string>() << "\n";
  } else if (parse->parsed()) {
    std::cout << "ok: " << report["contracts"].size() << " contracts, " << report["transactions"].size()
              << " transactions\n";
    if (c.print) std::cout << report["program"].get<std::string>();
  }
  return exit_code_for(report);
}
