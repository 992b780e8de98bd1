#include "tinysol/corpus.hpp"

#include <fstream>
#include <sstream>

#include "tinysol/parser.hpp"
#include "tinysol/printer.hpp"
#include "tinysol/typecheck.hpp"

namespace tinysol {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct Row {
  std::string fixture;
  Json checks = Json::array();

  void add(const std::string& check, const Json& expected, const Json& actual) {
    checks.push_back({{"check", check}, {"expected", expected}, {"actual", actual}, {"pass", expected == actual}});
  }
};

std::set<std::string> name_set(const Json& j) {
  std::set<std::string> out;
  for (const auto& x : j) out.insert(x.get<std::string>());
  return out;
}

FamilySpec family_of(const Json& check) {
  return check.contains("family") ? parse_family(check["family"].dump()) : FamilySpec{};
}

Transaction tx_of(const Json& check, const Blockchain& b) {
  if (check.contains("tx")) return parse_transaction(check["tx"].get<std::string>());
  if (b.transactions.empty()) throw ConfigError("check names no tx and the chain is empty");
  return b.transactions.front();
}

Json traces_of(const PropertyVerdict& v) {
  if (!v.witness) return nullptr;
  return Json::array({to_string(v.witness->first_observed), to_string(v.witness->second_observed)});
}

void run_fixture(const Json& exp, const Blockchain& b, Row& row) {
  const std::uint64_t fuel = exp.value("fuel", std::uint64_t{10'000});

  if (exp.contains("typecheck")) {
    const Json& t = exp["typecheck"];
    std::map<std::string, BaseTypeExpr> levels;
    if (t.contains("levels")) levels = parse_levels(t["levels"].dump(), b);
    TypeReport r = check_program(b, levels);
    row.add("typecheck", t["verdict"], r.accepted ? "accept" : "reject");
    if (t.contains("first_error"))
      row.add("typecheck.first_error", t["first_error"],
              r.errors.empty() ? Json(nullptr) : Json(r.errors.front().code));
    if (t.contains("failing_path")) {
      Json actual = nullptr;
      for (const auto& [label, d] : r.derivations)
        if (!d.ok) {
          actual = failing_path(d);
          break;
        }
      row.add("typecheck.failing_path", t["failing_path"], actual);
    }
  }

  if (exp.contains("run")) {
    const Json& t = exp["run"];
    ChainResult r = run_blockchain(b, t.value("fuel", fuel));
    Json statuses = Json::array();
    Json traces = Json::array();
    for (const auto& o : r.outcomes) {
      statuses.push_back(status_name(o.status));
      traces.push_back(to_string(o.trace));
    }
    row.add("run.statuses", t["statuses"], statuses);
    if (t.contains("traces")) row.add("run.traces", t["traces"], traces);
  }

  if (exp.contains("ci"))
    for (const auto& c : exp["ci"]) {
      ContextFamily fam = generate_context_family(b, name_set(c["trusted"]), family_of(c));
      const Transaction tx = tx_of(c, b);
      std::string actual = "holds";
      Json witness = nullptr;
      for (const auto& x : fam.trusted) {
        PropertyVerdict v = check_call_integrity(fam, x, tx, fuel);
        if (v.verdict == Verdict::Holds) continue;
        actual = verdict_name(v.verdict);
        witness = traces_of(v);
        break;
      }
      const std::string label = "ci[" + print_transaction(tx) + "]";
      row.add(label, c["verdict"], actual);
      if (c.contains("witness")) row.add(label + ".witness", c["witness"], witness);
    }

  if (exp.contains("ni"))
    for (const auto& c : exp["ni"]) {
      const std::set<std::string> low = name_set(c["low"]);
      ContextFamily fam = generate_context_family(b, low, family_of(c));
      std::map<std::string, Level> lambda;
      for (const auto& d : b.contracts)
        lambda[d.address] = low.count(d.address) ? b.lattice.bottom() : b.lattice.top();
      const Transaction tx = tx_of(c, b);
      PropertyVerdict v = check_noninterference(fam, lambda, tx, fuel);
      row.add("ni[" + print_transaction(tx) + "]", c["verdict"], verdict_name(v.verdict));
    }

  if (exp.contains("trusted_ci"))
    for (const auto& c : exp["trusted_ci"]) {
      TrustOptions opts;
      opts.fuel = fuel;
      TrustReport r = check_welltyped_implies_ci(b, name_set(c["trusted"]), family_of(c), opts);
      std::string label = "trusted_ci[";
      for (const auto& x : name_set(c["trusted"])) label += (label.size() > 5 ? "," : "") + x;
      label += "]";
      row.add(label + ".accepted", c["accepted"], r.accepted);
      if (c.contains("contradictions")) row.add(label + ".contradictions", c["contradictions"], r.contradictions);
    }
}

}  // namespace

Json run_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("MissingFixture: no corpus directory " + dir.string());
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".tsol") files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("empty corpus: no .tsol fixtures in " + dir.string());

  Json exp;
  try {
    exp = Json::parse(read_file(dir / "expectations.json"));
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("expectations.json: ") + e.what());
  }
  for (const auto& [name, v] : exp.items())
    if (std::find(files.begin(), files.end(), name) == files.end())
      throw ConfigError("MissingFixture: " + name + " is expected but not present");

  Json fixtures = Json::array();
  std::size_t passed = 0, failed = 0;
  for (const auto& name : files) {
    Row row{name};
    if (!exp.contains(name)) {
      row.add("expectations", "present", "missing");
    } else {
      try {
        Blockchain b = parse_program(read_file(dir / name), name);
        run_fixture(exp[name], b, row);
      } catch (const std::exception& e) {
        row.add("load", "ok", e.what());
      }
    }
    bool ok = true;
    for (const auto& c : row.checks) ok = ok && c["pass"].get<bool>();
    (ok ? passed : failed)++;
    fixtures.push_back({{"fixture", name}, {"pass", ok}, {"checks", row.checks}});
  }
  return {{"schema", kCorpusSchema}, {"fixtures", fixtures}, {"passed", passed}, {"failed", failed}};
}

}  // namespace tinysol
