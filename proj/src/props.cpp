#include "tinysol/props.hpp"

#include <algorithm>
#include <random>

#include "tinysol/equivalence.hpp"
#include "tinysol/kinds.hpp"
#include "tinysol/parser.hpp"
#include "tinysol/printer.hpp"

namespace tinysol {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::pair<std::string, std::string> split_member(const std::string& key) {
  auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
    throw PropsError("UnknownMember", "expected Contract.member, got '" + key + "'");
  return {key.substr(0, dot), key.substr(dot + 1)};
}

// One varying member and its alternatives.
struct Axis {
  std::string contract;
  std::string member;
  bool field = true;
  std::vector<Value> values;
  std::vector<MethodDef> bodies;
  std::vector<std::string> keys;  // canonical text per alternative

  std::size_t size() const { return keys.size(); }
};

std::set<std::string> address_set(const Blockchain& b) {
  std::set<std::string> out;
  for (const auto& c : b.contracts) out.insert(c.address);
  return out;
}

void check_untrusted(const Blockchain& b, const std::set<std::string>& trusted, const std::string& x,
                     const std::string& key) {
  if (!b.contract(x)) throw PropsError("UnknownAddress", key + ": no contract " + x);
  if (trusted.count(x))
    throw PropsError("TrustedVariation", key + ": " + x + " is trusted and may not vary");
}

std::vector<Axis> make_axes(const Blockchain& b, const std::set<std::string>& trusted,
                            const FamilySpec& spec, const State& s, const MethodTable& t) {
  std::vector<Axis> axes;
  const std::set<std::string> addrs = address_set(b);
  for (const auto& [key, domain] : spec.fields) {
    auto [x, p] = split_member(key);
    check_untrusted(b, trusted, x, key);
    const Value* cur = lookup_field(s, x, p);
    if (!cur) throw PropsError("UnknownMember", key + ": " + x + " has no field " + p);
    Axis a{x, p, true, {}, {}, {}};
    for (const Value& v : domain) {
      if (kind_of(v) != kind_of(*cur))
        throw PropsError("KindMismatch", key + ": " + to_string(v) + " is a " + kind_name(kind_of(v)) +
                                             ", the field holds a " + kind_name(kind_of(*cur)));
      a.values.push_back(v);
      a.keys.push_back(to_string(v));
    }
    axes.push_back(std::move(a));
  }
  for (const auto& [key, snippets] : spec.bodies) {
    auto [x, f] = split_member(key);
    check_untrusted(b, trusted, x, key);
    const MethodDef* cur = lookup_method(t, x, f);
    if (!cur) throw PropsError("UnknownMember", key + ": " + x + " has no method " + f);
    Axis a{x, f, false, {}, {}, {}};
    for (const std::string& text : snippets) {
      StmtPtr body;
      try {
        body = parse_statement(text, cur->params, addrs, key);
      } catch (const std::exception& e) {
        throw PropsError("BadSnippet", key + ": " + e.what());
      }
      a.bodies.push_back(MethodDef{cur->params, body});
      a.keys.push_back(print_stmt(*body));
    }
    axes.push_back(std::move(a));
  }
  return axes;
}

std::size_t saturating_product(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.size() == 0) return 0;
    if (n > SIZE_MAX / a.size()) return SIZE_MAX;
    n *= a.size();
  }
  return n;
}

// Runs one transaction per context on a single large stack.
std::vector<Outcome> run_all(const ContextFamily& fam, const Transaction& t, std::uint64_t fuel) {
  std::vector<Outcome> out(fam.contexts.size());
  with_stack_for(fuel, [&] {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = run_transaction_here(fam.contexts[i].methods, fam.contexts[i].state, t, fuel);
  });
  return out;
}

// Shared bookkeeping for both checkers: statuses, notes, Inconclusive.
void note_outcomes(const ContextFamily& fam, const std::vector<Outcome>& runs, PropertyVerdict& v) {
  v.contexts_checked = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Outcome& o = runs[i];
    if (o.status == Status::OutOfFuel) {
      v.verdict = Verdict::Inconclusive;
      v.notes.push_back("NonTerminating(" + fam.contexts[i].label + ")");
    } else if (!o.ok()) {
      v.degraded = true;
      v.notes.push_back(std::string(status_name(o.status)) + "(" + fam.contexts[i].label + ")" +
                        (o.detail.empty() ? "" : ": " + o.detail));
    }
  }
}

// First pair (i, j), i < j, on which `same` fails, considering only indices
// accepted by `use`. `same` must be an equivalence, so i is the first usable index.
template <class Same, class Use>
std::optional<std::pair<std::size_t, std::size_t>> first_split(std::size_t n, Same same, Use use) {
  std::size_t i = 0;
  while (i < n && !use(i)) ++i;
  for (std::size_t j = i + 1; j < n; ++j)
    if (use(j) && !same(i, j)) return std::make_pair(i, j);
  return std::nullopt;
}

Witness make_witness(const ContextFamily& fam, const Transaction& t, const std::vector<Outcome>& runs,
                     std::pair<std::size_t, std::size_t> ij) {
  Witness w;
  w.first = ij.first;
  w.second = ij.second;
  w.first_context = fam.contexts[ij.first];
  w.second_context = fam.contexts[ij.second];
  w.tx = t;
  w.first_run = runs[ij.first];
  w.second_run = runs[ij.second];
  return w;
}

}  // namespace

ContextFamily generate_context_family(const Blockchain& b, const std::set<std::string>& trusted,
                                      const FamilySpec& spec, std::uint64_t seed,
                                      std::size_t max_contexts) {
  for (const auto& x : trusted)
    if (!b.contract(x)) throw PropsError("UnknownAddress", "trusted address " + x + " is not declared");
  auto [state, methods] = eval_declarations(b.contracts);
  std::vector<Axis> axes = make_axes(b, trusted, spec, state, methods);

  ContextFamily fam;
  fam.base = b;
  fam.trusted = trusted;
  const std::size_t total = saturating_product(axes);
  fam.enumerated = total;
  if (total == 0) throw PropsError("EmptyFamily", "the variation spec yields no contexts");

  std::vector<std::size_t> picks;
  if (total <= max_contexts) {
    picks.resize(total);
    for (std::size_t i = 0; i < total; ++i) picks[i] = i;
  } else {
    std::mt19937_64 rng(seed);
    std::set<std::size_t> chosen;
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    while (chosen.size() < max_contexts) chosen.insert(pick(rng));
    picks.assign(chosen.begin(), chosen.end());
  }

  std::set<std::string> seen;
  for (std::size_t index : picks) {
    // Mixed radix, first axis most significant.
    std::vector<std::size_t> digit(axes.size());
    std::size_t rest = index;
    for (std::size_t k = axes.size(); k-- > 0;) {
      digit[k] = rest % axes[k].size();
      rest /= axes[k].size();
    }
    Context c{state, methods, ""};
    std::string key;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const Axis& a = axes[k];
      const std::size_t d = digit[k];
      if (a.field) {
        c.state[a.contract] = c.state[a.contract].update(a.member, a.values[d]);
        c.label += (c.label.empty() ? "" : ", ") + a.contract + "." + a.member + "=" + a.keys[d];
      } else {
        c.methods[a.contract] = c.methods[a.contract].update(a.member, a.bodies[d]);
        c.label += (c.label.empty() ? "" : ", ") + a.contract + "." + a.member + "#" + std::to_string(d);
      }
      key += a.contract + "." + a.member + "\x1f" + a.keys[d] + "\x1e";
    }
    if (axes.empty()) c.label = "base";
    if (seen.insert(key).second) fam.contexts.push_back(std::move(c));
  }
  return fam;
}

PropertyVerdict check_call_integrity(const ContextFamily& fam, const std::string& c,
                                     const Transaction& t, std::uint64_t fuel) {
  if (!fam.trusted.count(c)) throw PropsError("NotTrusted", c + " is not in the trusted set");
  PropertyVerdict v;
  std::vector<Outcome> runs = run_all(fam, t, fuel);
  note_outcomes(fam, runs, v);

  std::vector<Trace> seen;
  for (const auto& o : runs) seen.push_back(project_trace(o.trace, c));
  auto same = [&](std::size_t i, std::size_t j) { return seen[i] == seen[j]; };
  auto with_traces = [&](std::pair<std::size_t, std::size_t> ij) {
    Witness w = make_witness(fam, t, runs, ij);
    w.first_observed = seen[ij.first];
    w.second_observed = seen[ij.second];
    w.detail = c + " calls " + to_string(w.first_observed) + " vs " + to_string(w.second_observed);
    return w;
  };
  auto terminated = [&](std::size_t i) { return runs[i].status != Status::OutOfFuel; };
  auto ok = [&](std::size_t i) { return runs[i].ok(); };

  if (auto ij = first_split(runs.size(), same, terminated)) {
    v.witness = with_traces(*ij);
    if (v.verdict != Verdict::Inconclusive) v.verdict = Verdict::Violated;
  }
  if (auto ij = first_split(runs.size(), same, ok)) v.ok_witness = with_traces(*ij);
  return v;
}

PropertyVerdict check_noninterference(const ContextFamily& fam, const std::map<std::string, Level>& lambda,
                                      const Transaction& t, std::uint64_t fuel, std::optional<Level> low) {
  const Lattice& l = fam.base.lattice;
  const Level s = low ? *low : l.bottom();
  if (fam.contexts.empty()) return {};

  // Γ where every field of X sits at λ(X).
  std::vector<std::pair<std::string, std::vector<IfaceEnv>>> ifaces;
  std::map<std::string, BaseType> addresses;
  for (const auto& [x, fields] : fam.contexts.front().state) {
    auto it = lambda.find(x);
    if (it == lambda.end()) throw PropsError("UnknownAddress", "no level for contract " + x);
    std::vector<IfaceEnv> envs;
    for (Level lv : l.levels()) {
      IfaceEnv e{"@" + x, lv, {}, {}, {}};
      for (const auto& [p, val] : fields.items()) {
        e.fields.emplace_back(p, BaseType{"", it->second});
        e.order.push_back(p);
      }
      envs.push_back(std::move(e));
    }
    ifaces.emplace_back("@" + x, std::move(envs));
    addresses[x] = BaseType{"@" + x, it->second};
  }
  const TypeContext ctx(l, std::move(ifaces), std::move(addresses));

  const Context& first = fam.contexts.front();
  for (const auto& c : fam.contexts) {
    if (!(c.methods == first.methods))
      throw PropsError("BodyVariation", "context " + c.label + " has a different method table");
    if (EqResult r = s_equal(ctx, first.state, c.state, s); !r)
      throw PropsError("NotLowEqual", "context " + c.label + " is not " + l.name(s) + "-equal to " +
                                          first.label + ": " + r.detail);
  }

  PropertyVerdict v;
  std::vector<Outcome> runs = run_all(fam, t, fuel);
  note_outcomes(fam, runs, v);
  auto same = [&](std::size_t i, std::size_t j) {
    return s_equal(ctx, runs[i].state, runs[j].state, s).equal();
  };
  auto with_states = [&](std::pair<std::size_t, std::size_t> ij) {
    Witness w = make_witness(fam, t, runs, ij);
    w.detail = s_equal(ctx, runs[ij.first].state, runs[ij.second].state, s).detail;
    return w;
  };
  auto terminated = [&](std::size_t i) { return runs[i].status != Status::OutOfFuel; };
  auto ok = [&](std::size_t i) { return runs[i].ok(); };

  if (auto ij = first_split(runs.size(), same, terminated)) {
    v.witness = with_states(*ij);
    if (v.verdict != Verdict::Inconclusive) v.verdict = Verdict::Violated;
  }
  if (auto ij = first_split(runs.size(), same, ok)) v.ok_witness = with_states(*ij);
  return v;
}

std::map<std::string, BaseTypeExpr> trusted_assignment(const Blockchain& b,
                                                    const std::set<std::string>& trusted) {
  const Lattice& l = b.lattice;
  std::map<std::string, BaseTypeExpr> out;
  for (const auto& c : b.contracts) {
    if (!c.type || c.type->iface.empty()) continue;
    out[c.address] = BaseTypeExpr{c.type->iface, l.name(trusted.count(c.address) ? l.bottom() : l.top())};
  }
  return out;
}

std::vector<Transaction> generate_transactions(const Blockchain& b, const TypeContext& ctx,
                                               const FamilySpec& spec, std::size_t limit,
                                               std::uint64_t seed) {
  std::vector<Value> nats{nat(0), nat(1)};
  for (const auto& [key, domain] : spec.fields)
    for (const Value& v : domain)
      if (is_nat(v) && std::find(nats.begin(), nats.end(), v) == nats.end() && nats.size() < 4)
        nats.push_back(v);
  std::vector<Value> addrs;
  for (const auto& c : b.contracts) addrs.push_back(addr(c.address));

  std::vector<Transaction> all;
  for (const auto& callee : b.contracts) {
    for (const auto& m : callee.methods) {
      std::vector<std::vector<Value>> choices;
      for (Kind k : param_kinds(b, ctx, callee.address, m.name)) {
        if (k == ValueKind::Addr)
          choices.push_back(addrs);
        else if (k == ValueKind::Bool)
          choices.push_back({boolean(false), boolean(true)});
        else
          choices.push_back(nats);
      }
      std::vector<std::vector<Value>> tuples{{}};
      for (const auto& ch : choices) {
        std::vector<std::vector<Value>> next;
        for (const auto& tup : tuples)
          for (const Value& v : ch) {
            next.push_back(tup);
            next.back().push_back(v);
          }
        tuples = std::move(next);
      }
      for (const auto& caller : b.contracts)
        for (const auto& args : tuples)
          for (std::uint64_t n : {0, 1})
            all.push_back(Transaction{caller.address, callee.address, m.name, args, n, {}});
    }
  }
  if (all.size() <= limit) return all;
  std::vector<Transaction> out;
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), limit, rng);
  return out;
}

TrustReport check_welltyped_implies_ci(const Blockchain& b, const std::set<std::string>& trusted,
                                      const FamilySpec& spec, const TrustOptions& opts) {
  TrustReport r;
  r.assignment = trusted_assignment(b, trusted);
  r.typing = check_program(b, r.assignment);
  r.accepted = r.typing.accepted;
  if (!r.accepted) {
    for (const auto& [label, d] : r.typing.derivations)
      if (!d.ok)
        if (const Derivation* bad = first_failure(d)) {
          r.failing_rule = bad->rule;
          r.failing_premise = bad->failure;
          break;
        }
    if (r.failing_rule.empty() && !r.typing.errors.empty()) {
      r.failing_rule = r.typing.errors.front().code;
      r.failing_premise = r.typing.errors.front().message;
    }
    return r;
  }

  std::vector<ContextError> errs;
  const TypeContext ctx(b, r.assignment, errs);
  const Checker checker(ctx);
  const Lattice& l = ctx.lattice();

  // Trusted interfaces wholly at ⊥; everything else at ⊤.
  for (const auto& [x, t] : ctx.addresses()) {
    const IfaceEnv* env = ctx.iface(t);
    const Level want = trusted.count(x) ? l.bottom() : l.top();
    auto bad = [&](const std::string& what) {
      if (r.hypothesis_ok) r.hypothesis_detail = x + ": " + what + " is not at " + l.name(want);
      r.hypothesis_ok = false;
    };
    if (t.level != want) bad("the contract");
    if (!env) continue;
    for (const auto& [p, bt] : env->fields)
      if (bt.level != want) bad("field " + p);
    for (const auto& [f, pt] : env->methods)
      if (pt.level != want) bad("method " + f);
  }

  ContextFamily fam = generate_context_family(b, trusted, spec, opts.seed, opts.max_contexts);
  {
    std::vector<Context> kept;
    for (auto& c : fam.contexts) {
      if (check_env_agreement(checker, c.state, c.methods))
        kept.push_back(std::move(c));
      else
        ++r.contexts_dropped;
    }
    fam.contexts = std::move(kept);
  }
  r.contexts = fam.contexts.size();

  std::vector<Transaction> txs = b.transactions;
  txs.insert(txs.end(), opts.extra_txs.begin(), opts.extra_txs.end());
  if (opts.generated_txs > 0) {
    auto gen = generate_transactions(b, ctx, spec, opts.generated_txs, opts.seed);
    txs.insert(txs.end(), gen.begin(), gen.end());
  }
  {
    std::set<std::string> seen;
    std::vector<Transaction> unique;
    for (auto& t : txs)
      if (seen.insert(print_transaction(t)).second) unique.push_back(std::move(t));
    txs = std::move(unique);
  }

  std::optional<ContextFamily> low_family;
  std::map<std::string, Level> lambda;
  if (opts.check_ni) {
    FamilySpec states_only{spec.fields, {}};
    low_family = generate_context_family(b, trusted, states_only, opts.seed, opts.max_contexts);
    for (const auto& [x, t] : ctx.addresses()) lambda[x] = t.level;
  }

  for (const auto& t : txs) {
    bool typable = false;
    for (bool lv : checker.transaction_levels(t)) typable = typable || lv;
    if (!typable) {
      ++r.txs_untypable;
      continue;
    }
    ++r.txs_checked;
    auto record = [&](std::string prop, std::string c, PropertyVerdict v) {
      TrustCheck k{std::move(prop), std::move(c), t, std::move(v), false};
      k.contradiction = k.verdict.ok_witness.has_value() && r.hypothesis_ok;
      if (k.contradiction) ++r.contradictions;
      if (k.verdict.witness && !k.verdict.ok_witness) ++r.degraded_witnesses;
      r.checks.push_back(std::move(k));
    };
    if (!fam.contexts.empty())
      for (const auto& c : trusted) record("CI", c, check_call_integrity(fam, c, t, opts.fuel));
    if (low_family) record("NI", "", check_noninterference(*low_family, lambda, t, opts.fuel, l.bottom()));
  }
  return r;
}

}  // namespace tinysol
