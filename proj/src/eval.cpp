#include "tinysol/eval.hpp"

#include <pthread.h>
#include <sys/mman.h>

#include <algorithm>
#include <exception>
#include <limits>
#include <stdexcept>

namespace tinysol {

std::string to_string(const CallRecord& r) {
  std::string out = r.caller + "->" + r.callee + "." + r.method + "(";
  for (std::size_t i = 0; i < r.args.size(); ++i) out += (i ? ", " : "") + to_string(r.args[i]);
  return out + "):" + std::to_string(r.amount);
}

std::string to_string(const Trace& t) {
  std::string out = "[";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + to_string(t[i]);
  return out + "]";
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "Ok";
    case Status::Thrown: return "Thrown";
    case Status::Stuck: return "Stuck";
    case Status::OutOfFuel: return "OutOfFuel";
    case Status::NotRun: return "NotRun";
  }
  return "?";
}

const char* reason_name(StuckReason r) {
  switch (r) {
    case StuckReason::UndefinedName: return "UndefinedName";
    case StuckReason::TypeMismatch: return "TypeMismatch";
    case StuckReason::NonBooleanGuard: return "NonBooleanGuard";
    case StuckReason::ArityMismatch: return "ArityMismatch";
    case StuckReason::InsufficientBalance: return "InsufficientBalance";
    case StuckReason::UndefinedAddress: return "UndefinedAddress";
    case StuckReason::UndefinedMethod: return "UndefinedMethod";
  }
  return "?";
}

// ---- expressions -----------------------------------------------------------

namespace {

constexpr std::uint64_t kNatMax = std::numeric_limits<std::uint64_t>::max();

ExprResult stuck(StuckReason r, std::string detail) { return {std::nullopt, r, std::move(detail)}; }
ExprResult ok(Value v) { return {std::move(v), StuckReason::UndefinedName, ""}; }

ExprResult apply_op(OpCode op, const std::vector<Value>& a) {
  auto mismatch = [&] {
    std::string kinds;
    for (std::size_t i = 0; i < a.size(); ++i)
      kinds += (i ? ", " : "") + std::string(kind_name(kind_of(a[i])));
    return stuck(StuckReason::TypeMismatch,
                 "operator " + std::string(symbol(op)) + " applied to " + kinds);
  };
  switch (op) {
    case OpCode::Eq:
      return ok(boolean(a[0] == a[1]));
    case OpCode::Ne:
      return ok(boolean(!(a[0] == a[1])));
    case OpCode::Not:
      if (!is_bool(a[0])) return mismatch();
      return ok(boolean(!as_bool(a[0])));
    case OpCode::And:
    case OpCode::Or:
      if (!is_bool(a[0]) || !is_bool(a[1])) return mismatch();
      return ok(boolean(op == OpCode::And ? as_bool(a[0]) && as_bool(a[1])
                                          : as_bool(a[0]) || as_bool(a[1])));
    default:
      break;
  }
  if (!is_nat(a[0]) || !is_nat(a[1])) return mismatch();
  std::uint64_t x = as_nat(a[0]);
  std::uint64_t y = as_nat(a[1]);
  std::uint64_t r = 0;
  switch (op) {
    case OpCode::Add: return ok(nat(__builtin_add_overflow(x, y, &r) ? kNatMax : r));
    case OpCode::Sub: return ok(nat(x > y ? x - y : 0));
    case OpCode::Mul: return ok(nat(__builtin_mul_overflow(x, y, &r) ? kNatMax : r));
    case OpCode::Lt: return ok(boolean(x < y));
    case OpCode::Le: return ok(boolean(x <= y));
    case OpCode::Gt: return ok(boolean(x > y));
    case OpCode::Ge: return ok(boolean(x >= y));
    default: return mismatch();
  }
}

}  // namespace

ExprResult eval_expr(const State& s, const VarEnv& v, const Expr& e) {
  return std::visit(
      [&](const auto& n) -> ExprResult {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          return ok(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          if (const Value* x = v.lookup(n.name)) return ok(*x);
          return stuck(StuckReason::UndefinedName, "undefined variable " + n.name);
        } else if constexpr (std::is_same_v<T, MagicRef>) {
          if (const Value* x = v.lookup(magic_name(n.which))) return ok(*x);
          return stuck(StuckReason::UndefinedName,
                       std::string("undefined variable ") + magic_name(n.which));
        } else if constexpr (std::is_same_v<T, FieldRead>) {
          ExprResult t = eval_expr(s, v, *n.target);
          if (!t.value) return t;
          if (!is_addr(*t.value))
            return stuck(StuckReason::TypeMismatch,
                         "field ." + n.field + " read from " + to_string(*t.value));
          auto it = s.find(as_addr(*t.value));
          if (it == s.end())
            return stuck(StuckReason::UndefinedAddress, "undefined address " + as_addr(*t.value));
          if (const Value* x = it->second.lookup(n.field)) return ok(*x);
          return stuck(StuckReason::UndefinedName,
                       "undefined field " + as_addr(*t.value) + "." + n.field);
        } else {
          std::vector<Value> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) {
            ExprResult r = eval_expr(s, v, *a);
            if (!r.value) return r;
            args.push_back(std::move(*r.value));
          }
          return apply_op(n.op, args);
        }
      },
      e.node);
}

// ---- declarations ----------------------------------------------------------

std::pair<State, MethodTable> eval_declarations(const std::vector<ContractDecl>& dc) {
  State s;
  MethodTable t;
  for (const auto& c : dc) {
    FieldEnv f;
    for (auto it = c.fields.rbegin(); it != c.fields.rend(); ++it) f = f.prepend(it->name, it->init);
    MethodEnv m;
    for (auto it = c.methods.rbegin(); it != c.methods.rend(); ++it)
      m = m.prepend(it->name, MethodDef{it->params, it->body});
    s[c.address] = f;
    t[c.address] = m;
  }
  return {std::move(s), std::move(t)};
}

// ---- statements ------------------------------------------------------------

namespace {

struct Abort {
  Status status;
  std::optional<StuckReason> reason;
  std::string detail;
};

class Machine {
 public:
  Machine(const MethodTable& t, State s, VarEnv v, std::uint64_t fuel)
      : t_(t), s_(std::move(s)), v_(std::move(v)), fuel_(fuel), start_fuel_(fuel) {}

  Outcome run(const Stmt& st) {
    Outcome o;
    try {
      exec(st);
      o.status = Status::Ok;
    } catch (const Abort& a) {
      o.status = a.status;
      o.reason = a.reason;
      o.detail = a.detail;
    }
    o.state = std::move(s_);
    o.vars = std::move(v_);
    o.trace = std::move(trace_);
    o.fuel_used = start_fuel_ - fuel_;
    return o;
  }

 private:
  [[noreturn]] static void fail(StuckReason r, std::string detail) {
    throw Abort{Status::Stuck, r, std::move(detail)};
  }

  Value eval(const Expr& e) {
    ExprResult r = eval_expr(s_, v_, e);
    if (!r.value) fail(r.reason, std::move(r.detail));
    return std::move(*r.value);
  }

  void tick() {
    if (fuel_ == 0) throw Abort{Status::OutOfFuel, std::nullopt, "fuel exhausted"};
    --fuel_;
  }

  void exec(const Stmt& st) {
    tick();
    std::visit([&](const auto& n) { step(n); }, st.node);
  }

  void step(const Skip&) {}
  void step(const Throw&) { throw Abort{Status::Thrown, std::nullopt, "throw"}; }

  void step(const DeclVar& n) {
    Value x = eval(*n.init);
    v_ = v_.prepend(n.name, std::move(x));
    exec(*n.body);
    v_ = v_.tail();
  }

  void step(const Assign& n) {
    if (!n.target.this_field) {
      if (!v_.contains(n.target.name))
        fail(StuckReason::UndefinedName, "assignment to undefined variable " + n.target.name);
      Value x = eval(*n.rhs);
      v_ = v_.update(n.target.name, std::move(x));
      return;
    }
    std::string self = this_address();
    auto it = s_.find(self);
    if (it == s_.end()) fail(StuckReason::UndefinedAddress, "undefined address " + self);
    if (!it->second.contains(n.target.name))
      fail(StuckReason::UndefinedName, "undefined field " + self + "." + n.target.name);
    Value x = eval(*n.rhs);
    it->second = it->second.update(n.target.name, std::move(x));
  }

  void step(const Seq& n) {
    exec(*n.first);
    exec(*n.second);
  }

  bool guard(const Expr& e) {
    Value c = eval(e);
    if (!is_bool(c)) fail(StuckReason::NonBooleanGuard, "guard evaluated to " + to_string(c));
    return as_bool(c);
  }

  void step(const If& n) { exec(guard(*n.cond) ? *n.then_branch : *n.else_branch); }

  // One rule application per iteration; the loop replaces the recursive premise.
  void step(const While& n) {
    while (guard(*n.cond)) {
      exec(*n.body);
      tick();
    }
  }

  std::string this_address() {
    const Value* self = v_.lookup("this");
    if (!self) fail(StuckReason::UndefinedName, "undefined variable this");
    if (!is_addr(*self)) fail(StuckReason::TypeMismatch, "this is not an address");
    return as_addr(*self);
  }

  void step(const Call& n) {
    Value target = eval(*n.target);
    if (!is_addr(target))
      fail(StuckReason::TypeMismatch, "call target " + to_string(target) + " is not an address");
    const std::string& y = as_addr(target);
    if (!s_.count(y)) fail(StuckReason::UndefinedAddress, "undefined address " + y);
    const MethodDef* m = lookup_method(t_, y, n.method);
    if (!m) fail(StuckReason::UndefinedMethod, "undefined method " + y + "." + n.method);
    if (m->params.size() != n.args.size())
      fail(StuckReason::ArityMismatch, y + "." + n.method + " expects " +
                                           std::to_string(m->params.size()) + " arguments, got " +
                                           std::to_string(n.args.size()));
    std::vector<Value> args;
    args.reserve(n.args.size());
    for (const auto& a : n.args) args.push_back(eval(*a));
    Value amount = eval(*n.amount);
    if (!is_nat(amount))
      fail(StuckReason::TypeMismatch, "call amount " + to_string(amount) + " is not a natural");
    std::uint64_t k = as_nat(amount);
    std::string x = this_address();
    auto xf = s_.find(x);
    if (xf == s_.end()) fail(StuckReason::UndefinedAddress, "undefined address " + x);
    const Value* bal = xf->second.lookup("balance");
    if (!bal || !is_nat(*bal)) fail(StuckReason::UndefinedName, x + " has no balance");
    if (k > as_nat(*bal))
      fail(StuckReason::InsufficientBalance, x + " has balance " + to_string(*bal) +
                                                 ", cannot send " + std::to_string(k));

    // Debit then credit, so a self-call leaves the balance unchanged.
    xf->second = xf->second.update("balance", nat(as_nat(*bal) - k));
    FieldEnv& yf = s_.at(y);
    const Value* ybal = yf.lookup("balance");
    std::uint64_t yb = ybal && is_nat(*ybal) ? as_nat(*ybal) : 0;
    std::uint64_t credited = 0;
    yf = yf.update("balance", nat(__builtin_add_overflow(yb, k, &credited) ? kNatMax : credited));

    trace_.push_back(CallRecord{x, y, n.method, args, k});

    VarEnv callee;
    for (std::size_t i = m->params.size(); i-- > 0;) callee = callee.prepend(m->params[i], args[i]);
    callee = callee.prepend("value", nat(k)).prepend("sender", addr(x)).prepend("this", addr(y));

    VarEnv saved = std::move(v_);
    v_ = std::move(callee);
    StmtPtr body = m->body;  // keep alive independently of the table entry
    exec(*body);
    v_ = std::move(saved);
  }

  const MethodTable& t_;
  State s_;
  VarEnv v_;
  Trace trace_;
  std::uint64_t fuel_;
  std::uint64_t start_fuel_;
};

}  // namespace

Outcome exec_stmt_here(const MethodTable& t, const State& s, const VarEnv& v, const Stmt& st,
                       std::uint64_t fuel) {
  return Machine(t, s, v, fuel).run(st);
}

// ---- big stacks ------------------------------------------------------------

namespace {

// Upper bound on stack bytes used per nested statement rule (measured frames
// are well under this; see the stack test).
constexpr std::size_t kBytesPerFuel = 2048;
constexpr std::size_t kBaseStack = std::size_t{32} << 20;
constexpr std::size_t kMaxStack = std::size_t{64} << 30;

struct ThreadJob {
  const std::function<void()>* fn;
  std::exception_ptr error;
};

void* thread_main(void* p) {
  auto* job = static_cast<ThreadJob*>(p);
  try {
    (*job->fn)();
  } catch (...) {
    job->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

void with_stack_for(std::uint64_t fuel, const std::function<void()>& fn) {
  std::size_t size = kBaseStack;
  if (fuel > (kMaxStack - kBaseStack) / kBytesPerFuel)
    size = kMaxStack;
  else
    size += static_cast<std::size_t>(fuel) * kBytesPerFuel;
  size = (size + 0xFFFF) & ~std::size_t{0xFFFF};

  void* stack = mmap(nullptr, size, PROT_READ | PROT_WRITE,
                     MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE | MAP_STACK, -1, 0);
  if (stack == MAP_FAILED) throw std::runtime_error("cannot allocate evaluation stack");

  ThreadJob job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstack(&attr, stack, size);
  pthread_t th;
  int rc = pthread_create(&th, &attr, thread_main, &job);
  pthread_attr_destroy(&attr);
  if (rc == 0) pthread_join(th, nullptr);
  munmap(stack, size);
  if (rc != 0) throw std::runtime_error("cannot start evaluation thread");
  if (job.error) std::rethrow_exception(job.error);
}

Outcome exec_stmt(const MethodTable& t, const State& s, const VarEnv& v, const Stmt& st,
                  std::uint64_t fuel) {
  Outcome o;
  with_stack_for(fuel, [&] { o = exec_stmt_here(t, s, v, st, fuel); });
  return o;
}

// ---- transactions ----------------------------------------------------------

namespace {

Stmt transaction_call(const Transaction& tx) {
  std::vector<ExprPtr> args;
  for (const auto& a : tx.args) args.push_back(make_lit(a, tx.span));
  return Stmt{Call{make_lit(addr(tx.callee), tx.span), tx.method, std::move(args),
                   make_lit(nat(tx.amount), tx.span)},
              tx.span};
}

}  // namespace

Outcome run_transaction_here(const MethodTable& t, const State& s, const Transaction& tx,
                             std::uint64_t fuel) {
  VarEnv v = VarEnv{}.prepend("this", addr(tx.caller));
  Outcome o = exec_stmt_here(t, s, v, transaction_call(tx), fuel);
  if (!o.trace.empty()) o.trace.erase(o.trace.begin());
  o.vars = VarEnv{};
  return o;
}

Outcome run_transaction(const MethodTable& t, const State& s, const Transaction& tx,
                        std::uint64_t fuel) {
  Outcome o;
  with_stack_for(fuel, [&] { o = run_transaction_here(t, s, tx, fuel); });
  return o;
}

ChainResult run_transactions(const MethodTable& t, const State& s,
                             const std::vector<Transaction>& txs, std::uint64_t fuel) {
  ChainResult r;
  r.genesis = s;
  r.methods = t;
  r.final_state = s;
  with_stack_for(fuel, [&] {
    bool halted = false;
    for (const auto& tx : txs) {
      if (halted) {
        Outcome skipped;
        skipped.status = Status::NotRun;
        skipped.state = r.final_state;
        r.outcomes.push_back(std::move(skipped));
        continue;
      }
      Outcome o = run_transaction_here(t, r.final_state, tx, fuel);
      if (o.ok())
        r.final_state = o.state;
      else
        halted = true;
      r.outcomes.push_back(std::move(o));
    }
  });
  return r;
}

ChainResult run_blockchain(const Blockchain& b, std::uint64_t fuel) {
  auto [s, t] = eval_declarations(b.contracts);
  return run_transactions(t, s, b.transactions, fuel);
}

Trace project_trace(const Trace& t, const std::string& x) {
  Trace out;
  std::copy_if(t.begin(), t.end(), std::back_inserter(out),
               [&](const CallRecord& r) { return r.caller == x; });
  return out;
}

}  // namespace tinysol
