#include "tinysol/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace tinysol {

ParseError::ParseError(std::string code, std::string message, SourceSpan span,
                       std::vector<std::string> expected)
    : std::runtime_error(span.file + ":" + std::to_string(span.line) + ":" +
                         std::to_string(span.column) + ": " + message),
      code_(std::move(code)),
      span_(std::move(span)),
      expected_(std::move(expected)) {}

namespace {

constexpr std::array<std::string_view, 22> kReserved = {
    "this",  "sender",   "value",     "balance", "skip", "throw", "var",   "in",
    "if",    "then",     "else",      "while",   "do",   "field", "contract",
    "interface", "method", "chain", "lattice", "true", "false", "cmd"};

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      SourceSpan sp{file_, pos_, pos_, line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", sp});
        return out;
      }
      unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (std::isalpha(c) || c == '_' || c >= 0x80) {
        std::size_t b = pos_;
        while (pos_ < src_.size()) {
          unsigned char d = static_cast<unsigned char>(src_[pos_]);
          if (!(std::isalnum(d) || d == '_' || d >= 0x80)) break;
          advance();
        }
        sp.end = pos_;
        out.push_back({Tok::Ident, std::string(src_.substr(b, pos_ - b)), sp});
      } else if (std::isdigit(c)) {
        std::size_t b = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
        sp.end = pos_;
        out.push_back({Tok::Number, std::string(src_.substr(b, pos_ - b)), sp});
      } else {
        static constexpr std::array<std::string_view, 22> puncts = {
            ":=", "->", "<=", ">=", "!=", "&&", "||", "{", "}", "(", ")",
            "<",  ">",  "=",  ";",  ",",  ".",  ":",  "+", "-", "*", "!"};
        bool found = false;
        for (auto p : puncts) {
          if (src_.substr(pos_, p.size()) == p) {
            for (std::size_t k = 0; k < p.size(); ++k) advance();
            sp.end = pos_;
            out.push_back({Tok::Punct, std::string(p), sp});
            found = true;
            break;
          }
        }
        if (!found) {
          sp.end = pos_ + 1;
          throw ParseError("ParseError",
                           std::string("unexpected character '") + static_cast<char>(c) + "'",
                           sp);
        }
      }
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, const std::string& file)
      : toks_(Lexer(text, file).run()) {}

  // ---- token helpers ----

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool at_word(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    std::string msg = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    msg += ", found " + got;
    throw ParseError("ParseError", msg, t.span, std::move(expected));
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail({"'" + std::string(p) + "'"});
    next();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail({"'" + std::string(w) + "'"});
    next();
  }

  // An identifier that is not a reserved word.
  std::string name(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail({what});
    if (is_reserved(t.text))
      throw ParseError("ReservedWord",
                       "reserved word '" + t.text + "' cannot be used as " + what, t.span,
                       {what});
    next();
    return t.text;
  }

  // Member names after '.', and field/method declaration names: `balance` is allowed.
  std::string member_name(const char* what) {
    if (at_word("balance")) {
      next();
      return "balance";
    }
    return name(what);
  }

  static SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    SourceSpan s = a;
    s.end = b.end;
    return s;
  }

  // ---- lattice ----

  Lattice lattice_body(bool braced) {
    std::vector<std::string> elements;
    std::vector<Lattice::Cover> covers;
    auto add = [&](const std::string& e) {
      if (std::find(elements.begin(), elements.end(), e) == elements.end()) elements.push_back(e);
    };
    auto done = [&] { return braced ? at_punct("}") : at_end(); };
    while (!done()) {
      if (at_punct(",") || at_punct(";")) {
        next();
        continue;
      }
      if (peek().kind != Tok::Ident) fail({"lattice element"});
      std::string prev = next().text;
      add(prev);
      while (at_punct("<")) {
        next();
        if (peek().kind != Tok::Ident) fail({"lattice element"});
        std::string cur = next().text;
        add(cur);
        covers.emplace_back(prev, cur);
        prev = cur;
      }
      if (!(at_punct(",") || at_punct(";") || done())) fail({"','", "';'", "'<'"});
    }
    return Lattice(std::move(elements), std::move(covers));
  }

  // ---- types ----

  BaseTypeExpr base_type() {
    std::string first = name("a level or interface name");
    if (at_punct("<")) {
      next();
      std::string level = name("a level name");
      expect_punct(">");
      return {first, level};
    }
    return {"", first};
  }

  InterfaceDecl interface_decl() {
    SourceSpan start = peek().span;
    expect_word("interface");
    InterfaceDecl d;
    d.name = name("an interface name");
    if (at_punct("<")) {
      next();
      d.param = name("a level parameter");
      expect_punct(">");
    }
    expect_punct("{");
    while (!at_punct("}")) {
      SourceSpan ms = peek().span;
      if (at_word("field")) {
        next();
        IfaceField f;
        f.name = member_name("a field name");
        expect_punct(":");
        expect_punct("<");
        f.type = base_type();
        expect_punct(">");
        expect_word("var");
        f.span = join(ms, peek().span);
        expect_punct(";");
        d.fields.push_back(std::move(f));
      } else if (at_word("method")) {
        next();
        IfaceMethod m;
        m.name = name("a method name");
        expect_punct(":");
        expect_punct("<");
        if (!at_punct(">")) {
          m.params.push_back(base_type());
          while (at_punct(",")) {
            next();
            m.params.push_back(base_type());
          }
        }
        expect_punct(">");
        expect_punct("->");
        m.level = name("a level name");
        expect_word("cmd");
        m.span = join(ms, peek().span);
        expect_punct(";");
        d.methods.push_back(std::move(m));
      } else {
        fail({"'field'", "'method'", "'}'"});
      }
    }
    d.span = join(start, peek().span);
    expect_punct("}");
    return d;
  }

  // ---- values ----

  Value value_literal() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      return nat(number(t));
    }
    if (at_word("true")) {
      next();
      return boolean(true);
    }
    if (at_word("false")) {
      next();
      return boolean(false);
    }
    return addr(name("a value"));
  }

  static std::uint64_t number(const Token& t) {
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      throw ParseError("ParseError", "number out of range: " + t.text, t.span);
    return n;
  }

  // ---- contracts ----

  ContractDecl contract_decl() {
    SourceSpan start = peek().span;
    expect_word("contract");
    ContractDecl c;
    c.address = name("a contract address");
    if (at_punct(":")) {
      next();
      BaseTypeExpr t = base_type();
      if (t.iface.empty())
        throw ParseError("ParseError", "contract type must be an interface instance I<s>",
                         start, {"I<s>"});
      c.type = t;
    }
    expect_punct("{");
    while (!at_punct("}")) {
      SourceSpan ms = peek().span;
      if (at_word("field")) {
        next();
        FieldDecl f;
        f.name = member_name("a field name");
        expect_punct(":=");
        f.init = value_literal();
        f.span = join(ms, peek().span);
        expect_punct(";");
        c.fields.push_back(std::move(f));
      } else if (peek().kind == Tok::Ident) {
        MethodDecl m;
        m.name = name("a method name");
        expect_punct("(");
        if (!at_punct(")")) {
          m.params.push_back(name("a parameter name"));
          while (at_punct(",")) {
            next();
            m.params.push_back(name("a parameter name"));
          }
        }
        expect_punct(")");
        scope_ = m.params;
        m.body = block();
        scope_.clear();
        m.span = join(ms, m.body->span);
        c.methods.push_back(std::move(m));
      } else {
        fail({"'field'", "a method", "'}'"});
      }
    }
    c.span = join(start, peek().span);
    expect_punct("}");
    return c;
  }

  // `{ seq }`, where an empty block is skip.
  StmtPtr block() {
    SourceSpan start = peek().span;
    expect_punct("{");
    StmtPtr s;
    if (at_punct("}"))
      s = make_stmt(Skip{}, join(start, peek().span));
    else
      s = seq();
    expect_punct("}");
    return s;
  }

  bool seq_stop() const { return at_punct("}") || at_word("else") || at_end(); }

  // s1; s2; ... with optional trailing ';'. Nests to the right.
  StmtPtr seq() {
    StmtPtr first = stmt();
    if (at_punct(";")) {
      next();
      if (seq_stop()) return first;
      StmtPtr rest = seq();
      return make_stmt(Seq{first, rest}, join(first->span, rest->span));
    }
    return first;
  }

  // A single statement or a braced block.
  StmtPtr single() {
    if (at_punct("{")) return block();
    return stmt();
  }

  StmtPtr stmt() {
    SourceSpan start = peek().span;
    if (at_punct("{")) return block();
    if (at_word("skip")) {
      next();
      return make_stmt(Skip{}, start);
    }
    if (at_word("throw")) {
      next();
      return make_stmt(Throw{}, start);
    }
    if (at_word("var") || at_punct("<")) return decl_var();
    if (at_word("if")) {
      next();
      ExprPtr c = expr();
      expect_word("then");
      if (seq_stop()) fail({"a statement"});
      StmtPtr t = seq();
      expect_word("else");
      StmtPtr e = single();
      return make_stmt(If{c, t, e}, join(start, e->span));
    }
    if (at_word("while")) {
      next();
      ExprPtr c = expr();
      expect_word("do");
      StmtPtr b = single();
      return make_stmt(While{c, b}, join(start, b->span));
    }
    // local-call sugar f(e...) => this.f(e...):0
    if (peek().kind == Tok::Ident && !is_reserved(peek().text) && at_punct("(", 1)) {
      std::string f = name("a method name");
      std::vector<ExprPtr> args = call_args();
      SourceSpan sp = join(start, toks_[pos_ - 1].span);
      return make_stmt(Call{make_magic(Magic::This, start), f, std::move(args),
                            make_lit(nat(0), sp)},
                       sp);
    }
    // x := e
    if (peek().kind == Tok::Ident && at_punct(":=", 1)) {
      std::string x = name("a variable");
      next();
      ExprPtr rhs = expr();
      return make_stmt(Assign{LValue{false, x}, rhs}, join(start, rhs->span));
    }
    // this.p := e
    if (at_word("this") && at_punct(".", 1) && at_punct(":=", 3)) {
      next();
      next();
      const Token& ft = peek();
      if (ft.kind == Tok::Ident && is_reserved(ft.text))
        throw ParseError("ReservedWord", "'" + ft.text + "' cannot be assigned", ft.span,
                         {"a field name"});
      std::string p = name("a field name");
      next();
      ExprPtr rhs = expr();
      return make_stmt(Assign{LValue{true, p}, rhs}, join(start, rhs->span));
    }
    // e1.f(args):e2
    ExprPtr target = primary();
    while (at_punct(".")) {
      next();
      const Token& mt = peek();
      std::string m = member_name("a field or method name");
      if (at_punct("(")) {
        if (m == "balance")
          throw ParseError("ReservedWord", "'balance' is not a method", mt.span,
                           {"a method name"});
        std::vector<ExprPtr> args = call_args();
        expect_punct(":");
        ExprPtr amount = expr();
        return make_stmt(Call{target, m, std::move(args), amount}, join(start, amount->span));
      }
      if (at_punct(":="))
        throw ParseError("ParseError", "only fields of this can be assigned", peek().span,
                         {"'('"});
      target = make_field(target, m, join(target->span, mt.span));
    }
    if (at_punct(":=")) {
      const Token& t = toks_[pos_ - 1];
      throw ParseError("ReservedWord", "'" + t.text + "' cannot be assigned", t.span,
                       {"a variable"});
    }
    fail({"'.'", "':='"});
  }

  std::vector<ExprPtr> call_args() {
    expect_punct("(");
    std::vector<ExprPtr> args;
    if (!at_punct(")")) {
      args.push_back(expr());
      while (at_punct(",")) {
        next();
        args.push_back(expr());
      }
    }
    expect_punct(")");
    return args;
  }

  StmtPtr decl_var() {
    SourceSpan start = peek().span;
    std::optional<BaseTypeExpr> annot;
    if (at_punct("<")) {
      next();
      annot = base_type();
      expect_punct(">");
    }
    expect_word("var");
    std::string x = name("a variable name");
    expect_punct(":=");
    ExprPtr init = expr();  // x is not yet in scope here
    expect_word("in");
    scope_.push_back(x);
    StmtPtr body;
    if (seq_stop())
      fail({"a statement"});
    body = seq();
    scope_.pop_back();
    return make_stmt(DeclVar{annot, x, init, body}, join(start, body->span));
  }

  // ---- expressions ----

  ExprPtr expr() { return or_expr(); }

  ExprPtr binary(OpCode op, ExprPtr l, ExprPtr r) {
    SourceSpan sp = join(l->span, r->span);
    return make_op(op, {std::move(l), std::move(r)}, sp);
  }

  ExprPtr or_expr() {
    ExprPtr l = and_expr();
    while (at_punct("||")) {
      next();
      l = binary(OpCode::Or, l, and_expr());
    }
    return l;
  }

  ExprPtr and_expr() {
    ExprPtr l = cmp_expr();
    while (at_punct("&&")) {
      next();
      l = binary(OpCode::And, l, cmp_expr());
    }
    return l;
  }

  ExprPtr cmp_expr() {
    ExprPtr l = add_expr();
    static const std::pair<std::string_view, OpCode> ops[] = {
        {"=", OpCode::Eq}, {"!=", OpCode::Ne}, {"<", OpCode::Lt},
        {"<=", OpCode::Le}, {">", OpCode::Gt}, {">=", OpCode::Ge}};
    for (auto [s, op] : ops) {
      if (at_punct(s)) {
        next();
        return binary(op, l, add_expr());
      }
    }
    return l;
  }

  ExprPtr add_expr() {
    ExprPtr l = mul_expr();
    while (at_punct("+") || at_punct("-")) {
      OpCode op = next().text == "+" ? OpCode::Add : OpCode::Sub;
      l = binary(op, l, mul_expr());
    }
    return l;
  }

  ExprPtr mul_expr() {
    ExprPtr l = unary();
    while (at_punct("*")) {
      next();
      l = binary(OpCode::Mul, l, unary());
    }
    return l;
  }

  ExprPtr unary() {
    if (at_punct("!")) {
      SourceSpan start = next().span;
      ExprPtr e = unary();
      return make_op(OpCode::Not, {e}, join(start, e->span));
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (at_punct(".")) {
      next();
      const Token& t = peek();
      std::string f = member_name("a field name");
      if (at_punct("("))
        throw ParseError("ParseError", "method calls are statements, not expressions", t.span,
                         {"a field name"});
      e = make_field(e, f, join(e->span, t.span));
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      return make_lit(nat(number(t)), t.span);
    }
    if (at_punct("(")) {
      next();
      ExprPtr e = expr();
      expect_punct(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail({"an expression"});
    if (t.text == "true" || t.text == "false") {
      next();
      return make_lit(boolean(t.text == "true"), t.span);
    }
    if (t.text == "this" || t.text == "sender" || t.text == "value") {
      next();
      Magic m = t.text == "this" ? Magic::This : t.text == "sender" ? Magic::Sender : Magic::Value;
      return make_magic(m, t.span);
    }
    std::string x = name("an expression");
    if (std::find(scope_.begin(), scope_.end(), x) != scope_.end()) return make_var(x, t.span);
    if (addresses_.count(x)) return make_lit(addr(x), t.span);
    return make_var(x, t.span);
  }

  // ---- transactions ----

  Transaction transaction() {
    SourceSpan start = peek().span;
    Transaction tx;
    tx.caller = name("an account address");
    expect_punct("->");
    tx.callee = name("a contract address");
    expect_punct(".");
    tx.method = name("a method name");
    expect_punct("(");
    if (!at_punct(")")) {
      tx.args.push_back(value_literal());
      while (at_punct(",")) {
        next();
        tx.args.push_back(value_literal());
      }
    }
    expect_punct(")");
    expect_punct(":");
    if (peek().kind != Tok::Number) fail({"an amount"});
    tx.amount = number(peek());
    tx.span = join(start, next().span);
    return tx;
  }

  // ---- program ----

  void prescan_addresses() {
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i)
      if (toks_[i].kind == Tok::Ident && toks_[i].text == "contract" &&
          toks_[i + 1].kind == Tok::Ident)
        addresses_.insert(toks_[i + 1].text);
  }

  Blockchain program() {
    prescan_addresses();
    Blockchain b;
    std::vector<InterfaceDecl> ifaces;
    std::vector<ContractDecl> contracts;
    // Contract bodies need the lattice only in later passes, so declaration
    // order in the file does not matter.
    while (!at_end()) {
      if (at_word("lattice")) {
        if (b.lattice_explicit)
          throw ParseError("ParseError", "duplicate lattice block", peek().span);
        next();
        expect_punct("{");
        b.lattice = lattice_body(true);
        b.lattice_explicit = true;
        expect_punct("}");
      } else if (at_word("interface")) {
        b.interfaces.push_back(interface_decl());
      } else if (at_word("contract")) {
        b.contracts.push_back(contract_decl());
      } else if (at_word("chain")) {
        next();
        expect_punct("{");
        while (!at_punct("}")) {
          b.transactions.push_back(transaction());
          if (!at_punct("}")) expect_punct(";");
        }
        expect_punct("}");
      } else {
        fail({"'lattice'", "'interface'", "'contract'", "'chain'"});
      }
    }
    return b;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
  std::set<std::string> addresses_;

  friend StmtPtr tinysol::parse_statement(std::string_view, const std::vector<std::string>&,
                                          const std::set<std::string>&, const std::string&);
  friend Lattice tinysol::parse_lattice(std::string_view, const std::string&);
  friend Transaction tinysol::parse_transaction(std::string_view, const std::string&);
  friend BaseTypeExpr tinysol::parse_base_type(std::string_view, const std::string&);
};

}  // namespace

bool is_reserved(std::string_view word) {
  return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

Blockchain parse_program(std::string_view text, const std::string& file) {
  Parser p(text, file);
  return p.program();
}

Lattice parse_lattice(std::string_view text, const std::string& file) {
  Parser p(text, file);
  return p.lattice_body(false);
}

StmtPtr parse_statement(std::string_view text, const std::vector<std::string>& params,
                        const std::set<std::string>& addresses, const std::string& file) {
  Parser p(text, file);
  p.scope_ = params;
  p.addresses_ = addresses;
  StmtPtr s;
  if (p.at_end())
    s = make_stmt(Skip{});
  else
    s = p.seq();
  if (!p.at_end()) p.fail({"end of input"});
  return s;
}

Transaction parse_transaction(std::string_view text, const std::string& file) {
  Parser p(text, file);
  Transaction t = p.transaction();
  if (!p.at_end()) p.fail({"end of input"});
  return t;
}

BaseTypeExpr parse_base_type(std::string_view text, const std::string& file) {
  Parser p(text, file);
  BaseTypeExpr t = p.base_type();
  if (!p.at_end()) p.fail({"end of input"});
  return t;
}

}  // namespace tinysol
