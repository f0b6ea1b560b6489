#pragma once
// First-order formulas over one sort, with an optional modal layer (nucleus application
// and frame guards) shared by the translations. Parser, printer, classifiers, schemes.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lopkit {

struct FormulaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : FormulaError {
  std::size_t line, column;
  ParseError(const std::string& msg, std::size_t l, std::size_t c)
      : FormulaError("syntax error at line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

// ---------------------------------------------------------------- terms

enum class TermKind { Var, Zero, Succ, Plus, Times, Monus, Num };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;       // Var
  std::uint64_t num = 0;  // Num
  TermPtr left, right;    // Succ uses left only
};

inline TermPtr var(std::string n) { return std::make_shared<Term>(Term{TermKind::Var, std::move(n), 0, {}, {}}); }
inline TermPtr zero() { return std::make_shared<Term>(Term{TermKind::Zero, {}, 0, {}, {}}); }
inline TermPtr succ(TermPtr t) { return std::make_shared<Term>(Term{TermKind::Succ, {}, 0, std::move(t), {}}); }
inline TermPtr numeral(std::uint64_t n) {
  if (n == 0) return zero();
  return std::make_shared<Term>(Term{TermKind::Num, {}, n, {}, {}});
}
inline TermPtr plus(TermPtr a, TermPtr b) {
  return std::make_shared<Term>(Term{TermKind::Plus, {}, 0, std::move(a), std::move(b)});
}
inline TermPtr times(TermPtr a, TermPtr b) {
  return std::make_shared<Term>(Term{TermKind::Times, {}, 0, std::move(a), std::move(b)});
}
inline TermPtr monus(TermPtr a, TermPtr b) {
  return std::make_shared<Term>(Term{TermKind::Monus, {}, 0, std::move(a), std::move(b)});
}

inline bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return a->name == b->name;
    case TermKind::Zero: return true;
    case TermKind::Num: return a->num == b->num;
    case TermKind::Succ: return term_equal(a->left, b->left);
    default: return term_equal(a->left, b->left) && term_equal(a->right, b->right);
  }
}

inline void term_vars(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == TermKind::Var) out.insert(t->name);
  term_vars(t->left, out);
  term_vars(t->right, out);
}

inline bool term_closed(const TermPtr& t) {
  std::set<std::string> v;
  term_vars(t, v);
  return v.empty();
}

inline int term_prec(const Term& t) {
  switch (t.kind) {
    case TermKind::Plus:
    case TermKind::Monus: return 1;
    case TermKind::Times: return 2;
    default: return 3;
  }
}

inline std::string print_term(const TermPtr& t) {
  auto wrap = [](const TermPtr& s, bool paren) { return paren ? "(" + print_term(s) + ")" : print_term(s); };
  switch (t->kind) {
    case TermKind::Var: return t->name;
    case TermKind::Zero: return "0";
    case TermKind::Num: return std::to_string(t->num);
    case TermKind::Succ: return "S(" + print_term(t->left) + ")";
    default: {
      int p = term_prec(*t);
      std::string op = t->kind == TermKind::Plus ? "+" : t->kind == TermKind::Times ? "*" : "-.";
      return wrap(t->left, term_prec(*t->left) < p) + op + wrap(t->right, term_prec(*t->right) <= p);
    }
  }
}

// ---------------------------------------------------------------- formulas

enum class Kind { Atom, Eq, Bot, And, Or, Imp, Forall, Exists, Mod, Guard };

struct Formula;
using FPtr = std::shared_ptr<const Formula>;

struct Formula {
  Kind kind;
  std::string name;            // Atom: relation symbol; Forall/Exists: bound variable;
                               // Mod: nucleus variable; Guard: bound nucleus variable
  std::vector<TermPtr> terms;  // Atom arguments, Eq sides
  FPtr left, right;            // binary operands; unary/binder body in left
  std::string above, frame;    // Guard: lower nucleus variable and frame variable
};

inline FPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
inline FPtr atom(std::string r, std::vector<TermPtr> args = {}) {
  return mk({Kind::Atom, std::move(r), std::move(args), {}, {}, {}, {}});
}
inline FPtr eq(TermPtr a, TermPtr b) { return mk({Kind::Eq, {}, {std::move(a), std::move(b)}, {}, {}, {}, {}}); }
inline FPtr bot() { return mk({Kind::Bot, {}, {}, {}, {}, {}, {}}); }
inline FPtr top() { return eq(zero(), zero()); }
inline FPtr conj(FPtr a, FPtr b) { return mk({Kind::And, {}, {}, std::move(a), std::move(b), {}, {}}); }
inline FPtr disj(FPtr a, FPtr b) { return mk({Kind::Or, {}, {}, std::move(a), std::move(b), {}, {}}); }
inline FPtr imp(FPtr a, FPtr b) { return mk({Kind::Imp, {}, {}, std::move(a), std::move(b), {}, {}}); }
inline FPtr lnot(FPtr a) { return imp(std::move(a), bot()); }
inline FPtr iff(const FPtr& a, const FPtr& b) { return conj(imp(a, b), imp(b, a)); }
inline FPtr forall(std::string v, FPtr body) { return mk({Kind::Forall, std::move(v), {}, std::move(body), {}, {}, {}}); }
inline FPtr exists(std::string v, FPtr body) { return mk({Kind::Exists, std::move(v), {}, std::move(body), {}, {}, {}}); }
inline FPtr modal(std::string j, FPtr body) { return mk({Kind::Mod, std::move(j), {}, std::move(body), {}, {}, {}}); }
inline FPtr guard(std::string k, std::string frame, std::string above, FPtr body) {
  return mk({Kind::Guard, std::move(k), {}, std::move(body), {}, std::move(above), std::move(frame)});
}
inline FPtr step_halt(TermPtr e, TermPtr x, TermPtr w) {
  return atom("StepHalt", {std::move(e), std::move(x), std::move(w)});
}

inline const char* kStepHalt = "StepHalt";

inline bool is_negation(const Formula& f) { return f.kind == Kind::Imp && f.right->kind == Kind::Bot; }
inline bool is_binder(const Formula& f) {
  return f.kind == Kind::Forall || f.kind == Kind::Exists || f.kind == Kind::Guard;
}
inline bool is_binary(const Formula& f) {
  return f.kind == Kind::And || f.kind == Kind::Or || (f.kind == Kind::Imp && !is_negation(f));
}

inline bool formula_equal(const FPtr& a, const FPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind || a->name != b->name || a->above != b->above || a->frame != b->frame ||
      a->terms.size() != b->terms.size())
    return false;
  for (std::size_t i = 0; i < a->terms.size(); ++i)
    if (!term_equal(a->terms[i], b->terms[i])) return false;
  return formula_equal(a->left, b->left) && formula_equal(a->right, b->right);
}

inline bool has_modal(const FPtr& f) {
  if (!f) return false;
  if (f->kind == Kind::Mod || f->kind == Kind::Guard) return true;
  return has_modal(f->left) || has_modal(f->right);
}

inline std::size_t formula_size(const FPtr& f) {
  if (!f) return 0;
  return 1 + formula_size(f->left) + formula_size(f->right);
}

inline std::size_t formula_depth(const FPtr& f) {
  if (!f) return 0;
  if (f->kind == Kind::Atom || f->kind == Kind::Eq || f->kind == Kind::Bot) return 0;
  return 1 + std::max(formula_depth(f->left), formula_depth(f->right));
}

inline void free_vars_into(const FPtr& f, std::set<std::string> bound, std::set<std::string>& out) {
  if (!f) return;
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq:
      for (auto& t : f->terms) {
        std::set<std::string> v;
        term_vars(t, v);
        for (auto& x : v)
          if (!bound.count(x)) out.insert(x);
      }
      return;
    case Kind::Forall:
    case Kind::Exists:
      bound.insert(f->name);
      free_vars_into(f->left, bound, out);
      return;
    default:
      free_vars_into(f->left, bound, out);
      free_vars_into(f->right, bound, out);
  }
}

inline std::set<std::string> free_vars(const FPtr& f) {
  std::set<std::string> out;
  free_vars_into(f, {}, out);
  return out;
}

inline bool is_closed(const FPtr& f) { return free_vars(f).empty(); }

// Relation symbols with arities; StepHalt included. Throws on inconsistent arity.
inline void collect_atoms(const FPtr& f, std::map<std::string, std::size_t>& out) {
  if (!f) return;
  if (f->kind == Kind::Atom) {
    auto [it, fresh] = out.emplace(f->name, f->terms.size());
    if (!fresh && it->second != f->terms.size())
      throw FormulaError("arity mismatch for " + f->name + ": " + std::to_string(it->second) + " vs " +
                         std::to_string(f->terms.size()));
  }
  collect_atoms(f->left, out);
  collect_atoms(f->right, out);
}

inline std::map<std::string, std::size_t> atoms_of(const FPtr& f) {
  std::map<std::string, std::size_t> m;
  collect_atoms(f, m);
  return m;
}

// Abstract atoms are every relation symbol except StepHalt; arithmetic atoms are Eq and StepHalt.
inline bool has_abstract_atom(const FPtr& f) {
  if (!f) return false;
  if (f->kind == Kind::Atom && f->name != kStepHalt) return true;
  return has_abstract_atom(f->left) || has_abstract_atom(f->right);
}
inline bool has_arith_atom(const FPtr& f) {
  if (!f) return false;
  if (f->kind == Kind::Eq || (f->kind == Kind::Atom && f->name == kStepHalt)) return true;
  return has_arith_atom(f->left) || has_arith_atom(f->right);
}

inline TermPtr subst_term(const TermPtr& t, const std::string& x, const TermPtr& s) {
  if (!t) return t;
  if (t->kind == TermKind::Var) return t->name == x ? s : t;
  if (t->kind == TermKind::Zero || t->kind == TermKind::Num) return t;
  auto l = subst_term(t->left, x, s);
  auto r = subst_term(t->right, x, s);
  if (l == t->left && r == t->right) return t;
  return std::make_shared<Term>(Term{t->kind, {}, 0, l, r});
}

// Replaces free occurrences of x by s; throws if a variable of s would be captured.
inline FPtr subst(const FPtr& f, const std::string& x, const TermPtr& s) {
  if (!f) return f;
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq: {
      Formula g = *f;
      for (auto& t : g.terms) t = subst_term(t, x, s);
      return mk(std::move(g));
    }
    case Kind::Bot: return f;
    case Kind::Forall:
    case Kind::Exists: {
      if (f->name == x) return f;
      if (!free_vars(f->left).count(x)) return f;
      std::set<std::string> sv;
      term_vars(s, sv);
      if (sv.count(f->name)) throw FormulaError("substitution would capture variable " + f->name);
      Formula g = *f;
      g.left = subst(f->left, x, s);
      return mk(std::move(g));
    }
    default: {
      Formula g = *f;
      g.left = subst(f->left, x, s);
      g.right = subst(f->right, x, s);
      return mk(std::move(g));
    }
  }
}

// ---------------------------------------------------------------- printing

inline int fprec(const Formula& f) {
  if (is_binder(f)) return 0;
  if (f.kind == Kind::Imp && !is_negation(f)) return 1;
  if (f.kind == Kind::Or) return 2;
  if (f.kind == Kind::And) return 3;
  return 4;
}

inline std::string print(const FPtr& f);

namespace detail {
inline std::string operand(const FPtr& f, int min_prec) {
  int p = fprec(*f);
  bool paren = p == 0 || p < min_prec;
  return paren ? "(" + print(f) + ")" : print(f);
}
}  // namespace detail

inline std::string print(const FPtr& f) {
  switch (f->kind) {
    case Kind::Atom: {
      if (f->terms.empty()) return f->name;
      std::string s = f->name + "(";
      for (std::size_t i = 0; i < f->terms.size(); ++i) s += (i ? ", " : "") + print_term(f->terms[i]);
      return s + ")";
    }
    case Kind::Eq: return print_term(f->terms[0]) + "=" + print_term(f->terms[1]);
    case Kind::Bot: return "bot";
    case Kind::And: return detail::operand(f->left, 3) + " /\\ " + detail::operand(f->right, 4);
    case Kind::Or: return detail::operand(f->left, 2) + " \\/ " + detail::operand(f->right, 3);
    case Kind::Imp:
      if (is_negation(*f)) return "~" + detail::operand(f->left, 4);
      return detail::operand(f->left, 2) + " -> " + detail::operand(f->right, 1);
    case Kind::Mod: return "[" + f->name + "]" + detail::operand(f->left, 4);
    case Kind::Forall:
    case Kind::Exists:
    case Kind::Guard: {
      std::string head = f->kind == Kind::Forall   ? "forall " + f->name
                         : f->kind == Kind::Exists ? "exists " + f->name
                                                   : "all " + f->name + ">=" + f->above + " in " + f->frame;
      const bool paren = is_binary(*f->left);
      return head + ". " + (paren ? "(" + print(f->left) + ")" : print(f->left));
    }
  }
  return {};
}

// ---------------------------------------------------------------- parsing

struct ParseOptions {
  bool allow_modal = false;
  std::optional<std::set<std::string>> free_vars;  // when set, other free variables are errors
  std::map<std::string, std::size_t> arities;      // declared arities; StepHalt is always 3
};

namespace detail {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, col;
};

inline std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* syms[] = {"/\\", "\\/", "->", "-.", ">=", "~", "(", ")", ",", ".", "=", "+", "*", "[", "]"};
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    std::size_t l0 = line, c0 = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'')) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), l0, c0});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Number, s.substr(i, j - i), l0, c0});
      adv(j - i);
      continue;
    }
    bool found = false;
    for (const char* sym : syms) {
      std::string t(sym);
      if (s.compare(i, t.size(), t) == 0) {
        out.push_back({Tok::Sym, t, l0, c0});
        adv(t.size());
        found = true;
        break;
      }
    }
    if (!found) throw ParseError(std::string("unexpected character '") + c + "'", l0, c0);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

inline bool is_keyword(const std::string& s) {
  return s == "forall" || s == "exists" || s == "bot" || s == "top" || s == "all" || s == "in";
}
inline bool is_relation_name(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])) && s != "S";
}

class Parser {
 public:
  Parser(const std::string& text, const ParseOptions& opt) : toks_(lex(text)), opt_(opt) {
    arities_ = opt.arities;
    arities_[kStepHalt] = 3;
  }

  FPtr parse_all() {
    if (peek().kind == Tok::End) fail("empty input");
    FPtr f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& opt_;
  std::map<std::string, std::size_t> arities_;
  std::vector<std::string> bound_;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().col); }
  bool is_sym(const std::string& s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_ident(const std::string& s) const { return peek().kind == Tok::Ident && peek().text == s; }
  void expect(const std::string& s) {
    if (!is_sym(s)) fail("expected '" + s + "'" + (peek().kind == Tok::End ? " before end of input" : ""));
    ++pos_;
  }
  std::string lower_ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text) || !std::islower(static_cast<unsigned char>(t.text[0])))
      fail(std::string("expected ") + what);
    ++pos_;
    return t.text;
  }

  FPtr formula() {
    FPtr lhs = disjunction();
    if (is_sym("->")) {
      ++pos_;
      return imp(lhs, formula());
    }
    return lhs;
  }
  FPtr disjunction() {
    FPtr f = conjunction();
    while (is_sym("\\/")) {
      ++pos_;
      f = disj(f, conjunction());
    }
    return f;
  }
  FPtr conjunction() {
    FPtr f = unary();
    while (is_sym("/\\")) {
      ++pos_;
      f = conj(f, unary());
    }
    return f;
  }
  FPtr unary() {
    if (is_sym("~")) {
      ++pos_;
      return lnot(unary());
    }
    if (is_ident("forall") || is_ident("exists")) {
      bool all = peek().text == "forall";
      ++pos_;
      std::string v = lower_ident("a variable name");
      expect(".");
      bound_.push_back(v);
      FPtr body = formula();
      bound_.pop_back();
      return all ? forall(v, body) : exists(v, body);
    }
    if (opt_.allow_modal && is_sym("[")) {
      ++pos_;
      std::string j = lower_ident("a nucleus variable");
      expect("]");
      return modal(j, unary());
    }
    if (opt_.allow_modal && is_ident("all")) {
      ++pos_;
      std::string k = lower_ident("a nucleus variable");
      expect(">=");
      std::string j = lower_ident("a nucleus variable");
      if (!is_ident("in")) fail("expected 'in'");
      ++pos_;
      const Token& t = peek();
      if (t.kind != Tok::Ident) fail("expected a frame name");
      ++pos_;
      expect(".");
      return guard(k, t.text, j, formula());
    }
    return primary();
  }
  FPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "bot") {
      ++pos_;
      return bot();
    }
    if (t.kind == Tok::Ident && t.text == "top") {
      ++pos_;
      return top();
    }
    if (t.kind == Tok::Ident && is_relation_name(t.text)) {
      ++pos_;
      std::vector<TermPtr> args;
      if (is_sym("(")) {
        ++pos_;
        args.push_back(term());
        while (is_sym(",")) {
          ++pos_;
          args.push_back(term());
        }
        expect(")");
      }
      auto [it, fresh] = arities_.emplace(t.text, args.size());
      if (!fresh && it->second != args.size())
        throw ParseError("arity mismatch for " + t.text + ": expected " + std::to_string(it->second) + ", got " +
                             std::to_string(args.size()),
                         t.line, t.col);
      return atom(t.text, std::move(args));
    }
    // An equation, or a parenthesized formula when the equation reading fails.
    std::size_t save = pos_;
    std::optional<ParseError> eq_err;
    try {
      TermPtr a = term();
      expect("=");
      TermPtr b = term();
      return eq(a, b);
    } catch (const ParseError& e) {
      eq_err = e;
    }
    std::size_t eq_reach = pos_;
    pos_ = save;
    if (is_sym("(")) {
      ++pos_;
      FPtr f = formula();
      expect(")");
      return f;
    }
    pos_ = eq_reach;
    throw *eq_err;
  }

  TermPtr term() {
    TermPtr t = product();
    while (is_sym("+") || is_sym("-.")) {
      bool p = peek().text == "+";
      ++pos_;
      TermPtr r = product();
      t = p ? plus(t, r) : monus(t, r);
    }
    return t;
  }
  TermPtr product() {
    TermPtr t = term_atom();
    while (is_sym("*")) {
      ++pos_;
      t = times(t, term_atom());
    }
    return t;
  }
  TermPtr term_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      if (t.text.size() > 19) throw ParseError("numeral too large", t.line, t.col);
      return numeral(std::stoull(t.text));
    }
    if (t.kind == Tok::Ident && t.text == "S" && is_sym("(", 1)) {
      pos_ += 2;
      TermPtr a = term();
      expect(")");
      return succ(a);
    }
    if (is_sym("(")) {
      ++pos_;
      TermPtr a = term();
      expect(")");
      return a;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text) && std::islower(static_cast<unsigned char>(t.text[0]))) {
      ++pos_;
      if (opt_.free_vars && !opt_.free_vars->count(t.text) &&
          std::find(bound_.begin(), bound_.end(), t.text) == bound_.end())
        throw ParseError("unbound variable " + t.text, t.line, t.col);
      return var(t.text);
    }
    fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
  }
};

}  // namespace detail

inline FPtr parse(const std::string& text, const ParseOptions& opt = {}) {
  detail::Parser p(text, opt);
  return p.parse_all();
}

inline FPtr parse_mformula(const std::string& text) {
  ParseOptions o;
  o.allow_modal = true;
  return parse(text, o);
}

// ---------------------------------------------------------------- classes

enum class ClassTag { Sigma, Pi, PiOrPi, LiteralClassR, ImplicationFree };

struct FormulaClass {
  ClassTag tag;
  int level = 0;  // Sigma/Pi/PiOrPi only
  bool operator==(const FormulaClass& o) const {
    return tag == o.tag && (tag == ClassTag::LiteralClassR || tag == ClassTag::ImplicationFree || level == o.level);
  }
  bool operator<(const FormulaClass& o) const {
    if (tag != o.tag) return tag < o.tag;
    return level < o.level;
  }
};

inline std::string class_name(const FormulaClass& c) {
  switch (c.tag) {
    case ClassTag::Sigma: return "Sigma" + std::to_string(c.level);
    case ClassTag::Pi: return "Pi" + std::to_string(c.level);
    case ClassTag::PiOrPi: return "PiOrPi" + std::to_string(c.level);
    case ClassTag::LiteralClassR: return "R";
    case ClassTag::ImplicationFree: return "ImplicationFree";
  }
  return {};
}

inline std::optional<FormulaClass> parse_class(const std::string& s) {
  auto lvl = [&](std::size_t k) -> std::optional<int> {
    if (s.size() <= k) return std::nullopt;
    for (std::size_t i = k; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    return std::stoi(s.substr(k));
  };
  if (s.rfind("PiOrPi", 0) == 0) {
    if (auto l = lvl(6)) return FormulaClass{ClassTag::PiOrPi, *l};
  } else if (s.rfind("Sigma", 0) == 0) {
    if (auto l = lvl(5)) return FormulaClass{ClassTag::Sigma, *l};
  } else if (s.rfind("Pi", 0) == 0) {
    if (auto l = lvl(2)) return FormulaClass{ClassTag::Pi, *l};
  } else if (s == "R") {
    return FormulaClass{ClassTag::LiteralClassR, 0};
  } else if (s == "ImplicationFree") {
    return FormulaClass{ClassTag::ImplicationFree, 0};
  }
  return std::nullopt;
}

inline bool quantifier_free(const FPtr& f) {
  if (!f) return true;
  if (f->kind == Kind::Forall || f->kind == Kind::Exists || f->kind == Kind::Mod || f->kind == Kind::Guard)
    return false;
  return quantifier_free(f->left) && quantifier_free(f->right);
}

// Membership in the prenex classes, following the inductive definition with k >= 0 blocks.
inline bool in_sigma(const FPtr& f, int n);
inline bool in_pi(const FPtr& f, int n) {
  if (n < 0) return false;
  if (n == 0) return quantifier_free(f);
  FPtr cur = f;
  while (cur->kind == Kind::Forall) cur = cur->left;
  return in_sigma(cur, n - 1);
}
inline bool in_sigma(const FPtr& f, int n) {
  if (n < 0) return false;
  if (n == 0) return quantifier_free(f);
  FPtr cur = f;
  while (cur->kind == Kind::Exists) cur = cur->left;
  return in_pi(cur, n - 1);
}

inline bool in_pi_or_pi(const FPtr& f, int n) {
  return f->kind == Kind::Or && in_pi(f->left, n) && in_pi(f->right, n);
}

inline bool in_literal_class(const FPtr& f) {
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq: return true;
    case Kind::Imp: return is_negation(*f) && (f->left->kind == Kind::Atom || f->left->kind == Kind::Eq);
    case Kind::And: return in_literal_class(f->left) && in_literal_class(f->right);
    case Kind::Forall: return in_literal_class(f->left);
    default: return false;
  }
}

// Neither implication nor negation anywhere (negation is implication into bot).
inline bool implication_free(const FPtr& f) {
  if (!f) return true;
  if (f->kind == Kind::Imp || f->kind == Kind::Guard) return false;
  return implication_free(f->left) && implication_free(f->right);
}

// Prenex classes are reported at the least level where the formula occurs.
inline std::set<FormulaClass> classify(const FPtr& f) {
  std::set<FormulaClass> out;
  if (!has_modal(f)) {
    std::size_t qd = 0;
    for (FPtr cur = f; cur->kind == Kind::Forall || cur->kind == Kind::Exists; cur = cur->left) ++qd;
    for (int n = 0; n <= static_cast<int>(qd) + 1; ++n) {
      bool s = in_sigma(f, n), p = in_pi(f, n);
      if (s) out.insert({ClassTag::Sigma, n});
      if (p) out.insert({ClassTag::Pi, n});
      if (s || p) break;
    }
    if (f->kind == Kind::Or) {
      std::size_t bound = formula_depth(f) + 1;
      for (int n = 0; n <= static_cast<int>(bound); ++n)
        if (in_pi_or_pi(f, n)) {
          out.insert({ClassTag::PiOrPi, n});
          break;
        }
    }
    if (in_literal_class(f)) out.insert({ClassTag::LiteralClassR, 0});
  }
  if (implication_free(f) && !has_modal(f)) out.insert({ClassTag::ImplicationFree, 0});
  return out;
}

inline bool belongs(const FPtr& f, const FormulaClass& c) {
  switch (c.tag) {
    case ClassTag::Sigma: return !has_modal(f) && in_sigma(f, c.level);
    case ClassTag::Pi: return !has_modal(f) && in_pi(f, c.level);
    case ClassTag::PiOrPi: return !has_modal(f) && in_pi_or_pi(f, c.level);
    case ClassTag::LiteralClassR: return !has_modal(f) && in_literal_class(f);
    case ClassTag::ImplicationFree: return !has_modal(f) && implication_free(f);
  }
  return false;
}

// ---------------------------------------------------------------- schemes

enum class Axiom { DNE, LEM };

inline FPtr universal_closure(const FPtr& body, const FPtr& source) {
  auto fv = free_vars(source);
  FPtr out = body;
  for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = forall(*it, out);
  return out;
}

inline FPtr scheme(const FormulaClass& c, Axiom ax, const FPtr& instance) {
  if (!belongs(instance, c)) throw FormulaError("instance not in class " + class_name(c) + ": " + print(instance));
  FPtr body = ax == Axiom::DNE ? imp(lnot(lnot(instance)), instance) : disj(instance, lnot(instance));
  return universal_closure(body, instance);
}

inline FPtr sigma1_instance(TermPtr e, TermPtr x) {
  return exists("w", step_halt(std::move(e), std::move(x), var("w")));
}
inline FPtr pi1_instance(TermPtr e, TermPtr x) {
  return forall("w", lnot(step_halt(std::move(e), std::move(x), var("w"))));
}

// PiOrPi(1) takes a second (code, input) pair.
inline FPtr universal_instance(const FormulaClass& c, std::uint64_t e, std::uint64_t x, std::uint64_t e2 = 0,
                               std::uint64_t x2 = 0) {
  if (c.level != 1) throw FormulaError("universal instances are provided at level 1 only");
  switch (c.tag) {
    case ClassTag::Sigma: return sigma1_instance(numeral(e), numeral(x));
    case ClassTag::Pi: return pi1_instance(numeral(e), numeral(x));
    case ClassTag::PiOrPi: return disj(pi1_instance(numeral(e), numeral(x)), pi1_instance(numeral(e2), numeral(x2)));
    default: throw FormulaError("no universal instance for class " + class_name(c));
  }
}

}  // namespace lopkit
