#pragma once
// Budgeted realizability over the machine: Kleene realizability relative to an
// oracle, de Jongh-Goodman realizability over a finite poset of oracles, and
// realizability of forcing translations in the standard frame of an oracle set.
//
// Verdicts are three-valued. Refuted is absolute: it is only derived from facts
// that hold for every budget (a stuck application, a false atom, an antecedent
// realizer that is certified). Realized is relative to the budgets listed in
// `relative` unless `certified` is set, in which case it holds outright.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lopkit/formula.hpp"
#include "lopkit/machine.hpp"
#include "lopkit/programs.hpp"
#include "lopkit/translate.hpp"

namespace lopkit {

using json = nlohmann::json;

struct RealizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Budgets {
  std::uint64_t fuel = 100000;
  std::uint64_t witness = 1024;
  std::uint64_t candidates = 256;
  std::uint64_t universe = 64;

  void validate() const {
    if (!fuel || !witness || !candidates || !universe) throw RealizeError("budgets must be positive");
  }
  json to_json() const {
    return {{"fuel", fuel}, {"witness", witness}, {"candidates", candidates}, {"universe", universe}};
  }
};

enum class Verdict { Realized, Refuted, Exhausted };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Realized: return "Realized";
    case Verdict::Refuted: return "Refuted";
    default: return "Exhausted";
  }
}

struct Outcome {
  Verdict verdict = Verdict::Realized;
  bool certified = false;
  std::set<std::string> relative;  // Realized: budgets the verdict depends on
  std::string budget;              // Exhausted: the budget that ran out
  json path = json::array();       // Refuted: replayable counter-witness; Exhausted: where

  static Outcome realized(bool cert, std::set<std::string> rel = {}) {
    Outcome o;
    o.certified = cert;
    if (!cert) o.relative = std::move(rel);
    return o;
  }
  static Outcome refuted(json step) {
    Outcome o;
    o.verdict = Verdict::Refuted;
    o.path.push_back(std::move(step));
    return o;
  }
  static Outcome exhausted(std::string b, json step) {
    Outcome o;
    o.verdict = Verdict::Exhausted;
    o.budget = std::move(b);
    o.path.push_back(std::move(step));
    return o;
  }
  Outcome with_step(json step) const {
    Outcome o = *this;
    if (o.verdict != Verdict::Realized) o.path.insert(o.path.begin(), std::move(step));
    return o;
  }
  bool same_verdict(const Outcome& o) const {
    return verdict == o.verdict && certified == o.certified && relative == o.relative && budget == o.budget;
  }
  json to_json() const {
    json j = {{"verdict", verdict_name(verdict)}};
    if (verdict == Verdict::Realized) {
      j["certified"] = certified;
      j["relative_to"] = relative;
    }
    if (verdict == Verdict::Exhausted) j["budget"] = budget;
    if (verdict != Verdict::Realized) j[verdict == Verdict::Refuted ? "counter_witness" : "unresolved_at"] = path;
    return j;
  }
};

// ------------------------------------------------------------ oracle posets

struct OraclePoset {
  std::vector<Oracle> nodes;
  std::vector<std::vector<int>> up;  // up[i]: every g with nodes[i] a sub-function of nodes[g], ascending

  int index_of(const Oracle& f) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == f) return static_cast<int>(i);
    return -1;
  }
  bool le(int i, int g) const { return std::binary_search(up[i].begin(), up[i].end(), g); }
};

// Declared edges must be genuine extensions; equal oracles are rejected since
// extension would then fail to be antisymmetric on the listed nodes.
inline OraclePoset make_oracle_poset(std::vector<Oracle> nodes, const std::vector<std::pair<int, int>>& edges = {}) {
  if (nodes.empty()) throw RealizeError("oracle poset needs at least one oracle");
  OraclePoset t;
  t.nodes = std::move(nodes);
  int n = static_cast<int>(t.nodes.size());
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (t.nodes[i] == t.nodes[k])
        throw RealizeError("oracles " + std::to_string(i) + " and " + std::to_string(k) + " are equal");
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw RealizeError("edge refers to a missing oracle");
    if (a == b) throw RealizeError("edge " + std::to_string(a) + " -> " + std::to_string(b) + " is a loop");
    if (!t.nodes[a].extended_by(t.nodes[b]))
      throw RealizeError("declared edge " + std::to_string(a) + " -> " + std::to_string(b) + " is not an extension");
  }
  t.up.resize(n);
  for (int i = 0; i < n; ++i)
    for (int g = 0; g < n; ++g)
      if (t.nodes[i].extended_by(t.nodes[g])) t.up[i].push_back(g);
  return t;
}

inline OraclePoset singleton_poset(const Oracle& f) { return make_oracle_poset({f}); }

inline Oracle oracle_from_json(const json& j, const std::string& fallback_label = "") {
  Oracle o;
  o.label = fallback_label;
  const json* table = &j;
  if (j.is_object() && j.contains("table")) {
    table = &j.at("table");
    if (j.contains("label")) o.label = j.at("label").get<std::string>();
  }
  auto add = [&](std::uint64_t k, const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw RealizeError("oracle values must be naturals");
    if (!o.table.emplace(k, v.get<std::uint64_t>()).second) throw RealizeError("oracle key repeated");
  };
  if (table->is_object()) {
    for (auto& [k, v] : table->items()) {
      std::size_t used = 0;
      unsigned long long key = 0;
      try {
        key = std::stoull(k, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != k.size() || k.empty() || k[0] == '-') throw RealizeError("oracle key '" + k + "' is not a natural");
      add(key, v);
    }
  } else if (table->is_array()) {
    for (auto& e : *table) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned()) throw RealizeError("oracle entries must be [n, m]");
      add(e[0].get<std::uint64_t>(), e[1]);
    }
  } else {
    throw RealizeError("oracle must be a JSON object mapping naturals to naturals");
  }
  return o;
}

inline json oracle_to_json(const Oracle& o) {
  json t = json::object();
  for (auto& [k, v] : o.table) t[std::to_string(k)] = v;
  return {{"label", o.label}, {"table", t}};
}

// ------------------------------------------------------------ arithmetic

struct ArithEnv {
  std::vector<std::pair<std::string, std::optional<std::uint64_t>>> b;  // nullopt: ranges over all naturals

  ArithEnv with(const std::string& x, std::optional<std::uint64_t> v) const {
    ArithEnv e = *this;
    e.b.emplace_back(x, v);
    return e;
  }
  // Throws when unbound; nullopt when the variable is generic.
  std::optional<std::uint64_t> get(const std::string& x) const {
    for (auto it = b.rbegin(); it != b.rend(); ++it)
      if (it->first == x) return it->second;
    throw RealizeError("unbound variable '" + x + "'");
  }
  std::string key() const {
    std::string s;
    for (auto& [x, v] : b) s += x + "=" + (v ? std::to_string(*v) : "?") + ";";
    return s;
  }
};

enum class Tri { True, False, Unknown };

struct ArithValue {
  std::optional<std::uint64_t> value;
  bool generic = false;  // depends on a generic variable
};

inline ArithValue eval_arith(const TermPtr& t, const ArithEnv& env) {
  using u128 = unsigned __int128;
  switch (t->kind) {
    case TermKind::Var: {
      auto v = env.get(t->name);
      if (!v) return {std::nullopt, true};
      return {v, false};
    }
    case TermKind::Zero: return {0, false};
    case TermKind::Num: return {t->num, false};
    default: break;
  }
  ArithValue a = eval_arith(t->left, env);
  ArithValue b = t->kind == TermKind::Succ ? ArithValue{1, false} : eval_arith(t->right, env);
  if (a.generic || b.generic) return {std::nullopt, true};
  if (!a.value || !b.value) return {std::nullopt, false};
  u128 x = *a.value, y = *b.value, r;
  switch (t->kind) {
    case TermKind::Succ:
    case TermKind::Plus: r = x + y; break;
    case TermKind::Times: r = x * y; break;
    default: r = x >= y ? x - y : 0;
  }
  if (r >= Nat::kNodeBit) return {std::nullopt, false};
  return {static_cast<std::uint64_t>(r), false};
}

// Oracle-free runs behind StepHalt, cached per (code, input).
class HaltingCache {
 public:
  struct Entry {
    RunStatus status;
    std::uint64_t steps;
    std::uint64_t fuel;
  };

  const Entry& run(std::uint64_t e, std::uint64_t x, std::uint64_t fuel) {
    auto key = std::make_pair(e, x);
    auto it = runs_.find(key);
    if (it != runs_.end() && (it->second.status != RunStatus::OutOfFuel || it->second.fuel >= fuel)) return it->second;
    RunResult r = apply(Nat(e), Nat(x), empty_oracle(), fuel);
    Entry en{r.status, r.steps, fuel};
    return runs_[key] = en;
  }
  // StepHalt(e,x,w): the run halts within w steps. Runs longer than cap are not attempted.
  Tri step_halt(std::uint64_t e, std::uint64_t x, std::uint64_t w, std::uint64_t cap) {
    const Entry& en = run(e, x, std::max<std::uint64_t>(1, std::min(w, cap)));
    if (en.status == RunStatus::Halted) return en.steps <= w ? Tri::True : Tri::False;
    if (en.status == RunStatus::Stuck) return Tri::False;
    if (en.fuel >= w) return Tri::False;
    return Tri::Unknown;
  }
  bool stuck(std::uint64_t e, std::uint64_t x, std::uint64_t fuel) { return run(e, x, fuel).status == RunStatus::Stuck; }

 private:
  std::map<std::pair<std::uint64_t, std::uint64_t>, Entry> runs_;
};

inline bool is_step_halt(const Formula& f) { return f.kind == Kind::Atom && f.name == kStepHalt; }

inline void require_arithmetic(const FPtr& f, bool allow_modal = false) {
  if (has_abstract_atom(f)) throw RealizeError("realizability needs arithmetic atoms only: " + print(f));
  if (!allow_modal && has_modal(f)) throw RealizeError("realizability takes plain formulas: " + print(f));
  if (!is_closed(f)) throw RealizeError("realizability needs a closed formula: " + print(f));
}

// Code of K applied to Num(c): a total function with constant value c.
inline Nat const_code(Nat c) { return encode(app_term(prim(Prim::K), num_term(c))); }
inline std::optional<Nat> const_value(Nat e) {
  const TNode& n = term_node(decode(e));
  if (n.kind != kTagApp || n.fun != prim(Prim::K)) return std::nullopt;
  const TNode& a = term_node(n.arg);
  if (a.kind != kTagNum) return std::nullopt;
  return a.num;
}
inline Nat identity_code() {
  return encode(app_term(prim(Prim::S), {prim(Prim::K), prim(Prim::K)}));
}

inline const FPtr& strip_modal(const FPtr& f) {
  const FPtr* p = &f;
  while ((*p)->kind == Kind::Mod || (*p)->kind == Kind::Guard) p = &(*p)->left;
  return *p;
}

// ------------------------------------------------------------ checker

class Realizability {
 public:
  explicit Realizability(Budgets b, const OraclePoset* frame = nullptr) : b_(b), t_(frame) { b_.validate(); }

  const Budgets& budgets() const { return b_; }
  const std::set<std::uint64_t>& queried() const { return queried_; }
  bool big_query() const { return big_query_; }
  std::uint64_t applications() const { return applications_; }

  // -- certification, independent of oracles and budgets' verdict semantics

  Tri atom_truth(const Formula& f, const ArithEnv& env, std::string* why = nullptr) {
    if (f.kind == Kind::Eq) {
      auto l = eval_arith(f.terms[0], env), r = eval_arith(f.terms[1], env);
      if (l.generic || r.generic) return print_term(f.terms[0]) == print_term(f.terms[1]) ? Tri::True : Tri::Unknown;
      if (!l.value || !r.value) {
        if (why) *why = "numeric range";
        return Tri::Unknown;
      }
      return *l.value == *r.value ? Tri::True : Tri::False;
    }
    auto e = eval_arith(f.terms[0], env), x = eval_arith(f.terms[1], env), w = eval_arith(f.terms[2], env);
    if (e.generic || x.generic || w.generic) return Tri::Unknown;
    if (!e.value || !x.value || !w.value) {
      if (why) *why = "numeric range";
      return Tri::Unknown;
    }
    Tri t = halting_.step_halt(*e.value, *x.value, *w.value, b_.fuel);
    if (t == Tri::Unknown && why) *why = "fuel";
    return t;
  }

  // No number realizes f, for every value of the generic variables of env.
  bool unrealizable(const FPtr& f0, const ArithEnv& env) {
    const FPtr& f = strip_modal(f0);
    std::string key = "U" + formula_id(f) + "|" + env.key();
    if (auto it = bool_memo_.find(key); it != bool_memo_.end()) return it->second;
    bool out = false;
    switch (f->kind) {
      case Kind::Bot: out = true; break;
      case Kind::Eq: {
        Tri t = atom_truth(*f, env);
        if (t == Tri::False) out = true;
        else if (t == Tri::Unknown) out = distinct_shapes(f->terms[0], f->terms[1], env);
        break;
      }
      case Kind::Atom: {
        if (!is_step_halt(*f)) throw RealizeError("abstract atom " + f->name);
        Tri t = atom_truth(*f, env);
        if (t == Tri::False) {
          out = true;
        } else if (t == Tri::Unknown) {
          auto e = eval_arith(f->terms[0], env), x = eval_arith(f->terms[1], env);
          if (e.value && x.value) out = halting_.stuck(*e.value, *x.value, b_.fuel);
        }
        break;
      }
      case Kind::And: out = unrealizable(f->left, env) || unrealizable(f->right, env); break;
      case Kind::Or: out = unrealizable(f->left, env) && unrealizable(f->right, env); break;
      case Kind::Exists: out = unrealizable(f->left, env.with(f->name, std::nullopt)); break;
      case Kind::Forall: {
        out = unrealizable(f->left, env.with(f->name, std::nullopt));
        for (std::uint64_t n = 0; !out && n < b_.universe && !has_generic(env); ++n)
          out = unrealizable(f->left, env.with(f->name, n));
        break;
      }
      case Kind::Imp:
        out = !has_generic(env) && certified_realizer(f->left, env).has_value() && unrealizable(f->right, env);
        break;
      default: break;
    }
    bool_memo_[key] = out;
    return out;
  }

  // A number that realizes f at every oracle, if one is evident. env has no generic variables.
  std::optional<Nat> certified_realizer(const FPtr& f0, const ArithEnv& env) {
    const FPtr& f = strip_modal(f0);
    std::string key = "C" + formula_id(f) + "|" + env.key();
    if (auto it = nat_memo_.find(key); it != nat_memo_.end()) return it->second;
    std::optional<Nat> out;
    switch (f->kind) {
      case Kind::Eq:
      case Kind::Atom:
        if (atom_truth(*f, env) == Tri::True) out = Nat(0);
        break;
      case Kind::And: {
        auto a = certified_realizer(f->left, env);
        if (a) {
          auto b = certified_realizer(f->right, env);
          if (b) out = pair(*a, *b);
        }
        break;
      }
      case Kind::Or:
        if (auto a = certified_realizer(f->left, env)) out = pair(Nat(0), *a);
        else if (auto b = certified_realizer(f->right, env)) out = pair(Nat(1), *b);
        break;
      case Kind::Exists:
        for (std::uint64_t w = 0; w < b_.witness && !out; ++w)
          if (auto r = certified_realizer(f->left, env.with(f->name, w))) out = pair(Nat(w), *r);
        break;
      case Kind::Imp:
        if (unrealizable(f->left, env)) out = Nat(0);
        else if (auto r = certified_realizer(f->right, env)) out = const_code(*r);
        break;
      case Kind::Forall: {
        const FPtr& body = strip_modal(f->left);
        if (!free_vars(body).count(f->name)) {
          if (auto r = certified_realizer(body, env.with(f->name, 0))) out = const_code(*r);
        } else if (body->kind == Kind::Imp && unrealizable(body->left, env.with(f->name, std::nullopt))) {
          out = const_code(Nat(0));
        }
        break;
      }
      default: break;
    }
    nat_memo_[key] = out;
    return out;
  }

  // -- the three checkers

  Outcome kleene(Nat e, const FPtr& f, const ArithEnv& env, const Oracle& o) {
    std::string key = memo_key('k', e, f, env) + "|" + oracle_id(o);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Outcome out;
    auto sub = [&](Nat e2, const FPtr& g, const ArithEnv& env2) { return kleene(e2, g, env2, o); };
    if (auto c = common(e, f, env, sub)) {
      out = *c;
    } else if (f->kind == Kind::Imp) {
      std::vector<World> ws{{&o, json(o.label), [&](Nat a) { return kleene(a, f->left, env, o); },
                             [&](Nat v) { return kleene(v, f->right, env, o); }}};
      out = implication(e, f->left, f->right, env, ws);
    } else if (f->kind == Kind::Forall) {
      std::vector<ForallWorld> ws{{&o, json(o.label), [&](std::uint64_t n, Nat v) {
                                     return kleene(v, f->left, env.with(f->name, n), o);
                                   }}};
      out = universal(e, f, env, ws, [&](Nat c, const ArithEnv& env2) { return kleene(c, f->left, env2, o); });
    } else {
      throw RealizeError("unexpected connective in plain formula: " + print(f));
    }
    memo_[key] = out;
    return out;
  }

  Outcome djg(Nat e, const FPtr& f, const ArithEnv& env, int node) {
    require_frame();
    std::string key = memo_key('d', e, f, env) + "|" + std::to_string(node);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Outcome out;
    auto sub = [&](Nat e2, const FPtr& g, const ArithEnv& env2) { return djg(e2, g, env2, node); };
    if (auto c = common(e, f, env, sub)) {
      out = *c;
    } else if (f->kind == Kind::Imp) {
      std::vector<World> ws;
      for (int g : t_->up[node])
        ws.push_back({&t_->nodes[g], json(t_->nodes[g].label), [this, f, env, g](Nat a) { return djg(a, f->left, env, g); },
                      [this, f, env, g](Nat v) { return djg(v, f->right, env, g); }});
      out = implication(e, f->left, f->right, env, ws);
    } else if (f->kind == Kind::Forall) {
      std::vector<ForallWorld> ws;
      for (int g : t_->up[node])
        ws.push_back({&t_->nodes[g], json(t_->nodes[g].label),
                      [this, f, env, g](std::uint64_t n, Nat v) { return djg(v, f->left, env.with(f->name, n), g); }});
      out = universal(e, f, env, ws, [&](Nat c, const ArithEnv& env2) { return djg(c, f->left, env2, node); });
    } else {
      throw RealizeError("unexpected connective in plain formula: " + print(f));
    }
    memo_[key] = out;
    return out;
  }

  // Realizability of a forcing translation; nucleus variables are bound to
  // frame nodes in `at`, and guards range over the nodes above their base.
  using NodeEnv = std::vector<std::pair<std::string, int>>;

  Outcome preal(Nat e, const FPtr& m, const ArithEnv& env, const NodeEnv& at) {
    require_frame();
    std::string key = memo_key('p', e, m, env);
    for (auto& [k, g] : at) key += "|" + k + "=" + std::to_string(g);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Outcome out;
    auto sub = [&](Nat e2, const FPtr& g, const ArithEnv& env2) { return preal(e2, g, env2, at); };
    if (m->kind == Kind::Mod) {
      lookup(at, m->name);
      out = preal(e, m->left, env, at);
    } else if (m->kind == Kind::Guard) {
      int base = lookup(at, m->above);
      const FPtr& body = m->left;
      if (body->kind == Kind::Imp) {
        std::vector<World> ws;
        for (int g : t_->up[base]) {
          NodeEnv at2 = at;
          at2.emplace_back(m->name, g);
          ws.push_back({&t_->nodes[g], json(t_->nodes[g].label),
                        [this, body, env, at2](Nat a) { return preal(a, body->left, env, at2); },
                        [this, body, env, at2](Nat v) { return preal(v, body->right, env, at2); }});
        }
        out = implication(e, body->left, body->right, env, ws);
      } else if (body->kind == Kind::Forall) {
        std::vector<ForallWorld> ws;
        for (int g : t_->up[base]) {
          NodeEnv at2 = at;
          at2.emplace_back(m->name, g);
          ws.push_back({&t_->nodes[g], json(t_->nodes[g].label), [this, body, env, at2](std::uint64_t n, Nat v) {
                          return preal(v, body->left, env.with(body->name, n), at2);
                        }});
        }
        NodeEnv at_base = at;
        at_base.emplace_back(m->name, base);
        out = universal(e, body, env, ws,
                        [&](Nat c, const ArithEnv& env2) { return preal(c, body->left, env2, at_base); });
      } else {
        throw RealizeError("guard must enclose an implication or a universal: " + print(m));
      }
    } else if (auto c = common(e, m, env, sub)) {
      out = *c;
    } else {
      throw RealizeError("implication or universal outside a guard: " + print(m));
    }
    memo_[key] = out;
    return out;
  }

 private:
  struct World {
    const Oracle* oracle;
    json label;
    std::function<Outcome(Nat)> antecedent;
    std::function<Outcome(Nat)> consequent;
  };
  struct ForallWorld {
    const Oracle* oracle;
    json label;
    std::function<Outcome(std::uint64_t, Nat)> body;
  };

  void require_frame() const {
    if (!t_) throw RealizeError("no oracle frame given");
  }
  static int lookup(const NodeEnv& at, const std::string& k) {
    for (auto it = at.rbegin(); it != at.rend(); ++it)
      if (it->first == k) return it->second;
    throw RealizeError("unbound nucleus variable '" + k + "'");
  }
  static bool has_generic(const ArithEnv& env) {
    for (auto& [x, v] : env.b)
      if (!v) return true;
    return false;
  }
  // Memo keys name formulas by address; keyed formulas are kept alive so an
  // address is never reused by a different formula during this checker's life.
  std::string formula_id(const FPtr& f) {
    alive_.emplace(f.get(), f);
    return std::to_string(reinterpret_cast<std::uintptr_t>(f.get()));
  }
  // Oracles are interned by content for the same reason.
  std::string oracle_id(const Oracle& o) {
    auto same = [&](const Oracle& a) { return a.label == o.label && a.table == o.table; };
    if (auto it = oracle_seen_.find(&o); it != oracle_seen_.end() && same(oracles_[it->second]))
      return std::to_string(it->second);
    std::size_t id = 0;
    while (id < oracles_.size() && !same(oracles_[id])) ++id;
    if (id == oracles_.size()) oracles_.push_back(o);
    oracle_seen_[&o] = id;
    return std::to_string(id);
  }
  std::string memo_key(char mode, Nat e, const FPtr& f, const ArithEnv& env) {
    return std::string(1, mode) + std::to_string(e.bits) + "|" + formula_id(f) + "|" + env.key();
  }

  // 0 = S(t) and the like, when one side is generic.
  bool distinct_shapes(const TermPtr& l, const TermPtr& r, const ArithEnv& env) {
    auto is_zero_term = [&](const TermPtr& t) {
      auto v = eval_arith(t, env);
      return !v.generic && v.value && *v.value == 0;
    };
    return (is_zero_term(l) && r->kind == TermKind::Succ) || (is_zero_term(r) && l->kind == TermKind::Succ);
  }

  RunResult run_apply(Nat e, Nat n, const Oracle& o) {
    ++applications_;
    RunResult r = apply(e, n, o, b_.fuel);
    queried_.insert(r.queries.begin(), r.queries.end());
    big_query_ = big_query_ || r.big_query;
    return r;
  }

  static std::string uncertainty(const Outcome& s) {
    if (s.verdict == Verdict::Exhausted) return s.budget;
    return s.relative.empty() ? "candidates" : *s.relative.begin();
  }

  template <class Sub>
  std::optional<Outcome> common(Nat e, const FPtr& f, const ArithEnv& env, Sub&& sub) {
    switch (f->kind) {
      case Kind::Bot: return Outcome::refuted({{"clause", "bot"}});
      case Kind::Eq:
      case Kind::Atom: {
        if (f->kind == Kind::Atom && !is_step_halt(*f)) throw RealizeError("abstract atom " + f->name);
        std::string why;
        Tri t = atom_truth(*f, env, &why);
        json step = {{"clause", "atom"}, {"atom", print(f)}, {"env", env.key()}};
        if (t == Tri::True) return Outcome::realized(true);
        if (t == Tri::False) return Outcome::refuted(step);
        return Outcome::exhausted(why.empty() ? "fuel" : why, step);
      }
      case Kind::And: {
        auto [a, b] = unpair(e);
        Outcome l = sub(a, f->left, env);
        if (l.verdict == Verdict::Refuted) return l.with_step({{"clause", "and"}, {"part", "left"}, {"realizer", nat_repr(a)}});
        Outcome r = sub(b, f->right, env);
        if (r.verdict == Verdict::Refuted) return r.with_step({{"clause", "and"}, {"part", "right"}, {"realizer", nat_repr(b)}});
        if (l.verdict == Verdict::Exhausted) return l.with_step({{"clause", "and"}, {"part", "left"}});
        if (r.verdict == Verdict::Exhausted) return r.with_step({{"clause", "and"}, {"part", "right"}});
        Outcome o = Outcome::realized(l.certified && r.certified);
        if (!o.certified) {
          o.relative = l.relative;
          o.relative.insert(r.relative.begin(), r.relative.end());
        }
        return o;
      }
      case Kind::Or: {
        auto [tag, r] = unpair(e);
        if (tag == Nat(0)) return sub(r, f->left, env).with_step({{"clause", "or"}, {"tag", 0}});
        if (tag == Nat(1)) return sub(r, f->right, env).with_step({{"clause", "or"}, {"tag", 1}});
        return Outcome::refuted({{"clause", "or"}, {"tag", nat_repr(tag)}});
      }
      case Kind::Exists: {
        auto [w, r] = unpair(e);
        if (!w.small()) return Outcome::exhausted("numeric range", {{"clause", "exists"}, {"witness", nat_repr(w)}});
        return sub(r, f->left, env.with(f->name, w.bits)).with_step({{"clause", "exists"}, {"witness", w.bits}});
      }
      default: return std::nullopt;
    }
  }

  Outcome implication(Nat e, const FPtr& ante, const FPtr& cons, const ArithEnv& env, const std::vector<World>& ws) {
    if (unrealizable(ante, env)) return Outcome::realized(true);
    if (auto c = const_value(e)) {
      bool all_cert = true;
      for (auto& w : ws) {
        Outcome t = w.consequent(*c);
        if (t.verdict == Verdict::Refuted) {
          if (auto a = certified_realizer(ante, env))
            return t.with_step({{"clause", "imp"}, {"world", w.label}, {"constant", nat_repr(*c)},
                                {"candidate", nat_repr(*a)}, {"antecedent", "certified"}});
        }
        if (t.verdict != Verdict::Realized || !t.certified) all_cert = false;
      }
      if (all_cert) return Outcome::realized(true);
    }
    const bool dead_end = unrealizable(cons, env);
    std::set<std::string> rel{"candidates"};
    std::optional<Outcome> pending;
    for (auto& w : ws) {
      for (std::uint64_t a = 0; a < b_.candidates; ++a) {
        Outcome s = w.antecedent(Nat(a));
        if (s.verdict == Verdict::Refuted) continue;
        bool sure = s.verdict == Verdict::Realized && s.certified;
        json step = {{"clause", "imp"}, {"world", w.label}, {"candidate", a},
                     {"antecedent", sure ? "certified" : "budget-relative"}};
        if (dead_end) {  // no value could realize the consequent
          step["consequent"] = "unrealizable";
          if (sure) return Outcome::refuted(step);
          if (!pending) pending = Outcome::exhausted(uncertainty(s), step);
          continue;
        }
        RunResult r = run_apply(e, Nat(a), *w.oracle);
        if (r.status == RunStatus::OutOfFuel) {
          if (!pending) pending = Outcome::exhausted("fuel", step);
          continue;
        }
        if (r.status == RunStatus::Stuck) {
          step["application"] = "stuck: " + r.stuck;
          if (sure) return Outcome::refuted(step);
          if (!pending) pending = Outcome::exhausted(uncertainty(s), step);
          continue;
        }
        step["value"] = nat_repr(r.value);
        Outcome t = w.consequent(r.value);
        if (t.verdict == Verdict::Refuted) {
          if (sure) return t.with_step(step);
          if (!pending) pending = Outcome::exhausted(uncertainty(s), step);
        } else if (t.verdict == Verdict::Exhausted) {
          if (!pending) pending = t.with_step(step);
        } else {
          rel.insert(t.relative.begin(), t.relative.end());
        }
      }
    }
    if (pending) return *pending;
    return Outcome::realized(false, rel);
  }

  template <class Direct>
  Outcome universal(Nat e, const FPtr& f, const ArithEnv& env, const std::vector<ForallWorld>& ws, Direct&& direct) {
    if (auto c = const_value(e)) {
      const FPtr& body = strip_modal(f->left);
      if (!free_vars(body).count(f->name)) {
        Outcome t = direct(*c, env.with(f->name, 0));
        if (t.verdict == Verdict::Realized && t.certified) return t;
      } else if (body->kind == Kind::Imp && unrealizable(body->left, env.with(f->name, std::nullopt))) {
        return Outcome::realized(true);
      } else {
        // the constant settles every instance at once when the body holds generically
        Outcome t = direct(*c, env.with(f->name, std::nullopt));
        if (t.verdict == Verdict::Realized && t.certified) return t;
      }
    }
    std::set<std::string> rel{"universe"};
    std::optional<Outcome> pending;
    for (auto& w : ws) {
      for (std::uint64_t n = 0; n < b_.universe; ++n) {
        json step = {{"clause", "forall"}, {"world", w.label}, {"n", n}};
        RunResult r = run_apply(e, Nat(n), *w.oracle);
        if (r.status == RunStatus::OutOfFuel) {
          if (!pending) pending = Outcome::exhausted("fuel", step);
          continue;
        }
        if (r.status == RunStatus::Stuck) {
          step["application"] = "stuck: " + r.stuck;
          return Outcome::refuted(step);
        }
        step["value"] = nat_repr(r.value);
        Outcome t = w.body(n, r.value);
        if (t.verdict == Verdict::Refuted) return t.with_step(step);
        if (t.verdict == Verdict::Exhausted) {
          if (!pending) pending = t.with_step(step);
        } else {
          rel.insert(t.relative.begin(), t.relative.end());
        }
      }
    }
    if (pending) return *pending;
    return Outcome::realized(false, rel);
  }

  Budgets b_;
  const OraclePoset* t_;
  HaltingCache halting_;
  std::unordered_map<const Formula*, FPtr> alive_;
  std::vector<Oracle> oracles_;
  std::unordered_map<const Oracle*, std::size_t> oracle_seen_;
  std::unordered_map<std::string, Outcome> memo_;
  std::unordered_map<std::string, bool> bool_memo_;
  std::unordered_map<std::string, std::optional<Nat>> nat_memo_;
  std::set<std::uint64_t> queried_;
  bool big_query_ = false;
  std::uint64_t applications_ = 0;
};

// ------------------------------------------------------------ entry points

inline Outcome realizes(Nat e, const FPtr& phi, const Oracle& f, const Budgets& cfg = {}) {
  require_arithmetic(phi);
  Realizability r(cfg);
  return r.kleene(e, phi, {}, f);
}

// Applies the code to the given numerals first (for closed scheme instances).
inline Outcome realizes_at(Nat code, const FPtr& phi, const std::vector<Nat>& params, const Oracle& f,
                           const Budgets& cfg = {}) {
  return realizes(apply_code(code, params), phi, f, cfg);
}

inline int require_member(const Oracle& f, const OraclePoset& t) {
  int i = t.index_of(f);
  if (i < 0) throw RealizeError("oracle '" + f.label + "' is not in the frame");
  return i;
}

inline Outcome djg_realizes(Nat e, const FPtr& phi, const Oracle& f, const OraclePoset& t, const Budgets& cfg = {}) {
  require_arithmetic(phi);
  int node = require_member(f, t);
  Realizability r(cfg, &t);
  return r.djg(e, phi, {}, node);
}

// ------------------------------------------------------------ assumption (A)

struct AssumptionReport {
  bool pass = true;
  std::uint64_t bound = 0;
  json pairs = json::array();

  json to_json() const { return {{"pass", pass}, {"scan_bound", bound}, {"pairs", pairs}}; }
  std::string offending() const {
    for (auto& p : pairs)
      if (p.value("flagged", false)) return p.dump();
    return "";
  }
};

// f below g in the oracle-program order: some code e computes f relative to g.
// Extension pairs are certified by the oracle code itself; other pairs are
// scanned over codes below `bound` on dom(f) restricted to [0, bound).
inline AssumptionReport check_assumption_A(const OraclePoset& t, std::uint64_t bound = 64, std::uint64_t fuel = 2000) {
  AssumptionReport rep;
  rep.bound = bound;
  Nat ora = encode(prim(Prim::Ora));
  int n = static_cast<int>(t.nodes.size());
  for (int i = 0; i < n; ++i)
    for (int g = 0; g < n; ++g) {
      if (i == g) continue;
      const Oracle& f = t.nodes[i];
      const Oracle& h = t.nodes[g];
      json entry = {{"from", f.label}, {"to", h.label}};
      if (t.le(i, g)) {
        bool ok = true;
        for (auto& [k, v] : f.table) {
          RunResult r = apply(ora, Nat(k), h, fuel);
          ok = ok && r.status == RunStatus::Halted && r.value == Nat(v);
        }
        entry["extension"] = true;
        entry["certified_by"] = ora.bits;
        entry["flagged"] = !ok;
        if (!ok) rep.pass = false;
      } else {
        entry["extension"] = false;
        std::optional<std::uint64_t> found;
        for (std::uint64_t e = 0; e < bound && !found; ++e) {
          bool all = true;
          for (auto& [k, v] : f.table) {
            if (k >= bound) continue;
            RunResult r = apply(Nat(e), Nat(k), h, fuel);
            if (r.status != RunStatus::Halted || !(r.value == Nat(v))) {
              all = false;
              break;
            }
          }
          if (all) found = e;
        }
        entry["flagged"] = found.has_value();
        if (found) {
          entry["reducing_code"] = *found;
          rep.pass = false;
        }
      }
      rep.pairs.push_back(entry);
    }
  return rep;
}

struct PrealReport {
  Outcome outcome;
  std::string translation;
  AssumptionReport assumption;
  json to_json() const {
    json j = outcome.to_json();
    j["translation"] = translation;
    j["assumption_A"] = assumption.to_json();
    return j;
  }
};

// Realizability of the forcing translation in the standard frame {j_f | f in S}
// at the nucleus of f; guards range over oracle extensions.
inline PrealReport preal_standard(Nat e, const FPtr& phi, const Oracle& f, const OraclePoset& s, const Budgets& cfg = {},
                                  std::uint64_t a_bound = 64) {
  require_arithmetic(phi);
  int node = require_member(f, s);
  PrealReport rep;
  rep.assumption = check_assumption_A(s, a_bound);
  if (!rep.assumption.pass) throw RealizeError("assumption (A) fails on " + rep.assumption.offending());
  FPtr m = forcing_translate(phi, "j", "P");
  rep.translation = print(m);
  Realizability r(cfg, &s);
  rep.outcome = r.preal(e, m, {}, {{"j", node}});
  return rep;
}

// ------------------------------------------------------------ m_f

// n is in m_f(p): n applied to <m, f(m)> lands in p for some m in dom(f).
inline Tri m_f_member(Nat n, const std::set<std::uint64_t>& p, const Oracle& f, std::uint64_t fuel = 10000) {
  bool unknown = false;
  for (auto& [m, v] : f.table) {
    RunResult r = apply(n, pair(Nat(m), Nat(v)), empty_oracle(), fuel);
    if (r.status == RunStatus::OutOfFuel) unknown = true;
    if (r.status == RunStatus::Halted && r.value.small() && p.count(r.value.bits)) return Tri::True;
  }
  return unknown ? Tri::Unknown : Tri::False;
}

// ------------------------------------------------------------ library realizers

inline Nat mp_realizer() { return encode(programs::markov()); }
inline Nat induction_realizer_code() { return encode(programs::induction()); }

inline FPtr sigma1_dne(std::uint64_t e, std::uint64_t x) {
  return scheme({ClassTag::Sigma, 1}, Axiom::DNE, sigma1_instance(numeral(e), numeral(x)));
}
inline FPtr piorpi1_dne(std::uint64_t e1, std::uint64_t x1, std::uint64_t e2, std::uint64_t x2) {
  return scheme({ClassTag::PiOrPi, 1}, Axiom::DNE, universal_instance({ClassTag::PiOrPi, 1}, e1, x1, e2, x2));
}

// (psi[0] /\ forall x. (psi -> psi[S x])) -> forall x. psi
inline FPtr induction_formula(const FPtr& psi, const std::string& x) {
  auto fv = free_vars(psi);
  if (fv.size() > 1 || (fv.size() == 1 && !fv.count(x)))
    throw RealizeError("induction needs a formula whose only free variable is " + x);
  if (has_abstract_atom(psi) || has_modal(psi)) throw RealizeError("induction needs an arithmetic formula");
  FPtr base = subst(psi, x, zero());
  FPtr step = forall(x, imp(psi, subst(psi, x, succ(var(x)))));
  return imp(conj(base, step), forall(x, psi));
}

inline Nat induction_realizer(const FPtr& psi, const std::string& x = "x") {
  induction_formula(psi, x);  // validates
  return induction_realizer_code();
}

// The realizer of a PiOrPi(1)-DNE instance that asks the oracle whether the
// first computation halted: f(pair(e1,x1)) = 0 selects the left disjunct.
inline Nat halting_guess_realizer(std::uint64_t e1, std::uint64_t x1) {
  using namespace lam;
  Nat k0 = const_code(Nat(0));
  L left = num(pair(Nat(0), k0));
  L right = num(pair(Nat(1), k0));
  L query = ap(p(Prim::Ora), num(pair(Nat(e1), Nat(x1))));
  return encode(compile(abs("r", ap(p(Prim::Case), {left, abs("m", right), query}))));
}


// ------------------------------------------------------------ double-negation lift

struct LiftReport {
  Nat code;
  Outcome outcome;
  Outcome premise;
  std::uint64_t candidates = 0, stuck = 0, halted = 0, out_of_fuel = 0;
  json to_json() const {
    return {{"code", nat_repr(code)},
            {"outcome", outcome.to_json()},
            {"premise", premise.to_json()},
            {"candidates_refuted", candidates},
            {"runs", {{"stuck", stuck}, {"halted", halted}, {"out_of_fuel", out_of_fuel}}}};
  }
};

// not-not phi at node f from a realizer r of phi at a node g lying above every
// node above f. A candidate a for not-phi at some k >= f would have to send r,
// at g, to a realizer of bottom; each candidate below the bound is run on r at
// g and fails whatever the run does, since bottom has no realizer.
inline LiftReport not_not_lift(const FPtr& phi, const OraclePoset& t, int f, int g, Nat r, const Budgets& cfg = {}) {
  require_arithmetic(phi);
  cfg.validate();
  const int n = static_cast<int>(t.nodes.size());
  if (f < 0 || g < 0 || f >= n || g >= n) throw RealizeError("lift: node out of range");
  for (int k : t.up[f])
    if (!t.le(k, g))
      throw RealizeError("lift: " + t.nodes[g].label + " is not above " + t.nodes[k].label + ", which lies above " +
                         t.nodes[f].label);
  Realizability chk(cfg, &t);
  LiftReport rep;
  rep.code = identity_code();
  rep.premise = chk.djg(r, phi, {}, g);
  if (rep.premise.verdict == Verdict::Refuted)
    throw RealizeError("lift: precondition fails, the realizer is Refuted at " + t.nodes[g].label);
  if (rep.premise.verdict == Verdict::Exhausted) {
    rep.outcome = rep.premise.with_step({{"clause", "lift"}, {"premise_at", t.nodes[g].label}});
    return rep;
  }
  for (std::size_t k = 0; k < t.up[f].size(); ++k)
    for (std::uint64_t a = 0; a < cfg.candidates; ++a) {
      ++rep.candidates;
      RunResult run = apply(Nat(a), r, t.nodes[g], cfg.fuel);
      if (run.status == RunStatus::Stuck) ++rep.stuck;
      else if (run.status == RunStatus::Halted) ++rep.halted;
      else ++rep.out_of_fuel;
    }
  std::set<std::string> rel = rep.premise.relative;
  rel.insert("candidates");
  rep.outcome = Outcome::realized(false, rel);
  if (rep.premise.certified) rep.outcome = Outcome::realized(true);
  return rep;
}

// ------------------------------------------------------------ separation experiment

struct DemoConfig {
  Budgets budgets;                    // fuel also bounds the halting table
  std::uint64_t table_codes = 64;     // f1 is defined at <e,x> for e below this
  std::uint64_t table_inputs = 4;     // ... and x below this
  std::uint64_t sigma_codes = 16, sigma_inputs = 2;
  std::optional<std::vector<Nat>> candidates;  // default: codes below 64 and two fixed guessers
  std::uint64_t assumption_bound = 64;
};

struct DemoReport {
  json report;
  int exit_code = 0;
};

// f1(<e,x>) = s+1 when e applied to x halts after s transitions within the fuel, else 0.
inline Oracle halting_table(std::uint64_t codes, std::uint64_t inputs, std::uint64_t fuel) {
  Oracle o;
  o.label = "f1";
  for (std::uint64_t e = 0; e < codes; ++e)
    for (std::uint64_t x = 0; x < inputs; ++x) {
      RunResult r = apply(Nat(e), Nat(x), empty_oracle(), fuel);
      Nat key = pair(Nat(e), Nat(x));
      o.table[key.bits] = r.status == RunStatus::Halted ? r.steps + 1 : 0;
    }
  return o;
}

inline std::vector<Nat> default_demo_candidates() {
  std::vector<Nat> out;
  for (std::uint64_t c = 0; c < 64; ++c) out.push_back(Nat(c));
  Nat k0 = const_code(Nat(0));
  out.push_back(const_code(pair(Nat(0), k0)));  // always the left disjunct
  out.push_back(const_code(pair(Nat(1), k0)));  // always the right disjunct
  return out;
}

namespace detail {

inline const char* section_status(bool red, bool exhausted) { return red ? "red" : exhausted ? "exhausted" : "green"; }

}  // namespace detail

inline DemoReport separation_demo(const DemoConfig& cfg) {
  cfg.budgets.validate();
  const Budgets& b = cfg.budgets;
  DemoReport out;
  json& rep = out.report;
  rep["caveats"] = {
      "Realized verdicts are relative to the budgets listed with them (fuel, witness, candidates, universe); "
      "certified ones hold outright.",
      "Refuted verdicts are absolute: each carries a replayable counter-witness.",
      "The oracle f1 is a bounded halting table, not a Turing jump; section (ii) refutes the listed candidates only."};
  rep["budgets"] = b.to_json();

  Oracle f0{"f0", {}};
  Oracle f1 = halting_table(cfg.table_codes, cfg.table_inputs, b.fuel);
  OraclePoset s = make_oracle_poset({f0, f1}, {{0, 1}});
  rep["frame"] = {{"nodes", {"f0 (empty)", "f1 (halting table)"}},
                  {"f1_domain", f1.table.size()},
                  {"f1_codes", cfg.table_codes},
                  {"f1_inputs", cfg.table_inputs}};
  AssumptionReport a = check_assumption_A(s, cfg.assumption_bound);
  rep["assumption_A"] = a.to_json();
  if (!a.pass) {
    rep["error"] = "assumption (A) fails on " + a.offending();
    out.exit_code = 1;
    return out;
  }
  Realizability chk(b, &s);
  auto preal_at = [&](Nat e, const FPtr& phi, int node) {
    return chk.preal(e, forcing_translate(phi, "j", "P"), {}, {{"j", node}});
  };
  bool any_red = false, any_exhausted = false;
  auto tally = [&](json& sec, bool red, bool exh) {
    sec["status"] = detail::section_status(red, exh);
    any_red = any_red || red;
    any_exhausted = any_exhausted || (!red && exh);
  };

  // (i) Markov's principle at the root.
  {
    json sec = {{"title", "Sigma1-DNE instances realized at f0 by the search code"}};
    Nat mp = mp_realizer();
    json rows = json::array();
    bool red = false, exh = false;
    std::uint64_t skipped = 0;
    for (std::uint64_t e = 0; e < cfg.sigma_codes; ++e)
      for (std::uint64_t x = 0; x < cfg.sigma_inputs; ++x) {
        RunResult run = apply(Nat(e), Nat(x), empty_oracle(), b.fuel);
        if (run.status == RunStatus::OutOfFuel) {
          ++skipped;
          continue;
        }
        FPtr phi = sigma1_dne(e, x);
        Outcome o = preal_at(apply_code(mp, {Nat(e), Nat(x)}), phi, 0);
        red = red || o.verdict == Verdict::Refuted;
        exh = exh || o.verdict == Verdict::Exhausted;
        json row = {{"e", e}, {"x", x}, {"halts", run.status == RunStatus::Halted}, {"outcome", o.to_json()}};
        if (run.status == RunStatus::Halted) row["steps"] = run.steps;
        rows.push_back(row);
      }
    sec["instances"] = rows;
    sec["unresolved_runs_skipped"] = skipped;
    tally(sec, red, exh || skipped > 0);
    rep["i"] = sec;
  }

  // (ii) candidates for PiOrPi1-DNE at the root.
  const std::uint64_t e_stuck = 0, e_halt = encode(prim(Prim::Fst)).bits;
  FPtr inst1 = piorpi1_dne(e_stuck, 0, e_halt, 0), inst2 = piorpi1_dne(e_halt, 0, e_stuck, 0);
  {
    json sec = {{"title", "listed candidates refuted on PiOrPi1-DNE instances at f0"},
                {"instances", {print(inst1), print(inst2)}}};
    std::vector<Nat> cands = cfg.candidates ? *cfg.candidates : default_demo_candidates();
    json rows = json::array();
    bool red = false, exh = false;
    for (Nat c : cands) {
      Outcome o1 = preal_at(c, inst1, 0);
      Outcome o2 = o1.verdict == Verdict::Refuted ? Outcome{} : preal_at(c, inst2, 0);
      json row = {{"candidate", nat_repr(c)}};
      if (o1.verdict == Verdict::Refuted) {
        row["refuted_on"] = 1;
        row["counter_witness"] = o1.path;
      } else if (o2.verdict == Verdict::Refuted) {
        row["refuted_on"] = 2;
        row["counter_witness"] = o2.path;
      } else if (o1.verdict == Verdict::Exhausted || o2.verdict == Verdict::Exhausted) {
        row["unresolved"] = (o1.verdict == Verdict::Exhausted ? o1 : o2).to_json();
        exh = true;
      } else {
        row["realized_on_both"] = true;
        red = true;
      }
      rows.push_back(row);
    }
    sec["candidates"] = rows;
    if (cands.empty()) sec["status"] = "vacuous";
    else tally(sec, red, exh);
    rep["ii"] = sec;
  }

  // (iii) the oracle realizer at f1, lifted to the root.
  {
    json sec = {{"title", "not-not PiOrPi1-DNE realized at f0 by lifting the f1-realizer"}};
    json rows = json::array();
    bool red = false, exh = false;
    for (auto [phi, e1] : {std::pair{inst1, e_stuck}, std::pair{inst2, e_halt}}) {
      Nat r = halting_guess_realizer(e1, 0);
      json row = {{"instance", print(phi)}, {"realizer_at_f1", nat_repr(r)}};
      Outcome at1 = preal_at(r, phi, 1);
      Outcome at0 = preal_at(r, phi, 0);
      row["at_f1"] = at1.to_json();
      row["same_code_at_f0"] = at0.to_json();
      if (at1.verdict == Verdict::Realized) {
        LiftReport lift = not_not_lift(phi, s, 0, 1, r, b);
        row["lift"] = lift.to_json();
        red = red || lift.outcome.verdict == Verdict::Refuted;
        exh = exh || lift.outcome.verdict == Verdict::Exhausted;
      } else {
        red = red || at1.verdict == Verdict::Refuted;
        exh = exh || at1.verdict == Verdict::Exhausted;
      }
      rows.push_back(row);
    }
    sec["instances"] = rows;
    tally(sec, red, exh);
    rep["iii"] = sec;
  }

  // (iv) in the singleton frame the lift adds nothing beyond the given realizer.
  {
    json sec = {{"title", "singleton frame {f0}: Realized phi gives Realized not-not phi with the canonical lift"}};
    OraclePoset single = singleton_poset(f0);
    json rows = json::array();
    bool red = false, exh = false;
    std::vector<std::pair<Nat, FPtr>> samples;
    Nat mp = mp_realizer();
    for (std::uint64_t e = 0; e < cfg.sigma_codes && samples.size() < 6; e += 3) {
      RunResult run = apply(Nat(e), Nat(0), empty_oracle(), b.fuel);
      if (run.status != RunStatus::OutOfFuel) samples.push_back({apply_code(mp, {Nat(e), Nat(0)}), sigma1_dne(e, 0)});
    }
    samples.push_back({Nat(0), eq(numeral(2), numeral(2))});
    samples.push_back({pair(Nat(3), Nat(0)), exists("x", eq(var("x"), numeral(3)))});
    for (auto& [e, phi] : samples) {
      json row = {{"formula", print(phi)}, {"realizer", nat_repr(e)}};
      Outcome base = realizes(e, phi, f0, b);
      row["realized"] = base.to_json();
      if (base.verdict == Verdict::Realized) {
        LiftReport lift = not_not_lift(phi, single, 0, 0, e, b);
        row["lift"] = lift.outcome.to_json();
        red = red || lift.outcome.verdict == Verdict::Refuted;
        exh = exh || lift.outcome.verdict == Verdict::Exhausted;
      } else {
        exh = exh || base.verdict == Verdict::Exhausted;
        red = red || base.verdict == Verdict::Refuted;
      }
      rows.push_back(row);
    }
    sec["samples"] = rows;
    tally(sec, red, exh);
    rep["iv"] = sec;
  }

  out.exit_code = any_red ? 1 : any_exhausted ? 3 : 0;
  rep["status"] = any_red ? "red" : any_exhausted ? "exhausted" : "green";
  return out;
}

// ------------------------------------------------------------ sampled cases

struct RealizeCase {
  Nat code;
  FPtr sentence;
  Oracle oracle;
};

// Small closed arithmetic sentences, codes and oracles for agreement tests.
class CaseSampler {
 public:
  explicit CaseSampler(std::uint64_t seed) {
    std::seed_seq seq{seed, seed >> 32};
    rng_.seed(seq);
  }

  std::uint64_t pick(std::uint64_t n) { return rng_() % n; }

  TermPtr term(const std::vector<std::string>& vars, int depth) {
    std::uint64_t r = pick(depth > 0 ? 5 : 2);
    if (r == 1 && !vars.empty()) return var(vars[pick(vars.size())]);
    if (r == 2) return succ(term(vars, depth - 1));
    if (r == 3) return plus(term(vars, depth - 1), term(vars, depth - 1));
    if (r == 4 && !vars.empty()) return var(vars[pick(vars.size())]);
    return numeral(pick(4));
  }

  FPtr atom(const std::vector<std::string>& vars) {
    std::uint64_t r = pick(10);
    if (r == 0) return bot();
    if (r < 4) {
      auto arg = [&](std::uint64_t bound) { return !vars.empty() && pick(2) ? var(vars[pick(vars.size())]) : numeral(pick(bound)); };
      return step_halt(numeral(pick(24)), arg(3), arg(12));
    }
    return eq(term(vars, 1), term(vars, 1));
  }

  FPtr sentence(int depth, std::vector<std::string> vars = {}) {
    if (depth == 0) return atom(vars);
    switch (pick(8)) {
      case 0: return atom(vars);
      case 1: return conj(sentence(depth - 1, vars), sentence(depth - 1, vars));
      case 2: return disj(sentence(depth - 1, vars), sentence(depth - 1, vars));
      case 3: return imp(sentence(depth - 1, vars), sentence(depth - 1, vars));
      case 4: return lnot(sentence(depth - 1, vars));
      case 5:
      case 6: {
        std::string x = "v" + std::to_string(vars.size());
        vars.push_back(x);
        return forall(x, sentence(depth - 1, vars));
      }
      default: {
        std::string x = "v" + std::to_string(vars.size());
        vars.push_back(x);
        return exists(x, sentence(depth - 1, vars));
      }
    }
  }

  Nat code() {
    switch (pick(6)) {
      case 0: return Nat(pick(256));
      case 1: return const_code(Nat(pick(12)));
      case 2: return pair(Nat(pick(4)), Nat(pick(12)));
      case 3: return pair(Nat(pick(4)), pair(Nat(pick(3)), const_code(Nat(pick(3)))));
      case 4: return encode(random_term(2));
      default: return identity_code();
    }
  }

  Oracle oracle(const std::string& label) {
    Oracle o;
    o.label = label;
    std::uint64_t n = pick(4);
    for (std::uint64_t i = 0; i < n; ++i) o.table[pick(8)] = pick(8);
    return o;
  }

  RealizeCase next(int depth = 2) { return {code(), sentence(depth), oracle("f")}; }

 private:
  TermId random_term(int depth) {
    if (depth == 0 || pick(3) == 0) {
      std::uint64_t r = pick(11);
      if (r < 9) return prim(static_cast<Prim>(r));
      return num_term(Nat(pick(6)));
    }
    return app_term(random_term(depth - 1), random_term(depth - 1));
  }

  std::mt19937_64 rng_;
};

}  // namespace lopkit
