#pragma once
// A fuel-bounded combinatory machine with oracle calls.
//
// Terms: S | K | Pair | Fst | Snd | Succ | Case | Fix | Ora | Num(n) | App(t,u).
// Coding: code(t) = pair(tag, payload) with tags 0..8 for the primitives in the
// order above (payload 0), tag 9 for Num(n) (payload n) and tag 10 for App
// (payload pair(code t, code u)). Any other number decodes to Num(0).
//
// Evaluation is a Krivine-style machine: arguments are passed unevaluated,
// the arithmetic primitives force their arguments in a nested context, and a
// numeral applied to arguments behaves as the term it codes. One step is one
// machine transition.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lopkit/nat.hpp"

namespace lopkit {

struct MachineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Prim : std::uint8_t { S = 0, K, Pair, Fst, Snd, Succ, Case, Fix, Ora };
inline constexpr std::uint8_t kTagNum = 9;
inline constexpr std::uint8_t kTagApp = 10;
inline constexpr int kPrimCount = 9;

inline const char* prim_name(std::uint8_t t) {
  static const char* names[] = {"S", "K", "Pair", "Fst", "Snd", "Succ", "Case", "Fix", "Ora"};
  return names[t];
}
inline int prim_arity(std::uint8_t t) {
  static const int ar[] = {3, 2, 2, 1, 1, 1, 3, 1, 1};
  return ar[t];
}

using TermId = std::uint32_t;

struct TNode {
  std::uint8_t kind;  // 0..8 primitive, 9 numeral, 10 application
  Nat num;
  TermId fun = 0, arg = 0;
};

// ------------------------------------------------------------ term store

namespace detail {

struct TermStore {
  std::vector<TNode> nodes;
  std::unordered_map<std::uint64_t, TermId> nums;
  std::unordered_map<std::uint64_t, TermId> apps;
  std::unordered_map<std::uint64_t, TermId> decoded;
  std::unordered_map<TermId, Nat> encoded;

  TermStore() {
    for (std::uint8_t t = 0; t < kPrimCount; ++t) nodes.push_back({t, Nat(0), 0, 0});
  }
};

inline TermStore& store() {
  static TermStore s;
  return s;
}

}  // namespace detail

inline TermId prim(Prim p) { return static_cast<TermId>(p); }

inline TermId num_term(Nat n) {
  auto& st = detail::store();
  auto it = st.nums.find(n.bits);
  if (it != st.nums.end()) return it->second;
  auto id = static_cast<TermId>(st.nodes.size());
  st.nodes.push_back({kTagNum, n, 0, 0});
  st.nums.emplace(n.bits, id);
  return id;
}

inline TermId app_term(TermId f, TermId a) {
  auto& st = detail::store();
  std::uint64_t key = (std::uint64_t{f} << 32) | a;
  auto it = st.apps.find(key);
  if (it != st.apps.end()) return it->second;
  auto id = static_cast<TermId>(st.nodes.size());
  st.nodes.push_back({kTagApp, Nat(0), f, a});
  st.apps.emplace(key, id);
  return id;
}

inline TermId app_term(TermId f, std::initializer_list<TermId> args) {
  for (auto a : args) f = app_term(f, a);
  return f;
}

inline const TNode& term_node(TermId t) { return detail::store().nodes[t]; }

inline Nat encode(TermId t) {
  auto& st = detail::store();
  auto it = st.encoded.find(t);
  if (it != st.encoded.end()) return it->second;
  TNode n = st.nodes[t];
  Nat out;
  if (n.kind < kPrimCount) out = pair(Nat(n.kind), Nat(0));
  else if (n.kind == kTagNum) out = pair(Nat(kTagNum), n.num);
  else out = pair(Nat(kTagApp), pair(encode(n.fun), encode(n.arg)));
  st.encoded.emplace(t, out);
  return out;
}

inline TermId decode(Nat c) {
  auto& st = detail::store();
  auto it = st.decoded.find(c.bits);
  if (it != st.decoded.end()) return it->second;
  auto [tag, payload] = unpair(c);
  TermId out;
  if (below(tag, kPrimCount) && is_zero(payload)) {
    out = static_cast<TermId>(tag.bits);
  } else if (tag == Nat(kTagNum)) {
    out = num_term(payload);
  } else if (tag == Nat(kTagApp)) {
    auto [f, a] = unpair(payload);
    TermId tf = decode(f);
    TermId ta = decode(a);
    out = app_term(tf, ta);
  } else {
    out = num_term(Nat(0));
  }
  st.decoded.emplace(c.bits, out);
  return out;
}

inline std::size_t term_size(TermId t) {
  std::unordered_map<TermId, std::size_t> memo;
  std::function<std::size_t(TermId)> go = [&](TermId u) -> std::size_t {
    auto it = memo.find(u);
    if (it != memo.end()) return it->second;
    const TNode& n = term_node(u);
    std::size_t s = n.kind == kTagApp ? 1 + go(n.fun) + go(n.arg) : 1;
    memo.emplace(u, s);
    return s;
  };
  return go(t);
}

// Left-associated application, numerals as #n, `max_len` caps the output.
inline std::string print_term(TermId t, std::size_t max_len = 400) {
  std::string out;
  std::function<void(TermId, bool)> go = [&](TermId u, bool arg_pos) {
    if (out.size() > max_len) return;
    const TNode& n = term_node(u);
    if (n.kind < kPrimCount) {
      out += prim_name(n.kind);
    } else if (n.kind == kTagNum) {
      out += "#" + nat_repr(n.num, 60);
    } else {
      if (arg_pos) out += '(';
      go(n.fun, false);
      out += ' ';
      go(n.arg, true);
      if (arg_pos) out += ')';
    }
  };
  go(t, false);
  if (out.size() > max_len) out = out.substr(0, max_len) + "...";
  return out;
}

// Parses the printed syntax; `@n` inserts the term coded by n and bare
// identifiers other than primitives are looked up in `names`.
inline TermId parse_term(const std::string& text, const std::function<std::optional<TermId>(const std::string&)>& names = {}) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto numeral = [&]() -> Nat {
    std::size_t start = i;
    if (i < text.size() && text[i] == '<') {
      int depth = 0;
      while (i < text.size()) {
        if (text[i] == '<') ++depth;
        if (text[i] == '>' && --depth == 0) {
          ++i;
          break;
        }
        ++i;
      }
    } else {
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    }
    if (start == i) throw MachineError("expected a numeral at offset " + std::to_string(start));
    return parse_nat(text.substr(start, i - start));
  };
  std::function<TermId()> expr;
  std::function<std::optional<TermId>()> atom = [&]() -> std::optional<TermId> {
    skip();
    if (i >= text.size()) return std::nullopt;
    char c = text[i];
    if (c == '(') {
      ++i;
      TermId t = expr();
      skip();
      if (i >= text.size() || text[i] != ')') throw MachineError("expected ')' at offset " + std::to_string(i));
      ++i;
      return t;
    }
    if (c == '#') {
      ++i;
      return num_term(numeral());
    }
    if (c == '@') {
      ++i;
      return decode(numeral());
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return decode(numeral());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      std::string id = text.substr(start, i - start);
      for (std::uint8_t t = 0; t < kPrimCount; ++t)
        if (id == prim_name(t)) return static_cast<TermId>(t);
      if (names)
        if (auto r = names(id)) return *r;
      throw MachineError("unknown name '" + id + "' in term");
    }
    return std::nullopt;
  };
  expr = [&]() -> TermId {
    auto head = atom();
    if (!head) throw MachineError("expected a term at offset " + std::to_string(i));
    TermId t = *head;
    for (;;) {
      skip();
      if (i >= text.size() || text[i] == ')') break;
      auto a = atom();
      if (!a) break;
      t = app_term(t, *a);
    }
    return t;
  };
  TermId t = expr();
  skip();
  if (i != text.size()) throw MachineError("trailing input in term at offset " + std::to_string(i));
  return t;
}

// ------------------------------------------------------------ oracles

struct Oracle {
  std::string label;
  std::map<std::uint64_t, std::uint64_t> table;

  std::optional<Nat> lookup(Nat n) const {
    if (!n.small()) return std::nullopt;
    auto it = table.find(n.bits);
    if (it == table.end()) return std::nullopt;
    return Nat(it->second);
  }
  bool defined(std::uint64_t n) const { return table.count(n) != 0; }
  // f is a sub-function of g.
  bool extended_by(const Oracle& g) const {
    for (auto& [k, v] : table) {
      auto it = g.table.find(k);
      if (it == g.table.end() || it->second != v) return false;
    }
    return true;
  }
  bool operator==(const Oracle& o) const { return table == o.table; }
};

inline const Oracle& empty_oracle() {
  static const Oracle o{"empty", {}};
  return o;
}

// ------------------------------------------------------------ evaluation

enum class RunStatus { Halted, Stuck, OutOfFuel };

struct RunResult {
  RunStatus status = RunStatus::OutOfFuel;
  Nat value;
  std::uint64_t steps = 0;
  std::string stuck;                      // reason when Stuck
  std::vector<std::uint64_t> queries;     // oracle points asked, in order
  bool big_query = false;                 // an oracle query beyond 2^63
};

namespace detail {

inline constexpr TermId kScratch = TermId{1} << 31;
inline constexpr std::uint32_t kNil = ~std::uint32_t{0};

enum FrameKind : std::uint8_t { PairL, PairR, FstK, SndK, SuccK, CaseK, OraK };

struct Frame {
  FrameKind kind;
  TermId a = 0, b = 0;
  Nat m;
  std::uint32_t rest;  // saved argument stack
  std::uint32_t next;
};

struct Cell {
  TermId t;
  std::uint32_t next;
};

class Runner {
 public:
  Runner(const Oracle* f, std::uint64_t fuel) : f_(f), fuel_(fuel) {}

  RunResult run(TermId head) {
    RunResult r;
    std::uint32_t stack = kNil, kont = kNil;
    std::uint64_t steps = 0;
    for (;;) {
      TNode h = node(head);
      if (h.kind == kTagNum && stack == kNil && kont == kNil) {
        r.status = RunStatus::Halted;
        r.value = h.num;
        break;
      }
      if (h.kind < kPrimCount && !has_args(stack, prim_arity(h.kind))) {
        r.status = RunStatus::Stuck;
        r.stuck = std::string(prim_name(h.kind)) + " applied to too few arguments";
        break;
      }
      std::optional<Nat> oracle_value;
      if (h.kind == kTagNum && stack == kNil && frames_[kont].kind == OraK) {
        if (!h.num.small()) r.big_query = true;
        else r.queries.push_back(h.num.bits);
        oracle_value = f_ ? f_->lookup(h.num) : std::nullopt;
        if (!oracle_value) {
          r.status = RunStatus::Stuck;
          r.stuck = "oracle undefined at " + nat_repr(h.num, 40);
          break;
        }
      }
      if (steps == fuel_) {
        r.status = RunStatus::OutOfFuel;
        break;
      }
      ++steps;
      if (h.kind == kTagApp) {
        stack = push(h.arg, stack);
        head = h.fun;
        continue;
      }
      if (h.kind == kTagNum) {
        if (stack != kNil) {
          head = decode(h.num);
          continue;
        }
        Frame fr = frames_[kont];
        kont = fr.next;
        Nat v = h.num;
        switch (fr.kind) {
          case PairL:
            kont = frame({PairR, 0, 0, v, fr.rest, kont});
            head = fr.b;
            stack = kNil;
            break;
          case PairR: head = scratch_num(pair(fr.m, v)); stack = fr.rest; break;
          case FstK: head = scratch_num(fst(v)); stack = fr.rest; break;
          case SndK: head = scratch_num(snd(v)); stack = fr.rest; break;
          case SuccK: head = scratch_num(succ(v)); stack = fr.rest; break;
          case CaseK:
            if (is_zero(v)) {
              head = fr.a;
              stack = fr.rest;
            } else {
              head = fr.b;
              stack = push(scratch_num(pred(v)), fr.rest);
            }
            break;
          case OraK: head = scratch_num(*oracle_value); stack = fr.rest; break;
        }
        continue;
      }
      // primitive with enough arguments
      TermId a1 = cells_[stack].t;
      std::uint32_t s1 = cells_[stack].next;
      switch (static_cast<Prim>(h.kind)) {
        case Prim::K: head = a1; stack = cells_[s1].next; break;
        case Prim::S: {
          TermId b = cells_[s1].t;
          std::uint32_t s2 = cells_[s1].next;
          TermId c = cells_[s2].t;
          std::uint32_t s3 = cells_[s2].next;
          stack = push(c, push(scratch_app(b, c), s3));
          head = a1;
          break;
        }
        case Prim::Fix: stack = push(scratch_app(prim(Prim::Fix), a1), s1); head = a1; break;
        case Prim::Pair:
          kont = frame({PairL, 0, cells_[s1].t, Nat(0), cells_[s1].next, kont});
          head = a1;
          stack = kNil;
          break;
        case Prim::Fst: kont = frame({FstK, 0, 0, Nat(0), s1, kont}); head = a1; stack = kNil; break;
        case Prim::Snd: kont = frame({SndK, 0, 0, Nat(0), s1, kont}); head = a1; stack = kNil; break;
        case Prim::Succ: kont = frame({SuccK, 0, 0, Nat(0), s1, kont}); head = a1; stack = kNil; break;
        case Prim::Ora: kont = frame({OraK, 0, 0, Nat(0), s1, kont}); head = a1; stack = kNil; break;
        case Prim::Case: {
          TermId b = cells_[s1].t;
          std::uint32_t s2 = cells_[s1].next;
          kont = frame({CaseK, a1, b, Nat(0), cells_[s2].next, kont});
          head = cells_[s2].t;
          stack = kNil;
          break;
        }
      }
    }
    r.steps = steps;
    return r;
  }

 private:
  TNode node(TermId t) const { return (t & kScratch) ? scratch_[t & ~kScratch] : term_node(t); }
  TermId scratch_num(Nat n) {
    scratch_.push_back({kTagNum, n, 0, 0});
    return kScratch | static_cast<TermId>(scratch_.size() - 1);
  }
  TermId scratch_app(TermId f, TermId a) {
    scratch_.push_back({kTagApp, Nat(0), f, a});
    return kScratch | static_cast<TermId>(scratch_.size() - 1);
  }
  std::uint32_t push(TermId t, std::uint32_t next) {
    cells_.push_back({t, next});
    return static_cast<std::uint32_t>(cells_.size() - 1);
  }
  std::uint32_t frame(Frame f) {
    frames_.push_back(f);
    return static_cast<std::uint32_t>(frames_.size() - 1);
  }
  bool has_args(std::uint32_t s, int n) const {
    for (int i = 0; i < n; ++i) {
      if (s == kNil) return false;
      s = cells_[s].next;
    }
    return true;
  }

  const Oracle* f_;
  std::uint64_t fuel_;
  std::vector<TNode> scratch_;
  std::vector<Cell> cells_;
  std::vector<Frame> frames_;
};

}  // namespace detail

inline RunResult run_term(TermId t, const Oracle& f, std::uint64_t fuel) {
  if (fuel < 1) throw MachineError("fuel must be at least 1");
  return detail::Runner(&f, fuel).run(t);
}

// e applied to n relative to f: runs App(decode(e), Num(n)).
inline RunResult apply(Nat e, Nat n, const Oracle& f, std::uint64_t fuel) {
  return run_term(app_term(decode(e), num_term(n)), f, fuel);
}

// Code of the term obtained by applying the term coded by e to numerals.
inline Nat apply_code(Nat e, const std::vector<Nat>& args) {
  TermId t = decode(e);
  for (auto a : args) t = app_term(t, num_term(a));
  return encode(t);
}

// ------------------------------------------------------------ lambda compiler

// Lambda terms over the machine's primitives, compiled to S/K form by bracket
// abstraction. Used to build the library realizers.
namespace lam {

struct Node;
using L = std::shared_ptr<const Node>;

struct Node {
  enum Kind { Var, Const, Abs, App } kind;
  std::string name;  // Var, Abs
  TermId term = 0;   // Const
  L a, b;            // Abs body in a; App fun in a, arg in b
  std::set<std::string> free;
};

inline L var(const std::string& x) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Var;
  n->name = x;
  n->free = {x};
  return n;
}
inline L cst(TermId t) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Const;
  n->term = t;
  return n;
}
inline L num(Nat v) { return cst(num_term(v)); }
inline L p(Prim pr) { return cst(prim(pr)); }
inline L ap(L f, L a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::App;
  n->free = f->free;
  n->free.insert(a->free.begin(), a->free.end());
  n->a = std::move(f);
  n->b = std::move(a);
  return n;
}
inline L ap(L f, std::initializer_list<L> args) {
  for (auto& x : args) f = ap(f, x);
  return f;
}
inline L abs(const std::string& x, L body) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Abs;
  n->name = x;
  n->free = body->free;
  n->free.erase(x);
  n->a = std::move(body);
  return n;
}
inline L abs(std::initializer_list<std::string> xs, L body) {
  std::vector<std::string> v(xs);
  for (auto it = v.rbegin(); it != v.rend(); ++it) body = abs(*it, body);
  return body;
}

namespace detail {

inline L abstract(const std::string& x, const L& m) {
  if (!m->free.count(x)) return ap(p(Prim::K), m);
  if (m->kind == Node::Var) return ap(p(Prim::S), {p(Prim::K), p(Prim::K)});
  // m is an application containing x
  if (m->b->kind == Node::Var && m->b->name == x && !m->a->free.count(x)) return m->a;
  return ap(p(Prim::S), {abstract(x, m->a), abstract(x, m->b)});
}

inline L eliminate(const L& m) {
  switch (m->kind) {
    case Node::Var:
    case Node::Const: return m;
    case Node::App: return ap(eliminate(m->a), eliminate(m->b));
    case Node::Abs: return abstract(m->name, eliminate(m->a));
  }
  return m;
}

inline TermId to_term(const L& m) {
  switch (m->kind) {
    case Node::Const: return m->term;
    case Node::App: return app_term(to_term(m->a), to_term(m->b));
    default: throw MachineError("unbound variable '" + m->name + "' in compiled term");
  }
}

}  // namespace detail

inline TermId compile(const L& m) {
  if (!m->free.empty()) throw MachineError("cannot compile open term; free: " + *m->free.begin());
  return detail::to_term(detail::eliminate(m));
}

}  // namespace lam

}  // namespace lopkit
