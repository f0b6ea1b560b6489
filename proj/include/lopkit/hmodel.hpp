#pragma once
// Heyting-valued models with a constant finite domain, and evaluators for plain formulas,
// modal formulas, the translations (tabulated over all nuclei at once), and the
// power-object variant of the forcing translation.

#include <array>
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

#include "json.hpp"
#include "lopkit/algebra.hpp"
#include "lopkit/formula.hpp"
#include "lopkit/nucleus.hpp"
#include "lopkit/translate.hpp"

namespace lopkit {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AtomTable {
  std::size_t arity = 0;
  std::vector<Elem> values;  // index = sum args[i] * D^i
};

struct HModel {
  AlgPtr alg;
  std::size_t domain = 1;
  std::map<std::string, AtomTable> atoms;
  std::vector<Nucleus> nuclei;  // canonical enumeration of the algebra's nuclei
};

using HSubset = std::vector<Elem>;

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

inline void check_model(const HModel& m) {
  if (!m.alg) throw ModelError("model has no algebra");
  if (m.domain == 0) throw ModelError("domain must be nonempty");
  for (auto& [name, t] : m.atoms) {
    if (name == kStepHalt) throw ModelError("StepHalt is an arithmetic atom, not a model atom");
    if (t.values.size() != ipow(m.domain, t.arity))
      throw ModelError("atom table for " + name + " is not total");
    for (Elem v : t.values)
      if (v >= m.alg->size()) throw ModelError("atom table for " + name + " has an out-of-range value");
  }
}

// Closed arithmetic term value; variables or overflow are errors here.
inline std::uint64_t closed_term_value(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Zero: return 0;
    case TermKind::Num: return t->num;
    case TermKind::Succ: return closed_term_value(t->left) + 1;
    case TermKind::Plus: return closed_term_value(t->left) + closed_term_value(t->right);
    case TermKind::Times: return closed_term_value(t->left) * closed_term_value(t->right);
    case TermKind::Monus: {
      auto a = closed_term_value(t->left), b = closed_term_value(t->right);
      return a > b ? a - b : 0;
    }
    case TermKind::Var: break;
  }
  throw ModelError("term is not closed");
}

namespace detail {
// Equations are accepted between two variables (crisp domain equality) or two closed terms.
inline void check_eq_shape(const Formula& f) {
  auto a = f.terms[0], b = f.terms[1];
  if (a->kind == TermKind::Var && b->kind == TermKind::Var) return;
  if (term_closed(a) && term_closed(b)) return;
  throw ModelError("equation " + print(mk(f)) + " mixes arithmetic with domain variables");
}
inline void check_atom_shape(const HModel& m, const Formula& f) {
  if (f.name == kStepHalt) throw ModelError("arithmetic atom StepHalt is not supported by the model evaluator");
  auto it = m.atoms.find(f.name);
  if (it == m.atoms.end()) throw ModelError("undeclared atom " + f.name);
  if (it->second.arity != f.terms.size()) throw ModelError("arity mismatch for atom " + f.name);
  for (auto& t : f.terms)
    if (t->kind != TermKind::Var) throw ModelError("atom arguments must be variables: " + print(mk(f)));
}
}  // namespace detail

inline void check_formula_for_model(const HModel& m, const FPtr& f) {
  if (!f) return;
  if (f->kind == Kind::Atom) detail::check_atom_shape(m, *f);
  if (f->kind == Kind::Eq) detail::check_eq_shape(*f);
  check_formula_for_model(m, f->left);
  check_formula_for_model(m, f->right);
}

using Env = std::map<std::string, std::size_t>;

namespace detail {
inline std::size_t lookup(const Env& env, const std::string& v) {
  auto it = env.find(v);
  if (it == env.end()) throw ModelError("unbound variable " + v);
  return it->second;
}
inline Elem atom_value(const HModel& m, const Formula& f, const std::function<std::size_t(const std::string&)>& at) {
  const auto& t = m.atoms.at(f.name);
  std::size_t idx = 0, mul = 1;
  for (auto& a : f.terms) {
    idx += at(a->name) * mul;
    mul *= m.domain;
  }
  return t.values[idx];
}
inline Elem eq_value(const HeytingAlg& h, const Formula& f, const std::function<std::size_t(const std::string&)>& at) {
  auto a = f.terms[0], b = f.terms[1];
  if (a->kind == TermKind::Var && b->kind == TermKind::Var) return at(a->name) == at(b->name) ? h.top() : h.bottom();
  return closed_term_value(a) == closed_term_value(b) ? h.top() : h.bottom();
}
}  // namespace detail

// Plain Heyting-valued semantics.
inline Elem eval(const FPtr& f, const HModel& m, const Env& env) {
  const HeytingAlg& h = *m.alg;
  auto at = [&](const std::string& v) { return detail::lookup(env, v); };
  switch (f->kind) {
    case Kind::Atom: detail::check_atom_shape(m, *f); return detail::atom_value(m, *f, at);
    case Kind::Eq: detail::check_eq_shape(*f); return detail::eq_value(h, *f, at);
    case Kind::Bot: return h.bottom();
    case Kind::And: return h.meet(eval(f->left, m, env), eval(f->right, m, env));
    case Kind::Or: return h.join(eval(f->left, m, env), eval(f->right, m, env));
    case Kind::Imp: return h.imp(eval(f->left, m, env), eval(f->right, m, env));
    case Kind::Forall:
    case Kind::Exists: {
      Env e = env;
      Elem acc = f->kind == Kind::Forall ? h.top() : h.bottom();
      for (std::size_t d = 0; d < m.domain; ++d) {
        e[f->name] = d;
        Elem v = eval(f->left, m, e);
        acc = f->kind == Kind::Forall ? h.meet(acc, v) : h.join(acc, v);
      }
      return acc;
    }
    default: throw ModelError("modal formula given to the plain evaluator");
  }
}

struct ModalBinding {
  std::map<std::string, Nucleus> nuclei;
  std::map<std::string, LopFrame> frames;
};

// Modal formulas: [j] goes through the nucleus table, guards meet over frame members above.
inline Elem eval_m(const FPtr& f, const HModel& m, const Env& env, const ModalBinding& bind) {
  const HeytingAlg& h = *m.alg;
  switch (f->kind) {
    case Kind::Mod: {
      auto it = bind.nuclei.find(f->name);
      if (it == bind.nuclei.end()) throw ModelError("unbound nucleus variable " + f->name);
      return it->second(eval_m(f->left, m, env, bind));
    }
    case Kind::Guard: {
      auto lo = bind.nuclei.find(f->above);
      if (lo == bind.nuclei.end()) throw ModelError("unbound nucleus variable " + f->above);
      auto fr = bind.frames.find(f->frame);
      if (fr == bind.frames.end()) throw ModelError("unbound frame variable " + f->frame);
      Elem acc = h.top();
      for (const auto& k : frame_up(fr->second, lo->second)) {
        ModalBinding inner = bind;
        inner.nuclei.insert_or_assign(f->name, k);
        acc = h.meet(acc, eval_m(f->left, m, env, inner));
      }
      return acc;
    }
    case Kind::And: return h.meet(eval_m(f->left, m, env, bind), eval_m(f->right, m, env, bind));
    case Kind::Or: return h.join(eval_m(f->left, m, env, bind), eval_m(f->right, m, env, bind));
    case Kind::Imp: return h.imp(eval_m(f->left, m, env, bind), eval_m(f->right, m, env, bind));
    case Kind::Forall:
    case Kind::Exists: {
      Env e = env;
      Elem acc = f->kind == Kind::Forall ? h.top() : h.bottom();
      for (std::size_t d = 0; d < m.domain; ++d) {
        e[f->name] = d;
        Elem v = eval_m(f->left, m, e, bind);
        acc = f->kind == Kind::Forall ? h.meet(acc, v) : h.join(acc, v);
      }
      return acc;
    }
    default: return eval(f, m, env);
  }
}

// ------------------------------------------------------------------ tabulated evaluation

// A frame given by indices into the model's nucleus inventory.
struct FrameIdx {
  std::vector<std::size_t> members;
};

inline FrameIdx frame_indices(const HModel& m, const LopFrame& fr) {
  FrameIdx out;
  for (auto& k : fr.members) {
    auto it = std::find(m.nuclei.begin(), m.nuclei.end(), k);
    if (it == m.nuclei.end()) throw ModelError("frame member is not in the nucleus inventory");
    out.members.push_back(static_cast<std::size_t>(it - m.nuclei.begin()));
  }
  return out;
}

inline LopFrame frame_from_indices(const HModel& m, const FrameIdx& fr) {
  LopFrame out{m.alg, {}};
  for (auto i : fr.members) out.members.push_back(m.nuclei[i]);
  return out;
}

// Values of a formula at every assignment of a fixed variable list (and, for translations,
// at every nucleus of the inventory). Assignment index = sum digit(v_i) * D^i.
class Tabulator {
 public:
  Tabulator(const HModel& m, std::vector<std::string> vars) : m_(m), h_(*m.alg), vars_(std::move(vars)) {
    domain_size_ = m.domain;
    n_env_ = ipow(domain_size_, vars_.size());
    n_j_ = m.nuclei.size();
    le_.assign(n_j_ * n_j_, 0);
    for (std::size_t a = 0; a < n_j_; ++a)
      for (std::size_t b = 0; b < n_j_; ++b) le_[a * n_j_ + b] = nucleus_le(m.nuclei[a], m.nuclei[b]);
  }

  std::size_t envs() const { return n_env_; }
  std::size_t nuclei() const { return n_j_; }
  const std::vector<std::string>& vars() const { return vars_; }
  bool le(std::size_t j, std::size_t k) const { return le_[j * n_j_ + k] != 0; }
  std::size_t digit(std::size_t env, std::size_t var) const { return env / ipow(domain_size_, var) % domain_size_; }
  std::size_t var_index(const std::string& v) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == v) return i;
    throw ModelError("variable " + v + " is outside the tabulation");
  }
  Env env_map(std::size_t e) const {
    Env out;
    for (std::size_t i = 0; i < vars_.size(); ++i) out[vars_[i]] = digit(e, i);
    return out;
  }

  void set_frame(const FrameIdx& fr) {
    up_.assign(n_j_, {});
    for (std::size_t j = 0; j < n_j_; ++j)
      for (auto k : fr.members)
        if (le(j, k)) up_[j].push_back(k);
  }
  const std::vector<std::size_t>& up(std::size_t j) const { return up_[j]; }

  std::vector<Elem> plain(const FPtr& f) const {
    switch (f->kind) {
      case Kind::Atom:
      case Kind::Eq:
      case Kind::Bot: return base(*f);
      case Kind::And:
      case Kind::Or:
      case Kind::Imp: return combine(f->kind, plain(f->left), plain(f->right));
      case Kind::Forall:
      case Kind::Exists: return quantify(f->kind == Kind::Forall, var_index(f->name), plain(f->left), 1);
      default: throw ModelError("modal node in plain formula");
    }
  }

  // Per-nucleus tables: index j * envs + e.
  std::vector<Elem> gg(const FPtr& f) const {
    switch (f->kind) {
      case Kind::Atom:
      case Kind::Eq:
      case Kind::Bot: return apply_each(replicate(base(*f)));
      case Kind::And:
      case Kind::Imp: return combine(f->kind, gg(f->left), gg(f->right));
      case Kind::Or: return apply_each(combine(Kind::Or, gg(f->left), gg(f->right)));
      case Kind::Exists: return apply_each(quantify(false, var_index(f->name), gg(f->left), n_j_));
      case Kind::Forall: return quantify(true, var_index(f->name), gg(f->left), n_j_);
      default: throw ModelError("modal node in plain formula");
    }
  }

  std::vector<Elem> forcing(const FPtr& f) const {
    switch (f->kind) {
      case Kind::Atom:
      case Kind::Eq:
      case Kind::Bot: return apply_each(replicate(base(*f)));
      case Kind::And: return combine(Kind::And, forcing(f->left), forcing(f->right));
      case Kind::Or: return apply_each(combine(Kind::Or, forcing(f->left), forcing(f->right)));
      case Kind::Exists: return apply_each(quantify(false, var_index(f->name), forcing(f->left), n_j_));
      case Kind::Imp: return guard_meet(combine(Kind::Imp, forcing(f->left), forcing(f->right)));
      case Kind::Forall: return guard_meet(quantify(true, var_index(f->name), forcing(f->left), n_j_));
      default: throw ModelError("modal node in plain formula");
    }
  }

  // Kuroda-style translation without the outer application.
  std::vector<Elem> kuroda(const FPtr& f) const {
    switch (f->kind) {
      case Kind::Atom:
      case Kind::Eq:
      case Kind::Bot: return replicate(base(*f));
      case Kind::And:
      case Kind::Or: return combine(f->kind, kuroda(f->left), kuroda(f->right));
      case Kind::Exists: return quantify(false, var_index(f->name), kuroda(f->left), n_j_);
      case Kind::Imp: return guard_meet(combine(Kind::Imp, kuroda(f->left), apply_each(kuroda(f->right))));
      case Kind::Forall: return guard_meet(apply_each(quantify(true, var_index(f->name), kuroda(f->left), n_j_)));
      default: throw ModelError("modal node in plain formula");
    }
  }

  std::vector<Elem> apply_each(std::vector<Elem> t) const {
    for (std::size_t j = 0; j < n_j_; ++j) {
      const auto& tab = m_.nuclei[j].table;
      for (std::size_t e = 0; e < n_env_; ++e) t[j * n_env_ + e] = tab[t[j * n_env_ + e]];
    }
    return t;
  }

 private:
  const HModel& m_;
  const HeytingAlg& h_;
  std::vector<std::string> vars_;
  std::size_t domain_size_ = 1, n_env_ = 1, n_j_ = 0;
  std::vector<char> le_;
  std::vector<std::vector<std::size_t>> up_;

  std::vector<Elem> base(const Formula& f) const {
    std::vector<Elem> out(n_env_);
    if (f.kind == Kind::Bot) {
      std::fill(out.begin(), out.end(), h_.bottom());
      return out;
    }
    if (f.kind == Kind::Atom) detail::check_atom_shape(m_, f);
    if (f.kind == Kind::Eq) detail::check_eq_shape(f);
    std::vector<std::size_t> idx;
    for (auto& t : f.terms)
      if (t->kind == TermKind::Var) idx.push_back(var_index(t->name));
    for (std::size_t e = 0; e < n_env_; ++e) {
      auto at = [&](const std::string& v) { return digit(e, var_index(v)); };
      out[e] = f.kind == Kind::Atom ? detail::atom_value(m_, f, at) : detail::eq_value(h_, f, at);
    }
    return out;
  }

  std::vector<Elem> replicate(const std::vector<Elem>& t) const {
    std::vector<Elem> out(n_j_ * n_env_);
    for (std::size_t j = 0; j < n_j_; ++j) std::copy(t.begin(), t.end(), out.begin() + j * n_env_);
    return out;
  }

  std::vector<Elem> combine(Kind k, std::vector<Elem> a, const std::vector<Elem>& b) const {
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = k == Kind::And ? h_.meet(a[i], b[i]) : k == Kind::Or ? h_.join(a[i], b[i]) : h_.imp(a[i], b[i]);
    return a;
  }

  // Meet/join over the digit of one variable, broadcast back to every digit.
  std::vector<Elem> quantify(bool all, std::size_t var, const std::vector<Elem>& t, std::size_t layers) const {
    std::vector<Elem> out(t.size());
    const std::size_t stride = ipow(domain_size_, var);
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t e = 0; e < n_env_; ++e) {
        std::size_t base_e = e - digit(e, var) * stride;
        Elem acc = all ? h_.top() : h_.bottom();
        for (std::size_t d = 0; d < domain_size_; ++d) {
          Elem v = t[l * n_env_ + base_e + d * stride];
          acc = all ? h_.meet(acc, v) : h_.join(acc, v);
        }
        out[l * n_env_ + e] = acc;
      }
    return out;
  }

  std::vector<Elem> guard_meet(const std::vector<Elem>& t) const {
    std::vector<Elem> out(n_j_ * n_env_, h_.top());
    for (std::size_t j = 0; j < n_j_; ++j)
      for (auto k : up_[j])
        for (std::size_t e = 0; e < n_env_; ++e)
          out[j * n_env_ + e] = h_.meet(out[j * n_env_ + e], t[k * n_env_ + e]);
    return out;
  }
};

// ------------------------------------------------------------------ power-object variant

// Evaluates the sheaf-term version of the forcing translation, whose variables range over
// H-valued subsets of the domain. Subsets v with zero membership degree are skipped,
// since they contribute bottom to every join and top to every meet.
//
// Internally a subset is its index among all |H|^|D| functions D -> H (digit y is the
// value at y), and variables occupy fixed slots.
class LForcing {
 public:
  LForcing(const HModel& m, const FrameIdx& fr) : m_(m), h_(*m.alg), domain_size_(m.domain) {
    const std::size_t nj = m.nuclei.size();
    total_ = ipow(h_.size(), domain_size_);
    if (total_ > (std::size_t{1} << 16)) throw ModelError("power-object evaluator limited to 2^16 subsets");
    up_.assign(nj, {});
    for (std::size_t j = 0; j < nj; ++j)
      for (auto k : fr.members)
        if (nucleus_le(m.nuclei[j], m.nuclei[k])) up_[j].push_back(k);
    members_.assign(nj, {});
    built_.assign(nj, false);
    unit_.assign(nj, {});
    digits_.resize(total_ * domain_size_);
    for (std::size_t c = 0; c < total_; ++c) {
      std::size_t r = c;
      for (std::size_t y = 0; y < domain_size_; ++y) {
        digits_[c * domain_size_ + y] = static_cast<Elem>(r % h_.size());
        r /= h_.size();
      }
    }
    if (!h_.upset_masks.empty()) {
      // Upset algebras are evaluated point by point; see point_lists.
      local_ = true;
      npts_ = 0;
      while (npts_ < 64 && (h_.upset_masks[h_.top()] >> npts_ & 1)) ++npts_;
      for (Elem e = 0; e < h_.size(); ++e) mask_index_[h_.upset_masks[e]] = e;
      principal_.assign(npts_, h_.top());
      for (std::size_t q = 0; q < npts_; ++q)
        for (Elem e = 0; e < h_.size(); ++e)
          if ((h_.upset_masks[e] >> q & 1) && h_.le(e, principal_[q])) principal_[q] = e;
      lists_.assign(nj, std::vector<std::vector<std::uint32_t>>(npts_));
      lists_built_.assign(nj, false);
    }
  }

  // U_j({x}): j(top) at x, j(bottom) elsewhere.
  HSubset unit_singleton(std::size_t j, std::size_t x) const {
    HSubset u(domain_size_);
    for (std::size_t y = 0; y < domain_size_; ++y) u[y] = m_.nuclei[j](y == x ? h_.top() : h_.bottom());
    return u;
  }
  HSubset unit(std::size_t j, const HSubset& u) const {
    HSubset out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = m_.nuclei[j](u[i]);
    return out;
  }
  // Membership degree of u in L_X(j).
  Elem membership(std::size_t j, const HSubset& u) const {
    Elem acc = h_.bottom();
    for (std::size_t x = 0; x < domain_size_; ++x) {
      HSubset s = unit_singleton(j, x);
      Elem e = h_.top();
      for (std::size_t y = 0; y < domain_size_; ++y) e = h_.meet(e, h_.iff(u[y], s[y]));
      acc = h_.join(acc, e);
    }
    return m_.nuclei[j](acc);
  }

  // Memo entries stay valid across calls on the same model and frame; roots are kept alive
  // so node addresses used as keys are never recycled.
  Elem eval(const FPtr& f, std::size_t j, const std::map<std::string, HSubset>& env) {
    if (roots_.empty() || roots_.back() != f) roots_.push_back(f);
    Codes codes;
    codes.fill(kUnset);
    for (auto& [name, u] : env) {
      if (u.size() != domain_size_) throw ModelError("subset for " + name + " has the wrong length");
      codes[slot(name)] = code_of(u);
    }
    return go(f.get(), j, codes);
  }
  // Same as eval with each variable bound to U_j({x}) for its point x.
  Elem eval_at_points(const FPtr& f, std::size_t j, const std::vector<std::pair<std::string, std::size_t>>& points) {
    if (roots_.empty() || roots_.back() != f) roots_.push_back(f);
    Codes codes;
    codes.fill(kUnset);
    for (auto& [name, x] : points) {
      if (x >= domain_size_) throw ModelError("point out of the domain");
      codes[slot(name)] = singleton_code(j, x);
    }
    return go(f.get(), j, codes);
  }

  std::size_t subsets_considered() const { return considered_; }

 private:
  static constexpr std::size_t kMaxSlots = 16;
  using Codes = std::array<std::uint32_t, kMaxSlots>;
  static constexpr std::uint32_t kUnset = ~std::uint32_t{0};

  struct NodeInfo {
    std::uint32_t id = 0;
    std::vector<std::size_t> fv;  // slots of the free variables, sorted by name
    std::vector<Elem> atom_table; // per nucleus block: value at each point of D^|fv|, filled lazily
    std::vector<bool> atom_built;
  };
  struct Key {
    std::uint64_t a, b;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return std::hash<std::uint64_t>{}(k.a * 0x9E3779B97F4A7C15ULL ^ k.b); }
  };

  const HModel& m_;
  const HeytingAlg& h_;
  std::size_t domain_size_, total_ = 1;
  std::vector<std::vector<std::size_t>> up_;
  std::vector<std::vector<std::pair<std::uint32_t, Elem>>> members_;
  std::vector<bool> built_;
  std::vector<std::vector<std::uint32_t>> unit_;
  std::vector<Elem> digits_;
  std::vector<FPtr> roots_;
  std::vector<std::string> slot_names_;
  std::unordered_map<const Formula*, NodeInfo> info_;
  std::unordered_map<Key, Elem, KeyHash> memo_;
  std::unordered_map<std::string, Elem> wide_memo_;
  std::size_t considered_ = 0;
  bool local_ = false;
  std::size_t npts_ = 0;
  std::unordered_map<std::uint64_t, Elem> mask_index_;
  std::vector<Elem> principal_;
  std::vector<std::vector<std::vector<std::uint32_t>>> lists_;
  std::vector<bool> lists_built_;

  std::size_t slot(const std::string& name) {
    for (std::size_t i = 0; i < slot_names_.size(); ++i)
      if (slot_names_[i] == name) return i;
    if (slot_names_.size() == kMaxSlots) throw ModelError("power-object evaluator supports 16 variable names");
    slot_names_.push_back(name);
    return slot_names_.size() - 1;
  }
  std::uint32_t singleton_code(std::size_t j, std::size_t x) const {
    std::size_t c = 0;
    for (std::size_t y = domain_size_; y-- > 0;) c = c * h_.size() + m_.nuclei[j](y == x ? h_.top() : h_.bottom());
    return static_cast<std::uint32_t>(c);
  }
  std::uint32_t code_of(const HSubset& u) const {
    std::size_t c = 0;
    for (std::size_t y = domain_size_; y-- > 0;) {
      h_.check(u[y]);
      c = c * h_.size() + u[y];
    }
    return static_cast<std::uint32_t>(c);
  }
  Elem digit(std::uint32_t c, std::size_t y) const { return digits_[c * domain_size_ + y]; }

  std::uint32_t unit_code(std::size_t k, std::uint32_t c) {
    auto& t = unit_[k];
    if (t.empty()) {
      t.resize(total_);
      for (std::size_t u = 0; u < total_; ++u) {
        std::size_t out = 0;
        for (std::size_t y = domain_size_; y-- > 0;) out = out * h_.size() + m_.nuclei[k](digit(static_cast<std::uint32_t>(u), y));
        t[u] = static_cast<std::uint32_t>(out);
      }
    }
    return t[c];
  }

  // Nonzero-degree members of L_X(j).
  const std::vector<std::pair<std::uint32_t, Elem>>& members(std::size_t j) {
    if (!built_[j]) {
      HSubset v(domain_size_);
      for (std::size_t c = 0; c < total_; ++c) {
        for (std::size_t y = 0; y < domain_size_; ++y) v[y] = digit(static_cast<std::uint32_t>(c), y);
        Elem deg = membership(j, v);
        if (deg != h_.bottom()) members_[j].push_back({static_cast<std::uint32_t>(c), deg});
      }
      built_[j] = true;
    }
    return members_[j];
  }

  bool holds_at(Elem e, std::size_t q) const { return h_.upset_masks[e] >> q & 1; }
  Elem from_mask(std::uint64_t mk) const { return mask_index_.at(mk); }

  // In an upset algebra the operations, the nuclei and hence every clause are local:
  // whether q lies in a value depends on the environment only through its meet with
  // the principal upset of q, and (at nucleus j) only through j of that. So q lies in
  // the join over v of deg(v) /\ B(v) iff q lies in B(w) for some w in lists_[j][q],
  // the distinct j(v /\ up(q)) over subsets v whose degree contains q.
  const std::vector<std::uint32_t>& point_list(std::size_t j, std::size_t q) {
    if (!lists_built_[j]) {
      HSubset v(domain_size_);
      std::vector<std::set<std::uint32_t>> seen(npts_);
      for (std::size_t c = 0; c < total_; ++c) {
        for (std::size_t y = 0; y < domain_size_; ++y) v[y] = digit(static_cast<std::uint32_t>(c), y);
        Elem deg = membership(j, v);
        if (deg == h_.bottom()) continue;
        for (std::size_t p = 0; p < npts_; ++p) {
          if (!holds_at(deg, p)) continue;
          std::size_t w = 0;
          for (std::size_t y = domain_size_; y-- > 0;) w = w * h_.size() + m_.nuclei[j](h_.meet(v[y], principal_[p]));
          seen[p].insert(static_cast<std::uint32_t>(w));
        }
      }
      for (std::size_t p = 0; p < npts_; ++p) lists_[j][p].assign(seen[p].begin(), seen[p].end());
      lists_built_[j] = true;
    }
    return lists_[j][q];
  }

  NodeInfo& info(const Formula* f) {
    auto it = info_.find(f);
    if (it != info_.end()) return it->second;
    NodeInfo n;
    n.id = static_cast<std::uint32_t>(info_.size());
    for (auto& v : free_vars(std::shared_ptr<const Formula>(std::shared_ptr<const Formula>{}, f))) n.fv.push_back(slot(v));
    return info_.emplace(f, std::move(n)).first->second;
  }

  Elem atomic(const Formula* f, NodeInfo& ni, std::size_t j, const Codes& env) {
    const std::size_t nv = ni.fv.size();
    const std::size_t points = ipow(domain_size_, nv);
    if (ni.atom_built.empty()) {
      ni.atom_built.assign(m_.nuclei.size(), false);
      ni.atom_table.resize(m_.nuclei.size() * points);
    }
    Elem* tab = &ni.atom_table[j * points];
    if (!ni.atom_built[j]) {
      if (f->kind == Kind::Atom) detail::check_atom_shape(m_, *f);
      if (f->kind == Kind::Eq) detail::check_eq_shape(*f);
      std::vector<std::size_t> point(nv);
      for (std::size_t c = 0; c < points; ++c) {
        std::size_t r = c;
        for (std::size_t i = 0; i < nv; ++i) {
          point[i] = r % domain_size_;
          r /= domain_size_;
        }
        auto at = [&](const std::string& v) {
          for (std::size_t i = 0; i < nv; ++i)
            if (slot_names_[ni.fv[i]] == v) return point[i];
          throw ModelError("unbound variable " + v);
        };
        Elem val = f->kind == Kind::Bot   ? h_.bottom()
                   : f->kind == Kind::Atom ? detail::atom_value(m_, *f, at)
                                           : detail::eq_value(h_, *f, at);
        tab[c] = m_.nuclei[j](val);
      }
      ni.atom_built[j] = true;
    }
    Elem acc = h_.top();
    for (std::size_t c = 0; c < points && acc != h_.bottom(); ++c) {
      Elem ante = h_.top();
      std::size_t r = c;
      for (std::size_t i = 0; i < nv; ++i) {
        ante = h_.meet(ante, digit(env[ni.fv[i]], r % domain_size_));
        r /= domain_size_;
      }
      acc = h_.meet(acc, h_.imp(ante, tab[c]));
    }
    return acc;
  }

  Codes units(std::size_t k, const Codes& env) {
    Codes out;
    for (std::size_t i = 0; i < kMaxSlots; ++i) out[i] = kUnset;
    for (std::size_t i = 0; i < slot_names_.size(); ++i)
      if (env[i] != kUnset) out[i] = unit_code(k, env[i]);
    return out;
  }

  Elem go(const Formula* f, std::size_t j, const Codes& env) {
    NodeInfo& ni = info(f);
    for (auto s : ni.fv)
      if (env[s] == kUnset) throw ModelError("unbound variable " + slot_names_[s]);
    const Nucleus& nj = m_.nuclei[j];
    // Propositional nodes are cheap; only binders and implications are memoised.
    switch (f->kind) {
      case Kind::Atom:
      case Kind::Eq:
      case Kind::Bot: return atomic(f, ni, j, env);
      case Kind::And: {
        Elem l = go(f->left.get(), j, env);
        return l == h_.bottom() ? l : h_.meet(l, go(f->right.get(), j, env));
      }
      case Kind::Or: {
        Elem l = go(f->left.get(), j, env);
        return nj(l == h_.top() ? l : h_.join(l, go(f->right.get(), j, env)));
      }
      default: break;
    }
    Key key{(std::uint64_t{ni.id} << 24) | j, 0};
    std::string wide;
    const bool narrow = ni.fv.size() <= 4 && j < (1u << 24);
    if (narrow) {
      for (auto s : ni.fv) key.b = (key.b << 16) | env[s];
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    } else {
      wide = std::to_string(ni.id) + ":" + std::to_string(j);
      for (auto s : ni.fv) wide += "," + std::to_string(env[s]);
      if (auto it = wide_memo_.find(wide); it != wide_memo_.end()) return it->second;
    }
    Elem out = h_.bottom();
    switch (f->kind) {
      case Kind::Imp: {
        out = h_.top();
        for (auto kk : up_[j]) {
          Codes e2 = units(kk, env);
          out = h_.meet(out, h_.imp(go(f->left.get(), kk, e2), go(f->right.get(), kk, e2)));
          if (out == h_.bottom()) break;
        }
        break;
      }
      case Kind::Exists: {
        Elem acc = h_.bottom();
        std::size_t s = slot(f->name);
        Codes inner = env;
        if (local_) {
          std::uint64_t mk = 0;
          for (std::size_t q = 0; q < npts_; ++q) {
            if (mk >> q & 1) continue;
            for (auto w : point_list(j, q)) {
              ++considered_;
              inner[s] = w;
              if (holds_at(go(f->left.get(), j, inner), q)) {
                mk |= h_.upset_masks[principal_[q]];
                break;
              }
            }
          }
          out = nj(from_mask(mk));
          break;
        }
        for (auto& [v, deg] : members(j)) {
          ++considered_;
          inner[s] = v;
          acc = h_.join(acc, h_.meet(deg, go(f->left.get(), j, inner)));
          if (acc == h_.top()) break;
        }
        out = nj(acc);
        break;
      }
      case Kind::Forall: {
        out = h_.top();
        std::size_t s = slot(f->name);
        for (auto kk : up_[j]) {
          Codes inner = units(kk, env);
          if (local_) {
            // q lies in a meet of implications iff every point above q is good.
            std::uint64_t bad = 0;
            for (std::size_t q = 0; q < npts_; ++q)
              for (auto w : point_list(kk, q)) {
                ++considered_;
                inner[s] = w;
                if (!holds_at(go(f->left.get(), kk, inner), q)) {
                  bad |= std::uint64_t{1} << q;
                  break;
                }
              }
            std::uint64_t mk = 0;
            for (std::size_t q = 0; q < npts_; ++q)
              if ((h_.upset_masks[principal_[q]] & bad) == 0) mk |= std::uint64_t{1} << q;
            out = h_.meet(out, from_mask(mk));
            if (out == h_.bottom()) break;
            continue;
          }
          for (auto& [v, deg] : members(kk)) {
            ++considered_;
            inner[s] = v;
            out = h_.meet(out, h_.imp(deg, go(f->left.get(), kk, inner)));
            if (out == h_.bottom()) break;
          }
          if (out == h_.bottom()) break;
        }
        break;
      }
      default: throw ModelError("modal node in plain formula");
    }
    if (narrow) memo_[key] = out;
    else wide_memo_[wide] = out;
    return out;
  }
};

inline Elem eval_forcing_L(const FPtr& f, const HModel& m, std::size_t j, const FrameIdx& fr,
                           const std::map<std::string, HSubset>& env) {
  LForcing ev(m, fr);
  return ev.eval(f, j, env);
}

// ------------------------------------------------------------------ model files

inline Elem parse_elem(const HeytingAlg& h, const nlohmann::json& v) {
  if (v.is_number_unsigned()) {
    Elem e = v.get<Elem>();
    h.check(e);
    return e;
  }
  if (v.is_string()) return h.element(v.get<std::string>());
  throw ModelError("carrier element must be a name or an index");
}

struct ModelFile {
  HModel model;
  std::optional<LopFrame> frame;
};

// {"poset": {...}, "domain": n, "atoms": {"R": {"arity": 1, "values": [...]}}, "frame": [names or indices]}
inline ModelFile model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("poset") || !j.contains("domain"))
    throw ModelError("model file needs 'poset' and 'domain'");
  auto alg = std::make_shared<HeytingAlg>(upset_algebra(poset_from_json(j.at("poset"))));
  ModelFile out;
  out.model.alg = alg;
  out.model.domain = j.at("domain").get<std::size_t>();
  out.model.nuclei = enumerate_nuclei(alg);
  if (j.contains("atoms"))
    for (auto& [name, spec] : j.at("atoms").items()) {
      AtomTable t;
      t.arity = spec.at("arity").get<std::size_t>();
      for (auto& v : spec.at("values")) t.values.push_back(parse_elem(*alg, v));
      out.model.atoms[name] = t;
    }
  check_model(out.model);
  if (j.contains("frame")) {
    std::vector<Nucleus> members;
    for (auto& v : j.at("frame"))
      members.push_back(v.is_number() ? nucleus_by_name(alg, std::to_string(v.get<std::size_t>()), &out.model.nuclei)
                                      : nucleus_by_name(alg, v.get<std::string>(), &out.model.nuclei));
    out.frame = make_frame(alg, members);
  }
  return out;
}

}  // namespace lopkit
