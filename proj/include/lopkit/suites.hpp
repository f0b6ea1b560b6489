#pragma once
// Finite-model corpus, the named property suites, and countermodel search.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lopkit/hmodel.hpp"

namespace lopkit {

struct SuiteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ corpus

struct CorpusSpec {
  std::string name = "builtin:small";
  std::size_t max_points = 4;
  std::size_t max_domain = 3;
  std::size_t valuations = 100;
  std::size_t max_frame = 3;
  std::size_t depth = 3;
  std::size_t random_formulas = 30;
  std::uint64_t seed = 20240611;
  std::size_t max_carrier = 16;      // larger algebras are rejected as over budget
  std::size_t max_subsets = 1 << 16; // |H|^|D| bound for the power-object evaluator
  std::vector<std::string> extra_formulas;

  nlohmann::json to_json() const {
    return {{"name", name},
            {"max_points", max_points},
            {"max_domain", max_domain},
            {"valuations", valuations},
            {"max_frame", max_frame},
            {"depth", depth},
            {"random_formulas", random_formulas},
            {"seed", seed},
            {"max_carrier", max_carrier},
            {"max_subsets", max_subsets},
            {"extra_formulas", extra_formulas}};
  }
};

inline CorpusSpec corpus_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SuiteError("corpus file must be a JSON object");
  CorpusSpec c;
  c.name = "file";
  auto num = [&](const char* k, std::size_t& dst) {
    if (!j.contains(k)) return;
    const auto& v = j.at(k);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw SuiteError(std::string("corpus field '") + k + "' must be a natural number");
    dst = j.at(k).get<std::size_t>();
  };
  num("max_points", c.max_points);
  num("max_domain", c.max_domain);
  num("valuations", c.valuations);
  num("max_frame", c.max_frame);
  num("depth", c.depth);
  num("random_formulas", c.random_formulas);
  num("max_carrier", c.max_carrier);
  num("max_subsets", c.max_subsets);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  if (j.contains("extra_formulas")) c.extra_formulas = j.at("extra_formulas").get<std::vector<std::string>>();
  if (c.max_points == 0 || c.max_domain == 0 || c.valuations == 0 || c.max_frame == 0)
    throw SuiteError("corpus bounds must be positive");
  if (c.max_points > 6) throw SuiteError("corpus too large: max_points above 6");
  return c;
}

// builtin:small is the default corpus; builtin:tiny is a quick smoke corpus.
inline CorpusSpec builtin_corpus(const std::string& name) {
  CorpusSpec c;
  if (name == "builtin:small") return c;
  if (name == "builtin:tiny") {
    c.name = name;
    c.max_points = 3;
    c.max_domain = 2;
    c.valuations = 6;
    c.max_frame = 2;
    c.random_formulas = 10;
    return c;
  }
  throw SuiteError("unknown builtin corpus '" + name + "' (builtin:small, builtin:tiny)");
}

struct Shape {
  std::size_t points = 0, poset_index = 0, domain = 1;
  FinPoset poset;
  AlgPtr alg;
  std::vector<Nucleus> nuclei;
  std::vector<FrameIdx> frames;        // all frames of size 1..max_frame, canonical order
  std::vector<FrameIdx> dense_frames;  // the subsequence whose members are all dense
};

inline void frames_of(std::size_t n, std::size_t max_size, std::vector<FrameIdx>& out) {
  std::vector<std::size_t> cur;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      out.push_back({cur});
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1, left - 1);
      cur.pop_back();
    }
  };
  for (std::size_t s = 1; s <= max_size && s <= n; ++s) rec(0, s);
}

inline std::vector<Shape> corpus_shapes(const CorpusSpec& c) {
  std::vector<Shape> out;
  for (std::size_t pts = 1; pts <= c.max_points; ++pts) {
    auto posets = posets_up_to_iso(pts);
    for (std::size_t pi = 0; pi < posets.size(); ++pi) {
      auto alg = std::make_shared<HeytingAlg>(upset_algebra(posets[pi]));
      if (alg->size() > c.max_carrier)
        throw SuiteError("corpus too large for budget: algebra of size " + std::to_string(alg->size()) +
                         " exceeds max_carrier " + std::to_string(c.max_carrier));
      auto nuclei = enumerate_nuclei(alg);
      std::vector<FrameIdx> frames, dense;
      frames_of(nuclei.size(), c.max_frame, frames);
      for (auto& f : frames) {
        bool all_dense = true;
        for (auto i : f.members) all_dense = all_dense && is_dense(nuclei[i]);
        if (all_dense) dense.push_back(f);
      }
      for (std::size_t d = 1; d <= c.max_domain; ++d) {
        Shape s;
        s.points = pts;
        s.poset_index = pi;
        s.domain = d;
        s.poset = posets[pi];
        s.alg = alg;
        s.nuclei = nuclei;
        s.frames = frames;
        s.dense_frames = dense;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

// Signature of every corpus model.
inline const std::vector<std::pair<std::string, std::size_t>>& corpus_signature() {
  static const std::vector<std::pair<std::string, std::size_t>> sig = {{"R", 1}, {"Q", 1}, {"E", 2}};
  return sig;
}

inline HModel sample_model(const Shape& s, std::size_t shape_index, std::size_t valuation, const CorpusSpec& c,
                           bool two_valued) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(shape_index), static_cast<std::uint32_t>(valuation),
                    static_cast<std::uint32_t>(two_valued)};
  std::mt19937_64 rng(seq);
  HModel m;
  m.alg = s.alg;
  m.domain = s.domain;
  m.nuclei = s.nuclei;
  for (auto& [name, arity] : corpus_signature()) {
    AtomTable t;
    t.arity = arity;
    for (std::size_t i = 0; i < ipow(s.domain, arity); ++i) {
      if (two_valued)
        t.values.push_back(rng() % 2 ? s.alg->top() : s.alg->bottom());
      else
        t.values.push_back(static_cast<Elem>(rng() % s.alg->size()));
    }
    m.atoms[name] = t;
  }
  return m;
}

inline const std::vector<std::string>& curated_formulas() {
  static const std::vector<std::string> list = {
      "R(x)",
      "~R(x)",
      "bot",
      "x = y",
      "R(x) \\/ ~R(x)",
      "~~R(x) -> R(x)",
      "~~R(x)",
      "((R(x) -> Q(x)) -> R(x)) -> R(x)",
      "forall x. R(x)",
      "exists x. R(x)",
      "forall x. (R(x) \\/ ~R(x))",
      "~(forall x. R(x)) -> (exists x. ~R(x))",
      "forall x. exists y. E(x, y)",
      "exists x. forall y. E(x, y)",
      "(forall x. R(x)) \\/ (forall y. Q(y))",
      "forall x. ~E(x, y)",
      "exists x. (R(x) /\\ ~Q(x))",
      "x = y \\/ ~x = y",
      "R(x) /\\ Q(y) -> E(x, y)",
      "forall x. (R(x) -> (exists y. E(x, y)))",
      "exists y. (Q(y) \\/ R(x))",
      "forall x. (R(x) /\\ ~Q(x))",
      "(forall y. ~E(x, y)) \\/ (forall y. ~Q(y))",
      "exists x. (forall y. ~E(x, y))",
      "R(x) /\\ ~Q(x) /\\ x = y",
      "(R(x) -> Q(x)) \\/ (Q(x) -> R(x))",
  };
  return list;
}

inline FPtr random_corpus_formula(std::mt19937_64& rng, std::size_t depth) {
  static const char* vars[] = {"x", "y"};
  auto v = [&]() { return var(vars[rng() % 2]); };
  if (depth == 0 || rng() % 4 == 0) {
    switch (rng() % 6) {
      case 0:
      case 1: return atom("R", {v()});
      case 2: return atom("Q", {v()});
      case 3: return atom("E", {v(), v()});
      case 4: return eq(var("x"), var("y"));
      default: return bot();
    }
  }
  switch (rng() % 7) {
    case 0: return conj(random_corpus_formula(rng, depth - 1), random_corpus_formula(rng, depth - 1));
    case 1: return disj(random_corpus_formula(rng, depth - 1), random_corpus_formula(rng, depth - 1));
    case 2: return imp(random_corpus_formula(rng, depth - 1), random_corpus_formula(rng, depth - 1));
    case 3: return lnot(random_corpus_formula(rng, depth - 1));
    case 4:
    case 5: return forall(vars[rng() % 2], random_corpus_formula(rng, depth - 1));
    default: return exists(vars[rng() % 2], random_corpus_formula(rng, depth - 1));
  }
}

// Curated formulas, then seeded random ones of bounded depth (duplicates dropped).
inline std::vector<FPtr> corpus_formulas(const CorpusSpec& c) {
  std::vector<FPtr> out;
  std::set<std::string> seen;
  auto add = [&](const FPtr& f) {
    if (formula_depth(f) > c.depth) return;
    if (seen.insert(print(f)).second) out.push_back(f);
  };
  for (auto& s : curated_formulas()) add(parse(s));
  for (auto& s : c.extra_formulas) add(parse(s));
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t made = 0, tries = 0;
  while (made < c.random_formulas && tries < 100 * (c.random_formulas + 1)) {
    ++tries;
    auto f = random_corpus_formula(rng, c.depth);
    if (formula_depth(f) > c.depth) continue;
    if (seen.count(print(f))) continue;
    add(f);
    ++made;
  }
  return out;
}

inline void all_vars_into(const FPtr& f, std::set<std::string>& out) {
  if (!f) return;
  if (f->kind == Kind::Forall || f->kind == Kind::Exists) out.insert(f->name);
  for (auto& t : f->terms) term_vars(t, out);
  all_vars_into(f->left, out);
  all_vars_into(f->right, out);
}

inline std::vector<std::string> tabulation_vars(const std::vector<FPtr>& fs) {
  std::set<std::string> s = {"x", "y"};
  for (auto& f : fs) all_vars_into(f, s);
  return {s.begin(), s.end()};
}

// Valuation v of V visits frames [v*W, v*W + W) mod F, W = ceil(F / V), so every frame is visited.
inline std::vector<std::size_t> rotating_window(std::size_t total, std::size_t v, std::size_t V) {
  std::vector<std::size_t> out;
  if (total == 0) return out;
  std::size_t w = (total + V - 1) / V;
  for (std::size_t i = 0; i < w && i < total; ++i) out.push_back((v * w + i) % total);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ------------------------------------------------------------------ per-model context

inline nlohmann::json model_json(const HModel& m, const FinPoset& p) {
  nlohmann::json atoms = nlohmann::json::object();
  for (auto& [name, t] : m.atoms) {
    nlohmann::json vals = nlohmann::json::array();
    for (auto v : t.values) vals.push_back(m.alg->name(v));
    atoms[name] = {{"arity", t.arity}, {"values", vals}};
  }
  return {{"poset", poset_to_json(p)}, {"domain", m.domain}, {"atoms", atoms}};
}

struct Accumulator {
  static constexpr std::size_t kMaxWitnesses = 20;
  std::size_t checks = 0, failures = 0, models = 0, frames_total = 0, frames_checked = 0, formulas_checked = 0;
  std::vector<nlohmann::json> witnesses;

  void merge(const Accumulator& o) {
    checks += o.checks;
    failures += o.failures;
    models += o.models;
    frames_total += o.frames_total;
    frames_checked += o.frames_checked;
    formulas_checked = std::max(formulas_checked, o.formulas_checked);
    for (auto& w : o.witnesses)
      if (witnesses.size() < kMaxWitnesses) witnesses.push_back(w);
  }
};

class ModelCtx {
 public:
  ModelCtx(const Shape& s, std::size_t valuation, HModel m, const std::vector<std::string>& vars, Accumulator& acc)
      : shape(s), valuation(valuation), model(std::move(m)), tab(model, vars), acc(acc) {}

  const Shape& shape;
  std::size_t valuation;
  HModel model;
  Tabulator tab;
  Accumulator& acc;
  const FrameIdx* frame = nullptr;

  const HeytingAlg& h() const { return *model.alg; }
  std::size_t nj() const { return tab.nuclei(); }
  std::size_t ne() const { return tab.envs(); }
  const Nucleus& nuc(std::size_t j) const { return model.nuclei[j]; }
  bool in_frame(std::size_t j) const {
    return std::find(frame->members.begin(), frame->members.end(), j) != frame->members.end();
  }

  void set_frame(const FrameIdx& fr) {
    frame = &fr;
    tab.set_frame(fr);
    forcing_.clear();
    kuroda_.clear();
  }

  const std::vector<Elem>& V(const FPtr& f) { return cached(plain_, f, [&] { return tab.plain(f); }); }
  const std::vector<Elem>& G(const FPtr& f) { return cached(gg_, f, [&] { return tab.gg(f); }); }
  const std::vector<Elem>& F(const FPtr& f) { return cached(forcing_, f, [&] { return tab.forcing(f); }); }
  const std::vector<Elem>& K(const FPtr& f) { return cached(kuroda_, f, [&] { return tab.kuroda(f); }); }

  void check(bool ok, const std::string& what, const std::function<nlohmann::json()>& detail) {
    ++acc.checks;
    if (ok) return;
    ++acc.failures;
    if (acc.witnesses.size() >= Accumulator::kMaxWitnesses) return;
    nlohmann::json w = detail();
    w["check"] = what;
    w["model"] = model_json(model, shape.poset);
    w["valuation_index"] = valuation;
    if (frame) w["frame"] = frame->members;
    acc.witnesses.push_back(w);
  }

  nlohmann::json env_json(std::size_t e) const {
    nlohmann::json out = nlohmann::json::object();
    for (auto& [k, v] : tab.env_map(e)) out[k] = v;
    return out;
  }
  std::string nm(Elem a) const { return h().name(a); }

 private:
  using Cache = std::map<const Formula*, std::pair<FPtr, std::vector<Elem>>>;
  Cache plain_, gg_, forcing_, kuroda_;

  template <class Fn>
  const std::vector<Elem>& cached(Cache& c, const FPtr& f, Fn fn) {
    auto it = c.find(f.get());
    if (it != c.end()) return it->second.second;
    auto res = fn();
    return c.emplace(f.get(), std::make_pair(f, std::move(res))).first->second.second;
  }
};

// ------------------------------------------------------------------ predicate families

// Heyting-valued meets over the frame, the environments, and frame members above.
inline Elem equiv_p(ModelCtx& c, const FPtr& f) {
  const auto& F = c.F(f);
  const auto& G = c.G(f);
  Elem acc = c.h().top();
  for (auto j : c.frame->members)
    for (std::size_t e = 0; e < c.ne(); ++e) acc = c.h().meet(acc, c.h().iff(F[j * c.ne() + e], G[j * c.ne() + e]));
  return acc;
}

inline Elem mono_like(ModelCtx& c, const FPtr& f, bool upward) {
  const auto& G = c.G(f);
  Elem acc = c.h().top();
  for (auto j : c.frame->members)
    for (auto k : c.tab.up(j))
      for (std::size_t e = 0; e < c.ne(); ++e) {
        Elem a = G[j * c.ne() + e], b = G[k * c.ne() + e];
        acc = c.h().meet(acc, upward ? c.h().imp(a, b) : c.h().imp(b, a));
      }
  return acc;
}
inline Elem mono_p(ModelCtx& c, const FPtr& f) { return mono_like(c, f, true); }
inline Elem nono_p(ModelCtx& c, const FPtr& f) { return mono_like(c, f, false); }

inline Elem trp(ModelCtx& c, const FPtr& f, std::size_t j, std::size_t k) {
  const auto& G = c.G(f);
  Elem acc = c.h().top();
  for (std::size_t e = 0; e < c.ne(); ++e)
    acc = c.h().meet(acc, c.h().iff(c.nuc(k)(G[j * c.ne() + e]), G[k * c.ne() + e]));
  return acc;
}

inline Elem cl(ModelCtx& c, const FPtr& f, std::size_t j, std::size_t k) {
  const auto& G = c.G(f);
  Elem acc = c.h().top();
  for (std::size_t e = 0; e < c.ne(); ++e) {
    Elem g = G[j * c.ne() + e];
    acc = c.h().meet(acc, c.h().iff(g, c.nuc(k)(g)));
  }
  return acc;
}


inline FPtr dne_of(const FPtr& f) { return universal_closure(imp(lnot(lnot(f)), f), f); }
inline FPtr lem_of(const FPtr& f) { return universal_closure(disj(f, lnot(f)), f); }

// ------------------------------------------------------------------ suites

enum class FrameUse { None, All, Dense };

struct SuiteInput {
  const std::vector<FPtr>& formulas;
  const CorpusSpec& spec;
};

struct SuiteDef {
  std::string id;
  std::string statement;
  FrameUse frames = FrameUse::All;
  bool two_valued = false;
  std::function<void(ModelCtx&, const std::vector<const FrameIdx*>&, const SuiteInput&)> run;
};

namespace suites {

using Frames = std::vector<const FrameIdx*>;

inline std::vector<FPtr> atoms_for_checks() {
  return {parse("R(x)"), parse("Q(y)"), parse("E(x, y)"), parse("x = y"), bot()};
}

inline void loplem(ModelCtx& c, const Frames&, const SuiteInput& in) {
  const auto& h = c.h();
  if (c.valuation == 0) {
    for (std::size_t j = 0; j < c.nj(); ++j)
      for (Elem p = 0; p < h.size(); ++p)
        for (Elem q = 0; q < h.size(); ++q) {
          const auto& J = c.nuc(j);
          Elem l1 = h.imp(p, J(q));
          c.check(l1 == J(l1), "item1: p -> jq is j-closed",
                  [&] { return nlohmann::json{{"j", j}, {"p", c.nm(p)}, {"q", c.nm(q)}}; });
          Elem l3 = J(h.join(p, q)), r3 = J(h.join(J(p), J(q)));
          c.check(l3 == r3, "item3: j(p or q) = j(jp or jq)",
                  [&] { return nlohmann::json{{"j", j}, {"p", c.nm(p)}, {"q", c.nm(q)}, {"lhs", c.nm(l3)}, {"rhs", c.nm(r3)}}; });
        }
  }
  for (auto& f : in.formulas) {
    const auto& V = c.V(f);
    for (std::size_t xi = 0; xi < c.tab.vars().size(); ++xi) {
      const std::size_t stride = ipow(c.model.domain, xi);
      for (std::size_t e = 0; e < c.ne(); ++e) {
        if (c.tab.digit(e, xi) != 0) continue;
        for (std::size_t j = 0; j < c.nj(); ++j) {
          const auto& J = c.nuc(j);
          Elem jall = h.top(), allj = h.top(), exj = h.bottom(), jex = h.bottom();
          for (std::size_t d = 0; d < c.model.domain; ++d) {
            Elem v = V[e + d * stride];
            jall = h.meet(jall, v);
            allj = h.meet(allj, J(v));
            exj = h.join(exj, J(v));
            jex = h.join(jex, v);
          }
          jall = J(jall);
          jex = J(jex);
          c.check(h.le(jall, allj), "item2: j(forall) <= forall j", [&] {
            return nlohmann::json{{"j", j}, {"formula", print(f)}, {"var", c.tab.vars()[xi]}, {"env", c.env_json(e)},
                                  {"lhs", c.nm(jall)}, {"rhs", c.nm(allj)}};
          });
          c.check(h.le(exj, jex), "item4: exists j <= j(exists)", [&] {
            return nlohmann::json{{"j", j}, {"formula", print(f)}, {"var", c.tab.vars()[xi]}, {"env", c.env_json(e)},
                                  {"lhs", c.nm(exj)}, {"rhs", c.nm(jex)}};
          });
        }
      }
    }
  }
}

// Pointwise comparison of two per-nucleus tables for the nuclei selected by `use`.
template <class Use, class Cmp>
void compare_tables(ModelCtx& c, const std::string& what, const FPtr& f, const std::vector<Elem>& a,
                    const std::vector<Elem>& b, Use use, Cmp cmp) {
  for (std::size_t j = 0; j < c.nj(); ++j) {
    if (!use(j)) continue;
    for (std::size_t e = 0; e < c.ne(); ++e) {
      Elem x = a[j * c.ne() + e], y = b[j * c.ne() + e];
      c.check(cmp(x, y), what, [&] {
        return nlohmann::json{{"j", j}, {"formula", print(f)}, {"env", c.env_json(e)}, {"lhs", c.nm(x)}, {"rhs", c.nm(y)}};
      });
    }
  }
}

inline void maximal_collapse(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    auto maximal = [&](std::size_t j) {
      if (!c.in_frame(j)) return false;
      for (auto k : fr->members)
        if (k != j && c.tab.le(j, k)) return false;
      return true;
    };
    for (auto& f : in.formulas)
      compare_tables(c, "forcing equals gg at a maximal member", f, c.F(f), c.G(f), maximal,
                     [](Elem x, Elem y) { return x == y; });
  }
}

inline void jclosed(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      const auto& F = c.F(f);
      auto JF = c.tab.apply_each(F);
      compare_tables(c, "j(forcing) = forcing", f, JF, F, [](std::size_t) { return true; },
                     [](Elem x, Elem y) { return x == y; });
    }
  }
}

inline void monotonicity(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      const auto& F = c.F(f);
      for (std::size_t j = 0; j < c.nj(); ++j)
        for (auto k : fr->members) {
          if (!c.tab.le(j, k)) continue;
          for (std::size_t e = 0; e < c.ne(); ++e) {
            Elem a = F[j * c.ne() + e], b = F[k * c.ne() + e];
            c.check(c.h().le(a, b), "forcing at j <= forcing at k", [&] {
              return nlohmann::json{{"j", j}, {"k", k}, {"formula", print(f)}, {"env", c.env_json(e)},
                                    {"lhs", c.nm(a)}, {"rhs", c.nm(b)}};
            });
          }
        }
    }
  }
}

inline void jinp_monotonicity(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      const auto& F = c.F(f);
      for (auto j : fr->members)
        for (std::size_t e = 0; e < c.ne(); ++e) {
          Elem m = c.h().top();
          for (auto k : c.tab.up(j)) m = c.h().meet(m, F[k * c.ne() + e]);
          Elem a = F[j * c.ne() + e];
          c.check(a == m, "forcing at j equals the meet above j", [&] {
            return nlohmann::json{{"j", j}, {"formula", print(f)}, {"env", c.env_json(e)}, {"lhs", c.nm(a)}, {"rhs", c.nm(m)}};
          });
        }
    }
  }
}

inline void constant_domain(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      const auto& F = c.F(f);
      for (std::size_t xi = 0; xi < c.tab.vars().size(); ++xi) {
        const std::string& x = c.tab.vars()[xi];
        auto g = forall(x, f);
        const auto& FG = c.F(g);
        const std::size_t stride = ipow(c.model.domain, xi);
        for (auto j : fr->members)
          for (std::size_t e = 0; e < c.ne(); ++e) {
            std::size_t base = e - c.tab.digit(e, xi) * stride;
            Elem m = c.h().top();
            for (std::size_t d = 0; d < c.model.domain; ++d) m = c.h().meet(m, F[j * c.ne() + base + d * stride]);
            Elem b = FG[j * c.ne() + e];
            c.check(m == b, "meet of forcing equals forcing of forall", [&] {
              return nlohmann::json{{"j", j}, {"formula", print(g)}, {"env", c.env_json(e)}, {"lhs", c.nm(m)}, {"rhs", c.nm(b)}};
            });
          }
      }
    }
  }
}

struct RuleInstance {
  std::string name;
  std::vector<FPtr> premises;
  FPtr conclusion;
  std::string generalized;  // empty, or the variable met over in the premises
};

inline std::vector<FPtr> iqc_axioms(const std::vector<FPtr>& fs) {
  std::vector<FPtr> out;
  const std::size_t n = fs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const FPtr& a = fs[i];
    const FPtr& b = fs[(i * 7 + 3) % n];
    out.push_back(imp(a, disj(a, b)));
    out.push_back(imp(conj(a, b), a));
    out.push_back(imp(disj(a, a), a));
    out.push_back(imp(a, conj(a, a)));
    out.push_back(imp(disj(a, b), disj(b, a)));
    out.push_back(imp(conj(a, b), conj(b, a)));
    out.push_back(imp(bot(), a));
    for (auto [x, y] : {std::pair{"x", "y"}, std::pair{"y", "x"}}) {
      try {
        auto inst = subst(a, x, var(y));
        out.push_back(imp(forall(x, a), inst));
        out.push_back(imp(inst, exists(x, a)));
      } catch (const FormulaError&) {
      }
    }
  }
  return out;
}

inline std::vector<RuleInstance> iqc_rules(const std::vector<FPtr>& fs) {
  std::vector<RuleInstance> out;
  const std::size_t n = fs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const FPtr& a = fs[i];
    const FPtr& b = fs[(i * 7 + 3) % n];
    const FPtr& g = fs[(i * 13 + 5) % n];
    out.push_back({"modus ponens", {a, imp(a, b)}, b, ""});
    out.push_back({"syllogism", {imp(a, b), imp(b, g)}, imp(a, g), ""});
    out.push_back({"exportation", {imp(conj(a, b), g)}, imp(a, imp(b, g)), ""});
    out.push_back({"importation", {imp(a, imp(b, g))}, imp(conj(a, b), g), ""});
    out.push_back({"expansion", {imp(a, b)}, imp(disj(g, a), disj(g, b)), ""});
    auto closed_b = forall("x", b);  // x not free
    out.push_back({"forall introduction", {imp(closed_b, a)}, imp(closed_b, forall("x", a)), "x"});
    out.push_back({"exists elimination", {imp(a, closed_b)}, imp(exists("x", a), closed_b), "x"});
  }
  return out;
}

inline void iqc_soundness(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  static thread_local const std::vector<FPtr>* cached_for = nullptr;
  static thread_local std::vector<FPtr> axioms;
  static thread_local std::vector<RuleInstance> rules;
  if (cached_for != &in.formulas) {
    axioms = iqc_axioms(in.formulas);
    rules = iqc_rules(in.formulas);
    cached_for = &in.formulas;
  }
  // Instances rotate across valuations so every instance meets every shape.
  auto ax_window = rotating_window(axioms.size(), c.valuation, std::max<std::size_t>(1, in.spec.valuations / 10));
  auto rule_window = rotating_window(rules.size(), c.valuation, std::max<std::size_t>(1, in.spec.valuations / 10));
  const auto& h = c.h();
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto i : ax_window) {
      const auto& F = c.F(axioms[i]);
      for (std::size_t k = 0; k < F.size(); ++k)
        c.check(F[k] == h.top(), "axiom forced to top", [&] {
          return nlohmann::json{{"j", k / c.ne()}, {"formula", print(axioms[i])}, {"env", c.env_json(k % c.ne())},
                                {"lhs", c.nm(F[k])}, {"rhs", c.nm(h.top())}};
        });
    }
    for (auto i : rule_window) {
      const auto& r = rules[i];
      const auto& C = c.F(r.conclusion);
      std::vector<Elem> prem(C.size(), h.top());
      for (auto& p : r.premises) {
        const auto& Pt = c.F(p);
        for (std::size_t k = 0; k < prem.size(); ++k) prem[k] = h.meet(prem[k], Pt[k]);
      }
      if (!r.generalized.empty()) {
        std::size_t xi = c.tab.var_index(r.generalized), stride = ipow(c.model.domain, xi);
        std::vector<Elem> met(prem.size());
        for (std::size_t j = 0; j < c.nj(); ++j)
          for (std::size_t e = 0; e < c.ne(); ++e) {
            std::size_t base = e - c.tab.digit(e, xi) * stride;
            Elem m = h.top();
            for (std::size_t d = 0; d < c.model.domain; ++d) m = h.meet(m, prem[j * c.ne() + base + d * stride]);
            met[j * c.ne() + e] = m;
          }
        prem = met;
      }
      // Detaching needs the implication to speak about j itself, so modus ponens is checked at members.
      const bool members_only = r.name == "modus ponens";
      for (std::size_t k = 0; k < C.size(); ++k) {
        if (members_only && !c.in_frame(k / c.ne())) continue;
        c.check(h.le(prem[k], C[k]), "rule: premises <= conclusion (" + r.name + ")", [&] {
          return nlohmann::json{{"j", k / c.ne()}, {"formula", print(r.conclusion)}, {"env", c.env_json(k % c.ne())},
                                {"lhs", c.nm(prem[k])}, {"rhs", c.nm(C[k])}};
        });
      }
    }
  }
  c.acc.formulas_checked = std::max(c.acc.formulas_checked, axioms.size() + rules.size());
}

inline void literal_class(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  const auto& h = c.h();
  std::vector<FPtr> rs;
  for (auto& f : in.formulas)
    if (in_literal_class(f)) rs.push_back(f);
  // The singleton frame {id} is always included.
  static thread_local FrameIdx id_frame;
  id_frame.members.clear();
  for (std::size_t j = 0; j < c.nj(); ++j)
    if (c.nuc(j) == identity_nucleus(c.model.alg)) id_frame.members.push_back(j);
  std::vector<const FrameIdx*> all = frames;
  all.push_back(&id_frame);
  std::map<const Formula*, std::vector<Elem>> meet_over;
  for (auto& f : rs) meet_over[f.get()] = std::vector<Elem>(c.ne(), h.top());
  for (auto fr : all) {
    c.set_frame(*fr);
    for (auto& f : rs) {
      const auto& V = c.V(f);
      const auto& F = c.F(f);
      auto& acc = meet_over[f.get()];
      for (std::size_t j = 0; j < c.nj(); ++j)
        for (std::size_t e = 0; e < c.ne(); ++e) {
          Elem a = V[e], b = F[j * c.ne() + e];
          acc[e] = h.meet(acc[e], b);
          c.check(h.le(a, b), "value <= forcing", [&] {
            return nlohmann::json{{"j", j}, {"formula", print(f)}, {"env", c.env_json(e)}, {"lhs", c.nm(a)}, {"rhs", c.nm(b)}};
          });
        }
    }
  }
  c.frame = nullptr;
  for (auto& f : rs) {
    const auto& V = c.V(f);
    const auto& M = meet_over[f.get()];
    for (std::size_t e = 0; e < c.ne(); ++e)
      c.check(V[e] == M[e], "value equals the meet over frames and nuclei", [&] {
        return nlohmann::json{{"formula", print(f)}, {"env", c.env_json(e)}, {"lhs", c.nm(V[e])}, {"rhs", c.nm(M[e])}};
      });
  }
  c.acc.formulas_checked = std::max(c.acc.formulas_checked, rs.size());
}

inline void forcing_l_equiv(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  if (ipow(c.h().size(), c.model.domain) > in.spec.max_subsets)
    throw SuiteError("corpus too large for budget: power-object evaluator would range over " +
                     std::to_string(ipow(c.h().size(), c.model.domain)) + " subsets");
  for (auto fr : frames) {
    c.set_frame(*fr);
    LForcing lf(c.model, *fr);
    std::vector<std::pair<std::string, std::size_t>> points;
    for (auto& f : in.formulas) {
      const auto& F = c.F(f);
      auto fv = free_vars(f);
      for (std::size_t e = 0; e < c.ne(); ++e) {
        bool canonical = true;  // one representative per free-variable assignment
        for (std::size_t vi = 0; vi < c.tab.vars().size(); ++vi)
          if (!fv.count(c.tab.vars()[vi]) && c.tab.digit(e, vi) != 0) canonical = false;
        if (!canonical) continue;
        for (std::size_t j = 0; j < c.nj(); ++j) {
          points.clear();
          for (auto& v : fv) points.emplace_back(v, c.tab.digit(e, c.tab.var_index(v)));
          Elem a = lf.eval_at_points(f, j, points), b = F[j * c.ne() + e];
          c.check(a == b, "power-object forcing equals forcing", [&] {
            return nlohmann::json{{"j", j}, {"formula", print(f)}, {"env", c.env_json(e)}, {"lhs", c.nm(a)}, {"rhs", c.nm(b)}};
          });
        }
      }
    }
  }
}

inline void kuroda_gg(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      auto JK = c.tab.apply_each(c.K(f));
      compare_tables(c, "j(kuroda) = forcing", f, JK, c.F(f), [](std::size_t) { return true; },
                     [](Elem x, Elem y) { return x == y; });
    }
  }
}

inline void impfree_equiv(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      if (!implication_free(f)) continue;
      Elem v = equiv_p(c, f);
      c.check(v == c.h().top(), "Equiv_P holds", [&] { return nlohmann::json{{"formula", print(f)}, {"value", c.nm(v)}}; });
    }
  }
}

inline void emn(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  const auto& h = c.h();
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      auto n1 = lnot(f), n2 = lnot(lnot(f));
      Elem eq = equiv_p(c, f), eq1 = equiv_p(c, n1), eq2 = equiv_p(c, n2);
      Elem mo1 = mono_p(c, n1), mo2 = mono_p(c, n2), no2 = nono_p(c, n2);
      Elem modne = mono_p(c, imp(n2, f));
      auto item = [&](const char* what, Elem lhs, Elem rhs) {
        c.check(h.le(lhs, rhs), what,
                [&] { return nlohmann::json{{"formula", print(f)}, {"lhs", c.nm(lhs)}, {"rhs", c.nm(rhs)}}; });
      };
      item("item1: Nono(~~f) -> Mono(~f)", no2, mo1);
      item("item2: Equiv(f) & Mono(~f) -> Equiv(~f)", h.meet(eq, mo1), eq1);
      item("item3: Equiv(f) & Mono(~f) & Mono(~~f) -> Equiv(~~f)", h.meet(eq, h.meet(mo1, mo2)), eq2);
      item("item4: Equiv(f) & Nono(~~f) -> Mono(~~f -> f)", h.meet(eq, no2), modne);
    }
  }
}

inline void mndneg(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  const auto& h = c.h();
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      auto n1 = lnot(f), n2 = lnot(lnot(f));
      Elem eq = equiv_p(c, f);
      Elem l1 = h.meet(eq, mono_p(c, n1)), r1 = equiv_p(c, lem_of(f));
      c.check(h.le(l1, r1), "Equiv(f) & Mono(~f) -> Equiv(LEM f)",
              [&] { return nlohmann::json{{"formula", print(f)}, {"lhs", c.nm(l1)}, {"rhs", c.nm(r1)}}; });
      Elem l2 = h.meet(eq, h.meet(mono_p(c, n2), nono_p(c, n2))), r2 = equiv_p(c, dne_of(f));
      c.check(h.le(l2, r2), "Equiv(f) & Mono(~~f) & Nono(~~f) -> Equiv(DNE f)",
              [&] { return nlohmann::json{{"formula", print(f)}, {"lhs", c.nm(l2)}, {"rhs", c.nm(r2)}}; });
    }
  }
}

inline void trp_closure(ModelCtx& c, const Frames&, const SuiteInput& in) {
  const auto& h = c.h();
  auto atoms = atoms_for_checks();
  const std::size_t n = in.formulas.size();
  struct Row {
    FPtr a, b, conj, disj, ex, imp, all;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const FPtr& a = in.formulas[i];
    const FPtr& b = in.formulas[(i * 7 + 3) % n];
    rows.push_back({a, b, conj(a, b), disj(a, b), exists("x", a), imp(a, b), forall("x", a)});
  }
  for (std::size_t j = 0; j < c.nj(); ++j)
    for (std::size_t k = 0; k < c.nj(); ++k) {
      const bool le = c.tab.le(j, k);
      auto w = [&](const FPtr& f, Elem a, Elem b) {
        return nlohmann::json{{"j", j}, {"k", k}, {"formula", print(f)}, {"lhs", c.nm(a)}, {"rhs", c.nm(b)}};
      };
      if (le)
        for (auto& r : atoms) {
          Elem t = trp(c, r, j, k);
          c.check(t == h.top(), "item1: j <= k gives Trp(R)", [&] { return w(r, t, h.top()); });
        }
      for (auto& r : rows) {
        Elem both = h.meet(trp(c, r.a, j, k), trp(c, r.b, j, k));
        Elem t2 = trp(c, r.conj, j, k);
        c.check(h.le(both, t2), "item2: conjunction", [&] { return w(r.conj, both, t2); });
        if (le) {
          Elem t3 = h.meet(trp(c, r.disj, j, k), trp(c, r.ex, j, k));
          c.check(h.le(both, t3), "item3: disjunction and exists", [&] { return w(r.disj, both, t3); });
        }
        Elem l4 = h.meet(both, cl(c, r.b, j, k));
        Elem t4 = h.meet(trp(c, r.imp, j, k), trp(c, r.all, j, k));
        c.check(h.le(l4, t4), "item4: implication and forall", [&] { return w(r.imp, l4, t4); });
      }
    }
}

inline void dense_dne(ModelCtx& c, const Frames&, const SuiteInput& in) {
  const auto& h = c.h();
  std::vector<std::size_t> dense;
  for (std::size_t j = 0; j < c.nj(); ++j)
    if (is_dense(c.nuc(j))) dense.push_back(j);
  for (auto& r : atoms_for_checks()) {
    auto d = dne_of(r);
    const auto& V = c.V(d);
    const auto& G = c.G(d);
    for (auto j : dense) {
      Elem a = V[0], b = G[j * c.ne()];
      c.check(h.le(a, b), "item1: DNE(R) -> (DNE(R))^j",
              [&] { return nlohmann::json{{"j", j}, {"formula", print(d)}, {"lhs", c.nm(a)}, {"rhs", c.nm(b)}}; });
    }
  }
  for (auto& f : in.formulas) {
    auto d = dne_of(f);
    const auto& G = c.G(d);
    for (auto j : dense)
      for (auto k : dense) {
        Elem a = G[j * c.ne()], b = cl(c, f, j, k);
        c.check(h.le(a, b), "item2: (DNE f)^j -> Cl(f)(j,k)", [&] {
          return nlohmann::json{{"j", j}, {"k", k}, {"formula", print(f)}, {"lhs", c.nm(a)}, {"rhs", c.nm(b)}};
        });
      }
  }
}

inline void trp_imp_mn(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  const auto& h = c.h();
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto& f : in.formulas) {
      auto n2 = lnot(lnot(f));
      Elem rhs = h.meet(mono_p(c, n2), nono_p(c, n2));
      for (std::size_t j = 0; j < c.nj(); ++j) {
        Elem lhs = h.top();
        for (auto k : fr->members) lhs = h.meet(lhs, trp(c, f, j, k));
        c.check(h.le(lhs, rhs), "transparency over a dense frame -> Mono & Nono of ~~f", [&] {
          return nlohmann::json{{"j", j}, {"formula", print(f)}, {"lhs", c.nm(lhs)}, {"rhs", c.nm(rhs)}};
        });
      }
    }
  }
}

// (Sigma0-DNE)^j over the corpus: meet over quantifier-free formulas and atoms.
inline Elem sigma0_dne_at(ModelCtx& c, const std::vector<FPtr>& formulas, std::size_t j) {
  Elem acc = c.h().top();
  auto add = [&](const FPtr& f) { acc = c.h().meet(acc, c.G(dne_of(f))[j * c.ne()]); };
  for (auto& f : formulas)
    if (quantifier_free(f)) add(f);
  for (auto& r : atoms_for_checks()) add(r);
  return acc;
}

inline void trp_ladder(ModelCtx& c, const Frames&, const SuiteInput& in) {
  const auto& h = c.h();
  std::vector<std::size_t> dense;
  for (std::size_t j = 0; j < c.nj(); ++j)
    if (is_dense(c.nuc(j))) dense.push_back(j);
  std::vector<FPtr> targets;
  for (auto& f : in.formulas)
    if (in_sigma(f, 1) || in_pi(f, 1)) targets.push_back(f);
  for (auto j : dense) {
    Elem ante = sigma0_dne_at(c, in.formulas, j);
    for (auto k : dense) {
      if (!c.tab.le(j, k)) continue;
      for (auto& f : targets) {
        Elem t = trp(c, f, j, k);
        c.check(h.le(ante, t), "(Sigma0-DNE)^j & j <= k -> Trp", [&] {
          return nlohmann::json{{"j", j}, {"k", k}, {"formula", print(f)}, {"lhs", c.nm(ante)}, {"rhs", c.nm(t)}};
        });
      }
    }
  }
  c.acc.formulas_checked = std::max(c.acc.formulas_checked, targets.size());
}

inline void sufcon(ModelCtx& c, const Frames& frames, const SuiteInput& in) {
  const auto& h = c.h();
  std::vector<std::pair<std::string, FPtr>> targets;
  for (auto& f : in.formulas) {
    bool inclass = in_sigma(f, 1) || in_pi(f, 1) || in_pi_or_pi(f, 1) || in_sigma(f, 2);
    if (!inclass) continue;
    targets.push_back({"DNE", dne_of(f)});
    targets.push_back({"LEM", lem_of(f)});
  }
  for (auto fr : frames) {
    c.set_frame(*fr);
    for (auto j : fr->members) {
      bool least = true;
      for (auto k : fr->members) least = least && c.tab.le(j, k);
      if (!least) continue;
      Elem ante = sigma0_dne_at(c, in.formulas, j);
      for (auto& [ax, g] : targets) {
        Elem v = equiv_p(c, g);
        c.check(h.le(ante, v), "(Sigma0-DNE)^j & j least in P -> Equiv_P(" + ax + ")", [&] {
          return nlohmann::json{{"j", j}, {"formula", print(g)}, {"lhs", c.nm(ante)}, {"rhs", c.nm(v)}};
        });
      }
    }
  }
  c.acc.formulas_checked = std::max(c.acc.formulas_checked, targets.size());
}

}  // namespace suites

inline const std::vector<SuiteDef>& suite_registry() {
  using namespace suites;
  static const std::vector<SuiteDef> reg = {
      {"loplem", "basic nucleus facts, quantifiers as meets and joins over the domain", FrameUse::None, false, loplem},
      {"maximal-collapse", "at a maximal frame member the forcing translation equals the modal translation",
       FrameUse::All, false, maximal_collapse},
      {"jclosed", "the forcing value at j is j-closed", FrameUse::All, false, jclosed},
      {"monotonicity", "forcing at j is below forcing at k for j <= k, k in the frame", FrameUse::All, false,
       monotonicity},
      {"jinP-monotonicity", "for j in the frame, forcing at j is the meet over frame members above j", FrameUse::All,
       false, jinp_monotonicity},
      {"constant-domain", "for j in the frame, the meet over the domain commutes with forcing", FrameUse::All, false,
       constant_domain},
      {"iqc-soundness", "axioms forced to top, rules preserve forcing", FrameUse::All, false, iqc_soundness},
      {"literal-class", "literal-class formulas equal the meet of their forcing values", FrameUse::All, false,
       literal_class},
      {"forcingL-equiv", "the power-object forcing at unit singletons equals forcing", FrameUse::All, false,
       forcing_l_equiv},
      {"kuroda-gg", "j applied to the Kuroda-style translation equals forcing", FrameUse::All, false, kuroda_gg},
      {"impfree-equiv", "implication-free formulas satisfy Equiv_P", FrameUse::All, false, impfree_equiv},
      {"emn", "Equiv/Mono/Nono closure under negation", FrameUse::All, false, emn},
      {"mndneg", "Equiv of excluded middle and double-negation elimination", FrameUse::All, false, mndneg},
      {"trp-closure", "transparency is closed under connectives", FrameUse::None, false, trp_closure},
      {"dense-dne", "dense nuclei with DNE give closedness", FrameUse::None, false, dense_dne},
      {"trp-imp-mn", "transparency over a dense frame gives Mono and Nono of the double negation", FrameUse::Dense,
       false, trp_imp_mn},
      {"trp-ladder", "transparency of Sigma1 and Pi1 from atomic DNE (two-valued atoms)", FrameUse::None, true,
       trp_ladder},
      {"sufcon", "Equiv_P of Gamma-DNE and Gamma-LEM on dense frames with a least member (two-valued atoms)",
       FrameUse::Dense, true, sufcon},
  };
  return reg;
}

inline const SuiteDef& find_suite(const std::string& id) {
  for (auto& s : suite_registry())
    if (s.id == id) return s;
  std::string names;
  for (auto& s : suite_registry()) names += (names.empty() ? "" : ", ") + s.id;
  throw SuiteError("unknown suite '" + id + "'; registry: " + names);
}

struct SuiteReport {
  std::string suite;
  CorpusSpec corpus;
  Accumulator acc;
  std::size_t shapes = 0, formulas = 0;
  bool pass() const { return acc.failures == 0; }

  nlohmann::json to_json() const {
    return {{"suite", suite},
            {"statement", find_suite(suite).statement},
            {"seed", corpus.seed},
            {"corpus", corpus.to_json()},
            {"shapes", shapes},
            {"models", acc.models},
            {"formulas", formulas},
            {"instances_checked", acc.formulas_checked},
            {"frames_total", acc.frames_total},
            {"frames_checked", acc.frames_checked},
            {"checks", acc.checks},
            {"failures", acc.failures},
            {"witnesses", acc.witnesses},
            {"verdict", pass() ? "pass" : "fail"}};
  }
};

namespace detail {

// Runs fn(shape_index) for every shape, split over `jobs` threads; results merged in shape order.
template <class Fn>
std::vector<Accumulator> over_shapes(std::size_t n, unsigned jobs, Fn fn) {
  std::vector<Accumulator> parts(n);
  std::vector<std::string> errors(n);
  auto work = [&](std::size_t from, std::size_t step) {
    for (std::size_t i = from; i < n; i += step) {
      try {
        fn(i, parts[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> ts;
    for (unsigned t = 0; t < jobs; ++t) ts.emplace_back(work, t, jobs);
    for (auto& t : ts) t.join();
  }
  for (auto& e : errors)
    if (!e.empty()) throw SuiteError(e);
  return parts;
}

}  // namespace detail

inline SuiteReport run_suite(const std::string& id, const CorpusSpec& spec, unsigned jobs = 1) {
  const SuiteDef& def = find_suite(id);
  auto shapes = corpus_shapes(spec);
  auto formulas = corpus_formulas(spec);
  auto vars = tabulation_vars(formulas);
  SuiteInput in{formulas, spec};
  auto parts = detail::over_shapes(shapes.size(), jobs, [&](std::size_t si, Accumulator& acc) {
    const Shape& s = shapes[si];
    const auto& pool = def.frames == FrameUse::Dense ? s.dense_frames : s.frames;
    if (def.frames != FrameUse::None) {
      acc.frames_total += pool.size();
      acc.frames_checked += std::min(pool.size(), ((pool.size() + spec.valuations - 1) / spec.valuations) * spec.valuations);
    }
    for (std::size_t v = 0; v < spec.valuations; ++v) {
      ModelCtx c(s, v, sample_model(s, si, v, spec, def.two_valued), vars, acc);
      std::vector<const FrameIdx*> window;
      if (def.frames != FrameUse::None)
        for (auto i : rotating_window(pool.size(), v, spec.valuations)) window.push_back(&pool[i]);
      ++acc.models;
      def.run(c, window, in);
    }
    acc.formulas_checked = std::max(acc.formulas_checked, formulas.size());
  });
  SuiteReport rep;
  rep.suite = id;
  rep.corpus = spec;
  rep.shapes = shapes.size();
  rep.formulas = formulas.size();
  for (auto& p : parts) rep.acc.merge(p);
  return rep;
}

// ------------------------------------------------------------------ countermodel search

enum class SearchTarget { EquivFails, TrpFails, MonoFails, NonoFails };
enum class FormulaFilter { Any, Implicational, ImplicationFree, Atomic };

inline SearchTarget parse_target(const std::string& s) {
  if (s == "equiv") return SearchTarget::EquivFails;
  if (s == "trp") return SearchTarget::TrpFails;
  if (s == "mono") return SearchTarget::MonoFails;
  if (s == "nono") return SearchTarget::NonoFails;
  throw SuiteError("unknown search target '" + s + "' (equiv, trp, mono, nono)");
}
inline FormulaFilter parse_filter(const std::string& s) {
  if (s == "any") return FormulaFilter::Any;
  if (s == "implicational") return FormulaFilter::Implicational;
  if (s == "implication-free") return FormulaFilter::ImplicationFree;
  if (s == "atomic") return FormulaFilter::Atomic;
  throw SuiteError("unknown formula filter '" + s + "' (any, implicational, implication-free, atomic)");
}

struct SearchResult {
  bool found = false;
  nlohmann::json witness;
  std::size_t models = 0, candidates = 0;
  nlohmann::json to_json(const std::string& target, const std::string& filter, const CorpusSpec& spec) const {
    return {{"target", target}, {"filter", filter},    {"seed", spec.seed},
            {"corpus", spec.to_json()}, {"models", models}, {"candidates", candidates},
            {"result", found ? "witness" : "exhausted"}, {"witness", found ? witness : nlohmann::json()}};
  }
};

// Canonical order: shapes, valuations, frames of the rotating window, formulas, nuclei.
// The Trp target ranges over pairs with j not below k, the other targets over frames.
inline SearchResult search_countermodel(SearchTarget target, FormulaFilter filter, const CorpusSpec& spec) {
  auto shapes = corpus_shapes(spec);
  auto all = corpus_formulas(spec);
  std::vector<FPtr> formulas;
  auto keep = [&](const FPtr& f) {
    switch (filter) {
      case FormulaFilter::Any: return true;
      case FormulaFilter::Implicational: return !implication_free(f);
      case FormulaFilter::ImplicationFree: return implication_free(f);
      case FormulaFilter::Atomic: return is_atomic(*f);
    }
    return false;
  };
  if (filter == FormulaFilter::Atomic)
    for (auto& r : suites::atoms_for_checks()) formulas.push_back(r);
  else
    for (auto& f : all)
      if (keep(f)) formulas.push_back(f);
  auto vars = tabulation_vars(all);
  SearchResult res;
  Accumulator scratch;
  for (std::size_t si = 0; si < shapes.size(); ++si) {
    const Shape& s = shapes[si];
    for (std::size_t v = 0; v < spec.valuations; ++v) {
      ModelCtx c(s, v, sample_model(s, si, v, spec, false), vars, scratch);
      ++res.models;
      auto found = [&](nlohmann::json w) {
        w["model"] = model_json(c.model, s.poset);
        w["valuation_index"] = v;
        w["nuclei"] = nlohmann::json::array();
        for (auto& n : s.nuclei) w["nuclei"].push_back(n.table);
        res.found = true;
        res.witness = w;
        return res;
      };
      if (target == SearchTarget::TrpFails) {
        for (auto& f : formulas)
          for (std::size_t j = 0; j < c.nj(); ++j)
            for (std::size_t k = 0; k < c.nj(); ++k) {
              if (c.tab.le(j, k)) continue;
              ++res.candidates;
              Elem t = trp(c, f, j, k);
              if (t != c.h().top())
                return found({{"formula", print(f)}, {"j", j}, {"k", k}, {"value", c.nm(t)}});
            }
        continue;
      }
      for (auto fi : rotating_window(s.frames.size(), v, spec.valuations)) {
        const FrameIdx& fr = s.frames[fi];
        c.set_frame(fr);
        for (auto& f : formulas) {
          ++res.candidates;
          Elem t = target == SearchTarget::EquivFails ? equiv_p(c, f)
                   : target == SearchTarget::MonoFails ? mono_p(c, f)
                                                       : nono_p(c, f);
          if (t != c.h().top()) return found({{"formula", print(f)}, {"frame", fr.members}, {"value", c.nm(t)}});
        }
      }
    }
  }
  return res;
}

}  // namespace lopkit
