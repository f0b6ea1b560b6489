#include <gtest/gtest.h>

#include <random>

#include "lopkit/hmodel.hpp"

using namespace lopkit;

namespace {

AlgPtr chain3() {
  std::vector<Elem> meet = {0, 0, 0, 0, 1, 1, 0, 1, 2};
  std::vector<Elem> join = {0, 1, 2, 1, 1, 2, 2, 2, 2};
  std::vector<Elem> imp = {2, 2, 2, 0, 2, 2, 0, 1, 2};
  return std::make_shared<HeytingAlg>(algebra_from_tables({"0", "a", "1"}, meet, join, imp));
}

HModel model_on(const AlgPtr& h, std::size_t domain) {
  HModel m;
  m.alg = h;
  m.domain = domain;
  m.nuclei = enumerate_nuclei(h);
  return m;
}

void random_atoms(HModel& m, std::mt19937_64& rng) {
  for (auto [name, ar] : {std::pair<const char*, std::size_t>{"R", 1}, {"Q", 1}, {"E", 2}}) {
    AtomTable t;
    t.arity = ar;
    for (std::size_t i = 0; i < ipow(m.domain, ar); ++i) t.values.push_back(static_cast<Elem>(rng() % m.alg->size()));
    m.atoms[name] = t;
  }
}

FPtr random_formula(std::mt19937_64& rng, int depth) {
  const char* vs[] = {"x", "y"};
  auto v = [&] { return var(vs[rng() % 2]); };
  if (depth == 0 || rng() % 4 == 0) {
    switch (rng() % 5) {
      case 0: return atom("R", {v()});
      case 1: return atom("Q", {v()});
      case 2: return atom("E", {v(), v()});
      case 3: return eq(var("x"), var("y"));
      default: return bot();
    }
  }
  switch (rng() % 6) {
    case 0: return conj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 1: return disj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 2: return imp(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return forall(vs[rng() % 2], random_formula(rng, depth - 1));
    case 4: return exists(vs[rng() % 2], random_formula(rng, depth - 1));
    default: return lnot(random_formula(rng, depth - 1));
  }
}

// Oracle: forcing clauses written out directly over an explicit frame and environment map.
Elem oracle_forcing(const FPtr& f, const HModel& m, const Nucleus& j, const LopFrame& fr, Env env) {
  const HeytingAlg& h = *m.alg;
  std::vector<const Nucleus*> up;
  for (auto& k : fr.members) {
    bool le = true;
    for (Elem a = 0; a < h.size(); ++a) le = le && h.le(j(a), k(a));
    if (le) up.push_back(&k);
  }
  switch (f->kind) {
    case Kind::Atom: {
      std::size_t idx = 0, mul = 1;
      for (auto& t : f->terms) {
        idx += env.at(t->name) * mul;
        mul *= m.domain;
      }
      return j(m.atoms.at(f->name).values[idx]);
    }
    case Kind::Eq: return j(env.at(f->terms[0]->name) == env.at(f->terms[1]->name) ? h.top() : h.bottom());
    case Kind::Bot: return j(h.bottom());
    case Kind::And: return h.meet(oracle_forcing(f->left, m, j, fr, env), oracle_forcing(f->right, m, j, fr, env));
    case Kind::Or: return j(h.join(oracle_forcing(f->left, m, j, fr, env), oracle_forcing(f->right, m, j, fr, env)));
    case Kind::Imp: {
      Elem acc = h.top();
      for (auto k : up)
        acc = h.meet(acc, h.imp(oracle_forcing(f->left, m, *k, fr, env), oracle_forcing(f->right, m, *k, fr, env)));
      return acc;
    }
    case Kind::Forall: {
      Elem acc = h.top();
      for (auto k : up)
        for (std::size_t d = 0; d < m.domain; ++d) {
          env[f->name] = d;
          acc = h.meet(acc, oracle_forcing(f->left, m, *k, fr, env));
        }
      return acc;
    }
    case Kind::Exists: {
      Elem acc = h.bottom();
      for (std::size_t d = 0; d < m.domain; ++d) {
        env[f->name] = d;
        acc = h.join(acc, oracle_forcing(f->left, m, j, fr, env));
      }
      return j(acc);
    }
    default: throw std::logic_error("unexpected node");
  }
}

}  // namespace

TEST(HModel, ExcludedMiddleOnChain) {
  auto h = chain3();
  auto m = model_on(h, 1);
  m.atoms["R"] = {0, {1}};
  EXPECT_EQ(eval(parse("R \\/ ~R"), m, {}), 1u);
  EXPECT_EQ(eval(top(), m, {}), h->top());
}

TEST(HModel, ForallIsMeet) {
  auto h = chain3();
  auto m = model_on(h, 2);
  m.atoms["R"] = {1, {1, 2}};
  EXPECT_EQ(eval(parse("forall x. R(x)"), m, {}), 1u);
  EXPECT_EQ(eval(parse("exists x. R(x)"), m, {}), 2u);
}

TEST(HModel, Errors) {
  auto h = chain3();
  auto m = model_on(h, 1);
  m.atoms["R"] = {0, {1}};
  EXPECT_THROW(eval(parse("Q"), m, {}), ModelError);
  EXPECT_THROW(eval(parse("StepHalt(0, 0, 0)"), m, {}), ModelError);
  EXPECT_THROW(eval(parse("R(x)", {false, std::nullopt, {{"R", 1}}}), m, {}), ModelError);
  EXPECT_THROW(eval_m(gg_translate(parse("R")), m, {}, {}), ModelError);
  HModel bad = m;
  bad.atoms["Q"] = {1, {}};
  EXPECT_THROW(check_model(bad), ModelError);
}

TEST(HModel, GGUnderDoubleNegation) {
  auto h = chain3();
  auto m = model_on(h, 1);
  m.atoms["R"] = {0, {1}};
  ModalBinding b;
  b.nuclei.emplace("j", double_negation(h));
  EXPECT_EQ(eval_m(gg_translate(parse("R")), m, {}, b), 2u);
}

TEST(HModel, ExFalsoForcedToTop) {
  auto h = chain3();
  auto m = model_on(h, 1);
  m.atoms["R"] = {0, {0}};
  auto fr = make_frame(h, m.nuclei);
  for (auto& j : m.nuclei) {
    ModalBinding b;
    b.nuclei.emplace("j", j);
    b.frames.emplace("P", fr);
    EXPECT_EQ(eval_m(forcing_translate(parse("bot -> R")), m, {}, b), h->top());
  }
}

TEST(HModel, BiimplicationAtTopIsEquality) {
  for (auto& p : posets_up_to_iso(3)) {
    HeytingAlg h = upset_algebra(p);
    for (Elem a = 0; a < h.size(); ++a)
      for (Elem b = 0; b < h.size(); ++b) EXPECT_EQ(h.iff(a, b) == h.top(), a == b);
  }
}

// Fused tabulation, the staged path through translated syntax, and the direct oracle agree.
TEST(HModel, FusedMatchesStagedAndOracle) {
  std::mt19937_64 rng(21);
  for (std::size_t pts = 1; pts <= 3; ++pts)
    for (auto& p : posets_up_to_iso(pts))
      for (std::size_t d = 1; d <= 2; ++d) {
        auto h = std::make_shared<HeytingAlg>(upset_algebra(p));
        auto m = model_on(h, d);
        random_atoms(m, rng);
        Tabulator tab(m, {"x", "y"});
        for (int trial = 0; trial < 6; ++trial) {
          auto f = random_formula(rng, 3);
          FrameIdx fr;
          for (std::size_t i = 0; i < m.nuclei.size(); ++i)
            if (rng() % 2) fr.members.push_back(i);
          tab.set_frame(fr);
          auto frame = frame_from_indices(m, fr);
          auto F = tab.forcing(f), G = tab.gg(f), K = tab.kuroda(f);
          auto V = tab.plain(f);
          auto ft = forcing_translate(f), gt = gg_translate(f), kt = kuroda_forcing_translate(f);
          for (std::size_t e = 0; e < tab.envs(); ++e) {
            Env env = tab.env_map(e);
            ASSERT_EQ(V[e], eval(f, m, env));
            for (std::size_t j = 0; j < m.nuclei.size(); ++j) {
              ModalBinding b;
              b.nuclei.emplace("j", m.nuclei[j]);
              b.frames.emplace("P", frame);
              const std::size_t at = j * tab.envs() + e;
              ASSERT_EQ(F[at], eval_m(ft, m, env, b)) << print(f);
              ASSERT_EQ(F[at], oracle_forcing(f, m, m.nuclei[j], frame, env)) << print(f);
              ASSERT_EQ(G[at], eval_m(gt, m, env, b)) << print(f);
              ASSERT_EQ(K[at], eval_m(kt, m, env, b)) << print(f);
            }
          }
        }
      }
}

TEST(HModel, SingletonFrameCollapsesToGG) {
  std::mt19937_64 rng(4);
  for (auto& p : posets_up_to_iso(3)) {
    auto h = std::make_shared<HeytingAlg>(upset_algebra(p));
    auto m = model_on(h, 2);
    random_atoms(m, rng);
    Tabulator tab(m, {"x", "y"});
    for (std::size_t j = 0; j < m.nuclei.size(); ++j) {
      tab.set_frame({{j}});
      for (int t = 0; t < 10; ++t) {
        auto f = random_formula(rng, 3);
        auto F = tab.forcing(f), G = tab.gg(f);
        for (std::size_t e = 0; e < tab.envs(); ++e) ASSERT_EQ(F[j * tab.envs() + e], G[j * tab.envs() + e]);
      }
    }
  }
}

TEST(HModel, UnitSingleton) {
  auto h = chain3();
  auto m = model_on(h, 3);
  m.atoms["R"] = {1, {0, 1, 2}};
  LForcing lf(m, {{0}});
  auto ca = std::find(m.nuclei.begin(), m.nuclei.end(), closed_nucleus(h, 1)) - m.nuclei.begin();
  auto u = lf.unit_singleton(ca, 1);
  EXPECT_EQ(u, (HSubset{1, 2, 1}));
  EXPECT_EQ(lf.membership(ca, u), h->top());
}

TEST(HModel, PowerObjectForcingMatches) {
  std::mt19937_64 rng(9);
  for (std::size_t pts = 1; pts <= 2; ++pts)
    for (auto& p : posets_up_to_iso(pts))
      for (std::size_t d = 1; d <= 2; ++d) {
        auto h = std::make_shared<HeytingAlg>(upset_algebra(p));
        auto m = model_on(h, d);
        random_atoms(m, rng);
        Tabulator tab(m, {"x", "y"});
        FrameIdx fr;
        for (std::size_t i = 0; i < m.nuclei.size(); ++i) fr.members.push_back(i);
        tab.set_frame(fr);
        LForcing lf(m, fr);
        for (int t = 0; t < 20; ++t) {
          auto f = random_formula(rng, 3);
          auto F = tab.forcing(f);
          for (std::size_t e = 0; e < tab.envs(); ++e)
            for (std::size_t j = 0; j < m.nuclei.size(); ++j) {
              std::map<std::string, HSubset> env;
              for (auto& v : free_vars(f)) env[v] = lf.unit_singleton(j, tab.digit(e, tab.var_index(v)));
              ASSERT_EQ(lf.eval(f, j, env), F[j * tab.envs() + e]) << print(f);
            }
        }
        EXPECT_EQ(eval_forcing_L(top(), m, 0, fr, {}), h->top());
      }
}

// Upset algebras take a pointwise path; the same tables without the upset
// masks force plain enumeration over all subsets. Arbitrary subsets, not only
// unit singletons, are bound to the free variables.
TEST(HModel, PointwiseEvaluationMatchesEnumeration) {
  std::mt19937_64 rng(23);
  for (std::size_t pts = 2; pts <= 3; ++pts)
    for (auto& p : posets_up_to_iso(pts)) {
      auto h = std::make_shared<HeytingAlg>(upset_algebra(p));
      auto plain = std::make_shared<HeytingAlg>(*h);
      plain->upset_masks.clear();
      const std::size_t d = 2;
      auto m = model_on(h, d);
      random_atoms(m, rng);
      HModel m2 = m;
      m2.alg = plain;
      m2.nuclei = enumerate_nuclei(plain);
      ASSERT_EQ(m2.nuclei.size(), m.nuclei.size());
      FrameIdx fr;
      for (std::size_t i = 0; i < m.nuclei.size(); i += 2) fr.members.push_back(i);
      LForcing fast(m, fr), slow(m2, fr);
      for (int t = 0; t < 12; ++t) {
        auto f = random_formula(rng, 3);
        for (int e = 0; e < 4; ++e) {
          std::map<std::string, HSubset> env;
          for (auto& v : free_vars(f)) {
            HSubset u(d);
            for (auto& x : u) x = static_cast<Elem>(rng() % h->size());
            env[v] = u;
          }
          std::size_t j = rng() % m.nuclei.size();
          ASSERT_EQ(fast.eval(f, j, env), slow.eval(f, j, env)) << print(f);
        }
      }
      EXPECT_LT(fast.subsets_considered(), slow.subsets_considered());
    }
}

TEST(HModel, ImplicationFreeMonotoneInValuation) {
  std::mt19937_64 rng(17);
  for (auto& p : posets_up_to_iso(3)) {
    auto h = std::make_shared<HeytingAlg>(upset_algebra(p));
    auto m = model_on(h, 2);
    random_atoms(m, rng);
    HModel bigger = m;
    for (auto& [name, t] : bigger.atoms)
      for (auto& v : t.values) v = h->join(v, static_cast<Elem>(rng() % h->size()));
    Tabulator a(m, {"x", "y"}), b(bigger, {"x", "y"});
    for (int t = 0; t < 40; ++t) {
      auto f = random_formula(rng, 3);
      if (!implication_free(f)) continue;
      auto va = a.plain(f), vb = b.plain(f);
      for (std::size_t e = 0; e < va.size(); ++e) EXPECT_TRUE(h->le(va[e], vb[e]));
    }
  }
}

TEST(HModel, ModelFile) {
  auto j = nlohmann::json::parse(R"({
    "poset": {"elements": ["p", "q"], "covers": [["p", "q"]]},
    "domain": 2,
    "atoms": {"R": {"arity": 1, "values": ["{q}", "1"]}},
    "frame": ["id", "notnot"]})");
  auto mf = model_from_json(j);
  EXPECT_EQ(mf.model.alg->size(), 3u);
  ASSERT_TRUE(mf.frame.has_value());
  EXPECT_EQ(mf.frame->members.size(), 2u);
  EXPECT_EQ(eval(parse("forall x. R(x)"), mf.model, {}), 1u);
  j["atoms"]["R"]["values"] = {"{q}"};
  EXPECT_THROW(model_from_json(j), ModelError);
}
