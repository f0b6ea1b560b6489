#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "lopkit/suites.hpp"

using namespace lopkit;

namespace {

// Partial orders on n labelled points counted up to relabelling, by brute force.
std::size_t count_posets(std::size_t n) {
  std::set<std::vector<char>> classes;
  std::vector<std::pair<std::size_t, std::size_t>> offdiag;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) offdiag.emplace_back(i, j);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << offdiag.size()); ++bits) {
    std::vector<char> le(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) le[i * n + i] = 1;
    for (std::size_t b = 0; b < offdiag.size(); ++b)
      if (bits >> b & 1) le[offdiag[b].first * n + offdiag[b].second] = 1;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = 0; j < n && ok; ++j) {
        if (i != j && le[i * n + j] && le[j * n + i]) ok = false;
        for (std::size_t k = 0; k < n && ok; ++k)
          if (le[i * n + j] && le[j * n + k] && !le[i * n + k]) ok = false;
      }
    if (!ok) continue;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<char> best;
    do {
      std::vector<char> img(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) img[perm[i] * n + perm[j]] = le[i * n + j];
      if (best.empty() || img < best) best = img;
    } while (std::next_permutation(perm.begin(), perm.end()));
    classes.insert(best);
  }
  return classes.size();
}

std::size_t binom(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Meet over all assignments of the free variables of f.
template <class Fn>
Elem meet_over_envs(const HModel& m, const FPtr& f, Fn value) {
  auto fv = free_vars(f);
  std::vector<std::string> vars(fv.begin(), fv.end());
  Elem acc = m.alg->top();
  std::vector<std::size_t> idx(vars.size(), 0);
  while (true) {
    Env env;
    for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = idx[i];
    acc = m.alg->meet(acc, value(env));
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == m.domain) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return acc;
}

struct Rebuilt {
  HModel model;
  LopFrame all;
};

Rebuilt rebuild(const nlohmann::json& w) {
  nlohmann::json file = w.at("model");
  ModelFile mf = model_from_json(file);
  std::vector<std::vector<Elem>> tables = w.at("nuclei").get<std::vector<std::vector<Elem>>>();
  EXPECT_EQ(tables.size(), mf.model.nuclei.size());
  for (std::size_t i = 0; i < tables.size() && i < mf.model.nuclei.size(); ++i)
    EXPECT_EQ(tables[i], mf.model.nuclei[i].table);
  return {mf.model, make_frame(mf.model.alg, mf.model.nuclei)};
}

CorpusSpec tiny() { return builtin_corpus("builtin:tiny"); }

}  // namespace

TEST(Registry, IdsAreUniqueAndLookupListsTheRegistry) {
  std::set<std::string> ids;
  for (auto& s : suite_registry()) {
    EXPECT_TRUE(ids.insert(s.id).second) << s.id;
    EXPECT_FALSE(s.statement.empty());
  }
  EXPECT_EQ(ids.size(), 18u);
  for (const char* id : {"loplem", "jclosed", "monotonicity", "jinP-monotonicity", "constant-domain", "maximal-collapse",
                         "kuroda-gg", "forcingL-equiv", "literal-class", "iqc-soundness", "impfree-equiv", "emn",
                         "mndneg", "trp-closure", "dense-dne", "trp-imp-mn", "trp-ladder", "sufcon"})
    EXPECT_EQ(find_suite(id).id, id);
  try {
    find_suite("nosuch");
    FAIL();
  } catch (const SuiteError& e) {
    std::string msg = e.what();
    for (auto& s : suite_registry()) EXPECT_NE(msg.find(s.id), std::string::npos) << s.id;
  }
}

TEST(Corpus, BuiltinsAndFileValidation) {
  CorpusSpec small = builtin_corpus("builtin:small");
  EXPECT_EQ(small.max_points, 4u);
  EXPECT_EQ(small.max_domain, 3u);
  EXPECT_EQ(small.max_frame, 3u);
  EXPECT_EQ(small.depth, 3u);
  EXPECT_GE(small.valuations, 100u);
  EXPECT_THROW(builtin_corpus("builtin:huge"), SuiteError);

  CorpusSpec f = corpus_from_json({{"max_points", 2}, {"seed", 9}, {"extra_formulas", {"R(x) -> R(x)"}}});
  EXPECT_EQ(f.max_points, 2u);
  EXPECT_EQ(f.seed, 9u);
  EXPECT_EQ(f.max_domain, small.max_domain);
  EXPECT_THROW(corpus_from_json(nlohmann::json::array()), SuiteError);
  EXPECT_THROW(corpus_from_json({{"max_points", "four"}}), SuiteError);
  EXPECT_THROW(corpus_from_json({{"max_points", -1}}), SuiteError);
  EXPECT_THROW(corpus_from_json({{"valuations", 0}}), SuiteError);
  EXPECT_THROW(corpus_from_json({{"max_points", 7}}), SuiteError);

  CorpusSpec cramped = tiny();
  cramped.max_carrier = 4;
  EXPECT_THROW(corpus_shapes(cramped), SuiteError);
}

TEST(Corpus, ShapesCoverEveryPosetDomainAndFrame) {
  std::vector<std::size_t> posets;
  for (std::size_t n = 1; n <= 4; ++n) posets.push_back(count_posets(n));
  EXPECT_EQ(posets, (std::vector<std::size_t>{1, 2, 5, 16}));

  CorpusSpec c = builtin_corpus("builtin:small");
  auto shapes = corpus_shapes(c);
  EXPECT_EQ(shapes.size(), (1 + 2 + 5 + 16) * c.max_domain);
  for (auto& s : shapes) {
    std::size_t want = 0;
    for (std::size_t k = 1; k <= c.max_frame; ++k) want += binom(s.nuclei.size(), k);
    EXPECT_EQ(s.frames.size(), want);
    std::size_t dense_count = 0;
    for (auto& n : s.nuclei) dense_count += is_dense(n);
    std::size_t dense_want = 0;
    for (std::size_t k = 1; k <= c.max_frame; ++k) dense_want += binom(dense_count, k);
    EXPECT_EQ(s.dense_frames.size(), dense_want);
    for (auto& fr : s.dense_frames)
      for (auto i : fr.members) EXPECT_TRUE(is_dense(s.nuclei[i]));
  }
}

TEST(Corpus, SampledModelsDependOnlyOnTheSeed) {
  CorpusSpec c = tiny();
  auto shapes = corpus_shapes(c);
  const Shape& s = shapes.back();
  auto a = model_json(sample_model(s, shapes.size() - 1, 3, c, false), s.poset);
  auto b = model_json(sample_model(s, shapes.size() - 1, 3, c, false), s.poset);
  EXPECT_EQ(a.dump(), b.dump());
  CorpusSpec other = c;
  other.seed += 1;
  bool differs = false;
  for (std::size_t v = 0; v < 5; ++v)
    differs = differs || model_json(sample_model(s, shapes.size() - 1, v, c, false), s.poset).dump() !=
                             model_json(sample_model(s, shapes.size() - 1, v, other, false), s.poset).dump();
  EXPECT_TRUE(differs);
  HModel two = sample_model(s, 0, 0, c, true);
  for (auto& [name, t] : two.atoms)
    for (Elem v : t.values) EXPECT_TRUE(v == s.alg->top() || v == s.alg->bottom()) << name;
}

TEST(Corpus, FormulasAreBoundedAndDistinct) {
  CorpusSpec c = tiny();
  c.extra_formulas = {"R(x) -> R(x)", "R(x)"};
  auto fs = corpus_formulas(c);
  std::set<std::string> seen;
  for (auto& f : fs) {
    EXPECT_LE(formula_depth(f), c.depth);
    EXPECT_TRUE(seen.insert(print(f)).second) << print(f);
  }
  EXPECT_TRUE(seen.count("R(x) -> R(x)"));
  EXPECT_EQ(print(corpus_formulas(c)[7]), print(fs[7]));
}

TEST(Suites, EverySuitePassesOnTheTinyCorpus) {
  for (auto& s : suite_registry()) {
    SuiteReport r = run_suite(s.id, tiny());
    EXPECT_TRUE(r.pass()) << s.id << "\n" << r.to_json().dump(2);
    EXPECT_GT(r.acc.checks, 0u) << s.id;
    EXPECT_EQ(r.acc.models, r.shapes * tiny().valuations) << s.id;
    EXPECT_EQ(r.to_json()["verdict"], "pass");
  }
}

TEST(Suites, ThreadCountDoesNotChangeTheReport) {
  for (const char* id : {"jclosed", "emn", "trp-ladder"}) {
    std::string one = run_suite(id, tiny(), 1).to_json().dump();
    std::string three = run_suite(id, tiny(), 3).to_json().dump();
    EXPECT_EQ(one, three) << id;
  }
}

TEST(Suites, ReportRecordsSeedAndCorpus) {
  CorpusSpec c = tiny();
  c.seed = 77;
  auto j = run_suite("loplem", c).to_json();
  EXPECT_EQ(j["seed"], 77u);
  EXPECT_EQ(j["corpus"]["max_points"], 3u);
  EXPECT_EQ(j["suite"], "loplem");
}

TEST(Suites, FailedChecksKeepAtMostABoundedWitnessList) {
  CorpusSpec c = tiny();
  auto shapes = corpus_shapes(c);
  Accumulator acc;
  ModelCtx ctx(shapes[0], 0, sample_model(shapes[0], 0, 0, c, false), {"x"}, acc);
  for (int i = 0; i < 30; ++i) ctx.check(i % 2 == 0, "probe", [&] { return nlohmann::json{{"i", i}}; });
  EXPECT_EQ(acc.checks, 30u);
  EXPECT_EQ(acc.failures, 15u);
  EXPECT_EQ(acc.witnesses.size(), 15u);
  for (int i = 0; i < 30; ++i) ctx.check(false, "probe", [] { return nlohmann::json::object(); });
  EXPECT_EQ(acc.witnesses.size(), Accumulator::kMaxWitnesses);
  EXPECT_EQ(acc.witnesses[0]["check"], "probe");
  EXPECT_TRUE(acc.witnesses[0].contains("model"));
}

// The witness is re-evaluated through the staged translations and the
// recursive modal evaluator, independently of the tabulated path.
TEST(Search, EquivWitnessReplaysThroughTheStagedEvaluator) {
  SearchResult r = search_countermodel(SearchTarget::EquivFails, FormulaFilter::Implicational, tiny());
  ASSERT_TRUE(r.found);
  FPtr f = parse(r.witness["formula"].get<std::string>());
  EXPECT_FALSE(implication_free(f));
  Rebuilt m = rebuild(r.witness);
  std::vector<Nucleus> members;
  for (auto i : r.witness["frame"].get<std::vector<std::size_t>>()) members.push_back(m.model.nuclei[i]);
  LopFrame fr = make_frame(m.model.alg, members);
  FPtr forced = forcing_translate(f, "j", "P");
  FPtr gg = gg_translate(f, "j");
  const HeytingAlg& h = *m.model.alg;
  Elem value = h.top();
  for (auto& j : fr.members) {
    ModalBinding bind{{{"j", j}}, {{"P", fr}}};
    value = h.meet(value, meet_over_envs(m.model, f, [&](const Env& env) {
      return h.iff(eval_m(forced, m.model, env, bind), eval_m(gg, m.model, env, bind));
    }));
  }
  EXPECT_NE(value, h.top());
  EXPECT_EQ(h.name(value), r.witness["value"].get<std::string>());
}

TEST(Search, NoEquivFailureAmongImplicationFreeFormulas) {
  SearchResult r = search_countermodel(SearchTarget::EquivFails, FormulaFilter::ImplicationFree, tiny());
  EXPECT_FALSE(r.found);
  EXPECT_GT(r.candidates, 0u);
  EXPECT_EQ(r.to_json("equiv", "implication-free", tiny())["result"], "exhausted");
  EXPECT_FALSE(search_countermodel(SearchTarget::EquivFails, FormulaFilter::Atomic, tiny()).found);
}

TEST(Search, TrpWitnessReplays) {
  SearchResult r = search_countermodel(SearchTarget::TrpFails, FormulaFilter::Any, tiny());
  ASSERT_TRUE(r.found);
  FPtr f = parse(r.witness["formula"].get<std::string>());
  Rebuilt m = rebuild(r.witness);
  const Nucleus& j = m.model.nuclei[r.witness["j"].get<std::size_t>()];
  const Nucleus& k = m.model.nuclei[r.witness["k"].get<std::size_t>()];
  EXPECT_FALSE(nucleus_le(j, k));
  const HeytingAlg& h = *m.model.alg;
  FPtr gg = gg_translate(f, "j");
  Elem value = meet_over_envs(m.model, f, [&](const Env& env) {
    Elem at_j = eval_m(gg, m.model, env, {{{"j", j}}, {}});
    Elem at_k = eval_m(gg, m.model, env, {{{"j", k}}, {}});
    return h.iff(k(at_j), at_k);
  });
  EXPECT_NE(value, h.top());
  EXPECT_EQ(h.name(value), r.witness["value"].get<std::string>());
}

TEST(Search, ParsersRejectUnknownNames) {
  EXPECT_EQ(parse_target("mono"), SearchTarget::MonoFails);
  EXPECT_EQ(parse_filter("atomic"), FormulaFilter::Atomic);
  EXPECT_THROW(parse_target("x"), SuiteError);
  EXPECT_THROW(parse_filter("x"), SuiteError);
}

TEST(Search, Deterministic) {
  auto a = search_countermodel(SearchTarget::MonoFails, FormulaFilter::Any, tiny()).to_json("mono", "any", tiny());
  auto b = search_countermodel(SearchTarget::MonoFails, FormulaFilter::Any, tiny()).to_json("mono", "any", tiny());
  EXPECT_EQ(a.dump(), b.dump());
}
