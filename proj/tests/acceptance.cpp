// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
// Every criterion produces a JSON report; the last criterion recomputes all of
// them and compares the dumps byte for byte.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

#include "lopkit/realize.hpp"
#include "lopkit/suites.hpp"

using namespace lopkit;
using nlohmann::json;

namespace {

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::function<json()> run;
  std::function<std::string(const json&)> verdict;  // empty string means pass
};

// ------------------------------------------------------------ 1: nuclei

bool is_nucleus_table(const HeytingAlg& h, const std::vector<Elem>& t) {
  const std::size_t n = h.size();
  for (Elem a = 0; a < n; ++a) {
    if (!h.le(a, t[a]) || t[t[a]] != t[a]) return false;
    for (Elem b = 0; b < n; ++b)
      if (t[h.meet(a, b)] != h.meet(t[a], t[b])) return false;
  }
  return true;
}

// Every endomap, filtered.
std::set<std::vector<Elem>> nuclei_by_endomaps(const HeytingAlg& h) {
  const std::size_t n = h.size();
  std::set<std::vector<Elem>> out;
  std::vector<Elem> t(n, 0);
  while (true) {
    if (is_nucleus_table(h, t)) out.insert(t);
    std::size_t i = 0;
    while (i < n && ++t[i] == n) t[i++] = 0;
    if (i == n) break;
  }
  return out;
}

// The same filter, abandoning a partial map as soon as an assigned tuple
// violates inflation, idempotence or meet preservation.
std::set<std::vector<Elem>> nuclei_by_backtracking(const HeytingAlg& h) {
  const std::size_t n = h.size();
  constexpr Elem unset = static_cast<Elem>(-1);
  std::set<std::vector<Elem>> out;
  std::vector<Elem> t(n, unset);
  auto consistent = [&](Elem a) {
    if (!h.le(a, t[a])) return false;
    for (Elem x = 0; x < n; ++x) {
      if (t[x] == unset) continue;
      if (t[t[x]] != unset && t[t[x]] != t[x]) return false;
      Elem m = h.meet(a, x);
      if (t[m] != unset && t[m] != h.meet(t[a], t[x])) return false;
    }
    return true;
  };
  std::function<void(Elem)> rec = [&](Elem a) {
    if (a == n) {
      if (is_nucleus_table(h, t)) out.insert(t);
      return;
    }
    for (Elem v = 0; v < n; ++v) {
      t[a] = v;
      if (consistent(a)) rec(a + 1);
    }
    t[a] = unset;
  };
  rec(0);
  return out;
}

// All labelled partial orders on n points.
std::vector<FinPoset> labelled_posets(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> offdiag;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) offdiag.emplace_back(i, j);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("p" + std::to_string(i));
  std::vector<FinPoset> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << offdiag.size()); ++bits) {
    std::vector<std::vector<char>> le(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) le[i][i] = 1;
    for (std::size_t b = 0; b < offdiag.size(); ++b)
      if (bits >> b & 1) le[offdiag[b].first][offdiag[b].second] = 1;
    FinPoset p{names, le};
    if (!poset_violation(p)) out.push_back(p);
  }
  return out;
}

json nuclei_report() {
  json rows = json::array();
  std::size_t mismatches = 0, algebras = 0;
  auto compare = [&](const std::string& label, const FinPoset& p) {
    auto alg = std::make_shared<HeytingAlg>(upset_algebra(p));
    auto listed = enumerate_nuclei(alg);
    std::set<std::vector<Elem>> got;
    for (auto& j : listed) got.insert(j.table);
    bool dup = got.size() != listed.size();
    auto want = alg->size() <= 7 ? nuclei_by_endomaps(*alg) : nuclei_by_backtracking(*alg);
    ++algebras;
    if (dup || got != want) {
      ++mismatches;
      rows.push_back({{"poset", label}, {"size", alg->size()}, {"enumerated", listed.size()}, {"oracle", want.size()}});
    }
    return std::make_pair(alg->size(), got.size());
  };
  json chains = json::array();
  for (std::size_t n = 1; n <= 6; ++n) {
    auto [size, count] = compare("chain" + std::to_string(n), chain_poset(n));
    chains.push_back({{"points", n}, {"algebra_size", size}, {"nuclei", count}});
  }
  std::size_t labelled = 0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (auto& p : labelled_posets(n)) {
      ++labelled;
      compare("labelled poset on " + std::to_string(n) + " points #" + std::to_string(labelled), p);
    }
  // one-point poset: the 2-element algebra; two-point chain: the 3-chain
  auto two = std::make_shared<HeytingAlg>(upset_algebra(chain_poset(1)));
  auto three = std::make_shared<HeytingAlg>(upset_algebra(chain_poset(2)));
  return {{"algebras", algebras},
          {"labelled_posets", labelled},
          {"chains", chains},
          {"mismatches", rows},
          {"mismatch_count", mismatches},
          {"two_element", enumerate_nuclei(two).size()},
          {"three_chain", enumerate_nuclei(three).size()}};
}

std::string nuclei_verdict(const json& r) {
  if (r["mismatch_count"] != 0) return std::to_string(r["mismatch_count"].get<int>()) + " algebras disagree";
  if (r["two_element"] != 2) return "2-element algebra has " + r["two_element"].dump() + " nuclei";
  if (r["three_chain"] != 4) return "3-chain has " + r["three_chain"].dump() + " nuclei";
  return "";
}

// ------------------------------------------------------------ 2, 3: suites

json suites_report(const std::vector<std::string>& ids) {
  CorpusSpec c = builtin_corpus("builtin:small");
  json out = json::array();
  for (auto& id : ids) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r = run_suite(id, c, 1);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "    %-18s checks %-10zu failures %-4zu %.1f s\n", id.c_str(), r.acc.checks, r.acc.failures, s);
    out.push_back(r.to_json());
  }
  return out;
}

std::string suites_verdict(const json& r) {
  std::string bad;
  for (auto& s : r) {
    if (s["verdict"] != "pass") bad += (bad.empty() ? "" : ", ") + s["suite"].get<std::string>();
    if (s["checks"] == 0) bad += (bad.empty() ? "" : ", ") + s["suite"].get<std::string>() + " (no checks)";
  }
  return bad.empty() ? "" : "failing: " + bad;
}

const std::vector<std::string> kLemmaSuites = {"loplem",       "jclosed",        "monotonicity",    "jinP-monotonicity",
                                               "constant-domain", "maximal-collapse", "kuroda-gg",     "forcingL-equiv",
                                               "literal-class", "iqc-soundness"};
const std::vector<std::string> kTransparencySuites = {"impfree-equiv", "emn",        "mndneg",     "trp-closure",
                                                    "dense-dne",     "trp-imp-mn", "trp-ladder", "sufcon"};

// ------------------------------------------------------------ 4: countermodels

json search_report() {
  CorpusSpec c = builtin_corpus("builtin:small");
  SearchResult imp = search_countermodel(SearchTarget::EquivFails, FormulaFilter::Implicational, c);
  SearchResult free = search_countermodel(SearchTarget::EquivFails, FormulaFilter::ImplicationFree, c);
  json out = {{"implicational", imp.to_json("equiv", "implicational", c)},
              {"implication_free", free.to_json("equiv", "implication-free", c)}};
  // the reported formula really contains an implication
  out["witness_is_implicational"] = imp.found && !implication_free(parse(imp.witness["formula"].get<std::string>()));
  return out;
}

std::string search_verdict(const json& r) {
  if (r["implicational"]["result"] != "witness") return "no Equiv failure among implicational formulas";
  if (!r["witness_is_implicational"].get<bool>()) return "witness formula is implication-free";
  if (r["implication_free"]["result"] != "exhausted") return "Equiv failure found for an implication-free formula";
  if (r["implication_free"]["candidates"] == 0) return "no implication-free candidates were examined";
  return "";
}

// ------------------------------------------------------------ 5: oracle agreement

json agreement_report() {
  Budgets b;
  json out;
  CaseSampler s(7001);
  std::size_t agree = 0, counts[3] = {0, 0, 0};
  json disagreements = json::array();
  for (int i = 0; i < 500; ++i) {
    RealizeCase c = s.next(2);
    Outcome k = realizes(c.code, c.sentence, c.oracle, b);
    Outcome d = djg_realizes(c.code, c.sentence, c.oracle, singleton_poset(c.oracle), b);
    ++counts[static_cast<int>(k.verdict)];
    if (k.same_verdict(d)) ++agree;
    else if (disagreements.size() < 10)
      disagreements.push_back({{"sentence", print(c.sentence)}, {"kleene", k.to_json()}, {"djg", d.to_json()}});
  }
  out["singleton"] = {{"cases", 500}, {"agree", agree}, {"realized", counts[0]}, {"refuted", counts[1]},
                      {"exhausted", counts[2]}, {"disagreements", disagreements}};

  CaseSampler s2(7002);
  std::size_t compared = 0, agree2 = 0, skipped = 0, c2[3] = {0, 0, 0};
  json dis2 = json::array();
  for (int i = 0; compared < 200 && i < 5000; ++i) {
    RealizeCase c = s2.next(2);
    std::vector<Oracle> nodes{Oracle{"r", {}}, c.oracle};
    nodes[1].label = "f";
    if (nodes[1].table.empty()) nodes[1].table[40] = 1;
    OraclePoset t = make_oracle_poset(nodes, {{0, 1}});
    if (!check_assumption_A(t).pass) {
      ++skipped;
      continue;
    }
    const Oracle& at = nodes[i % 2];
    Outcome d = djg_realizes(c.code, c.sentence, at, t, b);
    PrealReport p = preal_standard(c.code, c.sentence, at, t, b);
    ++compared;
    ++c2[static_cast<int>(d.verdict)];
    if (d.same_verdict(p.outcome)) ++agree2;
    else if (dis2.size() < 10)
      dis2.push_back({{"sentence", print(c.sentence)}, {"djg", d.to_json()}, {"preal", p.outcome.to_json()}});
  }
  out["preal"] = {{"cases", compared},       {"agree", agree2},    {"skipped_assumption_A", skipped},
                  {"realized", c2[0]},       {"refuted", c2[1]},   {"exhausted", c2[2]},
                  {"disagreements", dis2}};
  out["budgets"] = b.to_json();
  return out;
}

std::string agreement_verdict(const json& r) {
  if (r["singleton"]["agree"] != 500) return "singleton frames: " + r["singleton"]["agree"].dump() + "/500 agree";
  if (r["preal"]["cases"] != 200) return "only " + r["preal"]["cases"].dump() + " preal triples available";
  if (r["preal"]["agree"] != 200) return "preal: " + r["preal"]["agree"].dump() + "/200 agree";
  if (r["singleton"]["realized"] == 0 || r["singleton"]["refuted"] == 0) return "corpus lacks one of the verdicts";
  return "";
}

// ------------------------------------------------------------ 6: induction and Markov

struct Family {
  std::string text;    // N stands for the numeral parameter
  bool identity;       // quantifier-free and true for every x and N
};

const std::vector<Family> kFamilies = {
    {"x+N=N+x", true},
    {"x+N=x+N", true},
    {"S(x)+N=S(x+N)", true},
    {"x*N=N*x", true},
    {"x*S(N)=x*N+x", true},
    {"(x+N)+x=x+(N+x)", true},
    {"(x+N)-.N=x", true},
    {"x*0+N=N", true},
    {"exists y. y=x+N", false},
    {"exists y. x+N=S(y)", false},
    {"x=x+N", false},
    {"x+N=x+N /\\ x=x", false},
    {"x+N=N+x \\/ 0=S(0)", false},
    {"0=S(0) -> x=N", false},
    {"~(S(x+N)=0)", false},
    {"exists y. (y=x /\\ y+N=x+N)", false},
    {"exists y. (x+N=y /\\ y=N+x)", false},
    {"(x*N)*0=0", true},
    {"(x+N)*S(0)=x+N", true},
    {"N+S(x)=S(N+x)", true},
};

std::string instantiate(std::string s, std::uint64_t n) {
  for (std::size_t p; (p = s.find('N')) != std::string::npos;) s.replace(p, 1, std::to_string(n));
  return s;
}

json induction_report() {
  json fams = json::array();
  std::size_t ok = 0, total = 0;
  // recursor on trivial base and step realizers, usable for true identities
  Nat fn = apply(induction_realizer_code(), pair(Nat(0), const_code(const_code(Nat(0)))), empty_oracle(), 10000).value;
  for (auto& fam : kFamilies) {
    json row = {{"family", fam.text}};
    std::size_t realized = 0, certified = 0, instances_ok = 0, instances = 0;
    for (std::uint64_t n = 0; n <= 10; ++n) {
      FPtr psi = parse(instantiate(fam.text, n));
      Outcome o = realizes(induction_realizer(psi, "x"), induction_formula(psi, "x"), empty_oracle());
      ++total;
      if (o.verdict == Verdict::Realized) ++realized, ++ok;
      if (o.verdict == Verdict::Realized && o.certified) ++certified;
      if (o.verdict != Verdict::Realized && !row.contains("first_failure"))
        row["first_failure"] = {{"n", n}, {"outcome", o.to_json()}};
      if (!fam.identity) continue;
      for (std::uint64_t m = 0; m <= 10; ++m) {
        ++instances;
        RunResult r = apply(fn, Nat(m), empty_oracle(), 100000);
        if (r.status == RunStatus::Halted &&
            realizes(r.value, subst(psi, "x", numeral(m)), empty_oracle()).verdict == Verdict::Realized)
          ++instances_ok;
      }
    }
    row["realized"] = realized;
    row["certified"] = certified;
    if (fam.identity) row["recursor_instances"] = {{"checked", instances}, {"realized", instances_ok}};
    fams.push_back(row);
  }

  // Sigma1-DNE instances on codes of seeded random terms that halt within the witness budget
  Budgets b;
  json mp = json::array();
  std::size_t mp_ok = 0;
  Nat mpc = mp_realizer();
  std::mt19937_64 rng(606);
  std::function<TermId(int)> random_term = [&](int depth) -> TermId {
    if (depth == 0 || rng() % 3 == 0) {
      std::uint64_t r = rng() % 11;
      return r < 9 ? prim(static_cast<Prim>(r)) : num_term(Nat(rng() % 5));
    }
    return app_term(random_term(depth - 1), random_term(depth - 1));
  };
  std::set<std::pair<std::uint64_t, std::uint64_t>> used;
  for (int tries = 0; tries < 20000 && mp.size() < 50; ++tries) {
    Nat code = encode(random_term(3));
    std::uint64_t x = rng() % 4;
    if (!code.small() || used.count({code.bits, x})) continue;
    RunResult run = apply(code, Nat(x), empty_oracle(), b.witness);
    if (run.status != RunStatus::Halted) continue;
    used.insert({code.bits, x});
    Outcome o = realizes_at(mpc, sigma1_dne(code.bits, x), {code, Nat(x)}, empty_oracle(), b);
    if (o.verdict == Verdict::Realized) ++mp_ok;
    mp.push_back({{"e", code.bits}, {"x", x}, {"steps", run.steps}, {"verdict", verdict_name(o.verdict)}});
  }
  return {{"families", fams},
          {"induction_total", total},
          {"induction_realized", ok},
          {"mp", mp},
          {"mp_total", mp.size()},
          {"mp_realized", mp_ok}};
}

std::string induction_verdict(const json& r) {
  if (r["families"].size() != 20) return "expected 20 families";
  if (r["induction_realized"] != r["induction_total"])
    return r["induction_realized"].dump() + "/" + r["induction_total"].dump() + " induction instances Realized";
  for (auto& f : r["families"])
    if (f.contains("recursor_instances") && f["recursor_instances"]["checked"] != f["recursor_instances"]["realized"])
      return "recursor instances fail for " + f["family"].get<std::string>();
  if (r["mp_total"] != 50) return "only " + r["mp_total"].dump() + " halting Sigma1 instances found";
  if (r["mp_realized"] != 50) return r["mp_realized"].dump() + "/50 Markov instances Realized";
  return "";
}

// ------------------------------------------------------------ 7: demo

json demo_report() {
  DemoReport d = separation_demo(DemoConfig{});
  d.report["exit_code"] = d.exit_code;
  return d.report;
}

std::string demo_verdict(const json& r) {
  for (const char* s : {"i", "ii", "iii", "iv"})
    if (!r.contains(s) || r[s]["status"] != "green") return std::string("section (") + s + ") not green";
  if (r["exit_code"] != 0) return "exit code " + r["exit_code"].dump();
  bool relative = false, absolute = false;
  for (auto& c : r["caveats"]) {
    std::string t = c.get<std::string>();
    relative = relative || (t.find("Realized") != std::string::npos && t.find("relative to the budgets") != std::string::npos);
    absolute = absolute || (t.find("Refuted") != std::string::npos && t.find("absolute") != std::string::npos);
  }
  if (!relative) return "report does not label Realized verdicts as budget-relative";
  if (!absolute) return "report does not label Refuted verdicts as absolute";
  json b = r["budgets"];
  if (b["fuel"] != 100000 || b["universe"] != 64 || b["candidates"] != 256) return "not the default budgets";
  if (r["frame"]["f1_codes"] != 64) return "halting table does not cover codes below 64";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;  // optional criterion numbers; 8 recomputes whichever ran
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  std::vector<Criterion> cs = {
      {1, "nucleus enumeration equals brute force (posets <= 4 points, chains <= 6)", 60, nuclei_report,
       nuclei_verdict},
      {2, "internal-lemma suites pass on builtin:small", 600, [] { return suites_report(kLemmaSuites); },
       suites_verdict},
      {3, "implication-free, transparency and consistency suites pass on builtin:small", 600,
       [] { return suites_report(kTransparencySuites); }, suites_verdict},
      {4, "countermodel search: implicational witness exists, none implication-free", 300, search_report,
       search_verdict},
      {5, "djg on singleton frames agrees with Kleene (500); preal agrees with djg (200)", 300, agreement_report,
       agreement_verdict},
      {6, "induction on 20 families (n <= 10); Markov realizer on 50 Sigma1-DNE instances", 120, induction_report,
       induction_verdict},
      {7, "separation demo green under default budgets, verdicts labelled", 300, demo_report, demo_verdict},
  };

  std::vector<std::string> dumps;
  int failed = 0;
  auto line = [&](int id, const std::string& title, const std::string& why, double secs, double limit) {
    bool pass = why.empty() && secs <= limit;
    std::string reason = why.empty() ? (secs > limit ? "over time limit" : "") : why;
    std::printf("[%s] criterion %d: %s (%.1f s, limit %.0f s)%s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), secs,
                limit, reason.empty() ? "" : ": ", reason.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  };

  if (!only.empty())
    cs.erase(std::remove_if(cs.begin(), cs.end(), [&](const Criterion& c) { return !only.count(c.id); }), cs.end());
  for (auto& c : cs) {
    auto t0 = std::chrono::steady_clock::now();
    std::string why;
    json r;
    try {
      r = c.run();
      why = c.verdict(r);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    dumps.push_back(r.dump());
    if (!why.empty()) std::cerr << r.dump(1).substr(0, 4000) << "\n";
    line(c.id, c.title, why, secs, c.limit_s);
  }

  // 8: recompute every report and compare
  if (only.empty() || only.count(8)) {
    auto t0 = std::chrono::steady_clock::now();
    std::string why;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      std::string again;
      try {
        again = cs[i].run().dump();
      } catch (const std::exception& e) {
        again = std::string("exception: ") + e.what();
      }
      if (again != dumps[i]) why += (why.empty() ? "differs: criterion " : ", ") + std::to_string(cs[i].id);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    line(8, "determinism: recomputed reports are byte-identical", why, secs, 3000);
  }
  return failed ? 1 : 0;
}
