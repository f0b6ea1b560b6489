// lopkit command-line front end. JSON goes to stdout (or --out), a short
// summary to stderr. Exit codes: 0 pass/Realized/green, 1 fail/Refuted/red,
// 2 usage or input errors, 3 Exhausted.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lopkit/realize.hpp"
#include "lopkit/suites.hpp"
#include "lopkit/translate.hpp"

using namespace lopkit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void emit(const Globals& g, const json& j) {
  std::string text = j.dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError("cannot write " + g.out);
  f << text;
}

void emit_text(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError("cannot write " + g.out);
  f << text << "\n";
}

// ------------------------------------------------------------ algebra / nuclei

struct AlgebraSource {
  std::string poset_file, model_file;
  std::size_t chain = 0, antichain = 0;
};

void add_algebra_source(CLI::App* cmd, AlgebraSource& src) {
  auto* p = cmd->add_option("--poset", src.poset_file, "poset file {elements, covers}");
  auto* m = cmd->add_option("--model", src.model_file, "model file; its poset is used");
  auto* c = cmd->add_option("--chain", src.chain, "chain with n points");
  auto* a = cmd->add_option("--antichain", src.antichain, "antichain with n points");
  p->excludes(m, c, a);
  m->excludes(c, a);
  c->excludes(a);
}

FinPoset load_poset(const AlgebraSource& src) {
  if (!src.poset_file.empty()) return poset_from_json(read_json(src.poset_file));
  if (!src.model_file.empty()) {
    json j = read_json(src.model_file);
    if (!j.contains("poset")) throw InputError("model file has no 'poset'");
    return poset_from_json(j.at("poset"));
  }
  if (src.chain) return chain_poset(src.chain);
  if (src.antichain) return antichain_poset(src.antichain);
  throw InputError("give one of --poset, --model, --chain, --antichain");
}

int cmd_algebra(const Globals& g, const AlgebraSource& src) {
  FinPoset p = load_poset(src);
  HeytingAlg h = upset_algebra(p);
  emit(g, {{"poset", poset_to_json(p)}, {"algebra", algebra_to_json(h)}});
  std::cerr << "algebra: " << p.size() << " points, " << h.size() << " elements\n";
  return 0;
}

int cmd_nuclei(const Globals& g, const AlgebraSource& src) {
  FinPoset p = load_poset(src);
  auto alg = std::make_shared<HeytingAlg>(upset_algebra(p));
  auto all = enumerate_nuclei(alg);
  std::vector<Nucleus> named = {identity_nucleus(alg), double_negation(alg), top_nucleus(alg)};
  for (Elem u = 0; u < alg->size(); ++u) {
    named.push_back(closed_nucleus(alg, u));
    named.push_back(open_nucleus(alg, u));
  }
  json list = json::array();
  for (std::size_t i = 0; i < all.size(); ++i) {
    json names = json::array();
    for (auto& n : named)
      if (n == all[i] && std::find(names.begin(), names.end(), n.label) == names.end()) names.push_back(n.label);
    json table = json::object();
    for (Elem a = 0; a < alg->size(); ++a) table[alg->name(a)] = alg->name(all[i](a));
    list.push_back({{"index", i}, {"names", names}, {"dense", is_dense(all[i])}, {"table", table}});
  }
  json rep = {{"carrier", alg->names}, {"count", all.size()}, {"nuclei", list}};
  if (!src.model_file.empty()) {
    ModelFile mf = model_from_json(read_json(src.model_file));
    if (mf.frame) {
      json fr = json::array();
      for (auto& m : mf.frame->members)
        for (std::size_t i = 0; i < all.size(); ++i)
          if (all[i] == m) fr.push_back(i);
      rep["frame"] = fr;
    }
  }
  emit(g, rep);
  std::cerr << "nuclei: " << all.size() << " on " << alg->size() << " elements\n";
  return 0;
}

// ------------------------------------------------------------ translate

int cmd_translate(const Globals& g, const std::string& style, const std::string& text, bool as_json) {
  Style s = parse_style(style);
  FPtr f = parse(text);
  std::string out = print_mformula(translate(f, s));
  if (as_json)
    emit(g, {{"style", style}, {"input", print(f)}, {"translation", out}});
  else
    emit_text(g, out);
  return 0;
}

// ------------------------------------------------------------ check / search

CorpusSpec load_corpus(const Globals& g, const std::string& corpus) {
  CorpusSpec c = corpus.rfind("builtin:", 0) == 0 ? builtin_corpus(corpus) : corpus_from_json(read_json(corpus));
  if (g.seed) c.seed = *g.seed;
  return c;
}

int cmd_check(const Globals& g, const std::string& suite, const std::string& corpus) {
  find_suite(suite);
  CorpusSpec c = load_corpus(g, corpus);
  SuiteReport r = run_suite(suite, c, g.jobs);
  emit(g, r.to_json());
  std::cerr << suite << " on " << c.name << ": " << r.acc.checks << " checks, " << r.acc.failures << " failures, "
            << (r.pass() ? "pass" : "FAIL") << "\n";
  return r.pass() ? 0 : 1;
}

int cmd_search(const Globals& g, const std::string& target, const std::string& filter, const std::string& corpus) {
  SearchTarget t = parse_target(target);
  FormulaFilter f = parse_filter(filter);
  CorpusSpec c = load_corpus(g, corpus);
  SearchResult r = search_countermodel(t, f, c);
  emit(g, r.to_json(target, filter, c));
  std::cerr << "search " << target << "/" << filter << ": " << (r.found ? "witness found" : "exhausted") << " after "
            << r.candidates << " candidates on " << r.models << " models\n";
  return r.found ? 0 : 1;
}

// ------------------------------------------------------------ realize / demo

Nat parse_code(const std::string& s) {
  if (s == "mp") return mp_realizer();
  if (s == "ind") return induction_realizer_code();
  if (s == "id") return identity_code();
  if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '<')) {
    try {
      return parse_nat(s);
    } catch (const NatParseError&) {
    }
  }
  try {
    return encode(parse_term(s));
  } catch (const MachineError& e) {
    throw InputError("code '" + s + "': " + e.what());
  }
}

Oracle load_oracle(const std::string& path) {
  try {
    return oracle_from_json(read_json(path), fs::path(path).stem().string());
  } catch (const RealizeError& e) {
    throw InputError(path + ": " + e.what());
  }
}

// {"oracles": ["a.json", ...], "edges": [[0, 1], ...]}; paths relative to the frame file.
OraclePoset load_frame(const std::string& path) {
  json j = read_json(path);
  if (!j.is_object() || !j.contains("oracles") || !j.at("oracles").is_array())
    throw InputError(path + ": frame file needs an 'oracles' array");
  fs::path base = fs::path(path).parent_path();
  std::vector<Oracle> nodes;
  for (auto& o : j.at("oracles")) {
    if (o.is_string()) {
      fs::path p = o.get<std::string>();
      nodes.push_back(load_oracle((p.is_absolute() ? p : base / p).string()));
    } else {
      try {
        nodes.push_back(oracle_from_json(o, "o" + std::to_string(nodes.size())));
      } catch (const RealizeError& e) {
        throw InputError(path + ": " + e.what());
      }
    }
  }
  std::vector<std::pair<int, int>> edges;
  if (j.contains("edges"))
    for (auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw InputError(path + ": edges must be pairs of oracle indices");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  try {
    return make_oracle_poset(std::move(nodes), edges);
  } catch (const RealizeError& e) {
    throw InputError(path + ": " + e.what());
  }
}

int exit_for(Verdict v) { return v == Verdict::Realized ? 0 : v == Verdict::Refuted ? 1 : 3; }

struct RealizeArgs {
  std::string code, formula, oracle, frame, mode;
  std::vector<std::string> apply;
  Budgets budgets;
  std::uint64_t assumption_bound = 64;
};

int cmd_realize(const Globals& g, const RealizeArgs& a) {
  Nat code = parse_code(a.code);
  FPtr phi = parse(a.formula);
  if (!is_closed(phi)) throw InputError("formula must be closed");
  Oracle f = load_oracle(a.oracle);
  std::vector<Nat> params;
  for (auto& s : a.apply) params.push_back(parse_code(s));
  Nat e = params.empty() ? code : apply_code(code, params);
  a.budgets.validate();
  std::string mode = a.mode.empty() ? (a.frame.empty() ? "kleene" : "djg") : a.mode;
  json rep = {{"code", nat_repr(code)}, {"formula", print(phi)}, {"oracle", oracle_to_json(f)},
              {"mode", mode},           {"budgets", a.budgets.to_json()}};
  if (g.seed) rep["seed"] = *g.seed;
  if (!params.empty()) {
    rep["applied_to"] = json::array();
    for (auto& p : params) rep["applied_to"].push_back(nat_repr(p));
  }
  Outcome o;
  if (mode == "kleene") {
    if (!a.frame.empty()) throw InputError("--frame has no meaning in kleene mode");
    o = realizes(e, phi, f, a.budgets);
  } else {
    OraclePoset t = a.frame.empty() ? singleton_poset(f) : load_frame(a.frame);
    if (t.index_of(f) < 0) throw InputError("oracle " + a.oracle + " is not a node of the frame");
    json nodes = json::array();
    for (auto& n : t.nodes) nodes.push_back(n.label);
    rep["frame"] = nodes;
    if (mode == "djg") {
      o = djg_realizes(e, phi, f, t, a.budgets);
    } else if (mode == "preal") {
      PrealReport p = preal_standard(e, phi, f, t, a.budgets, a.assumption_bound);
      rep["translation"] = p.translation;
      rep["assumption_A"] = p.assumption.to_json();
      o = p.outcome;
    } else {
      throw InputError("unknown mode '" + mode + "' (kleene, djg, preal)");
    }
  }
  rep["outcome"] = o.to_json();
  rep["note"] = o.verdict == Verdict::Realized && !o.certified ? "Realized relative to the listed budgets"
                : o.verdict == Verdict::Refuted                ? "Refuted outright; the counter-witness replays"
                : o.verdict == Verdict::Exhausted              ? "undecided within the budgets"
                                                               : "Realized, certified";
  emit(g, rep);
  std::cerr << "realize (" << mode << "): " << verdict_name(o.verdict)
            << (o.verdict == Verdict::Realized && o.certified ? " (certified)" : "") << "\n";
  return exit_for(o.verdict);
}

std::vector<Nat> load_candidates(const std::string& path) {
  json j = read_json(path);
  if (j.is_object() && j.contains("candidates")) j = j.at("candidates");
  if (!j.is_array()) throw InputError(path + ": candidates file must be a JSON array of codes");
  std::vector<Nat> out;
  for (auto& c : j) {
    if (c.is_number_unsigned()) out.push_back(Nat(c.get<std::uint64_t>()));
    else if (c.is_string()) out.push_back(parse_code(c.get<std::string>()));
    else throw InputError(path + ": a candidate must be a natural or a term");
  }
  return out;
}

struct DemoArgs {
  std::string which = "separation", candidates;
  DemoConfig cfg;
};

int cmd_demo(const Globals& g, DemoArgs a) {
  if (a.which != "separation") throw InputError("unknown demo '" + a.which + "' (separation)");
  if (!a.candidates.empty()) a.cfg.candidates = load_candidates(a.candidates);
  DemoReport r = separation_demo(a.cfg);
  if (g.seed) r.report["seed"] = *g.seed;
  emit(g, r.report);
  std::cerr << "demo separation:";
  for (const char* k : {"i", "ii", "iii", "iv"})
    if (r.report.contains(k)) std::cerr << " (" << k << ") " << r.report[k].value("status", "?");
  std::cerr << " -> " << r.report.value("status", "error") << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lopkit: nuclei, forcing translations and oracle realizability"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed recorded in reports; overrides the corpus seed");
  app.add_option("--jobs", g.jobs, "worker threads for suites")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "write the JSON report here instead of stdout");

  AlgebraSource alg_src, nuc_src;
  auto* algebra = app.add_subcommand("algebra", "print the upset algebra of a poset");
  add_algebra_source(algebra, alg_src);
  auto* nuclei = app.add_subcommand("nuclei", "enumerate the nuclei of an upset algebra");
  add_algebra_source(nuclei, nuc_src);

  std::string style = "gg", text;
  bool as_json = false;
  auto* tr = app.add_subcommand("translate", "print a translation of a formula");
  tr->add_option("--style", style, "gg | forcing | kuroda | kuroda-wrapped");
  tr->add_option("formula", text, "formula text");
  tr->add_flag("--json", as_json, "emit JSON instead of the bare text");

  std::string suite, corpus = "builtin:small";
  auto* check = app.add_subcommand("check", "run a lemma suite over a corpus");
  check->add_option("--suite", suite, "suite id")->required();
  check->add_option("--corpus", corpus, "corpus file or builtin:small | builtin:tiny");

  std::string target = "equiv", filter = "any", search_corpus = "builtin:small";
  auto* search = app.add_subcommand("search", "search the corpus for a countermodel");
  search->add_option("--target", target, "equiv | trp | mono | nono");
  search->add_option("--filter", filter, "any | implicational | implication-free | atomic");
  search->add_option("--corpus", search_corpus, "corpus file or builtin name");

  RealizeArgs ra;
  auto* realize = app.add_subcommand("realize", "check a realizer against a closed arithmetic sentence");
  realize->add_option("--code", ra.code, "numeral, <a,b> pair, term, or mp | ind | id")->required();
  realize->add_option("--formula", ra.formula, "closed sentence")->required();
  realize->add_option("--oracle", ra.oracle, "oracle file")->required();
  realize->add_option("--frame", ra.frame, "frame file: oracle files and extension edges");
  realize->add_option("--mode", ra.mode, "kleene | djg | preal (default kleene, or djg with --frame)");
  realize->add_option("--apply", ra.apply, "apply the code to these numerals first")->delimiter(',');
  realize->add_option("--fuel", ra.budgets.fuel, "transitions per run");
  realize->add_option("--witness", ra.budgets.witness, "existential witness bound");
  realize->add_option("--candidates", ra.budgets.candidates, "candidate realizer bound");
  realize->add_option("--universe", ra.budgets.universe, "universal quantifier sampling bound");
  realize->add_option("--assumption-bound", ra.assumption_bound, "code bound for the reduction scan");

  DemoArgs da;
  auto* demo = app.add_subcommand("demo", "run the separation experiment");
  demo->add_option("which", da.which, "separation");
  demo->add_option("--budget-fuel", da.cfg.budgets.fuel, "transitions per run, also bounds the halting table");
  demo->add_option("--universe", da.cfg.budgets.universe, "universal quantifier sampling bound");
  demo->add_option("--witness", da.cfg.budgets.witness, "existential witness bound");
  demo->add_option("--candidate-bound", da.cfg.budgets.candidates, "candidate realizer bound");
  demo->add_option("--candidates", da.candidates, "JSON array of candidate codes for section (ii)");
  demo->add_option("--table-codes", da.cfg.table_codes, "halting table covers codes below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*algebra) return cmd_algebra(g, alg_src);
    if (*nuclei) return cmd_nuclei(g, nuc_src);
    if (*tr) return cmd_translate(g, style, text, as_json);
    if (*check) return cmd_check(g, suite, corpus);
    if (*search) return cmd_search(g, target, filter, search_corpus);
    if (*realize) return cmd_realize(g, ra);
    if (*demo) return cmd_demo(g, da);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
