#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "lopkit/machine.hpp"
#include "lopkit/programs.hpp"

using namespace lopkit;

namespace {

// Cantor pairing written out directly.
std::uint64_t cantor(std::uint64_t a, std::uint64_t b) { return (a + b) * (a + b + 1) / 2 + b; }

TermId T(const std::string& s) { return parse_term(s); }

RunResult run(const std::string& s, const Oracle& f = empty_oracle(), std::uint64_t fuel = 10000) {
  return run_term(T(s), f, fuel);
}

}  // namespace

TEST(Pairing, MatchesClosedFormAndIsBijectiveBelowTenThousand) {
  std::vector<bool> hit(10000, false);
  for (std::uint64_t a = 0; a < 150; ++a)
    for (std::uint64_t b = 0; a + b < 150; ++b) {
      std::uint64_t c = cantor(a, b);
      ASSERT_EQ(pair(Nat(a), Nat(b)), Nat(c));
      if (c < hit.size()) {
        ASSERT_FALSE(hit[c]);
        hit[c] = true;
      }
    }
  for (std::uint64_t n = 0; n < hit.size(); ++n) {
    ASSERT_TRUE(hit[n]) << n;
    auto [a, b] = unpair(Nat(n));
    ASSERT_EQ(pair(a, b), Nat(n));
  }
}

TEST(Pairing, SmallExamples) {
  EXPECT_EQ(pair(0, 0), Nat(0));
  EXPECT_EQ(pair(1, 0), Nat(1));
  EXPECT_EQ(pair(0, 1), Nat(2));
  EXPECT_EQ(pair(2, 3), Nat(18));
  EXPECT_EQ(fst(Nat(18)), Nat(2));
  EXPECT_EQ(snd(Nat(18)), Nat(3));
}

TEST(Pairing, LargeNumbersRoundTrip) {
  Nat big = pair(Nat(std::uint64_t{1} << 62), Nat(std::uint64_t{1} << 62));
  EXPECT_FALSE(big.small());
  EXPECT_EQ(unpair(big).first, Nat(std::uint64_t{1} << 62));
  Nat nested = pair(big, pair(big, Nat(7)));
  EXPECT_EQ(snd(snd(nested)), Nat(7));
  EXPECT_EQ(pred(succ(nested)), nested);
  EXPECT_EQ(succ(pred(big)), big);
  Nat top = Nat(Nat::kNodeBit - 1);
  EXPECT_FALSE(succ(top).small());
  EXPECT_EQ(pred(succ(top)), top);
  EXPECT_EQ(parse_nat(to_string(nested)), nested);
  EXPECT_EQ(parse_nat("<2,3>"), Nat(18));
  EXPECT_THROW(parse_nat("<1,"), NatParseError);
  EXPECT_TRUE(below(Nat(3), 4));
  EXPECT_FALSE(below(big, ~std::uint64_t{0}));
}

TEST(Coding, KnownCodes) {
  EXPECT_EQ(encode(prim(Prim::S)), Nat(0));
  EXPECT_EQ(encode(prim(Prim::K)), Nat(cantor(1, 0)));
  EXPECT_EQ(encode(prim(Prim::Fix)), Nat(28));
  EXPECT_EQ(encode(prim(Prim::Ora)), Nat(36));
  EXPECT_EQ(encode(num_term(Nat(0))), Nat(45));
  EXPECT_EQ(encode(num_term(Nat(5))), Nat(cantor(9, 5)));
  EXPECT_EQ(encode(app_term(prim(Prim::K), prim(Prim::S))), Nat(cantor(10, cantor(1, 0))));
}

TEST(Coding, DecodeInvertsEncode) {
  for (const char* s : {"S", "K #3", "S K K", "Pair #1 (Fst #9)", "Case #0 (K #1) Succ", "Fix (S K K) Ora"}) {
    TermId t = T(s);
    EXPECT_EQ(decode(encode(t)), t) << s;
    EXPECT_EQ(print_term(t), s);
  }
}

TEST(Coding, MalformedCodesDecodeToZeroNumeral) {
  EXPECT_EQ(decode(pair(Nat(1), Nat(5))), num_term(Nat(0)));   // primitive with payload
  EXPECT_EQ(decode(pair(Nat(11), Nat(0))), num_term(Nat(0)));  // unknown tag
  EXPECT_EQ(decode(pair(Nat(400), Nat(2))), num_term(Nat(0)));
  // an application whose parts are malformed still decodes, part by part
  TermId t = decode(pair(Nat(10), pair(Nat(1), Nat(99))));
  EXPECT_EQ(t, app_term(prim(Prim::K), num_term(Nat(0))));
}

TEST(Machine, KAndSLaws) {
  auto r = run("K #3 #4");
  ASSERT_EQ(r.status, RunStatus::Halted);
  EXPECT_EQ(r.value, Nat(3));
  EXPECT_EQ(r.steps, 3u);  // two unwinds, one K
  r = run("S K K #5");
  ASSERT_EQ(r.status, RunStatus::Halted);
  EXPECT_EQ(r.value, Nat(5));
  r = run("S (K Succ) (K #1) #0");
  ASSERT_EQ(r.status, RunStatus::Halted);
  EXPECT_EQ(r.value, Nat(2));
}

TEST(Machine, NumericPrimitives) {
  EXPECT_EQ(run("Pair #2 #3").value, Nat(18));
  EXPECT_EQ(run("Fst (Pair #2 #3)").value, Nat(2));
  EXPECT_EQ(run("Snd #18").value, Nat(3));
  EXPECT_EQ(run("Succ (Succ #4)").value, Nat(6));
  EXPECT_EQ(run("Case #7 Succ #0").value, Nat(7));
  EXPECT_EQ(run("Case #7 Succ #3").value, Nat(3));
  EXPECT_EQ(run("Fix (K #5)").value, Nat(5));
}

TEST(Machine, NumeralInHeadPositionActsAsItsCode) {
  // @c inserts the decoded term; a numeral applied to arguments is decoded first.
  Nat k = encode(prim(Prim::K));
  auto r = run_term(app_term(num_term(k), {num_term(Nat(8)), num_term(Nat(9))}), empty_oracle(), 100);
  ASSERT_EQ(r.status, RunStatus::Halted);
  EXPECT_EQ(r.value, Nat(8));
  EXPECT_EQ(apply(encode(T("K #4")), Nat(0), empty_oracle(), 100).value, Nat(4));
}

TEST(Machine, StuckAndFuel) {
  auto r = run("K #1");
  EXPECT_EQ(r.status, RunStatus::Stuck);
  EXPECT_NE(r.stuck.find("too few"), std::string::npos);
  r = run("Fix (S K K)", empty_oracle(), 500);
  EXPECT_EQ(r.status, RunStatus::OutOfFuel);
  EXPECT_EQ(r.steps, 500u);
  EXPECT_THROW(run("K #1 #2", empty_oracle(), 0), MachineError);
  EXPECT_EQ(run("K #1 #2", empty_oracle(), 3).status, RunStatus::Halted);
  EXPECT_EQ(run("K #1 #2", empty_oracle(), 2).status, RunStatus::OutOfFuel);
}

TEST(Machine, OracleCalls) {
  Oracle f{"f", {{2, 9}, {3, 0}}};
  auto r = run("Ora #2", f);
  ASSERT_EQ(r.status, RunStatus::Halted);
  EXPECT_EQ(r.value, Nat(9));
  EXPECT_EQ(r.queries, std::vector<std::uint64_t>{2});
  r = run("Succ (Ora (Succ #2))", f);
  EXPECT_EQ(r.value, Nat(1));
  EXPECT_EQ(r.queries, std::vector<std::uint64_t>{3});
  r = run("Ora #4", f);
  EXPECT_EQ(r.status, RunStatus::Stuck);
  EXPECT_EQ(r.queries, std::vector<std::uint64_t>{4});
  EXPECT_EQ(run("Ora #2").status, RunStatus::Stuck);
}

TEST(Machine, ParseErrors) {
  EXPECT_THROW(T("Foo #1"), MachineError);
  EXPECT_THROW(T("(K #1"), MachineError);
  EXPECT_THROW(T(""), MachineError);
  EXPECT_EQ(T("@1"), prim(Prim::K));
}

TEST(Compiler, BracketAbstraction) {
  using namespace lam;
  TermId id = compile(abs("x", lam::var("x")));
  EXPECT_EQ(run_term(app_term(id, num_term(Nat(6))), empty_oracle(), 100).value, Nat(6));
  TermId swap = compile(abs({"a", "b"}, ap(p(Prim::Pair), {lam::var("b"), lam::var("a")})));
  EXPECT_EQ(run_term(app_term(swap, {num_term(Nat(2)), num_term(Nat(3))}), empty_oracle(), 100).value, Nat(cantor(3, 2)));
  EXPECT_THROW(compile(ap(p(Prim::Succ), lam::var("free"))), MachineError);
}

// The step-counting interpreter agrees with the native machine on the codes
// below 400 and on codes of random small terms.
TEST(Interpreter, StepCountsMatchNativeRuns) {
  TermId ht = programs::halting_time();
  std::mt19937_64 rng(41);
  std::function<TermId(int)> random_term = [&](int depth) -> TermId {
    if (depth == 0 || rng() % 3 == 0) {
      std::uint64_t r = rng() % 11;
      return r < 9 ? prim(static_cast<Prim>(r)) : num_term(Nat(rng() % 5));
    }
    return app_term(random_term(depth - 1), random_term(depth - 1));
  };
  std::vector<Nat> codes;
  for (std::uint64_t e = 0; e < 400; ++e) codes.push_back(Nat(e));
  for (int i = 0; i < 300; ++i) codes.push_back(encode(random_term(3)));
  int halting = 0, other = 0;
  for (Nat e : codes)
    for (std::uint64_t x = 0; x < 2; ++x) {
      RunResult native = apply(e, Nat(x), empty_oracle(), 400);
      if (native.status == RunStatus::OutOfFuel) continue;
      std::uint64_t fuel = 5000 * native.steps + 100000;
      RunResult interp = run_term(app_term(ht, {num_term(e), num_term(Nat(x))}), empty_oracle(), fuel);
      if (native.status == RunStatus::Halted) {
        ++halting;
        ASSERT_EQ(interp.status, RunStatus::Halted) << nat_repr(e) << " " << x;
        ASSERT_EQ(interp.value, Nat(native.steps)) << nat_repr(e) << " " << x;
      } else {
        ++other;
        ASSERT_NE(interp.status, RunStatus::Halted) << nat_repr(e) << " " << x;
      }
    }
  EXPECT_GT(halting, 60);
  EXPECT_GT(other, 60);
}

TEST(Interpreter, LongerRuns) {
  for (const char* s : {"S K K", "S (K Succ) Succ", "Fst", "Case #3 (K #4)", "S (K (Pair #1)) Succ"}) {
    Nat e = encode(T(s));
    for (std::uint64_t x = 0; x < 4; ++x) {
      RunResult native = apply(e, Nat(x), empty_oracle(), 1000);
      ASSERT_EQ(native.status, RunStatus::Halted) << s;
      RunResult interp = run_term(app_term(programs::halting_time(), {num_term(e), num_term(Nat(x))}), empty_oracle(),
                                  5000000);
      ASSERT_EQ(interp.status, RunStatus::Halted);
      EXPECT_EQ(interp.value, Nat(native.steps)) << s << " " << x;
    }
  }
}
