#pragma once
// Library realizers written in the lambda layer: a step-counting interpreter
// of the machine (oracle-free runs), Markov search, primitive recursion.

#include <optional>
#include <string>
#include <vector>

#include "lopkit/machine.hpp"

namespace lopkit {

namespace programs {

using namespace lam;

inline L n(std::uint64_t v) { return num(Nat(v)); }
inline L v(const char* x) { return lam::var(x); }

// Strict use of a numeral: k receives a term whose evaluation no longer
// depends on the argument's original thunk.
inline L strict() {
  static const L t = cst(compile(abs({"k", "x"}, ap(p(Prim::Case), {ap(v("k"), n(0)),
                                                               abs("m", ap(v("k"), ap(p(Prim::Succ), v("m")))),
                                                               v("x")}))));
  return t;
}
inline L cons() {
  static const L t = cst(compile(abs({"x", "xs"}, ap(p(Prim::Succ), ap(p(Prim::Pair), {v("x"), v("xs")})))));
  return t;
}
inline L quote_app() {
  static const L t = cst(compile(abs({"f", "a"}, ap(p(Prim::Pair), {n(kTagApp), ap(p(Prim::Pair), {v("f"), v("a")})}))));
  return t;
}
inline L quote_num() {
  static const L t = cst(compile(abs("x", ap(p(Prim::Pair), {n(kTagNum), v("x")}))));
  return t;
}
inline L diverge() {
  static const L t = cst(app_term(prim(Prim::Fix), compile(abs("z", v("z")))));
  return t;
}

// case l of nil -> on_nil | cons(hd, tl) -> body
inline L case_list(L l, L on_nil, const std::string& hd, const std::string& tl, L body) {
  return ap(p(Prim::Case), {on_nil, abs("cell", ap(abs({hd, tl}, body), {ap(p(Prim::Fst), v("cell")),
                                                                     ap(p(Prim::Snd), v("cell"))})),
                            l});
}

// Dispatch on a small numeral: branches[i] when x = i, otherwise fallback.
inline L switch_on(L x, const std::vector<L>& branches, L fallback, int depth = 0) {
  if (depth == static_cast<int>(branches.size())) return fallback;
  std::string t = "t" + std::to_string(depth);
  return ap(p(Prim::Case), {branches[depth], abs(t, switch_on(v(t.c_str()), branches, fallback, depth + 1)), x});
}

// Forces all four loop registers before re-entering the loop.
inline L forced_call() {
  static const L t = [] {
    auto inner = ap(v("self"), {v("h"), v("s"), v("k"), v("c")});
    auto body = ap(strict(), {abs("h", ap(strict(), {abs("s", ap(strict(), {abs("k", ap(strict(), {abs("c", inner), v("c0")})),
                                                                          v("k0")})),
                                                     v("s0")})),
                              v("h0")});
    return cst(compile(abs({"self", "h0", "s0", "k0", "c0"}, body)));
  }();
  return t;
}

// Interpreter of oracle-free runs on codes. Registers: head code h, argument
// stack s (list of codes), continuation stack k (list of frames), step count c.
// Halts with the number of transitions the machine takes; runs that get stuck
// or call the oracle diverge instead.
inline TermId interpreter() {
  static const TermId t = [] {
    auto go = [](L h, L s, L k) { return ap(forced_call(), {v("self"), h, s, k, ap(p(Prim::Succ), v("c"))}); };
    auto fst = [](L x) { return ap(p(Prim::Fst), x); };
    auto snd = [](L x) { return ap(p(Prim::Snd), x); };
    auto pr = [](L a, L b) { return ap(p(Prim::Pair), {a, b}); };
    auto cs = [](L a, L b) { return ap(cons(), {a, b}); };
    auto qa = [](L a, L b) { return ap(quote_app(), {a, b}); };
    auto qn = [](L a) { return ap(quote_num(), a); };
    L div = diverge();

    // Returning frames, entered with a numeral value x, empty stack.
    auto frame_body = [&](L x) {
      L d = snd(v("fr"));
      std::vector<L> br = {
          go(fst(d), n(0), cs(pr(n(1), pr(x, snd(d))), v("k1"))),
          go(qn(pr(fst(d), x)), snd(d), v("k1")),
          go(qn(fst(x)), d, v("k1")),
          go(qn(snd(x)), d, v("k1")),
          go(qn(ap(p(Prim::Succ), x)), d, v("k1")),
          ap(p(Prim::Case), {go(fst(d), snd(snd(d)), v("k1")),
                             abs("m", go(fst(snd(d)), cs(qn(v("m")), snd(snd(d))), v("k1"))), x}),
      };
      return switch_on(fst(v("fr")), br, div);
    };
    auto numeral = [&](L x) {
      return ap(abs("x", case_list(v("s"), case_list(v("k"), v("c"), "fr", "k1", frame_body(v("x"))), "a0", "s0",
                                   go(v("x"), v("s"), v("k")))),
                x);
    };
    auto args1 = [&](auto f) { return case_list(v("s"), div, "a", "s1", f()); };
    auto args2 = [&](auto f) { return args1([&] { return case_list(v("s1"), div, "b", "s2", f()); }); };
    auto args3 = [&](auto f) { return args2([&] { return case_list(v("s2"), div, "c3", "s3", f()); }); };
    auto strict_frame = [&](std::uint64_t kind) {
      return args1([&] { return go(v("a"), n(0), cs(pr(n(kind), v("s1")), v("k"))); });
    };
    auto only_if_plain = [&](L branch) { return ap(p(Prim::Case), {branch, abs("junk", numeral(n(0))), snd(v("h"))}); };

    std::vector<L> by_tag = {
        only_if_plain(args3([&] { return go(v("a"), cs(v("c3"), cs(qa(v("b"), v("c3")), v("s3"))), v("k")); })),
        only_if_plain(args2([&] { return go(v("a"), v("s2"), v("k")); })),
        only_if_plain(args2([&] { return go(v("a"), n(0), cs(pr(n(0), pr(v("b"), v("s2"))), v("k"))); })),
        only_if_plain(strict_frame(2)),
        only_if_plain(strict_frame(3)),
        only_if_plain(strict_frame(4)),
        only_if_plain(args3([&] {
          return go(v("c3"), n(0), cs(pr(n(5), pr(v("a"), pr(v("b"), v("s3")))), v("k")));
        })),
        only_if_plain(args1([&] { return go(v("a"), cs(qa(n(encode(prim(Prim::Fix)).bits), v("a")), v("s1")), v("k")); })),
        only_if_plain(div),
        numeral(snd(v("h"))),
        go(fst(snd(v("h"))), cs(snd(snd(v("h"))), v("s")), v("k")),
    };
    L body = switch_on(fst(v("h")), by_tag, numeral(n(0)));
    return compile(ap(p(Prim::Fix), abs({"self", "h", "s", "k", "c"}, body)));
  }();
  return t;
}

// Number of transitions of App(decode(e), Num(x)) when it halts; diverges otherwise.
inline TermId halting_time() {
  static const TermId t = compile(abs({"e", "x"}, ap(forced_call(), {cst(interpreter()),
                                                                     ap(quote_app(), {v("e"), ap(quote_num(), v("x"))}),
                                                                     n(0), n(0), n(0)})));
  return t;
}

// Markov's principle: mp e x r = <w, 0> for the least w with StepHalt(e,x,w).
// The realizer of the double-negated antecedent is ignored.
inline TermId markov() {
  static const TermId t =
      compile(abs({"e", "x", "r"}, ap(p(Prim::Pair), {ap(cst(halting_time()), {v("e"), v("x")}), n(0)})));
  return t;
}

// Primitive recursion for realizers of (B /\ forall x. (P(x) -> P(S x))) -> forall x. P(x):
// ind p returns the code of a function n |-> rec p n with
// rec p 0 = fst p and rec p (m+1) = ((snd p) . m) . (rec p m).
inline TermId recursor() {
  static const TermId t = [] {
    auto step = ap(strict(), {abs("q", ap(v("q"), ap(v("rec"), {v("pp"), v("m")}))),
                              ap(ap(p(Prim::Snd), v("pp")), v("m"))});
    auto body = ap(p(Prim::Case), {ap(p(Prim::Fst), v("pp")), abs("m", step), v("nn")});
    return compile(ap(p(Prim::Fix), abs({"rec", "pp", "nn"}, body)));
  }();
  return t;
}

inline TermId induction() {
  static const TermId t =
      compile(abs("pp", ap(quote_app(), {num(encode(recursor())), ap(quote_num(), v("pp"))})));
  return t;
}

}  // namespace programs

}  // namespace lopkit
