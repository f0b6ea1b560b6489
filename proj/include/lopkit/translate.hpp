#pragma once
// Syntactic translations into the modal layer: [j] applies a nucleus, and
// "all k>=j in P." ranges over frame members above j.

#include <string>

#include "lopkit/formula.hpp"

namespace lopkit {

enum class Style { GG, Forcing, Kuroda, KurodaWrapped };

inline Style parse_style(const std::string& s) {
  if (s == "gg") return Style::GG;
  if (s == "forcing") return Style::Forcing;
  if (s == "kuroda") return Style::Kuroda;
  if (s == "kuroda-wrapped") return Style::KurodaWrapped;
  throw FormulaError("unknown style '" + s + "' (expected gg, forcing, kuroda, kuroda-wrapped)");
}

inline bool is_atomic(const Formula& f) { return f.kind == Kind::Atom || f.kind == Kind::Eq || f.kind == Kind::Bot; }

inline FPtr gg_translate(const FPtr& f, const std::string& j = "j") {
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq:
    case Kind::Bot: return modal(j, f);
    case Kind::And: return conj(gg_translate(f->left, j), gg_translate(f->right, j));
    case Kind::Or: return modal(j, disj(gg_translate(f->left, j), gg_translate(f->right, j)));
    case Kind::Imp: return imp(gg_translate(f->left, j), gg_translate(f->right, j));
    case Kind::Exists: return modal(j, exists(f->name, gg_translate(f->left, j)));
    case Kind::Forall: return forall(f->name, gg_translate(f->left, j));
    default: throw FormulaError("translation input already contains modal operators");
  }
}

namespace detail {
inline std::string guard_var(int depth) { return depth == 0 ? "k" : "k" + std::to_string(depth); }

inline FPtr forcing(const FPtr& f, const std::string& j, const std::string& frame, int depth) {
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq:
    case Kind::Bot: return modal(j, f);
    case Kind::And: return conj(forcing(f->left, j, frame, depth), forcing(f->right, j, frame, depth));
    case Kind::Or: return modal(j, disj(forcing(f->left, j, frame, depth), forcing(f->right, j, frame, depth)));
    case Kind::Imp: {
      std::string k = guard_var(depth);
      return guard(k, frame, j,
                   imp(forcing(f->left, k, frame, depth + 1), forcing(f->right, k, frame, depth + 1)));
    }
    case Kind::Exists: return modal(j, exists(f->name, forcing(f->left, j, frame, depth)));
    case Kind::Forall: {
      std::string k = guard_var(depth);
      return guard(k, frame, j, forall(f->name, forcing(f->left, k, frame, depth + 1)));
    }
    default: throw FormulaError("translation input already contains modal operators");
  }
}

inline FPtr kuroda(const FPtr& f, const std::string& j, const std::string& frame, int depth) {
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq:
    case Kind::Bot: return f;
    case Kind::And: return conj(kuroda(f->left, j, frame, depth), kuroda(f->right, j, frame, depth));
    case Kind::Or: return disj(kuroda(f->left, j, frame, depth), kuroda(f->right, j, frame, depth));
    case Kind::Imp: {
      std::string k = guard_var(depth);
      return guard(k, frame, j,
                   imp(kuroda(f->left, k, frame, depth + 1), modal(k, kuroda(f->right, k, frame, depth + 1))));
    }
    case Kind::Exists: return exists(f->name, kuroda(f->left, j, frame, depth));
    case Kind::Forall: {
      std::string k = guard_var(depth);
      return guard(k, frame, j, forall(f->name, modal(k, kuroda(f->left, k, frame, depth + 1))));
    }
    default: throw FormulaError("translation input already contains modal operators");
  }
}
}  // namespace detail

inline FPtr forcing_translate(const FPtr& f, const std::string& j = "j", const std::string& frame = "P") {
  return detail::forcing(f, j, frame, 0);
}

inline FPtr kuroda_forcing_translate(const FPtr& f, const std::string& j = "j", const std::string& frame = "P") {
  return detail::kuroda(f, j, frame, 0);
}

inline FPtr kuroda_wrapped(const FPtr& f, const std::string& j = "j", const std::string& frame = "P") {
  return modal(j, kuroda_forcing_translate(f, j, frame));
}

inline FPtr translate(const FPtr& f, Style s) {
  switch (s) {
    case Style::GG: return gg_translate(f);
    case Style::Forcing: return forcing_translate(f);
    case Style::Kuroda: return kuroda_forcing_translate(f);
    case Style::KurodaWrapped: return kuroda_wrapped(f);
  }
  return f;
}

inline std::string print_mformula(const FPtr& m) { return print(m); }

}  // namespace lopkit
