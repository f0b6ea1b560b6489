#pragma once
// Nuclei on finite Heyting algebras and finite frames of nuclei.

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lopkit/algebra.hpp"

namespace lopkit {

struct NucleusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Nucleus {
  AlgPtr alg;
  std::vector<Elem> table;
  std::string label;  // canonical name when known, else "#<index>" or empty

  Elem operator()(Elem a) const { return table[a]; }
  bool operator==(const Nucleus& o) const { return table == o.table; }
};

struct NucleusCheck {
  bool ok = true;
  std::string clause;
  std::vector<Elem> witness;
  std::string message;
};

inline void require_total(const HeytingAlg& h, const std::vector<Elem>& t) {
  if (t.size() != h.size())
    throw NucleusError("table not total: has " + std::to_string(t.size()) + " entries for " +
                       std::to_string(h.size()) + " elements");
  for (Elem v : t)
    if (v >= h.size()) throw NucleusError("table not total: value " + std::to_string(v) + " out of range");
}

inline NucleusCheck is_nucleus(const HeytingAlg& h, const std::vector<Elem>& t) {
  require_total(h, t);
  const Elem n = static_cast<Elem>(h.size());
  auto bad = [&](std::string clause, std::vector<Elem> w) {
    NucleusCheck c{false, clause, w, clause + " fails at ("};
    for (std::size_t i = 0; i < w.size(); ++i) c.message += (i ? "," : "") + h.name(w[i]);
    c.message += ")";
    return c;
  };
  for (Elem a = 0; a < n; ++a)
    if (!h.le(a, t[a])) return bad("inflationary", {a});
  for (Elem a = 0; a < n; ++a)
    if (!h.le(t[t[a]], t[a])) return bad("idempotent", {a});
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b)
      if (!h.le(h.imp(a, b), h.imp(t[a], t[b]))) return bad("implicative", {a, b});
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b)
      if (t[h.meet(a, b)] != h.meet(t[a], t[b])) return bad("meet-preserving", {a, b});
  return {};
}

inline bool same_algebra(const AlgPtr& a, const AlgPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->names == b->names && a->meet_table == b->meet_table && a->join_table == b->join_table &&
         a->imp_table == b->imp_table;
}

inline Nucleus make_nucleus(const AlgPtr& h, std::vector<Elem> t, std::string label = {}) {
  auto c = is_nucleus(*h, t);
  if (!c.ok) throw NucleusError("not a nucleus: " + c.message);
  return Nucleus{h, std::move(t), std::move(label)};
}

namespace detail {
// Lexicographic search over tables; assigning entries in carrier order. The carrier
// order extends the lattice order, so monotone prefixes can be pruned early.
inline void nucleus_search(const HeytingAlg& h, bool prune,
                           const std::function<void(const std::vector<Elem>&)>& emit) {
  const Elem n = static_cast<Elem>(h.size());
  std::vector<Elem> t(n, 0);
  auto rec = [&](auto&& self, Elem a) -> void {
    if (a == n) {
      if (is_nucleus(h, t).ok) emit(t);
      return;
    }
    for (Elem v = 0; v < n; ++v) {
      if (prune) {
        if (!h.le(a, v)) continue;
        bool okv = true;
        for (Elem b = 0; b < a && okv; ++b) {
          if (h.le(b, a) && !h.le(t[b], v)) okv = false;
          // meet(a,b) precedes both in carrier order, so its image is known
          else if (t[h.meet(a, b)] != h.meet(v, t[b])) okv = false;
          else if (t[b] == a && v != a) okv = false;
        }
        if (v < a && t[v] != v) okv = false;
        if (!okv) continue;
      }
      t[a] = v;
      self(self, a + 1);
    }
  };
  rec(rec, 0);
}
}  // namespace detail

// Brute-force filter of every endomap; exponential, intended for small carriers and as a test oracle.
inline std::vector<Nucleus> enumerate_nuclei_bruteforce(const AlgPtr& h) {
  std::vector<Nucleus> out;
  detail::nucleus_search(*h, false, [&](const std::vector<Elem>& t) { out.push_back({h, t, {}}); });
  return out;
}

inline constexpr std::size_t kBruteForceNucleusLimit = 6;

inline std::vector<Nucleus> enumerate_nuclei(const AlgPtr& h) {
  if (h->size() > 4096) throw SizeLimitError("nucleus enumeration limited to 4096 elements");
  std::vector<Nucleus> out;
  bool linear_extension = true;
  for (Elem a = 0; a < h->size() && linear_extension; ++a)
    for (Elem b = 0; b < a; ++b)
      if (h->le(a, b)) {
        linear_extension = false;
        break;
      }
  const bool prune = h->size() > kBruteForceNucleusLimit;
  if (prune && !linear_extension && h->size() > 8)
    throw SizeLimitError("pruned nucleus enumeration needs a carrier order extending the lattice order");
  if (prune && !linear_extension) {
    detail::nucleus_search(*h, false, [&](const std::vector<Elem>& t) { out.push_back({h, t, {}}); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].label = "#" + std::to_string(i);
    return out;
  }
  detail::nucleus_search(*h, prune, [&](const std::vector<Elem>& t) { out.push_back({h, t, {}}); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = "#" + std::to_string(i);
  return out;
}

inline bool nucleus_le(const Nucleus& j, const Nucleus& k) {
  if (!same_algebra(j.alg, k.alg)) throw NucleusError("algebra mismatch");
  for (Elem a = 0; a < j.table.size(); ++a)
    if (!j.alg->le(j(a), k(a))) return false;
  return true;
}

inline Nucleus identity_nucleus(const AlgPtr& h) {
  std::vector<Elem> t(h->size());
  for (Elem a = 0; a < t.size(); ++a) t[a] = a;
  return {h, t, "id"};
}
inline Nucleus double_negation(const AlgPtr& h) {
  std::vector<Elem> t(h->size());
  for (Elem a = 0; a < t.size(); ++a) t[a] = h->neg(h->neg(a));
  return {h, t, "notnot"};
}
inline Nucleus closed_nucleus(const AlgPtr& h, Elem u) {
  h->check(u);
  std::vector<Elem> t(h->size());
  for (Elem a = 0; a < t.size(); ++a) t[a] = h->join(u, a);
  return {h, t, "closed:" + h->name(u)};
}
inline Nucleus open_nucleus(const AlgPtr& h, Elem u) {
  h->check(u);
  std::vector<Elem> t(h->size());
  for (Elem a = 0; a < t.size(); ++a) t[a] = h->imp(u, a);
  return {h, t, "open:" + h->name(u)};
}
inline Nucleus top_nucleus(const AlgPtr& h) {
  return {h, std::vector<Elem>(h->size(), h->top()), "top"};
}

// "id", "notnot", "top", "closed:<elem>", "open:<elem>", or a canonical enumeration index.
inline Nucleus nucleus_by_name(const AlgPtr& h, const std::string& name,
                               const std::vector<Nucleus>* enumeration = nullptr) {
  if (name == "id") return identity_nucleus(h);
  if (name == "notnot") return double_negation(h);
  if (name == "top") return top_nucleus(h);
  if (name.rfind("closed:", 0) == 0) return closed_nucleus(h, h->element(name.substr(7)));
  if (name.rfind("open:", 0) == 0) return open_nucleus(h, h->element(name.substr(5)));
  if (!name.empty() && std::all_of(name.begin(), name.end(), ::isdigit)) {
    std::vector<Nucleus> own;
    if (!enumeration) {
      own = enumerate_nuclei(h);
      enumeration = &own;
    }
    std::size_t i = std::stoul(name);
    if (i >= enumeration->size()) throw NucleusError("nucleus index out of range: " + name);
    return (*enumeration)[i];
  }
  throw NucleusError("unknown nucleus name '" + name + "'");
}

inline bool is_dense(const Nucleus& j) { return j(j.alg->bottom()) == j.alg->bottom(); }

struct LopFrame {
  AlgPtr alg;
  std::vector<Nucleus> members;
};

inline LopFrame make_frame(const AlgPtr& h, std::vector<Nucleus> members) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!same_algebra(members[i].alg, h)) throw NucleusError("algebra mismatch in frame");
    auto c = is_nucleus(*h, members[i].table);
    if (!c.ok) throw NucleusError("frame member " + std::to_string(i) + " is not a nucleus: " + c.message);
    for (std::size_t k = 0; k < i; ++k)
      if (members[k] == members[i]) throw NucleusError("duplicate frame member " + std::to_string(i));
  }
  return {h, std::move(members)};
}

inline std::vector<Nucleus> frame_up(const LopFrame& frame, const Nucleus& j) {
  std::vector<Nucleus> out;
  for (const auto& k : frame.members)
    if (nucleus_le(j, k)) out.push_back(k);
  return out;
}

inline bool frame_contains(const LopFrame& frame, const Nucleus& j) {
  for (const auto& k : frame.members)
    if (k == j) return true;
  return false;
}

inline std::string table_string(const Nucleus& j) {
  std::string s;
  for (Elem a = 0; a < j.table.size(); ++a)
    s += (a ? ", " : "") + j.alg->name(a) + "->" + j.alg->name(j(a));
  return s;
}

}  // namespace lopkit
