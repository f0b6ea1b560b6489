#pragma once
// Finite posets and finite Heyting algebras given by operation tables.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace lopkit {

using Elem = std::uint32_t;

struct PosetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SizeLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ElementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxCarrier = std::size_t{1} << 16;

struct FinPoset {
  std::vector<std::string> elements;
  std::vector<std::vector<char>> leq;  // leq[i][j] == 1 iff elements[i] <= elements[j]

  std::size_t size() const { return elements.size(); }
  bool le(std::size_t i, std::size_t j) const { return leq[i][j] != 0; }
};

// First violated poset axiom with its witness, or nullopt.
inline std::optional<std::string> poset_violation(const FinPoset& p) {
  const std::size_t n = p.size();
  if (p.leq.size() != n) return "relation table has wrong size";
  for (const auto& row : p.leq)
    if (row.size() != n) return "relation table has wrong size";
  for (std::size_t i = 0; i < n; ++i)
    if (!p.le(i, i)) return "reflexivity fails at (" + p.elements[i] + ")";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && p.le(i, j) && p.le(j, i))
        return "antisymmetry fails at (" + p.elements[i] + "," + p.elements[j] + ")";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (p.le(i, j) && p.le(j, k) && !p.le(i, k))
          return "transitivity fails at (" + p.elements[i] + "," + p.elements[j] + "," +
                 p.elements[k] + ")";
  return std::nullopt;
}

inline FinPoset make_poset(std::vector<std::string> elements, std::vector<std::vector<char>> leq) {
  FinPoset p{std::move(elements), std::move(leq)};
  if (auto v = poset_violation(p)) throw PosetError(*v);
  return p;
}

// leq is the reflexive-transitive closure of the cover pairs (lower, upper).
inline FinPoset poset_from_covers(const std::vector<std::string>& elements,
                                  const std::vector<std::pair<std::string, std::string>>& covers) {
  const std::size_t n = elements.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    if (!index.emplace(elements[i], i).second)
      throw PosetError("duplicate element label '" + elements[i] + "'");
  }
  std::vector<std::vector<char>> leq(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) leq[i][i] = 1;
  for (const auto& [lo, hi] : covers) {
    auto a = index.find(lo), b = index.find(hi);
    if (a == index.end() || b == index.end())
      throw PosetError("cover mentions unknown element '" + (a == index.end() ? lo : hi) + "'");
    leq[a->second][b->second] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (leq[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (leq[k][j]) leq[i][j] = 1;
  return make_poset(elements, std::move(leq));
}

inline FinPoset poset_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array())
    throw PosetError("poset file needs an 'elements' array");
  std::vector<std::string> elements;
  for (const auto& e : j["elements"]) {
    if (!e.is_string()) throw PosetError("poset elements must be strings");
    elements.push_back(e.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> covers;
  if (j.contains("covers")) {
    if (!j["covers"].is_array()) throw PosetError("'covers' must be an array");
    for (const auto& c : j["covers"]) {
      if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_string())
        throw PosetError("each cover must be a pair of element labels");
      covers.emplace_back(c[0].get<std::string>(), c[1].get<std::string>());
    }
  }
  return poset_from_covers(elements, covers);
}

inline nlohmann::json poset_to_json(const FinPoset& p) {
  nlohmann::json covers = nlohmann::json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (i == j || !p.le(i, j)) continue;
      bool cover = true;
      for (std::size_t k = 0; k < p.size() && cover; ++k)
        if (k != i && k != j && p.le(i, k) && p.le(k, j)) cover = false;
      if (cover) covers.push_back({p.elements[i], p.elements[j]});
    }
  return {{"elements", p.elements}, {"covers", covers}};
}

inline FinPoset chain_poset(std::size_t n) {
  std::vector<std::string> el;
  std::vector<std::pair<std::string, std::string>> cov;
  for (std::size_t i = 0; i < n; ++i) {
    el.push_back("q" + std::to_string(i));
    if (i) cov.emplace_back(el[i - 1], el[i]);
  }
  return poset_from_covers(el, cov);
}

inline FinPoset antichain_poset(std::size_t n) {
  std::vector<std::string> el;
  for (std::size_t i = 0; i < n; ++i) el.push_back("q" + std::to_string(i));
  return poset_from_covers(el, {});
}

namespace detail {
// Canonical form of a relation on n points: lexicographically least adjacency
// string over all relabelings.
inline std::string canonical_relation(const std::vector<std::vector<char>>& r) {
  const std::size_t n = r.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::string best;
  do {
    std::string s(n * n, '0');
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s[i * n + j] = r[perm[i]][perm[j]] ? '1' : '0';
    if (best.empty() || s < best) best = s;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}
}  // namespace detail

// All posets on exactly n points up to isomorphism, in canonical order.
inline std::vector<FinPoset> posets_up_to_iso(std::size_t n) {
  if (n > 6) throw SizeLimitError("poset generation is limited to 6 points");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  // Each unordered pair is unrelated, i<j, or j<i.
  std::set<std::string> seen;
  std::vector<std::vector<std::vector<char>>> found;
  std::vector<int> choice(pairs.size(), 0);
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  auto rec = [&](auto&& self, std::size_t idx) -> void {
    if (idx == pairs.size()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            if (r[i][j] && r[j][k] && !r[i][k]) return;
      std::string c = detail::canonical_relation(r);
      if (seen.insert(c).second) found.push_back(r);
      return;
    }
    auto [i, j] = pairs[idx];
    for (int c = 0; c < 3; ++c) {
      r[i][j] = c == 1;
      r[j][i] = c == 2;
      self(self, idx + 1);
    }
    r[i][j] = r[j][i] = 0;
  };
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
  rec(rec, 0);
  std::vector<std::pair<std::string, FinPoset>> keyed;
  for (auto& rel : found) {
    std::string key = detail::canonical_relation(rel);
    // Relabel into the canonical labeling so output does not depend on search order.
    std::vector<std::vector<char>> canon(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) canon[i][j] = key[i * n + j] == '1';
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("q" + std::to_string(i));
    keyed.emplace_back(key, make_poset(labels, canon));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<FinPoset> out;
  for (auto& [k, p] : keyed) out.push_back(std::move(p));
  return out;
}

struct HeytingAlg {
  std::vector<std::string> names;
  std::vector<Elem> meet_table, join_table, imp_table;  // row-major n*n
  std::vector<char> le_table;                           // derived: a <= b iff meet(a,b) == a
  std::vector<std::uint64_t> upset_masks;               // filled for upset algebras only

  std::size_t size() const { return names.size(); }
  Elem bottom() const { return 0; }
  Elem top() const { return static_cast<Elem>(size() - 1); }
  Elem meet(Elem a, Elem b) const { return meet_table[a * size() + b]; }
  Elem join(Elem a, Elem b) const { return join_table[a * size() + b]; }
  Elem imp(Elem a, Elem b) const { return imp_table[a * size() + b]; }
  bool le(Elem a, Elem b) const { return le_table[a * size() + b] != 0; }
  Elem iff(Elem a, Elem b) const { return meet(imp(a, b), imp(b, a)); }
  Elem neg(Elem a) const {
    check(a);
    return imp(a, bottom());
  }
  void check(Elem a) const {
    if (a >= size()) throw ElementError("unknown element id " + std::to_string(a));
  }
  Elem element(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<Elem>(i);
    throw ElementError("unknown element '" + name + "'");
  }
  const std::string& name(Elem a) const { return names.at(a); }
};

using AlgPtr = std::shared_ptr<const HeytingAlg>;

inline Elem neg(const HeytingAlg& h, Elem a) { return h.neg(a); }

// Builds an algebra from hand-entered tables; call validate_heyting before trusting it.
inline HeytingAlg algebra_from_tables(std::vector<std::string> names, std::vector<Elem> meet,
                                      std::vector<Elem> join, std::vector<Elem> imp) {
  HeytingAlg h;
  const std::size_t n = names.size();
  if (n == 0) throw ElementError("empty carrier");
  if (n > kMaxCarrier) throw SizeLimitError("carrier exceeds 2^16 elements");
  if (meet.size() != n * n || join.size() != n * n || imp.size() != n * n)
    throw ElementError("operation tables are not total over the carrier");
  for (auto* t : {&meet, &join, &imp})
    for (Elem v : *t)
      if (v >= n) throw ElementError("table entry out of range: " + std::to_string(v));
  h.names = std::move(names);
  h.meet_table = std::move(meet);
  h.join_table = std::move(join);
  h.imp_table = std::move(imp);
  h.le_table.assign(n * n, 0);
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) h.le_table[a * n + b] = h.meet(a, b) == a;
  return h;
}

struct HeytingViolation {
  std::string axiom;
  std::vector<std::pair<std::string, Elem>> witness;
  std::string message;
};

inline std::optional<HeytingViolation> validate_heyting(const HeytingAlg& h) {
  const Elem n = static_cast<Elem>(h.size());
  auto fail = [&](std::string axiom, std::vector<std::pair<std::string, Elem>> w) {
    std::ostringstream os;
    os << axiom << " violation at (";
    for (std::size_t i = 0; i < w.size(); ++i)
      os << (i ? "," : "") << w[i].first << "=" << h.name(w[i].second);
    os << ")";
    return HeytingViolation{axiom, std::move(w), os.str()};
  };
  if (h.meet_table.size() != std::size_t(n) * n || h.join_table.size() != std::size_t(n) * n ||
      h.imp_table.size() != std::size_t(n) * n)
    return HeytingViolation{"totality", {}, "operation tables are not total"};
  for (Elem a = 0; a < n; ++a) {
    if (h.meet(a, a) != a) return fail("meet idempotence", {{"a", a}});
    if (h.join(a, a) != a) return fail("join idempotence", {{"a", a}});
    if (h.meet(a, h.top()) != a) return fail("top bound", {{"a", a}});
    if (h.join(a, h.bottom()) != a) return fail("bottom bound", {{"a", a}});
  }
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) {
      if (h.meet(a, b) != h.meet(b, a)) return fail("meet commutativity", {{"a", a}, {"b", b}});
      if (h.join(a, b) != h.join(b, a)) return fail("join commutativity", {{"a", a}, {"b", b}});
      if (h.meet(a, h.join(a, b)) != a) return fail("absorption", {{"a", a}, {"b", b}});
      if (h.join(a, h.meet(a, b)) != a) return fail("absorption", {{"a", a}, {"b", b}});
    }
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b)
      for (Elem c = 0; c < n; ++c) {
        if (h.meet(a, h.meet(b, c)) != h.meet(h.meet(a, b), c))
          return fail("meet associativity", {{"a", a}, {"b", b}, {"c", c}});
        if (h.join(a, h.join(b, c)) != h.join(h.join(a, b), c))
          return fail("join associativity", {{"a", a}, {"b", b}, {"c", c}});
        if (h.meet(a, h.join(b, c)) != h.join(h.meet(a, b), h.meet(a, c)))
          return fail("distributivity", {{"a", a}, {"b", b}, {"c", c}});
      }
  // Residuation: meet(c,a) <= b iff c <= imp(a,b). The candidate imp(a,b) itself is
  // checked first, then maximality over all c.
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) {
      Elem r = h.imp(a, b);
      if (!h.le(h.meet(r, a), b)) return fail("residuation", {{"c", r}, {"a", a}, {"b", b}});
      for (Elem c = 0; c < n; ++c)
        if (h.le(h.meet(c, a), b) != h.le(c, r))
          return fail("residuation", {{"c", c}, {"a", a}, {"b", b}});
    }
  return std::nullopt;
}

namespace detail {
inline std::string upset_name(const FinPoset& p, std::uint64_t mask) {
  if (mask == 0) return "0";
  if (mask == (p.size() == 64 ? ~0ULL : ((1ULL << p.size()) - 1))) return "1";
  std::string s = "{";
  bool first = true;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (mask >> i & 1) {
      s += (first ? "" : ",") + p.elements[i];
      first = false;
    }
  return s + "}";
}
}  // namespace detail

// Upward-closed subsets of p ordered by inclusion; carrier sorted by bit pattern
// (bit i stands for element i), so the empty set is index 0 and the full set is last.
inline HeytingAlg upset_algebra(const FinPoset& p) {
  if (auto v = poset_violation(p)) throw PosetError(*v);
  const std::size_t n = p.size();
  if (n > 63) throw SizeLimitError("poset too large for upset enumeration");
  std::vector<std::uint64_t> up(n, 0);  // principal upsets
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p.le(i, j)) up[i] |= 1ULL << j;
  std::vector<std::uint64_t> masks;
  // Decide elements from the last to the first; including i forces its upset.
  auto rec = [&](auto&& self, std::size_t i, std::uint64_t in, std::uint64_t out) -> void {
    if (masks.size() > kMaxCarrier) return;
    if (i == n) {
      masks.push_back(in);
      return;
    }
    if (in >> i & 1) return self(self, i + 1, in, out);
    if (out >> i & 1) return self(self, i + 1, in, out);
    self(self, i + 1, in, out | (1ULL << i));
    if ((up[i] & out) == 0) self(self, i + 1, in | up[i], out);
  };
  rec(rec, 0, 0, 0);
  if (masks.size() > kMaxCarrier) throw SizeLimitError("upset algebra exceeds 2^16 elements");
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  const std::size_t m = masks.size();
  std::unordered_map<std::uint64_t, Elem> index;
  for (std::size_t i = 0; i < m; ++i) index[masks[i]] = static_cast<Elem>(i);
  std::vector<std::string> names;
  for (auto mk : masks) names.push_back(detail::upset_name(p, mk));
  std::vector<Elem> meet(m * m), join(m * m), imp(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      meet[a * m + b] = index.at(masks[a] & masks[b]);
      join[a * m + b] = index.at(masks[a] | masks[b]);
      std::uint64_t allowed = ~masks[a] | masks[b], r = 0;
      for (std::size_t q = 0; q < n; ++q)
        if ((up[q] & ~allowed) == 0) r |= 1ULL << q;
      imp[a * m + b] = index.at(r);
    }
  HeytingAlg h = algebra_from_tables(std::move(names), std::move(meet), std::move(join), std::move(imp));
  h.upset_masks = std::move(masks);
  return h;
}

inline nlohmann::json algebra_to_json(const HeytingAlg& h) {
  const std::size_t n = h.size();
  auto table = [&](auto op) {
    nlohmann::json rows = nlohmann::json::array();
    for (Elem a = 0; a < n; ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (Elem b = 0; b < n; ++b) row.push_back((h.*op)(a, b));
      rows.push_back(row);
    }
    return rows;
  };
  return {{"carrier", h.names},
          {"meet", table(&HeytingAlg::meet)},
          {"join", table(&HeytingAlg::join)},
          {"imp", table(&HeytingAlg::imp)}};
}

}  // namespace lopkit
