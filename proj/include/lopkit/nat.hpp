#pragma once
// Natural numbers closed under Cantor pairing.
//
// Machine codes of nested terms outgrow any fixed-width integer after a few
// levels of pairing, so a Nat below 2^63 is stored inline and anything larger
// is a hash-consed node holding its Cantor components. The representation is
// canonical: equal numbers have equal bits, and every arithmetic result is
// normalised back to the inline form when it fits.

#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lopkit {

struct Nat {
  std::uint64_t bits = 0;

  static constexpr std::uint64_t kNodeBit = std::uint64_t{1} << 63;

  constexpr Nat() = default;
  constexpr Nat(std::uint64_t v) : bits(v) {  // NOLINT: implicit from small values
    if (v & kNodeBit) throw std::out_of_range("Nat literal needs the pairing form");
  }
  static constexpr Nat from_bits(std::uint64_t b) {
    Nat n;
    n.bits = b;
    return n;
  }

  bool small() const { return (bits & kNodeBit) == 0; }
  std::uint64_t value() const {
    if (!small()) throw std::out_of_range("Nat exceeds 2^63");
    return bits;
  }
  std::uint32_t node() const { return static_cast<std::uint32_t>(bits & ~kNodeBit); }

  bool operator==(const Nat&) const = default;
};

struct NatHash {
  std::size_t operator()(const Nat& n) const { return std::hash<std::uint64_t>{}(n.bits); }
};

namespace detail {

using u128 = unsigned __int128;

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
    return std::hash<std::uint64_t>{}(p.first * 0x9E3779B97F4A7C15ULL ^ (p.second + 0x632BE59BD9B4E019ULL));
  }
};

// Process-wide, single-threaded store of large numbers.
struct NatArena {
  std::vector<std::pair<Nat, Nat>> nodes;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint32_t, PairHash> index;

  Nat intern(Nat a, Nat b) {
    auto key = std::make_pair(a.bits, b.bits);
    auto it = index.find(key);
    if (it != index.end()) return Nat::from_bits(Nat::kNodeBit | it->second);
    auto id = static_cast<std::uint32_t>(nodes.size());
    nodes.emplace_back(a, b);
    index.emplace(key, id);
    return Nat::from_bits(Nat::kNodeBit | id);
  }
};

inline NatArena& arena() {
  static NatArena a;
  return a;
}

inline std::uint64_t isqrt128(u128 n) {
  std::uint64_t lo = 0, hi = std::uint64_t{1} << 34;  // callers stay below 2^68
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if ((u128)mid * mid <= n) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

// Components of an inline-range value given as a wide integer (n < 2^64).
inline std::pair<std::uint64_t, std::uint64_t> unpair_wide(u128 n) {
  std::uint64_t w = (isqrt128(8 * n + 1) - 1) / 2;
  u128 t = (u128)w * (w + 1) / 2;
  std::uint64_t b = static_cast<std::uint64_t>(n - t);
  return {w - b, b};
}

}  // namespace detail

inline Nat pair(Nat a, Nat b) {
  if (a.small() && b.small()) {
    detail::u128 s = (detail::u128)a.bits + b.bits;
    detail::u128 p = s * (s + 1) / 2 + b.bits;
    if (p < Nat::kNodeBit) return Nat::from_bits(static_cast<std::uint64_t>(p));
  }
  return detail::arena().intern(a, b);
}

inline std::pair<Nat, Nat> unpair(Nat n) {
  if (!n.small()) return detail::arena().nodes[n.node()];
  auto [a, b] = detail::unpair_wide(n.bits);
  return {Nat(a), Nat(b)};
}

inline Nat fst(Nat n) { return unpair(n).first; }
inline Nat snd(Nat n) { return unpair(n).second; }

inline Nat pred(Nat n);

// pi(a,b)+1 = pi(a-1,b+1) when a>0, else pi(b+1,0).
inline Nat succ(Nat n) {
  if (n.small()) {
    if (n.bits + 1 < Nat::kNodeBit) return Nat(n.bits + 1);
    auto [a, b] = detail::unpair_wide((detail::u128)n.bits + 1);
    return detail::arena().intern(Nat(a), Nat(b));
  }
  auto [a, b] = unpair(n);
  if (a == Nat(0)) return pair(succ(b), Nat(0));
  return pair(pred(a), succ(b));
}

// pi(a,b)-1 = pi(a+1,b-1) when b>0, else pi(0,a-1). pred(0) = 0.
inline Nat pred(Nat n) {
  if (n.small()) return Nat(n.bits == 0 ? 0 : n.bits - 1);
  auto [a, b] = unpair(n);
  if (b == Nat(0)) return pair(Nat(0), pred(a));
  return pair(succ(a), pred(b));
}

inline bool is_zero(Nat n) { return n.bits == 0; }

// Numeric comparison against a machine-word bound; every node is >= 2^63.
inline bool below(Nat n, std::uint64_t bound) { return n.small() && n.bits < bound; }

inline std::string to_string(Nat n) {
  if (n.small()) return std::to_string(n.bits);
  auto [a, b] = unpair(n);
  return "<" + to_string(a) + "," + to_string(b) + ">";
}

// Short deterministic rendering for reports: the full form when it is at most
// `limit` characters, else a structural digest (pair trees share subterms and
// their printed form can be exponentially long).
inline std::uint64_t nat_digest(Nat n) {
  static std::unordered_map<std::uint64_t, std::uint64_t> memo;
  if (n.small()) return n.bits * 0x9E3779B97F4A7C15ULL + 0x51;
  auto it = memo.find(n.bits);
  if (it != memo.end()) return it->second;
  auto [a, b] = unpair(n);
  std::uint64_t h = nat_digest(a) * 0xBF58476D1CE4E5B9ULL ^ (nat_digest(b) + 0x94D049BB133111EBULL);
  h ^= h >> 31;
  memo.emplace(n.bits, h);
  return h;
}

inline std::string nat_repr(Nat n, std::size_t limit = 200) {
  if (n.small()) return std::to_string(n.bits);
  std::string out;
  bool too_long = false;
  std::function<void(Nat)> go = [&](Nat m) {
    if (too_long) return;
    if (m.small()) {
      out += std::to_string(m.bits);
    } else {
      auto [a, b] = unpair(m);
      out += '<';
      go(a);
      out += ',';
      go(b);
      out += '>';
    }
    if (out.size() > limit) too_long = true;
  };
  go(n);
  if (!too_long) return out;
  char buf[40];
  std::snprintf(buf, sizeof buf, "pairtree:%016llx", static_cast<unsigned long long>(nat_digest(n)));
  return buf;
}

struct NatParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accepts decimal numerals and the "<a,b>" pairing notation printed above.
inline Nat parse_nat(const std::string& s) {
  std::size_t i = 0;
  std::function<Nat()> rec = [&]() -> Nat {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i < s.size() && s[i] == '<') {
      ++i;
      Nat a = rec();
      while (i < s.size() && s[i] == ' ') ++i;
      if (i >= s.size() || s[i] != ',') throw NatParseError("expected ',' in pair at offset " + std::to_string(i));
      ++i;
      Nat b = rec();
      while (i < s.size() && s[i] == ' ') ++i;
      if (i >= s.size() || s[i] != '>') throw NatParseError("expected '>' at offset " + std::to_string(i));
      ++i;
      return pair(a, b);
    }
    std::size_t start = i;
    detail::u128 v = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      v = v * 10 + static_cast<unsigned>(s[i] - '0');
      if (v > ~std::uint64_t{0}) throw NatParseError("numeral too large; use <a,b> notation");
      ++i;
    }
    if (i == start) throw NatParseError("expected a numeral at offset " + std::to_string(i));
    if (v < Nat::kNodeBit) return Nat(static_cast<std::uint64_t>(v));
    auto [a, b] = detail::unpair_wide(v);
    return pair(Nat(a), Nat(b));
  };
  Nat out = rec();
  while (i < s.size() && s[i] == ' ') ++i;
  if (i != s.size()) throw NatParseError("trailing input in numeral: " + s);
  return out;
}

}  // namespace lopkit
