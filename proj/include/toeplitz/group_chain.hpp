#pragma once
// Finite-quotient representation of a residually finite group G: a tower of
// finite groups Q_1 <- Q_2 <- ... standing in for G/H_n, with projections,
// generator images, the kernel label alphabets A_n, conjugation of labels,
// the chain condition, and Haar sampling at finite depth.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "toeplitz/common.hpp"

namespace toeplitz {

// ---------------------------------------------------------------------------
// permutations (used by the permutation backend and the tower builders)

using Perm = std::vector<std::uint16_t>;

inline Perm perm_identity(size_t degree) {
  Perm p(degree);
  for (size_t i = 0; i < degree; ++i) p[i] = static_cast<std::uint16_t>(i);
  return p;
}

// (f*g)(x) = f(g(x))
inline Perm perm_compose(const Perm& f, const Perm& g) {
  Perm r(g.size());
  for (size_t i = 0; i < g.size(); ++i) r[i] = f[g[i]];
  return r;
}

inline Perm perm_inverse(const Perm& f) {
  Perm r(f.size());
  for (size_t i = 0; i < f.size(); ++i) r[f[i]] = static_cast<std::uint16_t>(i);
  return r;
}

inline std::string perm_key(const Perm& p) {
  std::string k;
  k.reserve(p.size() * 2);
  for (auto v : p) {
    k.push_back(static_cast<char>(v & 0xff));
    k.push_back(static_cast<char>(v >> 8));
  }
  return k;
}

inline std::string perm_cycles(const Perm& p) {
  std::string out;
  std::vector<bool> seen(p.size(), false);
  for (size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == i) continue;
    out.push_back('(');
    size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) out.push_back(' ');
      out += std::to_string(j);
      first = false;
      j = p[j];
    }
    out.push_back(')');
  }
  return out.empty() ? std::string("()") : out;
}

// ---------------------------------------------------------------------------
// FiniteGroup

// Elements are opaque indices 0..order-1. Three backends:
//   - modular: Z/n with (a+b) mod n, no table;
//   - table:   dense multiplication table (kept for order <= 512);
//   - perm:    elements stored as permutations, products on demand.
class FiniteGroup {
 public:
  FiniteGroup() = default;

  static FiniteGroup cyclic(long long n) {
    if (n < 1) fail(Errc::invalid_argument, "cyclic group order must be >= 1");
    FiniteGroup g;
    g.order_ = n;
    g.modulus_ = n;
    g.id_ = 0;
    return g;
  }

  static FiniteGroup from_table(std::vector<std::vector<int>> mul) {
    FiniteGroup g;
    g.order_ = static_cast<long long>(mul.size());
    if (g.order_ == 0) fail(Errc::invalid_argument, "empty multiplication table");
    g.table_.assign(static_cast<size_t>(g.order_ * g.order_), -1);
    for (long long a = 0; a < g.order_; ++a) {
      if (static_cast<long long>(mul[a].size()) != g.order_)
        fail(Errc::invalid_argument, "multiplication table is not square");
      for (long long b = 0; b < g.order_; ++b) {
        int v = mul[a][b];
        if (v < 0 || v >= g.order_)
          fail(Errc::invalid_argument, "table entry out of range");
        g.table_[static_cast<size_t>(a * g.order_ + b)] = v;
      }
    }
    g.id_ = g.locate_identity();
    g.build_inverses();
    g.verify_axioms();
    return g;
  }

  // BFS closure of a generating set of permutations (shared degree).
  static FiniteGroup from_generators(const std::vector<Perm>& gens,
                                     long long order_cap = 2000000) {
    if (gens.empty()) fail(Errc::invalid_argument, "no generators");
    const size_t degree = gens[0].size();
    for (const auto& p : gens)
      if (p.size() != degree) fail(Errc::invalid_argument, "generator degree mismatch");

    FiniteGroup g;
    g.gen_perms_ = gens;
    g.perms_.push_back(perm_identity(degree));
    g.index_.emplace(perm_key(g.perms_[0]), 0);
    std::vector<Perm> closure = gens;
    for (const auto& p : gens) closure.push_back(perm_inverse(p));
    for (size_t head = 0; head < g.perms_.size(); ++head) {
      Perm cur = g.perms_[head];  // copy: push_back below may reallocate
      for (const auto& s : closure) {
        Perm nxt = perm_compose(cur, s);
        auto key = perm_key(nxt);
        if (g.index_.find(key) == g.index_.end()) {
          g.index_.emplace(std::move(key), static_cast<int>(g.perms_.size()));
          g.perms_.push_back(std::move(nxt));
          if (static_cast<long long>(g.perms_.size()) > order_cap)
            fail(Errc::invalid_argument, "generated group exceeds order cap");
        }
      }
    }
    g.order_ = static_cast<long long>(g.perms_.size());
    g.id_ = 0;
    if (g.order_ <= kDenseLimit) g.materialize_table();
    return g;
  }

  static FiniteGroup symmetric(int n) {
    if (n < 1 || n > 8) fail(Errc::invalid_argument, "symmetric(n) supports 1 <= n <= 8");
    if (n == 1) return cyclic(1);
    Perm t = perm_identity(static_cast<size_t>(n));
    std::swap(t[0], t[1]);
    Perm c(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = static_cast<std::uint16_t>((i + 1) % n);
    return from_generators({t, c});
  }

  static FiniteGroup dihedral(int ngon) {
    if (ngon < 3) fail(Errc::invalid_argument, "dihedral(n) needs n >= 3");
    Perm r(static_cast<size_t>(ngon)), s(static_cast<size_t>(ngon));
    for (int i = 0; i < ngon; ++i) {
      r[static_cast<size_t>(i)] = static_cast<std::uint16_t>((i + 1) % ngon);
      s[static_cast<size_t>(i)] = static_cast<std::uint16_t>((ngon - i) % ngon);
    }
    return from_generators({r, s});
  }

  long long order() const { return order_; }
  int id() const { return id_; }
  bool modular() const { return modulus_ > 0; }
  bool perm_backed() const { return !perms_.empty(); }

  int mul(int a, int b) const {
    check_elem(a);
    check_elem(b);
    if (modulus_ > 0)
      return static_cast<int>((static_cast<long long>(a) + b) % modulus_);
    if (!table_.empty())
      return table_[static_cast<size_t>(static_cast<long long>(a) * order_ + b)];
    Perm p = perm_compose(perms_[static_cast<size_t>(a)], perms_[static_cast<size_t>(b)]);
    auto it = index_.find(perm_key(p));
    return it->second;
  }

  int inv(int a) const {
    check_elem(a);
    if (modulus_ > 0) return static_cast<int>((modulus_ - a) % modulus_);
    if (!inv_.empty()) return inv_[static_cast<size_t>(a)];
    Perm p = perm_inverse(perms_[static_cast<size_t>(a)]);
    return index_.find(perm_key(p))->second;
  }

  int pow(int a, long long e) const {
    check_elem(a);
    if (modulus_ > 0) return static_cast<int>(pmod(static_cast<long long>(a) * (e % modulus_), modulus_));
    int base = e < 0 ? inv(a) : a;
    unsigned long long n = e < 0 ? static_cast<unsigned long long>(-(e + 1)) + 1 : static_cast<unsigned long long>(e);
    int acc = id_;
    while (n) {
      if (n & 1) acc = mul(acc, base);
      base = mul(base, base);
      n >>= 1;
    }
    return acc;
  }

  const Perm& perm_of(int a) const {
    check_elem(a);
    if (perms_.empty()) fail(Errc::invalid_argument, "group has no permutation backend");
    return perms_[static_cast<size_t>(a)];
  }

  std::optional<int> find_perm(const Perm& p) const {
    auto it = index_.find(perm_key(p));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<Perm>& generator_perms() const { return gen_perms_; }

  std::string element_name(int a) const {
    check_elem(a);
    if (!perms_.empty()) return perm_cycles(perms_[static_cast<size_t>(a)]);
    return std::to_string(a);
  }

  // Exhaustive for order <= 256 (the spec's testable bound); identity and
  // inverse laws always checked in full.
  void verify_axioms() const {
    for (int a = 0; a < order_; ++a) {
      if (mul(id_, a) != a || mul(a, id_) != a)
        fail(Errc::invalid_argument, "identity law fails");
      if (mul(a, inv(a)) != id_ || mul(inv(a), a) != id_)
        fail(Errc::invalid_argument, "inverse law fails");
    }
    if (order_ <= 256 && !table_.empty()) {
      for (int a = 0; a < order_; ++a)
        for (int b = 0; b < order_; ++b)
          for (int c = 0; c < order_; ++c)
            if (mul(mul(a, b), c) != mul(a, mul(b, c)))
              fail(Errc::invalid_argument, "associativity fails");
    }
  }

  static constexpr long long kDenseLimit = 512;

 private:
  void check_elem(int a) const {
    if (a < 0 || a >= order_) fail(Errc::invalid_argument, "element index out of range");
  }

  int locate_identity() const {
    for (long long e = 0; e < order_; ++e) {
      bool ok = true;
      for (long long b = 0; b < order_ && ok; ++b)
        ok = table_[static_cast<size_t>(e * order_ + b)] == b &&
             table_[static_cast<size_t>(b * order_ + e)] == b;
      if (ok) return static_cast<int>(e);
    }
    fail(Errc::invalid_argument, "table has no two-sided identity");
  }

  void build_inverses() {
    inv_.assign(static_cast<size_t>(order_), -1);
    for (long long a = 0; a < order_; ++a) {
      for (long long b = 0; b < order_; ++b) {
        if (table_[static_cast<size_t>(a * order_ + b)] == id_ &&
            table_[static_cast<size_t>(b * order_ + a)] == id_) {
          inv_[static_cast<size_t>(a)] = static_cast<int>(b);
          break;
        }
      }
      if (inv_[static_cast<size_t>(a)] < 0)
        fail(Errc::invalid_argument, "element has no two-sided inverse");
    }
  }

  void materialize_table() {
    table_.assign(static_cast<size_t>(order_ * order_), -1);
    for (long long a = 0; a < order_; ++a)
      for (long long b = 0; b < order_; ++b) {
        Perm p = perm_compose(perms_[static_cast<size_t>(a)], perms_[static_cast<size_t>(b)]);
        table_[static_cast<size_t>(a * order_ + b)] = index_.find(perm_key(p))->second;
      }
    build_inverses();
  }

  long long order_ = 1;
  int id_ = 0;
  long long modulus_ = 0;                   // modular backend when > 0
  std::vector<int> table_;                  // dense backend
  std::vector<int> inv_;
  std::vector<Perm> perms_;                 // permutation backend
  std::unordered_map<std::string, int> index_;
  std::vector<Perm> gen_perms_;
};

// ---------------------------------------------------------------------------
// GroupWord

// A finitely presented element of G: a product of generator powers. The empty
// word is the identity.
struct GroupWord {
  struct Letter {
    int gen = 0;
    long long exp = 1;
    bool operator==(const Letter&) const = default;
  };
  std::vector<Letter> letters;

  static GroupWord one() { return {}; }
  static GroupWord generator(int g, long long e = 1) {
    GroupWord w;
    if (e != 0) w.letters.push_back({g, e});
    return w;
  }
  // G = Z convention: the single generator to the k-th power.
  static GroupWord from_int(long long k) { return generator(0, k); }

  bool empty() const { return letters.empty(); }

  GroupWord inverse() const {
    GroupWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it)
      w.letters.push_back({it->gen, -it->exp});
    return w;
  }

  GroupWord operator*(const GroupWord& o) const {
    GroupWord w = *this;
    for (const auto& l : o.letters) w.letters.push_back(l);
    return w;
  }

  bool operator==(const GroupWord&) const = default;

  std::string str() const {
    if (letters.empty()) return "e";
    std::string s;
    for (size_t i = 0; i < letters.size(); ++i) {
      if (i) s.push_back('*');
      s += "g" + std::to_string(letters[i].gen);
      if (letters[i].exp != 1) s += "^" + std::to_string(letters[i].exp);
    }
    return s;
  }

  static GroupWord parse(const std::string& s) {
    GroupWord w;
    if (s == "e" || s.empty()) return w;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, '*')) {
      if (tok.empty() || tok[0] != 'g') fail(Errc::parse_error, "bad group word: " + s);
      auto caret = tok.find('^');
      Letter l;
      try {
        l.gen = std::stoi(tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
        l.exp = caret == std::string::npos ? 1 : std::stoll(tok.substr(caret + 1));
      } catch (const std::exception&) {
        fail(Errc::parse_error, "bad group word: " + s);
      }
      w.letters.push_back(l);
    }
    return w;
  }
};

// ---------------------------------------------------------------------------
// ProfinitePoint

// A point of the inverse limit truncated at finite depth. Whether y lies
// outside G is not decidable from finitely many residues; the flag records
// the user's assertion and downstream results are conditional on it.
struct ProfinitePoint {
  int depth = 0;
  std::vector<int> residues;  // residues[n-1] is an element index of Q_n
  bool not_in_G = false;
  bool operator==(const ProfinitePoint&) const = default;
};

// ---------------------------------------------------------------------------
// QuotientChain

class QuotientChain {
 public:
  // Q_n = Z/p_n with the generator mapping to 1 mod p_n. Periods must be
  // strictly increasing and each must divide the next.
  static QuotientChain cyclic(const std::vector<long long>& periods) {
    if (periods.empty()) fail(Errc::invalid_chain, "no periods");
    for (size_t i = 0; i < periods.size(); ++i) {
      if (periods[i] < 1) fail(Errc::invalid_chain, "periods must be positive");
      if (i > 0) {
        if (periods[i] <= periods[i - 1])
          fail(Errc::invalid_chain, "periods must be strictly increasing");
        if (periods[i] % periods[i - 1] != 0)
          fail(Errc::invalid_chain, "each period must divide the next");
      }
    }
    QuotientChain c;
    c.periods_ = periods;
    for (long long p : periods) c.levels_.push_back(FiniteGroup::cyclic(p));
    for (size_t n = 1; n < periods.size(); ++n) {
      std::vector<int> pr(static_cast<size_t>(periods[n]));
      for (long long a = 0; a < periods[n]; ++a)
        pr[static_cast<size_t>(a)] = static_cast<int>(a % periods[n - 1]);
      c.proj_.push_back(std::move(pr));
    }
    c.gens_.push_back({});
    for (long long p : periods) c.gens_[0].push_back(p == 1 ? 0 : 1);
    c.finish_validation();
    return c;
  }

  // Explicit tower. proj[k] maps elements of level k+2 down to level k+1
  // (0-based storage for the 1-based levels). gens[g][n-1] is the image of
  // abstract generator g in Q_n.
  static QuotientChain from_levels(std::vector<FiniteGroup> levels,
                                   std::vector<std::vector<int>> proj,
                                   std::vector<std::vector<int>> gens) {
    if (levels.empty()) fail(Errc::invalid_chain, "no levels");
    if (proj.size() + 1 != levels.size())
      fail(Errc::invalid_chain, "need one projection per consecutive level pair");
    QuotientChain c;
    c.levels_ = std::move(levels);
    c.proj_ = std::move(proj);
    c.gens_ = std::move(gens);
    c.finish_validation();
    return c;
  }

  // Subdirect-product tower for a free group: level n is the subgroup of
  // K_1 x ... x K_n generated by the cumulative generator images.
  // factor_gens[n][g] is the image of generator g in factor K_{n+1}.
  static QuotientChain product_tower(const std::vector<std::vector<Perm>>& factor_gens) {
    if (factor_gens.empty()) fail(Errc::invalid_chain, "no factors");
    const size_t ngens = factor_gens[0].size();
    for (const auto& f : factor_gens)
      if (f.size() != ngens) fail(Errc::invalid_chain, "generator count mismatch across factors");

    std::vector<FiniteGroup> levels;
    std::vector<std::vector<int>> proj;
    std::vector<std::vector<int>> gens(ngens);
    std::vector<size_t> degree_prefix{0};
    std::vector<Perm> cumulative(ngens);  // current concatenated images

    for (size_t n = 0; n < factor_gens.size(); ++n) {
      for (size_t g = 0; g < ngens; ++g) {
        const Perm& img = factor_gens[n][g];
        for (auto v : img)
          cumulative[g].push_back(static_cast<std::uint16_t>(v + degree_prefix.back()));
      }
      degree_prefix.push_back(degree_prefix.back() + factor_gens[n][0].size());
      FiniteGroup q = FiniteGroup::from_generators(cumulative);
      if (n > 0) {
        const FiniteGroup& below = levels.back();
        std::vector<int> pr(static_cast<size_t>(q.order()));
        for (long long a = 0; a < q.order(); ++a) {
          const Perm& full = q.perm_of(static_cast<int>(a));
          Perm restricted(full.begin(), full.begin() + static_cast<long long>(degree_prefix[n]));
          auto idx = below.find_perm(restricted);
          if (!idx) fail(Errc::invalid_chain, "projection leaves the lower level");
          pr[static_cast<size_t>(a)] = *idx;
        }
        proj.push_back(std::move(pr));
      }
      for (size_t g = 0; g < ngens; ++g) {
        auto idx = q.find_perm(cumulative[g]);
        gens[g].push_back(*idx);
      }
      levels.push_back(std::move(q));
    }
    return from_levels(std::move(levels), std::move(proj), std::move(gens));
  }

  int depth() const { return static_cast<int>(levels_.size()); }
  const FiniteGroup& level(int n) const {
    check_level(n);
    return levels_[static_cast<size_t>(n - 1)];
  }
  long long level_order(int n) const { return level(n).order(); }

  int proj_down(int n, int a) const {  // Q_n -> Q_{n-1}, n >= 2
    if (n < 2 || n > depth()) fail(Errc::level_out_of_range, "proj_down level out of range");
    return proj_[static_cast<size_t>(n - 2)][static_cast<size_t>(a)];
  }

  int num_generators() const { return static_cast<int>(gens_.size()); }
  int generator_image(int g, int n) const {
    check_level(n);
    if (g < 0 || g >= num_generators()) fail(Errc::invalid_argument, "no such generator");
    return gens_[static_cast<size_t>(g)][static_cast<size_t>(n - 1)];
  }

  bool is_cyclic() const { return !periods_.empty(); }
  const std::vector<long long>& periods() const {
    if (!is_cyclic()) fail(Errc::invalid_argument, "chain is not cyclic");
    return periods_;
  }

  // pi_n of a group word, via the generator-image homomorphism.
  int project(const GroupWord& w, int n) const {
    const FiniteGroup& q = level(n);
    int acc = q.id();
    for (const auto& l : w.letters)
      acc = q.mul(acc, q.pow(generator_image(l.gen, n), l.exp));
    return acc;
  }

  // A_n: the kernel of Q_n -> Q_{n-1} minus the identity (Q_0 trivial, so
  // A_1 is all of Q_1 minus the identity).
  std::vector<int> level_labels(int n) const {
    const FiniteGroup& q = level(n);
    std::vector<int> out;
    for (int a = 0; a < q.order(); ++a) {
      if (a == q.id()) continue;
      if (n == 1 || proj_down(n, a) == level(n - 1).id()) out.push_back(a);
    }
    return out;
  }

  bool is_label(int n, int a) const {
    const FiniteGroup& q = level(n);
    if (a < 0 || a >= q.order() || a == q.id()) return false;
    return n == 1 || proj_down(n, a) == level(n - 1).id();
  }

  // pi_n(g) * a * pi_n(g)^-1; the kernel is normal so the result is a label.
  int conjugate_label(const GroupWord& g, int n, int a) const {
    if (!is_label(n, a)) fail(Errc::invalid_label, "not a level label");
    const FiniteGroup& q = level(n);
    int c = project(g, n);
    return q.mul(q.mul(c, a), q.inv(c));
  }

  // Some C in A_{m+1} moved by conjugation with g, if one exists.
  std::optional<int> chain_condition_witness(const GroupWord& g, int m) const {
    if (m + 1 > depth()) fail(Errc::level_out_of_range, "chain condition needs level m+1");
    for (int a : level_labels(m + 1))
      if (conjugate_label(g, m + 1, a) != a) return a;
    return std::nullopt;
  }

  // Lifts in Q_n of an element of Q_{n-1} (all of Q_1 for n = 1).
  const std::vector<int>& fiber(int n, int below) const {
    check_level(n);
    return fibers_[static_cast<size_t>(n - 1)][static_cast<size_t>(n == 1 ? 0 : below)];
  }

  // q_1 uniform, then each q_n uniform among lifts of q_{n-1}.
  ProfinitePoint haar_sample(int d, SplitMix64& rng, bool assert_not_in_G = true) const {
    if (d < 1 || d > depth()) fail(Errc::level_out_of_range, "sample depth out of range");
    ProfinitePoint y;
    y.depth = d;
    y.not_in_G = assert_not_in_G;
    int below = 0;
    for (int n = 1; n <= d; ++n) {
      const auto& f = fiber(n, below);
      below = f[static_cast<size_t>(rng.below(f.size()))];
      y.residues.push_back(below);
    }
    return y;
  }

  void validate_point(const ProfinitePoint& y) const {
    if (y.depth < 1 || y.depth > depth()) fail(Errc::level_out_of_range, "point depth out of range");
    if (static_cast<int>(y.residues.size()) != y.depth)
      fail(Errc::invalid_argument, "residue count != depth");
    for (int n = 1; n <= y.depth; ++n) {
      int r = y.residues[static_cast<size_t>(n - 1)];
      if (r < 0 || r >= level(n).order()) fail(Errc::invalid_argument, "residue out of range");
      if (n >= 2 && proj_down(n, r) != y.residues[static_cast<size_t>(n - 2)])
        fail(Errc::invalid_argument, "residues are not projection-compatible");
    }
  }

  // Shortest generator word with the prescribed image in Q_n (BFS over the
  // Cayley graph; deterministic tie-break by generator order, inverses last).
  GroupWord preimage_word(int n, int target) const {
    const FiniteGroup& q = level(n);
    if (target == q.id()) return GroupWord::one();
    std::vector<int> prev(static_cast<size_t>(q.order()), -1);
    std::vector<GroupWord::Letter> step(static_cast<size_t>(q.order()));
    std::vector<int> queue{q.id()};
    prev[static_cast<size_t>(q.id())] = q.id();
    for (size_t head = 0; head < queue.size(); ++head) {
      int cur = queue[head];
      for (int g = 0; g < num_generators(); ++g) {
        for (long long e : {1ll, -1ll}) {
          int img = generator_image(g, n);
          int nxt = q.mul(cur, e == 1 ? img : q.inv(img));
          if (prev[static_cast<size_t>(nxt)] < 0) {
            prev[static_cast<size_t>(nxt)] = cur;
            step[static_cast<size_t>(nxt)] = {g, e};
            if (nxt == target) {
              std::vector<GroupWord::Letter> letters;
              for (int at = nxt; at != q.id(); at = prev[static_cast<size_t>(at)])
                letters.push_back(step[static_cast<size_t>(at)]);
              GroupWord w;
              w.letters.assign(letters.rbegin(), letters.rend());
              return w;
            }
            queue.push_back(nxt);
          }
        }
      }
    }
    fail(Errc::no_alignment, "target not in the generated image");
  }

  std::string describe() const {
    std::string s;
    for (int n = 1; n <= depth(); ++n) {
      if (n > 1) s += " <- ";
      s += "Q" + std::to_string(n) + "(order " + std::to_string(level_order(n)) + ")";
    }
    return s;
  }

 private:
  void check_level(int n) const {
    if (n < 1 || n > depth()) fail(Errc::level_out_of_range, "level out of range");
  }

  void finish_validation() {
    // generator images exist and are projection-compatible
    for (const auto& g : gens_) {
      if (g.size() != levels_.size())
        fail(Errc::invalid_chain, "generator image missing at some level");
      for (int n = 2; n <= depth(); ++n)
        if (proj_down(n, g[static_cast<size_t>(n - 1)]) != g[static_cast<size_t>(n - 2)])
          fail(Errc::invalid_chain, "generator images are not projection-compatible");
    }
    // projections are surjective homomorphisms; build fibers along the way
    fibers_.clear();
    fibers_.push_back({std::vector<int>{}});
    for (int a = 0; a < levels_[0].order(); ++a) fibers_[0][0].push_back(a);
    for (int n = 2; n <= depth(); ++n) {
      const FiniteGroup& hi = levels_[static_cast<size_t>(n - 1)];
      const FiniteGroup& lo = levels_[static_cast<size_t>(n - 2)];
      const auto& pr = proj_[static_cast<size_t>(n - 2)];
      if (static_cast<long long>(pr.size()) != hi.order())
        fail(Errc::invalid_chain, "projection table size mismatch");
      std::vector<std::vector<int>> fib(static_cast<size_t>(lo.order()));
      for (long long a = 0; a < hi.order(); ++a) {
        int v = pr[static_cast<size_t>(a)];
        if (v < 0 || v >= lo.order()) fail(Errc::invalid_chain, "projection image out of range");
        fib[static_cast<size_t>(v)].push_back(static_cast<int>(a));
      }
      for (const auto& f : fib)
        if (f.empty()) fail(Errc::invalid_chain, "projection is not surjective");
      if (pr[static_cast<size_t>(hi.id())] != lo.id())
        fail(Errc::invalid_chain, "projection does not preserve identity");
      // homomorphism spot-check is exhaustive for small levels
      if (hi.order() <= 512) {
        for (int a = 0; a < hi.order(); ++a)
          for (int b = 0; b < hi.order(); ++b)
            if (pr[static_cast<size_t>(hi.mul(a, b))] !=
                lo.mul(pr[static_cast<size_t>(a)], pr[static_cast<size_t>(b)]))
              fail(Errc::invalid_chain, "projection is not a homomorphism");
      } else {
        SplitMix64 rng(0xC0FFEEull + static_cast<std::uint64_t>(n));
        for (int t = 0; t < 4096; ++t) {
          int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(hi.order())));
          int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(hi.order())));
          if (pr[static_cast<size_t>(hi.mul(a, b))] !=
              lo.mul(pr[static_cast<size_t>(a)], pr[static_cast<size_t>(b)]))
            fail(Errc::invalid_chain, "projection is not a homomorphism");
        }
      }
      fibers_.push_back(std::move(fib));
    }
  }

  std::vector<FiniteGroup> levels_;
  std::vector<std::vector<int>> proj_;
  std::vector<std::vector<int>> gens_;
  std::vector<std::vector<std::vector<int>>> fibers_;  // fibers_[n-1][below]
  std::vector<long long> periods_;
};

using ChainPtr = std::shared_ptr<const QuotientChain>;

// ---------------------------------------------------------------------------
// spec-facing free functions

inline QuotientChain cyclic_chain(const std::vector<long long>& periods) {
  return QuotientChain::cyclic(periods);
}
inline int project(const QuotientChain& c, const GroupWord& g, int n) {
  return c.project(g, n);
}
inline std::vector<int> level_labels(const QuotientChain& c, int n) {
  return c.level_labels(n);
}
inline int conjugate_label(const QuotientChain& c, const GroupWord& g, int n, int a) {
  return c.conjugate_label(g, n, a);
}
inline std::optional<int> verify_chain_condition(const QuotientChain& c,
                                                 const GroupWord& g, int m) {
  return c.chain_condition_witness(g, m);
}
inline ProfinitePoint haar_sample(const QuotientChain& c, int depth, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return c.haar_sample(depth, rng);
}

// ---------------------------------------------------------------------------
// canned towers for the free group F2

namespace towers {

inline Perm s3_t01() { return {1, 0, 2}; }
inline Perm s3_t02() { return {2, 1, 0}; }
inline Perm s3_t12() { return {0, 2, 1}; }
inline Perm s3_c012() { return {1, 2, 0}; }
inline Perm s3_c021() { return {2, 0, 1}; }
inline Perm s4_c0123() { return {1, 2, 3, 0}; }
inline Perm s4_t01() { return {1, 0, 2, 3}; }
inline Perm a4_c012() { return {1, 2, 0, 3}; }
inline Perm a4_c123() { return {0, 2, 3, 1}; }
inline Perm d5_r() { return {1, 2, 3, 4, 0}; }
inline Perm d5_s() { return {0, 4, 3, 2, 1}; }

}  // namespace towers

// Two-level S3 x S4 tower: small enough for exhaustive equivariance sweeps.
inline QuotientChain f2_s3_s4_tower() {
  using namespace towers;
  return QuotientChain::product_tower({{s3_t01(), s3_c012()},
                                       {s4_c0123(), s4_t01()}});
}

// Five-level tower whose per-level kernels all contain labels moved by
// conjugation; factors are S3, S4, D5, A4, S3 with per-level twists so no
// level collapses into an earlier one.
inline QuotientChain f2_witness_tower() {
  using namespace towers;
  return QuotientChain::product_tower({{s3_t01(), s3_c012()},
                                       {s4_c0123(), s4_t01()},
                                       {d5_r(), d5_s()},
                                       {a4_c012(), a4_c123()},
                                       {s3_c012(), s3_t01()}});
}

// Z/2 <- D8 tower (sign of a symmetry vs. the full octagon group); the level-2
// kernel is the rotation subgroup, which reflections move.
inline QuotientChain z2_d8_tower() {
  FiniteGroup d8 = FiniteGroup::dihedral(8);
  FiniteGroup z2 = FiniteGroup::cyclic(2);
  // quotient by the rotation subgroup: rotations -> 0, reflections -> 1
  std::vector<int> pr(static_cast<size_t>(d8.order()));
  for (int a = 0; a < d8.order(); ++a) {
    const Perm& p = d8.perm_of(a);
    bool rotation = true;
    int d = p[0] % 8;
    for (int i = 0; i < 8 && rotation; ++i)
      rotation = p[static_cast<size_t>(i)] == (i + d) % 8;
    pr[static_cast<size_t>(a)] = rotation ? 0 : 1;
  }
  Perm rperm(8), sperm(8);
  for (int i = 0; i < 8; ++i) {
    rperm[static_cast<size_t>(i)] = static_cast<std::uint16_t>((i + 1) % 8);
    sperm[static_cast<size_t>(i)] = static_cast<std::uint16_t>((8 - i) % 8);
  }
  int ridx = *d8.find_perm(rperm);
  int sidx = *d8.find_perm(sperm);
  // generators: g0 = rotation (sign 0), g1 = reflection (sign 1)
  return QuotientChain::from_levels({z2, d8}, {pr}, {{0, ridx}, {1, sidx}});
}

}  // namespace toeplitz
