#pragma once
// Sliding block codes (the local-rule form every subshift conjugacy takes),
// block permutations acting on p-aligned blocks, derived block maps with
// conflict certificates, and bounded-radius conjugacy search.

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "toeplitz/common.hpp"
#include "toeplitz/sigma_lab.hpp"
#include "toeplitz/toeplitz_core.hpp"

namespace toeplitz {

// ---------------------------------------------------------------------------
// BlockCode

// A radius-r local rule 2^(2r+1) -> 2. Table entries are indexed by the
// block read MSB-first, so table[0] is the image of the all-zero block.
class BlockCode {
 public:
  BlockCode() : radius_(0), table_("01") {}

  BlockCode(int radius, std::string table) : radius_(radius), table_(std::move(table)) {
    if (radius_ < 0) fail(Errc::invalid_argument, "radius must be >= 0");
    if (static_cast<long long>(table_.size()) != (1ll << (2 * radius_ + 1)))
      fail(Errc::invalid_argument, "table must have 2^(2r+1) entries");
    for (char c : table_)
      if (c != kZero && c != kOne) fail(Errc::invalid_argument, "table entries must be bits");
  }

  static BlockCode identity() { return BlockCode(0, "01"); }
  static BlockCode flip() { return BlockCode(0, "10"); }
  // f(x)(i) = x(i - 1): a radius-1 code projecting onto the left neighbour
  static BlockCode shift_forward() { return BlockCode(1, "00001111"); }
  // f(x)(i) = x(i + 1)
  static BlockCode shift_backward() { return BlockCode(1, "01010101"); }

  int radius() const { return radius_; }
  const std::string& table() const { return table_; }
  bool operator==(const BlockCode&) const = default;

  Cell apply_at(const WordView& w, long long i) const {
    long long idx = 0;
    for (long long j = i - radius_; j <= i + radius_; ++j) {
      Cell c = w(j);
      if (!is_known(c)) return kUnknown;
      idx = (idx << 1) | cell_bit(c);
    }
    return table_[static_cast<size_t>(idx)];
  }

  // Output shrinks by r on each side; windows shorter than 2r+1 map to an
  // empty window.
  Window apply(const Window& w) const {
    if (w.size() < 2 * radius_ + 1) return Window{w.start + radius_, ""};
    Window out{w.start + radius_, std::string(static_cast<size_t>(w.size() - 2 * radius_), kUnknown)};
    for (long long i = out.start; i < out.end(); ++i) {
      long long idx = 0;
      bool known = true;
      for (long long j = i - radius_; j <= i + radius_ && known; ++j) {
        Cell c = w.at(j);
        known = is_known(c);
        idx = (idx << 1) | cell_bit(c);
      }
      if (known) out.cells[static_cast<size_t>(i - out.start)] = table_[static_cast<size_t>(idx)];
    }
    return out;
  }

  WordView applied_view(const WordView& w) const {
    BlockCode self = *this;
    return WordView([self, w](long long i) { return self.apply_at(w, i); });
  }

 private:
  int radius_;
  std::string table_;
};

// compose(f, g) behaves as f after g; radius adds.
inline BlockCode compose(const BlockCode& f, const BlockCode& g) {
  int r = f.radius() + g.radius();
  long long width = 2ll * r + 1;
  std::string table(static_cast<size_t>(1ll << width), kZero);
  for (long long u = 0; u < (1ll << width); ++u) {
    // inner pass: g applied across the middle 2r_f+1 cells
    long long mid = 0;
    for (int pos = g.radius(); pos < width - g.radius(); ++pos) {
      long long idx = 0;
      for (int j = pos - g.radius(); j <= pos + g.radius(); ++j)
        idx = (idx << 1) | ((u >> (width - 1 - j)) & 1);
      mid = (mid << 1) | cell_bit(g.table()[static_cast<size_t>(idx)]);
    }
    table[static_cast<size_t>(u)] = f.table()[static_cast<size_t>(mid)];
  }
  return BlockCode(r, std::move(table));
}

// Minimal-radius equivalent code, when the table ignores its outermost cells.
inline BlockCode reduced(const BlockCode& c) {
  BlockCode cur = c;
  while (cur.radius() > 0) {
    long long width = 2ll * cur.radius() + 1;
    std::string inner(static_cast<size_t>(1ll << (width - 2)), '?');
    bool reducible = true;
    for (long long u = 0; u < (1ll << width) && reducible; ++u) {
      long long mid = (u >> 1) & ((1ll << (width - 2)) - 1);
      char v = cur.table()[static_cast<size_t>(u)];
      if (inner[static_cast<size_t>(mid)] == '?') inner[static_cast<size_t>(mid)] = v;
      else reducible = inner[static_cast<size_t>(mid)] == v;
    }
    if (!reducible) break;
    cur = BlockCode(cur.radius() - 1, std::move(inner));
  }
  return cur;
}

// ---------------------------------------------------------------------------
// block <-> index helpers (blocks are bitstrings read MSB-first)

inline long long block_to_index(const std::string& block) {
  long long idx = 0;
  for (char c : block) idx = (idx << 1) | cell_bit(c);
  return idx;
}

inline std::string index_to_block(long long idx, long long p) {
  std::string b(static_cast<size_t>(p), kZero);
  for (long long j = 0; j < p; ++j)
    b[static_cast<size_t>(p - 1 - j)] = bit_cell(static_cast<int>((idx >> j) & 1));
  return b;
}

// ---------------------------------------------------------------------------
// BlockPermutation (dense; feasible for p <= 20)

struct BlockPermutation {
  long long p = 1;
  std::vector<std::uint32_t> images;  // images[b] = image block index

  bool is_bijection() const {
    std::vector<bool> seen(images.size(), false);
    for (auto v : images) {
      if (v >= images.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }
  bool operator==(const BlockPermutation&) const = default;
};

inline BlockPermutation make_block_permutation(long long p, std::vector<std::uint32_t> images) {
  if (p < 1 || p > 20) fail(Errc::invalid_argument, "dense block permutations need 1 <= p <= 20");
  BlockPermutation bp{p, std::move(images)};
  if (static_cast<long long>(bp.images.size()) != (1ll << p))
    fail(Errc::invalid_argument, "permutation needs 2^p images");
  if (!bp.is_bijection()) fail(Errc::invalid_argument, "images are not a bijection");
  return bp;
}

inline BlockPermutation identity_permutation(long long p) {
  std::vector<std::uint32_t> img(static_cast<size_t>(1ll << p));
  for (size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint32_t>(i);
  return make_block_permutation(p, std::move(img));
}

inline std::string rotate_block_left(const std::string& b) {
  if (b.size() <= 1) return b;
  return b.substr(1) + b[0];
}

// The block rotation sigma with sigma(b)[j] = b[(j+1) mod p]: applied to the
// p-aligned blocks of a word shifted by i in Per_p, it lands on the word
// shifted by i+1, which is what chains neighbouring indices in the A_{p,i}
// bookkeeping.
inline BlockPermutation cyclic_block_shift(long long p) {
  std::vector<std::uint32_t> img(static_cast<size_t>(1ll << p));
  for (long long b = 0; b < (1ll << p); ++b)
    img[static_cast<size_t>(b)] =
        static_cast<std::uint32_t>(block_to_index(rotate_block_left(index_to_block(b, p))));
  return make_block_permutation(p, std::move(img));
}

// Each complete p-block on the phase grid is replaced by its image; edge
// blocks are trimmed and blocks containing unknown map to all-unknown.
inline Window apply_block_permutation(const BlockPermutation& pi, const Window& w,
                                      long long phase) {
  long long first = w.start + pmod(phase - w.start, pi.p);
  long long last = first;
  while (last + pi.p <= w.end()) last += pi.p;
  if (last <= first) return Window{first, ""};
  Window out{first, std::string(static_cast<size_t>(last - first), kUnknown)};
  for (long long s = first; s < last; s += pi.p) {
    std::string block = w.cells.substr(static_cast<size_t>(s - w.start), static_cast<size_t>(pi.p));
    if (block.find(kUnknown) != std::string::npos) continue;
    std::string img = index_to_block(pi.images[static_cast<size_t>(block_to_index(block))], pi.p);
    std::copy(img.begin(), img.end(), out.cells.begin() + static_cast<size_t>(s - first));
  }
  return out;
}

// Lazy view of pi-hat applied to (x+i), i.e. to the word j -> x(j+i), with
// blocks [kp, (k+1)p).
inline WordView block_image_view(const BlockPermutation& pi, const WordView& x, long long i) {
  auto p = pi.p;
  auto images = pi.images;  // by value: views outlive their permutation
  return WordView([x, i, p, images](long long j) -> Cell {
    long long k = j >= 0 ? j / p : -((-j + p - 1) / p);
    long long base = k * p;
    long long idx = 0;
    for (long long t = 0; t < p; ++t) {
      Cell c = x(i + base + t);
      if (!is_known(c)) return kUnknown;
      idx = (idx << 1) | cell_bit(c);
    }
    long long img = images[static_cast<size_t>(idx)];
    return bit_cell(static_cast<int>((img >> (p - 1 - (j - base))) & 1));
  });
}

// All of Sym(2^p); exhaustive mode is limited to p <= 3 (2, 24, 40320
// permutations) -- beyond that the factorial is out of reach and the
// certificate route below is the supported path.
inline std::vector<BlockPermutation> enumerate_sym(long long p) {
  if (p < 1 || p > 3)
    fail(Errc::unsupported_period, "exhaustive Sym(2^p) enumeration supports p <= 3");
  std::vector<std::uint32_t> img(static_cast<size_t>(1ll << p));
  for (size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint32_t>(i);
  std::vector<BlockPermutation> out;
  do {
    out.push_back(BlockPermutation{p, img});
  } while (std::next_permutation(img.begin(), img.end()));
  return out;
}

// ---------------------------------------------------------------------------
// partial block maps and conflict certificates

struct BlockConflict {
  long long p = 0;
  long long i = 0;
  std::string source;
  std::string target_a, target_b;
  long long k_a = 0, k_b = 0;
  std::string kind;  // "functional" or "injective"
};

struct PartialBlockMap {
  long long p = 0;
  std::map<std::string, std::string> pairs;

  std::uint64_t id() const {  // stable fingerprint for reports
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [a, b] : pairs) {
      for (char c : a) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
      for (char c : b) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
    }
    return h;
  }
};

struct BlockMapBuild {
  std::optional<PartialBlockMap> map;
  std::optional<BlockConflict> conflict;
  long long pairs_seen = 0;  // fully determined (source, target) block pairs
};

// Observe the block pairs (src[i+kp, i+(k+1)p), dst[i+kp, i+(k+1)p)) for k in
// [k_lo, k_hi]; pairs with unknown cells on either side are skipped. Returns
// the partial map, or a certificate for the first functional/injectivity
// conflict.
inline BlockMapBuild build_block_map(const WordView& src, const WordView& dst,
                                     long long p, long long i, long long k_lo,
                                     long long k_hi) {
  BlockMapBuild out;
  PartialBlockMap map;
  map.p = p;
  std::map<std::string, std::pair<std::string, long long>> inverse;
  std::map<std::string, long long> first_k;
  for (long long k = k_lo; k <= k_hi; ++k) {
    std::string s(static_cast<size_t>(p), kUnknown), t(static_cast<size_t>(p), kUnknown);
    bool known = true;
    for (long long u = 0; u < p && known; ++u) {
      s[static_cast<size_t>(u)] = src(i + k * p + u);
      t[static_cast<size_t>(u)] = dst(i + k * p + u);
      known = is_known(s[static_cast<size_t>(u)]) && is_known(t[static_cast<size_t>(u)]);
    }
    if (!known) continue;
    ++out.pairs_seen;
    auto it = map.pairs.find(s);
    if (it != map.pairs.end()) {
      if (it->second != t) {
        out.conflict = BlockConflict{p, i, s, it->second, t, first_k[s], k, "functional"};
        return out;
      }
      continue;
    }
    auto inv = inverse.find(t);
    if (inv != inverse.end() && inv->second.first != s) {
      out.conflict = BlockConflict{p, i, s, t, t, inv->second.second, k, "injective"};
      out.conflict->target_a = inv->second.first;  // the other source
      return out;
    }
    map.pairs.emplace(s, t);
    inverse.emplace(t, std::make_pair(s, k));
    first_k.emplace(s, k);
  }
  out.map = std::move(map);
  return out;
}

// Re-application on fresh blocks: stored pairs must reproduce the target
// exactly; unseen sources extend the map and are checked for consistency.
inline bool verify_block_map(const PartialBlockMap& map, const WordView& src,
                             const WordView& dst, long long i, long long k_lo,
                             long long k_hi, long long* checked = nullptr) {
  PartialBlockMap ext = map;
  std::set<std::string> targets;
  for (const auto& [a, b] : ext.pairs) {
    if (targets.count(b)) return false;
    targets.insert(b);
  }
  long long n = 0;
  for (long long k = k_lo; k <= k_hi; ++k) {
    std::string s(static_cast<size_t>(map.p), kUnknown), t(static_cast<size_t>(map.p), kUnknown);
    bool known = true;
    for (long long u = 0; u < map.p && known; ++u) {
      s[static_cast<size_t>(u)] = src(i + k * map.p + u);
      t[static_cast<size_t>(u)] = dst(i + k * map.p + u);
      known = is_known(s[static_cast<size_t>(u)]) && is_known(t[static_cast<size_t>(u)]);
    }
    if (!known) continue;
    ++n;
    auto it = ext.pairs.find(s);
    if (it != ext.pairs.end()) {
      if (it->second != t) return false;
    } else {
      if (targets.count(t)) return false;
      ext.pairs.emplace(s, t);
      targets.insert(t);
    }
  }
  if (checked) *checked = n;
  return true;
}

// Complete a partial injection to a bijection: unmatched sources in
// increasing order pair with unmatched targets in increasing order. The
// choice is arbitrary in substance, so it is made deterministic.
inline BlockPermutation complete_to_permutation(const PartialBlockMap& map) {
  if (map.p > 16) fail(Errc::invalid_argument, "dense completion supports p <= 16");
  long long size = 1ll << map.p;
  std::vector<std::uint32_t> img(static_cast<size_t>(size), UINT32_MAX);
  std::vector<bool> used(static_cast<size_t>(size), false);
  for (const auto& [s, t] : map.pairs) {
    img[static_cast<size_t>(block_to_index(s))] =
        static_cast<std::uint32_t>(block_to_index(t));
    used[static_cast<size_t>(block_to_index(t))] = true;
  }
  long long next = 0;
  for (long long b = 0; b < size; ++b) {
    if (img[static_cast<size_t>(b)] != UINT32_MAX) continue;
    while (used[static_cast<size_t>(next)]) ++next;
    img[static_cast<size_t>(b)] = static_cast<std::uint32_t>(next);
    used[static_cast<size_t>(next)] = true;
  }
  return make_block_permutation(map.p, std::move(img));
}

struct DerivedPermutation {
  std::optional<BlockPermutation> pi;
  std::optional<BlockConflict> conflict;
  long long pairs_seen = 0;
};

// Claim-1 style derivation: observe p-blocks of x+i against its code image
// y+i; the image block depends only on the source block when (i-r, i+r) sits
// inside Per_p(x), so any conflict certifies a violated precondition.
inline DerivedPermutation derive_block_permutation(const BlockCode& code, const WordView& x,
                                                   long long p, long long i, long long span) {
  DerivedPermutation out;
  WordView y = code.applied_view(x);
  long long k_hi = span / p;
  BlockMapBuild build = build_block_map(x, y, p, i, -k_hi, k_hi);
  out.pairs_seen = build.pairs_seen;
  if (build.conflict) {
    out.conflict = build.conflict;
    return out;
  }
  out.pi = complete_to_permutation(*build.map);
  return out;
}

// ---------------------------------------------------------------------------
// code image of a skeleton

// The stage structure a radius-r code forces on the image word: a class
// c mod p_n is filled when the code output is the same for every completion
// of the still-undetermined cells around it. Sound -- whatever the deeper
// truth fills in, the image value is that constant -- and possibly thinner
// than the true image structure.
inline ToeplitzSkeleton skeleton_image(const ToeplitzSkeleton& sk, const BlockCode& code) {
  const int r = code.radius();
  const int width = 2 * r + 1;
  std::vector<ToeplitzSkeleton::Stage> out;
  std::vector<Cell> below(1, kUnknown);  // values at level <= n-1, unrolled
  long long p_below = 1;
  for (const auto& st : sk.stages()) {
    long long p = st.period;
    std::vector<Cell> cur(static_cast<size_t>(p));
    for (long long c = 0; c < p; ++c)
      cur[static_cast<size_t>(c)] = below[static_cast<size_t>(c % p_below)];
    for (const auto& [res, v] : st.fill) cur[static_cast<size_t>(res)] = v;
    ToeplitzSkeleton::Stage img{p, {}};
    for (long long c = 0; c < p; ++c) {
      bool covered = false;
      for (const auto& prev : out)
        if (prev.fill.count(pmod(c, prev.period))) covered = true;
      if (covered) continue;
      std::vector<int> open;  // offsets of undetermined cells in the block
      long long base = 0;
      for (int j = 0; j < width; ++j) {
        Cell cell = cur[static_cast<size_t>(pmod(c - r + j, p))];
        if (!is_known(cell)) open.push_back(j);
        base = (base << 1) | cell_bit(cell);
      }
      Cell forced = kUnknown;
      bool constant = true;
      for (long long m = 0; m < (1ll << open.size()) && constant; ++m) {
        long long idx = base;
        for (size_t u = 0; u < open.size(); ++u)
          if ((m >> u) & 1) idx |= 1ll << (width - 1 - open[u]);
        Cell v = code.table()[static_cast<size_t>(idx)];
        if (forced == kUnknown) forced = v;
        else constant = forced == v;
      }
      if (constant && is_known(forced)) img.fill[c] = forced;
    }
    out.push_back(std::move(img));
    below = std::move(cur);
    p_below = p;
  }
  return ToeplitzSkeleton(std::move(out));
}

// ---------------------------------------------------------------------------
// language ops on handles

inline LanguageSet language(const SubshiftHandle& S, int L, long long span) {
  return S.language(L, span);
}

inline LangCompare equal_up_to(const SubshiftHandle& S, const SubshiftHandle& T, int L,
                               long long span) {
  return compare_languages(S.language(L, span), T.language(L, span));
}

// ---------------------------------------------------------------------------
// bounded-radius conjugacy search

struct ConjugacyPair {
  BlockCode fwd, bwd;
  int L = 0;
  long long span = 0;
};

struct ConjugacySearch {
  std::optional<ConjugacyPair> pair;
  std::string note;
  long long candidates_tried = 0;
};

namespace detail {

// occurring fully-determined (2r+1)-blocks of a view over [-span, span]
inline std::vector<long long> occurring_blocks(const WordView& v, int r, long long span) {
  std::set<long long> occ;
  Window w = v.window(-span, span);
  long long width = 2ll * r + 1;
  for (long long h = w.start; h + width - 1 < w.end(); ++h) {
    long long idx = 0;
    bool known = true;
    for (long long j = 0; j < width && known; ++j) {
      Cell c = w.cells[static_cast<size_t>(h - w.start + j)];
      known = is_known(c);
      idx = (idx << 1) | cell_bit(c);
    }
    if (known) occ.insert(idx);
  }
  return {occ.begin(), occ.end()};
}

// unforced table entries carry 'X' so they stay distinguishable from
// unknown-input cells ('?') during verification
inline constexpr char kUnforced = 'X';

// Force the inverse table from (image -> source); returns nullopt on conflict.
inline std::optional<std::string> force_inverse(const WordView& src, const WordView& img,
                                                int r_b, long long span) {
  std::string table(static_cast<size_t>(1ll << (2 * r_b + 1)), kUnforced);
  Window iw = img.window(-span, span);
  Window sw = src.window(-span, span);
  for (long long j = iw.start + r_b; j < iw.end() - r_b; ++j) {
    Cell target = sw.at(j);
    if (!is_known(target)) continue;
    long long idx = 0;
    bool known = true;
    for (long long u = j - r_b; u <= j + r_b && known; ++u) {
      Cell c = iw.at(u);
      known = is_known(c);
      idx = (idx << 1) | cell_bit(c);
    }
    if (!known) continue;
    char& slot = table[static_cast<size_t>(idx)];
    if (slot == kUnforced) slot = target;
    else if (slot != target) return std::nullopt;
  }
  return table;
}

// Apply a partial table: '?' when an input cell is unknown, 'X' when the
// block has no forced entry.
inline Cell apply_partial_at(const std::string& table, int r, const WordView& w, long long i) {
  long long idx = 0;
  for (long long j = i - r; j <= i + r; ++j) {
    Cell c = w(j);
    if (!is_known(c)) return kUnknown;
    idx = (idx << 1) | cell_bit(c);
  }
  return table[static_cast<size_t>(idx)];
}

// Bounded-shift compatibility: some |j| <= range aligns u with v on every
// cell where both are determined, with at least one agreement seen. Genuine
// images of designated generators land shift-aligned; anything else is
// rejected, which keeps the search sound (it may only under-report).
inline bool shift_compatible(const WordView& u, const WordView& v, long long span,
                             long long range) {
  Window uw = u.window(-span, span);
  for (long long j = -range; j <= range; ++j) {
    long long seen = 0;
    bool ok = true;
    for (long long h = uw.start; h < uw.end() && ok; ++h) {
      Cell a = uw.at(h);
      if (!is_known(a)) continue;
      Cell b = v(h - j);
      if (!is_known(b)) continue;
      ++seen;
      ok = a == b;
    }
    if (ok && seen > 0) return true;
  }
  return false;
}

}  // namespace detail

// Exhaustive scan over forward tables (lexicographic; entries for blocks
// that never occur in the generator are pinned to 0), the inverse forced
// cell-by-cell from the image. Every returned pair has both round trips,
// both shift-alignment checks and the available language checks verified on
// the stated span. limit == 0 collects all passing pairs in table order.
inline std::vector<ConjugacyPair> conjugacy_scan(const SubshiftHandle& S,
                                                 const SubshiftHandle& T, int r_max, int L,
                                                 long long span, int workers,
                                                 long long align_range, size_t limit,
                                                 long long* tried_out = nullptr,
                                                 std::string* note_out = nullptr) {
  std::vector<ConjugacyPair> results;
  WordView xs = S.view();
  WordView xt = T.view();
  const LanguageSet& lang_t = T.language(L, span);
  std::atomic<long long> tried{0};

  for (int r_f = 0; r_f <= r_max && !(limit && results.size() >= limit); ++r_f) {
    auto occ = detail::occurring_blocks(xs, r_f, span);
    if (occ.empty()) continue;
    if (occ.size() > 24) {
      if (note_out) *note_out = "too many occurring blocks at radius " + std::to_string(r_f);
      continue;
    }
    const long long masks = 1ll << occ.size();
    const long long table_size = 1ll << (2 * r_f + 1);

    auto try_mask = [&](long long mask) -> std::optional<ConjugacyPair> {
      tried.fetch_add(1, std::memory_order_relaxed);
      std::string table(static_cast<size_t>(table_size), kZero);
      for (size_t j = 0; j < occ.size(); ++j)
        if ((mask >> (occ.size() - 1 - j)) & 1)
          table[static_cast<size_t>(occ[j])] = kOne;
      BlockCode fwd(r_f, table);
      WordView img = fwd.applied_view(xs);
      // language prune: determined image words must sit inside T's language
      if (lang_t.complete) {
        LanguageSet li = collect_language(img, L, span - r_f);
        for (const auto& w : li.words)
          if (!lang_t.words.count(w)) return std::nullopt;
      }
      for (int r_b = 0; r_b <= r_max; ++r_b) {
        auto forced = detail::force_inverse(xs, img, r_b, span);
        if (!forced) continue;
        long long margin = r_f + r_b;
        // round trip on T's generator: fwd(bwd(x_T)) == x_T wherever inputs
        // are determined; hitting an unforced table entry fails the
        // candidate instead of being skipped.
        bool ok = true;
        long long checked = 0;
        WordView bwd_img([forced = *forced, r_b, xt](long long h) {
          return detail::apply_partial_at(forced, r_b, xt, h);
        });
        for (long long h = -span + margin; h <= span - margin && ok; ++h) {
          Cell want = xt(h);
          if (!is_known(want)) continue;
          long long idx = 0;
          int state = 0;  // 0 known, 1 input-unknown, 2 unforced
          for (long long j = h - r_f; j <= h + r_f && state == 0; ++j) {
            Cell c = bwd_img(j);
            if (c == kUnknown) state = 1;
            else if (c == detail::kUnforced) state = 2;
            else idx = (idx << 1) | cell_bit(c);
          }
          if (state == 1) continue;  // truncation, not a mismatch
          if (state == 2) {
            ok = false;
            break;
          }
          ++checked;
          ok = fwd.table()[static_cast<size_t>(idx)] == want;
        }
        if (!ok || checked == 0) continue;
        // round trip on S's generator (holds by construction of the forcing;
        // re-checked as a guard)
        std::string bwd_table = *forced;
        for (char& c : bwd_table)
          if (c == detail::kUnforced) c = kZero;
        BlockCode bwd(r_b, bwd_table);
        WordView round = bwd.applied_view(img);
        bool rt = true;
        long long seen = 0;
        for (long long h = -span + margin; h <= span - margin && rt; ++h) {
          Cell a = round(h), b = xs(h);
          if (!is_known(a) || !is_known(b)) continue;
          ++seen;
          rt = a == b;
        }
        if (!rt || seen == 0) continue;
        // the image must actually land in T (and the preimage in S):
        // designated generators of related handles align up to a bounded
        // shift, which kills round-trip-only impostors like the identity
        // against a flipped subshift
        if (!detail::shift_compatible(img, xt, span - margin, align_range)) continue;
        if (!detail::shift_compatible(bwd.applied_view(xt), xs, span - margin, align_range))
          continue;
        return ConjugacyPair{fwd, bwd, L, span};
      }
      return std::nullopt;
    };

    // workers scan contiguous mask stripes; merging in stripe order keeps
    // the output in lexicographic table order regardless of scheduling
    int nw = std::max(1, workers);
    std::vector<std::vector<ConjugacyPair>> found(static_cast<size_t>(nw));
    std::vector<std::thread> pool;
    for (int t = 0; t < nw; ++t) {
      pool.emplace_back([&, t]() {
        long long lo = masks * t / nw, hi = masks * (t + 1) / nw;
        for (long long m = lo; m < hi; ++m) {
          if (auto pair = try_mask(m)) {
            found[static_cast<size_t>(t)].push_back(*pair);
            if (limit && found[static_cast<size_t>(t)].size() >= limit) return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& f : found)
      for (const auto& pair : f) {
        if (limit && results.size() >= limit) break;
        results.push_back(pair);
      }
  }
  if (tried_out) *tried_out = tried.load();
  return results;
}

// First (lexicographically least) pair found, if any. Sound, not complete:
// absence of a result is not a proof of non-conjugacy.
inline ConjugacySearch search_conjugacy(const SubshiftHandle& S, const SubshiftHandle& T,
                                        int r_max, int L, long long span,
                                        int workers = 1, long long align_range = 128) {
  ConjugacySearch result;
  auto pairs = conjugacy_scan(S, T, r_max, L, span, workers, align_range, 1,
                              &result.candidates_tried, &result.note);
  if (!pairs.empty()) result.pair = pairs.front();
  if (!result.pair && result.note.empty())
    result.note = "no pair found within radius " + std::to_string(r_max) +
                  "; absence is not a proof of non-conjugacy";
  return result;
}

}  // namespace toeplitz
