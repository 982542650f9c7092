#pragma once
// The sigma construction: a depth-bounded profinite point y and a label
// assignment z on the kernel alphabets A_n determine a Toeplitz word
//   sigma(y,z)(h) = z(pi_{n0}(y^-1 h)),  n0 = min{ n : pi_n(y) != pi_n(h) },
// together with the left/right actions, equivariance checks, the injectivity
// witness machinery, hole structure of the maximal equicontinuous factor,
// product-measure sampling, and stabilizer tests.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "toeplitz/common.hpp"
#include "toeplitz/group_chain.hpp"
#include "toeplitz/toeplitz_core.hpp"

namespace toeplitz {

// ---------------------------------------------------------------------------
// LabelAssignment

// z: one bit per label of each level up to depth; total on every level.
struct LabelAssignment {
  int depth = 0;
  std::vector<std::map<int, Cell>> bits;  // bits[n-1]: label element -> '0'/'1'

  Cell at(int n, int label) const {
    if (n < 1 || n > depth) fail(Errc::level_out_of_range, "label level out of range");
    auto it = bits[static_cast<size_t>(n - 1)].find(label);
    if (it == bits[static_cast<size_t>(n - 1)].end())
      fail(Errc::invalid_label, "label has no assigned bit");
    return it->second;
  }

  bool operator==(const LabelAssignment&) const = default;
};

inline void validate_assignment(const QuotientChain& chain, const LabelAssignment& z) {
  if (z.depth < 1 || z.depth > chain.depth())
    fail(Errc::level_out_of_range, "assignment depth out of range");
  if (static_cast<int>(z.bits.size()) != z.depth)
    fail(Errc::invalid_argument, "assignment level count != depth");
  for (int n = 1; n <= z.depth; ++n) {
    auto labels = chain.level_labels(n);
    const auto& level = z.bits[static_cast<size_t>(n - 1)];
    if (level.size() != labels.size())
      fail(Errc::invalid_argument, "assignment not total on level " + std::to_string(n));
    for (int a : labels) {
      auto it = level.find(a);
      if (it == level.end()) fail(Errc::invalid_argument, "missing label bit");
      if (it->second != kZero && it->second != kOne)
        fail(Errc::invalid_argument, "label bit must be 0 or 1");
    }
  }
}

enum class Properness { ProperSoFar, ImproperSoFar };

inline const char* to_string(Properness p) {
  return p == Properness::ProperSoFar ? "proper-so-far" : "improper-so-far";
}

// Finite depth cannot certify the infinitary condition; the verdict is
// explicitly depth-relative.
inline Properness is_proper(const LabelAssignment& z) {
  bool zero = false, one = false;
  for (const auto& lvl : z.bits)
    for (const auto& [a, v] : lvl) (v == kZero ? zero : one) = true;
  return zero && one ? Properness::ProperSoFar : Properness::ImproperSoFar;
}

// Both values occur among levels strictly above n (used by hole and witness
// arguments, which only consult the tail of z).
inline bool proper_below(const LabelAssignment& z, int n) {
  bool zero = false, one = false;
  for (int m = n + 1; m <= z.depth; ++m)
    for (const auto& [a, v] : z.bits[static_cast<size_t>(m - 1)])
      (v == kZero ? zero : one) = true;
  return zero && one;
}

// ---------------------------------------------------------------------------
// SigmaDatum

struct SigmaDatum {
  ChainPtr chain;
  ProfinitePoint y;
  LabelAssignment z;

  int depth() const { return y.depth; }
};

inline void validate_datum(const SigmaDatum& d) {
  if (!d.chain) fail(Errc::invalid_argument, "datum has no chain");
  d.chain->validate_point(d.y);
  validate_assignment(*d.chain, d.z);
  if (d.y.depth != d.z.depth) fail(Errc::invalid_argument, "y and z depth mismatch");
}

// ---------------------------------------------------------------------------
// sigma evaluation

struct SigmaValue {
  int n0 = 0;      // 0 means undetermined at this depth
  int label = -1;  // pi_{n0}(y^-1 h), an element of A_{n0}
  Cell value = kUnknown;
};

inline SigmaValue sigma_evaluate_full(const SigmaDatum& d, const GroupWord& h) {
  SigmaValue out;
  for (int n = 1; n <= d.depth(); ++n) {
    const FiniteGroup& q = d.chain->level(n);
    int hn = d.chain->project(h, n);
    int yn = d.y.residues[static_cast<size_t>(n - 1)];
    if (hn != yn) {
      out.n0 = n;
      out.label = q.mul(q.inv(yn), hn);
      out.value = d.z.at(n, out.label);
      return out;
    }
  }
  return out;  // pi_n(y) == pi_n(h) for all n <= depth: truncation signal
}

inline Cell sigma_evaluate(const SigmaDatum& d, const GroupWord& h) {
  return sigma_evaluate_full(d, h).value;
}

// Fast path for cyclic chains: h is an integer position.
inline SigmaValue sigma_evaluate_int(const SigmaDatum& d, long long h) {
  SigmaValue out;
  const auto& periods = d.chain->periods();
  for (int n = 1; n <= d.depth(); ++n) {
    long long p = periods[static_cast<size_t>(n - 1)];
    long long hn = pmod(h, p);
    long long yn = d.y.residues[static_cast<size_t>(n - 1)];
    if (hn != yn) {
      out.n0 = n;
      out.label = static_cast<int>(pmod(hn - yn, p));
      out.value = d.z.at(n, out.label);
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// left and right actions

enum class Side { Left, Right };

// Left: y -> g y, z unchanged. Right: y -> y g, z -> z(g . g^-1).
inline SigmaDatum act(const SigmaDatum& d, const GroupWord& g, Side side) {
  SigmaDatum out = d;
  for (int n = 1; n <= d.depth(); ++n) {
    const FiniteGroup& q = d.chain->level(n);
    int gn = d.chain->project(g, n);
    int& yn = out.y.residues[static_cast<size_t>(n - 1)];
    yn = side == Side::Left ? q.mul(gn, yn) : q.mul(yn, gn);
  }
  if (side == Side::Right) {
    for (int n = 1; n <= d.depth(); ++n) {
      std::map<int, Cell> moved;
      for (const auto& [a, v] : d.z.bits[static_cast<size_t>(n - 1)])
        moved[a] = d.z.at(n, d.chain->conjugate_label(g, n, a));
      out.z.bits[static_cast<size_t>(n - 1)] = std::move(moved);
    }
  }
  return out;
}

// sigma commutes with both actions; checked pointwise on a window of group
// words. Determinacy coincides on both sides, so any one-sided unknown is a
// failure rather than a skip.
inline bool check_equivariance(const SigmaDatum& d, const GroupWord& g, Side side,
                               const std::vector<GroupWord>& window) {
  SigmaDatum acted = act(d, g, side);
  for (const auto& h : window) {
    GroupWord pulled = side == Side::Left ? g.inverse() * h : h * g.inverse();
    SigmaValue lhs = sigma_evaluate_full(acted, h);
    SigmaValue rhs = sigma_evaluate_full(d, pulled);
    if (lhs.value != rhs.value || lhs.n0 != rhs.n0) return false;
  }
  return true;
}

// Toeplitz coset-constancy: every determined position's value is constant on
// its assignment coset (same n0 and label => same value, and equal residues
// up to n0 force equal values).
inline bool check_sigma_toeplitz(const SigmaDatum& d, const std::vector<GroupWord>& window) {
  std::map<std::pair<int, int>, Cell> assigned;
  for (const auto& h : window) {
    SigmaValue v = sigma_evaluate_full(d, h);
    if (v.n0 == 0) continue;
    auto key = std::make_pair(v.n0, v.label);
    auto it = assigned.find(key);
    if (it == assigned.end()) assigned.emplace(key, v.value);
    else if (it->second != v.value) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ball enumeration for free-group windows

// Reduced words of length <= radius in a free group on num_gens generators.
inline std::vector<GroupWord> free_group_ball(int num_gens, int radius) {
  std::vector<GroupWord> out{GroupWord::one()};
  std::vector<std::vector<GroupWord::Letter>> frontier{{}};
  for (int len = 1; len <= radius; ++len) {
    std::vector<std::vector<GroupWord::Letter>> next;
    for (const auto& w : frontier) {
      for (int g = 0; g < num_gens; ++g) {
        for (long long e : {1ll, -1ll}) {
          if (!w.empty() && w.back().gen == g && w.back().exp == -e) continue;
          auto ext = w;
          ext.push_back({g, e});
          GroupWord gw;
          gw.letters = ext;
          out.push_back(gw);
          next.push_back(std::move(ext));
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

inline std::vector<GroupWord> integer_window(long long a, long long b) {
  std::vector<GroupWord> out;
  for (long long h = a; h <= b; ++h) out.push_back(GroupWord::from_int(h));
  return out;
}

// ---------------------------------------------------------------------------
// skeleton materialization (cyclic chains)

// Stage n fills the classes (y_n + a) mod p_n for a in A_n with z_n(a); the
// class y_n mod p_n stays open at level n and is refined by deeper stages.
inline ToeplitzSkeleton skeleton_of_sigma(const SigmaDatum& d) {
  const auto& periods = d.chain->periods();
  std::vector<ToeplitzSkeleton::Stage> stages;
  for (int n = 1; n <= d.depth(); ++n) {
    long long p = periods[static_cast<size_t>(n - 1)];
    ToeplitzSkeleton::Stage st{p, {}};
    long long yn = d.y.residues[static_cast<size_t>(n - 1)];
    for (int a : d.chain->level_labels(n))
      st.fill[pmod(yn + a, p)] = d.z.at(n, a);
    stages.push_back(std::move(st));
  }
  return ToeplitzSkeleton(std::move(stages));
}

// ---------------------------------------------------------------------------
// SubshiftHandle

// A subshift is always handled through its designated generator (a Toeplitz
// word given as a skeleton or a sigma datum); equality of subshifts is always
// mediated by finite-language comparison of generators.
class SubshiftHandle {
 public:
  SubshiftHandle() = default;

  static SubshiftHandle from_skeleton(ToeplitzSkeleton sk, std::string name) {
    SubshiftHandle h;
    h.name_ = std::move(name);
    h.skel_ = std::make_shared<const ToeplitzSkeleton>(std::move(sk));
    h.view_ = h.skel_->view();
    h.periods_ = h.skel_->stage_periods();
    h.proper_ = true;  // skeleton-backed handles assert their own word
    h.cache_ = std::make_shared<LangCache>();
    return h;
  }

  static SubshiftHandle from_sigma(SigmaDatum d, std::string name) {
    validate_datum(d);
    SubshiftHandle h;
    h.name_ = std::move(name);
    h.proper_ = is_proper(d.z) == Properness::ProperSoFar;
    h.datum_ = std::make_shared<const SigmaDatum>(std::move(d));
    if (h.datum_->chain->is_cyclic()) {
      h.skel_ = std::make_shared<const ToeplitzSkeleton>(skeleton_of_sigma(*h.datum_));
      h.view_ = h.skel_->view();
      h.periods_ = h.skel_->stage_periods();
    }
    h.cache_ = std::make_shared<LangCache>();
    return h;
  }

  // A raw view-backed handle (e.g. the image of a generator under a code).
  static SubshiftHandle from_view(WordView v, std::string name,
                                  std::vector<long long> periods = {}) {
    SubshiftHandle h;
    h.name_ = std::move(name);
    h.view_ = std::move(v);
    h.periods_ = std::move(periods);
    h.cache_ = std::make_shared<LangCache>();
    return h;
  }

  // View-backed handle carrying a sound partial skeleton of the same word
  // (the view stays the designated generator; the skeleton certifies period
  // structure for alignment and hole computations).
  static SubshiftHandle from_view_with_skeleton(WordView v, ToeplitzSkeleton aux,
                                                std::string name) {
    SubshiftHandle h;
    h.name_ = std::move(name);
    h.view_ = std::move(v);
    h.skel_ = std::make_shared<const ToeplitzSkeleton>(std::move(aux));
    h.periods_ = h.skel_->stage_periods();
    h.proper_ = true;
    h.cache_ = std::make_shared<LangCache>();
    return h;
  }

  const std::string& name() const { return name_; }
  bool valid() const { return view_.valid() || datum_; }

  bool has_skeleton() const { return static_cast<bool>(skel_); }
  const ToeplitzSkeleton& skeleton() const {
    if (!skel_) fail(Errc::invalid_argument, "handle has no skeleton backing");
    return *skel_;
  }

  bool sigma_backed() const { return static_cast<bool>(datum_); }
  const SigmaDatum& datum() const {
    if (!datum_) fail(Errc::invalid_argument, "handle is not sigma-backed");
    return *datum_;
  }

  // proper-so-far marker: an improper generator may have a finite orbit
  bool proper_so_far() const { return proper_; }

  const std::vector<long long>& periods() const { return periods_; }

  WordView view() const {
    if (!view_.valid()) fail(Errc::invalid_argument, "handle has no Z-word view");
    return view_;
  }
  Cell eval(long long h) const { return view()(h); }

  // Designated-generator variant with the generator shifted by k.
  SubshiftHandle shifted_generator(long long k, std::string name) const {
    if (skel_) {
      SubshiftHandle h = from_skeleton(skel_->shifted(k), std::move(name));
      return h;
    }
    SubshiftHandle h = from_view(view().shifted(k), std::move(name), periods_);
    return h;
  }

  // Cached language extraction (thread-safe; handles share their cache).
  const LanguageSet& language(int L, long long span, long long span_factor = 8) const {
    auto key = std::make_tuple(L, span, span_factor);
    std::lock_guard<std::mutex> lock(cache_->m);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
    LanguageSet lang = collect_language(view(), L, span, span_factor);
    return cache_->entries.emplace(key, std::move(lang)).first->second;
  }

 private:
  struct LangCache {
    std::mutex m;
    std::map<std::tuple<int, long long, long long>, LanguageSet> entries;
  };

  std::string name_;
  std::shared_ptr<const ToeplitzSkeleton> skel_;
  std::shared_ptr<const SigmaDatum> datum_;
  WordView view_;
  std::vector<long long> periods_;
  bool proper_ = false;
  std::shared_ptr<LangCache> cache_;
};

// theta = rho . sigma: the subshift generated by sigma(y, z). The handle is
// flagged improper when z is improper-so-far (the orbit may be finite).
inline SubshiftHandle theta(const SigmaDatum& d, std::string name) {
  return SubshiftHandle::from_sigma(d, std::move(name));
}

// ---------------------------------------------------------------------------
// m.e.f. hole structure

struct MefHole {
  int level = 0;
  int hole = -1;     // pi_n(y): the unique level-n hole coset
  bool conclusive = false;  // false when z is improper below the level
};

inline MefHole mef_hole(const SigmaDatum& d, int n) {
  if (n < 1 || n > d.depth()) fail(Errc::level_out_of_range, "level out of range");
  MefHole out;
  out.level = n;
  out.hole = d.y.residues[static_cast<size_t>(n - 1)];
  out.conclusive = proper_below(d.z, n);
  return out;
}

// ---------------------------------------------------------------------------
// mu sampling: Haar on y, independent fair bits on z

inline SigmaDatum mu_sample(ChainPtr chain, int depth, std::uint64_t seed) {
  SplitMix64 rng(seed);
  SigmaDatum d;
  d.chain = chain;
  d.y = chain->haar_sample(depth, rng);
  d.z.depth = depth;
  d.z.bits.resize(static_cast<size_t>(depth));
  for (int n = 1; n <= depth; ++n)
    for (int a : chain->level_labels(n))
      d.z.bits[static_cast<size_t>(n - 1)][a] = rng.coin() ? kOne : kZero;
  return d;
}

// ---------------------------------------------------------------------------
// stabilizer test

enum class StabilizerVerdict { Moved, FixedSoFar };

inline const char* to_string(StabilizerVerdict v) {
  return v == StabilizerVerdict::Moved ? "moved" : "fixed-so-far";
}

// moved iff some label a has z(a) != z(g a g^-1)
inline StabilizerVerdict stabilizer_test(const SigmaDatum& d, const GroupWord& g) {
  for (int n = 1; n <= d.depth(); ++n)
    for (const auto& [a, v] : d.z.bits[static_cast<size_t>(n - 1)])
      if (v != d.z.at(n, d.chain->conjugate_label(g, n, a)))
        return StabilizerVerdict::Moved;
  return StabilizerVerdict::FixedSoFar;
}

// ---------------------------------------------------------------------------
// injectivity witnesses (different z => different subshift)

struct DistinguishingWitness {
  int level = 0;   // n: first level where the assignments differ
  int label = -1;  // a0 with z1(a0) != z2(a0)
  GroupWord f, f0, f1;
};

struct WitnessSearch {
  std::optional<DistinguishingWitness> witness;
  std::string diagnostic;
};

namespace detail {

// canonical left translation: shortest g with pi_n(g y) = id
inline SigmaDatum left_normalize(const SigmaDatum& d, int n) {
  int yn = d.y.residues[static_cast<size_t>(n - 1)];
  GroupWord g = d.chain->preimage_word(n, d.chain->level(n).inv(yn));
  return act(d, g, Side::Left);
}

inline int first_differing_level(const LabelAssignment& z1, const LabelAssignment& z2) {
  int depth = std::min(z1.depth, z2.depth);
  for (int n = 1; n <= depth; ++n)
    if (z1.bits[static_cast<size_t>(n - 1)] != z2.bits[static_cast<size_t>(n - 1)]) return n;
  return 0;
}

}  // namespace detail

// Follows the constructive proof: translate both data so pi_n(y_i) = id, pick
// a0 with z1(a0) != z2(a0), take f with pi_n(f) = a0, and take f0, f1 in the
// identity class at level n realizing values 0 and 1 at deeper levels.
inline WitnessSearch find_distinguishing_window(const SigmaDatum& d1, const SigmaDatum& d2) {
  if (d1.chain.get() != d2.chain.get())
    fail(Errc::invalid_argument, "data must share a chain");
  int n = detail::first_differing_level(d1.z, d2.z);
  if (n == 0)
    fail(Errc::no_witness_possible, "assignments agree up to depth; the lemma needs z1 != z2");

  WitnessSearch out;
  const auto& lvl1 = d1.z.bits[static_cast<size_t>(n - 1)];
  int a0 = -1;
  for (const auto& [a, v] : lvl1)
    if (v != d2.z.at(n, a)) {
      a0 = a;
      break;
    }

  SigmaDatum t2 = detail::left_normalize(d2, n);

  // f0, f1: deep labels realize both values inside the identity class mod H_n
  GroupWord f0, f1;
  bool have0 = false, have1 = false;
  for (int m = n + 1; m <= t2.depth() && !(have0 && have1); ++m) {
    const FiniteGroup& q = t2.chain->level(m);
    for (const auto& [a, v] : t2.z.bits[static_cast<size_t>(m - 1)]) {
      bool want = v == kZero ? !have0 : !have1;
      if (!want) continue;
      int target = q.mul(t2.y.residues[static_cast<size_t>(m - 1)], a);
      GroupWord h = t2.chain->preimage_word(m, target);
      (v == kZero ? f0 : f1) = h;
      (v == kZero ? have0 : have1) = true;
    }
  }
  if (!have0 || !have1) {
    out.diagnostic =
        "z2 does not take both values below level " + std::to_string(n) +
        " at this depth; deeper data needed";
    return out;
  }

  DistinguishingWitness w;
  w.level = n;
  w.label = a0;
  w.f = d1.chain->preimage_word(n, a0);
  w.f0 = f0;
  w.f1 = f1;
  out.witness = w;
  return out;
}

// Verifies the two proof cases coset-by-coset over G/H_n. All values must be
// determined at level <= n, so the sweep is exact and finite; structurally
// corrupted witnesses yield false rather than an error.
inline bool verify_distinguishing_window(const DistinguishingWitness& w,
                                         const SigmaDatum& d1, const SigmaDatum& d2) {
  if (d1.chain.get() != d2.chain.get())
    fail(Errc::invalid_argument, "data must share a chain");
  const QuotientChain& chain = *d1.chain;
  int n = w.level;
  if (n < 1 || n > std::min(d1.depth(), d2.depth()))
    fail(Errc::depth_insufficient, "witness level beyond datum depth");
  if (!chain.is_label(n, w.label)) return false;
  if (d1.z.at(n, w.label) == d2.z.at(n, w.label)) return false;

  const FiniteGroup& q = chain.level(n);
  if (chain.project(w.f, n) != w.label) return false;
  if (chain.project(w.f0, n) != q.id()) return false;
  if (chain.project(w.f1, n) != q.id()) return false;

  SigmaDatum t1 = detail::left_normalize(d1, n);
  SigmaDatum t2 = detail::left_normalize(d2, n);

  SigmaValue x2f0 = sigma_evaluate_full(t2, w.f0);
  SigmaValue x2f1 = sigma_evaluate_full(t2, w.f1);
  if (x2f0.value == kUnknown || x2f1.value == kUnknown)
    fail(Errc::depth_insufficient, "f0/f1 values undetermined at this depth");
  if (!(x2f0.value == kZero && x2f1.value == kOne)) return false;

  for (int c = 0; c < q.order(); ++c) {
    GroupWord g = chain.preimage_word(n, c);
    if (c == q.id()) {
      // x1(g f) = z1(a0) != z2(a0) = x2(f) on the identity coset
      SigmaValue v1 = sigma_evaluate_full(t1, g * w.f);
      SigmaValue v2 = sigma_evaluate_full(t2, w.f);
      if (v1.n0 == 0 || v1.n0 > n || v2.n0 == 0 || v2.n0 > n)
        fail(Errc::depth_insufficient, "identity-coset values undetermined at level <= n");
      if (v1.value != d1.z.at(n, w.label)) return false;
      if (v2.value != d2.z.at(n, w.label)) return false;
      if (v1.value == v2.value) return false;
    } else {
      // x1(g f0) = x1(g f1) while x2(f0) != x2(f1)
      SigmaValue v0 = sigma_evaluate_full(t1, g * w.f0);
      SigmaValue v1 = sigma_evaluate_full(t1, g * w.f1);
      if (v0.n0 == 0 || v0.n0 > n || v1.n0 == 0 || v1.n0 > n)
        fail(Errc::depth_insufficient, "coset values undetermined at level <= n");
      if (v0.value != v1.value) return false;
    }
  }
  return true;
}

}  // namespace toeplitz
