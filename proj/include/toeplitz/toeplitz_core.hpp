#pragma once
// Two-sided binary Toeplitz words over Z as staged periodic skeletons: exact
// Per_p / hole computation, hole-gap profiles, shifts, essential-period
// checks, and the finite language machinery used to compare subshifts.
//
// Unknown cells propagate through every operation; nothing here ever invents
// a bit, so finite-depth truncation stays visible in the results.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toeplitz/common.hpp"

namespace toeplitz {

// ---------------------------------------------------------------------------
// ToeplitzSkeleton

class ToeplitzSkeleton {
 public:
  struct Stage {
    long long period = 1;
    std::map<long long, Cell> fill;  // residue mod period -> '0'/'1'
  };

  ToeplitzSkeleton() = default;

  explicit ToeplitzSkeleton(std::vector<Stage> stages) : stages_(std::move(stages)) {
    validate();
  }

  // Stages 2^1..2^depth, one new residue per stage, alternating values:
  // 0 mod 2 -> 1, 1 mod 4 -> 0, 3 mod 8 -> 1, 7 mod 16 -> 0, ...
  static ToeplitzSkeleton period_doubling(int depth) {
    std::vector<Stage> st;
    long long p = 1;
    for (int n = 1; n <= depth; ++n) {
      p *= 2;
      Stage s{p, {}};
      s.fill[p / 2 - 1] = (n % 2 == 1) ? kOne : kZero;
      st.push_back(std::move(s));
    }
    return ToeplitzSkeleton(std::move(st));
  }

  const std::vector<Stage>& stages() const { return stages_; }
  bool empty() const { return stages_.empty(); }
  long long deepest_period() const { return stages_.empty() ? 1 : stages_.back().period; }

  std::vector<long long> stage_periods() const {
    std::vector<long long> ps;
    for (const auto& s : stages_) ps.push_back(s.period);
    return ps;
  }

  // Value of the deepest stage whose filled residue covers h.
  Cell evaluate(long long h) const {
    for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
      auto f = it->fill.find(pmod(h, it->period));
      if (f != it->fill.end()) return f->second;
    }
    return kUnknown;
  }

  WordView view() const {
    auto self = *this;
    return WordView([self](long long h) { return self.evaluate(h); });
  }

  Window window(long long a, long long b) const { return view().window(a, b); }

  // evaluate(shifted(k), h) == evaluate(*this, h - k)
  ToeplitzSkeleton shifted(long long k) const {
    std::vector<Stage> st;
    for (const auto& s : stages_) {
      Stage t{s.period, {}};
      for (const auto& [r, v] : s.fill) t.fill[pmod(r + k, s.period)] = v;
      st.push_back(std::move(t));
    }
    return ToeplitzSkeleton(std::move(st));
  }

  bool supports_period(long long p) const {
    if (p < 1) return false;
    for (const auto& s : stages_)
      if (s.period % p == 0) return true;
    return false;
  }

  // Exact Per_p: the residues mod p whose whole class is determined and
  // constant. Classes touching any undetermined cell are holes; a truncated
  // skeleton never certifies periodicity it cannot see.
  std::set<long long> per(long long p) const {
    if (!supports_period(p))
      fail(Errc::unsupported_period,
           "period " + std::to_string(p) + " does not divide any stage period");
    const long long P = deepest_period();
    // every class mod P is uniform: determined-with-value or unknown
    std::string table(static_cast<size_t>(P), kUnknown);
    for (long long r = 0; r < P; ++r) table[static_cast<size_t>(r)] = evaluate(r);
    std::set<long long> out;
    for (long long i = 0; i < p; ++i) {
      Cell v = table[static_cast<size_t>(i)];
      if (!is_known(v)) continue;
      bool constant = true;
      for (long long j = i + p; j < P && constant; j += p)
        constant = table[static_cast<size_t>(j)] == v;
      if (constant) out.insert(i);
    }
    return out;
  }

  std::set<long long> holes(long long p) const {
    std::set<long long> h;
    auto pr = per(p);
    for (long long i = 0; i < p; ++i)
      if (!pr.count(i)) h.insert(i);
    return h;
  }

  // Minimum circular distance between distinct holes; with at most one hole
  // the minimum is vacuous and the sentinel p is returned, so single-hole
  // profiles diverge with the period.
  long long min_hole_gap(long long p) const {
    auto h = holes(p);
    if (h.size() <= 1) return p;
    std::vector<long long> hs(h.begin(), h.end());
    long long best = p;
    for (size_t i = 0; i < hs.size(); ++i) {
      long long next = i + 1 < hs.size() ? hs[i + 1] : hs[0] + p;
      best = std::min(best, next - hs[i]);
    }
    return best;
  }

  Rational per_density(long long p) const {
    return Rational(static_cast<long long>(per(p).size()), p);
  }

 private:
  void validate() const {
    for (size_t i = 0; i < stages_.size(); ++i) {
      const auto& s = stages_[i];
      if (s.period < 1) fail(Errc::invalid_argument, "stage period must be positive");
      if (i > 0) {
        if (s.period <= stages_[i - 1].period)
          fail(Errc::invalid_argument, "stage periods must strictly increase");
        if (s.period % stages_[i - 1].period != 0)
          fail(Errc::invalid_argument, "each stage period must divide the next");
      }
      for (const auto& [r, v] : s.fill) {
        if (r < 0 || r >= s.period) fail(Errc::invalid_argument, "residue out of range");
        if (v != kZero && v != kOne) fail(Errc::invalid_argument, "fill values must be bits");
        // monotone consistency: refinements of a filled class carry its value
        for (size_t j = 0; j < i; ++j) {
          auto f = stages_[j].fill.find(pmod(r, stages_[j].period));
          if (f != stages_[j].fill.end() && f->second != v)
            fail(Errc::invalid_argument, "stage refinement contradicts an earlier stage");
        }
      }
    }
  }

  std::vector<Stage> stages_;
};

inline ToeplitzSkeleton flipped(const ToeplitzSkeleton& x) {
  std::vector<ToeplitzSkeleton::Stage> st;
  for (const auto& s : x.stages()) {
    ToeplitzSkeleton::Stage t{s.period, {}};
    for (const auto& [r, v] : s.fill) t.fill[r] = flip_cell(v);
    st.push_back(std::move(t));
  }
  return ToeplitzSkeleton(std::move(st));
}

// ---------------------------------------------------------------------------
// window-based (empirical) periodicity: may overreport Per on shallow spans,
// which is why it is a separate, explicitly flagged operation.

struct EmpiricalPer {
  std::set<long long> residues;
  bool empirical = true;  // always; kept in reports so no verdict hides it
  long long window_lo = 0, window_hi = 0;
};

inline EmpiricalPer per_p_empirical(const WordView& w, long long p, long long lo,
                                    long long hi) {
  if (p < 1) fail(Errc::unsupported_period, "period must be positive");
  EmpiricalPer out;
  out.window_lo = lo;
  out.window_hi = hi;
  for (long long i = 0; i < p; ++i) {
    Cell seen = kUnknown;
    bool constant = true;
    for (long long h = lo + pmod(i - lo, p); h <= hi && constant; h += p) {
      Cell c = w(h);
      if (!is_known(c)) continue;
      if (!is_known(seen)) seen = c;
      else constant = seen == c;
    }
    if (constant && is_known(seen)) out.residues.insert(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// shifts and essential periods

inline ToeplitzSkeleton shift(const ToeplitzSkeleton& x, long long k) {
  return x.shifted(k);
}

// True iff for every k !== 0 mod p in [1, max_shift], Per_p(x) is not
// contained in Per_p(shift(x, k)).
inline bool essential_period_check(const ToeplitzSkeleton& x, long long p,
                                   long long max_shift) {
  auto base = x.per(p);
  std::set<long long> tested;
  for (long long k = 1; k <= max_shift; ++k) {
    long long km = pmod(k, p);
    if (km == 0 || tested.count(km)) continue;
    tested.insert(km);
    bool subset = true;
    for (long long r : base)
      if (!base.count(pmod(r - km, p))) {  // r in Per(x)+k  <=>  r-k in Per(x)
        subset = false;
        break;
      }
    if (subset) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// separated-holes profile

struct HoleProfileRow {
  long long period = 0;
  long long per_count = 0;
  long long hole_count = 0;
  long long min_gap = 0;
  Rational density;
};

struct HoleProfile {
  std::vector<HoleProfileRow> rows;
  bool separated_up_to_depth = false;  // finite-depth verdict, never a limit claim
  long long threshold = 0;
};

inline HoleProfile separated_holes_profile(const ToeplitzSkeleton& x,
                                           const std::vector<long long>& periods,
                                           long long threshold = 1) {
  HoleProfile prof;
  prof.threshold = threshold;
  for (long long p : periods) {
    HoleProfileRow row;
    row.period = p;
    auto pr = x.per(p);
    row.per_count = static_cast<long long>(pr.size());
    row.hole_count = p - row.per_count;
    row.min_gap = x.min_hole_gap(p);
    row.density = Rational(row.per_count, p);
    prof.rows.push_back(row);
  }
  bool ok = true;
  for (size_t i = 1; i < prof.rows.size(); ++i)
    ok = ok && prof.rows[i].min_gap >= prof.rows[i - 1].min_gap;
  if (!prof.rows.empty()) ok = ok && prof.rows.back().min_gap > threshold;
  prof.separated_up_to_depth = ok;
  return prof;
}

// ---------------------------------------------------------------------------
// finite language sets

struct LanguageSet {
  int length = 0;
  std::set<std::string> words;
  bool complete = false;  // believed-complete; otherwise a lower approximation
};

// All fully determined L-subwords starting in [-span, span] (cells are read
// up to span+L, so the 2*span+1 start positions cover every residue class of
// periods up to 2*span+1). Flagged believed-complete only when the view is
// total there and the span dominates L by span_factor, so truncation can
// never manufacture a "distinct" verdict.
inline LanguageSet collect_language(const WordView& v, int L, long long span,
                                    long long span_factor = 8) {
  if (L < 0) fail(Errc::invalid_argument, "word length must be >= 0");
  LanguageSet out;
  out.length = L;
  if (L == 0) {
    out.words.insert("");
    out.complete = true;
    return out;
  }
  Window w = v.window(-span, span + L - 1);
  bool total = w.total();
  for (long long h = -span; h <= span; ++h) {
    std::string sub = w.cells.substr(static_cast<size_t>(h - w.start), static_cast<size_t>(L));
    if (sub.find(kUnknown) == std::string::npos) out.words.insert(std::move(sub));
  }
  out.complete = total && span >= span_factor * static_cast<long long>(L);
  return out;
}

enum class LangCompare { EqualUpToL, Distinct, Inconclusive };

inline const char* to_string(LangCompare c) {
  switch (c) {
    case LangCompare::EqualUpToL: return "equal-up-to-L";
    case LangCompare::Distinct: return "distinct";
    default: return "inconclusive";
  }
}

// Distinct needs a word provably absent from a believed-complete other side;
// equality needs both sides believed-complete.
inline LangCompare compare_languages(const LanguageSet& a, const LanguageSet& b) {
  if (a.length != b.length) fail(Errc::invalid_argument, "language length mismatch");
  if (b.complete)
    for (const auto& w : a.words)
      if (!b.words.count(w)) return LangCompare::Distinct;
  if (a.complete)
    for (const auto& w : b.words)
      if (!a.words.count(w)) return LangCompare::Distinct;
  if (a.complete && b.complete && a.words == b.words) return LangCompare::EqualUpToL;
  return LangCompare::Inconclusive;
}

}  // namespace toeplitz
