#pragma once
// The groupoid of subshift conjugacies: arrows with verified forward and
// backward codes, the factor-position map into the depth-bounded inverse
// limit, the cocycle alpha_0 and its kernel, the block-permutation relations
// E_p, and bounded centralizer search.
//
// Every inverse-limit-valued output is a depth-stamped residue tuple; no
// operation here claims infinite-depth equality.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toeplitz/block_codes.hpp"
#include "toeplitz/common.hpp"
#include "toeplitz/sigma_lab.hpp"
#include "toeplitz/toeplitz_core.hpp"

namespace toeplitz {

// ---------------------------------------------------------------------------
// FactorPosition

// A compatible residue tuple (j mod p_1, ..., j mod p_N) locating a word in
// the finite-depth maximal equicontinuous factor.
struct FactorPosition {
  std::vector<long long> periods;
  std::vector<long long> residues;

  int depth() const { return static_cast<int>(periods.size()); }

  bool is_identity() const {
    for (long long r : residues)
      if (r != 0) return false;
    return true;
  }

  FactorPosition inverted() const {
    FactorPosition out = *this;
    for (size_t n = 0; n < residues.size(); ++n)
      out.residues[n] = pmod(-residues[n], periods[n]);
    return out;
  }

  FactorPosition composed(const FactorPosition& o) const {
    if (periods != o.periods)
      fail(Errc::invalid_argument, "factor positions over different chains");
    FactorPosition out = *this;
    for (size_t n = 0; n < residues.size(); ++n)
      out.residues[n] = pmod(residues[n] + o.residues[n], periods[n]);
    return out;
  }

  bool operator==(const FactorPosition&) const = default;

  std::string str() const {
    std::string s = "(";
    for (size_t n = 0; n < residues.size(); ++n) {
      if (n) s += ", ";
      s += std::to_string(residues[n]) + " mod " + std::to_string(periods[n]);
    }
    return s + ")";
  }
};

// Per level, the unique residue j aligning x' with the reference generator
// shifted by j: on every class of Per_{p_n}(ref)+j the determined cells of x'
// must equal the reference values. Zero survivors means the words live in
// different subshifts; several mean the window is too shallow.
inline FactorPosition factor_position(const SubshiftHandle& ref, const WordView& xprime,
                                      int depth, long long span) {
  const auto& periods = ref.periods();
  if (depth < 1 || depth > static_cast<int>(periods.size()))
    fail(Errc::level_out_of_range, "factor depth exceeds the reference period tower");
  const ToeplitzSkeleton& sk = ref.skeleton();
  Window w = xprime.window(-span, span);

  FactorPosition fp;
  for (int n = 1; n <= depth; ++n) {
    long long p = periods[static_cast<size_t>(n - 1)];
    auto per = sk.per(p);
    std::map<long long, Cell> val;
    for (long long r : per) val[r] = sk.evaluate(r);

    std::vector<long long> survivors;
    for (long long j = 0; j < p; ++j) {
      bool ok = true;
      long long matched = 0;
      for (long long h = w.start; h < w.end() && ok; ++h) {
        Cell c = w.at(h);
        if (!is_known(c)) continue;
        auto it = val.find(pmod(h - j, p));
        if (it == val.end()) continue;
        ++matched;
        ok = it->second == c;
      }
      if (ok && matched > 0) survivors.push_back(j);
    }
    if (survivors.empty())
      fail(Errc::no_alignment,
           "no alignment at level " + std::to_string(n) + ": not in this subshift");
    if (survivors.size() > 1)
      fail(Errc::ambiguous_alignment,
           "alignment at level " + std::to_string(n) + " is ambiguous at this span");
    long long j = survivors[0];
    if (n >= 2 && pmod(j, periods[static_cast<size_t>(n - 2)]) != fp.residues.back())
      fail(Errc::no_alignment, "levelwise alignments are not projection-compatible");
    fp.periods.push_back(p);
    fp.residues.push_back(j);
  }
  return fp;
}

// ---------------------------------------------------------------------------
// arrows

struct Arrow {
  SubshiftHandle source, target;
  BlockCode fwd, bwd;
  int L = 0;
  long long span = 0;  // verified-at
};

struct ArrowVerification {
  bool ok = false;
  long long cells_source = 0, cells_target = 0;
  std::string note;
};

// Round-trip identity on the determined windows of both designated
// generators at the arrow's verified-at budget.
inline ArrowVerification verify_arrow(const Arrow& a) {
  ArrowVerification v;
  long long margin = a.fwd.radius() + a.bwd.radius();
  WordView xs = a.source.view(), xt = a.target.view();
  WordView rs = a.bwd.applied_view(a.fwd.applied_view(xs));
  WordView rt = a.fwd.applied_view(a.bwd.applied_view(xt));
  for (long long h = -a.span + margin; h <= a.span - margin; ++h) {
    Cell want = xs(h), got = rs(h);
    if (is_known(want) && is_known(got)) {
      if (want != got) {
        v.note = "backward-after-forward mismatch at " + std::to_string(h);
        return v;
      }
      ++v.cells_source;
    }
    want = xt(h);
    got = rt(h);
    if (is_known(want) && is_known(got)) {
      if (want != got) {
        v.note = "forward-after-backward mismatch at " + std::to_string(h);
        return v;
      }
      ++v.cells_target;
    }
  }
  v.ok = v.cells_source > 0 && v.cells_target > 0;
  if (!v.ok) v.note = "no determined cells to verify";
  return v;
}

inline Arrow make_arrow(SubshiftHandle source, SubshiftHandle target, BlockCode fwd,
                        BlockCode bwd, int L, long long span) {
  Arrow a{std::move(source), std::move(target), std::move(fwd), std::move(bwd), L, span};
  ArrowVerification v = verify_arrow(a);
  if (!v.ok) fail(Errc::invalid_argument, "arrow fails verification: " + v.note);
  return a;
}

inline Arrow identity_arrow(const SubshiftHandle& S, int L, long long span) {
  return make_arrow(S, S, BlockCode::identity(), BlockCode::identity(), L, span);
}

// g after f; defined when f's target is g's source (compared by name).
inline Arrow compose_arrows(const Arrow& g, const Arrow& f) {
  if (f.target.name() != g.source.name())
    fail(Errc::invalid_argument, "arrows are not composable");
  return make_arrow(f.source, g.target, compose(g.fwd, f.fwd), compose(f.bwd, g.bwd),
                    std::min(f.L, g.L), std::min(f.span, g.span));
}

// ---------------------------------------------------------------------------
// the cocycle alpha_0

// alpha_0(f) = (position of f(generator of source) in the target's factor)^-1.
inline FactorPosition cocycle_alpha0(const Arrow& a, int depth, long long span) {
  WordView image = a.fwd.applied_view(a.source.view());
  return factor_position(a.target, image, depth, span).inverted();
}

enum class KernelVerdict { InKernelUpToDepth, NotInKernel };

inline const char* to_string(KernelVerdict v) {
  return v == KernelVerdict::InKernelUpToDepth ? "kernel-up-to-depth" : "not-in-kernel";
}

// Membership in ker(alpha_0) at finite depth is necessary, never sufficient,
// for true kernel membership; the verdict name keeps that visible.
inline KernelVerdict in_kernel(const Arrow& a, int depth, long long span) {
  return cocycle_alpha0(a, depth, span).is_identity() ? KernelVerdict::InKernelUpToDepth
                                                      : KernelVerdict::NotInKernel;
}

// ---------------------------------------------------------------------------
// the relations E_p

enum class EpVerdict { Member, Distinct, Inconclusive };

inline const char* to_string(EpVerdict v) {
  switch (v) {
    case EpVerdict::Member: return "member";
    case EpVerdict::Distinct: return "distinct";
    default: return "inconclusive";
  }
}

struct EpResult {
  EpVerdict verdict = EpVerdict::Inconclusive;
  std::optional<PartialBlockMap> sigma;    // on member
  std::optional<BlockConflict> conflict;   // on distinct
  long long pairs_seen = 0;
  bool round_trip_verified = false;
  std::string note;
};

// S E_p T iff some block bijection maps the designated generator of S onto
// that of T on the absolute p-grid. The map is forced cell-by-cell, so no
// Sym(2^p) enumeration happens and large p is fine.
inline EpResult e_p_test(const SubshiftHandle& S, const SubshiftHandle& T, long long p,
                         long long span) {
  EpResult out;
  WordView xs = S.view(), xt = T.view();
  long long k = std::max(1ll, span / (2 * p));
  BlockMapBuild build = build_block_map(xs, xt, p, 0, -k, k);
  out.pairs_seen = build.pairs_seen;
  if (build.conflict) {
    out.verdict = EpVerdict::Distinct;
    out.conflict = build.conflict;
    return out;
  }
  if (build.pairs_seen == 0) {
    out.note = "no determined block pairs at this span";
    return out;
  }
  // fresh-window extension plus the inverse direction certify the verdict
  PartialBlockMap inverse;
  inverse.p = p;
  for (const auto& [s, t] : build.map->pairs) inverse.pairs.emplace(t, s);
  bool ok = verify_block_map(*build.map, xs, xt, 0, -2 * k, 2 * k) &&
            verify_block_map(inverse, xt, xs, 0, -2 * k, 2 * k);
  if (!ok) {
    out.verdict = EpVerdict::Distinct;
    out.note = "extension to a fresh window produced a conflict";
    return out;
  }
  out.verdict = EpVerdict::Member;
  out.sigma = *build.map;
  out.round_trip_verified = true;
  return out;
}

// First p in the list relating S and T; none is not a refutation.
inline std::optional<std::pair<long long, EpResult>> e_delta_search(
    const SubshiftHandle& S, const SubshiftHandle& T, const std::vector<long long>& p_list,
    long long span) {
  for (long long p : p_list) {
    EpResult r = e_p_test(S, T, p, span);
    if (r.verdict == EpVerdict::Member) return std::make_pair(p, r);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// centralizer search

struct CentralizerReport {
  std::vector<Arrow> automorphisms;       // lexicographic table order, deduplicated
  std::vector<FactorPosition> cocycles;   // aligned with automorphisms
  bool pairwise_commute = true;
  std::string note;
};

// All self-conjugacies of S at radius <= r_max, each with its cocycle value,
// plus the window commutation check (the centralizer embeds in the abelian
// factor, so automorphisms should commute).
inline CentralizerReport centralizer_search(const SubshiftHandle& S, int r_max, int L,
                                            long long span, int depth, int workers = 1,
                                            long long align_range = 128) {
  CentralizerReport rep;
  auto pairs = conjugacy_scan(S, S, r_max, L, span, workers, align_range, 0);

  // dedup by action on the generator: on a minimal subshift a code is
  // determined by the image of one generator window
  std::set<std::string> seen;
  long long cmp = span / 2;
  for (const auto& pr : pairs) {
    Window img = pr.fwd.applied_view(S.view()).window(-cmp, cmp);
    if (!seen.insert(img.cells).second) continue;
    rep.automorphisms.push_back(Arrow{S, S, pr.fwd, pr.bwd, L, span});
    rep.cocycles.push_back(cocycle_alpha0(rep.automorphisms.back(), depth, span));
  }

  long long margin = 0;
  for (const auto& a : rep.automorphisms)
    margin = std::max<long long>(margin, 2 * (a.fwd.radius() + a.bwd.radius()));
  for (size_t i = 0; i < rep.automorphisms.size() && rep.pairwise_commute; ++i) {
    for (size_t j = i + 1; j < rep.automorphisms.size() && rep.pairwise_commute; ++j) {
      BlockCode fg = compose(rep.automorphisms[i].fwd, rep.automorphisms[j].fwd);
      BlockCode gf = compose(rep.automorphisms[j].fwd, rep.automorphisms[i].fwd);
      WordView a = fg.applied_view(S.view());
      WordView b = gf.applied_view(S.view());
      for (long long h = -span + margin; h <= span - margin; ++h) {
        Cell ca = a(h), cb = b(h);
        if (is_known(ca) && is_known(cb) && ca != cb) {
          rep.pairwise_commute = false;
          rep.note = "non-commuting pair at position " + std::to_string(h);
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace toeplitz
