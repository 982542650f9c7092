#pragma once
// The verification suite: every constructive statement the library is built
// around, run end-to-end at fixed seeds and budgets with one pass/fail result
// per criterion. Failing checks serialize their counterexample into the
// details field. All randomness is derived from the suite seed, so two runs
// with the same seed produce byte-identical reports.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toeplitz/amenability_witness.hpp"
#include "toeplitz/block_codes.hpp"
#include "toeplitz/conjugacy_groupoid.hpp"
#include "toeplitz/group_chain.hpp"
#include "toeplitz/io.hpp"
#include "toeplitz/reports.hpp"
#include "toeplitz/sigma_lab.hpp"
#include "toeplitz/toeplitz_core.hpp"

namespace toeplitz {

struct VerifyBudgets {
  int depth = 6;
  long long span = 4096;
  int L = 16;
  int r_max = 1;
  long long p_exact_max = 3;
  int workers = 1;
};

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string details;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  VerifyBudgets budgets;
  std::vector<CriterionResult> criteria;
  bool all_pass = false;
};

inline Json report_to_json(const VerifyReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["budgets"] = Json{{"depth", r.budgets.depth},     {"span", r.budgets.span},
                      {"L", r.budgets.L},             {"r_max", r.budgets.r_max},
                      {"p_exact_max", r.budgets.p_exact_max},
                      {"workers", r.budgets.workers}};
  Json arr = Json::array();
  for (const auto& c : r.criteria)
    arr.push_back(Json{{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  j["criteria"] = arr;
  j["all_pass"] = r.all_pass;
  return j;
}

namespace suite {

// ---------------------------------------------------------------------------
// shared fixtures

inline std::vector<long long> doubling_periods(int depth) {
  std::vector<long long> ps;
  long long p = 1;
  for (int n = 0; n < depth; ++n) ps.push_back(p *= 2);
  return ps;
}

// A period-doubling-style sigma datum over [2, ..., 16384] anchored so that
// the undetermined class stays far outside the working spans: total on
// roughly [-4000, 4000], which makes its finite languages believed-complete.
inline SigmaDatum span_total_pd_datum() {
  auto chain = std::make_shared<const QuotientChain>(QuotientChain::cyclic(doubling_periods(14)));
  SigmaDatum d;
  d.chain = chain;
  d.y.depth = 14;
  d.y.not_in_G = true;
  for (int n = 1; n <= 14; ++n) {
    long long p = 1ll << n;
    d.y.residues.push_back(static_cast<int>(n <= 12 ? p - 1 : 4095));
  }
  d.z.depth = 14;
  d.z.bits.resize(14);
  for (int n = 1; n <= 14; ++n)
    d.z.bits[static_cast<size_t>(n - 1)][static_cast<int>(1ll << (n - 1))] =
        (n % 2 == 1) ? kOne : kZero;
  validate_datum(d);
  return d;
}

inline BlockPermutation swap_blocks_p2() {
  // exchanges the blocks 01 and 10, fixes 00 and 11
  return make_block_permutation(2, {0, 2, 1, 3});
}

inline std::string set_str(const std::set<long long>& s) {
  std::string out = "{";
  for (long long v : s) out += (out.size() > 1 ? "," : "") + std::to_string(v);
  return out + "}";
}

inline CriterionResult failed(std::string id, std::string name, std::string details) {
  return CriterionResult{std::move(id), std::move(name), false, std::move(details)};
}

inline CriterionResult passed(std::string id, std::string name, std::string details) {
  return CriterionResult{std::move(id), std::move(name), true, std::move(details)};
}

// ---------------------------------------------------------------------------
// criterion 1: sigma-construction correctness

inline CriterionResult c1_sigma_construction(std::uint64_t seed) {
  const std::string id = "C1", name = "sigma-construction correctness";
  auto chain = std::make_shared<const QuotientChain>(
      QuotientChain::cyclic({2, 4, 8, 16, 32, 64}));
  SplitMix64 seeder(seed ^ 0xC1ull);
  for (int rep = 0; rep < 50; ++rep) {
    SigmaDatum d = mu_sample(chain, 6, seeder.next());
    // Toeplitz coset-constancy on [-2000, 2000]: one value per (level, label)
    std::map<std::pair<int, int>, Cell> assigned;
    for (long long h = -2000; h <= 2000; ++h) {
      SigmaValue v = sigma_evaluate_int(d, h);
      if (v.n0 == 0) continue;
      auto key = std::make_pair(v.n0, v.label);
      auto it = assigned.find(key);
      if (it == assigned.end()) assigned.emplace(key, v.value);
      else if (it->second != v.value)
        return failed(id, name,
                      "coset constancy violated at h=" + std::to_string(h) +
                          " datum=" + sigma_to_json(d)["y"].dump());
    }
    // exact hole structure: Per_{p_n} = everything except pi_n(y)
    ToeplitzSkeleton sk = skeleton_of_sigma(d);
    const auto& periods = chain->periods();
    for (int n = 1; n <= 6; ++n) {
      long long p = periods[static_cast<size_t>(n - 1)];
      std::set<long long> expected;
      for (long long i = 0; i < p; ++i)
        if (i != d.y.residues[static_cast<size_t>(n - 1)]) expected.insert(i);
      auto got = sk.per(p);
      if (got != expected)
        return failed(id, name,
                      "Per_" + std::to_string(p) + " mismatch: got " + set_str(got) +
                          " expected " + set_str(expected) +
                          " y=" + sigma_to_json(d)["y"].dump());
    }
    // the materialized skeleton agrees with direct evaluation
    for (long long h = -2000; h <= 2000; h += 7) {
      if (sk.evaluate(h) != sigma_evaluate_int(d, h).value)
        return failed(id, name, "skeleton/evaluation mismatch at h=" + std::to_string(h));
    }
  }
  return passed(id, name,
                "50 seeded data on [-2000,2000]: coset-constancy and "
                "Per_{p_n} = Z/p_n minus {pi_n(y)} exact at all 6 levels");
}

// ---------------------------------------------------------------------------
// criterion 2: equivariance on both sides

inline CriterionResult c2_equivariance(std::uint64_t seed) {
  const std::string id = "C2", name = "left/right equivariance";
  auto zchain = std::make_shared<const QuotientChain>(
      QuotientChain::cyclic({2, 4, 8, 16, 32, 64}));
  SplitMix64 seeder(seed ^ 0xC2ull);
  auto zwindow = integer_window(-50, 50);
  std::vector<GroupWord> zgens = {GroupWord::from_int(1), GroupWord::from_int(-1),
                                  GroupWord::from_int(3)};
  for (int rep = 0; rep < 50; ++rep) {
    SigmaDatum d = mu_sample(zchain, 6, seeder.next());
    for (const auto& g : zgens)
      for (Side side : {Side::Left, Side::Right})
        if (!check_equivariance(d, g, side, zwindow))
          return failed(id, name,
                        "Z-chain equivariance failed: g=" + g.str() +
                            " side=" + (side == Side::Left ? "left" : "right") +
                            " y=" + sigma_to_json(d)["y"].dump());
  }
  auto tower = std::make_shared<const QuotientChain>(f2_s3_s4_tower());
  auto ball = free_group_ball(2, 3);
  std::vector<GroupWord> fgens = {GroupWord::generator(0), GroupWord::generator(1),
                                  GroupWord::generator(0, -1), GroupWord::generator(1, -1)};
  for (int rep = 0; rep < 50; ++rep) {
    SigmaDatum d = mu_sample(tower, 2, seeder.next());
    for (const auto& g : fgens)
      for (Side side : {Side::Left, Side::Right})
        if (!check_equivariance(d, g, side, ball))
          return failed(id, name,
                        "S3/S4-tower equivariance failed: g=" + g.str() +
                            " side=" + (side == Side::Left ? "left" : "right"));
  }
  return passed(id, name,
                "100 seeded data (Z-chain window [-50,50], F2 tower ball radius 3): "
                "sigma commutes with both actions for all generators");
}

// ---------------------------------------------------------------------------
// criterion 3: injectivity witnesses

inline CriterionResult c3_injectivity(std::uint64_t seed) {
  const std::string id = "C3", name = "injectivity witnesses";
  auto chain = std::make_shared<const QuotientChain>(
      QuotientChain::cyclic({2, 4, 8, 16, 32, 64}));
  SplitMix64 seeder(seed ^ 0xC3ull);
  int collected = 0, attempts = 0;
  while (collected < 50 && attempts < 5000) {
    ++attempts;
    SigmaDatum d1 = mu_sample(chain, 6, seeder.next());
    SigmaDatum d2 = mu_sample(chain, 6, seeder.next());
    int n = detail::first_differing_level(d1.z, d2.z);
    if (n == 0 || n > 4) continue;
    if (is_proper(d1.z) != Properness::ProperSoFar) continue;
    if (is_proper(d2.z) != Properness::ProperSoFar) continue;
    if (!proper_below(d2.z, n)) continue;
    WitnessSearch ws = find_distinguishing_window(d1, d2);
    if (!ws.witness)
      return failed(id, name, "witness search failed: " + ws.diagnostic);
    if (!verify_distinguishing_window(*ws.witness, d1, d2))
      return failed(id, name,
                    "witness failed the coset sweep: " + witness_to_json(*ws.witness).dump() +
                        " y1=" + sigma_to_json(d1)["y"].dump() +
                        " y2=" + sigma_to_json(d2)["y"].dump());
    ++collected;
  }
  if (collected < 50)
    return failed(id, name, "could not generate 50 eligible pairs in 5000 attempts");
  return passed(id, name,
                "50 seeded pairs with z1 != z2 at level <= 4: witnesses found and "
                "verified over the full coset sweep");
}

// ---------------------------------------------------------------------------
// criterion 4: claim certificates and the certified-fraction trend

inline CriterionResult c4_claims(std::uint64_t seed, const VerifyBudgets& budgets) {
  const std::string id = "C4", name = "claim 1/2 certificates";
  // the period-doubling word, deep enough for exact block pairs at p = 64
  SubshiftHandle pd = SubshiftHandle::from_skeleton(ToeplitzSkeleton::period_doubling(13), "pd");
  // a sigma word whose level structure starts [2,...,64]; deepened the same
  // way so every tested p admits fully determined blocks
  auto chain13 = std::make_shared<const QuotientChain>(
      QuotientChain::cyclic(doubling_periods(13)));
  SplitMix64 seeder(seed ^ 0xC4ull);
  SigmaDatum d;
  for (int tries = 0;; ++tries) {
    if (tries > 200) return failed(id, name, "no proper sample found");
    d = mu_sample(chain13, 13, seeder.next());
    if (is_proper(d.z) == Properness::ProperSoFar && proper_below(d.z, 1)) break;
  }
  SubshiftHandle sig = theta(d, "sigma");

  ConjugacyPair flip_pair{BlockCode::flip(), BlockCode::flip(), budgets.L, budgets.span};
  std::vector<long long> ps = {8, 16, 32, 64};

  for (const SubshiftHandle& S : {pd, sig}) {
    // radius-1 conjugacy produced by search, against the 2-block-swap image
    SubshiftHandle T = SubshiftHandle::from_view(
        block_image_view(swap_blocks_p2(), S.view(), 0), S.name() + "-swap2");
    ConjugacySearch sr = search_conjugacy(S, T, budgets.r_max, budgets.L, 2048,
                                          budgets.workers);
    if (!sr.pair)
      return failed(id, name, "search found no radius-1 conjugacy for " + S.name() +
                                  ": " + sr.note);
    int r_found = std::max(sr.pair->fwd.radius(), sr.pair->bwd.radius());
    if (r_found != 1)
      return failed(id, name,
                    "expected a radius-1 pair for " + S.name() + ", got radius " +
                        std::to_string(r_found));

    for (const ConjugacyPair& pair : {flip_pair, *sr.pair}) {
      long long r = std::max(pair.fwd.radius(), pair.bwd.radius());
      Rational prev(-1);
      for (long long p : ps) {
        L1Report rep = l1_certificate(S, pair, p, budgets.span);
        for (const auto& e : rep.claim1)
          if (e.status == IndexStatus::Unverified)
            return failed(id, name,
                          "claim1 index " + std::to_string(e.i) + " unverified (" + e.note +
                              ") word=" + S.name() + " p=" + std::to_string(p) +
                              " r=" + std::to_string(r));
        for (const auto& e : rep.claim2)
          if (e.status == IndexStatus::Unverified)
            return failed(id, name,
                          "claim2 index " + std::to_string(e.i) + " unverified (" + e.note +
                              ") word=" + S.name() + " p=" + std::to_string(p));
        if (rep.certified_fraction < Rational(p - (2 * r + 1), p))
          return failed(id, name,
                        "certified fraction " + rational_str(rep.certified_fraction) +
                            " below 1-(2r+1)/p at p=" + std::to_string(p) +
                            " word=" + S.name());
        if (rep.certified_fraction < prev)
          return failed(id, name, "certified fraction not monotone at p=" + std::to_string(p));
        prev = rep.certified_fraction;
        if (!rep.bound_witnessed)
          return failed(id, name,
                        "bound not witnessed at p=" + std::to_string(p) + " word=" +
                            S.name() + ": " + rep.note);
      }
    }
  }
  return passed(id, name,
                "pd and sigma words, flip and searched radius-1 pairs, p in {8,16,32,64}: "
                "all indices outside thickened holes certified; fraction >= 1-(2r+1)/p, "
                "monotone");
}

// ---------------------------------------------------------------------------
// criterion 5: exact small-p enumeration against an independent oracle

namespace oracle {

// Everything here works on raw strings, independent of the library's views,
// languages and block machinery.

struct Expanded {
  long long lo = 0;
  std::string cells;
  char at(long long h) const {
    return h < lo || h >= lo + static_cast<long long>(cells.size())
               ? '?'
               : cells[static_cast<size_t>(h - lo)];
  }
};

// stage-by-stage fill straight from the datum definition
inline Expanded expand_sigma(const SigmaDatum& d, long long lo, long long hi) {
  Expanded e;
  e.lo = lo;
  e.cells.assign(static_cast<size_t>(hi - lo + 1), '?');
  const auto& periods = d.chain->periods();
  for (int n = 1; n <= d.depth(); ++n) {
    long long p = periods[static_cast<size_t>(n - 1)];
    long long yn = d.y.residues[static_cast<size_t>(n - 1)];
    for (const auto& [a, v] : d.z.bits[static_cast<size_t>(n - 1)]) {
      long long cls = (yn + a) % p;
      for (long long h = lo + ((cls - lo) % p + p) % p; h <= hi; h += p)
        if (e.cells[static_cast<size_t>(h - lo)] == '?')
          e.cells[static_cast<size_t>(h - lo)] = v;
    }
  }
  return e;
}

inline Expanded flip(const Expanded& e) {
  Expanded f = e;
  for (char& c : f.cells)
    if (c == '0') c = '1';
    else if (c == '1') c = '0';
  return f;
}

// pi-hat applied to (x+i) on the absolute block grid, as a string
inline Expanded block_apply(const Expanded& x, const std::vector<std::string>& images,
                            long long p, long long i, long long lo, long long hi) {
  Expanded out;
  out.lo = lo;
  out.cells.assign(static_cast<size_t>(hi - lo + 1), '?');
  long long k_lo = lo >= 0 ? lo / p : -((-lo + p - 1) / p);
  for (long long k = k_lo; k * p <= hi; ++k) {
    std::string block;
    bool known = true;
    for (long long t = 0; t < p && known; ++t) {
      char c = x.at(i + k * p + t);
      known = c != '?';
      block.push_back(c);
    }
    if (!known) continue;
    long long idx = 0;
    for (char c : block) idx = idx * 2 + (c - '0');
    const std::string& img = images[static_cast<size_t>(idx)];
    for (long long t = 0; t < p; ++t) {
      long long j = k * p + t;
      if (j >= lo && j <= hi) out.cells[static_cast<size_t>(j - lo)] = img[static_cast<size_t>(t)];
    }
  }
  return out;
}

inline std::set<std::string> words_of(const Expanded& e, int L, long long span) {
  std::set<std::string> out;
  for (long long h = -span; h <= span; ++h) {
    std::string sub;
    bool known = true;
    for (int t = 0; t < L && known; ++t) {
      char c = e.at(h + t);
      known = c != '?';
      sub.push_back(c);
    }
    if (known) out.insert(std::move(sub));
  }
  return out;
}

inline std::vector<std::vector<std::string>> all_sym(long long p) {
  std::vector<std::string> blocks;
  for (long long b = 0; b < (1ll << p); ++b) {
    std::string s;
    for (long long t = p - 1; t >= 0; --t) s.push_back((b >> t) & 1 ? '1' : '0');
    blocks.push_back(s);
  }
  std::vector<std::string> img = blocks;
  std::sort(img.begin(), img.end());
  std::vector<std::vector<std::string>> out;
  do {
    out.push_back(img);
  } while (std::next_permutation(img.begin(), img.end()));
  return out;
}

}  // namespace oracle

inline CriterionResult c5_exact_small_p(std::uint64_t /*seed*/) {
  const std::string id = "C5", name = "exact small-p oracle agreement";
  const int L = 8;
  const long long span = 2048;
  SigmaDatum d = span_total_pd_datum();
  SubshiftHandle S = SubshiftHandle::from_sigma(d, "S");
  SubshiftHandle F =
      SubshiftHandle::from_skeleton(flipped(skeleton_of_sigma(d)), "flipS");
  std::vector<SubshiftHandle> family = {S, F};

  // independent expansion, wide enough for every probe below
  oracle::Expanded ex = oracle::expand_sigma(d, -2400, 2400);
  oracle::Expanded exf = oracle::flip(ex);
  if (ex.cells.find('?') != std::string::npos)
    return failed(id, name, "oracle expansion not total on the working span");

  for (long long p : {1ll, 2ll}) {
    LambdaTable table = lambda_table(S, family, p, L, span);
    if (!table.exact)
      return failed(id, name, "lambda table inconclusive at p=" + std::to_string(p));
    Rational sum(0);
    for (const auto& row : table.rows) sum += row.lambda;
    if (sum != Rational(1))
      return failed(id, name,
                    "lambda rows sum to " + rational_str(sum) + " at p=" + std::to_string(p));

    // oracle recomputation: class languages and per-target counts
    auto sym = oracle::all_sym(p);
    std::set<std::string> lang_S = oracle::words_of(ex, L, span);
    std::set<std::string> lang_F = oracle::words_of(exf, L, span);
    long long b_SS = 0, b_SF = 0, denom = 0;
    for (long long i = 0; i < p; ++i) {
      std::set<std::set<std::string>> classes;
      bool member_S = false, member_F = false;
      for (const auto& images : sym) {
        auto img = oracle::block_apply(ex, images, p, i, -span - L, span + L);
        auto lw = oracle::words_of(img, L, span);
        member_S = member_S || lw == lang_S;
        member_F = member_F || lw == lang_F;
        classes.insert(std::move(lw));
      }
      denom += static_cast<long long>(classes.size());
      if (member_S) ++b_SS;
      if (member_F) ++b_SF;
    }
    BpValue lib_SS = b_p(S, S, p, L, span);
    BpValue lib_SF = b_p(S, F, p, L, span);
    if (lib_SS.inconclusive || lib_SF.inconclusive)
      return failed(id, name, "library B_p inconclusive at p=" + std::to_string(p));
    if (lib_SS.count != b_SS || lib_SF.count != b_SF)
      return failed(id, name,
                    "B_p disagrees with the oracle at p=" + std::to_string(p) + ": lib(S,S)=" +
                        std::to_string(lib_SS.count) + " oracle=" + std::to_string(b_SS) +
                        " lib(S,F)=" + std::to_string(lib_SF.count) +
                        " oracle=" + std::to_string(b_SF));
    if (table.denominator != denom)
      return failed(id, name,
                    "lambda denominator " + std::to_string(table.denominator) +
                        " != oracle " + std::to_string(denom));
    if (lib_SS.count != p)
      return failed(id, name, "B_p(S,S) != p at p=" + std::to_string(p));
    if (p == 1 && lib_SF.count != 1)
      return failed(id, name, "B_1(S, flip S) != 1");
  }
  return passed(id, name,
                "p in {1,2} at L=8, span 2048: full Sym(2^p) enumeration matches the "
                "string-based oracle; lambda rows sum to exactly 1");
}

// ---------------------------------------------------------------------------
// criterion 6: the cocycle identity

inline CriterionResult c6_cocycle(std::uint64_t /*seed*/, const VerifyBudgets& budgets) {
  const std::string id = "C6", name = "cocycle identity";
  const int depth = budgets.depth;
  const long long span = 2048;
  const int L = budgets.L;

  SigmaDatum d = span_total_pd_datum();
  ToeplitzSkeleton sk = skeleton_of_sigma(d);
  SubshiftHandle S = SubshiftHandle::from_sigma(d, "S");
  SubshiftHandle F = SubshiftHandle::from_skeleton(flipped(sk), "F");

  Arrow id_S = identity_arrow(S, L, span);
  Arrow id_F = identity_arrow(F, L, span);
  Arrow sh1 = make_arrow(S, S, BlockCode::shift_forward(), BlockCode::shift_backward(), L, span);
  Arrow sh_1 = make_arrow(S, S, BlockCode::shift_backward(), BlockCode::shift_forward(), L, span);
  Arrow fl = make_arrow(S, F, BlockCode::flip(), BlockCode::flip(), L, span);
  Arrow fl_b = make_arrow(F, S, BlockCode::flip(), BlockCode::flip(), L, span);

  // searched radius-1 conjugacy onto the 2-block-swap image; the target
  // carries the image's forced skeleton so the factor map can align
  SubshiftHandle Tv = SubshiftHandle::from_view(
      block_image_view(swap_blocks_p2(), S.view(), 0), "Tswap");
  ConjugacySearch sr = search_conjugacy(S, Tv, 1, L, span, budgets.workers);
  if (!sr.pair) return failed(id, name, "no radius-1 conjugacy found: " + sr.note);
  SubshiftHandle Tsk = SubshiftHandle::from_view_with_skeleton(
      sr.pair->fwd.applied_view(S.view()), skeleton_image(sk, sr.pair->fwd), "Tswap");
  Arrow r1 = make_arrow(S, Tsk, sr.pair->fwd, sr.pair->bwd, L, span);
  Arrow r1_b = make_arrow(Tsk, S, sr.pair->bwd, sr.pair->fwd, L, span);

  // identity arrows map to identity residues
  for (const Arrow* a : {&id_S, &id_F})
    if (!cocycle_alpha0(*a, depth, span).is_identity())
      return failed(id, name, "identity arrow has nonzero cocycle");

  // the shift automorphism x -> x+1 carries cocycle -1 (sign is recorded by
  // this check: positions move by +1, the cocycle is the inverse)
  FactorPosition c_sh1 = cocycle_alpha0(sh1, depth, span);
  for (size_t n = 0; n < c_sh1.residues.size(); ++n)
    if (c_sh1.residues[n] != pmod(-1, c_sh1.periods[n]))
      return failed(id, name, "shift arrow cocycle is not -1: " + c_sh1.str());

  std::vector<std::pair<const Arrow*, const Arrow*>> pairs = {
      {&sh1, &sh1},  {&sh_1, &sh1}, {&sh1, &sh_1}, {&id_S, &sh1}, {&sh1, &id_S},
      {&fl, &sh1},   {&fl_b, &fl},  {&fl, &fl_b},  {&sh1, &fl_b}, {&r1, &sh1},
      {&r1_b, &r1},  {&sh1, &r1_b}};
  int checked = 0;
  for (const auto& [g, f] : pairs) {
    Arrow gf = compose_arrows(*g, *f);
    FactorPosition lhs = cocycle_alpha0(gf, depth, span);
    FactorPosition rhs = cocycle_alpha0(*g, depth, span).composed(cocycle_alpha0(*f, depth, span));
    if (lhs != rhs)
      return failed(id, name,
                    "cocycle identity fails for pair " + std::to_string(checked) + ": " +
                        lhs.str() + " vs " + rhs.str());
    ++checked;
  }
  return passed(id, name,
                std::to_string(checked) +
                    " composable arrow pairs (shifts, flips, searched radius-1): "
                    "alpha0(g.f) = alpha0(g)alpha0(f) residue-wise at depth 6");
}

// ---------------------------------------------------------------------------
// criterion 7: E_p soundness

inline CriterionResult c7_ep(std::uint64_t /*seed*/) {
  const std::string id = "C7", name = "E_p soundness";
  const long long span = 2048;
  SigmaDatum d = span_total_pd_datum();
  SubshiftHandle S = SubshiftHandle::from_sigma(d, "S");
  SubshiftHandle F = SubshiftHandle::from_skeleton(flipped(skeleton_of_sigma(d)), "flipS");

  EpResult e1 = e_p_test(S, F, 1, span);
  if (e1.verdict != EpVerdict::Member || !e1.round_trip_verified)
    return failed(id, name, "E_1(S, flip S) not a verified member: " + e1.note);

  SubshiftHandle T4 = SubshiftHandle::from_view(
      block_image_view(cyclic_block_shift(4), S.view(), 0), "rot4");
  EpResult e4 = e_p_test(S, T4, 4, span);
  if (e4.verdict != EpVerdict::Member || !e4.round_trip_verified)
    return failed(id, name, "E_4(S, rotation image) not a verified member: " + e4.note);

  EpResult ed = e_p_test(S, S.shifted_generator(1, "S+1"), 2, span);
  if (ed.verdict != EpVerdict::Distinct || !ed.conflict)
    return failed(id, name, "E_2(S, S+1) expected distinct with a conflict certificate");

  auto found = e_delta_search(S, F, {1, 2, 4}, span);
  if (!found || found->first != 1)
    return failed(id, name, "E_Delta search did not return p=1 for (S, flip S)");
  return passed(id, name,
                "member verdicts round-trip verified (p=1 flip, p=4 rotation image); "
                "distinct verdict carries a concrete conflict certificate");
}

// ---------------------------------------------------------------------------
// criterion 8: the chain condition on the F2 tower

inline CriterionResult c8_chain_condition(std::uint64_t /*seed*/) {
  const std::string id = "C8", name = "chain condition witnesses";
  QuotientChain tower = f2_witness_tower();
  GroupWord a = GroupWord::generator(0), b = GroupWord::generator(1);
  GroupWord ai = a.inverse(), bi = b.inverse();
  std::vector<std::pair<std::string, GroupWord>> elems = {
      {"b", b},          {"ab", a * b},      {"ba", b * a},   {"a^-1b", ai * b},
      {"ba^-1", b * ai}, {"ab^-1", a * bi},  {"b^-1a", bi * a},
      {"aba", a * b * a}, {"a^2b", a * a * b}, {"ba^2", b * a * a}};
  for (const auto& [nm, g] : elems) {
    for (int m = 0; m + 1 <= tower.depth() - 0 && m <= 4; ++m) {
      auto c = tower.chain_condition_witness(g, m);
      if (!c)
        return failed(id, name,
                      "no witness for g=" + nm + " at level m=" + std::to_string(m));
      if (tower.conjugate_label(g, m + 1, *c) == *c)
        return failed(id, name, "witness does not re-verify for g=" + nm);
    }
  }
  return passed(id, name,
                "5-level tower (" + tower.describe() +
                    "): verified witnesses for 10 elements at all levels m=0..4");
}

// ---------------------------------------------------------------------------
// criteria 1..8 in order

inline VerifyReport run_criteria(std::uint64_t seed, const VerifyBudgets& budgets) {
  VerifyReport rep;
  rep.seed = seed;
  rep.budgets = budgets;
  rep.criteria.push_back(c1_sigma_construction(seed));
  rep.criteria.push_back(c2_equivariance(seed));
  rep.criteria.push_back(c3_injectivity(seed));
  rep.criteria.push_back(c4_claims(seed, budgets));
  rep.criteria.push_back(c5_exact_small_p(seed));
  rep.criteria.push_back(c6_cocycle(seed, budgets));
  rep.criteria.push_back(c7_ep(seed));
  rep.criteria.push_back(c8_chain_condition(seed));
  rep.all_pass = true;
  for (const auto& c : rep.criteria) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

// criterion 9: determinism and lossless formats
inline CriterionResult c9_determinism(const VerifyReport& first, std::uint64_t seed,
                                      const VerifyBudgets& budgets) {
  const std::string id = "C9", name = "determinism and formats";
  VerifyReport second = run_criteria(seed, budgets);
  std::string ja = report_to_json(first).dump(2);
  std::string jb = report_to_json(second).dump(2);
  if (ja != jb) return failed(id, name, "two runs with the same seed differ");

  // CSV round trips on real report tables
  SigmaDatum d = span_total_pd_datum();
  SubshiftHandle S = SubshiftHandle::from_sigma(d, "S");
  SubshiftHandle F = SubshiftHandle::from_skeleton(flipped(skeleton_of_sigma(d)), "flipS");
  ToeplitzSkeleton sk = skeleton_of_sigma(d);
  HoleProfile prof = separated_holes_profile(sk, {2, 4, 8, 16, 32, 64});
  std::vector<bool> essential;
  for (const auto& row : prof.rows)
    essential.push_back(essential_period_check(sk, row.period, 2 * row.period));
  Csv a = analyze_csv(prof, essential, 2048);
  LambdaTable table = lambda_table(S, {S, F}, 1, 8, 1024);
  Csv l = lambda_csv(table);
  ConjugacyPair flip_pair{BlockCode::flip(), BlockCode::flip(), 8, 2048};
  std::vector<L1Report> reps = {l1_certificate(S, flip_pair, 8, 2048)};
  Csv c = certificate_csv(reps, 2048);
  for (const Csv* csv : {&a, &l, &c})
    if (csv_parse(csv_write(*csv)) != *csv)
      return failed(id, name, "csv round-trip mismatch");
  return passed(id, name,
                "byte-identical JSON across two runs at the same seed; analyze, lambda "
                "and certificate CSVs parse back losslessly");
}

}  // namespace suite

// The full suite: criteria 1..8 plus the determinism/format criterion, which
// re-runs the first eight at the same seed and compares the serialized
// reports byte for byte.
inline VerifyReport run_verify_suite(std::uint64_t seed, const VerifyBudgets& budgets = {}) {
  VerifyReport rep = suite::run_criteria(seed, budgets);
  rep.criteria.push_back(suite::c9_determinism(rep, seed, budgets));
  rep.all_pass = true;
  for (const auto& c : rep.criteria) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

}  // namespace toeplitz
