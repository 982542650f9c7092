#pragma once
// Report emission: CSV tables for word analysis, lambda tables and claim
// certificates, each row carrying its depth/span/L budget so a finite-scale
// verdict never masquerades as a limit claim.

#include <string>
#include <vector>

#include "toeplitz/amenability_witness.hpp"
#include "toeplitz/conjugacy_groupoid.hpp"
#include "toeplitz/io.hpp"

namespace toeplitz {

// analyze: one row per level (p, |Per|, |H|, min-gap, density)
inline Csv analyze_csv(const HoleProfile& prof, const std::vector<bool>& essential,
                       long long span_budget) {
  Csv csv;
  csv.header = {"p", "per", "holes", "min_gap", "density", "essential", "span_budget"};
  for (size_t i = 0; i < prof.rows.size(); ++i) {
    const auto& r = prof.rows[i];
    csv.rows.push_back({std::to_string(r.period), std::to_string(r.per_count),
                        std::to_string(r.hole_count), std::to_string(r.min_gap),
                        rational_str(r.density),
                        i < essential.size() ? (essential[i] ? "yes" : "no") : "-",
                        std::to_string(span_budget)});
  }
  return csv;
}

// lambda table rows (exact rationals as num/den strings)
inline Csv lambda_csv(const LambdaTable& table) {
  Csv csv;
  csv.header = {"p", "L", "span", "name", "B", "lambda", "in_family", "exact"};
  for (const auto& row : table.rows)
    csv.rows.push_back({std::to_string(table.p), std::to_string(table.L),
                        std::to_string(table.span), row.name, std::to_string(row.b),
                        rational_str(row.lambda), row.in_family ? "yes" : "no",
                        table.exact ? "yes" : "no"});
  return csv;
}

// certificate rows (p, i, status, pi-id, gap, epsilon)
inline Csv certificate_csv(const std::vector<L1Report>& reports, long long span_budget) {
  Csv csv;
  csv.header = {"p", "i", "status", "pi_id", "gap", "epsilon", "span_budget"};
  for (const auto& rep : reports) {
    for (const auto& e : rep.claim1) {
      csv.rows.push_back({std::to_string(rep.p), std::to_string(e.i),
                          to_string(e.status),
                          e.pi ? std::to_string(e.pi->id()) : "-",
                          std::to_string(rep.min_gap_x), rational_str(rep.eps),
                          std::to_string(span_budget)});
    }
  }
  return csv;
}

inline Json l1_report_to_json(const L1Report& rep) {
  Json j;
  j["p"] = rep.p;
  j["radius"] = rep.radius;
  j["hole_count"] = rep.hole_count_x;
  j["min_gap"] = rep.min_gap_x;
  j["hole_count_image_lower"] = rep.hole_count_y_lower;
  j["certified_fraction"] = rational_str(rep.certified_fraction);
  j["epsilon"] = rational_str(rep.eps);
  j["bound_witnessed"] = rep.bound_witnessed;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline Json factor_position_to_json(const FactorPosition& fp) {
  return Json{{"periods", fp.periods}, {"residues", fp.residues}};
}

}  // namespace toeplitz
