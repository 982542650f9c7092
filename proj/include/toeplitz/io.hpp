#pragma once
// File formats: JSON-shaped chain/skeleton/sigma/code/permutation/arrow/
// witness files, window dumps, and the CSV emission used by the reports.
// nlohmann::json keeps object keys sorted, so identical inputs serialize to
// identical bytes.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toeplitz/block_codes.hpp"
#include "toeplitz/common.hpp"
#include "toeplitz/group_chain.hpp"
#include "toeplitz/sigma_lab.hpp"
#include "toeplitz/toeplitz_core.hpp"

namespace toeplitz {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// small helpers

inline std::string rational_str(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational rational_parse(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    fail(Errc::parse_error, "bad rational: " + s);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::parse_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::parse_error, "cannot write " + path);
  out << data;
}

inline Json load_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    fail(Errc::parse_error, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// chains

inline Json chain_to_json(const QuotientChain& c) {
  Json j;
  if (c.is_cyclic()) {
    j["cyclic"] = c.periods();
    return j;
  }
  Json levels = Json::array();
  for (int n = 1; n <= c.depth(); ++n) {
    const FiniteGroup& q = c.level(n);
    Json lvl;
    lvl["order"] = q.order();
    if (q.modular()) {
      lvl["cyclic"] = true;
    } else if (q.perm_backed()) {
      Json gens = Json::array();
      for (const auto& p : q.generator_perms()) gens.push_back(p);
      lvl["perm_gens"] = gens;
    } else {
      Json mul = Json::array();
      for (int a = 0; a < q.order(); ++a) {
        Json row = Json::array();
        for (int b = 0; b < q.order(); ++b) row.push_back(q.mul(a, b));
        mul.push_back(row);
      }
      lvl["mul"] = mul;
    }
    levels.push_back(lvl);
  }
  j["levels"] = levels;
  Json proj = Json::array();
  for (int n = 2; n <= c.depth(); ++n) {
    Json pr = Json::array();
    for (int a = 0; a < c.level(n).order(); ++a) pr.push_back(c.proj_down(n, a));
    proj.push_back(pr);
  }
  j["proj"] = proj;
  Json gens = Json::array();
  for (int g = 0; g < c.num_generators(); ++g) {
    Json im = Json::array();
    for (int n = 1; n <= c.depth(); ++n) im.push_back(c.generator_image(g, n));
    gens.push_back(im);
  }
  j["gens"] = gens;
  return j;
}

inline QuotientChain chain_from_json(const Json& j) {
  try {
    if (j.contains("cyclic"))
      return QuotientChain::cyclic(j.at("cyclic").get<std::vector<long long>>());
    std::vector<FiniteGroup> levels;
    for (const auto& lvl : j.at("levels")) {
      if (lvl.contains("cyclic") && lvl.at("cyclic").get<bool>())
        levels.push_back(FiniteGroup::cyclic(lvl.at("order").get<long long>()));
      else if (lvl.contains("perm_gens"))
        levels.push_back(
            FiniteGroup::from_generators(lvl.at("perm_gens").get<std::vector<Perm>>()));
      else
        levels.push_back(
            FiniteGroup::from_table(lvl.at("mul").get<std::vector<std::vector<int>>>()));
    }
    auto proj = j.at("proj").get<std::vector<std::vector<int>>>();
    auto gens = j.at("gens").get<std::vector<std::vector<int>>>();
    return QuotientChain::from_levels(std::move(levels), std::move(proj), std::move(gens));
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad chain file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// skeletons and windows

inline Json skeleton_to_json(const ToeplitzSkeleton& sk) {
  Json stages = Json::array();
  for (const auto& st : sk.stages()) {
    Json s;
    s["p"] = st.period;
    Json fill = Json::object();
    for (const auto& [r, v] : st.fill) fill[std::to_string(r)] = cell_bit(v);
    s["fill"] = fill;
    stages.push_back(s);
  }
  return Json{{"stages", stages}};
}

inline ToeplitzSkeleton skeleton_from_json(const Json& j) {
  try {
    std::vector<ToeplitzSkeleton::Stage> stages;
    for (const auto& s : j.at("stages")) {
      ToeplitzSkeleton::Stage st;
      st.period = s.at("p").get<long long>();
      for (const auto& [key, val] : s.at("fill").items())
        st.fill[std::stoll(key)] = bit_cell(val.get<int>());
      stages.push_back(std::move(st));
    }
    return ToeplitzSkeleton(std::move(stages));
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad skeleton file: ") + e.what());
  }
}

// window dumps: string over {0,1,?} with an offset header
inline Json window_to_json(const Window& w) {
  return Json{{"start", w.start}, {"cells", w.cells}};
}

inline Window window_from_json(const Json& j) {
  try {
    return Window{j.at("start").get<long long>(), j.at("cells").get<std::string>()};
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad window: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// sigma data

inline Json sigma_to_json(const SigmaDatum& d) {
  Json j;
  j["chain"] = chain_to_json(*d.chain);
  j["y"] = d.y.residues;
  j["not_in_G"] = d.y.not_in_G;
  Json z = Json::object();
  for (int n = 1; n <= d.z.depth; ++n) {
    Json lvl = Json::object();
    for (const auto& [a, v] : d.z.bits[static_cast<size_t>(n - 1)])
      lvl[std::to_string(a)] = cell_bit(v);
    z[std::to_string(n)] = lvl;
  }
  j["z"] = z;
  return j;
}

inline SigmaDatum sigma_from_json(const Json& j, ChainPtr chain = nullptr) {
  try {
    SigmaDatum d;
    d.chain = chain ? chain
                    : std::make_shared<const QuotientChain>(chain_from_json(j.at("chain")));
    d.y.residues = j.at("y").get<std::vector<int>>();
    d.y.depth = static_cast<int>(d.y.residues.size());
    d.y.not_in_G = j.value("not_in_G", false);
    d.z.depth = d.y.depth;
    d.z.bits.resize(static_cast<size_t>(d.z.depth));
    for (const auto& [lvl, labels] : j.at("z").items()) {
      int n = std::stoi(lvl);
      for (const auto& [a, v] : labels.items())
        d.z.bits[static_cast<size_t>(n - 1)][std::stoi(a)] = bit_cell(v.get<int>());
    }
    validate_datum(d);
    return d;
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad sigma file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// codes, permutations, arrows, witnesses

inline Json code_to_json(const BlockCode& c) {
  return Json{{"r", c.radius()}, {"table", c.table()}};
}

inline BlockCode code_from_json(const Json& j) {
  try {
    return BlockCode(j.at("r").get<int>(), j.at("table").get<std::string>());
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad code file: ") + e.what());
  }
}

inline Json permutation_to_json(const BlockPermutation& p) {
  return Json{{"p", p.p}, {"images", p.images}};
}

inline BlockPermutation permutation_from_json(const Json& j) {
  try {
    return make_block_permutation(j.at("p").get<long long>(),
                                  j.at("images").get<std::vector<std::uint32_t>>());
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad permutation file: ") + e.what());
  }
}

struct ArrowFile {
  std::string source_ref, target_ref;
  BlockCode fwd, bwd;
  int L = 0;
  long long span = 0;
};

inline Json arrow_to_json(const ArrowFile& a) {
  Json j;
  j["source"] = a.source_ref;
  j["target"] = a.target_ref;
  j["fwd"] = code_to_json(a.fwd);
  j["bwd"] = code_to_json(a.bwd);
  j["verified_at"] = Json{{"L", a.L}, {"span", a.span}};
  return j;
}

inline ArrowFile arrow_from_json(const Json& j) {
  try {
    ArrowFile a;
    a.source_ref = j.at("source").get<std::string>();
    a.target_ref = j.at("target").get<std::string>();
    a.fwd = code_from_json(j.at("fwd"));
    a.bwd = code_from_json(j.at("bwd"));
    a.L = j.at("verified_at").at("L").get<int>();
    a.span = j.at("verified_at").at("span").get<long long>();
    return a;
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad arrow file: ") + e.what());
  }
}

inline Json witness_to_json(const DistinguishingWitness& w) {
  Json j;
  j["n"] = w.level;
  j["a0"] = w.label;
  j["f"] = w.f.str();
  j["f0"] = w.f0.str();
  j["f1"] = w.f1.str();
  return j;
}

inline DistinguishingWitness witness_from_json(const Json& j) {
  try {
    DistinguishingWitness w;
    w.level = j.at("n").get<int>();
    w.label = j.at("a0").get<int>();
    w.f = GroupWord::parse(j.at("f").get<std::string>());
    w.f0 = GroupWord::parse(j.at("f0").get<std::string>());
    w.f1 = GroupWord::parse(j.at("f1").get<std::string>());
    return w;
  } catch (const Json::exception& e) {
    fail(Errc::parse_error, std::string("bad witness file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV (comma-free fields only; parsing is lossless by construction)

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool operator==(const Csv&) const = default;
};

inline std::string csv_write(const Csv& csv) {
  std::string out;
  auto emit_row = [&out](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i].find(',') != std::string::npos || row[i].find('\n') != std::string::npos)
        fail(Errc::invalid_argument, "csv field contains a separator: " + row[i]);
      if (i) out.push_back(',');
      out += row[i];
    }
    out.push_back('\n');
  };
  emit_row(csv.header);
  for (const auto& row : csv.rows) emit_row(row);
  return out;
}

inline Csv csv_parse(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (first) {
      csv.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != csv.header.size())
        fail(Errc::parse_error, "csv row width mismatch");
      csv.rows.push_back(std::move(fields));
    }
  }
  if (first) fail(Errc::parse_error, "empty csv");
  return csv;
}

}  // namespace toeplitz
