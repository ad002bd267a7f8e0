#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "khintmart/md_system.hpp"
#include "khintmart/norms.hpp"
#include "khintmart/search.hpp"
#include "khintmart/transforms.hpp"

namespace khintmart {

using Json = nlohmann::ordered_json;

/// MD-system document:
/// { "n": int, "breakpoints": ["0/1",...,"1/1"],
///   "partitions": [[cell id per atom] per level],
///   "values": [["p/q" per atom] per level] }
/// Rationals round-trip bit-exactly (canonical lowest terms).
inline Json md_to_json(const MDSystem& d) {
  Json j;
  j["n"] = d.levels();
  Json bps = Json::array();
  for (const auto& b : d.grid()->breakpoints()) bps.push_back(b.to_string());
  j["breakpoints"] = std::move(bps);
  Json partitions = Json::array();
  Json values = Json::array();
  for (std::size_t k = 1; k <= d.levels(); ++k) {
    Json labels = Json::array();
    Json vals = Json::array();
    for (std::size_t a = 0; a < d.atom_count(); ++a) {
      labels.push_back(d.label(k, a));
      vals.push_back(d.value(k, a).to_string());
    }
    partitions.push_back(std::move(labels));
    values.push_back(std::move(vals));
  }
  j["partitions"] = std::move(partitions);
  j["values"] = std::move(values);
  return j;
}

inline MDSystem md_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("breakpoints") || !j.contains("partitions") ||
      !j.contains("values"))
    throw Error(ErrorCode::ParseError, "MD-system document needs n, breakpoints, partitions, values");
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Rational> bps;
  for (const auto& s : j.at("breakpoints")) bps.push_back(Rational::from_string(s.get<std::string>()));
  GridPtr grid = make_grid(std::move(bps));

  const auto& parts = j.at("partitions");
  const auto& vals = j.at("values");
  if (parts.size() != n || vals.size() != n)
    throw Error(ErrorCode::ParseError, "partition/value level count does not match n");
  std::vector<CellLabeling> partitions(n);
  std::vector<std::vector<Rational>> values(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& lbl : parts.at(k)) partitions[k].labels.push_back(lbl.get<std::uint32_t>());
    for (const auto& s : vals.at(k)) values[k].push_back(Rational::from_string(s.get<std::string>()));
  }
  return MDSystem(grid, std::move(partitions), std::move(values));
}

inline Json validation_report_to_json(const ValidationReport& r) {
  Json j;
  j["valid"] = r.valid;
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    violations.push_back(Json{{"kind", violation_kind_name(v.kind)},
                              {"level", v.level},
                              {"cell", v.cell},
                              {"detail", v.detail}});
  }
  j["violations"] = std::move(violations);
  return j;
}

inline Json bound_check_to_json(const BoundCheck& b) {
  return Json{{"lhs", b.lhs}, {"rhs", b.rhs}, {"holds", b.holds}, {"slack", b.slack}};
}

inline Json summary_to_json(const SystemSummary& s) {
  return Json{{"pnorm", s.pnorm},
              {"sup_cww_sq", s.sup_cww_sq.to_string()},
              {"sup_cww", std::sqrt(s.sup_cww_sq.to_double())},
              {"levels", s.levels},
              {"atoms", s.atoms},
              {"valid", s.valid},
              {"trivial", s.trivial}};
}

inline Json transform_report_to_json(const TransformReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["level"] = r.level;
  j["p"] = r.p;
  j["before"] = summary_to_json(r.before);
  j["after"] = summary_to_json(r.after);
  j["cww_pointwise_relation"] = pointwise_relation_name(r.relation);
  j["pnorm_delta"] = r.pnorm_delta;
  Json certs;
  certs["after_valid"] = r.after_valid;
  certs["pnorm_nondecreasing"] = r.pnorm_nondecreasing;
  if (r.kind == "r1") {
    certs["cww_pointwise_equal"] = r.cww_pointwise_equal;
    certs["integrals_preserved"] = r.integrals_preserved;
    certs["output_ip"] = r.output_ip;
  } else if (r.kind == "r2") {
    certs["cww_correspondence_equal"] = r.cww_correspondence_equal;
    certs["output_k_dyadic"] = r.output_k_dyadic;
    certs["sup_nonincreasing"] = r.sup_nonincreasing;
  } else {
    certs["sup_preserved"] = r.sup_preserved;
    if (r.kind == "procedure2") {
      certs["output_rademacher_step"] = r.output_rademacher_step;
      certs["cprime_rel_error_bound"] = r.cprime_rel_error_bound;
    }
  }
  j["certificates"] = std::move(certs);
  j["notes"] = r.notes;
  j["passed"] = r.passed;
  return j;
}

inline Json pipeline_report_to_json(const PipelineReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["p"] = r.p;
  j["u_before"] = r.u_before;
  j["u_after"] = r.u_after;
  j["u_nondecreasing"] = r.u_nondecreasing;
  j["passed"] = r.passed;
  Json steps = Json::array();
  for (const auto& s : r.steps) steps.push_back(transform_report_to_json(s));
  j["steps"] = std::move(steps);
  return j;
}

inline Json search_result_to_json(const SearchResult& r) {
  Json j;
  j["best_value"] = r.best_value;
  j["evaluations"] = r.evaluations;
  Json trace = Json::array();
  for (const auto& [eval, value] : r.trace) trace.push_back(Json{{"evaluation", eval}, {"value", value}});
  j["trace"] = std::move(trace);
  j["witness"] = md_to_json(r.witness);
  return j;
}

}  // namespace khintmart
