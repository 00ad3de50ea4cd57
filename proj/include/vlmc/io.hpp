#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "json.hpp"
#include "vlmc/alis_system.hpp"
#include "vlmc/stationary.hpp"

namespace vlmc {

using json = nlohmann::json;

/// q-rule JSON:
///   {"kind": "constant", "q0": x}
///   {"kind": "table", "values": {"c": q0, ...}, "fallback": x}
///   {"kind": "random", "seed": s, "lo": a, "hi": b}
///   {"kind": "patterns", "rules": [{"match": re, "q0": x} |
///       {"match": re, "geometric": "q0"|"q1", "scale": a, "ratio": r, "group": g}], "fallback": x}
std::shared_ptr<const QRule> rule_from_json(const json& j);
/// Throws BadParams for rules without a JSON form.
json rule_to_json(const QRule& rule);

/// Tree file: {"version": 1, "source": {...}, "q": rule}. Sources:
///   {"kind": "family", "name": n, "params": {...}}
///   {"kind": "explicit", "contexts": [...]}
///   {"kind": "stabilized", "tree": <tree file>, "depth_budget": d}  (no "q")
ProbabilisedTree tree_from_json(const json& j);
/// Rules without a JSON form are tabulated on contexts of length <= table_len.
json tree_to_json(const ProbabilisedTree& pt, std::size_t table_len = 24);
/// Throws BadParams with the line of the first JSON error.
ProbabilisedTree load_tree(const std::string& path);
json parse_json_text(const std::string& text);

json kappa_to_json(const KappaSum& k);
json q_to_json(const QMatrix& q);
json analyze_report(const ProbabilisedTree& pt, const QMatrix& q, const StabilityVerdict& st);
json stationary_report(const Decision& d, std::size_t check_depth);

void write_q_csv(std::ostream& os, const QMatrix& q);
void write_kappa_csv(std::ostream& os, const QMatrix& q);
void write_vector_csv(std::ostream& os, const QMatrix& q, const FixedVector& v);
/// Rows of comma- or whitespace-separated numbers.
std::vector<std::vector<double>> read_matrix_csv(std::istream& is);

/// Dump with sorted keys and round-trip exact numbers.
std::string dump_report(const json& j);

}  // namespace vlmc
