#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faithkit/metrics.hpp"
#include "faithkit/synthgen.hpp"
#include "faithkit/types.hpp"

namespace faithkit::io {

using json = nlohmann::json;

json constraint_to_json(const Constraint& c);
Constraint constraint_from_json(const json& j);

json citation_to_json(const EvidenceCitation& c);
EvidenceCitation citation_from_json(const json& j);

// Appendix-style analysis object: "is_compliant", "key_constraints",
// "risks", "evidence" with "doc"/"seg"/"quote" citations.
json analysis_to_json(const ComplianceAnalysis& a);
ComplianceAnalysis analysis_from_json(const json& j);

json document_to_json(const GeneratedDocument& d);
GeneratedDocument document_from_json(const json& j);

json sample_to_json(const Sample& s);
Sample sample_from_json(const json& j);

json pair_to_json(const PreferencePair& p);
PreferencePair pair_from_json(const json& j);

json prediction_to_json(const PredictionRecord& p);
PredictionRecord prediction_from_json(const json& j);

json split_to_json(const DatasetSplit& s);

json report_to_json(const EvalReport& r);

// JSONL helpers. Parse failures surface as SchemaError with the 1-based
// line number.
template <class T>
std::vector<T> read_jsonl(const std::string& path, const std::function<T(const json&)>& parse);

void write_jsonl(const std::string& path, const std::vector<json>& records);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace faithkit::io
