#include "faithkit/json_io.hpp"

#include <fstream>

namespace faithkit::io {

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

json opt_to_json(const std::optional<std::string>& v) {
    return v.has_value() ? json(*v) : json(nullptr);
}

}  // namespace

json constraint_to_json(const Constraint& c) {
    json j;
    j["id"] = c.id;
    j["threshold"] = c.threshold.has_value() ? json(c.threshold->to_string()) : json(nullptr);
    j["unit"] = opt_to_json(c.unit);
    j["comparator"] = std::string(comparator_name(c.comparator));
    j["scope"] = c.scope;
    j["level"] = std::string(level_name(c.level));
    j["condition"] = opt_to_json(c.condition);
    j["action"] = opt_to_json(c.action);
    return j;
}

Constraint constraint_from_json(const json& j) {
    Constraint c;
    c.id = j.value("id", std::string());
    if (auto t = opt_string(j, "threshold")) c.threshold = parse_number(*t);
    c.unit = opt_string(j, "unit");
    if (j.contains("comparator")) c.comparator = comparator_from_name(j.at("comparator").get<std::string>());
    c.scope = j.at("scope").get<std::string>();
    c.level = level_from_name(j.at("level").get<std::string>());
    c.condition = opt_string(j, "condition");
    c.action = opt_string(j, "action");
    c.validate();
    return c;
}

json citation_to_json(const EvidenceCitation& c) {
    return json{{"doc", c.doc_id}, {"seg", c.seg_id}, {"quote", c.quote}};
}

EvidenceCitation citation_from_json(const json& j) {
    EvidenceCitation c;
    c.doc_id = j.at("doc").get<std::string>();
    c.seg_id = j.at("seg").get<std::string>();
    c.quote = j.value("quote", std::string());
    return c;
}

json analysis_to_json(const ComplianceAnalysis& a) {
    json constraints = json::array();
    for (const auto& ac : a.key_constraints) {
        json jc = constraint_to_json(ac.constraint);
        jc["violation"] = ac.violation;
        jc["evidence"] = ac.evidence.has_value() ? citation_to_json(*ac.evidence) : json(nullptr);
        constraints.push_back(std::move(jc));
    }
    json evidence = json::array();
    for (const auto& e : a.evidence) evidence.push_back(citation_to_json(e));
    return json{{"is_compliant", a.is_compliant},
                {"key_constraints", std::move(constraints)},
                {"risks", a.risks},
                {"evidence", std::move(evidence)}};
}

ComplianceAnalysis analysis_from_json(const json& j) {
    ComplianceAnalysis a;
    a.is_compliant = j.at("is_compliant").get<bool>();
    for (const auto& jc : j.value("key_constraints", json::array())) {
        AnalyzedConstraint ac;
        ac.constraint = constraint_from_json(jc);
        ac.violation = jc.value("violation", false);
        if (jc.contains("evidence") && !jc.at("evidence").is_null())
            ac.evidence = citation_from_json(jc.at("evidence"));
        a.key_constraints.push_back(std::move(ac));
    }
    for (const auto& je : j.value("risks", json::array())) a.risks.push_back(je.get<std::string>());
    for (const auto& je : j.value("evidence", json::array())) a.evidence.push_back(citation_from_json(je));
    a.validate();
    return a;
}

json document_to_json(const GeneratedDocument& d) {
    json segments = json::array();
    for (const auto& s : d.document.segments) {
        segments.push_back(json{{"id", s.id},
                                {"text", s.text},
                                {"token_count", s.token_count},
                                {"filler", s.filler}});
    }
    json constraints = json::array();
    for (const auto& dc : d.constraints) {
        json jc = constraint_to_json(dc.constraint);
        jc["seg_id"] = dc.seg_id;
        constraints.push_back(std::move(jc));
    }
    return json{{"id", d.document.id},
                {"source", std::string(source_name(d.document.source))},
                {"segments", std::move(segments)},
                {"constraints", std::move(constraints)},
                {"token_total", d.token_total}};
}

GeneratedDocument document_from_json(const json& j) {
    GeneratedDocument d;
    d.document.id = j.at("id").get<std::string>();
    d.document.source = source_from_name(j.at("source").get<std::string>());
    for (const auto& js : j.at("segments")) {
        Segment s;
        s.id = js.at("id").get<std::string>();
        s.text = js.at("text").get<std::string>();
        s.token_count = js.at("token_count").get<int64_t>();
        s.filler = js.value("filler", false);
        d.document.segments.push_back(std::move(s));
    }
    for (const auto& jc : j.value("constraints", json::array())) {
        DocConstraint dc;
        dc.constraint = constraint_from_json(jc);
        dc.seg_id = jc.at("seg_id").get<std::string>();
        d.constraints.push_back(std::move(dc));
    }
    d.token_total = j.value("token_total", int64_t{0});
    d.document.validate();
    return d;
}

json sample_to_json(const Sample& s) {
    return json{{"sample_id", s.sample_id},
                {"tier", std::string(tier_name(s.tier))},
                {"query", s.query},
                {"doc_ids", s.doc_ids},
                {"token_count", s.token_count},
                {"response", s.response},
                {"analysis", analysis_to_json(s.analysis)}};
}

Sample sample_from_json(const json& j) {
    Sample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.tier = tier_from_name(j.at("tier").get<std::string>());
    s.query = j.at("query").get<std::string>();
    for (const auto& jd : j.at("doc_ids")) s.doc_ids.push_back(jd.get<std::string>());
    s.token_count = j.at("token_count").get<int64_t>();
    s.response = j.at("response").get<std::string>();
    s.analysis = analysis_from_json(j.at("analysis"));
    return s;
}

json pair_to_json(const PreferencePair& p) {
    return json{{"pair_id", p.pair_id},
                {"sample_id", p.sample_id},
                {"prompt", p.prompt},
                {"chosen", p.chosen},
                {"rejected", p.rejected},
                {"error_type", std::string(error_type_name(p.error_type))},
                {"positions", p.positions},
                {"seed", p.seed}};
}

PreferencePair pair_from_json(const json& j) {
    PreferencePair p;
    p.pair_id = j.value("pair_id", std::string());
    p.sample_id = j.value("sample_id", std::string());
    p.prompt = j.at("prompt").get<std::string>();
    p.chosen = j.at("chosen").get<std::string>();
    p.rejected = j.at("rejected").get<std::string>();
    p.error_type = error_type_from_name(j.at("error_type").get<std::string>());
    for (const auto& jp : j.at("positions")) p.positions.push_back(jp.get<int>());
    p.seed = j.value("seed", uint64_t{0});
    if (p.positions.empty()) throw ParseError("preference pair '" + p.pair_id + "' has empty positions");
    return p;
}

json prediction_to_json(const PredictionRecord& p) {
    json j = analysis_to_json(p.analysis);
    j["sample_id"] = p.sample_id;
    return j;
}

PredictionRecord prediction_from_json(const json& j) {
    PredictionRecord p;
    p.sample_id = j.at("sample_id").get<std::string>();
    p.analysis = analysis_from_json(j);
    return p;
}

json split_to_json(const DatasetSplit& s) {
    return json{{"documents", s.document_assignment},
                {"samples", json{{"train", s.train}, {"val", s.val}, {"test", s.test}}},
                {"components", s.components}};
}

json report_to_json(const EvalReport& r) {
    json by_type = json::object();
    for (const auto& [type, rate] : r.der_by_type) by_type[std::string(error_type_name(type))] = rate;
    json by_tier = json::object();
    for (const auto& [tier, rate] : r.der_by_tier) by_tier[tier] = rate;
    return json{{"der_overall", r.der_overall},
                {"der_by_type", std::move(by_type)},
                {"der_by_tier", std::move(by_tier)},
                {"compliance_accuracy", r.compliance_accuracy},
                {"evidence_precision", r.evidence_precision},
                {"evidence_recall", r.evidence_recall},
                {"evidence_f1", r.evidence_f1},
                {"evidence_consistency", r.evidence_consistency},
                {"ambiguous_count", r.ambiguous_count},
                {"n_samples", r.n_samples},
                {"k_total", r.k_total},
                {"dangling_citations", r.dangling_citations},
                {"strict_ambiguous", r.strict_ambiguous},
                {"notes", json{{"consistency_semantic_proxy", "best-window token F1 >= 0.9"},
                               {"der_overall_weighting", "element-weighted across types"}}}};
}

template <class T>
std::vector<T> read_jsonl(const std::string& path, const std::function<T(const json&)>& parse) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    std::vector<T> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError("malformed JSON", line_no);
        try {
            out.push_back(parse(j));
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception& e) {
            throw SchemaError(e.what(), line_no);
        }
    }
    return out;
}

template std::vector<GeneratedDocument> read_jsonl<GeneratedDocument>(
    const std::string&, const std::function<GeneratedDocument(const json&)>&);
template std::vector<Sample> read_jsonl<Sample>(const std::string&,
                                                const std::function<Sample(const json&)>&);
template std::vector<PreferencePair> read_jsonl<PreferencePair>(
    const std::string&, const std::function<PreferencePair(const json&)>&);
template std::vector<PredictionRecord> read_jsonl<PredictionRecord>(
    const std::string&, const std::function<PredictionRecord(const json&)>&);

void write_jsonl(const std::string& path, const std::vector<json>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    for (const auto& r : records) out << r.dump() << "\n";
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("malformed JSON", 1);
    return j;
}

}  // namespace faithkit::io
