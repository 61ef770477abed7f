#include "faithkit/types.hpp"

#include <set>

namespace faithkit {

std::string_view error_type_name(ErrorType t) {
    switch (t) {
        case ErrorType::Threshold: return "threshold";
        case ErrorType::Unit: return "unit";
        case ErrorType::Scope: return "scope";
        case ErrorType::Level: return "level";
        case ErrorType::Condition: return "condition";
    }
    return "unknown";
}

ErrorType error_type_from_name(std::string_view s) {
    if (s == "threshold" || s == "t1") return ErrorType::Threshold;
    if (s == "unit" || s == "t2") return ErrorType::Unit;
    if (s == "scope" || s == "t3") return ErrorType::Scope;
    if (s == "level" || s == "t4") return ErrorType::Level;
    if (s == "condition" || s == "t5") return ErrorType::Condition;
    throw ParseError("unknown error type '" + std::string(s) + "'");
}

std::string_view level_keyword(Level l) {
    switch (l) {
        case Level::Shall: return "shall";
        case Level::Should: return "should";
        case Level::Must: return "must";
        case Level::May: return "may";
        case Level::ShallNot: return "shall not";
        case Level::MustNot: return "must not";
    }
    return "shall";
}

std::string_view level_name(Level l) {
    switch (l) {
        case Level::Shall: return "shall";
        case Level::Should: return "should";
        case Level::Must: return "must";
        case Level::May: return "may";
        case Level::ShallNot: return "shall_not";
        case Level::MustNot: return "must_not";
    }
    return "shall";
}

Level level_from_name(std::string_view s) {
    if (s == "shall") return Level::Shall;
    if (s == "should") return Level::Should;
    if (s == "must") return Level::Must;
    if (s == "may") return Level::May;
    if (s == "shall_not") return Level::ShallNot;
    if (s == "must_not") return Level::MustNot;
    throw ParseError("unknown obligation level '" + std::string(s) + "'");
}

bool level_is_negated(Level l) { return l == Level::ShallNot || l == Level::MustNot; }

Level level_substitute(Level l) {
    switch (l) {
        case Level::Shall: return Level::Should;
        case Level::Should: return Level::Shall;
        case Level::Must: return Level::May;
        case Level::May: return Level::Must;
        case Level::ShallNot: return Level::MustNot;
        case Level::MustNot: return Level::ShallNot;
    }
    return Level::Should;
}

std::string_view comparator_name(Comparator c) {
    switch (c) {
        case Comparator::LE: return "le";
        case Comparator::GE: return "ge";
        case Comparator::LT: return "lt";
        case Comparator::GT: return "gt";
        case Comparator::EQ: return "eq";
    }
    return "le";
}

Comparator comparator_from_name(std::string_view s) {
    if (s == "le") return Comparator::LE;
    if (s == "ge") return Comparator::GE;
    if (s == "lt") return Comparator::LT;
    if (s == "gt") return Comparator::GT;
    if (s == "eq") return Comparator::EQ;
    throw ParseError("unknown comparator '" + std::string(s) + "'");
}

std::string_view source_name(Source s) {
    switch (s) {
        case Source::GB: return "GB";
        case Source::CFR: return "CFR";
        case Source::EURLEX: return "EURLEX";
        case Source::SYNTHETIC: return "SYNTHETIC";
    }
    return "SYNTHETIC";
}

Source source_from_name(std::string_view s) {
    if (s == "GB") return Source::GB;
    if (s == "CFR") return Source::CFR;
    if (s == "EURLEX") return Source::EURLEX;
    if (s == "SYNTHETIC") return Source::SYNTHETIC;
    throw ParseError("unknown document source '" + std::string(s) + "'");
}

void Constraint::validate() const {
    if (threshold.has_value() && !unit.has_value())
        throw ConfigError("constraint '" + id + "': threshold present without unit");
    if (scope.empty()) throw ConfigError("constraint '" + id + "': scope must be non-empty");
}

void Segment::validate() const {
    if (id.empty()) throw ConfigError("segment id must be non-empty");
    int64_t measured = static_cast<int64_t>(tokenize(text).size());
    if (token_count != measured)
        throw ConfigError("segment '" + id + "': token_count " + std::to_string(token_count) +
                          " does not match tokenizer output " + std::to_string(measured));
}

void Document::validate() const {
    if (segments.empty()) throw ConfigError("document '" + id + "' has no segments");
    std::set<std::string> ids;
    for (const auto& s : segments) {
        s.validate();
        if (!ids.insert(s.id).second)
            throw ConfigError("document '" + id + "': duplicate segment id '" + s.id + "'");
    }
}

const Segment* Document::find_segment(std::string_view seg_id) const {
    for (const auto& s : segments)
        if (s.id == seg_id) return &s;
    return nullptr;
}

void AnalyzedConstraint::validate() const {
    constraint.validate();
    if (violation && !evidence.has_value())
        throw ConfigError("constraint '" + constraint.id + "' marked violated without evidence citation");
}

void ComplianceAnalysis::validate() const {
    for (const auto& c : key_constraints) c.validate();
}

void DetailElement::validate() const {
    if (ground_truth.empty())
        throw ConfigError("detail element for constraint '" + constraint_id + "' has empty ground truth");
}

}  // namespace faithkit
