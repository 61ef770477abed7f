#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "faithkit/canonical.hpp"
#include "faithkit/errors.hpp"

namespace faithkit {

// The five detail error types: threshold, unit, scope, level, condition.
enum class ErrorType { Threshold, Unit, Scope, Level, Condition };

inline constexpr ErrorType kAllErrorTypes[] = {ErrorType::Threshold, ErrorType::Unit, ErrorType::Scope,
                                               ErrorType::Level, ErrorType::Condition};

std::string_view error_type_name(ErrorType t);
ErrorType error_type_from_name(std::string_view s);

// Obligation strength keyword of a requirement.
enum class Level { Shall, Should, Must, May, ShallNot, MustNot };

std::string_view level_keyword(Level l);  // "shall", "shall not", ...
std::string_view level_name(Level l);     // "shall", "shall_not", ...
Level level_from_name(std::string_view s);

bool level_is_negated(Level l);

// Fixed obligation-keyword substitution map: shall<->should, must<->may,
// and the negated forms swap with each other.
Level level_substitute(Level l);

enum class Comparator { LE, GE, LT, GT, EQ };

std::string_view comparator_name(Comparator c);
Comparator comparator_from_name(std::string_view s);

enum class Source { GB, CFR, EURLEX, SYNTHETIC };

std::string_view source_name(Source s);
Source source_from_name(std::string_view s);

// Ground-truth requirement tuple. `comparator` and `action` exist for
// deterministic text rendering: the comparator picks the "not exceed" /
// "be at least" phrasing of a threshold, and the action carries the
// predicate of threshold-free requirements ("hold valid certification").
struct Constraint {
    std::string id;
    std::optional<Decimal> threshold;
    std::optional<std::string> unit;  // canonical unit id
    Comparator comparator = Comparator::LE;
    std::string scope;
    Level level = Level::Shall;
    std::optional<std::string> condition;
    std::optional<std::string> action;

    // threshold implies unit; scope must be non-empty.
    void validate() const;
};

struct Segment {
    std::string id;
    std::string text;
    int64_t token_count = 0;  // tokenizer length of text
    bool filler = false;      // padding context, contributes no detail elements

    void validate() const;
};

struct Document {
    std::string id;
    Source source = Source::SYNTHETIC;
    std::vector<Segment> segments;

    void validate() const;  // >=1 segment, segment ids unique
    const Segment* find_segment(std::string_view seg_id) const;
};

struct EvidenceCitation {
    std::string doc_id;
    std::string seg_id;
    std::string quote;

    bool same_location(const EvidenceCitation& o) const {
        return doc_id == o.doc_id && seg_id == o.seg_id;
    }
};

// One annotated constraint inside a compliance analysis: the slot values
// plus violation flag and supporting citation.
struct AnalyzedConstraint {
    Constraint constraint;
    bool violation = false;
    std::optional<EvidenceCitation> evidence;

    void validate() const;  // violated constraints must carry evidence
};

struct ComplianceAnalysis {
    bool is_compliant = true;
    std::vector<AnalyzedConstraint> key_constraints;
    std::vector<std::string> risks;
    std::vector<EvidenceCitation> evidence;

    void validate() const;
};

// One typed, positioned detail slot: the ground-truth value and (optionally)
// the model's prediction, both in canonical text rendering.
struct DetailElement {
    ErrorType element_type = ErrorType::Threshold;
    std::string ground_truth;
    std::optional<std::string> prediction;
    std::string sample_id;
    std::string constraint_id;

    void validate() const;  // ground_truth non-empty
};

// Contrastive pair produced by minimal detail perturbation. Positions are
// response-token indices (chosen-side based; see diff_positions).
struct PreferencePair {
    std::string pair_id;
    std::string sample_id;
    std::string prompt;
    std::string chosen;
    std::string rejected;
    ErrorType error_type = ErrorType::Threshold;
    std::vector<int> positions;
    uint64_t seed = 0;
};

}  // namespace faithkit
