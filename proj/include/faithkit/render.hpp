#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faithkit/canonical.hpp"
#include "faithkit/types.hpp"

namespace faithkit {

// Version tag of the fixed sentence templates; datasets built with a given
// tag reproduce byte-for-byte from the same seed.
inline constexpr std::string_view kRenderTemplateVersion = "rt1";

// Noun inserted after the scope phrase of threshold requirements,
// derived from the unit's dimension ("storage pressure shall not ...").
std::string_view quantity_noun(Dimension d);
bool is_quantity_noun(std::string_view word);

// Marker words that introduce a conditional clause.
bool is_condition_marker(std::string_view word);

struct TokenRange {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
    bool contains(int t) const { return t >= begin && t < end; }
};

// A rendered requirement sentence plus the token span of every detail slot.
struct RenderedConstraint {
    std::string text;  // no trailing period
    std::vector<std::string> tokens;
    TokenRange scope_span;
    TokenRange level_span;
    std::optional<TokenRange> threshold_span;
    std::optional<TokenRange> unit_span;
    std::optional<TokenRange> condition_span;

    std::optional<TokenRange> span_of(ErrorType t) const;
};

// Deterministic canonical rendering; inverse of parse_constraint for every
// constraint the generator can produce. Throws ConfigError for negated
// obligation levels combined with a threshold (never generated; the phrasing
// would be ambiguous to parse back).
RenderedConstraint render_constraint(const Constraint& c, const UnitTable& units);

std::string render_constraint_text(const Constraint& c, const UnitTable& units);

struct ElementSpan {
    size_t constraint_index = 0;
    ErrorType type = ErrorType::Threshold;
    TokenRange span;  // absolute token indices in the response
};

// Multi-sentence response: constraint sentences joined by ". " with a final ".".
struct RenderedResponse {
    std::string text;
    std::vector<std::string> tokens;
    std::vector<ElementSpan> elements;
};

RenderedResponse render_response(std::span<const Constraint> constraints, const UnitTable& units);

// Recovers (threshold, unit, scope, level, condition) from one rendered
// sentence. The action predicate of threshold-free requirements is kept in
// `action` but is not a detail slot.
Constraint parse_constraint(std::string_view sentence, const UnitTable& units);

// Splits on '.' sentence boundaries and parses each sentence.
std::vector<Constraint> parse_response(std::string_view text, const UnitTable& units);

}  // namespace faithkit
