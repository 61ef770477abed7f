#include "faithkit/render.hpp"

#include <array>

namespace faithkit {

std::string_view quantity_noun(Dimension d) {
    switch (d) {
        case Dimension::Pressure: return "pressure";
        case Dimension::Mass: return "capacity";
        case Dimension::Volume: return "volume";
        case Dimension::Temperature: return "temperature";
        case Dimension::Length: return "clearance";
        case Dimension::Time: return "duration";
    }
    return "value";
}

bool is_quantity_noun(std::string_view word) {
    static constexpr std::array<std::string_view, 6> nouns = {"pressure",    "capacity",  "volume",
                                                              "temperature", "clearance", "duration"};
    for (auto n : nouns)
        if (n == word) return true;
    return false;
}

bool is_condition_marker(std::string_view word) {
    static constexpr std::array<std::string_view, 7> markers = {"when",   "if",     "unless", "where",
                                                                "during", "before", "after"};
    for (auto m : markers)
        if (m == word) return true;
    return false;
}

std::optional<TokenRange> RenderedConstraint::span_of(ErrorType t) const {
    switch (t) {
        case ErrorType::Threshold: return threshold_span;
        case ErrorType::Unit: return unit_span;
        case ErrorType::Scope: return scope_span;
        case ErrorType::Level: return level_span;
        case ErrorType::Condition: return condition_span;
    }
    return std::nullopt;
}

namespace {

std::string_view comparator_phrase(Comparator c) {
    switch (c) {
        case Comparator::LE: return "not exceed";
        case Comparator::GE: return "be at least";
        case Comparator::LT: return "remain below";
        case Comparator::GT: return "exceed";
        case Comparator::EQ: return "equal";
    }
    return "not exceed";
}

void append_tokens(std::vector<std::string>& out, std::string_view text) {
    for (auto& t : tokenize(text)) out.push_back(std::move(t));
}

std::string join_tokens(std::span<const std::string> tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s.push_back(' ');
        s += t;
    }
    return s;
}

}  // namespace

RenderedConstraint render_constraint(const Constraint& c, const UnitTable& units) {
    c.validate();
    RenderedConstraint r;
    auto& toks = r.tokens;

    auto mark = [&](auto start) { return TokenRange{start, static_cast<int>(toks.size())}; };

    int begin = 0;
    append_tokens(toks, c.scope);
    r.scope_span = mark(begin);

    if (c.threshold.has_value()) {
        if (level_is_negated(c.level))
            throw ConfigError("constraint '" + c.id + "': negated level with threshold is not renderable");
        toks.emplace_back(quantity_noun(units.dimension_of(*c.unit)));

        begin = static_cast<int>(toks.size());
        append_tokens(toks, level_keyword(c.level));
        r.level_span = mark(begin);

        append_tokens(toks, comparator_phrase(c.comparator));

        begin = static_cast<int>(toks.size());
        toks.push_back(c.threshold->to_string());
        r.threshold_span = mark(begin);

        begin = static_cast<int>(toks.size());
        toks.push_back(units.display_of(*c.unit));
        r.unit_span = mark(begin);
    } else {
        begin = static_cast<int>(toks.size());
        append_tokens(toks, level_keyword(c.level));
        r.level_span = mark(begin);

        append_tokens(toks, c.action.value_or("comply with the applicable requirements"));
    }

    if (c.condition.has_value()) {
        begin = static_cast<int>(toks.size());
        append_tokens(toks, *c.condition);
        r.condition_span = mark(begin);
    }

    r.text = join_tokens(toks);
    return r;
}

std::string render_constraint_text(const Constraint& c, const UnitTable& units) {
    return render_constraint(c, units).text;
}

RenderedResponse render_response(std::span<const Constraint> constraints, const UnitTable& units) {
    RenderedResponse resp;
    for (size_t i = 0; i < constraints.size(); ++i) {
        RenderedConstraint rc = render_constraint(constraints[i], units);
        int offset = static_cast<int>(resp.tokens.size());
        for (auto t : kAllErrorTypes) {
            if (auto span = rc.span_of(t))
                resp.elements.push_back({i, t, {span->begin + offset, span->end + offset}});
        }
        if (!resp.text.empty()) resp.text.push_back(' ');
        resp.text += rc.text;
        resp.text.push_back('.');
        resp.tokens.insert(resp.tokens.end(), rc.tokens.begin(), rc.tokens.end());
        resp.tokens.emplace_back(".");
    }
    return resp;
}

namespace {

bool is_positive_level_keyword(std::string_view w) {
    return w == "shall" || w == "should" || w == "must" || w == "may";
}

Level positive_level(std::string_view w) {
    if (w == "shall") return Level::Shall;
    if (w == "should") return Level::Should;
    if (w == "must") return Level::Must;
    return Level::May;
}

struct ThresholdTail {
    Comparator comparator;
    Decimal value;
    std::string unit;
};

// Matches "<comparator phrase> <value> <unit>" exactly; anything else is an
// action predicate.
std::optional<ThresholdTail> match_threshold_tail(std::span<const std::string> rest, bool negated,
                                                  const UnitTable& units) {
    size_t consumed = 0;
    Comparator cmp;
    if (negated) {
        if (rest.size() >= 1 && rest[0] == "exceed") {
            cmp = Comparator::LE;
            consumed = 1;
        } else {
            return std::nullopt;
        }
    } else if (rest.size() >= 3 && rest[0] == "be" && rest[1] == "at" && rest[2] == "least") {
        cmp = Comparator::GE;
        consumed = 3;
    } else if (rest.size() >= 2 && rest[0] == "remain" && rest[1] == "below") {
        cmp = Comparator::LT;
        consumed = 2;
    } else if (rest.size() >= 1 && rest[0] == "exceed") {
        cmp = Comparator::GT;
        consumed = 1;
    } else if (rest.size() >= 1 && rest[0] == "equal") {
        cmp = Comparator::EQ;
        consumed = 1;
    } else {
        return std::nullopt;
    }
    if (rest.size() != consumed + 2) return std::nullopt;
    const std::string& value_tok = rest[consumed];
    const std::string& unit_tok = rest[consumed + 1];
    if (value_tok.empty() || !(value_tok[0] >= '0' && value_tok[0] <= '9')) return std::nullopt;
    if (!units.knows(unit_tok)) return std::nullopt;
    return ThresholdTail{cmp, parse_number(value_tok), units.canonicalize(unit_tok)};
}

}  // namespace

Constraint parse_constraint(std::string_view sentence, const UnitTable& units) {
    std::vector<std::string> all = tokenize(sentence);
    std::vector<std::string> toks;
    toks.reserve(all.size());
    for (auto& t : all) {
        if (!is_punctuation_token(t)) toks.push_back(std::move(t));
    }
    if (toks.empty()) throw ParseError("empty constraint sentence");

    size_t cond_idx = toks.size();
    for (size_t i = 0; i < toks.size(); ++i) {
        if (is_condition_marker(toks[i])) {
            cond_idx = i;
            break;
        }
    }

    Constraint c;
    if (cond_idx < toks.size())
        c.condition = join_tokens(std::span(toks).subspan(cond_idx));

    std::span<const std::string> main(toks.data(), cond_idx);
    size_t level_idx = main.size();
    for (size_t i = 0; i < main.size(); ++i) {
        if (is_positive_level_keyword(main[i])) {
            level_idx = i;
            break;
        }
    }
    if (level_idx == main.size())
        throw ParseError("no obligation keyword in '" + std::string(sentence) + "'");
    if (level_idx == 0) throw ParseError("empty scope in '" + std::string(sentence) + "'");

    bool negated = level_idx + 1 < main.size() && main[level_idx + 1] == "not";
    std::span<const std::string> rest = main.subspan(level_idx + (negated ? 2 : 1));

    if (auto tail = match_threshold_tail(rest, negated, units)) {
        c.comparator = tail->comparator;
        c.threshold = tail->value;
        c.unit = tail->unit;
        c.level = positive_level(main[level_idx]);
        size_t scope_end = level_idx;
        if (scope_end > 1 && is_quantity_noun(main[scope_end - 1])) --scope_end;
        c.scope = join_tokens(main.subspan(0, scope_end));
    } else {
        if (negated) {
            c.level = main[level_idx] == "shall" ? Level::ShallNot : Level::MustNot;
        } else {
            c.level = positive_level(main[level_idx]);
        }
        c.scope = join_tokens(main.subspan(0, level_idx));
        if (!rest.empty()) c.action = join_tokens(rest);
    }
    c.validate();
    return c;
}

std::vector<Constraint> parse_response(std::string_view text, const UnitTable& units) {
    std::vector<Constraint> out;
    size_t start = 0;
    while (start < text.size()) {
        size_t dot = text.find('.', start);
        // A '.' inside a decimal literal is not a sentence boundary.
        while (dot != std::string_view::npos && dot + 1 < text.size() && dot > 0 &&
               text[dot - 1] >= '0' && text[dot - 1] <= '9' && text[dot + 1] >= '0' && text[dot + 1] <= '9') {
            dot = text.find('.', dot + 1);
        }
        size_t end = dot == std::string_view::npos ? text.size() : dot;
        std::string_view sentence = text.substr(start, end - start);
        size_t content = sentence.find_first_not_of(" \t\n");
        if (content != std::string_view::npos) out.push_back(parse_constraint(sentence, units));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return out;
}

}  // namespace faithkit
