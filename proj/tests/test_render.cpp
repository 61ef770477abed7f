#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faithkit/render.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/tables.hpp"

using namespace faithkit;

namespace {

Constraint pressure_limit() {
    Constraint c;
    c.id = "c1";
    c.threshold = parse_number("70.0");
    c.unit = "mpa";
    c.comparator = Comparator::LE;
    c.scope = "stationary storage";
    c.level = Level::Shall;
    return c;
}

}  // namespace

TEST_CASE("canonical rendering of the pressure limit") {
    CHECK(render_constraint_text(pressure_limit(), UnitTable::builtin()) ==
          "stationary storage pressure shall not exceed 70.0 MPa");
}

TEST_CASE("advisory requirement renders its keyword") {
    Constraint c;
    c.id = "c2";
    c.scope = "maintenance personnel";
    c.level = Level::Should;
    c.action = "hold valid certification";
    std::string text = render_constraint_text(c, UnitTable::builtin());
    CHECK(text.find("should") != std::string::npos);
    CHECK(text == "maintenance personnel should hold valid certification");
}

TEST_CASE("rendering is deterministic") {
    Constraint c = pressure_limit();
    c.condition = "when pressure exceeds 50.0 MPa";
    CHECK(render_constraint_text(c, UnitTable::builtin()) ==
          render_constraint_text(c, UnitTable::builtin()));
}

TEST_CASE("negated obligations render and threshold with negated level is rejected") {
    Constraint c;
    c.id = "c3";
    c.scope = "control room operators";
    c.level = Level::ShallNot;
    c.action = "bypass interlock circuits";
    CHECK(render_constraint_text(c, UnitTable::builtin()) ==
          "control room operators shall not bypass interlock circuits");

    Constraint bad = pressure_limit();
    bad.level = Level::MustNot;
    CHECK_THROWS_AS(render_constraint_text(bad, UnitTable::builtin()), ConfigError);
}

TEST_CASE("rendered tokens re-tokenize to themselves") {
    Constraint c = pressure_limit();
    c.condition = "when pressure exceeds 50.0 MPa";
    RenderedConstraint r = render_constraint(c, UnitTable::builtin());
    CHECK(tokenize(r.text) == r.tokens);
}

TEST_CASE("slot spans point at the right tokens") {
    Constraint c = pressure_limit();
    c.condition = "when pressure exceeds 50.0 MPa";
    RenderedConstraint r = render_constraint(c, UnitTable::builtin());
    REQUIRE(r.threshold_span.has_value());
    CHECK(r.tokens[static_cast<size_t>(r.threshold_span->begin)] == "70.0");
    REQUIRE(r.unit_span.has_value());
    CHECK(r.tokens[static_cast<size_t>(r.unit_span->begin)] == "MPa");
    CHECK(r.tokens[static_cast<size_t>(r.scope_span.begin)] == "stationary");
    CHECK(r.tokens[static_cast<size_t>(r.level_span.begin)] == "shall");
    REQUIRE(r.condition_span.has_value());
    CHECK(r.tokens[static_cast<size_t>(r.condition_span->begin)] == "when");
    CHECK(r.condition_span->end == static_cast<int>(r.tokens.size()));
}

TEST_CASE("parse recovers every slot of the pressure limit") {
    Constraint c = pressure_limit();
    c.condition = "when pressure exceeds 50.0 MPa";
    std::string text = render_constraint_text(c, UnitTable::builtin());
    Constraint back = parse_constraint(text, UnitTable::builtin());
    CHECK(back.threshold == c.threshold);
    CHECK(back.unit == c.unit);
    CHECK(back.comparator == c.comparator);
    CHECK(back.scope == c.scope);
    CHECK(back.level == c.level);
    CHECK(back.condition == c.condition);
}

TEST_CASE("parse distinguishes negated levels from negated comparators") {
    const UnitTable& units = UnitTable::builtin();
    Constraint limit = parse_constraint("stationary storage pressure shall not exceed 70.0 MPa", units);
    CHECK(limit.level == Level::Shall);
    CHECK(limit.comparator == Comparator::LE);
    REQUIRE(limit.threshold.has_value());
    CHECK(limit.threshold->to_string() == "70.0");

    Constraint ban = parse_constraint("control room operators shall not bypass interlock circuits", units);
    CHECK(ban.level == Level::ShallNot);
    CHECK_FALSE(ban.threshold.has_value());
    CHECK(ban.scope == "control room operators");
}

TEST_CASE("parse errors on sentences without an obligation keyword") {
    CHECK_THROWS_AS(parse_constraint("the annex provides supplementary guidance", UnitTable::builtin()),
                    ParseError);
}

TEST_CASE("render/parse round trip over generator-style constraints") {
    const UnitTable& units = UnitTable::builtin();
    const auto& scopes = SubstitutionTable::builtin_scopes().rows();
    const auto& conditions = SubstitutionTable::builtin_conditions().rows();
    Rng rng(20240817);

    std::vector<Comparator> comparators = {Comparator::LE, Comparator::GE, Comparator::LT, Comparator::GT,
                                           Comparator::EQ};
    std::vector<Level> positive = {Level::Shall, Level::Should, Level::Must, Level::May};
    std::vector<int64_t> tenths = {15, 50, 500, 700, 875, 1000, 20000};

    for (int iter = 0; iter < 400; ++iter) {
        Constraint c;
        c.id = "rt_" + std::to_string(iter);
        c.scope = scopes[rng.index(scopes.size())].key;
        bool with_threshold = rng.bernoulli(0.7);
        if (with_threshold) {
            c.threshold = Decimal::from_tenths(tenths[rng.index(tenths.size())]);
            auto ids = units.canonical_ids();
            c.unit = ids[rng.index(ids.size())];
            c.comparator = comparators[rng.index(comparators.size())];
            c.level = positive[rng.index(positive.size())];
        } else if (rng.bernoulli(0.25)) {
            c.level = rng.bernoulli(0.5) ? Level::ShallNot : Level::MustNot;
            c.action = "bypass interlock circuits";
        } else {
            c.level = positive[rng.index(positive.size())];
            c.action = "maintain inspection records on site";
        }
        if (rng.bernoulli(0.5)) c.condition = conditions[rng.index(conditions.size())].key;

        Constraint back = parse_constraint(render_constraint_text(c, units), units);
        CHECK(back.threshold == c.threshold);
        CHECK(back.unit == c.unit);
        CHECK(back.scope == c.scope);
        CHECK(back.level == c.level);
        CHECK(back.condition == c.condition);
        if (c.threshold.has_value()) CHECK(back.comparator == c.comparator);
    }
}

TEST_CASE("multi-sentence responses parse back constraint by constraint") {
    const UnitTable& units = UnitTable::builtin();
    Constraint a = pressure_limit();
    Constraint b;
    b.id = "c2";
    b.scope = "maintenance personnel";
    b.level = Level::Must;
    b.action = "hold valid certification";
    b.condition = "when pressure exceeds 50.0 MPa";

    std::vector<Constraint> cons = {a, b};
    RenderedResponse resp = render_response(cons, units);
    CHECK(tokenize(resp.text) == resp.tokens);

    std::vector<Constraint> back = parse_response(resp.text, units);
    REQUIRE(back.size() == 2);
    CHECK(back[0].threshold == a.threshold);
    CHECK(back[1].condition == b.condition);
    CHECK(back[1].level == Level::Must);

    // Element spans: one per present slot, inside the right sentence.
    int threshold_spans = 0;
    for (const auto& e : resp.elements) {
        CHECK(e.span.begin >= 0);
        CHECK(e.span.end <= static_cast<int>(resp.tokens.size()));
        if (e.type == ErrorType::Threshold) {
            ++threshold_spans;
            CHECK(resp.tokens[static_cast<size_t>(e.span.begin)] == "70.0");
        }
    }
    CHECK(threshold_spans == 1);
}

TEST_CASE("scope and condition tables stay parseable and distant") {
    // Every curated alternative must fail the span matching predicate
    // against its key, otherwise the perturbation would not register as an
    // error at evaluation time.
    for (const auto& row : SubstitutionTable::builtin_scopes().rows()) {
        TokenSpan key = TokenSpan::from_text(row.key);
        for (const auto& alt : row.alternatives) CHECK(token_f1(key, TokenSpan::from_text(alt)) < 0.7);
    }
    for (const auto& row : SubstitutionTable::builtin_conditions().rows()) {
        TokenSpan key = TokenSpan::from_text(row.key);
        for (const auto& alt : row.alternatives) CHECK(token_f1(key, TokenSpan::from_text(alt)) < 0.7);
        CHECK(is_condition_marker(tokenize(row.key).front()));
        for (const auto& alt : row.alternatives) CHECK(is_condition_marker(tokenize(alt).front()));
    }
    // Scope phrases must not collide with parser anchors.
    for (const auto& row : SubstitutionTable::builtin_scopes().rows()) {
        for (const auto& tok : tokenize(row.key)) {
            CHECK_FALSE(is_condition_marker(tok));
            CHECK(tok != "shall");
            CHECK(tok != "should");
            CHECK(tok != "must");
            CHECK(tok != "may");
        }
        CHECK_FALSE(is_quantity_noun(tokenize(row.key).back()));
        for (const auto& alt : row.alternatives) {
            for (const auto& tok : tokenize(alt)) CHECK_FALSE(is_condition_marker(tok));
            CHECK_FALSE(is_quantity_noun(tokenize(alt).back()));
        }
    }
}

TEST_CASE("substitution table file loader matches builtins") {
    SubstitutionTable t = SubstitutionTable::parse("a b\tc d|e f\n");
    REQUIRE(t.rows().size() == 1);
    CHECK(t.rows()[0].key == "a b");
    CHECK(t.rows()[0].alternatives == std::vector<std::string>{"c d", "e f"});
    CHECK_THROWS_AS(SubstitutionTable::parse("missing tab separator\n"), SchemaError);
}
