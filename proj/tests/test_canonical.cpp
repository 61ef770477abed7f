#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "faithkit/canonical.hpp"
#include "faithkit/rng.hpp"

using namespace faithkit;

TEST_CASE("parse_number canonicalizes textual variants") {
    CHECK(parse_number("70.0") == parse_number("70"));
    CHECK(parse_number("70.0") == parse_number("7e1"));
    CHECK(parse_number("70.0") == parse_number("70.00"));
    CHECK(parse_number("0.5") == parse_number("5e-1"));
    CHECK(parse_number("75.0") != parse_number("70.0"));
    CHECK(parse_number("shall not exceed 70.0 MPa") == parse_number("70.0"));
    CHECK(parse_number("-2.5").is_negative());
}

TEST_CASE("parse_number rejects text without a numeric literal") {
    CHECK_THROWS_AS(parse_number("no numbers here"), ParseError);
    CHECK_THROWS_AS(parse_number(""), ParseError);
}

TEST_CASE("decimal rendering keeps at least one fractional digit") {
    CHECK(parse_number("70").to_string() == "70.0");
    CHECK(parse_number("76.9").to_string() == "76.9");
    CHECK(parse_number("0.25").to_string() == "0.25");
    CHECK(parse_number("7e1").to_string() == "70.0");
    CHECK(parse_number("0").to_string() == "0.0");
}

TEST_CASE("decimal comparison is exact") {
    CHECK(compare(parse_number("70.0"), parse_number("75.0")) < 0);
    CHECK(compare(parse_number("75.0"), parse_number("70.0")) > 0);
    CHECK(compare(parse_number("70"), parse_number("70.0")) == 0);
    CHECK(compare(parse_number("0.3"), parse_number("0.29")) > 0);
}

TEST_CASE("ratio_in_band uses exact rational arithmetic") {
    Decimal base = parse_number("70.0");
    CHECK(ratio_in_band(parse_number("56.0"), base, 8, 9, 10));   // exactly 0.8
    CHECK(ratio_in_band(parse_number("63.0"), base, 8, 9, 10));   // exactly 0.9
    CHECK(ratio_in_band(parse_number("77.0"), base, 11, 12, 10));
    CHECK_FALSE(ratio_in_band(parse_number("63.1"), base, 8, 9, 10));
    CHECK_FALSE(ratio_in_band(parse_number("70.0"), base, 8, 9, 10));
}

TEST_CASE("unit canonicalization folds case and spacing") {
    const UnitTable& t = UnitTable::builtin();
    CHECK(t.canonicalize("MPa") == "mpa");
    CHECK(t.canonicalize("mpa") == "mpa");
    CHECK(t.canonicalize("megapascal") == "mpa");
    CHECK(t.canonicalize("bar") == "bar");
    CHECK(t.canonicalize("MPa") != t.canonicalize("bar"));
    CHECK(t.canonicalize("kg") == "kg");
    CHECK(t.dimension_of("kg") == Dimension::Mass);
    CHECK(t.dimension_of("mpa") == Dimension::Pressure);
    CHECK_THROWS_AS(t.canonicalize("furlongs"), UnknownUnit);
}

TEST_CASE("unit canonicalization is idempotent over canonical ids") {
    const UnitTable& t = UnitTable::builtin();
    for (const auto& id : t.canonical_ids()) {
        CHECK(t.knows(id));
        CHECK(t.canonicalize(id) == id);
    }
}

TEST_CASE("builtin unit table matches the shipped data file") {
    UnitTable from_file = UnitTable::load(std::string(FAITHKIT_DATA_DIR) + "/units.tsv");
    const UnitTable& builtin = UnitTable::builtin();
    CHECK(from_file.canonical_ids() == builtin.canonical_ids());
    for (const auto& id : builtin.canonical_ids()) {
        CHECK(from_file.dimension_of(id) == builtin.dimension_of(id));
        CHECK(from_file.display_of(id) == builtin.display_of(id));
    }
}

TEST_CASE("unit table covers the required dimensions with spares for swaps") {
    const UnitTable& t = UnitTable::builtin();
    for (Dimension d : {Dimension::Pressure, Dimension::Mass, Dimension::Volume, Dimension::Temperature,
                        Dimension::Length, Dimension::Time}) {
        CHECK(t.units_of_dimension(d).size() >= 2);
    }
}

TEST_CASE("tokenizer splits numbers, units and punctuation") {
    CHECK(tokenize("70.0 MPa") == std::vector<std::string>{"70.0", "MPa"});
    CHECK(tokenize("shall not exceed 70.0 MPa").size() == 5);
    CHECK(tokenize("").empty());
    CHECK(tokenize("when pressure > 50.0 MPa") ==
          std::vector<std::string>{"when", "pressure", ">", "50.0", "MPa"});
    CHECK(tokenize("seg_1 GB_T_34542_2023") == std::vector<std::string>{"seg_1", "GB_T_34542_2023"});
    CHECK(tokenize("x.") == std::vector<std::string>{"x", "."});
    CHECK(tokenize("7e1 bar") == std::vector<std::string>{"7e1", "bar"});
}

TEST_CASE("tokenizer is deterministic across repeated calls") {
    std::string text = "operators shall hold valid certification when pressure exceeds 50.0 MPa.";
    auto first = tokenize(text);
    for (int i = 0; i < 10; ++i) CHECK(tokenize(text) == first);
}

TEST_CASE("token_f1 on the worked scope example") {
    TokenSpan a{{"stationary", "storage"}};
    TokenSpan b{{"all", "storage", "systems"}};
    // precision 1/2, recall 1/3, harmonic mean 0.4
    CHECK(token_f1(a, b) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(token_f1(b, a) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("token_f1 identity and disjoint cases") {
    TokenSpan a{{"stationary", "storage"}};
    CHECK(token_f1(a, a) == 1.0);
    TokenSpan c{{"unrelated", "words"}};
    CHECK(token_f1(a, c) == 0.0);
    CHECK(token_f1(TokenSpan{}, TokenSpan{}) == 1.0);
    CHECK(token_f1(a, TokenSpan{}) == 0.0);
}

TEST_CASE("token_f1 symmetry and bounds over random spans") {
    Rng rng(12345);
    std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
    for (int iter = 0; iter < 500; ++iter) {
        TokenSpan a, b;
        int na = static_cast<int>(rng.uniform_int(0, 6));
        int nb = static_cast<int>(rng.uniform_int(0, 6));
        for (int i = 0; i < na; ++i) a.tokens.push_back(rng.pick(words));
        for (int i = 0; i < nb; ++i) b.tokens.push_back(rng.pick(words));
        double ab = token_f1(a, b);
        double ba = token_f1(b, a);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        std::multiset<std::string> ma(a.tokens.begin(), a.tokens.end());
        std::multiset<std::string> mb(b.tokens.begin(), b.tokens.end());
        if (ma == mb) CHECK(ab == 1.0);
        if (ab == 1.0) CHECK(ma == mb);
    }
}

TEST_CASE("normalization lowercases and strips punctuation tokens") {
    TokenSpan s = TokenSpan::from_text("When Pressure > 50.0 MPa.");
    CHECK(s.tokens == std::vector<std::string>{"when", "pressure", "50.0", "mpa"});
}

TEST_CASE("unit table file format round trip") {
    UnitTable t = UnitTable::parse("Nm\tnm\tlength\nnanometer\tnm\tlength\n");
    CHECK(t.canonicalize("nanometer") == "nm");
    CHECK(t.display_of("nm") == "Nm");
    CHECK_THROWS_AS(UnitTable::parse("broken line without tabs\n"), SchemaError);
}
