#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "faithkit/metrics.hpp"
#include "faithkit/perturb.hpp"
#include "faithkit/render.hpp"
#include "faithkit/rng.hpp"

using namespace faithkit;

namespace {

Constraint pressure_limit(const std::string& id = "c1") {
    Constraint c;
    c.id = id;
    c.threshold = parse_number("70.0");
    c.unit = "mpa";
    c.comparator = Comparator::LE;
    c.scope = "stationary storage";
    c.level = Level::Shall;
    return c;
}

Constraint cert_requirement(const std::string& id = "c2") {
    Constraint c;
    c.id = id;
    c.scope = "maintenance personnel";
    c.level = Level::Shall;
    c.action = "hold valid certification";
    c.condition = "when pressure exceeds 50.0 MPa";
    return c;
}

AnnotatedResponse demo_response() {
    AnnotatedResponse r;
    r.sample_id = "smp_demo";
    r.prompt = "assess compliance of a hydrogen storage facility operating at 75.0 MPa";
    r.constraints = {pressure_limit(), cert_requirement()};
    return r;
}

PerturbationSpec spec_for(ErrorType t, uint64_t seed) {
    PerturbationSpec s;
    s.error_type = t;
    s.rng_seed = seed;
    return s;
}

}  // namespace

TEST_CASE("threshold value perturbation at a fixed factor") {
    // 70.0 * 1.1 rounded to one decimal.
    CHECK(perturb_threshold_value(parse_number("70.0"), 1.1).to_string() == "77.0");
    CHECK(perturb_threshold_value(parse_number("70.0"), 0.85).to_string() == "59.5");
    CHECK(perturb_threshold_value(parse_number("87.5"), 1.1).to_string() == "96.3");
}

TEST_CASE("sampled threshold factors stay inside the two bands") {
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        double f = sample_threshold_factor(rng);
        bool low = f >= 0.8 && f <= 0.9;
        bool high = f >= 1.1 && f <= 1.2;
        CHECK((low || high));
    }
}

TEST_CASE("diff_positions identical sequences raise EmptyDiff") {
    std::vector<std::string> toks = {"a", "b", "c"};
    CHECK_THROWS_AS(diff_positions(toks, toks), EmptyDiff);
}

TEST_CASE("diff_positions single token swap") {
    std::vector<std::string> w = {"70.0", "MPa", "."};
    std::vector<std::string> l = {"70.0", "bar", "."};
    CHECK(diff_positions(w, l) == std::vector<int>{1});
}

TEST_CASE("diff_positions clause drop covers the dropped tokens") {
    std::vector<std::string> w = {"operators", "shall", "hold", "certification",
                                  "during",   "routine", "maintenance", "operations", "only", "."};
    std::vector<std::string> l = {"operators", "shall", "hold", "certification", "."};
    auto p = diff_positions(w, l);
    CHECK(p == std::vector<int>{4, 5, 6, 7, 8});
    CHECK(p.size() == 5);
}

TEST_CASE("unit perturbation swaps MPa for a sibling pressure unit") {
    PreferencePair pair = perturb(demo_response(), spec_for(ErrorType::Unit, 11));
    CHECK(pair.chosen.find("70.0 MPa") != std::string::npos);
    CHECK(pair.rejected.find("70.0 MPa") == std::string::npos);
    Constraint mutated = parse_response(pair.rejected, UnitTable::builtin())[0];
    REQUIRE(mutated.unit.has_value());
    CHECK(*mutated.unit != "mpa");
    CHECK(UnitTable::builtin().dimension_of(*mutated.unit) == Dimension::Pressure);
    CHECK(mutated.threshold == parse_number("70.0"));
    CHECK(pair.positions.size() == 1);
}

TEST_CASE("level perturbation follows the fixed keyword map") {
    AnnotatedResponse r;
    r.sample_id = "smp_level";
    r.prompt = "prompt";
    Constraint c = pressure_limit();
    r.constraints = {c};
    PreferencePair pair = perturb(r, spec_for(ErrorType::Level, 5));
    CHECK(pair.chosen.find("shall") != std::string::npos);
    CHECK(pair.rejected.find("should") != std::string::npos);
    CHECK(pair.positions.size() == 1);

    CHECK(level_substitute(Level::Shall) == Level::Should);
    CHECK(level_substitute(Level::Should) == Level::Shall);
    CHECK(level_substitute(Level::Must) == Level::May);
    CHECK(level_substitute(Level::May) == Level::Must);
    CHECK(level_substitute(Level::ShallNot) == Level::MustNot);
}

TEST_CASE("threshold perturbation lands in band and differs") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        PreferencePair pair = perturb(demo_response(), spec_for(ErrorType::Threshold, seed));
        Constraint mutated = parse_response(pair.rejected, UnitTable::builtin())[0];
        REQUIRE(mutated.threshold.has_value());
        Decimal original = parse_number("70.0");
        CHECK(*mutated.threshold != original);
        bool in_band = ratio_in_band(*mutated.threshold, original, 8, 9, 10) ||
                       ratio_in_band(*mutated.threshold, original, 11, 12, 10);
        CHECK(in_band);
    }
}

TEST_CASE("condition perturbation drops or swaps the clause") {
    bool saw_drop = false, saw_alter = false;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        PreferencePair pair = perturb(demo_response(), spec_for(ErrorType::Condition, seed));
        auto rejected = parse_response(pair.rejected, UnitTable::builtin());
        REQUIRE(rejected.size() == 2);
        if (!rejected[1].condition.has_value()) {
            saw_drop = true;
        } else {
            saw_alter = true;
            CHECK(*rejected[1].condition != *cert_requirement().condition);
        }
    }
    CHECK(saw_drop);
    CHECK(saw_alter);
}

TEST_CASE("perturb without an eligible element reports NoEligibleElement") {
    AnnotatedResponse r;
    r.sample_id = "smp_nothresh";
    r.prompt = "prompt";
    Constraint c;
    c.id = "c1";
    c.scope = "maintenance personnel";
    c.level = Level::Shall;
    c.action = "hold valid certification";
    r.constraints = {c};  // no threshold, no condition
    CHECK_THROWS_AS(perturb(r, spec_for(ErrorType::Threshold, 3)), NoEligibleElement);
    CHECK_THROWS_AS(perturb(r, spec_for(ErrorType::Condition, 3)), NoEligibleElement);
}

TEST_CASE("pairs agree at every position outside P") {
    for (ErrorType t : kAllErrorTypes) {
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            PreferencePair pair = perturb(demo_response(), spec_for(t, seed));
            auto w = tokenize(pair.chosen);
            auto l = tokenize(pair.rejected);
            std::set<int> pset(pair.positions.begin(), pair.positions.end());
            CHECK_FALSE(pset.empty());
            size_t len = std::max(w.size(), l.size());
            size_t suffix = len - static_cast<size_t>(pair.positions.back() + 1);
            for (size_t i = 0; i < len; ++i) {
                if (pset.contains(static_cast<int>(i))) continue;
                if (i < static_cast<size_t>(pair.positions.front())) {
                    CHECK(w[i] == l[i]);
                } else {
                    // Suffix region: aligned from the end.
                    CHECK(i >= len - suffix);
                    CHECK(w[w.size() - (len - i)] == l[l.size() - (len - i)]);
                }
            }
        }
    }
}

TEST_CASE("type purity: only the perturbed predicate fires") {
    const UnitTable& units = UnitTable::builtin();
    for (ErrorType t : kAllErrorTypes) {
        for (uint64_t seed = 1; seed <= 20; ++seed) {
            PreferencePair pair = perturb(demo_response(), spec_for(t, seed));
            auto gold = parse_response(pair.chosen, units);
            auto pred = parse_response(pair.rejected, units);
            REQUIRE(gold.size() == pred.size());
            std::vector<DetailElement> elements;
            for (size_t i = 0; i < gold.size(); ++i) {
                gold[i].id = "k" + std::to_string(i);
                auto elems = diff_elements(gold[i], &pred[i], pair.sample_id);
                elements.insert(elements.end(), elems.begin(), elems.end());
            }
            DerResult der = compute_der(elements, units);
            for (auto other : kAllErrorTypes) {
                if (!der.der_by_type.contains(other)) continue;
                if (other == t) {
                    CHECK(der.der_by_type.at(other) > 0.0);
                } else {
                    CHECK(der.der_by_type.at(other) == 0.0);
                }
            }
            CHECK(der.ambiguous_count == 0);
        }
    }
}

TEST_CASE("build_pairs counts, balance, and determinism") {
    std::vector<AnnotatedResponse> responses;
    for (int i = 0; i < 100; ++i) {
        AnnotatedResponse r = demo_response();
        r.sample_id = "smp_" + std::to_string(i);
        responses.push_back(std::move(r));
    }
    std::vector<ErrorType> types(std::begin(kAllErrorTypes), std::end(kAllErrorTypes));
    BuildPairsResult a = build_pairs(responses, types, 99);
    CHECK(a.pairs.size() == 500);
    for (auto t : types) {
        CHECK(a.emitted.at(t) == 100);
        CHECK(a.share(t) == doctest::Approx(0.2));
    }

    BuildPairsResult b = build_pairs(responses, types, 99);
    REQUIRE(b.pairs.size() == a.pairs.size());
    for (size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].rejected == b.pairs[i].rejected);
        CHECK(a.pairs[i].positions == b.pairs[i].positions);
        CHECK(a.pairs[i].seed == b.pairs[i].seed);
    }
}

TEST_CASE("build_pairs records condition deficits") {
    std::vector<AnnotatedResponse> responses;
    for (int i = 0; i < 10; ++i) {
        AnnotatedResponse r;
        r.sample_id = "plain_" + std::to_string(i);
        r.prompt = "prompt";
        r.constraints = {pressure_limit()};  // no condition anywhere
        responses.push_back(std::move(r));
    }
    std::vector<ErrorType> types(std::begin(kAllErrorTypes), std::end(kAllErrorTypes));
    BuildPairsResult res = build_pairs(responses, types, 7);
    CHECK(res.pairs.size() == 40);  // 4 types succeed
    CHECK(res.skipped.at(ErrorType::Condition) == 10);
    CHECK_FALSE(res.emitted.contains(ErrorType::Condition));
}

TEST_CASE("perturbed span stays inside one element") {
    const UnitTable& units = UnitTable::builtin();
    for (ErrorType t : kAllErrorTypes) {
        for (uint64_t seed = 1; seed <= 15; ++seed) {
            PreferencePair pair = perturb(demo_response(), spec_for(t, seed));
            AnnotatedResponse base = demo_response();
            RenderedResponse chosen = render_response(base.constraints, units);

            // Locate the element of the perturbed type whose span covers P
            // on the chosen side.
            auto w = tokenize(pair.chosen);
            auto l = tokenize(pair.rejected);
            int chosen_end = static_cast<int>(w.size()) -
                             (static_cast<int>(std::max(w.size(), l.size())) - pair.positions.back() - 1);
            bool covered = false;
            for (const auto& e : chosen.elements) {
                if (e.type != t) continue;
                if (pair.positions.front() >= e.span.begin && chosen_end <= e.span.end) covered = true;
            }
            CHECK(covered);
        }
    }
}
