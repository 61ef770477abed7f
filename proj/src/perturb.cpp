#include "faithkit/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "faithkit/log.hpp"

namespace faithkit {

void PerturbationSpec::validate() const {
    if (condition_drop_probability < 0.0 || condition_drop_probability > 1.0)
        throw ConfigError("condition_drop_probability must lie in [0,1]");
    if (!units || !scope_subs || !condition_subs) throw ConfigError("perturbation tables must be set");
    for (const FactorBand& band : {low_band, high_band}) {
        if (band.den <= 0 || band.lo_num > band.hi_num) throw ConfigError("malformed factor band");
        if (band.lo_num <= band.den && band.den <= band.hi_num)
            throw ConfigError("factor band must exclude ratio 1 so perturbed values always differ");
    }
}

Decimal perturb_threshold_value(const Decimal& value, double factor) {
    double scaled = value.to_double() * factor;
    int64_t tenths = std::llround(scaled * 10.0);
    return Decimal::from_tenths(tenths);
}

double sample_threshold_factor(Rng& rng, const FactorBand& low, const FactorBand& high) {
    const FactorBand& band = rng.bernoulli(0.5) ? low : high;
    double lo = static_cast<double>(band.lo_num) / static_cast<double>(band.den);
    double hi = static_cast<double>(band.hi_num) / static_cast<double>(band.den);
    return rng.uniform_real(lo, hi);
}

std::vector<int> diff_positions(std::span<const std::string> chosen, std::span<const std::string> rejected) {
    size_t n = chosen.size();
    size_t m = rejected.size();
    size_t prefix = 0;
    while (prefix < n && prefix < m && chosen[prefix] == rejected[prefix]) ++prefix;
    size_t max_suffix = std::min(n, m) - prefix;
    size_t suffix = 0;
    while (suffix < max_suffix && chosen[n - 1 - suffix] == rejected[m - 1 - suffix]) ++suffix;
    size_t end = std::max(n, m) - suffix;
    if (prefix >= end) throw EmptyDiff("sequences are identical");
    std::vector<int> positions;
    positions.reserve(end - prefix);
    for (size_t t = prefix; t < end; ++t) positions.push_back(static_cast<int>(t));
    return positions;
}

namespace {

bool constraint_eligible(const Constraint& c, ErrorType type, const PerturbationSpec& spec) {
    switch (type) {
        case ErrorType::Threshold:
        case ErrorType::Unit:
            return c.threshold.has_value();
        case ErrorType::Scope: {
            const auto* row = spec.scope_subs->find(c.scope);
            if (!row) return false;
            TokenSpan orig = TokenSpan::from_text(c.scope);
            return std::any_of(row->alternatives.begin(), row->alternatives.end(), [&](const std::string& alt) {
                return token_f1(orig, TokenSpan::from_text(alt)) < 0.7;
            });
        }
        case ErrorType::Level:
            return true;
        case ErrorType::Condition:
            return c.condition.has_value();
    }
    return false;
}

// Picks uniformly among alternatives whose span overlap with the original is
// low enough that the matching predicate will reject the swap outright.
std::string pick_distant_alternative(const std::string& original, const SubstitutionTable::Row& row, Rng& rng) {
    TokenSpan orig = TokenSpan::from_text(original);
    std::vector<const std::string*> usable;
    for (const auto& alt : row.alternatives)
        if (token_f1(orig, TokenSpan::from_text(alt)) < 0.7) usable.push_back(&alt);
    return *usable[rng.index(usable.size())];
}

Decimal perturb_threshold(const Decimal& original, const PerturbationSpec& spec, Rng& rng) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        double f = sample_threshold_factor(rng, spec.low_band, spec.high_band);
        Decimal cand = perturb_threshold_value(original, f);
        if (cand == original) continue;  // rounding collision, resample
        if (ratio_in_band(cand, original, spec.low_band.lo_num, spec.low_band.hi_num, spec.low_band.den) ||
            ratio_in_band(cand, original, spec.high_band.lo_num, spec.high_band.hi_num, spec.high_band.den))
            return cand;
    }
    throw NoEligibleElement("threshold " + original.to_string() + " has no in-band perturbation at 0.1 resolution");
}

}  // namespace

PreferencePair perturb(const AnnotatedResponse& response, const PerturbationSpec& spec) {
    spec.validate();
    const UnitTable& units = *spec.units;
    Rng rng(spec.rng_seed);

    std::vector<size_t> eligible;
    for (size_t i = 0; i < response.constraints.size(); ++i)
        if (constraint_eligible(response.constraints[i], spec.error_type, spec)) eligible.push_back(i);
    if (eligible.empty())
        throw NoEligibleElement("response '" + response.sample_id + "' has no element of type " +
                                std::string(error_type_name(spec.error_type)));
    size_t target = eligible[rng.index(eligible.size())];

    std::vector<Constraint> mutated(response.constraints.begin(), response.constraints.end());
    Constraint& c = mutated[target];
    switch (spec.error_type) {
        case ErrorType::Threshold:
            c.threshold = perturb_threshold(*c.threshold, spec, rng);
            break;
        case ErrorType::Unit: {
            auto peers = units.units_of_dimension(units.dimension_of(*c.unit));
            std::erase(peers, *c.unit);
            if (peers.empty())
                throw NoEligibleElement("no replacement unit shares dimension with '" + *c.unit + "'");
            c.unit = peers[rng.index(peers.size())];
            break;
        }
        case ErrorType::Scope:
            c.scope = pick_distant_alternative(c.scope, *spec.scope_subs->find(c.scope), rng);
            break;
        case ErrorType::Level:
            c.level = level_substitute(c.level);
            break;
        case ErrorType::Condition: {
            bool drop = rng.bernoulli(spec.condition_drop_probability);
            const auto* row = spec.condition_subs->find(*c.condition);
            if (!drop && row) {
                TokenSpan orig = TokenSpan::from_text(*c.condition);
                bool has_distant = std::any_of(row->alternatives.begin(), row->alternatives.end(),
                                               [&](const std::string& alt) {
                                                   return token_f1(orig, TokenSpan::from_text(alt)) < 0.7;
                                               });
                if (has_distant) {
                    c.condition = pick_distant_alternative(*c.condition, *row, rng);
                    break;
                }
            }
            c.condition.reset();
            break;
        }
    }

    RenderedResponse chosen = render_response(response.constraints, units);
    RenderedResponse rejected = render_response(mutated, units);

    PreferencePair pair;
    pair.sample_id = response.sample_id;
    pair.prompt = response.prompt;
    pair.chosen = chosen.text;
    pair.rejected = rejected.text;
    pair.error_type = spec.error_type;
    pair.positions = diff_positions(chosen.tokens, rejected.tokens);
    pair.seed = spec.rng_seed;
    return pair;
}

double BuildPairsResult::share(ErrorType t) const {
    size_t total = pairs.size();
    if (total == 0) return 0.0;
    auto it = emitted.find(t);
    return it == emitted.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

BuildPairsResult build_pairs(std::span<const AnnotatedResponse> responses, std::span<const ErrorType> types,
                             uint64_t seed, const PerturbationSpec& base) {
    BuildPairsResult result;
    for (const auto& response : responses) {
        for (size_t ti = 0; ti < types.size(); ++ti) {
            PerturbationSpec spec = base;
            spec.error_type = types[ti];
            spec.rng_seed = derive_seed(seed, response.sample_id, static_cast<uint64_t>(types[ti]) + 1);
            try {
                PreferencePair pair = perturb(response, spec);
                pair.pair_id = "pair_" + response.sample_id + "_" + std::string(error_type_name(types[ti]));
                result.emitted[types[ti]] += 1;
                result.pairs.push_back(std::move(pair));
            } catch (const NoEligibleElement&) {
                result.skipped[types[ti]] += 1;
                log::debug("skipping " + std::string(error_type_name(types[ti])) + " for response '" +
                           response.sample_id + "': no eligible element");
            }
        }
    }
    return result;
}

}  // namespace faithkit
