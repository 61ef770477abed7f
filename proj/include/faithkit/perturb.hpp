#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "faithkit/rng.hpp"
#include "faithkit/tables.hpp"
#include "faithkit/render.hpp"
#include "faithkit/types.hpp"

namespace faithkit {

// A correct response with its structured ground truth, the input to
// minimal detail perturbation.
struct AnnotatedResponse {
    std::string sample_id;
    std::string prompt;
    std::vector<Constraint> constraints;  // rendered in order to form y_w
};

// Threshold perturbation factor band, an exact rational interval
// [lo_num/den, hi_num/den].
struct FactorBand {
    int64_t lo_num, hi_num, den;
};
inline constexpr FactorBand kLowBand{8, 9, 10};
inline constexpr FactorBand kHighBand{11, 12, 10};

struct PerturbationSpec {
    ErrorType error_type = ErrorType::Threshold;
    uint64_t rng_seed = 0;
    // The gap between the bands guarantees a perturbed value always differs
    // from the original; validate() rejects bands that touch ratio 1.
    FactorBand low_band = kLowBand;
    FactorBand high_band = kHighBand;
    const UnitTable* units = &UnitTable::builtin();
    const SubstitutionTable* scope_subs = &SubstitutionTable::builtin_scopes();
    const SubstitutionTable* condition_subs = &SubstitutionTable::builtin_conditions();
    double condition_drop_probability = 0.5;

    void validate() const;
};

// value * factor rounded to one decimal place. Exposed for direct testing.
Decimal perturb_threshold_value(const Decimal& value, double factor);

// Factor uniform over the two bands (interval chosen by fair coin).
double sample_threshold_factor(Rng& rng, const FactorBand& low = kLowBand,
                               const FactorBand& high = kHighBand);

// Token positions where the sequences differ: complement of the longest
// common prefix and suffix, expressed as one contiguous index range over
// the longer side. Throws EmptyDiff on identical sequences.
std::vector<int> diff_positions(std::span<const std::string> chosen, std::span<const std::string> rejected);

// Minimal detail perturbation: rejected differs from chosen in exactly one
// detail element of spec.error_type, chosen uniformly among eligible
// elements. Throws NoEligibleElement.
PreferencePair perturb(const AnnotatedResponse& response, const PerturbationSpec& spec);

struct BuildPairsResult {
    std::vector<PreferencePair> pairs;
    std::map<ErrorType, int> emitted;
    std::map<ErrorType, int> skipped;  // responses lacking an eligible element

    double share(ErrorType t) const;
};

// One pair per (response, type), seeds derived per response so output does
// not depend on processing order. Ineligible combinations are skipped and
// counted.
BuildPairsResult build_pairs(std::span<const AnnotatedResponse> responses, std::span<const ErrorType> types,
                             uint64_t seed, const PerturbationSpec& base = {});

}  // namespace faithkit
