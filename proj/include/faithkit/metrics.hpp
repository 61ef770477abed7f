#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faithkit/canonical.hpp"
#include "faithkit/types.hpp"

namespace faithkit {

enum class MatchOutcome { Match, Mismatch, Ambiguous };

// Span-type matches are accepted at F1 >= 0.8; the band [0.7, 0.9] is
// additionally flagged ambiguous for reporting.
inline constexpr double kSpanMatchThreshold = 0.8;
inline constexpr double kAmbiguousLow = 0.7;
inline constexpr double kAmbiguousHigh = 0.9;

struct ElementMatch {
    MatchOutcome outcome = MatchOutcome::Mismatch;
    double f1 = -1.0;  // set for scope/level/condition comparisons

    // Decision under the default threshold rule (ambiguous resolved at 0.8).
    bool is_mismatch() const;
};

// Type-dependent predicate: exact canonical-numeric equality for thresholds,
// exact canonical-unit equality for units, token-F1 at 0.8 for
// scope/level/condition spans. A missing prediction is a mismatch.
ElementMatch match_element_detailed(const DetailElement& e, const UnitTable& table);
MatchOutcome match_element(const DetailElement& e, const UnitTable& table);

enum class AmbiguousPolicy {
    ThresholdRule,  // decide by F1 >= 0.8, report the flag count
    Exclude,        // strict mode: drop ambiguous elements from the rates
};

struct DerResult {
    double der_overall = 0.0;
    std::map<ErrorType, double> der_by_type;   // only types with |S_j| > 0
    std::map<ErrorType, int> type_totals;
    std::map<ErrorType, int> type_mismatches;
    int k_total = 0;
    int mismatches = 0;
    int ambiguous_count = 0;
    int excluded = 0;  // under AmbiguousPolicy::Exclude
};

// Throws EmptyEvaluation when no elements remain to score.
DerResult compute_der(std::span<const DetailElement> elements, const UnitTable& table,
                      AmbiguousPolicy policy = AmbiguousPolicy::ThresholdRule);

struct EvidenceScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// True positive iff the (doc, seg) location appears in gold; duplicates
// collapse to set semantics. Quotes are scored separately by consistency.
EvidenceScores evidence_scores(std::span<const EvidenceCitation> pred, std::span<const EvidenceCitation> gold);

struct ConsistencyResult {
    double consistency = 1.0;
    int checked = 0;
    int consistent = 0;
    int dangling = 0;  // unresolvable citations, counted inconsistent
};

// A citation is consistent when its quote appears verbatim in the cited
// segment, or when the best same-length token window of the segment reaches
// token F1 >= 0.9 (proxy for the semantic-equivalence check).
inline constexpr double kConsistencyF1Threshold = 0.9;

ConsistencyResult evidence_consistency(std::span<const EvidenceCitation> pred, std::span<const Document> docs);

// Mean equality of predicted and gold judgments; throws LengthMismatch.
double compliance_accuracy(const std::vector<bool>& preds, const std::vector<bool>& gold);

// Ground-truth elements of one constraint paired with the predicted slots.
// The element set is defined by the gold constraint; a missing predicted
// constraint yields absent predictions across all its slots.
std::vector<DetailElement> diff_elements(const Constraint& gold, const Constraint* predicted,
                                         const std::string& sample_id);

struct EvalReport {
    double der_overall = 0.0;
    std::map<ErrorType, double> der_by_type;
    std::map<std::string, double> der_by_tier;
    double compliance_accuracy = 0.0;
    double evidence_precision = 0.0;
    double evidence_recall = 0.0;
    double evidence_f1 = 0.0;
    double evidence_consistency = 0.0;
    int ambiguous_count = 0;
    int n_samples = 0;
    int k_total = 0;
    int dangling_citations = 0;
    bool strict_ambiguous = false;
};

// One labelled gold sample for evaluation.
struct GoldSample {
    std::string sample_id;
    std::string tier;  // empty when untiered
    ComplianceAnalysis analysis;
};

struct PredictionRecord {
    std::string sample_id;
    ComplianceAnalysis analysis;
};

// Full evaluation: DER (overall/type/tier), compliance accuracy, evidence
// P/R/F1 against gold citations, and quote consistency against documents.
EvalReport evaluate(std::span<const GoldSample> gold, std::span<const PredictionRecord> predictions,
                    std::span<const Document> docs, const UnitTable& table,
                    AmbiguousPolicy policy = AmbiguousPolicy::ThresholdRule);

}  // namespace faithkit
