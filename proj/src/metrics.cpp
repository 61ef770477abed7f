#include "faithkit/metrics.hpp"

#include <algorithm>
#include <set>

namespace faithkit {

bool ElementMatch::is_mismatch() const {
    if (outcome == MatchOutcome::Ambiguous) return f1 < kSpanMatchThreshold;
    return outcome == MatchOutcome::Mismatch;
}

ElementMatch match_element_detailed(const DetailElement& e, const UnitTable& table) {
    e.validate();
    if (!e.prediction.has_value()) return {MatchOutcome::Mismatch, -1.0};

    switch (e.element_type) {
        case ErrorType::Threshold: {
            Decimal gt = parse_number(e.ground_truth);
            Decimal pred;
            try {
                pred = parse_number(*e.prediction);
            } catch (const ParseError&) {
                return {MatchOutcome::Mismatch, -1.0};
            }
            return {gt == pred ? MatchOutcome::Match : MatchOutcome::Mismatch, -1.0};
        }
        case ErrorType::Unit: {
            const std::string& gt = table.canonicalize(e.ground_truth);
            if (!table.knows(*e.prediction)) return {MatchOutcome::Mismatch, -1.0};
            return {gt == table.canonicalize(*e.prediction) ? MatchOutcome::Match : MatchOutcome::Mismatch,
                    -1.0};
        }
        case ErrorType::Scope:
        case ErrorType::Level:
        case ErrorType::Condition: {
            double f1 = token_f1(TokenSpan::from_text(e.ground_truth), TokenSpan::from_text(*e.prediction));
            if (f1 >= kAmbiguousLow && f1 <= kAmbiguousHigh) return {MatchOutcome::Ambiguous, f1};
            return {f1 >= kSpanMatchThreshold ? MatchOutcome::Match : MatchOutcome::Mismatch, f1};
        }
    }
    return {MatchOutcome::Mismatch, -1.0};
}

MatchOutcome match_element(const DetailElement& e, const UnitTable& table) {
    return match_element_detailed(e, table).outcome;
}

DerResult compute_der(std::span<const DetailElement> elements, const UnitTable& table, AmbiguousPolicy policy) {
    if (elements.empty()) throw EmptyEvaluation("no detail elements to evaluate");
    DerResult r;
    for (const auto& e : elements) {
        ElementMatch m = match_element_detailed(e, table);
        if (m.outcome == MatchOutcome::Ambiguous) {
            ++r.ambiguous_count;
            if (policy == AmbiguousPolicy::Exclude) {
                ++r.excluded;
                continue;
            }
        }
        ++r.k_total;
        r.type_totals[e.element_type] += 1;
        if (m.is_mismatch()) {
            ++r.mismatches;
            r.type_mismatches[e.element_type] += 1;
        }
    }
    if (r.k_total == 0) throw EmptyEvaluation("all elements excluded as ambiguous");
    r.der_overall = static_cast<double>(r.mismatches) / static_cast<double>(r.k_total);
    for (const auto& [type, total] : r.type_totals) {
        auto it = r.type_mismatches.find(type);
        int wrong = it == r.type_mismatches.end() ? 0 : it->second;
        r.der_by_type[type] = static_cast<double>(wrong) / static_cast<double>(total);
    }
    return r;
}

EvidenceScores evidence_scores(std::span<const EvidenceCitation> pred, std::span<const EvidenceCitation> gold) {
    std::set<std::pair<std::string, std::string>> pred_set, gold_set;
    for (const auto& c : pred) pred_set.emplace(c.doc_id, c.seg_id);
    for (const auto& c : gold) gold_set.emplace(c.doc_id, c.seg_id);

    if (pred_set.empty() && gold_set.empty()) return {1.0, 1.0, 1.0};
    size_t tp = 0;
    for (const auto& loc : pred_set)
        if (gold_set.contains(loc)) ++tp;

    EvidenceScores s;
    s.precision = pred_set.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_set.size());
    s.recall = gold_set.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_set.size());
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

namespace {

// Maximum token F1 between the quote and any same-length window of the
// segment's normalized tokens.
double best_window_f1(const TokenSpan& quote, const TokenSpan& segment) {
    if (quote.tokens.empty()) return segment.tokens.empty() ? 1.0 : 0.0;
    size_t w = quote.tokens.size();
    if (segment.tokens.size() <= w) return token_f1(quote, segment);
    double best = 0.0;
    for (size_t start = 0; start + w <= segment.tokens.size(); ++start) {
        TokenSpan window;
        window.tokens.assign(segment.tokens.begin() + static_cast<long>(start),
                             segment.tokens.begin() + static_cast<long>(start + w));
        best = std::max(best, token_f1(quote, window));
        if (best == 1.0) break;
    }
    return best;
}

}  // namespace

ConsistencyResult evidence_consistency(std::span<const EvidenceCitation> pred, std::span<const Document> docs) {
    ConsistencyResult r;
    for (const auto& cite : pred) {
        ++r.checked;
        const Document* doc = nullptr;
        for (const auto& d : docs)
            if (d.id == cite.doc_id) {
                doc = &d;
                break;
            }
        const Segment* seg = doc ? doc->find_segment(cite.seg_id) : nullptr;
        if (!seg) {
            ++r.dangling;
            continue;
        }
        if (seg->text.find(cite.quote) != std::string::npos) {
            ++r.consistent;
            continue;
        }
        TokenSpan quote = TokenSpan::from_text(cite.quote);
        TokenSpan segment = TokenSpan::from_text(seg->text);
        if (best_window_f1(quote, segment) >= kConsistencyF1Threshold) ++r.consistent;
    }
    r.consistency = r.checked == 0 ? 1.0 : static_cast<double>(r.consistent) / static_cast<double>(r.checked);
    return r;
}

double compliance_accuracy(const std::vector<bool>& preds, const std::vector<bool>& gold) {
    if (preds.size() != gold.size())
        throw LengthMismatch("prediction count " + std::to_string(preds.size()) + " != gold count " +
                             std::to_string(gold.size()));
    if (preds.empty()) throw LengthMismatch("no judgments to compare");
    size_t agree = 0;
    for (size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == gold[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(preds.size());
}

std::vector<DetailElement> diff_elements(const Constraint& gold, const Constraint* predicted,
                                         const std::string& sample_id) {
    std::vector<DetailElement> out;
    auto add = [&](ErrorType type, std::string gt, std::optional<std::string> pred) {
        DetailElement e;
        e.element_type = type;
        e.ground_truth = std::move(gt);
        e.prediction = std::move(pred);
        e.sample_id = sample_id;
        e.constraint_id = gold.id;
        out.push_back(std::move(e));
    };

    if (gold.threshold.has_value()) {
        std::optional<std::string> pred;
        if (predicted && predicted->threshold.has_value()) pred = predicted->threshold->to_string();
        add(ErrorType::Threshold, gold.threshold->to_string(), std::move(pred));
    }
    if (gold.unit.has_value()) {
        std::optional<std::string> pred;
        if (predicted && predicted->unit.has_value()) pred = *predicted->unit;
        add(ErrorType::Unit, *gold.unit, std::move(pred));
    }
    {
        std::optional<std::string> pred;
        if (predicted) pred = predicted->scope;
        add(ErrorType::Scope, gold.scope, std::move(pred));
    }
    {
        std::optional<std::string> pred;
        if (predicted) pred = std::string(level_keyword(predicted->level));
        add(ErrorType::Level, std::string(level_keyword(gold.level)), std::move(pred));
    }
    if (gold.condition.has_value()) {
        std::optional<std::string> pred;
        if (predicted && predicted->condition.has_value()) pred = *predicted->condition;
        add(ErrorType::Condition, *gold.condition, std::move(pred));
    }
    return out;
}

EvalReport evaluate(std::span<const GoldSample> gold, std::span<const PredictionRecord> predictions,
                    std::span<const Document> docs, const UnitTable& table, AmbiguousPolicy policy) {
    EvalReport report;
    report.strict_ambiguous = policy == AmbiguousPolicy::Exclude;

    std::vector<DetailElement> all_elements;
    std::map<std::string, std::vector<DetailElement>> tier_elements;
    std::vector<bool> pred_judgments, gold_judgments;
    std::vector<EvidenceCitation> all_pred_citations;

    double p_sum = 0, r_sum = 0, f_sum = 0;

    for (const auto& g : gold) {
        const PredictionRecord* pred = nullptr;
        for (const auto& p : predictions)
            if (p.sample_id == g.sample_id) {
                pred = &p;
                break;
            }

        std::vector<DetailElement> sample_elements;
        for (const auto& gc : g.analysis.key_constraints) {
            const Constraint* pc = nullptr;
            if (pred) {
                for (const auto& cand : pred->analysis.key_constraints)
                    if (cand.constraint.id == gc.constraint.id) {
                        pc = &cand.constraint;
                        break;
                    }
            }
            auto elems = diff_elements(gc.constraint, pc, g.sample_id);
            sample_elements.insert(sample_elements.end(), elems.begin(), elems.end());
        }
        if (!g.tier.empty())
            tier_elements[g.tier].insert(tier_elements[g.tier].end(), sample_elements.begin(),
                                         sample_elements.end());
        all_elements.insert(all_elements.end(), sample_elements.begin(), sample_elements.end());

        gold_judgments.push_back(g.analysis.is_compliant);
        pred_judgments.push_back(pred ? pred->analysis.is_compliant : !g.analysis.is_compliant);

        std::span<const EvidenceCitation> pred_cites =
            pred ? std::span<const EvidenceCitation>(pred->analysis.evidence)
                 : std::span<const EvidenceCitation>();
        EvidenceScores s = evidence_scores(pred_cites, g.analysis.evidence);
        p_sum += s.precision;
        r_sum += s.recall;
        f_sum += s.f1;
        if (pred)
            all_pred_citations.insert(all_pred_citations.end(), pred->analysis.evidence.begin(),
                                      pred->analysis.evidence.end());
    }

    if (all_elements.empty()) throw EmptyEvaluation("gold samples contain no detail elements");

    DerResult der = compute_der(all_elements, table, policy);
    report.der_overall = der.der_overall;
    report.der_by_type = der.der_by_type;
    report.ambiguous_count = der.ambiguous_count;
    report.k_total = der.k_total;
    for (const auto& [tier, elems] : tier_elements) {
        DerResult tr = compute_der(elems, table, policy);
        report.der_by_tier[tier] = tr.der_overall;
    }

    report.n_samples = static_cast<int>(gold.size());
    report.compliance_accuracy = compliance_accuracy(pred_judgments, gold_judgments);
    double n = static_cast<double>(gold.size());
    report.evidence_precision = p_sum / n;
    report.evidence_recall = r_sum / n;
    report.evidence_f1 = f_sum / n;

    ConsistencyResult cons = evidence_consistency(all_pred_citations, docs);
    report.evidence_consistency = cons.consistency;
    report.dangling_citations = cons.dangling;
    return report;
}

}  // namespace faithkit
