#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "faithkit/toylm.hpp"
#include "faithkit/types.hpp"

namespace faithkit {

struct DpoConfig {
    double beta = 0.1;
    double lambda = 0.5;
    double learning_rate = 1e-3;
    int epochs = 10;
    int batch_size = 16;
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;  // beta > 0, lambda >= 0
};

// A preference pair in token-id space.
struct TokenizedPair {
    std::vector<int> prompt;
    std::vector<int> chosen;
    std::vector<int> rejected;
    std::vector<int> positions;  // response-token indices that differ
    ErrorType type = ErrorType::Threshold;
};

TokenizedPair encode_pair(const Vocabulary& vocab, const PreferencePair& pair);

// Quote generation context: prompt <sep> doc_id seg_id <sep> -> quote.
struct EvidenceExample {
    std::vector<int> prefix;
    std::vector<int> quote;
};

EvidenceExample encode_evidence(const Vocabulary& vocab, std::string_view prompt, std::string_view doc_id,
                                std::string_view seg_id, std::string_view quote);

// -log sigmoid(beta * Delta) with Delta the policy/reference log-ratio
// margin between chosen and rejected.
double dpo_loss(const ToyModel& policy, const ToyModel& reference, const TokenizedPair& pair, double beta);

double dpo_loss_mean(const ToyModel& policy, const ToyModel& reference, std::span<const TokenizedPair> pairs,
                     double beta);

// Mean over citations of the negative joint log-likelihood of the quote
// tokens. Throws EmptyEvidence.
double evidence_loss(const ToyModel& policy, std::span<const EvidenceExample> evidence);

// dpo + lambda * evidence; at lambda == 0 the evidence term is skipped and
// the result is bit-identical to dpo_loss_mean.
double total_loss(const ToyModel& policy, const ToyModel& reference, std::span<const TokenizedPair> pairs,
                  std::span<const EvidenceExample> evidence, double beta, double lambda);

// Gradient of total_loss w.r.t. policy parameters, accumulated into grad.
// Returns the loss value.
double total_loss_grad(const ToyModel& policy, const ToyModel& reference,
                       std::span<const TokenizedPair> pairs, std::span<const EvidenceExample> evidence,
                       double beta, double lambda, std::vector<double>& grad);

// Per-token gradient-difference profile of one pair:
// Delta_t = grad log pi(y_w,t | y_w,<t, x) - grad log pi(y_l,t | y_l,<t, x).
struct GradientProfile {
    std::vector<std::pair<int, double>> per_token_delta_norms;  // (position, ||Delta_t||)
    std::vector<int> positions;                                 // P
    double phase1_max = 0.0;       // max ||Delta_t|| for t < min(P); exactly 0 in theory
    double p_mean = 0.0;           // mean ||Delta_t|| over P
    double pbar_after_mean = 0.0;  // mean over shared positions after min(P)
    double ratio = 0.0;            // p_mean / pbar_after_mean
    bool ratio_valid = false;      // false when no shared position follows min(P)
};

GradientProfile per_token_gradient_profile(const ToyModel& policy, const TokenizedPair& pair);

struct ProfileSummary {
    int n_pairs = 0;
    int ratio_count = 0;
    double mean_ratio = 0.0;
    double std_ratio = 0.0;
    double phase1_max = 0.0;
    double mean_p_mean = 0.0;
    double mean_pbar_after = 0.0;
};

ProfileSummary summarize_profiles(std::span<const GradientProfile> profiles);

struct TrainResult {
    std::vector<double> epoch_losses;
};

// DPO training against a frozen copy of the incoming policy. Deterministic
// under config.seed. Throws DivergenceDetected when the epoch loss exceeds
// ten times the initial loss for three consecutive epochs.
TrainResult train(ToyModel& policy, std::span<const TokenizedPair> pairs,
                  std::span<const EvidenceExample> evidence, const DpoConfig& config);

// Fraction of pairs whose chosen response outscores the rejected one.
double preference_rate(const ToyModel& policy, std::span<const TokenizedPair> pairs);

// Control pairs for the generic-preference baseline: a fixed fraction of
// chosen tokens replaced by random vocabulary draws.
std::vector<PreferencePair> build_random_control_pairs(std::span<const PreferencePair> base, double rate,
                                                       uint64_t seed);

// Central-difference check of analytic_grad on n_params randomly chosen
// parameters; returns the maximum relative error.
double finite_difference_check(ToyModel& model, const std::function<double(const ToyModel&)>& loss_fn,
                               std::span<const double> analytic_grad, int n_params, double h, uint64_t seed);

}  // namespace faithkit
