#include "faithkit/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "faithkit/canonical.hpp"
#include "faithkit/rng.hpp"

namespace faithkit {

void DpoConfig::validate() const {
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
}

TokenizedPair encode_pair(const Vocabulary& vocab, const PreferencePair& pair) {
    TokenizedPair t;
    t.prompt = vocab.encode_text(pair.prompt);
    t.chosen = vocab.encode_text(pair.chosen);
    t.rejected = vocab.encode_text(pair.rejected);
    t.positions = pair.positions;
    t.type = pair.error_type;
    return t;
}

EvidenceExample encode_evidence(const Vocabulary& vocab, std::string_view prompt, std::string_view doc_id,
                                std::string_view seg_id, std::string_view quote) {
    EvidenceExample e;
    e.prefix = vocab.encode_text(prompt);
    e.prefix.push_back(Vocabulary::kSep);
    for (int id : vocab.encode_text(doc_id)) e.prefix.push_back(id);
    for (int id : vocab.encode_text(seg_id)) e.prefix.push_back(id);
    e.prefix.push_back(Vocabulary::kSep);
    e.quote = vocab.encode_text(quote);
    return e;
}

namespace {

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double pair_margin(const ToyModel& policy, const ToyModel& reference, const TokenizedPair& pair) {
    double lp_w = policy.logprob(pair.prompt, pair.chosen).total;
    double lp_l = policy.logprob(pair.prompt, pair.rejected).total;
    double ref_w = reference.logprob(pair.prompt, pair.chosen).total;
    double ref_l = reference.logprob(pair.prompt, pair.rejected).total;
    return (lp_w - ref_w) - (lp_l - ref_l);
}

}  // namespace

double dpo_loss(const ToyModel& policy, const ToyModel& reference, const TokenizedPair& pair, double beta) {
    return softplus(-beta * pair_margin(policy, reference, pair));
}

double dpo_loss_mean(const ToyModel& policy, const ToyModel& reference, std::span<const TokenizedPair> pairs,
                     double beta) {
    if (pairs.empty()) throw ConfigError("dpo loss needs at least one pair");
    double sum = 0.0;
    for (const auto& p : pairs) sum += dpo_loss(policy, reference, p, beta);
    return sum / static_cast<double>(pairs.size());
}

double evidence_loss(const ToyModel& policy, std::span<const EvidenceExample> evidence) {
    if (evidence.empty()) throw EmptyEvidence("evidence loss needs at least one citation");
    double sum = 0.0;
    for (const auto& e : evidence) sum += -policy.logprob(e.prefix, e.quote).total;
    return sum / static_cast<double>(evidence.size());
}

double total_loss(const ToyModel& policy, const ToyModel& reference, std::span<const TokenizedPair> pairs,
                  std::span<const EvidenceExample> evidence, double beta, double lambda) {
    double dpo = dpo_loss_mean(policy, reference, pairs, beta);
    if (lambda == 0.0) return dpo;
    return dpo + lambda * evidence_loss(policy, evidence);
}

double total_loss_grad(const ToyModel& policy, const ToyModel& reference,
                       std::span<const TokenizedPair> pairs, std::span<const EvidenceExample> evidence,
                       double beta, double lambda, std::vector<double>& grad) {
    if (pairs.empty()) throw ConfigError("dpo loss needs at least one pair");
    grad.assign(policy.params().size(), 0.0);
    const double n = static_cast<double>(pairs.size());
    double loss = 0.0;
    for (const auto& pair : pairs) {
        double margin = pair_margin(policy, reference, pair);
        loss += softplus(-beta * margin) / n;
        // d(-log sigmoid(beta*margin))/d(margin) = -beta * sigmoid(-beta*margin)
        double w = beta * sigmoid(-beta * margin) / n;
        std::vector<double> weights(pair.chosen.size(), -w);
        policy.logprob_backward(pair.prompt, pair.chosen, weights, grad);
        weights.assign(pair.rejected.size(), w);
        policy.logprob_backward(pair.prompt, pair.rejected, weights, grad);
    }
    if (lambda > 0.0) {
        if (evidence.empty()) throw EmptyEvidence("evidence loss needs at least one citation");
        const double m = static_cast<double>(evidence.size());
        for (const auto& e : evidence) {
            loss += lambda * (-policy.logprob(e.prefix, e.quote).total) / m;
            std::vector<double> weights(e.quote.size(), -lambda / m);
            policy.logprob_backward(e.prefix, e.quote, weights, grad);
        }
    }
    return loss;
}

namespace {

struct SideGrad {
    std::vector<double> grad;
    bool present = false;
};

void fill_token_grad(const ToyModel& policy, std::span<const int> prompt, std::span<const int> response,
                     int t, SideGrad& out) {
    out.grad.assign(policy.params().size(), 0.0);
    policy.token_grad(prompt, response, t, out.grad);
    out.present = true;
}

double norm_diff(const SideGrad& a, const SideGrad& b) {
    double ss = 0.0;
    if (a.present && b.present) {
        for (size_t i = 0; i < a.grad.size(); ++i) {
            double diff = a.grad[i] - b.grad[i];
            ss += diff * diff;
        }
    } else if (a.present) {
        for (double v : a.grad) ss += v * v;
    } else if (b.present) {
        for (double v : b.grad) ss += v * v;
    }
    return std::sqrt(ss);
}

}  // namespace

GradientProfile per_token_gradient_profile(const ToyModel& policy, const TokenizedPair& pair) {
    if (pair.positions.empty()) throw ConfigError("pair has no perturbed positions");
    GradientProfile profile;
    profile.positions = pair.positions;

    const int n = static_cast<int>(pair.chosen.size());
    const int m = static_cast<int>(pair.rejected.size());
    const int len = std::max(n, m);
    std::set<int> pset(pair.positions.begin(), pair.positions.end());
    const int p_min = *pset.begin();
    const int p_max_excl = *pset.rbegin() + 1;
    // Suffix length implied by the position set (positions are expressed
    // over the longer side, diff-style).
    const int suffix = len - p_max_excl;

    SideGrad gw, gl;
    double p_sum = 0.0;
    int p_count = 0;
    double pbar_sum = 0.0;
    int pbar_count = 0;

    for (int t = 0; t < len; ++t) {
        int wi = -1;
        int li = -1;
        if (n == m) {
            wi = t;
            li = t;
        } else if (t < p_min) {
            wi = t;
            li = t;
        } else if (t >= len - suffix) {
            wi = t - (len - n);
            li = t - (len - m);
        } else {
            if (t < n - suffix) wi = t;
            if (t < m - suffix) li = t;
        }

        gw.present = false;
        gl.present = false;
        if (wi >= 0 && wi < n) fill_token_grad(policy, pair.prompt, pair.chosen, wi, gw);
        if (li >= 0 && li < m) fill_token_grad(policy, pair.prompt, pair.rejected, li, gl);
        double norm = norm_diff(gw, gl);
        profile.per_token_delta_norms.emplace_back(t, norm);

        bool in_p = pset.contains(t);
        if (in_p) {
            p_sum += norm;
            ++p_count;
        } else if (t < p_min) {
            profile.phase1_max = std::max(profile.phase1_max, norm);
        } else {
            pbar_sum += norm;
            ++pbar_count;
        }
    }

    profile.p_mean = p_count > 0 ? p_sum / p_count : 0.0;
    if (pbar_count > 0) {
        profile.pbar_after_mean = pbar_sum / pbar_count;
        if (profile.pbar_after_mean > 0.0) {
            profile.ratio = profile.p_mean / profile.pbar_after_mean;
            profile.ratio_valid = true;
        }
    }
    return profile;
}

ProfileSummary summarize_profiles(std::span<const GradientProfile> profiles) {
    ProfileSummary s;
    s.n_pairs = static_cast<int>(profiles.size());
    double ratio_sum = 0.0, p_sum = 0.0, pbar_sum = 0.0;
    std::vector<double> ratios;
    for (const auto& pr : profiles) {
        s.phase1_max = std::max(s.phase1_max, pr.phase1_max);
        p_sum += pr.p_mean;
        pbar_sum += pr.pbar_after_mean;
        if (pr.ratio_valid) {
            ratio_sum += pr.ratio;
            ratios.push_back(pr.ratio);
        }
    }
    s.ratio_count = static_cast<int>(ratios.size());
    if (!ratios.empty()) {
        s.mean_ratio = ratio_sum / static_cast<double>(ratios.size());
        double var = 0.0;
        for (double r : ratios) var += (r - s.mean_ratio) * (r - s.mean_ratio);
        s.std_ratio = std::sqrt(var / static_cast<double>(ratios.size()));
    }
    if (s.n_pairs > 0) {
        s.mean_p_mean = p_sum / s.n_pairs;
        s.mean_pbar_after = pbar_sum / s.n_pairs;
    }
    return s;
}

TrainResult train(ToyModel& policy, std::span<const TokenizedPair> pairs,
                  std::span<const EvidenceExample> evidence, const DpoConfig& config) {
    config.validate();
    if (pairs.empty()) throw ConfigError("training needs a non-empty pair set");

    const ToyModel reference = policy;  // frozen copy of the initial policy

    // Reference log-probs never change; compute them once.
    std::vector<double> ref_w(pairs.size()), ref_l(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        ref_w[i] = reference.logprob(pairs[i].prompt, pairs[i].chosen).total;
        ref_l[i] = reference.logprob(pairs[i].prompt, pairs[i].rejected).total;
    }

    const size_t n_params = policy.params().size();
    std::vector<double> grad(n_params, 0.0);
    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    int64_t step = 0;

    Rng rng(config.seed);
    std::vector<size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    int diverged_epochs = 0;
    size_t evidence_cursor = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
            const double bn = static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;

            for (size_t bi = start; bi < end; ++bi) {
                const TokenizedPair& pair = pairs[order[bi]];
                double lp_w = policy.logprob(pair.prompt, pair.chosen).total;
                double lp_l = policy.logprob(pair.prompt, pair.rejected).total;
                double margin = (lp_w - ref_w[order[bi]]) - (lp_l - ref_l[order[bi]]);
                batch_loss += softplus(-config.beta * margin) / bn;
                double w = config.beta * sigmoid(-config.beta * margin) / bn;
                std::vector<double> weights(pair.chosen.size(), -w);
                policy.logprob_backward(pair.prompt, pair.chosen, weights, grad);
                weights.assign(pair.rejected.size(), w);
                policy.logprob_backward(pair.prompt, pair.rejected, weights, grad);
            }

            if (config.lambda > 0.0 && !evidence.empty()) {
                size_t take = std::min(evidence.size(), static_cast<size_t>(config.batch_size));
                const double m = static_cast<double>(take);
                for (size_t k = 0; k < take; ++k) {
                    const EvidenceExample& e = evidence[(evidence_cursor + k) % evidence.size()];
                    batch_loss += config.lambda * (-policy.logprob(e.prefix, e.quote).total) / m;
                    std::vector<double> weights(e.quote.size(), -config.lambda / m);
                    policy.logprob_backward(e.prefix, e.quote, weights, grad);
                }
                evidence_cursor = (evidence_cursor + take) % evidence.size();
            }

            ++step;
            double b1t = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
            double b2t = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
            std::vector<double>& params = policy.params();
            for (size_t i = 0; i < n_params; ++i) {
                adam_m[i] = config.adam_beta1 * adam_m[i] + (1.0 - config.adam_beta1) * grad[i];
                adam_v[i] = config.adam_beta2 * adam_v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
                double mhat = adam_m[i] / b1t;
                double vhat = adam_v[i] / b2t;
                params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
            }

            epoch_loss += batch_loss;
            ++n_batches;
        }
        epoch_loss /= std::max(1, n_batches);
        result.epoch_losses.push_back(epoch_loss);

        // The reference is a copy of the incoming policy, so the pre-update
        // loss is exactly ln 2 (plus any evidence term, which only raises it).
        const double initial = std::log(2.0);
        if (epoch_loss > 10.0 * initial) {
            if (++diverged_epochs >= 3)
                throw DivergenceDetected("epoch loss " + std::to_string(epoch_loss) + " exceeded 10x initial " +
                                         std::to_string(initial) + " for 3 consecutive epochs");
        } else {
            diverged_epochs = 0;
        }
    }
    return result;
}

double preference_rate(const ToyModel& policy, std::span<const TokenizedPair> pairs) {
    if (pairs.empty()) throw ConfigError("preference rate needs at least one pair");
    int preferred = 0;
    for (const auto& pair : pairs) {
        double lp_w = policy.logprob(pair.prompt, pair.chosen).total;
        double lp_l = policy.logprob(pair.prompt, pair.rejected).total;
        if (lp_w > lp_l) ++preferred;
    }
    return static_cast<double>(preferred) / static_cast<double>(pairs.size());
}

std::vector<PreferencePair> build_random_control_pairs(std::span<const PreferencePair> base, double rate,
                                                       uint64_t seed) {
    if (rate <= 0.0 || rate > 1.0) throw ConfigError("substitution rate must lie in (0,1]");
    // Token pool in first-appearance order across the chosen responses.
    std::vector<std::string> pool;
    std::set<std::string> seen;
    for (const auto& p : base)
        for (const auto& t : tokenize(p.chosen))
            if (seen.insert(t).second) pool.push_back(t);
    if (pool.size() < 2) throw ConfigError("token pool too small for control pairs");

    std::vector<PreferencePair> out;
    out.reserve(base.size());
    for (const auto& p : base) {
        Rng rng(derive_seed(seed, p.pair_id.empty() ? p.sample_id : p.pair_id, 991));
        std::vector<std::string> tokens = tokenize(p.chosen);
        size_t k = std::max<size_t>(1, static_cast<size_t>(std::llround(rate * static_cast<double>(tokens.size()))));
        k = std::min(k, tokens.size());
        std::vector<size_t> idx(tokens.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        std::vector<int> positions;
        for (size_t i = 0; i < k; ++i) {
            size_t pos = idx[i];
            std::string replacement;
            do {
                replacement = pool[rng.index(pool.size())];
            } while (replacement == tokens[pos]);
            tokens[pos] = replacement;
            positions.push_back(static_cast<int>(pos));
        }
        std::sort(positions.begin(), positions.end());

        PreferencePair control = p;
        control.pair_id = "ctrl_" + (p.pair_id.empty() ? p.sample_id : p.pair_id);
        std::string rejected;
        for (const auto& t : tokens) {
            if (!rejected.empty()) rejected.push_back(' ');
            rejected += t;
        }
        control.rejected = std::move(rejected);
        control.positions = std::move(positions);
        control.seed = derive_seed(seed, control.pair_id, 992);
        out.push_back(std::move(control));
    }
    return out;
}

double finite_difference_check(ToyModel& model, const std::function<double(const ToyModel&)>& loss_fn,
                               std::span<const double> analytic_grad, int n_params, double h, uint64_t seed) {
    if (analytic_grad.size() != model.params().size())
        throw ConfigError("analytic gradient size mismatch");
    if (h <= 0.0) throw ConfigError("finite-difference step must be positive");
    Rng rng(seed);
    double max_rel = 0.0;
    for (int k = 0; k < n_params; ++k) {
        size_t i = rng.index(model.params().size());
        double original = model.params()[i];
        model.params()[i] = original + h;
        double lp = loss_fn(model);
        model.params()[i] = original - h;
        double lm = loss_fn(model);
        model.params()[i] = original;
        double numeric = (lp - lm) / (2.0 * h);
        double analytic = analytic_grad[i];
        double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
    return max_rel;
}

}  // namespace faithkit
