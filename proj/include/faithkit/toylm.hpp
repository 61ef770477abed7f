#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "faithkit/errors.hpp"

namespace faithkit {

// Token inventory for the toy model, built from dataset text. Id 0 is the
// unknown token, id 1 a separator used in evidence prefixes.
class Vocabulary {
public:
    static constexpr int kUnk = 0;
    static constexpr int kSep = 1;

    Vocabulary();

    int add(const std::string& token);  // returns existing id if known
    int id(const std::string& token) const;
    const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    void add_text(std::string_view text);
    std::vector<int> encode_text(std::string_view text) const;

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
};

struct ToyModelConfig {
    int vocab_size = 0;
    int layers = 2;
    int model_dim = 32;
    int heads = 2;
    int context_len = 256;
    int mlp_mult = 4;
    uint64_t seed = 0;

    void validate() const;  // dims positive, parameter count < 1e5
};

int64_t toy_param_count(const ToyModelConfig& cfg);

// Small pre-norm transformer (RMSNorm, causal multi-head attention, ReLU
// MLP, untied output head, no biases) with exact manual gradients, all in
// double precision. Trunk weights init gaussian, output head zero, so a
// fresh model is exactly uniform over the vocabulary.
class ToyModel {
public:
    explicit ToyModel(const ToyModelConfig& cfg);  // zero-initialized
    static ToyModel randomized(const ToyModelConfig& cfg);

    const ToyModelConfig& config() const { return cfg_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    int64_t param_count() const { return static_cast<int64_t>(params_.size()); }

    struct LogProbResult {
        double total = 0.0;
        std::vector<double> per_token;
    };

    // Teacher-forced log-probabilities of y given prompt x. Throws
    // ContextOverflow when |x| + |y| exceeds the context window.
    LogProbResult logprob(std::span<const int> x, std::span<const int> y) const;

    // Accumulates d(sum_t weights[t] * logprob_t)/dtheta into grad.
    void logprob_backward(std::span<const int> x, std::span<const int> y, std::span<const double> weights,
                          std::vector<double>& grad) const;

    // Gradient of logprob of y[t] alone, computed on the truncated prefix so
    // tokens beyond t cannot enter the computation at all.
    void token_grad(std::span<const int> x, std::span<const int> y, int t, std::vector<double>& grad) const;

private:
    ToyModelConfig cfg_;
    std::vector<double> params_;
};

void save_checkpoint(const std::string& path, const ToyModel& model, const Vocabulary& vocab);

struct Checkpoint {
    ToyModel model;
    Vocabulary vocab;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace faithkit
