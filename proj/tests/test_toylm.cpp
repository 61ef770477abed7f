#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "faithkit/rng.hpp"
#include "faithkit/toylm.hpp"

using namespace faithkit;

namespace {

ToyModelConfig tiny_config(int vocab = 12, uint64_t seed = 5) {
    ToyModelConfig cfg;
    cfg.vocab_size = vocab;
    cfg.layers = 2;
    cfg.model_dim = 16;
    cfg.heads = 2;
    cfg.context_len = 32;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("vocabulary assigns stable ids with unk fallback") {
    Vocabulary v;
    CHECK(v.size() == 2);
    int a = v.add("shall");
    CHECK(v.add("shall") == a);
    CHECK(v.id("shall") == a);
    CHECK(v.id("never-seen") == Vocabulary::kUnk);
    v.add_text("70.0 MPa limit");
    CHECK(v.id("70.0") != Vocabulary::kUnk);
    auto ids = v.encode_text("70.0 MPa");
    CHECK(ids.size() == 2);
}

TEST_CASE("config validation bounds the parameter count") {
    ToyModelConfig cfg = tiny_config();
    CHECK(toy_param_count(cfg) < 100000);
    cfg.validate();

    ToyModelConfig big = cfg;
    big.vocab_size = 5000;
    big.model_dim = 64;
    CHECK_THROWS_AS(big.validate(), ConfigError);

    ToyModelConfig odd = cfg;
    odd.heads = 3;  // 16 % 3 != 0
    CHECK_THROWS_AS(odd.validate(), ConfigError);
}

TEST_CASE("degenerate single-token vocabulary scores zero log-prob") {
    ToyModelConfig cfg;
    cfg.vocab_size = 1;
    cfg.layers = 1;
    cfg.model_dim = 8;
    cfg.heads = 1;
    cfg.context_len = 8;
    ToyModel m = ToyModel::randomized(cfg);
    std::vector<int> x = {0}, y = {0, 0, 0};
    auto res = m.logprob(x, y);
    for (double lp : res.per_token) CHECK(lp == 0.0);
    CHECK(res.total == 0.0);
}

TEST_CASE("total equals the sum of per-token log-probs") {
    ToyModel m = ToyModel::randomized(tiny_config());
    std::vector<int> x = {2, 3, 4}, y = {5, 6, 7, 8};
    auto res = m.logprob(x, y);
    double sum = 0.0;
    for (double lp : res.per_token) sum += lp;
    CHECK(std::abs(res.total - sum) <= 1e-12);
}

TEST_CASE("fresh model is exactly uniform (zero output head)") {
    int V = 12;
    ToyModel m = ToyModel::randomized(tiny_config(V));
    std::vector<int> x = {1, 2}, y = {3, 4, 5};
    auto res = m.logprob(x, y);
    for (double lp : res.per_token) CHECK(std::abs(lp + std::log(static_cast<double>(V))) <= 1e-12);
}

TEST_CASE("context overflow raises") {
    ToyModel m = ToyModel::randomized(tiny_config());
    std::vector<int> x(20, 1), y(20, 2);
    CHECK_THROWS_AS(m.logprob(x, y), ContextOverflow);
}

TEST_CASE("token ids outside the vocabulary are rejected") {
    ToyModel m = ToyModel::randomized(tiny_config(8));
    std::vector<int> x = {1}, y = {9};
    CHECK_THROWS_AS(m.logprob(x, y), ConfigError);
}

TEST_CASE("analytic logprob gradient matches central differences") {
    ToyModelConfig cfg = tiny_config(10, 77);
    ToyModel m = ToyModel::randomized(cfg);
    // Give the head nonzero weights so every path carries signal.
    {
        Rng rng(3);
        for (auto& p : m.params())
            if (p == 0.0) p = rng.gaussian(0.0, 0.05);
    }
    std::vector<int> x = {1, 4, 2}, y = {3, 7, 5};
    std::vector<double> weights = {1.0, -0.5, 2.0};

    std::vector<double> grad;
    m.logprob_backward(x, y, weights, grad);

    auto loss_at = [&](ToyModel& model) {
        auto res = model.logprob(x, y);
        double s = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * res.per_token[i];
        return s;
    };

    Rng rng(99);
    const double h = 1e-6;
    for (int k = 0; k < 60; ++k) {
        size_t i = rng.index(m.params().size());
        double orig = m.params()[i];
        m.params()[i] = orig + h;
        double lp = loss_at(m);
        m.params()[i] = orig - h;
        double lm = loss_at(m);
        m.params()[i] = orig;
        double numeric = (lp - lm) / (2.0 * h);
        double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
        CHECK(std::abs(grad[i] - numeric) / denom <= 1e-4);
    }
}

TEST_CASE("token_grad equals a one-hot weighted backward") {
    ToyModel m = ToyModel::randomized(tiny_config(10, 13));
    std::vector<int> x = {2, 3}, y = {4, 5, 6};
    for (int t = 0; t < 3; ++t) {
        std::vector<double> a, b;
        m.token_grad(x, y, t, a);
        std::vector<double> weights(y.size(), 0.0);
        weights[static_cast<size_t>(t)] = 1.0;
        m.logprob_backward(x, y, weights, b);
        double max_diff = 0.0;
        for (size_t i = 0; i < a.size(); ++i) max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
        // Same math on a truncated vs full graph; only float noise differs.
        CHECK(max_diff <= 1e-12);
    }
}

TEST_CASE("checkpoint round trip preserves parameters and vocabulary") {
    ToyModel m = ToyModel::randomized(tiny_config(9, 21));
    Vocabulary vocab;
    vocab.add_text("stationary storage pressure shall not exceed 70.0 MPa");

    auto path = std::filesystem::temp_directory_path() / "faithkit_test_ckpt.bin";
    save_checkpoint(path.string(), m, vocab);
    Checkpoint loaded = load_checkpoint(path.string());
    CHECK(loaded.model.params() == m.params());
    CHECK(loaded.vocab.tokens() == vocab.tokens());
    CHECK(loaded.model.config().vocab_size == m.config().vocab_size);
    std::filesystem::remove(path);
}

TEST_CASE("randomized init is reproducible from the seed") {
    ToyModel a = ToyModel::randomized(tiny_config(10, 42));
    ToyModel b = ToyModel::randomized(tiny_config(10, 42));
    CHECK(a.params() == b.params());
    ToyModel c = ToyModel::randomized(tiny_config(10, 43));
    CHECK(a.params() != c.params());
}
