#include "faithkit/toylm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "faithkit/canonical.hpp"
#include "faithkit/rng.hpp"

namespace faithkit {

Vocabulary::Vocabulary() {
    add("<unk>");
    add("<sep>");
}

int Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, id);
    return id;
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

void Vocabulary::add_text(std::string_view text) {
    for (const auto& t : tokenize(text)) add(t);
}

std::vector<int> Vocabulary::encode_text(std::string_view text) const {
    std::vector<int> out;
    for (const auto& t : tokenize(text)) out.push_back(id(t));
    return out;
}

void ToyModelConfig::validate() const {
    if (vocab_size < 1) throw ConfigError("vocab_size must be positive");
    if (layers < 1 || model_dim < 1 || heads < 1 || context_len < 2 || mlp_mult < 1)
        throw ConfigError("model dimensions must be positive");
    if (model_dim % heads != 0) throw ConfigError("model_dim must be divisible by heads");
    int64_t count = toy_param_count(*this);
    if (count >= 100000)
        throw ConfigError("parameter count " + std::to_string(count) +
                          " too large for finite-difference verification (limit 1e5)");
}

namespace layout {

struct Layer {
    size_t ln1, wq, wk, wv, wo, ln2, w1, w2;
};

struct Offsets {
    size_t tok_emb = 0, pos_emb = 0, lnf = 0, head = 0, total = 0;
    std::vector<Layer> layers;
};

Offsets compute(const ToyModelConfig& c) {
    Offsets o;
    size_t d = static_cast<size_t>(c.model_dim);
    size_t md = d * static_cast<size_t>(c.mlp_mult);
    size_t pos = 0;
    o.tok_emb = pos;
    pos += static_cast<size_t>(c.vocab_size) * d;
    o.pos_emb = pos;
    pos += static_cast<size_t>(c.context_len) * d;
    for (int l = 0; l < c.layers; ++l) {
        Layer lay;
        lay.ln1 = pos;
        pos += d;
        lay.wq = pos;
        pos += d * d;
        lay.wk = pos;
        pos += d * d;
        lay.wv = pos;
        pos += d * d;
        lay.wo = pos;
        pos += d * d;
        lay.ln2 = pos;
        pos += d;
        lay.w1 = pos;
        pos += d * md;
        lay.w2 = pos;
        pos += md * d;
        o.layers.push_back(lay);
    }
    o.lnf = pos;
    pos += d;
    o.head = pos;
    pos += d * static_cast<size_t>(c.vocab_size);
    o.total = pos;
    return o;
}

}  // namespace layout

int64_t toy_param_count(const ToyModelConfig& cfg) {
    return static_cast<int64_t>(layout::compute(cfg).total);
}

ToyModel::ToyModel(const ToyModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    params_.assign(layout::compute(cfg_).total, 0.0);
    // Norm gains start at 1 so a zeroed model is still well-defined.
    layout::Offsets off = layout::compute(cfg_);
    for (const auto& lay : off.layers) {
        for (int i = 0; i < cfg_.model_dim; ++i) {
            params_[lay.ln1 + static_cast<size_t>(i)] = 1.0;
            params_[lay.ln2 + static_cast<size_t>(i)] = 1.0;
        }
    }
    for (int i = 0; i < cfg_.model_dim; ++i) params_[off.lnf + static_cast<size_t>(i)] = 1.0;
}

ToyModel ToyModel::randomized(const ToyModelConfig& cfg) {
    ToyModel m(cfg);
    layout::Offsets off = layout::compute(cfg);
    Rng rng(cfg.seed);
    constexpr double init_std = 0.08;
    auto fill = [&](size_t begin, size_t count) {
        for (size_t i = 0; i < count; ++i) m.params_[begin + i] = rng.gaussian(0.0, init_std);
    };
    size_t d = static_cast<size_t>(cfg.model_dim);
    size_t md = d * static_cast<size_t>(cfg.mlp_mult);
    fill(off.tok_emb, static_cast<size_t>(cfg.vocab_size) * d);
    fill(off.pos_emb, static_cast<size_t>(cfg.context_len) * d);
    for (const auto& lay : off.layers) {
        fill(lay.wq, d * d);
        fill(lay.wk, d * d);
        fill(lay.wv, d * d);
        fill(lay.wo, d * d);
        fill(lay.w1, d * md);
        fill(lay.w2, md * d);
    }
    // Output head stays zero: a fresh model scores every token -ln V.
    return m;
}

namespace {

constexpr double kRmsEps = 1e-6;

// GELU (tanh approximation): smooth everywhere, so finite-difference
// verification is well-behaved at any point.
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) {
    double u = kGeluC * (x + kGeluA * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_derivative(double x) {
    double u = kGeluC * (x + kGeluA * x * x * x);
    double t = std::tanh(u);
    double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

struct LayerCache {
    std::vector<double> a;      // T x d, rmsnorm(x) before attention
    std::vector<double> rms1;   // T
    std::vector<double> q, k, v;  // T x d
    std::vector<double> att;    // heads x T x T, causal rows
    std::vector<double> ctx;    // T x d (pre-Wo)
    std::vector<double> x_attn;  // T x d, residual stream after attention
    std::vector<double> b;      // T x d, rmsnorm before mlp
    std::vector<double> rms2;   // T
    std::vector<double> h_pre;  // T x md
    std::vector<double> h_act;  // T x md
    std::vector<double> x_out;  // T x d, residual stream after mlp
};

struct ForwardCache {
    int T = 0;
    std::vector<int> seq;
    std::vector<double> x0;   // T x d after embeddings
    std::vector<LayerCache> layers;
    std::vector<double> f;    // T x d final norm
    std::vector<double> rmsf;  // T
};

// y = x * g / rms(x); returns rms per row.
void rmsnorm_forward(std::span<const double> x, std::span<const double> g, int T, int d,
                     std::vector<double>& out, std::vector<double>& rms) {
    out.resize(static_cast<size_t>(T) * static_cast<size_t>(d));
    rms.resize(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        const double* xt = &x[static_cast<size_t>(t) * static_cast<size_t>(d)];
        double ss = 0.0;
        for (int i = 0; i < d; ++i) ss += xt[i] * xt[i];
        double r = std::sqrt(ss / d + kRmsEps);
        rms[static_cast<size_t>(t)] = r;
        double* ot = &out[static_cast<size_t>(t) * static_cast<size_t>(d)];
        for (int i = 0; i < d; ++i) ot[i] = xt[i] * g[static_cast<size_t>(i)] / r;
    }
}

// dx += backprop of rmsnorm; dg accumulated.
void rmsnorm_backward(std::span<const double> x, std::span<const double> g, std::span<const double> rms,
                      std::span<const double> dout, int T, int d, double* dx, double* dg) {
    for (int t = 0; t < T; ++t) {
        const double* xt = &x[static_cast<size_t>(t) * static_cast<size_t>(d)];
        const double* dot = &dout[static_cast<size_t>(t) * static_cast<size_t>(d)];
        double r = rms[static_cast<size_t>(t)];
        double inner = 0.0;
        for (int i = 0; i < d; ++i) inner += dot[i] * g[static_cast<size_t>(i)] * xt[i];
        double scale = inner / (d * r * r * r);
        double* dxt = dx + static_cast<size_t>(t) * static_cast<size_t>(d);
        for (int i = 0; i < d; ++i) {
            dxt[i] += dot[i] * g[static_cast<size_t>(i)] / r - xt[i] * scale;
            dg[i] += dot[i] * xt[i] / r;
        }
    }
}

// out[t] = in[t] (1 x d) * W (d x cols)
void matmul_rows(std::span<const double> in, const double* W, int T, int d, int cols,
                 std::vector<double>& out) {
    out.assign(static_cast<size_t>(T) * static_cast<size_t>(cols), 0.0);
    for (int t = 0; t < T; ++t) {
        const double* it = &in[static_cast<size_t>(t) * static_cast<size_t>(d)];
        double* ot = &out[static_cast<size_t>(t) * static_cast<size_t>(cols)];
        for (int i = 0; i < d; ++i) {
            double v = it[i];
            if (v == 0.0) continue;
            const double* wrow = W + static_cast<size_t>(i) * static_cast<size_t>(cols);
            for (int j = 0; j < cols; ++j) ot[j] += v * wrow[j];
        }
    }
}

// din[t] += dout[t] * W^T ; dW += in^T * dout
void matmul_rows_backward(std::span<const double> in, const double* W, std::span<const double> dout, int T,
                          int d, int cols, double* din, double* dW) {
    for (int t = 0; t < T; ++t) {
        const double* it = &in[static_cast<size_t>(t) * static_cast<size_t>(d)];
        const double* dot = &dout[static_cast<size_t>(t) * static_cast<size_t>(cols)];
        double* dit = din + static_cast<size_t>(t) * static_cast<size_t>(d);
        for (int i = 0; i < d; ++i) {
            const double* wrow = W + static_cast<size_t>(i) * static_cast<size_t>(cols);
            double* dwrow = dW + static_cast<size_t>(i) * static_cast<size_t>(cols);
            double acc = 0.0;
            double v = it[i];
            for (int j = 0; j < cols; ++j) {
                acc += dot[j] * wrow[j];
                dwrow[j] += v * dot[j];
            }
            dit[i] += acc;
        }
    }
}

}  // namespace

namespace {

// Full forward pass caching every intermediate needed by the backward pass.
void forward(const ToyModelConfig& cfg, const std::vector<double>& params, const layout::Offsets& off,
             std::span<const int> seq, ForwardCache& fc) {
    const int T = static_cast<int>(seq.size());
    const int d = cfg.model_dim;
    const int H = cfg.heads;
    const int dh = d / H;
    const int md = d * cfg.mlp_mult;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    fc.T = T;
    fc.seq.assign(seq.begin(), seq.end());
    fc.x0.resize(static_cast<size_t>(T) * static_cast<size_t>(d));
    for (int t = 0; t < T; ++t) {
        const double* tok = &params[off.tok_emb + static_cast<size_t>(seq[static_cast<size_t>(t)]) *
                                                      static_cast<size_t>(d)];
        const double* pos = &params[off.pos_emb + static_cast<size_t>(t) * static_cast<size_t>(d)];
        double* xt = &fc.x0[static_cast<size_t>(t) * static_cast<size_t>(d)];
        for (int i = 0; i < d; ++i) xt[i] = tok[i] + pos[i];
    }

    fc.layers.assign(static_cast<size_t>(cfg.layers), LayerCache{});
    const std::vector<double>* x = &fc.x0;
    for (int l = 0; l < cfg.layers; ++l) {
        LayerCache& lc = fc.layers[static_cast<size_t>(l)];
        const layout::Layer& lay = off.layers[static_cast<size_t>(l)];

        rmsnorm_forward(*x, std::span(&params[lay.ln1], static_cast<size_t>(d)), T, d, lc.a, lc.rms1);
        matmul_rows(lc.a, &params[lay.wq], T, d, d, lc.q);
        matmul_rows(lc.a, &params[lay.wk], T, d, d, lc.k);
        matmul_rows(lc.a, &params[lay.wv], T, d, d, lc.v);

        lc.att.assign(static_cast<size_t>(H) * static_cast<size_t>(T) * static_cast<size_t>(T), 0.0);
        lc.ctx.assign(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        std::vector<double> scores;
        for (int h = 0; h < H; ++h) {
            for (int t = 0; t < T; ++t) {
                scores.assign(static_cast<size_t>(t) + 1, 0.0);
                const double* qt = &lc.q[static_cast<size_t>(t) * static_cast<size_t>(d) +
                                         static_cast<size_t>(h) * static_cast<size_t>(dh)];
                double maxs = -1e300;
                for (int j = 0; j <= t; ++j) {
                    const double* kj = &lc.k[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                             static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    double s = 0.0;
                    for (int i = 0; i < dh; ++i) s += qt[i] * kj[i];
                    s *= scale;
                    scores[static_cast<size_t>(j)] = s;
                    if (s > maxs) maxs = s;
                }
                double denom = 0.0;
                for (int j = 0; j <= t; ++j) {
                    double e = std::exp(scores[static_cast<size_t>(j)] - maxs);
                    scores[static_cast<size_t>(j)] = e;
                    denom += e;
                }
                double* att_row = &lc.att[(static_cast<size_t>(h) * static_cast<size_t>(T) +
                                           static_cast<size_t>(t)) *
                                          static_cast<size_t>(T)];
                double* ctx_t = &lc.ctx[static_cast<size_t>(t) * static_cast<size_t>(d) +
                                        static_cast<size_t>(h) * static_cast<size_t>(dh)];
                for (int j = 0; j <= t; ++j) {
                    double alpha = scores[static_cast<size_t>(j)] / denom;
                    att_row[j] = alpha;
                    const double* vj = &lc.v[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                             static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    for (int i = 0; i < dh; ++i) ctx_t[i] += alpha * vj[i];
                }
            }
        }

        std::vector<double> attn_out;
        matmul_rows(lc.ctx, &params[lay.wo], T, d, d, attn_out);
        lc.x_attn.resize(static_cast<size_t>(T) * static_cast<size_t>(d));
        for (size_t i = 0; i < lc.x_attn.size(); ++i) lc.x_attn[i] = (*x)[i] + attn_out[i];

        rmsnorm_forward(lc.x_attn, std::span(&params[lay.ln2], static_cast<size_t>(d)), T, d, lc.b, lc.rms2);
        matmul_rows(lc.b, &params[lay.w1], T, d, md, lc.h_pre);
        lc.h_act.resize(lc.h_pre.size());
        for (size_t i = 0; i < lc.h_pre.size(); ++i) lc.h_act[i] = gelu(lc.h_pre[i]);
        std::vector<double> mlp_out;
        matmul_rows(lc.h_act, &params[lay.w2], T, md, d, mlp_out);
        lc.x_out.resize(static_cast<size_t>(T) * static_cast<size_t>(d));
        for (size_t i = 0; i < lc.x_out.size(); ++i) lc.x_out[i] = lc.x_attn[i] + mlp_out[i];

        x = &lc.x_out;
    }
    rmsnorm_forward(*x, std::span(&params[off.lnf], static_cast<size_t>(d)), T, d, fc.f, fc.rmsf);
}

// Log-softmax over the head output at one position; returns logprob of
// `target` and optionally the full probability row.
double position_logprob(const ToyModelConfig& cfg, const std::vector<double>& params,
                        const layout::Offsets& off, const ForwardCache& fc, int pos, int target,
                        std::vector<double>* probs_out) {
    const int d = cfg.model_dim;
    const int V = cfg.vocab_size;
    const double* f = &fc.f[static_cast<size_t>(pos) * static_cast<size_t>(d)];
    std::vector<double> logits(static_cast<size_t>(V), 0.0);
    const double* W = &params[off.head];
    for (int i = 0; i < d; ++i) {
        double v = f[i];
        if (v == 0.0) continue;
        const double* wrow = W + static_cast<size_t>(i) * static_cast<size_t>(V);
        for (int j = 0; j < V; ++j) logits[static_cast<size_t>(j)] += v * wrow[j];
    }
    double maxl = logits[0];
    for (int j = 1; j < V; ++j) maxl = std::max(maxl, logits[static_cast<size_t>(j)]);
    double denom = 0.0;
    for (int j = 0; j < V; ++j) denom += std::exp(logits[static_cast<size_t>(j)] - maxl);
    double log_denom = maxl + std::log(denom);
    if (probs_out) {
        probs_out->resize(static_cast<size_t>(V));
        for (int j = 0; j < V; ++j)
            (*probs_out)[static_cast<size_t>(j)] = std::exp(logits[static_cast<size_t>(j)] - log_denom);
    }
    return logits[static_cast<size_t>(target)] - log_denom;
}

}  // namespace

ToyModel::LogProbResult ToyModel::logprob(std::span<const int> x, std::span<const int> y) const {
    if (x.empty()) throw ConfigError("prompt must contain at least one token");
    if (y.empty()) throw ConfigError("response must contain at least one token");
    if (static_cast<int>(x.size() + y.size()) > cfg_.context_len)
        throw ContextOverflow("sequence length " + std::to_string(x.size() + y.size()) +
                              " exceeds context " + std::to_string(cfg_.context_len));
    for (int id : x)
        if (id < 0 || id >= cfg_.vocab_size) throw ConfigError("token id out of range");
    for (int id : y)
        if (id < 0 || id >= cfg_.vocab_size) throw ConfigError("token id out of range");

    layout::Offsets off = layout::compute(cfg_);
    std::vector<int> seq(x.begin(), x.end());
    seq.insert(seq.end(), y.begin(), y.end());

    ForwardCache fc;
    forward(cfg_, params_, off, seq, fc);

    LogProbResult res;
    res.per_token.resize(y.size());
    for (size_t t = 0; t < y.size(); ++t) {
        int pos = static_cast<int>(x.size() + t) - 1;
        double lp = position_logprob(cfg_, params_, off, fc, pos, y[t], nullptr);
        res.per_token[t] = lp;
        res.total += lp;
    }
    return res;
}

void ToyModel::logprob_backward(std::span<const int> x, std::span<const int> y,
                                std::span<const double> weights, std::vector<double>& grad) const {
    if (weights.size() != y.size()) throw ConfigError("weight count must match response length");
    if (x.empty() || y.empty()) throw ConfigError("prompt and response must be non-empty");
    if (static_cast<int>(x.size() + y.size()) > cfg_.context_len)
        throw ContextOverflow("sequence length exceeds context window");

    layout::Offsets off = layout::compute(cfg_);
    if (grad.size() != off.total) grad.assign(off.total, 0.0);

    const int d = cfg_.model_dim;
    const int H = cfg_.heads;
    const int dh = d / H;
    const int md = d * cfg_.mlp_mult;
    const int V = cfg_.vocab_size;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    std::vector<int> seq(x.begin(), x.end());
    seq.insert(seq.end(), y.begin(), y.end());
    ForwardCache fc;
    forward(cfg_, params_, off, seq, fc);
    const int T = fc.T;

    // d(loss)/d(f) through the output head.
    std::vector<double> df(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
    std::vector<double> probs;
    for (size_t t = 0; t < y.size(); ++t) {
        double w = weights[t];
        if (w == 0.0) continue;
        int pos = static_cast<int>(x.size() + t) - 1;
        position_logprob(cfg_, params_, off, fc, pos, y[t], &probs);
        // dlogits = w * (onehot(target) - p)
        const double* f = &fc.f[static_cast<size_t>(pos) * static_cast<size_t>(d)];
        double* df_pos = &df[static_cast<size_t>(pos) * static_cast<size_t>(d)];
        double* dW = &grad[off.head];
        const double* W = &params_[off.head];
        for (int j = 0; j < V; ++j) {
            double dl = -w * probs[static_cast<size_t>(j)];
            if (j == y[t]) dl += w;
            if (dl == 0.0) continue;
            for (int i = 0; i < d; ++i) {
                dW[static_cast<size_t>(i) * static_cast<size_t>(V) + static_cast<size_t>(j)] += f[i] * dl;
                df_pos[i] += dl * W[static_cast<size_t>(i) * static_cast<size_t>(V) + static_cast<size_t>(j)];
            }
        }
    }

    // Final norm.
    const std::vector<double>& x_last =
        cfg_.layers > 0 ? fc.layers[static_cast<size_t>(cfg_.layers - 1)].x_out : fc.x0;
    std::vector<double> dx(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
    rmsnorm_backward(x_last, std::span(&params_[off.lnf], static_cast<size_t>(d)), fc.rmsf, df, T, d,
                     dx.data(), &grad[off.lnf]);

    // Layers in reverse.
    for (int l = cfg_.layers - 1; l >= 0; --l) {
        LayerCache& lc = fc.layers[static_cast<size_t>(l)];
        const layout::Layer& lay = off.layers[static_cast<size_t>(l)];
        const std::vector<double>& x_in = l > 0 ? fc.layers[static_cast<size_t>(l - 1)].x_out : fc.x0;

        // MLP: x_out = x_attn + relu(rmsnorm(x_attn) W1) W2
        std::vector<double> dh_act(static_cast<size_t>(T) * static_cast<size_t>(md), 0.0);
        matmul_rows_backward(lc.h_act, &params_[lay.w2], dx, T, md, d, dh_act.data(), &grad[lay.w2]);
        for (size_t i = 0; i < dh_act.size(); ++i) dh_act[i] *= gelu_derivative(lc.h_pre[i]);
        std::vector<double> db(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        matmul_rows_backward(lc.b, &params_[lay.w1], dh_act, T, d, md, db.data(), &grad[lay.w1]);
        // dx currently holds d(x_out); residual passes it to x_attn as well.
        std::vector<double> dx_attn = dx;
        rmsnorm_backward(lc.x_attn, std::span(&params_[lay.ln2], static_cast<size_t>(d)), lc.rms2, db, T, d,
                         dx_attn.data(), &grad[lay.ln2]);

        // Attention: x_attn = x_in + (ctx Wo)
        std::vector<double> dctx(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        matmul_rows_backward(lc.ctx, &params_[lay.wo], dx_attn, T, d, d, dctx.data(), &grad[lay.wo]);

        std::vector<double> dq(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        std::vector<double> dk(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        std::vector<double> dv(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        std::vector<double> dalpha, dscore;
        for (int h = 0; h < H; ++h) {
            for (int t = 0; t < T; ++t) {
                const double* att_row = &lc.att[(static_cast<size_t>(h) * static_cast<size_t>(T) +
                                                 static_cast<size_t>(t)) *
                                                static_cast<size_t>(T)];
                const double* dctx_t = &dctx[static_cast<size_t>(t) * static_cast<size_t>(d) +
                                             static_cast<size_t>(h) * static_cast<size_t>(dh)];
                dalpha.assign(static_cast<size_t>(t) + 1, 0.0);
                for (int j = 0; j <= t; ++j) {
                    const double* vj = &lc.v[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                             static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    double* dvj = &dv[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                      static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    double acc = 0.0;
                    for (int i = 0; i < dh; ++i) {
                        acc += dctx_t[i] * vj[i];
                        dvj[i] += att_row[j] * dctx_t[i];
                    }
                    dalpha[static_cast<size_t>(j)] = acc;
                }
                double inner = 0.0;
                for (int j = 0; j <= t; ++j) inner += att_row[j] * dalpha[static_cast<size_t>(j)];
                dscore.assign(static_cast<size_t>(t) + 1, 0.0);
                for (int j = 0; j <= t; ++j)
                    dscore[static_cast<size_t>(j)] = att_row[j] * (dalpha[static_cast<size_t>(j)] - inner);

                const double* qt = &lc.q[static_cast<size_t>(t) * static_cast<size_t>(d) +
                                         static_cast<size_t>(h) * static_cast<size_t>(dh)];
                double* dqt = &dq[static_cast<size_t>(t) * static_cast<size_t>(d) +
                                  static_cast<size_t>(h) * static_cast<size_t>(dh)];
                for (int j = 0; j <= t; ++j) {
                    double ds = dscore[static_cast<size_t>(j)] * scale;
                    if (ds == 0.0) continue;
                    const double* kj = &lc.k[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                             static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    double* dkj = &dk[static_cast<size_t>(j) * static_cast<size_t>(d) +
                                      static_cast<size_t>(h) * static_cast<size_t>(dh)];
                    for (int i = 0; i < dh; ++i) {
                        dqt[i] += ds * kj[i];
                        dkj[i] += ds * qt[i];
                    }
                }
            }
        }

        std::vector<double> da(static_cast<size_t>(T) * static_cast<size_t>(d), 0.0);
        matmul_rows_backward(lc.a, &params_[lay.wq], dq, T, d, d, da.data(), &grad[lay.wq]);
        matmul_rows_backward(lc.a, &params_[lay.wk], dk, T, d, d, da.data(), &grad[lay.wk]);
        matmul_rows_backward(lc.a, &params_[lay.wv], dv, T, d, d, da.data(), &grad[lay.wv]);

        // d(x_in) = d(x_attn) (residual) + rmsnorm backward of da.
        rmsnorm_backward(x_in, std::span(&params_[lay.ln1], static_cast<size_t>(d)), lc.rms1, da, T, d,
                         dx_attn.data(), &grad[lay.ln1]);
        dx = std::move(dx_attn);
    }

    // Embeddings.
    for (int t = 0; t < T; ++t) {
        const double* dxt = &dx[static_cast<size_t>(t) * static_cast<size_t>(d)];
        double* dtok = &grad[off.tok_emb + static_cast<size_t>(fc.seq[static_cast<size_t>(t)]) *
                                                static_cast<size_t>(d)];
        double* dpos = &grad[off.pos_emb + static_cast<size_t>(t) * static_cast<size_t>(d)];
        for (int i = 0; i < d; ++i) {
            dtok[i] += dxt[i];
            dpos[i] += dxt[i];
        }
    }
}

void ToyModel::token_grad(std::span<const int> x, std::span<const int> y, int t,
                          std::vector<double>& grad) const {
    if (t < 0 || static_cast<size_t>(t) >= y.size()) throw ConfigError("token index out of range");
    std::span<const int> y_prefix = y.subspan(0, static_cast<size_t>(t) + 1);
    std::vector<double> weights(static_cast<size_t>(t) + 1, 0.0);
    weights.back() = 1.0;
    logprob_backward(x, y_prefix, weights, grad);
}

namespace {

constexpr char kCheckpointMagic[8] = {'F', 'K', 'C', 'K', 'P', 'T', '0', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const ToyModel& model, const Vocabulary& vocab) {
    nlohmann::json header;
    const ToyModelConfig& c = model.config();
    header["config"] = {{"vocab_size", c.vocab_size}, {"layers", c.layers},   {"model_dim", c.model_dim},
                        {"heads", c.heads},           {"context_len", c.context_len},
                        {"mlp_mult", c.mlp_mult},     {"seed", c.seed}};
    header["vocab"] = vocab.tokens();
    std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open checkpoint file '" + path + "' for writing");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    uint64_t hlen = header_str.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    uint64_t plen = model.params().size();
    out.write(reinterpret_cast<const char*>(&plen), sizeof(plen));
    out.write(reinterpret_cast<const char*>(model.params().data()),
              static_cast<std::streamsize>(plen * sizeof(double)));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint file '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw ParseError("'" + path + "' is not a toy model checkpoint");
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string header_str(hlen, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json header = nlohmann::json::parse(header_str);

    ToyModelConfig cfg;
    const auto& jc = header.at("config");
    cfg.vocab_size = jc.at("vocab_size").get<int>();
    cfg.layers = jc.at("layers").get<int>();
    cfg.model_dim = jc.at("model_dim").get<int>();
    cfg.heads = jc.at("heads").get<int>();
    cfg.context_len = jc.at("context_len").get<int>();
    cfg.mlp_mult = jc.at("mlp_mult").get<int>();
    cfg.seed = jc.at("seed").get<uint64_t>();

    Vocabulary vocab;
    for (const auto& jt : header.at("vocab")) vocab.add(jt.get<std::string>());

    ToyModel model(cfg);
    uint64_t plen = 0;
    in.read(reinterpret_cast<char*>(&plen), sizeof(plen));
    if (plen != model.params().size()) throw ParseError("checkpoint parameter count mismatch");
    in.read(reinterpret_cast<char*>(model.params().data()),
            static_cast<std::streamsize>(plen * sizeof(double)));
    if (!in) throw ParseError("checkpoint truncated");
    return {std::move(model), std::move(vocab)};
}

}  // namespace faithkit
