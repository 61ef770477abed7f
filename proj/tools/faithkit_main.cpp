// faithkit: synthetic regulatory dataset generation, minimal detail
// perturbation, detail-error evaluation, toy DPO training, and per-token
// gradient analysis behind one deterministic command line.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faithkit/dpo.hpp"
#include "faithkit/json_io.hpp"
#include "faithkit/log.hpp"
#include "faithkit/metrics.hpp"
#include "faithkit/perturb.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/synthgen.hpp"
#include "faithkit/toylm.hpp"
#include "faithkit/types.hpp"

namespace fs = std::filesystem;
using faithkit::io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 ok, 2 config, 3 empty eligibility, 4 schema, 5 divergence.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitSchema = 4;
constexpr int kExitDivergence = 5;

struct RunManifest {
    std::string command;
    std::string config_hash;
    uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_time_ms = 0.0;
    std::optional<std::string> error;
};

std::string hash_hex(uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s = "fk64:";
    for (int i = 60; i >= 0; i -= 4) s.push_back(digits[(h >> i) & 0xF]);
    return s;
}

void write_manifest(const fs::path& out_dir, const RunManifest& m) {
    json j{{"command", m.command},
           {"config_hash", m.config_hash},
           {"seed", m.seed},
           {"version", kVersion},
           {"inputs", m.inputs},
           {"outputs", m.outputs},
           {"wall_time_ms", m.wall_time_ms},
           {"error", m.error.has_value() ? json(*m.error) : json(nullptr)}};
    faithkit::io::write_json_file((out_dir / "manifest.json").string(), j);
}

// Runs a command body with manifest bookkeeping; the manifest is written
// also when the body throws.
int run_command(const std::string& name, const fs::path& out_dir, uint64_t seed, const json& effective_config,
                const std::vector<std::string>& inputs, const std::function<std::vector<std::string>()>& body) {
    RunManifest manifest;
    manifest.command = name;
    manifest.seed = seed;
    manifest.config_hash = hash_hex(faithkit::fnv1a64(effective_config.dump()));
    manifest.inputs = inputs;
    auto started = std::chrono::steady_clock::now();
    int code = kExitOk;
    try {
        fs::create_directories(out_dir);
        manifest.outputs = body();
    } catch (const faithkit::SchemaError& e) {
        manifest.error = e.what();
        std::cerr << "schema error: " << e.what() << "\n";
        code = kExitSchema;
    } catch (const faithkit::NoEligibleElement& e) {
        manifest.error = e.what();
        std::cerr << "error: " << e.what() << "\n";
        code = kExitEmpty;
    } catch (const faithkit::DivergenceDetected& e) {
        manifest.error = e.what();
        std::cerr << "error: " << e.what() << "\n";
        code = kExitDivergence;
    } catch (const faithkit::ConfigError& e) {
        manifest.error = e.what();
        std::cerr << "config error: " << e.what() << "\n";
        code = kExitConfig;
    } catch (const std::exception& e) {
        manifest.error = e.what();
        std::cerr << "error: " << e.what() << "\n";
        code = kExitError;
    }
    manifest.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                                .count();
    try {
        fs::create_directories(out_dir);
        write_manifest(out_dir, manifest);
    } catch (const std::exception& e) {
        std::cerr << "failed to write manifest: " << e.what() << "\n";
    }
    return code;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw faithkit::ConfigError("input file '" + path + "' does not exist");
}

faithkit::GeneratorConfig generator_config_from_json(const json& j) {
    faithkit::GeneratorConfig cfg;
    if (j.contains("rng_seed")) cfg.rng_seed = j.at("rng_seed").get<uint64_t>();
    if (j.contains("n_documents")) cfg.n_documents = j.at("n_documents").get<int>();
    if (j.contains("topic_domains")) cfg.topic_domains = j.at("topic_domains").get<std::vector<std::string>>();
    if (j.contains("threshold_probability"))
        cfg.threshold_probability = j.at("threshold_probability").get<double>();
    if (j.contains("condition_probability"))
        cfg.condition_probability = j.at("condition_probability").get<double>();
    if (j.contains("samples_per_tier")) {
        cfg.samples_per_tier.clear();
        for (const auto& [key, value] : j.at("samples_per_tier").items())
            cfg.samples_per_tier[faithkit::tier_from_name(key)] = value.get<int>();
    }
    if (j.contains("doc_token_min")) cfg.doc_token_min = j.at("doc_token_min").get<int64_t>();
    if (j.contains("doc_token_max")) cfg.doc_token_max = j.at("doc_token_max").get<int64_t>();
    if (j.contains("constraints_per_doc_min"))
        cfg.constraints_per_doc_min = j.at("constraints_per_doc_min").get<int>();
    if (j.contains("constraints_per_doc_max"))
        cfg.constraints_per_doc_max = j.at("constraints_per_doc_max").get<int>();
    if (j.contains("key_constraints_min")) cfg.key_constraints_min = j.at("key_constraints_min").get<int>();
    if (j.contains("key_constraints_max")) cfg.key_constraints_max = j.at("key_constraints_max").get<int>();
    return cfg;
}

json generator_config_to_json(const faithkit::GeneratorConfig& cfg) {
    json tiers = json::object();
    for (const auto& [tier, count] : cfg.samples_per_tier)
        tiers[std::string(faithkit::tier_name(tier))] = count;
    return json{{"rng_seed", cfg.rng_seed},
                {"template_version", std::string(faithkit::kRenderTemplateVersion)},
                {"n_documents", cfg.n_documents},
                {"topic_domains", cfg.topic_domains},
                {"threshold_probability", cfg.threshold_probability},
                {"condition_probability", cfg.condition_probability},
                {"samples_per_tier", tiers},
                {"doc_token_min", cfg.doc_token_min},
                {"doc_token_max", cfg.doc_token_max},
                {"constraints_per_doc_min", cfg.constraints_per_doc_min},
                {"constraints_per_doc_max", cfg.constraints_per_doc_max},
                {"key_constraints_min", cfg.key_constraints_min},
                {"key_constraints_max", cfg.key_constraints_max}};
}

std::vector<faithkit::ErrorType> parse_types(const std::string& csv) {
    std::vector<faithkit::ErrorType> out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        std::string name = csv.substr(pos, comma - pos);
        if (!name.empty()) out.push_back(faithkit::error_type_from_name(name));
        pos = comma + 1;
    }
    if (out.empty()) throw faithkit::ConfigError("no error types given");
    return out;
}

std::vector<faithkit::GeneratedDocument> read_documents(const std::string& path) {
    require_file(path);
    return faithkit::io::read_jsonl<faithkit::GeneratedDocument>(
        path, [](const json& j) { return faithkit::io::document_from_json(j); });
}

std::vector<faithkit::Sample> read_samples(const std::string& path) {
    require_file(path);
    return faithkit::io::read_jsonl<faithkit::Sample>(
        path, [](const json& j) { return faithkit::io::sample_from_json(j); });
}

std::vector<faithkit::PreferencePair> read_pairs(const std::string& path) {
    require_file(path);
    return faithkit::io::read_jsonl<faithkit::PreferencePair>(
        path, [](const json& j) { return faithkit::io::pair_from_json(j); });
}

// ---------------------------------------------------------------- gen ----

int cmd_gen(uint64_t seed, int n_docs, const std::string& config_path, const std::string& out) {
    faithkit::GeneratorConfig cfg;
    if (!config_path.empty()) {
        require_file(config_path);
        cfg = generator_config_from_json(faithkit::io::read_json_file(config_path));
    }
    cfg.rng_seed = seed;
    if (n_docs >= 0) cfg.n_documents = n_docs;

    fs::path out_dir(out);
    json effective = generator_config_to_json(cfg);
    return run_command("gen", out_dir, seed, effective, {}, [&]() -> std::vector<std::string> {
        cfg.validate();
        faithkit::Dataset ds = faithkit::build_dataset(cfg);
        faithkit::DatasetSplit split = faithkit::split_by_document(ds.samples, faithkit::SplitRatios{});

        std::vector<json> docs;
        for (const auto& d : ds.documents) docs.push_back(faithkit::io::document_to_json(d));
        faithkit::io::write_jsonl((out_dir / "documents.jsonl").string(), docs);

        std::vector<json> samples;
        for (const auto& s : ds.samples) samples.push_back(faithkit::io::sample_to_json(s));
        faithkit::io::write_jsonl((out_dir / "samples.jsonl").string(), samples);

        json jsplit = faithkit::io::split_to_json(split);
        for (const auto& d : ds.documents)
            if (!split.document_assignment.contains(d.document.id))
                jsplit["documents"][d.document.id] = "unused";
        jsplit["leakage"] = split.leakage_count(ds.samples);
        faithkit::io::write_json_file((out_dir / "split.json").string(), jsplit);

        std::map<std::string, int> tier_counts;
        for (const auto& s : ds.samples) tier_counts[std::string(faithkit::tier_name(s.tier))] += 1;
        json report{{"documents", ds.documents.size()}, {"samples", ds.samples.size()},
                    {"tier_counts", tier_counts}};
        std::cout << report.dump(2) << "\n";
        return {"documents.jsonl", "samples.jsonl", "split.json"};
    });
}

// ------------------------------------------------------------ perturb ----

int cmd_perturb(uint64_t seed, const std::string& samples_path, const std::string& types_csv,
                const std::string& out) {
    fs::path out_dir(out);
    json effective{{"seed", seed}, {"samples", samples_path}, {"types", types_csv}};
    return run_command("perturb", out_dir, seed, effective, {samples_path}, [&]() -> std::vector<std::string> {
        std::vector<faithkit::ErrorType> types = parse_types(types_csv);
        std::vector<faithkit::Sample> samples = read_samples(samples_path);

        std::vector<faithkit::AnnotatedResponse> responses;
        responses.reserve(samples.size());
        for (const auto& s : samples) responses.push_back(faithkit::to_annotated(s));

        faithkit::BuildPairsResult built = faithkit::build_pairs(responses, types, seed);
        if (built.pairs.empty())
            throw faithkit::NoEligibleElement("no eligible detail elements across " +
                                              std::to_string(samples.size()) + " responses");

        std::vector<json> records;
        for (const auto& p : built.pairs) records.push_back(faithkit::io::pair_to_json(p));
        faithkit::io::write_jsonl((out_dir / "pairs.jsonl").string(), records);

        json balance = json::object();
        for (auto t : types) {
            std::string name(faithkit::error_type_name(t));
            int emitted = built.emitted.contains(t) ? built.emitted.at(t) : 0;
            int skipped = built.skipped.contains(t) ? built.skipped.at(t) : 0;
            balance[name] = json{{"emitted", emitted},
                                 {"share", built.share(t)},
                                 {"skipped", skipped}};
        }
        json report{{"pairs", built.pairs.size()}, {"balance", balance}};
        faithkit::io::write_json_file((out_dir / "balance.json").string(), report);
        std::cout << report.dump(2) << "\n";
        return {"pairs.jsonl", "balance.json"};
    });
}

// --------------------------------------------------------------- eval ----

int cmd_eval(const std::string& samples_path, const std::string& predictions_path,
             const std::string& docs_path, bool strict_ambiguous, const std::string& out) {
    fs::path out_dir(out);
    json effective{{"samples", samples_path},
                   {"predictions", predictions_path},
                   {"docs", docs_path},
                   {"strict_ambiguous", strict_ambiguous}};
    return run_command("eval", out_dir, 0, effective, {samples_path, predictions_path, docs_path},
                       [&]() -> std::vector<std::string> {
        std::vector<faithkit::Sample> samples = read_samples(samples_path);
        require_file(predictions_path);
        auto predictions = faithkit::io::read_jsonl<faithkit::PredictionRecord>(
            predictions_path, [](const json& j) { return faithkit::io::prediction_from_json(j); });

        std::vector<faithkit::Document> docs;
        if (!docs_path.empty()) {
            for (auto& gd : read_documents(docs_path)) docs.push_back(std::move(gd.document));
        }

        std::vector<faithkit::GoldSample> gold;
        gold.reserve(samples.size());
        for (const auto& s : samples)
            gold.push_back({s.sample_id, std::string(faithkit::tier_name(s.tier)), s.analysis});

        faithkit::EvalReport report = faithkit::evaluate(
            gold, predictions, docs, faithkit::UnitTable::builtin(),
            strict_ambiguous ? faithkit::AmbiguousPolicy::Exclude : faithkit::AmbiguousPolicy::ThresholdRule);

        json jreport = faithkit::io::report_to_json(report);
        faithkit::io::write_json_file((out_dir / "report.json").string(), jreport);
        std::cout << jreport.dump(2) << "\n";
        return {"report.json"};
    });
}

// -------------------------------------------------------------- train ----

struct TrainFlags {
    uint64_t seed = 0;
    std::string pairs_path;
    std::string samples_path;  // optional, enables the evidence term
    std::string out;
    int epochs = 10;
    double beta = 0.1;
    double lambda = -1.0;  // default depends on evidence availability
    double learning_rate = 1e-3;
    int batch_size = 16;
    int holdout = 0;
    int layers = 2;
    int model_dim = 32;
    int heads = 2;
    int context_len = 256;
};

int cmd_train(const TrainFlags& flags) {
    fs::path out_dir(flags.out);
    json effective{{"seed", flags.seed},     {"pairs", flags.pairs_path}, {"samples", flags.samples_path},
                   {"epochs", flags.epochs}, {"beta", flags.beta},        {"lambda", flags.lambda},
                   {"lr", flags.learning_rate}, {"batch_size", flags.batch_size}, {"holdout", flags.holdout},
                   {"layers", flags.layers}, {"model_dim", flags.model_dim}, {"heads", flags.heads},
                   {"context_len", flags.context_len}};
    std::vector<std::string> inputs{flags.pairs_path};
    if (!flags.samples_path.empty()) inputs.push_back(flags.samples_path);

    return run_command("train", out_dir, flags.seed, effective, inputs, [&]() -> std::vector<std::string> {
        std::vector<faithkit::PreferencePair> pairs = read_pairs(flags.pairs_path);
        if (pairs.empty()) throw faithkit::ConfigError("pairs file is empty");
        if (flags.holdout < 0 || static_cast<size_t>(flags.holdout) >= pairs.size())
            throw faithkit::ConfigError("holdout must be smaller than the pair count");

        std::vector<faithkit::Sample> samples;
        if (!flags.samples_path.empty()) samples = read_samples(flags.samples_path);

        faithkit::Vocabulary vocab;
        for (const auto& p : pairs) {
            vocab.add_text(p.prompt);
            vocab.add_text(p.chosen);
            vocab.add_text(p.rejected);
        }
        std::vector<faithkit::EvidenceExample> evidence;
        if (!samples.empty()) {
            for (const auto& s : samples)
                for (const auto& e : s.analysis.evidence) {
                    vocab.add_text(s.query);
                    vocab.add_text(e.doc_id);
                    vocab.add_text(e.seg_id);
                    vocab.add_text(e.quote);
                }
            for (const auto& s : samples)
                for (const auto& e : s.analysis.evidence)
                    evidence.push_back(faithkit::encode_evidence(vocab, s.query, e.doc_id, e.seg_id, e.quote));
        }

        double lambda = flags.lambda >= 0.0 ? flags.lambda : (evidence.empty() ? 0.0 : 0.5);
        if (lambda > 0.0 && evidence.empty())
            throw faithkit::ConfigError("lambda > 0 requires --samples for evidence supervision");

        faithkit::ToyModelConfig mcfg;
        mcfg.vocab_size = vocab.size();
        mcfg.layers = flags.layers;
        mcfg.model_dim = flags.model_dim;
        mcfg.heads = flags.heads;
        mcfg.context_len = flags.context_len;
        mcfg.seed = flags.seed;
        faithkit::ToyModel policy = faithkit::ToyModel::randomized(mcfg);

        size_t train_count = pairs.size() - static_cast<size_t>(flags.holdout);
        std::vector<faithkit::TokenizedPair> train_pairs, holdout_pairs;
        for (size_t i = 0; i < pairs.size(); ++i) {
            auto encoded = faithkit::encode_pair(vocab, pairs[i]);
            if (i < train_count) train_pairs.push_back(std::move(encoded));
            else holdout_pairs.push_back(std::move(encoded));
        }

        faithkit::DpoConfig dcfg;
        dcfg.beta = flags.beta;
        dcfg.lambda = lambda;
        dcfg.learning_rate = flags.learning_rate;
        dcfg.epochs = flags.epochs;
        dcfg.batch_size = flags.batch_size;
        dcfg.seed = flags.seed;

        faithkit::TrainResult result = faithkit::train(policy, train_pairs, evidence, dcfg);

        faithkit::save_checkpoint((out_dir / "checkpoint.bin").string(), policy, vocab);
        std::ofstream curve((out_dir / "loss_curve.csv").string(), std::ios::binary);
        curve << "epoch,loss\n";
        for (size_t i = 0; i < result.epoch_losses.size(); ++i)
            curve << i << "," << json(result.epoch_losses[i]).dump() << "\n";
        curve.close();

        json summary{{"train_pairs", train_pairs.size()},
                     {"holdout_pairs", holdout_pairs.size()},
                     {"vocab_size", vocab.size()},
                     {"param_count", policy.param_count()},
                     {"epochs", result.epoch_losses.size()},
                     {"final_loss", result.epoch_losses.empty() ? json(nullptr)
                                                                : json(result.epoch_losses.back())},
                     {"lambda", lambda}};
        if (!holdout_pairs.empty())
            summary["holdout_preference_rate"] = faithkit::preference_rate(policy, holdout_pairs);
        faithkit::io::write_json_file((out_dir / "train_summary.json").string(), summary);
        std::cout << summary.dump(2) << "\n";
        return {"checkpoint.bin", "loss_curve.csv", "train_summary.json"};
    });
}

// -------------------------------------------------------- gradprofile ----

int cmd_gradprofile(uint64_t seed, const std::string& pairs_path, const std::string& checkpoint_path,
                    const std::string& control, int max_pairs, const std::string& out) {
    fs::path out_dir(out);
    json effective{{"seed", seed},       {"pairs", pairs_path}, {"checkpoint", checkpoint_path},
                   {"control", control}, {"max_pairs", max_pairs}};
    return run_command("gradprofile", out_dir, seed, effective, {pairs_path, checkpoint_path},
                       [&]() -> std::vector<std::string> {
        std::vector<faithkit::PreferencePair> pairs = read_pairs(pairs_path);
        require_file(checkpoint_path);
        faithkit::Checkpoint ckpt = faithkit::load_checkpoint(checkpoint_path);

        if (max_pairs > 0 && pairs.size() > static_cast<size_t>(max_pairs))
            pairs.resize(static_cast<size_t>(max_pairs));
        if (pairs.empty()) throw faithkit::ConfigError("no pairs to profile");

        auto profile_set = [&](std::span<const faithkit::PreferencePair> set) {
            std::vector<faithkit::GradientProfile> profiles;
            json per_pair = json::array();
            for (const auto& p : set) {
                faithkit::TokenizedPair tp = faithkit::encode_pair(ckpt.vocab, p);
                faithkit::GradientProfile gp = faithkit::per_token_gradient_profile(ckpt.model, tp);
                json per_token = json::array();
                for (const auto& [t, norm] : gp.per_token_delta_norms)
                    per_token.push_back(json::array({t, norm}));
                per_pair.push_back(json{{"pair_id", p.pair_id},
                                        {"error_type", std::string(faithkit::error_type_name(p.error_type))},
                                        {"positions", gp.positions},
                                        {"per_token_delta_norms", std::move(per_token)},
                                        {"phase1_max", gp.phase1_max},
                                        {"p_mean", gp.p_mean},
                                        {"pbar_after_mean", gp.pbar_after_mean},
                                        {"ratio", gp.ratio_valid ? json(gp.ratio) : json(nullptr)}});
                profiles.push_back(std::move(gp));
            }
            faithkit::ProfileSummary s = faithkit::summarize_profiles(profiles);
            json summary{{"n_pairs", s.n_pairs},           {"ratio_count", s.ratio_count},
                         {"mean_ratio", s.mean_ratio},     {"std_ratio", s.std_ratio},
                         {"phase1_max", s.phase1_max},     {"mean_p_mean", s.mean_p_mean},
                         {"mean_pbar_after", s.mean_pbar_after}};
            return json{{"summary", summary}, {"per_pair", per_pair}};
        };

        json output;
        output["minimal"] = profile_set(pairs);
        if (control == "random") {
            std::vector<faithkit::PreferencePair> controls =
                faithkit::build_random_control_pairs(pairs, 0.3, seed);
            output["control"] = profile_set(controls);
        }
        // Reference measurements from 7B-class models, for context only;
        // toy-scale ratios are not expected to match them numerically.
        output["full_scale_reference"] = json{{"minimal_ratio", "3.82 +/- 0.47"},
                                              {"generic_ratio", "1.12 +/- 0.31"}};
        faithkit::io::write_json_file((out_dir / "gradprofile.json").string(), output);
        std::cout << output["minimal"]["summary"].dump(2) << "\n";
        return {"gradprofile.json"};
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"detail-faithfulness toolkit for regulatory compliance analyses"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic regulatory dataset");
    uint64_t gen_seed = 7;
    int gen_docs = -1;
    std::string gen_config, gen_out = "out";
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--n-docs", gen_docs, "number of documents");
    gen->add_option("--config", gen_config, "generator config JSON");
    gen->add_option("--out", gen_out, "output directory")->required();

    // perturb
    auto* perturb = app.add_subcommand("perturb", "build minimal detail perturbation preference pairs");
    uint64_t pert_seed = 7;
    std::string pert_samples, pert_types = "threshold,unit,scope,level,condition", pert_out = "out";
    perturb->add_option("--seed", pert_seed, "rng seed");
    perturb->add_option("--samples", pert_samples, "samples.jsonl from gen")->required();
    perturb->add_option("--types", pert_types, "comma-separated error types");
    perturb->add_option("--out", pert_out, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against gold annotations");
    std::string eval_samples, eval_predictions, eval_docs, eval_out = "out";
    bool strict_ambiguous = false;
    eval->add_option("--samples", eval_samples, "gold samples.jsonl")->required();
    eval->add_option("--predictions", eval_predictions, "predictions.jsonl")->required();
    eval->add_option("--docs", eval_docs, "documents.jsonl for consistency checking");
    eval->add_flag("--strict-ambiguous", strict_ambiguous, "exclude ambiguous elements from DER");
    eval->add_option("--out", eval_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "DPO-train the toy policy on preference pairs");
    TrainFlags tf;
    train->add_option("--seed", tf.seed, "rng seed");
    train->add_option("--pairs", tf.pairs_path, "pairs.jsonl")->required();
    train->add_option("--samples", tf.samples_path, "samples.jsonl enabling evidence supervision");
    train->add_option("--out", tf.out, "output directory")->required();
    train->add_option("--epochs", tf.epochs, "training epochs");
    train->add_option("--beta", tf.beta, "DPO temperature");
    train->add_option("--lambda", tf.lambda, "evidence loss weight");
    train->add_option("--lr", tf.learning_rate, "learning rate");
    train->add_option("--batch-size", tf.batch_size, "batch size");
    train->add_option("--holdout", tf.holdout, "pairs held out from the end of the file");
    train->add_option("--layers", tf.layers, "transformer layers");
    train->add_option("--model-dim", tf.model_dim, "model width");
    train->add_option("--heads", tf.heads, "attention heads");
    train->add_option("--context", tf.context_len, "context window");

    // gradprofile
    auto* grad = app.add_subcommand("gradprofile", "per-token gradient-difference analysis");
    uint64_t grad_seed = 7;
    std::string grad_pairs, grad_ckpt, grad_control = "none", grad_out = "out";
    int grad_max = 0;
    grad->add_option("--seed", grad_seed, "rng seed for control pairs");
    grad->add_option("--pairs", grad_pairs, "pairs.jsonl")->required();
    grad->add_option("--checkpoint", grad_ckpt, "trained checkpoint")->required();
    grad->add_option("--control", grad_control, "none | random");
    grad->add_option("--max-pairs", grad_max, "limit profiled pairs");
    grad->add_option("--out", grad_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_seed, gen_docs, gen_config, gen_out);
        if (perturb->parsed()) return cmd_perturb(pert_seed, pert_samples, pert_types, pert_out);
        if (eval->parsed()) return cmd_eval(eval_samples, eval_predictions, eval_docs, strict_ambiguous, eval_out);
        if (train->parsed()) return cmd_train(tf);
        if (grad->parsed())
            return cmd_gradprofile(grad_seed, grad_pairs, grad_ckpt, grad_control, grad_max, grad_out);
    } catch (const faithkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
