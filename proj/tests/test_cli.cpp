#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "faithkit/json_io.hpp"
#include "faithkit/rng.hpp"

namespace fs = std::filesystem;
using faithkit::io::json;

namespace {

const char* cli() { return FAITHKIT_CLI_PATH; }

int run(const std::string& args) {
    std::string cmd = std::string(cli()) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

uint64_t file_hash(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return faithkit::fnv1a64(ss.str());
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("faithkit_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_small_gen_config(const fs::path& dir) {
    json cfg{{"n_documents", 30},
             {"samples_per_tier", json{{"short", 5}, {"medium", 2}}}};
    fs::path p = dir / "gen_config.json";
    faithkit::io::write_json_file(p.string(), cfg);
    return p;
}

}  // namespace

TEST_CASE("gen is deterministic and writes its outputs") {
    fs::path base = fresh_dir("gen");
    fs::path cfg = write_small_gen_config(base);

    fs::path out1 = base / "a", out2 = base / "b";
    REQUIRE(run("gen --seed 7 --config " + cfg.string() + " --out " + out1.string()) == 0);
    REQUIRE(run("gen --seed 7 --config " + cfg.string() + " --out " + out2.string()) == 0);

    for (const char* f : {"documents.jsonl", "samples.jsonl", "split.json"}) {
        CHECK(fs::exists(out1 / f));
        CHECK(file_hash(out1 / f) == file_hash(out2 / f));
    }
    CHECK(fs::exists(out1 / "manifest.json"));

    fs::path out3 = base / "c";
    REQUIRE(run("gen --seed 8 --config " + cfg.string() + " --out " + out3.string()) == 0);
    CHECK(file_hash(out1 / "documents.jsonl") != file_hash(out3 / "documents.jsonl"));
}

TEST_CASE("gen rejects bad configs with exit 2 and still writes a manifest") {
    fs::path base = fresh_dir("genbad");
    fs::path out = base / "out";
    CHECK(run("gen --seed 7 --n-docs 0 --out " + out.string()) == 2);
    REQUIRE(fs::exists(out / "manifest.json"));
    json manifest = faithkit::io::read_json_file((out / "manifest.json").string());
    CHECK_FALSE(manifest.at("error").is_null());
}

TEST_CASE("perturb balances types and respects --types") {
    fs::path base = fresh_dir("perturb");
    fs::path cfg = write_small_gen_config(base);
    fs::path gen_out = base / "gen";
    REQUIRE(run("gen --seed 11 --config " + cfg.string() + " --out " + gen_out.string()) == 0);

    fs::path pert_out = base / "pairs";
    REQUIRE(run("perturb --seed 11 --samples " + (gen_out / "samples.jsonl").string() + " --out " +
                pert_out.string()) == 0);
    json balance = faithkit::io::read_json_file((pert_out / "balance.json").string());
    CHECK(balance.at("pairs").get<int>() == 35);  // 7 samples x 5 types
    for (const char* t : {"threshold", "unit", "scope", "level", "condition"})
        CHECK(balance.at("balance").at(t).at("share").get<double>() == doctest::Approx(0.2).epsilon(1e-9));

    fs::path two_out = base / "two";
    REQUIRE(run("perturb --seed 11 --samples " + (gen_out / "samples.jsonl").string() +
                " --types t1,t2 --out " + two_out.string()) == 0);
    auto pairs = faithkit::io::read_jsonl<faithkit::PreferencePair>(
        (two_out / "pairs.jsonl").string(), [](const json& j) { return faithkit::io::pair_from_json(j); });
    for (const auto& p : pairs)
        CHECK((p.error_type == faithkit::ErrorType::Threshold || p.error_type == faithkit::ErrorType::Unit));

    CHECK(run("perturb --samples /nonexistent/samples.jsonl --out " + (base / "x").string()) == 2);
}

TEST_CASE("eval scores gold-as-predictions perfectly and flags schema errors") {
    fs::path base = fresh_dir("eval");
    fs::path cfg = write_small_gen_config(base);
    fs::path gen_out = base / "gen";
    REQUIRE(run("gen --seed 13 --config " + cfg.string() + " --out " + gen_out.string()) == 0);

    auto samples = faithkit::io::read_jsonl<faithkit::Sample>(
        (gen_out / "samples.jsonl").string(), [](const json& j) { return faithkit::io::sample_from_json(j); });
    std::vector<json> preds;
    for (const auto& s : samples)
        preds.push_back(faithkit::io::prediction_to_json({s.sample_id, s.analysis}));
    fs::path pred_path = base / "predictions.jsonl";
    faithkit::io::write_jsonl(pred_path.string(), preds);

    fs::path eval_out = base / "report";
    REQUIRE(run("eval --samples " + (gen_out / "samples.jsonl").string() + " --predictions " +
                pred_path.string() + " --docs " + (gen_out / "documents.jsonl").string() + " --out " +
                eval_out.string()) == 0);
    json report = faithkit::io::read_json_file((eval_out / "report.json").string());
    CHECK(report.at("der_overall").get<double>() == 0.0);
    CHECK(report.at("compliance_accuracy").get<double>() == 1.0);
    CHECK(report.at("evidence_f1").get<double>() == 1.0);
    CHECK(report.at("evidence_consistency").get<double>() == 1.0);
    CHECK(report.at("der_by_tier").contains("short"));

    // A malformed line surfaces as exit 4.
    std::ofstream bad(pred_path, std::ios::app);
    bad << "{not json\n";
    bad.close();
    CHECK(run("eval --samples " + (gen_out / "samples.jsonl").string() + " --predictions " +
              pred_path.string() + " --out " + (base / "bad").string()) == 4);
}

TEST_CASE("train and gradprofile run deterministically end to end") {
    fs::path base = fresh_dir("train");
    fs::path cfg = write_small_gen_config(base);
    fs::path gen_out = base / "gen";
    REQUIRE(run("gen --seed 17 --config " + cfg.string() + " --out " + gen_out.string()) == 0);
    fs::path pert_out = base / "pairs";
    REQUIRE(run("perturb --seed 17 --samples " + (gen_out / "samples.jsonl").string() + " --out " +
                pert_out.string()) == 0);

    std::string pairs = (pert_out / "pairs.jsonl").string();

    // Zero epochs: checkpoint equals the deterministic init.
    fs::path t0a = base / "t0a", t0b = base / "t0b";
    REQUIRE(run("train --seed 5 --pairs " + pairs + " --epochs 0 --out " + t0a.string()) == 0);
    REQUIRE(run("train --seed 5 --pairs " + pairs + " --epochs 0 --out " + t0b.string()) == 0);
    CHECK(file_hash(t0a / "checkpoint.bin") == file_hash(t0b / "checkpoint.bin"));

    fs::path t1 = base / "t1", t2 = base / "t2";
    std::string train_args = " --pairs " + pairs + " --epochs 2 --batch-size 8 --holdout 5";
    REQUIRE(run("train --seed 5" + train_args + " --out " + t1.string()) == 0);
    REQUIRE(run("train --seed 5" + train_args + " --out " + t2.string()) == 0);
    CHECK(file_hash(t1 / "checkpoint.bin") == file_hash(t2 / "checkpoint.bin"));
    CHECK(file_hash(t1 / "loss_curve.csv") == file_hash(t2 / "loss_curve.csv"));
    CHECK(file_hash(t1 / "train_summary.json") == file_hash(t2 / "train_summary.json"));
    // Trained checkpoint differs from the 0-epoch init.
    CHECK(file_hash(t1 / "checkpoint.bin") != file_hash(t0a / "checkpoint.bin"));

    fs::path g1 = base / "g1", g2 = base / "g2";
    std::string grad_args = " --pairs " + pairs + " --checkpoint " + (t1 / "checkpoint.bin").string() +
                            " --control random --max-pairs 6";
    REQUIRE(run("gradprofile --seed 23" + grad_args + " --out " + g1.string()) == 0);
    REQUIRE(run("gradprofile --seed 23" + grad_args + " --out " + g2.string()) == 0);
    CHECK(file_hash(g1 / "gradprofile.json") == file_hash(g2 / "gradprofile.json"));

    json profile = faithkit::io::read_json_file((g1 / "gradprofile.json").string());
    CHECK(profile.at("minimal").at("summary").at("n_pairs").get<int>() == 6);
    CHECK(profile.at("minimal").at("summary").at("phase1_max").get<double>() <= 1e-9);
    CHECK(profile.contains("control"));
}

TEST_CASE("training with evidence supervision consumes the samples file") {
    fs::path base = fresh_dir("evid");
    fs::path cfg = write_small_gen_config(base);
    fs::path gen_out = base / "gen";
    REQUIRE(run("gen --seed 29 --config " + cfg.string() + " --out " + gen_out.string()) == 0);
    fs::path pert_out = base / "pairs";
    REQUIRE(run("perturb --seed 29 --samples " + (gen_out / "samples.jsonl").string() + " --out " +
                pert_out.string()) == 0);

    fs::path t = base / "train";
    REQUIRE(run("train --seed 3 --pairs " + (pert_out / "pairs.jsonl").string() + " --samples " +
                (gen_out / "samples.jsonl").string() + " --lambda 0.5 --epochs 1 --batch-size 8 --out " +
                t.string()) == 0);
    json summary = faithkit::io::read_json_file((t / "train_summary.json").string());
    CHECK(summary.at("lambda").get<double>() == 0.5);

    // lambda > 0 without citation contexts is a config error.
    CHECK(run("train --seed 3 --pairs " + (pert_out / "pairs.jsonl").string() +
              " --lambda 0.5 --epochs 1 --out " + (base / "nope").string()) == 2);
}

TEST_CASE("perturb with no eligible elements exits 3") {
    fs::path base = fresh_dir("empty");
    // One sample whose only key constraint has neither threshold nor
    // condition, perturbed for threshold only.
    json constraint{{"id", "c1"},           {"threshold", nullptr},
                    {"unit", nullptr},      {"comparator", "le"},
                    {"scope", "maintenance personnel"}, {"level", "shall"},
                    {"condition", nullptr}, {"action", "hold valid certification"},
                    {"violation", false},   {"evidence", nullptr}};
    json analysis{{"is_compliant", true},
                  {"key_constraints", json::array({constraint})},
                  {"risks", json::array()},
                  {"evidence", json::array()}};
    json sample{{"sample_id", "smp_1"},
                {"tier", "short"},
                {"query", "assess compliance of a refueling depot"},
                {"doc_ids", json::array({"d1"})},
                {"token_count", 0},
                {"response", "maintenance personnel shall hold valid certification"},
                {"analysis", analysis}};
    fs::path samples = base / "samples.jsonl";
    faithkit::io::write_jsonl(samples.string(), {sample});

    CHECK(run("perturb --seed 1 --samples " + samples.string() + " --types threshold --out " +
              (base / "out").string()) == 3);
    json manifest = faithkit::io::read_json_file((base / "out" / "manifest.json").string());
    CHECK_FALSE(manifest.at("error").is_null());
}

TEST_CASE("unknown flags exit with the config code") {
    CHECK(run("gen --definitely-not-a-flag") == 2);
    CHECK(run("") == 2);
}
