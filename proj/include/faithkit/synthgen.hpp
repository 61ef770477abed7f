#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "faithkit/perturb.hpp"
#include "faithkit/render.hpp"
#include "faithkit/types.hpp"

namespace faithkit {

enum class TierKind { Short, Medium, Long };

std::string_view tier_name(TierKind t);
TierKind tier_from_name(std::string_view s);

struct TierSpec {
    int64_t token_min = 0;
    int64_t token_max = 0;
    int doc_min = 1;
    int doc_max = 1;
};

struct GeneratorConfig {
    uint64_t rng_seed = 7;
    int n_documents = 150;
    std::vector<std::string> topic_domains = {"hydrogen_storage", "pipeline_transport", "refueling_infrastructure",
                                              "pressure_equipment", "emissions_control"};
    double threshold_probability = 0.7;
    std::map<TierKind, TierSpec> tier_targets = {
        {TierKind::Short, {8000, 16000, 1, 3}},
        {TierKind::Medium, {16000, 32000, 3, 8}},
        {TierKind::Long, {32000, 64000, 8, 15}},
    };
    // Default tier mix mirrors the observed 61/26/13 test-tier proportions.
    std::map<TierKind, int> samples_per_tier = {
        {TierKind::Short, 61},
        {TierKind::Medium, 26},
        {TierKind::Long, 13},
    };
    int constraints_per_doc_min = 3;
    int constraints_per_doc_max = 8;
    int64_t doc_token_min = 2600;
    int64_t doc_token_max = 5400;
    int key_constraints_min = 2;
    int key_constraints_max = 4;
    double condition_probability = 0.45;
    // Documents are grouped into disjoint clusters and each sample draws its
    // content documents from a single cluster, keeping the sample-document
    // graph splittable without leakage.
    int doc_cluster_size = 15;

    void validate() const;  // throws ConfigError
};

// A generated document paired with its per-segment ground-truth constraints.
struct DocConstraint {
    Constraint constraint;
    std::string seg_id;
};

struct GeneratedDocument {
    Document document;
    std::vector<DocConstraint> constraints;
    int64_t token_total = 0;
};

GeneratedDocument generate_document(const GeneratorConfig& config, int serial, uint64_t seed);

// n_documents documents with per-document derived seeds.
std::vector<GeneratedDocument> generate_corpus(const GeneratorConfig& config);

struct Sample {
    std::string sample_id;
    TierKind tier = TierKind::Short;
    std::string query;
    std::vector<std::string> doc_ids;
    int64_t token_count = 0;  // |query| + sum of segment token counts
    std::string response;     // rendered correct analysis, the chosen side of pairs
    ComplianceAnalysis analysis;
};

// Builds tiered samples over the corpus. Each sample gets a private padding
// document appended to `corpus` that tops its token count up to an exact
// target inside the tier range. Throws TierInfeasible when the pool cannot
// reach a tier's range.
std::vector<Sample> assemble_samples(std::vector<GeneratedDocument>& corpus, const GeneratorConfig& config);

AnnotatedResponse to_annotated(const Sample& sample);

struct SplitRatios {
    double train = 10.0 / 13.0;
    double val = 1.0 / 13.0;
    double test = 2.0 / 13.0;

    void validate() const;
};

struct DatasetSplit {
    std::map<std::string, std::string> document_assignment;  // doc id -> split name
    std::vector<std::string> train, val, test;               // sample ids
    int components = 0;

    int leakage_count(std::span<const Sample> samples) const;
};

// Document-level split: documents co-occurring in any sample form one unit,
// assigned greedily to the split with the largest remaining deficit. Every
// sample's documents land in exactly one split by construction.
DatasetSplit split_by_document(std::span<const Sample> samples, const SplitRatios& ratios);

struct Dataset {
    std::vector<GeneratedDocument> documents;
    std::vector<Sample> samples;
};

Dataset build_dataset(const GeneratorConfig& config);

}  // namespace faithkit
