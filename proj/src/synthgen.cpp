#include "faithkit/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numeric>

#include "faithkit/log.hpp"

namespace faithkit {

std::string_view tier_name(TierKind t) {
    switch (t) {
        case TierKind::Short: return "short";
        case TierKind::Medium: return "medium";
        case TierKind::Long: return "long";
    }
    return "short";
}

TierKind tier_from_name(std::string_view s) {
    if (s == "short") return TierKind::Short;
    if (s == "medium") return TierKind::Medium;
    if (s == "long") return TierKind::Long;
    throw ParseError("unknown tier '" + std::string(s) + "'");
}

void GeneratorConfig::validate() const {
    if (n_documents <= 0) throw ConfigError("n_documents must be positive");
    if (threshold_probability < 0.0 || threshold_probability > 1.0)
        throw ConfigError("threshold_probability must lie in [0,1]");
    if (condition_probability < 0.0 || condition_probability > 1.0)
        throw ConfigError("condition_probability must lie in [0,1]");
    if (topic_domains.empty()) throw ConfigError("topic_domains must be non-empty");
    if (constraints_per_doc_min < 1 || constraints_per_doc_max < constraints_per_doc_min)
        throw ConfigError("invalid constraints_per_doc range");
    if (doc_token_min < 200 || doc_token_max < doc_token_min)
        throw ConfigError("invalid document token range");
    if (key_constraints_min < 1 || key_constraints_max < key_constraints_min)
        throw ConfigError("invalid key constraint range");
    for (const auto& [tier, spec] : tier_targets) {
        if (spec.doc_min < 1 || spec.doc_max > 15 || spec.doc_min > spec.doc_max)
            throw ConfigError("tier '" + std::string(tier_name(tier)) +
                              "' document count must stay within 1..15");
        if (spec.token_min <= 0 || spec.token_max <= spec.token_min)
            throw ConfigError("tier '" + std::string(tier_name(tier)) + "' has an invalid token range");
        if (doc_cluster_size < spec.doc_max - 1)
            throw ConfigError("doc_cluster_size must cover the largest tier's content documents");
    }
    for (const auto& [tier, count] : samples_per_tier) {
        if (count < 0) throw ConfigError("samples_per_tier must be non-negative");
        if (!tier_targets.contains(tier))
            throw ConfigError("samples requested for tier without a tier target");
    }
}

namespace {

struct ValueBank {
    Dimension dimension;
    std::vector<int64_t> tenths;  // values * 10, rendered at one decimal
};

const std::vector<ValueBank>& value_banks() {
    static const std::vector<ValueBank> banks = {
        {Dimension::Pressure, {50, 100, 160, 200, 250, 350, 450, 500, 700, 875, 900, 1000}},
        {Dimension::Mass, {500, 1000, 2500, 5000, 7500, 10000}},
        {Dimension::Volume, {100, 250, 500, 1000, 2000, 5000}},
        {Dimension::Temperature, {400, 650, 850, 1200, 1500, 2000}},
        {Dimension::Length, {15, 30, 50, 75, 100, 150, 300}},
        {Dimension::Time, {20, 80, 240, 720, 1680, 7200, 20000}},
    };
    return banks;
}

const std::vector<std::string>& positive_actions() {
    static const std::vector<std::string> bank = {
        "hold valid certification",
        "maintain inspection records on site",
        "complete annual refresher training",
        "verify gas detector calibration weekly",
        "report anomalies to the duty supervisor",
        "keep emergency contact rosters current",
    };
    return bank;
}

const std::vector<std::string>& negated_actions() {
    static const std::vector<std::string> bank = {
        "bypass interlock circuits",
        "store incompatible cylinders together",
        "perform hot work without a permit",
        "defeat relief device settings",
    };
    return bank;
}

const std::vector<std::string>& filler_sentences() {
    static const std::vector<std::string> bank = {
        "the annex provides supplementary guidance on documentation practices.",
        "definitions for technical terms appear in the general provisions.",
        "figures referenced in this part are provided for illustration purposes.",
        "record retention procedures are described in the administrative chapter.",
        "cross references to superseded editions remain informative only.",
        "the bibliography lists consulted publications and their editions.",
        "editorial corrections are collected in the errata register.",
        "layout conventions follow the house drafting manual.",
        "appendices marked informative carry no normative weight.",
        "terminology alignment with international usage is reviewed periodically.",
    };
    return bank;
}

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> bank = {"annex",   "guidance", "records", "figures",
                                                  "tables",  "notes",    "index",   "glossary",
                                                  "preface", "foreword"};
    return bank;
}

const std::vector<std::string>& query_templates() {
    // {f} facility, {v} value, {u} unit.
    static const std::vector<std::string> bank = {
        "assess compliance of a {f} operating at {v} {u} with trained staff on duty",
        "evaluate whether a {f} running at {v} {u} meets the applicable requirements",
        "determine regulatory compliance for a {f} handling {v} {u} in normal service",
        "review the compliance posture of a {f} rated for {v} {u} at full utilization",
    };
    return bank;
}

const std::vector<std::string>& facility_nouns() {
    static const std::vector<std::string> bank = {"hydrogen storage facility", "refueling depot",
                                                  "gas processing site", "compressor station",
                                                  "distribution terminal"};
    return bank;
}

Comparator sample_comparator(Rng& rng) {
    double u = rng.uniform01();
    if (u < 0.60) return Comparator::LE;
    if (u < 0.75) return Comparator::GE;
    if (u < 0.85) return Comparator::LT;
    if (u < 0.95) return Comparator::GT;
    return Comparator::EQ;
}

bool threshold_satisfies(Comparator cmp, const Decimal& observed, const Decimal& bound) {
    int c = compare(observed, bound);
    switch (cmp) {
        case Comparator::LE: return c <= 0;
        case Comparator::GE: return c >= 0;
        case Comparator::LT: return c < 0;
        case Comparator::GT: return c > 0;
        case Comparator::EQ: return c == 0;
    }
    return true;
}

// Exactly n_tokens of neutral padding text: whole filler sentences topped
// off with single filler words.
std::string make_filler_text(int64_t n_tokens, size_t rotation) {
    static const std::vector<std::pair<std::string, int64_t>> sentence_lengths = [] {
        std::vector<std::pair<std::string, int64_t>> v;
        for (const auto& s : filler_sentences())
            v.emplace_back(s, static_cast<int64_t>(tokenize(s).size()));
        return v;
    }();
    std::string text;
    int64_t remaining = n_tokens;
    size_t i = rotation;
    while (remaining > 0) {
        const auto& [sentence, len] = sentence_lengths[i % sentence_lengths.size()];
        if (len > remaining) break;
        if (!text.empty()) text.push_back(' ');
        text += sentence;
        remaining -= len;
        ++i;
    }
    size_t w = rotation;
    while (remaining > 0) {
        if (!text.empty()) text.push_back(' ');
        text += filler_words()[w % filler_words().size()];
        --remaining;
        ++w;
    }
    assert(static_cast<int64_t>(tokenize(text).size()) == n_tokens);
    return text;
}

std::string format_serial(int serial, int width = 4) {
    std::string s = std::to_string(serial);
    if (s.size() < static_cast<size_t>(width)) s.insert(0, static_cast<size_t>(width) - s.size(), '0');
    return s;
}

// Slot values lean on the scope the way real standards do: storage scopes
// talk pressure in a house unit, personnel scopes carry certification
// duties. A small resample probability keeps the corpus from degenerating
// into a lookup table.
Constraint sample_constraint(const GeneratorConfig& config, const std::string& id, Rng& rng,
                             const UnitTable& units) {
    Constraint c;
    c.id = id;
    const auto& scope_rows = SubstitutionTable::builtin_scopes().rows();
    c.scope = scope_rows[rng.index(scope_rows.size())].key;
    uint64_t anchor = fnv1a64(c.scope);

    auto anchored_index = [&](uint64_t stream, size_t n, double resample_p) {
        size_t base = static_cast<size_t>(splitmix64(anchor ^ stream) % n);
        if (rng.bernoulli(resample_p)) return rng.index(n);
        return base;
    };
    static const std::array<Level, 4> positives = {Level::Shall, Level::Must, Level::Should, Level::May};

    if (rng.bernoulli(config.threshold_probability)) {
        const ValueBank& bank = value_banks()[anchored_index(1, value_banks().size(), 0.15)];
        c.threshold = Decimal::from_tenths(bank.tenths[rng.index(bank.tenths.size())]);
        auto unit_ids = units.units_of_dimension(bank.dimension);
        c.unit = unit_ids[anchored_index(2, unit_ids.size(), 0.1)];
        c.comparator = sample_comparator(rng);
        c.level = positives[anchored_index(3, positives.size(), 0.1)];
    } else if (rng.bernoulli(0.2)) {
        c.level = rng.bernoulli(0.5) ? Level::ShallNot : Level::MustNot;
        c.action = negated_actions()[rng.index(negated_actions().size())];
    } else {
        c.level = positives[anchored_index(3, positives.size(), 0.1)];
        c.action = positive_actions()[anchored_index(4, positive_actions().size(), 0.3)];
    }
    // Condition presence leans on the scope too: some equipment classes are
    // condition-laden, others rarely gated. The mean stays at the configured
    // probability.
    double presence = config.condition_probability * ((splitmix64(anchor ^ 6) & 1) ? 1.6 : 0.4);
    if (rng.bernoulli(std::min(0.95, presence))) {
        const auto& rows = SubstitutionTable::builtin_conditions().rows();
        c.condition = rows[anchored_index(5, rows.size(), 0.1)].key;
    }
    return c;
}

// Forced variants keep every document usable for all five perturbation
// types regardless of the sampling draws.
void force_threshold(Constraint& c, Rng& rng, const UnitTable& units) {
    uint64_t anchor = fnv1a64(c.scope);
    const ValueBank& bank = value_banks()[splitmix64(anchor ^ 1) % value_banks().size()];
    c.threshold = Decimal::from_tenths(bank.tenths[rng.index(bank.tenths.size())]);
    auto unit_ids = units.units_of_dimension(bank.dimension);
    c.unit = unit_ids[splitmix64(anchor ^ 2) % unit_ids.size()];
    c.comparator = sample_comparator(rng);
    if (level_is_negated(c.level)) c.level = Level::Shall;
    c.action.reset();
}

void force_condition(Constraint& c) {
    const auto& rows = SubstitutionTable::builtin_conditions().rows();
    c.condition = rows[splitmix64(fnv1a64(c.scope) ^ 5) % rows.size()].key;
}

}  // namespace

GeneratedDocument generate_document(const GeneratorConfig& config, int serial, uint64_t seed) {
    const UnitTable& units = UnitTable::builtin();
    Rng rng(seed);
    GeneratedDocument gen;

    const std::string& domain = config.topic_domains[rng.index(config.topic_domains.size())];
    gen.document.id = "syn_" + domain + "_" + format_serial(serial);
    gen.document.source = Source::SYNTHETIC;

    int n_constraints =
        static_cast<int>(rng.uniform_int(config.constraints_per_doc_min, config.constraints_per_doc_max));
    std::vector<Constraint> constraints;
    for (int i = 0; i < n_constraints; ++i) {
        std::string cid = gen.document.id + "_c" + std::to_string(i + 1);
        constraints.push_back(sample_constraint(config, cid, rng, units));
    }
    // Every document carries at least one threshold and one condition so any
    // sample built on it can feed all five perturbation types.
    if (std::none_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.threshold.has_value(); }))
        force_threshold(constraints.front(), rng, units);
    if (std::none_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.condition.has_value(); }))
        force_condition(constraints.front());

    int64_t total = 0;
    for (int i = 0; i < n_constraints; ++i) {
        Segment seg;
        seg.id = "seg_" + std::to_string(i + 1);
        seg.text = render_constraint_text(constraints[static_cast<size_t>(i)], units) + ".";
        seg.token_count = static_cast<int64_t>(tokenize(seg.text).size());
        total += seg.token_count;
        gen.document.segments.push_back(std::move(seg));
        gen.constraints.push_back({std::move(constraints[static_cast<size_t>(i)]), gen.document.segments.back().id});
    }

    int64_t target = rng.uniform_int(config.doc_token_min, config.doc_token_max);
    int filler_index = 0;
    while (total < target) {
        int64_t chunk = std::min<int64_t>(rng.uniform_int(400, 900), target - total);
        Segment seg;
        seg.id = "seg_" + std::to_string(n_constraints + ++filler_index);
        seg.text = make_filler_text(chunk, rng.index(filler_sentences().size()));
        seg.token_count = chunk;
        seg.filler = true;
        total += chunk;
        gen.document.segments.push_back(std::move(seg));
    }
    gen.token_total = total;
    gen.document.validate();
    return gen;
}

std::vector<GeneratedDocument> generate_corpus(const GeneratorConfig& config) {
    config.validate();
    std::vector<GeneratedDocument> corpus;
    corpus.reserve(static_cast<size_t>(config.n_documents));
    for (int i = 0; i < config.n_documents; ++i) {
        uint64_t seed = derive_seed(config.rng_seed, "doc_" + std::to_string(i));
        corpus.push_back(generate_document(config, i + 1, seed));
    }
    return corpus;
}

namespace {

struct KeyPick {
    const GeneratedDocument* doc;
    const DocConstraint* entry;
};

// Key constraints cover the error types whenever the content documents can:
// at least one threshold carrier and one condition carrier when available.
std::vector<KeyPick> pick_key_constraints(std::span<const GeneratedDocument* const> content, int want,
                                          Rng& rng) {
    std::vector<KeyPick> pool;
    for (const auto* doc : content)
        for (const auto& entry : doc->constraints) pool.push_back({doc, &entry});
    rng.shuffle(pool);

    std::vector<KeyPick> picked;
    auto take_first = [&](auto pred) {
        for (const auto& p : pool) {
            bool already = std::any_of(picked.begin(), picked.end(),
                                       [&](const KeyPick& q) { return q.entry == p.entry; });
            if (!already && pred(p)) {
                picked.push_back(p);
                return;
            }
        }
    };
    take_first([](const KeyPick& p) { return p.entry->constraint.threshold.has_value(); });
    take_first([](const KeyPick& p) { return p.entry->constraint.condition.has_value(); });
    for (const auto& p : pool) {
        if (static_cast<int>(picked.size()) >= want) break;
        bool already = std::any_of(picked.begin(), picked.end(),
                                   [&](const KeyPick& q) { return q.entry == p.entry; });
        if (!already) picked.push_back(p);
    }
    return picked;
}

}  // namespace

AnnotatedResponse to_annotated(const Sample& sample) {
    AnnotatedResponse r;
    r.sample_id = sample.sample_id;
    r.prompt = sample.query;
    for (const auto& ac : sample.analysis.key_constraints) r.constraints.push_back(ac.constraint);
    return r;
}

std::vector<Sample> assemble_samples(std::vector<GeneratedDocument>& corpus, const GeneratorConfig& config) {
    config.validate();
    const UnitTable& units = UnitTable::builtin();
    std::vector<Sample> samples;
    const size_t pool_size = corpus.size();
    int serial = 0;

    for (const auto& [tier, spec] : config.tier_targets) {
        auto count_it = config.samples_per_tier.find(tier);
        int n_samples = count_it == config.samples_per_tier.end() ? 0 : count_it->second;
        for (int si = 0; si < n_samples; ++si) {
            ++serial;
            std::string sample_id = "smp_" + format_serial(serial);
            Rng rng(derive_seed(config.rng_seed, sample_id, 77));

            int content_min = std::max(1, spec.doc_min - 1);
            int content_max = spec.doc_max - 1;
            if (content_max < content_min) content_max = content_min;

            // Clusters eligible for this tier: enough documents for content_min.
            size_t cluster_size = static_cast<size_t>(config.doc_cluster_size);
            size_t n_clusters = (pool_size + cluster_size - 1) / cluster_size;
            std::vector<size_t> eligible_clusters;
            for (size_t k = 0; k < n_clusters; ++k) {
                size_t begin = k * cluster_size;
                size_t size = std::min(cluster_size, pool_size - begin);
                if (size >= static_cast<size_t>(content_min)) eligible_clusters.push_back(k);
            }
            if (eligible_clusters.empty())
                throw TierInfeasible("tier '" + std::string(tier_name(tier)) + "' needs " +
                                     std::to_string(content_min) + " documents but no cluster is large enough");
            size_t cluster = eligible_clusters[rng.index(eligible_clusters.size())];
            size_t cluster_begin = cluster * cluster_size;
            size_t cluster_count = std::min(cluster_size, pool_size - cluster_begin);

            std::vector<size_t> order(cluster_count);
            std::iota(order.begin(), order.end(), cluster_begin);
            rng.shuffle(order);

            int c = static_cast<int>(rng.uniform_int(
                content_min, std::min<int64_t>(content_max, static_cast<int64_t>(cluster_count))));

            std::vector<const GeneratedDocument*> content;
            int64_t doc_tokens = 0;
            for (int i = 0; i < c; ++i) {
                const GeneratedDocument& d = corpus[order[static_cast<size_t>(i)]];
                content.push_back(&d);
                doc_tokens += d.token_total;
            }
            // Trim oversized selections from the back down to the tier budget.
            while (static_cast<int>(content.size()) > content_min &&
                   doc_tokens + 80 > spec.token_max) {
                doc_tokens -= content.back()->token_total;
                content.pop_back();
            }

            int want = static_cast<int>(rng.uniform_int(config.key_constraints_min, config.key_constraints_max));
            std::vector<KeyPick> picked = pick_key_constraints(content, want, rng);
            if (picked.empty())
                throw TierInfeasible("sample '" + sample_id + "' found no constraints in its documents");

            // Query references the first threshold carrier when one exists.
            const Constraint* focal = nullptr;
            for (const auto& p : picked)
                if (p.entry->constraint.threshold.has_value()) {
                    focal = &p.entry->constraint;
                    break;
                }
            Decimal query_value = Decimal::from_tenths(750);
            std::string query_unit = "MPa";
            if (focal) {
                static constexpr std::array<double, 6> factors = {0.7, 0.85, 0.95, 1.05, 1.15, 1.3};
                query_value = perturb_threshold_value(*focal->threshold, factors[rng.index(factors.size())]);
                query_unit = units.display_of(*focal->unit);
            }
            std::string query = query_templates()[rng.index(query_templates().size())];
            auto replace = [&](std::string_view key, const std::string& value) {
                size_t pos = query.find(key);
                if (pos != std::string::npos) query.replace(pos, key.size(), value);
            };
            replace("{f}", facility_nouns()[rng.index(facility_nouns().size())]);
            replace("{v}", query_value.to_string());
            replace("{u}", query_unit);

            // Ground-truth analysis over the picked constraints.
            ComplianceAnalysis analysis;
            std::vector<Constraint> ordered;
            for (const auto& p : picked) {
                const Constraint& con = p.entry->constraint;
                AnalyzedConstraint ac;
                ac.constraint = con;
                bool violated = false;
                if (con.threshold.has_value()) {
                    bool comparable = units.canonicalize(query_unit) == *con.unit;
                    violated = comparable && !threshold_satisfies(con.comparator, query_value, *con.threshold);
                } else {
                    violated = rng.bernoulli(0.25);
                }
                ac.violation = violated;
                const Segment* seg = p.doc->document.find_segment(p.entry->seg_id);
                std::string quote = seg->text;
                if (!quote.empty() && quote.back() == '.') quote.pop_back();
                ac.evidence = EvidenceCitation{p.doc->document.id, p.entry->seg_id, quote};
                analysis.evidence.push_back(*ac.evidence);
                if (violated) {
                    if (con.threshold.has_value())
                        analysis.risks.push_back(std::string(quantity_noun(units.dimension_of(*con.unit))) +
                                                 " outside the permitted bound for " + con.scope);
                    else
                        analysis.risks.push_back(con.scope + " noncompliant with required practice");
                }
                analysis.key_constraints.push_back(std::move(ac));
                ordered.push_back(con);
            }
            analysis.is_compliant = std::none_of(analysis.key_constraints.begin(), analysis.key_constraints.end(),
                                                 [](const AnalyzedConstraint& a) { return a.violation; });
            analysis.validate();

            RenderedResponse response = render_response(ordered, units);

            int64_t query_tokens = static_cast<int64_t>(tokenize(query).size());
            int64_t base = doc_tokens + query_tokens;
            int64_t low = std::max<int64_t>(spec.token_min, base + 40);
            int64_t high = spec.token_max;
            if (low > high)
                throw TierInfeasible("tier '" + std::string(tier_name(tier)) + "' sample '" + sample_id +
                                     "' cannot fit its documents into the token range");
            int64_t target = rng.uniform_int(low, high);
            int64_t pad = target - base;

            GeneratedDocument pad_doc;
            pad_doc.document.id = "pad_" + sample_id;
            pad_doc.document.source = Source::SYNTHETIC;
            Segment pad_seg;
            pad_seg.id = "seg_1";
            pad_seg.text = make_filler_text(pad, rng.index(filler_sentences().size()));
            pad_seg.token_count = pad;
            pad_seg.filler = true;
            pad_doc.document.segments.push_back(std::move(pad_seg));
            pad_doc.token_total = pad;
            pad_doc.document.validate();

            Sample sample;
            sample.sample_id = sample_id;
            sample.tier = tier;
            sample.query = std::move(query);
            for (const auto* d : content) sample.doc_ids.push_back(d->document.id);
            sample.doc_ids.push_back(pad_doc.document.id);
            sample.token_count = target;
            sample.response = response.text;
            sample.analysis = std::move(analysis);

            corpus.push_back(std::move(pad_doc));
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

void SplitRatios::validate() const {
    if (train < 0 || val < 0 || test < 0) throw ConfigError("split ratios must be non-negative");
    double sum = train + val + test;
    if (sum <= 0 || std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");
}

int DatasetSplit::leakage_count(std::span<const Sample> samples) const {
    int leaks = 0;
    for (const auto& s : samples) {
        auto sample_split = [&]() -> std::string {
            for (const auto& id : test)
                if (id == s.sample_id) return "test";
            for (const auto& id : val)
                if (id == s.sample_id) return "val";
            return "train";
        }();
        for (const auto& doc : s.doc_ids) {
            auto it = document_assignment.find(doc);
            if (it != document_assignment.end() && it->second != sample_split) ++leaks;
        }
    }
    return leaks;
}

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

DatasetSplit split_by_document(std::span<const Sample> samples, const SplitRatios& ratios) {
    ratios.validate();
    DatasetSplit split;
    if (samples.empty()) return split;

    std::map<std::string, size_t> doc_index;
    std::vector<std::string> doc_names;
    for (const auto& s : samples)
        for (const auto& d : s.doc_ids)
            if (doc_index.emplace(d, doc_names.size()).second) doc_names.push_back(d);

    UnionFind uf(doc_names.size());
    for (const auto& s : samples)
        for (size_t i = 1; i < s.doc_ids.size(); ++i)
            uf.unite(doc_index.at(s.doc_ids[0]), uf.find(doc_index.at(s.doc_ids[i])));

    struct Component {
        std::vector<size_t> sample_indices;
        std::vector<std::string> docs;
    };
    std::map<size_t, Component> components;
    for (size_t si = 0; si < samples.size(); ++si)
        components[uf.find(doc_index.at(samples[si].doc_ids[0]))].sample_indices.push_back(si);
    for (const auto& name : doc_names) components[uf.find(doc_index.at(name))].docs.push_back(name);

    std::vector<Component*> ordered;
    for (auto& [root, comp] : components)
        if (!comp.sample_indices.empty()) ordered.push_back(&comp);
    std::sort(ordered.begin(), ordered.end(), [&](const Component* a, const Component* b) {
        if (a->sample_indices.size() != b->sample_indices.size())
            return a->sample_indices.size() > b->sample_indices.size();
        return samples[a->sample_indices.front()].sample_id < samples[b->sample_indices.front()].sample_id;
    });
    split.components = static_cast<int>(ordered.size());

    int positive_splits = (ratios.train > 0) + (ratios.val > 0) + (ratios.test > 0);
    if (static_cast<int>(ordered.size()) < positive_splits) {
        std::string detail;
        for (const auto* comp : ordered)
            detail += " component[" + std::to_string(comp->sample_indices.size()) + " samples, " +
                      std::to_string(comp->docs.size()) + " docs]";
        throw UnsatisfiableSplit("only " + std::to_string(ordered.size()) + " document component(s) for " +
                                 std::to_string(positive_splits) + " requested splits;" + detail);
    }

    const double total = static_cast<double>(samples.size());
    std::array<double, 3> targets = {ratios.train * total, ratios.val * total, ratios.test * total};
    std::array<double, 3> assigned = {0, 0, 0};
    std::array<std::vector<std::string>*, 3> buckets = {&split.train, &split.val, &split.test};
    static constexpr std::array<std::string_view, 3> names = {"train", "val", "test"};

    auto assign = [&](const Component* comp, size_t bucket) {
        assigned[bucket] += static_cast<double>(comp->sample_indices.size());
        for (size_t si : comp->sample_indices) buckets[bucket]->push_back(samples[si].sample_id);
        for (const auto& doc : comp->docs) split.document_assignment[doc] = std::string(names[bucket]);
    };

    // Phase 1: seed every requested split with one component, largest
    // component to the largest target, so no requested split ends up empty.
    std::vector<size_t> order_by_target;
    for (size_t i = 0; i < 3; ++i)
        if (targets[i] > 0.0) order_by_target.push_back(i);
    std::sort(order_by_target.begin(), order_by_target.end(),
              [&](size_t a, size_t b) { return targets[a] > targets[b]; });
    size_t next = 0;
    for (size_t i : order_by_target) assign(ordered[next++], i);

    // Phase 2: remaining components to the split with the largest deficit.
    for (; next < ordered.size(); ++next) {
        size_t best = order_by_target.front();
        double best_need = -1e300;
        for (size_t i : order_by_target) {
            double need = targets[i] - assigned[i];
            if (need > best_need) {
                best_need = need;
                best = i;
            }
        }
        assign(ordered[next], best);
    }
    for (auto* bucket : buckets) std::sort(bucket->begin(), bucket->end());
    return split;
}

Dataset build_dataset(const GeneratorConfig& config) {
    Dataset ds;
    ds.documents = generate_corpus(config);
    ds.samples = assemble_samples(ds.documents, config);
    return ds;
}

}  // namespace faithkit
