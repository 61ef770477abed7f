#include "faithkit/tables.hpp"

#include <fstream>
#include <sstream>

namespace faithkit {

void SubstitutionTable::add(std::string_view key, std::vector<std::string> alternatives) {
    if (alternatives.empty())
        throw ConfigError("substitution key '" + std::string(key) + "' has no alternatives");
    rows_.push_back({std::string(key), std::move(alternatives)});
}

const SubstitutionTable::Row* SubstitutionTable::find(std::string_view key) const {
    for (const auto& r : rows_)
        if (r.key == key) return &r;
    return nullptr;
}

std::vector<std::string> SubstitutionTable::keys() const {
    std::vector<std::string> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.key);
    return out;
}

SubstitutionTable SubstitutionTable::parse(std::string_view text) {
    SubstitutionTable t;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw SchemaError("substitution record needs key<TAB>alt1|alt2|...", line_no);
        std::vector<std::string> alts;
        std::string_view tail = line.substr(tab + 1);
        size_t p = 0;
        while (p <= tail.size()) {
            size_t bar = tail.find('|', p);
            if (bar == std::string_view::npos) bar = tail.size();
            if (bar > p) alts.emplace_back(tail.substr(p, bar - p));
            p = bar + 1;
        }
        t.add(line.substr(0, tab), std::move(alts));
    }
    return t;
}

SubstitutionTable SubstitutionTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open substitution table '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// Mirrors data/scope_subs.tsv. Every alternative is a broader or narrower
// reading of the key with low token overlap, so the scope matching predicate
// reliably rejects the swap.
static constexpr std::string_view kScopeSubs =
    "stationary storage\tall storage systems|portable container depots\n"
    "outdoor refueling stations\tall fueling facilities|indoor dispensing bays\n"
    "buried transfer pipelines\tall transfer infrastructure|overhead piping runs\n"
    "production electrolyzer halls\tall production areas|auxiliary compressor rooms\n"
    "transport trailer fleets\tall vehicle operations|fixed depot installations\n"
    "maintenance personnel\tall site workers|visiting inspection staff\n"
    "control room operators\tall facility staff|remote monitoring contractors\n"
    "storage vessel manifolds\tall pressurized assemblies|vent stack headers\n"
    "emergency shutoff valves\tall isolation devices|manual bleed fittings\n"
    "cryogenic holding tanks\tall cold equipment|ambient buffer drums\n";

// Mirrors data/condition_subs.tsv. Alternatives come from different clause
// families than the key so an altered condition shares almost no tokens
// with the original.
static constexpr std::string_view kConditionSubs =
    "when pressure exceeds 50.0 MPa\tduring scheduled purge cycles|unless continuous monitoring is provided\n"
    "when ambient temperature drops below 0.0 \xc2\xb0"
    "C\tduring annual recertification audits|unless heat tracing is installed\n"
    "if storage duration exceeds 72.0 h\twhen seismic alarms are active|unless dual containment is present\n"
    "during cargo transfer operations\twhen visibility falls under safe limits|if unattended overnight parking occurs\n"
    "unless an exemption certificate is held\twhen inspectors request verification|during declared grid emergencies\n"
    "if daily throughput exceeds 500.0 kg\tduring commissioning trial runs|unless odorization equipment is active\n";

const SubstitutionTable& SubstitutionTable::builtin_scopes() {
    static const SubstitutionTable t = SubstitutionTable::parse(kScopeSubs);
    return t;
}

const SubstitutionTable& SubstitutionTable::builtin_conditions() {
    static const SubstitutionTable t = SubstitutionTable::parse(kConditionSubs);
    return t;
}

}  // namespace faithkit
