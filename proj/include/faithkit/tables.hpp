#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "faithkit/errors.hpp"

namespace faithkit {

// Curated phrase-replacement table: each key phrase has a list of broader or
// narrower alternatives. Used for scope and condition perturbations.
class SubstitutionTable {
public:
    struct Row {
        std::string key;
        std::vector<std::string> alternatives;
    };

    void add(std::string_view key, std::vector<std::string> alternatives);

    const std::vector<Row>& rows() const { return rows_; }
    const Row* find(std::string_view key) const;
    std::vector<std::string> keys() const;

    // One record per line: key<TAB>alt1|alt2|...
    static SubstitutionTable parse(std::string_view text);
    static SubstitutionTable load(const std::string& path);

    // Compiled-in copies of data/scope_subs.tsv and data/condition_subs.tsv.
    static const SubstitutionTable& builtin_scopes();
    static const SubstitutionTable& builtin_conditions();

private:
    std::vector<Row> rows_;
};

}  // namespace faithkit
