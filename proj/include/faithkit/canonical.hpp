#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faithkit/errors.hpp"

namespace faithkit {

// Exact decimal value: mantissa * 10^exponent, normalized so the mantissa has
// no trailing zero (unless the value is zero). "70", "70.0" and "7e1" all
// canonicalize to the same representation, so equality is exact with no
// float epsilon involved.
struct Decimal {
    int64_t mantissa = 0;
    int32_t exponent = 0;

    static Decimal from_parts(int64_t mantissa, int32_t exponent);
    static Decimal from_tenths(int64_t tenths) { return from_parts(tenths, -1); }

    bool operator==(const Decimal&) const = default;
    bool is_negative() const { return mantissa < 0; }

    double to_double() const;

    // Canonical rendering: always at least one fractional digit ("70.0"),
    // more when needed to be exact ("0.25").
    std::string to_string() const;
};

// First decimal literal in s (optional sign, fraction, scientific notation).
// Throws ParseError when none is present.
Decimal parse_number(std::string_view s);

// True ratio-band membership check done in integer arithmetic:
// perturbed/original in [lo_num/den, hi_num/den].
bool ratio_in_band(const Decimal& perturbed, const Decimal& original,
                   int64_t lo_num, int64_t hi_num, int64_t den);

// Exact three-way comparison: -1, 0, or 1.
int compare(const Decimal& a, const Decimal& b);

enum class Dimension { Pressure, Mass, Volume, Temperature, Length, Time };

std::string_view dimension_name(Dimension d);

class UnitTable {
public:
    struct Entry {
        std::string canonical;
        Dimension dimension;
        std::string display;  // preferred surface form, first one registered
    };

    // Registers a surface form. Surface matching is case- and space-insensitive.
    void add(std::string_view surface, std::string_view canonical, Dimension dim);

    // Canonical id for a surface form; throws UnknownUnit.
    const std::string& canonicalize(std::string_view surface) const;
    bool knows(std::string_view surface) const;

    Dimension dimension_of(std::string_view canonical_id) const;
    const std::string& display_of(std::string_view canonical_id) const;

    // Canonical ids sharing a dimension, in registration order.
    std::vector<std::string> units_of_dimension(Dimension dim) const;
    std::vector<std::string> canonical_ids() const { return order_; }

    // One record per line: surface<TAB>canonical<TAB>dimension.
    static UnitTable load(const std::string& path);
    static UnitTable parse(std::string_view text);

    // Compiled-in copy of data/units.tsv.
    static const UnitTable& builtin();

private:
    std::map<std::string, std::string> surface_to_canonical_;
    std::map<std::string, Entry> canon_;
    std::vector<std::string> order_;
};

// Rule-based splitter: whitespace-separated, with numbers ("70.0", "7e1")
// kept whole, word characters (letters, digits inside words, '_', any
// non-ASCII byte) grouped, and every other character emitted as a
// single-character punctuation token.
std::vector<std::string> tokenize(std::string_view text);

bool is_punctuation_token(std::string_view tok);

// Normalized token list for span matching: lowercased, punctuation tokens removed.
struct TokenSpan {
    std::vector<std::string> tokens;

    static TokenSpan from_text(std::string_view text);
    bool empty() const { return tokens.empty(); }
};

// Harmonic mean of multiset token precision/recall. Two empty spans agree (1.0).
double token_f1(const TokenSpan& a, const TokenSpan& b);

}  // namespace faithkit
