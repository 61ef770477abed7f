#include "faithkit/canonical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace faithkit {

Decimal Decimal::from_parts(int64_t mantissa, int32_t exponent) {
    if (mantissa == 0) return {0, 0};
    while (mantissa % 10 == 0) {
        mantissa /= 10;
        ++exponent;
    }
    return {mantissa, exponent};
}

double Decimal::to_double() const {
    return static_cast<double>(mantissa) * std::pow(10.0, exponent);
}

std::string Decimal::to_string() const {
    if (exponent > 18 || exponent < -18)
        throw ParseError("decimal exponent out of renderable range");
    int frac_digits = std::max(1, -exponent);
    // Scale mantissa so that exponent == -frac_digits.
    int64_t m = mantissa;
    int32_t e = exponent;
    while (e > -frac_digits) {
        m *= 10;
        --e;
    }
    bool neg = m < 0;
    uint64_t mag = neg ? static_cast<uint64_t>(-(m + 1)) + 1 : static_cast<uint64_t>(m);
    std::string digits = std::to_string(mag);
    if (digits.size() <= static_cast<size_t>(frac_digits))
        digits.insert(0, static_cast<size_t>(frac_digits) + 1 - digits.size(), '0');
    digits.insert(digits.size() - static_cast<size_t>(frac_digits), ".");
    return neg ? "-" + digits : digits;
}

Decimal parse_number(std::string_view s) {
    size_t i = 0;
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    // Find start of the first numeric literal.
    while (i < s.size()) {
        if (is_digit(s[i])) break;
        if (s[i] == '-' && i + 1 < s.size() && is_digit(s[i + 1])) break;
        ++i;
    }
    if (i >= s.size()) throw ParseError("no numeric literal in '" + std::string(s) + "'");

    bool neg = false;
    if (s[i] == '-') {
        neg = true;
        ++i;
    }
    int64_t mant = 0;
    int32_t exp = 0;
    int digits = 0;
    while (i < s.size() && is_digit(s[i])) {
        if (++digits > 18) throw ParseError("numeric literal too long in '" + std::string(s) + "'");
        mant = mant * 10 + (s[i] - '0');
        ++i;
    }
    if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_digit(s[i])) {
            if (++digits > 18) throw ParseError("numeric literal too long in '" + std::string(s) + "'");
            mant = mant * 10 + (s[i] - '0');
            --exp;
            ++i;
        }
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        size_t j = i + 1;
        bool eneg = false;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
            eneg = s[j] == '-';
            ++j;
        }
        if (j < s.size() && is_digit(s[j])) {
            int32_t ev = 0;
            while (j < s.size() && is_digit(s[j])) {
                ev = ev * 10 + (s[j] - '0');
                if (ev > 1000) throw ParseError("exponent out of range in '" + std::string(s) + "'");
                ++j;
            }
            exp += eneg ? -ev : ev;
            i = j;
        }
    }
    return Decimal::from_parts(neg ? -mant : mant, exp);
}

bool ratio_in_band(const Decimal& perturbed, const Decimal& original,
                   int64_t lo_num, int64_t hi_num, int64_t den) {
    if (original.mantissa == 0) return false;
    if (std::abs(perturbed.exponent - original.exponent) > 30) return false;
    // Align to a common exponent, then compare den*p against [lo*o, hi*o].
    __int128 p = perturbed.mantissa;
    __int128 o = original.mantissa;
    int32_t pe = perturbed.exponent;
    int32_t oe = original.exponent;
    while (pe > oe) {
        p *= 10;
        --pe;
    }
    while (oe > pe) {
        o *= 10;
        --oe;
    }
    if (o < 0) {
        o = -o;
        p = -p;
    }
    __int128 lhs = p * den;
    return lhs >= o * lo_num && lhs <= o * hi_num;
}

int compare(const Decimal& a, const Decimal& b) {
    __int128 x = a.mantissa;
    __int128 y = b.mantissa;
    int32_t xe = a.exponent;
    int32_t ye = b.exponent;
    // Values more than 36 decades apart compare by sign without widening.
    int32_t spread = xe - ye;
    if (spread > 36) return a.mantissa >= 0 ? 1 : -1;
    if (spread < -36) return b.mantissa >= 0 ? -1 : 1;
    while (xe > ye) {
        x *= 10;
        --xe;
    }
    while (ye > xe) {
        y *= 10;
        --ye;
    }
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
}

std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Pressure: return "pressure";
        case Dimension::Mass: return "mass";
        case Dimension::Volume: return "volume";
        case Dimension::Temperature: return "temperature";
        case Dimension::Length: return "length";
        case Dimension::Time: return "time";
    }
    return "unknown";
}

static Dimension dimension_from_name(std::string_view s) {
    if (s == "pressure") return Dimension::Pressure;
    if (s == "mass") return Dimension::Mass;
    if (s == "volume") return Dimension::Volume;
    if (s == "temperature") return Dimension::Temperature;
    if (s == "length") return Dimension::Length;
    if (s == "time") return Dimension::Time;
    throw ParseError("unknown dimension tag '" + std::string(s) + "'");
}

static std::string fold_surface(std::string_view surface) {
    std::string key;
    key.reserve(surface.size());
    for (char c : surface) {
        if (c == ' ' || c == '\t') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return key;
}

void UnitTable::add(std::string_view surface, std::string_view canonical, Dimension dim) {
    std::string key = fold_surface(surface);
    auto [it, inserted] = surface_to_canonical_.emplace(key, std::string(canonical));
    if (!inserted && it->second != canonical)
        throw ConfigError("surface form '" + std::string(surface) + "' maps to two canonical ids");
    auto cit = canon_.find(std::string(canonical));
    if (cit == canon_.end()) {
        canon_.emplace(std::string(canonical), Entry{std::string(canonical), dim, std::string(surface)});
        order_.emplace_back(canonical);
    } else if (cit->second.dimension != dim) {
        throw ConfigError("canonical id '" + std::string(canonical) + "' registered with two dimensions");
    }
}

const std::string& UnitTable::canonicalize(std::string_view surface) const {
    auto it = surface_to_canonical_.find(fold_surface(surface));
    if (it == surface_to_canonical_.end())
        throw UnknownUnit("unknown unit surface form '" + std::string(surface) + "'");
    return it->second;
}

bool UnitTable::knows(std::string_view surface) const {
    return surface_to_canonical_.contains(fold_surface(surface));
}

Dimension UnitTable::dimension_of(std::string_view canonical_id) const {
    auto it = canon_.find(std::string(canonical_id));
    if (it == canon_.end()) throw UnknownUnit("unknown canonical unit id '" + std::string(canonical_id) + "'");
    return it->second.dimension;
}

const std::string& UnitTable::display_of(std::string_view canonical_id) const {
    auto it = canon_.find(std::string(canonical_id));
    if (it == canon_.end()) throw UnknownUnit("unknown canonical unit id '" + std::string(canonical_id) + "'");
    return it->second.display;
}

std::vector<std::string> UnitTable::units_of_dimension(Dimension dim) const {
    std::vector<std::string> out;
    for (const auto& id : order_)
        if (canon_.at(id).dimension == dim) out.push_back(id);
    return out;
}

UnitTable UnitTable::parse(std::string_view text) {
    UnitTable t;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string_view::npos ? std::string_view::npos : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos)
            throw SchemaError("unit record needs surface<TAB>canonical<TAB>dimension", line_no);
        t.add(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), dimension_from_name(line.substr(t2 + 1)));
    }
    return t;
}

UnitTable UnitTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open unit table '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// Mirrors data/units.tsv; a test guards against drift between the two.
static constexpr std::string_view kBuiltinUnits =
    "MPa\tmpa\tpressure\n"
    "mpa\tmpa\tpressure\n"
    "megapascal\tmpa\tpressure\n"
    "bar\tbar\tpressure\n"
    "kPa\tkpa\tpressure\n"
    "kilopascal\tkpa\tpressure\n"
    "psi\tpsi\tpressure\n"
    "atm\tatm\tpressure\n"
    "kg\tkg\tmass\n"
    "kilogram\tkg\tmass\n"
    "kilograms\tkg\tmass\n"
    "t\tt\tmass\n"
    "tonne\tt\tmass\n"
    "tonnes\tt\tmass\n"
    "g\tg\tmass\n"
    "m3\tm3\tvolume\n"
    "m\xc2\xb3\tm3\tvolume\n"
    "L\tl\tvolume\n"
    "liter\tl\tvolume\n"
    "litre\tl\tvolume\n"
    "\xc2\xb0" "C\tdegc\ttemperature\n"
    "degC\tdegc\ttemperature\n"
    "K\tk\ttemperature\n"
    "kelvin\tk\ttemperature\n"
    "m\tm\tlength\n"
    "meter\tm\tlength\n"
    "metre\tm\tlength\n"
    "mm\tmm\tlength\n"
    "km\tkm\tlength\n"
    "h\th\ttime\n"
    "hour\th\ttime\n"
    "hours\th\ttime\n"
    "min\tmin\ttime\n"
    "s\ts\ttime\n"
    "d\td\ttime\n";

const UnitTable& UnitTable::builtin() {
    static const UnitTable table = UnitTable::parse(kBuiltinUnits);
    return table;
}

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ascii_digit(c)) {
            size_t j = i + 1;
            while (j < n && is_ascii_digit(text[j])) ++j;
            if (j + 1 < n && text[j] == '.' && is_ascii_digit(text[j + 1])) {
                ++j;
                while (j < n && is_ascii_digit(text[j])) ++j;
            }
            // Scientific notation stays a single token.
            if (j < n && (text[j] == 'e' || text[j] == 'E')) {
                size_t k = j + 1;
                if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < n && is_ascii_digit(text[k])) {
                    ++k;
                    while (k < n && is_ascii_digit(text[k])) ++k;
                    j = k;
                }
            }
            out.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        if (is_word_char(c)) {
            size_t j = i + 1;
            while (j < n && (is_word_char(text[j]) || is_ascii_digit(text[j]))) ++j;
            out.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        out.emplace_back(1, c);
        ++i;
    }
    return out;
}

bool is_punctuation_token(std::string_view tok) {
    if (tok.empty()) return true;
    char c = tok.front();
    return tok.size() == 1 && !is_word_char(c) && !is_ascii_digit(c);
}

TokenSpan TokenSpan::from_text(std::string_view text) {
    TokenSpan span;
    for (auto& tok : tokenize(text)) {
        if (is_punctuation_token(tok)) continue;
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        span.tokens.push_back(std::move(tok));
    }
    return span;
}

double token_f1(const TokenSpan& a, const TokenSpan& b) {
    if (a.tokens.empty() && b.tokens.empty()) return 1.0;
    if (a.tokens.empty() || b.tokens.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : a.tokens) ++counts[t];
    int overlap = 0;
    for (const auto& t : b.tokens) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(a.tokens.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(b.tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace faithkit
