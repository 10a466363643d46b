#include "stride/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <sstream>

namespace stride::metrics {
namespace {

struct CpRange {
    uint32_t first;
    uint32_t last;
};

constexpr CpRange kPunctRanges[] =
#include "stride/unicode_punct_table.inc"
;

bool is_punct_codepoint(uint32_t cp) {
    auto it = std::upper_bound(std::begin(kPunctRanges), std::end(kPunctRanges), cp,
                               [](uint32_t v, const CpRange& r) { return v < r.first; });
    if (it == std::begin(kPunctRanges)) return false;
    --it;
    return cp >= it->first && cp <= it->last;
}

// Decodes one UTF-8 codepoint starting at i; advances i past it. Malformed
// bytes are passed through as-is (treated as Latin-1-ish single units).
uint32_t decode_utf8(const std::string& s, size_t& i) {
    unsigned char c = s[i];
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = 0;
    uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        cp = c & 0x1F;
        extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
        cp = c & 0x0F;
        extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
        cp = c & 0x07;
        extra = 3;
    } else {
        ++i;
        return c;
    }
    if (i + extra >= s.size()) {
        ++i;
        return c;
    }
    size_t start = i;
    ++i;
    for (int k = 0; k < extra; ++k) {
        unsigned char cc = s[i];
        if ((cc & 0xC0) != 0x80) {
            i = start + 1;
            return c;
        }
        cp = (cp << 6) | (cc & 0x3F);
        ++i;
    }
    return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

std::string normalize(const std::string& text) {
    // Lowercase (ASCII) and drop punctuation in one pass. Punctuation is
    // removed, not replaced by a space, so "1939-1945" becomes "19391945".
    std::string depunct;
    depunct.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = decode_utf8(text, i);
        if (is_punct_codepoint(cp)) continue;
        if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
        append_utf8(depunct, cp);
    }

    std::istringstream in(depunct);
    std::string token;
    std::string out;
    while (in >> token) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

std::vector<std::string> normalized_tokens(const std::string& text) {
    std::istringstream in(normalize(text));
    std::vector<std::string> tokens;
    std::string t;
    while (in >> t) tokens.push_back(t);
    return tokens;
}

int exact_match(const std::string& pred, const std::vector<std::string>& golds) {
    const std::string np = normalize(pred);
    for (const auto& g : golds)
        if (np == normalize(g)) return 1;
    return 0;
}

namespace {

F1Result f1_single(const std::vector<std::string>& pred_tokens, const std::string& gold) {
    auto gold_tokens = normalized_tokens(gold);
    if (pred_tokens.empty() || gold_tokens.empty()) return {};
    std::map<std::string, int> counts;
    for (const auto& t : pred_tokens) ++counts[t];
    long long overlap = 0;
    for (const auto& t : gold_tokens) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return {};
    F1Result r;
    r.precision = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    r.recall = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

}  // namespace

F1Result f1(const std::string& pred, const std::vector<std::string>& golds) {
    auto pred_tokens = normalized_tokens(pred);
    F1Result best;
    for (const auto& g : golds) {
        F1Result cand = f1_single(pred_tokens, g);
        if (cand.f1 > best.f1) best = cand;
    }
    return best;
}

Metrics score(const std::string& pred, const std::vector<std::string>& golds) {
    Metrics m;
    m.em = exact_match(pred, golds);
    F1Result r = f1(pred, golds);
    m.f1 = r.f1;
    m.precision = r.precision;
    m.recall = r.recall;
    return m;
}

}  // namespace stride::metrics
