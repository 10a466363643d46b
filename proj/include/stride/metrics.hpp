#pragma once

#include <string>
#include <vector>

#include "stride/domain.hpp"

namespace stride::metrics {

// Answer normalization: lowercase, strip punctuation (Unicode category P*),
// drop standalone articles {a, an, the}, collapse whitespace. Input is UTF-8;
// only ASCII letters are case-folded, matching the usual QA evaluation rule.
std::string normalize(const std::string& text);

std::vector<std::string> normalized_tokens(const std::string& text);

// 1 iff the normalized prediction equals some normalized gold answer.
int exact_match(const std::string& pred, const std::vector<std::string>& golds);

struct F1Result {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Token-level multiset overlap against each gold; returns the triple of the
// gold maximizing F1 (first such gold on ties).
F1Result f1(const std::string& pred, const std::vector<std::string>& golds);

Metrics score(const std::string& pred, const std::vector<std::string>& golds);

}  // namespace stride::metrics
