#include "matchlab/rouge.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace matchlab {

namespace {

constexpr char kSep = '\x1f';

std::unordered_map<std::string, long> ngram_counts(TokenView tokens, int n) {
    std::unordered_map<std::string, long> counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    const std::size_t total = tokens.size() - static_cast<std::size_t>(n) + 1;
    counts.reserve(total);
    std::string key;
    for (std::size_t i = 0; i < total; ++i) {
        key.clear();
        for (int j = 0; j < n; ++j) {
            if (j != 0) key.push_back(kSep);
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

double f_measure(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

}  // namespace

RougeScore rouge_n(TokenView candidate, TokenView reference, int n) {
    if (n < 1) throw std::invalid_argument("rouge_n: order must be >= 1");
    const std::size_t un = static_cast<std::size_t>(n);
    if (candidate.size() < un || reference.size() < un) return {};

    const auto cand_counts = ngram_counts(candidate, n);
    const auto ref_counts = ngram_counts(reference, n);
    long overlap = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }
    const double total_cand = static_cast<double>(candidate.size() - un + 1);
    const double total_ref = static_cast<double>(reference.size() - un + 1);
    RougeScore score;
    score.precision = static_cast<double>(overlap) / total_cand;
    score.recall = static_cast<double>(overlap) / total_ref;
    score.f1 = f_measure(score.precision, score.recall);
    return score;
}

std::size_t lcs_length(TokenView a, TokenView b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

RougeScore rouge_l(TokenView candidate, TokenView reference) {
    if (candidate.empty() || reference.empty()) return {};
    const double lcs = static_cast<double>(lcs_length(candidate, reference));
    RougeScore score;
    score.precision = lcs / static_cast<double>(candidate.size());
    score.recall = lcs / static_cast<double>(reference.size());
    score.f1 = f_measure(score.precision, score.recall);
    return score;
}

RougeTriple mean_rouge(TokenView candidate, TokenView reference) {
    RougeTriple triple;
    triple.r1 = rouge_n(candidate, reference, 1);
    triple.r2 = rouge_n(candidate, reference, 2);
    triple.rl = rouge_l(candidate, reference);
    triple.mean_f1 = (triple.r1.f1 + triple.r2.f1 + triple.rl.f1) / 3.0;
    return triple;
}

}  // namespace matchlab
