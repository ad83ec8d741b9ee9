#include "matchlab/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "matchlab/util.hpp"

namespace matchlab {

CandidateSummary make_candidate(const Document& doc, std::vector<std::size_t> indices) {
    CandidateSummary cand;
    cand.indices = std::move(indices);
    std::size_t total = 0;
    for (std::size_t i : cand.indices) total += doc.sentences.at(i).tokens.size();
    cand.tokens.reserve(total);
    for (std::size_t i : cand.indices) {
        const auto& toks = doc.sentences.at(i).tokens;
        cand.tokens.insert(cand.tokens.end(), toks.begin(), toks.end());
    }
    return cand;
}

double g_sen(const Document& doc, const CandidateSummary& candidate, TokenView gold_flat) {
    if (candidate.indices.empty()) throw ValidationError("g_sen: candidate has no sentences");
    double sum = 0.0;
    for (std::size_t i : candidate.indices)
        sum += mean_rouge(doc.sentences.at(i).tokens, gold_flat).mean_f1;
    return sum / static_cast<double>(candidate.indices.size());
}

double g_sum(const CandidateSummary& candidate, TokenView gold_flat) {
    if (candidate.indices.empty()) throw ValidationError("g_sum: candidate has no sentences");
    return mean_rouge(candidate.tokens, gold_flat).mean_f1;
}

std::vector<double> sentence_gold_rouge(const Document& doc, TokenView gold_flat) {
    std::vector<double> scores(doc.sentences.size());
    for (std::size_t i = 0; i < doc.sentences.size(); ++i)
        scores[i] = mean_rouge(doc.sentences[i].tokens, gold_flat).mean_f1;
    return scores;
}

std::vector<ScoredCandidate> score_candidates(const Document& doc,
                                              std::span<const CandidateSummary> candidates) {
    const TokenList gold = flatten_gold(doc);
    const std::vector<double> per_sentence = sentence_gold_rouge(doc, gold);

    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const auto& cand : candidates) {
        ScoredCandidate sc;
        sc.candidate = cand;
        double sen = 0.0;
        for (std::size_t i : cand.indices) sen += per_sentence.at(i);
        sc.g_sen = cand.indices.empty() ? 0.0 : sen / static_cast<double>(cand.indices.size());
        sc.g_sum = mean_rouge(cand.tokens, gold).mean_f1;
        scored.push_back(std::move(sc));
    }
    mark_pearls(scored);
    return scored;
}

void mark_pearls(std::vector<ScoredCandidate>& candidates) {
    const std::size_t n = candidates.size();
    for (auto& c : candidates) c.is_pearl = false;
    if (n < 2) return;

    // Sweep in g_sen-descending order, carrying the min g_sum over all
    // candidates with strictly greater g_sen. Equal-g_sen groups are
    // processed together so ties cannot mark each other.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].g_sen > candidates[b].g_sen;
    });

    double min_gsum_above = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < n) {
        std::size_t group_end = i;
        const double level = candidates[order[i]].g_sen;
        double group_min = std::numeric_limits<double>::infinity();
        while (group_end < n && candidates[order[group_end]].g_sen == level) {
            group_min = std::min(group_min, candidates[order[group_end]].g_sum);
            ++group_end;
        }
        for (std::size_t k = i; k < group_end; ++k) {
            auto& cand = candidates[order[k]];
            cand.is_pearl = min_gsum_above < cand.g_sum;
        }
        min_gsum_above = std::min(min_gsum_above, group_min);
        i = group_end;
    }
}

std::size_t best_summary(std::span<const ScoredCandidate> candidates) {
    if (candidates.empty()) throw ValidationError("best_summary: empty candidate list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& a = candidates[i];
        const auto& b = candidates[best];
        if (a.g_sum > b.g_sum) {
            best = i;
        } else if (a.g_sum == b.g_sum) {
            if (a.g_sen > b.g_sen ||
                (a.g_sen == b.g_sen && a.candidate.indices < b.candidate.indices))
                best = i;
        }
    }
    return best;
}

DocumentDiagnosis z_rank(std::span<const ScoredCandidate> candidates, std::size_t best) {
    DocumentDiagnosis diag;
    diag.best_index = best;
    diag.num_candidates = candidates.size();

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].g_sen > candidates[b].g_sen;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (order[rank] == best) {
            diag.z = rank + 1;
            break;
        }
    }
    diag.z_fraction = static_cast<double>(diag.z) / static_cast<double>(candidates.size());

    std::set<double> sen_values;
    std::set<double> sum_values;
    for (const auto& c : candidates) {
        sen_values.insert(c.g_sen);
        sum_values.insert(c.g_sum);
    }
    diag.had_score_ties =
        sen_values.size() != candidates.size() || sum_values.size() != candidates.size();
    return diag;
}

DocumentDiagnosis diagnose(std::span<const ScoredCandidate> candidates) {
    return z_rank(candidates, best_summary(candidates));
}

}  // namespace matchlab
