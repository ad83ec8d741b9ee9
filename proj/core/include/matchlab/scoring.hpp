#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matchlab/corpus.hpp"
#include "matchlab/rouge.hpp"

namespace matchlab {

// A candidate summary: strictly ascending sentence positions into the source
// document plus the concatenated tokens of those sentences, in document order.
struct CandidateSummary {
    std::vector<std::size_t> indices;
    TokenList tokens;
};

CandidateSummary make_candidate(const Document& doc, std::vector<std::size_t> indices);

struct ScoredCandidate {
    CandidateSummary candidate;
    double g_sen = 0.0;
    double g_sum = 0.0;
    bool is_pearl = false;
};

struct DocumentDiagnosis {
    std::size_t best_index = 0;  // position in the candidate list
    std::size_t z = 1;           // 1-based rank of the best-summary by g_sen desc
    double z_fraction = 1.0;     // z / num_candidates
    std::size_t num_candidates = 0;
    bool had_score_ties = false;  // some g_sen or g_sum values collided
};

// Sentence-level score: mean over the candidate's sentences of the mean-F1
// ROUGE between that sentence and the flattened gold summary.
double g_sen(const Document& doc, const CandidateSummary& candidate, TokenView gold_flat);

// Summary-level score: mean-F1 ROUGE of the whole candidate against the gold.
double g_sum(const CandidateSummary& candidate, TokenView gold_flat);

// Per-sentence mean-F1 ROUGE against the flattened gold, for all sentences.
// g_sen of any candidate is the mean of these values over its indices.
std::vector<double> sentence_gold_rouge(const Document& doc, TokenView gold_flat);

// Fills g_sen/g_sum (using a shared per-sentence cache) and pearl flags.
std::vector<ScoredCandidate> score_candidates(const Document& doc,
                                              std::span<const CandidateSummary> candidates);

// A candidate is a pearl when some other candidate strictly beats it on g_sen
// while strictly losing to it on g_sum. Ties never create pearls.
void mark_pearls(std::vector<ScoredCandidate>& candidates);

// Argmax of g_sum; ties broken by higher g_sen, then by lexicographically
// smaller index tuple. Throws ValidationError on an empty list.
std::size_t best_summary(std::span<const ScoredCandidate> candidates);

// Rank of the best-summary when candidates are stably sorted by g_sen
// descending (ties keep candidate-list order).
DocumentDiagnosis z_rank(std::span<const ScoredCandidate> candidates, std::size_t best);

DocumentDiagnosis diagnose(std::span<const ScoredCandidate> candidates);

}  // namespace matchlab
