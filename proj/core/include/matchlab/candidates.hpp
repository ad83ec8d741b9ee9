#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlab/corpus.hpp"
#include "matchlab/scoring.hpp"

namespace matchlab {

enum class SelectorKind { oracle, centroid, external };

SelectorKind selector_from_name(const std::string& name);
std::string selector_name(SelectorKind kind);

struct SelectorConfig {
    SelectorKind kind = SelectorKind::oracle;
};

struct CandidateConfig {
    std::size_t ext = 5;
    std::vector<std::size_t> sel = {2, 3};
    std::optional<std::size_t> expected_size;

    // Enforces 1 <= s <= ext for every s in sel, and that expected_size (when
    // set) equals sum over sel of C(ext, s).
    void validate() const;
};

struct PrunedDocument {
    const Document* source = nullptr;
    std::vector<std::size_t> kept;  // ascending, length min(ext, n)
    std::vector<double> scores;     // full per-sentence salience scores (length n)
};

// Per-sentence salience. oracle: mean-F1 ROUGE of the sentence against the
// gold; centroid: cosine of the sentence's hashed n-gram vector with the mean
// of all sentence vectors; external: passthrough of the record's sent_scores.
std::vector<double> score_sentences(const Document& doc, const SelectorConfig& config);

// Keeps the ext highest-scoring sentences (score ties keep the lower index),
// reported in ascending index order. ext > n keeps everything.
PrunedDocument prune(const Document& doc, std::span<const double> scores, std::size_t ext);

// All combinations of s kept sentences for each s in sel, ordered by s
// ascending then lexicographic index order. sel values larger than the pruned
// size are skipped with a warning so short documents still yield candidates.
std::vector<CandidateSummary> generate_candidates(const PrunedDocument& pruned,
                                                  std::span<const std::size_t> sel);

// Diagnostic candidate sets: oracle-score the sentences, keep the top
// min(10, n), and emit all size-n_ext combinations. When n_ext exceeds the
// kept count the single full combination is emitted.
std::vector<CandidateSummary> analysis_candidates(const Document& doc, std::size_t n_ext);

CandidateSummary lead(const Document& doc, std::size_t k);

// Greedily grows a summary by the sentence that maximizes g_sum of the
// growing set; stops at k sentences or when no sentence improves g_sum.
CandidateSummary greedy_oracle(const Document& doc, std::size_t k);

// Selects up to k sentences by descending salience. With trigram blocking, a
// sentence sharing any trigram with the already-selected set is skipped.
CandidateSummary topk_extract(const Document& doc, std::span<const double> scores, std::size_t k,
                              bool trigram_blocking);

uint64_t binomial(std::size_t n, std::size_t k);

}  // namespace matchlab
