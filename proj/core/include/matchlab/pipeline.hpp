#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlab/analysis.hpp"
#include "matchlab/candidates.hpp"
#include "matchlab/corpus.hpp"
#include "matchlab/matcher.hpp"

namespace matchlab {

// --- dataset diagnostics (z distribution + inherent gap) -------------------

struct AnalyzeOptions {
    std::size_t ext = 2;  // candidate size for the diagnostic combinations
    std::size_t buckets = 10;
    std::size_t jobs = 1;
};

struct AnalyzeResult {
    std::vector<GapRecord> records;
    std::vector<DocumentDiagnosis> diagnoses;
    DatasetReport report;
};

AnalyzeResult analyze_corpus(std::span<const Document> docs, const AnalyzeOptions& opts);

// --- candidate generation ---------------------------------------------------

struct GenerationOptions {
    SelectorConfig selector;
    CandidateConfig config;
    std::size_t jobs = 1;
};

struct DocumentCandidates {
    const Document* doc = nullptr;
    std::vector<double> scores;
    std::vector<CandidateSummary> candidates;
};

std::vector<DocumentCandidates> generate_for_corpus(std::span<const Document> docs,
                                                    const GenerationOptions& opts);

// --- training ----------------------------------------------------------------

// Builds ranked training examples; documents that yield no candidates are
// skipped with a warning.
std::vector<TrainingExample> build_examples(std::span<const Document> docs,
                                            const GenerationOptions& opts,
                                            const EmbedderConfig& embedder);

// --- selection ----------------------------------------------------------------

struct Selection {
    std::string doc_id;
    std::vector<std::size_t> indices;
    std::string summary_text;  // raw sentences joined by a space
};

std::vector<Selection> select_for_corpus(std::span<const Document> docs,
                                         const GenerationOptions& opts, const MatcherModel& model);

// --- matcher vs sentence-level extractor comparison --------------------------

struct CompareOptions {
    GenerationOptions generation;
    std::size_t extract_k = 3;  // sentences taken by the sentence-level extractor
    bool trigram_blocking = false;
    std::size_t buckets = 10;
};

struct CompareResult {
    DatasetReport report;
    std::vector<Selection> matcher_picks;
    std::vector<Selection> extractor_picks;
};

CompareResult compare_corpus(std::span<const Document> docs, const CompareOptions& opts,
                             const MatcherModel& model);

// --- evaluation ----------------------------------------------------------------

struct EvalRow {
    std::string system;
    double r1 = 0.0;
    double r2 = 0.0;
    double rl = 0.0;
};

struct EvaluateOptions {
    bool baselines = false;   // add LEAD / ORACLE / MATCH-ORACLE rows
    std::size_t lead_k = 3;   // k for LEAD and ORACLE
    GenerationOptions generation;  // candidate set behind MATCH-ORACLE
};

// Mean ROUGE-1/2/L F1 (fractions) of the given selections against gold, plus
// optional baseline rows. Unknown selection ids are fatal.
std::vector<EvalRow> evaluate_selections(std::span<const Document> docs,
                                         const std::vector<Selection>& selections,
                                         const EvaluateOptions& opts);

Selection make_selection(const Document& doc, const CandidateSummary& cand);

}  // namespace matchlab
