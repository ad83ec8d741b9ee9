#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlab/corpus.hpp"
#include "matchlab/scoring.hpp"

namespace matchlab {

struct GapRecord {
    std::string doc_id;
    double alpha_sen = 0.0;  // max g_sen over the document's candidates
    double alpha_sum = 0.0;  // max g_sum
    double delta = 0.0;      // alpha_sum - alpha_sen
    // Alternative reading: alpha_sum minus g_sum of the g_sen-argmax (the
    // candidate a sentence-level extractor would pick). Reported alongside
    // delta for comparison; delta is the default.
    double delta_alt = 0.0;
    std::optional<double> delta_star;  // g_sum(matcher pick) - g_sum(extractor pick)
    std::size_t z = 1;
    std::size_t num_candidates = 0;
    bool is_pearl_best = false;
};

struct QuintileRow {
    std::size_t part = 0;  // 1-based
    std::size_t z_lo = 0;
    std::size_t z_hi = 0;
    std::size_t count = 0;
    double gain_gsum = 0.0;
    double gain_r1 = 0.0;
    double gain_r2 = 0.0;
    double gain_rl = 0.0;
};

// Per-document input to the z-split comparison.
struct DocGain {
    std::string doc_id;
    std::size_t z = 1;
    double gain_gsum = 0.0;
    double gain_r1 = 0.0;
    double gain_r2 = 0.0;
    double gain_rl = 0.0;
};

// All ROUGE-derived values are stored as fractions in [0,1]; reports render
// them x100 for paper-style points.
struct DatasetReport {
    int schema_version = 1;
    std::size_t num_docs = 0;
    std::size_t buckets = 10;
    std::vector<double> z_histogram;  // proportions over z-fraction buckets, sums to 1
    double z1_fraction = 0.0;         // share of documents with z == 1 exactly
    // documents whose candidate sets had g_sen or g_sum ties; z uses the
    // stable-sort convention there
    std::size_t docs_with_score_ties = 0;
    double mean_delta = 0.0;
    double mean_delta_alt = 0.0;
    std::optional<double> mean_delta_star;
    std::optional<double> psi;
    std::string extractor_label;  // which extractor produced delta_star, when any
    std::vector<QuintileRow> quintiles;
    bool quintiles_small_sample = false;  // fewer than 5 documents: one part per doc
    std::vector<GapRecord> records;
};

GapRecord inherent_gap(const std::string& doc_id, std::span<const ScoredCandidate> candidates,
                       const DocumentDiagnosis& diagnosis);

// delta*: g_sum of the matcher's pick minus g_sum of the extractor's pick.
double realized_gain(const Document& doc, const CandidateSummary& matcher_pick,
                     const CandidateSummary& extractor_pick);

// mean delta* / mean delta; nullopt when mean delta is 0 or no delta* exists.
std::optional<double> psi(std::span<const GapRecord> records);

// Histogram over z / num_candidates with `buckets` equal-width buckets
// covering (0, 1]. Proportions sum to 1.
std::vector<double> z_distribution(std::span<const DocumentDiagnosis> diagnoses,
                                   std::size_t buckets);
std::vector<double> z_fraction_histogram(std::span<const double> z_fractions, std::size_t buckets);

// Sorts by (z, doc id) and splits into 5 contiguous parts whose sizes differ
// by at most 1; fewer than 5 docs degrade to one part per document.
std::vector<QuintileRow> z_split_compare(std::span<const DocGain> gains, bool* small_sample = nullptr);

// Writes report.json, z_hist.csv, delta.csv and quintiles.csv into `dir`.
// Refuses empty reports; no partial output on failure.
void emit_report(const DatasetReport& report, const std::string& dir);

DatasetReport load_report(const std::string& json_path);

bool report_equal(const DatasetReport& a, const DatasetReport& b);

}  // namespace matchlab
