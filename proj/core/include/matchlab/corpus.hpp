#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "matchlab/rouge.hpp"

namespace matchlab {

struct Sentence {
    TokenList tokens;  // nonempty for every sentence retained after filtering
    std::string raw;
};

struct Document {
    std::string id;
    std::vector<Sentence> sentences;
    std::vector<Sentence> gold;
    // Externally supplied per-sentence salience scores ("sent_scores" in the
    // input records), sliced alongside the sentence list; empty when absent.
    std::vector<double> sent_scores;
    bool token_budget_applied = false;

    std::size_t total_tokens() const;
};

struct CorpusStats {
    std::size_t num_docs = 0;
    std::size_t dropped_empty = 0;
    std::size_t malformed_lines = 0;
    double mean_doc_tokens = 0.0;
    double mean_sum_tokens = 0.0;
};

struct TokenizerOptions {
    bool stem = false;
};

// Lowercases (ASCII), splits on maximal runs of non-alphanumeric characters,
// drops empty pieces, then optionally Porter-stems each token.
TokenList tokenize(const std::string& raw, const TokenizerOptions& opts = {});

// Classic Porter stemmer over ASCII lowercase words. Words of length <= 2
// are returned unchanged.
std::string porter_stem(const std::string& word);

// One parsed JSONL record, before filtering and truncation.
struct RawRecord {
    std::string id;
    std::vector<std::string> text;
    std::vector<std::string> summary;
    std::vector<double> sent_scores;  // empty when the field is absent
    bool has_sent_scores = false;
    std::size_t line_number = 0;  // 1-based
};

struct CorpusOptions {
    std::optional<std::size_t> limit;
    bool strict = false;
    TokenizerOptions tokenizer;
    std::size_t max_tokens = 512;  // 0 disables the budget
};

// Streaming JSONL reader. Malformed lines raise ValidationError in strict
// mode; otherwise they are counted, reported to the log, and skipped.
class JsonlReader {
public:
    JsonlReader(const std::string& path, bool strict, std::optional<std::size_t> limit = {});
    ~JsonlReader();
    JsonlReader(JsonlReader&&) noexcept;
    JsonlReader& operator=(JsonlReader&&) = delete;

    // Returns false at end of stream (or once `limit` records were yielded).
    bool next(RawRecord& out);

    std::size_t malformed_lines() const { return malformed_; }
    std::size_t records_read() const { return yielded_; }

private:
    struct Impl;
    Impl* impl_;
    std::size_t malformed_ = 0;
    std::size_t yielded_ = 0;
};

// Tokenizes, removes empty-token sentences, drops the record entirely when
// the document or the summary tokenizes to nothing, and applies the document
// token budget (whole sentences first; the sentence crossing the boundary is
// cut at the budget). Returns nullopt for dropped records.
std::optional<Document> filter_and_truncate(const RawRecord& record, const CorpusOptions& opts);

struct Corpus {
    std::vector<Document> documents;
    CorpusStats stats;
};

Corpus load_corpus(const std::string& path, const CorpusOptions& opts);

// Gold summary flattened to one token sequence (the reference side of every
// ROUGE call).
TokenList flatten_gold(const Document& doc);
TokenList flatten_sentences(const std::vector<Sentence>& sentences);

}  // namespace matchlab
