#include "matchlab/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "matchlab/features.hpp"
#include "matchlab/util.hpp"

namespace matchlab {

SelectorKind selector_from_name(const std::string& name) {
    if (name == "oracle") return SelectorKind::oracle;
    if (name == "centroid") return SelectorKind::centroid;
    if (name == "external") return SelectorKind::external;
    throw ValidationError("unknown selector: " + name + " (expected oracle|centroid|external)");
}

std::string selector_name(SelectorKind kind) {
    switch (kind) {
        case SelectorKind::oracle: return "oracle";
        case SelectorKind::centroid: return "centroid";
        case SelectorKind::external: return "external";
    }
    return "?";
}

uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    uint64_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

void CandidateConfig::validate() const {
    if (ext == 0) throw ValidationError("candidate config: ext must be >= 1");
    if (sel.empty()) throw ValidationError("candidate config: sel must be nonempty");
    for (std::size_t s : sel) {
        if (s < 1 || s > ext)
            throw ValidationError("candidate config: sel value " + std::to_string(s) +
                                  " outside [1, ext=" + std::to_string(ext) + "]");
    }
    if (expected_size) {
        uint64_t total = 0;
        for (std::size_t s : sel) total += binomial(ext, s);
        if (total != *expected_size)
            throw ValidationError("candidate config: expected_size " + std::to_string(*expected_size) +
                                  " != sum of C(ext, sel) = " + std::to_string(total));
    }
}

std::vector<double> score_sentences(const Document& doc, const SelectorConfig& config) {
    const std::size_t n = doc.sentences.size();
    switch (config.kind) {
        case SelectorKind::oracle: {
            return sentence_gold_rouge(doc, flatten_gold(doc));
        }
        case SelectorKind::centroid: {
            // Fixed small hashing config; only relative cosines matter here.
            EmbedderConfig cfg;
            cfg.feature_dim = 4096;
            cfg.embed_dim = 1;
            cfg.hash_seed = 0;
            std::vector<FeatureVector> vecs(n);
            std::vector<double> centroid(cfg.feature_dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                vecs[i] = featurize(doc.sentences[i].tokens, cfg);
                for (const auto& [bucket, value] : vecs[i].entries)
                    centroid[bucket] += value / static_cast<double>(n);
            }
            double centroid_norm = 0.0;
            for (double v : centroid) centroid_norm += v * v;
            centroid_norm = std::sqrt(centroid_norm);
            std::vector<double> scores(n, 0.0);
            if (centroid_norm < 1e-12) return scores;
            for (std::size_t i = 0; i < n; ++i) {
                double dot = 0.0;
                for (const auto& [bucket, value] : vecs[i].entries) dot += centroid[bucket] * value;
                // feature vectors are unit length, so cosine = dot / |centroid|
                scores[i] = vecs[i].zero() ? 0.0 : dot / centroid_norm;
            }
            return scores;
        }
        case SelectorKind::external: {
            if (doc.sent_scores.size() != n)
                throw ValidationError("document " + doc.id + ": selector=external needs sent_scores of length " +
                                      std::to_string(n) + ", got " + std::to_string(doc.sent_scores.size()));
            return doc.sent_scores;
        }
    }
    throw ValidationError("unhandled selector kind");
}

namespace {

// Indices ordered by score descending; equal scores keep the lower index first.
std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

PrunedDocument prune(const Document& doc, std::span<const double> scores, std::size_t ext) {
    if (scores.size() != doc.sentences.size())
        throw ValidationError("prune: scores length " + std::to_string(scores.size()) +
                              " != sentence count " + std::to_string(doc.sentences.size()));
    PrunedDocument pruned;
    pruned.source = &doc;
    pruned.scores.assign(scores.begin(), scores.end());
    auto order = rank_by_score(scores);
    const std::size_t keep = std::min(ext, order.size());
    pruned.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(pruned.kept.begin(), pruned.kept.end());
    return pruned;
}

namespace {

void emit_combinations(const Document& doc, const std::vector<std::size_t>& kept, std::size_t size,
                       std::vector<CandidateSummary>& out) {
    if (size == 0 || size > kept.size()) return;
    std::vector<std::size_t> positions(size);
    std::iota(positions.begin(), positions.end(), 0);
    const std::size_t n = kept.size();
    while (true) {
        std::vector<std::size_t> indices(size);
        for (std::size_t i = 0; i < size; ++i) indices[i] = kept[positions[i]];
        out.push_back(make_candidate(doc, std::move(indices)));

        // next lexicographic combination
        std::size_t i = size;
        while (i > 0) {
            --i;
            if (positions[i] != i + n - size) {
                ++positions[i];
                for (std::size_t k = i + 1; k < size; ++k) positions[k] = positions[k - 1] + 1;
                break;
            }
            if (i == 0) return;
        }
    }
}

}  // namespace

std::vector<CandidateSummary> generate_candidates(const PrunedDocument& pruned,
                                                  std::span<const std::size_t> sel) {
    std::vector<std::size_t> sizes(sel.begin(), sel.end());
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    std::vector<CandidateSummary> out;
    for (std::size_t s : sizes) {
        if (s == 0) continue;
        if (s > pruned.kept.size()) {
            log_warn("document " + pruned.source->id + ": sel=" + std::to_string(s) +
                     " exceeds pruned size " + std::to_string(pruned.kept.size()) + ", skipping");
            continue;
        }
        emit_combinations(*pruned.source, pruned.kept, s, out);
    }
    return out;
}

std::vector<CandidateSummary> analysis_candidates(const Document& doc, std::size_t n_ext) {
    if (n_ext == 0) throw ValidationError("analysis candidates: ext must be >= 1");
    const auto scores = score_sentences(doc, SelectorConfig{SelectorKind::oracle});
    const PrunedDocument pruned = prune(doc, scores, std::min<std::size_t>(10, doc.sentences.size()));
    if (n_ext > pruned.kept.size()) {
        std::vector<CandidateSummary> out;
        out.push_back(make_candidate(doc, pruned.kept));
        return out;
    }
    std::vector<CandidateSummary> out;
    emit_combinations(doc, pruned.kept, n_ext, out);
    return out;
}

CandidateSummary lead(const Document& doc, std::size_t k) {
    if (k == 0) throw ValidationError("lead: k must be >= 1");
    const std::size_t take = std::min(k, doc.sentences.size());
    std::vector<std::size_t> indices(take);
    std::iota(indices.begin(), indices.end(), 0);
    return make_candidate(doc, std::move(indices));
}

CandidateSummary greedy_oracle(const Document& doc, std::size_t k) {
    if (k == 0) throw ValidationError("greedy_oracle: k must be >= 1");
    const TokenList gold = flatten_gold(doc);
    const std::size_t n = doc.sentences.size();

    std::vector<std::size_t> selected;
    std::vector<bool> used(n, false);
    double current = -1.0;  // first sentence is always taken (plain argmax)
    while (selected.size() < std::min(k, n)) {
        double best_score = current;
        std::size_t best_idx = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            std::vector<std::size_t> trial = selected;
            trial.insert(std::upper_bound(trial.begin(), trial.end(), i), i);
            const double score = g_sum(make_candidate(doc, std::move(trial)), gold);
            if (score > best_score) {
                best_score = score;
                best_idx = i;
            }
        }
        if (best_idx == n) break;  // nothing improves g_sum
        used[best_idx] = true;
        selected.insert(std::upper_bound(selected.begin(), selected.end(), best_idx), best_idx);
        current = best_score;
    }
    return make_candidate(doc, std::move(selected));
}

namespace {

std::vector<std::string> sentence_trigrams(const Sentence& sentence) {
    std::vector<std::string> grams;
    const auto& t = sentence.tokens;
    if (t.size() < 3) return grams;
    grams.reserve(t.size() - 2);
    for (std::size_t i = 0; i + 2 < t.size(); ++i)
        grams.push_back(t[i] + '\x1f' + t[i + 1] + '\x1f' + t[i + 2]);
    return grams;
}

}  // namespace

CandidateSummary topk_extract(const Document& doc, std::span<const double> scores, std::size_t k,
                              bool trigram_blocking) {
    if (scores.size() != doc.sentences.size())
        throw ValidationError("topk_extract: scores length mismatch for document " + doc.id);
    std::vector<std::size_t> selected;
    std::unordered_set<std::string> seen_trigrams;
    for (std::size_t i : rank_by_score(scores)) {
        if (selected.size() >= k) break;
        const auto grams = sentence_trigrams(doc.sentences[i]);
        if (trigram_blocking) {
            const bool blocked = std::any_of(grams.begin(), grams.end(), [&](const std::string& g) {
                return seen_trigrams.count(g) > 0;
            });
            if (blocked) continue;
        }
        selected.push_back(i);
        if (trigram_blocking)
            for (auto& g : grams) seen_trigrams.insert(std::move(g));
    }
    std::sort(selected.begin(), selected.end());
    return make_candidate(doc, std::move(selected));
}

}  // namespace matchlab
