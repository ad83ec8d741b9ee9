#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "matchlab/rouge.hpp"

namespace matchlab {

// Configuration of the hashed bag-of-ngrams text embedder. Unigrams and
// bigrams are hashed into feature_dim buckets with a signed-hash convention;
// the trainable projection maps them to embed_dim.
struct EmbedderConfig {
    std::size_t feature_dim = 4096;
    std::size_t embed_dim = 128;
    uint64_t hash_seed = 0;
};

// Sparse L2-normalized feature vector: (bucket, value) pairs sorted by
// bucket, unique buckets only. Empty input text gives an empty vector.
struct FeatureVector {
    std::vector<std::pair<uint32_t, double>> entries;

    bool zero() const { return entries.empty(); }
};

FeatureVector featurize(TokenView tokens, const EmbedderConfig& config);

double sparse_dot(const FeatureVector& a, const FeatureVector& b);
double sparse_cosine(const FeatureVector& a, const FeatureVector& b);

}  // namespace matchlab
