#include "matchlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "matchlab/util.hpp"

namespace matchlab {

FeatureVector featurize(TokenView tokens, const EmbedderConfig& config) {
    FeatureVector out;
    if (tokens.empty() || config.feature_dim == 0) return out;

    // std::map keeps buckets ordered, so accumulation and normalization sum
    // in a fixed order regardless of token order hash churn.
    std::map<uint32_t, double> accum;
    auto add = [&](uint64_t h) {
        const uint32_t bucket = static_cast<uint32_t>(h % config.feature_dim);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        accum[bucket] += sign;
    };
    for (const auto& tok : tokens) add(fnv1a64(tok, config.hash_seed));
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        add(fnv1a64(tokens[i] + '\x1f' + tokens[i + 1], config.hash_seed));

    double norm_sq = 0.0;
    for (const auto& [bucket, value] : accum) norm_sq += value * value;
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
        // Signed counts can cancel exactly; treat as a zero vector.
        return out;
    }
    out.entries.reserve(accum.size());
    for (const auto& [bucket, value] : accum) {
        if (value != 0.0) out.entries.emplace_back(bucket, value / norm);
    }
    return out;
}

double sparse_dot(const FeatureVector& a, const FeatureVector& b) {
    double dot = 0.0;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first == ib->first) {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        } else if (ia->first < ib->first) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return dot;
}

double sparse_cosine(const FeatureVector& a, const FeatureVector& b) {
    if (a.zero() || b.zero()) return 0.0;
    // featurize output is unit length already
    return sparse_dot(a, b);
}

}  // namespace matchlab
