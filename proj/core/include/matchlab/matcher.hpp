#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlab/corpus.hpp"
#include "matchlab/features.hpp"
#include "matchlab/scoring.hpp"

namespace matchlab {

struct LossConfig {
    double gamma1 = 0.0;
    double gamma2 = 0.01;

    void validate() const;
};

struct TrainConfig {
    std::size_t warmup = 10000;
    double peak = 2e-3;  // coefficient of min(step^-0.5, step * wm^-1.5)
    std::size_t batch_size = 32;
    std::size_t max_steps = 0;
    uint64_t seed = 0;
    // When > 0 and a validation set is given, validation loss is evaluated
    // every eval_every steps and the best weights win.
    std::size_t eval_every = 0;
    std::size_t jobs = 1;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    uint64_t step = 0;
};

// Siamese matcher: one trainable projection W (embed_dim x feature_dim,
// row-major) shared by the document and summary branches, scored by cosine.
struct MatcherModel {
    EmbedderConfig config;
    uint64_t seed = 0;
    std::vector<double> w;
    AdamState opt;

    double& at(std::size_t row, std::size_t col) { return w[row * config.feature_dim + col]; }
    double at(std::size_t row, std::size_t col) const { return w[row * config.feature_dim + col]; }
};

// Seeded uniform init in +-sqrt(6 / (feature_dim + embed_dim)).
MatcherModel init_model(const EmbedderConfig& config, uint64_t seed);

std::vector<double> embed(const FeatureVector& features, const MatcherModel& model);
std::vector<double> embed(TokenView tokens, const MatcherModel& model);

// f(D, C): cosine of the two embeddings; 0 when either norm is ~0.
double score(TokenView doc_tokens, TokenView cand_tokens, const MatcherModel& model);

struct LossParts {
    double total = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

// One document's training instance: featurized document, gold summary, and
// candidates ranked by mean-F1 ROUGE against the gold, descending (ties keep
// candidate order).
struct TrainingExample {
    std::string id;
    FeatureVector doc;
    FeatureVector gold;
    std::vector<FeatureVector> candidates;
};

TrainingExample make_example(const Document& doc, std::span<const CandidateSummary> candidates,
                             const EmbedderConfig& config);

// Hinge for one ranked candidate pair at 1-based ranks i < j (gap = j - i):
// max(0, f_j - f_i + gap * gamma2).
double pair_hinge(double f_i, double f_j, std::size_t gap, double gamma2);

// Margin triplet loss from raw matching scores. f_candidates must already be
// in rank order (best ROUGE first). L1 averages the gold-margin hinges over
// candidates; L2 averages pair_hinge over all rank pairs.
LossParts loss_from_scores(double f_gold, std::span<const double> f_candidates,
                           const LossConfig& config);

LossParts loss(TokenView doc_tokens, TokenView gold_tokens,
               std::span<const TokenList> ranked_candidates, const MatcherModel& model,
               const LossConfig& config);
LossParts loss(const TrainingExample& example, const MatcherModel& model, const LossConfig& config);

// Analytic d loss / d W (same layout as model.w). Hinge subgradient at the
// kink is 0. When `parts` is non-null the loss values are stored there.
std::vector<double> loss_gradient(const TrainingExample& example, const MatcherModel& model,
                                  const LossConfig& config, LossParts* parts = nullptr);

// lr = peak * min(step^-0.5, step * warmup^-1.5); step counting starts at 1.
double lr_at(std::size_t step, const TrainConfig& config);

struct StepLoss {
    std::size_t step = 0;
    double total = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

struct TrainResult {
    MatcherModel model;
    std::vector<StepLoss> history;
    std::optional<double> best_validation_loss;
    std::optional<std::size_t> best_validation_step;
};

TrainResult train(std::span<const TrainingExample> examples, const EmbedderConfig& embedder,
                  const LossConfig& loss_config, const TrainConfig& train_config,
                  std::span<const TrainingExample> validation = {});

// Argmax of f(D, C) over the candidate list; ties keep the earliest.
std::size_t select_summary(const FeatureVector& doc, std::span<const FeatureVector> candidates,
                           const MatcherModel& model);
std::size_t select_summary(const Document& doc, std::span<const CandidateSummary> candidates,
                           const MatcherModel& model);

// Versioned binary container; save/load round-trips are bit-exact.
void save_checkpoint(const MatcherModel& model, const std::string& path);
MatcherModel load_checkpoint(const std::string& path);

}  // namespace matchlab
