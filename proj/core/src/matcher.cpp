#include "matchlab/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "matchlab/rouge.hpp"
#include "matchlab/util.hpp"

namespace matchlab {

namespace {
constexpr double kNormFloor = 1e-12;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

void LossConfig::validate() const {
    if (gamma1 < 0.0 || gamma2 < 0.0) throw ValidationError("loss margins must be nonnegative");
}

MatcherModel init_model(const EmbedderConfig& config, uint64_t seed) {
    if (config.feature_dim == 0 || config.embed_dim == 0)
        throw ValidationError("embedder dims must be >= 1");
    MatcherModel model;
    model.config = config;
    model.seed = seed;
    const std::size_t size = config.feature_dim * config.embed_dim;
    model.w.resize(size);
    const double bound =
        std::sqrt(6.0 / static_cast<double>(config.feature_dim + config.embed_dim));
    SplitMix64 rng(seed);
    for (auto& w : model.w) w = (2.0 * rng.next_double() - 1.0) * bound;
    model.opt.m.assign(size, 0.0);
    model.opt.v.assign(size, 0.0);
    model.opt.step = 0;
    return model;
}

std::vector<double> embed(const FeatureVector& features, const MatcherModel& model) {
    const std::size_t e_dim = model.config.embed_dim;
    const std::size_t f_dim = model.config.feature_dim;
    std::vector<double> r(e_dim, 0.0);
    for (std::size_t row = 0; row < e_dim; ++row) {
        const double* w_row = model.w.data() + row * f_dim;
        double acc = 0.0;
        for (const auto& [bucket, value] : features.entries) acc += w_row[bucket] * value;
        r[row] = acc;
    }
    return r;
}

std::vector<double> embed(TokenView tokens, const MatcherModel& model) {
    return embed(featurize(tokens, model.config), model);
}

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na < kNormFloor || nb < kNormFloor) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot / (na * nb);
}

}  // namespace

double score(TokenView doc_tokens, TokenView cand_tokens, const MatcherModel& model) {
    return cosine(embed(doc_tokens, model), embed(cand_tokens, model));
}

TrainingExample make_example(const Document& doc, std::span<const CandidateSummary> candidates,
                             const EmbedderConfig& config) {
    TrainingExample example;
    example.id = doc.id;
    example.doc = featurize(flatten_sentences(doc.sentences), config);
    const TokenList gold = flatten_gold(doc);
    example.gold = featurize(gold, config);

    std::vector<double> rouge_scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        rouge_scores[i] = mean_rouge(candidates[i].tokens, gold).mean_f1;
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rouge_scores[a] > rouge_scores[b]; });
    example.candidates.reserve(candidates.size());
    for (std::size_t i : order) example.candidates.push_back(featurize(candidates[i].tokens, config));
    return example;
}

double pair_hinge(double f_i, double f_j, std::size_t gap, double gamma2) {
    return std::max(0.0, f_j - f_i + static_cast<double>(gap) * gamma2);
}

LossParts loss_from_scores(double f_gold, std::span<const double> f_candidates,
                           const LossConfig& config) {
    LossParts parts;
    const std::size_t m = f_candidates.size();
    if (m == 0) return parts;
    for (double f : f_candidates) parts.l1 += std::max(0.0, f - f_gold + config.gamma1);
    parts.l1 /= static_cast<double>(m);
    if (m < 2) {
        log_warn("loss: fewer than two candidates, pairwise term is 0");
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                sum += pair_hinge(f_candidates[i], f_candidates[j], j - i, config.gamma2);
        parts.l2 = sum / (static_cast<double>(m) * static_cast<double>(m - 1) / 2.0);
    }
    parts.total = parts.l1 + parts.l2;
    return parts;
}

LossParts loss(const TrainingExample& example, const MatcherModel& model, const LossConfig& config) {
    const auto doc_embedding = embed(example.doc, model);
    const auto gold_embedding = embed(example.gold, model);
    const double f_gold = cosine(doc_embedding, gold_embedding);
    std::vector<double> f(example.candidates.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = cosine(doc_embedding, embed(example.candidates[i], model));
    return loss_from_scores(f_gold, f, config);
}

LossParts loss(TokenView doc_tokens, TokenView gold_tokens,
               std::span<const TokenList> ranked_candidates, const MatcherModel& model,
               const LossConfig& config) {
    TrainingExample example;
    example.doc = featurize(doc_tokens, model.config);
    example.gold = featurize(gold_tokens, model.config);
    example.candidates.reserve(ranked_candidates.size());
    for (const auto& cand : ranked_candidates)
        example.candidates.push_back(featurize(cand, model.config));
    return loss(example, model, config);
}

namespace {

// d cosine(u, w) / du = w/(|u||w|) - cos * u/|u|^2, and symmetrically for w.
struct CosineGrad {
    double value = 0.0;
    bool degenerate = false;  // either embedding ~0: value and gradient are 0
};

CosineGrad cosine_with_grad(const std::vector<double>& u, const std::vector<double>& w,
                            double nu, double nw) {
    CosineGrad out;
    if (nu < kNormFloor || nw < kNormFloor) {
        out.degenerate = true;
        return out;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * w[i];
    out.value = dot / (nu * nw);
    return out;
}

void add_outer(std::vector<double>& grad, const std::vector<double>& e, const FeatureVector& x,
               std::size_t f_dim) {
    for (std::size_t row = 0; row < e.size(); ++row) {
        if (e[row] == 0.0) continue;
        double* g_row = grad.data() + row * f_dim;
        for (const auto& [bucket, value] : x.entries) g_row[bucket] += e[row] * value;
    }
}

}  // namespace

std::vector<double> loss_gradient(const TrainingExample& example, const MatcherModel& model,
                                  const LossConfig& config, LossParts* parts_out) {
    const std::size_t e_dim = model.config.embed_dim;
    const std::size_t f_dim = model.config.feature_dim;
    std::vector<double> grad(e_dim * f_dim, 0.0);

    const auto u = embed(example.doc, model);
    const double nu = norm(u);
    const std::size_t m = example.candidates.size();

    // texts[0] = gold, texts[1..m] = ranked candidates
    std::vector<std::vector<double>> embeddings;
    embeddings.reserve(m + 1);
    embeddings.push_back(embed(example.gold, model));
    for (const auto& cand : example.candidates) embeddings.push_back(embed(cand, model));

    std::vector<double> norms(m + 1);
    std::vector<CosineGrad> cos(m + 1);
    for (std::size_t t = 0; t <= m; ++t) {
        norms[t] = norm(embeddings[t]);
        cos[t] = cosine_with_grad(u, embeddings[t], nu, norms[t]);
    }

    const double f_gold = cos[0].value;
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = cos[i + 1].value;
    const LossParts parts = loss_from_scores(f_gold, f, config);
    if (parts_out) *parts_out = parts;
    if (m == 0) return grad;

    // Coefficient of each f term in the total loss; hinge at the kink
    // contributes 0.
    std::vector<double> coef(m + 1, 0.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (f[i] - f_gold + config.gamma1 > 0.0) {
            coef[i + 1] += inv_m;
            coef[0] -= inv_m;
        }
    }
    if (m >= 2) {
        const double inv_pairs = 2.0 / (static_cast<double>(m) * static_cast<double>(m - 1));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                if (f[j] - f[i] + static_cast<double>(j - i) * config.gamma2 > 0.0) {
                    coef[j + 1] += inv_pairs;
                    coef[i + 1] -= inv_pairs;
                }
            }
        }
    }

    std::vector<double> doc_side(e_dim, 0.0);
    std::vector<double> text_side(e_dim, 0.0);
    for (std::size_t t = 0; t <= m; ++t) {
        if (coef[t] == 0.0 || cos[t].degenerate) continue;
        const auto& w_t = embeddings[t];
        const double inv_ab = 1.0 / (nu * norms[t]);
        const double c = cos[t].value;
        for (std::size_t row = 0; row < e_dim; ++row)
            doc_side[row] += coef[t] * (w_t[row] * inv_ab - c * u[row] / (nu * nu));
        for (std::size_t row = 0; row < e_dim; ++row)
            text_side[row] = coef[t] * (u[row] * inv_ab - c * w_t[row] / (norms[t] * norms[t]));
        add_outer(grad, text_side, t == 0 ? example.gold : example.candidates[t - 1], f_dim);
    }
    add_outer(grad, doc_side, example.doc, f_dim);
    return grad;
}

double lr_at(std::size_t step, const TrainConfig& config) {
    if (step == 0) throw std::invalid_argument("lr_at: step counting starts at 1");
    if (config.warmup == 0) throw ValidationError("warmup must be >= 1");
    const double s = static_cast<double>(step);
    const double wm = static_cast<double>(config.warmup);
    return config.peak * std::min(1.0 / std::sqrt(s), s / (wm * std::sqrt(wm)));
}

namespace {

void shuffle_indices(std::vector<std::size_t>& indices, SplitMix64& rng) {
    for (std::size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[rng.next() % i]);
}

double validation_loss(std::span<const TrainingExample> validation, const MatcherModel& model,
                       const LossConfig& config) {
    double total = 0.0;
    for (const auto& example : validation) total += loss(example, model, config).total;
    return total / static_cast<double>(validation.size());
}

}  // namespace

TrainResult train(std::span<const TrainingExample> examples, const EmbedderConfig& embedder,
                  const LossConfig& loss_config, const TrainConfig& train_config,
                  std::span<const TrainingExample> validation) {
    loss_config.validate();
    if (train_config.warmup == 0) throw ValidationError("warmup must be >= 1");
    if (train_config.batch_size == 0) throw ValidationError("batch size must be >= 1");
    if (examples.empty()) throw ValidationError("train: no usable training examples");

    TrainResult result;
    result.model = init_model(embedder, train_config.seed);
    MatcherModel& model = result.model;
    const std::size_t w_size = model.w.size();

    const std::size_t jobs = std::max<std::size_t>(1, train_config.jobs);
    SplitMix64 shuffle_rng(train_config.seed + 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();  // forces a shuffle before the first batch

    // Gradients are accumulated per fixed-size chunk and reduced in chunk
    // order, so the summation tree does not depend on the worker count.
    constexpr std::size_t kChunk = 8;
    const std::size_t max_chunks = (train_config.batch_size + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> chunk_grads(max_chunks, std::vector<double>(w_size, 0.0));
    std::vector<LossParts> chunk_parts(max_chunks);
    std::vector<double> grad(w_size, 0.0);

    std::optional<MatcherModel> best_model;

    for (std::size_t step = 1; step <= train_config.max_steps; ++step) {
        if (cursor >= order.size()) {
            shuffle_indices(order, shuffle_rng);
            cursor = 0;
        }
        const std::size_t take = std::min(train_config.batch_size, order.size() - cursor);
        const std::size_t* batch = order.data() + cursor;
        cursor += take;

        const std::size_t chunks = (take + kChunk - 1) / kChunk;
        for (std::size_t c = 0; c < chunks; ++c) {
            std::fill(chunk_grads[c].begin(), chunk_grads[c].end(), 0.0);
            chunk_parts[c] = {};
        }
        parallel_for(chunks, jobs, [&](std::size_t c) {
            const std::size_t lo = c * kChunk;
            const std::size_t hi = std::min(take, lo + kChunk);
            for (std::size_t b = lo; b < hi; ++b) {
                LossParts parts;
                const auto g = loss_gradient(examples[batch[b]], model, loss_config, &parts);
                for (std::size_t i = 0; i < w_size; ++i) chunk_grads[c][i] += g[i];
                chunk_parts[c].total += parts.total;
                chunk_parts[c].l1 += parts.l1;
                chunk_parts[c].l2 += parts.l2;
            }
        });

        std::fill(grad.begin(), grad.end(), 0.0);
        LossParts batch_parts;
        for (std::size_t c = 0; c < chunks; ++c) {
            for (std::size_t i = 0; i < w_size; ++i) grad[i] += chunk_grads[c][i];
            batch_parts.total += chunk_parts[c].total;
            batch_parts.l1 += chunk_parts[c].l1;
            batch_parts.l2 += chunk_parts[c].l2;
        }
        const double inv_take = 1.0 / static_cast<double>(take);
        for (auto& g : grad) g *= inv_take;
        batch_parts.total *= inv_take;
        batch_parts.l1 *= inv_take;
        batch_parts.l2 *= inv_take;

        if (!std::isfinite(batch_parts.total))
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                                     " (L=" + std::to_string(batch_parts.total) + ")");

        model.opt.step += 1;
        const double lr = lr_at(model.opt.step, train_config);
        const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(model.opt.step));
        const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(model.opt.step));
        for (std::size_t i = 0; i < w_size; ++i) {
            const double g = grad[i];
            model.opt.m[i] = kBeta1 * model.opt.m[i] + (1.0 - kBeta1) * g;
            model.opt.v[i] = kBeta2 * model.opt.v[i] + (1.0 - kBeta2) * g * g;
            const double m_hat = model.opt.m[i] / bias1;
            const double v_hat = model.opt.v[i] / bias2;
            model.w[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }

        result.history.push_back({step, batch_parts.total, batch_parts.l1, batch_parts.l2});

        if (!validation.empty() && train_config.eval_every > 0 &&
            step % train_config.eval_every == 0) {
            const double val = validation_loss(validation, model, loss_config);
            if (!result.best_validation_loss || val < *result.best_validation_loss) {
                result.best_validation_loss = val;
                result.best_validation_step = step;
                best_model = model;
            }
        }
    }

    if (best_model) result.model = std::move(*best_model);
    return result;
}

std::size_t select_summary(const FeatureVector& doc, std::span<const FeatureVector> candidates,
                           const MatcherModel& model) {
    if (candidates.empty()) throw ValidationError("select_summary: empty candidate list");
    const auto doc_embedding = embed(doc, model);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double f = cosine(doc_embedding, embed(candidates[i], model));
        if (f > best_score) {
            best_score = f;
            best = i;
        }
    }
    return best;
}

std::size_t select_summary(const Document& doc, std::span<const CandidateSummary> candidates,
                           const MatcherModel& model) {
    std::vector<FeatureVector> features;
    features.reserve(candidates.size());
    for (const auto& cand : candidates) features.push_back(featurize(cand.tokens, model.config));
    return select_summary(featurize(flatten_sentences(doc.sentences), model.config), features, model);
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'C', 'P'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}
void put_u64(std::ostream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}
uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_checkpoint(const MatcherModel& model, const std::string& path) {
    if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, model.config.feature_dim);
    put_u64(out, model.config.embed_dim);
    put_u64(out, model.config.hash_seed);
    put_u64(out, model.seed);
    put_u64(out, model.opt.step);
    for (double v : model.w) put_f64(out, v);
    for (double v : model.opt.m) put_f64(out, v);
    for (double v : model.opt.v) put_f64(out, v);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

MatcherModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ValidationError("not a matcher checkpoint: " + path);
    const uint32_t version = get_u32(in);
    if (version != kVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    MatcherModel model;
    model.config.feature_dim = get_u64(in);
    model.config.embed_dim = get_u64(in);
    model.config.hash_seed = get_u64(in);
    model.seed = get_u64(in);
    model.opt.step = get_u64(in);
    const std::size_t size = model.config.feature_dim * model.config.embed_dim;
    model.w.resize(size);
    model.opt.m.resize(size);
    model.opt.v.resize(size);
    for (auto& v : model.w) v = get_f64(in);
    for (auto& v : model.opt.m) v = get_f64(in);
    for (auto& v : model.opt.v) v = get_f64(in);
    if (!in) throw ValidationError("truncated checkpoint: " + path);
    return model;
}

}  // namespace matchlab
