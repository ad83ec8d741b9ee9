#include "matchlab/pipeline.hpp"

#include <algorithm>
#include <unordered_map>

#include "matchlab/util.hpp"

namespace matchlab {

AnalyzeResult analyze_corpus(std::span<const Document> docs, const AnalyzeOptions& opts) {
    if (docs.empty()) throw ValidationError("analyze: corpus is empty");
    AnalyzeResult result;
    result.records.resize(docs.size());
    result.diagnoses.resize(docs.size());
    parallel_for(docs.size(), opts.jobs, [&](std::size_t i) {
        const auto cands = analysis_candidates(docs[i], opts.ext);
        const auto scored = score_candidates(docs[i], cands);
        const auto diag = diagnose(scored);
        result.records[i] = inherent_gap(docs[i].id, scored, diag);
        result.diagnoses[i] = diag;
    });

    DatasetReport& report = result.report;
    report.num_docs = docs.size();
    report.buckets = opts.buckets;
    report.z_histogram = z_distribution(result.diagnoses, opts.buckets);
    std::size_t z1 = 0;
    double delta_sum = 0.0;
    double delta_alt_sum = 0.0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (result.diagnoses[i].z == 1) ++z1;
        if (result.diagnoses[i].had_score_ties) ++report.docs_with_score_ties;
        delta_sum += result.records[i].delta;
        delta_alt_sum += result.records[i].delta_alt;
    }
    report.z1_fraction = static_cast<double>(z1) / static_cast<double>(docs.size());
    report.mean_delta = delta_sum / static_cast<double>(docs.size());
    report.mean_delta_alt = delta_alt_sum / static_cast<double>(docs.size());
    report.records = result.records;
    return result;
}

std::vector<DocumentCandidates> generate_for_corpus(std::span<const Document> docs,
                                                    const GenerationOptions& opts) {
    opts.config.validate();
    std::vector<DocumentCandidates> out(docs.size());
    parallel_for(docs.size(), opts.jobs, [&](std::size_t i) {
        DocumentCandidates& dc = out[i];
        dc.doc = &docs[i];
        dc.scores = score_sentences(docs[i], opts.selector);
        const auto pruned = prune(docs[i], dc.scores, opts.config.ext);
        dc.candidates = generate_candidates(pruned, opts.config.sel);
    });
    return out;
}

std::vector<TrainingExample> build_examples(std::span<const Document> docs,
                                            const GenerationOptions& opts,
                                            const EmbedderConfig& embedder) {
    const auto generated = generate_for_corpus(docs, opts);
    std::vector<TrainingExample> examples;
    examples.reserve(docs.size());
    std::size_t skipped = 0;
    for (const auto& dc : generated) {
        if (dc.candidates.empty()) {
            ++skipped;
            log_warn("document " + dc.doc->id + ": no candidates, skipping for training");
            continue;
        }
        examples.push_back(make_example(*dc.doc, dc.candidates, embedder));
    }
    if (skipped > 0)
        log_info(std::to_string(skipped) + " documents skipped (no candidates)");
    return examples;
}

Selection make_selection(const Document& doc, const CandidateSummary& cand) {
    Selection sel;
    sel.doc_id = doc.id;
    sel.indices = cand.indices;
    for (std::size_t k = 0; k < cand.indices.size(); ++k) {
        if (k != 0) sel.summary_text += ' ';
        sel.summary_text += doc.sentences[cand.indices[k]].raw;
    }
    return sel;
}

std::vector<Selection> select_for_corpus(std::span<const Document> docs,
                                         const GenerationOptions& opts, const MatcherModel& model) {
    const auto generated = generate_for_corpus(docs, opts);
    std::vector<Selection> selections(docs.size());
    parallel_for(docs.size(), opts.jobs, [&](std::size_t i) {
        const auto& dc = generated[i];
        if (dc.candidates.empty())
            throw ValidationError("document " + dc.doc->id + ": no candidates to select from");
        const std::size_t chosen = select_summary(*dc.doc, dc.candidates, model);
        selections[i] = make_selection(*dc.doc, dc.candidates[chosen]);
    });
    return selections;
}

CompareResult compare_corpus(std::span<const Document> docs, const CompareOptions& opts,
                             const MatcherModel& model) {
    if (docs.empty()) throw ValidationError("compare: corpus is empty");
    const auto generated = generate_for_corpus(docs, opts.generation);

    CompareResult result;
    result.matcher_picks.resize(docs.size());
    result.extractor_picks.resize(docs.size());
    std::vector<GapRecord> records(docs.size());
    std::vector<DocumentDiagnosis> diagnoses(docs.size());
    std::vector<DocGain> gains(docs.size());

    parallel_for(docs.size(), opts.generation.jobs, [&](std::size_t i) {
        const auto& dc = generated[i];
        const Document& doc = docs[i];
        if (dc.candidates.empty())
            throw ValidationError("document " + doc.id + ": no candidates to compare");
        const auto scored = score_candidates(doc, dc.candidates);
        const auto diag = diagnose(scored);
        diagnoses[i] = diag;

        const std::size_t chosen = select_summary(doc, dc.candidates, model);
        const CandidateSummary& matcher_pick = dc.candidates[chosen];
        const CandidateSummary extractor_pick =
            topk_extract(doc, dc.scores, opts.extract_k, opts.trigram_blocking);

        GapRecord record = inherent_gap(doc.id, scored, diag);
        record.delta_star = realized_gain(doc, matcher_pick, extractor_pick);
        records[i] = record;

        const TokenList gold = flatten_gold(doc);
        const RougeTriple matcher_rouge = mean_rouge(matcher_pick.tokens, gold);
        const RougeTriple extractor_rouge = mean_rouge(extractor_pick.tokens, gold);
        gains[i] = DocGain{doc.id,
                           diag.z,
                           *record.delta_star,
                           matcher_rouge.r1.f1 - extractor_rouge.r1.f1,
                           matcher_rouge.r2.f1 - extractor_rouge.r2.f1,
                           matcher_rouge.rl.f1 - extractor_rouge.rl.f1};

        result.matcher_picks[i] = make_selection(doc, matcher_pick);
        result.extractor_picks[i] = make_selection(doc, extractor_pick);
    });

    DatasetReport& report = result.report;
    report.num_docs = docs.size();
    report.buckets = opts.buckets;
    report.z_histogram = z_distribution(diagnoses, opts.buckets);
    std::size_t z1 = 0;
    double delta_sum = 0.0;
    double delta_alt_sum = 0.0;
    double star_sum = 0.0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (diagnoses[i].z == 1) ++z1;
        if (diagnoses[i].had_score_ties) ++report.docs_with_score_ties;
        delta_sum += records[i].delta;
        delta_alt_sum += records[i].delta_alt;
        star_sum += *records[i].delta_star;
    }
    const auto n = static_cast<double>(docs.size());
    report.z1_fraction = static_cast<double>(z1) / n;
    report.mean_delta = delta_sum / n;
    report.mean_delta_alt = delta_alt_sum / n;
    report.mean_delta_star = star_sum / n;
    report.records = records;
    report.psi = psi(report.records);
    report.extractor_label = selector_name(opts.generation.selector.kind) +
                             (opts.trigram_blocking ? "+blocking" : "") +
                             " top-" + std::to_string(opts.extract_k);
    report.quintiles = z_split_compare(gains, &report.quintiles_small_sample);
    return result;
}

std::vector<EvalRow> evaluate_selections(std::span<const Document> docs,
                                         const std::vector<Selection>& selections,
                                         const EvaluateOptions& opts) {
    if (selections.empty()) throw ValidationError("evaluate: no selections given");
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& doc : docs) by_id[doc.id] = &doc;

    std::string missing;
    for (const auto& sel : selections) {
        if (by_id.count(sel.doc_id) == 0) missing += (missing.empty() ? "" : ", ") + sel.doc_id;
    }
    if (!missing.empty())
        throw ValidationError("selections reference unknown document ids: " + missing);

    auto mean_row = [&](const std::string& name, auto&& pick) {
        EvalRow row{name, 0.0, 0.0, 0.0};
        for (const auto& sel : selections) {
            const Document& doc = *by_id.at(sel.doc_id);
            const CandidateSummary cand = pick(doc, sel);
            const RougeTriple triple = mean_rouge(cand.tokens, flatten_gold(doc));
            row.r1 += triple.r1.f1;
            row.r2 += triple.r2.f1;
            row.rl += triple.rl.f1;
        }
        const auto n = static_cast<double>(selections.size());
        row.r1 /= n;
        row.r2 /= n;
        row.rl /= n;
        return row;
    };

    std::vector<EvalRow> rows;
    rows.push_back(mean_row("selected", [](const Document& doc, const Selection& sel) {
        for (std::size_t k = 0; k + 1 < sel.indices.size(); ++k)
            if (sel.indices[k] >= sel.indices[k + 1])
                throw ValidationError("selection for " + doc.id + " has non-ascending indices");
        for (std::size_t idx : sel.indices)
            if (idx >= doc.sentences.size())
                throw ValidationError("selection for " + doc.id + " has out-of-range index " +
                                      std::to_string(idx));
        return make_candidate(doc, sel.indices);
    }));
    if (opts.baselines) {
        rows.push_back(mean_row("lead", [&](const Document& doc, const Selection&) {
            return lead(doc, opts.lead_k);
        }));
        rows.push_back(mean_row("oracle", [&](const Document& doc, const Selection&) {
            return greedy_oracle(doc, opts.lead_k);
        }));
        rows.push_back(mean_row("match-oracle", [&](const Document& doc, const Selection&) {
            const auto scores = score_sentences(doc, opts.generation.selector);
            const auto pruned = prune(doc, scores, opts.generation.config.ext);
            const auto cands = generate_candidates(pruned, opts.generation.config.sel);
            if (cands.empty())
                throw ValidationError("document " + doc.id + ": no candidates for match-oracle");
            const auto scored = score_candidates(doc, cands);
            return scored[best_summary(scored)].candidate;
        }));
    }
    return rows;
}

}  // namespace matchlab
