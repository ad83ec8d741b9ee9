// matchlab: extractive summarization as semantic matching.
// Subcommands mirror the pipeline stages: rouge, analyze, candidates, train,
// select, compare, report.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchlab/analysis.hpp"
#include "matchlab/candidates.hpp"
#include "matchlab/corpus.hpp"
#include "matchlab/matcher.hpp"
#include "matchlab/pipeline.hpp"
#include "matchlab/util.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace matchlab;

namespace {

struct CorpusFlags {
    std::string input;
    std::size_t limit = 0;
    bool strict = false;
    bool stem = false;
    std::size_t max_tokens = 512;

    void attach(CLI::App* cmd) {
        cmd->add_option("--input", input, "input corpus (JSONL)")->required();
        cmd->add_option("--limit", limit, "read at most N records (0 = all)");
        cmd->add_flag("--strict", strict, "malformed lines are fatal");
        cmd->add_flag("--stem", stem, "Porter-stem tokens");
        cmd->add_option("--max-tokens", max_tokens, "document token budget (0 = unlimited)")
            ->default_val(512);
    }
    CorpusOptions options() const {
        CorpusOptions opts;
        if (limit > 0) opts.limit = limit;
        opts.strict = strict;
        opts.tokenizer.stem = stem;
        opts.max_tokens = max_tokens;
        return opts;
    }
    Corpus load() const {
        Corpus corpus = load_corpus(input, options());
        log_info("loaded " + std::to_string(corpus.stats.num_docs) + " documents (" +
                 std::to_string(corpus.stats.dropped_empty) + " dropped empty, " +
                 std::to_string(corpus.stats.malformed_lines) + " malformed lines)");
        if (corpus.documents.empty()) throw ValidationError("no usable documents in " + input);
        return corpus;
    }
    void echo(ordered_json& j) const {
        j["input"] = input;
        j["limit"] = limit;
        j["strict"] = strict;
        j["stem"] = stem;
        j["max_tokens"] = max_tokens;
    }
};

struct GenFlags {
    std::size_t ext = 5;
    std::string sel = "2,3";
    std::string selector = "oracle";

    void attach(CLI::App* cmd) {
        cmd->add_option("--ext", ext, "sentences kept after pruning")->default_val(5);
        cmd->add_option("--sel", sel, "comma list of candidate sizes")->default_val("2,3");
        cmd->add_option("--selector", selector, "content selector")
            ->check(CLI::IsMember({"oracle", "centroid", "external"}))
            ->default_val("oracle");
    }
    std::vector<std::size_t> sel_values() const {
        std::vector<std::size_t> values;
        std::stringstream ss(sel);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
            if (piece.empty()) continue;
            try {
                const long v = std::stol(piece);
                if (v < 1) throw std::out_of_range("");
                values.push_back(static_cast<std::size_t>(v));
            } catch (const std::exception&) {
                throw ValidationError("--sel: bad size \"" + piece + "\"");
            }
        }
        if (values.empty()) throw ValidationError("--sel: no sizes given");
        return values;
    }
    GenerationOptions options(std::size_t jobs) const {
        GenerationOptions opts;
        opts.selector.kind = selector_from_name(selector);
        opts.config.ext = ext;
        opts.config.sel = sel_values();
        opts.jobs = jobs;
        return opts;
    }
    void echo(ordered_json& j) const {
        j["ext"] = ext;
        j["sel"] = sel;
        j["selector"] = selector;
    }
};

void write_config_lock(const fs::path& dir, const ordered_json& resolved) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.lock.json", std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + (dir / "config.lock.json").string());
    out << resolved.dump(2) << "\n";
}

std::ofstream open_output(const std::string& path) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write output file: " + path);
    return out;
}

TokenList read_text_file_tokens(const std::string& path, bool stem) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open text file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    TokenizerOptions opts;
    opts.stem = stem;
    return tokenize(buffer.str(), opts);
}

ordered_json selection_to_json(const Selection& sel) {
    ordered_json j;
    j["id"] = sel.doc_id;
    j["selected_indices"] = sel.indices;
    j["summary_text"] = sel.summary_text;
    return j;
}

void write_selections(const std::vector<Selection>& selections, std::ostream& out) {
    for (const auto& sel : selections) out << selection_to_json(sel).dump() << "\n";
}

// --- subcommand: rouge -------------------------------------------------------

int run_rouge(const std::string& cand_path, const std::string& ref_path, bool stem) {
    const TokenList cand = read_text_file_tokens(cand_path, stem);
    const TokenList ref = read_text_file_tokens(ref_path, stem);
    const RougeTriple triple = mean_rouge(cand, ref);
    ordered_json j;
    auto put = [&](const char* name, const RougeScore& s) {
        j[name] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    };
    put("rouge1", triple.r1);
    put("rouge2", triple.r2);
    put("rougeL", triple.rl);
    j["mean_f1"] = triple.mean_f1;
    std::cout << j.dump(2) << "\n";
    return 0;
}

// --- subcommand: analyze -----------------------------------------------------

int run_analyze(const CorpusFlags& corpus_flags, std::size_t ext, std::size_t buckets,
                const std::string& out_dir, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();
    AnalyzeOptions opts;
    opts.ext = ext;
    opts.buckets = buckets;
    opts.jobs = jobs;
    const auto result = analyze_corpus(corpus.documents, opts);
    emit_report(result.report, out_dir);

    ordered_json lock;
    lock["subcommand"] = "analyze";
    corpus_flags.echo(lock);
    lock["ext"] = ext;
    lock["buckets"] = buckets;
    lock["out"] = out_dir;
    write_config_lock(out_dir, lock);

    std::cerr << "analyze: " << corpus.documents.size() << " documents, mean delta "
              << format_double(result.report.mean_delta * 100.0) << " points, z=1 fraction "
              << format_double(result.report.z1_fraction) << "\n";
    return 0;
}

// --- subcommand: candidates --------------------------------------------------

int run_candidates(const CorpusFlags& corpus_flags, const GenFlags& gen, std::size_t topk,
                   bool blocking, const std::string& out_path, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();
    const auto generated = generate_for_corpus(corpus.documents, gen.options(jobs));

    std::ostringstream body;
    for (const auto& dc : generated) {
        ordered_json j;
        j["id"] = dc.doc->id;
        auto& cands = j["candidates"] = ordered_json::array();
        for (const auto& c : dc.candidates) cands.push_back(c.indices);
        j["scores"] = dc.scores;
        if (topk > 0) {
            const auto extracted = topk_extract(*dc.doc, dc.scores, topk, blocking);
            j["topk"] = extracted.indices;
        }
        body << j.dump() << "\n";
    }

    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        auto out = open_output(out_path);
        out << body.str();
        ordered_json lock;
        lock["subcommand"] = "candidates";
        corpus_flags.echo(lock);
        gen.echo(lock);
        lock["k"] = topk;
        lock["blocking"] = blocking;
        lock["out"] = out_path;
        write_config_lock(fs::path(out_path).parent_path(), lock);
    }
    return 0;
}

// --- subcommand: train -------------------------------------------------------

int run_train(const CorpusFlags& corpus_flags, const GenFlags& gen, const std::string& val_input,
              double gamma1, double gamma2, std::size_t warmup, std::size_t batch,
              std::size_t steps, std::size_t eval_every, std::size_t feature_dim,
              std::size_t embed_dim, uint64_t hash_seed, uint64_t seed,
              const std::string& checkpoint_path, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();

    EmbedderConfig embedder;
    embedder.feature_dim = feature_dim;
    embedder.embed_dim = embed_dim;
    embedder.hash_seed = hash_seed;

    const auto examples = build_examples(corpus.documents, gen.options(jobs), embedder);
    std::vector<TrainingExample> val_examples;
    if (!val_input.empty()) {
        CorpusFlags val_flags = corpus_flags;
        val_flags.input = val_input;
        const Corpus val_corpus = val_flags.load();
        val_examples = build_examples(val_corpus.documents, gen.options(jobs), embedder);
    }

    LossConfig lc{gamma1, gamma2};
    TrainConfig tc;
    tc.warmup = warmup;
    tc.batch_size = batch;
    tc.max_steps = steps;
    tc.seed = seed;
    tc.eval_every = eval_every;
    tc.jobs = jobs;

    const auto result = train(examples, embedder, lc, tc, val_examples);
    save_checkpoint(result.model, checkpoint_path);

    const fs::path out_dir = fs::path(checkpoint_path).parent_path();
    {
        const fs::path loss_path =
            out_dir.empty() ? fs::path("loss.csv") : out_dir / "loss.csv";
        auto out = open_output(loss_path.string());
        out << "step,loss,l1,l2\n";
        for (const auto& h : result.history)
            out << h.step << ',' << format_double(h.total) << ',' << format_double(h.l1) << ','
                << format_double(h.l2) << "\n";
    }
    ordered_json lock;
    lock["subcommand"] = "train";
    corpus_flags.echo(lock);
    gen.echo(lock);
    lock["val_input"] = val_input;
    lock["gamma1"] = gamma1;
    lock["gamma2"] = gamma2;
    lock["warmup"] = warmup;
    lock["batch"] = batch;
    lock["steps"] = steps;
    lock["eval_every"] = eval_every;
    lock["feature_dim"] = feature_dim;
    lock["embed_dim"] = embed_dim;
    lock["hash_seed"] = hash_seed;
    lock["seed"] = seed;
    lock["checkpoint"] = checkpoint_path;
    write_config_lock(out_dir.empty() ? fs::path(".") : out_dir, lock);

    if (!result.history.empty())
        std::cerr << "train: " << result.history.size() << " steps, first loss "
                  << format_double(result.history.front().total) << ", last loss "
                  << format_double(result.history.back().total) << "\n";
    if (result.best_validation_loss)
        std::cerr << "train: kept checkpoint from step " << *result.best_validation_step
                  << " (validation loss " << format_double(*result.best_validation_loss) << ")\n";
    return 0;
}

// --- subcommand: select ------------------------------------------------------

int run_select(const CorpusFlags& corpus_flags, const GenFlags& gen,
               const std::string& checkpoint_path, const std::string& out_path, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();
    const MatcherModel model = load_checkpoint(checkpoint_path);
    const auto selections = select_for_corpus(corpus.documents, gen.options(jobs), model);

    if (out_path.empty()) {
        write_selections(selections, std::cout);
    } else {
        auto out = open_output(out_path);
        write_selections(selections, out);
        ordered_json lock;
        lock["subcommand"] = "select";
        corpus_flags.echo(lock);
        gen.echo(lock);
        lock["checkpoint"] = checkpoint_path;
        lock["out"] = out_path;
        write_config_lock(fs::path(out_path).parent_path(), lock);
    }
    return 0;
}

// --- subcommand: compare -----------------------------------------------------

int run_compare(const CorpusFlags& corpus_flags, const GenFlags& gen,
                const std::string& checkpoint_path, std::size_t extract_k, bool blocking,
                std::size_t buckets, const std::string& out_dir, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();
    const MatcherModel model = load_checkpoint(checkpoint_path);

    CompareOptions opts;
    opts.generation = gen.options(jobs);
    opts.extract_k = extract_k > 0
                         ? extract_k
                         : *std::max_element(opts.generation.config.sel.begin(),
                                             opts.generation.config.sel.end());
    opts.trigram_blocking = blocking;
    opts.buckets = buckets;

    const auto result = compare_corpus(corpus.documents, opts, model);
    emit_report(result.report, out_dir);
    {
        auto out = open_output((fs::path(out_dir) / "matcher_selections.jsonl").string());
        write_selections(result.matcher_picks, out);
    }
    {
        auto out = open_output((fs::path(out_dir) / "extractor_selections.jsonl").string());
        write_selections(result.extractor_picks, out);
    }

    ordered_json lock;
    lock["subcommand"] = "compare";
    corpus_flags.echo(lock);
    gen.echo(lock);
    lock["matcher_checkpoint"] = checkpoint_path;
    lock["extractor"] = gen.selector;
    lock["k"] = opts.extract_k;
    lock["blocking"] = blocking;
    lock["buckets"] = buckets;
    lock["out"] = out_dir;
    write_config_lock(out_dir, lock);

    std::cerr << "compare: mean delta* "
              << format_double(result.report.mean_delta_star.value_or(0.0) * 100.0)
              << " points, psi "
              << (result.report.psi ? format_double(*result.report.psi) : std::string("n/a"))
              << "\n";
    return 0;
}

// --- subcommand: report ------------------------------------------------------

std::vector<Selection> read_selections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open selections file: " + path);
    std::vector<Selection> selections;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Selection sel;
            sel.doc_id = j.at("id").get<std::string>();
            sel.indices = j.at("selected_indices").get<std::vector<std::size_t>>();
            if (j.contains("summary_text")) sel.summary_text = j["summary_text"].get<std::string>();
            selections.push_back(std::move(sel));
        } catch (const std::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    if (selections.empty()) throw ValidationError("selections file is empty: " + path);
    return selections;
}

int run_report(const CorpusFlags& corpus_flags, const GenFlags& gen,
               const std::string& selections_path, bool baselines, std::size_t lead_k,
               const std::string& out_path, std::size_t jobs) {
    const Corpus corpus = corpus_flags.load();
    const auto selections = read_selections(selections_path);

    EvaluateOptions opts;
    opts.baselines = baselines;
    opts.lead_k = lead_k;
    opts.generation = gen.options(jobs);
    const auto rows = evaluate_selections(corpus.documents, selections, opts);

    std::ostringstream csv;
    csv << "system,rouge1_f1,rouge2_f1,rougeL_f1\n";
    for (const auto& row : rows)
        csv << row.system << ',' << format_double(row.r1) << ',' << format_double(row.r2) << ','
            << format_double(row.rl) << "\n";
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        auto out = open_output(out_path);
        out << csv.str();
        ordered_json lock;
        lock["subcommand"] = "report";
        corpus_flags.echo(lock);
        gen.echo(lock);
        lock["selections"] = selections_path;
        lock["baselines"] = baselines;
        lock["k"] = lead_k;
        lock["out"] = out_path;
        write_config_lock(fs::path(out_path).parent_path(), lock);
    }

    // human-readable table, paper-style x100 points, stderr only
    std::cerr << std::left << std::setw(16) << "system" << std::right << std::setw(8) << "R-1"
              << std::setw(8) << "R-2" << std::setw(8) << "R-L" << "\n";
    for (const auto& row : rows) {
        std::cerr << std::left << std::setw(16) << row.system << std::right << std::fixed
                  << std::setprecision(2) << std::setw(8) << row.r1 * 100.0 << std::setw(8)
                  << row.r2 * 100.0 << std::setw(8) << row.rl * 100.0 << "\n";
        std::cerr.unsetf(std::ios::fixed);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extractive summarization as semantic matching"};
    app.require_subcommand(1);

    std::size_t jobs = default_jobs();
    app.add_option("--jobs", jobs, "worker threads (results are merged in document order)")
        ->default_val(default_jobs());

    // rouge
    auto* rouge_cmd = app.add_subcommand("rouge", "ROUGE spot check between two text files");
    std::string rouge_cand, rouge_ref;
    bool rouge_stem = false;
    rouge_cmd->add_option("--candidate", rouge_cand, "candidate text file")->required();
    rouge_cmd->add_option("--reference", rouge_ref, "reference text file")->required();
    rouge_cmd->add_flag("--stem", rouge_stem, "Porter-stem tokens");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "z distribution and inherent-gap diagnostics");
    CorpusFlags analyze_corpus_flags;
    analyze_corpus_flags.attach(analyze_cmd);
    std::size_t analyze_ext = 2;
    std::size_t analyze_buckets = 10;
    std::string analyze_out;
    analyze_cmd->add_option("--ext", analyze_ext, "candidate summary size")->default_val(2);
    analyze_cmd->add_option("--buckets", analyze_buckets, "z-fraction histogram buckets")
        ->default_val(10);
    analyze_cmd->add_option("--out", analyze_out, "output directory")->required();

    // candidates
    auto* candidates_cmd = app.add_subcommand("candidates", "generate pruned candidate sets");
    CorpusFlags candidates_corpus_flags;
    candidates_corpus_flags.attach(candidates_cmd);
    GenFlags candidates_gen;
    candidates_gen.attach(candidates_cmd);
    std::size_t candidates_k = 0;
    bool candidates_blocking = false;
    std::string candidates_out;
    candidates_cmd->add_option("--k", candidates_k, "also emit a top-k extraction per document");
    candidates_cmd->add_flag("--blocking", candidates_blocking, "trigram blocking for --k");
    candidates_cmd->add_option("--out", candidates_out, "output JSONL (default: stdout)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the siamese matcher");
    CorpusFlags train_corpus_flags;
    train_corpus_flags.attach(train_cmd);
    GenFlags train_gen;
    train_gen.attach(train_cmd);
    std::string train_val_input, train_checkpoint;
    double train_gamma1 = 0.0, train_gamma2 = 0.01;
    std::size_t train_warmup = 10000, train_batch = 32, train_steps = 0, train_eval_every = 0;
    std::size_t train_feature_dim = 4096, train_embed_dim = 128;
    uint64_t train_hash_seed = 0, train_seed = 0;
    train_cmd->add_option("--val-input", train_val_input, "validation corpus (JSONL)");
    train_cmd->add_option("--gamma1", train_gamma1, "gold margin")->default_val(0.0);
    train_cmd->add_option("--gamma2", train_gamma2, "pairwise rank margin")->default_val(0.01);
    train_cmd->add_option("--warmup", train_warmup, "warmup steps")->default_val(10000);
    train_cmd->add_option("--batch", train_batch, "documents per step")->default_val(32);
    train_cmd->add_option("--steps", train_steps, "training steps")->required();
    train_cmd->add_option("--eval-every", train_eval_every,
                          "validation cadence (needs --val-input)");
    train_cmd->add_option("--feature-dim", train_feature_dim, "hash buckets")->default_val(4096);
    train_cmd->add_option("--embed-dim", train_embed_dim, "embedding size")->default_val(128);
    train_cmd->add_option("--hash-seed", train_hash_seed, "feature hashing seed")->default_val(0);
    train_cmd->add_option("--seed", train_seed, "training seed")->default_val(0);
    train_cmd->add_option("--checkpoint", train_checkpoint, "checkpoint output path")->required();

    // select
    auto* select_cmd = app.add_subcommand("select", "pick summaries with a trained matcher");
    CorpusFlags select_corpus_flags;
    select_corpus_flags.attach(select_cmd);
    GenFlags select_gen;
    select_gen.attach(select_cmd);
    std::string select_checkpoint, select_out;
    select_cmd->add_option("--checkpoint", select_checkpoint, "matcher checkpoint")->required();
    select_cmd->add_option("--out", select_out, "output JSONL (default: stdout)");

    // compare
    auto* compare_cmd =
        app.add_subcommand("compare", "matcher vs sentence-level extractor, split by z");
    CorpusFlags compare_corpus_flags;
    compare_corpus_flags.attach(compare_cmd);
    GenFlags compare_gen;
    compare_gen.attach(compare_cmd);
    std::string compare_checkpoint, compare_out;
    std::size_t compare_k = 0, compare_buckets = 10;
    bool compare_blocking = false;
    compare_cmd->add_option("--matcher-checkpoint", compare_checkpoint, "matcher checkpoint")
        ->required();
    compare_cmd
        ->add_option("--extractor", compare_gen.selector,
                     "sentence scorer behind the extractor baseline")
        ->check(CLI::IsMember({"oracle", "centroid", "external"}));
    compare_cmd->add_option("--k", compare_k, "extractor sentence count (default: max sel)");
    compare_cmd->add_flag("--blocking", compare_blocking, "trigram blocking for the extractor");
    compare_cmd->add_option("--buckets", compare_buckets, "z histogram buckets")->default_val(10);
    compare_cmd->add_option("--out", compare_out, "output directory")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "ROUGE table for a selections file");
    CorpusFlags report_corpus_flags;
    report_corpus_flags.attach(report_cmd);
    GenFlags report_gen;
    report_gen.attach(report_cmd);
    std::string report_selections, report_out;
    bool report_baselines = false;
    std::size_t report_k = 3;
    report_cmd->add_option("--selections", report_selections, "selections JSONL")->required();
    report_cmd->add_flag("--baselines", report_baselines, "add LEAD/ORACLE/MATCH-ORACLE rows");
    report_cmd->add_option("--k", report_k, "sentence count for LEAD and ORACLE")->default_val(3);
    report_cmd->add_option("--out", report_out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 1;
    }

    try {
        if (*rouge_cmd) return run_rouge(rouge_cand, rouge_ref, rouge_stem);
        if (*analyze_cmd)
            return run_analyze(analyze_corpus_flags, analyze_ext, analyze_buckets, analyze_out,
                               jobs);
        if (*candidates_cmd)
            return run_candidates(candidates_corpus_flags, candidates_gen, candidates_k,
                                  candidates_blocking, candidates_out, jobs);
        if (*train_cmd)
            return run_train(train_corpus_flags, train_gen, train_val_input, train_gamma1,
                             train_gamma2, train_warmup, train_batch, train_steps,
                             train_eval_every, train_feature_dim, train_embed_dim, train_hash_seed,
                             train_seed, train_checkpoint, jobs);
        if (*select_cmd)
            return run_select(select_corpus_flags, select_gen, select_checkpoint, select_out, jobs);
        if (*compare_cmd)
            return run_compare(compare_corpus_flags, compare_gen, compare_checkpoint, compare_k,
                               compare_blocking, compare_buckets, compare_out, jobs);
        if (*report_cmd)
            return run_report(report_corpus_flags, report_gen, report_selections, report_baselines,
                              report_k, report_out, jobs);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
