#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "matchlab/analysis.hpp"
#include "matchlab/pipeline.hpp"
#include "matchlab/util.hpp"
#include "test_support.hpp"

using namespace matchlab;
using testsupport::make_doc;

namespace {

ScoredCandidate synthetic(std::size_t tag, double sen, double sum) {
    ScoredCandidate sc;
    sc.candidate.indices = {tag};
    sc.g_sen = sen;
    sc.g_sum = sum;
    return sc;
}

GapRecord simple_record(const std::string& id, double delta, std::optional<double> star,
                        std::size_t z = 1) {
    GapRecord r;
    r.doc_id = id;
    r.alpha_sen = 0.5;
    r.alpha_sum = 0.5 + delta;
    r.delta = delta;
    r.delta_alt = delta;
    r.delta_star = star;
    r.z = z;
    r.num_candidates = 10;
    return r;
}

DatasetReport tiny_report() {
    DatasetReport report;
    report.num_docs = 2;
    report.buckets = 4;
    report.z_histogram = {0.5, 0.0, 0.25, 0.25};
    report.z1_fraction = 0.5;
    report.mean_delta = 0.125;
    report.mean_delta_alt = 0.25;
    report.mean_delta_star = 0.0625;
    report.psi = 0.5;
    report.extractor_label = "oracle top-2";
    report.quintiles = {{1, 1, 1, 1, 0.01, 0.02, 0.03, 0.04}, {2, 2, 3, 1, -0.01, 0.0, 0.0, 0.0}};
    report.quintiles_small_sample = true;
    report.records = {simple_record("a", 0.25, 0.125, 1), simple_record("b", 0.0, 0.0, 3)};
    return report;
}

}  // namespace

TEST_CASE("inherent_gap") {
    SUBCASE("identical candidates: delta is their own gap") {
        std::vector<ScoredCandidate> cands = {synthetic(0, 0.3, 0.4), synthetic(1, 0.3, 0.4)};
        mark_pearls(cands);
        const auto diag = diagnose(cands);
        const auto record = inherent_gap("doc", cands, diag);
        CHECK(record.alpha_sen == doctest::Approx(0.3));
        CHECK(record.alpha_sum == doctest::Approx(0.4));
        CHECK(record.delta == doctest::Approx(0.1).epsilon(1e-12));
        CHECK_FALSE(record.is_pearl_best);
    }
    SUBCASE("maxima come from different candidates") {
        std::vector<ScoredCandidate> cands = {synthetic(0, 0.5, 0.4), synthetic(1, 0.3, 0.6)};
        mark_pearls(cands);
        const auto diag = diagnose(cands);
        const auto record = inherent_gap("doc", cands, diag);
        CHECK(record.alpha_sen == doctest::Approx(0.5));
        CHECK(record.alpha_sum == doctest::Approx(0.6));
        CHECK(record.delta == doctest::Approx(0.1).epsilon(1e-12));
        // sentence-level extractor would take the g_sen argmax (g_sum 0.4)
        CHECK(record.delta_alt == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(record.z == 2);
        CHECK(record.is_pearl_best);
        CHECK_FALSE(record.delta_star.has_value());
    }
    SUBCASE("alpha values dominate every candidate") {
        std::vector<ScoredCandidate> cands = {synthetic(0, 0.1, 0.9), synthetic(1, 0.6, 0.2),
                                              synthetic(2, 0.4, 0.5)};
        mark_pearls(cands);
        const auto record = inherent_gap("doc", cands, diagnose(cands));
        for (const auto& c : cands) {
            CHECK(record.alpha_sen >= c.g_sen);
            CHECK(record.alpha_sum >= c.g_sum);
        }
    }
}

TEST_CASE("realized_gain") {
    const Document doc = make_doc(
        "d", {"the cat sat on the mat", "dogs bark loudly", "the cat sat quietly"},
        {"the cat sat on the mat"});
    const TokenList gold = flatten_gold(doc);
    SUBCASE("identical selections give zero") {
        const auto pick = make_candidate(doc, {0});
        CHECK(realized_gain(doc, pick, pick) == doctest::Approx(0.0));
    }
    SUBCASE("any concrete pair is the difference of two g_sum calls") {
        const auto ms = make_candidate(doc, {0});
        const auto be = make_candidate(doc, {1});
        CHECK(realized_gain(doc, ms, be) ==
              doctest::Approx(g_sum(ms, gold) - g_sum(be, gold)).epsilon(1e-12));
        CHECK(realized_gain(doc, ms, be) > 0.0);
    }
}

TEST_CASE("psi") {
    SUBCASE("delta_star equals delta everywhere: psi = 1") {
        std::vector<GapRecord> records = {simple_record("a", 0.2, 0.2),
                                          simple_record("b", 0.4, 0.4)};
        const auto p = psi(records);
        REQUIRE(p);
        CHECK(*p == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("all delta_star zero: psi = 0") {
        std::vector<GapRecord> records = {simple_record("a", 0.2, 0.0),
                                          simple_record("b", 0.4, 0.0)};
        const auto p = psi(records);
        REQUIRE(p);
        CHECK(*p == doctest::Approx(0.0));
    }
    SUBCASE("mean delta zero: undefined") {
        std::vector<GapRecord> records = {simple_record("a", 0.0, 0.1)};
        CHECK_FALSE(psi(records).has_value());
    }
    SUBCASE("no delta_star anywhere: undefined") {
        std::vector<GapRecord> records = {simple_record("a", 0.5, std::nullopt)};
        CHECK_FALSE(psi(records).has_value());
    }
}

TEST_CASE("z_distribution") {
    SUBCASE("all z = 1") {
        std::vector<DocumentDiagnosis> diags(4);
        for (auto& d : diags) {
            d.z = 1;
            d.num_candidates = 20;
            d.z_fraction = 0.05;
        }
        const auto hist = z_distribution(diags, 10);
        CHECK(hist[0] == doctest::Approx(1.0));
        for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] == 0.0);
    }
    SUBCASE("two documents at opposite ends") {
        std::vector<DocumentDiagnosis> diags(2);
        diags[0].z_fraction = 0.05;
        diags[1].z_fraction = 0.95;
        const auto hist = z_distribution(diags, 10);
        CHECK(hist.front() == doctest::Approx(0.5));
        CHECK(hist.back() == doctest::Approx(0.5));
    }
    SUBCASE("bucket edges: fraction exactly at an edge falls in the lower bucket") {
        std::vector<double> fractions = {0.1, 0.2, 1.0};
        const auto hist = z_fraction_histogram(fractions, 10);
        CHECK(hist[0] == doctest::Approx(1.0 / 3));
        CHECK(hist[1] == doctest::Approx(1.0 / 3));
        CHECK(hist[9] == doctest::Approx(1.0 / 3));
    }
    SUBCASE("proportions sum to 1") {
        SplitMix64 rng(3);
        std::vector<double> fractions;
        for (int i = 0; i < 97; ++i)
            fractions.push_back((1.0 + static_cast<double>(rng.next() % 1000)) / 1000.0);
        const auto hist = z_fraction_histogram(fractions, 7);
        double total = 0.0;
        for (double p : hist) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(z_fraction_histogram({}, 10), ValidationError);
    }
}

TEST_CASE("z_split_compare") {
    auto gain = [](const std::string& id, std::size_t z, double g) {
        DocGain d;
        d.doc_id = id;
        d.z = z;
        d.gain_gsum = g;
        d.gain_r1 = g;
        return d;
    };
    SUBCASE("10 documents split 2+2+2+2+2") {
        std::vector<DocGain> gains;
        for (int i = 0; i < 10; ++i)
            gains.push_back(gain("d" + std::to_string(i), 10 - i, 0.1 * i));
        bool small = true;
        const auto rows = z_split_compare(gains, &small);
        REQUIRE(rows.size() == 5);
        CHECK_FALSE(small);
        for (const auto& r : rows) CHECK(r.count == 2);
        // sorted by z ascending: first part holds z=1,2
        CHECK(rows[0].z_lo == 1);
        CHECK(rows[0].z_hi == 2);
        CHECK(rows[4].z_hi == 10);
    }
    SUBCASE("7 documents split 2+2+1+1+1") {
        std::vector<DocGain> gains;
        for (int i = 0; i < 7; ++i) gains.push_back(gain("d" + std::to_string(i), i + 1, 0.0));
        const auto rows = z_split_compare(gains);
        REQUIRE(rows.size() == 5);
        std::vector<std::size_t> sizes;
        for (const auto& r : rows) sizes.push_back(r.count);
        CHECK(sizes == std::vector<std::size_t>{2, 2, 1, 1, 1});
        std::size_t covered = 0;
        for (auto s : sizes) covered += s;
        CHECK(covered == 7);
    }
    SUBCASE("identical picks everywhere: all gains zero") {
        std::vector<DocGain> gains;
        for (int i = 0; i < 10; ++i) gains.push_back(gain("d" + std::to_string(i), i + 1, 0.0));
        for (const auto& r : z_split_compare(gains)) {
            CHECK(r.gain_gsum == 0.0);
            CHECK(r.gain_r1 == 0.0);
        }
    }
    SUBCASE("fewer than 5 documents: one part each, flagged") {
        std::vector<DocGain> gains = {gain("a", 1, 0.1), gain("b", 2, 0.2), gain("c", 3, 0.3)};
        bool small = false;
        const auto rows = z_split_compare(gains, &small);
        CHECK(small);
        REQUIRE(rows.size() == 3);
        for (const auto& r : rows) CHECK(r.count == 1);
    }
    SUBCASE("z ties are ordered by doc id") {
        std::vector<DocGain> gains = {gain("b", 1, 1.0), gain("a", 1, 0.0), gain("c", 2, 0.5),
                                      gain("d", 2, 0.5), gain("e", 3, 0.5)};
        const auto rows = z_split_compare(gains);
        // part 1 must hold ("a"), the id-smaller z=1 doc
        CHECK(rows[0].gain_gsum == doctest::Approx(0.0));
    }
}

TEST_CASE("emit_report and load_report round-trip") {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("matchlab_report_" + std::to_string(::getpid()));
    std::error_code ec;
    fs::remove_all(dir, ec);

    SUBCASE("empty report refuses to write") {
        DatasetReport empty;
        CHECK_THROWS_AS(emit_report(empty, dir.string()), ValidationError);
        CHECK_FALSE(fs::exists(dir / "report.json"));
    }
    SUBCASE("single-document report writes well-formed files") {
        DatasetReport report = tiny_report();
        report.records.resize(1);
        report.num_docs = 1;
        emit_report(report, dir.string());
        for (const char* f : {"report.json", "z_hist.csv", "delta.csv", "quintiles.csv"})
            CHECK(fs::exists(dir / f));
        std::ifstream in(dir / "delta.csv");
        std::string header, row, extra;
        REQUIRE(std::getline(in, header));
        CHECK(header ==
              "doc,alpha_sen,alpha_sum,delta,delta_alt,delta_star,z,num_candidates,is_pearl_best");
        REQUIRE(std::getline(in, row));
        CHECK_FALSE(std::getline(in, extra));
    }
    SUBCASE("round-trip reproduces the report exactly") {
        const DatasetReport report = tiny_report();
        emit_report(report, dir.string());
        const auto loaded = load_report((dir / "report.json").string());
        CHECK(report_equal(report, loaded));
        // and a second emit of the loaded report is byte-identical
        const fs::path dir2 = dir / "again";
        emit_report(loaded, dir2.string());
        for (const char* f : {"report.json", "z_hist.csv", "delta.csv", "quintiles.csv"}) {
            std::ifstream a(dir / f), b(dir2 / f);
            const std::string sa((std::istreambuf_iterator<char>(a)),
                                 std::istreambuf_iterator<char>());
            const std::string sb((std::istreambuf_iterator<char>(b)),
                                 std::istreambuf_iterator<char>());
            CHECK(sa == sb);
            CHECK_FALSE(sa.empty());
        }
    }
    fs::remove_all(dir, ec);
}

TEST_CASE("analyze_corpus aggregates are self-consistent") {
    std::vector<Document> docs;
    SplitMix64 rng(23);
    for (int d = 0; d < 9; ++d) {
        std::vector<std::string> sentences;
        for (int s = 0; s < 6; ++s) {
            std::string text;
            for (int w = 0; w < 6; ++w) text += "w" + std::to_string(rng.next() % 30) + " ";
            sentences.push_back(text);
        }
        std::string gold;
        for (int w = 0; w < 8; ++w) gold += "w" + std::to_string(rng.next() % 30) + " ";
        docs.push_back(make_doc("doc" + std::to_string(d), sentences, {gold}));
    }
    AnalyzeOptions opts;
    opts.ext = 2;
    opts.buckets = 10;
    const auto result = analyze_corpus(docs, opts);
    REQUIRE(result.records.size() == docs.size());
    REQUIRE(result.diagnoses.size() == docs.size());

    double delta_sum = 0.0;
    std::size_t z1 = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        delta_sum += result.records[i].delta;
        if (result.diagnoses[i].z == 1) ++z1;
        CHECK(result.records[i].num_candidates == 15);  // C(6,2)
    }
    CHECK(result.report.mean_delta ==
          doctest::Approx(delta_sum / static_cast<double>(docs.size())).epsilon(1e-15));
    CHECK(result.report.z1_fraction ==
          doctest::Approx(static_cast<double>(z1) / static_cast<double>(docs.size())));
    double hist_total = 0.0;
    for (double p : result.report.z_histogram) hist_total += p;
    CHECK(hist_total == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("parallel run gives identical records") {
        AnalyzeOptions par = opts;
        par.jobs = 4;
        const auto again = analyze_corpus(docs, par);
        REQUIRE(again.records.size() == result.records.size());
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            CHECK(again.records[i].delta == result.records[i].delta);
            CHECK(again.records[i].z == result.records[i].z);
        }
    }
}
