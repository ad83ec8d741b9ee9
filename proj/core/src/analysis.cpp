#include "matchlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "matchlab/util.hpp"

namespace matchlab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

GapRecord inherent_gap(const std::string& doc_id, std::span<const ScoredCandidate> candidates,
                       const DocumentDiagnosis& diagnosis) {
    if (candidates.empty()) throw ValidationError("inherent_gap: empty candidate list");
    GapRecord record;
    record.doc_id = doc_id;
    record.num_candidates = candidates.size();
    record.z = diagnosis.z;
    record.is_pearl_best = candidates[diagnosis.best_index].is_pearl;

    double max_sen = -1.0;
    double max_sum = -1.0;
    for (const auto& c : candidates) {
        max_sen = std::max(max_sen, c.g_sen);
        max_sum = std::max(max_sum, c.g_sum);
    }
    record.alpha_sen = max_sen;
    record.alpha_sum = max_sum;
    record.delta = max_sum - max_sen;

    // g_sum of the candidate at the top of the g_sen ordering (stable, so the
    // same candidate z-ranking puts first).
    std::size_t top = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].g_sen > candidates[top].g_sen) top = i;
    record.delta_alt = max_sum - candidates[top].g_sum;
    return record;
}

double realized_gain(const Document& doc, const CandidateSummary& matcher_pick,
                     const CandidateSummary& extractor_pick) {
    const TokenList gold = flatten_gold(doc);
    return g_sum(matcher_pick, gold) - g_sum(extractor_pick, gold);
}

std::optional<double> psi(std::span<const GapRecord> records) {
    if (records.empty()) return std::nullopt;
    double delta_sum = 0.0;
    double star_sum = 0.0;
    std::size_t star_count = 0;
    for (const auto& r : records) {
        delta_sum += r.delta;
        if (r.delta_star) {
            star_sum += *r.delta_star;
            ++star_count;
        }
    }
    if (star_count == 0) return std::nullopt;
    const double mean_delta = delta_sum / static_cast<double>(records.size());
    if (mean_delta == 0.0) return std::nullopt;
    const double mean_star = star_sum / static_cast<double>(star_count);
    return mean_star / mean_delta;
}

std::vector<double> z_fraction_histogram(std::span<const double> z_fractions, std::size_t buckets) {
    if (buckets == 0) throw ValidationError("z_distribution: buckets must be >= 1");
    if (z_fractions.empty()) throw ValidationError("z_distribution: no documents");
    std::vector<double> hist(buckets, 0.0);
    const double share = 1.0 / static_cast<double>(z_fractions.size());
    for (double zf : z_fractions) {
        // bucket i covers (i/B, (i+1)/B]
        auto idx = static_cast<std::size_t>(std::ceil(zf * static_cast<double>(buckets))) - 1;
        if (idx >= buckets) idx = buckets - 1;
        hist[idx] += share;
    }
    return hist;
}

std::vector<double> z_distribution(std::span<const DocumentDiagnosis> diagnoses,
                                   std::size_t buckets) {
    std::vector<double> fractions;
    fractions.reserve(diagnoses.size());
    for (const auto& d : diagnoses) fractions.push_back(d.z_fraction);
    return z_fraction_histogram(fractions, buckets);
}

std::vector<QuintileRow> z_split_compare(std::span<const DocGain> gains, bool* small_sample) {
    if (gains.empty()) throw ValidationError("z_split_compare: no documents");
    std::vector<const DocGain*> sorted;
    sorted.reserve(gains.size());
    for (const auto& g : gains) sorted.push_back(&g);
    std::sort(sorted.begin(), sorted.end(), [](const DocGain* a, const DocGain* b) {
        if (a->z != b->z) return a->z < b->z;
        return a->doc_id < b->doc_id;
    });

    const std::size_t n = sorted.size();
    const std::size_t parts = std::min<std::size_t>(5, n);
    if (small_sample) *small_sample = n < 5;
    if (n < 5) log_warn("z split: fewer than 5 documents, using one part per document");

    const std::size_t base = n / parts;
    const std::size_t extra = n % parts;  // first `extra` parts get one more
    std::vector<QuintileRow> rows;
    rows.reserve(parts);
    std::size_t pos = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        const std::size_t size = base + (p < extra ? 1 : 0);
        QuintileRow row;
        row.part = p + 1;
        row.count = size;
        row.z_lo = sorted[pos]->z;
        row.z_hi = sorted[pos + size - 1]->z;
        for (std::size_t i = pos; i < pos + size; ++i) {
            row.gain_gsum += sorted[i]->gain_gsum;
            row.gain_r1 += sorted[i]->gain_r1;
            row.gain_r2 += sorted[i]->gain_r2;
            row.gain_rl += sorted[i]->gain_rl;
        }
        row.gain_gsum /= static_cast<double>(size);
        row.gain_r1 /= static_cast<double>(size);
        row.gain_r2 /= static_cast<double>(size);
        row.gain_rl /= static_cast<double>(size);
        rows.push_back(row);
        pos += size;
    }
    return rows;
}

namespace {

ordered_json record_to_json(const GapRecord& r) {
    ordered_json j;
    j["doc_id"] = r.doc_id;
    j["alpha_sen"] = r.alpha_sen;
    j["alpha_sum"] = r.alpha_sum;
    j["delta"] = r.delta;
    j["delta_alt"] = r.delta_alt;
    if (r.delta_star)
        j["delta_star"] = *r.delta_star;
    else
        j["delta_star"] = nullptr;
    j["z"] = r.z;
    j["num_candidates"] = r.num_candidates;
    j["is_pearl_best"] = r.is_pearl_best;
    return j;
}

GapRecord record_from_json(const nlohmann::json& j) {
    GapRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.alpha_sen = j.at("alpha_sen").get<double>();
    r.alpha_sum = j.at("alpha_sum").get<double>();
    r.delta = j.at("delta").get<double>();
    r.delta_alt = j.at("delta_alt").get<double>();
    if (!j.at("delta_star").is_null()) r.delta_star = j.at("delta_star").get<double>();
    r.z = j.at("z").get<std::size_t>();
    r.num_candidates = j.at("num_candidates").get<std::size_t>();
    r.is_pearl_best = j.at("is_pearl_best").get<bool>();
    return r;
}

std::string csv_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

void emit_report(const DatasetReport& report, const std::string& dir) {
    if (report.records.empty()) throw ValidationError("emit_report: report has no documents");
    if (report.z_histogram.empty()) throw ValidationError("emit_report: missing z histogram");

    fs::create_directories(dir);
    const fs::path base(dir);

    ordered_json j;
    j["schema_version"] = report.schema_version;
    j["num_docs"] = report.num_docs;
    j["buckets"] = report.buckets;
    j["z_histogram"] = report.z_histogram;
    j["z1_fraction"] = report.z1_fraction;
    j["docs_with_score_ties"] = report.docs_with_score_ties;
    j["mean_delta"] = report.mean_delta;
    j["mean_delta_alt"] = report.mean_delta_alt;
    j["mean_delta_star"] = report.mean_delta_star ? ordered_json(*report.mean_delta_star)
                                                  : ordered_json(nullptr);
    j["psi"] = report.psi ? ordered_json(*report.psi) : ordered_json(nullptr);
    j["extractor"] = report.extractor_label;
    j["quintiles_small_sample"] = report.quintiles_small_sample;
    auto& quintiles = j["quintiles"] = ordered_json::array();
    for (const auto& q : report.quintiles) {
        ordered_json row;
        row["part"] = q.part;
        row["z_lo"] = q.z_lo;
        row["z_hi"] = q.z_hi;
        row["count"] = q.count;
        row["gain_gsum"] = q.gain_gsum;
        row["gain_r1"] = q.gain_r1;
        row["gain_r2"] = q.gain_r2;
        row["gain_rl"] = q.gain_rl;
        quintiles.push_back(row);
    }
    auto& docs = j["documents"] = ordered_json::array();
    for (const auto& r : report.records) docs.push_back(record_to_json(r));

    {
        std::ofstream out(base / "report.json", std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + (base / "report.json").string());
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream out(base / "z_hist.csv", std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + (base / "z_hist.csv").string());
        out << "bucket_lo,bucket_hi,proportion\n";
        const double width = 1.0 / static_cast<double>(report.z_histogram.size());
        for (std::size_t i = 0; i < report.z_histogram.size(); ++i) {
            out << format_double(width * static_cast<double>(i)) << ','
                << format_double(width * static_cast<double>(i + 1)) << ','
                << format_double(report.z_histogram[i]) << "\n";
        }
    }
    {
        std::ofstream out(base / "delta.csv", std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + (base / "delta.csv").string());
        out << "doc,alpha_sen,alpha_sum,delta,delta_alt,delta_star,z,num_candidates,is_pearl_best\n";
        for (const auto& r : report.records) {
            out << r.doc_id << ',' << format_double(r.alpha_sen) << ',' << format_double(r.alpha_sum)
                << ',' << format_double(r.delta) << ',' << format_double(r.delta_alt) << ','
                << (r.delta_star ? format_double(*r.delta_star) : std::string()) << ',' << r.z << ','
                << r.num_candidates << ',' << csv_bool(r.is_pearl_best) << "\n";
        }
    }
    {
        std::ofstream out(base / "quintiles.csv", std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + (base / "quintiles.csv").string());
        out << "part,z_lo,z_hi,count,gain_gsum,gain_r1,gain_r2,gain_rl\n";
        for (const auto& q : report.quintiles) {
            out << q.part << ',' << q.z_lo << ',' << q.z_hi << ',' << q.count << ','
                << format_double(q.gain_gsum) << ',' << format_double(q.gain_r1) << ','
                << format_double(q.gain_r2) << ',' << format_double(q.gain_rl) << "\n";
        }
    }
}

DatasetReport load_report(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ValidationError("cannot open report: " + json_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("cannot parse report " + json_path + ": " + e.what());
    }
    DatasetReport report;
    report.schema_version = j.at("schema_version").get<int>();
    report.num_docs = j.at("num_docs").get<std::size_t>();
    report.buckets = j.at("buckets").get<std::size_t>();
    report.z_histogram = j.at("z_histogram").get<std::vector<double>>();
    report.z1_fraction = j.at("z1_fraction").get<double>();
    report.docs_with_score_ties = j.at("docs_with_score_ties").get<std::size_t>();
    report.mean_delta = j.at("mean_delta").get<double>();
    report.mean_delta_alt = j.at("mean_delta_alt").get<double>();
    if (!j.at("mean_delta_star").is_null())
        report.mean_delta_star = j.at("mean_delta_star").get<double>();
    if (!j.at("psi").is_null()) report.psi = j.at("psi").get<double>();
    report.extractor_label = j.at("extractor").get<std::string>();
    report.quintiles_small_sample = j.at("quintiles_small_sample").get<bool>();
    for (const auto& row : j.at("quintiles")) {
        QuintileRow q;
        q.part = row.at("part").get<std::size_t>();
        q.z_lo = row.at("z_lo").get<std::size_t>();
        q.z_hi = row.at("z_hi").get<std::size_t>();
        q.count = row.at("count").get<std::size_t>();
        q.gain_gsum = row.at("gain_gsum").get<double>();
        q.gain_r1 = row.at("gain_r1").get<double>();
        q.gain_r2 = row.at("gain_r2").get<double>();
        q.gain_rl = row.at("gain_rl").get<double>();
        report.quintiles.push_back(q);
    }
    for (const auto& doc : j.at("documents")) report.records.push_back(record_from_json(doc));
    return report;
}

bool report_equal(const DatasetReport& a, const DatasetReport& b) {
    auto rec_eq = [](const GapRecord& x, const GapRecord& y) {
        return x.doc_id == y.doc_id && x.alpha_sen == y.alpha_sen && x.alpha_sum == y.alpha_sum &&
               x.delta == y.delta && x.delta_alt == y.delta_alt && x.delta_star == y.delta_star &&
               x.z == y.z && x.num_candidates == y.num_candidates &&
               x.is_pearl_best == y.is_pearl_best;
    };
    auto quint_eq = [](const QuintileRow& x, const QuintileRow& y) {
        return x.part == y.part && x.z_lo == y.z_lo && x.z_hi == y.z_hi && x.count == y.count &&
               x.gain_gsum == y.gain_gsum && x.gain_r1 == y.gain_r1 && x.gain_r2 == y.gain_r2 &&
               x.gain_rl == y.gain_rl;
    };
    return a.schema_version == b.schema_version && a.num_docs == b.num_docs &&
           a.buckets == b.buckets && a.z_histogram == b.z_histogram &&
           a.z1_fraction == b.z1_fraction && a.docs_with_score_ties == b.docs_with_score_ties &&
           a.mean_delta == b.mean_delta &&
           a.mean_delta_alt == b.mean_delta_alt && a.mean_delta_star == b.mean_delta_star &&
           a.psi == b.psi && a.extractor_label == b.extractor_label &&
           a.quintiles_small_sample == b.quintiles_small_sample &&
           std::equal(a.quintiles.begin(), a.quintiles.end(), b.quintiles.begin(), b.quintiles.end(),
                      quint_eq) &&
           a.quintiles.size() == b.quintiles.size() && a.records.size() == b.records.size() &&
           std::equal(a.records.begin(), a.records.end(), b.records.begin(), b.records.end(), rec_eq);
}

}  // namespace matchlab
