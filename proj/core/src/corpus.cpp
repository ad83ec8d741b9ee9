#include "matchlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "matchlab/util.hpp"

namespace matchlab {

std::size_t Document::total_tokens() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
}

namespace {

// Classic Porter stemmer (the original 1980 rule set), operating in place on
// a lowercase ASCII word b[0..k].
class PorterStemmer {
public:
    std::string stem(std::string word) {
        b = std::move(word);
        k = static_cast<int>(b.size()) - 1;
        if (k <= 1) return b;
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        b.resize(static_cast<std::size_t>(k) + 1);
        return b;
    }

private:
    std::string b;
    int k = 0;  // last index of the current word
    int j = 0;  // last index of the stem after a successful ends()

    bool cons(int i) const {
        switch (b[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int i) const {
        return i >= 1 && b[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i - 1)] && cons(i);
    }

    // consonant-vowel-consonant ending where the final consonant is not w/x/y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char c = b[static_cast<std::size_t>(i)];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(const char* s) {
        const int len = static_cast<int>(std::strlen(s));
        if (len > k + 1) return false;
        if (b.compare(static_cast<std::size_t>(k - len + 1), static_cast<std::size_t>(len), s) != 0)
            return false;
        j = k - len;
        return true;
    }

    void setto(const char* s) {
        const int len = static_cast<int>(std::strlen(s));
        b.replace(static_cast<std::size_t>(j + 1), std::string::npos, s);
        k = j + len;
    }

    void r(const char* s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (b[static_cast<std::size_t>(k)] == 's') {
            if (ends("sses"))
                k -= 2;
            else if (ends("ies"))
                setto("i");
            else if (b[static_cast<std::size_t>(k - 1)] != 's')
                --k;
        }
        if (ends("eed")) {
            if (m() > 0) --k;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k = j;
            if (ends("at"))
                setto("ate");
            else if (ends("bl"))
                setto("ble");
            else if (ends("iz"))
                setto("ize");
            else if (doublec(k)) {
                --k;
                const char c = b[static_cast<std::size_t>(k)];
                if (c == 'l' || c == 's' || c == 'z') ++k;
            } else if (m() == 1 && cvc(k)) {
                setto("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b[static_cast<std::size_t>(k)] = 'i';
    }

    void step2() {
        if (k == 0) return;
        switch (b[static_cast<std::size_t>(k - 1)]) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("abli")) { r("able"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (b[static_cast<std::size_t>(k)]) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (k == 0) return;
        switch (b[static_cast<std::size_t>(k - 1)]) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j >= 0 &&
                    (b[static_cast<std::size_t>(j)] == 's' || b[static_cast<std::size_t>(j)] == 't'))
                    break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default:
                return;
        }
        if (m() > 1) k = j;
    }

    void step5() {
        j = k;
        if (b[static_cast<std::size_t>(k)] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k - 1))) --k;
        }
        if (b[static_cast<std::size_t>(k)] == 'l' && doublec(k) && m() > 1) --k;
    }
};

bool all_alpha(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

std::string porter_stem(const std::string& word) {
    PorterStemmer stemmer;
    return stemmer.stem(word);
}

TokenList tokenize(const std::string& raw, const TokenizerOptions& opts) {
    TokenList tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (opts.stem && all_alpha(current)) current = porter_stem(current);
        tokens.push_back(std::move(current));
        current.clear();
    };
    for (unsigned char c : raw) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

struct JsonlReader::Impl {
    std::string path;
    std::ifstream in;
    bool strict = false;
    std::optional<std::size_t> limit;
    std::size_t line_number = 0;
};

JsonlReader::JsonlReader(const std::string& path, bool strict, std::optional<std::size_t> limit)
    : impl_(new Impl{path, std::ifstream(path), strict, limit, 0}) {
    if (!impl_->in) {
        delete impl_;
        impl_ = nullptr;
        throw ValidationError("cannot open input file: " + path);
    }
}

JsonlReader::~JsonlReader() { delete impl_; }

JsonlReader::JsonlReader(JsonlReader&& other) noexcept
    : impl_(other.impl_), malformed_(other.malformed_), yielded_(other.yielded_) {
    other.impl_ = nullptr;
}

namespace {

// Throws std::runtime_error with a reason when the record is invalid.
RawRecord parse_record(const std::string& line, std::size_t line_number) {
    const nlohmann::json obj = nlohmann::json::parse(line);
    if (!obj.is_object()) throw std::runtime_error("line is not a JSON object");

    RawRecord record;
    record.line_number = line_number;

    auto read_string_array = [&](const char* field) {
        auto it = obj.find(field);
        if (it == obj.end()) throw std::runtime_error(std::string("missing field \"") + field + "\"");
        if (!it->is_array()) throw std::runtime_error(std::string("field \"") + field + "\" is not an array");
        std::vector<std::string> out;
        out.reserve(it->size());
        for (const auto& el : *it) {
            if (!el.is_string())
                throw std::runtime_error(std::string("field \"") + field + "\" contains a non-string element");
            out.push_back(el.get<std::string>());
        }
        return out;
    };

    record.text = read_string_array("text");
    record.summary = read_string_array("summary");

    if (auto it = obj.find("id"); it != obj.end()) {
        if (it->is_string())
            record.id = it->get<std::string>();
        else
            throw std::runtime_error("field \"id\" is not a string");
    } else {
        record.id = std::to_string(line_number);
    }

    if (auto it = obj.find("sent_scores"); it != obj.end()) {
        if (!it->is_array()) throw std::runtime_error("field \"sent_scores\" is not an array");
        record.has_sent_scores = true;
        record.sent_scores.reserve(it->size());
        for (const auto& el : *it) {
            if (!el.is_number()) throw std::runtime_error("field \"sent_scores\" contains a non-number");
            record.sent_scores.push_back(el.get<double>());
        }
    }
    return record;
}

}  // namespace

bool JsonlReader::next(RawRecord& out) {
    if (!impl_) return false;
    if (impl_->limit && yielded_ >= *impl_->limit) return false;
    std::string line;
    while (std::getline(impl_->in, line)) {
        ++impl_->line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out = parse_record(line, impl_->line_number);
            ++yielded_;
            return true;
        } catch (const std::exception& e) {
            const std::string msg =
                impl_->path + ":" + std::to_string(impl_->line_number) + ": " + e.what();
            if (impl_->strict) throw ValidationError(msg);
            ++malformed_;
            log_warn("skipping malformed line (" + msg + ")");
        }
    }
    return false;
}

std::optional<Document> filter_and_truncate(const RawRecord& record, const CorpusOptions& opts) {
    Document doc;
    doc.id = record.id;

    const bool scores_usable =
        record.has_sent_scores && record.sent_scores.size() == record.text.size();

    for (std::size_t i = 0; i < record.text.size(); ++i) {
        Sentence s{tokenize(record.text[i], opts.tokenizer), record.text[i]};
        if (s.tokens.empty()) continue;
        doc.sentences.push_back(std::move(s));
        if (scores_usable) doc.sent_scores.push_back(record.sent_scores[i]);
    }
    for (const auto& raw : record.summary) {
        Sentence s{tokenize(raw, opts.tokenizer), raw};
        if (s.tokens.empty()) continue;
        doc.gold.push_back(std::move(s));
    }
    if (record.has_sent_scores && !scores_usable) {
        // Preserved unsliced so selector=external can report the mismatch.
        doc.sent_scores = record.sent_scores;
    }

    if (doc.sentences.empty() || doc.gold.empty()) return std::nullopt;

    const std::size_t budget = opts.max_tokens;
    doc.token_budget_applied = budget > 0;
    if (budget > 0) {
        std::size_t used = 0;
        std::size_t kept = 0;
        for (auto& sentence : doc.sentences) {
            if (used >= budget) break;
            if (used + sentence.tokens.size() > budget) {
                sentence.tokens.resize(budget - used);
                used = budget;
            } else {
                used += sentence.tokens.size();
            }
            ++kept;
        }
        doc.sentences.resize(kept);
        if (scores_usable) doc.sent_scores.resize(kept);
    }
    return doc;
}

Corpus load_corpus(const std::string& path, const CorpusOptions& opts) {
    Corpus corpus;
    JsonlReader reader(path, opts.strict, opts.limit);
    RawRecord record;
    double doc_tokens = 0.0;
    double sum_tokens = 0.0;
    while (reader.next(record)) {
        auto doc = filter_and_truncate(record, opts);
        if (!doc) {
            ++corpus.stats.dropped_empty;
            continue;
        }
        doc_tokens += static_cast<double>(doc->total_tokens());
        for (const auto& s : doc->gold) sum_tokens += static_cast<double>(s.tokens.size());
        corpus.documents.push_back(std::move(*doc));
    }
    corpus.stats.num_docs = corpus.documents.size();
    corpus.stats.malformed_lines = reader.malformed_lines();
    if (!corpus.documents.empty()) {
        corpus.stats.mean_doc_tokens = doc_tokens / static_cast<double>(corpus.documents.size());
        corpus.stats.mean_sum_tokens = sum_tokens / static_cast<double>(corpus.documents.size());
    }
    return corpus;
}

TokenList flatten_sentences(const std::vector<Sentence>& sentences) {
    TokenList out;
    std::size_t total = 0;
    for (const auto& s : sentences) total += s.tokens.size();
    out.reserve(total);
    for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
    return out;
}

TokenList flatten_gold(const Document& doc) { return flatten_sentences(doc.gold); }

}  // namespace matchlab
