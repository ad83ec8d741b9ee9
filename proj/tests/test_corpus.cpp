#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "matchlab/corpus.hpp"
#include "matchlab/util.hpp"
#include "test_support.hpp"

using namespace matchlab;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("matchlab_corpus_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".jsonl");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("The cat sat.") == TokenList{"the", "cat", "sat"});
    CHECK(tokenize("") == TokenList{});
    CHECK(tokenize("state-of-the-art") == TokenList{"state", "of", "the", "art"});
    CHECK(tokenize("  !!  ") == TokenList{});
    CHECK(tokenize("ABC123, x9!") == TokenList{"abc123", "x9"});
    CHECK(tokenize("a\tb\nc") == TokenList{"a", "b", "c"});
    // deterministic
    CHECK(tokenize("Some Repeated INPUT?") == tokenize("Some Repeated INPUT?"));
}

TEST_CASE("porter stemmer") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("ties") == "ti");
    CHECK(porter_stem("caress") == "caress");
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("feed") == "feed");
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("plastered") == "plaster");
    CHECK(porter_stem("motoring") == "motor");
    CHECK(porter_stem("sing") == "sing");
    CHECK(porter_stem("hopping") == "hop");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("sky") == "sky");
    CHECK(porter_stem("generalizations") == "gener");
    CHECK(porter_stem("oscillators") == "oscil");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("at") == "at");  // too short to touch
}

TEST_CASE("tokenize with stemming enabled") {
    TokenizerOptions opts;
    opts.stem = true;
    CHECK(tokenize("The ponies agreed.", opts) == TokenList{"the", "poni", "agre"});
    // tokens with digits are left unstemmed
    CHECK(tokenize("x86 ponies", opts) == TokenList{"x86", "poni"});
}

TEST_CASE("load_jsonl") {
    SUBCASE("well-formed lines pass through in order") {
        TempFile file(R"({"text": ["A b c."], "summary": ["B c."], "id": "d1"}
{"text": ["Second doc."], "summary": ["S."]}
)");
        JsonlReader reader(file.path.string(), /*strict=*/true);
        RawRecord r;
        REQUIRE(reader.next(r));
        CHECK(r.id == "d1");
        CHECK(r.text == std::vector<std::string>{"A b c."});
        CHECK(r.summary == std::vector<std::string>{"B c."});
        REQUIRE(reader.next(r));
        CHECK(r.id == "2");  // synthesized from the line number
        CHECK_FALSE(reader.next(r));
        CHECK(reader.malformed_lines() == 0);
    }
    SUBCASE("empty file yields nothing") {
        TempFile file("");
        JsonlReader reader(file.path.string(), true);
        RawRecord r;
        CHECK_FALSE(reader.next(r));
        CHECK(reader.malformed_lines() == 0);
    }
    SUBCASE("missing summary is fatal in strict mode, names the line") {
        TempFile file(R"({"text": ["A."]})");
        JsonlReader reader(file.path.string(), /*strict=*/true);
        RawRecord r;
        CHECK_THROWS_WITH_AS(reader.next(r), doctest::Contains(":1:"), ValidationError);
    }
    SUBCASE("lenient mode skips and counts malformed lines") {
        TempFile file("not json\n{\"text\": [\"A.\"], \"summary\": [\"B.\"]}\n{\"text\": 3, \"summary\": []}\n");
        JsonlReader reader(file.path.string(), /*strict=*/false);
        RawRecord r;
        REQUIRE(reader.next(r));
        CHECK(r.line_number == 2);
        CHECK_FALSE(reader.next(r));
        CHECK(reader.malformed_lines() == 2);
    }
    SUBCASE("limit caps the number of records") {
        TempFile file(R"({"text": ["A."], "summary": ["B."]}
{"text": ["C."], "summary": ["D."]}
{"text": ["E."], "summary": ["F."]}
)");
        JsonlReader reader(file.path.string(), true, std::size_t{2});
        RawRecord r;
        CHECK(reader.next(r));
        CHECK(reader.next(r));
        CHECK_FALSE(reader.next(r));
    }
    SUBCASE("unreadable file is fatal") {
        CHECK_THROWS_AS(JsonlReader("/nonexistent/path.jsonl", false), ValidationError);
    }
    SUBCASE("sent_scores passthrough") {
        TempFile file(R"({"text": ["A.", "B."], "summary": ["C."], "sent_scores": [0.2, 0.9]})");
        JsonlReader reader(file.path.string(), true);
        RawRecord r;
        REQUIRE(reader.next(r));
        CHECK(r.has_sent_scores);
        CHECK(r.sent_scores == std::vector<double>{0.2, 0.9});
    }
}

TEST_CASE("filter_and_truncate") {
    CorpusOptions opts;

    auto record = [](std::vector<std::string> text, std::vector<std::string> summary) {
        RawRecord r;
        r.id = "t";
        r.text = std::move(text);
        r.summary = std::move(summary);
        r.line_number = 1;
        return r;
    };

    SUBCASE("document under budget is kept whole") {
        auto doc = filter_and_truncate(record({"a b c", "d e", "f"}, {"a b"}), opts);
        REQUIRE(doc);
        CHECK(doc->sentences.size() == 3);
        CHECK(doc->total_tokens() == 6);
        CHECK(doc->token_budget_applied);
    }
    SUBCASE("single long sentence is cut at the budget") {
        std::string big;
        for (int i = 0; i < 600; ++i) big += "tok" + std::to_string(i) + " ";
        auto doc = filter_and_truncate(record({big}, {"x"}), opts);
        REQUIRE(doc);
        CHECK(doc->sentences.size() == 1);
        CHECK(doc->sentences[0].tokens.size() == 512);
        CHECK(doc->total_tokens() == 512);
    }
    SUBCASE("sentence crossing the boundary is cut, later sentences dropped") {
        std::string s300;
        for (int i = 0; i < 300; ++i) s300 += "a ";
        auto doc = filter_and_truncate(record({s300, s300, s300}, {"a"}), opts);
        REQUIRE(doc);
        CHECK(doc->sentences.size() == 2);
        CHECK(doc->sentences[0].tokens.size() == 300);
        CHECK(doc->sentences[1].tokens.size() == 212);
        CHECK(doc->total_tokens() == 512);
    }
    SUBCASE("empty summary drops the record") {
        CHECK_FALSE(filter_and_truncate(record({"a b"}, {"!!"}), opts));
        CHECK_FALSE(filter_and_truncate(record({"a b"}, {}), opts));
    }
    SUBCASE("empty document drops the record") {
        CHECK_FALSE(filter_and_truncate(record({"..."}, {"a b"}), opts));
    }
    SUBCASE("empty-token sentences are removed, survivors keep order") {
        auto doc = filter_and_truncate(record({"a b", "??", "c d"}, {"a"}), opts);
        REQUIRE(doc);
        REQUIRE(doc->sentences.size() == 2);
        CHECK(doc->sentences[0].tokens == TokenList{"a", "b"});
        CHECK(doc->sentences[1].tokens == TokenList{"c", "d"});
    }
    SUBCASE("sent_scores are sliced along with their sentences") {
        RawRecord r = record({"a b", "??", "c d"}, {"a"});
        r.has_sent_scores = true;
        r.sent_scores = {0.1, 0.2, 0.3};
        auto doc = filter_and_truncate(r, opts);
        REQUIRE(doc);
        CHECK(doc->sent_scores == std::vector<double>{0.1, 0.3});
    }
    SUBCASE("disabling the budget yields a supersequence") {
        std::string s300;
        for (int i = 0; i < 300; ++i) s300 += "b" + std::to_string(i) + " ";
        CorpusOptions unlimited = opts;
        unlimited.max_tokens = 0;
        auto trimmed = filter_and_truncate(record({s300, s300}, {"b1"}), opts);
        auto full = filter_and_truncate(record({s300, s300}, {"b1"}), unlimited);
        REQUIRE(trimmed);
        REQUIRE(full);
        CHECK_FALSE(full->token_budget_applied);
        CHECK(full->total_tokens() == 600);
        CHECK(trimmed->total_tokens() == 512);
        // prefix property
        const auto t = flatten_sentences(trimmed->sentences);
        const auto f = flatten_sentences(full->sentences);
        REQUIRE(t.size() <= f.size());
        CHECK(std::equal(t.begin(), t.end(), f.begin()));
    }
}

TEST_CASE("load_corpus stats and determinism") {
    TempFile file(R"({"text": ["Alpha beta.", "Gamma."], "summary": ["Alpha."], "id": "a"}
{"text": ["..."], "summary": ["x"], "id": "drop-me"}
{"text": ["One two three."], "summary": ["Two three."], "id": "b"}
)");
    CorpusOptions opts;
    const Corpus corpus = load_corpus(file.path.string(), opts);
    CHECK(corpus.documents.size() == 2);
    CHECK(corpus.stats.num_docs == 2);
    CHECK(corpus.stats.dropped_empty == 1);
    CHECK(corpus.stats.num_docs + corpus.stats.dropped_empty == 3);
    CHECK(corpus.stats.mean_doc_tokens == doctest::Approx(3.0));
    CHECK(corpus.stats.mean_sum_tokens == doctest::Approx(1.5));

    const Corpus again = load_corpus(file.path.string(), opts);
    REQUIRE(again.documents.size() == corpus.documents.size());
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        CHECK(again.documents[i].id == corpus.documents[i].id);
        CHECK(flatten_sentences(again.documents[i].sentences) ==
              flatten_sentences(corpus.documents[i].sentences));
        CHECK(flatten_gold(again.documents[i]) == flatten_gold(corpus.documents[i]));
    }
}
