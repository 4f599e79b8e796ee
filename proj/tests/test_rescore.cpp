#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "courtlex/rescore.hpp"
#include "support/synthetic.hpp"

using namespace courtlex;
namespace ct = courtlex::testing;
namespace fs = std::filesystem;

namespace {

TokenStream ref_stream(std::vector<std::string> toks) {
    return make_stream_from_sentences("u1", {std::move(toks)});
}

std::vector<std::string> small_vocab() {
    return {"financial", "order", "further", "makes", "it", "my", "lady", "court",
            "appeal", "section", "rose", "so", "difficult", "natural", "five"};
}

}  // namespace

TEST_CASE("zero rates reproduce the reference with score 0") {
    ErrorModel clean;
    clean.seed = 7;
    NBestList out = simulate_asr(ref_stream({"my", "lady", "rose"}), clean, 5, small_vocab());
    REQUIRE(out.hypotheses.size() == 1);  // duplicates collapse
    CHECK(out.hypotheses[0].tokens == std::vector<std::string>{"my", "lady", "rose"});
    CHECK(out.hypotheses[0].asr_logscore == 0.0);
}

TEST_CASE("merge corruption fuses adjacent tokens") {
    ErrorModel merge_only;
    merge_only.merge_rate = 1.0;
    merge_only.seed = 1;
    NBestList out =
        simulate_asr(ref_stream({"financial", "order"}), merge_only, 1, small_vocab());
    REQUIRE(out.hypotheses.size() == 1);
    REQUIRE(out.hypotheses[0].tokens.size() == 1);
    CHECK(out.hypotheses[0].tokens[0] == "financialorder");
    CHECK(out.hypotheses[0].asr_logscore == -1.0);
}

TEST_CASE("fixed seed gives identical n-best lists") {
    ErrorModel model{0.2, 0.05, 0.05, 0.1, 0.1, 99};
    TokenStream ref = ref_stream({"it", "makes", "further", "financial", "order"});
    NBestList a = simulate_asr(ref, model, 8, small_vocab());
    NBestList b = simulate_asr(ref, model, 8, small_vocab());
    REQUIRE(a.hypotheses.size() == b.hypotheses.size());
    for (std::size_t i = 0; i < a.hypotheses.size(); ++i) {
        CHECK(a.hypotheses[i].tokens == b.hypotheses[i].tokens);
        CHECK(a.hypotheses[i].asr_logscore == b.hypotheses[i].asr_logscore);
    }
    // Hypotheses sorted by descending score.
    for (std::size_t i = 1; i < a.hypotheses.size(); ++i)
        CHECK(a.hypotheses[i - 1].asr_logscore >= a.hypotheses[i].asr_logscore);
}

TEST_CASE("simulate_asr rejects bad arguments") {
    CHECK_THROWS_AS(simulate_asr(ref_stream({"a"}), ErrorModel{}, 0, small_vocab()),
                    std::invalid_argument);
    ErrorModel bad;
    bad.substitution_rate = 0.9;
    bad.deletion_rate = 0.9;
    CHECK_THROWS_AS(simulate_asr(ref_stream({"a"}), bad, 1, small_vocab()),
                    std::invalid_argument);
}

TEST_CASE("rescore degenerate cases") {
    ct::LegalCorpus legal = ct::make_legal_corpus(55, 200, 0);
    NGramLM lm = train_lm({make_stream_from_sentences("c", legal.training)}, 3,
                          SmoothingSpec::kneser_ney(0.75));
    NBestList single;
    single.utterance_id = "u";
    single.hypotheses = {{{"my", "lady"}, -1.0}};
    CHECK(rescore(single, lm, {}, {}).tokens == std::vector<std::string>{"my", "lady"});

    NBestList two;
    two.utterance_id = "u";
    two.hypotheses = {{{"my", "lady"}, -1.0}, {{"melody"}, -2.0}};
    RescoreWeights asr_only;
    asr_only.lambda = 1.0;
    asr_only.beta = 0.0;
    CHECK(rescore(two, lm, {}, asr_only).tokens == std::vector<std::string>{"my", "lady"});
}

TEST_CASE("in-domain LM prefers 'financial order' over 'five natural'") {
    // LM trained on text where "financial order" recurs.
    std::vector<std::vector<std::string>> sents;
    for (int i = 0; i < 30; ++i) {
        sents.push_back({"it", "makes", "further", "financial", "order"});
        sents.push_back({"the", "financial", "order", "stands"});
        sents.push_back({"five", "witnesses", "appeared"});
        sents.push_back({"natural", "justice", "requires", "notice"});
    }
    NGramLM lm = train_lm({make_stream_from_sentences("c", sents)}, 3,
                          SmoothingSpec::kneser_ney(0.75));
    NBestList nbest;
    nbest.utterance_id = "u";
    nbest.hypotheses = {{{"it", "makes", "further", "five", "natural"}, -2.0},
                        {{"it", "makes", "further", "financial", "order"}, -2.0}};
    RescoreWeights w;
    w.lambda = 0.5;
    w.beta = 0.0;
    CHECK(rescore(nbest, lm, {}, w).tokens ==
          std::vector<std::string>{"it", "makes", "further", "financial", "order"});
}

TEST_CASE("vocabulary hits count non-overlapping longest-first") {
    VocabularyList vocab;
    VocabularyEntry a, b;
    a.phrase = {"my", "lady"};
    a.display_as = "my lady";
    b.phrase = {"my"};
    b.display_as = "my";
    vocab.entries = {a, b};
    CHECK(vocabulary_hits({"my", "lady", "said", "my"}, vocab) == 2);
    CHECK(vocabulary_hits({"so", "it", "goes"}, vocab) == 0);
}

TEST_CASE("argmax is invariant to constant asr_logscore shifts") {
    ct::LegalCorpus legal = ct::make_legal_corpus(77, 200, 0);
    NGramLM lm = train_lm({make_stream_from_sentences("c", legal.training)}, 3,
                          SmoothingSpec::kneser_ney(0.75));
    VocabularyList vocab;
    VocabularyEntry e;
    e.phrase = {"my", "lady"};
    e.display_as = "my lady";
    vocab.entries = {e};

    std::mt19937_64 rng(13);
    ErrorModel model{0.2, 0.05, 0.05, 0.1, 0.1, 0};
    std::uniform_int_distribution<std::size_t> pick(0, legal.training.size() - 1);
    std::uniform_real_distribution<double> shift_dist(0.5, 10.0);
    for (int it = 0; it < 200; ++it) {
        model.seed = 1000 + it;
        TokenStream ref = make_stream_from_sentences("u", {legal.training[pick(rng)]});
        NBestList nbest = simulate_asr(ref, model, 5, small_vocab());
        Hypothesis chosen = rescore(nbest, lm, vocab, {});

        NBestList shifted = nbest;
        double shift = shift_dist(rng);
        for (Hypothesis& h : shifted.hypotheses) h.asr_logscore -= shift;
        Hypothesis chosen2 = rescore(shifted, lm, vocab, {});
        CHECK(chosen.tokens == chosen2.tokens);
    }
}

TEST_CASE("asr json parse and render") {
    std::string text = R"({
      "utterances": [
        {"id": "u1", "alternatives": [
          {"transcript": "So my lady", "confidence": 0.9},
          {"transcript": "So melody", "confidence": 0.8},
          {"transcript": "Sow my lady", "confidence": 0.7}]},
        {"id": "u2", "alternatives": [
          {"transcript": "it makes further financial order", "confidence": 0.95},
          {"transcript": "it makes further five natural", "confidence": 0.5},
          {"transcript": "it may further five natural", "confidence": 0.4}]}
      ]})";
    std::vector<NBestList> lists = parse_asr_json_text(text);
    REQUIRE(lists.size() == 2);
    CHECK(lists[0].hypotheses.size() == 3);
    CHECK(lists[1].hypotheses.size() == 3);
    CHECK(lists[0].utterance_id == "u1");
    CHECK(lists[0].hypotheses[0].tokens == std::vector<std::string>{"so", "my", "lady"});
    CHECK(lists[0].hypotheses[0].asr_logscore <= 0.0);

    CHECK(parse_asr_json_text(R"({"utterances": []})").empty());

    // Missing confidence names the field path.
    std::string bad = R"({"utterances": [{"id": "u", "alternatives": [{"transcript": "x"}]}]})";
    try {
        parse_asr_json_text(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("confidence") != std::string::npos);
    }

    // Round-trip through render keeps structure.
    std::string rendered = render_asr_json(lists);
    std::vector<NBestList> again = parse_asr_json_text(rendered);
    REQUIRE(again.size() == lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) {
        REQUIRE(again[i].hypotheses.size() == lists[i].hypotheses.size());
        for (std::size_t h = 0; h < lists[i].hypotheses.size(); ++h)
            CHECK(again[i].hypotheses[h].tokens == lists[i].hypotheses[h].tokens);
    }
}

TEST_CASE("parse_asr_json reads files and rejects missing ones") {
    CHECK_THROWS_AS(parse_asr_json("/nonexistent.json"), IoError);
    fs::path p = fs::temp_directory_path() / "courtlex_nbest.json";
    {
        std::ofstream out(p);
        out << R"({"utterances": [{"id": "u1", "alternatives": [
               {"transcript": "so my lady", "confidence": 1.0}]}]})";
    }
    std::vector<NBestList> lists = parse_asr_json(p.string());
    REQUIRE(lists.size() == 1);
    CHECK(lists[0].hypotheses[0].asr_logscore == 0.0);
    fs::remove(p);
}
