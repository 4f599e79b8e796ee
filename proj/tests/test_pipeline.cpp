#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "courtlex/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace courtlex;
namespace ct = courtlex::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::string render_sentences(const std::vector<std::vector<std::string>>& sents) {
    std::ostringstream out;
    for (const auto& sent : sents) {
        for (std::size_t i = 0; i < sent.size(); ++i) {
            if (i) out << ' ';
            out << sent[i];
        }
        out << ".\n";
    }
    return out.str();
}

// A self-contained corpus directory: two training docs and one transcript.
fs::path make_fixture(const std::string& name) {
    fs::path root = fs::temp_directory_path() / name;
    fs::remove_all(root);
    ct::LegalCorpus legal = ct::make_legal_corpus(2024, 300, 30);
    std::vector<std::vector<std::string>> half_a(legal.training.begin(),
                                                 legal.training.begin() + 150);
    std::vector<std::vector<std::string>> half_b(legal.training.begin() + 150,
                                                 legal.training.end());
    write_file(root / "judgement_a.txt", render_sentences(half_a));
    write_file(root / "judgement_b.txt", render_sentences(half_b));
    write_file(root / "hearing.txt", render_sentences(legal.heldout));
    write_file(root / "manifest.tsv",
               (root / "judgement_a.txt").string() + "\tjudgement\n" +
                   (root / "judgement_b.txt").string() + "\tjudgement\n" +
                   (root / "hearing.txt").string() + "\tgold_transcript\n");
    return root;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
    PipelineConfig cfg;
    CHECK(cfg.weights.lambda == 0.5);
    CHECK(cfg.weights.beta == 0.5);
    CHECK(cfg.nbest == 5);

    fs::path root = make_fixture("courtlex_cfg_fixture");
    std::string text = "corpus_manifest=" + (root / "manifest.tsv").string() +
                       "\nlm.order=2\nrescore.lambda=0.25\nseed=42\n# comment\n";
    PipelineConfig parsed = parse_config_text(text, "test");
    CHECK(parsed.lm_order == 2);
    CHECK(parsed.weights.lambda == 0.25);
    CHECK(parsed.errors.seed == 42);
    fs::remove_all(root);
}

TEST_CASE("config errors list every violation at once") {
    fs::path root = make_fixture("courtlex_cfg_errors");
    std::string text = "corpus_manifest=" + (root / "manifest.tsv").string() +
                       "\nrescore.lambda=1.5\nlm.order=9\nnbest=0\n";
    try {
        parse_config_text(text, "test");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string what = e.what();
        CHECK(what.find("rescore.lambda") != std::string::npos);
        CHECK(what.find("lm.order") != std::string::npos);
        CHECK(what.find("nbest") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("", "test"), ConfigError);  // manifest required
    CHECK_THROWS_AS(validate_config("/nonexistent.cfg"), IoError);
    fs::remove_all(root);
}

TEST_CASE("atomic_write leaves no temp file and replaces content whole") {
    fs::path dir = fs::temp_directory_path() / "courtlex_atomic";
    fs::remove_all(dir);
    fs::path target = dir / "nested" / "out.txt";
    atomic_write(target.string(), "first\n");
    CHECK(slurp(target) == "first\n");
    atomic_write(target.string(), "second\n");
    CHECK(slurp(target) == "second\n");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path()))
        ++entries;
    CHECK(entries == 1);
    fs::remove_all(dir);
}

TEST_CASE("load_corpus_streams preserves manifest order regardless of threads") {
    fs::path root = make_fixture("courtlex_load_fixture");
    std::vector<TokenStream> seq = load_corpus_streams((root / "manifest.tsv").string(), 1);
    std::vector<TokenStream> par = load_corpus_streams((root / "manifest.tsv").string(), 4);
    REQUIRE(seq.size() == 3);
    REQUIRE(par.size() == 3);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq[i].document_id == par[i].document_id);
        CHECK(seq[i].token_strings() == par[i].token_strings());
    }
    CHECK_THROWS_AS(load_corpus_streams("/nonexistent.tsv", 1), IoError);
    fs::remove_all(root);
}

TEST_CASE("run_pipeline produces the full artifact set deterministically") {
    fs::path root = make_fixture("courtlex_pipe_fixture");
    PipelineConfig cfg;
    cfg.corpus_manifest = (root / "manifest.tsv").string();
    cfg.errors.seed = 7;
    cfg.threads = 2;

    const std::vector<std::string> artifacts = {"phrases.tsv",  "entities.tsv",
                                                "vocab_hints.tsv", "lm.arpa",
                                                "nbest.json",   "baseline.tsv",
                                                "rescored.tsv", "report.tsv"};

    cfg.out_dir = (root / "out1").string();
    EvalReport r1 = run_pipeline(cfg);
    cfg.out_dir = (root / "out2").string();
    EvalReport r2 = run_pipeline(cfg);

    REQUIRE(r1.systems.size() == 2);
    CHECK(r1.systems[0].system == "top1");
    CHECK(r1.systems[1].system == "rescored");
    CHECK(r1.systems[0].macro_wer > 0.0);  // the simulator did corrupt something

    for (const std::string& a : artifacts) {
        CAPTURE(a);
        REQUIRE(fs::exists(root / "out1" / a));
        CHECK(slurp(root / "out1" / a) == slurp(root / "out2" / a));
    }
    CHECK(r1.systems[0].macro_wer == r2.systems[0].macro_wer);
    CHECK(r1.systems[1].macro_wer == r2.systems[1].macro_wer);

    // A different seed changes the simulated errors.
    cfg.errors.seed = 8;
    cfg.out_dir = (root / "out3").string();
    run_pipeline(cfg);
    CHECK(slurp(root / "out1" / "nbest.json") != slurp(root / "out3" / "nbest.json"));
    // But corpus-derived artifacts are seed-independent.
    CHECK(slurp(root / "out1" / "lm.arpa") == slurp(root / "out3" / "lm.arpa"));
    CHECK(slurp(root / "out1" / "phrases.tsv") == slurp(root / "out3" / "phrases.tsv"));
    fs::remove_all(root);
}

TEST_CASE("run_pipeline requires training documents and transcripts") {
    fs::path root = fs::temp_directory_path() / "courtlex_pipe_empty";
    fs::remove_all(root);
    write_file(root / "only.txt", "my lady the appeal is dismissed.\n");
    write_file(root / "manifest.tsv", (root / "only.txt").string() + "\tjudgement\n");
    PipelineConfig cfg;
    cfg.corpus_manifest = (root / "manifest.tsv").string();
    cfg.out_dir = (root / "out").string();
    CHECK_THROWS_AS(run_pipeline(cfg), std::invalid_argument);  // no transcript
    fs::remove_all(root);
}
