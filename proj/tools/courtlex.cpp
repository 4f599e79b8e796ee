#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "courtlex/pipeline.hpp"

namespace fs = std::filesystem;
using namespace courtlex;

namespace {

std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out.push_back(' ');
        out += toks[i];
    }
    return out;
}

SmoothingSpec parse_smoothing(const std::string& s) {
    std::size_t colon = s.find(':');
    std::string kind = s.substr(0, colon);
    double param = colon == std::string::npos ? -1 : std::atof(s.c_str() + colon + 1);
    if (kind == "kneser_ney") return SmoothingSpec::kneser_ney(param < 0 ? 0.75 : param);
    if (kind == "add_k") return SmoothingSpec::add_k(param < 0 ? 1.0 : param);
    throw std::invalid_argument("--smoothing: expected kneser_ney:<d> or add_k:<k>, got '" + s +
                                "'");
}

int run(int argc, char** argv) {
    CLI::App app{"courtlex: legal-domain ASR adaptation and evaluation toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--seed", seed, "Seed for randomized steps");
    app.add_option("--threads", threads, "Worker thread cap (0 = machine cores)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Normalize and tokenize corpus documents");
    std::string ingest_manifest, ingest_out = "out";
    ingest->add_option("--corpus", ingest_manifest, "Corpus manifest (path<TAB>kind)")
        ->required();
    ingest->add_option("--out", ingest_out, "Output directory");

    // phrases
    auto* phrases_cmd = app.add_subcommand("phrases", "Detect domain collocations");
    std::string ph_manifest, ph_out = "phrases.tsv";
    CollocationConfig colloc;
    phrases_cmd->add_option("--corpus", ph_manifest)->required();
    phrases_cmd->add_option("--out", ph_out, "Phrase list output file");
    phrases_cmd->add_option("--delta", colloc.delta, "PMI discount");
    phrases_cmd->add_option("--threshold", colloc.threshold, "Score threshold");
    phrases_cmd->add_option("--min-count", colloc.min_count, "Minimum bigram frequency");
    phrases_cmd->add_option("--passes", colloc.passes, "Merge-and-redetect passes");

    // entities
    auto* entities_cmd = app.add_subcommand("entities", "Extract the entity inventory");
    std::string en_manifest, en_rules, en_out = "entities.tsv";
    entities_cmd->add_option("--corpus", en_manifest)->required();
    entities_cmd->add_option("--rules", en_rules, "Rules file (default: built-in)");
    entities_cmd->add_option("--out", en_out, "Inventory output file");

    // vocab
    auto* vocab_cmd = app.add_subcommand("vocab", "Assemble the custom vocabulary hint table");
    std::string vc_phrases, vc_inventory, vc_manual, vc_pron, vc_out = "vocab_hints.tsv";
    VocabCaps caps;
    vocab_cmd->add_option("--phrases", vc_phrases, "Phrase list file");
    vocab_cmd->add_option("--inventory", vc_inventory, "Entity inventory file");
    vocab_cmd->add_option("--manual", vc_manual, "Manual overrides file");
    vocab_cmd->add_option("--pronunciations", vc_pron,
                          "phrase<TAB>sounds_like override file");
    vocab_cmd->add_option("--max-collocations", caps.max_collocations);
    vocab_cmd->add_option("--max-entities", caps.max_entity_surfaces);
    vocab_cmd->add_option("--out", vc_out, "Hint table output file");

    // train-lm
    auto* lm_cmd = app.add_subcommand("train-lm", "Train the in-domain n-gram model");
    std::string lm_manifest, lm_out = "lm.arpa", lm_smoothing = "kneser_ney:0.75";
    int lm_order = 3, unk_threshold = 1;
    lm_cmd->add_option("--corpus", lm_manifest)->required();
    lm_cmd->add_option("--order", lm_order, "Model order (1-5)");
    lm_cmd->add_option("--smoothing", lm_smoothing, "kneser_ney:<d> or add_k:<k>");
    lm_cmd->add_option("--unk-threshold", unk_threshold, "Map rarer tokens to <unk>");
    lm_cmd->add_option("--out", lm_out, "ARPA output file");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate simulated ASR n-best lists");
    std::string sim_manifest, sim_out = "nbest.json";
    ErrorModel errors{0.04, 0.01, 0.01, 0.02, 0.02, 0};
    int sim_n = 5;
    sim_cmd->add_option("--corpus", sim_manifest, "Manifest; gold transcripts are corrupted")
        ->required();
    sim_cmd->add_option("--nbest", sim_n, "Hypotheses per utterance");
    sim_cmd->add_option("--sub-rate", errors.substitution_rate);
    sim_cmd->add_option("--del-rate", errors.deletion_rate);
    sim_cmd->add_option("--ins-rate", errors.insertion_rate);
    sim_cmd->add_option("--split-rate", errors.split_rate);
    sim_cmd->add_option("--merge-rate", errors.merge_rate);
    sim_cmd->add_option("--out", sim_out, "ASR JSON output file");

    // rescore
    auto* rescore_cmd = app.add_subcommand("rescore", "Rescore ASR n-best lists");
    std::string rs_nbest, rs_lm, rs_vocab, rs_out = "rescored.tsv";
    RescoreWeights weights;
    bool no_length_norm = false;
    rescore_cmd->add_option("--nbest", rs_nbest, "ASR JSON input")->required();
    rescore_cmd->add_option("--lm", rs_lm, "ARPA model")->required();
    rescore_cmd->add_option("--vocab", rs_vocab, "Hint table for vocabulary boosts");
    rescore_cmd->add_option("--lambda", weights.lambda, "ASR-vs-LM interpolation");
    rescore_cmd->add_option("--beta", weights.beta, "Boost per vocabulary hit");
    rescore_cmd->add_flag("--no-length-norm", no_length_norm);
    rescore_cmd->add_option("--out", rs_out, "id<TAB>transcript output file");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "WER and entity-capture report");
    std::string ev_pairs, ev_rules, ev_tsv;
    eval_cmd->add_option("--pairs", ev_pairs, "reference_path<TAB>hypothesis_path lines")
        ->required();
    eval_cmd->add_option("--rules", ev_rules, "Rules file (default: built-in)");
    eval_cmd->add_option("--tsv", ev_tsv, "Also write machine-readable TSV here");

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full adaptation pipeline");
    std::string pipe_config;
    pipe_cmd->add_option("--config", pipe_config, "key=value config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*ingest) {
        std::vector<Document> docs;
        std::vector<TokenStream> streams = load_corpus_streams(ingest_manifest, threads, &docs);
        for (std::size_t i = 0; i < streams.size(); ++i) {
            std::ostringstream out;
            for (const TokenRange& sent : streams[i].sentence_bounds) {
                for (std::size_t t = sent.first; t < sent.last; ++t) {
                    if (t > sent.first) out << ' ';
                    out << streams[i].tokens[t].normalized;
                }
                out << '\n';
            }
            atomic_write(ingest_out + "/" + docs[i].id + ".tokens.txt", out.str());
            std::cout << docs[i].id << '\t' << to_string(docs[i].kind) << '\t'
                      << streams[i].tokens.size() << " tokens\n";
        }
    } else if (*phrases_cmd) {
        auto streams = load_corpus_streams(ph_manifest, threads);
        atomic_write(ph_out, render_phrase_list(detect_phrases(streams, colloc)));
    } else if (*entities_cmd) {
        RuleSet rules = en_rules.empty() ? default_rules() : load_rules(en_rules);
        auto streams = load_corpus_streams(en_manifest, threads);
        atomic_write(en_out, render_inventory(entity_inventory(streams, rules)));
    } else if (*vocab_cmd) {
        std::vector<PhraseEntry> phrase_list;
        if (!vc_phrases.empty()) {
            std::ifstream in(vc_phrases);
            if (!in) throw IoError("cannot read phrase list: " + vc_phrases);
            std::ostringstream buf;
            buf << in.rdbuf();
            phrase_list = parse_phrase_list(buf.str());
        }
        EntityInventory inventory;
        if (!vc_inventory.empty()) {
            std::ifstream in(vc_inventory);
            if (!in) throw IoError("cannot read inventory: " + vc_inventory);
            std::ostringstream buf;
            buf << in.rdbuf();
            inventory = parse_inventory(buf.str());
        }
        std::vector<VocabularyEntry> manual;
        if (!vc_manual.empty()) manual = load_manual_entries(vc_manual);
        VocabularyList list = build_vocabulary(phrase_list, inventory, manual, caps);
        if (!vc_pron.empty()) {
            std::ifstream in(vc_pron);
            if (!in) throw IoError("cannot read pronunciations: " + vc_pron);
            std::map<std::string, std::string> prons;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::size_t tab = line.find('\t');
                if (tab == std::string::npos)
                    throw FormatError("pronunciations: expected 'phrase<TAB>sounds_like'");
                prons[line.substr(0, tab)] = line.substr(tab + 1);
            }
            std::vector<std::string> unmatched;
            list = apply_pronunciation_overrides(list, prons, &unmatched);
            for (const std::string& p : unmatched)
                std::cerr << "warning: pronunciation for absent phrase '" << p << "'\n";
        }
        atomic_write(vc_out, render_hint_table(list));
    } else if (*lm_cmd) {
        auto streams = load_corpus_streams(lm_manifest, threads);
        NGramLM lm = train_lm(streams, lm_order, parse_smoothing(lm_smoothing), unk_threshold);
        fs::path tmp = fs::path(lm_out);
        save_lm(lm, tmp.string() + ".tmp");
        fs::rename(tmp.string() + ".tmp", tmp);
        std::cout << "perplexity on training corpus: " << perplexity(lm, streams) << "\n";
    } else if (*sim_cmd) {
        errors.seed = seed;
        std::vector<Document> docs;
        std::vector<TokenStream> streams = load_corpus_streams(sim_manifest, threads, &docs);
        std::set<std::string> vocab_words;
        for (const TokenStream& s : streams)
            for (const Token& t : s.tokens) vocab_words.insert(t.normalized);
        std::vector<std::string> sim_vocab(vocab_words.begin(), vocab_words.end());
        std::vector<NBestList> lists;
        std::uint64_t utt_index = 0;
        for (std::size_t d = 0; d < streams.size(); ++d) {
            if (docs[d].kind != DocumentKind::gold_transcript) continue;
            std::size_t utt = 0;
            for (const TokenRange& sent : streams[d].sentence_bounds) {
                std::vector<std::string> toks;
                for (std::size_t t = sent.first; t < sent.last; ++t)
                    toks.push_back(streams[d].tokens[t].normalized);
                char suffix[16];
                std::snprintf(suffix, sizeof suffix, ":%06zu", utt++);
                TokenStream ref =
                    make_stream_from_sentences(docs[d].id + suffix, {toks});
                ErrorModel per_utt = errors;
                per_utt.seed = seed * 0x9e3779b97f4a7c15ULL + utt_index++;
                lists.push_back(simulate_asr(ref, per_utt, sim_n, sim_vocab));
            }
        }
        atomic_write(sim_out, render_asr_json(lists));
    } else if (*rescore_cmd) {
        std::vector<NBestList> lists = parse_asr_json(rs_nbest);
        NGramLM lm = load_lm(rs_lm);
        VocabularyList vocab;
        if (!rs_vocab.empty()) {
            std::ifstream in(rs_vocab);
            if (!in) throw IoError("cannot read vocabulary: " + rs_vocab);
            std::ostringstream buf;
            buf << in.rdbuf();
            vocab = parse_hint_table(buf.str());
        }
        weights.length_norm = !no_length_norm;
        std::ostringstream out;
        for (const NBestList& list : lists)
            out << list.utterance_id << '\t'
                << join_tokens(rescore(list, lm, vocab, weights).tokens) << '\n';
        atomic_write(rs_out, out.str());
    } else if (*eval_cmd) {
        RuleSet rules = ev_rules.empty() ? default_rules() : load_rules(ev_rules);
        std::ifstream in(ev_pairs);
        if (!in) throw IoError("cannot read pairs manifest: " + ev_pairs);
        std::vector<TokenStream> refs, hyps;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw FormatError("pairs line " + std::to_string(lineno) +
                                  ": expected 'reference_path<TAB>hypothesis_path'");
            Document ref = ingest_document(line.substr(0, tab), DocumentKind::gold_transcript);
            Document hyp = ingest_document(line.substr(tab + 1), DocumentKind::gold_transcript);
            refs.push_back(make_stream(ref.id, ref.raw_text));
            hyps.push_back(make_stream(hyp.id, hyp.raw_text));
        }
        EvalReport report = build_report(refs, {{"hypothesis", hyps}}, rules);
        std::cout << render_report(report);
        if (!ev_tsv.empty()) atomic_write(ev_tsv, render_report_tsv(report));
    } else if (*pipe_cmd) {
        PipelineConfig cfg = validate_config(pipe_config);
        if (seed != 0) cfg.errors.seed = seed;
        if (threads != 0) cfg.threads = threads;
        EvalReport report = run_pipeline(cfg);
        std::cout << render_report(report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
