#include "courtlex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace courtlex {

LogLevel log_level() {
    const char* env = std::getenv("COURTLEX_LOG");
    if (!env) return LogLevel::error;
    std::string v = env;
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
}

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) <= static_cast<int>(log_level()))
        std::cerr << "[courtlex] " << msg << "\n";
}

void atomic_write(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write: " + tmp.string());
        out << content;
        if (!out) throw IoError("failed writing: " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

struct KeyValues {
    std::map<std::string, std::string> values;
    std::string origin;

    bool has(const std::string& k) const { return values.count(k) != 0; }
    std::string get(const std::string& k, const std::string& dflt) const {
        auto it = values.find(k);
        return it == values.end() ? dflt : it->second;
    }
};

KeyValues parse_key_values(const std::string& text, const std::string& origin,
                           std::vector<std::string>& problems) {
    KeyValues kv;
    kv.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected key=value");
            continue;
        }
        kv.values[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<std::string> problems;
    KeyValues kv = parse_key_values(text, origin, problems);

    PipelineConfig cfg;
    auto get_num = [&](const std::string& key, double dflt) {
        if (!kv.has(key)) return dflt;
        try {
            return std::stod(kv.values.at(key));
        } catch (const std::exception&) {
            problems.push_back(key + ": not a number: '" + kv.values.at(key) + "'");
            return dflt;
        }
    };
    auto get_int = [&](const std::string& key, int dflt) {
        return static_cast<int>(get_num(key, dflt));
    };

    cfg.corpus_manifest = kv.get("corpus_manifest", "");
    cfg.rules_path = kv.get("rules", "");
    cfg.manual_vocab_path = kv.get("manual_vocab", "");
    cfg.out_dir = kv.get("out_dir", "out");
    cfg.colloc.delta = get_num("colloc.delta", cfg.colloc.delta);
    cfg.colloc.threshold = get_num("colloc.threshold", cfg.colloc.threshold);
    cfg.colloc.min_count = get_int("colloc.min_count", static_cast<int>(cfg.colloc.min_count));
    cfg.colloc.passes = get_int("colloc.passes", cfg.colloc.passes);
    cfg.lm_order = get_int("lm.order", cfg.lm_order);
    cfg.unk_threshold = get_int("lm.unk_threshold", cfg.unk_threshold);
    std::string smoothing = kv.get("lm.smoothing", "kneser_ney:0.75");
    {
        std::size_t colon = smoothing.find(':');
        std::string kind = smoothing.substr(0, colon);
        double param = colon == std::string::npos ? -1 : std::atof(smoothing.c_str() + colon + 1);
        if (kind == "kneser_ney")
            cfg.smoothing = SmoothingSpec::kneser_ney(param < 0 ? 0.75 : param);
        else if (kind == "add_k")
            cfg.smoothing = SmoothingSpec::add_k(param < 0 ? 1.0 : param);
        else
            problems.push_back("lm.smoothing: expected kneser_ney:<d> or add_k:<k>, got '" +
                               smoothing + "'");
    }
    cfg.weights.lambda = get_num("rescore.lambda", cfg.weights.lambda);
    cfg.weights.beta = get_num("rescore.beta", cfg.weights.beta);
    cfg.weights.length_norm = kv.get("rescore.length_norm", "true") != "false";
    cfg.errors.substitution_rate = get_num("error.substitution_rate", cfg.errors.substitution_rate);
    cfg.errors.deletion_rate = get_num("error.deletion_rate", cfg.errors.deletion_rate);
    cfg.errors.insertion_rate = get_num("error.insertion_rate", cfg.errors.insertion_rate);
    cfg.errors.split_rate = get_num("error.split_rate", cfg.errors.split_rate);
    cfg.errors.merge_rate = get_num("error.merge_rate", cfg.errors.merge_rate);
    cfg.errors.seed = static_cast<std::uint64_t>(get_num("seed", 0));
    cfg.nbest = get_int("nbest", cfg.nbest);
    cfg.caps.max_collocations =
        static_cast<std::size_t>(get_int("caps.collocations", 500));
    cfg.caps.max_entity_surfaces =
        static_cast<std::size_t>(get_int("caps.entities", 500));
    cfg.threads = get_int("threads", cfg.threads);

    // Collect every invariant violation before failing.
    if (cfg.corpus_manifest.empty())
        problems.push_back("corpus_manifest: required");
    else if (!fs::exists(cfg.corpus_manifest))
        problems.push_back("corpus_manifest: no such file: " + cfg.corpus_manifest);
    if (!cfg.rules_path.empty() && !fs::exists(cfg.rules_path))
        problems.push_back("rules: no such file: " + cfg.rules_path);
    if (!cfg.manual_vocab_path.empty() && !fs::exists(cfg.manual_vocab_path))
        problems.push_back("manual_vocab: no such file: " + cfg.manual_vocab_path);
    if (cfg.colloc.delta < 0) problems.push_back("colloc.delta: must be >= 0");
    if (cfg.colloc.min_count < 1) problems.push_back("colloc.min_count: must be >= 1");
    if (cfg.colloc.passes < 1) problems.push_back("colloc.passes: must be >= 1");
    if (cfg.lm_order < 1 || cfg.lm_order > 5) problems.push_back("lm.order: must lie in [1,5]");
    if (cfg.unk_threshold < 1) problems.push_back("lm.unk_threshold: must be >= 1");
    if (cfg.smoothing.kind == SmoothingKind::kneser_ney &&
        (cfg.smoothing.param <= 0 || cfg.smoothing.param >= 1))
        problems.push_back("lm.smoothing: kneser_ney discount must lie in (0,1)");
    if (cfg.smoothing.kind == SmoothingKind::add_k && cfg.smoothing.param < 0)
        problems.push_back("lm.smoothing: add_k constant must be >= 0");
    if (cfg.weights.lambda < 0 || cfg.weights.lambda > 1)
        problems.push_back("rescore.lambda: must lie in [0,1]");
    if (cfg.weights.beta < 0) problems.push_back("rescore.beta: must be >= 0");
    for (auto [rate, name] : {std::pair{cfg.errors.substitution_rate, "error.substitution_rate"},
                              {cfg.errors.deletion_rate, "error.deletion_rate"},
                              {cfg.errors.insertion_rate, "error.insertion_rate"},
                              {cfg.errors.split_rate, "error.split_rate"},
                              {cfg.errors.merge_rate, "error.merge_rate"}})
        if (rate < 0 || rate > 1) problems.push_back(std::string(name) + ": must lie in [0,1]");
    if (cfg.errors.total_rate() > 1.0)
        problems.push_back("error.*: rates must sum to at most 1");
    if (cfg.nbest < 1) problems.push_back("nbest: must be >= 1");
    if (cfg.threads < 0) problems.push_back("threads: must be >= 0");

    if (!problems.empty()) {
        std::string msg = origin + ": invalid config:";
        for (const std::string& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    return cfg;
}

PipelineConfig validate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::vector<TokenStream> load_corpus_streams(const std::string& manifest_path, int threads,
                                             std::vector<Document>* docs_out) {
    auto entries = read_manifest(manifest_path);
    std::vector<Document> docs(entries.size());
    std::vector<TokenStream> streams(entries.size());

    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(entries.size(), 1));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= entries.size() || failed.load()) return;
            try {
                docs[i] = ingest_document(entries[i].first, entries[i].second);
                streams[i] = make_stream(docs[i].id, docs[i].raw_text);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw IoError(first_error);

    if (docs_out) *docs_out = std::move(docs);
    return streams;
}

EvalReport run_pipeline(const PipelineConfig& config) {
    RuleSet rules = config.rules_path.empty() ? default_rules() : load_rules(config.rules_path);

    std::vector<Document> docs;
    std::vector<TokenStream> streams = load_corpus_streams(config.corpus_manifest,
                                                           config.threads, &docs);

    std::vector<TokenStream> training;
    std::vector<const TokenStream*> transcripts;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].kind == DocumentKind::asr_output) continue;
        training.push_back(streams[i]);
        if (docs[i].kind == DocumentKind::gold_transcript) transcripts.push_back(&streams[i]);
    }
    if (training.empty())
        throw std::invalid_argument("pipeline: manifest contains no training documents");

    log_line(LogLevel::info, "detecting phrases");
    std::vector<PhraseEntry> phrases = detect_phrases(training, config.colloc);
    atomic_write(config.out_dir + "/phrases.tsv", render_phrase_list(phrases));

    log_line(LogLevel::info, "extracting entity inventory");
    EntityInventory inventory = entity_inventory(training, rules);
    atomic_write(config.out_dir + "/entities.tsv", render_inventory(inventory));

    std::vector<VocabularyEntry> manual;
    if (!config.manual_vocab_path.empty()) manual = load_manual_entries(config.manual_vocab_path);
    VocabularyList vocab = build_vocabulary(phrases, inventory, manual, config.caps);
    atomic_write(config.out_dir + "/vocab_hints.tsv", render_hint_table(vocab));

    log_line(LogLevel::info, "training language model");
    NGramLM lm = train_lm(training, config.lm_order, config.smoothing, config.unk_threshold);
    save_lm(lm, config.out_dir + "/lm.arpa");

    // Simulated ASR over gold-transcript utterances.
    if (transcripts.empty())
        throw std::invalid_argument("pipeline: manifest contains no gold transcripts");
    std::set<std::string> vocab_words;
    for (const TokenStream& s : training)
        for (const Token& t : s.tokens) vocab_words.insert(t.normalized);
    std::vector<std::string> sim_vocab(vocab_words.begin(), vocab_words.end());

    std::vector<TokenStream> references;
    for (const TokenStream* doc : transcripts) {
        std::size_t utt = 0;
        for (const TokenRange& sent : doc->sentence_bounds) {
            std::vector<std::string> toks;
            for (std::size_t i = sent.first; i < sent.last; ++i)
                toks.push_back(doc->tokens[i].normalized);
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, ":%06zu", utt++);
            references.push_back(
                make_stream_from_sentences(doc->document_id + suffix, {toks}));
        }
    }

    log_line(LogLevel::info, "simulating ASR output");
    std::vector<NBestList> nbest;
    std::uint64_t utt_index = 0;
    for (const TokenStream& ref : references) {
        ErrorModel per_utt = config.errors;
        per_utt.seed = config.errors.seed * 0x9e3779b97f4a7c15ULL + utt_index++;
        nbest.push_back(simulate_asr(ref, per_utt, config.nbest, sim_vocab));
    }
    atomic_write(config.out_dir + "/nbest.json", render_asr_json(nbest));

    log_line(LogLevel::info, "rescoring");
    std::ostringstream baseline_out, rescored_out;
    std::vector<TokenStream> baseline_streams, rescored_streams;
    for (std::size_t i = 0; i < nbest.size(); ++i) {
        const Hypothesis& top = nbest[i].hypotheses.front();
        Hypothesis chosen = rescore(nbest[i], lm, vocab, config.weights);
        auto join = [](const std::vector<std::string>& toks) {
            std::string out;
            for (std::size_t k = 0; k < toks.size(); ++k) {
                if (k) out.push_back(' ');
                out += toks[k];
            }
            return out;
        };
        baseline_out << nbest[i].utterance_id << '\t' << join(top.tokens) << '\n';
        rescored_out << nbest[i].utterance_id << '\t' << join(chosen.tokens) << '\n';
        baseline_streams.push_back(
            make_stream_from_sentences(nbest[i].utterance_id, {top.tokens}));
        rescored_streams.push_back(
            make_stream_from_sentences(nbest[i].utterance_id, {chosen.tokens}));
    }
    atomic_write(config.out_dir + "/baseline.tsv", baseline_out.str());
    atomic_write(config.out_dir + "/rescored.tsv", rescored_out.str());

    log_line(LogLevel::info, "evaluating");
    EvalReport report = build_report(references,
                                     {{"top1", baseline_streams}, {"rescored", rescored_streams}},
                                     rules);
    atomic_write(config.out_dir + "/report.tsv", render_report_tsv(report));
    return report;
}

}  // namespace courtlex
