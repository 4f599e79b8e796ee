#pragma once

#include <string>
#include <vector>

#include "courtlex/collocations.hpp"
#include "courtlex/corpus.hpp"
#include "courtlex/entities.hpp"
#include "courtlex/eval.hpp"
#include "courtlex/lm.hpp"
#include "courtlex/rescore.hpp"
#include "courtlex/vocab.hpp"

namespace courtlex {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct PipelineConfig {
    std::string corpus_manifest;
    std::string rules_path;         // empty = built-in default rules
    std::string manual_vocab_path;  // optional
    CollocationConfig colloc;
    int lm_order = 3;
    SmoothingSpec smoothing = SmoothingSpec::kneser_ney(0.75);
    int unk_threshold = 1;
    RescoreWeights weights;
    ErrorModel errors{0.04, 0.01, 0.01, 0.02, 0.02, 0};
    int nbest = 5;
    VocabCaps caps;
    std::string out_dir = "out";
    int threads = 0;  // 0 = machine cores
};

// Flat key=value file. Every violation is reported; errors list all of them.
PipelineConfig validate_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);

// Write via a temp file in the same directory plus atomic rename, so a
// failed command leaves no partial output.
void atomic_write(const std::string& path, const std::string& content);

// Log level from COURTLEX_LOG in {error, info, debug}; default error.
enum class LogLevel { error = 0, info = 1, debug = 2 };
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

// phrases -> entities -> vocab -> train-lm -> simulate -> rescore -> evaluate.
// Byte-identical outputs for identical config and seed. Returns the report.
EvalReport run_pipeline(const PipelineConfig& config);

// Build one stream per document listed in the manifest, in manifest order,
// using at most `threads` workers.
std::vector<TokenStream> load_corpus_streams(const std::string& manifest_path, int threads,
                                             std::vector<Document>* docs_out = nullptr);

}  // namespace courtlex
