#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtlex/corpus.hpp"
#include "courtlex/lm.hpp"
#include "courtlex/vocab.hpp"

namespace courtlex {

struct Hypothesis {
    std::vector<std::string> tokens;
    double asr_logscore = 0.0;  // <= 0, log-domain engine confidence
};

struct NBestList {
    std::string utterance_id;
    std::vector<Hypothesis> hypotheses;  // non-empty, descending asr_logscore
};

struct RescoreWeights {
    double lambda = 0.5;      // ASR-vs-LM interpolation, in [0,1]
    double beta = 0.5;        // vocabulary boost per hit, >= 0
    bool length_norm = true;  // divide LM score by |h|+1
};

struct ErrorModel {
    double substitution_rate = 0.0;
    double deletion_rate = 0.0;
    double insertion_rate = 0.0;
    double split_rate = 0.0;
    double merge_rate = 0.0;
    std::uint64_t seed = 0;

    double total_rate() const {
        return substitution_rate + deletion_rate + insertion_rate + split_rate + merge_rate;
    }
    void validate() const;
};

// Corrupt the reference n times independently; substitutions pick a
// near-spelling vocabulary word, asr_logscore is minus the corruption count.
// Deterministic under a fixed seed. Duplicate hypotheses are collapsed.
NBestList simulate_asr(const TokenStream& reference, const ErrorModel& model, int n,
                       const std::vector<std::string>& vocabulary);

// Non-overlapping vocabulary phrase occurrences, greedy left-to-right,
// longest phrase first.
int vocabulary_hits(const std::vector<std::string>& tokens, const VocabularyList& vocab);

// Shallow fusion: argmax of lambda*asr + (1-lambda)*lm + beta*hits.
// Ties break by higher asr_logscore, then original n-best rank.
Hypothesis rescore(const NBestList& nbest, const NGramLM& lm, const VocabularyList& vocab,
                   const RescoreWeights& weights);

// ASR JSON: {"utterances":[{"id":..., "alternatives":[{"transcript":...,
// "confidence": real in [0,1]}]}]}; confidence goes to log domain at parse.
std::vector<NBestList> parse_asr_json(const std::string& path);
std::vector<NBestList> parse_asr_json_text(const std::string& text);
std::string render_asr_json(const std::vector<NBestList>& lists);

}  // namespace courtlex
