#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "courtlex/corpus.hpp"

namespace courtlex {

// N-gram keys are the tokens joined with single spaces.
struct NGramCounts {
    int order = 1;
    std::unordered_map<std::string, std::int64_t> counts;
    std::int64_t total_unigrams = 0;  // N; meaningful for order 1

    std::int64_t count(const std::string& key) const {
        auto it = counts.find(key);
        return it == counts.end() ? 0 : it->second;
    }
};

struct PhraseEntry {
    std::vector<std::string> tokens;  // length >= 2
    double score = 0.0;
    std::int64_t frequency = 0;

    std::string joined(char sep = ' ') const;
};

struct CollocationConfig {
    double delta = 5.0;
    double threshold = 10.0;
    std::int64_t min_count = 5;
    int passes = 2;
};

// Sliding-window counts per sentence; n-grams never cross sentence bounds.
// order must be 1 or 2.
NGramCounts count_ngrams(const TokenStream& stream, int order);
NGramCounts count_ngrams(const std::vector<TokenStream>& corpus, int order);

// Discounted PMI-style score: (count(a,b) - delta) * N / (count(a) * count(b)).
// Throws std::invalid_argument when a or b is an unseen unigram.
double score_bigram(const NGramCounts& unigrams, const NGramCounts& bigrams,
                    const std::string& a, const std::string& b, double delta);

// Greedy left-to-right non-overlapping bigram merge; merged tokens join with '_'.
TokenStream merge_phrases(const TokenStream& stream, const std::vector<PhraseEntry>& phrases);

// Multi-pass detection. Phrases found on merged streams are expanded back to
// their underlying tokens, so entries can reach length passes+1.
std::vector<PhraseEntry> detect_phrases(const std::vector<TokenStream>& corpus,
                                        const CollocationConfig& config);

// "token1 token2<TAB>score<TAB>frequency" lines, sorted as detect_phrases emits.
std::string render_phrase_list(const std::vector<PhraseEntry>& phrases);
std::vector<PhraseEntry> parse_phrase_list(const std::string& text);

}  // namespace courtlex
