#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "courtlex/corpus.hpp"

namespace courtlex {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

enum class SmoothingKind { add_k, kneser_ney };

struct SmoothingSpec {
    SmoothingKind kind = SmoothingKind::kneser_ney;
    double param = 0.75;  // add-k constant, or KN discount in (0,1)

    static SmoothingSpec add_k(double k) { return {SmoothingKind::add_k, k}; }
    static SmoothingSpec kneser_ney(double discount = 0.75) {
        return {SmoothingKind::kneser_ney, discount};
    }
};

// Backoff n-gram model. Probabilities and backoff weights live in log10
// (matching the serialized form); log_prob converts to natural log.
class NGramLM {
public:
    struct Entry {
        double log10_prob = 0.0;
        double log10_backoff = 0.0;
        bool has_backoff = false;
    };

    int order() const { return order_; }
    SmoothingKind smoothing() const { return smoothing_; }

    // Prediction vocabulary: content words + </s> + <unk> (never <s>).
    const std::vector<std::string>& prediction_vocab() const { return pred_vocab_; }
    bool in_vocab(const std::string& w) const { return vocab_.count(w) != 0; }

    // log10 P(word | context); context is the preceding tokens, most recent
    // last, truncated to order-1 internally. OOV tokens map to <unk>.
    double token_log10(const std::vector<std::string>& context, const std::string& word) const;

    // Natural-log probability of the padded sequence <s> tokens... </s>.
    double log_prob(const std::vector<std::string>& tokens) const;

    friend NGramLM train_lm(const std::vector<TokenStream>&, int, SmoothingSpec, int);
    friend NGramLM load_lm(const std::string&);
    friend void save_lm(const NGramLM&, const std::string&);

private:
    int order_ = 3;
    SmoothingKind smoothing_ = SmoothingKind::kneser_ney;
    // tables_[k] holds (k+1)-grams keyed by space-joined tokens.
    std::vector<std::unordered_map<std::string, Entry>> tables_;
    std::unordered_set<std::string> vocab_;  // prediction vocab as a set
    std::vector<std::string> pred_vocab_;

    const std::string& map_token(const std::string& w) const;
    void rebuild_vocab_from_tables();
};

// Sentence-padded training over the corpus streams. Tokens with corpus count
// below unk_threshold train as <unk>.
NGramLM train_lm(const std::vector<TokenStream>& corpus, int order, SmoothingSpec smoothing,
                 int unk_threshold = 1);

double perplexity(const NGramLM& lm, const std::vector<TokenStream>& corpus);

// ARPA text format; round-trips log10 values exactly.
void save_lm(const NGramLM& lm, const std::string& path);
NGramLM load_lm(const std::string& path);

}  // namespace courtlex
