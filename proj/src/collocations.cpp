#include "courtlex/collocations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace courtlex {

std::string PhraseEntry::joined(char sep) const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(sep);
        out += tokens[i];
    }
    return out;
}

NGramCounts count_ngrams(const TokenStream& stream, int order) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("count_ngrams: order must be 1 or 2, got " +
                                    std::to_string(order));
    NGramCounts out;
    out.order = order;
    for (const TokenRange& sent : stream.sentence_bounds) {
        if (sent.size() + 1 < static_cast<std::size_t>(order) + 1) continue;
        for (std::size_t i = sent.first; i + order <= sent.last; ++i) {
            std::string key = stream.tokens[i].normalized;
            for (int k = 1; k < order; ++k) {
                key.push_back(' ');
                key += stream.tokens[i + k].normalized;
            }
            ++out.counts[key];
        }
    }
    if (order == 1)
        for (const auto& [k, c] : out.counts) out.total_unigrams += c;
    return out;
}

NGramCounts count_ngrams(const std::vector<TokenStream>& corpus, int order) {
    NGramCounts merged;
    merged.order = order;
    for (const TokenStream& stream : corpus) {
        NGramCounts part = count_ngrams(stream, order);
        for (const auto& [k, c] : part.counts) merged.counts[k] += c;
        merged.total_unigrams += part.total_unigrams;
    }
    return merged;
}

double score_bigram(const NGramCounts& unigrams, const NGramCounts& bigrams,
                    const std::string& a, const std::string& b, double delta) {
    std::int64_t ca = unigrams.count(a);
    std::int64_t cb = unigrams.count(b);
    if (ca <= 0) throw std::invalid_argument("score_bigram: unseen unigram '" + a + "'");
    if (cb <= 0) throw std::invalid_argument("score_bigram: unseen unigram '" + b + "'");
    std::int64_t cab = bigrams.count(a + " " + b);
    if (cab == 0 && delta == 0.0) return 0.0;
    return (static_cast<double>(cab) - delta) * static_cast<double>(unigrams.total_unigrams) /
           (static_cast<double>(ca) * static_cast<double>(cb));
}

TokenStream merge_phrases(const TokenStream& stream, const std::vector<PhraseEntry>& phrases) {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const PhraseEntry& p : phrases)
        if (p.tokens.size() == 2) pairs.emplace(p.tokens[0], p.tokens[1]);

    TokenStream out;
    out.document_id = stream.document_id;
    for (const TokenRange& sent : stream.sentence_bounds) {
        std::size_t first = out.tokens.size();
        std::size_t i = sent.first;
        while (i < sent.last) {
            const Token& tok = stream.tokens[i];
            Token merged = tok;
            if (i + 1 < sent.last &&
                pairs.count({tok.normalized, stream.tokens[i + 1].normalized})) {
                const Token& next = stream.tokens[i + 1];
                merged.normalized = tok.normalized + "_" + next.normalized;
                merged.surface = merged.normalized;
                merged.end = next.end;
                i += 2;
            } else {
                ++i;
            }
            if (!out.text.empty()) out.text.push_back(' ');
            merged.begin = out.text.size();
            out.text += merged.normalized;
            merged.end = out.text.size();
            merged.surface = merged.normalized;
            out.tokens.push_back(std::move(merged));
        }
        if (out.tokens.size() > first) out.sentence_bounds.push_back({first, out.tokens.size()});
    }
    return out;
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t j = s.find(sep, i);
        if (j == std::string::npos) j = s.size();
        out.push_back(s.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

void sort_entries(std::vector<PhraseEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const PhraseEntry& x, const PhraseEntry& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.frequency != y.frequency) return x.frequency > y.frequency;
        return x.tokens < y.tokens;
    });
}

}  // namespace

std::vector<PhraseEntry> detect_phrases(const std::vector<TokenStream>& corpus,
                                        const CollocationConfig& config) {
    if (corpus.empty()) throw std::invalid_argument("detect_phrases: empty corpus");

    std::vector<TokenStream> streams = corpus;
    // Keyed by the fully expanded token tuple; first detection wins.
    std::map<std::vector<std::string>, PhraseEntry> found;

    for (int pass = 0; pass < config.passes; ++pass) {
        NGramCounts uni = count_ngrams(streams, 1);
        NGramCounts bi = count_ngrams(streams, 2);

        std::vector<PhraseEntry> detected;
        for (const auto& [key, freq] : bi.counts) {
            if (freq < config.min_count) continue;
            std::size_t sp = key.find(' ');
            std::string a = key.substr(0, sp);
            std::string b = key.substr(sp + 1);
            double score = score_bigram(uni, bi, a, b, config.delta);
            if (score <= config.threshold) continue;
            PhraseEntry e;
            e.tokens = {a, b};
            e.score = score;
            e.frequency = freq;
            detected.push_back(std::move(e));
        }
        if (detected.empty()) break;

        for (const PhraseEntry& e : detected) {
            // Expand previously merged components ('_'-joined) back out.
            std::vector<std::string> expanded;
            for (const std::string& tok : e.tokens)
                for (std::string& part : split_on(tok, '_')) expanded.push_back(std::move(part));
            PhraseEntry full = e;
            full.tokens = expanded;
            found.emplace(std::move(expanded), std::move(full));
        }
        if (pass + 1 < config.passes)
            for (TokenStream& s : streams) s = merge_phrases(s, detected);
    }

    std::vector<PhraseEntry> out;
    out.reserve(found.size());
    for (auto& [key, e] : found) out.push_back(std::move(e));
    sort_entries(out);
    return out;
}

std::string render_phrase_list(const std::vector<PhraseEntry>& phrases) {
    std::ostringstream out;
    out.precision(17);
    for (const PhraseEntry& p : phrases)
        out << p.joined() << '\t' << p.score << '\t' << p.frequency << '\n';
    return out.str();
}

std::vector<PhraseEntry> parse_phrase_list(const std::string& text) {
    std::vector<PhraseEntry> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols = split_on(line, '\t');
        if (cols.size() != 3)
            throw FormatError("phrase list line " + std::to_string(lineno) +
                              ": expected 3 tab-separated columns");
        PhraseEntry e;
        e.tokens = split_on(cols[0], ' ');
        e.score = std::stod(cols[1]);
        e.frequency = std::stoll(cols[2]);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace courtlex
