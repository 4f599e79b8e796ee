#include "courtlex/rescore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace courtlex {

void ErrorModel::validate() const {
    auto check = [](double r, const char* name) {
        if (r < 0.0 || r > 1.0)
            throw std::invalid_argument(std::string("ErrorModel: ") + name +
                                        " must lie in [0,1]");
    };
    check(substitution_rate, "substitution_rate");
    check(deletion_rate, "deletion_rate");
    check(insertion_rate, "insertion_rate");
    check(split_rate, "split_rate");
    check(merge_rate, "merge_rate");
    if (total_rate() > 1.0)
        throw std::invalid_argument("ErrorModel: rates must sum to at most 1");
}

namespace {

std::size_t edit_distance_chars(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Sample a vocabulary word close in spelling to `word`: draw a handful of
// candidates and keep the nearest.
std::string near_spelling_word(const std::string& word,
                               const std::vector<std::string>& vocabulary,
                               std::mt19937_64& rng) {
    if (vocabulary.empty()) return word;
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    std::string best;
    std::size_t best_dist = SIZE_MAX;
    for (int k = 0; k < 20; ++k) {
        const std::string& cand = vocabulary[pick(rng)];
        if (cand == word) continue;
        std::size_t dist = edit_distance_chars(word, cand);
        if (dist < best_dist) {
            best_dist = dist;
            best = cand;
        }
    }
    return best.empty() ? word : best;
}

}  // namespace

NBestList simulate_asr(const TokenStream& reference, const ErrorModel& model, int n,
                       const std::vector<std::string>& vocabulary) {
    if (n < 1) throw std::invalid_argument("simulate_asr: n must be >= 1");
    model.validate();

    std::mt19937_64 rng(model.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::string> ref = reference.token_strings();
    std::vector<Hypothesis> hyps;
    for (int h = 0; h < n; ++h) {
        Hypothesis hyp;
        int corruptions = 0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const std::string& tok = ref[i];
            double u = unit(rng);
            double c = model.substitution_rate;
            if (u < c) {
                hyp.tokens.push_back(near_spelling_word(tok, vocabulary, rng));
                ++corruptions;
                continue;
            }
            c += model.deletion_rate;
            if (u < c) {
                ++corruptions;
                continue;
            }
            c += model.insertion_rate;
            if (u < c) {
                hyp.tokens.push_back(tok);
                std::uniform_int_distribution<std::size_t> pick(
                    0, vocabulary.empty() ? 0 : vocabulary.size() - 1);
                hyp.tokens.push_back(vocabulary.empty() ? tok : vocabulary[pick(rng)]);
                ++corruptions;
                continue;
            }
            c += model.split_rate;
            if (u < c && tok.size() >= 2) {
                std::uniform_int_distribution<std::size_t> cut(1, tok.size() - 1);
                std::size_t at = cut(rng);
                hyp.tokens.push_back(tok.substr(0, at));
                hyp.tokens.push_back(tok.substr(at));
                ++corruptions;
                continue;
            }
            c += model.merge_rate;
            if (u < c && i + 1 < ref.size()) {
                hyp.tokens.push_back(tok + ref[i + 1]);
                ++i;
                ++corruptions;
                continue;
            }
            hyp.tokens.push_back(tok);
        }
        hyp.asr_logscore = -static_cast<double>(corruptions);
        hyps.push_back(std::move(hyp));
    }

    // Collapse duplicates, keeping the best score for each token sequence.
    std::vector<Hypothesis> unique;
    for (Hypothesis& h : hyps) {
        auto it = std::find_if(unique.begin(), unique.end(),
                               [&](const Hypothesis& u) { return u.tokens == h.tokens; });
        if (it == unique.end())
            unique.push_back(std::move(h));
        else if (h.asr_logscore > it->asr_logscore)
            it->asr_logscore = h.asr_logscore;
    }
    std::stable_sort(unique.begin(), unique.end(), [](const Hypothesis& a, const Hypothesis& b) {
        return a.asr_logscore > b.asr_logscore;
    });

    NBestList out;
    out.utterance_id = reference.document_id;
    out.hypotheses = std::move(unique);
    return out;
}

int vocabulary_hits(const std::vector<std::string>& tokens, const VocabularyList& vocab) {
    std::vector<const std::vector<std::string>*> phrases;
    for (const VocabularyEntry& e : vocab.entries)
        if (!e.phrase.empty()) phrases.push_back(&e.phrase);
    std::stable_sort(phrases.begin(), phrases.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });

    int hits = 0;
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        for (const auto* phrase : phrases) {
            if (i + phrase->size() > tokens.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < phrase->size() && ok; ++k)
                ok = tokens[i + k] == (*phrase)[k];
            if (ok) {
                ++hits;
                i += phrase->size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return hits;
}

Hypothesis rescore(const NBestList& nbest, const NGramLM& lm, const VocabularyList& vocab,
                   const RescoreWeights& weights) {
    if (nbest.hypotheses.empty()) throw std::invalid_argument("rescore: empty n-best list");

    constexpr double kTie = 1e-9;
    std::size_t best_idx = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < nbest.hypotheses.size(); ++i) {
        const Hypothesis& h = nbest.hypotheses[i];
        double lm_score = lm.log_prob(h.tokens);
        if (weights.length_norm) lm_score /= static_cast<double>(h.tokens.size() + 1);
        double score = weights.lambda * h.asr_logscore + (1.0 - weights.lambda) * lm_score +
                       weights.beta * vocabulary_hits(h.tokens, vocab);
        if (i == 0 || score > best_score + kTie) {
            best_idx = i;
            best_score = score;
        } else if (score > best_score - kTie &&
                   h.asr_logscore > nbest.hypotheses[best_idx].asr_logscore) {
            best_idx = i;  // tie: prefer engine confidence, then earlier rank
            best_score = score;
        }
    }
    return nbest.hypotheses[best_idx];
}

namespace {

using nlohmann::json;

std::vector<NBestList> parse_asr_json_impl(const json& root) {
    if (!root.is_object() || !root.contains("utterances"))
        throw FormatError("asr json: missing top-level 'utterances' array");
    const json& utts = root["utterances"];
    if (!utts.is_array()) throw FormatError("asr json: 'utterances' must be an array");

    std::vector<NBestList> out;
    std::set<std::string> ids;
    for (std::size_t u = 0; u < utts.size(); ++u) {
        std::string at = "utterances[" + std::to_string(u) + "]";
        const json& utt = utts[u];
        if (!utt.is_object() || !utt.contains("id") || !utt["id"].is_string())
            throw FormatError("asr json: " + at + ".id must be a string");
        if (!utt.contains("alternatives") || !utt["alternatives"].is_array() ||
            utt["alternatives"].empty())
            throw FormatError("asr json: " + at + ".alternatives must be a non-empty array");
        NBestList list;
        list.utterance_id = utt["id"].get<std::string>();
        if (!ids.insert(list.utterance_id).second)
            throw FormatError("asr json: duplicate utterance id '" + list.utterance_id + "'");
        const json& alts = utt["alternatives"];
        for (std::size_t a = 0; a < alts.size(); ++a) {
            std::string aat = at + ".alternatives[" + std::to_string(a) + "]";
            const json& alt = alts[a];
            if (!alt.is_object() || !alt.contains("transcript") || !alt["transcript"].is_string())
                throw FormatError("asr json: " + aat + ".transcript must be a string");
            if (!alt.contains("confidence") || !alt["confidence"].is_number())
                throw FormatError("asr json: " + aat + ".confidence must be a number");
            double conf = alt["confidence"].get<double>();
            if (conf < 0.0 || conf > 1.0)
                throw FormatError("asr json: " + aat + ".confidence must lie in [0,1]");
            Hypothesis h;
            h.tokens = tokenize(normalize_text(alt["transcript"].get<std::string>()));
            h.asr_logscore = std::log(std::max(conf, 1e-300));
            list.hypotheses.push_back(std::move(h));
        }
        std::stable_sort(list.hypotheses.begin(), list.hypotheses.end(),
                         [](const Hypothesis& x, const Hypothesis& y) {
                             return x.asr_logscore > y.asr_logscore;
                         });
        out.push_back(std::move(list));
    }
    return out;
}

}  // namespace

std::vector<NBestList> parse_asr_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("asr json: ") + e.what());
    }
    return parse_asr_json_impl(root);
}

std::vector<NBestList> parse_asr_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read ASR file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_asr_json_text(buf.str());
}

std::string render_asr_json(const std::vector<NBestList>& lists) {
    json utts = json::array();
    for (const NBestList& list : lists) {
        json alts = json::array();
        for (const Hypothesis& h : list.hypotheses) {
            std::string transcript;
            for (std::size_t i = 0; i < h.tokens.size(); ++i) {
                if (i) transcript.push_back(' ');
                transcript += h.tokens[i];
            }
            alts.push_back({{"transcript", transcript},
                            {"confidence", std::exp(h.asr_logscore)}});
        }
        utts.push_back({{"id", list.utterance_id}, {"alternatives", alts}});
    }
    return json{{"utterances", utts}}.dump(2) + "\n";
}

// Ingest-time validation hook used by the corpus module.
void validate_asr_json_text(const std::string& text) { parse_asr_json_text(text); }

}  // namespace courtlex
