#include "courtlex/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace courtlex {

namespace {

constexpr double kLogZero = -99.0;  // ARPA convention for "no probability"

std::string join(const std::vector<std::string>& toks, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back(' ');
        out += toks[i];
    }
    return out;
}

std::vector<std::string> split_ngram(const std::string& key) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i <= key.size()) {
        std::size_t j = key.find(' ', i);
        if (j == std::string::npos) j = key.size();
        out.push_back(key.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const std::string& NGramLM::map_token(const std::string& w) const {
    static const std::string unk = kUnk;
    if (w == kBos || vocab_.count(w)) return w;
    return unk;
}

void NGramLM::rebuild_vocab_from_tables() {
    vocab_.clear();
    pred_vocab_.clear();
    for (const auto& [w, e] : tables_[0]) {
        if (w == kBos) continue;
        vocab_.insert(w);
        pred_vocab_.push_back(w);
    }
    std::sort(pred_vocab_.begin(), pred_vocab_.end());
}

double NGramLM::token_log10(const std::vector<std::string>& context,
                            const std::string& word) const {
    std::vector<std::string> ctx;
    std::size_t start = context.size() > static_cast<std::size_t>(order_ - 1)
                            ? context.size() - (order_ - 1)
                            : 0;
    for (std::size_t i = start; i < context.size(); ++i) ctx.push_back(map_token(context[i]));
    const std::string& w = map_token(word);

    double bow_sum = 0.0;
    for (std::size_t drop = 0;; ++drop) {
        std::size_t len = ctx.size() - drop;
        std::string key = len ? join(ctx, drop, ctx.size()) + " " + w : w;
        auto& table = tables_[len];
        auto it = table.find(key);
        if (it != table.end()) return bow_sum + it->second.log10_prob;
        if (len == 0) return bow_sum + kLogZero;
        auto cit = tables_[len - 1].find(join(ctx, drop, ctx.size()));
        if (cit != tables_[len - 1].end() && cit->second.has_backoff)
            bow_sum += cit->second.log10_backoff;
    }
}

double NGramLM::log_prob(const std::vector<std::string>& tokens) const {
    std::vector<std::string> ctx;
    if (order_ > 1) ctx.push_back(kBos);
    double total = 0.0;
    auto push = [&](const std::string& w) {
        ctx.push_back(map_token(w));
        while (ctx.size() > static_cast<std::size_t>(order_ - 1)) ctx.erase(ctx.begin());
    };
    for (const std::string& w : tokens) {
        total += token_log10(ctx, w);
        push(w);
    }
    total += token_log10(ctx, kEos);
    return total * std::numbers::ln10;
}

NGramLM train_lm(const std::vector<TokenStream>& corpus, int order, SmoothingSpec smoothing,
                 int unk_threshold) {
    if (order < 1 || order > 5)
        throw std::invalid_argument("train_lm: order must be in [1,5], got " +
                                    std::to_string(order));
    if (smoothing.kind == SmoothingKind::add_k && smoothing.param < 0)
        throw std::invalid_argument("train_lm: add_k constant must be >= 0");
    if (smoothing.kind == SmoothingKind::kneser_ney &&
        (smoothing.param <= 0 || smoothing.param >= 1))
        throw std::invalid_argument("train_lm: kneser_ney discount must lie in (0,1)");

    std::vector<std::vector<std::string>> sentences;
    for (const TokenStream& stream : corpus)
        for (const TokenRange& sent : stream.sentence_bounds) {
            std::vector<std::string> s;
            for (std::size_t i = sent.first; i < sent.last; ++i)
                s.push_back(stream.tokens[i].normalized);
            if (!s.empty()) sentences.push_back(std::move(s));
        }
    if (sentences.empty()) throw std::invalid_argument("train_lm: empty corpus");

    // Vocabulary with <unk> mapping.
    std::map<std::string, std::int64_t> word_counts;
    for (const auto& s : sentences)
        for (const auto& w : s) ++word_counts[w];
    std::unordered_set<std::string> vocab;
    for (const auto& [w, c] : word_counts)
        if (c >= unk_threshold) vocab.insert(w);

    auto mapped = [&](const std::string& w) -> std::string {
        return vocab.count(w) ? w : std::string(kUnk);
    };

    // Raw counts per order over padded sentences.
    std::vector<std::map<std::string, std::int64_t>> raw(order + 1);
    for (const auto& s : sentences) {
        std::vector<std::string> padded;
        padded.reserve(s.size() + 2);
        padded.push_back(kBos);
        for (const auto& w : s) padded.push_back(mapped(w));
        padded.push_back(kEos);
        for (int n = 1; n <= order; ++n)
            for (std::size_t i = 0; i + n <= padded.size(); ++i)
                ++raw[n][join(padded, i, i + n)];
    }

    NGramLM lm;
    lm.order_ = order;
    lm.smoothing_ = smoothing.kind;
    lm.tables_.assign(order, {});

    // Prediction vocabulary: everything unigram-countable except <s>. The
    // Kneser-Ney distribution always reserves mass for <unk>; add-k counts
    // <unk> as a type only when some training token actually mapped to it.
    std::vector<std::string> pred;
    {
        std::unordered_set<std::string> seen;
        for (const auto& [w, c] : raw[1])
            if (w != kBos) {
                pred.push_back(w);
                seen.insert(w);
            }
        if (!seen.count(kUnk) && smoothing.kind == SmoothingKind::kneser_ney)
            pred.push_back(kUnk);
        std::sort(pred.begin(), pred.end());
    }
    const double v_size = static_cast<double>(pred.size());

    // Effective counts: Kneser-Ney uses continuation counts below the top
    // order (n-grams starting with <s> keep raw counts); add-k uses raw.
    std::vector<std::map<std::string, std::int64_t>> eff(order + 1);
    eff[order] = raw[order];
    for (int n = 1; n < order; ++n) {
        if (smoothing.kind == SmoothingKind::add_k) {
            eff[n] = raw[n];
            continue;
        }
        for (const auto& [key, c] : raw[n]) {
            if (key.rfind(kBos, 0) == 0 &&
                (key.size() == 3 || key[3] == ' '))  // starts with "<s>"
                eff[n][key] = c;
        }
        for (const auto& [key, c] : raw[n + 1]) {
            std::size_t sp = key.find(' ');
            std::string suffix = key.substr(sp + 1);
            if (suffix.rfind(kBos, 0) == 0 && (suffix.size() == 3 || suffix[3] == ' ')) continue;
            ++eff[n][suffix];
        }
    }

    const double d = smoothing.param;

    // Unigram distribution.
    {
        double total = 0.0;
        std::int64_t types_seen = 0;
        for (const auto& w : pred) {
            auto it = eff[1].find(w);
            std::int64_t c = it == eff[1].end() ? 0 : it->second;
            total += static_cast<double>(c);
            if (c > 0) ++types_seen;
        }
        for (const auto& w : pred) {
            auto it = eff[1].find(w);
            std::int64_t c = it == eff[1].end() ? 0 : it->second;
            double p;
            if (smoothing.kind == SmoothingKind::add_k) {
                double denom = total + d * v_size;
                p = (static_cast<double>(c) + d) / denom;
            } else {
                p = (std::max(static_cast<double>(c) - d, 0.0) +
                     d * static_cast<double>(types_seen) / v_size) /
                    total;
            }
            NGramLM::Entry e;
            e.log10_prob = p > 0 ? std::log10(p) : kLogZero;
            lm.tables_[0].emplace(w, e);
        }
        NGramLM::Entry bos;
        bos.log10_prob = kLogZero;  // <s> is context-only
        lm.tables_[0].emplace(kBos, bos);
        if (!lm.tables_[0].count(kUnk)) {
            NGramLM::Entry unk;
            unk.log10_prob = kLogZero;
            lm.tables_[0].emplace(kUnk, unk);
        }
    }
    lm.rebuild_vocab_from_tables();

    // Higher orders.
    for (int n = 2; n <= order; ++n) {
        // Group by context.
        std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> by_ctx;
        for (const auto& [key, c] : eff[n]) {
            std::size_t sp = key.rfind(' ');
            by_ctx[key.substr(0, sp)].emplace_back(key.substr(sp + 1), c);
        }
        for (const auto& [ctx_key, grams] : by_ctx) {
            std::vector<std::string> ctx_toks = split_ngram(ctx_key);
            std::vector<std::string> lower_ctx(ctx_toks.begin() + 1, ctx_toks.end());
            double c_total = 0.0;
            for (const auto& [w, c] : grams) c_total += static_cast<double>(c);
            double lambda;  // backoff / interpolation mass for this context

            if (smoothing.kind == SmoothingKind::add_k) {
                double denom = c_total + d * v_size;
                double seen_mass = 0.0, seen_lower_mass = 0.0;
                for (const auto& [w, c] : grams) {
                    double p = (static_cast<double>(c) + d) / denom;
                    seen_mass += p;
                    seen_lower_mass += std::pow(10.0, lm.token_log10(lower_ctx, w));
                    NGramLM::Entry e;
                    e.log10_prob = p > 0 ? std::log10(p) : kLogZero;
                    lm.tables_[n - 1].emplace(ctx_key + " " + w, e);
                }
                double num = 1.0 - seen_mass;
                double den = 1.0 - seen_lower_mass;
                lambda = (num > 1e-12 && den > 1e-12) ? num / den : 0.0;
            } else {
                std::size_t types = grams.size();
                lambda = d * static_cast<double>(types) / c_total;
                for (const auto& [w, c] : grams) {
                    double p_lower = std::pow(10.0, lm.token_log10(lower_ctx, w));
                    double p = (static_cast<double>(c) - d) / c_total + lambda * p_lower;
                    NGramLM::Entry e;
                    e.log10_prob = std::log10(p);
                    lm.tables_[n - 1].emplace(ctx_key + " " + w, e);
                }
            }

            auto cit = lm.tables_[n - 2].find(ctx_key);
            if (cit == lm.tables_[n - 2].end()) {
                NGramLM::Entry stub;
                stub.log10_prob = kLogZero;
                cit = lm.tables_[n - 2].emplace(ctx_key, stub).first;
            }
            cit->second.has_backoff = true;
            cit->second.log10_backoff = lambda > 0 ? std::log10(lambda) : kLogZero;
        }
    }
    return lm;
}

double perplexity(const NGramLM& lm, const std::vector<TokenStream>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
    double total_ln = 0.0;
    std::int64_t predicted = 0;
    bool any = false;
    for (const TokenStream& stream : corpus)
        for (const TokenRange& sent : stream.sentence_bounds) {
            std::vector<std::string> s;
            for (std::size_t i = sent.first; i < sent.last; ++i)
                s.push_back(stream.tokens[i].normalized);
            if (s.empty()) continue;
            any = true;
            total_ln += lm.log_prob(s);
            predicted += static_cast<std::int64_t>(s.size()) + 1;  // + </s>
        }
    if (!any) throw std::invalid_argument("perplexity: corpus has no sentences");
    return std::exp(-total_ln / static_cast<double>(predicted));
}

void save_lm(const NGramLM& lm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write LM file: " + path);
    out << "# courtlex ngram model, smoothing="
        << (lm.smoothing() == SmoothingKind::kneser_ney ? "kneser_ney" : "add_k") << "\n\n";
    out << "\\data\\\n";
    for (int n = 1; n <= lm.order(); ++n)
        out << "ngram " << n << "=" << lm.tables_[n - 1].size() << "\n";
    for (int n = 1; n <= lm.order(); ++n) {
        out << "\n\\" << n << "-grams:\n";
        std::vector<const std::string*> keys;
        keys.reserve(lm.tables_[n - 1].size());
        for (const auto& [k, e] : lm.tables_[n - 1]) keys.push_back(&k);
        std::sort(keys.begin(), keys.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        for (const std::string* k : keys) {
            const NGramLM::Entry& e = lm.tables_[n - 1].at(*k);
            out << format_g17(e.log10_prob) << '\t' << *k;
            if (e.has_backoff) out << '\t' << format_g17(e.log10_backoff);
            out << '\n';
        }
    }
    out << "\n\\end\\\n";
    if (!out) throw IoError("failed writing LM file: " + path);
}

NGramLM load_lm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read LM file: " + path);

    auto fail = [&](std::size_t lineno, const std::string& msg) {
        throw FormatError(path + ":" + std::to_string(lineno) + ": " + msg);
    };

    NGramLM lm;
    lm.smoothing_ = SmoothingKind::kneser_ney;
    std::string line;
    std::size_t lineno = 0;

    // Preamble until \data\.
    bool have_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.rfind("# courtlex", 0) == 0 && line.find("add_k") != std::string::npos)
            lm.smoothing_ = SmoothingKind::add_k;
        if (line == "\\data\\") {
            have_data = true;
            break;
        }
    }
    if (!have_data) fail(lineno, "missing \\data\\ section");

    std::vector<std::size_t> declared;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) break;
        std::size_t eq = line.find('=');
        if (line.rfind("ngram ", 0) != 0 || eq == std::string::npos)
            fail(lineno, "expected 'ngram k=N' line");
        int k = std::stoi(line.substr(6, eq - 6));
        if (k != static_cast<int>(declared.size()) + 1) fail(lineno, "non-sequential ngram order");
        declared.push_back(std::stoull(line.substr(eq + 1)));
    }
    if (declared.empty()) fail(lineno, "no ngram count declarations");
    lm.order_ = static_cast<int>(declared.size());
    lm.tables_.assign(lm.order_, {});

    int current = 0;  // order of section being read, 0 = none
    bool saw_end = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line == "\\end\\") {
            saw_end = true;
            break;
        }
        if (line.size() > 2 && line[0] == '\\' && line.back() == ':') {
            current = std::stoi(line.substr(1));
            if (current < 1 || current > lm.order_) fail(lineno, "ngram section out of range");
            continue;
        }
        if (current == 0) fail(lineno, "ngram row outside any section");
        std::size_t t1 = line.find('\t');
        if (t1 == std::string::npos) fail(lineno, "expected 'prob<TAB>ngram[<TAB>backoff]'");
        std::size_t t2 = line.find('\t', t1 + 1);
        NGramLM::Entry e;
        e.log10_prob = std::stod(line.substr(0, t1));
        std::string key;
        if (t2 == std::string::npos) {
            key = line.substr(t1 + 1);
        } else {
            key = line.substr(t1 + 1, t2 - t1 - 1);
            e.has_backoff = true;
            e.log10_backoff = std::stod(line.substr(t2 + 1));
        }
        if (static_cast<int>(split_ngram(key).size()) != current)
            fail(lineno, "ngram token count does not match section order");
        lm.tables_[current - 1].emplace(std::move(key), e);
    }
    if (!saw_end) fail(lineno, "missing \\end\\ terminator");
    for (int n = 1; n <= lm.order_; ++n)
        if (lm.tables_[n - 1].size() != declared[n - 1])
            throw FormatError(path + ": ngram " + std::to_string(n) + " count mismatch: header " +
                              std::to_string(declared[n - 1]) + ", body " +
                              std::to_string(lm.tables_[n - 1].size()));
    if (!lm.tables_[0].count(kUnk)) throw FormatError(path + ": vocabulary lacks " + kUnk);
    lm.rebuild_vocab_from_tables();
    return lm;
}

}  // namespace courtlex
