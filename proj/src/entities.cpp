#include "courtlex/entities.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_set>

namespace courtlex {

std::string to_string(EntityCategory c) {
    switch (c) {
        case EntityCategory::Provision: return "Provision";
        case EntityCategory::Date: return "Date";
        case EntityCategory::CaseName: return "CaseName";
        case EntityCategory::Judge: return "Judge";
        case EntityCategory::Court: return "Court";
        case EntityCategory::Instrument: return "Instrument";
        case EntityCategory::Person: return "Person";
        case EntityCategory::Cardinal: return "Cardinal";
    }
    return "Cardinal";
}

EntityCategory entity_category_from_string(std::string_view s) {
    if (s == "Provision") return EntityCategory::Provision;
    if (s == "Date") return EntityCategory::Date;
    if (s == "CaseName") return EntityCategory::CaseName;
    if (s == "Judge") return EntityCategory::Judge;
    if (s == "Court") return EntityCategory::Court;
    if (s == "Instrument") return EntityCategory::Instrument;
    if (s == "Person") return EntityCategory::Person;
    if (s == "Cardinal") return EntityCategory::Cardinal;
    throw FormatError("unknown entity category: '" + std::string(s) + "'");
}

int RuleSet::priority_rank(EntityCategory c) const {
    for (std::size_t i = 0; i < priority.size(); ++i)
        if (priority[i] == c) return static_cast<int>(i);
    return static_cast<int>(priority.size());
}

namespace {

const char* kRuleKindNames[] = {"gazetteer", "trigger_name", "trigger_shape", "token_regex"};

RuleKind rule_kind_from_string(const std::string& s) {
    for (int i = 0; i < 4; ++i)
        if (s == kRuleKindNames[i]) return static_cast<RuleKind>(i);
    throw FormatError("unknown rule kind: '" + s + "'");
}

// Clause shape: digits with dotted subsections, parenthesized subparts, and
// an optional hyphenated subpart range, e.g. "25(2)(a)-(h)" or "3.17".
const char* kClausePattern = R"(\d+(\.\d+)*(\([0-9a-z]+\))*(-\([0-9a-z]+\))?)";

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> kStop = {
        "the", "a",    "an",   "of",   "and",  "or",   "in",   "on",    "at",   "to",
        "for", "with", "that", "this", "is",   "was",  "are",  "were",  "be",   "been",
        "it",  "he",   "she",  "they", "we",   "you",  "i",    "said",  "held", "my",
        "his", "her",  "their", "our", "not",  "no",   "as",   "by",    "from", "but",
        "if",  "then", "so",   "court", "justice", "judge", "v", "vs",  "act",  "um",
        "uh",  "may",  "shall", "will", "would", "case", "section", "rule"};
    return kStop;
}

bool all_alpha(const std::string& t) {
    if (t.empty()) return false;
    for (unsigned char c : t)
        if (!std::isalpha(c)) return false;
    return true;
}

bool is_name_token(const std::string& t) {
    return t.size() >= 2 && all_alpha(t) && !stopwords().count(t);
}

const std::set<std::string>& month_names() {
    static const std::set<std::string> kMonths = {
        "january", "february", "march",     "april",   "may",      "june",
        "july",    "august",   "september", "october", "november", "december"};
    return kMonths;
}

struct Candidate {
    EntityCategory category;
    TokenRange range;
    int rule_index;
};

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

RuleSet default_rules() {
    RuleSet rs;
    auto add = [&](EntityCategory c, RuleKind k, std::string p) {
        rs.rules.push_back({c, k, std::move(p)});
    };
    for (const char* trig : {"section", "rule", "article", "paragraph", "schedule", "regulation"})
        add(EntityCategory::Provision, RuleKind::trigger_shape,
            std::string(trig) + "|" + kClausePattern);
    for (const auto& m : month_names()) add(EntityCategory::Date, RuleKind::gazetteer, m);
    add(EntityCategory::CaseName, RuleKind::token_regex, "v|vs");
    for (const char* trig :
         {"lord justice", "lady justice", "mr justice", "mrs justice", "lord", "lady"})
        add(EntityCategory::Judge, RuleKind::trigger_name, trig);
    for (const char* g : {"supreme court", "court of appeal", "high court", "crown court",
                          "county court", "family court", "magistrates court", "privy council",
                          "house of lords"})
        add(EntityCategory::Court, RuleKind::gazetteer, g);
    add(EntityCategory::Instrument, RuleKind::trigger_shape, R"(act|\d{4})");
    for (const char* trig : {"mr", "mrs", "ms", "miss", "dr", "professor"})
        add(EntityCategory::Person, RuleKind::trigger_name, trig);
    add(EntityCategory::Cardinal, RuleKind::token_regex, R"(\d+(,\d{3})*)");
    add(EntityCategory::Cardinal, RuleKind::token_regex,
        "one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|twenty|thirty|forty|"
        "fifty|sixty|seventy|eighty|ninety|hundred|thousand|million|billion");
    return rs;
}

RuleSet load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read rules file: " + path);
    RuleSet rs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw FormatError("rules line " + std::to_string(lineno) +
                              ": expected 'category<TAB>rule-kind<TAB>pattern'");
        Rule r;
        r.category = entity_category_from_string(line.substr(0, t1));
        r.kind = rule_kind_from_string(line.substr(t1 + 1, t2 - t1 - 1));
        r.pattern = line.substr(t2 + 1);
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

std::string render_rules(const RuleSet& rules) {
    std::ostringstream out;
    for (const Rule& r : rules.rules)
        out << to_string(r.category) << '\t' << kRuleKindNames[static_cast<int>(r.kind)] << '\t'
            << r.pattern << '\n';
    return out.str();
}

std::vector<EntityMention> extract_entities(const TokenStream& stream, const RuleSet& rules) {
    const std::size_t n = stream.tokens.size();
    std::vector<std::string> toks = stream.token_strings();

    // Sentence index per token; multi-token spans stay within one sentence.
    std::vector<int> sent_of(n, 0);
    for (std::size_t s = 0; s < stream.sentence_bounds.size(); ++s)
        for (std::size_t i = stream.sentence_bounds[s].first;
             i < stream.sentence_bounds[s].last; ++i)
            sent_of[i] = static_cast<int>(s);
    auto same_sentence = [&](std::size_t a, std::size_t b) {  // [a, b)
        return b <= a + 1 || sent_of[a] == sent_of[b - 1];
    };

    std::vector<Candidate> cands;
    std::set<std::string> date_months;

    for (std::size_t ri = 0; ri < rules.rules.size(); ++ri) {
        const Rule& rule = rules.rules[ri];
        if (rule.category == EntityCategory::Date && rule.kind == RuleKind::gazetteer) {
            date_months.insert(rule.pattern);
            continue;
        }
        switch (rule.kind) {
            case RuleKind::gazetteer: {
                std::vector<std::string> phrase = split_ws(rule.pattern);
                if (phrase.empty()) break;
                for (std::size_t i = 0; i + phrase.size() <= n; ++i) {
                    if (!same_sentence(i, i + phrase.size())) continue;
                    bool ok = true;
                    for (std::size_t k = 0; k < phrase.size() && ok; ++k)
                        ok = toks[i + k] == phrase[k];
                    if (ok)
                        cands.push_back({rule.category, {i, i + phrase.size()},
                                         static_cast<int>(ri)});
                }
                break;
            }
            case RuleKind::trigger_name: {
                std::vector<std::string> trig = split_ws(rule.pattern);
                for (std::size_t i = 0; i + trig.size() + 1 <= n; ++i) {
                    if (!same_sentence(i, i + trig.size() + 1)) continue;
                    bool ok = true;
                    for (std::size_t k = 0; k < trig.size() && ok; ++k)
                        ok = toks[i + k] == trig[k];
                    if (ok && is_name_token(toks[i + trig.size()]))
                        cands.push_back({rule.category, {i, i + trig.size() + 1},
                                         static_cast<int>(ri)});
                }
                break;
            }
            case RuleKind::trigger_shape: {
                std::size_t bar = rule.pattern.find('|');
                if (bar == std::string::npos)
                    throw FormatError("trigger_shape pattern needs 'trigger|regex': " +
                                      rule.pattern);
                std::vector<std::string> trig = split_ws(rule.pattern.substr(0, bar));
                std::regex shape(rule.pattern.substr(bar + 1));
                for (std::size_t i = 0; i + trig.size() + 1 <= n; ++i) {
                    if (!same_sentence(i, i + trig.size() + 1)) continue;
                    bool ok = true;
                    for (std::size_t k = 0; k < trig.size() && ok; ++k)
                        ok = toks[i + k] == trig[k];
                    if (!ok || !std::regex_match(toks[i + trig.size()], shape)) continue;
                    std::size_t b = i, e = i + trig.size() + 1;
                    if (rule.category == EntityCategory::Instrument) {
                        // Extend left over statute-name tokens: "matrimonial causes act 1973".
                        std::size_t ext = 0;
                        while (ext < 4 && b > 0 && same_sentence(b - 1, e) &&
                               is_name_token(toks[b - 1])) {
                            --b;
                            ++ext;
                        }
                        if (ext == 0) continue;  // bare "act <year>" is too weak a cue
                    }
                    cands.push_back({rule.category, {b, e}, static_cast<int>(ri)});
                }
                break;
            }
            case RuleKind::token_regex: {
                if (rule.category == EntityCategory::CaseName) {
                    // Separator rule: one party name either side of "v".
                    std::regex sep(rule.pattern);
                    for (std::size_t i = 1; i + 1 < n; ++i) {
                        if (!std::regex_match(toks[i], sep)) continue;
                        if (!same_sentence(i - 1, i + 2)) continue;
                        if (is_name_token(toks[i - 1]) && is_name_token(toks[i + 1]))
                            cands.push_back({rule.category, {i - 1, i + 2},
                                             static_cast<int>(ri)});
                    }
                    break;
                }
                std::regex re(rule.pattern);
                for (std::size_t i = 0; i < n; ++i)
                    if (std::regex_match(toks[i], re))
                        cands.push_back({rule.category, {i, i + 1}, static_cast<int>(ri)});
                break;
            }
        }
    }

    // Date: optional day token + month + 4-digit year, or month + year.
    if (!date_months.empty()) {
        std::regex day(R"(\d{1,2}(st|nd|rd|th)?)");
        std::regex year(R"(\d{4})");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!date_months.count(toks[i])) continue;
            if (!std::regex_match(toks[i + 1], year)) continue;
            std::size_t b = i;
            if (i > 0 && std::regex_match(toks[i - 1], day) && same_sentence(i - 1, i + 2)) b = i - 1;
            if (same_sentence(b, i + 2))
                cands.push_back({EntityCategory::Date, {b, i + 2}, -1});
        }
    }

    // Overlap resolution: priority, then longer span, then leftmost.
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
        int px = rules.priority_rank(x.category), py = rules.priority_rank(y.category);
        if (px != py) return px < py;
        if (x.range.size() != y.range.size()) return x.range.size() > y.range.size();
        if (x.range.first != y.range.first) return x.range.first < y.range.first;
        return x.rule_index < y.rule_index;
    });

    std::vector<bool> taken(n, false);
    std::vector<EntityMention> accepted;
    for (const Candidate& c : cands) {
        bool free = true;
        for (std::size_t i = c.range.first; i < c.range.last && free; ++i) free = !taken[i];
        if (!free) continue;
        for (std::size_t i = c.range.first; i < c.range.last; ++i) taken[i] = true;
        EntityMention m;
        m.category = c.category;
        m.token_range = c.range;
        for (std::size_t i = c.range.first; i < c.range.last; ++i) {
            if (i > c.range.first) m.surface.push_back(' ');
            m.surface += toks[i];
        }
        accepted.push_back(std::move(m));
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const EntityMention& x, const EntityMention& y) {
                  return x.token_range.first < y.token_range.first;
              });
    return accepted;
}

EntityInventory entity_inventory(const std::vector<TokenStream>& corpus, const RuleSet& rules) {
    if (corpus.empty()) throw std::invalid_argument("entity_inventory: empty corpus");
    std::map<EntityCategory, std::map<std::string, std::int64_t>> acc;
    for (const TokenStream& stream : corpus)
        for (const EntityMention& m : extract_entities(stream, rules))
            ++acc[m.category][m.surface];

    EntityInventory inv;
    for (auto& [cat, surfaces] : acc) {
        std::vector<InventoryEntry> entries;
        entries.reserve(surfaces.size());
        for (auto& [surface, freq] : surfaces) entries.push_back({surface, freq});
        std::sort(entries.begin(), entries.end(),
                  [](const InventoryEntry& x, const InventoryEntry& y) {
                      if (x.frequency != y.frequency) return x.frequency > y.frequency;
                      return x.surface < y.surface;
                  });
        inv[cat] = std::move(entries);
    }
    return inv;
}

std::string render_inventory(const EntityInventory& inv) {
    std::ostringstream out;
    for (const auto& [cat, entries] : inv)
        for (const InventoryEntry& e : entries)
            out << to_string(cat) << '\t' << e.surface << '\t' << e.frequency << '\n';
    return out.str();
}

EntityInventory parse_inventory(const std::string& text) {
    EntityInventory inv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw FormatError("inventory line " + std::to_string(lineno) +
                              ": expected 'category<TAB>surface<TAB>frequency'");
        inv[entity_category_from_string(line.substr(0, t1))].push_back(
            {line.substr(t1 + 1, t2 - t1 - 1), std::stoll(line.substr(t2 + 1))});
    }
    return inv;
}

}  // namespace courtlex
