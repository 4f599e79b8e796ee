#include "courtlex/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace courtlex {

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

std::string join_with(const std::vector<std::string>& toks, char sep) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out.push_back(sep);
        out += toks[i];
    }
    return out;
}

}  // namespace

std::string VocabularyEntry::phrase_key() const { return join_with(phrase, ' '); }

bool VocabularyList::contains(const std::string& phrase_key) const {
    for (const auto& e : entries)
        if (e.phrase_key() == phrase_key) return true;
    return false;
}

bool valid_sounds_like(const std::string& s) {
    if (s.empty()) return false;
    bool in_syllable = false;
    for (char c : s) {
        if (c >= 'a' && c <= 'z') {
            in_syllable = true;
        } else if (c == '-') {
            if (!in_syllable) return false;
            in_syllable = false;
        } else {
            return false;
        }
    }
    return in_syllable;  // no trailing hyphen
}

VocabularyList build_vocabulary(const std::vector<PhraseEntry>& phrases,
                                const EntityInventory& inventory,
                                const std::vector<VocabularyEntry>& overrides,
                                const VocabCaps& caps) {
    VocabularyList list;
    std::unordered_set<std::string> seen;
    auto add = [&](VocabularyEntry entry) {
        if (entry.phrase.empty()) return;
        std::string key = entry.phrase_key();
        if (!seen.insert(key).second) return;  // first source priority wins
        if (entry.display_as.empty()) entry.display_as = key;
        list.entries.push_back(std::move(entry));
    };

    for (const VocabularyEntry& e : overrides) add(e);

    // Entity surfaces, frequency-sorted across categories.
    std::vector<std::pair<EntityCategory, InventoryEntry>> flat;
    for (const auto& [cat, entries] : inventory)
        for (const InventoryEntry& e : entries) flat.emplace_back(cat, e);
    std::stable_sort(flat.begin(), flat.end(), [](const auto& x, const auto& y) {
        if (x.second.frequency != y.second.frequency)
            return x.second.frequency > y.second.frequency;
        return x.second.surface < y.second.surface;
    });
    std::size_t entity_added = 0;
    for (const auto& [cat, inv] : flat) {
        if (entity_added >= caps.max_entity_surfaces) break;
        VocabularyEntry e;
        e.phrase = split_on(inv.surface, ' ');
        e.source = VocabSource::entity;
        e.entity_category = cat;
        e.frequency = inv.frequency;
        std::size_t before = list.entries.size();
        add(std::move(e));
        if (list.entries.size() > before) ++entity_added;
    }

    std::size_t colloc_added = 0;
    for (const PhraseEntry& p : phrases) {
        if (colloc_added >= caps.max_collocations) break;
        VocabularyEntry e;
        e.phrase = p.tokens;
        e.source = VocabSource::collocation;
        e.frequency = p.frequency;
        std::size_t before = list.entries.size();
        add(std::move(e));
        if (list.entries.size() > before) ++colloc_added;
    }
    return list;
}

VocabularyList apply_pronunciation_overrides(
    const VocabularyList& list, const std::map<std::string, std::string>& pronunciations,
    std::vector<std::string>* unmatched) {
    for (const auto& [phrase, sounds] : pronunciations)
        if (!valid_sounds_like(sounds))
            throw std::invalid_argument("malformed sounds_like for phrase '" + phrase + "': '" +
                                        sounds + "'");
    VocabularyList out = list;
    std::unordered_set<std::string> hit;
    for (VocabularyEntry& e : out.entries) {
        auto it = pronunciations.find(e.phrase_key());
        if (it != pronunciations.end()) {
            e.sounds_like = it->second;
            hit.insert(it->first);
        }
    }
    if (unmatched)
        for (const auto& [phrase, sounds] : pronunciations)
            if (!hit.count(phrase)) unmatched->push_back(phrase);
    return out;
}

std::string render_hint_table(const VocabularyList& list) {
    std::ostringstream out;
    out << "Phrase\tIPA\tSoundsLike\tDisplayAs\n";
    for (const VocabularyEntry& e : list.entries)
        out << join_with(e.phrase, '-') << "\t\t" << (e.sounds_like ? *e.sounds_like : "") << '\t'
            << e.display_as << '\n';
    return out.str();
}

VocabularyList parse_hint_table(const std::string& text) {
    VocabularyList list;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line != "Phrase\tIPA\tSoundsLike\tDisplayAs")
                throw FormatError("hint table: bad header line");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cols = split_on(line, '\t');
        if (cols.size() != 4)
            throw FormatError("hint table line " + std::to_string(lineno) +
                              ": expected 4 columns");
        VocabularyEntry e;
        e.phrase = split_on(cols[0], '-');
        if (!cols[2].empty()) e.sounds_like = cols[2];
        e.display_as = cols[3];
        e.source = VocabSource::manual;
        list.entries.push_back(std::move(e));
    }
    return list;
}

std::vector<VocabularyEntry> load_manual_entries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manual vocabulary file: " + path);
    std::vector<VocabularyEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols = split_on(line, '\t');
        if (cols.size() != 3)
            throw FormatError("manual vocabulary line " + std::to_string(lineno) +
                              ": expected 'phrase<TAB>sounds_like<TAB>display_as'");
        VocabularyEntry e;
        e.phrase = split_on(cols[0], ' ');
        if (!cols[1].empty()) {
            if (!valid_sounds_like(cols[1]))
                throw FormatError("manual vocabulary line " + std::to_string(lineno) +
                                  ": malformed sounds_like '" + cols[1] + "'");
            e.sounds_like = cols[1];
        }
        e.display_as = cols[2].empty() ? cols[0] : cols[2];
        e.source = VocabSource::manual;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace courtlex
