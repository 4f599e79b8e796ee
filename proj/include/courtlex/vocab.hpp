#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "courtlex/collocations.hpp"
#include "courtlex/entities.hpp"

namespace courtlex {

enum class VocabSource { manual, entity, collocation };

struct VocabularyEntry {
    std::vector<std::string> phrase;  // non-empty
    std::string display_as;
    std::optional<std::string> sounds_like;  // lowercase syllables joined by hyphens
    VocabSource source = VocabSource::collocation;
    std::optional<EntityCategory> entity_category;  // set when source == entity
    std::int64_t frequency = 0;

    std::string phrase_key() const;  // tokens joined with single spaces
};

struct VocabularyList {
    std::vector<VocabularyEntry> entries;  // deduplicated by phrase

    bool contains(const std::string& phrase_key) const;
};

struct VocabCaps {
    std::size_t max_collocations = 500;
    std::size_t max_entity_surfaces = 500;
};

bool valid_sounds_like(const std::string& s);

// Merge with dedup; first source priority wins: manual > entity > collocation.
VocabularyList build_vocabulary(const std::vector<PhraseEntry>& phrases,
                                const EntityInventory& inventory,
                                const std::vector<VocabularyEntry>& overrides,
                                const VocabCaps& caps = {});

// Matching entries gain sounds_like; unmatched phrases are reported back.
VocabularyList apply_pronunciation_overrides(
    const VocabularyList& list, const std::map<std::string, std::string>& pronunciations,
    std::vector<std::string>* unmatched = nullptr);

// "Phrase<TAB>IPA<TAB>SoundsLike<TAB>DisplayAs" table; phrases hyphen-joined,
// IPA column always empty, trailing newline.
std::string render_hint_table(const VocabularyList& list);
VocabularyList parse_hint_table(const std::string& text);

// Manual overrides file: "phrase<TAB>sounds_like<TAB>display_as" lines
// (empty sounds_like column allowed).
std::vector<VocabularyEntry> load_manual_entries(const std::string& path);

}  // namespace courtlex
