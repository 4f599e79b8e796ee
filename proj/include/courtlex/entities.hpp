#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "courtlex/corpus.hpp"

namespace courtlex {

enum class EntityCategory {
    Provision,
    Date,
    CaseName,
    Judge,
    Court,
    Instrument,
    Person,
    Cardinal,
};

std::string to_string(EntityCategory c);
EntityCategory entity_category_from_string(std::string_view s);

struct EntityMention {
    EntityCategory category = EntityCategory::Cardinal;
    TokenRange token_range;
    std::string surface;  // tokens of the range joined with single spaces
};

enum class RuleKind {
    gazetteer,      // pattern: exact token phrase, e.g. "court of appeal"
    trigger_name,   // pattern: trigger phrase; matches trigger + name token
    trigger_shape,  // pattern: "trigger|regex"; matches trigger + shape token
    token_regex,    // pattern: regex a single token must match entirely
};

struct Rule {
    EntityCategory category;
    RuleKind kind;
    std::string pattern;
};

struct RuleSet {
    std::vector<Rule> rules;
    // Higher priority categories win overlap resolution. Total order.
    std::vector<EntityCategory> priority = {
        EntityCategory::Provision, EntityCategory::Date,  EntityCategory::CaseName,
        EntityCategory::Judge,     EntityCategory::Court, EntityCategory::Instrument,
        EntityCategory::Person,    EntityCategory::Cardinal,
    };

    int priority_rank(EntityCategory c) const;
};

RuleSet default_rules();
RuleSet load_rules(const std::string& path);
std::string render_rules(const RuleSet& rules);

// Non-overlapping mentions ordered by start index. Overlaps resolve by
// category priority, then span length, then leftmost start.
std::vector<EntityMention> extract_entities(const TokenStream& stream, const RuleSet& rules);

struct InventoryEntry {
    std::string surface;
    std::int64_t frequency = 0;
};

using EntityInventory = std::map<EntityCategory, std::vector<InventoryEntry>>;

// Distinct surfaces per category, frequency-sorted descending, ties lexicographic.
EntityInventory entity_inventory(const std::vector<TokenStream>& corpus, const RuleSet& rules);

// "category<TAB>surface<TAB>frequency" lines.
std::string render_inventory(const EntityInventory& inv);
EntityInventory parse_inventory(const std::string& text);

}  // namespace courtlex
