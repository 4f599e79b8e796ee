#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "courtlex/entities.hpp"

using namespace courtlex;
namespace fs = std::filesystem;

namespace {

TokenStream stream_of(const std::string& text) { return make_stream("t", text); }

std::vector<EntityMention> extract(const std::string& text) {
    return extract_entities(stream_of(text), default_rules());
}

}  // namespace

TEST_CASE("provision fixtures") {
    auto ms = extract("section 25(2)(a)-(h)");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Provision);
    CHECK(ms[0].surface == "section 25(2)(a)-(h)");

    ms = extract("rule 3.17");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Provision);
    CHECK(ms[0].surface == "rule 3.17");
}

TEST_CASE("judge fixtures") {
    auto ms = extract("lord phillips");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Judge);
    CHECK(ms[0].surface == "lord phillips");

    ms = extract("lady hale");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Judge);

    ms = extract("lord justice brown agreed");
    REQUIRE(!ms.empty());
    CHECK(ms[0].category == EntityCategory::Judge);
    CHECK(ms[0].surface == "lord justice brown");
}

TEST_CASE("court, date, case name, instrument, cardinal") {
    auto ms = extract("the court of appeal dismissed it");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Court);
    CHECK(ms[0].surface == "court of appeal");

    ms = extract("on 12 march 1998 the hearing began");
    REQUIRE(!ms.empty());
    CHECK(ms[0].category == EntityCategory::Date);
    CHECK(ms[0].surface == "12 march 1998");

    ms = extract("counsel cited barton v wright yesterday");
    REQUIRE(!ms.empty());
    CHECK(ms[0].category == EntityCategory::CaseName);
    CHECK(ms[0].surface == "barton v wright");

    ms = extract("under the matrimonial causes act 1973");
    REQUIRE(!ms.empty());
    CHECK(ms[0].category == EntityCategory::Instrument);
    CHECK(ms[0].surface == "matrimonial causes act 1973");

    ms = extract("there were 45 witnesses");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].category == EntityCategory::Cardinal);
    CHECK(ms[0].surface == "45");
}

TEST_CASE("empty input yields no mentions") { CHECK(extract("").empty()); }

TEST_CASE("provision consumes its clause token, never double-reported as cardinal") {
    auto ms = extract("section 94 applies to 12 cases");
    REQUIRE(ms.size() == 2);
    CHECK(ms[0].category == EntityCategory::Provision);
    CHECK(ms[0].surface == "section 94");
    CHECK(ms[1].category == EntityCategory::Cardinal);
    CHECK(ms[1].surface == "12");
}

TEST_CASE("mentions never overlap and surfaces reconstruct") {
    std::mt19937_64 rng(21);
    const std::vector<std::string> words = {
        "lord",    "lady",  "phillips", "hale",  "section", "25(2)(a)-(h)", "rule", "3.17",
        "supreme", "court", "of",       "appeal", "v",      "barton",       "the",  "12",
        "march",   "1998",  "act",      "held"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    RuleSet rules = default_rules();
    for (int it = 0; it < 250; ++it) {
        std::uniform_int_distribution<int> len(0, 14);
        std::vector<std::string> toks;
        for (int i = 0, n = len(rng); i < n; ++i) toks.push_back(words[pick(rng)]);
        TokenStream s = make_stream_from_sentences("r", {toks});
        auto ms = extract_entities(s, rules);
        std::vector<bool> used(toks.size(), false);
        for (const EntityMention& m : ms) {
            REQUIRE(m.token_range.first < m.token_range.last);
            REQUIRE(m.token_range.last <= toks.size());
            std::string joined;
            for (std::size_t i = m.token_range.first; i < m.token_range.last; ++i) {
                CHECK(!used[i]);
                used[i] = true;
                if (i > m.token_range.first) joined.push_back(' ');
                joined += toks[i];
            }
            CHECK(joined == m.surface);
        }
        // Determinism: identical input gives an identical mention list.
        auto again = extract_entities(s, rules);
        REQUIRE(again.size() == ms.size());
        for (std::size_t i = 0; i < ms.size(); ++i) {
            CHECK(again[i].category == ms[i].category);
            CHECK(again[i].surface == ms[i].surface);
            CHECK(again[i].token_range.first == ms[i].token_range.first);
        }
    }
}

TEST_CASE("entity_inventory counts distinct surfaces") {
    std::vector<TokenStream> corpus = {
        stream_of("lord phillips spoke and lord phillips rose while lady hale listened"),
        stream_of("lady hale agreed with lord phillips"),
    };
    EntityInventory inv = entity_inventory(corpus, default_rules());
    REQUIRE(inv.count(EntityCategory::Judge));
    const auto& judges = inv.at(EntityCategory::Judge);
    REQUIRE(judges.size() == 2);
    CHECK(judges[0].surface == "lord phillips");
    CHECK(judges[0].frequency == 3);
    CHECK(judges[1].surface == "lady hale");
    CHECK(judges[1].frequency == 2);

    std::vector<TokenStream> plain = {stream_of("nothing here matches anything")};
    CHECK(entity_inventory(plain, default_rules()).empty());
    CHECK_THROWS_AS(entity_inventory({}, default_rules()), std::invalid_argument);

    std::vector<TokenStream> provisions = {stream_of("rule 3.17 was cited"),
                                           stream_of("again rule 3.17 appears")};
    EntityInventory pinv = entity_inventory(provisions, default_rules());
    REQUIRE(pinv.count(EntityCategory::Provision));
    CHECK(pinv.at(EntityCategory::Provision)[0].frequency == 2);
}

TEST_CASE("rules render/load round-trip") {
    RuleSet rules = default_rules();
    fs::path p = fs::temp_directory_path() / "courtlex_rules.tsv";
    {
        std::ofstream out(p);
        out << render_rules(rules);
    }
    RuleSet loaded = load_rules(p.string());
    REQUIRE(loaded.rules.size() == rules.rules.size());
    TokenStream s = stream_of("lord phillips cited section 25(2)(a)-(h) in the supreme court");
    auto a = extract_entities(s, rules);
    auto b = extract_entities(s, loaded);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].category == b[i].category);
        CHECK(a[i].surface == b[i].surface);
    }
    fs::remove(p);
}

TEST_CASE("inventory render/parse round-trip") {
    std::vector<TokenStream> corpus = {
        stream_of("lord phillips cited rule 3.17 in the supreme court on 12 march 1998")};
    EntityInventory inv = entity_inventory(corpus, default_rules());
    EntityInventory back = parse_inventory(render_inventory(inv));
    REQUIRE(back.size() == inv.size());
    for (const auto& [cat, entries] : inv) {
        REQUIRE(back.count(cat));
        REQUIRE(back.at(cat).size() == entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            CHECK(back.at(cat)[i].surface == entries[i].surface);
            CHECK(back.at(cat)[i].frequency == entries[i].frequency);
        }
    }
}
