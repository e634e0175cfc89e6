#include <doctest.h>

#include "loopcheck/sha256.hpp"
#include "loopcheck/text.hpp"

using namespace loopcheck;

TEST_CASE("sha256 matches FIPS vectors") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("base64 encoding with padding") {
    CHECK(base64_encode(std::vector<uint8_t>{'M', 'a', 'n'}) == "TWFu");
    CHECK(base64_encode(std::vector<uint8_t>{'M', 'a'}) == "TWE=");
    CHECK(base64_encode(std::vector<uint8_t>{'M'}) == "TQ==");
}

TEST_CASE("singularize rule table") {
    CHECK(text::singularize("apples") == "apple");
    CHECK(text::singularize("boxes") == "box");
    CHECK(text::singularize("dishes") == "dish");
    CHECK(text::singularize("berries") == "berry");
    CHECK(text::singularize("tomatoes") == "tomato");
    CHECK(text::singularize("glasses") == "glass");
    // guarded endings stay put
    CHECK(text::singularize("glass") == "glass");
    CHECK(text::singularize("bus") == "bus");
    CHECK(text::singularize("iris") == "iris");
    CHECK(text::singularize("cat") == "cat");
}

TEST_CASE("object name normalization") {
    CHECK(text::normalize_object_name("  Dining  Tables ") == "dining table");
    CHECK(text::normalize_object_name("Apples") == "apple");
    CHECK(text::normalize_object_name("BANANA") == "banana");
}

TEST_CASE("lexicon longest-match extraction") {
    text::Lexicon lex({"apple", "table", "dining table", "banana"});

    SUBCASE("multi-word entries consume their components") {
        auto found = lex.extract("A dining table near the wall.");
        REQUIRE(found.size() == 1);
        CHECK(found[0] == "dining table");
    }
    SUBCASE("plural surface forms normalize") {
        auto found = lex.extract("Apples and an apple on a table");
        REQUIRE(found.size() == 2);
        CHECK(found[0] == "apple");
        CHECK(found[1] == "table");
    }
    SUBCASE("first-mention order, deduplicated") {
        auto found = lex.extract("the banana, the apple, and another banana");
        REQUIRE(found.size() == 2);
        CHECK(found[0] == "banana");
        CHECK(found[1] == "apple");
    }
    SUBCASE("no hits") { CHECK(lex.extract("nothing to see here").empty()); }
}

TEST_CASE("mentions_object token matching") {
    CHECK(text::mentions_object("The bananas are ripe", "banana"));
    CHECK(text::mentions_object("a dining table stands here", "dining table"));
    CHECK_FALSE(text::mentions_object("the bandana is red", "banana"));
    CHECK(text::mentions_object("the table's legs", "table"));
    CHECK_FALSE(text::mentions_object("", "banana"));
}

TEST_CASE("existence question parsing") {
    auto q = text::parse_existence_question("Is there a dining table in the image?");
    REQUIRE(q.has_value());
    CHECK(*q == "dining table");
    CHECK(*text::parse_existence_question("is there an apple in the image") == "apple");
    CHECK_FALSE(text::parse_existence_question("Describe the image.").has_value());
    CHECK_FALSE(text::parse_existence_question("Is the table red?").has_value());
}

TEST_CASE("attribute phrase verb normalization") {
    CHECK(text::normalize_attribute_phrase("are on the table") == "is on the table");
    CHECK(text::normalize_attribute_phrase("Have wheels") == "has wheels");
    CHECK(text::normalize_attribute_phrase("is red") == "is red");
    CHECK(text::pluralize_attribute_verb("is on the table") == "are on the table");
    CHECK(text::pluralize_attribute_verb("has a lid") == "have a lid");
    CHECK(text::pluralize_attribute_verb("are shiny") == "are shiny");
}

TEST_CASE("sentence splitting trims and drops empties") {
    auto s = text::split_sentences("First. Second!  Third?  ");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "First");
    CHECK(s[2] == "Third");
}
