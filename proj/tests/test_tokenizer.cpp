#include "doctest.h"

#include <algorithm>
#include <random>

#include "json.hpp"

#include "subvocab/error.hpp"
#include "subvocab/tokenizer.hpp"
#include "subvocab/unicode.hpp"

#include "test_helpers.hpp"

using namespace subvocab;
using nlohmann::json;

TEST_CASE("toy tokenizer loads with 8 tokens and 2 merges") {
    const auto tok = testutil::load_toy_tokenizer();
    CHECK(tok.table().size() == 8);
    CHECK(tok.merges().size() == 2);
    CHECK_FALSE(tok.byte_level());
    CHECK(tok.table().record(6).surface == "ab");
}

TEST_CASE("empty merge list tokenizes to single symbols") {
    const json doc{{"vocab", {{"a", 0}, {"b", 1}}}, {"merges", json::array()}};
    const auto tok = Tokenizer::parse(doc.dump(), "<inline>");
    CHECK(tok.encode("ab") == std::vector<TokenId>{0, 1});
}

TEST_CASE("merge whose product is missing is an integrity error") {
    const json doc{{"vocab", {{"x", 0}, {"y", 1}}}, {"merges", {"x y"}}};
    CHECK_THROWS_WITH_AS(Tokenizer::parse(doc.dump(), "<inline>"),
                         doctest::Contains("x y"), IntegrityError);
}

TEST_CASE("merge referencing an unknown side is an integrity error") {
    const json doc{{"vocab", {{"x", 0}, {"xq", 1}}}, {"merges", {"x q"}}};
    CHECK_THROWS_AS(Tokenizer::parse(doc.dump(), "<inline>"), IntegrityError);
}

TEST_CASE("malformed JSON raises a parse error naming the origin") {
    CHECK_THROWS_WITH_AS(Tokenizer::parse("{not json", "tok.json"),
                         doctest::Contains("tok.json"), ParseError);
}

TEST_CASE("vocab ids must be dense") {
    const json gap{{"vocab", {{"a", 0}, {"b", 2}}}, {"merges", json::array()}};
    CHECK_THROWS_AS(Tokenizer::parse(gap.dump(), "<inline>"), IntegrityError);
    const json dup{{"vocab", {{"a", 0}, {"b", 0}}}, {"merges", json::array()}};
    CHECK_THROWS_AS(Tokenizer::parse(dup.dump(), "<inline>"), IntegrityError);
}

TEST_CASE("encode follows the merge table") {
    const auto tok = testutil::load_toy_tokenizer();
    CHECK(tok.encode("").empty());
    CHECK(tok.encode("ab") == std::vector<TokenId>{6});
    CHECK(tok.encode("aca") == std::vector<TokenId>{0, 2, 0});
    CHECK(tok.encode("aca") == tok.encode("aca"));  // pure
}

TEST_CASE("unrepresentable character names itself in the error") {
    const auto tok = testutil::load_toy_tokenizer();
    CHECK_THROWS_WITH_AS(tok.encode("az"), doctest::Contains("'z'"), ParseError);
}

TEST_CASE("decode basics") {
    const auto tok = testutil::load_toy_tokenizer();
    CHECK(tok.decode(std::vector<TokenId>{}) == "");
    CHECK(tok.decode(std::vector<TokenId>{0, 1}) == "ab");
    CHECK_THROWS_AS(tok.decode(std::vector<TokenId>{8}), IntegrityError);
}

TEST_CASE("byte-level byte mapping matches the standard table") {
    CHECK(bytelevel::byte_to_codepoint('a') == U'a');
    CHECK(bytelevel::byte_to_codepoint(0x00) == 0x100);  // first remapped byte
    CHECK(bytelevel::byte_to_codepoint(0x0A) == 0x10A);  // newline
    CHECK(bytelevel::byte_to_codepoint(0x20) == 0x120);  // space
    CHECK(bytelevel::codepoint_to_byte(0x120) == std::optional<unsigned char>{0x20});
    // bijection over all 256 bytes
    for (int b = 0; b < 256; ++b) {
        const auto back = bytelevel::codepoint_to_byte(
            bytelevel::byte_to_codepoint(static_cast<unsigned char>(b)));
        REQUIRE(back.has_value());
        CHECK(*back == b);
    }
}

TEST_CASE("byte-level round-trip on random UTF-8") {
    const auto tok = testutil::make_bytelevel_tokenizer();
    REQUIRE(tok.byte_level());
    CHECK(tok.table().size() == 260);

    std::mt19937_64 rng(0xB17E);
    for (int iter = 0; iter < 500; ++iter) {
        const std::string s = testutil::random_utf8(rng);
        CHECK(tok.decode(tok.encode(s)) == s);
    }
    CHECK(tok.decode(tok.encode("hello hello")) == "hello hello");
}

TEST_CASE("byte-level vocab missing a base byte is rejected") {
    json vocab = json::object();
    for (int b = 1; b < 256; ++b) {  // byte 0 deliberately absent
        vocab[unicode::encode_utf8(
            bytelevel::byte_to_codepoint(static_cast<unsigned char>(b)))] = b - 1;
    }
    const json doc{{"vocab", vocab}, {"merges", json::array()}, {"byte_level", true}};
    CHECK_THROWS_AS(Tokenizer::parse(doc.dump(), "<inline>"), IntegrityError);
}

TEST_CASE("applied merge ranks are monotone on fixtures") {
    const auto toy = testutil::load_toy_tokenizer();
    std::vector<int> ranks;
    toy.encode("abcd", &ranks);
    CHECK(ranks == std::vector<int>{0, 1});

    const auto bl = testutil::make_bytelevel_tokenizer();
    ranks.clear();
    const auto ids = bl.encode("hellohello", &ranks);
    CHECK(std::is_sorted(ranks.begin(), ranks.end()));
    CHECK(ids.front() == 258);  // "hell"
}

TEST_CASE("script classification") {
    json vocab = json::object();
    for (int b = 0; b < 256; ++b)
        vocab[unicode::encode_utf8(
            bytelevel::byte_to_codepoint(static_cast<unsigned char>(b)))] = b;
    vocab[testutil::bytelevel_key(" the")] = 256;
    vocab[testutil::bytelevel_key("中")] = 257;   // CJK ideograph
    vocab[testutil::bytelevel_key("123.")] = 258;     // digits and punctuation only
    vocab[testutil::bytelevel_key("a中")] = 259;  // Latin vs CJK letter: tie
    vocab[testutil::bytelevel_key("ab中")] = 260; // Latin majority
    const json doc{{"vocab", vocab}, {"merges", json::array()}, {"byte_level", true}};
    const auto tok = Tokenizer::parse(doc.dump(), "<inline>");

    const auto the = tok.classify_script(256);
    CHECK(the.kind == ScriptClass::Kind::Block);
    CHECK(the.block_name() == "Basic Latin");

    const auto cjk = tok.classify_script(257);
    CHECK(cjk.kind == ScriptClass::Kind::Block);
    CHECK(cjk.block_name() == "CJK Unified Ideographs");

    CHECK(tok.classify_script(258).kind == ScriptClass::Kind::AllowedNeutral);
    CHECK(tok.classify_script(259).kind == ScriptClass::Kind::ByteFragment);  // tie
    CHECK(tok.classify_script(260).block_name() == "Basic Latin");

    // a lone continuation byte is not valid UTF-8
    CHECK(tok.classify_script(0x80).kind == ScriptClass::Kind::ByteFragment);
    // whitespace-only surfaces are neutral
    CHECK(tok.classify_script(0x20).kind == ScriptClass::Kind::AllowedNeutral);
}

TEST_CASE("special tokens keep their literal surface") {
    const auto bl = testutil::make_bytelevel_tokenizer();
    CHECK(bl.special_ids().contains(259));
    CHECK(bl.table().record(259).surface == "<eos>");
    CHECK(bl.decode(std::vector<TokenId>{259}) == "<eos>");
    CHECK(bl.table().record(259).display().has_value());
}

TEST_CASE("strict utf8 validation") {
    CHECK(unicode::is_valid_utf8("héllo 中"));
    CHECK_FALSE(unicode::is_valid_utf8("\x80"));          // lone continuation
    CHECK_FALSE(unicode::is_valid_utf8("\xC0\xAF"));      // overlong
    CHECK_FALSE(unicode::is_valid_utf8("\xED\xA0\x80"));  // surrogate
    CHECK_FALSE(unicode::is_valid_utf8("\xF5\x80\x80\x80"));
}

TEST_CASE("block lookup is loose but unknown names fail") {
    CHECK(unicode::find_block("basic_latin").has_value());
    CHECK(unicode::find_block("CJK Unified Ideographs").has_value());
    CHECK_FALSE(unicode::find_block("Klingon").has_value());
    CHECK(unicode::block_count() > 300);
}
