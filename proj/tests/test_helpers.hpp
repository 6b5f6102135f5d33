#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "subvocab/tokenizer.hpp"
#include "subvocab/unicode.hpp"
#include "subvocab/vocab.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/" + name;
}

inline subvocab::Tokenizer load_toy_tokenizer() {
    return subvocab::Tokenizer::load(fixture_path("toy_tokenizer.json"));
}

// Printable-form key for raw bytes, as byte-level vocab files store them.
inline std::string bytelevel_key(std::string_view raw) {
    std::string key;
    for (unsigned char b : raw)
        key += subvocab::unicode::encode_utf8(subvocab::bytelevel::byte_to_codepoint(b));
    return key;
}

// Byte-level tokenizer: 256 base byte tokens (ids 0..255) plus a few merges
// and one special token, mirroring the shape of real byte-level vocabs.
inline subvocab::Tokenizer make_bytelevel_tokenizer() {
    nlohmann::json vocab = nlohmann::json::object();
    for (int b = 0; b < 256; ++b) {
        const std::string key = subvocab::unicode::encode_utf8(
            subvocab::bytelevel::byte_to_codepoint(static_cast<unsigned char>(b)));
        vocab[key] = b;
    }
    vocab["he"] = 256;
    vocab["ll"] = 257;
    vocab["hell"] = 258;
    vocab["<eos>"] = 259;
    nlohmann::json doc{{"vocab", vocab},
                       {"merges", {"h e", "l l", "he ll"}},
                       {"byte_level", true},
                       {"special_tokens", {"<eos>"}}};
    return subvocab::Tokenizer::parse(doc.dump(), "<bytelevel fixture>");
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("subvocab_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Random profiling corpus with non-empty outputs.
inline std::vector<subvocab::Document> random_corpus(std::mt19937_64& rng,
                                                     std::size_t vocab_size,
                                                     std::int64_t max_docs) {
    std::uniform_int_distribution<std::int64_t> doc_count(1, max_docs);
    std::uniform_int_distribution<std::size_t> input_len(0, 20);
    std::uniform_int_distribution<std::size_t> output_len(1, 20);
    std::uniform_int_distribution<subvocab::TokenId> token(
        0, static_cast<subvocab::TokenId>(vocab_size - 1));

    std::vector<subvocab::Document> docs(doc_count(rng));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].doc_index = static_cast<std::int64_t>(i);
        docs[i].input_ids.resize(input_len(rng));
        for (auto& id : docs[i].input_ids) id = token(rng);
        docs[i].output_ids.resize(output_len(rng));
        for (auto& id : docs[i].output_ids) id = token(rng);
    }
    return docs;
}

// Random scalar value, excluding surrogates.
inline char32_t random_codepoint(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> bucket(0, 3);
    for (;;) {
        char32_t cp;
        switch (bucket(rng)) {
            case 0: cp = std::uniform_int_distribution<char32_t>(0x01, 0x7F)(rng); break;
            case 1: cp = std::uniform_int_distribution<char32_t>(0x80, 0x7FF)(rng); break;
            case 2: cp = std::uniform_int_distribution<char32_t>(0x800, 0xFFFF)(rng); break;
            default: cp = std::uniform_int_distribution<char32_t>(0x10000, 0x10FFFF)(rng);
        }
        if (cp >= 0xD800 && cp <= 0xDFFF) continue;
        return cp;
    }
}

inline std::string random_utf8(std::mt19937_64& rng, std::size_t max_codepoints = 60) {
    std::uniform_int_distribution<std::size_t> len(0, max_codepoints);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i)
        out += subvocab::unicode::encode_utf8(random_codepoint(rng));
    return out;
}

} // namespace testutil
