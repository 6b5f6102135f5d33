#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subvocab::unicode {

// Pinned UCD version of the embedded block/letter tables.
const char* version();

// Index into the block table, or nullopt for unassigned codepoints
// outside every block.
std::optional<int> block_of(char32_t cp);

const char* block_name(int block_index);
int block_count();

// Resolve a user-supplied block name to an index. Matching is loose:
// case, spaces, hyphens and underscores are ignored ("basic_latin" works).
// Unknown names return nullopt.
std::optional<int> find_block(std::string_view name);

// Sorted list of canonical block names, for config error messages.
std::vector<std::string_view> all_block_names();

// General category L* per the embedded tables.
bool is_letter(char32_t cp);

// Strict UTF-8 decoding: rejects overlong forms, surrogates, and
// codepoints above U+10FFFF. Returns bytes consumed and writes the
// codepoint, or returns 0 when the bytes at `pos` are not valid UTF-8.
std::size_t decode_utf8(std::string_view s, std::size_t pos, char32_t& cp);

// Whole-string validity under the strict decoder.
bool is_valid_utf8(std::string_view s);

std::string encode_utf8(char32_t cp);

} // namespace subvocab::unicode
