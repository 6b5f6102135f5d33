#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "subvocab/profiler.hpp"
#include "subvocab/tokenizer.hpp"
#include "subvocab/vocab.hpp"

namespace subvocab {

// One JSONL corpus record. Text corpora carry "input"/"output" strings,
// pre-tokenized corpora carry "input_ids"/"output_ids" arrays. A file must
// use one form throughout; mixing is rejected.
struct CorpusRecord {
    std::int64_t index = 0;  // 0-based record ordinal == doc_index
    std::optional<std::string> input_text;
    std::optional<std::string> output_text;
    std::optional<std::vector<TokenId>> input_ids;
    std::optional<std::vector<TokenId>> output_ids;

    bool pretokenized() const { return input_ids.has_value() || output_ids.has_value(); }
};

enum class CorpusMode { Unknown, Text, Ids };

// Streaming JSONL reader. Skips blank lines; locks the corpus mode at the
// first record and rejects later records of the other form.
class CorpusReader {
public:
    explicit CorpusReader(const std::filesystem::path& path);

    std::optional<CorpusRecord> next();
    CorpusMode mode() const { return mode_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::int64_t next_index_ = 0;
    std::int64_t line_no_ = 0;
    CorpusMode mode_ = CorpusMode::Unknown;
};

// Parse one JSONL line into a record (exposed for the sharded profiler).
CorpusRecord parse_corpus_line(const std::string& line, std::int64_t index,
                               std::int64_t line_no, const std::string& origin);

// Tokenize (or pass through) a record into a profiling document. Text
// records need a tokenizer; `require_output` distinguishes profiling
// corpora from selection inputs, where outputs are optional.
Document to_document(const CorpusRecord& rec, const Tokenizer* tokenizer,
                     bool require_output = true);

// Profile a JSONL corpus file. `vocab_size` must be supplied for
// pre-tokenized corpora; with a tokenizer present it defaults to the
// tokenizer's table size. `threads` > 1 shards the stream across workers
// and merges the partial profiles.
ProfiledCorpus profile_corpus_file(const std::filesystem::path& path,
                                   const Tokenizer* tokenizer,
                                   std::optional<std::size_t> vocab_size,
                                   unsigned threads = 1);

} // namespace subvocab
