#include "subvocab/corpus_io.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "subvocab/error.hpp"

namespace subvocab {

namespace {

using nlohmann::json;

std::vector<TokenId> ids_from_json(const json& arr, std::int64_t line_no,
                                   const std::string& origin, const char* field) {
    std::vector<TokenId> ids;
    ids.reserve(arr.size());
    for (const json& v : arr) {
        if (!v.is_number_unsigned())
            throw ParseError(origin + ":" + std::to_string(line_no) + ": \"" +
                             field + "\" must contain non-negative integers");
        ids.push_back(v.get<TokenId>());
    }
    return ids;
}

} // namespace

CorpusRecord parse_corpus_line(const std::string& line, std::int64_t index,
                               std::int64_t line_no, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc.is_object())
        throw ParseError(origin + ":" + std::to_string(line_no) + ": record is not an object");

    CorpusRecord rec;
    rec.index = index;
    if (doc.contains("input")) rec.input_text = doc["input"].get<std::string>();
    if (doc.contains("output")) rec.output_text = doc["output"].get<std::string>();
    if (doc.contains("input_ids"))
        rec.input_ids = ids_from_json(doc["input_ids"], line_no, origin, "input_ids");
    if (doc.contains("output_ids"))
        rec.output_ids = ids_from_json(doc["output_ids"], line_no, origin, "output_ids");

    const bool has_text = rec.input_text || rec.output_text;
    const bool has_ids = rec.input_ids || rec.output_ids;
    if (has_text && has_ids)
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": record mixes text and pre-tokenized fields");
    if (!has_text && !has_ids)
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": record has neither text nor id fields");
    return rec;
}

CorpusReader::CorpusReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ParseError("cannot open corpus file " + path.string());
}

std::optional<CorpusRecord> CorpusReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        CorpusRecord rec = parse_corpus_line(line, next_index_++, line_no_, path_.string());
        const CorpusMode rec_mode = rec.pretokenized() ? CorpusMode::Ids : CorpusMode::Text;
        if (mode_ == CorpusMode::Unknown)
            mode_ = rec_mode;
        else if (mode_ != rec_mode)
            throw ParseError(path_.string() + ":" + std::to_string(line_no_) +
                             ": mixed text and pre-tokenized records in one corpus");
        return rec;
    }
    return std::nullopt;
}

Document to_document(const CorpusRecord& rec, const Tokenizer* tokenizer,
                     bool require_output) {
    Document doc;
    doc.doc_index = rec.index;

    auto encode_side = [&](const std::string& text, const char* side) {
        if (!tokenizer)
            throw ConfigError("corpus carries text but no tokenizer was provided");
        try {
            return tokenizer->encode(text);
        } catch (const ParseError& e) {
            throw ParseError("document " + std::to_string(rec.index) + " " + side + ": " +
                             e.what());
        }
    };

    if (rec.input_ids)
        doc.input_ids = *rec.input_ids;
    else if (rec.input_text)
        doc.input_ids = encode_side(*rec.input_text, "input");
    else
        throw ParseError("document " + std::to_string(rec.index) + " has no input field");

    if (rec.output_ids)
        doc.output_ids = *rec.output_ids;
    else if (rec.output_text)
        doc.output_ids = encode_side(*rec.output_text, "output");
    else if (require_output)
        throw ParseError("document " + std::to_string(rec.index) + " has no output field");

    return doc;
}

namespace {

std::size_t resolve_vocab_size(const Tokenizer* tokenizer,
                               std::optional<std::size_t> vocab_size,
                               CorpusMode mode) {
    if (tokenizer) {
        if (vocab_size && *vocab_size != tokenizer->table().size())
            throw ConfigError("explicit vocabulary size " + std::to_string(*vocab_size) +
                              " disagrees with the tokenizer's " +
                              std::to_string(tokenizer->table().size()));
        return tokenizer->table().size();
    }
    if (!vocab_size) {
        if (mode == CorpusMode::Text)
            throw ConfigError("text corpora require a tokenizer");
        throw ConfigError("pre-tokenized corpora require an explicit vocabulary size");
    }
    return *vocab_size;
}

struct LineBatch {
    std::int64_t first_index = 0;
    std::int64_t first_line_no = 0;
    std::vector<std::string> lines;
};

ProfiledCorpus profile_sharded(const std::filesystem::path& path, const Tokenizer* tokenizer,
                               std::size_t vocab, unsigned threads) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open corpus file " + path.string());
    const std::string origin = path.string();

    std::mutex mu;
    std::condition_variable cv_put, cv_get;
    std::deque<LineBatch> queue;
    bool done = false;
    constexpr std::size_t kBatchLines = 256;
    constexpr std::size_t kMaxQueued = 16;

    std::atomic<int> mode{0};  // 0 unset, 1 text, 2 ids
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto record_failure = [&] {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
    };

    std::vector<ProfiledCorpus> partials(threads);
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            Profiler prof(vocab);
            try {
                for (;;) {
                    LineBatch batch;
                    {
                        std::unique_lock lock(mu);
                        cv_get.wait(lock, [&] { return !queue.empty() || done; });
                        if (queue.empty()) break;
                        batch = std::move(queue.front());
                        queue.pop_front();
                        cv_put.notify_one();
                    }
                    for (std::size_t i = 0; i < batch.lines.size(); ++i) {
                        CorpusRecord rec =
                            parse_corpus_line(batch.lines[i], batch.first_index + (std::int64_t)i,
                                              batch.first_line_no + (std::int64_t)i, origin);
                        const int rec_mode = rec.pretokenized() ? 2 : 1;
                        int expected = 0;
                        if (!mode.compare_exchange_strong(expected, rec_mode) &&
                            expected != rec_mode)
                            throw ParseError(origin +
                                             ": mixed text and pre-tokenized records in one corpus");
                        prof.add(to_document(rec, tokenizer));
                    }
                }
            } catch (...) {
                record_failure();
            }
            partials[w] = std::move(prof).finish();
        });
    }

    {
        LineBatch batch;
        std::string line;
        std::int64_t index = 0, line_no = 0;
        auto flush = [&] {
            if (batch.lines.empty()) return;
            std::unique_lock lock(mu);
            cv_put.wait(lock, [&] { return queue.size() < kMaxQueued; });
            queue.push_back(std::move(batch));
            batch = {};
            cv_get.notify_one();
        };
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (batch.lines.empty()) {
                batch.first_index = index;
                batch.first_line_no = line_no;
            } else if (batch.first_line_no + (std::int64_t)batch.lines.size() != line_no) {
                flush();  // blank line broke contiguity; start a new batch
                batch.first_index = index;
                batch.first_line_no = line_no;
            }
            batch.lines.push_back(line);
            ++index;
            if (batch.lines.size() >= kBatchLines) flush();
        }
        flush();
        {
            std::lock_guard lock(mu);
            done = true;
        }
        cv_get.notify_all();
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);

    ProfiledCorpus merged = std::move(partials[0]);
    for (unsigned w = 1; w < threads; ++w)
        merged = Profiler::merge(std::move(merged), partials[w]);
    return merged;
}

} // namespace

ProfiledCorpus profile_corpus_file(const std::filesystem::path& path,
                                   const Tokenizer* tokenizer,
                                   std::optional<std::size_t> vocab_size,
                                   unsigned threads) {
    // Sniff the mode from the first record so the vocabulary size can be
    // resolved before any worker starts.
    CorpusMode mode = CorpusMode::Unknown;
    {
        CorpusReader sniff(path);
        if (auto rec = sniff.next()) mode = sniff.mode();
    }
    const std::size_t vocab = resolve_vocab_size(tokenizer, vocab_size, mode);

    if (threads > 1) return profile_sharded(path, tokenizer, vocab, threads);

    CorpusReader reader(path);
    Profiler prof(vocab);
    while (auto rec = reader.next()) prof.add(to_document(*rec, tokenizer));
    return std::move(prof).finish();
}

} // namespace subvocab
