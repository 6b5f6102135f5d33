#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "subvocab/selector.hpp"
#include "subvocab/token_set.hpp"

namespace subvocab {

// Dense LM-head weights: one row per vocabulary token. Values are held as
// float32 in memory; dtype_bytes (2 or 4) records the storage element size
// used for files and memory accounting. Half-precision matrices hold
// exactly the values their file representation round-trips to.
class HeadMatrix {
public:
    HeadMatrix() = default;
    HeadMatrix(std::size_t rows, std::size_t dim, int dtype_bytes);

    // Deterministic seeded fill in [-1, 1); independent of libstdc++
    // distribution internals.
    static HeadMatrix random(std::size_t rows, std::size_t dim, std::uint64_t seed,
                             int dtype_bytes = 4);

    static HeadMatrix load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t rows() const { return rows_; }
    std::size_t dim() const { return dim_; }
    int dtype_bytes() const { return dtype_bytes_; }

    std::span<const float> row(std::size_t r) const;
    float& at(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    bool operator==(const HeadMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    int dtype_bytes_ = 4;
    std::vector<float> data_;
};

// IEEE 754 binary16 conversions (round-to-nearest-even on the way down).
std::uint16_t float_to_half(float f);
float half_to_float(std::uint16_t h);

// Sub-head with row k equal to head row plan.active_ids[k].
HeadMatrix gather(const HeadMatrix& head, const SelectionPlan& plan);

// Row-wise dot products against `hidden`, accumulated in ascending column
// order so full-head and sub-head logits agree bitwise.
std::vector<float> logits(const HeadMatrix& head, std::span<const float> hidden);

// Argmax decode over the reduced head, mapped back to a global id. Ties
// break toward the lowest local row.
TokenId greedy_step(const HeadMatrix& subhead, std::span<const float> hidden,
                    const SelectionPlan& plan);

// Byte accounting for the two vocabulary-related components under the
// decoupled design: full embedding on the host, reduced head on device.
struct MemoryReport {
    std::uint64_t full_head_bytes = 0;
    std::uint64_t sub_head_bytes = 0;
    std::uint64_t embedding_bytes_gpu = 0;  // always 0: embedding is offloaded
    std::uint64_t embedding_bytes_host = 0;
    double saved_fraction = 0.0;
};

MemoryReport memory_report(std::size_t full_size, std::size_t dim, int dtype_bytes,
                           std::size_t plan_size);

} // namespace subvocab
