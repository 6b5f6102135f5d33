#include "subvocab/head.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "subvocab/error.hpp"

namespace subvocab {

namespace {

constexpr char kMagic[8] = {'S', 'U', 'B', 'V', 'H', 'E', 'A', 'D'};
constexpr std::uint32_t kDtypeF32 = 0;
constexpr std::uint32_t kDtypeF16 = 1;

void check_dtype(int dtype_bytes) {
    if (dtype_bytes != 2 && dtype_bytes != 4)
        throw ConfigError("dtype_bytes must be 2 or 4; got " + std::to_string(dtype_bytes));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& origin) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ParseError(origin + ": truncated header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

} // namespace

std::uint16_t float_to_half(float f) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    const std::uint32_t sign = (bits >> 16) & 0x8000;
    const std::int32_t exp = static_cast<std::int32_t>((bits >> 23) & 0xFF) - 127 + 15;
    std::uint32_t mant = bits & 0x7FFFFF;

    if (((bits >> 23) & 0xFF) == 0xFF)  // inf / nan
        return static_cast<std::uint16_t>(sign | 0x7C00 | (mant ? 0x200 : 0));
    if (exp >= 0x1F) return static_cast<std::uint16_t>(sign | 0x7C00);  // overflow -> inf
    if (exp <= 0) {
        if (exp < -10) return static_cast<std::uint16_t>(sign);  // underflow -> zero
        // subnormal: shift with round-to-nearest-even
        mant |= 0x800000;
        const int shift = 14 - exp;
        std::uint32_t half_mant = mant >> shift;
        const std::uint32_t rem = mant & ((1u << shift) - 1);
        const std::uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half_mant & 1))) ++half_mant;
        return static_cast<std::uint16_t>(sign | half_mant);
    }
    std::uint32_t half = sign | (static_cast<std::uint32_t>(exp) << 10) | (mant >> 13);
    const std::uint32_t rem = mant & 0x1FFF;
    if (rem > 0x1000 || (rem == 0x1000 && (half & 1))) ++half;  // may carry into exponent
    return static_cast<std::uint16_t>(half);
}

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = (std::uint32_t(h) & 0x8000) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1F;
    std::uint32_t mant = h & 0x3FF;

    if (exp == 0x1F)
        return std::bit_cast<float>(sign | 0x7F800000 | (mant << 13));
    if (exp == 0) {
        if (mant == 0) return std::bit_cast<float>(sign);
        int e = -1;
        do {
            mant <<= 1;
            ++e;
        } while (!(mant & 0x400));
        return std::bit_cast<float>(sign | ((112 - e) << 23) | ((mant & 0x3FF) << 13));
    }
    return std::bit_cast<float>(sign | ((exp + 112) << 23) | (mant << 13));
}

HeadMatrix::HeadMatrix(std::size_t rows, std::size_t dim, int dtype_bytes)
    : rows_(rows), dim_(dim), dtype_bytes_(dtype_bytes), data_(rows * dim, 0.0f) {
    check_dtype(dtype_bytes);
}

HeadMatrix HeadMatrix::random(std::size_t rows, std::size_t dim, std::uint64_t seed,
                              int dtype_bytes) {
    HeadMatrix m(rows, dim, dtype_bytes);
    // splitmix64 stream mapped onto [-1, 1)
    std::uint64_t state = seed;
    auto next = [&state] {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    for (float& v : m.data_) {
        const std::uint32_t r = static_cast<std::uint32_t>(next() >> 40);  // 24 bits
        v = (static_cast<float>(r) * 0x1p-23f) - 1.0f;
        if (dtype_bytes == 2) v = half_to_float(float_to_half(v));
    }
    return m;
}

std::span<const float> HeadMatrix::row(std::size_t r) const {
    return std::span<const float>(data_.data() + r * dim_, dim_);
}

void HeadMatrix::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(rows_));
    write_u32(out, static_cast<std::uint32_t>(dim_));
    write_u32(out, dtype_bytes_ == 2 ? kDtypeF16 : kDtypeF32);
    if (dtype_bytes_ == 2) {
        for (float v : data_) {
            const std::uint16_t h = float_to_half(v);
            const unsigned char b[2] = {static_cast<unsigned char>(h),
                                        static_cast<unsigned char>(h >> 8)};
            out.write(reinterpret_cast<const char*>(b), 2);
        }
    } else {
        for (float v : data_) {
            const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
            const unsigned char b[4] = {
                static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
            out.write(reinterpret_cast<const char*>(b), 4);
        }
    }
    if (!out) throw ParseError("failed writing " + path.string());
}

HeadMatrix HeadMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open weight file " + path.string());
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError(path.string() + ": not a head weight file (bad magic)");

    const std::uint32_t rows = read_u32(in, path.string());
    const std::uint32_t dim = read_u32(in, path.string());
    const std::uint32_t dtype = read_u32(in, path.string());
    if (dtype != kDtypeF32 && dtype != kDtypeF16)
        throw ParseError(path.string() + ": unknown dtype code " + std::to_string(dtype));

    HeadMatrix m(rows, dim, dtype == kDtypeF16 ? 2 : 4);
    const std::size_t count = std::size_t(rows) * dim;
    if (dtype == kDtypeF16) {
        std::vector<unsigned char> buf(count * 2);
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
            throw ParseError(path.string() + ": truncated weight data");
        for (std::size_t i = 0; i < count; ++i)
            m.data_[i] = half_to_float(
                static_cast<std::uint16_t>(buf[2 * i] | (std::uint16_t(buf[2 * i + 1]) << 8)));
    } else {
        std::vector<unsigned char> buf(count * 4);
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
            throw ParseError(path.string() + ": truncated weight data");
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint32_t bits = std::uint32_t(buf[4 * i]) |
                                       (std::uint32_t(buf[4 * i + 1]) << 8) |
                                       (std::uint32_t(buf[4 * i + 2]) << 16) |
                                       (std::uint32_t(buf[4 * i + 3]) << 24);
            m.data_[i] = std::bit_cast<float>(bits);
        }
    }
    return m;
}

HeadMatrix gather(const HeadMatrix& head, const SelectionPlan& plan) {
    if (!plan.active_ids.empty() && plan.active_ids.back() >= head.rows())
        throw IntegrityError("plan selects row " + std::to_string(plan.active_ids.back()) +
                             " but the head has only " + std::to_string(head.rows()) +
                             " rows");
    HeadMatrix sub(plan.active_ids.size(), head.dim(), head.dtype_bytes());
    for (std::size_t k = 0; k < plan.active_ids.size(); ++k) {
        const auto src = head.row(plan.active_ids[k]);
        for (std::size_t c = 0; c < head.dim(); ++c) sub.at(k, c) = src[c];
    }
    return sub;
}

std::vector<float> logits(const HeadMatrix& head, std::span<const float> hidden) {
    if (hidden.size() != head.dim())
        throw IntegrityError("hidden state dimension " + std::to_string(hidden.size()) +
                             " does not match head dimension " + std::to_string(head.dim()));
    std::vector<float> out(head.rows());
    for (std::size_t r = 0; r < head.rows(); ++r) {
        const auto row = head.row(r);
        float acc = 0.0f;  // fixed ascending-index accumulation
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * hidden[c];
        out[r] = acc;
    }
    return out;
}

TokenId greedy_step(const HeadMatrix& subhead, std::span<const float> hidden,
                    const SelectionPlan& plan) {
    if (subhead.rows() == 0)
        throw IntegrityError("greedy step over an empty sub-head");
    if (subhead.rows() != plan.active_ids.size())
        throw IntegrityError("sub-head has " + std::to_string(subhead.rows()) +
                             " rows but the plan names " +
                             std::to_string(plan.active_ids.size()));

    const std::vector<float> scores = logits(subhead, hidden);
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;  // ties keep the lowest local row
    return remap_out(plan, best);
}

MemoryReport memory_report(std::size_t full_size, std::size_t dim, int dtype_bytes,
                           std::size_t plan_size) {
    check_dtype(dtype_bytes);
    MemoryReport r;
    const std::uint64_t row_bytes = std::uint64_t(dim) * std::uint64_t(dtype_bytes);
    r.full_head_bytes = std::uint64_t(full_size) * row_bytes;
    r.sub_head_bytes = std::uint64_t(plan_size) * row_bytes;
    r.embedding_bytes_gpu = 0;  // offloaded to host
    r.embedding_bytes_host = r.full_head_bytes;
    const std::uint64_t denom = r.full_head_bytes + r.embedding_bytes_host;
    const std::uint64_t used = r.sub_head_bytes + r.embedding_bytes_gpu;
    if (denom == 0)
        r.saved_fraction = 1.0;
    else if (used >= denom)
        r.saved_fraction = 0.0;
    else
        r.saved_fraction = static_cast<double>(denom - used) / static_cast<double>(denom);
    return r;
}

} // namespace subvocab
