#include "subvocab/offload_sim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "subvocab/error.hpp"

namespace subvocab {

HardwareModel HardwareModel::illustrative_default() {
    return {
        .link_bandwidth = 16.0e9,      // ~PCIe 4.0 x8 effective
        .device_flops = 4.0e12,        // edge-class accelerator
        .host_lookup_latency = 50e-9,  // one cache-missing host gather per token
    };
}

void HardwareModel::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be strictly positive; got " +
                              std::to_string(v));
    };
    positive(link_bandwidth, "link_bandwidth");
    positive(device_flops, "device_flops");
    positive(host_lookup_latency, "host_lookup_latency");
}

namespace {

std::uint64_t plan_bytes(std::size_t plan_size, std::size_t dim, int dtype_bytes) {
    if (dim == 0) throw ConfigError("head dimension must be positive");
    if (dtype_bytes != 2 && dtype_bytes != 4)
        throw ConfigError("dtype_bytes must be 2 or 4; got " + std::to_string(dtype_bytes));
    const std::uint64_t row = std::uint64_t(dim) * std::uint64_t(dtype_bytes);
    if (plan_size != 0 && row > std::numeric_limits<std::uint64_t>::max() / plan_size)
        throw ConfigError("plan byte volume overflows");
    return std::uint64_t(plan_size) * row;
}

} // namespace

OverlapTimeline simulate(const HardwareModel& hw, std::size_t plan_size, std::size_t dim,
                         int dtype_bytes, std::size_t prompt_len,
                         double model_flops_per_token) {
    hw.validate();
    if (model_flops_per_token < 0.0 || !std::isfinite(model_flops_per_token))
        throw ConfigError("model_flops_per_token must be non-negative");

    OverlapTimeline t;
    t.transfer_time =
        static_cast<double>(plan_bytes(plan_size, dim, dtype_bytes)) / hw.link_bandwidth;
    t.prefill_time =
        static_cast<double>(prompt_len) * model_flops_per_token / hw.device_flops;
    t.embedding_time = static_cast<double>(prompt_len) * hw.host_lookup_latency;
    t.exposed_latency = t.transfer_time > t.prefill_time ? t.transfer_time - t.prefill_time : 0.0;
    t.hidden = t.exposed_latency == 0.0;
    return t;
}

std::size_t breakeven_rows(const HardwareModel& hw, std::size_t dim, int dtype_bytes,
                           std::size_t prompt_len, double model_flops_per_token) {
    auto hidden = [&](std::size_t k) {
        return simulate(hw, k, dim, dtype_bytes, prompt_len, model_flops_per_token).hidden;
    };
    const double prefill = simulate(hw, 0, dim, dtype_bytes, prompt_len, model_flops_per_token)
                               .prefill_time;
    const double row_bytes = static_cast<double>(dim) * static_cast<double>(dtype_bytes);

    const std::uint64_t max_rows =
        std::numeric_limits<std::uint64_t>::max() / (std::uint64_t(dim) * dtype_bytes);

    // Closed form, then nudge until it agrees with simulate at the boundary.
    const double estimate = std::floor(prefill * hw.link_bandwidth / row_bytes);
    std::size_t k = 0;
    if (estimate > 0) {
        k = estimate >= static_cast<double>(max_rows)
                ? max_rows
                : static_cast<std::size_t>(estimate);
    }
    while (k > 0 && !hidden(k)) --k;
    while (k < max_rows && hidden(k + 1)) ++k;
    if (k == max_rows && hidden(k))
        throw ConfigError("breakeven exceeds the representable plan size");
    return k;
}

} // namespace subvocab
