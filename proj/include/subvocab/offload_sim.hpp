#pragma once

#include <cstdint>
#include <cstddef>

namespace subvocab {

// Analytic hardware profile for the transfer/compute overlap model.
struct HardwareModel {
    double link_bandwidth = 0.0;       // host->device bytes per second
    double device_flops = 0.0;         // floating ops per second
    double host_lookup_latency = 0.0;  // seconds per embedding lookup

    // Illustrative PCIe-class / edge-GPU numbers for exploration; not
    // measurements of any specific device.
    static HardwareModel illustrative_default();

    void validate() const;  // all strictly positive, else ConfigError
};

// Timeline of one instance start: sub-head row transfer overlapped with
// prefill compute, plus the host-side embedding lookups.
struct OverlapTimeline {
    double transfer_time = 0.0;   // seconds to move the sub-head rows
    double prefill_time = 0.0;    // seconds of prefill compute
    double embedding_time = 0.0;  // seconds of host-side lookups
    double exposed_latency = 0.0; // max(0, transfer - prefill)
    bool hidden = false;          // exposed_latency == 0
};

OverlapTimeline simulate(const HardwareModel& hw, std::size_t plan_size, std::size_t dim,
                         int dtype_bytes, std::size_t prompt_len,
                         double model_flops_per_token);

// Largest plan size whose transfer hides entirely behind prefill:
// simulate(k).hidden and not simulate(k + 1).hidden.
std::size_t breakeven_rows(const HardwareModel& hw, std::size_t dim, int dtype_bytes,
                           std::size_t prompt_len, double model_flops_per_token);

} // namespace subvocab
