#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "cfmac/mac_protocols.hpp"
#include "cfmac/phy_timing.hpp"

namespace cfmac {

enum class Outcome { Success, Collision, CcaError };

const char* to_string(Outcome outcome);

/// One transmission attempt. `end` is the end of the data frame.
struct TransmissionRecord {
    int station = 0;
    Micros start = 0;
    Micros end = 0;
    Outcome outcome = Outcome::Success;
    AccessMode mode_at_tx = AccessMode::Legacy;

    bool operator==(const TransmissionRecord&) const = default;
};

/// Records ordered by start time (ties by station id) plus per-station
/// success (S) and failure (F) tallies.
struct TraceLog {
    std::vector<TransmissionRecord> records;
    std::vector<std::int64_t> successes;
    std::vector<std::int64_t> failures;

    explicit TraceLog(int n_stations = 0)
        : successes(static_cast<std::size_t>(n_stations), 0), failures(static_cast<std::size_t>(n_stations), 0) {}

    int n_stations() const { return static_cast<int>(successes.size()); }

    /// Appends and updates the tallies; Collision and CcaError count as F.
    void append(const TransmissionRecord& rec);

    bool operator==(const TraceLog&) const = default;
};

/// Trace export: a header line `station,start_us,end_us,outcome,mode`
/// followed by one record per line in that column order.
void write_trace(std::ostream& out, const TraceLog& trace);

/// Parses the export format back. `n_stations` sizes the tallies; pass 0 to
/// size from the largest station id seen. Throws Error(Io) on malformed
/// input, naming the line.
TraceLog read_trace(std::istream& in, int n_stations = 0);

}  // namespace cfmac
