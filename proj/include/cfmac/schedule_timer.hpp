#pragma once

#include <map>

#include "cfmac/phy_timing.hpp"

namespace cfmac {

/// Per-station share of a CF-MAC cycle at one rate, plus its guard interval.
struct ScheduleRow {
    double share_us = 0.0;
    double epsilon_us = 0.0;

    double total_us() const { return share_us + epsilon_us; }
};

struct CycleShare {
    double share_us;
    double epsilon_us;
    double total_us;
};

/// Rate -> (share, epsilon). Defaults to the testbed-tuned values; rows may
/// be replaced from the experiment config.
class ScheduleTable {
public:
    ScheduleTable();

    static ScheduleTable builtin() { return ScheduleTable{}; }

    /// Throws Error(InvalidConfig) unless both values are positive.
    void set_row(int rate_mbps, ScheduleRow row);

    /// Throws Error(UnsupportedRate) for rates without a row.
    CycleShare per_station_cycle(int rate_mbps) const;

    /// Length of a full N-station schedule: N * (share + epsilon), rounded
    /// to whole microseconds. Throws Error(NoContenders) when n == 0.
    Micros cycle_timer(int n, int rate_mbps) const;

    const std::map<int, ScheduleRow>& rows() const { return rows_; }

private:
    std::map<int, ScheduleRow> rows_;
};

inline CycleShare per_station_cycle(int rate_mbps) { return ScheduleTable{}.per_station_cycle(rate_mbps); }
inline Micros cycle_timer(int n, int rate_mbps) { return ScheduleTable{}.cycle_timer(n, rate_mbps); }

}  // namespace cfmac
