#include "cfmac/schedule_timer.hpp"

#include <cmath>
#include <string>

#include "cfmac/error.hpp"

namespace cfmac {

ScheduleTable::ScheduleTable()
    : rows_{
          {6, {2233.5, 91.5}},
          {11, {1567.5, 132.5}},
          {12, {1197.5, 102.5}},
          {24, {681.5, 106.5}},
          {48, {421.5, 103.5}},
      } {}

void ScheduleTable::set_row(int rate_mbps, ScheduleRow row) {
    if (!(row.share_us > 0.0) || !(row.epsilon_us > 0.0)) {
        throw Error(ErrorCode::InvalidConfig,
                    "schedule row for rate " + std::to_string(rate_mbps) + ": share and epsilon must be positive");
    }
    rows_[rate_mbps] = row;
}

CycleShare ScheduleTable::per_station_cycle(int rate_mbps) const {
    auto it = rows_.find(rate_mbps);
    if (it == rows_.end()) {
        throw Error(ErrorCode::UnsupportedRate, "rate " + std::to_string(rate_mbps) + " Mb/s: no schedule row");
    }
    return {it->second.share_us, it->second.epsilon_us, it->second.total_us()};
}

Micros ScheduleTable::cycle_timer(int n, int rate_mbps) const {
    if (n <= 0) {
        throw Error(ErrorCode::NoContenders, "cycle timer needs at least one contender");
    }
    const CycleShare row = per_station_cycle(rate_mbps);
    return static_cast<Micros>(std::llround(static_cast<double>(n) * row.total_us));
}

}  // namespace cfmac
