#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cfmac/mac_protocols.hpp"
#include "cfmac/metrics.hpp"
#include "cfmac/phy_timing.hpp"
#include "cfmac/random.hpp"
#include "cfmac/schedule_timer.hpp"
#include "cfmac/trace.hpp"

namespace cfmac {

inline constexpr Micros kNever = std::numeric_limits<Micros>::max();

struct SimConfig {
    int n_stations = 12;
    ProtocolKind protocol = ProtocolKind::CfMac;
    int rate_mbps = 6;
    std::int64_t payload_bytes = kDefaultPayloadBytes;
    double duration_s = 90.0;
    std::uint64_t seed = 1;
    double cca_error_prob = 0.0;
    double warmup_s = 5.0;
    ScheduleTable schedule;
    MacParams mac;

    Micros duration_us() const;
    Micros warmup_us() const;
};

/// Throws Error(InvalidConfig) / Error(UnsupportedRate) naming the field.
void validate(const SimConfig& config);

/// A frame on the air, before its outcome is known.
struct Transmission {
    int station = 0;
    Micros start = 0;
    Micros end = 0;
    AccessMode mode = AccessMode::Legacy;
    bool launched_into_busy = false;  // CCA misread a busy channel as idle
};

/// Outcomes of one maximal set of time-overlapping transmissions, in input
/// order: a lone frame succeeds, any overlap fails every participant.
/// Frames sent on a misread busy channel are reported as CcaError.
std::vector<Outcome> resolve_overlap(std::span<const Transmission> active);

/// What the station's carrier sense reports: the true channel state,
/// inverted with probability `error_prob`.
bool cca_sample(bool channel_idle, double error_prob, RandomSource& rng);

/// Idle-medium bookkeeping for legacy contention: slot boundaries fall at
/// idle_since + DIFS + j * slot, and counters are synced up to boundary
/// `synced_slots`.
struct ChannelClock {
    bool busy = false;
    Micros busy_until = 0;
    Micros idle_since = 0;
    std::int64_t synced_slots = 0;
};

/// Engine-side view of one station.
struct Contender {
    StationState state;
    std::optional<Micros> timer;  // CF-MAC deadline / probe / reduced-backoff check
    bool on_air = false;
};

/// Time of the next legacy transmission opportunity, or CF-MAC timer,
/// whichever comes first. Legacy stations only count while the medium is
/// idle; CF-MAC timers run in real time regardless of the slot grid.
/// Returns kNever when nothing is pending.
Micros slot_boundary_schedule(std::span<const Contender> contenders, const ChannelClock& clock,
                              const PhyProfile& phy);

struct ExperimentResult {
    TraceLog trace;
    MetricsReport metrics;
};

/// Saturated uplink run: every station always has a frame queued.
/// Deterministic for a fixed config (including seed).
ExperimentResult run_experiment(const SimConfig& config);

}  // namespace cfmac
