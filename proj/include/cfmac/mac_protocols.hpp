#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cfmac/phy_timing.hpp"
#include "cfmac/random.hpp"

namespace cfmac {

enum class ProtocolKind { CsmaCa, CsmaEca, CfMac };
enum class AccessMode { Legacy, Deterministic };

const char* to_string(ProtocolKind kind);
const char* to_string(AccessMode mode);
/// Accepts "CsmaCa", "CsmaEca", "CfMac" (case-insensitive, '/' '-' '_' ignored).
/// Throws Error(InvalidConfig) otherwise.
ProtocolKind parse_protocol(std::string_view name);

struct MacParams {
    int cw_min = 16;
    int max_stage = 6;          // m
    int max_retries = 6;        // R
    int eca_backoff = 7;        // B_d, transmission in the 8th slot
    int reduced_window = 7;     // RW
    int probe_slots = 2;
};

struct BackoffState {
    int k = 0;          // stage, 0..m
    std::int64_t b = 0; // counter in slots
    int cw_min = 16;
    int m = 6;

    std::int64_t window() const { return (std::int64_t{1} << k) * cw_min; }
};

struct StationState {
    int id = 0;
    ProtocolKind kind = ProtocolKind::CsmaCa;
    BackoffState backoff;
    int ret = 0;
    int r_max = 6;
    AccessMode mode = AccessMode::Legacy;
    int consec_failures = 0;
    int busy_probes = 0;
    Micros deadline = 0;
    std::int64_t successes = 0;
    std::int64_t failures = 0;

    std::int64_t discarded = 0;
    int attempts_this_packet = 0;
    // CSMA/ECA only: the pending counter is the deterministic B_d.
    bool eca_deterministic = false;
};

/// Uniform draw in [0, 2^k * cw_min - 1].
std::int64_t draw_backoff(int k, RandomSource& rng, int cw_min = 16);

/// Fresh station at stage 0 with a random counter.
StationState make_station(int id, ProtocolKind kind, RandomSource& rng, const MacParams& params = {});

/// Mode the station's next transmission is made in; CSMA/ECA reports
/// Deterministic while it runs on B_d.
AccessMode transmission_mode(const StationState& state);

/// Bookkeeping at the start of a transmission attempt.
StationState on_transmit(StationState state);

/// ACK received for a transmission that started at `tx_start`. `cycle` is
/// the CF-MAC cycle timer T_c (ignored by the other protocols).
StationState on_success(StationState state, Micros tx_start, Micros cycle, RandomSource& rng,
                        const MacParams& params = {});

/// ACK timeout. In deterministic mode the next deadline is one cycle later
/// unless this was the second consecutive failure, which reverts to legacy.
StationState on_failure(StationState state, Micros cycle, RandomSource& rng, const MacParams& params = {});

struct ProbeAction {
    enum class Kind { TransmitNow, HoldProbe, ReducedBackoff, RevertLegacy };
    Kind kind = Kind::TransmitNow;
    Micros next_check = 0;       // HoldProbe / ReducedBackoff: when to sense again
    std::int64_t slots = 0;      // ReducedBackoff only
};

struct ProbeResult {
    StationState state;
    ProbeAction action;
};

/// One channel check of a deterministic CF-MAC station at or after its
/// deadline. Busy checks are repeated every slot until `probe_slots` slots
/// past the deadline; a still-busy channel then yields a reduced backoff
/// of [0, RW-1] slots (busy_probes = 1), and a busy channel when that
/// backoff expires reverts the station to legacy access.
ProbeResult cfmac_probe(StationState state, bool channel_idle, Micros now, Micros slot, RandomSource& rng,
                        const MacParams& params = {});

/// One slot observed after DIFS in legacy mode: idle slots count down,
/// busy slots freeze the counter.
StationState legacy_tick(StationState state, bool slot_idle);

/// `idle_slots` consecutive idle legacy ticks.
StationState advance_idle_slots(StationState state, std::int64_t idle_slots);

/// True when b == 0 in legacy mode: the station transmits in this slot.
inline bool ready_to_transmit(const StationState& state) {
    return state.mode == AccessMode::Legacy && state.backoff.b == 0;
}

/// Checks every BackoffState / StationState invariant. Returns an empty
/// string when all hold, otherwise a description of the first violation.
std::string check_invariants(const StationState& state, const MacParams& params = {});

}  // namespace cfmac
