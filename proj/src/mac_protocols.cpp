#include "cfmac/mac_protocols.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cfmac/error.hpp"

namespace cfmac {

const char* to_string(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::CsmaCa: return "CsmaCa";
        case ProtocolKind::CsmaEca: return "CsmaEca";
        case ProtocolKind::CfMac: return "CfMac";
    }
    return "?";
}

const char* to_string(AccessMode mode) {
    return mode == AccessMode::Legacy ? "Legacy" : "Deterministic";
}

ProtocolKind parse_protocol(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c == '/' || c == '-' || c == '_' || c == ' ') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "csmaca" || key == "dcf") return ProtocolKind::CsmaCa;
    if (key == "csmaeca" || key == "eca") return ProtocolKind::CsmaEca;
    if (key == "cfmac") return ProtocolKind::CfMac;
    throw Error(ErrorCode::InvalidConfig, "protocol: unknown name '" + std::string(name) + "'");
}

std::int64_t draw_backoff(int k, RandomSource& rng, int cw_min) {
    const std::int64_t window = (std::int64_t{1} << k) * cw_min;
    return rng.next_uniform(0, window - 1);
}

StationState make_station(int id, ProtocolKind kind, RandomSource& rng, const MacParams& params) {
    StationState s;
    s.id = id;
    s.kind = kind;
    s.backoff.cw_min = params.cw_min;
    s.backoff.m = params.max_stage;
    s.backoff.k = 0;
    s.backoff.b = draw_backoff(0, rng, params.cw_min);
    s.r_max = params.max_retries;
    return s;
}

AccessMode transmission_mode(const StationState& state) {
    if (state.kind == ProtocolKind::CsmaEca) {
        return state.eca_deterministic ? AccessMode::Deterministic : AccessMode::Legacy;
    }
    return state.mode;
}

StationState on_transmit(StationState state) {
    ++state.attempts_this_packet;
    return state;
}

namespace {

StationState revert_to_legacy(StationState s, RandomSource& rng) {
    s.mode = AccessMode::Legacy;
    s.consec_failures = 0;
    s.busy_probes = 0;
    s.backoff.k = 0;
    s.backoff.b = draw_backoff(0, rng, s.backoff.cw_min);
    return s;
}

}  // namespace

StationState on_success(StationState s, Micros tx_start, Micros cycle, RandomSource& rng, const MacParams& params) {
    ++s.successes;
    s.ret = 0;
    s.attempts_this_packet = 0;
    s.backoff.k = 0;
    switch (s.kind) {
        case ProtocolKind::CsmaCa:
            s.backoff.b = draw_backoff(0, rng, s.backoff.cw_min);
            break;
        case ProtocolKind::CsmaEca:
            s.backoff.b = params.eca_backoff;
            s.eca_deterministic = true;
            break;
        case ProtocolKind::CfMac:
            // Rigid schedule: once deterministic, deadlines advance from the
            // scheduled instant, not from when a probe let the frame out.
            s.deadline = (s.mode == AccessMode::Deterministic ? s.deadline : tx_start) + cycle;
            s.mode = AccessMode::Deterministic;
            s.consec_failures = 0;
            s.busy_probes = 0;
            s.backoff.b = 0;
            break;
    }
    return s;
}

StationState on_failure(StationState s, Micros cycle, RandomSource& rng, const MacParams&) {
    ++s.failures;
    ++s.ret;
    const bool discard = s.ret >= s.r_max;
    if (discard) {
        ++s.discarded;
        s.ret = 0;
        s.attempts_this_packet = 0;
    }

    if (s.mode == AccessMode::Deterministic) {
        ++s.consec_failures;
        if (s.consec_failures >= 2) {
            return revert_to_legacy(s, rng);
        }
        s.deadline += cycle;
        s.busy_probes = 0;
        s.backoff.b = 0;
        return s;
    }

    s.eca_deterministic = false;
    s.backoff.k = discard ? 0 : std::min(s.backoff.k + 1, s.backoff.m);
    s.backoff.b = draw_backoff(s.backoff.k, rng, s.backoff.cw_min);
    return s;
}

ProbeResult cfmac_probe(StationState s, bool channel_idle, Micros now, Micros slot, RandomSource& rng,
                        const MacParams& params) {
    using Kind = ProbeAction::Kind;
    if (channel_idle) {
        s.backoff.b = 0;
        return {s, {Kind::TransmitNow, now, 0}};
    }
    if (s.busy_probes >= 1) {
        return {revert_to_legacy(s, rng), {Kind::RevertLegacy, now, 0}};
    }
    const Micros window_end = s.deadline + params.probe_slots * slot;
    if (now < window_end) {
        return {s, {Kind::HoldProbe, std::min(now + slot, window_end), 0}};
    }
    const std::int64_t slots = rng.next_uniform(0, params.reduced_window - 1);
    s.busy_probes = 1;
    s.backoff.b = slots;
    return {s, {Kind::ReducedBackoff, now + slots * slot, slots}};
}

StationState legacy_tick(StationState s, bool slot_idle) {
    if (slot_idle && s.backoff.b > 0) {
        --s.backoff.b;
    }
    return s;
}

StationState advance_idle_slots(StationState s, std::int64_t idle_slots) {
    s.backoff.b = std::max<std::int64_t>(0, s.backoff.b - std::max<std::int64_t>(0, idle_slots));
    return s;
}

std::string check_invariants(const StationState& s, const MacParams& params) {
    std::ostringstream why;
    const auto& bo = s.backoff;
    if (bo.k < 0 || bo.k > bo.m) {
        why << "stage k=" << bo.k << " outside [0," << bo.m << "]";
    } else if (bo.b < 0 || bo.b > bo.window() - 1) {
        why << "counter b=" << bo.b << " outside [0," << bo.window() - 1 << "]";
    } else if (s.mode == AccessMode::Deterministic && s.kind != ProtocolKind::CfMac) {
        why << "deterministic mode on " << to_string(s.kind);
    } else if (s.mode == AccessMode::Deterministic && (s.consec_failures >= 2 || s.busy_probes >= 2)) {
        why << "deterministic with consec_failures=" << s.consec_failures << " busy_probes=" << s.busy_probes;
    } else if (s.ret < 0 || s.ret > s.r_max) {
        why << "ret=" << s.ret << " outside [0," << s.r_max << "]";
    } else if (s.attempts_this_packet > params.max_retries + 1) {
        why << "packet transmitted " << s.attempts_this_packet << " times";
    } else if (s.successes < 0 || s.failures < 0) {
        why << "negative tallies";
    }
    return why.str();
}

}  // namespace cfmac
