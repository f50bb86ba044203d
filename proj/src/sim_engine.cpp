#include "cfmac/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfmac/error.hpp"

namespace cfmac {

Micros SimConfig::duration_us() const { return static_cast<Micros>(std::llround(duration_s * 1e6)); }
Micros SimConfig::warmup_us() const { return static_cast<Micros>(std::llround(warmup_s * 1e6)); }

void validate(const SimConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (c.n_stations < 1) fail("stations: must be >= 1");
    if (!is_supported_rate(c.rate_mbps)) {
        throw Error(ErrorCode::UnsupportedRate, "rate: unsupported");
    }
    if (c.protocol == ProtocolKind::CfMac) {
        (void)c.schedule.per_station_cycle(c.rate_mbps);
    }
    if (c.payload_bytes < 0) fail("payload_bytes: must be >= 0");
    if (!(c.duration_s > 0.0)) fail("duration: must be > 0");
    if (!(c.warmup_s >= 0.0) || c.warmup_us() >= c.duration_us()) fail("warmup: must be in [0, duration)");
    if (!(c.cca_error_prob >= 0.0 && c.cca_error_prob <= 1.0)) fail("cca_error: must be in [0, 1]");
    const MacParams& m = c.mac;
    if (m.cw_min < 1 || m.max_stage < 0 || m.max_stage > 20 || m.max_retries < 1 || m.reduced_window < 1 ||
        m.probe_slots < 0 || m.eca_backoff < 0 || m.eca_backoff >= m.cw_min) {
        fail("mac: parameter out of range");
    }
}

std::vector<Outcome> resolve_overlap(std::span<const Transmission> active) {
    std::vector<Outcome> out;
    out.reserve(active.size());
    if (active.size() == 1) {
        out.push_back(Outcome::Success);
        return out;
    }
    for (const auto& tx : active) {
        out.push_back(tx.launched_into_busy ? Outcome::CcaError : Outcome::Collision);
    }
    return out;
}

bool cca_sample(bool channel_idle, double error_prob, RandomSource& rng) {
    if (error_prob <= 0.0) return channel_idle;
    return rng.next_bernoulli(error_prob) ? !channel_idle : channel_idle;
}

namespace {

bool contends_legacy(const Contender& c) {
    return !c.on_air && !c.timer && c.state.mode == AccessMode::Legacy;
}

Micros legacy_fire_time(const Contender& c, const ChannelClock& clock, const PhyProfile& phy) {
    return clock.idle_since + phy.difs + (clock.synced_slots + c.state.backoff.b) * phy.slot;
}

}  // namespace

Micros slot_boundary_schedule(std::span<const Contender> contenders, const ChannelClock& clock,
                              const PhyProfile& phy) {
    Micros next = clock.busy ? clock.busy_until : kNever;
    for (const auto& c : contenders) {
        if (c.timer) {
            next = std::min(next, *c.timer);
        } else if (!clock.busy && contends_legacy(c)) {
            next = std::min(next, legacy_fire_time(c, clock, phy));
        }
    }
    return next;
}

namespace {

class Engine {
public:
    explicit Engine(const SimConfig& cfg)
        : cfg_(cfg),
          phy_(phy_profile(cfg.rate_mbps)),
          airtime_(data_airtime(FrameSpec{cfg.payload_bytes + kMacOverheadBytes, cfg.rate_mbps})),
          ack_(ack_airtime(phy_)),
          cycle_(cfg.protocol == ProtocolKind::CfMac ? cfg.schedule.cycle_timer(cfg.n_stations, cfg.rate_mbps) : 0),
          end_(cfg.duration_us()),
          trace_(cfg.n_stations) {
        rngs_.reserve(static_cast<std::size_t>(cfg.n_stations));
        stations_.reserve(static_cast<std::size_t>(cfg.n_stations));
        for (int i = 0; i < cfg.n_stations; ++i) {
            rngs_.emplace_back(cfg.seed, static_cast<std::uint64_t>(i) + 1);
            stations_.push_back(Contender{make_station(i, cfg.protocol, rngs_.back(), cfg.mac), std::nullopt, false});
        }
        clock_ = ChannelClock{false, 0, 0, 0};
    }

    TraceLog run() {
        std::vector<Transmission> starters;
        for (;;) {
            const Micros now = slot_boundary_schedule(stations_, clock_, phy_);
            if (now >= end_) break;

            if (clock_.busy && clock_.busy_until == now) {
                finish_busy_period(now);
            }
            if (!clock_.busy) {
                sync_legacy(now);
            }

            starters.clear();
            // Every decision at `now` sees the channel as it was before any
            // frame starting at `now`: simultaneous starts cannot hear each other.
            const bool idle_now = !clock_.busy;
            for (auto& c : stations_) {
                while (c.timer && *c.timer == now) {
                    check_deadline(c, now, idle_now, starters);
                }
            }
            if (idle_now) {
                for (auto& c : stations_) {
                    if (!contends_legacy(c) || legacy_fire_time(c, clock_, phy_) != now) continue;
                    auto& rng = rngs_[static_cast<std::size_t>(c.state.id)];
                    if (cca_sample(true, cfg_.cca_error_prob, rng)) {
                        starters.push_back(Transmission{c.state.id, now, 0, AccessMode::Legacy, false});
                    } else {
                        c.state.backoff.b = 1;
                    }
                }
            }
            if (!starters.empty()) {
                start_transmissions(now, starters);
            }
        }
        return std::move(trace_);
    }

private:
    void check_deadline(Contender& c, Micros now, bool idle_now, std::vector<Transmission>& starters) {
        auto& rng = rngs_[static_cast<std::size_t>(c.state.id)];
        const bool sensed_idle = cca_sample(idle_now, cfg_.cca_error_prob, rng);
        auto [state, action] = cfmac_probe(c.state, sensed_idle, now, phy_.slot, rng, cfg_.mac);
        c.state = state;
        using Kind = ProbeAction::Kind;
        switch (action.kind) {
            case Kind::TransmitNow:
                c.timer.reset();
                starters.push_back(Transmission{c.state.id, now, 0, AccessMode::Deterministic, !idle_now});
                break;
            case Kind::HoldProbe:
            case Kind::ReducedBackoff:
                c.timer = action.next_check;
                break;
            case Kind::RevertLegacy:
                c.timer.reset();
                join_legacy(c, now);
                break;
        }
    }

    // Counters of idle-contending stations are kept relative to the last
    // slot boundary reached, so the next fire time is a closed form.
    void sync_legacy(Micros now) {
        const Micros anchor = clock_.idle_since + phy_.difs;
        if (now < anchor) return;
        const std::int64_t reached = (now - anchor) / phy_.slot;
        const std::int64_t elapsed = reached - clock_.synced_slots;
        if (elapsed <= 0) return;
        for (auto& c : stations_) {
            if (contends_legacy(c)) {
                c.state = advance_idle_slots(c.state, elapsed);
            }
        }
        clock_.synced_slots = reached;
    }

    void join_legacy(Contender& c, Micros now) {
        if (!clock_.busy && c.state.backoff.b == 0 && legacy_fire_time(c, clock_, phy_) < now) {
            c.state.backoff.b = 1;
        }
    }

    void start_transmissions(Micros now, std::vector<Transmission>& starters) {
        for (auto& tx : starters) {
            auto& c = stations_[static_cast<std::size_t>(tx.station)];
            c.on_air = true;
            tx.mode = transmission_mode(c.state);
            c.state = on_transmit(c.state);
            tx.end = now + airtime_;
            group_.push_back(tx);
        }
        Micros until;
        if (group_.size() == 1) {
            until = group_.front().end + phy_.sifs + ack_;
        } else {
            Micros last_end = 0;
            for (const auto& tx : group_) last_end = std::max(last_end, tx.end);
            until = last_end + phy_.difs;
        }
        clock_.busy_until = clock_.busy ? std::max(clock_.busy_until, until) : until;
        clock_.busy = true;
    }

    void finish_busy_period(Micros now) {
        std::sort(group_.begin(), group_.end(), [](const Transmission& a, const Transmission& b) {
            return a.start != b.start ? a.start < b.start : a.station < b.station;
        });
        const auto outcomes = resolve_overlap(group_);
        for (std::size_t i = 0; i < group_.size(); ++i) {
            const Transmission& tx = group_[i];
            trace_.append(TransmissionRecord{tx.station, tx.start, tx.end, outcomes[i], tx.mode});

            auto& c = stations_[static_cast<std::size_t>(tx.station)];
            auto& rng = rngs_[static_cast<std::size_t>(tx.station)];
            c.on_air = false;
            c.state = outcomes[i] == Outcome::Success ? on_success(c.state, tx.start, cycle_, rng, cfg_.mac)
                                                      : on_failure(c.state, cycle_, rng, cfg_.mac);
            if (c.state.mode == AccessMode::Deterministic) {
                while (c.state.deadline < now) c.state.deadline += cycle_;
                c.timer = c.state.deadline;
            } else {
                c.timer.reset();
            }
        }
        group_.clear();
        clock_ = ChannelClock{false, now, now, 0};
    }

    SimConfig cfg_;
    PhyProfile phy_;
    Micros airtime_;
    Micros ack_;
    Micros cycle_;
    Micros end_;
    std::vector<SeededRandom> rngs_;
    std::vector<Contender> stations_;
    ChannelClock clock_;
    std::vector<Transmission> group_;
    TraceLog trace_;
};

}  // namespace

ExperimentResult run_experiment(const SimConfig& config) {
    validate(config);
    Engine engine(config);
    ExperimentResult result{engine.run(), {}};
    result.metrics = compute_metrics(result.trace, MeasurementWindow{config.warmup_us(), config.duration_us()},
                                     config.payload_bytes);
    return result;
}

}  // namespace cfmac
