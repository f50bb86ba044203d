#include "doctest.h"

#include <set>

#include "cfmac/mac_protocols.hpp"
#include "fuzz_support.hpp"

using namespace cfmac;

namespace {

ScriptedRandom lowest() {
    return ScriptedRandom([](std::int64_t lo, std::int64_t) { return lo; });
}

ScriptedRandom highest() {
    return ScriptedRandom([](std::int64_t, std::int64_t hi) { return hi; });
}

StationState deterministic_station(Micros deadline) {
    auto rng = lowest();
    StationState s = make_station(3, ProtocolKind::CfMac, rng);
    s = on_success(s, deadline - 27900, 27900, rng);
    REQUIRE(s.mode == AccessMode::Deterministic);
    REQUIRE(s.deadline == deadline);
    return s;
}

}  // namespace

TEST_CASE("draw_backoff bounds") {
    SeededRandom rng(7);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 20000; ++i) {
        const auto b0 = draw_backoff(0, rng);
        CHECK(b0 >= 0);
        CHECK(b0 <= 15);
        seen.insert(b0);
        const auto b6 = draw_backoff(6, rng);
        CHECK(b6 >= 0);
        CHECK(b6 <= 1023);
    }
    CHECK(seen.size() == 16);
    auto lo = lowest();
    CHECK(draw_backoff(0, lo) == 0);
    auto hi = highest();
    CHECK(draw_backoff(6, hi) == 1023);
}

TEST_CASE("protocol names round-trip") {
    for (auto k : {ProtocolKind::CsmaCa, ProtocolKind::CsmaEca, ProtocolKind::CfMac}) {
        CHECK(parse_protocol(to_string(k)) == k);
    }
    CHECK(parse_protocol("CSMA/CA") == ProtocolKind::CsmaCa);
    CHECK(parse_protocol("cf-mac") == ProtocolKind::CfMac);
    CHECK_THROWS(parse_protocol("aloha"));
}

TEST_CASE("on_success per protocol") {
    SeededRandom rng(1);

    SUBCASE("CSMA/ECA switches to the deterministic backoff") {
        StationState s = make_station(0, ProtocolKind::CsmaEca, rng);
        s.backoff.k = 3;
        s = on_success(s, 1000, 0, rng);
        CHECK(s.backoff.b == 7);
        CHECK(s.backoff.k == 0);
        CHECK(s.successes == 1);
        CHECK(transmission_mode(s) == AccessMode::Deterministic);
        CHECK(s.mode == AccessMode::Legacy);
    }
    SUBCASE("CF-MAC schedules the next deadline one cycle after the transmission start") {
        StationState s = make_station(0, ProtocolKind::CfMac, rng);
        s = on_success(s, 10000, 27900, rng);
        CHECK(s.mode == AccessMode::Deterministic);
        CHECK(s.deadline == 37900);
        CHECK(s.consec_failures == 0);
        CHECK(s.busy_probes == 0);
    }
    SUBCASE("CSMA/CA resets the stage") {
        StationState s = make_station(0, ProtocolKind::CsmaCa, rng);
        s.backoff.k = 6;
        s.ret = 4;
        s = on_success(s, 0, 0, rng);
        CHECK(s.backoff.k == 0);
        CHECK(s.ret == 0);
        CHECK(s.backoff.b >= 0);
        CHECK(s.backoff.b <= 15);
    }
}

TEST_CASE("on_failure in legacy mode") {
    SeededRandom rng(2);
    StationState s = make_station(0, ProtocolKind::CsmaCa, rng);

    SUBCASE("stage clamps at m") {
        s.backoff.k = 6;
        s.ret = 1;
        s = on_failure(s, 0, rng);
        CHECK(s.backoff.k == 6);
        CHECK(s.failures == 1);
        CHECK(s.backoff.b <= 1023);
    }
    SUBCASE("stage doubles the window") {
        s = on_failure(s, 0, rng);
        CHECK(s.backoff.k == 1);
        CHECK(s.ret == 1);
        CHECK(s.backoff.b <= 31);
    }
    SUBCASE("R-th failure discards the packet and restarts at stage 0") {
        for (int i = 0; i < 6; ++i) s = on_failure(s, 0, rng);
        CHECK(s.discarded == 1);
        CHECK(s.ret == 0);
        CHECK(s.backoff.k == 0);
        CHECK(s.backoff.b <= 15);
        CHECK(s.failures == 6);
    }
}

TEST_CASE("CF-MAC stickiness") {
    SeededRandom rng(3);
    StationState s = deterministic_station(50000);

    s = on_failure(s, 27900, rng);
    CHECK(s.mode == AccessMode::Deterministic);
    CHECK(s.consec_failures == 1);
    CHECK(s.deadline == 50000 + 27900);

    SUBCASE("a success in between resets the count") {
        s = on_success(s, s.deadline, 27900, rng);
        CHECK(s.consec_failures == 0);
        s = on_failure(s, 27900, rng);
        CHECK(s.mode == AccessMode::Deterministic);
    }
    SUBCASE("second consecutive failure reverts") {
        s = on_failure(s, 27900, rng);
        CHECK(s.mode == AccessMode::Legacy);
        CHECK(s.backoff.k == 0);
        CHECK(s.backoff.b >= 0);
        CHECK(s.backoff.b <= 15);
        CHECK(s.consec_failures == 0);
    }
}

TEST_CASE("CF-MAC deadline stays rigid when a probe delays the frame") {
    SeededRandom rng(4);
    StationState s = deterministic_station(50000);
    // transmitted 18 us late after a two-slot probe
    s = on_success(s, 50018, 27900, rng);
    CHECK(s.deadline == 50000 + 27900);
}

TEST_CASE("cfmac_probe decisions") {
    auto rng = highest();
    const Micros slot = 9;
    StationState s = deterministic_station(12345);

    SUBCASE("idle at the deadline transmits") {
        auto r = cfmac_probe(s, true, 12345, slot, rng);
        CHECK(r.action.kind == ProbeAction::Kind::TransmitNow);
    }
    SUBCASE("busy keeps probing for two slots, then a reduced backoff") {
        auto r = cfmac_probe(s, false, 12345, slot, rng);
        CHECK(r.action.kind == ProbeAction::Kind::HoldProbe);
        CHECK(r.action.next_check == 12354);
        r = cfmac_probe(r.state, false, 12354, slot, rng);
        CHECK(r.action.kind == ProbeAction::Kind::HoldProbe);
        CHECK(r.action.next_check == 12363);
        r = cfmac_probe(r.state, false, 12363, slot, rng);
        CHECK(r.action.kind == ProbeAction::Kind::ReducedBackoff);
        CHECK(r.action.slots == 6);
        CHECK(r.action.next_check == 12363 + 6 * slot);
        CHECK(r.state.busy_probes == 1);
        CHECK(r.state.mode == AccessMode::Deterministic);

        SUBCASE("busy again aborts the round") {
            auto last = cfmac_probe(r.state, false, r.action.next_check, slot, rng);
            CHECK(last.action.kind == ProbeAction::Kind::RevertLegacy);
            CHECK(last.state.mode == AccessMode::Legacy);
            CHECK(last.state.backoff.k == 0);
            CHECK(last.state.busy_probes == 0);
        }
        SUBCASE("idle when the reduced backoff expires transmits") {
            auto last = cfmac_probe(r.state, true, r.action.next_check, slot, rng);
            CHECK(last.action.kind == ProbeAction::Kind::TransmitNow);
        }
    }
    SUBCASE("probe that turns idle inside the window transmits") {
        auto r = cfmac_probe(s, false, 12345, slot, rng);
        r = cfmac_probe(r.state, true, r.action.next_check, slot, rng);
        CHECK(r.action.kind == ProbeAction::Kind::TransmitNow);
    }
    SUBCASE("reduced backoff never exceeds RW - 1") {
        SeededRandom real(11);
        for (int i = 0; i < 2000; ++i) {
            auto r = cfmac_probe(s, false, 12345 + 2 * slot, slot, real);
            REQUIRE(r.action.kind == ProbeAction::Kind::ReducedBackoff);
            CHECK(r.action.slots >= 0);
            CHECK(r.action.slots <= 6);
        }
    }
}

TEST_CASE("legacy_tick") {
    StationState s;
    s.backoff.b = 3;
    CHECK(legacy_tick(s, true).backoff.b == 2);
    CHECK(legacy_tick(s, false).backoff.b == 3);
    s.backoff.b = 0;
    CHECK(ready_to_transmit(legacy_tick(s, true)));
    s.backoff.b = 9;
    StationState stepped = s;
    for (int i = 0; i < 4; ++i) stepped = legacy_tick(stepped, true);
    CHECK(advance_idle_slots(s, 4).backoff.b == stepped.backoff.b);
    CHECK(advance_idle_slots(s, 40).backoff.b == 0);
}

TEST_CASE("CSMA/CA and CSMA/ECA differ only on success") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SeededRandom ra(seed), rb(seed);
        StationState a = make_station(0, ProtocolKind::CsmaCa, ra);
        StationState b = make_station(0, ProtocolKind::CsmaEca, rb);
        CHECK(a.backoff.b == b.backoff.b);
        for (int step = 0; step < 30; ++step) {
            a = on_failure(a, 0, ra);
            b = on_failure(b, 0, rb);
            CHECK(a.backoff.b == b.backoff.b);
            CHECK(a.backoff.k == b.backoff.k);
            CHECK(a.ret == b.ret);
            a = legacy_tick(a, step % 3 != 0);
            b = legacy_tick(b, step % 3 != 0);
            CHECK(a.backoff.b == b.backoff.b);
        }
        const auto a2 = on_success(a, 0, 0, ra);
        const auto b2 = on_success(b, 0, 0, rb);
        CHECK(b2.backoff.b == 7);
        CHECK(a2.backoff.k == b2.backoff.k);
        CHECK(a2.ret == b2.ret);
    }
}

TEST_CASE("state machine fuzz keeps every invariant") {
    for (auto kind : {ProtocolKind::CsmaCa, ProtocolKind::CsmaEca, ProtocolKind::CfMac}) {
        const auto report = testing::fuzz_state_machine(kind, 2000, 60, 5);
        INFO(report.violation);
        CHECK(report.violation.empty());
        CHECK(report.sequences == 2000);
    }
}
