#pragma once

#include <array>
#include <cstdint>

namespace cfmac {

/// Simulated time, whole microseconds.
using Micros = std::int64_t;

enum class PreambleModel { Ofdm, Dsss };

const char* to_string(PreambleModel model);

/// Timing constants of one PHY rate.
struct PhyProfile {
    int rate_mbps = 6;
    Micros slot = 9;
    Micros difs = 28;
    Micros sifs = 10;
    PreambleModel preamble = PreambleModel::Ofdm;

    bool operator==(const PhyProfile&) const = default;
};

struct FrameSpec {
    std::int64_t mpdu_bytes = 0;  // MAC header + payload + FCS
    int rate_mbps = 6;
};

inline constexpr std::array<int, 5> kSupportedRates{6, 11, 12, 24, 48};

/// MAC header plus FCS added to every data payload.
inline constexpr std::int64_t kMacOverheadBytes = 38;
inline constexpr std::int64_t kAckBytes = 14;
inline constexpr std::int64_t kDefaultPayloadBytes = 1470;

bool is_supported_rate(int rate_mbps);

/// Throws Error(UnsupportedRate) for anything outside kSupportedRates.
PhyProfile phy_profile(int rate_mbps);

/// DSSS for the 802.11b rates (1, 2, 11 Mb/s), OFDM otherwise.
PreambleModel preamble_for_rate(int rate_mbps);

/// Airtime of a data frame, rounded up to whole microseconds.
Micros data_airtime(const FrameSpec& frame);

/// Rate used for ACKs: 6 Mb/s on OFDM profiles, 1 Mb/s on DSSS.
int control_rate(const PhyProfile& profile);

Micros ack_airtime(const PhyProfile& profile);

/// SIFS + ACK + one slot: how long a sender waits before declaring failure.
Micros ack_timeout(const PhyProfile& profile);

}  // namespace cfmac
