#include "cfmac/phy_timing.hpp"

#include <algorithm>
#include <string>

#include "cfmac/error.hpp"

namespace cfmac {

namespace {

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return (num + den - 1) / den; }

}  // namespace

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedRate: return "unsupported-rate";
        case ErrorCode::NoContenders: return "no-contenders";
        case ErrorCode::InvalidConfig: return "invalid-config";
        case ErrorCode::UndefinedMetric: return "undefined-metric";
        case ErrorCode::EmptyWindow: return "empty-window";
        case ErrorCode::NoConvergence: return "no-convergence";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

const char* to_string(PreambleModel model) {
    return model == PreambleModel::Ofdm ? "OFDM" : "DSSS";
}

bool is_supported_rate(int rate_mbps) {
    return std::find(kSupportedRates.begin(), kSupportedRates.end(), rate_mbps) != kSupportedRates.end();
}

PhyProfile phy_profile(int rate_mbps) {
    if (!is_supported_rate(rate_mbps)) {
        throw Error(ErrorCode::UnsupportedRate, "rate " + std::to_string(rate_mbps) + " Mb/s: unsupported");
    }
    if (rate_mbps == 11) {
        return PhyProfile{11, 20, 50, 10, PreambleModel::Dsss};
    }
    return PhyProfile{rate_mbps, 9, 28, 10, PreambleModel::Ofdm};
}

PreambleModel preamble_for_rate(int rate_mbps) {
    return (rate_mbps == 1 || rate_mbps == 2 || rate_mbps == 11) ? PreambleModel::Dsss : PreambleModel::Ofdm;
}

Micros data_airtime(const FrameSpec& frame) {
    const std::int64_t bits = 8 * frame.mpdu_bytes;
    if (preamble_for_rate(frame.rate_mbps) == PreambleModel::Dsss) {
        // long preamble + PLCP header, then the payload bits at the data rate
        return 192 + ceil_div(bits, frame.rate_mbps);
    }
    // 20 us preamble/SIGNAL, 16 service bits + 6 tail bits, 4 us symbols
    return 20 + 4 * ceil_div(16 + 6 + bits, 4 * static_cast<std::int64_t>(frame.rate_mbps));
}

int control_rate(const PhyProfile& profile) {
    return profile.preamble == PreambleModel::Ofdm ? 6 : 1;
}

Micros ack_airtime(const PhyProfile& profile) {
    return data_airtime(FrameSpec{kAckBytes, control_rate(profile)});
}

Micros ack_timeout(const PhyProfile& profile) {
    return profile.sifs + ack_airtime(profile) + profile.slot;
}

}  // namespace cfmac
