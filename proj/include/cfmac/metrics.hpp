#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cfmac/trace.hpp"

namespace cfmac {

/// Half-open interval of simulated time over which metrics are taken.
struct MeasurementWindow {
    Micros begin = 0;
    Micros end = 0;

    Micros length() const { return end - begin; }
    bool contains(Micros t) const { return t >= begin && t < end; }
};

struct InterarrivalStats {
    double mean = 0.0;
    double std = 0.0;   // population standard deviation
    double min = 0.0;
    double max = 0.0;
    std::int64_t samples = 0;

    double coefficient_of_variation() const { return mean > 0.0 ? std / mean : 0.0; }
};

struct MetricsReport {
    MeasurementWindow window;
    std::vector<double> per_station_throughput;  // Mb/s
    double aggregate_throughput = 0.0;
    std::optional<double> jfi;
    std::optional<double> min_max_ratio;
    std::vector<std::optional<InterarrivalStats>> interarrival;
    std::vector<std::int64_t> successes;  // within the window
    std::vector<std::int64_t> failures;
    std::vector<std::optional<double>> loss_fraction;
    std::optional<double> aggregate_loss_fraction;
    std::optional<Micros> convergence_time;
};

/// Successful MPDUs started inside the window, converted to Mb/s of payload.
/// Throws Error(EmptyWindow) when the window has no length.
std::vector<double> throughput_per_station(const TraceLog& trace, MeasurementWindow window,
                                           std::int64_t payload_bytes);

/// Jain's fairness index. Throws Error(UndefinedMetric) for an empty or
/// all-zero input.
double jfi(std::span<const double> xs);

/// Throws Error(UndefinedMetric) when max(xs) is not positive.
double min_max_ratio(std::span<const double> xs);

/// Statistics over consecutive differences of `starts` (sorted ascending).
/// Empty when fewer than two starts are given.
std::optional<InterarrivalStats> interarrival_from_starts(std::span<const Micros> starts);

/// Start-to-start gaps between consecutive attempts of each station, using
/// attempts that start inside the window.
std::vector<std::optional<InterarrivalStats>> interarrival_stats(const TraceLog& trace, MeasurementWindow window);

/// Rescales mean/min/max/std by `reference_mean` (e.g. the CF-MAC mean of
/// the matching run).
InterarrivalStats normalize_interarrival(const InterarrivalStats& stats, double reference_mean);

/// F / (F + S). Throws Error(UndefinedMetric) when no attempt was made.
double loss_fraction(std::int64_t failures, std::int64_t successes);

/// End of the last failed attempt made in deterministic mode, or 0 when
/// deterministic stations never failed. Empty when the trace has no
/// deterministic-mode attempt at all.
std::optional<Micros> convergence_time(const TraceLog& trace);

/// Earliest time after which every recorded attempt is a deterministic-mode
/// success. Empty if the trace does not end that way.
std::optional<Micros> schedule_settled_time(const TraceLog& trace);

MetricsReport compute_metrics(const TraceLog& trace, MeasurementWindow window, std::int64_t payload_bytes);

}  // namespace cfmac
