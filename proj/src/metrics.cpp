#include "cfmac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include "cfmac/error.hpp"

namespace cfmac {

std::vector<double> throughput_per_station(const TraceLog& trace, MeasurementWindow window,
                                           std::int64_t payload_bytes) {
    if (window.length() <= 0) {
        throw Error(ErrorCode::EmptyWindow, "measurement window has zero length");
    }
    std::vector<std::int64_t> counts(static_cast<std::size_t>(trace.n_stations()), 0);
    for (const auto& r : trace.records) {
        if (r.outcome == Outcome::Success && window.contains(r.start)) {
            ++counts[static_cast<std::size_t>(r.station)];
        }
    }
    std::vector<double> out;
    out.reserve(counts.size());
    const double bits_per_packet = 8.0 * static_cast<double>(payload_bytes);
    for (auto c : counts) {
        // bits per microsecond == Mb/s
        out.push_back(static_cast<double>(c) * bits_per_packet / static_cast<double>(window.length()));
    }
    return out;
}

double jfi(std::span<const double> xs) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : xs) {
        sum += x;
        sum_sq += x * x;
    }
    if (xs.empty() || sum_sq <= 0.0) {
        throw Error(ErrorCode::UndefinedMetric, "JFI undefined for empty or all-zero throughput");
    }
    return (sum * sum) / (static_cast<double>(xs.size()) * sum_sq);
}

double min_max_ratio(std::span<const double> xs) {
    if (xs.empty()) {
        throw Error(ErrorCode::UndefinedMetric, "min/max ratio of an empty list");
    }
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (!(*hi > 0.0)) {
        throw Error(ErrorCode::UndefinedMetric, "min/max ratio undefined when max is zero");
    }
    return *lo / *hi;
}

std::optional<InterarrivalStats> interarrival_from_starts(std::span<const Micros> starts) {
    if (starts.size() < 2) return std::nullopt;
    InterarrivalStats st;
    st.samples = static_cast<std::int64_t>(starts.size() - 1);
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    // Integer gaps keep the exact sum; variance via the integer moments too,
    // so a perfectly periodic station reports exactly 0.
    std::int64_t sum = 0;
    for (std::size_t i = 1; i < starts.size(); ++i) {
        const Micros gap = starts[i] - starts[i - 1];
        sum += gap;
        st.min = std::min(st.min, static_cast<double>(gap));
        st.max = std::max(st.max, static_cast<double>(gap));
    }
    const double n = static_cast<double>(st.samples);
    st.mean = static_cast<double>(sum) / n;
    double ss = 0.0;
    for (std::size_t i = 1; i < starts.size(); ++i) {
        const double d = static_cast<double>(starts[i] - starts[i - 1]) - st.mean;
        ss += d * d;
    }
    st.std = st.min == st.max ? 0.0 : std::sqrt(ss / n);
    return st;
}

std::vector<std::optional<InterarrivalStats>> interarrival_stats(const TraceLog& trace, MeasurementWindow window) {
    std::vector<std::vector<Micros>> starts(static_cast<std::size_t>(trace.n_stations()));
    for (const auto& r : trace.records) {
        if (window.contains(r.start)) {
            starts[static_cast<std::size_t>(r.station)].push_back(r.start);
        }
    }
    std::vector<std::optional<InterarrivalStats>> out;
    out.reserve(starts.size());
    for (const auto& s : starts) {
        out.push_back(interarrival_from_starts(s));
    }
    return out;
}

InterarrivalStats normalize_interarrival(const InterarrivalStats& stats, double reference_mean) {
    if (!(reference_mean > 0.0)) {
        throw Error(ErrorCode::UndefinedMetric, "normalization reference must be positive");
    }
    InterarrivalStats n = stats;
    n.mean /= reference_mean;
    n.std /= reference_mean;
    n.min /= reference_mean;
    n.max /= reference_mean;
    return n;
}

double loss_fraction(std::int64_t failures, std::int64_t successes) {
    const std::int64_t attempts = failures + successes;
    if (attempts <= 0) {
        throw Error(ErrorCode::UndefinedMetric, "loss fraction undefined with no attempts");
    }
    return static_cast<double>(failures) / static_cast<double>(attempts);
}

std::optional<Micros> convergence_time(const TraceLog& trace) {
    bool any_deterministic = false;
    Micros last_failure = 0;
    for (const auto& r : trace.records) {
        if (r.mode_at_tx != AccessMode::Deterministic) continue;
        any_deterministic = true;
        if (r.outcome != Outcome::Success) {
            last_failure = std::max(last_failure, r.end);
        }
    }
    if (!any_deterministic) return std::nullopt;
    return last_failure;
}

std::optional<Micros> schedule_settled_time(const TraceLog& trace) {
    const auto& recs = trace.records;
    if (recs.empty()) return std::nullopt;
    auto it = std::find_if(recs.rbegin(), recs.rend(), [](const TransmissionRecord& r) {
        return r.mode_at_tx != AccessMode::Deterministic || r.outcome != Outcome::Success;
    });
    if (it == recs.rbegin()) return std::nullopt;
    if (it == recs.rend()) return Micros{0};
    // first record of the clean tail
    return std::prev(it)->start;
}

MetricsReport compute_metrics(const TraceLog& trace, MeasurementWindow window, std::int64_t payload_bytes) {
    MetricsReport m;
    m.window = window;
    m.per_station_throughput = throughput_per_station(trace, window, payload_bytes);
    m.aggregate_throughput = std::accumulate(m.per_station_throughput.begin(), m.per_station_throughput.end(), 0.0);

    const bool any_traffic = std::any_of(m.per_station_throughput.begin(), m.per_station_throughput.end(),
                                         [](double x) { return x > 0.0; });
    if (any_traffic) {
        m.jfi = jfi(m.per_station_throughput);
        m.min_max_ratio = min_max_ratio(m.per_station_throughput);
    }
    m.interarrival = interarrival_stats(trace, window);

    const auto n = static_cast<std::size_t>(trace.n_stations());
    m.successes.assign(n, 0);
    m.failures.assign(n, 0);
    for (const auto& r : trace.records) {
        if (!window.contains(r.start)) continue;
        auto& tally = r.outcome == Outcome::Success ? m.successes : m.failures;
        ++tally[static_cast<std::size_t>(r.station)];
    }
    std::int64_t s_total = 0;
    std::int64_t f_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s_total += m.successes[i];
        f_total += m.failures[i];
        if (m.successes[i] + m.failures[i] > 0) {
            m.loss_fraction.emplace_back(loss_fraction(m.failures[i], m.successes[i]));
        } else {
            m.loss_fraction.emplace_back(std::nullopt);
        }
    }
    if (s_total + f_total > 0) {
        m.aggregate_loss_fraction = loss_fraction(f_total, s_total);
    }
    m.convergence_time = convergence_time(trace);
    return m;
}

}  // namespace cfmac
