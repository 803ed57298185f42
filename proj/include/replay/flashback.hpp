// Spatiotemporal re-weighting of past hidden states. Each past state is
// weighted by
//
//   W(dT, dD) = hvc(2 pi dT) * exp(-alpha dT) * exp(-beta dD)
//
// with hvc(x) = (1 + cos x) / 2, dT in days and dD in kilometers. The
// havercosine peaks at integer-day lags, encoding daily periodicity; the
// exponentials decay older and farther states. The aggregated context is
// the weight-normalized average over the most recent `window` states
// including the current one, whose weight is exactly 1 so the denominator
// never vanishes.

#pragma once

#include <span>
#include <vector>

namespace replay {

struct FlashbackConfig {
    double alpha = 0.1;  // temporal decay per day
    double beta = 100.0; // spatial decay per km
    int window = 20;     // number of past states to aggregate over

    void validate() const;
};

struct ContextDelta {
    double delta_t_days = 0.0;
    double delta_d_km = 0.0;
};

/// Eq-style weight, always in [0, 1].
double flashback_weight(const ContextDelta& delta, const FlashbackConfig& cfg);

/// One remembered state in the aggregation window.
struct HistoryState {
    std::vector<double> hidden;
    double utc_days = 0.0;  // check-in time in fractional days
    double lat = 0.0;
    double lon = 0.0;
    int step = -1;  // chunk-local step index, -1 when carried (detached)
};

struct AggregationCache {
    std::vector<double> normalized_weights;  // one per history entry
};

/// Normalized weighted average of the history states against the current
/// check-in's time and coordinates. The history must include the current
/// step's state (delta 0, weight 1). Returns the aggregated vector; when
/// cache is non-null the normalized weights are stored for the backward
/// pass.
std::vector<double> aggregate_states(std::span<const HistoryState> history,
                                     double current_utc_days,
                                     double current_lat, double current_lon,
                                     const FlashbackConfig& cfg,
                                     AggregationCache* cache = nullptr);

}  // namespace replay
