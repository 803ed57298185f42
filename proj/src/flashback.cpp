#include "replay/flashback.hpp"

#include <cmath>

#include "replay/errors.hpp"
#include "replay/geo.hpp"

namespace replay {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void FlashbackConfig::validate() const {
    if (alpha < 0.0) throw ConfigError("flashback.alpha must be >= 0");
    if (beta < 0.0) throw ConfigError("flashback.beta must be >= 0");
    if (window < 1) throw ConfigError("flashback.window must be >= 1");
}

double flashback_weight(const ContextDelta& delta,
                        const FlashbackConfig& cfg) {
    const double hvc = (1.0 + std::cos(2.0 * kPi * delta.delta_t_days)) / 2.0;
    return hvc * std::exp(-cfg.alpha * delta.delta_t_days) *
           std::exp(-cfg.beta * delta.delta_d_km);
}

std::vector<double> aggregate_states(std::span<const HistoryState> history,
                                     double current_utc_days,
                                     double current_lat, double current_lon,
                                     const FlashbackConfig& cfg,
                                     AggregationCache* cache) {
    if (history.empty()) {
        throw DataError("aggregate_states: history must contain the current state");
    }
    const std::size_t dim = history.back().hidden.size();
    std::vector<double> weights(history.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < history.size(); ++j) {
        const HistoryState& s = history[j];
        ContextDelta delta;
        delta.delta_t_days = current_utc_days - s.utc_days;
        delta.delta_d_km = haversine_km(current_lat, current_lon, s.lat, s.lon);
        weights[j] = flashback_weight(delta, cfg);
        sum += weights[j];
    }
    std::vector<double> out(dim, 0.0);
    for (std::size_t j = 0; j < history.size(); ++j) {
        const double w = weights[j] / sum;
        weights[j] = w;
        if (w == 0.0) continue;
        const std::vector<double>& h = history[j].hidden;
        for (std::size_t k = 0; k < dim; ++k) out[k] += w * h[k];
    }
    if (cache) cache->normalized_weights = std::move(weights);
    return out;
}

}  // namespace replay
