#include "replay/smoothing.hpp"

#include <cmath>

#include "replay/errors.hpp"

namespace replay {

namespace {

// Unnormalized kernel values over n's cycle group, plus their sum.
void kernel_row(int n, double sigma, const TimestampScheme& scheme,
                std::vector<double>& out, double& sum) {
    const CycleGroup& g = scheme.group_of(n);
    out.assign(static_cast<std::size_t>(scheme.timestamp_count), 0.0);
    sum = 0.0;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const int center = n - g.start;
    for (int j = 0; j < g.period; ++j) {
        const int d = cycle_distance(j, center, g.period);
        const double u = std::exp(-static_cast<double>(d) * d * inv2s2);
        out[static_cast<std::size_t>(g.start + j)] = u;
        sum += u;
    }
}

}  // namespace

std::vector<double> smoothing_weights(int n, const BandwidthVector& bandwidths,
                                      const TimestampScheme& scheme) {
    const double sigma = bandwidths.sigma(n);
    if (!(sigma > 0.0)) {
        throw NumericError("smoothing: sigma must be positive at slot " +
                           std::to_string(n));
    }
    std::vector<double> w;
    double sum = 0.0;
    kernel_row(n, sigma, scheme, w, sum);
    const CycleGroup& g = scheme.group_of(n);
    for (int j = 0; j < g.period; ++j) {
        w[static_cast<std::size_t>(g.start + j)] /= sum;
    }
    return w;
}

const SmoothedSlot& SmoothingCache::forward(int n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;

    SmoothedSlot slot;
    slot.n = n;
    slot.sigma = bandwidths_->sigma(n);
    slot.weights = smoothing_weights(n, *bandwidths_, *scheme_);

    const std::size_t d = table_->cols();
    slot.embedding.assign(d, 0.0);
    const CycleGroup& g = scheme_->group_of(n);
    const int center = n - g.start;
    for (int j = 0; j < g.period; ++j) {
        const int l = g.start + j;
        const double w = slot.weights[static_cast<std::size_t>(l)];
        if (w == 0.0) continue;
        const double* row = table_->row(static_cast<std::size_t>(l));
        for (std::size_t k = 0; k < d; ++k) slot.embedding[k] += w * row[k];
        const int dist = cycle_distance(j, center, g.period);
        slot.weighted_dist2 += w * static_cast<double>(dist) * dist;
    }
    return cache_.emplace(n, std::move(slot)).first->second;
}

void SmoothingCache::backward(int n, std::span<const double> upstream) {
    const SmoothedSlot& slot = forward(n);
    const std::size_t d = table_->cols();
    const CycleGroup& g = scheme_->group_of(n);
    const int center = n - g.start;

    // d s_n / d t_l = w_l I, so each table row picks up w_l * upstream.
    // For the bandwidth, with w_l = u_l / S and du_l/dsigma =
    // u_l dist^2 / sigma^3:
    //   dw_l/dsigma = w_l (dist_l^2 - sum_m w_m dist_m^2) / sigma^3
    //   dL/dsigma   = sum_l (upstream . t_l) dw_l/dsigma
    const bool learn_sigma = bandwidths_->learnable();
    double dsigma = 0.0;
    for (int j = 0; j < g.period; ++j) {
        const int l = g.start + j;
        const double w = slot.weights[static_cast<std::size_t>(l)];
        if (w == 0.0) continue;
        const double* row = table_->row(static_cast<std::size_t>(l));
        double* grow = table_->grad_row(static_cast<std::size_t>(l));
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            grow[k] += w * upstream[k];
            dot += upstream[k] * row[k];
        }
        if (learn_sigma) {
            const int dist = cycle_distance(j, center, g.period);
            dsigma += dot * w *
                      (static_cast<double>(dist) * dist - slot.weighted_dist2);
        }
    }
    if (learn_sigma) {
        dsigma /= slot.sigma * slot.sigma * slot.sigma;
        const double raw = bandwidths_->raw->value[static_cast<std::size_t>(n)];
        bandwidths_->raw->grad[static_cast<std::size_t>(n)] +=
            dsigma * sigmoid(raw);
    }
}

}  // namespace replay
