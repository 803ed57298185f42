// Gaussian-smoothed timestamp embeddings with per-slot learnable
// bandwidths. The smoothed embedding for slot n is the normalized
// Gaussian-weighted average of all timestamp embeddings in n's cycle
// group:
//
//   w_l = exp(-dist(l,n)^2 / (2 sigma_n^2)) / sum_m exp(...)
//   s_n = sum_l w_l t_l
//
// The 1/(sigma sqrt(2 pi)) kernel prefactor cancels identically under the
// normalization, in both value and gradient, and is omitted. Positivity
// of sigma comes from a softplus over a raw parameter.

#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "replay/tensor.hpp"
#include "replay/time_scheme.hpp"

namespace replay {

inline double softplus(double x) {
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
}

/// Per-slot bandwidths. When fixed_value is set, sigma is that constant
/// everywhere and the raw parameter (if any) receives no gradient.
struct BandwidthVector {
    ParamTensor* raw = nullptr;  // length timestamp_count when learnable
    std::optional<double> fixed_value;

    double sigma(int n) const {
        if (fixed_value) return *fixed_value;
        return softplus(raw->value[static_cast<std::size_t>(n)]);
    }
    bool learnable() const { return !fixed_value && raw != nullptr; }

    /// Raw value that makes softplus(raw) == sigma. Used for init.
    static double raw_for_sigma(double sigma_target) {
        return std::log(std::expm1(sigma_target));
    }
};

/// Normalized kernel weights for slot n over the full slot range; zero
/// outside n's cycle group. Weights are nonnegative and sum to 1.
std::vector<double> smoothing_weights(int n, const BandwidthVector& bandwidths,
                                      const TimestampScheme& scheme);

/// One smoothed row: cached forward products reused by the backward pass.
struct SmoothedSlot {
    int n = 0;
    std::vector<double> weights;   // full length, zero outside the group
    std::vector<double> embedding; // length d
    double weighted_dist2 = 0.0;   // sum_l w_l dist(l,n)^2
    double sigma = 0.0;
};

/// Caches smoothed slots between parameter updates. Valid only while the
/// embedding table and bandwidths do not change; call clear() after every
/// optimizer step.
class SmoothingCache {
public:
    SmoothingCache(ParamTensor* table, const BandwidthVector* bandwidths,
                   const TimestampScheme* scheme)
        : table_(table), bandwidths_(bandwidths), scheme_(scheme) {}

    const SmoothedSlot& forward(int n);

    /// Accumulates dL/d(embedding s_n) into the timestamp-embedding grads
    /// and, when the bandwidths are learnable, into the raw bandwidth grad.
    void backward(int n, std::span<const double> upstream);

    void clear() { cache_.clear(); }

    const TimestampScheme& scheme() const { return *scheme_; }
    const BandwidthVector& bandwidths() const { return *bandwidths_; }

private:
    ParamTensor* table_;
    const BandwidthVector* bandwidths_;
    const TimestampScheme* scheme_;
    std::unordered_map<int, SmoothedSlot> cache_;
};

}  // namespace replay
