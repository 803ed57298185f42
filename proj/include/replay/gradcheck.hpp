// Finite-difference verification of analytic gradients. The loss callable
// must be deterministic for fixed parameters; it is invoked with
// compute_grads = true exactly once to collect the analytic gradient and
// with compute_grads = false for the central-difference probes.

#pragma once

#include <functional>
#include <string>

#include "replay/rng.hpp"
#include "replay/tensor.hpp"

namespace replay {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t samples = 0;
};

/// Compares analytic gradients against central differences for
/// sample_count randomly chosen scalar parameters, spread across every
/// tensor in the store. Relative error uses the denominator
/// max(|analytic|, |numeric|, 1e-8). Throws DeterminismError when two
/// evaluations at identical parameters disagree. Gradients in the store
/// are zeroed on return; values are restored exactly.
GradCheckReport finite_diff_check(
    const std::function<double(bool compute_grads)>& loss_fn,
    ParameterStore& params, double h, std::size_t sample_count, Rng& rng);

}  // namespace replay
