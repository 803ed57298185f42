#include "replay/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "replay/errors.hpp"

namespace replay {

GradCheckReport finite_diff_check(
    const std::function<double(bool)>& loss_fn, ParameterStore& params,
    double h, std::size_t sample_count, Rng& rng) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_check: h must be > 0");

    params.zero_grads();
    const double base = loss_fn(true);

    // Snapshot analytic gradients before probing.
    std::vector<ParamTensor*> tensors = params.tensors();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(tensors.size());
    for (ParamTensor* t : tensors) analytic.push_back(t->grad);
    params.zero_grads();

    const double again = loss_fn(false);
    if (base != again) {
        throw DeterminismError(
            "finite_diff_check: loss function is not deterministic (" +
            std::to_string(base) + " vs " + std::to_string(again) + ")");
    }

    GradCheckReport report;
    if (tensors.empty() || sample_count == 0) return report;

    // Round-robin over tensors so every parameter class is sampled even
    // when sample_count is small.
    for (std::size_t s = 0; s < sample_count; ++s) {
        ParamTensor* t = tensors[s % tensors.size()];
        const std::size_t i =
            static_cast<std::size_t>(rng.uniform_int(t->size()));
        const double saved = t->value[i];

        t->value[i] = saved + h;
        const double plus = loss_fn(false);
        t->value[i] = saved - h;
        const double minus = loss_fn(false);
        t->value[i] = saved;

        const double numeric = (plus - minus) / (2.0 * h);
        const double a = analytic[s % tensors.size()][i];
        const double denom =
            std::max({std::fabs(a), std::fabs(numeric), 1e-8});
        const double rel = std::fabs(a - numeric) / denom;
        ++report.samples;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_tensor = t->name;
            report.worst_index = i;
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    params.zero_grads();
    return report;
}

}  // namespace replay
