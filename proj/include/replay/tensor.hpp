// Learnable tensors with paired gradient and Adam moment buffers, plus
// the parameter store that owns them. Single-writer discipline: all
// mutation happens on one logical stream; read-only snapshots may be
// shared for evaluation.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "replay/rng.hpp"

namespace replay {

struct ParamTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> m;  // first Adam moment
    std::vector<double> v;  // second Adam moment

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    /// Row view helpers for 2-D tensors (shape = {rows, cols}).
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    double* row(std::size_t r) { return value.data() + r * cols(); }
    const double* row(std::size_t r) const { return value.data() + r * cols(); }
    double* grad_row(std::size_t r) { return grad.data() + r * cols(); }
};

class ParameterStore {
public:
    /// Creates a zero-initialized tensor. Throws ConfigError on duplicate
    /// names or empty shapes.
    ParamTensor& create(const std::string& name,
                        const std::vector<std::size_t>& shape);

    /// Creates a tensor with entries uniform in [-init_range, init_range],
    /// drawn from a stream derived from (seed, "init." + name).
    ParamTensor& create_uniform(const std::string& name,
                                const std::vector<std::size_t>& shape,
                                std::uint64_t seed, double init_range = 0.1);

    ParamTensor* find(const std::string& name);
    const ParamTensor* find(const std::string& name) const;
    ParamTensor& at(const std::string& name);
    const ParamTensor& at(const std::string& name) const;

    void zero_grads();
    std::size_t scalar_count() const;

    /// Name-ordered iteration; the order is the checkpoint order.
    std::vector<ParamTensor*> tensors();
    std::vector<const ParamTensor*> tensors() const;

private:
    std::map<std::string, std::unique_ptr<ParamTensor>> by_name_;
};

struct OptimizerConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;

    /// Throws ConfigError when any constraint is violated.
    void validate() const;
};

/// One bias-corrected Adam update over every tensor in the store, then
/// zeroes all gradients. step_index is 1-based. Throws NumericError
/// naming the tensor if any gradient is non-finite.
void adam_step(ParameterStore& params, const OptimizerConfig& cfg,
               std::int64_t step_index);

/// Thin wrapper tracking the step counter across calls.
class AdamOptimizer {
public:
    explicit AdamOptimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void step(ParameterStore& params) { adam_step(params, cfg_, ++steps_); }

    std::int64_t steps_taken() const { return steps_; }
    void set_steps_taken(std::int64_t n) { steps_ = n; }
    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::int64_t steps_ = 0;
};

}  // namespace replay
