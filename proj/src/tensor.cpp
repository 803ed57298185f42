#include "replay/tensor.hpp"

#include <cmath>

#include "replay/errors.hpp"

namespace replay {

ParamTensor& ParameterStore::create(const std::string& name,
                                    const std::vector<std::size_t>& shape) {
    if (by_name_.count(name)) {
        throw ConfigError("duplicate parameter tensor: " + name);
    }
    if (shape.empty()) {
        throw ConfigError("parameter tensor " + name + " has empty shape");
    }
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    auto t = std::make_unique<ParamTensor>();
    t->name = name;
    t->shape = shape;
    t->value.assign(n, 0.0);
    t->grad.assign(n, 0.0);
    t->m.assign(n, 0.0);
    t->v.assign(n, 0.0);
    ParamTensor& ref = *t;
    by_name_.emplace(name, std::move(t));
    return ref;
}

ParamTensor& ParameterStore::create_uniform(
    const std::string& name, const std::vector<std::size_t>& shape,
    std::uint64_t seed, double init_range) {
    ParamTensor& t = create(name, shape);
    Rng rng(derive_seed(seed, "init." + name));
    for (double& x : t.value) x = rng.uniform(-init_range, init_range);
    return t;
}

ParamTensor* ParameterStore::find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second.get();
}

const ParamTensor* ParameterStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second.get();
}

ParamTensor& ParameterStore::at(const std::string& name) {
    ParamTensor* t = find(name);
    if (!t) throw ConfigError("unknown parameter tensor: " + name);
    return *t;
}

const ParamTensor& ParameterStore::at(const std::string& name) const {
    const ParamTensor* t = find(name);
    if (!t) throw ConfigError("unknown parameter tensor: " + name);
    return *t;
}

void ParameterStore::zero_grads() {
    for (auto& [_, t] : by_name_) t->zero_grad();
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : by_name_) n += t->size();
    return n;
}

std::vector<ParamTensor*> ParameterStore::tensors() {
    std::vector<ParamTensor*> out;
    out.reserve(by_name_.size());
    for (auto& [_, t] : by_name_) out.push_back(t.get());
    return out;
}

std::vector<const ParamTensor*> ParameterStore::tensors() const {
    std::vector<const ParamTensor*> out;
    out.reserve(by_name_.size());
    for (const auto& [_, t] : by_name_) out.push_back(t.get());
    return out;
}

void OptimizerConfig::validate() const {
    // Zero is allowed so that a no-op training pass stays expressible.
    if (!(learning_rate >= 0.0)) {
        throw ConfigError("optimizer: learning_rate must be >= 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0)) {
        throw ConfigError("optimizer: beta1 must be in (0, 1)");
    }
    if (!(beta2 > 0.0 && beta2 < 1.0)) {
        throw ConfigError("optimizer: beta2 must be in (0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("optimizer: epsilon must be > 0");
    }
    if (weight_decay < 0.0) {
        throw ConfigError("optimizer: weight_decay must be >= 0");
    }
}

void adam_step(ParameterStore& params, const OptimizerConfig& cfg,
               std::int64_t step_index) {
    cfg.validate();
    if (step_index < 1) {
        throw ConfigError("adam_step: step_index must be >= 1");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
    for (ParamTensor* t : params.tensors()) {
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double g = t->grad[i];
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient in tensor " + t->name +
                                   " at index " + std::to_string(i));
            }
            t->m[i] = cfg.beta1 * t->m[i] + (1.0 - cfg.beta1) * g;
            t->v[i] = cfg.beta2 * t->v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = t->m[i] / bc1;
            const double v_hat = t->v[i] / bc2;
            double update = cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
            if (cfg.weight_decay > 0.0) {
                update += cfg.learning_rate * cfg.weight_decay * t->value[i];
            }
            t->value[i] -= update;
        }
        t->zero_grad();
    }
}

}  // namespace replay
