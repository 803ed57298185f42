// Flat key=value configuration: '#' comments, whitespace-trimmed keys and
// values. Typed getters raise ConfigError naming the offending key.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "replay/data.hpp"
#include "replay/flashback.hpp"
#include "replay/model.hpp"
#include "replay/tensor.hpp"
#include "replay/time_scheme.hpp"

namespace replay {

class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) {
        values_[key] = value;
    }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Keys starting with the given prefix, in sorted order.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

private:
    std::map<std::string, std::string> values_;
};

/// Expands a --variant alias into model flag keys. Accepted names:
/// replay, noste, noqt, flashback, multig, fixedb (case-insensitive,
/// optional "replay-" prefix).
void apply_variant(KeyValueConfig& kv, const std::string& variant);

TimestampScheme scheme_from_config(const KeyValueConfig& kv);
FlashbackConfig flashback_from_config(const KeyValueConfig& kv);
OptimizerConfig optimizer_from_config(const KeyValueConfig& kv);

/// Model configuration from keys; poi/user counts come from the corpus.
ModelConfig model_config_from(const KeyValueConfig& kv, int poi_count,
                              int user_count);

/// Synthetic corpus spec from synth.* keys; rho built from
/// synth.rho.default plus per-hour synth.rho.<h> overrides.
SyntheticSpec synthetic_spec_from(const KeyValueConfig& kv,
                                  std::uint64_t seed);

}  // namespace replay
