#include "replay/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "replay/errors.hpp"

namespace replay {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

KeyValueConfig parse_lines(std::istream& in, const std::string& origin) {
    KeyValueConfig kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row[0] == '#') continue;
        const std::size_t eq = row.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(row.substr(0, eq));
        const std::string value = trim(row.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": empty key");
        }
        kv.set(key, value);
    }
    return kv;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_lines(in, path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
    std::istringstream in(text);
    return parse_lines(in, "<string>");
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: \"" + *v +
                          "\"");
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const int i = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer: \"" + *v +
                          "\"");
    }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key +
                          ": not an unsigned integer: \"" + *v + "\"");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    const std::string s = lower(*v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config key " + key + ": not a boolean: \"" + *v + "\"");
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(
    const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, _] : values_) {
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
}

void apply_variant(KeyValueConfig& kv, const std::string& variant) {
    std::string name = lower(trim(variant));
    if (name.rfind("replay-", 0) == 0) name = name.substr(7);
    if (name == "replay") {
        kv.set("model.use_ste", "true");
        kv.set("model.use_query_time", "true");
        kv.set("model.multi_granularity", "false");
    } else if (name == "noste") {
        kv.set("model.use_ste", "false");
        kv.set("model.use_query_time", "true");
        kv.set("model.multi_granularity", "false");
    } else if (name == "noqt") {
        kv.set("model.use_ste", "true");
        kv.set("model.use_query_time", "false");
        kv.set("model.multi_granularity", "false");
    } else if (name == "flashback") {
        kv.set("model.use_ste", "false");
        kv.set("model.use_query_time", "false");
        kv.set("model.multi_granularity", "false");
    } else if (name == "multig") {
        kv.set("model.use_ste", "true");
        kv.set("model.use_query_time", "true");
        kv.set("model.multi_granularity", "true");
    } else if (name == "fixedb") {
        kv.set("model.use_ste", "true");
        kv.set("model.use_query_time", "true");
        kv.set("model.multi_granularity", "false");
        if (!kv.has("model.fixed_bandwidth")) {
            kv.set("model.fixed_bandwidth", "1.0");
        }
    } else {
        throw ConfigError(
            "unknown variant \"" + variant +
            "\"; expected replay, noste, noqt, flashback, multig or fixedb");
    }
}

TimestampScheme scheme_from_config(const KeyValueConfig& kv) {
    return TimestampScheme::make(
        time_scale_from_string(kv.get_string("time.scale", "week")),
        time_granularity_from_string(kv.get_string("time.granularity", "hour")));
}

FlashbackConfig flashback_from_config(const KeyValueConfig& kv) {
    FlashbackConfig cfg;
    cfg.alpha = kv.get_double("flashback.alpha", 0.1);
    cfg.beta = kv.get_double("flashback.beta", 100.0);
    cfg.window = kv.get_int("flashback.window", 20);
    cfg.validate();
    return cfg;
}

OptimizerConfig optimizer_from_config(const KeyValueConfig& kv) {
    OptimizerConfig cfg;
    cfg.learning_rate = kv.get_double("optim.learning_rate", 0.01);
    cfg.beta1 = kv.get_double("optim.beta1", 0.9);
    cfg.beta2 = kv.get_double("optim.beta2", 0.999);
    cfg.epsilon = kv.get_double("optim.epsilon", 1e-8);
    cfg.weight_decay = kv.get_double("optim.weight_decay", 0.0);
    cfg.validate();
    return cfg;
}

ModelConfig model_config_from(const KeyValueConfig& kv, int poi_count,
                              int user_count) {
    ModelConfig cfg;
    cfg.poi_count = poi_count;
    cfg.user_count = user_count;
    cfg.embed_dim = kv.get_int("model.embed_dim", 10);
    cfg.hidden_dim = kv.get_int("model.hidden_dim", cfg.embed_dim);
    cfg.cell = cell_kind_from_string(kv.get_string("model.cell", "vanilla"));
    cfg.scheme = scheme_from_config(kv);
    cfg.flashback = flashback_from_config(kv);
    cfg.use_ste = kv.get_bool("model.use_ste", true);
    cfg.use_query_time = kv.get_bool("model.use_query_time", true);
    cfg.multi_granularity = kv.get_bool("model.multi_granularity", false);
    if (kv.has("model.fixed_bandwidth")) {
        cfg.fixed_bandwidth = kv.get_double("model.fixed_bandwidth", 1.0);
    }
    cfg.bptt_window = kv.get_int("train.bptt_window", 20);
    cfg.validate();
    return cfg;
}

SyntheticSpec synthetic_spec_from(const KeyValueConfig& kv,
                                  std::uint64_t seed) {
    SyntheticSpec spec;
    spec.user_count = kv.get_int("synth.users", spec.user_count);
    spec.poi_count = kv.get_int("synth.pois", spec.poi_count);
    spec.days = kv.get_int("synth.days", spec.days);
    spec.rate_per_day = kv.get_double("synth.rate_per_day", spec.rate_per_day);
    spec.weekend_damping =
        kv.get_double("synth.weekend_damping", spec.weekend_damping);
    spec.home_pois = kv.get_int("synth.home_pois", spec.home_pois);
    spec.record_jitter_hours =
        kv.get_int("synth.record_jitter_hours", spec.record_jitter_hours);
    spec.seed = seed;
    const double rho_default = kv.get_double("synth.rho.default", 0.55);
    spec.rho.assign(24, rho_default);
    for (int h = 0; h < 24; ++h) {
        const std::string key = "synth.rho." + std::to_string(h);
        if (kv.has(key)) {
            spec.rho[static_cast<std::size_t>(h)] = kv.get_double(key, rho_default);
        }
    }
    spec.validate();  // user_count == 0 is allowed: empty corpus plus warning
    return spec;
}

}  // namespace replay
