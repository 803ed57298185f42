#include "replay/model.hpp"

#include <algorithm>
#include <cmath>

#include "replay/errors.hpp"
#include "replay/matrix.hpp"

namespace replay {

namespace {

constexpr double kProbFloor = 1e-12;

TimestampScheme make_day_in_week_scheme() {
    TimestampScheme s;
    s.scale = TimeScale::day;
    s.granularity = TimeGranularity::hour;
    s.timestamp_count = 7;
    s.cycle_groups = {{0, 7}};
    return s;
}

void softmax(std::span<const double> logits, std::vector<double>& out) {
    out.resize(logits.size());
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
}

}  // namespace

std::string ModelConfig::variant_name() const {
    std::string name;
    if (use_ste && use_query_time) {
        name = "replay";
    } else if (!use_ste && use_query_time) {
        name = "noste";
    } else if (use_ste && !use_query_time) {
        name = "noqt";
    } else {
        name = "flashback";
    }
    if (multi_granularity) name += "+multig";
    if (fixed_bandwidth) name += "+fixedb";
    if (name == "replay+multig") name = "multig";
    if (name == "replay+fixedb") name = "fixedb";
    return name;
}

void ModelConfig::validate() const {
    if (poi_count <= 0 || user_count <= 0) {
        throw ConfigError("model: poi_count and user_count must be positive");
    }
    if (embed_dim <= 0 || hidden_dim <= 0) {
        throw ConfigError("model: embedding/hidden dims must be positive");
    }
    if (bptt_window < 1) {
        throw ConfigError("model: bptt_window must be >= 1");
    }
    if (fixed_bandwidth) {
        if (!(*fixed_bandwidth > 0.0)) {
            throw ConfigError("model: fixed_bandwidth must be > 0");
        }
        if (!use_ste) {
            throw ConfigError(
                "model: fixed_bandwidth requires use_ste (no bandwidths "
                "exist without smoothed timestamp embeddings)");
        }
    }
    if (multi_granularity && !use_ste) {
        throw ConfigError(
            "model: multi_granularity requires use_ste (it shapes the "
            "smoothed timestamp embeddings)");
    }
    flashback.validate();
}

void ReplayModel::init_params(const ModelConfig& cfg, ParameterStore& params,
                              std::uint64_t seed) {
    cfg.validate();
    const auto P = static_cast<std::size_t>(cfg.poi_count);
    const auto U = static_cast<std::size_t>(cfg.user_count);
    const auto d = static_cast<std::size_t>(cfg.embed_dim);
    const auto H = static_cast<std::size_t>(cfg.hidden_dim);
    const auto D = static_cast<std::size_t>(cfg.input_dim());
    const auto G = static_cast<std::size_t>(gate_multiplier(cfg.cell));

    params.create_uniform("poi_embeddings", {P, d}, seed);
    params.create_uniform("user_embeddings", {U, d}, seed);
    params.create_uniform("cell_w_x", {G * H, D}, seed);
    params.create_uniform("cell_w_h", {G * H, H}, seed);
    ParamTensor& b = params.create("cell_b", {G * H});
    if (cfg.cell == CellKind::lstm) {
        // Forget-gate rows start at 1 so early training can retain memory.
        for (std::size_t i = H; i < 2 * H; ++i) b.value[i] = 1.0;
    }
    params.create_uniform("head_w", {P, static_cast<std::size_t>(cfg.head_dim())},
                          seed);
    params.create("head_b", {P});

    // The timestamp table and bandwidths exist only with smoothed
    // timestamp embeddings; without them the query time reaches the head
    // as plain interval features.
    const double raw0 = BandwidthVector::raw_for_sigma(1.0);
    if (cfg.use_ste) {
        if (cfg.multi_granularity) {
            params.create_uniform("timestamp_embeddings_day", {24, d}, seed);
            params.create_uniform("timestamp_embeddings_dow", {7, d}, seed);
            ParamTensor& rd = params.create("bandwidth_raw_day", {24});
            std::fill(rd.value.begin(), rd.value.end(), raw0);
            ParamTensor& rw = params.create("bandwidth_raw_dow", {7});
            std::fill(rw.value.begin(), rw.value.end(), raw0);
        } else {
            const auto T = static_cast<std::size_t>(cfg.scheme.timestamp_count);
            params.create_uniform("timestamp_embeddings", {T, d}, seed);
            ParamTensor& r = params.create("bandwidth_raw", {T});
            std::fill(r.value.begin(), r.value.end(), raw0);
        }
    }
}

ReplayModel::ReplayModel(ModelConfig cfg, ParameterStore& params)
    : cfg_(std::move(cfg)), params_(&params) {
    cfg_.validate();
    poi_emb_ = &params.at("poi_embeddings");
    user_emb_ = &params.at("user_embeddings");
    head_w_ = &params.at("head_w");
    head_b_ = &params.at("head_b");
    cell_.w_x = &params.at("cell_w_x");
    cell_.w_h = &params.at("cell_w_h");
    cell_.b = &params.at("cell_b");
    validate_cell_weights(cfg_.cell, cell_,
                          static_cast<std::size_t>(cfg_.input_dim()),
                          static_cast<std::size_t>(cfg_.hidden_dim));
    if (head_w_->rows() != static_cast<std::size_t>(cfg_.poi_count) ||
        head_w_->cols() != static_cast<std::size_t>(cfg_.head_dim())) {
        throw ConfigError("head_w has wrong shape for this configuration");
    }

    day_scheme_ = TimestampScheme::make(TimeScale::day, TimeGranularity::hour);
    dow_scheme_ = make_day_in_week_scheme();

    if (!cfg_.use_ste) return;

    if (cfg_.multi_granularity) {
        ts_table_day_ = &params.at("timestamp_embeddings_day");
        ts_table_dow_ = &params.at("timestamp_embeddings_dow");
        bandwidths_day_.fixed_value = cfg_.fixed_bandwidth;
        bandwidths_dow_.fixed_value = cfg_.fixed_bandwidth;
        if (!cfg_.fixed_bandwidth) {
            bandwidths_day_.raw = &params.at("bandwidth_raw_day");
            bandwidths_dow_.raw = &params.at("bandwidth_raw_dow");
        }
        smooth_day_ = std::make_unique<SmoothingCache>(
            ts_table_day_, &bandwidths_day_, &day_scheme_);
        smooth_dow_ = std::make_unique<SmoothingCache>(
            ts_table_dow_, &bandwidths_dow_, &dow_scheme_);
    } else {
        ts_table_ = &params.at("timestamp_embeddings");
        bandwidths_.fixed_value = cfg_.fixed_bandwidth;
        if (!cfg_.fixed_bandwidth) {
            bandwidths_.raw = &params.at("bandwidth_raw");
        }
        smooth_ = std::make_unique<SmoothingCache>(ts_table_, &bandwidths_,
                                                   &cfg_.scheme);
    }
}

void ReplayModel::invalidate_caches() {
    if (smooth_) smooth_->clear();
    if (smooth_day_) smooth_day_->clear();
    if (smooth_dow_) smooth_dow_->clear();
}

std::optional<std::vector<double>> ReplayModel::bandwidth_sigmas() const {
    // Multi-granularity has two short tables rather than one per-slot
    // vector; the per-slot report is defined for the single table.
    if (!cfg_.use_ste || cfg_.multi_granularity) return std::nullopt;
    std::vector<double> out(static_cast<std::size_t>(cfg_.scheme.timestamp_count));
    for (int n = 0; n < cfg_.scheme.timestamp_count; ++n) {
        out[static_cast<std::size_t>(n)] = bandwidths_.sigma(n);
    }
    return out;
}

void ReplayModel::ts_embedding(const CivilTime& local,
                               std::vector<double>& out) {
    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    out.assign(static_cast<std::size_t>(cfg_.ts_width()), 0.0);
    if (cfg_.multi_granularity) {
        const auto& sday =
            smooth_day_->forward(transform_timestamp(local, day_scheme_));
        const auto& sdow = smooth_dow_->forward(local.weekday);
        std::copy(sday.embedding.begin(), sday.embedding.end(), out.begin());
        std::copy(sdow.embedding.begin(), sdow.embedding.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(d));
        return;
    }
    const auto& slot = smooth_->forward(transform_timestamp(local, cfg_.scheme));
    std::copy(slot.embedding.begin(), slot.embedding.end(), out.begin());
}

void ReplayModel::ts_embedding_backward(const CivilTime& local,
                                        std::span<const double> upstream) {
    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    if (cfg_.multi_granularity) {
        smooth_day_->backward(transform_timestamp(local, day_scheme_),
                              upstream.subspan(0, d));
        smooth_dow_->backward(local.weekday, upstream.subspan(d, d));
        return;
    }
    smooth_->backward(transform_timestamp(local, cfg_.scheme), upstream);
}

PredictionScores ReplayModel::head_forward(int user,
                                           std::span<const double> aggregated,
                                           const QueryTime& query,
                                           double current_utc_days,
                                           std::vector<double>* head_input) {
    const std::size_t H = static_cast<std::size_t>(cfg_.hidden_dim);
    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    std::vector<double> input(static_cast<std::size_t>(cfg_.head_dim()), 0.0);
    std::copy(aggregated.begin(), aggregated.end(), input.begin());
    const double* urow = user_emb_->row(static_cast<std::size_t>(user));
    std::copy(urow, urow + d, input.begin() + static_cast<std::ptrdiff_t>(H));
    if (cfg_.use_query_time) {
        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(H + d);
        if (cfg_.use_ste) {
            std::vector<double> q;
            ts_embedding(query.local, q);
            std::copy(q.begin(), q.end(), input.begin() + off);
        } else {
            // Interval encoding in the flashback weighting vocabulary.
            const double dt = query.utc_days() - current_utc_days;
            input[static_cast<std::size_t>(off)] = dt;
            input[static_cast<std::size_t>(off) + 1] =
                (1.0 + std::cos(2.0 * 3.14159265358979323846 * dt)) / 2.0;
            input[static_cast<std::size_t>(off) + 2] =
                std::exp(-cfg_.flashback.alpha * dt);
        }
    }

    PredictionScores scores;
    scores.logits = head_b_->value;
    gemv_acc(head_w_->value, head_w_->rows(), head_w_->cols(), input,
             scores.logits);
    softmax(scores.logits, scores.probabilities);
    if (head_input) *head_input = std::move(input);
    return scores;
}

PredictionScores ReplayModel::forward_step(int user, SequenceState& state,
                                           const Event& current,
                                           const QueryTime& query) {
    if (user < 0 || user >= cfg_.user_count) {
        throw DataError("forward_step: user id " + std::to_string(user) +
                        " out of range [0, " + std::to_string(cfg_.user_count) +
                        ")");
    }
    if (current.poi < 0 || current.poi >= cfg_.poi_count) {
        throw DataError("forward_step: poi id " + std::to_string(current.poi) +
                        " out of range [0, " + std::to_string(cfg_.poi_count) +
                        ")");
    }
    if (state.hidden.h.empty()) {
        state.hidden =
            HiddenState::zeros(cfg_.cell, static_cast<std::size_t>(cfg_.hidden_dim));
    }

    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    std::vector<double> x(static_cast<std::size_t>(cfg_.input_dim()), 0.0);
    const double* prow = poi_emb_->row(static_cast<std::size_t>(current.poi));
    std::copy(prow, prow + d, x.begin());
    if (cfg_.use_ste) {
        std::vector<double> s;
        ts_embedding(current.local_time(), s);
        std::copy(s.begin(), s.end(), x.begin() + static_cast<std::ptrdiff_t>(d));
    }

    state.hidden = cell_forward(cfg_.cell, cell_, x, state.hidden, nullptr);

    HistoryState entry;
    entry.hidden = state.hidden.h;
    entry.utc_days = current.utc_days();
    entry.lat = current.lat;
    entry.lon = current.lon;
    entry.step = -1;
    state.history.push_back(std::move(entry));
    if (state.history.size() > static_cast<std::size_t>(cfg_.flashback.window)) {
        state.history.erase(state.history.begin());
    }

    const std::vector<double> agg =
        aggregate_states(state.history, current.utc_days(), current.lat,
                         current.lon, cfg_.flashback, nullptr);
    return head_forward(user, agg, query, current.utc_days(), nullptr);
}

struct ReplayModel::StepCache {
    CellCache cell;
    AggregationCache agg;
    std::vector<int> tap_steps;
    std::vector<double> head_input;
    std::vector<double> prob;
    int poi = 0;
    int target = 0;
    CivilTime input_local;
    QueryTime query;
    double grad_scale = 0.0;
};

double ReplayModel::run_window(int user, const std::vector<Event>& events,
                               std::size_t first_step, std::size_t step_count,
                               SequenceState& state, double grad_scale,
                               std::vector<StepCache>* caches) {
    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    double loss_sum = 0.0;
    if (caches) caches->clear();
    if (state.hidden.h.empty()) {
        state.hidden = HiddenState::zeros(
            cfg_.cell, static_cast<std::size_t>(cfg_.hidden_dim));
    }

    for (std::size_t s = first_step; s < first_step + step_count; ++s) {
        const Event& current = events[s];
        const Event& next = events[s + 1];
        if (current.poi < 0 || current.poi >= cfg_.poi_count ||
            next.poi < 0 || next.poi >= cfg_.poi_count) {
            throw DataError("training: poi id out of range at step " +
                            std::to_string(s));
        }

        StepCache cache;
        cache.poi = current.poi;
        cache.target = next.poi;
        cache.input_local = current.local_time();
        cache.query = QueryTime::of(next);
        cache.grad_scale = grad_scale;

        std::vector<double> x(static_cast<std::size_t>(cfg_.input_dim()), 0.0);
        const double* prow = poi_emb_->row(static_cast<std::size_t>(current.poi));
        std::copy(prow, prow + d, x.begin());
        if (cfg_.use_ste) {
            std::vector<double> ste;
            ts_embedding(cache.input_local, ste);
            std::copy(ste.begin(), ste.end(),
                      x.begin() + static_cast<std::ptrdiff_t>(d));
        }

        state.hidden = cell_forward(cfg_.cell, cell_, x, state.hidden,
                                    caches ? &cache.cell : nullptr);

        HistoryState entry;
        entry.hidden = state.hidden.h;
        entry.utc_days = current.utc_days();
        entry.lat = current.lat;
        entry.lon = current.lon;
        entry.step = static_cast<int>(s - first_step);
        state.history.push_back(std::move(entry));
        if (state.history.size() >
            static_cast<std::size_t>(cfg_.flashback.window)) {
            state.history.erase(state.history.begin());
        }

        const std::vector<double> agg = aggregate_states(
            state.history, current.utc_days(), current.lat, current.lon,
            cfg_.flashback, caches ? &cache.agg : nullptr);
        if (caches) {
            cache.tap_steps.reserve(state.history.size());
            for (const HistoryState& h : state.history) {
                cache.tap_steps.push_back(h.step);
            }
        }

        PredictionScores scores =
            head_forward(user, agg, cache.query, current.utc_days(),
                         caches ? &cache.head_input : nullptr);
        const double p = std::max(
            scores.probabilities[static_cast<std::size_t>(next.poi)],
            kProbFloor);
        loss_sum += -std::log(p);
        if (caches) {
            cache.prob = std::move(scores.probabilities);
            caches->push_back(std::move(cache));
        }
    }
    return loss_sum;
}

void ReplayModel::backward_window(int user, std::vector<StepCache>& caches) {
    const std::size_t H = static_cast<std::size_t>(cfg_.hidden_dim);
    const std::size_t d = static_cast<std::size_t>(cfg_.embed_dim);
    const std::size_t T = caches.size();
    if (T == 0) return;

    std::vector<std::vector<double>> upstream_dh(T, std::vector<double>(H, 0.0));
    std::vector<double> dlogits;
    std::vector<double> dhead(static_cast<std::size_t>(cfg_.head_dim()));

    for (std::size_t s = 0; s < T; ++s) {
        StepCache& cache = caches[s];
        dlogits = cache.prob;
        dlogits[static_cast<std::size_t>(cache.target)] -= 1.0;
        for (double& v : dlogits) v *= cache.grad_scale;

        outer_acc(head_w_->grad, dlogits, cache.head_input);
        for (std::size_t i = 0; i < dlogits.size(); ++i) {
            head_b_->grad[i] += dlogits[i];
        }
        std::fill(dhead.begin(), dhead.end(), 0.0);
        gemv_transpose_acc(head_w_->value, head_w_->rows(), head_w_->cols(),
                           dlogits, dhead);

        // Aggregation taps: each in-window history state receives its
        // normalized weight times the context gradient.
        for (std::size_t j = 0; j < cache.tap_steps.size(); ++j) {
            const int tap = cache.tap_steps[j];
            if (tap < 0) continue;  // carried from a previous window
            const double w = cache.agg.normalized_weights[j];
            if (w == 0.0) continue;
            std::vector<double>& dst = upstream_dh[static_cast<std::size_t>(tap)];
            for (std::size_t k = 0; k < H; ++k) dst[k] += w * dhead[k];
        }

        double* ugrad = user_emb_->grad_row(static_cast<std::size_t>(user));
        for (std::size_t k = 0; k < d; ++k) ugrad[k] += dhead[H + k];

        // With interval features (no smoothed embeddings) the query inputs
        // are constants; only head_w picks up gradient for them.
        if (cfg_.use_query_time && cfg_.use_ste) {
            ts_embedding_backward(
                cache.query.local,
                std::span<const double>(dhead).subspan(H + d));
        }
    }

    std::vector<CellCache> cell_caches;
    cell_caches.reserve(T);
    for (StepCache& c : caches) cell_caches.push_back(std::move(c.cell));
    std::vector<std::vector<double>> dx;
    bptt_backward(cfg_.cell, cell_, cell_caches, upstream_dh, dx);

    for (std::size_t s = 0; s < T; ++s) {
        double* pgrad = poi_emb_->grad_row(static_cast<std::size_t>(caches[s].poi));
        for (std::size_t k = 0; k < d; ++k) pgrad[k] += dx[s][k];
        if (cfg_.use_ste) {
            ts_embedding_backward(caches[s].input_local,
                                  std::span<const double>(dx[s]).subspan(d));
        }
    }
}

double ReplayModel::corpus_loss(
    const std::vector<std::vector<Event>>& trajectories, bool with_grads) {
    invalidate_caches();
    std::size_t users_used = 0;
    for (const auto& t : trajectories) {
        if (t.size() >= 2) ++users_used;
    }
    if (users_used == 0) throw DataError("corpus_loss: no usable trajectories");

    double total = 0.0;
    for (std::size_t u = 0; u < trajectories.size(); ++u) {
        const std::vector<Event>& events = trajectories[u];
        if (events.size() < 2) continue;
        const std::size_t steps = events.size() - 1;
        const double grad_scale =
            1.0 / (static_cast<double>(users_used) * static_cast<double>(steps));

        SequenceState state;
        std::vector<StepCache> caches;
        double user_sum = 0.0;
        for (std::size_t first = 0; first < steps;
             first += static_cast<std::size_t>(cfg_.bptt_window)) {
            const std::size_t count = std::min(
                static_cast<std::size_t>(cfg_.bptt_window), steps - first);
            if (with_grads) {
                user_sum += run_window(static_cast<int>(u), events, first,
                                       count, state, grad_scale, &caches);
                backward_window(static_cast<int>(u), caches);
                state.detach_history();
            } else {
                user_sum += run_window(static_cast<int>(u), events, first,
                                       count, state, grad_scale, nullptr);
            }
        }
        total += user_sum / static_cast<double>(steps);
    }
    return total / static_cast<double>(users_used);
}

EpochStats ReplayModel::train_epoch(
    const std::vector<std::vector<Event>>& trajectories,
    AdamOptimizer& optimizer, std::uint64_t seed, std::uint64_t epoch_index) {
    invalidate_caches();
    std::vector<std::size_t> order;
    for (std::size_t u = 0; u < trajectories.size(); ++u) {
        if (trajectories[u].size() >= 2) order.push_back(u);
    }
    if (order.empty()) throw DataError("train_epoch: no usable trajectories");
    Rng shuffle_rng(derive_seed(seed, "epoch_shuffle", epoch_index));
    shuffle_rng.shuffle(order);

    EpochStats stats;
    for (std::size_t u : order) {
        const std::vector<Event>& events = trajectories[u];
        const std::size_t steps = events.size() - 1;
        const double grad_scale = 1.0 / static_cast<double>(steps);

        SequenceState state;
        std::vector<StepCache> caches;
        double user_sum = 0.0;
        for (std::size_t first = 0; first < steps;
             first += static_cast<std::size_t>(cfg_.bptt_window)) {
            const std::size_t count = std::min(
                static_cast<std::size_t>(cfg_.bptt_window), steps - first);
            const double window_sum =
                run_window(static_cast<int>(u), events, first, count, state,
                           grad_scale, &caches);
            if (!std::isfinite(window_sum)) {
                throw NumericError("non-finite loss for user " +
                                   std::to_string(u) + " in window starting at step " +
                                   std::to_string(first));
            }
            user_sum += window_sum;
            backward_window(static_cast<int>(u), caches);
            state.detach_history();
        }
        optimizer.step(*params_);
        invalidate_caches();
        stats.mean_loss += user_sum / static_cast<double>(steps);
        stats.steps += steps;
        ++stats.users;
    }
    stats.mean_loss /= static_cast<double>(stats.users);
    return stats;
}

}  // namespace replay
