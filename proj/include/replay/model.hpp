// The full location-prediction model: POI embeddings and (optionally)
// smoothed timestamp embeddings feed a recurrent cell; recent hidden
// states are re-weighted by spatiotemporal flashback; the prediction head
// combines the aggregated state, a user embedding and (optionally) the
// smoothed embedding of the query timestamp into a softmax over POIs.
//
// Variant lattice over (use_ste, use_query_time):
//   (true,  true)  full model        ("replay")
//   (false, true)  no smoothed timestamp embeddings ("noste"): no
//                  timestamp table exists; the query enters the head as
//                  its time interval from the current check-in, encoded
//                  with the flashback weighting vocabulary
//                  [dT, hvc(2 pi dT), exp(-alpha dT)]
//   (true,  false) no query time     ("noqt")
//   (false, false) plain flashback   ("flashback")
// plus multi_granularity (hour-in-day + day-in-week tables) and
// fixed_bandwidth (non-learnable sigma).

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "replay/cells.hpp"
#include "replay/data.hpp"
#include "replay/flashback.hpp"
#include "replay/smoothing.hpp"
#include "replay/tensor.hpp"
#include "replay/time_scheme.hpp"

namespace replay {

struct ModelConfig {
    int poi_count = 0;
    int user_count = 0;
    int embed_dim = 10;
    int hidden_dim = 10;
    CellKind cell = CellKind::vanilla;
    TimestampScheme scheme =
        TimestampScheme::make(TimeScale::week, TimeGranularity::hour);
    FlashbackConfig flashback;
    bool use_ste = true;
    bool use_query_time = true;
    std::optional<double> fixed_bandwidth;
    bool multi_granularity = false;
    int bptt_window = 20;

    /// Width of the timestamp embedding fed to the cell input and head.
    int ts_width() const {
        return multi_granularity ? 2 * embed_dim : embed_dim;
    }
    /// Width of the query-time conditioning at the head: the smoothed
    /// embedding under use_ste, otherwise the 3 interval features.
    int query_width() const { return use_ste ? ts_width() : 3; }
    int input_dim() const {
        return embed_dim + (use_ste ? ts_width() : 0);
    }
    int head_dim() const {
        return hidden_dim + embed_dim + (use_query_time ? query_width() : 0);
    }
    /// Canonical variant name for reports.
    std::string variant_name() const;

    void validate() const;
};

struct PredictionScores {
    std::vector<double> logits;
    std::vector<double> probabilities;  // softmax of logits, sums to 1
};

/// The future instant a prediction is requested for.
struct QueryTime {
    std::int64_t utc_seconds = 0;
    CivilTime local;

    static QueryTime of(const Event& e) {
        return {e.utc_seconds, e.local_time()};
    }
    double utc_days() const {
        return static_cast<double>(utc_seconds) / 86400.0;
    }
};

/// Stateful per-user forward context: recurrent state plus the flashback
/// history window.
struct SequenceState {
    HiddenState hidden;
    std::vector<HistoryState> history;  // most recent last, size <= window

    /// Marks all history entries as carried constants (chunk boundary).
    void detach_history() {
        for (HistoryState& s : history) s.step = -1;
    }
};

struct EpochStats {
    double mean_loss = 0.0;    // mean over users of per-user mean step loss
    std::size_t steps = 0;     // prediction steps seen
    std::size_t users = 0;     // users trained on
};

class ReplayModel {
public:
    ReplayModel(ModelConfig cfg, ParameterStore& params);

    /// Creates every tensor the configuration needs, each initialized from
    /// a stream derived from (seed, "init.<name>") so that variants share
    /// identical values for the tensors they have in common.
    static void init_params(const ModelConfig& cfg, ParameterStore& params,
                            std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParameterStore& params() { return *params_; }

    /// One teacher-forced step: consumes the current check-in, updates the
    /// state, and scores the next POI for the given query time. Gradient
    /// free; used by evaluation and by callers replaying a context window.
    PredictionScores forward_step(int user, SequenceState& state,
                                  const Event& current,
                                  const QueryTime& query);

    /// Mean-per-user cross-entropy over a corpus:
    ///   L = (1/U) sum_u (1/steps_u) sum_i -log p(truth)
    /// When with_grads is set, accumulates analytic gradients for every
    /// parameter into the store (no optimizer step). Deterministic.
    double corpus_loss(const std::vector<std::vector<Event>>& trajectories,
                       bool with_grads);

    /// One training pass: users shuffled by (seed, "epoch_shuffle", epoch),
    /// each user's windows processed statefully in order with gradients
    /// accumulated across the user's windows, then one Adam step per user.
    EpochStats train_epoch(const std::vector<std::vector<Event>>& trajectories,
                           AdamOptimizer& optimizer, std::uint64_t seed,
                           std::uint64_t epoch_index);

    /// Drops cached smoothing rows; required after any parameter update.
    void invalidate_caches();

    /// Effective sigma per slot; nullopt when the config has no bandwidths.
    std::optional<std::vector<double>> bandwidth_sigmas() const;

private:
    struct StepCache;

    // Smoothed (or raw) timestamp embedding of width ts_width() for the
    // given local time. For multi-granularity this is the concatenation of
    // the hour-in-day and day-in-week smoothings.
    void ts_embedding(const CivilTime& local, std::vector<double>& out);
    void ts_embedding_backward(const CivilTime& local,
                               std::span<const double> upstream);

    // Forward over one window of steps; fills caches when training.
    // Each step i consumes events[i] and predicts events[i+1].
    double run_window(int user, const std::vector<Event>& events,
                      std::size_t first_step, std::size_t step_count,
                      SequenceState& state, double grad_scale,
                      std::vector<StepCache>* caches);
    void backward_window(int user, std::vector<StepCache>& caches);

    PredictionScores head_forward(int user, std::span<const double> aggregated,
                                  const QueryTime& query,
                                  double current_utc_days,
                                  std::vector<double>* head_input);

    ModelConfig cfg_;
    ParameterStore* params_;

    // Bound tensors (owned by the store).
    ParamTensor* poi_emb_ = nullptr;
    ParamTensor* user_emb_ = nullptr;
    ParamTensor* head_w_ = nullptr;
    ParamTensor* head_b_ = nullptr;
    CellWeights cell_;
    ParamTensor* ts_table_ = nullptr;       // single-granularity table
    ParamTensor* ts_table_day_ = nullptr;   // multi-granularity tables
    ParamTensor* ts_table_dow_ = nullptr;
    BandwidthVector bandwidths_;
    BandwidthVector bandwidths_day_;
    BandwidthVector bandwidths_dow_;
    TimestampScheme day_scheme_;  // 24 slots
    TimestampScheme dow_scheme_;  // 7 slots, period 7
    std::unique_ptr<SmoothingCache> smooth_;
    std::unique_ptr<SmoothingCache> smooth_day_;
    std::unique_ptr<SmoothingCache> smooth_dow_;
};

}  // namespace replay
