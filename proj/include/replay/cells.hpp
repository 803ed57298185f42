// Recurrent cells (vanilla, LSTM, GRU) with exact analytic backward
// passes over cached activations. Weights are stacked per gate:
//   vanilla: w_x (H x D),  w_h (H x H),  b (H)
//   lstm:    w_x (4H x D), w_h (4H x H), b (4H), gate rows [i, f, g, o]
//   gru:     w_x (3H x D), w_h (3H x H), b (3H), gate rows [z, r, c]
// GRU follows the original formulation with the reset gate applied to the
// previous hidden state before the candidate projection.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "replay/tensor.hpp"

namespace replay {

enum class CellKind { vanilla, lstm, gru };

std::string to_string(CellKind k);
CellKind cell_kind_from_string(const std::string& s);

/// Rows of w_x/w_h/b per hidden unit for a cell kind (1, 4 or 3).
int gate_multiplier(CellKind kind);

struct HiddenState {
    std::vector<double> h;
    std::vector<double> c;  // present only for lstm

    static HiddenState zeros(CellKind kind, std::size_t hidden_dim) {
        HiddenState s;
        s.h.assign(hidden_dim, 0.0);
        if (kind == CellKind::lstm) s.c.assign(hidden_dim, 0.0);
        return s;
    }
};

struct CellWeights {
    ParamTensor* w_x = nullptr;
    ParamTensor* w_h = nullptr;
    ParamTensor* b = nullptr;
};

/// Throws ConfigError unless shapes match (kind, input_dim, hidden_dim).
void validate_cell_weights(CellKind kind, const CellWeights& w,
                           std::size_t input_dim, std::size_t hidden_dim);

/// Forward activations cached for the backward pass.
struct CellCache {
    std::vector<double> x;
    std::vector<double> h_prev;
    std::vector<double> c_prev;  // lstm
    std::vector<double> h;
    std::vector<double> c;      // lstm
    std::vector<double> gates;  // lstm: [i f g o]; gru: [z r hcand r*h_prev]
};

/// One step forward. cache may be null during gradient-free evaluation.
HiddenState cell_forward(CellKind kind, const CellWeights& w,
                         std::span<const double> x, const HiddenState& prev,
                         CellCache* cache);

/// One step backward. Accumulates weight gradients into w's tensors and
/// writes input/previous-state gradients. dc_total may be empty for
/// non-lstm kinds.
void cell_backward(CellKind kind, const CellWeights& w, const CellCache& cache,
                   std::span<const double> dh_total,
                   std::span<const double> dc_total, std::span<double> dx_out,
                   std::span<double> dh_prev_out,
                   std::span<double> dc_prev_out);

/// Reverse-time pass over a window of cached steps. upstream_dh[t] is the
/// gradient arriving at h_t from outside the recurrence (prediction heads
/// and flashback taps). Returns per-step input gradients in dx_out and
/// accumulates weight gradients. Gradients flowing into the state carried
/// from before the window are dropped (truncation boundary).
void bptt_backward(CellKind kind, const CellWeights& w,
                   std::span<const CellCache> caches,
                   std::span<const std::vector<double>> upstream_dh,
                   std::vector<std::vector<double>>& dx_out);

}  // namespace replay
