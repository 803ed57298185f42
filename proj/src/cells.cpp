#include "replay/cells.hpp"

#include <cmath>

#include "replay/errors.hpp"
#include "replay/matrix.hpp"
#include "replay/smoothing.hpp"  // sigmoid

namespace replay {

std::string to_string(CellKind k) {
    switch (k) {
        case CellKind::vanilla: return "vanilla";
        case CellKind::lstm: return "lstm";
        case CellKind::gru: return "gru";
    }
    return "?";
}

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "vanilla" || s == "rnn") return CellKind::vanilla;
    if (s == "lstm") return CellKind::lstm;
    if (s == "gru") return CellKind::gru;
    throw ConfigError("model.cell must be one of vanilla, lstm, gru; got \"" +
                      s + "\"");
}

int gate_multiplier(CellKind kind) {
    switch (kind) {
        case CellKind::vanilla: return 1;
        case CellKind::lstm: return 4;
        case CellKind::gru: return 3;
    }
    return 1;
}

void validate_cell_weights(CellKind kind, const CellWeights& w,
                           std::size_t input_dim, std::size_t hidden_dim) {
    const std::size_t rows =
        static_cast<std::size_t>(gate_multiplier(kind)) * hidden_dim;
    auto check = [&](const ParamTensor* t, std::size_t r, std::size_t c,
                     const char* what) {
        if (!t || t->rows() != r || t->cols() != c) {
            throw ConfigError(std::string("cell weight ") + what +
                              " has wrong shape, expected " +
                              std::to_string(r) + "x" + std::to_string(c));
        }
    };
    check(w.w_x, rows, input_dim, "w_x");
    check(w.w_h, rows, hidden_dim, "w_h");
    if (!w.b || w.b->size() != rows) {
        throw ConfigError("cell bias has wrong length, expected " +
                          std::to_string(rows));
    }
}

namespace {

// pre = w_x x + w_h h_prev + b over all gate rows.
std::vector<double> full_preactivation(const CellWeights& w,
                                       std::span<const double> x,
                                       std::span<const double> h_prev) {
    std::vector<double> pre(w.b->value);
    gemv_acc(w.w_x->value, w.w_x->rows(), w.w_x->cols(), x, pre);
    gemv_acc(w.w_h->value, w.w_h->rows(), w.w_h->cols(), h_prev, pre);
    return pre;
}

}  // namespace

HiddenState cell_forward(CellKind kind, const CellWeights& w,
                         std::span<const double> x, const HiddenState& prev,
                         CellCache* cache) {
    const std::size_t H = w.w_h->cols();
    HiddenState out;
    out.h.assign(H, 0.0);

    switch (kind) {
        case CellKind::vanilla: {
            std::vector<double> pre = full_preactivation(w, x, prev.h);
            for (std::size_t i = 0; i < H; ++i) out.h[i] = std::tanh(pre[i]);
            break;
        }
        case CellKind::lstm: {
            std::vector<double> pre = full_preactivation(w, x, prev.h);
            out.c.assign(H, 0.0);
            std::vector<double> gates(4 * H);
            for (std::size_t i = 0; i < H; ++i) {
                const double gi = sigmoid(pre[i]);
                const double gf = sigmoid(pre[H + i]);
                const double gg = std::tanh(pre[2 * H + i]);
                const double go = sigmoid(pre[3 * H + i]);
                gates[i] = gi;
                gates[H + i] = gf;
                gates[2 * H + i] = gg;
                gates[3 * H + i] = go;
                out.c[i] = gf * prev.c[i] + gi * gg;
                out.h[i] = go * std::tanh(out.c[i]);
            }
            if (cache) cache->gates = std::move(gates);
            break;
        }
        case CellKind::gru: {
            // z and r see h_prev directly; the candidate sees r * h_prev.
            std::vector<double> px(3 * H, 0.0);
            gemv_acc(w.w_x->value, 3 * H, w.w_x->cols(), x, px);
            std::vector<double> ph(2 * H, 0.0);
            gemv_acc(std::span<const double>(w.w_h->value)
                         .subspan(0, 2 * H * H),
                     2 * H, H, prev.h, ph);
            std::vector<double> gates(4 * H);
            double* z = gates.data();
            double* r = gates.data() + H;
            double* hcand = gates.data() + 2 * H;
            double* rh = gates.data() + 3 * H;
            for (std::size_t i = 0; i < H; ++i) {
                z[i] = sigmoid(px[i] + ph[i] + w.b->value[i]);
                r[i] = sigmoid(px[H + i] + ph[H + i] + w.b->value[H + i]);
                rh[i] = r[i] * prev.h[i];
            }
            std::vector<double> ac(H, 0.0);
            gemv_acc(std::span<const double>(w.w_h->value)
                         .subspan(2 * H * H, H * H),
                     H, H, std::span<const double>(rh, H), ac);
            for (std::size_t i = 0; i < H; ++i) {
                hcand[i] =
                    std::tanh(px[2 * H + i] + ac[i] + w.b->value[2 * H + i]);
                out.h[i] = (1.0 - z[i]) * prev.h[i] + z[i] * hcand[i];
            }
            if (cache) cache->gates = std::move(gates);
            break;
        }
    }

    if (cache) {
        cache->x.assign(x.begin(), x.end());
        cache->h_prev = prev.h;
        cache->c_prev = prev.c;
        cache->h = out.h;
        cache->c = out.c;
    }
    return out;
}

void cell_backward(CellKind kind, const CellWeights& w, const CellCache& cache,
                   std::span<const double> dh_total,
                   std::span<const double> dc_total, std::span<double> dx_out,
                   std::span<double> dh_prev_out,
                   std::span<double> dc_prev_out) {
    const std::size_t H = w.w_h->cols();
    const std::size_t D = w.w_x->cols();
    std::fill(dx_out.begin(), dx_out.end(), 0.0);
    std::fill(dh_prev_out.begin(), dh_prev_out.end(), 0.0);

    switch (kind) {
        case CellKind::vanilla: {
            std::vector<double> da(H);
            for (std::size_t i = 0; i < H; ++i) {
                da[i] = dh_total[i] * (1.0 - cache.h[i] * cache.h[i]);
            }
            outer_acc(w.w_x->grad, da, cache.x);
            outer_acc(w.w_h->grad, da, cache.h_prev);
            for (std::size_t i = 0; i < H; ++i) w.b->grad[i] += da[i];
            gemv_transpose_acc(w.w_x->value, H, D, da, dx_out);
            gemv_transpose_acc(w.w_h->value, H, H, da, dh_prev_out);
            break;
        }
        case CellKind::lstm: {
            std::fill(dc_prev_out.begin(), dc_prev_out.end(), 0.0);
            const double* gi = cache.gates.data();
            const double* gf = cache.gates.data() + H;
            const double* gg = cache.gates.data() + 2 * H;
            const double* go = cache.gates.data() + 3 * H;
            std::vector<double> dpre(4 * H);
            for (std::size_t i = 0; i < H; ++i) {
                const double tc = std::tanh(cache.c[i]);
                const double dgo = dh_total[i] * tc;
                double dc = dh_total[i] * go[i] * (1.0 - tc * tc);
                if (!dc_total.empty()) dc += dc_total[i];
                const double dgi = dc * gg[i];
                const double dgf = dc * cache.c_prev[i];
                const double dgg = dc * gi[i];
                dc_prev_out[i] = dc * gf[i];
                dpre[i] = dgi * gi[i] * (1.0 - gi[i]);
                dpre[H + i] = dgf * gf[i] * (1.0 - gf[i]);
                dpre[2 * H + i] = dgg * (1.0 - gg[i] * gg[i]);
                dpre[3 * H + i] = dgo * go[i] * (1.0 - go[i]);
            }
            outer_acc(w.w_x->grad, dpre, cache.x);
            outer_acc(w.w_h->grad, dpre, cache.h_prev);
            for (std::size_t i = 0; i < 4 * H; ++i) w.b->grad[i] += dpre[i];
            gemv_transpose_acc(w.w_x->value, 4 * H, D, dpre, dx_out);
            gemv_transpose_acc(w.w_h->value, 4 * H, H, dpre, dh_prev_out);
            break;
        }
        case CellKind::gru: {
            const double* z = cache.gates.data();
            const double* r = cache.gates.data() + H;
            const double* hcand = cache.gates.data() + 2 * H;
            const double* rh = cache.gates.data() + 3 * H;

            std::vector<double> dac(H);
            for (std::size_t i = 0; i < H; ++i) {
                const double dhc = dh_total[i] * z[i];
                dac[i] = dhc * (1.0 - hcand[i] * hcand[i]);
                dh_prev_out[i] += dh_total[i] * (1.0 - z[i]);
            }
            // Candidate block: rows [2H, 3H) of w_x/b, block 2 of w_h.
            auto wx = std::span<const double>(w.w_x->value);
            auto wh = std::span<const double>(w.w_h->value);
            auto gwx = std::span<double>(w.w_x->grad);
            auto gwh = std::span<double>(w.w_h->grad);
            outer_acc(gwx.subspan(2 * H * D, H * D), dac, cache.x);
            outer_acc(gwh.subspan(2 * H * H, H * H), dac,
                      std::span<const double>(rh, H));
            for (std::size_t i = 0; i < H; ++i) {
                w.b->grad[2 * H + i] += dac[i];
            }
            gemv_transpose_acc(wx.subspan(2 * H * D, H * D), H, D, dac, dx_out);
            std::vector<double> drh(H, 0.0);
            gemv_transpose_acc(wh.subspan(2 * H * H, H * H), H, H, dac, drh);

            std::vector<double> dzr(2 * H);
            for (std::size_t i = 0; i < H; ++i) {
                const double dz = dh_total[i] * (hcand[i] - cache.h_prev[i]);
                const double dr = drh[i] * cache.h_prev[i];
                dh_prev_out[i] += drh[i] * r[i];
                dzr[i] = dz * z[i] * (1.0 - z[i]);
                dzr[H + i] = dr * r[i] * (1.0 - r[i]);
            }
            outer_acc(gwx.subspan(0, 2 * H * D), dzr, cache.x);
            outer_acc(gwh.subspan(0, 2 * H * H), dzr, cache.h_prev);
            for (std::size_t i = 0; i < 2 * H; ++i) w.b->grad[i] += dzr[i];
            gemv_transpose_acc(wx.subspan(0, 2 * H * D), 2 * H, D, dzr, dx_out);
            gemv_transpose_acc(wh.subspan(0, 2 * H * H), 2 * H, H, dzr,
                               dh_prev_out);
            break;
        }
    }
}

void bptt_backward(CellKind kind, const CellWeights& w,
                   std::span<const CellCache> caches,
                   std::span<const std::vector<double>> upstream_dh,
                   std::vector<std::vector<double>>& dx_out) {
    if (caches.size() != upstream_dh.size()) {
        throw Error("bptt_backward: cache/upstream step count mismatch");
    }
    const std::size_t H = w.w_h->cols();
    const std::size_t D = w.w_x->cols();
    const std::size_t T = caches.size();
    dx_out.assign(T, std::vector<double>(D, 0.0));

    std::vector<double> carry_dh(H, 0.0);
    std::vector<double> carry_dc;
    if (kind == CellKind::lstm) carry_dc.assign(H, 0.0);
    std::vector<double> dh_total(H), dh_prev(H), dc_prev(H);

    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t i = 0; i < H; ++i) {
            dh_total[i] = carry_dh[i] + upstream_dh[t][i];
        }
        cell_backward(kind, w, caches[t], dh_total, carry_dc, dx_out[t],
                      dh_prev, dc_prev);
        carry_dh = dh_prev;
        if (kind == CellKind::lstm) carry_dc = dc_prev;
    }
}

}  // namespace replay
