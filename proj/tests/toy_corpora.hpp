// Small deterministic corpora shared by the model tests and the
// acceptance suite.

#pragma once

#include <cstdint>
#include <vector>

#include "replay/chrono.hpp"
#include "replay/data.hpp"
#include "replay/rng.hpp"

namespace replay::testing {

/// Random toy trajectories for gradient checking: every user sequence
/// fits inside one backprop window, hours cycle so that every hour-of-day
/// slot is visited, and coordinates vary on a km scale.
inline std::vector<std::vector<Event>> gradcheck_corpus(int users, int pois,
                                                        int events_per_user,
                                                        std::uint64_t seed) {
    const std::int64_t start = days_from_civil(2024, 1, 1) * 86400;
    std::vector<std::vector<Event>> out(static_cast<std::size_t>(users));
    int counter = 0;
    for (int u = 0; u < users; ++u) {
        Rng rng(derive_seed(seed, "gradcheck.user",
                            static_cast<std::uint64_t>(u)));
        std::int64_t day = u % 3;
        for (int i = 0; i < events_per_user; ++i) {
            Event e;
            e.user = u;
            e.poi = static_cast<int>(rng.uniform_int(
                static_cast<std::uint64_t>(pois)));
            const int hour = (5 * counter++ + 3 * u) % 24;
            const int minute = static_cast<int>(rng.uniform_int(60));
            e.utc_seconds = start + day * 86400 + hour * 3600 + minute * 60;
            e.lat = rng.uniform(-0.02, 0.02);
            e.lon = rng.uniform(-0.02, 0.02);
            e.offset_minutes = 0;
            out[static_cast<std::size_t>(u)].push_back(e);
            day += 1 + static_cast<std::int64_t>(rng.uniform_int(2));
        }
        // Strictly increasing within the user by construction of day; sort
        // anyway in case hours wrapped backwards on the same day.
        std::sort(out[static_cast<std::size_t>(u)].begin(),
                  out[static_cast<std::size_t>(u)].end(),
                  [](const Event& a, const Event& b) {
                      return a.utc_seconds < b.utc_seconds;
                  });
    }
    return out;
}

/// Deterministic alternating trace: user u bounces between POIs 2u and
/// 2u+1 every 12 hours, so the next POI is always determined by the
/// current one (and by the query hour).
inline std::vector<std::vector<Event>> alternating_corpus(int users,
                                                          int events_per_user) {
    const std::int64_t start = days_from_civil(2024, 1, 1) * 86400;
    std::vector<std::vector<Event>> out(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
        for (int i = 0; i < events_per_user; ++i) {
            Event e;
            e.user = u;
            e.poi = 2 * u + (i % 2);
            e.utc_seconds = start + static_cast<std::int64_t>(i) * 43200;
            e.lat = 0.001 * e.poi;
            e.lon = 0.0;
            e.offset_minutes = 0;
            out[static_cast<std::size_t>(u)].push_back(e);
        }
    }
    return out;
}

}  // namespace replay::testing
