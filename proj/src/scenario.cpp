#include "iwfsim/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "iwfsim/rng.hpp"

namespace iwfsim {

namespace {

constexpr double kMinDistance = 0.1;

void validate(const ScenarioSpec& spec) {
    if (spec.n_users == 0 || spec.n_channels == 0)
        throw std::invalid_argument("ScenarioSpec: dimensions must be positive");
    if (!(spec.area_side > 0.0)) throw std::invalid_argument("ScenarioSpec: area_side > 0");
    if (!(spec.noise_value > 0.0)) throw std::invalid_argument("ScenarioSpec: noise > 0");
    if (!(spec.coherence_bandwidth > 0.0) || spec.coherence_bandwidth > 1.0)
        throw std::invalid_argument("ScenarioSpec: coherence bandwidth must be in (0, 1]");
    if (!spec.per_user_budget.empty() && spec.per_user_budget.size() != spec.n_users)
        throw std::invalid_argument("ScenarioSpec: per_user_budget size mismatch");
    for (double b : spec.per_user_budget)
        if (!(b > 0.0)) throw std::invalid_argument("ScenarioSpec: budgets must be positive");
    if (spec.per_user_budget.empty() && !(spec.budget_value > 0.0))
        throw std::invalid_argument("ScenarioSpec: budget must be positive");
}

std::vector<double> budgets(const ScenarioSpec& spec) {
    if (!spec.per_user_budget.empty()) return spec.per_user_budget;
    return std::vector<double>(spec.n_users, spec.budget_value);
}

// Draw order (pinned): AP position, then per user a position resampled until
// it clears the minimum distance. Returns squared distances to the AP.
std::vector<double> draw_geometry(const ScenarioSpec& spec, SplitMix64& rng) {
    const double ax = rng.uniform(0.0, spec.area_side);
    const double ay = rng.uniform(0.0, spec.area_side);
    std::vector<double> d2(spec.n_users);
    for (std::size_t i = 0; i < spec.n_users; ++i) {
        double dx = 0.0, dy = 0.0;
        do {
            dx = rng.uniform(0.0, spec.area_side) - ax;
            dy = rng.uniform(0.0, spec.area_side) - ay;
        } while (dx * dx + dy * dy < kMinDistance * kMinDistance);
        d2[i] = dx * dx + dy * dy;
    }
    return d2;
}

NetworkInstance generate_with_window(const ScenarioSpec& spec, std::size_t window) {
    SplitMix64 rng(spec.seed);
    const std::vector<double> d2 = draw_geometry(spec, rng);
    const std::size_t kk = spec.n_channels;
    Mat gain(spec.n_users, kk);

    if (window <= 1) {
        for (std::size_t i = 0; i < spec.n_users; ++i)
            for (std::size_t k = 0; k < kk; ++k) gain(i, k) = rng.exponential(1.0 / d2[i]);
    } else {
        // Sliding window over K + L - 1 taps: channel k averages taps
        // [k, k+L), so adjacent channels share L-1 taps (lag-m correlation
        // (L-m)/L) while even a full-band window keeps per-channel variation.
        const double tap_scale = 1.0 / std::sqrt(2.0);
        const std::size_t n_taps = kk + window - 1;
        std::vector<double> re(n_taps), im(n_taps);
        for (std::size_t i = 0; i < spec.n_users; ++i) {
            for (std::size_t m = 0; m < n_taps; ++m) {
                const auto [z0, z1] = rng.normal_pair();
                re[m] = z0 * tap_scale;
                im[m] = z1 * tap_scale;
            }
            const double norm = 1.0 / std::sqrt(static_cast<double>(window));
            for (std::size_t k = 0; k < kk; ++k) {
                double hr = 0.0, hi = 0.0;
                for (std::size_t m = 0; m < window; ++m) {
                    hr += re[k + m];
                    hi += im[k + m];
                }
                hr *= norm;
                hi *= norm;
                gain(i, k) = (hr * hr + hi * hi) / d2[i];
            }
        }
    }
    return NetworkInstance(std::move(gain), std::vector<double>(kk, spec.noise_value),
                           budgets(spec));
}

}  // namespace

NetworkInstance make_example1() {
    Mat gain(2, 2, {1.0, 2.0, 1.0, 2.0});
    return NetworkInstance(std::move(gain), {1.0, 1.0}, {1.0, 1.0});
}

PowerProfile example1_ne_tilde() { return {Mat(2, 2, {0.75, 0.25, 0.0, 1.0})}; }

PowerProfile example1_ne_hat() { return {Mat(2, 2, {0.0, 1.0, 0.75, 0.25})}; }

NetworkInstance make_symmetric(std::size_t n_users, std::size_t n_channels, double noise,
                               double budget, std::uint64_t seed) {
    if (n_users == 0 || n_channels == 0)
        throw std::invalid_argument("make_symmetric: dimensions must be positive");
    if (!(noise > 0.0) || !(budget > 0.0))
        throw std::invalid_argument("make_symmetric: noise and budget must be positive");
    SplitMix64 rng(seed);
    Mat gain(n_users, n_channels);
    for (std::size_t k = 0; k < n_channels; ++k) {
        const double g = rng.exponential(1.0);
        for (std::size_t i = 0; i < n_users; ++i) gain(i, k) = g;
    }
    return NetworkInstance(std::move(gain), std::vector<double>(n_channels, noise),
                           std::vector<double>(n_users, budget));
}

NetworkInstance generate(const ScenarioSpec& spec) {
    validate(spec);
    return generate_with_window(spec, 1);
}

NetworkInstance generate_correlated(const ScenarioSpec& spec) {
    validate(spec);
    const double raw = spec.coherence_bandwidth * static_cast<double>(spec.n_channels);
    const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(raw)));
    return generate_with_window(spec, std::min(window, spec.n_channels));
}

}  // namespace iwfsim
