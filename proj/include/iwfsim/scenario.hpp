#pragma once

#include <cstdint>
#include <vector>

#include "iwfsim/model.hpp"

namespace iwfsim {

/// Seeded random network generator: users and the access point are placed
/// uniformly in a square area, and power gains are drawn with mean 1/d^2
/// (Rayleigh amplitude fading, so the power gain is exponential). Generation
/// is a pure function of the spec, bit-reproducible for a fixed seed; the
/// exact draw order and PRNG are pinned in docs/file-formats.md.
struct ScenarioSpec {
    std::size_t n_users = 10;
    std::size_t n_channels = 32;
    double area_side = 10.0;           // meters
    double budget_value = 1.0;         // uniform budget unless per_user_budget set
    std::vector<double> per_user_budget;
    double noise_value = 0.01;         // uniform per channel
    double coherence_bandwidth = 1.0;  // B_c in (0, 1], correlated generator only
    std::uint64_t seed = 0;
};

// Two-user, two-channel fixture with gains [[1,2],[1,2]], unit noise and unit
// budgets; its equilibrium set is the segment between the two profiles below.
NetworkInstance make_example1();
PowerProfile example1_ne_tilde();  // user 1: [3/4, 1/4], user 2: [0, 1]
PowerProfile example1_ne_hat();    // the swap of the above

/// Equal-gain stress network: one seeded fading draw shared by every user,
/// the N-user generalization of the two-user fixture. Its equilibrium set is
/// a large continuum and simultaneous best responses overshoot in lockstep,
/// which makes it the canonical demonstrator for why plain simultaneous IWF
/// fails here.
NetworkInstance make_symmetric(std::size_t n_users, std::size_t n_channels, double noise,
                               double budget, std::uint64_t seed);

/// Independent fading: each gain ~ Exponential(mean 1/d_i^2), i.i.d. across
/// channels. Positions closer than 0.1 m to the AP are resampled.
NetworkInstance generate(const ScenarioSpec& spec);

/// Correlated fading: per user, complex Gaussian taps smoothed by a circular
/// moving average over L = max(1, round(B_c * K)) adjacent taps, scaled so
/// E|h|^2 = 1/d^2. With L = 1 this takes exactly the independent generator's
/// path, so B_c <= 1/K reproduces generate() bit-for-bit.
NetworkInstance generate_correlated(const ScenarioSpec& spec);

}  // namespace iwfsim
