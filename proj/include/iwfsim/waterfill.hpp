#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "iwfsim/model.hpp"

namespace iwfsim {

/// Result of a single-user water-filling solve. The allocation always spends
/// the full budget (the rate is strictly increasing in own power), and obeys
/// complementary slackness against the returned level: a channel is funded
/// exactly when its effective noise sits below the water level.
struct WaterfillResult {
    std::vector<double> allocation;
    double water_level = 0.0;
    std::vector<std::size_t> active_set;  // indices with allocation > 0
};

/// Exact single-user water-filling: allocation(k) = clamp(level - en(k), 0, mask(k))
/// with the unique level making the allocations sum to `budget`. The level is
/// found by bisection, which handles the masked variant with the same code.
///
/// Throws std::invalid_argument on non-finite/non-positive inputs or an
/// infeasible mask (sum mask < budget).
WaterfillResult water_fill(std::span<const double> effective_noise, double budget,
                           std::optional<std::span<const double>> mask = std::nullopt);

/// Best response of user i to everyone else's powers: water-filling over
/// ipn_i / gain_i with the user's budget and mask row.
WaterfillResult best_response(const NetworkInstance& inst, const PowerProfile& p, std::size_t i);

/// Residual map s(p) = Phi(p) - p, row i = best_response(i).allocation - p_i.
/// Requires every row of p to spend its budget exactly (within 1e-9); each
/// residual row then sums to zero. The dynamics operate on budget-tight
/// profiles only, so a slack row signals a caller bug and throws.
Mat br_residual(const NetworkInstance& inst, const PowerProfile& p);

}  // namespace iwfsim
