#pragma once

#include <cstddef>
#include <vector>

#include "iwfsim/model.hpp"

namespace iwfsim {

/// Channel-sharing statistics. A channel is collided when two or more users
/// are active on it; n users on one channel count as n(n-1)/2 collisions.
struct CollisionStats {
    long collided_channels = 0;
    long total_collisions = 0;
    double activity_scale = 0.0;
};

/// User i counts as active on channel k when p_i(k) > activity_scale *
/// budget_i / K. The threshold is relative so rescaling power units leaves
/// the counts unchanged.
CollisionStats count_collisions(const NetworkInstance& inst, const PowerProfile& p,
                                double activity_scale = 1e-6);

// Active users per channel under the same threshold rule.
std::vector<std::vector<std::size_t>> support_sets(const NetworkInstance& inst,
                                                   const PowerProfile& p,
                                                   double activity_scale = 1e-6);

}  // namespace iwfsim
