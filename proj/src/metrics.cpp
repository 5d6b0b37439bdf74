#include "iwfsim/metrics.hpp"

namespace iwfsim {

std::vector<std::vector<std::size_t>> support_sets(const NetworkInstance& inst,
                                                   const PowerProfile& p, double activity_scale) {
    check_feasible(inst, p);
    const double kk = static_cast<double>(inst.n_channels());
    std::vector<std::vector<std::size_t>> sup(inst.n_channels());
    for (std::size_t k = 0; k < inst.n_channels(); ++k)
        for (std::size_t i = 0; i < inst.n_users(); ++i)
            if (p.p(i, k) > activity_scale * inst.budget(i) / kk) sup[k].push_back(i);
    return sup;
}

CollisionStats count_collisions(const NetworkInstance& inst, const PowerProfile& p,
                                double activity_scale) {
    CollisionStats stats;
    stats.activity_scale = activity_scale;
    for (const auto& users : support_sets(inst, p, activity_scale)) {
        const long n = static_cast<long>(users.size());
        if (n >= 2) {
            ++stats.collided_channels;
            stats.total_collisions += n * (n - 1) / 2;
        }
    }
    return stats;
}

}  // namespace iwfsim
