#include "iwfsim/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iwfsim {

namespace {

double clamped_alloc(double level, double en, double cap) {
    return std::min(std::max(level - en, 0.0), cap);
}

double alloc_sum(std::span<const double> en, std::span<const double> cap, double level) {
    double s = 0.0;
    for (std::size_t k = 0; k < en.size(); ++k) s += clamped_alloc(level, en[k], cap[k]);
    return s;
}

}  // namespace

WaterfillResult water_fill(std::span<const double> effective_noise, double budget,
                           std::optional<std::span<const double>> mask) {
    const std::size_t kk = effective_noise.size();
    if (kk == 0) throw std::invalid_argument("water_fill: empty channel set");
    if (!std::isfinite(budget) || budget <= 0.0)
        throw std::invalid_argument("water_fill: budget must be finite and positive");
    for (double en : effective_noise)
        if (!std::isfinite(en) || en <= 0.0)
            throw std::invalid_argument("water_fill: effective noise must be finite and positive");

    std::vector<double> cap(kk, std::numeric_limits<double>::infinity());
    if (mask) {
        if (mask->size() != kk) throw std::invalid_argument("water_fill: mask size mismatch");
        double mask_sum = 0.0;
        for (std::size_t k = 0; k < kk; ++k) {
            if (std::isnan((*mask)[k]) || (*mask)[k] <= 0.0)
                throw std::invalid_argument("water_fill: mask entries must be > 0");
            cap[k] = (*mask)[k];
            mask_sum += (*mask)[k];
        }
        if (mask_sum < budget)
            throw std::invalid_argument("water_fill: mask sum below budget, infeasible");
    }

    double lo = *std::min_element(effective_noise.begin(), effective_noise.end());
    double hi = *std::max_element(effective_noise.begin(), effective_noise.end()) + budget;
    // The allocation sum is continuous and nondecreasing in the level, 0 at lo
    // and >= budget at hi. 200 halvings collapse the bracket to ulp scale long
    // before the cap, so the loop is effectively "until machine precision".
    double level = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        level = 0.5 * (lo + hi);
        const double s = alloc_sum(effective_noise, cap, level);
        if (std::abs(s - budget) <= 1e-13 * budget) break;
        if (s < budget)
            lo = level;
        else
            hi = level;
        if (hi - lo <= std::abs(level) * 4e-16) break;
    }

    WaterfillResult res;
    res.water_level = level;
    res.allocation.resize(kk);
    double total = 0.0;
    double unclamped = 0.0;  // mass on channels strictly inside (0, cap)
    for (std::size_t k = 0; k < kk; ++k) {
        res.allocation[k] = clamped_alloc(level, effective_noise[k], cap[k]);
        total += res.allocation[k];
        if (res.allocation[k] > 0.0 && res.allocation[k] < cap[k]) unclamped += res.allocation[k];
    }

    // Close the residual |total - budget| (ulp scale after bisection) so the
    // budget is spent exactly: scale the interior allocations, which keeps
    // zeros at zero and never moves a mask-clamped channel.
    if (total != budget) {
        if (unclamped > 0.0) {
            const double target = unclamped + (budget - total);
            const double scale = target / unclamped;
            for (std::size_t k = 0; k < kk; ++k)
                if (res.allocation[k] > 0.0 && res.allocation[k] < cap[k])
                    res.allocation[k] = std::min(res.allocation[k] * scale, cap[k]);
        } else {
            // Everything clamped; push the residue onto any channel with headroom.
            double residue = budget - total;
            for (std::size_t k = 0; k < kk && residue > 0.0; ++k) {
                const double room = cap[k] - res.allocation[k];
                const double add = std::min(room, residue);
                res.allocation[k] += add;
                residue -= add;
            }
        }
    }

    for (std::size_t k = 0; k < kk; ++k)
        if (res.allocation[k] > 0.0) res.active_set.push_back(k);
    return res;
}

WaterfillResult best_response(const NetworkInstance& inst, const PowerProfile& p, std::size_t i) {
    if (i >= inst.n_users()) throw std::out_of_range("best_response: user index out of range");
    check_feasible(inst, p);
    std::vector<double> en = ipn(inst, p, i);
    for (std::size_t k = 0; k < inst.n_channels(); ++k) en[k] /= inst.gain(i, k);
    if (inst.has_mask()) {
        return water_fill(en, inst.budget(i), std::span<const double>(inst.mask()->row(i)));
    }
    return water_fill(en, inst.budget(i));
}

Mat br_residual(const NetworkInstance& inst, const PowerProfile& p) {
    check_feasible(inst, p);
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < inst.n_channels(); ++k) row_sum += p.p(i, k);
        if (std::abs(row_sum - inst.budget(i)) > kFeasibilityTol)
            throw std::invalid_argument(
                "br_residual: profile row " + std::to_string(i) +
                " does not spend its budget; the residual map is defined on budget-tight "
                "profiles only");
    }
    Mat s(inst.n_users(), inst.n_channels());
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        const WaterfillResult br = best_response(inst, p, i);
        for (std::size_t k = 0; k < inst.n_channels(); ++k)
            s(i, k) = br.allocation[k] - p.p(i, k);
    }
    return s;
}

}  // namespace iwfsim
