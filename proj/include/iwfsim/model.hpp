#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "iwfsim/mat.hpp"

namespace iwfsim {

// Absolute slack allowed on budget / nonnegativity / mask checks. Iterates
// produced by projection or water-filling are re-clamped to exact feasibility
// after each step, so this only absorbs float round-off.
inline constexpr double kFeasibilityTol = 1e-9;

/// Static problem data for an N-user, K-channel single access point network:
/// squared channel magnitudes, per-channel noise power, per-user sum-power
/// budgets, and optional per-channel power caps.
///
/// All gains must be strictly positive (several structural results, and the
/// water-filling best response itself, divide by them); noise and budgets
/// must be strictly positive. Construction validates and throws
/// std::invalid_argument otherwise.
class NetworkInstance {
public:
    NetworkInstance(Mat gain, std::vector<double> noise, std::vector<double> budget,
                    std::optional<Mat> mask = std::nullopt);

    std::size_t n_users() const { return gain_.rows(); }
    std::size_t n_channels() const { return gain_.cols(); }

    const Mat& gain() const { return gain_; }
    double gain(std::size_t i, std::size_t k) const { return gain_(i, k); }
    const std::vector<double>& noise() const { return noise_; }
    double noise(std::size_t k) const { return noise_[k]; }
    const std::vector<double>& budget() const { return budget_; }
    double budget(std::size_t i) const { return budget_[i]; }

    bool has_mask() const { return mask_.has_value(); }
    const std::optional<Mat>& mask() const { return mask_; }
    // Per-channel cap; +inf when no mask was given.
    double mask_or_inf(std::size_t i, std::size_t k) const;

private:
    Mat gain_;
    std::vector<double> noise_;
    std::vector<double> budget_;
    std::optional<Mat> mask_;
};

/// Joint transmit power allocation, one row per user.
struct PowerProfile {
    Mat p;

    static PowerProfile zeros(const NetworkInstance& inst);
    // budget_i / K on every channel; budget-tight by construction.
    static PowerProfile uniform(const NetworkInstance& inst);

    bool operator==(const PowerProfile&) const = default;
};

// Throws std::invalid_argument if p is not feasible for inst within
// kFeasibilityTol (shape, nonnegativity, budgets, mask).
void check_feasible(const NetworkInstance& inst, const PowerProfile& p);
bool is_feasible(const NetworkInstance& inst, const PowerProfile& p);

// Per-user achievable rate under single-user decoding, nats scaled by 1/K:
// (1/K) sum_k ln(1 + p_i(k) g_i(k) / ipn_i(k)).
double user_rate(const NetworkInstance& inst, const PowerProfile& p, std::size_t i);

double sum_rate(const NetworkInstance& inst, const PowerProfile& p);

// Potential of the allocation game:
// (1/K) sum_k [ln(n(k) + sum_i g_i(k) p_i(k)) - ln n(k)].
// Unilateral rate changes equal potential changes, so equilibria are exactly
// its maximizers.
double potential(const NetworkInstance& inst, const PowerProfile& p);

// Exact gradient of potential(): entry (i,k) = (1/K) g_i(k) / y(k) with
// y = aggregate_broadcast. Strictly positive everywhere.
Mat potential_gradient(const NetworkInstance& inst, const PowerProfile& p);

// Interference plus noise seen by user i: y(k) minus the user's own
// contribution, computed exactly as that subtraction so that
// ipn == aggregate_broadcast - own contribution holds bit-for-bit.
std::vector<double> ipn(const NetworkInstance& inst, const PowerProfile& p, std::size_t i);

// The quantity the access point broadcasts: y(k) = n(k) + sum_i g_i(k) p_i(k).
// This is the only information about other users the distributed dynamics
// consume.
std::vector<double> aggregate_broadcast(const NetworkInstance& inst, const PowerProfile& p);

// JSON (de)serialization; schema documented in docs/file-formats.md.
std::string instance_to_json(const NetworkInstance& inst);
NetworkInstance instance_from_json(const std::string& text);
NetworkInstance load_instance(const std::string& path);
void save_instance(const NetworkInstance& inst, const std::string& path);

namespace detail {

// Hot-path variants that reuse a precomputed broadcast vector y and skip the
// feasibility check; the dynamics keep iterates exactly feasible themselves.
std::vector<double> broadcast_unchecked(const NetworkInstance& inst, const PowerProfile& p);
double potential_given_y(const NetworkInstance& inst, std::span<const double> y);
double user_rate_given_y(const NetworkInstance& inst, const PowerProfile& p, std::size_t i,
                         std::span<const double> y);
double sum_rate_given_y(const NetworkInstance& inst, const PowerProfile& p,
                        std::span<const double> y);

}  // namespace detail

}  // namespace iwfsim
