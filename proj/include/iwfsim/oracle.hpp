#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "iwfsim/metrics.hpp"
#include "iwfsim/model.hpp"

namespace iwfsim {

/// Certified (near-)maximizer of the potential. `value` is the potential at
/// p_star; the true maximum lies in [value, value + gap_bound]. The bound is
/// the Frank-Wolfe duality gap, so the certificate is valid no matter how the
/// point was produced, and the solver shares no code with the water-filling
/// dynamics it is used to judge.
struct OptimumCertificate {
    PowerProfile p_star;
    double value = 0.0;
    double gap_bound = 0.0;
    long iterations = 0;
};

struct FwOptions {
    long max_iters = 500000;
    // Mix in per-user pairwise (away-style) mass transfers. Plain FW stalls at
    // O(1/t) once the optimum sits inside a face, which is the common case
    // here, so tight certificates need this on.
    bool away_steps = true;
    int line_search_iters = 60;
};

class FwConvergenceError : public std::runtime_error {
public:
    FwConvergenceError(const std::string& msg, double best_gap, double best_value)
        : std::runtime_error(msg), best_gap(best_gap), best_value(best_value) {}
    double best_gap;
    double best_value;
};

/// Maximize the potential over the joint feasible set by Frank-Wolfe with an
/// exact line search per step. The per-user linear subproblem is solved
/// exactly (all budget on the best-gradient channel; greedy fill under a
/// mask). Terminates when the duality gap drops to `tol`; throws
/// FwConvergenceError with the best gap seen if the iteration cap is hit.
OptimumCertificate solve_max_potential(const NetworkInstance& inst, double tol,
                                       const FwOptions& opts = {});

/// NE verification result. The two tests (best-response fixed point, and
/// potential gap against the certificate) must agree; `tests_disagree` is the
/// diagnostic flag raised when they do not at their paired tolerances.
struct EquilibriumReport {
    double residual_inf = 0.0;
    double potential_gap = 0.0;  // cert.value - potential(p)
    bool is_ne = false;
    bool gap_ok = false;
    bool tests_disagree = false;
    double residual_tol = 0.0;
    double gap_tol = 0.0;
    std::vector<std::vector<std::size_t>> support;  // active users per channel
    CollisionStats collisions;
};

/// Verify p against the certificate. `tol` bounds the best-response residual;
/// the paired potential-gap tolerance is 10*tol (1e-8 residual pairs with
/// 1e-7 gap).
EquilibriumReport verify_ne(const NetworkInstance& inst, const PowerProfile& p,
                            const OptimumCertificate& cert, double tol);

/// Normalized cross-gain matrices of the access-point reduction:
/// [H(k)]_{q,r} = g_r(k) / g_q(k) for r != q, zero diagonal; h_max is the
/// entrywise max over channels. Their spectral radii are what rule out the
/// classical simultaneous IWF contraction argument.
struct InterferenceMatrices {
    std::vector<Mat> per_channel;
    Mat h_max;
};
InterferenceMatrices interference_matrices(const NetworkInstance& inst);

/// Spectral radius of a nonnegative square matrix by power iteration on
/// M + delta*I with Collatz-Wielandt stopping; the shift is removed exactly
/// (rho(M + dI) = rho(M) + d for nonnegative M). `tol` is relative.
double spectral_radius(const Mat& m, double tol = 1e-13, long max_iters = 200000);

/// Brute-force check that diagonal input covariances attain the sum-capacity
/// optimum when channels and noise are diagonal. K must be 2 and N <= 2;
/// covariances are gridded by diagonal entries and a correlation in [-1, 1]
/// with `grid_steps` intervals per axis. Throws std::logic_error if the
/// diagonal-restricted optimum falls more than assert_tol below the full
/// grid optimum.
struct DiagonalCheckReport {
    double full_max = 0.0;
    double diag_max = 0.0;
    long grid_steps = 0;
};
DiagonalCheckReport diagonal_optimality_check(const NetworkInstance& inst, long grid_steps,
                                              double assert_tol = 1e-3);

/// Finite-K check of the FDMA optimality conditions at an (approximate) NE:
/// recovers each user's water level from its active channels and, for every
/// channel used by a single user i, checks sigma_i g_i(k) >= sigma_j g_j(k)
/// - tol for all j. Requires the residual at p to be <= tol (levels are
/// undefined away from an NE).
struct FdmaChannelReport {
    std::size_t channel = 0;
    std::vector<std::size_t> support;
    bool solo_condition_ok = true;  // meaningful when support.size() == 1
};
struct FdmaReport {
    std::vector<FdmaChannelReport> channels;
    std::vector<double> water_level;  // per user
    std::size_t solo_channels = 0;
    std::size_t solo_ok = 0;
    std::size_t shared_channels = 0;
};
FdmaReport fdma_condition_check(const NetworkInstance& inst, const PowerProfile& p, double tol);

// JSON forms used in experiment output documents.
std::string certificate_to_json(const OptimumCertificate& cert);
std::string report_to_json(const EquilibriumReport& rep);

}  // namespace iwfsim
