#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwfsim/model.hpp"
#include "iwfsim/waterfill.hpp"

namespace iwfsim {

/// Diminishing step sequence alpha_t = a / (b + t), t >= 1. Restricting to
/// this family guarantees alpha_t in (0,1), a divergent sum and a summable
/// square sum, which is what every convergence argument below needs.
struct StepSchedule {
    enum class Kind { harmonic, custom };
    Kind kind = Kind::harmonic;
    double a = 1.0;
    double b = 2.0;

    static StepSchedule harmonic();  // 1 / (t + 2), the default
    static StepSchedule custom(double a, double b);

    double alpha(long t) const { return a / (b + static_cast<double>(t)); }
};

/// Composable stopping conditions; the first one satisfied wins. max_iters
/// always applies.
struct StoppingRule {
    std::optional<double> residual_tol;        // on ||Phi(p) - p||_inf
    std::optional<double> potential_gap_tol;   // on p_star_value - potential(p)
    std::optional<double> p_star_value;        // required by potential_gap_tol
    long max_iters = 10000;
};

enum class TerminationReason { converged, max_iters, diverged_guard };

std::string to_string(TerminationReason r);

struct TraceRecord {
    long t = 0;
    double potential = 0.0;
    double sum_rate = 0.0;
    double residual_inf = 0.0;
    // Step size for the step t -> t+1 (the schedule value; on the final
    // record no step was taken but the value is still the schedule's).
    double alpha = 0.0;
    // PGD error term for the step t -> t+1; see run_pgd.
    std::optional<double> epsilon;
    // ||p^t - p^{t-1}||_2; zero on the initial record.
    double step_norm = 0.0;
    // ||p^t - reference||_2^2 when TraceOptions::reference is set.
    std::optional<double> dist2_ref;
};

struct TraceOptions {
    long record_every = 1;    // intermediate states kept when t % record_every == 0
    long snapshot_every = 0;  // 0 = keep no iterate snapshots
    std::optional<PowerProfile> reference;
};

struct RunTrace {
    std::string algorithm;
    std::vector<TraceRecord> records;
    std::vector<std::pair<long, PowerProfile>> snapshots;
    TerminationReason reason = TerminationReason::max_iters;
    long final_t = 0;
    PowerProfile final_profile;
};

// CSV with header t,potential,sum_rate,residual_inf,alpha[,epsilon_t];
// the epsilon column appears only when the trace carries epsilon values.
std::string trace_to_csv(const RunTrace& trace);

// JSON document with one array per column plus algorithm / reason / final_t;
// the structured form the experiments layer consumes.
std::string trace_to_json(const RunTrace& trace);

/// Averaged iterative water-filling: all users simultaneously move a fraction
/// alpha_t from their current row toward their exact best response, computed
/// from the same broadcast snapshot. Requires a budget-tight start; a slack
/// row of p0 is tightened by replacing it with its water-filling response.
RunTrace run_aiwf(const NetworkInstance& inst, const PowerProfile& p0,
                  const StepSchedule& schedule, const StoppingRule& stop,
                  const TraceOptions& opts = {},
                  const std::optional<std::vector<StepSchedule>>& per_user_schedules = std::nullopt);

/// Sequential iterative water-filling: one user per step replaces its row by
/// its exact best response, round-robin 1..N (or a seeded per-sweep shuffle).
/// The potential is non-decreasing at every step.
RunTrace run_siwf(const NetworkInstance& inst, const PowerProfile& p0, const StoppingRule& stop,
                  const TraceOptions& opts = {},
                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Projected gradient ascent on the potential with diminishing steps, all
/// users updating from the same snapshot. Each record's epsilon is the
/// quasi-Fejer error term 2 alpha_t (Psi(p^t)-p^t)' grad P(p^t) of the step
/// taken from that record's state.
RunTrace run_pgd(const NetworkInstance& inst, const PowerProfile& p0,
                 const StepSchedule& schedule, const StoppingRule& stop,
                 const TraceOptions& opts = {});

/// Classical simultaneous IWF (everyone jumps to its exact best response at
/// once). In this network it generally oscillates; the run is returned either
/// way, with reason diverged_guard when the residual never met the rule
/// within `divergence_guard` iterations.
RunTrace run_simultaneous_iwf(const NetworkInstance& inst, const PowerProfile& p0,
                              const StoppingRule& stop, long divergence_guard = 10000,
                              const TraceOptions& opts = {});

/// Euclidean projection of v onto {x >= 0, sum x <= budget}. If clipping at
/// zero already fits the budget that clip is the projection; otherwise the
/// point is projected onto the face sum x = budget by sort-and-threshold.
std::vector<double> project_simplex(std::span<const double> v, double budget);

// Masked variant used by PGD on instances with per-channel caps:
// projection onto {0 <= x <= mask, sum x <= budget}.
std::vector<double> project_box_simplex(std::span<const double> v, double budget,
                                        std::span<const double> mask);

// Single steps on a frozen snapshot, exposed so the simultaneity contract is
// directly testable: each output row depends only on (snapshot, own data).
PowerProfile aiwf_step(const NetworkInstance& inst, const PowerProfile& p, double alpha);
PowerProfile siwf_step(const NetworkInstance& inst, const PowerProfile& p, std::size_t user);
PowerProfile pgd_step(const NetworkInstance& inst, const PowerProfile& p, double alpha);
PowerProfile simultaneous_iwf_step(const NetworkInstance& inst, const PowerProfile& p);

}  // namespace iwfsim
