#include "iwfsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "iwfsim/numeric.hpp"
#include "iwfsim/rng.hpp"
#include "json.hpp"

namespace iwfsim {

namespace {

void validate_schedule(const StepSchedule& s) {
    if (!(s.a > 0.0) || !(s.b >= 0.0) || !(s.a < s.b + 1.0))
        throw std::invalid_argument(
            "StepSchedule: need a > 0, b >= 0 and a < b + 1 so that alpha_t stays in (0,1)");
}

// Best response of one user given only the broadcast y and the user's own
// data. This is the whole information model: nothing about other users' rows
// enters the computation.
WaterfillResult br_from_broadcast(const NetworkInstance& inst, const PowerProfile& p,
                                  std::span<const double> y, std::size_t i) {
    const std::size_t kk = inst.n_channels();
    std::vector<double> en(kk);
    for (std::size_t k = 0; k < kk; ++k)
        en[k] = (y[k] - inst.gain(i, k) * p.p(i, k)) / inst.gain(i, k);
    if (inst.has_mask())
        return water_fill(en, inst.budget(i), std::span<const double>(inst.mask()->row(i)));
    return water_fill(en, inst.budget(i));
}

void fill_best_responses(const NetworkInstance& inst, const PowerProfile& p,
                         std::span<const double> y, Mat& phi) {
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        const WaterfillResult wf = br_from_broadcast(inst, p, y, i);
        std::copy(wf.allocation.begin(), wf.allocation.end(), phi.row(i).begin());
    }
}

double residual_inf_norm(const Mat& phi, const Mat& p) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        m = std::max(m, std::abs(phi.data()[i] - p.data()[i]));
    return m;
}

// Rescale each row onto its budget face and clamp to the mask; undoes the ulp
// drift of convex combinations so iterates remain exactly feasible.
void retighten(const NetworkInstance& inst, Mat& p) {
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        auto row = p.row(i);
        double sum = 0.0;
        for (double v : row) sum += v;
        if (sum > 0.0 && sum != inst.budget(i)) {
            const double scale = inst.budget(i) / sum;
            for (double& v : row) v *= scale;
        }
        if (inst.has_mask())
            for (std::size_t k = 0; k < row.size(); ++k)
                row[k] = std::min(row[k], (*inst.mask())(i, k));
    }
}

double dist2(const Mat& a, const Mat& b) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc.add(d * d);
    }
    return acc.value();
}

struct StepResult {
    std::optional<double> epsilon;
};

// Shared iteration driver. step(t, p, y, phi, next) writes the next profile
// and may report an epsilon; states are indexed t = 0,1,... with the step out
// of state t using the schedule's iteration index t+1. `phi_every` thins the
// best-response/residual evaluation for algorithms whose step does not need
// the full Phi (notably S-IWF, where evaluating it every user-step would
// multiply the cost by N); records and stop checks happen only on evaluated
// states, plus the cap state.
RunTrace run_loop(
    const std::string& name, const NetworkInstance& inst, const PowerProfile& p0,
    const StoppingRule& stop, const TraceOptions& opts, long iter_cap, bool cap_is_guard,
    long phi_every, bool step_needs_phi, const std::function<double(long)>& alpha_of,
    const std::function<StepResult(long, const PowerProfile&, std::span<const double>, const Mat&,
                                   Mat&)>& step) {
    if (stop.potential_gap_tol && !stop.p_star_value)
        throw std::invalid_argument("StoppingRule: potential_gap_tol requires p_star_value");
    if (opts.record_every < 1) throw std::invalid_argument("TraceOptions: record_every >= 1");

    RunTrace trace;
    trace.algorithm = name;
    PowerProfile p = p0;
    Mat phi(inst.n_users(), inst.n_channels());
    Mat next(inst.n_users(), inst.n_channels());
    double step_norm = 0.0;
    const long cap = std::min(iter_cap, stop.max_iters);

    for (long t = 0;; ++t) {
        const std::vector<double> y = detail::broadcast_unchecked(inst, p);
        const bool at_cap = t >= cap;
        const bool evaluate = step_needs_phi || at_cap || t % phi_every == 0 ||
                              t % opts.record_every == 0;
        if (!evaluate) {
            const StepResult sr = step(t, p, y, phi, next);
            (void)sr;
            step_norm = std::sqrt(dist2(next, p.p));
            std::swap(p.p, next);
            continue;
        }
        fill_best_responses(inst, p, y, phi);

        TraceRecord rec;
        rec.t = t;
        rec.potential = detail::potential_given_y(inst, y);
        rec.sum_rate = detail::sum_rate_given_y(inst, p, y);
        rec.residual_inf = residual_inf_norm(phi, p.p);
        rec.alpha = alpha_of(t + 1);
        rec.step_norm = step_norm;
        if (opts.reference) rec.dist2_ref = dist2(p.p, opts.reference->p);

        bool done = false;
        TerminationReason reason = TerminationReason::max_iters;
        if (stop.residual_tol && rec.residual_inf <= *stop.residual_tol) {
            done = true;
            reason = TerminationReason::converged;
        } else if (stop.potential_gap_tol &&
                   *stop.p_star_value - rec.potential <= *stop.potential_gap_tol) {
            done = true;
            reason = TerminationReason::converged;
        } else if (at_cap) {
            done = true;
            reason = cap_is_guard && stop.residual_tol ? TerminationReason::diverged_guard
                                                       : TerminationReason::max_iters;
        }

        if (!done) {
            const StepResult sr = step(t, p, y, phi, next);
            rec.epsilon = sr.epsilon;
        }
        if (done || t % opts.record_every == 0) trace.records.push_back(rec);
        if (opts.snapshot_every > 0 && (t % opts.snapshot_every == 0 || done))
            trace.snapshots.emplace_back(t, p);

        if (done) {
            trace.reason = reason;
            trace.final_t = t;
            trace.final_profile = std::move(p);
            return trace;
        }
        step_norm = std::sqrt(dist2(next, p.p));
        std::swap(p.p, next);
    }
}

}  // namespace

StepSchedule StepSchedule::harmonic() { return StepSchedule{Kind::harmonic, 1.0, 2.0}; }

StepSchedule StepSchedule::custom(double a, double b) {
    StepSchedule s{Kind::custom, a, b};
    validate_schedule(s);
    return s;
}

std::string to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::converged: return "converged";
        case TerminationReason::max_iters: return "max_iters";
        case TerminationReason::diverged_guard: return "diverged-guard";
    }
    return "unknown";
}

std::string trace_to_csv(const RunTrace& trace) {
    const bool has_eps =
        std::any_of(trace.records.begin(), trace.records.end(),
                    [](const TraceRecord& r) { return r.epsilon.has_value(); });
    std::string out = "t,potential,sum_rate,residual_inf,alpha";
    if (has_eps) out += ",epsilon_t";
    out += "\n";
    char buf[512];
    for (const TraceRecord& r : trace.records) {
        if (has_eps) {
            std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                          r.potential, r.sum_rate, r.residual_inf, r.alpha,
                          r.epsilon.value_or(0.0));
        } else {
            std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g\n", r.t, r.potential,
                          r.sum_rate, r.residual_inf, r.alpha);
        }
        out += buf;
    }
    return out;
}

std::string trace_to_json(const RunTrace& trace) {
    nlohmann::ordered_json j;
    j["algorithm"] = trace.algorithm;
    j["reason"] = to_string(trace.reason);
    j["final_t"] = trace.final_t;
    nlohmann::ordered_json t = nlohmann::ordered_json::array();
    nlohmann::ordered_json pot = nlohmann::ordered_json::array();
    nlohmann::ordered_json rate = nlohmann::ordered_json::array();
    nlohmann::ordered_json res = nlohmann::ordered_json::array();
    nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
    nlohmann::ordered_json eps = nlohmann::ordered_json::array();
    bool has_eps = false;
    for (const TraceRecord& r : trace.records) {
        t.push_back(r.t);
        pot.push_back(r.potential);
        rate.push_back(r.sum_rate);
        res.push_back(r.residual_inf);
        alpha.push_back(r.alpha);
        eps.push_back(r.epsilon.value_or(0.0));
        has_eps |= r.epsilon.has_value();
    }
    j["t"] = std::move(t);
    j["potential"] = std::move(pot);
    j["sum_rate"] = std::move(rate);
    j["residual_inf"] = std::move(res);
    j["alpha"] = std::move(alpha);
    if (has_eps) j["epsilon_t"] = std::move(eps);
    return j.dump(2);
}

PowerProfile aiwf_step(const NetworkInstance& inst, const PowerProfile& p, double alpha) {
    const std::vector<double> y = detail::broadcast_unchecked(inst, p);
    Mat phi(inst.n_users(), inst.n_channels());
    fill_best_responses(inst, p, y, phi);
    PowerProfile next = p;
    for (std::size_t i = 0; i < p.p.size(); ++i)
        next.p.data()[i] = (1.0 - alpha) * p.p.data()[i] + alpha * phi.data()[i];
    retighten(inst, next.p);
    return next;
}

PowerProfile siwf_step(const NetworkInstance& inst, const PowerProfile& p, std::size_t user) {
    const std::vector<double> y = detail::broadcast_unchecked(inst, p);
    const WaterfillResult wf = br_from_broadcast(inst, p, y, user);
    PowerProfile next = p;
    std::copy(wf.allocation.begin(), wf.allocation.end(), next.p.row(user).begin());
    return next;
}

PowerProfile pgd_step(const NetworkInstance& inst, const PowerProfile& p, double alpha) {
    const std::vector<double> y = detail::broadcast_unchecked(inst, p);
    const double inv_k = 1.0 / static_cast<double>(inst.n_channels());
    PowerProfile next = p;
    std::vector<double> v(inst.n_channels());
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        for (std::size_t k = 0; k < inst.n_channels(); ++k)
            v[k] = p.p(i, k) + alpha * (inv_k * inst.gain(i, k) / y[k]);
        const std::vector<double> proj =
            inst.has_mask()
                ? project_box_simplex(v, inst.budget(i),
                                      std::span<const double>(inst.mask()->row(i)))
                : project_simplex(v, inst.budget(i));
        std::copy(proj.begin(), proj.end(), next.p.row(i).begin());
    }
    return next;
}

PowerProfile simultaneous_iwf_step(const NetworkInstance& inst, const PowerProfile& p) {
    const std::vector<double> y = detail::broadcast_unchecked(inst, p);
    Mat phi(inst.n_users(), inst.n_channels());
    fill_best_responses(inst, p, y, phi);
    return {std::move(phi)};
}

RunTrace run_aiwf(const NetworkInstance& inst, const PowerProfile& p0,
                  const StepSchedule& schedule, const StoppingRule& stop,
                  const TraceOptions& opts,
                  const std::optional<std::vector<StepSchedule>>& per_user_schedules) {
    check_feasible(inst, p0);
    validate_schedule(schedule);
    if (per_user_schedules) {
        if (per_user_schedules->size() != inst.n_users())
            throw std::invalid_argument("run_aiwf: per_user_schedules size != n_users");
        for (const StepSchedule& s : *per_user_schedules) validate_schedule(s);
    }

    // Tighten slack rows by water-filling against the initial broadcast.
    PowerProfile start = p0;
    {
        const std::vector<double> y = detail::broadcast_unchecked(inst, p0);
        for (std::size_t i = 0; i < inst.n_users(); ++i) {
            double sum = 0.0;
            for (double v : start.p.row(i)) sum += v;
            if (std::abs(sum - inst.budget(i)) > kFeasibilityTol) {
                const WaterfillResult wf = br_from_broadcast(inst, p0, y, i);
                std::copy(wf.allocation.begin(), wf.allocation.end(), start.p.row(i).begin());
            }
        }
        retighten(inst, start.p);
    }

    auto step = [&](long t, const PowerProfile& p, std::span<const double>, const Mat& phi,
                    Mat& next) -> StepResult {
        for (std::size_t i = 0; i < inst.n_users(); ++i) {
            const double alpha = per_user_schedules ? (*per_user_schedules)[i].alpha(t + 1)
                                                    : schedule.alpha(t + 1);
            for (std::size_t k = 0; k < inst.n_channels(); ++k)
                next(i, k) = (1.0 - alpha) * p.p(i, k) + alpha * phi(i, k);
        }
        retighten(inst, next);
        return {};
    };
    return run_loop("aiwf", inst, start, stop, opts, stop.max_iters, false, 1, true,
                    [&](long t) { return schedule.alpha(t); }, step);
}

RunTrace run_siwf(const NetworkInstance& inst, const PowerProfile& p0, const StoppingRule& stop,
                  const TraceOptions& opts, std::optional<std::uint64_t> shuffle_seed) {
    check_feasible(inst, p0);
    const std::size_t n = inst.n_users();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(shuffle_seed.value_or(0));

    auto step = [&](long t, const PowerProfile& p, std::span<const double> y, const Mat&,
                    Mat& next) -> StepResult {
        const std::size_t pos = static_cast<std::size_t>(t) % n;
        if (pos == 0 && shuffle_seed) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
                std::swap(order[i], order[j]);
            }
        }
        const std::size_t user = order[pos];
        next = p.p;
        const WaterfillResult wf = br_from_broadcast(inst, p, y, user);
        std::copy(wf.allocation.begin(), wf.allocation.end(), next.row(user).begin());
        return {};
    };
    // Evaluate the full residual once per sweep; a per-user-step check
    // would cost N best responses per single-row update.
    return run_loop("siwf", inst, p0, stop, opts, stop.max_iters, false,
                    static_cast<long>(n), false, [](long) { return 1.0; }, step);
}

RunTrace run_pgd(const NetworkInstance& inst, const PowerProfile& p0,
                 const StepSchedule& schedule, const StoppingRule& stop,
                 const TraceOptions& opts) {
    check_feasible(inst, p0);
    validate_schedule(schedule);
    const double inv_k = 1.0 / static_cast<double>(inst.n_channels());
    std::vector<double> v(inst.n_channels());

    auto step = [&](long t, const PowerProfile& p, std::span<const double> y, const Mat&,
                    Mat& next) -> StepResult {
        const double alpha = schedule.alpha(t + 1);
        for (std::size_t i = 0; i < inst.n_users(); ++i) {
            for (std::size_t k = 0; k < inst.n_channels(); ++k)
                v[k] = p.p(i, k) + alpha * (inv_k * inst.gain(i, k) / y[k]);
            const std::vector<double> proj =
                inst.has_mask()
                    ? project_box_simplex(v, inst.budget(i),
                                          std::span<const double>(inst.mask()->row(i)))
                    : project_simplex(v, inst.budget(i));
            std::copy(proj.begin(), proj.end(), next.row(i).begin());
        }
        // epsilon_t = 2 alpha_t (Psi(p^t) - p^t)' grad P(p^t)
        CompensatedSum acc;
        for (std::size_t i = 0; i < inst.n_users(); ++i)
            for (std::size_t k = 0; k < inst.n_channels(); ++k)
                acc.add((next(i, k) - p.p(i, k)) * (inv_k * inst.gain(i, k) / y[k]));
        return {2.0 * alpha * acc.value()};
    };
    return run_loop("pgd", inst, p0, stop, opts, stop.max_iters, false, 1, false,
                    [&](long t) { return schedule.alpha(t); }, step);
}

RunTrace run_simultaneous_iwf(const NetworkInstance& inst, const PowerProfile& p0,
                              const StoppingRule& stop, long divergence_guard,
                              const TraceOptions& opts) {
    check_feasible(inst, p0);
    auto step = [&](long, const PowerProfile&, std::span<const double>, const Mat& phi,
                    Mat& next) -> StepResult {
        next = phi;
        return {};
    };
    return run_loop("simiwf", inst, p0, stop, opts, divergence_guard, true, 1, true,
                    [](long) { return 1.0; }, step);
}

std::vector<double> project_simplex(std::span<const double> v, double budget) {
    if (!(budget > 0.0)) throw std::invalid_argument("project_simplex: budget must be positive");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("project_simplex: non-finite input");

    std::vector<double> out(v.size());
    double pos_sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = std::max(v[k], 0.0);
        pos_sum += out[k];
    }
    if (pos_sum <= budget) return out;

    // Project onto the face sum x = budget: sort-and-threshold.
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double cand = (css - budget) / static_cast<double>(j + 1);
        if (u[j] - cand > 0.0) theta = cand;
    }
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - theta, 0.0);
    return out;
}

std::vector<double> project_box_simplex(std::span<const double> v, double budget,
                                        std::span<const double> mask) {
    if (mask.size() != v.size())
        throw std::invalid_argument("project_box_simplex: mask size mismatch");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("project_box_simplex: non-finite input");

    auto clip = [&](double theta, std::vector<double>& out) {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            out[k] = std::min(std::max(v[k] - theta, 0.0), mask[k]);
            s += out[k];
        }
        return s;
    };
    std::vector<double> out(v.size());
    if (clip(0.0, out) <= budget) return out;
    double lo = 0.0;
    double hi = *std::max_element(v.begin(), v.end());
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (clip(mid, out) > budget)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4e-16 * std::max(1.0, std::abs(hi))) break;
    }
    clip(hi, out);
    return out;
}

}  // namespace iwfsim
