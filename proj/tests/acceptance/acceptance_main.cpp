// End-to-end acceptance suite. Each check prints one PASS/FAIL line with its
// wall time; the exit code is the number of failures. Scenario parameters for
// the seeded instance families are pinned here so the suite is fully
// deterministic.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "iwfsim/dynamics.hpp"
#include "iwfsim/experiments.hpp"
#include "iwfsim/metrics.hpp"
#include "iwfsim/model.hpp"
#include "iwfsim/numeric.hpp"
#include "iwfsim/oracle.hpp"
#include "iwfsim/rng.hpp"
#include "iwfsim/scenario.hpp"
#include "iwfsim/waterfill.hpp"

using namespace iwfsim;
using clock_type = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    std::string name;
    double time_budget_s;
    std::function<Outcome()> fn;
};

std::string g_cli_path;

double residual_at(const NetworkInstance& inst, const PowerProfile& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        const WaterfillResult wf = best_response(inst, p, i);
        for (std::size_t k = 0; k < inst.n_channels(); ++k)
            r = std::max(r, std::abs(wf.allocation[k] - p.p(i, k)));
    }
    return r;
}

PowerProfile random_tight_profile(const NetworkInstance& inst, SplitMix64& rng) {
    Mat p(inst.n_users(), inst.n_channels());
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < inst.n_channels(); ++k) {
            p(i, k) = rng.exponential(1.0);
            sum += p(i, k);
        }
        for (std::size_t k = 0; k < inst.n_channels(); ++k) p(i, k) *= inst.budget(i) / sum;
    }
    return {std::move(p)};
}

// Instance family for the averaged-IWF convergence check: low per-channel SNR
// (0.1 W budgets against unit noise) keeps the best-response coupling weak
// enough for the pinned 1/(t+2) schedule to settle within 500 iterations.
NetworkInstance c4_instance(std::uint64_t seed) {
    ScenarioSpec s;
    s.n_users = 10;
    s.n_channels = 32;
    s.seed = seed;
    s.noise_value = 1.0;
    s.budget_value = 0.1;
    return generate(s);
}

struct C4Result {
    double gap;
    double residual;
};

C4Result run_c4(const NetworkInstance& inst, const OptimumCertificate& cert) {
    // start from the one-shot best response to the uniform profile
    const PowerProfile p0 = simultaneous_iwf_step(inst, PowerProfile::uniform(inst));
    StoppingRule stop;
    stop.max_iters = 500;
    TraceOptions opts;
    opts.record_every = 500;
    const RunTrace tr = run_aiwf(inst, p0, StepSchedule::harmonic(), stop, opts);
    return {cert.value - tr.records.back().potential, tr.records.back().residual_inf};
}

Outcome criterion1_example1_exactness() {
    Outcome out;
    const NetworkInstance inst = make_example1();
    const OptimumCertificate cert = solve_max_potential(inst, 1e-10);
    const double analytic = 0.5 * (std::log(7.0 / 4.0) + std::log(7.0 / 2.0));
    char buf[256];
    for (const auto& [name, ne] :
         {std::pair{"tilde", example1_ne_tilde()}, {"hat", example1_ne_hat()}}) {
        const Mat s = br_residual(inst, ne);
        double res = 0.0;
        for (double v : s.data()) res = std::max(res, std::abs(v));
        const double gap = std::abs(potential(inst, ne) - cert.value);
        if (res > 1e-9 || gap > 1e-8) {
            out.pass = false;
            std::snprintf(buf, sizeof(buf), "%s: residual %.2e gap %.2e; ", name, res, gap);
            out.detail += buf;
        }
    }
    if (std::abs(cert.value - analytic) > 1e-9) {
        out.pass = false;
        out.detail += "certificate does not match the closed-form optimum";
    }
    std::snprintf(buf, sizeof(buf), "P*=%.9f gap_bound=%.1e", cert.value, cert.gap_bound);
    if (out.detail.empty()) out.detail = buf;
    return out;
}

Outcome criterion2_corollary1_equivalence() {
    Outcome out;
    int n_res_dir = 0, n_gap_dir = 0;
    double worst_gap = 0.0, worst_res = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        ScenarioSpec spec;
        spec.n_users = 2 + s % 5;
        spec.n_channels = (s % 3 == 0) ? 4 : (s % 3 == 1 ? 8 : 16);
        spec.seed = 1000 + s;
        const NetworkInstance inst = generate(spec);
        const OptimumCertificate cert = solve_max_potential(inst, 1e-9);

        StoppingRule stop;
        stop.residual_tol = 1e-8;
        stop.max_iters = 4000 * static_cast<long>(inst.n_users());
        TraceOptions opts;
        opts.record_every = stop.max_iters;
        const RunTrace tr = run_siwf(inst, PowerProfile::uniform(inst), stop, opts);
        if (tr.reason != TerminationReason::converged) {
            out.pass = false;
            out.detail += "siwf failed to reach residual 1e-8 on seed " +
                          std::to_string(spec.seed) + "; ";
            continue;
        }
        const double gap = cert.value - tr.records.back().potential;
        worst_gap = std::max(worst_gap, gap);
        if (gap <= 1e-7) ++n_res_dir;

        const double res = residual_at(inst, cert.p_star);
        worst_res = std::max(worst_res, res);
        if (res <= 1e-6) ++n_gap_dir;
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "residual->gap %d/50 (worst %.1e), gap->residual %d/50 (worst %.1e)",
                  n_res_dir, worst_gap, n_gap_dir, worst_res);
    out.detail += buf;
    if (n_res_dir != 50 || n_gap_dir != 50) out.pass = false;
    return out;
}

Outcome criterion3_siwf_monotonicity() {
    Outcome out;
    long violations = 0;
    long pairs = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        ScenarioSpec spec;
        spec.n_users = 2 + s % 5;
        spec.n_channels = 4 + 2 * (s % 5);
        spec.seed = 3000 + s;
        const NetworkInstance inst = generate(spec);
        StoppingRule stop;
        stop.residual_tol = 1e-9;
        stop.max_iters = 3000;
        TraceOptions opts;
        opts.record_every = 1;
        const RunTrace tr = run_siwf(inst, PowerProfile::uniform(inst), stop, opts);
        for (std::size_t j = 1; j < tr.records.size(); ++j) {
            ++pairs;
            if (tr.records[j].potential < tr.records[j - 1].potential - 1e-12) ++violations;
        }
    }
    out.pass = violations == 0;
    out.detail = std::to_string(pairs) + " consecutive pairs, " + std::to_string(violations) +
                 " violations below -1e-12";
    return out;
}

Outcome criterion4_aiwf_convergence() {
    Outcome out;
    double worst_gap = 0.0, worst_res = 0.0;
    int ok = 0;
    for (std::uint64_t seed = 2000; seed < 2020; ++seed) {
        const NetworkInstance inst = c4_instance(seed);
        const OptimumCertificate cert = solve_max_potential(inst, 1e-9);
        const C4Result r = run_c4(inst, cert);
        worst_gap = std::max(worst_gap, r.gap);
        worst_res = std::max(worst_res, r.residual);
        if (r.gap <= 1e-4 && r.residual <= 1e-3) ++ok;
    }
    out.pass = ok == 20;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/20 instances (worst gap %.2e, worst residual %.2e)", ok,
                  worst_gap, worst_res);
    out.detail = buf;
    return out;
}

Outcome criterion5_pgd_quasi_fejer() {
    Outcome out;
    ScenarioSpec spec;
    spec.n_users = 5;
    spec.n_channels = 16;
    spec.seed = 5000;
    spec.noise_value = 0.01;
    const NetworkInstance inst = generate(spec);
    const OptimumCertificate cert = solve_max_potential(inst, 1e-12);

    StoppingRule stop;
    stop.max_iters = 100000;
    TraceOptions opts;
    opts.record_every = 1;
    opts.reference = cert.p_star;
    const RunTrace tr = run_pgd(inst, PowerProfile::uniform(inst),
                                StepSchedule::custom(60.0, 60.0), stop, opts);

    long eps_neg = 0, qf_viol = 0;
    double eps_tail = 0.0, disp_tail = 0.0, min_eps = 0.0;
    const std::size_t n = tr.records.size();
    const std::size_t tail = n - n / 10;
    for (std::size_t j = 0; j < n; ++j) {
        const TraceRecord& r = tr.records[j];
        if (r.epsilon) {
            min_eps = std::min(min_eps, *r.epsilon);
            // at the projection fixed point the true value is zero; anything
            // below -1e-16 would be a real sign violation, not rounding
            if (*r.epsilon < -1e-16) ++eps_neg;
        }
        if (j >= tail) {
            if (r.epsilon) eps_tail += *r.epsilon;
            disp_tail += r.step_norm;
        }
        if (j + 1 < n) {
            const double lhs = *tr.records[j + 1].dist2_ref;
            const double rhs = *tr.records[j].dist2_ref + tr.records[j].epsilon.value_or(0.0);
            if (lhs > rhs + 1e-12) ++qf_viol;
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "eps<0: %ld (min %.1e), fejer violations: %ld, tail sum eps %.2e, tail "
                  "displacement %.2e",
                  eps_neg, min_eps, qf_viol, eps_tail, disp_tail);
    out.detail = buf;
    out.pass = eps_neg == 0 && qf_viol == 0 && eps_tail <= 1e-6 && disp_tail <= 1e-4;
    return out;
}

Outcome criterion6_spectral_impossibility() {
    Outcome out;
    int ok = 0, exact = 0, n2 = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        ScenarioSpec spec;
        spec.n_users = 2 + s % 7;
        spec.n_channels = 8;
        spec.seed = 6000 + s;
        const NetworkInstance inst = generate(spec);
        const InterferenceMatrices im = interference_matrices(inst);
        if (spectral_radius(im.h_max) >= 1.0 - 1e-9) ++ok;
        if (spec.n_users == 2) {
            ++n2;
            bool all = true;
            for (const Mat& h : im.per_channel)
                if (std::abs(spectral_radius(h) - 1.0) > 1e-12) all = false;
            if (all) ++exact;
        }
    }
    out.pass = ok == 100 && exact == n2;
    out.detail = "rho(H_max) >= 1-1e-9 on " + std::to_string(ok) + "/100; two-user per-channel " +
                 "radius exactly 1 on " + std::to_string(exact) + "/" + std::to_string(n2);
    return out;
}

Outcome criterion7_simultaneous_iwf_diverges() {
    Outcome out;
    char buf[256];
    // designated equal-gain instance
    const NetworkInstance inst = make_symmetric(10, 32, 0.01, 1.0, 7000);
    const OptimumCertificate cert = solve_max_potential(inst, 1e-9);

    StoppingRule stop;
    stop.residual_tol = 1e-3;
    stop.max_iters = 10000;
    TraceOptions opts;
    opts.record_every = 1;
    const RunTrace sim =
        run_simultaneous_iwf(inst, PowerProfile::uniform(inst), stop, 10000, opts);
    double min_res = std::numeric_limits<double>::infinity();
    for (const TraceRecord& r : sim.records) min_res = std::min(min_res, r.residual_inf);
    if (sim.reason != TerminationReason::diverged_guard || min_res < 1e-3) {
        out.pass = false;
        std::snprintf(buf, sizeof(buf), "simultaneous IWF settled (min residual %.2e); ",
                      min_res);
        out.detail += buf;
    }

    // averaged IWF must converge on the very same instance
    StoppingRule astop;
    astop.max_iters = 500;
    TraceOptions aopts;
    aopts.record_every = 500;
    const RunTrace aiwf =
        run_aiwf(inst, PowerProfile::uniform(inst), StepSchedule::harmonic(), astop, aopts);
    const double a_gap = cert.value - aiwf.records.back().potential;
    const double a_res = aiwf.records.back().residual_inf;
    if (a_gap > 1e-4 || a_res > 1e-3) {
        out.pass = false;
        std::snprintf(buf, sizeof(buf), "averaged IWF gap %.2e residual %.2e; ", a_gap, a_res);
        out.detail += buf;
    }

    // the two-user fixture from its worst start
    const NetworkInstance ex1 = make_example1();
    const PowerProfile worst{Mat(2, 2, {1.0, 0.0, 1.0, 0.0})};
    const RunTrace cyc = run_simultaneous_iwf(ex1, worst, stop, 10000, opts);
    double min_res2 = std::numeric_limits<double>::infinity();
    for (const TraceRecord& r : cyc.records) min_res2 = std::min(min_res2, r.residual_inf);
    if (cyc.reason != TerminationReason::diverged_guard || min_res2 < 1e-3) {
        out.pass = false;
        out.detail += "fixture worst start settled unexpectedly; ";
    }
    std::snprintf(buf, sizeof(buf),
                  "min residuals %.2e (instance) / %.2e (fixture), averaged-IWF gap %.1e",
                  min_res, min_res2, a_gap);
    out.detail += buf;
    return out;
}

Outcome criterion8_ascent_direction() {
    Outcome out;
    SplitMix64 rng(4242);
    double min_ratio = std::numeric_limits<double>::infinity();
    long checked = 0, nonpositive = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        ScenarioSpec spec;
        spec.n_users = 2 + s % 6;
        spec.n_channels = 8 + 4 * (s % 3);
        spec.seed = 8000 + s;
        const NetworkInstance inst = generate(spec);
        for (int trial = 0; trial < 50; ++trial) {
            const PowerProfile p = random_tight_profile(inst, rng);
            const Mat sres = br_residual(inst, p);
            const Mat grad = potential_gradient(inst, p);
            const double dot = dot_compensated(sres.data(), grad.data());
            double s2 = 0.0;
            for (double v : sres.data()) s2 += v * v;
            if (s2 < 1e-16) continue;  // fixed point, excluded by the criterion
            ++checked;
            if (dot <= 0.0) ++nonpositive;
            min_ratio = std::min(min_ratio, dot / s2);
        }
    }
    out.pass = checked >= 990 && nonpositive == 0 && min_ratio > 0.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%ld points, %ld nonpositive, min ratio %.3e", checked,
                  nonpositive, min_ratio);
    out.detail = buf;
    return out;
}

Outcome criterion9_gradient_correctness() {
    Outcome out;
    SplitMix64 rng(909);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // Gains within 1.4 decades keep every gradient entry far above the
        // noise floor of the central-difference oracle (~1e-16 * P / h); a
        // heavy-tailed fading draw can push single entries into that floor,
        // which would measure the oracle, not the gradient.
        const std::size_t n = 2 + trial % 4;
        const std::size_t kk = 3 + trial % 10;
        Mat gains(n, kk);
        for (double& g : gains.data()) g = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
        std::vector<double> noise(kk), budget(n);
        for (double& v : noise) v = rng.uniform(0.5, 2.0);
        for (double& b : budget) b = rng.uniform(0.5, 2.0);
        const NetworkInstance inst(std::move(gains), std::move(noise), std::move(budget));
        Mat p(inst.n_users(), inst.n_channels());
        for (std::size_t i = 0; i < inst.n_users(); ++i) {
            double sum = 0.0;
            for (std::size_t k = 0; k < inst.n_channels(); ++k)
                sum += p(i, k) = rng.exponential(1.0);
            const double scale = 0.8 * inst.budget(i) * rng.uniform01() / sum;
            for (std::size_t k = 0; k < inst.n_channels(); ++k) p(i, k) *= scale;
        }
        const PowerProfile prof{p};
        const Mat g = potential_gradient(inst, prof);
        for (std::size_t i = 0; i < inst.n_users(); ++i)
            for (std::size_t k = 0; k < inst.n_channels(); ++k) {
                const double h = 1e-6 * (1.0 + std::abs(prof.p(i, k)));
                PowerProfile hi = prof, lo = prof;
                hi.p(i, k) += h;
                lo.p(i, k) -= h;
                const double fd = (potential(inst, hi) - potential(inst, lo)) / (2.0 * h);
                worst = std::max(worst, std::abs(g(i, k) - fd) / std::abs(g(i, k)));
            }
    }
    out.pass = worst <= 1e-6;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst relative error %.2e over 100 pairs", worst);
    out.detail = buf;
    return out;
}

Outcome criterion10_efficiency_trend() {
    Outcome out;
    ExperimentConfig col;
    col.experiment = "collision_vs_k";
    col.n_users = 10;
    col.k_values = {32, 64, 128, 256};
    col.replicates = 50;
    col.base_seed = 4200;
    col.noise = 0.1;
    col.max_iters = 5000;  // sequential user-steps
    col.residual_tol = 1e-8;
    const ExperimentResult cres = run_experiment(col);
    std::vector<std::string> fails = check_experiment(cres);

    ExperimentConfig eff = col;
    eff.experiment = "efficiency_vs_k";
    eff.max_iters = 200;
    eff.oracle_tol = 1e-7;
    const ExperimentResult eres = run_experiment(eff);
    for (const std::string& f : check_experiment(eres)) fails.push_back(f);

    out.pass = fails.empty();
    for (const std::string& f : fails) out.detail += f + "; ";
    if (out.pass) {
        char buf[256];
        const SummaryRow* lo = eres.find("aiwf", 32, "independent", "efficiency");
        const SummaryRow* hi = eres.find("aiwf", 256, "independent", "efficiency");
        const SummaryRow* c32 = cres.find("siwf", 32, "independent", "collided_channels");
        const SummaryRow* c256 = cres.find("siwf", 256, "independent", "collided_channels");
        std::snprintf(buf, sizeof(buf),
                      "collided %.2f -> %.2f, efficiency %.4f -> %.4f (3SE=%.4f)", c32->mean,
                      c256->mean, lo->mean, hi->mean,
                      3.0 * std::sqrt(lo->stderr_ * lo->stderr_ + hi->stderr_ * hi->stderr_));
        out.detail = buf;
    }
    return out;
}

Outcome criterion11_table1_trends() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.experiment = "table1";
    cfg.n_users = 20;
    cfg.k_values = {128, 256};
    cfg.fading = {FadingSetting{true, 1.0}, FadingSetting{false, 0.1}, FadingSetting{false, 0.2},
                  FadingSetting{false, 0.5}, FadingSetting{false, 1.0}};
    cfg.replicates = 50;
    cfg.base_seed = 4300;
    cfg.noise = 0.01;
    cfg.max_iters = 10000;
    cfg.residual_tol = 1e-8;
    const ExperimentResult res = run_experiment(cfg);
    const std::vector<std::string> fails = check_experiment(res);
    out.pass = fails.empty();
    for (const std::string& f : fails) out.detail += f + "; ";
    if (out.pass) {
        std::string line = "total collisions";
        for (std::size_t k : cfg.k_values) {
            line += " | K=" + std::to_string(k) + ":";
            for (const FadingSetting& f : cfg.fading) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), " %.1f",
                              res.find("siwf", k, f.label(), "total_collisions")->mean);
                line += buf;
            }
        }
        out.detail = line;
    }
    return out;
}

Outcome criterion12_ne_set_convexity() {
    Outcome out;
    const NetworkInstance inst = make_example1();
    SplitMix64 rng(1212);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double lam = rng.uniform01();
        PowerProfile mix = example1_ne_tilde();
        for (std::size_t j = 0; j < mix.p.size(); ++j)
            mix.p.data()[j] = lam * example1_ne_tilde().p.data()[j] +
                              (1.0 - lam) * example1_ne_hat().p.data()[j];
        const Mat s = br_residual(inst, mix);
        for (double v : s.data()) worst = std::max(worst, std::abs(v));
    }
    out.pass = worst <= 1e-8;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst residual over 20 mixtures: %.2e", worst);
    out.detail = buf;
    return out;
}

Outcome criterion13_diagonal_optimality() {
    Outcome out;
    SplitMix64 rng(1313);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Mat g(1, 2,
              {0.2 + rng.exponential(1.0), 0.2 + rng.exponential(1.0)});
        const NetworkInstance inst(std::move(g),
                                   {0.5 + rng.uniform01(), 0.5 + rng.uniform01()},
                                   {0.5 + rng.uniform01()});
        const DiagonalCheckReport rep = diagonal_optimality_check(inst, 100, 1e-3);
        worst = std::max(worst, rep.full_max - rep.diag_max);
        if (rep.diag_max < rep.full_max - 1e-3) out.pass = false;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst full-vs-diagonal deficit %.2e over 5 instances",
                  worst);
    out.detail = buf;
    return out;
}

Outcome criterion14_cli_determinism() {
    Outcome out;
    if (g_cli_path.empty()) {
        out.pass = false;
        out.detail = "pass --cli <path-to-iwfsim> to run this check";
        return out;
    }
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "iwfsim_accept14";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path cfg_path = tmp / "config.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({
  "experiment": "collision_vs_k",
  "n_users": 5,
  "k_values": [8, 16],
  "replicates": 4,
  "base_seed": 140,
  "max_iters": 4000,
  "residual_tol": 1e-8,
  "noise": 0.05
})";
    }
    auto run_once = [&](const std::string& dir) {
        const std::string cmd = "\"" + g_cli_path + "\" collision-vs-k --config " +
                                cfg_path.string() + " --out " + dir + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string dir_a = (tmp / "a").string();
    const std::string dir_b = (tmp / "b").string();
    if (run_once(dir_a) != 0 || run_once(dir_b) != 0) {
        out.pass = false;
        out.detail = "CLI invocation failed";
        return out;
    }
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string csv_a = slurp(dir_a + "/results.csv");
    const std::string csv_b = slurp(dir_b + "/results.csv");
    const std::string sum_a = slurp(dir_a + "/summary.json");
    const std::string sum_b = slurp(dir_b + "/summary.json");
    out.pass = !csv_a.empty() && csv_a == csv_b && sum_a == sum_b;
    out.detail = out.pass ? "two CLI runs produced byte-identical results.csv and summary.json"
                          : "outputs differ between identical CLI runs";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];

    const std::vector<Check> checks = {
        {"01 example1-exactness", 1.0, criterion1_example1_exactness},
        {"02 fixed-point/optimum equivalence", 30.0, criterion2_corollary1_equivalence},
        {"03 sequential-IWF monotonicity", 60.0, criterion3_siwf_monotonicity},
        {"04 averaged-IWF convergence", 60.0, criterion4_aiwf_convergence},
        {"05 projected-gradient quasi-Fejer", 120.0, criterion5_pgd_quasi_fejer},
        {"06 spectral impossibility", 5.0, criterion6_spectral_impossibility},
        {"07 simultaneous-IWF non-convergence", 60.0, criterion7_simultaneous_iwf_diverges},
        {"08 residual ascent margin", 30.0, criterion8_ascent_direction},
        {"09 gradient correctness", 10.0, criterion9_gradient_correctness},
        {"10 efficiency/collision trends vs K", 600.0, criterion10_efficiency_trend},
        {"11 collision trends vs coherence", 600.0, criterion11_table1_trends},
        {"12 equilibrium-set convexity", 1.0, criterion12_ne_set_convexity},
        {"13 diagonal-covariance optimality", 60.0, criterion13_diagonal_optimality},
        {"14 CLI determinism", 120.0, criterion14_cli_determinism},
    };

    int failures = 0;
    for (const Check& c : checks) {
        const auto t0 = clock_type::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
        if (dt > c.time_budget_s) {
            out.pass = false;
            char buf[96];
            std::snprintf(buf, sizeof(buf), " [exceeded %.0fs budget]", c.time_budget_s);
            out.detail += buf;
        }
        std::printf("%s  %-38s (%6.2fs)  %s\n", out.pass ? "PASS" : "FAIL", c.name.c_str(), dt,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("%d/%zu acceptance checks passed\n", static_cast<int>(checks.size()) - failures,
                checks.size());
    return failures;
}
