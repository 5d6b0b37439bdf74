#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwfsim/dynamics.hpp"
#include "iwfsim/metrics.hpp"
#include "iwfsim/model.hpp"
#include "iwfsim/oracle.hpp"

namespace iwfsim {

/// One fading setting in an experiment sweep: independent channels, or
/// correlated channels with the given coherence bandwidth.
struct FadingSetting {
    bool independent = true;
    double bc = 1.0;

    std::string label() const;
};

/// Declarative description of one Monte Carlo study; JSON schema in
/// docs/file-formats.md. Replicate r uses scenario seed base_seed + r, and the
/// same seeds are reused across K and fading settings so comparisons are
/// paired.
struct ExperimentConfig {
    std::string experiment;  // convergence | collision_vs_k | efficiency_vs_k |
                             // efficiency_vs_bc | table1
    std::size_t n_users = 10;
    std::vector<std::size_t> k_values = {32};
    std::vector<FadingSetting> fading = {FadingSetting{}};
    long replicates = 1;
    std::uint64_t base_seed = 0;
    std::vector<std::string> algorithms = {"aiwf"};
    long max_iters = 200;
    double residual_tol = 1e-8;
    StepSchedule schedule = StepSchedule::harmonic();
    double noise = 0.01;
    double budget = 1.0;
    double area_side = 10.0;
    // Use the seeded equal-gain network instead of random placement; the
    // convergence study runs on it so the simultaneous-IWF divergence is
    // reproducible.
    bool symmetric_gains = false;
    double oracle_tol = 1e-8;
    long record_every = 1;
    double activity_scale = 1e-6;
    int threads = 1;
    std::string output_dir;  // empty = do not write files

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    std::string to_json() const;
};

struct SummaryRow {
    std::string algorithm;
    std::size_t k = 0;
    std::string fading;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    // Long-format CSV: experiment,replicate,algorithm,K,N,B_c,t,metric,value
    std::string csv;
    std::vector<SummaryRow> summary;
    std::string summary_json;

    const SummaryRow* find(const std::string& algorithm, std::size_t k, const std::string& fading,
                           const std::string& metric) const;
};

/// Normalized sum rate sum_rate(p) / cert.value in (0, 1 + gap/P*]; 1 is
/// attained exactly by FDMA equilibria.
double efficiency(const NetworkInstance& inst, const PowerProfile& p,
                  const OptimumCertificate& cert);

/// Run the configured study: generate one scenario per (replicate, K,
/// fading), run the configured algorithms, and aggregate per-metric means and
/// standard errors across replicates. Replicates may run on config.threads
/// threads; aggregation order is fixed by replicate index, so the output
/// bytes do not depend on the thread count. Writes results.csv and
/// summary.json into output_dir when set.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Trend assertions for --check mode; returns human-readable failures
/// (empty = all checks passed).
std::vector<std::string> check_experiment(const ExperimentResult& result);

}  // namespace iwfsim
