#include "iwfsim/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "iwfsim/scenario.hpp"
#include "json.hpp"

namespace iwfsim {

namespace {

const std::set<std::string> kKinds = {"convergence", "collision_vs_k", "efficiency_vs_k",
                                      "efficiency_vs_bc", "table1"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                     static_cast<double>(xs.size()));
}

struct CsvRow {
    long replicate;
    std::string algorithm;
    std::size_t k;
    std::string bc;
    long t;
    std::string metric;
    double value;
};

struct JobOutput {
    std::vector<CsvRow> rows;
    // (algorithm, metric, value) triples feeding the summary aggregation.
    std::vector<std::tuple<std::string, std::string, double>> terminal;
    std::string error;
    std::uint64_t seed = 0;
};

struct Job {
    long replicate;
    std::size_t k;
    FadingSetting fading;
};

ScenarioSpec scenario_for(const ExperimentConfig& cfg, const Job& job) {
    ScenarioSpec spec;
    spec.n_users = cfg.n_users;
    spec.n_channels = job.k;
    spec.area_side = cfg.area_side;
    spec.budget_value = cfg.budget;
    spec.noise_value = cfg.noise;
    spec.coherence_bandwidth = job.fading.independent ? 1.0 : job.fading.bc;
    spec.seed = cfg.base_seed + static_cast<std::uint64_t>(job.replicate);
    return spec;
}

void run_convergence_job(const ExperimentConfig& cfg, const Job& job,
                         const NetworkInstance& inst, JobOutput& out) {
    const OptimumCertificate cert = solve_max_potential(inst, cfg.oracle_tol);
    out.rows.push_back({job.replicate, "oracle", job.k, job.fading.label(), 0, "p_star",
                        cert.value});
    const PowerProfile p0 = PowerProfile::uniform(inst);
    TraceOptions topts;
    topts.record_every = cfg.record_every;
    StoppingRule stop;
    stop.residual_tol = cfg.residual_tol;
    stop.max_iters = cfg.max_iters;

    for (const std::string& alg : cfg.algorithms) {
        RunTrace trace;
        if (alg == "aiwf")
            trace = run_aiwf(inst, p0, cfg.schedule, stop, topts);
        else if (alg == "siwf")
            trace = run_siwf(inst, p0, stop, topts);
        else if (alg == "pgd")
            trace = run_pgd(inst, p0, cfg.schedule, stop, topts);
        else if (alg == "simiwf")
            trace = run_simultaneous_iwf(inst, p0, stop, cfg.max_iters, topts);
        else
            throw std::invalid_argument("unknown algorithm: " + alg);

        for (const TraceRecord& r : trace.records) {
            out.rows.push_back({job.replicate, alg, job.k, job.fading.label(), r.t, "potential",
                                r.potential});
            out.rows.push_back({job.replicate, alg, job.k, job.fading.label(), r.t, "sum_rate",
                                r.sum_rate});
            out.rows.push_back({job.replicate, alg, job.k, job.fading.label(), r.t,
                                "residual_inf", r.residual_inf});
            out.rows.push_back({job.replicate, alg, job.k, job.fading.label(), r.t,
                                "potential_gap", cert.value - r.potential});
        }
        const TraceRecord& last = trace.records.back();
        out.terminal.emplace_back(alg, "final_potential_gap", cert.value - last.potential);
        out.terminal.emplace_back(alg, "final_residual", last.residual_inf);
        out.terminal.emplace_back(alg, "final_t", static_cast<double>(trace.final_t));
        out.terminal.emplace_back(alg, "diverged",
                                  trace.reason == TerminationReason::diverged_guard ? 1.0 : 0.0);
    }
}

void run_collision_job(const ExperimentConfig& cfg, const Job& job, const NetworkInstance& inst,
                       JobOutput& out) {
    StoppingRule stop;
    stop.residual_tol = cfg.residual_tol;
    stop.max_iters = cfg.max_iters;
    TraceOptions topts;
    topts.record_every = std::max<long>(cfg.max_iters, 1);
    const RunTrace trace = run_siwf(inst, PowerProfile::uniform(inst), stop, topts);
    const CollisionStats stats =
        count_collisions(inst, trace.final_profile, cfg.activity_scale);
    out.rows.push_back({job.replicate, "siwf", job.k, job.fading.label(), trace.final_t,
                        "collided_channels", static_cast<double>(stats.collided_channels)});
    out.rows.push_back({job.replicate, "siwf", job.k, job.fading.label(), trace.final_t,
                        "total_collisions", static_cast<double>(stats.total_collisions)});
    out.terminal.emplace_back("siwf", "collided_channels",
                              static_cast<double>(stats.collided_channels));
    out.terminal.emplace_back("siwf", "total_collisions",
                              static_cast<double>(stats.total_collisions));
}

void run_efficiency_job(const ExperimentConfig& cfg, const Job& job, const NetworkInstance& inst,
                        JobOutput& out) {
    const OptimumCertificate cert = solve_max_potential(inst, cfg.oracle_tol);
    StoppingRule stop;
    stop.max_iters = cfg.max_iters;  // fixed iteration budget, no early stop
    TraceOptions topts;
    topts.record_every = std::max<long>(cfg.max_iters, 1);
    const RunTrace trace = run_aiwf(inst, PowerProfile::uniform(inst), cfg.schedule, stop, topts);
    const double eff = efficiency(inst, trace.final_profile, cert);
    out.rows.push_back({job.replicate, "aiwf", job.k, job.fading.label(), trace.final_t,
                        "efficiency", eff});
    out.rows.push_back({job.replicate, "oracle", job.k, job.fading.label(), 0, "p_star",
                        cert.value});
    out.terminal.emplace_back("aiwf", "efficiency", eff);
}

}  // namespace

std::string FadingSetting::label() const {
    if (independent) return "independent";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", bc);
    return buf;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    cfg.experiment = j.at("experiment").get<std::string>();
    if (!kKinds.count(cfg.experiment))
        throw std::invalid_argument("unknown experiment kind: " + cfg.experiment);
    cfg.n_users = j.value("n_users", cfg.n_users);
    if (j.contains("k_values")) cfg.k_values = j.at("k_values").get<std::vector<std::size_t>>();
    if (j.contains("bc_values")) {
        cfg.fading.clear();
        for (const auto& v : j.at("bc_values")) {
            FadingSetting f;
            if (v.is_string()) {
                if (v.get<std::string>() != "independent")
                    throw std::invalid_argument("bc_values entries: number or \"independent\"");
            } else {
                f.independent = false;
                f.bc = v.get<double>();
            }
            cfg.fading.push_back(f);
        }
    }
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    if (j.contains("algorithms"))
        cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.residual_tol = j.value("residual_tol", cfg.residual_tol);
    if (j.contains("schedule"))
        cfg.schedule = StepSchedule::custom(j.at("schedule").value("a", 1.0),
                                            j.at("schedule").value("b", 2.0));
    cfg.noise = j.value("noise", cfg.noise);
    cfg.symmetric_gains = j.value("symmetric_gains", cfg.symmetric_gains);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.area_side = j.value("area_side", cfg.area_side);
    cfg.oracle_tol = j.value("oracle_tol", cfg.oracle_tol);
    cfg.record_every = j.value("record_every", cfg.record_every);
    cfg.activity_scale = j.value("activity_scale", cfg.activity_scale);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.output_dir = j.value("output", cfg.output_dir);
    if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["n_users"] = n_users;
    j["k_values"] = k_values;
    nlohmann::ordered_json bc = nlohmann::ordered_json::array();
    for (const FadingSetting& f : fading) {
        if (f.independent)
            bc.push_back("independent");
        else
            bc.push_back(f.bc);
    }
    j["bc_values"] = bc;
    j["replicates"] = replicates;
    j["base_seed"] = base_seed;
    j["algorithms"] = algorithms;
    j["max_iters"] = max_iters;
    j["residual_tol"] = residual_tol;
    j["schedule"] = {{"a", schedule.a}, {"b", schedule.b}};
    j["noise"] = noise;
    j["symmetric_gains"] = symmetric_gains;
    j["budget"] = budget;
    j["area_side"] = area_side;
    j["oracle_tol"] = oracle_tol;
    j["record_every"] = record_every;
    j["activity_scale"] = activity_scale;
    j["threads"] = threads;
    j["output"] = output_dir;
    return j.dump(2);
}

const SummaryRow* ExperimentResult::find(const std::string& algorithm, std::size_t k,
                                         const std::string& fading,
                                         const std::string& metric) const {
    for (const SummaryRow& row : summary)
        if (row.algorithm == algorithm && row.k == k && row.fading == fading &&
            row.metric == metric)
            return &row;
    return nullptr;
}

double efficiency(const NetworkInstance& inst, const PowerProfile& p,
                  const OptimumCertificate& cert) {
    if (!(cert.value > 0.0))
        throw std::invalid_argument("efficiency: certificate value must be positive");
    return sum_rate(inst, p) / cert.value;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (!kKinds.count(cfg.experiment))
        throw std::invalid_argument("unknown experiment kind: " + cfg.experiment);

    std::vector<Job> jobs;
    for (std::size_t k : cfg.k_values)
        for (const FadingSetting& f : cfg.fading)
            for (long r = 0; r < cfg.replicates; ++r) jobs.push_back({r, k, f});

    std::vector<JobOutput> outs(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job& job = jobs[idx];
            JobOutput& out = outs[idx];
            out.seed = cfg.base_seed + static_cast<std::uint64_t>(job.replicate);
            try {
                const ScenarioSpec spec = scenario_for(cfg, job);
                const NetworkInstance inst =
                    cfg.symmetric_gains
                        ? make_symmetric(cfg.n_users, job.k, cfg.noise, cfg.budget, spec.seed)
                        : (job.fading.independent ? generate(spec) : generate_correlated(spec));
                if (cfg.experiment == "convergence")
                    run_convergence_job(cfg, job, inst, out);
                else if (cfg.experiment == "collision_vs_k" || cfg.experiment == "table1")
                    run_collision_job(cfg, job, inst, out);
                else
                    run_efficiency_job(cfg, job, inst, out);
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    for (std::size_t idx = 0; idx < outs.size(); ++idx)
        if (!outs[idx].error.empty())
            throw std::runtime_error("replicate " + std::to_string(jobs[idx].replicate) +
                                     " (seed " + std::to_string(outs[idx].seed) +
                                     ", K=" + std::to_string(jobs[idx].k) + ", B_c=" +
                                     jobs[idx].fading.label() + ") failed: " + outs[idx].error);

    ExperimentResult result;
    result.config = cfg;

    std::string csv = "experiment,replicate,algorithm,K,N,B_c,t,metric,value\n";
    for (const JobOutput& out : outs)
        for (const CsvRow& r : out.rows)
            csv += cfg.experiment + "," + std::to_string(r.replicate) + "," + r.algorithm + "," +
                   std::to_string(r.k) + "," + std::to_string(cfg.n_users) + "," + r.bc + "," +
                   std::to_string(r.t) + "," + r.metric + "," + fmt(r.value) + "\n";
    result.csv = std::move(csv);

    // Aggregate in job order, grouped by (algorithm, K, fading, metric).
    std::vector<std::tuple<std::string, std::size_t, std::string, std::string>> keys;
    std::vector<std::vector<double>> values;
    for (std::size_t idx = 0; idx < outs.size(); ++idx) {
        for (const auto& [alg, metric, value] : outs[idx].terminal) {
            const auto key = std::make_tuple(alg, jobs[idx].k, jobs[idx].fading.label(), metric);
            std::size_t pos = 0;
            for (; pos < keys.size(); ++pos)
                if (keys[pos] == key) break;
            if (pos == keys.size()) {
                keys.push_back(key);
                values.emplace_back();
            }
            values[pos].push_back(value);
        }
    }
    nlohmann::ordered_json sj;
    sj["experiment"] = cfg.experiment;
    // Echo the config minus execution-only knobs, so identical studies give
    // identical bytes regardless of where they write or how many threads ran.
    nlohmann::ordered_json echo = nlohmann::ordered_json::parse(cfg.to_json());
    echo.erase("output");
    echo.erase("threads");
    sj["config"] = echo;
    sj["rows"] = nlohmann::ordered_json::array();
    for (std::size_t pos = 0; pos < keys.size(); ++pos) {
        SummaryRow row;
        row.algorithm = std::get<0>(keys[pos]);
        row.k = std::get<1>(keys[pos]);
        row.fading = std::get<2>(keys[pos]);
        row.metric = std::get<3>(keys[pos]);
        row.n = static_cast<long>(values[pos].size());
        row.mean = mean_of(values[pos]);
        row.stderr_ = stderr_of(values[pos], row.mean);
        result.summary.push_back(row);
        nlohmann::ordered_json r;
        r["algorithm"] = row.algorithm;
        r["K"] = row.k;
        r["B_c"] = row.fading;
        r["metric"] = row.metric;
        r["mean"] = row.mean;
        r["stderr"] = row.stderr_;
        r["n"] = row.n;
        sj["rows"].push_back(r);
    }
    result.summary_json = sj.dump(2);

    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        const auto dir = std::filesystem::path(cfg.output_dir);
        std::ofstream csv_out(dir / "results.csv", std::ios::binary);
        csv_out << result.csv;
        std::ofstream sum_out(dir / "summary.json", std::ios::binary);
        sum_out << result.summary_json << "\n";
        if (!csv_out || !sum_out)
            throw std::runtime_error("failed to write results into " + cfg.output_dir);
    }
    return result;
}

std::vector<std::string> check_experiment(const ExperimentResult& result) {
    std::vector<std::string> failures;
    const ExperimentConfig& cfg = result.config;
    auto fail = [&](const std::string& msg) { failures.push_back(msg); };

    if (cfg.experiment == "convergence") {
        const std::string bc = cfg.fading.front().label();
        const std::size_t k = cfg.k_values.front();
        for (const std::string& alg : cfg.algorithms) {
            if (alg == "simiwf") {
                const SummaryRow* d = result.find(alg, k, bc, "diverged");
                if (!d || d->mean < 1.0)
                    fail("simultaneous IWF was expected to hit the divergence guard");
                continue;
            }
            const SummaryRow* gap = result.find(alg, k, bc, "final_potential_gap");
            if (!gap) {
                fail("missing final_potential_gap for " + alg);
                continue;
            }
            const double tol = alg == "pgd" ? 1e-2 : 1e-4;
            if (!(gap->mean < tol))
                fail(alg + ": mean final potential gap " + fmt(gap->mean) + " not below " +
                     fmt(tol));
        }
    } else if (cfg.experiment == "collision_vs_k" || cfg.experiment == "table1") {
        // Collided channels / collisions fall with K and rise with correlation.
        for (const FadingSetting& f : cfg.fading) {
            for (const char* metric : {"collided_channels", "total_collisions"}) {
                for (std::size_t j = 1; j < cfg.k_values.size(); ++j) {
                    const SummaryRow* lo = result.find("siwf", cfg.k_values[j - 1], f.label(), metric);
                    const SummaryRow* hi = result.find("siwf", cfg.k_values[j], f.label(), metric);
                    if (!lo || !hi) {
                        fail(std::string("missing ") + metric + " rows");
                        continue;
                    }
                    if (!(hi->mean < lo->mean))
                        fail(std::string(metric) + " (B_c=" + f.label() + "): mean at K=" +
                             std::to_string(cfg.k_values[j]) + " (" + fmt(hi->mean) +
                             ") not below mean at K=" + std::to_string(cfg.k_values[j - 1]) +
                             " (" + fmt(lo->mean) + ")");
                }
            }
        }
        if (cfg.experiment == "table1") {
            for (std::size_t k : cfg.k_values) {
                for (std::size_t j = 1; j < cfg.fading.size(); ++j) {
                    const SummaryRow* a =
                        result.find("siwf", k, cfg.fading[j - 1].label(), "total_collisions");
                    const SummaryRow* b =
                        result.find("siwf", k, cfg.fading[j].label(), "total_collisions");
                    if (!a || !b) continue;
                    const double slack = std::sqrt(a->stderr_ * a->stderr_ +
                                                   b->stderr_ * b->stderr_);
                    if (!(b->mean >= a->mean - slack))
                        fail("total_collisions at K=" + std::to_string(k) + ": " +
                             cfg.fading[j].label() + " mean " + fmt(b->mean) +
                             " below " + cfg.fading[j - 1].label() + " mean " + fmt(a->mean) +
                             " beyond one standard error");
                }
            }
        }
    } else if (cfg.experiment == "efficiency_vs_k") {
        for (const FadingSetting& f : cfg.fading) {
            for (std::size_t j = 1; j < cfg.k_values.size(); ++j) {
                const SummaryRow* lo = result.find("aiwf", cfg.k_values[j - 1], f.label(), "efficiency");
                const SummaryRow* hi = result.find("aiwf", cfg.k_values[j], f.label(), "efficiency");
                if (!lo || !hi) {
                    fail("missing efficiency rows");
                    continue;
                }
                const double slack =
                    std::sqrt(lo->stderr_ * lo->stderr_ + hi->stderr_ * hi->stderr_);
                if (!(hi->mean >= lo->mean - slack))
                    fail("efficiency not non-decreasing from K=" +
                         std::to_string(cfg.k_values[j - 1]) + " to K=" +
                         std::to_string(cfg.k_values[j]));
            }
            const SummaryRow* first = result.find("aiwf", cfg.k_values.front(), f.label(), "efficiency");
            const SummaryRow* last = result.find("aiwf", cfg.k_values.back(), f.label(), "efficiency");
            if (first && last && cfg.k_values.size() > 1) {
                const double se = std::sqrt(first->stderr_ * first->stderr_ +
                                            last->stderr_ * last->stderr_);
                if (!(last->mean - first->mean >= 3.0 * se))
                    fail("efficiency gain from K=" + std::to_string(cfg.k_values.front()) +
                         " to K=" + std::to_string(cfg.k_values.back()) +
                         " is below three standard errors");
            }
        }
    } else if (cfg.experiment == "efficiency_vs_bc") {
        for (std::size_t k : cfg.k_values) {
            const SummaryRow* ind = result.find("aiwf", k, "independent", "efficiency");
            const SummaryRow* full = result.find("aiwf", k, "1", "efficiency");
            if (!ind || !full) {
                fail("efficiency_vs_bc needs both an independent and a B_c=1 setting");
                continue;
            }
            if (!(full->mean <= ind->mean))
                fail("K=" + std::to_string(k) +
                     ": fully correlated efficiency exceeds independent efficiency");
        }
    }
    return failures;
}

}  // namespace iwfsim
