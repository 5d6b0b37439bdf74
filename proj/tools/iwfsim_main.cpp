#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "iwfsim/experiments.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<long> replicates;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", opts.out_dir, "output directory for results.csv / summary.json");
    cmd->add_option("-r,--replicates", opts.replicates, "override replicate count");
    cmd->add_option("-s,--seed", opts.seed, "override base seed");
    cmd->add_option("-t,--threads", opts.threads, "worker threads for replicates");
    cmd->add_flag("--check", opts.check, "run the experiment's trend assertions; nonzero exit on failure");
}

int run_kind(const std::string& kind, const CommonOpts& opts) {
    iwfsim::ExperimentConfig cfg = iwfsim::ExperimentConfig::load(opts.config_path);
    if (cfg.experiment != kind)
        throw std::invalid_argument("config is for experiment '" + cfg.experiment +
                                    "' but subcommand is '" + kind + "'");
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.replicates) cfg.replicates = *opts.replicates;
    if (opts.seed) cfg.base_seed = *opts.seed;
    if (opts.threads) cfg.threads = *opts.threads;

    const iwfsim::ExperimentResult result = iwfsim::run_experiment(cfg);
    if (!cfg.output_dir.empty())
        std::cout << "wrote " << cfg.output_dir << "/results.csv and summary.json\n";
    else
        std::cout << result.summary_json << "\n";

    if (opts.check) {
        const std::vector<std::string> failures = iwfsim::check_experiment(result);
        for (const std::string& f : failures) std::cerr << "CHECK FAILED: " << f << "\n";
        if (!failures.empty()) return 1;
        std::cout << "all checks passed\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo studies of distributed uplink power allocation in a "
                 "single access-point network"};
    app.require_subcommand(1);

    const std::pair<const char*, const char*> kinds[] = {
        {"convergence", "per-iteration traces of all algorithms against the certified optimum"},
        {"collision-vs-k", "channel collision statistics as the channel count grows"},
        {"efficiency-vs-k", "normalized sum rate after a fixed iteration budget vs channel count"},
        {"efficiency-vs-bc", "normalized sum rate under correlated fading"},
        {"table1", "collision statistics across coherence bandwidths and channel counts"},
    };
    CommonOpts opts[std::size(kinds)];
    CLI::App* cmds[std::size(kinds)];
    for (std::size_t i = 0; i < std::size(kinds); ++i) {
        cmds[i] = app.add_subcommand(kinds[i].first, kinds[i].second);
        add_common(cmds[i], opts[i]);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < std::size(kinds); ++i) {
            if (cmds[i]->parsed()) {
                std::string kind = kinds[i].first;
                for (char& c : kind)
                    if (c == '-') c = '_';
                return run_kind(kind, opts[i]);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
