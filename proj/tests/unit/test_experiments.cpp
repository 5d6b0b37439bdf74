#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iwfsim/dynamics.hpp"
#include "iwfsim/experiments.hpp"
#include "iwfsim/metrics.hpp"
#include "iwfsim/model.hpp"
#include "iwfsim/oracle.hpp"
#include "iwfsim/scenario.hpp"

using namespace iwfsim;

TEST_CASE("collision counting") {
    const NetworkInstance inst = make_example1();
    const CollisionStats at_ne = count_collisions(inst, example1_ne_tilde());
    CHECK(at_ne.collided_channels == 1);
    CHECK(at_ne.total_collisions == 1);

    // strict FDMA: user 1 on channel 1, user 2 on channel 2
    const PowerProfile fdma{Mat(2, 2, {1.0, 0.0, 0.0, 1.0})};
    const CollisionStats none = count_collisions(inst, fdma);
    CHECK(none.collided_channels == 0);
    CHECK(none.total_collisions == 0);

    // three users piled on one channel: 3 pairwise collisions
    Mat g(3, 2, 1.0);
    const NetworkInstance three(std::move(g), {1.0, 1.0}, {1.0, 1.0, 1.0});
    const PowerProfile pile{Mat(3, 2, {1.0, 0.0, 1.0, 0.0, 1.0, 0.0})};
    const CollisionStats stats = count_collisions(three, pile);
    CHECK(stats.collided_channels == 1);
    CHECK(stats.total_collisions == 3);

    // threshold is strict: mass exactly at the threshold does not count
    const double thresh = 1e-6 * inst.budget(0) / 2.0;
    const PowerProfile at{Mat(2, 2, {1.0 - thresh, thresh, 0.0, 1.0})};
    CHECK(count_collisions(inst, at).collided_channels == 0);
    const PowerProfile above{Mat(2, 2, {1.0 - 2.0 * thresh, 2.0 * thresh, 0.0, 1.0})};
    CHECK(count_collisions(inst, above).collided_channels == 1);
}

TEST_CASE("efficiency is the certified fraction of the optimum") {
    const NetworkInstance inst = make_example1();
    const OptimumCertificate cert = solve_max_potential(inst, 1e-10);
    CHECK(efficiency(inst, PowerProfile::zeros(inst), cert) == 0.0);
    const double at_ne = efficiency(inst, example1_ne_tilde(), cert);
    CHECK(at_ne > 0.0);
    CHECK(at_ne < 1.0);  // channel 2 is shared, so single-user decoding loses rate

    // single-user networks are trivially FDMA: efficiency 1 at the optimum
    ScenarioSpec solo;
    solo.n_users = 1;
    solo.n_channels = 8;
    solo.seed = 40;
    const NetworkInstance one = generate(solo);
    const OptimumCertificate c1 = solve_max_potential(one, 1e-11);
    CHECK(efficiency(one, c1.p_star, c1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("experiment config parsing") {
    const std::string text = R"({
        "experiment": "table1",
        "n_users": 20,
        "k_values": [128, 256],
        "bc_values": ["independent", 0.1, 0.2, 0.5, 1.0],
        "replicates": 5,
        "base_seed": 4300,
        "noise": 0.01,
        "max_iters": 10000,
        "schedule": {"a": 1.0, "b": 2.0}
    })";
    const ExperimentConfig cfg = ExperimentConfig::from_json(text);
    CHECK(cfg.experiment == "table1");
    CHECK(cfg.n_users == 20);
    CHECK(cfg.k_values == std::vector<std::size_t>{128, 256});
    REQUIRE(cfg.fading.size() == 5);
    CHECK(cfg.fading[0].independent);
    CHECK_FALSE(cfg.fading[1].independent);
    CHECK(cfg.fading[1].bc == 0.1);
    CHECK(cfg.fading[0].label() == "independent");
    CHECK(cfg.fading[1].label() == "0.1");
    CHECK(cfg.replicates == 5);
    CHECK(cfg.noise == 0.01);

    CHECK_THROWS(ExperimentConfig::from_json(R"({"experiment": "nope"})"));
    CHECK_THROWS(ExperimentConfig::from_json(R"({"experiment": "table1", "replicates": 0})"));
    CHECK_THROWS(ExperimentConfig::from_json(
        R"({"experiment": "table1", "bc_values": ["sometimes"]})"));

    // round trip through to_json
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.k_values == cfg.k_values);
    CHECK(back.base_seed == cfg.base_seed);
}

TEST_CASE("convergence experiment emits traces for every algorithm") {
    ExperimentConfig cfg;
    cfg.experiment = "convergence";
    cfg.n_users = 3;
    cfg.k_values = {4};
    cfg.replicates = 1;
    cfg.base_seed = 77;
    cfg.algorithms = {"aiwf", "siwf", "pgd", "simiwf"};
    cfg.max_iters = 30;
    cfg.record_every = 10;
    const ExperimentResult res = run_experiment(cfg);

    std::istringstream in(res.csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "experiment,replicate,algorithm,K,N,B_c,t,metric,value");
    bool saw_oracle = false, saw_pgd = false;
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
        if (line.find(",oracle,") != std::string::npos &&
            line.find(",p_star,") != std::string::npos)
            saw_oracle = true;
        if (line.find(",pgd,") != std::string::npos) saw_pgd = true;
        CHECK(line.find("convergence,") == 0);
    }
    CHECK(saw_oracle);
    CHECK(saw_pgd);
    CHECK(rows > 20);
    for (const char* alg : {"aiwf", "siwf", "pgd", "simiwf"})
        CHECK(res.find(alg, 4, "independent", "final_potential_gap") != nullptr);

    CHECK_THROWS_AS([&] {
        ExperimentConfig bad = cfg;
        bad.algorithms = {"newton"};
        run_experiment(bad);
    }(), std::runtime_error);
}

TEST_CASE("experiment output is byte-identical across runs and thread counts") {
    ExperimentConfig cfg;
    cfg.experiment = "collision_vs_k";
    cfg.n_users = 4;
    cfg.k_values = {8, 16};
    cfg.replicates = 3;
    cfg.base_seed = 11;
    cfg.max_iters = 4000;
    cfg.residual_tol = 1e-8;
    const ExperimentResult a = run_experiment(cfg);
    const ExperimentResult b = run_experiment(cfg);
    CHECK(a.csv == b.csv);
    CHECK(a.summary_json == b.summary_json);

    ExperimentConfig threaded = cfg;
    threaded.threads = 3;
    const ExperimentResult c = run_experiment(threaded);
    CHECK(a.csv == c.csv);

    const SummaryRow* row = a.find("siwf", 8, "independent", "collided_channels");
    REQUIRE(row != nullptr);
    CHECK(row->n == 3);
    CHECK(row->mean >= 0.0);
}

TEST_CASE("efficiency experiment aggregates means and errors") {
    ExperimentConfig cfg;
    cfg.experiment = "efficiency_vs_k";
    cfg.n_users = 3;
    cfg.k_values = {8};
    cfg.replicates = 4;
    cfg.base_seed = 21;
    cfg.max_iters = 100;
    cfg.oracle_tol = 1e-8;
    const ExperimentResult res = run_experiment(cfg);
    const SummaryRow* row = res.find("aiwf", 8, "independent", "efficiency");
    REQUIRE(row != nullptr);
    CHECK(row->n == 4);
    CHECK(row->mean > 0.0);
    CHECK(row->mean <= 1.0 + 1e-6);
    CHECK(row->stderr_ >= 0.0);
}

TEST_CASE("failed replicates abort with the seed in the message") {
    ExperimentConfig cfg;
    cfg.experiment = "convergence";
    cfg.n_users = 2;
    cfg.k_values = {4};
    cfg.replicates = 1;
    cfg.base_seed = 33;
    cfg.algorithms = {"bogus"};
    try {
        run_experiment(cfg);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("seed 33") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
    }
}
