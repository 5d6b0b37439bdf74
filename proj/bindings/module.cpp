#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "iwfsim/dynamics.hpp"
#include "iwfsim/experiments.hpp"
#include "iwfsim/metrics.hpp"
#include "iwfsim/model.hpp"
#include "iwfsim/oracle.hpp"
#include "iwfsim/scenario.hpp"
#include "iwfsim/waterfill.hpp"

namespace py = pybind11;
using namespace iwfsim;

namespace {

Mat mat_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    Mat m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data().begin());
    return m;
}

py::array_t<double> mat_to_numpy(const Mat& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), arr.mutable_data());
    return arr;
}

PowerProfile profile_from_numpy(const py::array_t<double>& arr) { return {mat_from_numpy(arr)}; }

StepSchedule schedule_from(double a, double b) {
    if (a == 1.0 && b == 2.0) return StepSchedule::harmonic();
    return StepSchedule::custom(a, b);
}

StoppingRule stopping_from(std::optional<double> residual_tol, std::optional<double> gap_tol,
                           std::optional<double> p_star, long max_iters) {
    StoppingRule stop;
    stop.residual_tol = residual_tol;
    stop.potential_gap_tol = gap_tol;
    stop.p_star_value = p_star;
    stop.max_iters = max_iters;
    return stop;
}

py::dict trace_to_dict(const RunTrace& tr) {
    const std::size_t n = tr.records.size();
    py::array_t<long> t(n);
    py::array_t<double> pot(n), rate(n), res(n), alpha(n), eps(n), step(n), dist(n);
    bool has_eps = false, has_dist = false;
    for (std::size_t j = 0; j < n; ++j) {
        const TraceRecord& r = tr.records[j];
        t.mutable_data()[j] = r.t;
        pot.mutable_data()[j] = r.potential;
        rate.mutable_data()[j] = r.sum_rate;
        res.mutable_data()[j] = r.residual_inf;
        alpha.mutable_data()[j] = r.alpha;
        eps.mutable_data()[j] = r.epsilon.value_or(0.0);
        step.mutable_data()[j] = r.step_norm;
        dist.mutable_data()[j] = r.dist2_ref.value_or(0.0);
        has_eps |= r.epsilon.has_value();
        has_dist |= r.dist2_ref.has_value();
    }
    py::dict d;
    d["algorithm"] = tr.algorithm;
    d["t"] = t;
    d["potential"] = pot;
    d["sum_rate"] = rate;
    d["residual_inf"] = res;
    d["alpha"] = alpha;
    if (has_eps) d["epsilon"] = eps;
    if (has_dist) d["dist2_ref"] = dist;
    d["step_norm"] = step;
    d["reason"] = to_string(tr.reason);
    d["final_t"] = tr.final_t;
    d["final_profile"] = mat_to_numpy(tr.final_profile.p);
    d["csv"] = trace_to_csv(tr);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Distributed uplink power allocation: water-filling dynamics, certified "
              "optimum oracle and Monte Carlo experiments";

    py::class_<NetworkInstance>(m, "NetworkInstance")
        .def(py::init([](const py::array_t<double>& gain, std::vector<double> noise,
                         std::vector<double> budget, std::optional<py::array_t<double>> mask) {
                 std::optional<Mat> m_opt;
                 if (mask) m_opt = mat_from_numpy(*mask);
                 return NetworkInstance(mat_from_numpy(gain), std::move(noise),
                                        std::move(budget), std::move(m_opt));
             }),
             py::arg("gain"), py::arg("noise"), py::arg("budget"),
             py::arg("mask") = std::nullopt)
        .def_property_readonly("n_users", &NetworkInstance::n_users)
        .def_property_readonly("n_channels", &NetworkInstance::n_channels)
        .def_property_readonly("gain",
                               [](const NetworkInstance& i) { return mat_to_numpy(i.gain()); })
        .def_property_readonly("noise",
                               [](const NetworkInstance& i) { return i.noise(); })
        .def_property_readonly("budget",
                               [](const NetworkInstance& i) { return i.budget(); })
        .def("to_json", &instance_to_json)
        .def_static("from_json", &instance_from_json)
        .def("__repr__", [](const NetworkInstance& i) {
            return "<NetworkInstance N=" + std::to_string(i.n_users()) +
                   " K=" + std::to_string(i.n_channels()) + ">";
        });

    m.def("uniform_profile",
          [](const NetworkInstance& inst) { return mat_to_numpy(PowerProfile::uniform(inst).p); });
    m.def("is_feasible", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return is_feasible(inst, profile_from_numpy(p));
    });

    m.def("user_rate", [](const NetworkInstance& inst, const py::array_t<double>& p,
                          std::size_t i) { return user_rate(inst, profile_from_numpy(p), i); });
    m.def("sum_rate", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return sum_rate(inst, profile_from_numpy(p));
    });
    m.def("potential", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return potential(inst, profile_from_numpy(p));
    });
    m.def("potential_gradient", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return mat_to_numpy(potential_gradient(inst, profile_from_numpy(p)));
    });
    m.def("ipn", [](const NetworkInstance& inst, const py::array_t<double>& p, std::size_t i) {
        return ipn(inst, profile_from_numpy(p), i);
    });
    m.def("aggregate_broadcast", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return aggregate_broadcast(inst, profile_from_numpy(p));
    });

    m.def(
        "water_fill",
        [](std::vector<double> en, double budget, std::optional<std::vector<double>> mask) {
            const WaterfillResult r =
                mask ? water_fill(en, budget, std::span<const double>(*mask))
                     : water_fill(en, budget);
            py::dict d;
            d["allocation"] = r.allocation;
            d["water_level"] = r.water_level;
            d["active_set"] = r.active_set;
            return d;
        },
        py::arg("effective_noise"), py::arg("budget"), py::arg("mask") = std::nullopt);
    m.def("best_response", [](const NetworkInstance& inst, const py::array_t<double>& p,
                              std::size_t i) {
        const WaterfillResult r = best_response(inst, profile_from_numpy(p), i);
        py::dict d;
        d["allocation"] = r.allocation;
        d["water_level"] = r.water_level;
        d["active_set"] = r.active_set;
        return d;
    });
    m.def("br_residual", [](const NetworkInstance& inst, const py::array_t<double>& p) {
        return mat_to_numpy(br_residual(inst, profile_from_numpy(p)));
    });
    m.def("project_simplex", [](std::vector<double> v, double budget) {
        return project_simplex(v, budget);
    });

    m.def(
        "run_aiwf",
        [](const NetworkInstance& inst, const py::array_t<double>& p0, double a, double b,
           std::optional<double> residual_tol, long max_iters, long record_every) {
            TraceOptions opts;
            opts.record_every = record_every;
            return trace_to_dict(run_aiwf(inst, profile_from_numpy(p0), schedule_from(a, b),
                                          stopping_from(residual_tol, {}, {}, max_iters), opts));
        },
        py::arg("inst"), py::arg("p0"), py::arg("a") = 1.0, py::arg("b") = 2.0,
        py::arg("residual_tol") = std::nullopt, py::arg("max_iters") = 10000,
        py::arg("record_every") = 1);
    m.def(
        "run_siwf",
        [](const NetworkInstance& inst, const py::array_t<double>& p0,
           std::optional<double> residual_tol, long max_iters, long record_every,
           std::optional<std::uint64_t> shuffle_seed) {
            TraceOptions opts;
            opts.record_every = record_every;
            return trace_to_dict(run_siwf(inst, profile_from_numpy(p0),
                                          stopping_from(residual_tol, {}, {}, max_iters), opts,
                                          shuffle_seed));
        },
        py::arg("inst"), py::arg("p0"), py::arg("residual_tol") = std::nullopt,
        py::arg("max_iters") = 10000, py::arg("record_every") = 1,
        py::arg("shuffle_seed") = std::nullopt);
    m.def(
        "run_pgd",
        [](const NetworkInstance& inst, const py::array_t<double>& p0, double a, double b,
           std::optional<double> residual_tol, long max_iters, long record_every) {
            TraceOptions opts;
            opts.record_every = record_every;
            return trace_to_dict(run_pgd(inst, profile_from_numpy(p0), schedule_from(a, b),
                                         stopping_from(residual_tol, {}, {}, max_iters), opts));
        },
        py::arg("inst"), py::arg("p0"), py::arg("a") = 1.0, py::arg("b") = 2.0,
        py::arg("residual_tol") = std::nullopt, py::arg("max_iters") = 10000,
        py::arg("record_every") = 1);
    m.def(
        "run_simultaneous_iwf",
        [](const NetworkInstance& inst, const py::array_t<double>& p0,
           std::optional<double> residual_tol, long guard, long record_every) {
            TraceOptions opts;
            opts.record_every = record_every;
            return trace_to_dict(
                run_simultaneous_iwf(inst, profile_from_numpy(p0),
                                     stopping_from(residual_tol, {}, {}, guard), guard, opts));
        },
        py::arg("inst"), py::arg("p0"), py::arg("residual_tol") = std::nullopt,
        py::arg("guard") = 10000, py::arg("record_every") = 1);

    m.def(
        "solve_max_potential",
        [](const NetworkInstance& inst, double tol, long max_iters, bool away_steps) {
            FwOptions opts;
            opts.max_iters = max_iters;
            opts.away_steps = away_steps;
            const OptimumCertificate cert = solve_max_potential(inst, tol, opts);
            py::dict d;
            d["p_star"] = mat_to_numpy(cert.p_star.p);
            d["value"] = cert.value;
            d["gap_bound"] = cert.gap_bound;
            d["iterations"] = cert.iterations;
            return d;
        },
        py::arg("inst"), py::arg("tol") = 1e-9, py::arg("max_iters") = 500000,
        py::arg("away_steps") = true);
    m.def(
        "verify_ne",
        [](const NetworkInstance& inst, const py::array_t<double>& p,
           const py::array_t<double>& p_star, double value, double gap_bound, double tol) {
            OptimumCertificate cert;
            cert.p_star = profile_from_numpy(p_star);
            cert.value = value;
            cert.gap_bound = gap_bound;
            const EquilibriumReport rep = verify_ne(inst, profile_from_numpy(p), cert, tol);
            py::dict d;
            d["residual_inf"] = rep.residual_inf;
            d["potential_gap"] = rep.potential_gap;
            d["is_ne"] = rep.is_ne;
            d["gap_ok"] = rep.gap_ok;
            d["tests_disagree"] = rep.tests_disagree;
            d["support"] = rep.support;
            d["collided_channels"] = rep.collisions.collided_channels;
            d["total_collisions"] = rep.collisions.total_collisions;
            return d;
        },
        py::arg("inst"), py::arg("p"), py::arg("p_star"), py::arg("value"),
        py::arg("gap_bound") = 0.0, py::arg("tol") = 1e-8);
    m.def("interference_matrices", [](const NetworkInstance& inst) {
        const InterferenceMatrices im = interference_matrices(inst);
        py::list per;
        for (const Mat& h : im.per_channel) per.append(mat_to_numpy(h));
        py::dict d;
        d["per_channel"] = per;
        d["h_max"] = mat_to_numpy(im.h_max);
        return d;
    });
    m.def(
        "spectral_radius",
        [](const py::array_t<double>& m, double tol) {
            return spectral_radius(mat_from_numpy(m), tol);
        },
        py::arg("m"), py::arg("tol") = 1e-13);
    m.def(
        "count_collisions",
        [](const NetworkInstance& inst, const py::array_t<double>& p, double activity_scale) {
            const CollisionStats st =
                count_collisions(inst, profile_from_numpy(p), activity_scale);
            py::dict d;
            d["collided_channels"] = st.collided_channels;
            d["total_collisions"] = st.total_collisions;
            return d;
        },
        py::arg("inst"), py::arg("p"), py::arg("activity_scale") = 1e-6);
    m.def(
        "efficiency",
        [](const NetworkInstance& inst, const py::array_t<double>& p, double p_star_value) {
            OptimumCertificate cert;
            cert.value = p_star_value;
            return efficiency(inst, profile_from_numpy(p), cert);
        },
        py::arg("inst"), py::arg("p"), py::arg("p_star_value"));

    m.def("make_example1", &make_example1);
    m.def("example1_ne_tilde", [] { return mat_to_numpy(example1_ne_tilde().p); });
    m.def("example1_ne_hat", [] { return mat_to_numpy(example1_ne_hat().p); });
    m.def(
        "generate",
        [](std::size_t n_users, std::size_t n_channels, std::uint64_t seed, double noise,
           double budget, double area_side, std::optional<double> coherence_bandwidth) {
            ScenarioSpec spec;
            spec.n_users = n_users;
            spec.n_channels = n_channels;
            spec.seed = seed;
            spec.noise_value = noise;
            spec.budget_value = budget;
            spec.area_side = area_side;
            if (coherence_bandwidth) {
                spec.coherence_bandwidth = *coherence_bandwidth;
                return generate_correlated(spec);
            }
            return generate(spec);
        },
        py::arg("n_users"), py::arg("n_channels"), py::arg("seed") = 0, py::arg("noise") = 0.01,
        py::arg("budget") = 1.0, py::arg("area_side") = 10.0,
        py::arg("coherence_bandwidth") = std::nullopt);

    m.def(
        "run_experiment_json",
        [](const std::string& config_json) {
            const ExperimentResult res =
                run_experiment(ExperimentConfig::from_json(config_json));
            py::dict d;
            d["csv"] = res.csv;
            d["summary_json"] = res.summary_json;
            py::list failures;
            for (const std::string& f : check_experiment(res)) failures.append(f);
            d["check_failures"] = failures;
            return d;
        },
        py::arg("config_json"));
}
