#include "iwfsim/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "iwfsim/numeric.hpp"
#include "json.hpp"

namespace iwfsim {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

NetworkInstance::NetworkInstance(Mat gain, std::vector<double> noise,
                                 std::vector<double> budget, std::optional<Mat> mask)
    : gain_(std::move(gain)), noise_(std::move(noise)), budget_(std::move(budget)),
      mask_(std::move(mask)) {
    const std::size_t n = gain_.rows();
    const std::size_t k = gain_.cols();
    require(n > 0 && k > 0, "NetworkInstance: empty dimensions");
    require(noise_.size() == k, "NetworkInstance: noise size != n_channels");
    require(budget_.size() == n, "NetworkInstance: budget size != n_users");
    for (double g : gain_.data())
        require(std::isfinite(g) && g > 0.0, "NetworkInstance: gains must be strictly positive");
    for (double v : noise_)
        require(std::isfinite(v) && v > 0.0, "NetworkInstance: noise must be strictly positive");
    for (double b : budget_)
        require(std::isfinite(b) && b > 0.0, "NetworkInstance: budgets must be strictly positive");
    if (mask_) {
        require(mask_->rows() == n && mask_->cols() == k, "NetworkInstance: mask shape mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double m = (*mask_)(i, c);
                require(m > 0.0 && !std::isnan(m), "NetworkInstance: mask entries must be > 0");
                row_sum += m;
            }
            require(row_sum >= budget_[i],
                    "NetworkInstance: mask row sum below budget; budget cannot bind");
        }
    }
}

double NetworkInstance::mask_or_inf(std::size_t i, std::size_t k) const {
    return mask_ ? (*mask_)(i, k) : std::numeric_limits<double>::infinity();
}

PowerProfile PowerProfile::zeros(const NetworkInstance& inst) {
    return {Mat(inst.n_users(), inst.n_channels(), 0.0)};
}

PowerProfile PowerProfile::uniform(const NetworkInstance& inst) {
    Mat m(inst.n_users(), inst.n_channels());
    const double k = static_cast<double>(inst.n_channels());
    for (std::size_t i = 0; i < inst.n_users(); ++i)
        for (std::size_t c = 0; c < inst.n_channels(); ++c) m(i, c) = inst.budget(i) / k;
    return {std::move(m)};
}

void check_feasible(const NetworkInstance& inst, const PowerProfile& p) {
    require(p.p.rows() == inst.n_users() && p.p.cols() == inst.n_channels(),
            "PowerProfile: shape mismatch");
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < inst.n_channels(); ++k) {
            const double v = p.p(i, k);
            require(std::isfinite(v), "PowerProfile: non-finite power");
            require(v >= -kFeasibilityTol, "PowerProfile: negative power");
            require(v <= inst.mask_or_inf(i, k) + kFeasibilityTol,
                    "PowerProfile: power above mask");
            row_sum += v;
        }
        require(row_sum <= inst.budget(i) + kFeasibilityTol,
                "PowerProfile: budget exceeded for user " + std::to_string(i));
    }
}

bool is_feasible(const NetworkInstance& inst, const PowerProfile& p) {
    try {
        check_feasible(inst, p);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

namespace detail {

std::vector<double> broadcast_unchecked(const NetworkInstance& inst, const PowerProfile& p) {
    std::vector<double> y(inst.n_channels());
    for (std::size_t k = 0; k < inst.n_channels(); ++k) {
        CompensatedSum acc;
        acc.add(inst.noise(k));
        for (std::size_t i = 0; i < inst.n_users(); ++i) acc.add(inst.gain(i, k) * p.p(i, k));
        y[k] = acc.value();
    }
    return y;
}

double potential_given_y(const NetworkInstance& inst, std::span<const double> y) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < inst.n_channels(); ++k)
        acc.add(std::log(y[k]) - std::log(inst.noise(k)));
    return acc.value() / static_cast<double>(inst.n_channels());
}

double user_rate_given_y(const NetworkInstance& inst, const PowerProfile& p, std::size_t i,
                         std::span<const double> y) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < inst.n_channels(); ++k) {
        const double own = inst.gain(i, k) * p.p(i, k);
        acc.add(std::log1p(own / (y[k] - own)));
    }
    return acc.value() / static_cast<double>(inst.n_channels());
}

double sum_rate_given_y(const NetworkInstance& inst, const PowerProfile& p,
                        std::span<const double> y) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < inst.n_users(); ++i)
        acc.add(user_rate_given_y(inst, p, i, y));
    return acc.value();
}

}  // namespace detail

std::vector<double> aggregate_broadcast(const NetworkInstance& inst, const PowerProfile& p) {
    check_feasible(inst, p);
    return detail::broadcast_unchecked(inst, p);
}

std::vector<double> ipn(const NetworkInstance& inst, const PowerProfile& p, std::size_t i) {
    if (i >= inst.n_users()) throw std::out_of_range("ipn: user index out of range");
    std::vector<double> y = aggregate_broadcast(inst, p);
    for (std::size_t k = 0; k < inst.n_channels(); ++k) y[k] -= inst.gain(i, k) * p.p(i, k);
    return y;
}

double user_rate(const NetworkInstance& inst, const PowerProfile& p, std::size_t i) {
    if (i >= inst.n_users()) throw std::out_of_range("user_rate: user index out of range");
    const std::vector<double> v = ipn(inst, p, i);
    CompensatedSum acc;
    for (std::size_t k = 0; k < inst.n_channels(); ++k)
        acc.add(std::log1p(p.p(i, k) * inst.gain(i, k) / v[k]));
    return acc.value() / static_cast<double>(inst.n_channels());
}

double sum_rate(const NetworkInstance& inst, const PowerProfile& p) {
    const std::vector<double> y = aggregate_broadcast(inst, p);
    return detail::sum_rate_given_y(inst, p, y);
}

double potential(const NetworkInstance& inst, const PowerProfile& p) {
    const std::vector<double> y = aggregate_broadcast(inst, p);
    return detail::potential_given_y(inst, y);
}

Mat potential_gradient(const NetworkInstance& inst, const PowerProfile& p) {
    const std::vector<double> y = aggregate_broadcast(inst, p);
    const double inv_k = 1.0 / static_cast<double>(inst.n_channels());
    Mat g(inst.n_users(), inst.n_channels());
    for (std::size_t i = 0; i < inst.n_users(); ++i)
        for (std::size_t k = 0; k < inst.n_channels(); ++k)
            g(i, k) = inv_k * inst.gain(i, k) / y[k];
    return g;
}

std::string instance_to_json(const NetworkInstance& inst) {
    nlohmann::json j;
    j["n_users"] = inst.n_users();
    j["n_channels"] = inst.n_channels();
    j["gain"] = inst.gain().data();
    j["noise"] = inst.noise();
    j["budget"] = inst.budget();
    if (inst.has_mask()) j["mask"] = inst.mask()->data();
    return j.dump(2);
}

NetworkInstance instance_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const auto n = j.at("n_users").get<std::size_t>();
    const auto k = j.at("n_channels").get<std::size_t>();
    Mat gain(n, k, j.at("gain").get<std::vector<double>>());
    std::optional<Mat> mask;
    if (j.contains("mask")) mask = Mat(n, k, j.at("mask").get<std::vector<double>>());
    return NetworkInstance(std::move(gain), j.at("noise").get<std::vector<double>>(),
                           j.at("budget").get<std::vector<double>>(), std::move(mask));
}

NetworkInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return instance_from_json(ss.str());
}

void save_instance(const NetworkInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << instance_to_json(inst) << "\n";
}

}  // namespace iwfsim
