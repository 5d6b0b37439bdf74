#include "iwfsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iwfsim/numeric.hpp"
#include "iwfsim/waterfill.hpp"
#include "json.hpp"

namespace iwfsim {

namespace {

// Exact solution of the per-user linear subproblem max <c, x> over
// {0 <= x <= mask, sum x <= budget}: fill channels by descending coefficient.
// Without a mask this is the single best channel.
void linear_argmax(const NetworkInstance& inst, std::size_t i, std::span<const double> coeff,
                   std::vector<double>& out) {
    const std::size_t kk = inst.n_channels();
    std::fill(out.begin(), out.end(), 0.0);
    if (!inst.has_mask()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < kk; ++k)
            if (coeff[k] > coeff[best]) best = k;
        out[best] = inst.budget(i);
        return;
    }
    std::vector<std::size_t> idx(kk);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return coeff[a] > coeff[b]; });
    double remaining = inst.budget(i);
    for (std::size_t k : idx) {
        if (remaining <= 0.0) break;
        const double take = std::min(remaining, (*inst.mask())(i, k));
        out[k] = take;
        remaining -= take;
    }
}

// Exact line search for P(p + gamma*d) on [0, gamma_max], given the aggregate
// move dy(k) = sum_i g_i(k) d_i(k). The directional derivative
// phi'(gamma) = (1/K) sum_k dy_k / (y_k + gamma dy_k) is decreasing, so a
// sign bisection finds the maximizer.
double line_search(std::span<const double> y, std::span<const double> dy, double gamma_max,
                   int iters) {
    auto deriv = [&](double g) {
        CompensatedSum acc;
        for (std::size_t k = 0; k < y.size(); ++k) acc.add(dy[k] / (y[k] + g * dy[k]));
        return acc.value();
    };
    if (deriv(gamma_max) >= 0.0) return gamma_max;
    if (deriv(0.0) <= 0.0) return 0.0;
    double lo = 0.0, hi = gamma_max;
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (deriv(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void tighten_rows(const NetworkInstance& inst, Mat& p) {
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        auto row = p.row(i);
        double sum = 0.0;
        for (double& v : row) {
            if (v < 0.0) v = 0.0;
            sum += v;
        }
        if (sum > inst.budget(i)) {
            const double scale = inst.budget(i) / sum;
            for (double& v : row) v *= scale;
        }
    }
}

}  // namespace

OptimumCertificate solve_max_potential(const NetworkInstance& inst, double tol,
                                       const FwOptions& opts) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_max_potential: tol must be positive");
    const std::size_t n = inst.n_users();
    const std::size_t kk = inst.n_channels();
    const double inv_k = 1.0 / static_cast<double>(kk);

    PowerProfile p = PowerProfile::uniform(inst);
    if (inst.has_mask()) {
        // Uniform start may violate caps; clip and keep whatever headroom is left.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < kk; ++k)
                p.p(i, k) = std::min(p.p(i, k), (*inst.mask())(i, k));
    }

    Mat grad(n, kk);
    Mat dir(n, kk);
    std::vector<double> dy(kk);
    std::vector<double> vert(kk);
    double best_gap = std::numeric_limits<double>::infinity();
    double best_value = -std::numeric_limits<double>::infinity();

    for (long t = 0; t < opts.max_iters; ++t) {
        const std::vector<double> y = detail::broadcast_unchecked(inst, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < kk; ++k) grad(i, k) = inv_k * inst.gain(i, k) / y[k];

        // Duality gap: sum_i <grad_i, s_i - p_i> with s the linear argmax.
        CompensatedSum gap_acc;
        for (std::size_t i = 0; i < n; ++i) {
            linear_argmax(inst, i, grad.row(i), vert);
            for (std::size_t k = 0; k < kk; ++k) {
                dir(i, k) = vert[k] - p.p(i, k);
                gap_acc.add(grad(i, k) * dir(i, k));
            }
        }
        const double gap = gap_acc.value();
        if (gap < best_gap) {
            best_gap = gap;
            best_value = detail::potential_given_y(inst, y);
        }
        if (gap <= tol) {
            OptimumCertificate cert;
            cert.p_star = p;
            cert.value = detail::potential_given_y(inst, y);
            cert.gap_bound = std::max(gap, 0.0);
            cert.iterations = t;
            return cert;
        }

        for (std::size_t k = 0; k < kk; ++k) {
            CompensatedSum acc;
            for (std::size_t i = 0; i < n; ++i) acc.add(inst.gain(i, k) * dir(i, k));
            dy[k] = acc.value();
        }
        const double gamma = line_search(y, dy, 1.0, opts.line_search_iters);
        if (gamma > 0.0) {
            for (std::size_t i = 0; i < p.p.size(); ++i) p.p.data()[i] += gamma * dir.data()[i];
            tighten_rows(inst, p.p);
        }

        if (opts.away_steps && !inst.has_mask()) {
            // Pairwise polish: for each user, shift mass from its worst
            // funded channel toward its best channel. Only two aggregate
            // entries change, so the exact line search has a closed form:
            // maximizing ln(y_b + g_b d) + ln(y_w - g_w d) gives
            // d* = (g_b y_w - g_w y_b) / (2 g_b g_w). This kills the
            // vertex zig-zag that caps plain FW at an O(1/t) gap.
            std::vector<double> yk = detail::broadcast_unchecked(inst, p);
            for (std::size_t sweep = 0; sweep < 2; ++sweep) {
                for (std::size_t i = 0; i < n; ++i) {
                    std::size_t best = 0, worst = kk;
                    double best_v = -1.0, worst_v = std::numeric_limits<double>::infinity();
                    for (std::size_t k = 0; k < kk; ++k) {
                        const double gk = inst.gain(i, k) / yk[k];
                        if (gk > best_v) {
                            best_v = gk;
                            best = k;
                        }
                        if (p.p(i, k) > 0.0 && gk < worst_v) {
                            worst_v = gk;
                            worst = k;
                        }
                    }
                    if (worst == kk || worst == best) continue;
                    const double gb = inst.gain(i, best), gw = inst.gain(i, worst);
                    const double d_star = (gb * yk[worst] - gw * yk[best]) / (2.0 * gb * gw);
                    const double d = std::min(std::max(d_star, 0.0), p.p(i, worst));
                    if (d <= 0.0) continue;
                    p.p(i, best) += d;
                    p.p(i, worst) -= d;
                    yk[best] += gb * d;
                    yk[worst] -= gw * d;
                }
            }
            tighten_rows(inst, p.p);
        }
    }
    throw FwConvergenceError("solve_max_potential: gap tolerance not reached within cap",
                             best_gap, best_value);
}

EquilibriumReport verify_ne(const NetworkInstance& inst, const PowerProfile& p,
                            const OptimumCertificate& cert, double tol) {
    check_feasible(inst, p);
    EquilibriumReport rep;
    rep.residual_tol = tol;
    rep.gap_tol = 10.0 * tol;

    // Direct residual ||Phi(p) - p||_inf; a slack profile is never an NE but
    // still gets a meaningful residual this way.
    double res = 0.0;
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        const WaterfillResult wf = best_response(inst, p, i);
        for (std::size_t k = 0; k < inst.n_channels(); ++k)
            res = std::max(res, std::abs(wf.allocation[k] - p.p(i, k)));
    }
    rep.residual_inf = res;
    rep.potential_gap = cert.value - potential(inst, p);
    rep.is_ne = res <= tol;
    rep.gap_ok = rep.potential_gap <= rep.gap_tol;
    rep.tests_disagree = rep.is_ne != rep.gap_ok;
    rep.support = support_sets(inst, p);
    rep.collisions = count_collisions(inst, p);
    return rep;
}

std::string certificate_to_json(const OptimumCertificate& cert) {
    nlohmann::ordered_json j;
    j["value"] = cert.value;
    j["gap_bound"] = cert.gap_bound;
    j["iterations"] = cert.iterations;
    j["p_star"] = cert.p_star.p.data();
    j["n_users"] = cert.p_star.p.rows();
    j["n_channels"] = cert.p_star.p.cols();
    return j.dump(2);
}

std::string report_to_json(const EquilibriumReport& rep) {
    nlohmann::ordered_json j;
    j["residual_inf"] = rep.residual_inf;
    j["potential_gap"] = rep.potential_gap;
    j["is_ne"] = rep.is_ne;
    j["gap_ok"] = rep.gap_ok;
    j["tests_disagree"] = rep.tests_disagree;
    j["residual_tol"] = rep.residual_tol;
    j["gap_tol"] = rep.gap_tol;
    j["support"] = rep.support;
    j["collided_channels"] = rep.collisions.collided_channels;
    j["total_collisions"] = rep.collisions.total_collisions;
    return j.dump(2);
}

InterferenceMatrices interference_matrices(const NetworkInstance& inst) {
    const std::size_t n = inst.n_users();
    InterferenceMatrices out;
    out.h_max = Mat(n, n, 0.0);
    out.per_channel.reserve(inst.n_channels());
    for (std::size_t k = 0; k < inst.n_channels(); ++k) {
        Mat h(n, n, 0.0);
        for (std::size_t q = 0; q < n; ++q)
            for (std::size_t r = 0; r < n; ++r)
                if (r != q) {
                    h(q, r) = inst.gain(r, k) / inst.gain(q, k);
                    out.h_max(q, r) = std::max(out.h_max(q, r), h(q, r));
                }
        out.per_channel.push_back(std::move(h));
    }
    return out;
}

double spectral_radius(const Mat& m, double tol, long max_iters) {
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    const std::size_t n = m.rows();
    for (double v : m.data())
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("spectral_radius: entries must be finite and nonnegative");

    double max_row_sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += m(q, r);
        max_row_sum = std::max(max_row_sum, s);
    }
    // Diagonal shift breaks +/- rho eigenvalue pairs (cyclic matrices) and is
    // removed exactly at the end: rho(M + dI) = rho(M) + d for nonnegative M.
    const double delta = 1e-12 + 0.05 * max_row_sum;

    std::vector<double> x(n, 1.0), mx(n);
    for (long it = 0; it < max_iters; ++it) {
        double ub = 0.0, lb = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < n; ++q) {
            double s = delta * x[q];
            for (std::size_t r = 0; r < n; ++r) s += m(q, r) * x[r];
            mx[q] = s;
            const double ratio = s / x[q];
            ub = std::max(ub, ratio);
            lb = std::min(lb, ratio);
        }
        if (ub - lb <= tol * std::max(1.0, ub)) return 0.5 * (ub + lb) - delta;
        const double norm = *std::max_element(mx.begin(), mx.end());
        for (std::size_t q = 0; q < n; ++q) x[q] = mx[q] / norm;
    }
    throw std::runtime_error("spectral_radius: power iteration did not converge within cap");
}

DiagonalCheckReport diagonal_optimality_check(const NetworkInstance& inst, long grid_steps,
                                              double assert_tol) {
    if (inst.n_channels() != 2 || inst.n_users() > 2)
        throw std::invalid_argument("diagonal_optimality_check: requires K = 2 and N <= 2");
    if (grid_steps < 2) throw std::invalid_argument("diagonal_optimality_check: grid too coarse");
    const std::size_t n = inst.n_users();
    const double n1 = inst.noise(0), n2 = inst.noise(1);
    const double log_det_noise = std::log(n1) + std::log(n2);

    // One user's covariance contributes (g1*s11, g2*s22, sqrt(g1 g2)*s12) to
    // the received matrix; the objective is (1/2) [log det(A) - log det(Nz)].
    struct Cov {
        double a11, a22, a12;
        bool diagonal;
    };
    std::vector<std::vector<Cov>> grids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = inst.budget(i);
        for (long s1 = 0; s1 <= grid_steps; ++s1) {
            for (long s2 = 0; s1 + s2 <= grid_steps; ++s2) {
                const double a = b * static_cast<double>(s1) / static_cast<double>(grid_steps);
                const double c = b * static_cast<double>(s2) / static_cast<double>(grid_steps);
                const double offmax = std::sqrt(a * c);
                for (long j = 0; j <= grid_steps; ++j) {
                    const double rho =
                        -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(grid_steps);
                    if (offmax == 0.0 && j * 2 != grid_steps) continue;  // rho irrelevant
                    grids[i].push_back({a, c, rho * offmax, rho == 0.0});
                }
            }
        }
    }

    const double g11 = inst.gain(0, 0), g12 = inst.gain(0, 1);
    const double cross1 = std::sqrt(g11 * g12);
    DiagonalCheckReport rep;
    rep.grid_steps = grid_steps;
    rep.full_max = -std::numeric_limits<double>::infinity();
    rep.diag_max = -std::numeric_limits<double>::infinity();

    auto consider = [&](double a11, double a22, double a12, bool diagonal) {
        const double det = a11 * a22 - a12 * a12;
        if (det <= 0.0) return;
        const double val = 0.5 * (std::log(det) - log_det_noise);
        rep.full_max = std::max(rep.full_max, val);
        if (diagonal) rep.diag_max = std::max(rep.diag_max, val);
    };

    if (n == 1) {
        for (const Cov& c : grids[0])
            consider(n1 + g11 * c.a11, n2 + g12 * c.a22, cross1 * c.a12, c.diagonal);
    } else {
        const double g21 = inst.gain(1, 0), g22 = inst.gain(1, 1);
        const double cross2 = std::sqrt(g21 * g22);
        for (const Cov& c1 : grids[0])
            for (const Cov& c2 : grids[1])
                consider(n1 + g11 * c1.a11 + g21 * c2.a11, n2 + g12 * c1.a22 + g22 * c2.a22,
                         cross1 * c1.a12 + cross2 * c2.a12, c1.diagonal && c2.diagonal);
    }

    if (rep.diag_max < rep.full_max - assert_tol)
        throw std::logic_error(
            "diagonal_optimality_check: diagonal optimum fell below the full grid optimum");
    return rep;
}

FdmaReport fdma_condition_check(const NetworkInstance& inst, const PowerProfile& p, double tol) {
    check_feasible(inst, p);
    {
        double res = 0.0;
        for (std::size_t i = 0; i < inst.n_users(); ++i) {
            const WaterfillResult wf = best_response(inst, p, i);
            for (std::size_t k = 0; k < inst.n_channels(); ++k)
                res = std::max(res, std::abs(wf.allocation[k] - p.p(i, k)));
        }
        if (res > tol)
            throw std::invalid_argument(
                "fdma_condition_check: profile is not an NE at the given tolerance; water "
                "levels are undefined");
    }

    FdmaReport rep;
    rep.water_level.assign(inst.n_users(), 0.0);
    std::vector<std::vector<double>> user_ipn(inst.n_users());
    for (std::size_t i = 0; i < inst.n_users(); ++i) {
        user_ipn[i] = ipn(inst, p, i);
        // Level recovery: on active channels the water-filling optimality
        // gives level = p_i(k) + ipn_i(k) / g_i(k); the max is robust to the
        // residual tolerance.
        double level = 0.0;
        for (std::size_t k = 0; k < inst.n_channels(); ++k) {
            const double kk = static_cast<double>(inst.n_channels());
            if (p.p(i, k) > 1e-6 * inst.budget(i) / kk)
                level = std::max(level, p.p(i, k) + user_ipn[i][k] / inst.gain(i, k));
        }
        rep.water_level[i] = level;
    }

    const auto sup = support_sets(inst, p);
    for (std::size_t k = 0; k < inst.n_channels(); ++k) {
        FdmaChannelReport cr;
        cr.channel = k;
        cr.support = sup[k];
        if (sup[k].size() == 1) {
            ++rep.solo_channels;
            const std::size_t i = sup[k][0];
            const double lhs = rep.water_level[i] * inst.gain(i, k);
            for (std::size_t j = 0; j < inst.n_users(); ++j) {
                if (j == i) continue;
                if (rep.water_level[j] * inst.gain(j, k) > lhs + tol) {
                    cr.solo_condition_ok = false;
                    break;
                }
            }
            if (cr.solo_condition_ok) ++rep.solo_ok;
        } else if (sup[k].size() > 1) {
            ++rep.shared_channels;
        }
        rep.channels.push_back(std::move(cr));
    }
    return rep;
}

}  // namespace iwfsim
