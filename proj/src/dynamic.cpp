#include "fifotap/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fifotap/errors.hpp"
#include "fifotap/log.hpp"

namespace fifotap {

DynGrid make_grid(const DynConfig& cfg) {
    if (!(cfg.T0 > 0)) throw validation_error("dynamic config: T0 must be positive");
    if (!(cfg.T > cfg.T0)) throw validation_error("dynamic config: T must exceed T0");
    if (cfg.N < 1) throw validation_error("dynamic config: N must be at least 1");
    if (cfg.M < 2) throw validation_error("dynamic config: M must be at least 2");
    if (!(cfg.delta_tau > 0))
        throw validation_error("dynamic config: delta_tau must be positive");
    DynGrid g;
    g.T0 = cfg.T0;
    g.T = cfg.T;
    g.N = cfg.N;
    g.M = cfg.M;
    g.dt = cfg.T0 / cfg.N;
    g.dts = g.dt / cfg.M;
    const double count = cfg.T / g.dts;
    g.instants = static_cast<int>(std::llround(count));
    if (std::abs(count - g.instants) > 1e-9 * std::max(count, 1.0))
        throw validation_error("dynamic config: T must be a whole number of simulation steps");
    return g;
}

double bin_demand(const DynNetwork& net, int n) {
    if (!net.demand_per_bin.empty()) return net.demand_per_bin[static_cast<std::size_t>(n)];
    return net.q0;
}

void validate_dyn_network(const DynNetwork& net, const DynConfig& cfg) {
    const DynGrid grid = make_grid(cfg);
    if (net.links.empty()) throw validation_error("dynamic network: no links");
    if (net.routes.empty()) throw validation_error("dynamic network: no routes");
    for (std::size_t a = 0; a < net.links.size(); ++a) {
        if (!(net.links[a].fft >= 0) || !std::isfinite(net.links[a].fft))
            throw validation_error("dynamic link " + std::to_string(a) +
                                   ": free-flow time must be finite and nonnegative");
        if (!(net.links[a].qc > 0))
            throw validation_error("dynamic link " + std::to_string(a) +
                                   ": capacity must be positive");
        const double steps = net.links[a].fft / grid.dts;
        if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(steps, 1.0))
            throw validation_error("dynamic link " + std::to_string(a) +
                                   ": free-flow time must align with the simulation grid");
    }
    std::vector<int> uses(net.links.size(), 0);
    for (std::size_t k = 0; k < net.routes.size(); ++k) {
        if (net.routes[k].links.empty())
            throw validation_error("dynamic route " + std::to_string(k) + ": no links");
        for (int a : net.routes[k].links) {
            if (a < 0 || a >= static_cast<int>(net.links.size()))
                throw validation_error("dynamic route " + std::to_string(k) +
                                       ": link id out of range");
            if (++uses[static_cast<std::size_t>(a)] > 1)
                throw validation_error("dynamic route " + std::to_string(k) +
                                       ": link shared between routes; independent loading "
                                       "requires disjoint routes");
        }
    }
    if (net.demand_per_bin.empty()) {
        if (!(net.q0 > 0)) throw validation_error("dynamic network: q0 must be positive");
    } else {
        if (net.demand_per_bin.size() != static_cast<std::size_t>(cfg.N))
            throw validation_error("dynamic network: demand_per_bin must have N entries");
        for (double q : net.demand_per_bin)
            if (!(q >= 0) || !std::isfinite(q))
                throw validation_error("dynamic network: bin demands must be finite and "
                                       "nonnegative");
    }
}

double default_dyn_tol(const DynNetwork& net) {
    double q_ref = net.q0;
    for (double q : net.demand_per_bin) q_ref = std::max(q_ref, q);
    double fft_mean = 0.0;
    for (const auto& l : net.links) fft_mean += l.fft;
    fft_mean /= static_cast<double>(net.links.size());
    return 1e-6 * q_ref * q_ref * std::max(fft_mean, 1e-12);
}

void check_dyn_feasible(const DynNetwork& net, const DynConfig& cfg, const BinRates& g) {
    if (g.size() != net.routes.size())
        throw validation_error("departure profile: route count mismatch");
    for (const auto& row : g)
        if (row.size() != static_cast<std::size_t>(cfg.N))
            throw validation_error("departure profile: bin count mismatch");
    for (int n = 0; n < cfg.N; ++n) {
        const double q = bin_demand(net, n);
        double sum = 0.0;
        for (const auto& row : g) {
            const double gk = row[static_cast<std::size_t>(n)];
            if (!(gk >= 0) || !std::isfinite(gk))
                throw validation_error("departure profile: rates must be finite and "
                                       "nonnegative (bin " + std::to_string(n) + ")");
            sum += gk;
        }
        if (std::abs(sum - q) > 1e-9 * std::max(q, 1.0))
            throw validation_error("departure profile: rates do not sum to the demand of bin " +
                                   std::to_string(n));
    }
}

CumulativeCurve departure_curve(const std::vector<double>& g_bins, const DynGrid& grid,
                                std::vector<double>* rates_out) {
    const int I = grid.instants;
    const int departing = grid.N * grid.M;  // instants inside [0, T0)
    CumulativeCurve F(static_cast<std::size_t>(I) + 1, 0.0);
    if (rates_out) rates_out->assign(static_cast<std::size_t>(I), 0.0);
    for (int i = 0; i < I; ++i) {
        const double r = i < departing ? g_bins[static_cast<std::size_t>(i / grid.M)] : 0.0;
        if (rates_out) (*rates_out)[static_cast<std::size_t>(i)] = r;
        F[static_cast<std::size_t>(i) + 1] = F[static_cast<std::size_t>(i)] + grid.dts * r;
    }
    return F;
}

CumulativeCurve load_route(const PointQueueLink& link, const CumulativeCurve& f_in,
                           const std::vector<double>& g_in, double dt_sim) {
    if (f_in.size() < 2 || g_in.size() + 1 != f_in.size())
        throw validation_error("load_route: curve and rate sizes disagree");
    const int I = static_cast<int>(g_in.size());
    for (int i = 0; i < I; ++i)
        if (f_in[static_cast<std::size_t>(i) + 1] <
            f_in[static_cast<std::size_t>(i)] - 1e-12)
            throw validation_error("load_route: decreasing input curve");
    const double shift = link.fft / dt_sim;
    const int i0 = static_cast<int>(std::llround(shift));
    if (std::abs(shift - i0) > 1e-9 * std::max(shift, 1.0))
        throw validation_error("load_route: free-flow time must align with the simulation grid");

    CumulativeCurve F(f_in.size(), 0.0);
    for (int i = 0; i + i0 + 1 <= I; ++i) {
        const std::size_t j = static_cast<std::size_t>(i + i0);
        const double demand =
            (f_in[static_cast<std::size_t>(i)] - F[j]) / dt_sim + g_in[static_cast<std::size_t>(i)];
        F[j + 1] = F[j] + dt_sim * std::min(link.qc, demand);
    }
    return F;
}

RouteLoading load_route_chain(const DynNetwork& net, int route,
                              const std::vector<double>& g_bins, const DynGrid& grid) {
    RouteLoading out;
    out.f_in = departure_curve(g_bins, grid, &out.rates);
    const CumulativeCurve* cur = &out.f_in;
    std::vector<double> rates = out.rates;
    for (int a : net.routes[static_cast<std::size_t>(route)].links) {
        out.link_out.push_back(
            load_route(net.links[static_cast<std::size_t>(a)], *cur, rates, grid.dts));
        cur = &out.link_out.back();
        for (std::size_t i = 0; i + 1 < cur->size(); ++i)
            rates[i] = ((*cur)[i + 1] - (*cur)[i]) / grid.dts;
    }
    return out;
}

namespace {

// Earliest sample of F closest in value to target.
int nearest_sample(const CumulativeCurve& F, double target) {
    int best = 0;
    double best_d = std::abs(F[0] - target);
    for (std::size_t i = 1; i < F.size(); ++i) {
        const double d = std::abs(F[i] - target);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace

double route_travel_time(const CumulativeCurve& f_in, const CumulativeCurve& f_out,
                         double g_bin, int bin, const DynGrid& grid) {
    if (!(g_bin > 0)) throw validation_error("route_travel_time: zero-rate bin");
    const std::size_t a0 = static_cast<std::size_t>(bin) * grid.M;
    const std::size_t a1 = a0 + static_cast<std::size_t>(grid.M);
    const double A0 = f_in[a0];
    const double A1 = f_in[a1];
    if (A1 > f_out.back() + 1e-9 * std::max(A1, 1.0))
        throw validation_error("route_travel_time: vehicles departing in bin " +
                               std::to_string(bin) + " have not arrived by the horizon");
    const int m0 = nearest_sample(f_out, A0);
    const int m1 = nearest_sample(f_out, A1);
    double area = (A1 - A0) * (static_cast<double>(m1) / grid.M - bin - 0.5) * grid.dt;
    double s = 0.0;
    for (int i = m0 + 1; i <= m1; ++i)
        s += (f_out[static_cast<std::size_t>(i)] - f_out[static_cast<std::size_t>(m0)]) *
             grid.dts;
    area -= s;
    area += (f_out[static_cast<std::size_t>(m1)] - f_out[static_cast<std::size_t>(m0)]) *
            grid.dts / 2.0;
    return area / (g_bin * grid.dt);
}

double marginal_route_time(const DynNetwork& net, int route, const RouteLoading& loading,
                           int instant, const DynGrid& grid) {
    const double val = loading.f_in[static_cast<std::size_t>(instant)];
    int at = instant;
    const auto& links = net.routes[static_cast<std::size_t>(route)].links;
    for (std::size_t l = 0; l < links.size(); ++l) {
        const PointQueueLink& link = net.links[static_cast<std::size_t>(links[l])];
        const int i0 = static_cast<int>(std::llround(link.fft / grid.dts));
        const CumulativeCurve& F = loading.link_out[l];
        int exit = -1;
        for (int j = at + i0; j <= grid.instants; ++j)
            if (F[static_cast<std::size_t>(j)] >= val - 1e-12) {
                exit = j;
                break;
            }
        if (exit < 0) return std::numeric_limits<double>::infinity();
        at = exit;
    }
    return (at - instant) * grid.dts;
}

std::vector<double> dynamic_fifo_violation(const std::vector<double>& g_bin,
                                           const std::vector<double>& c_bin, double eps) {
    double s1 = 0.0, sc = 0.0;
    for (std::size_t k = 0; k < g_bin.size(); ++k)
        if (g_bin[k] > eps) {
            s1 += g_bin[k];
            sc += g_bin[k] * c_bin[k];
        }
    std::vector<double> J(g_bin.size(), 0.0);
    for (std::size_t k = 0; k < g_bin.size(); ++k)
        if (g_bin[k] > eps) J[k] = g_bin[k] * (s1 * c_bin[k] - sc);
    return J;
}

BinRates dynamic_euler_step(const BinRates& g, const BinRates& J, double delta_tau) {
    if (!(delta_tau > 0))
        throw validation_error("dynamic_euler_step: delta_tau must be positive");
    BinRates out = g;
    const std::size_t n_bins = g.empty() ? 0 : g[0].size();
    for (std::size_t n = 0; n < n_bins; ++n) {
        double h = delta_tau;
        const double h_min = 1e-6 * delta_tau;
        for (;;) {
            bool ok = true;
            for (std::size_t k = 0; k < g.size(); ++k)
                if (g[k][n] - h * J[k][n] < 0) {
                    ok = false;
                    break;
                }
            if (ok) break;
            h *= 0.5;
            if (h < h_min)
                throw step_underflow_error("dynamic_euler_step: bin " + std::to_string(n) +
                                           " pinned against the nonnegativity boundary");
        }
        for (std::size_t k = 0; k < g.size(); ++k) out[k][n] = g[k][n] - h * J[k][n] + 0.0;
    }
    return out;
}

double dynamic_convergence_index(const BinRates& J, int n_bins, int k_used) {
    if (n_bins <= 0 || k_used <= 0)
        throw validation_error("dynamic_convergence_index: empty route or bin set");
    double ss = 0.0;
    for (const auto& row : J)
        for (double j : row) ss += j * j;
    return std::sqrt(ss / (static_cast<double>(n_bins) * k_used));
}

BinRates split_profile(const DynNetwork& net, const DynConfig& cfg, double first_route_share) {
    if (!(first_route_share >= 0) || !(first_route_share <= 1))
        throw validation_error("split_profile: share must lie in [0, 1]");
    const std::size_t R = net.routes.size();
    BinRates g(R, std::vector<double>(static_cast<std::size_t>(cfg.N), 0.0));
    for (int n = 0; n < cfg.N; ++n) {
        const double q = bin_demand(net, n);
        g[0][static_cast<std::size_t>(n)] = first_route_share * q;
        for (std::size_t k = 1; k < R; ++k)
            g[k][static_cast<std::size_t>(n)] =
                (1.0 - first_route_share) * q / static_cast<double>(R - 1);
    }
    return g;
}

BinRates random_profile(const DynNetwork& net, const DynConfig& cfg, rng& r) {
    const std::size_t R = net.routes.size();
    BinRates g(R, std::vector<double>(static_cast<std::size_t>(cfg.N), 0.0));
    std::vector<double> w(R);
    for (int n = 0; n < cfg.N; ++n) {
        double sum = 0.0;
        for (std::size_t k = 0; k < R; ++k) {
            w[k] = r.uniform();
            sum += w[k];
        }
        const double q = bin_demand(net, n);
        for (std::size_t k = 0; k < R; ++k)
            g[k][static_cast<std::size_t>(n)] =
                sum > 0 ? q * w[k] / sum : q / static_cast<double>(R);
    }
    return g;
}

DynReport solve_dynamic(const DynNetwork& net, const BinRates& g0, const DynConfig& cfg) {
    validate_dyn_network(net, cfg);
    const DynGrid grid = make_grid(cfg);
    check_dyn_feasible(net, cfg, g0);

    double q_ref = net.q0;
    for (double q : net.demand_per_bin) q_ref = std::max(q_ref, q);
    const double eps = cfg.zero_rate_eps_rel * q_ref;
    const double tol = cfg.tol_J >= 0 ? cfg.tol_J : default_dyn_tol(net);

    const std::size_t R = net.routes.size();
    int k_used = 0;
    for (std::size_t k = 0; k < R; ++k) {
        bool any = false;
        for (double gk : g0[k])
            if (gk > eps) {
                any = true;
                break;
            }
        if (any) ++k_used;
    }
    if (k_used == 0) throw validation_error("solve_dynamic: no route carries flow");

    DynReport rep;
    rep.g = g0;
    rep.times.assign(R, std::vector<double>(static_cast<std::size_t>(cfg.N), 0.0));
    std::vector<double> g_bin(R), c_bin(R);
    BinRates J(R, std::vector<double>(static_cast<std::size_t>(cfg.N), 0.0));

    for (long iter = 0;; ++iter) {
        rep.loadings.clear();
        rep.loadings.reserve(R);
        for (std::size_t k = 0; k < R; ++k)
            rep.loadings.push_back(load_route_chain(net, static_cast<int>(k), rep.g[k], grid));

        for (std::size_t k = 0; k < R; ++k)
            for (int n = 0; n < cfg.N; ++n) {
                const double gk = rep.g[k][static_cast<std::size_t>(n)];
                rep.times[k][static_cast<std::size_t>(n)] =
                    gk > eps ? route_travel_time(rep.loadings[k].f_in, rep.loadings[k].f_out(),
                                                 gk, n, grid)
                             : 0.0;
            }

        for (int n = 0; n < cfg.N; ++n) {
            for (std::size_t k = 0; k < R; ++k) {
                g_bin[k] = rep.g[k][static_cast<std::size_t>(n)];
                c_bin[k] = rep.times[k][static_cast<std::size_t>(n)];
            }
            const std::vector<double> Jn = dynamic_fifo_violation(g_bin, c_bin, eps);
            for (std::size_t k = 0; k < R; ++k) J[k][static_cast<std::size_t>(n)] = Jn[k];
        }

        const double idx = dynamic_convergence_index(J, cfg.N, k_used);
        rep.index_history.push_back(idx);

        if (idx <= tol || iter >= cfg.max_iterations) {
            rep.norm_J = idx;
            rep.iterations = iter;
            if (idx <= tol) {
                for (int n = 0; n < cfg.N; ++n) {
                    double s1 = 0.0, sc = 0.0;
                    for (std::size_t k = 0; k < R; ++k) {
                        const double gk = rep.g[k][static_cast<std::size_t>(n)];
                        if (gk > eps) {
                            s1 += gk;
                            sc += gk * rep.times[k][static_cast<std::size_t>(n)];
                        }
                    }
                    if (!(s1 > 0)) continue;
                    const double v = sc / s1;
                    for (std::size_t k = 0; k < R; ++k) {
                        if (rep.g[k][static_cast<std::size_t>(n)] > eps) continue;
                        const double m = marginal_route_time(net, static_cast<int>(k),
                                                             rep.loadings[k], n * grid.M, grid);
                        if (m < v * (1.0 - cfg.cost_tol_rel))
                            rep.witnesses.push_back({n, static_cast<int>(k)});
                    }
                }
                rep.kind = rep.witnesses.empty() ? EqKind::UE : EqKind::PUE;
            } else {
                rep.kind = EqKind::NotConverged;
                rep.message = "iteration cap reached before the index met tolerance";
            }
            log_info("solve_dynamic: %s after %ld iterations, index %g", to_string(rep.kind),
                     rep.iterations, rep.norm_J);
            return rep;
        }

        rep.g = dynamic_euler_step(rep.g, J, cfg.delta_tau);
    }
}

}  // namespace fifotap
