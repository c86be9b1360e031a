#include "fifotap/static_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>

#include "fifotap/errors.hpp"
#include "fifotap/log.hpp"

namespace fifotap {

double default_tol_J(const Network& net) {
    double q_total = 0.0;
    for (const auto& od : net.od_pairs) q_total += od.demand;
    double t0_mean = 0.0;
    for (const auto& l : net.links) t0_mean += l.t0;
    t0_mean /= static_cast<double>(net.links.size());
    return 1e-6 * q_total * q_total * t0_mean;
}

const char* to_string(EqKind kind) {
    switch (kind) {
        case EqKind::UE: return "UE";
        case EqKind::PUE: return "PUE";
        default: return "NotConverged";
    }
}

std::vector<int> used_route_counts(const Network& net, const RouteFlows& f,
                                   double zero_flow_eps_rel) {
    std::vector<int> counts(f.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double eps = zero_flow_eps_rel * net.od_pairs[i].demand;
        for (double fk : f[i])
            if (fk > eps) ++counts[i];
    }
    return counts;
}

double convergence_index(const RouteFlows& J, int k_total) {
    if (k_total <= 0) throw validation_error("convergence_index: no used routes");
    double ss = 0.0;
    for (const auto& od : J)
        for (double j : od) ss += j * j;
    return std::sqrt(ss / static_cast<double>(k_total));
}

namespace {

// Applies f - h*J with h halved until the result stays nonnegative.
// Returns the h actually used.
double apply_step(const RouteFlows& f, const RouteFlows& J, double delta_tau,
                  RouteFlows& out) {
    double h = delta_tau;
    const double h_min = 1e-6 * delta_tau;
    out.resize(f.size());
    for (;;) {
        bool ok = true;
        for (std::size_t i = 0; i < f.size() && ok; ++i)
            for (std::size_t k = 0; k < f[i].size(); ++k)
                if (f[i][k] - h * J[i][k] < 0) {
                    ok = false;
                    break;
                }
        if (ok) break;
        h *= 0.5;
        if (h < h_min)
            throw step_underflow_error(
                "euler_step: state pinned against the nonnegativity boundary with outward "
                "drift; could not shrink the step enough");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i].resize(f[i].size());
        for (std::size_t k = 0; k < f[i].size(); ++k)
            out[i][k] = f[i][k] - h * J[i][k] + 0.0;  // + 0.0 normalizes -0
    }
    return h;
}

std::vector<double> flatten(const RouteFlows& f) {
    std::vector<double> flat;
    for (const auto& od : f) flat.insert(flat.end(), od.begin(), od.end());
    return flat;
}

}  // namespace

RouteFlows euler_step(const Network& net, const RouteFlows& f, double delta_tau) {
    if (!(delta_tau > 0)) throw validation_error("euler_step: delta_tau must be positive");
    check_feasible(net, f);
    const RouteFlows J = fifo_violation(net, f);
    RouteFlows next;
    apply_step(f, J, delta_tau, next);
    return next;
}

EquilibriumReport solve_equilibrium(const Network& net, const RouteFlows& f0,
                                    const SolverConfig& cfg) {
    check_feasible(net, f0);
    const double tol = cfg.tol_J >= 0 ? cfg.tol_J : default_tol_J(net);
    const std::vector<int> k_per_od = used_route_counts(net, f0, cfg.zero_flow_eps_rel);
    int k_total = 0;
    for (int k : k_per_od) k_total += k;

    const long nominal_steps =
        std::max(1L, static_cast<long>(std::ceil(cfg.tau_max / cfg.delta_tau - 1e-12)));
    const long cadence = std::max(1L, nominal_steps / std::max(1, cfg.max_trajectory_points));
    const long step_cap = nominal_steps * 64;

    EquilibriumReport rep;
    rep.f = f0;
    double tau = 0.0;
    long step = 0;
    double z_prev = std::numeric_limits<double>::infinity();
    RouteFlows next;

    for (;;) {
        const RouteFlows J = fifo_violation(net, rep.f);
        const double idx = convergence_index(J, k_total);
        const bool done = idx <= tol || tau >= cfg.tau_max - 1e-12 || step >= step_cap;

        if (step % cadence == 0 || done) {
            const double z = bmw_objective(net, aggregate_link_flows(net, rep.f));
            if (z > z_prev + 1e-9 && rep.z_monotone) {
                rep.z_monotone = false;
                rep.message = "objective increased between samples; reduce delta_tau";
                log_info("solve_equilibrium: %s (tau=%g)", rep.message.c_str(), tau);
            }
            z_prev = z;
            rep.trajectory.push_back({tau, flatten(rep.f), z, idx});
        }

        if (done) {
            rep.norm_J = idx;
            rep.tau_end = tau;
            rep.steps = step;
            if (idx <= tol) {
                const Classification cl = scan_witnesses(net, rep.f, cfg);
                rep.kind = cl.kind;
                rep.witnesses = cl.witnesses;
            } else {
                rep.kind = EqKind::NotConverged;
                if (rep.message.empty())
                    rep.message = "tau_max reached before the index met tolerance";
            }
            return rep;
        }

        tau += apply_step(rep.f, J, cfg.delta_tau, next);
        rep.f.swap(next);
        ++step;
    }
}

Classification scan_witnesses(const Network& net, const RouteFlows& f,
                              const SolverConfig& cfg) {
    const AssignmentSnapshot snap = compute_snapshot(net, f);
    Classification cl;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double q = net.od_pairs[i].demand;
        if (!(q > 0)) continue;
        const double eps = cfg.zero_flow_eps_rel * q;
        int donor = -1;
        for (std::size_t k = 0; k < f[i].size(); ++k)
            if (f[i][k] > eps && (donor < 0 || f[i][k] > f[i][donor]))
                donor = static_cast<int>(k);
        if (donor < 0) continue;
        const double v = snap.v[i];
        for (std::size_t k = 0; k < f[i].size(); ++k)
            if (f[i][k] <= eps && snap.c[i][k] < v - cfg.cost_tol_rel * v)
                cl.witnesses.push_back({static_cast<int>(i), static_cast<int>(k), donor});
    }
    cl.kind = cl.witnesses.empty() ? EqKind::UE : EqKind::PUE;
    return cl;
}

Classification classify(const Network& net, const RouteFlows& f, const SolverConfig& cfg) {
    check_feasible(net, f);
    const std::vector<int> k_per_od = used_route_counts(net, f, cfg.zero_flow_eps_rel);
    int k_total = 0;
    for (int k : k_per_od) k_total += k;
    const double tol = cfg.tol_J >= 0 ? cfg.tol_J : default_tol_J(net);
    const double idx =
        k_total > 0 ? convergence_index(fifo_violation(net, f), k_total) : 0.0;
    if (idx > tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "classify: state is not an equilibrium (index %.6g > tol %.6g)",
                      idx, tol);
        throw std::invalid_argument(buf);
    }
    return scan_witnesses(net, f, cfg);
}

RouteFlows perturb(const Network& net, const RouteFlows& f,
                   const std::vector<Witness>& witnesses, double perturb_eps) {
    check_feasible(net, f);
    RouteFlows out = f;
    std::map<int, std::vector<int>> by_od;
    for (const Witness& w : witnesses) by_od[w.od].push_back(w.unused_route);
    for (const auto& [od, targets] : by_od) {
        int donor = 0;
        for (std::size_t k = 1; k < out[od].size(); ++k)
            if (out[od][k] > out[od][donor]) donor = static_cast<int>(k);
        const double need = static_cast<double>(targets.size());
        double eps = perturb_eps;
        while (eps * need >= out[od][donor]) {
            eps *= 0.5;
            if (eps < 1e-6)
                throw step_underflow_error("perturb: donor flow insufficient at od " +
                                           std::to_string(od));
        }
        for (int k : targets) {
            out[od][k] += eps;
            out[od][donor] -= eps;
        }
    }
    return out;
}

EquilibriumReport find_ue(const Network& net, const RouteFlows& f0, const SolverConfig& cfg) {
    EquilibriumReport rep = solve_equilibrium(net, f0, cfg);
    for (int p = 0; p <= cfg.max_perturbations; ++p) {
        if (rep.kind == EqKind::NotConverged) {
            char idx[32];
            std::snprintf(idx, sizeof idx, "%.6g", rep.norm_J);
            throw not_converged_error(std::string("find_ue: solve stalled at tau_max with index ") +
                                      idx);
        }
        rep.perturbations = p;
        if (rep.kind == EqKind::UE) return rep;
        log_debug("find_ue: PUE with %zu witnesses, perturbation %d", rep.witnesses.size(),
                  p + 1);
        const RouteFlows f = perturb(net, rep.f, rep.witnesses, cfg.perturb_eps);
        rep = solve_equilibrium(net, f, cfg);
    }
    throw not_converged_error("find_ue: perturbation limit exceeded");
}

}  // namespace fifotap
