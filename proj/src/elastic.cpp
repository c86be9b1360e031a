#include "fifotap/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fifotap/errors.hpp"
#include "fifotap/log.hpp"

namespace fifotap {

double willingness(const DemandFunction& fn, double q) {
    return std::max(0.0, fn.a - fn.b * q);
}

void check_elastic_feasible(const Network& net, const ElasticState& state) {
    if (state.q.size() != net.od_pairs.size())
        throw validation_error("elastic state: demand vector size mismatch");
    if (state.f.size() != net.od_pairs.size())
        throw validation_error("elastic state: flow vector size mismatch");
    for (std::size_t i = 0; i < state.q.size(); ++i) {
        const double q = state.q[i];
        if (!(q >= 0) || !std::isfinite(q))
            throw validation_error("elastic state: demand must be finite and nonnegative at od " +
                                   std::to_string(i));
        if (state.f[i].size() != net.od_pairs[i].routes.size())
            throw validation_error("elastic state: route count mismatch at od " +
                                   std::to_string(i));
        double sum = 0.0;
        for (double fk : state.f[i]) {
            if (!(fk >= 0) || !std::isfinite(fk))
                throw validation_error("elastic state: flows must be finite and nonnegative at od " +
                                       std::to_string(i));
            sum += fk;
        }
        if (std::abs(sum - q) > 1e-9 * std::max(q, 1.0))
            throw validation_error("elastic state: flows do not sum to demand at od " +
                                   std::to_string(i));
    }
}

namespace {

void check_demand_fns(const Network& net, const std::vector<DemandFunction>& u) {
    if (u.size() != net.od_pairs.size())
        throw validation_error("demand function count does not match od count");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!(u[i].a > 0) || !(u[i].b >= 0))
            throw validation_error("demand function at od " + std::to_string(i) +
                                   ": require a > 0 and b >= 0");
}

RouteFlows od_costs(const Network& net, const RouteFlows& f) {
    return route_costs(net, link_travel_times(net, aggregate_link_flows(net, f)));
}

}  // namespace

ElasticRates elastic_rates(const Network& net, const std::vector<DemandFunction>& u,
                           const ElasticState& state) {
    check_demand_fns(net, u);
    const RouteFlows c = od_costs(net, state.f);
    ElasticRates rates;
    rates.f.resize(state.f.size());
    rates.q.resize(state.q.size());
    for (std::size_t i = 0; i < state.f.size(); ++i) {
        const double q = state.q[i];
        const double ui = willingness(u[i], q);
        double sc = 0.0;
        rates.f[i].resize(state.f[i].size());
        for (std::size_t k = 0; k < state.f[i].size(); ++k) {
            rates.f[i][k] = q * state.f[i][k] * (c[i][k] - ui);
            sc += state.f[i][k] * c[i][k];
        }
        rates.q[i] = q * (sc - q * ui);
    }
    return rates;
}

ElasticRates elastic_rates_split(const Network& net, const std::vector<DemandFunction>& u,
                                 const ElasticState& state) {
    check_demand_fns(net, u);
    const RouteFlows c = od_costs(net, state.f);
    ElasticRates rates;
    rates.f.resize(state.f.size());
    rates.q.resize(state.q.size());
    for (std::size_t i = 0; i < state.f.size(); ++i) {
        const double q = state.q[i];
        const double ui = willingness(u[i], q);
        double s1 = 0.0, sc = 0.0;
        for (std::size_t k = 0; k < state.f[i].size(); ++k) {
            s1 += state.f[i][k];
            sc += state.f[i][k] * c[i][k];
        }
        const double v = s1 > 0 ? sc / s1 : 0.0;
        rates.f[i].resize(state.f[i].size());
        for (std::size_t k = 0; k < state.f[i].size(); ++k)
            rates.f[i][k] = state.f[i][k] * (s1 * c[i][k] - sc) +
                            q * state.f[i][k] * (v - ui);
        rates.q[i] = q * q * (v - ui);
    }
    return rates;
}

double elastic_objective(const Network& net, const std::vector<DemandFunction>& u,
                         const ElasticState& state) {
    check_demand_fns(net, u);
    double z = bmw_objective(net, aggregate_link_flows(net, state.f));
    for (std::size_t i = 0; i < state.q.size(); ++i) {
        const double a = u[i].a, b = u[i].b, q = state.q[i];
        if (b > 0 && q >= a / b)
            z -= a * a / (2.0 * b);
        else
            z -= a * q - 0.5 * b * q * q;
    }
    return z;
}

namespace {

double default_tol_from(const Network& net, const std::vector<double>& q) {
    double q_total = 0.0;
    for (double qi : q) q_total += qi;
    double t0_mean = 0.0;
    for (const auto& l : net.links) t0_mean += l.t0;
    t0_mean /= static_cast<double>(net.links.size());
    return 1e-6 * q_total * q_total * t0_mean;
}

double demand_rms(const std::vector<double>& jq) {
    double ss = 0.0;
    for (double j : jq) ss += j * j;
    return std::sqrt(ss / static_cast<double>(jq.size()));
}

std::vector<double> flatten_state(const ElasticState& s) {
    std::vector<double> flat;
    for (const auto& od : s.f) flat.insert(flat.end(), od.begin(), od.end());
    flat.insert(flat.end(), s.q.begin(), s.q.end());
    return flat;
}

// Finishing pass shared by both schemes: route classification at the reached
// demands plus the demand-matching condition.
void finish_report(const Network& net, const std::vector<DemandFunction>& u,
                   const std::vector<double>& q0, const SolverConfig& cfg,
                   ElasticReport& rep) {
    Network net_q = net;
    for (std::size_t i = 0; i < rep.state.q.size(); ++i)
        net_q.od_pairs[i].demand = rep.state.q[i];
    const Classification cl = scan_witnesses(net_q, rep.state.f, cfg);
    rep.kind = cl.kind;
    rep.witnesses = cl.witnesses;
    rep.demand_matched = true;
    const AssignmentSnapshot snap = compute_snapshot(net_q, rep.state.f);
    for (std::size_t i = 0; i < rep.state.q.size(); ++i) {
        if (rep.state.q[i] <= cfg.zero_flow_eps_rel * std::max(q0[i], 1.0)) continue;
        const double ui = willingness(u[i], rep.state.q[i]);
        if (std::abs(snap.v[i] - ui) > cfg.cost_tol_rel * std::max(snap.v[i], 1.0)) {
            rep.demand_matched = false;
            break;
        }
    }
}

}  // namespace

ElasticReport solve_elastic(const Network& net, const std::vector<DemandFunction>& u,
                            const ElasticState& state0, const SolverConfig& cfg) {
    check_elastic_feasible(net, state0);
    check_demand_fns(net, u);
    const double tol = cfg.tol_J >= 0 ? cfg.tol_J : default_tol_from(net, state0.q);

    Network net_q0 = net;
    for (std::size_t i = 0; i < state0.q.size(); ++i)
        net_q0.od_pairs[i].demand = state0.q[i];
    const std::vector<int> k_per_od = used_route_counts(net_q0, state0.f, cfg.zero_flow_eps_rel);
    int k_total = 0;
    for (int k : k_per_od) k_total += k;

    const long nominal_steps =
        std::max(1L, static_cast<long>(std::ceil(cfg.tau_max / cfg.delta_tau - 1e-12)));
    const long cadence = std::max(1L, nominal_steps / std::max(1, cfg.max_trajectory_points));
    const long step_cap = nominal_steps * 64;

    ElasticReport rep;
    rep.state = state0;
    double tau = 0.0;
    long step = 0;
    double z_prev = std::numeric_limits<double>::infinity();
    bool z_monotone = true;

    for (;;) {
        const ElasticRates rates = elastic_rates_split(net, u, rep.state);
        const double route_rms = convergence_index(rates.f, std::max(k_total, 1));
        const double q_rms = demand_rms(rates.q);
        const double idx = std::max(route_rms, q_rms);
        const bool done = idx <= tol || tau >= cfg.tau_max - 1e-12 || step >= step_cap;

        if (step % cadence == 0 || done) {
            const double z = elastic_objective(net, u, rep.state);
            if (z > z_prev + 1e-9 && z_monotone) {
                z_monotone = false;
                rep.message = "objective increased between samples; reduce delta_tau";
                log_info("solve_elastic: %s (tau=%g)", rep.message.c_str(), tau);
            }
            z_prev = z;
            rep.trajectory.push_back({tau, flatten_state(rep.state), z, idx});
        }

        if (done) {
            rep.norm_J = idx;
            rep.tau_end = tau;
            rep.steps = step;
            if (idx <= tol) {
                finish_report(net, u, state0.q, cfg, rep);
            } else {
                rep.kind = EqKind::NotConverged;
                if (rep.message.empty())
                    rep.message = "tau_max reached before the rates met tolerance";
            }
            return rep;
        }

        double h = cfg.delta_tau;
        const double h_min = 1e-6 * cfg.delta_tau;
        for (;;) {
            bool ok = true;
            for (std::size_t i = 0; i < rep.state.q.size() && ok; ++i) {
                if (rep.state.q[i] - h * rates.q[i] < 0) ok = false;
                for (std::size_t k = 0; k < rep.state.f[i].size() && ok; ++k)
                    if (rep.state.f[i][k] - h * rates.f[i][k] < 0) ok = false;
            }
            if (ok) break;
            h *= 0.5;
            if (h < h_min)
                throw step_underflow_error(
                    "solve_elastic: state pinned against the nonnegativity boundary");
        }
        for (std::size_t i = 0; i < rep.state.q.size(); ++i) {
            rep.state.q[i] = rep.state.q[i] - h * rates.q[i] + 0.0;
            for (std::size_t k = 0; k < rep.state.f[i].size(); ++k)
                rep.state.f[i][k] = rep.state.f[i][k] - h * rates.f[i][k] + 0.0;
        }
        tau += h;
        ++step;
    }
}

ElasticReport solve_elastic_nested(const Network& net, const std::vector<DemandFunction>& u,
                                   const std::vector<double>& q0, const SolverConfig& cfg) {
    check_demand_fns(net, u);
    if (q0.size() != net.od_pairs.size())
        throw validation_error("solve_elastic_nested: demand vector size mismatch");
    for (double q : q0)
        if (!(q > 0))
            throw validation_error("solve_elastic_nested: initial demands must be positive");
    const double tol = cfg.tol_J >= 0 ? cfg.tol_J : default_tol_from(net, q0);

    const long nominal_steps =
        std::max(1L, static_cast<long>(std::ceil(cfg.tau_max / cfg.delta_tau - 1e-12)));
    const long cadence = std::max(1L, nominal_steps / std::max(1, cfg.max_trajectory_points));

    ElasticReport rep;
    rep.state.q = q0;
    Network net_q = net;
    for (std::size_t i = 0; i < q0.size(); ++i) net_q.od_pairs[i].demand = q0[i];
    rep.state.f = equal_split(net_q);

    double tau = 0.0;
    std::vector<double> jq(q0.size(), 0.0);

    for (long step = 0;; ++step) {
        for (std::size_t i = 0; i < rep.state.q.size(); ++i)
            net_q.od_pairs[i].demand = rep.state.q[i];
        const EquilibriumReport inner = find_ue(net_q, rep.state.f, cfg);
        rep.state.f = inner.f;
        rep.perturbations += inner.perturbations;

        const AssignmentSnapshot snap = compute_snapshot(net_q, rep.state.f);
        for (std::size_t i = 0; i < rep.state.q.size(); ++i) {
            const double q = rep.state.q[i];
            jq[i] = q * q * (snap.v[i] - willingness(u[i], q));
        }
        const double idx = demand_rms(jq);
        const bool done = idx <= tol || step >= nominal_steps;

        if (step % cadence == 0 || done)
            rep.trajectory.push_back(
                {tau, flatten_state(rep.state), elastic_objective(net, u, rep.state), idx});

        if (done) {
            rep.norm_J = idx;
            rep.tau_end = tau;
            rep.steps = step;
            if (idx <= tol) {
                finish_report(net, u, q0, cfg, rep);
            } else {
                rep.kind = EqKind::NotConverged;
                rep.message = "tau_max reached before the demand update settled";
            }
            return rep;
        }

        double h = cfg.delta_tau;
        const double h_min = 1e-6 * cfg.delta_tau;
        for (;;) {
            bool ok = true;
            for (std::size_t i = 0; i < rep.state.q.size(); ++i)
                if (rep.state.q[i] - h * jq[i] < 0) {
                    ok = false;
                    break;
                }
            if (ok) break;
            h *= 0.5;
            if (h < h_min)
                throw step_underflow_error("solve_elastic_nested: demand step underflow");
        }
        for (std::size_t i = 0; i < rep.state.q.size(); ++i) {
            const double q = rep.state.q[i];
            const double factor = q > 0 ? (q - h * jq[i]) / q : 1.0;
            rep.state.q[i] = q * factor;
            for (double& fk : rep.state.f[i]) fk *= factor;
        }
        tau += h;
    }
}

}  // namespace fifotap
