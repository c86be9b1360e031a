#pragma once

#include <string>
#include <vector>

#include "fifotap/network.hpp"

namespace fifotap {

struct SolverConfig {
    double delta_tau = 0.0005;
    double tau_max = 0.1;
    double tol_J = -1.0;             // negative: use default_tol_J(net)
    double zero_flow_eps_rel = 1e-8;  // of q_rs; below this a route counts as unused
    double cost_tol_rel = 1e-6;       // of v_rs; margin for "strictly shorter"
    double perturb_eps = 0.05;
    int max_perturbations = 10;
    int max_trajectory_points = 1000;
};

// Convergence threshold when none is configured: 1e-6 * (total demand)^2 * mean t0.
double default_tol_J(const Network& net);

enum class EqKind { UE, PUE, NotConverged };

const char* to_string(EqKind kind);

// An unused route strictly shorter than a used one, per O-D pair. used_route is
// the donor the perturbation will draw from.
struct Witness {
    int od = -1;
    int unused_route = -1;
    int used_route = -1;
};

struct TrajectoryPoint {
    double tau = 0.0;
    std::vector<double> f_flat;  // flows in O-D-major route order
    double z = 0.0;
    double norm_J = 0.0;
};

struct EquilibriumReport {
    RouteFlows f;
    EqKind kind = EqKind::NotConverged;
    std::vector<Witness> witnesses;
    double norm_J = 0.0;
    double tau_end = 0.0;
    long steps = 0;
    int perturbations = 0;
    bool z_monotone = true;  // false if the objective rose by more than 1e-9 between samples
    std::string message;
    std::vector<TrajectoryPoint> trajectory;
};

// Routes carrying more than zero_flow_eps_rel * q_rs, per O-D pair.
std::vector<int> used_route_counts(const Network& net, const RouteFlows& f,
                                   double zero_flow_eps_rel);

// RMS of violations over all routes, normalized by the initially-used route count.
double convergence_index(const RouteFlows& J, int k_total);

// One explicit Euler step f - delta_tau * J(f). If any component would go
// negative the step is halved (down to 1e-6 of nominal) before applying;
// below that, step_underflow_error.
RouteFlows euler_step(const Network& net, const RouteFlows& f, double delta_tau);

// Integrates the dynamics until the convergence index reaches tolerance or the
// decision horizon runs out. Samples (tau, f, z, ||J||) along the way and
// flags any increase of the objective between samples.
EquilibriumReport solve_equilibrium(const Network& net, const RouteFlows& f0,
                                    const SolverConfig& cfg);

struct Classification {
    EqKind kind = EqKind::UE;
    std::vector<Witness> witnesses;
};

// Witness detection alone, for callers that have already established
// convergence by their own index (whose used-route normalization may differ
// from one recomputed at f, since routes can empty out during a solve).
Classification scan_witnesses(const Network& net, const RouteFlows& f,
                              const SolverConfig& cfg);

// UE/PUE decision at an equilibrium: PUE iff some unused route is shorter than
// the common cost of used routes by more than the cost tolerance. Throws
// std::invalid_argument when the state is not an equilibrium.
Classification classify(const Network& net, const RouteFlows& f, const SolverConfig& cfg);

// Shifts perturb_eps from the largest-flow used route to each witness route,
// per O-D pair, halving the shift if the donor cannot cover it.
RouteFlows perturb(const Network& net, const RouteFlows& f,
                   const std::vector<Witness>& witnesses, double perturb_eps);

// Alternates solve_equilibrium and perturb until a UE is reached. Throws
// not_converged_error if a solve stalls or the perturbation budget runs out.
EquilibriumReport find_ue(const Network& net, const RouteFlows& f0, const SolverConfig& cfg);

}  // namespace fifotap
