#pragma once
// Elastic-demand assignment: route flows and O-D demands evolve jointly until
// used routes share equal times and those times match the willingness curve.

#include <string>
#include <vector>

#include "fifotap/network.hpp"
#include "fifotap/static_solver.hpp"

namespace fifotap {

// Truncated-linear inverse demand u(q) = max(0, a - b*q), a > 0, b >= 0.
// b = 0 gives a constant willingness, recovering fixed-demand behavior.
struct DemandFunction {
    double a = 0.0;
    double b = 0.0;
};

double willingness(const DemandFunction& fn, double q);

// Route flows plus the per-O-D demands they must sum to.
struct ElasticState {
    RouteFlows f;
    std::vector<double> q;
};

// Minus-derivatives: the state advances by subtracting delta_tau times these.
struct ElasticRates {
    RouteFlows f;
    std::vector<double> q;
};

// Shape, nonnegativity, and per-O-D conservation sum(f) = q. Throws
// validation_error.
void check_elastic_feasible(const Network& net, const ElasticState& state);

// Demand-scaled rates:
//   -df_k/dtau = q * f_k * (c_k - u),  -dq/dtau = q * (sum_k f_k c_k - q*u).
ElasticRates elastic_rates(const Network& net, const std::vector<DemandFunction>& u,
                           const ElasticState& state);

// The same rates split into a within-O-D term and a demand-matching term:
//   -df_k/dtau = f_k * (S1*c_k - Sc) + q * f_k * (v - u),  S1 = sum f_j,
//   Sc = sum f_j c_j, v = Sc/S1;  -dq/dtau = q^2 * (v - u).
// Equals elastic_rates on feasible states. The within-O-D term sums to zero
// for any f, so the gap sum(f) - q stays bounded in long integrations; the
// integrators use this form.
ElasticRates elastic_rates_split(const Network& net, const std::vector<DemandFunction>& u,
                                 const ElasticState& state);

struct ElasticReport {
    ElasticState state;
    EqKind kind = EqKind::NotConverged;
    std::vector<Witness> witnesses;
    // |v - u(q)| within cost tolerance at every O-D still carrying demand.
    bool demand_matched = false;
    double norm_J = 0.0;  // max of route-rate RMS and demand-rate RMS at the end
    double tau_end = 0.0;
    long steps = 0;
    int perturbations = 0;
    std::string message;
    // f_flat holds the flows of every O-D followed by the demands.
    std::vector<TrajectoryPoint> trajectory;
};

// Euler integration of the split rates with joint (f, q) step halving.
// Stops when both the route-rate RMS and the demand-rate RMS reach tolerance.
// q = 0 is absorbing and such O-D pairs are reported as they are.
ElasticReport solve_elastic(const Network& net, const std::vector<DemandFunction>& u,
                            const ElasticState& state0, const SolverConfig& cfg);

// Alternating scheme: inner fixed-demand find_ue at the current demands, then
// one outer demand step q <- q * (1 - delta_tau * q * (v - u)) with f rescaled
// by the same factor so feasibility is exact. Starts from an equal split.
ElasticReport solve_elastic_nested(const Network& net, const std::vector<DemandFunction>& u,
                                   const std::vector<double>& q0, const SolverConfig& cfg);

// Link-cost integrals minus the demand integrals sum_rs int_0^q u(w) dw;
// non-increasing along the dynamics.
double elastic_objective(const Network& net, const std::vector<DemandFunction>& u,
                         const ElasticState& state);

}  // namespace fifotap
