#pragma once

#include <vector>

namespace fifotap {

// Directed link with a power-law performance function
//   t(x) = t0 * (1 + alpha * (x / cap)^beta).
struct Link {
    int from = -1;
    int to = -1;
    double t0 = 1.0;
    double cap = 1.0;
    double alpha = 0.15;
    int beta = 4;
};

// Ordered chain of link indices connecting one O-D pair.
struct Route {
    std::vector<int> links;
};

struct OdPair {
    int origin = -1;
    int dest = -1;
    double demand = 0.0;
    std::vector<Route> routes;
};

struct Network {
    int n_nodes = 0;
    std::vector<Link> links;
    std::vector<OdPair> od_pairs;

    int route_count(int od) const { return static_cast<int>(od_pairs[od].routes.size()); }
    int total_routes() const {
        int n = 0;
        for (const auto& od : od_pairs) n += static_cast<int>(od.routes.size());
        return n;
    }
};

// Per-O-D, per-route values: flows f, costs c, violations J all share this shape.
using RouteFlows = std::vector<std::vector<double>>;

// Derived quantities at one flow state.
struct AssignmentSnapshot {
    std::vector<double> x;  // link flows
    std::vector<double> t;  // link travel times
    RouteFlows c;           // route costs
    std::vector<double> v;  // per-O-D flow-weighted average cost (0 where no flow)
    RouteFlows J;           // per-route FIFO violations
    double z = 0.0;         // BMW objective
};

// Integer power by repeated multiplication; keeps results independent of libm.
double ipow(double x, int n);

// Structural checks; throws validation_error with the offending field.
void validate_network(const Network& net);

// Flow-vector checks against net: shape, nonnegativity, conservation to
// 1e-9 relative per O-D. Throws validation_error.
void check_feasible(const Network& net, const RouteFlows& f);

RouteFlows zero_flows(const Network& net);

// Equal split of each O-D demand over its routes.
RouteFlows equal_split(const Network& net);

std::vector<double> aggregate_link_flows(const Network& net, const RouteFlows& f);

std::vector<double> link_travel_times(const Network& net, const std::vector<double>& x);

RouteFlows route_costs(const Network& net, const std::vector<double>& t);

// Flow-weighted mean route cost for one O-D pair; throws on q <= 0.
double average_od_time(const std::vector<double>& f_od, const std::vector<double>& c_od,
                       double q);

// Closed-form BMW objective: sum over links of the integral of t(x) from 0 to x_a.
double bmw_objective(const Network& net, const std::vector<double>& x);

// Gradient of the BMW objective in route space; equals the route costs.
RouteFlows bmw_gradient(const Network& net, const RouteFlows& f);

// FIFO violation per route, evaluated in the pairwise form
//   J_k = f_k * (sum_j f_j * c_k - sum_j f_j * c_j)
// whose per-O-D sum is identically zero for any f, so route-flow conservation
// is preserved to roundoff along the dynamics.
RouteFlows fifo_violation(const Network& net, const RouteFlows& f);

// The demand-scaled form J_k = q * f_k * (c_k - v), v = sum f_j c_j / q.
// Agrees with fifo_violation to 1e-9 relative on feasible states; kept for
// cross-checking, not used by the integrators (its per-O-D sum is zero only
// when sum_k f_k equals q exactly, which makes long integrations drift).
RouteFlows fifo_violation_demand_scaled(const Network& net, const RouteFlows& f);

AssignmentSnapshot compute_snapshot(const Network& net, const RouteFlows& f);

}  // namespace fifotap
