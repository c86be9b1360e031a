#pragma once
// Dynamic assignment over a binned departure horizon: per-bin departure rates
// evolve by the same route-swap dynamics while a point-queue loader turns them
// into cumulative curves and travel times.

#include <string>
#include <vector>

#include "fifotap/rng.hpp"
#include "fifotap/static_solver.hpp"

namespace fifotap {

// Vehicle counts sampled at the simulation instants t_i = i * dts.
using CumulativeCurve = std::vector<double>;

// Per-route, per-bin departure rates; rows are routes, columns are bins.
using BinRates = std::vector<std::vector<double>>;

// Constant free-flow time plus a capacity-bounded exit; vehicles queue
// vertically at the bottleneck.
struct PointQueueLink {
    double fft = 1.0;
    double qc = 1.0;
};

struct DynRoute {
    std::vector<int> links;
};

// Single O-D network of point-queue routes. A route may chain several links,
// but two routes may not share one: each route is loaded independently.
struct DynNetwork {
    std::vector<PointQueueLink> links;
    std::vector<DynRoute> routes;
    double q0 = 0.0;                     // departure demand rate on [0, T0)
    std::vector<double> demand_per_bin;  // overrides q0 when non-empty
};

struct DynConfig {
    double T0 = 1.0;  // departure horizon
    double T = 8.0;   // simulation horizon; every vehicle must arrive by T
    int N = 20;       // departure bins on [0, T0]
    int M = 10;       // simulation substeps per bin
    double delta_tau = 0.05;
    double tol_J = -1.0;  // negative: use default_dyn_tol(net)
    long max_iterations = 100000;
    double zero_rate_eps_rel = 1e-8;
    double cost_tol_rel = 1e-6;
};

// Grid derived from the config: dt = T0/N, dts = dt/M, and instants many
// simulation steps covering [0, T]. Requires T > T0, M > 1, and T/T0 such
// that the step count comes out integral.
struct DynGrid {
    double T0 = 1.0;
    double T = 8.0;
    int N = 20;
    int M = 10;
    double dt = 0.05;
    double dts = 0.005;
    int instants = 1600;  // curves carry instants + 1 samples
};

DynGrid make_grid(const DynConfig& cfg);

void validate_dyn_network(const DynNetwork& net, const DynConfig& cfg);

// Demand rate of bin n, from demand_per_bin when present, else q0.
double bin_demand(const DynNetwork& net, int n);

double default_dyn_tol(const DynNetwork& net);

// Shape, nonnegativity, per-bin conservation sum_k g_k(n) = q(n).
void check_dyn_feasible(const DynNetwork& net, const DynConfig& cfg, const BinRates& g);

// Cumulative departures from per-bin rates, sampled on the simulation grid;
// optionally also returns the rate at each instant.
CumulativeCurve departure_curve(const std::vector<double>& g_bins, const DynGrid& grid,
                                std::vector<double>* rates_out = nullptr);

// Point-queue recursion for one link:
//   F_out(fft + t_{i+1}) = F_out(fft + t_i)
//                        + dt_sim * min{qc, (F_in(t_i) - F_out(fft + t_i))/dt_sim + g_in(t_i)}.
// Throws validation_error on a decreasing input curve or an fft that does not
// align with the simulation grid.
CumulativeCurve load_route(const PointQueueLink& link, const CumulativeCurve& f_in,
                           const std::vector<double>& g_in, double dt_sim);

// All curves along one route: the departure curve, then each link's output
// curve, every link fed by the previous one's outflow rates.
struct RouteLoading {
    CumulativeCurve f_in;
    std::vector<double> rates;
    std::vector<CumulativeCurve> link_out;
    const CumulativeCurve& f_out() const { return link_out.back(); }
};

RouteLoading load_route_chain(const DynNetwork& net, int route,
                              const std::vector<double>& g_bins, const DynGrid& grid);

// Average travel time of the vehicles departing in bin n, read off the area
// between the cumulative curves. The bracketing output instants are located
// by nearest sample value, ties toward the earlier instant. Requires the
// bin's rate to be positive and its vehicles to have arrived by T.
double route_travel_time(const CumulativeCurve& f_in, const CumulativeCurve& f_out,
                         double g_bin, int bin, const DynGrid& grid);

// Arrival delay of one extra vehicle departing at the given instant: walks the
// route's links, exiting each at the first instant past its free-flow time
// where the output curve has reached the vehicle's cumulative index. Returns
// +infinity if the vehicle cannot arrive within the horizon.
double marginal_route_time(const DynNetwork& net, int route, const RouteLoading& loading,
                           int instant, const DynGrid& grid);

// Violation for one bin: J_k = g_k * (S1*c_k - Sc) over routes with rate above
// eps, zero otherwise; S1 and Sc sum the used rates and rate-weighted times.
// Sums to zero over routes for any rates.
std::vector<double> dynamic_fifo_violation(const std::vector<double>& g_bin,
                                           const std::vector<double>& c_bin, double eps);

// Per-bin Euler update with the same negativity step-halving as the static
// solver, applied bin by bin.
BinRates dynamic_euler_step(const BinRates& g, const BinRates& J, double delta_tau);

// RMS of J over routes and bins: sqrt(sum J^2 / (n_bins * k_used)).
double dynamic_convergence_index(const BinRates& J, int n_bins, int k_used);

// Initial profiles. split_profile sends the given share of every bin's demand
// to route 0 and splits the rest evenly; random_profile draws one uniform
// weight per route per bin (bin-major order) and normalizes to the demand.
BinRates split_profile(const DynNetwork& net, const DynConfig& cfg, double first_route_share);
BinRates random_profile(const DynNetwork& net, const DynConfig& cfg, rng& r);

struct DynWitness {
    int bin = -1;
    int route = -1;  // unused route measurably shorter than the bin's used time
};

struct DynReport {
    BinRates g;
    EqKind kind = EqKind::NotConverged;
    std::vector<DynWitness> witnesses;
    double norm_J = 0.0;
    long iterations = 0;
    std::string message;
    std::vector<double> index_history;           // one entry per visited state
    std::vector<RouteLoading> loadings;          // final, per route
    std::vector<std::vector<double>> times;      // final [route][bin], 0 where unused
};

// Loads routes, extracts per-bin times, forms J, and steps the profile until
// the index reaches tolerance or the iteration cap. Classification checks
// every bin for an unused route whose marginal time beats the bin's average.
DynReport solve_dynamic(const DynNetwork& net, const BinRates& g0, const DynConfig& cfg);

}  // namespace fifotap
