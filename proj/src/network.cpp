#include "fifotap/network.hpp"

#include <cmath>
#include <string>

#include "fifotap/errors.hpp"

namespace fifotap {

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

void validate_network(const Network& net) {
    if (net.n_nodes <= 0) throw validation_error("network: n_nodes must be positive");
    for (std::size_t a = 0; a < net.links.size(); ++a) {
        const Link& l = net.links[a];
        const std::string where = "link " + std::to_string(a);
        if (l.from < 0 || l.from >= net.n_nodes || l.to < 0 || l.to >= net.n_nodes)
            throw validation_error(where + ": endpoint node out of range");
        if (!(l.t0 > 0)) throw validation_error(where + ": free_flow_time must be > 0");
        if (!(l.cap > 0)) throw validation_error(where + ": capacity must be > 0");
        if (l.alpha < 0) throw validation_error(where + ": alpha must be >= 0");
        if (l.beta < 1) throw validation_error(where + ": beta must be >= 1");
    }
    if (net.od_pairs.empty()) throw validation_error("network: no O-D pairs");
    for (std::size_t i = 0; i < net.od_pairs.size(); ++i) {
        const OdPair& od = net.od_pairs[i];
        const std::string where = "od " + std::to_string(i);
        if (od.origin < 0 || od.origin >= net.n_nodes || od.dest < 0 || od.dest >= net.n_nodes)
            throw validation_error(where + ": endpoint node out of range");
        if (od.demand < 0) throw validation_error(where + ": negative demand");
        if (od.routes.empty()) throw validation_error(where + ": O-D pair has no routes");
        for (std::size_t k = 0; k < od.routes.size(); ++k) {
            const Route& r = od.routes[k];
            const std::string rw = where + " route " + std::to_string(k);
            if (r.links.empty()) throw validation_error(rw + ": empty link list");
            int at = od.origin;
            for (int a : r.links) {
                if (a < 0 || a >= static_cast<int>(net.links.size()))
                    throw validation_error(rw + ": link id out of range");
                if (net.links[a].from != at)
                    throw validation_error(rw + ": consecutive links are not adjacent");
                at = net.links[a].to;
            }
            if (at != od.dest) throw validation_error(rw + ": route does not end at destination");
        }
    }
}

void check_feasible(const Network& net, const RouteFlows& f) {
    if (f.size() != net.od_pairs.size())
        throw validation_error("flows: O-D dimension mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double q = net.od_pairs[i].demand;
        if (f[i].size() != net.od_pairs[i].routes.size())
            throw validation_error("flows: route dimension mismatch at od " + std::to_string(i));
        double sum = 0.0;
        for (double fk : f[i]) {
            if (fk < 0) throw validation_error("flows: negative flow at od " + std::to_string(i));
            sum += fk;
        }
        const double tol = 1e-9 * (q > 0 ? q : 1.0);
        if (std::abs(sum - q) > tol)
            throw validation_error("flows: conservation violated at od " + std::to_string(i));
    }
}

RouteFlows zero_flows(const Network& net) {
    RouteFlows f(net.od_pairs.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i].assign(net.od_pairs[i].routes.size(), 0.0);
    return f;
}

RouteFlows equal_split(const Network& net) {
    RouteFlows f = zero_flows(net);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double share = net.od_pairs[i].demand / static_cast<double>(f[i].size());
        for (double& fk : f[i]) fk = share;
    }
    return f;
}

std::vector<double> aggregate_link_flows(const Network& net, const RouteFlows& f) {
    if (f.size() != net.od_pairs.size())
        throw validation_error("aggregate_link_flows: O-D dimension mismatch");
    std::vector<double> x(net.links.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i].size() != net.od_pairs[i].routes.size())
            throw validation_error("aggregate_link_flows: route dimension mismatch");
        for (std::size_t k = 0; k < f[i].size(); ++k)
            for (int a : net.od_pairs[i].routes[k].links) x[a] += f[i][k];
    }
    return x;
}

std::vector<double> link_travel_times(const Network& net, const std::vector<double>& x) {
    std::vector<double> t(net.links.size());
    for (std::size_t a = 0; a < net.links.size(); ++a) {
        if (x[a] < 0) throw validation_error("link_travel_times: negative link flow");
        const Link& l = net.links[a];
        t[a] = l.t0 * (1.0 + l.alpha * ipow(x[a] / l.cap, l.beta));
    }
    return t;
}

RouteFlows route_costs(const Network& net, const std::vector<double>& t) {
    RouteFlows c(net.od_pairs.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i].resize(net.od_pairs[i].routes.size());
        for (std::size_t k = 0; k < c[i].size(); ++k) {
            double ck = 0.0;
            for (int a : net.od_pairs[i].routes[k].links) ck += t[a];
            c[i][k] = ck;
        }
    }
    return c;
}

double average_od_time(const std::vector<double>& f_od, const std::vector<double>& c_od,
                       double q) {
    if (!(q > 0)) throw validation_error("average_od_time: q must be positive");
    double sc = 0.0;
    for (std::size_t k = 0; k < f_od.size(); ++k) sc += f_od[k] * c_od[k];
    return sc / q;
}

double bmw_objective(const Network& net, const std::vector<double>& x) {
    double z = 0.0;
    for (std::size_t a = 0; a < net.links.size(); ++a) {
        const Link& l = net.links[a];
        z += l.t0 * (x[a] + l.alpha * ipow(x[a], l.beta + 1) /
                                ((l.beta + 1) * ipow(l.cap, l.beta)));
    }
    return z;
}

RouteFlows bmw_gradient(const Network& net, const RouteFlows& f) {
    return route_costs(net, link_travel_times(net, aggregate_link_flows(net, f)));
}

RouteFlows fifo_violation(const Network& net, const RouteFlows& f) {
    const RouteFlows c = bmw_gradient(net, f);
    RouteFlows J(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        J[i].assign(f[i].size(), 0.0);
        double s1 = 0.0, sc = 0.0;
        for (std::size_t k = 0; k < f[i].size(); ++k) {
            s1 += f[i][k];
            sc += f[i][k] * c[i][k];
        }
        for (std::size_t k = 0; k < f[i].size(); ++k)
            J[i][k] = f[i][k] * (s1 * c[i][k] - sc);
    }
    return J;
}

RouteFlows fifo_violation_demand_scaled(const Network& net, const RouteFlows& f) {
    const RouteFlows c = bmw_gradient(net, f);
    RouteFlows J(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        J[i].assign(f[i].size(), 0.0);
        const double q = net.od_pairs[i].demand;
        if (!(q > 0)) continue;
        double sc = 0.0;
        for (std::size_t k = 0; k < f[i].size(); ++k) sc += f[i][k] * c[i][k];
        const double v = sc / q;
        for (std::size_t k = 0; k < f[i].size(); ++k)
            J[i][k] = q * f[i][k] * (c[i][k] - v);
    }
    return J;
}

AssignmentSnapshot compute_snapshot(const Network& net, const RouteFlows& f) {
    AssignmentSnapshot s;
    s.x = aggregate_link_flows(net, f);
    s.t = link_travel_times(net, s.x);
    s.c = route_costs(net, s.t);
    s.v.assign(f.size(), 0.0);
    s.J.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        s.J[i].assign(f[i].size(), 0.0);
        double s1 = 0.0, sc = 0.0;
        for (std::size_t k = 0; k < f[i].size(); ++k) {
            s1 += f[i][k];
            sc += f[i][k] * s.c[i][k];
        }
        if (s1 > 0) s.v[i] = sc / s1;
        for (std::size_t k = 0; k < f[i].size(); ++k)
            s.J[i][k] = f[i][k] * (s1 * s.c[i][k] - sc);
    }
    s.z = bmw_objective(net, s.x);
    return s;
}

}  // namespace fifotap
