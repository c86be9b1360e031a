#pragma once
// Fixtures shared by the test binaries.

#include <vector>

#include "fifotap/network.hpp"
#include "fifotap/rng.hpp"

namespace testutil {

// Three parallel links between one O-D pair carrying demand 10:
//   l1: t0=10, cap=2   l2: t0=20, cap=4   l3: t0=25, cap=3
// alpha 0.15, beta 4 everywhere. Seven equilibria, one of them the UE.
inline fifotap::Network three_route_net() {
    fifotap::Network net;
    net.n_nodes = 2;
    net.links = {
        {0, 1, 10.0, 2.0, 0.15, 4},
        {0, 1, 20.0, 4.0, 0.15, 4},
        {0, 1, 25.0, 3.0, 0.15, 4},
    };
    fifotap::OdPair od;
    od.origin = 0;
    od.dest = 1;
    od.demand = 10.0;
    od.routes = {{{0}}, {{1}}, {{2}}};
    net.od_pairs = {od};
    return net;
}

// Two O-D pairs over a shared middle link: o->m->d plus a direct o->d link for
// the first pair, m->d alone for the second. Exercises multi-link routes and
// link sharing across O-D pairs.
inline fifotap::Network shared_link_net() {
    fifotap::Network net;
    net.n_nodes = 3;
    net.links = {
        {0, 1, 4.0, 3.0, 0.15, 4},   // o->m
        {1, 2, 6.0, 5.0, 0.15, 4},   // m->d
        {0, 2, 14.0, 2.0, 0.15, 4},  // o->d direct
    };
    fifotap::OdPair od1;
    od1.origin = 0;
    od1.dest = 2;
    od1.demand = 6.0;
    od1.routes = {{{0, 1}}, {{2}}};
    fifotap::OdPair od2;
    od2.origin = 1;
    od2.dest = 2;
    od2.demand = 3.0;
    od2.routes = {{{1}}};
    net.od_pairs = {od1, od2};
    return net;
}

// Random feasible flows: positive weights per route, normalized to the demand.
inline fifotap::RouteFlows random_feasible(const fifotap::Network& net, fifotap::rng& gen) {
    fifotap::RouteFlows f(net.od_pairs.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i].resize(net.od_pairs[i].routes.size());
        double sum = 0.0;
        for (double& w : f[i]) {
            w = gen.uniform_pos();
            sum += w;
        }
        for (double& w : f[i]) w *= net.od_pairs[i].demand / sum;
    }
    return f;
}

}  // namespace testutil
