#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fifotap/errors.hpp"
#include "fifotap/network.hpp"
#include "fifotap/rng.hpp"

#include "helpers.hpp"

using namespace fifotap;
using testutil::shared_link_net;
using testutil::three_route_net;

TEST_CASE("ipow matches repeated multiplication") {
    CHECK(ipow(2.0, 10) == 1024.0);
    CHECK(ipow(1.5, 3) == 3.375);
    CHECK(ipow(7.25, 0) == 1.0);
    CHECK(ipow(0.0, 4) == 0.0);
}

TEST_CASE("validate_network rejects malformed inputs") {
    Network net = three_route_net();
    CHECK_NOTHROW(validate_network(net));

    Network bad = net;
    bad.links[0].to = 5;
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    bad = net;
    bad.links[1].t0 = 0.0;
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    bad = net;
    bad.links[2].cap = -1.0;
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    bad = net;
    bad.od_pairs[0].demand = -2.0;
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    bad = net;
    bad.od_pairs[0].routes.clear();
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    bad = net;
    bad.od_pairs[0].routes[0].links = {1, 0};  // second link starts where none ended
    CHECK_THROWS_AS(validate_network(bad), validation_error);

    Network chain = shared_link_net();
    CHECK_NOTHROW(validate_network(chain));
    chain.od_pairs[0].routes[0].links = {0};  // stops at the middle node
    CHECK_THROWS_AS(validate_network(chain), validation_error);
}

TEST_CASE("check_feasible enforces shape, sign, and conservation") {
    const Network net = three_route_net();
    CHECK_NOTHROW(check_feasible(net, {{10.0, 0.0, 0.0}}));
    CHECK_NOTHROW(check_feasible(net, {{3.0, 3.0, 4.0}}));
    CHECK_THROWS_AS(check_feasible(net, {{3.0, 3.0}}), validation_error);
    CHECK_THROWS_AS(check_feasible(net, {{11.0, -1.0, 0.0}}), validation_error);
    CHECK_THROWS_AS(check_feasible(net, {{3.0, 3.0, 3.0}}), validation_error);
}

TEST_CASE("zero_flows and equal_split have the route shape") {
    const Network net = shared_link_net();
    const RouteFlows z = zero_flows(net);
    REQUIRE(z.size() == 2);
    CHECK(z[0] == std::vector<double>{0.0, 0.0});
    CHECK(z[1] == std::vector<double>{0.0});
    const RouteFlows e = equal_split(net);
    CHECK(e[0] == std::vector<double>{3.0, 3.0});
    CHECK(e[1] == std::vector<double>{3.0});
}

TEST_CASE("aggregate_link_flows sums route contributions per link") {
    const Network net = three_route_net();
    CHECK(aggregate_link_flows(net, {{10.0, 0.0, 0.0}}) ==
          std::vector<double>{10.0, 0.0, 0.0});
    const RouteFlows ue = {{3.5833, 4.6451, 1.7716}};
    CHECK(aggregate_link_flows(net, ue) == std::vector<double>{3.5833, 4.6451, 1.7716});

    const Network chain = shared_link_net();
    // od1 route 0 and od2 route 0 both cross the middle link.
    const std::vector<double> x = aggregate_link_flows(chain, {{2.0, 4.0}, {3.0}});
    CHECK(x == std::vector<double>{2.0, 5.0, 4.0});

    CHECK_THROWS_AS(aggregate_link_flows(net, {{1.0, 2.0}}), validation_error);
}

TEST_CASE("link_travel_times evaluates the power law") {
    const Network net = three_route_net();
    const std::vector<double> free = link_travel_times(net, {0.0, 0.0, 0.0});
    CHECK(free == std::vector<double>{10.0, 20.0, 25.0});

    const std::vector<double> loaded = link_travel_times(net, {10.0, 10.0, 10.0});
    CHECK(loaded[0] == doctest::Approx(947.5).epsilon(1e-12));
    CHECK(loaded[1] == doctest::Approx(137.1875).epsilon(1e-12));

    const std::vector<double> t = link_travel_times(net, {5.0, 5.0, 0.0});
    CHECK(t[0] == 68.59375);
    CHECK(t[1] == 27.32421875);
    CHECK(t[2] == 25.0);

    CHECK_THROWS_AS(link_travel_times(net, {-1.0, 0.0, 0.0}), validation_error);
}

TEST_CASE("link times are monotone in flow") {
    const Network net = three_route_net();
    rng gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(3), xp(3);
        for (int a = 0; a < 3; ++a) {
            x[a] = 12.0 * gen.uniform();
            xp[a] = x[a] + 3.0 * gen.uniform();
        }
        const auto t = link_travel_times(net, x);
        const auto tp = link_travel_times(net, xp);
        for (int a = 0; a < 3; ++a) CHECK(tp[a] >= t[a]);
    }
}

TEST_CASE("route_costs adds link times along each route") {
    const Network net = three_route_net();
    const std::vector<double> t = {68.59375, 27.32421875, 25.0};
    const RouteFlows c = route_costs(net, t);
    CHECK(c[0][0] == 68.59375);
    CHECK(c[0][1] == 27.32421875);
    CHECK(c[0][2] == 25.0);

    const Network chain = shared_link_net();
    const RouteFlows cc = route_costs(chain, {10.0, 20.0, 14.0});
    CHECK(cc[0][0] == 30.0);  // two-link route
    CHECK(cc[0][1] == 14.0);
    CHECK(cc[1][0] == 20.0);
}

TEST_CASE("user equilibrium flows give equal route costs") {
    const Network net = three_route_net();
    const RouteFlows f = {{3.583287039566128, 4.645138487631538, 1.7715744728023313}};
    const RouteFlows c = bmw_gradient(net, f);
    const double mu = 25.45602001434692;
    for (int k = 0; k < 3; ++k) CHECK(c[0][k] == doctest::Approx(mu).epsilon(1e-9));
}

TEST_CASE("average_od_time is the flow-weighted mean cost") {
    const Network net = three_route_net();
    const std::vector<double> f = {5.0, 5.0, 0.0};
    const RouteFlows c = bmw_gradient(net, {f});
    CHECK(average_od_time(f, c[0], 10.0) == 47.958984375);
    CHECK(average_od_time({10.0, 0.0, 0.0}, {42.0, 7.0, 9.0}, 10.0) == 42.0);
    CHECK_THROWS_AS(average_od_time({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.0),
                    validation_error);
}

TEST_CASE("bmw_objective evaluates the closed-form integral") {
    const Network net = three_route_net();
    CHECK(bmw_objective(net, {0.0, 0.0, 0.0}) == 0.0);

    Network one;
    one.n_nodes = 2;
    one.links = {{0, 1, 10.0, 2.0, 0.15, 4}};
    OdPair od;
    od.origin = 0;
    od.dest = 1;
    od.demand = 2.0;
    od.routes = {{{0}}};
    one.od_pairs = {od};
    // 10 * (2 + 0.15 * 2^5 / (5 * 2^4))
    CHECK(bmw_objective(one, {2.0}) == doctest::Approx(20.6).epsilon(1e-12));
}

TEST_CASE("bmw_objective is convex along segments") {
    const Network net = three_route_net();
    rng gen(23);
    for (int trial = 0; trial < 100; ++trial) {
        const RouteFlows f1 = testutil::random_feasible(net, gen);
        const RouteFlows f2 = testutil::random_feasible(net, gen);
        const double lam = gen.uniform();
        RouteFlows mix = f1;
        for (std::size_t i = 0; i < mix.size(); ++i)
            for (std::size_t k = 0; k < mix[i].size(); ++k)
                mix[i][k] = lam * f1[i][k] + (1.0 - lam) * f2[i][k];
        const double zm = bmw_objective(net, aggregate_link_flows(net, mix));
        const double z1 = bmw_objective(net, aggregate_link_flows(net, f1));
        const double z2 = bmw_objective(net, aggregate_link_flows(net, f2));
        CHECK(zm <= lam * z1 + (1.0 - lam) * z2 + 1e-9);
    }
}

TEST_CASE("bmw_gradient matches central finite differences") {
    const Network net = shared_link_net();
    rng gen(37);
    for (int trial = 0; trial < 20; ++trial) {
        RouteFlows f(net.od_pairs.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i].resize(net.od_pairs[i].routes.size());
            double sum = 0.0;
            for (double& w : f[i]) {
                w = 0.05 + gen.uniform();
                sum += w;
            }
            for (double& w : f[i]) w *= net.od_pairs[i].demand / sum;
        }
        const RouteFlows c = bmw_gradient(net, f);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double h = 1e-5 * net.od_pairs[i].demand;
            for (std::size_t k = 0; k < f[i].size(); ++k) {
                RouteFlows up = f, dn = f;
                up[i][k] += h;
                dn[i][k] -= h;
                const double zu = bmw_objective(net, aggregate_link_flows(net, up));
                const double zd = bmw_objective(net, aggregate_link_flows(net, dn));
                const double fd = (zu - zd) / (2.0 * h);
                CHECK(std::abs(fd - c[i][k]) <= 1e-6 * std::max(1.0, std::abs(c[i][k])));
            }
        }
    }
}

TEST_CASE("fifo_violation hand-evaluated values") {
    const Network net = three_route_net();
    const RouteFlows lone = fifo_violation(net, {{10.0, 0.0, 0.0}});
    CHECK(lone[0] == std::vector<double>{0.0, 0.0, 0.0});

    const RouteFlows J = fifo_violation(net, {{5.0, 5.0, 0.0}});
    CHECK(J[0][0] == doctest::Approx(1031.73828125).epsilon(1e-12));
    CHECK(J[0][1] == doctest::Approx(-1031.73828125).epsilon(1e-12));
    CHECK(J[0][2] == 0.0);
}

TEST_CASE("violation forms agree and sum to zero on feasible states") {
    const Network net = three_route_net();
    const Network chain = shared_link_net();
    rng gen(41);
    for (const Network* n : {&net, &chain}) {
        for (int trial = 0; trial < 200; ++trial) {
            const RouteFlows f = testutil::random_feasible(*n, gen);
            const RouteFlows a = fifo_violation(*n, f);
            const RouteFlows b = fifo_violation_demand_scaled(*n, f);
            const RouteFlows c = bmw_gradient(*n, f);
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double q = n->od_pairs[i].demand;
                double cmax = 0.0, sum = 0.0;
                for (double ck : c[i]) cmax = std::max(cmax, ck);
                for (std::size_t k = 0; k < a[i].size(); ++k) {
                    CHECK(std::abs(a[i][k] - b[i][k]) <=
                          1e-9 * std::max(1.0, std::abs(a[i][k])));
                    sum += a[i][k];
                }
                CHECK(std::abs(sum) <= 1e-9 * q * q * cmax);
            }
        }
    }
}

TEST_CASE("compute_snapshot agrees with the standalone operations") {
    const Network net = shared_link_net();
    rng gen(53);
    const RouteFlows f = testutil::random_feasible(net, gen);
    const AssignmentSnapshot s = compute_snapshot(net, f);
    CHECK(s.x == aggregate_link_flows(net, f));
    CHECK(s.t == link_travel_times(net, s.x));
    CHECK(s.c == route_costs(net, s.t));
    CHECK(s.J == fifo_violation(net, f));
    CHECK(s.z == bmw_objective(net, s.x));
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(s.v[i] ==
              doctest::Approx(average_od_time(f[i], s.c[i], net.od_pairs[i].demand))
                  .epsilon(1e-12));
}

TEST_CASE("snapshot reports zero average time where nothing flows") {
    Network net = three_route_net();
    net.od_pairs[0].demand = 0.0;
    const AssignmentSnapshot s = compute_snapshot(net, zero_flows(net));
    CHECK(s.v[0] == 0.0);
    CHECK(s.J[0] == std::vector<double>{0.0, 0.0, 0.0});
}
