#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fifotap/dynamic.hpp"
#include "fifotap/elastic.hpp"
#include "fifotap/network.hpp"
#include "fifotap/rng.hpp"
#include "fifotap/scenario.hpp"
#include "fifotap/static_solver.hpp"

using namespace fifotap;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s (%s)\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string data_path(const char* name) {
    return std::string(FIFOTAP_DATA_DIR) + "/" + name;
}

const Scenario& sheffi() {
    static const Scenario s = parse_scenario(data_path("sheffi3.json"));
    return s;
}

const Scenario& dyn_scenario() {
    static const Scenario s = parse_scenario(data_path("tworoute-dyn.json"));
    return s;
}

// the seven equilibria of the three-route example, flows then common cost,
// ordered by support size and lexicographic support
const double TABLE[7][4] = {
    {10.0, 0.0, 0.0, 947.5},
    {0.0, 10.0, 0.0, 137.1875},
    {0.0, 0.0, 10.0, 487.96296296296293},
    {4.034569836219157, 5.96543016378084, 0.0, 34.84049383558629},
    {4.786412116992221, 0.0, 5.213587883007778, 59.20527161548547},
    {0.0, 6.07621721305038, 3.9237827869496194, 35.97402839335241},
    {3.583287039566128, 4.645138487631538, 1.7715744728023313, 25.45602001434692},
};

// equal-cost flows on the given support of the parallel-link example, by
// bisection on the common cost
std::vector<double> bisection_flows(const Network& net, const std::vector<int>& support,
                                    double q) {
    const auto flow_at = [&](double mu) {
        std::vector<double> x(net.links.size(), 0.0);
        for (int a : support) {
            const Link& l = net.links[static_cast<std::size_t>(a)];
            const double r = (mu / l.t0 - 1.0) / l.alpha;
            x[static_cast<std::size_t>(a)] =
                r > 0 ? l.cap * std::pow(r, 1.0 / l.beta) : 0.0;
        }
        return x;
    };
    double lo = 0.0;
    for (int a : support) lo = std::max(lo, net.links[static_cast<std::size_t>(a)].t0);
    double hi = 1e4;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double total = 0.0;
        for (double v : flow_at(mid)) total += v;
        (total < q ? lo : hi) = mid;
    }
    return flow_at(0.5 * (lo + hi));
}

RouteFlows random_feasible(const Network& net, rng& r) {
    RouteFlows f;
    for (const OdPair& od : net.od_pairs) {
        std::vector<double> w(od.routes.size());
        double sum = 0.0;
        for (double& v : w) {
            v = r.uniform_pos();
            sum += v;
        }
        for (double& v : w) v *= od.demand / sum;
        f.push_back(std::move(w));
    }
    return f;
}

const std::vector<EquilibriumReport>& random_solves() {
    static const std::vector<EquilibriumReport> reports = [] {
        std::vector<EquilibriumReport> out;
        rng r(sheffi().seed);
        for (int i = 0; i < 100; ++i)
            out.push_back(
                solve_equilibrium(sheffi().net, random_feasible(sheffi().net, r),
                                  sheffi().solver));
        return out;
    }();
    return reports;
}

struct DynRun {
    DynReport rep;
    double ms = 0.0;
};

// starts 0..2: route-1 shares 0.5, 0.95, 0.05; start 3: seeded random profile
const DynRun& dyn_run(int which) {
    static std::map<int, DynRun> cache;
    const auto it = cache.find(which);
    if (it != cache.end()) return it->second;
    const Scenario& sc = dyn_scenario();
    BinRates g0;
    if (which == 3) {
        rng r(sc.seed);
        g0 = random_profile(sc.dyn, sc.dyn_cfg, r);
    } else {
        const double share = which == 0 ? 0.5 : which == 1 ? 0.95 : 0.05;
        g0 = split_profile(sc.dyn, sc.dyn_cfg, share);
    }
    DynRun run;
    const auto t0 = std::chrono::steady_clock::now();
    run.rep = solve_dynamic(sc.dyn, g0, sc.dyn_cfg);
    run.ms = ms_since(t0);
    return cache.emplace(which, std::move(run)).first->second;
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(FIFOTAP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

fs::path fresh_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / "fifotap_accept" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("criterion 1: equilibrium enumeration reproduces the seven solutions") {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = fresh_dir("enum");
    const int rc = run_cli("enumerate-equilibria " + data_path("sheffi3.json") +
                           " --starts 200 --seed 7 --out " + out.string());
    const double ms = ms_since(t0);

    bool ok = rc == 0;
    std::string detail = fmt("exit %d, %.0f ms", rc, ms);
    if (ok) {
        std::istringstream csv(read_file(out / "equilibria.csv"));
        std::string line;
        std::getline(csv, line);
        const std::vector<std::string> header = split_csv(line);
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

        std::vector<std::vector<std::string>> rows;
        while (std::getline(csv, line))
            if (!line.empty()) rows.push_back(split_csv(line));

        ok = rows.size() == 7 && ms < 30000.0;
        double worst = 0.0;
        if (ok) {
            for (std::size_t e = 0; e < 7; ++e) {
                const char* flow_cols[3] = {"f_0_0", "f_0_1", "f_0_2"};
                for (int k = 0; k < 3; ++k) {
                    const double got = std::stod(rows[e][col[flow_cols[k]]]);
                    worst = std::max(worst, std::abs(got - TABLE[e][k]));
                }
                const double v = std::stod(rows[e][col["v_0"]]);
                worst = std::max(worst, std::abs(v - TABLE[e][3]));
                const std::string kind = rows[e][col["kind"]];
                if (kind != (e == 6 ? "UE" : "PUE")) ok = false;
            }
            ok = ok && worst <= 1e-2;
        }
        detail = fmt("%zu equilibria, worst flow/cost deviation %.2e, %.0f ms",
                     rows.size(), worst, ms);
    }
    report(1, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 2: perturbing each unstable equilibrium escapes to the UE") {
    const Network& net = sheffi().net;
    SolverConfig cfg = sheffi().solver;
    cfg.delta_tau = 0.0005;
    cfg.tau_max = 0.1;

    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail = "max-norm distance to the UE after escape:";
    for (int e = 0; e < 6; ++e) {
        const RouteFlows f = {{TABLE[e][0], TABLE[e][1], TABLE[e][2]}};
        const Classification cls = classify(net, f, cfg);
        const RouteFlows pushed = perturb(net, f, cls.witnesses, 0.05);
        const EquilibriumReport rep = solve_equilibrium(net, pushed, cfg);
        double dist = 0.0;
        for (int k = 0; k < 3; ++k)
            dist = std::max(dist, std::abs(rep.f[0][static_cast<std::size_t>(k)] -
                                           TABLE[6][k]));
        detail += fmt(" row%d=%.2e", e + 1, dist);
        if (dist > 1e-2) ok = false;
    }
    const double ms = ms_since(t0);
    ok = ok && ms < 30000.0;
    detail += fmt(", %.0f ms", ms);
    report(2, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 3: objective descends along random trajectories") {
    const Network& net = sheffi().net;
    bool ok = true;
    double worst_rise = -1e300;
    double min_rate = 1e300;
    std::size_t samples = 0;
    for (const EquilibriumReport& rep : random_solves()) {
        for (std::size_t i = 0; i < rep.trajectory.size(); ++i) {
            const TrajectoryPoint& pt = rep.trajectory[i];
            if (i + 1 < rep.trajectory.size()) {
                const double rise = rep.trajectory[i + 1].z - pt.z;
                worst_rise = std::max(worst_rise, rise);
                if (rise > 1e-9) ok = false;
            }
            const AssignmentSnapshot snap = compute_snapshot(net, {pt.f_flat});
            double rate = 0.0;
            for (std::size_t k = 0; k < pt.f_flat.size(); ++k)
                for (std::size_t l = k + 1; l < pt.f_flat.size(); ++l) {
                    const double dc = snap.c[0][k] - snap.c[0][l];
                    rate += dc * dc * pt.f_flat[k] * pt.f_flat[l];
                }
            min_rate = std::min(min_rate, rate);
            if (!(-rate <= 0.0)) ok = false;
            ++samples;
        }
    }
    const std::string detail =
        fmt("100 trajectories, %zu samples, worst objective rise %.2e, min descent rate %.2e",
            samples, worst_rise, min_rate);
    report(3, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 4: objective gradient equals route costs") {
    const Network& net = sheffi().net;
    rng r(11);
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(3);
        double sum = 0.0;
        for (double& v : w) {
            v = 0.05 + r.uniform();
            sum += v;
        }
        RouteFlows f = {{0.0, 0.0, 0.0}};
        for (int k = 0; k < 3; ++k)
            f[0][static_cast<std::size_t>(k)] =
                w[static_cast<std::size_t>(k)] / sum * 10.0;

        const AssignmentSnapshot snap = compute_snapshot(net, f);
        for (int k = 0; k < 3; ++k) {
            RouteFlows up = f, dn = f;
            up[0][static_cast<std::size_t>(k)] += h;
            dn[0][static_cast<std::size_t>(k)] -= h;
            const double grad = (bmw_objective(net, aggregate_link_flows(net, up)) -
                                 bmw_objective(net, aggregate_link_flows(net, dn))) /
                                (2.0 * h);
            const double c = snap.c[0][static_cast<std::size_t>(k)];
            worst = std::max(worst, std::abs(grad - c) / std::max(1.0, std::abs(c)));
        }
    }
    const bool ok = worst <= 1e-6;
    const std::string detail = fmt("100 states, worst relative gradient error %.2e", worst);
    report(4, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 5: conservation, nonnegativity, zero routes stay zero") {
    const Network& net = sheffi().net;
    const double q = net.od_pairs[0].demand;
    bool ok = true;
    double worst_drift = 0.0;
    double min_flow = 1e300;
    for (const EquilibriumReport& rep : random_solves()) {
        for (const TrajectoryPoint& pt : rep.trajectory) {
            double sum = 0.0;
            for (double v : pt.f_flat) {
                sum += v;
                min_flow = std::min(min_flow, v);
            }
            worst_drift = std::max(worst_drift, std::abs(sum - q));
        }
        for (double v : rep.f[0]) min_flow = std::min(min_flow, v);
    }
    if (worst_drift > 1e-9 * q || min_flow < 0.0) ok = false;

    // faces of the simplex are invariant: a route left empty never reappears
    bool zeros_stay = true;
    const RouteFlows starts[3] = {{{0.0, 6.5, 3.5}}, {{6.5, 0.0, 3.5}}, {{10.0, 0.0, 0.0}}};
    for (const RouteFlows& f0 : starts) {
        const EquilibriumReport rep = solve_equilibrium(net, f0, sheffi().solver);
        for (std::size_t k = 0; k < 3; ++k) {
            if (f0[0][k] != 0.0) continue;
            if (rep.f[0][k] != 0.0) zeros_stay = false;
            for (const TrajectoryPoint& pt : rep.trajectory)
                if (pt.f_flat[k] != 0.0) zeros_stay = false;
        }
    }
    ok = ok && zeros_stay;
    const std::string detail =
        fmt("worst conservation drift %.2e (limit %.2e), min flow %.2e, empty routes %s",
            worst_drift, 1e-9 * q, min_flow, zeros_stay ? "stayed empty" : "REAPPEARED");
    report(5, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 6: solver equilibrium matches the bisection oracle") {
    const Network& net = sheffi().net;
    const EquilibriumReport rep = find_ue(net, equal_split(net), sheffi().solver);
    const std::vector<double> oracle = bisection_flows(net, {0, 1, 2}, 10.0);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
        worst = std::max(worst, std::abs(rep.f[0][static_cast<std::size_t>(k)] -
                                         oracle[static_cast<std::size_t>(k)]));
    const bool ok = rep.kind == EqKind::UE && worst <= 1e-4;
    const std::string detail =
        fmt("%s, worst flow deviation from the oracle %.2e", to_string(rep.kind), worst);
    report(6, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 7: elastic solvers match the scalar oracle") {
    const Scenario sc = parse_scenario(data_path("elastic-single.json"));
    const Network& net = sc.net;
    const DemandFunction fn = sc.demand_fns[0];

    const auto travel = [&](double q) {
        return link_travel_times(net, {q})[0];
    };
    double lo = 1e-12, hi = fn.a / fn.b;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (travel(mid) < willingness(fn, mid) ? lo : hi) = mid;
    }
    const double q_star = 0.5 * (lo + hi);

    const double q0 = net.od_pairs[0].demand;
    const ElasticReport direct =
        solve_elastic(net, sc.demand_fns, ElasticState{{{q0}}, {q0}}, sc.solver);
    const ElasticReport nested = solve_elastic_nested(net, sc.demand_fns, {q0}, sc.solver);

    const double e_direct = std::abs(direct.state.q[0] - q_star);
    const double e_nested = std::abs(nested.state.q[0] - q_star);
    const double gap = std::abs(direct.state.q[0] - nested.state.q[0]);
    const bool ok = direct.kind == EqKind::UE && nested.kind == EqKind::UE &&
                    direct.demand_matched && nested.demand_matched && e_direct <= 1e-4 &&
                    e_nested <= 1e-4 && gap <= 1e-3;
    const std::string detail =
        fmt("q* = %.9g; direct off %.2e, nested off %.2e, mutual gap %.2e", q_star,
            e_direct, e_nested, gap);
    report(7, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 8: dynamic runs reach the analytic equilibrium") {
    const DynNetwork& net = dyn_scenario().dyn;
    const DynGrid grid = make_grid(dyn_scenario().dyn_cfg);
    const double q0 = net.q0;
    // noise allowance: one-substep flip of the time lookup moves a bin's
    // violation by at most g(S1-g)*dts <= q0^2/4*dts
    const double slack = q0 * q0 / 4.0 * grid.dts;

    bool ok = true;
    std::string detail;
    const char* names[4] = {"c=0.5", "c=0.95", "c=0.05", "random"};
    for (int which = 0; which < 4; ++which) {
        const DynRun& run = dyn_run(which);
        const DynReport& rep = run.rep;

        const double f1 = rep.loadings[0].f_in[static_cast<std::size_t>(grid.N * grid.M)];
        const double f2 = rep.loadings[1].f_in[static_cast<std::size_t>(grid.N * grid.M)];
        const bool flows_ok =
            std::abs(f1 - 3.125) <= 0.02 * 3.125 && std::abs(f2 - 1.875) <= 0.02 * 1.875;

        const auto& h = rep.index_history;
        std::size_t transient_end = 0;
        for (std::size_t i = 0; i + 1 < h.size(); ++i)
            if (h[i + 1] - h[i] > slack) transient_end = i + 1;
        bool monotone = transient_end <= h.size() / 10;
        for (std::size_t i = transient_end; i + 1 < h.size(); ++i)
            if (h[i + 1] - h[i] > slack) monotone = false;

        const bool final_ok = rep.norm_J <= 1e-3 * q0 * q0;
        const bool time_ok = run.ms < 120000.0;
        if (rep.kind != EqKind::UE || !flows_ok || !monotone || !final_ok || !time_ok)
            ok = false;
        detail += fmt("%s%s: f=(%.4g, %.4g), transient %.1f%%, final %.1e, %.0f ms",
                      which ? "; " : "", names[which], f1, f2,
                      100.0 * static_cast<double>(transient_end) /
                          static_cast<double>(h.size()),
                      rep.norm_J, run.ms);
    }
    report(8, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 9: dynamic loading invariants") {
    const Scenario& sc = dyn_scenario();
    const DynNetwork& net = sc.dyn;
    const DynGrid grid = make_grid(sc.dyn_cfg);
    const double q0 = net.q0;
    const double eps = sc.dyn_cfg.zero_rate_eps_rel * q0;

    bool curves_ok = true, capacity_ok = true, exit_ok = true, zero_sum_ok = true;
    double worst_sum = 0.0;

    const auto check_loading = [&](int route, const RouteLoading& ld) {
        const auto& links = net.routes[static_cast<std::size_t>(route)].links;
        for (std::size_t i = 0; i + 1 < ld.f_in.size(); ++i)
            if (ld.f_in[i + 1] < ld.f_in[i] - 1e-12) curves_ok = false;
        const CumulativeCurve* in = &ld.f_in;
        for (std::size_t l = 0; l < links.size(); ++l) {
            const PointQueueLink& link = net.links[static_cast<std::size_t>(links[l])];
            const CumulativeCurve& out = ld.link_out[l];
            const auto i0 = static_cast<std::size_t>(std::lround(link.fft / grid.dts));
            for (std::size_t i = 0; i + 1 < out.size(); ++i) {
                if (out[i + 1] < out[i] - 1e-12) curves_ok = false;
                if ((out[i + 1] - out[i]) / grid.dts > link.qc + 1e-9) capacity_ok = false;
            }
            for (std::size_t i = 0; i + i0 < out.size(); ++i)
                if (out[i + i0] > (*in)[i] + 1e-9) curves_ok = false;
            in = &out;
        }
        if (std::abs(ld.f_out().back() - ld.f_in[static_cast<std::size_t>(grid.N * grid.M)]) >
            1e-6 * q0)
            exit_ok = false;
    };

    // converged run plus an early non-equilibrium state
    const DynReport& rep = dyn_run(0).rep;
    for (int k = 0; k < 2; ++k) check_loading(k, rep.loadings[static_cast<std::size_t>(k)]);
    for (int n = 0; n < grid.N; ++n) {
        std::vector<double> gn(2), cn(2);
        for (int k = 0; k < 2; ++k) {
            gn[static_cast<std::size_t>(k)] =
                rep.g[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            cn[static_cast<std::size_t>(k)] =
                rep.times[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
        }
        const std::vector<double> J = dynamic_fifo_violation(gn, cn, eps);
        worst_sum = std::max(worst_sum, std::abs(J[0] + J[1]));
    }

    const BinRates g = split_profile(net, sc.dyn_cfg, 0.3);
    std::vector<RouteLoading> loads;
    for (int k = 0; k < 2; ++k) {
        loads.push_back(load_route_chain(net, k, g[static_cast<std::size_t>(k)], grid));
        check_loading(k, loads.back());
    }
    for (int n = 0; n < grid.N; ++n) {
        std::vector<double> gn(2), cn(2);
        for (int k = 0; k < 2; ++k) {
            gn[static_cast<std::size_t>(k)] = g[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            cn[static_cast<std::size_t>(k)] = route_travel_time(
                loads[static_cast<std::size_t>(k)].f_in,
                loads[static_cast<std::size_t>(k)].f_out(), gn[static_cast<std::size_t>(k)],
                n, grid);
        }
        const std::vector<double> J = dynamic_fifo_violation(gn, cn, eps);
        worst_sum = std::max(worst_sum, std::abs(J[0] + J[1]));
    }
    zero_sum_ok = worst_sum <= 1e-10;

    const bool ok = curves_ok && capacity_ok && exit_ok && zero_sum_ok;
    const std::string detail =
        fmt("curves %s, capacity %s, all vehicles exit %s, worst per-bin violation sum %.2e",
            curves_ok ? "monotone" : "NOT MONOTONE", capacity_ok ? "respected" : "EXCEEDED",
            exit_ok ? "yes" : "NO", worst_sum);
    report(9, ok, detail);
    CHECK_MESSAGE(ok, detail);
}

TEST_CASE("criterion 10: repeated seeded runs write identical tables") {
    struct Job {
        const char* name;
        std::string args;
        std::vector<const char*> files;
    };
    const std::vector<Job> jobs = {
        {"static", "solve-static " + data_path("sheffi3.json"), {"trajectory.csv"}},
        {"dynamic",
         "solve-dynamic " + data_path("tworoute-dyn.json") + " --random-start --seed 7",
         {"convergence.csv", "curves.csv", "travel_times.csv", "profile.csv"}},
        {"enum", "enumerate-equilibria " + data_path("sheffi3.json") + " --starts 200 --seed 7",
         {"equilibria.csv"}},
    };

    bool ok = true;
    int compared = 0;
    std::string detail;
    for (const Job& job : jobs) {
        const fs::path a = fresh_dir((std::string(job.name) + "_a").c_str());
        const fs::path b = fresh_dir((std::string(job.name) + "_b").c_str());
        const int rc_a = run_cli(job.args + " --out " + a.string());
        const int rc_b = run_cli(job.args + " --out " + b.string());
        if (rc_a != 0 || rc_b != 0) {
            ok = false;
            detail += fmt("%s%s exited %d/%d", compared ? "; " : "", job.name, rc_a, rc_b);
            continue;
        }
        for (const char* f : job.files) {
            ++compared;
            if (read_file(a / f) != read_file(b / f)) {
                ok = false;
                detail += fmt("%s%s/%s differs", detail.empty() ? "" : "; ", job.name, f);
            }
        }
    }
    if (ok) detail = fmt("%d tables byte-identical across repeated runs", compared);
    report(10, ok, detail);
    CHECK_MESSAGE(ok, detail);
}
