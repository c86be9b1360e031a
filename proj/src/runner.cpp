#include "fifotap/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "fifotap/csv.hpp"
#include "fifotap/dynamic.hpp"
#include "fifotap/elastic.hpp"
#include "fifotap/errors.hpp"
#include "fifotap/network.hpp"
#include "fifotap/rng.hpp"
#include "fifotap/scenario.hpp"
#include "fifotap/static_solver.hpp"

namespace fifotap {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double wall_ms_since(const Clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << text;
    out.close();
    if (!out.good()) throw io_error("failed writing " + path);
}

int finish_error(const RunOptions& opt, const char* command, const char* kind,
                 const std::string& message, int code) {
    std::fprintf(stderr, "fifotap %s: %s\n", command, message.c_str());
    try {
        ensure_out_dir(opt.out_dir);
        json j;
        j["status"] = "error";
        j["command"] = command;
        j["error"]["kind"] = kind;
        j["error"]["message"] = message;
        write_text(join_path(opt.out_dir, "result.json"), j.dump(2) + "\n");
    } catch (const std::exception&) {
        // the record is already on stderr
    }
    return code;
}

int guarded(const RunOptions& opt, const char* command, const std::function<int()>& body) {
    try {
        return body();
    } catch (const io_error& e) {
        return finish_error(opt, command, "io", e.what(), exit_io);
    } catch (const not_converged_error& e) {
        return finish_error(opt, command, "not_converged", e.what(), exit_not_converged);
    } catch (const step_underflow_error& e) {
        return finish_error(opt, command, "step_underflow", e.what(), exit_not_converged);
    } catch (const validation_error& e) {
        return finish_error(opt, command, "validation", e.what(), exit_validation);
    } catch (const std::invalid_argument& e) {
        return finish_error(opt, command, "validation", e.what(), exit_validation);
    } catch (const std::exception& e) {
        return finish_error(opt, command, "internal", e.what(), exit_validation);
    }
}

Scenario load_scenario(const RunOptions& opt, const char* expected_mode) {
    Scenario sc = parse_scenario(opt.scenario_path);
    if (sc.mode != expected_mode)
        throw validation_error("scenario mode is '" + sc.mode + "', this command expects '" +
                               expected_mode + "'");
    if (opt.seed) sc.seed = *opt.seed;
    if (opt.delta_tau) {
        if (!(*opt.delta_tau > 0)) throw validation_error("--dtau: must be positive");
        sc.solver.delta_tau = *opt.delta_tau;
        sc.dyn_cfg.delta_tau = *opt.delta_tau;
    }
    if (opt.tol) {
        if (!(*opt.tol >= 0)) throw validation_error("--tol: must be nonnegative");
        sc.solver.tol_J = *opt.tol;
        sc.dyn_cfg.tol_J = *opt.tol;
    }
    if (opt.max_perturb) {
        if (*opt.max_perturb < 0) throw validation_error("--max-perturb: must be nonnegative");
        sc.solver.max_perturbations = *opt.max_perturb;
    }
    return sc;
}

std::vector<double> parse_numbers(const std::string& text, const char* flag) {
    std::vector<double> vals;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = text.find(',', pos);
        std::string tok = text.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto first = tok.find_first_not_of(" \t");
        const auto last = tok.find_last_not_of(" \t");
        tok = first == std::string::npos ? "" : tok.substr(first, last - first + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            vals.push_back(v);
        } catch (const std::exception&) {
            throw validation_error(std::string(flag) + ": cannot parse '" + tok +
                                   "' as a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return vals;
}

RouteFlows shape_flows(const Network& net, const std::vector<double>& vals, const char* flag) {
    RouteFlows f;
    std::size_t at = 0;
    for (const OdPair& od : net.od_pairs) {
        if (at + od.routes.size() > vals.size()) break;
        f.emplace_back(vals.begin() + static_cast<long>(at),
                       vals.begin() + static_cast<long>(at + od.routes.size()));
        at += od.routes.size();
    }
    if (f.size() != net.od_pairs.size() || at != vals.size())
        throw validation_error(std::string(flag) + ": expected " +
                               std::to_string(net.total_routes()) + " values, got " +
                               std::to_string(vals.size()));
    return f;
}

std::vector<std::string> flow_names(const Network& net) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < net.od_pairs.size(); ++i)
        for (std::size_t k = 0; k < net.od_pairs[i].routes.size(); ++k)
            names.push_back("f_" + std::to_string(i) + "_" + std::to_string(k));
    return names;
}

void write_trajectory(const std::string& path, const Network& net,
                      const std::vector<TrajectoryPoint>& trajectory,
                      bool with_demands) {
    std::vector<std::string> header = {"tau"};
    const std::vector<std::string> names = flow_names(net);
    header.insert(header.end(), names.begin(), names.end());
    if (with_demands)
        for (std::size_t i = 0; i < net.od_pairs.size(); ++i)
            header.push_back("q_" + std::to_string(i));
    header.push_back("z");
    header.push_back("norm_J");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(trajectory.size());
    for (const TrajectoryPoint& p : trajectory) {
        std::vector<std::string> row = {csv_value(p.tau)};
        for (double v : p.f_flat) row.push_back(csv_value(v));
        row.push_back(csv_value(p.z));
        row.push_back(csv_value(p.norm_J));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

json solver_echo(const Scenario& sc, double resolved_tol) {
    json c;
    c["delta_tau"] = sc.solver.delta_tau;
    c["tau_max"] = sc.solver.tau_max;
    c["tol_J"] = resolved_tol;
    c["perturb_eps"] = sc.solver.perturb_eps;
    c["max_perturbations"] = sc.solver.max_perturbations;
    c["seed"] = sc.seed;
    return c;
}

json witnesses_json(const std::vector<Witness>& witnesses) {
    json a = json::array();
    for (const Witness& w : witnesses) {
        json jw;
        jw["od"] = w.od;
        jw["unused_route"] = w.unused_route;
        jw["used_route"] = w.used_route;
        a.push_back(std::move(jw));
    }
    return a;
}

void write_result(const RunOptions& opt, const json& res) {
    write_text(join_path(opt.out_dir, "result.json"), res.dump(2) + "\n");
}

}  // namespace

int run_solve_static(const RunOptions& opt) {
    return guarded(opt, "solve-static", [&]() -> int {
        Scenario sc = load_scenario(opt, "static");
        ensure_out_dir(opt.out_dir);
        const RouteFlows f0 =
            opt.flows ? shape_flows(sc.net, parse_numbers(*opt.flows, "--flows"), "--flows")
                      : equal_split(sc.net);
        const double tol = sc.solver.tol_J >= 0 ? sc.solver.tol_J : default_tol_J(sc.net);

        const auto t0 = Clock::now();
        const EquilibriumReport rep = find_ue(sc.net, f0, sc.solver);
        const double ms = wall_ms_since(t0);

        write_trajectory(join_path(opt.out_dir, "trajectory.csv"), sc.net, rep.trajectory,
                         false);

        const AssignmentSnapshot snap = compute_snapshot(sc.net, rep.f);
        json res;
        res["status"] = "ok";
        res["command"] = "solve-static";
        res["scenario"] = opt.scenario_path;
        res["config"] = solver_echo(sc, tol);
        res["wall_ms"] = ms;
        res["result"]["kind"] = to_string(rep.kind);
        res["result"]["flows"] = rep.f;
        res["result"]["costs"] = snap.c;
        res["result"]["od_times"] = snap.v;
        res["result"]["z"] = snap.z;
        res["result"]["norm_J"] = rep.norm_J;
        res["result"]["tau_end"] = rep.tau_end;
        res["result"]["steps"] = rep.steps;
        res["result"]["perturbations"] = rep.perturbations;
        write_result(opt, res);
        return exit_ok;
    });
}

int run_classify(const RunOptions& opt) {
    return guarded(opt, "classify", [&]() -> int {
        Scenario sc = load_scenario(opt, "static");
        ensure_out_dir(opt.out_dir);
        if (!opt.flows) throw validation_error("classify requires --flows");
        const RouteFlows f =
            shape_flows(sc.net, parse_numbers(*opt.flows, "--flows"), "--flows");
        const double tol = sc.solver.tol_J >= 0 ? sc.solver.tol_J : default_tol_J(sc.net);

        const Classification cl = classify(sc.net, f, sc.solver);
        const AssignmentSnapshot snap = compute_snapshot(sc.net, f);
        const std::vector<int> k_per_od = used_route_counts(sc.net, f, sc.solver.zero_flow_eps_rel);
        int k_total = 0;
        for (int k : k_per_od) k_total += k;

        json res;
        res["status"] = "ok";
        res["command"] = "classify";
        res["scenario"] = opt.scenario_path;
        res["config"] = solver_echo(sc, tol);
        res["result"]["kind"] = to_string(cl.kind);
        res["result"]["witnesses"] = witnesses_json(cl.witnesses);
        res["result"]["flows"] = f;
        res["result"]["costs"] = snap.c;
        res["result"]["od_times"] = snap.v;
        res["result"]["z"] = snap.z;
        res["result"]["norm_J"] = convergence_index(snap.J, k_total);
        write_result(opt, res);
        return exit_ok;
    });
}

int run_solve_elastic(const RunOptions& opt) {
    return guarded(opt, "solve-elastic", [&]() -> int {
        Scenario sc = load_scenario(opt, "elastic");
        ensure_out_dir(opt.out_dir);

        ElasticState st0;
        if (opt.flows) {
            st0.f = shape_flows(sc.net, parse_numbers(*opt.flows, "--flows"), "--flows");
            for (const auto& od : st0.f) {
                double sum = 0.0;
                for (double fk : od) sum += fk;
                st0.q.push_back(sum);
            }
        } else {
            st0.f = equal_split(sc.net);
            for (const OdPair& od : sc.net.od_pairs) st0.q.push_back(od.demand);
        }

        Network net_q0 = sc.net;
        for (std::size_t i = 0; i < st0.q.size(); ++i) net_q0.od_pairs[i].demand = st0.q[i];
        const double tol =
            sc.solver.tol_J >= 0 ? sc.solver.tol_J : default_tol_J(net_q0);

        const auto t0 = Clock::now();
        const ElasticReport rep = solve_elastic(sc.net, sc.demand_fns, st0, sc.solver);
        const double ms = wall_ms_since(t0);

        write_trajectory(join_path(opt.out_dir, "trajectory.csv"), sc.net, rep.trajectory,
                         true);

        Network net_q = sc.net;
        for (std::size_t i = 0; i < rep.state.q.size(); ++i)
            net_q.od_pairs[i].demand = rep.state.q[i];
        const AssignmentSnapshot snap = compute_snapshot(net_q, rep.state.f);

        json res;
        res["command"] = "solve-elastic";
        res["scenario"] = opt.scenario_path;
        res["config"] = solver_echo(sc, tol);
        res["wall_ms"] = ms;
        res["result"]["kind"] = to_string(rep.kind);
        res["result"]["demand_matched"] = rep.demand_matched;
        res["result"]["flows"] = rep.state.f;
        res["result"]["demands"] = rep.state.q;
        res["result"]["costs"] = snap.c;
        res["result"]["od_times"] = snap.v;
        res["result"]["z"] = elastic_objective(sc.net, sc.demand_fns, rep.state);
        res["result"]["norm_J"] = rep.norm_J;
        res["result"]["tau_end"] = rep.tau_end;
        res["result"]["steps"] = rep.steps;
        res["result"]["witnesses"] = witnesses_json(rep.witnesses);
        if (rep.kind == EqKind::NotConverged) {
            res["status"] = "error";
            res["error"]["kind"] = "not_converged";
            res["error"]["message"] = rep.message;
            write_result(opt, res);
            return exit_not_converged;
        }
        res["status"] = "ok";
        write_result(opt, res);
        return exit_ok;
    });
}

int run_solve_dynamic(const RunOptions& opt) {
    return guarded(opt, "solve-dynamic", [&]() -> int {
        Scenario sc = load_scenario(opt, "dynamic");
        ensure_out_dir(opt.out_dir);
        const DynGrid grid = make_grid(sc.dyn_cfg);
        const double tol =
            sc.dyn_cfg.tol_J >= 0 ? sc.dyn_cfg.tol_J : default_dyn_tol(sc.dyn);

        BinRates g0;
        json start;
        if (opt.random_start) {
            if (opt.init_split)
                throw validation_error("--init-split and --random-start are exclusive");
            rng r(sc.seed);
            g0 = random_profile(sc.dyn, sc.dyn_cfg, r);
            start["type"] = "random";
            start["seed"] = sc.seed;
        } else {
            const double share = opt.init_split ? *opt.init_split : 0.5;
            if (!(share >= 0) || !(share <= 1))
                throw validation_error("--init-split: must lie in [0, 1]");
            g0 = split_profile(sc.dyn, sc.dyn_cfg, share);
            start["type"] = "split";
            start["share"] = share;
        }

        const auto t0 = Clock::now();
        const DynReport rep = solve_dynamic(sc.dyn, g0, sc.dyn_cfg);
        const double ms = wall_ms_since(t0);

        const std::size_t R = sc.dyn.routes.size();
        {
            std::vector<std::vector<std::string>> rows;
            rows.reserve(rep.index_history.size());
            for (std::size_t i = 0; i < rep.index_history.size(); ++i)
                rows.push_back({std::to_string(i), csv_value(rep.index_history[i])});
            write_csv(join_path(opt.out_dir, "convergence.csv"), {"iteration", "norm_J"},
                      rows);
        }
        {
            std::vector<std::string> header = {"t"};
            for (std::size_t k = 0; k < R; ++k) {
                header.push_back("f_in_" + std::to_string(k));
                header.push_back("f_out_" + std::to_string(k));
            }
            std::vector<std::vector<std::string>> rows;
            rows.reserve(static_cast<std::size_t>(grid.instants) + 1);
            for (int i = 0; i <= grid.instants; ++i) {
                std::vector<std::string> row = {csv_value(i * grid.dts)};
                for (std::size_t k = 0; k < R; ++k) {
                    row.push_back(csv_value(rep.loadings[k].f_in[static_cast<std::size_t>(i)]));
                    row.push_back(
                        csv_value(rep.loadings[k].f_out()[static_cast<std::size_t>(i)]));
                }
                rows.push_back(std::move(row));
            }
            write_csv(join_path(opt.out_dir, "curves.csv"), header, rows);
        }
        {
            std::vector<std::string> header = {"bin", "t_start"};
            for (std::size_t k = 0; k < R; ++k) header.push_back("c_" + std::to_string(k));
            std::vector<std::vector<std::string>> rows;
            for (int n = 0; n < grid.N; ++n) {
                std::vector<std::string> row = {std::to_string(n), csv_value(n * grid.dt)};
                for (std::size_t k = 0; k < R; ++k)
                    row.push_back(csv_value(rep.times[k][static_cast<std::size_t>(n)]));
                rows.push_back(std::move(row));
            }
            write_csv(join_path(opt.out_dir, "travel_times.csv"), header, rows);
        }
        {
            std::vector<std::string> header = {"bin", "t_start"};
            for (std::size_t k = 0; k < R; ++k) header.push_back("g_" + std::to_string(k));
            std::vector<std::vector<std::string>> rows;
            for (int n = 0; n < grid.N; ++n) {
                std::vector<std::string> row = {std::to_string(n), csv_value(n * grid.dt)};
                for (std::size_t k = 0; k < R; ++k)
                    row.push_back(csv_value(rep.g[k][static_cast<std::size_t>(n)]));
                rows.push_back(std::move(row));
            }
            write_csv(join_path(opt.out_dir, "profile.csv"), header, rows);
        }

        json res;
        res["command"] = "solve-dynamic";
        res["scenario"] = opt.scenario_path;
        res["config"]["T0"] = sc.dyn_cfg.T0;
        res["config"]["T"] = sc.dyn_cfg.T;
        res["config"]["N"] = sc.dyn_cfg.N;
        res["config"]["M"] = sc.dyn_cfg.M;
        res["config"]["delta_tau"] = sc.dyn_cfg.delta_tau;
        res["config"]["tol_J"] = tol;
        res["config"]["max_iterations"] = sc.dyn_cfg.max_iterations;
        res["config"]["start"] = start;
        res["wall_ms"] = ms;
        res["result"]["kind"] = to_string(rep.kind);
        res["result"]["iterations"] = rep.iterations;
        res["result"]["norm_J"] = rep.norm_J;
        json cumulative = json::array();
        for (std::size_t k = 0; k < R; ++k)
            cumulative.push_back(
                rep.loadings[k].f_in[static_cast<std::size_t>(grid.N * grid.M)]);
        res["result"]["cumulative_departures"] = std::move(cumulative);
        json jw = json::array();
        for (const DynWitness& w : rep.witnesses) {
            json e;
            e["bin"] = w.bin;
            e["route"] = w.route;
            jw.push_back(std::move(e));
        }
        res["result"]["witnesses"] = std::move(jw);
        if (rep.kind == EqKind::NotConverged) {
            res["status"] = "error";
            res["error"]["kind"] = "not_converged";
            res["error"]["message"] = rep.message;
            write_result(opt, res);
            return exit_not_converged;
        }
        res["status"] = "ok";
        write_result(opt, res);
        return exit_ok;
    });
}

namespace {

// Nonempty route subsets of one O-D pair, ordered by size then lexicographic
// route indices; the cycling start generator walks these.
std::vector<std::vector<int>> support_subsets(int n_routes) {
    std::vector<std::vector<int>> subsets;
    for (unsigned mask = 1; mask < (1u << n_routes); ++mask) {
        std::vector<int> s;
        for (int k = 0; k < n_routes; ++k)
            if (mask & (1u << k)) s.push_back(k);
        subsets.push_back(std::move(s));
    }
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const std::vector<int>& a, const std::vector<int>& b) {
                         if (a.size() != b.size()) return a.size() < b.size();
                         return a < b;
                     });
    return subsets;
}

std::vector<int> support_of(const std::vector<double>& f_od, double eps) {
    std::vector<int> s;
    for (std::size_t k = 0; k < f_od.size(); ++k)
        if (f_od[k] > eps) s.push_back(static_cast<int>(k));
    return s;
}

}  // namespace

int run_enumerate(const RunOptions& opt) {
    return guarded(opt, "enumerate-equilibria", [&]() -> int {
        Scenario sc = load_scenario(opt, "static");
        ensure_out_dir(opt.out_dir);
        if (opt.starts < 1) throw validation_error("--starts: must be at least 1");
        const double tol = sc.solver.tol_J >= 0 ? sc.solver.tol_J : default_tol_J(sc.net);

        const std::size_t n_od = sc.net.od_pairs.size();
        std::vector<std::vector<std::vector<int>>> subsets(n_od);
        long total_combos = 1;
        for (std::size_t i = 0; i < n_od; ++i) {
            subsets[i] = support_subsets(static_cast<int>(sc.net.od_pairs[i].routes.size()));
            if (total_combos <= 100000)
                total_combos *= static_cast<long>(subsets[i].size());
        }
        const bool product_cycling = total_combos <= 100000;

        rng r(sc.seed);
        const auto t0 = Clock::now();

        struct Found {
            RouteFlows f;
            EqKind kind;
        };
        std::vector<Found> found;
        long converged = 0, failed = 0;

        for (int j = 0; j < opt.starts; ++j) {
            RouteFlows f0;
            long combo = product_cycling ? j % total_combos : 0;
            const long cycle = product_cycling ? j / total_combos : 0;
            for (std::size_t i = 0; i < n_od; ++i) {
                const auto& list = subsets[i];
                const std::size_t pick = product_cycling
                                             ? static_cast<std::size_t>(combo) % list.size()
                                             : static_cast<std::size_t>(j) % list.size();
                if (product_cycling) combo /= static_cast<long>(list.size());
                const std::vector<int>& support = list[pick];
                const double q = sc.net.od_pairs[i].demand;
                std::vector<double> row(sc.net.od_pairs[i].routes.size(), 0.0);
                if (cycle == 0) {
                    for (int k : support)
                        row[static_cast<std::size_t>(k)] =
                            q / static_cast<double>(support.size());
                } else {
                    double sum = 0.0;
                    std::vector<double> w(support.size());
                    for (std::size_t k = 0; k < support.size(); ++k) {
                        w[k] = -std::log(r.uniform_pos());
                        sum += w[k];
                    }
                    for (std::size_t k = 0; k < support.size(); ++k)
                        row[static_cast<std::size_t>(support[k])] = q * w[k] / sum;
                }
                f0.push_back(std::move(row));
            }

            EquilibriumReport rep;
            try {
                rep = solve_equilibrium(sc.net, f0, sc.solver);
            } catch (const step_underflow_error&) {
                ++failed;
                continue;
            }
            if (rep.kind == EqKind::NotConverged) {
                ++failed;
                continue;
            }
            ++converged;

            bool duplicate = false;
            for (const Found& e : found) {
                double dist = 0.0;
                for (std::size_t i = 0; i < e.f.size(); ++i)
                    for (std::size_t k = 0; k < e.f[i].size(); ++k)
                        dist = std::max(dist, std::abs(e.f[i][k] - rep.f[i][k]));
                if (dist < 1e-3) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) found.push_back({rep.f, rep.kind});
        }

        // Table-style ordering: vertices first, then larger supports.
        std::stable_sort(found.begin(), found.end(), [&](const Found& a, const Found& b) {
            for (std::size_t i = 0; i < n_od; ++i) {
                const double eps =
                    sc.solver.zero_flow_eps_rel * sc.net.od_pairs[i].demand;
                const std::vector<int> sa = support_of(a.f[i], eps);
                const std::vector<int> sb = support_of(b.f[i], eps);
                if (sa.size() != sb.size()) return sa.size() < sb.size();
                if (sa != sb) return sa < sb;
            }
            return false;
        });
        const double ms = wall_ms_since(t0);

        std::vector<std::string> header = {"index", "kind"};
        const std::vector<std::string> names = flow_names(sc.net);
        header.insert(header.end(), names.begin(), names.end());
        for (const std::string& n : names) header.push_back("c" + n.substr(1));
        for (std::size_t i = 0; i < n_od; ++i) header.push_back("v_" + std::to_string(i));
        header.push_back("z");

        std::vector<std::vector<std::string>> rows;
        json list = json::array();
        for (std::size_t e = 0; e < found.size(); ++e) {
            const AssignmentSnapshot snap = compute_snapshot(sc.net, found[e].f);
            std::vector<std::string> row = {std::to_string(e + 1),
                                            to_string(found[e].kind)};
            for (const auto& od : found[e].f)
                for (double v : od) row.push_back(csv_value(v));
            for (const auto& od : snap.c)
                for (double v : od) row.push_back(csv_value(v));
            for (double v : snap.v) row.push_back(csv_value(v));
            row.push_back(csv_value(snap.z));
            rows.push_back(std::move(row));

            json je;
            je["kind"] = to_string(found[e].kind);
            je["flows"] = found[e].f;
            je["costs"] = snap.c;
            je["od_times"] = snap.v;
            je["z"] = snap.z;
            list.push_back(std::move(je));
        }
        write_csv(join_path(opt.out_dir, "equilibria.csv"), header, rows);

        json res;
        res["status"] = "ok";
        res["command"] = "enumerate-equilibria";
        res["scenario"] = opt.scenario_path;
        res["config"] = solver_echo(sc, tol);
        res["config"]["starts"] = opt.starts;
        res["wall_ms"] = ms;
        res["result"]["equilibria"] = std::move(list);
        res["result"]["distinct"] = found.size();
        res["result"]["converged_starts"] = converged;
        res["result"]["failed_starts"] = failed;
        write_result(opt, res);
        return exit_ok;
    });
}

}  // namespace fifotap
