#include "fifotap/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fifotap/errors.hpp"

namespace fifotap {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw validation_error(path + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) fail(path + "." + it.key(), "unknown field");
    }
}

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double num_field(const json& j, const char* key, const std::string& path) {
    return num(require(j, key, path), path + "." + key);
}

double num_or(const json& j, const char* key, const std::string& path, double fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : num(*it, path + "." + key);
}

long int_or(const json& j, const char* key, const std::string& path, long fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : integer(*it, path + "." + key);
}

int lookup(const std::map<std::string, int>& table, const std::string& name,
           const std::string& path, const char* kind) {
    const auto it = table.find(name);
    if (it == table.end()) fail(path, std::string("unknown ") + kind + " '" + name + "'");
    return it->second;
}

// ---- K-shortest machinery ----

bool lex_less(const std::vector<int>& a, const std::vector<int>& b,
              const std::vector<std::string>& ids) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (ids[static_cast<std::size_t>(a[i])] != ids[static_cast<std::size_t>(b[i])])
            return ids[static_cast<std::size_t>(a[i])] < ids[static_cast<std::size_t>(b[i])];
    return a.size() < b.size();
}

struct FoundPath {
    bool found = false;
    double cost = 0.0;
    std::vector<int> links;
};

FoundPath shortest_path(const Network& net, const std::vector<std::string>& ids, int src,
                        int dst, const std::vector<char>& node_blocked,
                        const std::vector<char>& link_blocked) {
    const double inf = std::numeric_limits<double>::infinity();
    if (node_blocked[static_cast<std::size_t>(src)] ||
        node_blocked[static_cast<std::size_t>(dst)])
        return {};
    std::vector<double> dist(static_cast<std::size_t>(net.n_nodes), inf);
    std::vector<std::vector<int>> path(static_cast<std::size_t>(net.n_nodes));
    std::vector<char> done(static_cast<std::size_t>(net.n_nodes), 0);
    dist[static_cast<std::size_t>(src)] = 0.0;
    for (;;) {
        int u = -1;
        double du = inf;
        for (int v = 0; v < net.n_nodes; ++v)
            if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < du) {
                du = dist[static_cast<std::size_t>(v)];
                u = v;
            }
        if (u < 0) return {};
        if (u == dst)
            return {true, dist[static_cast<std::size_t>(dst)],
                    path[static_cast<std::size_t>(dst)]};
        done[static_cast<std::size_t>(u)] = 1;
        for (std::size_t a = 0; a < net.links.size(); ++a) {
            if (link_blocked[a] || net.links[a].from != u) continue;
            const auto w = static_cast<std::size_t>(net.links[a].to);
            if (node_blocked[w] || done[w]) continue;
            const double nd = du + net.links[a].t0;
            std::vector<int> cand = path[static_cast<std::size_t>(u)];
            cand.push_back(static_cast<int>(a));
            if (nd < dist[w] || (nd == dist[w] && lex_less(cand, path[w], ids))) {
                dist[w] = nd;
                path[w] = std::move(cand);
            }
        }
    }
}

double path_cost(const Network& net, const std::vector<int>& links) {
    double c = 0.0;
    for (int a : links) c += net.links[static_cast<std::size_t>(a)].t0;
    return c;
}

}  // namespace

std::vector<std::vector<Route>> k_shortest_routes(const Network& net,
                                                  const std::vector<std::string>& link_ids,
                                                  int k) {
    if (k < 1) throw validation_error("route_gen.k: must be at least 1");
    std::vector<std::vector<Route>> out;
    out.reserve(net.od_pairs.size());
    const std::vector<char> open_nodes(static_cast<std::size_t>(net.n_nodes), 0);
    const std::vector<char> open_links(net.links.size(), 0);

    for (std::size_t i = 0; i < net.od_pairs.size(); ++i) {
        const OdPair& od = net.od_pairs[i];
        const FoundPath first =
            shortest_path(net, link_ids, od.origin, od.dest, open_nodes, open_links);
        if (!first.found)
            throw validation_error("od[" + std::to_string(i) +
                                   "]: origin and destination are disconnected");
        std::vector<std::vector<int>> found = {first.links};
        std::vector<std::pair<double, std::vector<int>>> candidates;

        while (static_cast<int>(found.size()) < k) {
            const std::vector<int> prev = found.back();
            std::vector<int> nodes_on = {od.origin};
            for (int a : prev) nodes_on.push_back(net.links[static_cast<std::size_t>(a)].to);

            for (std::size_t sp = 0; sp < prev.size(); ++sp) {
                const int spur = nodes_on[sp];
                const std::vector<int> root(prev.begin(),
                                            prev.begin() + static_cast<long>(sp));
                std::vector<char> node_blocked(static_cast<std::size_t>(net.n_nodes), 0);
                std::vector<char> link_blocked(net.links.size(), 0);
                for (const auto& p : found)
                    if (p.size() > sp && std::equal(root.begin(), root.end(), p.begin()))
                        link_blocked[static_cast<std::size_t>(p[sp])] = 1;
                for (std::size_t jn = 0; jn < sp; ++jn)
                    node_blocked[static_cast<std::size_t>(nodes_on[jn])] = 1;

                const FoundPath spur_path =
                    shortest_path(net, link_ids, spur, od.dest, node_blocked, link_blocked);
                if (!spur_path.found) continue;
                std::vector<int> full = root;
                full.insert(full.end(), spur_path.links.begin(), spur_path.links.end());
                bool dup =
                    std::find(found.begin(), found.end(), full) != found.end();
                for (const auto& c : candidates)
                    if (c.second == full) dup = true;
                if (!dup) candidates.emplace_back(path_cost(net, full), std::move(full));
            }

            if (candidates.empty()) break;
            std::size_t best = 0;
            for (std::size_t c = 1; c < candidates.size(); ++c)
                if (candidates[c].first < candidates[best].first ||
                    (candidates[c].first == candidates[best].first &&
                     lex_less(candidates[c].second, candidates[best].second, link_ids)))
                    best = c;
            found.push_back(std::move(candidates[best].second));
            candidates.erase(candidates.begin() + static_cast<long>(best));
        }

        std::vector<Route> routes;
        routes.reserve(found.size());
        for (auto& p : found) routes.push_back(Route{std::move(p)});
        out.push_back(std::move(routes));
    }
    return out;
}

namespace {

Scenario parse_document(const json& j, const std::string& label) {
    Scenario s;
    std::vector<char> dyn_covered;
    check_keys(j, {"version", "mode", "network", "od", "routes", "route_gen", "solver",
                   "dynamic"},
               label);
    s.version = static_cast<int>(int_or(j, "version", label, 1));
    if (s.version != 1) fail(label + ".version", "unsupported version");
    s.mode = str(require(j, "mode", label), label + ".mode");
    if (s.mode != "static" && s.mode != "elastic" && s.mode != "dynamic")
        fail(label + ".mode", "expected \"static\", \"elastic\", or \"dynamic\"");
    const bool dynamic_mode = s.mode == "dynamic";

    // network block
    const json& jnet = require(j, "network", label);
    const std::string pnet = label + ".network";
    check_keys(jnet, {"nodes", "links"}, pnet);
    const json& jnodes = require(jnet, "nodes", pnet);
    if (!jnodes.is_array() || jnodes.empty()) fail(pnet + ".nodes", "expected a non-empty array");
    std::map<std::string, int> node_index;
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        const std::string p = pnet + ".nodes[" + std::to_string(i) + "]";
        const std::string name = str(jnodes[i], p);
        if (name.empty()) fail(p, "empty node name");
        if (!node_index.emplace(name, static_cast<int>(i)).second)
            fail(p, "duplicate node '" + name + "'");
        s.nodes.push_back(name);
    }
    s.net.n_nodes = static_cast<int>(s.nodes.size());

    const json& jlinks = require(jnet, "links", pnet);
    if (!jlinks.is_array() || jlinks.empty()) fail(pnet + ".links", "expected a non-empty array");
    std::map<std::string, int> link_index;
    std::vector<char> had_t0;
    for (std::size_t i = 0; i < jlinks.size(); ++i) {
        const std::string p = pnet + ".links[" + std::to_string(i) + "]";
        const json& jl = jlinks[i];
        check_keys(jl, {"id", "from", "to", "t0", "cap", "alpha", "beta"}, p);
        const std::string id = str(require(jl, "id", p), p + ".id");
        if (id.empty()) fail(p + ".id", "empty link id");
        if (!link_index.emplace(id, static_cast<int>(i)).second)
            fail(p + ".id", "duplicate link '" + id + "'");
        s.link_ids.push_back(id);
        Link link;
        link.from = lookup(node_index, str(require(jl, "from", p), p + ".from"), p + ".from",
                           "node");
        link.to = lookup(node_index, str(require(jl, "to", p), p + ".to"), p + ".to", "node");
        const bool has_t0 = jl.contains("t0");
        if (!dynamic_mode && !has_t0) fail(p + ".t0", "missing field");
        if (!dynamic_mode && !jl.contains("cap")) fail(p + ".cap", "missing field");
        link.t0 = num_or(jl, "t0", p, 1.0);
        link.cap = num_or(jl, "cap", p, 1.0);
        link.alpha = num_or(jl, "alpha", p, 0.15);
        link.beta = static_cast<int>(int_or(jl, "beta", p, 4));
        had_t0.push_back(has_t0 ? 1 : 0);
        s.net.links.push_back(link);
    }

    // od block
    const json& jod = require(j, "od", label);
    if (!jod.is_array() || jod.empty()) fail(label + ".od", "expected a non-empty array");
    for (std::size_t i = 0; i < jod.size(); ++i) {
        const std::string p = label + ".od[" + std::to_string(i) + "]";
        const json& jo = jod[i];
        check_keys(jo, {"origin", "dest", "demand", "demand_fn"}, p);
        OdPair od;
        od.origin = lookup(node_index, str(require(jo, "origin", p), p + ".origin"),
                           p + ".origin", "node");
        od.dest = lookup(node_index, str(require(jo, "dest", p), p + ".dest"), p + ".dest",
                         "node");
        if (!dynamic_mode && !jo.contains("demand")) fail(p + ".demand", "missing field");
        od.demand = num_or(jo, "demand", p, 0.0);
        if (od.demand < 0) fail(p + ".demand", "must be nonnegative");
        if (jo.contains("demand_fn")) {
            if (s.mode != "elastic") fail(p + ".demand_fn", "only valid in elastic mode");
            const json& jf = jo["demand_fn"];
            const std::string pf = p + ".demand_fn";
            check_keys(jf, {"a", "b"}, pf);
            DemandFunction fn;
            fn.a = num_field(jf, "a", pf);
            fn.b = num_or(jf, "b", pf, 0.0);
            if (!(fn.a > 0)) fail(pf + ".a", "must be positive");
            if (!(fn.b >= 0)) fail(pf + ".b", "must be nonnegative");
            s.demand_fns.push_back(fn);
        } else if (s.mode == "elastic") {
            fail(p + ".demand_fn", "missing field (required in elastic mode)");
        }
        s.net.od_pairs.push_back(od);
    }

    // routes
    const bool has_routes = j.contains("routes");
    const bool has_gen = j.contains("route_gen");
    if (has_routes == has_gen)
        fail(label, "exactly one of 'routes' and 'route_gen' must be present");

    // dynamic block parsed before route generation so free-flow times can
    // stand in for missing t0 weights
    if (dynamic_mode) {
        if (s.net.od_pairs.size() != 1)
            fail(label + ".od", "dynamic mode supports exactly one O-D pair");
        const json& jd = require(j, "dynamic", label);
        const std::string pd = label + ".dynamic";
        check_keys(jd, {"T0", "T", "N", "M", "q0", "demand_per_bin", "links", "delta_tau",
                        "tol_J", "max_iterations"},
                   pd);
        s.has_dynamic = true;
        s.dyn_cfg.T0 = num_or(jd, "T0", pd, 1.0);
        s.dyn_cfg.T = num_or(jd, "T", pd, 8.0);
        s.dyn_cfg.N = static_cast<int>(int_or(jd, "N", pd, 20));
        s.dyn_cfg.M = static_cast<int>(int_or(jd, "M", pd, 10));
        s.dyn_cfg.delta_tau = num_or(jd, "delta_tau", pd, 0.05);
        s.dyn_cfg.tol_J = num_or(jd, "tol_J", pd, -1.0);
        if (jd.contains("tol_J") && !(s.dyn_cfg.tol_J >= 0))
            fail(pd + ".tol_J", "must be nonnegative");
        s.dyn_cfg.max_iterations = int_or(jd, "max_iterations", pd, 100000);
        if (s.dyn_cfg.max_iterations < 1) fail(pd + ".max_iterations", "must be at least 1");

        const bool has_q0 = jd.contains("q0");
        const bool has_bins = jd.contains("demand_per_bin");
        if (has_q0 == has_bins)
            fail(pd, "exactly one of 'q0' and 'demand_per_bin' must be present");
        if (has_q0) {
            s.dyn.q0 = num_field(jd, "q0", pd);
            if (!(s.dyn.q0 > 0)) fail(pd + ".q0", "must be positive");
        } else {
            const json& jb = jd["demand_per_bin"];
            const std::string pb = pd + ".demand_per_bin";
            if (!jb.is_array() || jb.size() != static_cast<std::size_t>(s.dyn_cfg.N))
                fail(pb, "expected an array of N entries");
            for (std::size_t i = 0; i < jb.size(); ++i)
                s.dyn.demand_per_bin.push_back(
                    num(jb[i], pb + "[" + std::to_string(i) + "]"));
        }

        s.dyn.links.assign(s.net.links.size(), PointQueueLink{});
        std::vector<char> covered(s.net.links.size(), 0);
        const json& jdl = require(jd, "links", pd);
        if (!jdl.is_array()) fail(pd + ".links", "expected an array");
        for (std::size_t i = 0; i < jdl.size(); ++i) {
            const std::string p = pd + ".links[" + std::to_string(i) + "]";
            const json& jl = jdl[i];
            check_keys(jl, {"id", "fft", "qc"}, p);
            const int a = lookup(link_index, str(require(jl, "id", p), p + ".id"), p + ".id",
                                 "link");
            if (covered[static_cast<std::size_t>(a)])
                fail(p + ".id", "duplicate dynamic entry for link");
            covered[static_cast<std::size_t>(a)] = 1;
            PointQueueLink pq;
            pq.fft = num_field(jl, "fft", p);
            pq.qc = num_field(jl, "qc", p);
            if (!(pq.fft >= 0)) fail(p + ".fft", "must be nonnegative");
            if (!(pq.qc > 0)) fail(p + ".qc", "must be positive");
            s.dyn.links[static_cast<std::size_t>(a)] = pq;
            if (!had_t0[static_cast<std::size_t>(a)])
                s.net.links[static_cast<std::size_t>(a)].t0 = pq.fft > 0 ? pq.fft : 1.0;
        }
        dyn_covered = covered;  // route coverage verified once routes are known
    } else if (j.contains("dynamic")) {
        fail(label + ".dynamic", "only valid in dynamic mode");
    }

    if (has_routes) {
        const json& jr = j["routes"];
        const std::string pr = label + ".routes";
        if (!jr.is_array() || jr.empty()) fail(pr, "expected a non-empty array");
        for (std::size_t i = 0; i < jr.size(); ++i) {
            const std::string p = pr + "[" + std::to_string(i) + "]";
            const json& jroute = jr[i];
            check_keys(jroute, {"od", "links"}, p);
            const long od = integer(require(jroute, "od", p), p + ".od");
            if (od < 0 || od >= static_cast<long>(s.net.od_pairs.size()))
                fail(p + ".od", "index out of range");
            const json& jseq = require(jroute, "links", p);
            if (!jseq.is_array() || jseq.empty())
                fail(p + ".links", "expected a non-empty array");
            Route route;
            for (std::size_t l = 0; l < jseq.size(); ++l) {
                const std::string pl = p + ".links[" + std::to_string(l) + "]";
                route.links.push_back(
                    lookup(link_index, str(jseq[l], pl), pl, "link"));
            }
            s.net.od_pairs[static_cast<std::size_t>(od)].routes.push_back(std::move(route));
        }
    } else {
        const json& jg = j["route_gen"];
        const std::string pg = label + ".route_gen";
        check_keys(jg, {"k"}, pg);
        const long k = integer(require(jg, "k", pg), pg + ".k");
        if (k < 1) fail(pg + ".k", "must be at least 1");
        s.generated_routes = true;
        s.route_gen_k = static_cast<int>(k);
        const auto generated = k_shortest_routes(s.net, s.link_ids, s.route_gen_k);
        for (std::size_t i = 0; i < generated.size(); ++i)
            s.net.od_pairs[i].routes = generated[i];
    }

    // solver block
    if (j.contains("solver")) {
        const json& js = j["solver"];
        const std::string ps = label + ".solver";
        check_keys(js, {"delta_tau", "tau_max", "tol_J", "perturb_eps", "max_perturbations",
                        "seed"},
                   ps);
        s.solver.delta_tau = num_or(js, "delta_tau", ps, s.solver.delta_tau);
        if (!(s.solver.delta_tau > 0)) fail(ps + ".delta_tau", "must be positive");
        s.solver.tau_max = num_or(js, "tau_max", ps, s.solver.tau_max);
        if (!(s.solver.tau_max > 0)) fail(ps + ".tau_max", "must be positive");
        s.solver.tol_J = num_or(js, "tol_J", ps, s.solver.tol_J);
        if (js.contains("tol_J") && !(s.solver.tol_J >= 0))
            fail(ps + ".tol_J", "must be nonnegative");
        s.solver.perturb_eps = num_or(js, "perturb_eps", ps, s.solver.perturb_eps);
        if (!(s.solver.perturb_eps > 0)) fail(ps + ".perturb_eps", "must be positive");
        const long mp = int_or(js, "max_perturbations", ps, s.solver.max_perturbations);
        if (mp < 0) fail(ps + ".max_perturbations", "must be nonnegative");
        s.solver.max_perturbations = static_cast<int>(mp);
        if (js.contains("seed")) {
            const json& jseed = js["seed"];
            if (!jseed.is_number_integer() && !jseed.is_number_unsigned())
                fail(ps + ".seed", "expected an integer");
            if (jseed.is_number_integer() && jseed.get<long long>() < 0)
                fail(ps + ".seed", "must be nonnegative");
            s.seed = jseed.get<std::uint64_t>();
        }
    }

    validate_network(s.net);
    if (dynamic_mode) {
        s.dyn.routes.clear();
        for (const Route& r : s.net.od_pairs[0].routes) s.dyn.routes.push_back({r.links});
        for (const DynRoute& r : s.dyn.routes)
            for (int a : r.links)
                if (!dyn_covered[static_cast<std::size_t>(a)])
                    fail(label + ".dynamic.links",
                         "no entry for link '" + s.link_ids[static_cast<std::size_t>(a)] +
                             "' used by a route");
        validate_dyn_network(s.dyn, s.dyn_cfg);
    }
    return s;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& label) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
        const long line = 1 + std::count(text.begin(),
                                         text.begin() + static_cast<long>(stop), '\n');
        throw validation_error(label + " line " + std::to_string(line) + ": " + e.what());
    }
    return parse_document(j, label);
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["version"] = s.version;
    j["mode"] = s.mode;
    j["network"]["nodes"] = s.nodes;
    json links = json::array();
    for (std::size_t i = 0; i < s.net.links.size(); ++i) {
        const Link& l = s.net.links[i];
        json jl;
        jl["id"] = s.link_ids[i];
        jl["from"] = s.nodes[static_cast<std::size_t>(l.from)];
        jl["to"] = s.nodes[static_cast<std::size_t>(l.to)];
        jl["t0"] = l.t0;
        jl["cap"] = l.cap;
        jl["alpha"] = l.alpha;
        jl["beta"] = l.beta;
        links.push_back(std::move(jl));
    }
    j["network"]["links"] = std::move(links);

    json ods = json::array();
    for (std::size_t i = 0; i < s.net.od_pairs.size(); ++i) {
        const OdPair& od = s.net.od_pairs[i];
        json jo;
        jo["origin"] = s.nodes[static_cast<std::size_t>(od.origin)];
        jo["dest"] = s.nodes[static_cast<std::size_t>(od.dest)];
        jo["demand"] = od.demand;
        if (i < s.demand_fns.size()) {
            jo["demand_fn"]["a"] = s.demand_fns[i].a;
            jo["demand_fn"]["b"] = s.demand_fns[i].b;
        }
        ods.push_back(std::move(jo));
    }
    j["od"] = std::move(ods);

    if (s.generated_routes) {
        j["route_gen"]["k"] = s.route_gen_k;
    } else {
        json routes = json::array();
        for (std::size_t i = 0; i < s.net.od_pairs.size(); ++i)
            for (const Route& r : s.net.od_pairs[i].routes) {
                json jr;
                jr["od"] = static_cast<int>(i);
                json seq = json::array();
                for (int a : r.links) seq.push_back(s.link_ids[static_cast<std::size_t>(a)]);
                jr["links"] = std::move(seq);
                routes.push_back(std::move(jr));
            }
        j["routes"] = std::move(routes);
    }

    j["solver"]["delta_tau"] = s.solver.delta_tau;
    j["solver"]["tau_max"] = s.solver.tau_max;
    if (s.solver.tol_J >= 0) j["solver"]["tol_J"] = s.solver.tol_J;
    j["solver"]["perturb_eps"] = s.solver.perturb_eps;
    j["solver"]["max_perturbations"] = s.solver.max_perturbations;
    j["solver"]["seed"] = s.seed;

    if (s.has_dynamic) {
        json jd;
        jd["T0"] = s.dyn_cfg.T0;
        jd["T"] = s.dyn_cfg.T;
        jd["N"] = s.dyn_cfg.N;
        jd["M"] = s.dyn_cfg.M;
        jd["delta_tau"] = s.dyn_cfg.delta_tau;
        if (s.dyn_cfg.tol_J >= 0) jd["tol_J"] = s.dyn_cfg.tol_J;
        jd["max_iterations"] = s.dyn_cfg.max_iterations;
        if (s.dyn.demand_per_bin.empty())
            jd["q0"] = s.dyn.q0;
        else
            jd["demand_per_bin"] = s.dyn.demand_per_bin;
        json dlinks = json::array();
        for (std::size_t a = 0; a < s.dyn.links.size(); ++a) {
            json jl;
            jl["id"] = s.link_ids[a];
            jl["fft"] = s.dyn.links[a].fft;
            jl["qc"] = s.dyn.links[a].qc;
            dlinks.push_back(std::move(jl));
        }
        jd["links"] = std::move(dlinks);
        j["dynamic"] = std::move(jd);
    }

    return j.dump(2) + "\n";
}

}  // namespace fifotap
