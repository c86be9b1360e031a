#pragma once
// Scenario files: a JSON description of the network, demands, routes, solver
// settings, and (optionally) the dynamic horizon. Parsing validates every
// cross-reference and produces ready-to-solve structures.

#include <cstdint>
#include <string>
#include <vector>

#include "fifotap/dynamic.hpp"
#include "fifotap/elastic.hpp"
#include "fifotap/network.hpp"
#include "fifotap/static_solver.hpp"

namespace fifotap {

struct Scenario {
    int version = 1;
    std::string mode;  // "static", "elastic", or "dynamic"
    std::vector<std::string> nodes;
    std::vector<std::string> link_ids;
    Network net;
    // Route provenance: either listed in the file or generated as the
    // K shortest by free-flow time.
    bool generated_routes = false;
    int route_gen_k = 0;
    // Per-O-D willingness curves; filled in elastic mode.
    std::vector<DemandFunction> demand_fns;
    SolverConfig solver;
    std::uint64_t seed = 0;
    // Dynamic-mode extras; dyn.links is index-aligned with net.links.
    bool has_dynamic = false;
    DynNetwork dyn;
    DynConfig dyn_cfg;
};

// Reads and validates a scenario file. Throws io_error when the file cannot
// be read and validation_error (with the offending field path) otherwise.
Scenario parse_scenario(const std::string& path);

// Same, from an in-memory document; label names the source in messages.
Scenario parse_scenario_text(const std::string& text, const std::string& label);

// Canonical JSON for the scenario; parse(serialize(s)) reproduces s.
std::string serialize_scenario(const Scenario& s);

// K shortest loop-free routes per O-D pair by free-flow time, enumerated by
// repeated deviation from already-found paths. Ordered by cost, then by the
// lexicographic sequence of link ids. Returns every simple route when fewer
// than K exist; throws validation_error for a disconnected pair.
std::vector<std::vector<Route>> k_shortest_routes(const Network& net,
                                                  const std::vector<std::string>& link_ids,
                                                  int k);

}  // namespace fifotap
