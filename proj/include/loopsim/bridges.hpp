#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "loopsim/lattice.hpp"

namespace loopsim {

// A bridge sits on a lattice edge at a time on the circle [0,beta).  A cross
// is traversed keeping direction, a bar is traversed reversing direction.
enum class BridgeKind : std::uint8_t { cross, bar };

struct Bridge {
    int edge;
    double time;
    BridgeKind kind;
};

// One endpoint of a bridge as seen from a site column, plus the location of
// the partner endpoint so loop traversal can jump in O(1).
struct ColumnHit {
    double time;
    int bridge;
    int partner_site;
    int partner_hit;   // index into column_hits[partner_site]
};

struct BridgeConfig {
    double beta = 0;
    std::vector<Bridge> bridges;                     // sorted by (edge, time)
    std::vector<std::vector<ColumnHit>> column_hits; // per site, sorted by time
    long resampled_ties = 0;                         // duplicate times redrawn

    long size() const { return static_cast<long>(bridges.size()); }
};

// Independent Poisson(intensity * beta) bridge count per edge; times uniform
// on [0,beta), each bridge a cross with probability u.  Each edge consumes an
// independent substream of `seed`, so results do not depend on edge order.
BridgeConfig sample_bridges(const Lattice& lattice, double beta, double u,
                            double intensity, std::uint64_t seed);

// Assemble a configuration from explicit bridges (tests, replay).  Bridges are
// sorted and exact duplicate (edge, time) pairs rejected.
BridgeConfig make_bridge_config(const Lattice& lattice, double beta,
                                std::vector<Bridge> bridges);

struct BridgeStatistics {
    long total = 0;
    double mean_count_per_edge = 0;   // across configs and edges
    double var_count_per_edge = 0;
    double cross_fraction = 0;
};

BridgeStatistics count_statistics(const Lattice& lattice,
                                  const std::vector<BridgeConfig>& configs);

// CSV round trip: "site_a,site_b,time,kind" rows with full double precision,
// so a reloaded configuration reproduces the loop decomposition exactly.
void dump_bridges(const Lattice& lattice, const BridgeConfig& config, std::ostream& out);
BridgeConfig load_bridges(const Lattice& lattice, double beta, std::istream& in);

} // namespace loopsim
