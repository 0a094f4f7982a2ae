#pragma once

#include <cstdint>
#include <vector>

#include "loopsim/bridges.hpp"
#include "loopsim/estimators.hpp"
#include "loopsim/lattice.hpp"

namespace loopsim {

// Good/bad labeling of the intervals of a time-discretised lattice: an
// interval (x, k) is h-good when h_x >= alpha and omega-good when no bridge
// endpoint lands in it.  good = h-good AND omega-good.
struct Labeling {
    std::vector<char> h_good;
    std::vector<char> omega_good;
    std::vector<char> good;
};

Labeling classify(const IntervalGrid& grid, const BridgeConfig& config,
                  const std::vector<double>& field, double alpha);

// Passage time with its certifying path (a valid walk whose good-even count
// equals the value).
struct PassageResult {
    long value = 0;
    std::vector<int> witness; // vertex / interval ids, source first
};

// Minimal number of good even-column intervals on a grid path from
// (origin, slab 0) to (x, slab 0), both endpoints counted when their site is
// even.  Exact via deque-based shortest path with 0/1 vertex weights.
PassageResult passage_time_gamma(const IntervalGrid& grid, const std::vector<char>& good,
                                 int x_site);

// Stable per-vertex key for the even-sublattice graph: zig-zag packed
// coordinates plus the slab index.  Labels are a pure function of (seed, key),
// so truncation radius and evaluation order never change them.
std::uint64_t xi_vertex_key(const std::vector<int>& coords, int slab);
bool xi_vertex_good(std::uint64_t seed, std::uint64_t key, double p);

std::vector<char> sample_xi_labels(const XiGraph& xi, double p, std::uint64_t seed);

// Labels for the coupling test: a vertex of the even-sublattice graph is good
// exactly when its interval in the grid is good.  Requires matching geometry
// (xi.radius == lattice.half(), xi.slabs == grid.slabs).
std::vector<char> induce_xi_labels(const XiGraph& xi, const IntervalGrid& grid,
                                   const std::vector<char>& good);

// Passage time on the even-sublattice graph from (origin, slab 0) to
// (x, slab 0); every vertex weight counts.
PassageResult passage_time_xi(const XiGraph& xi, const std::vector<char>& labels,
                              const std::vector<int>& x_coords);

// P(T(x) < phi*|x|) under i.i.d. labels, by a pruned lazy-label search that
// only ever touches vertices reachable below the threshold.  Equivalent to
// sampling full label fields and running passage_time_xi, but the per-replica
// cost is the size of the sub-threshold cluster, not the box.
MCEstimate tail_estimate_xi(int dim, int slabs, double p, double phi,
                            const std::vector<int>& x_coords, int radius, long n,
                            std::uint64_t seed, int threads = 1);

// P(T_Lambda(x) < phi*|x|) under the weighted loop measure (intensity-1
// samples reweighted by W) -- a ratio estimator sharing one stream.
MCEstimate tail_estimate_gamma(const ModelParams& params, double delta, double alpha,
                               double phi, int x_site, long n, std::uint64_t seed,
                               int threads = 1);

// Same tail under a plain (unweighted) Poisson bridge process of the given
// intensity; binomial standard error.
MCEstimate tail_estimate_gamma_poisson(const ModelParams& params, double intensity,
                                       double delta, double alpha, double phi, int x_site,
                                       long n, std::uint64_t seed, int threads = 1);

// Empirical check that the weighted measure is dominated by the plain
// intensity-theta process on the increasing event {T_Lambda(x) < phi*|x|}:
// PASS iff weighted <= dominating + 3 * combined sigma.
struct DominationReport {
    MCEstimate weighted;
    MCEstimate dominating;
    double slack = 0; // dominating + 3 sigma - weighted
    bool pass = false;
};

DominationReport domination_check(const ModelParams& params, double delta, double alpha,
                                  double phi, int x_site, long n, std::uint64_t seed,
                                  int threads = 1);

// True when adding `extra` to the configuration leaves the passage time to x
// no larger (bridges only spoil intervals, so this must always hold).
bool monotone_increase_check(const IntervalGrid& grid, const BridgeConfig& config,
                             const std::vector<double>& field, double alpha, int x_site,
                             const Bridge& extra);

// Lower bound on the probability that a single interval is good when the
// labels are made independent: (1 - P(h < alpha)^{1/N}) e^{-2 d theta delta}.
double independent_good_probability(double prob_h_below_alpha, int dim, int theta,
                                    double delta, int slabs);

} // namespace loopsim
