#pragma once

#include <iosfwd>
#include <vector>

#include "loopsim/bridges.hpp"
#include "loopsim/lattice.hpp"

namespace loopsim {

// Loop decomposition of the space-time cylinder Lambda x [0,beta).
//
// The bridge endpoints cut every site column into maximal vertical segments;
// a column with k endpoints has k segments [t_j, t_{j+1}) (cyclically, the
// last one wrapping through beta ~ 0), a column with none is a single full
// circle.  A traversal moves vertically through a segment, and at the bridge
// endpoint terminating it jumps to the partner column: across a cross it
// keeps its direction, across a bar it reverses.  Iterating this rule
// partitions the segments into closed loops.  Segment membership at a point
// (x,t) is right-continuous: a point at an endpoint time belongs to the
// segment that starts there.
struct LoopDecomposition {
    double beta = 0;

    std::vector<int> col_offset;   // site -> first segment id; size n_sites+1
    std::vector<int> seg_site;
    std::vector<double> seg_start; // within a column, ascending
    std::vector<double> seg_len;
    std::vector<int> seg_loop;
    std::vector<std::vector<int>> loops; // segment ids in traversal order
    std::vector<double> loop_length;     // total vertical length per loop

    int loop_count() const { return static_cast<int>(loops.size()); }
    int segment_count() const { return static_cast<int>(seg_site.size()); }
    int segment_at(int site, double t) const;
    double total_length() const;
};

LoopDecomposition trace_loops(const Lattice& lattice, const BridgeConfig& config);

// Loop id through the point (site, t).
int loop_through(const LoopDecomposition& decomp, int site, double t);

// Vertical length profiles of the two arcs of the loop through the origin
// point (0-site, time 0) and the terminal point: `plus` is covered by the
// traversal leaving (0,0) upward until its first arrival at the terminal,
// `minus` is the remainder of the loop.
struct SplitLengths {
    std::vector<double> plus;  // indexed by site
    std::vector<double> minus;
    int loop = -1;
};

SplitLengths split_lengths(const Lattice& lattice, const BridgeConfig& config,
                           const LoopDecomposition& decomp, int terminal_site,
                           double terminal_time);

// Debug dump: one row per segment, grouped by loop in traversal order.
void dump_loops(const LoopDecomposition& decomp, std::ostream& out);

} // namespace loopsim
