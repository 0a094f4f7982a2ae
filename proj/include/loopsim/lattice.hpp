#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace loopsim {

// Finite box {-L/2, ..., L/2}^d with free boundaries.  Sites are ordered
// lexicographically by coordinate vector; edges join sites at l1-distance 1
// and are listed once each, ordered by (lower site, axis).
struct Lattice {
    int dim = 0;
    int side = 0;                          // L, even; L = 0 degenerates to a single site
    std::vector<std::pair<int, int>> edges;

    int half() const { return side / 2; }
    int points_per_axis() const { return side + 1; }
    int site_count() const;

    int coord(int site, int axis) const;
    std::vector<int> site_coords(int site) const;
    int site_at(const std::vector<int>& coords) const;   // -1 if outside the box
    bool is_even(int site) const;                        // coordinate sum parity
    int origin() const { return site_at(std::vector<int>(dim, 0)); }
    int l1_distance(int a, int b) const;

    const std::vector<int>& neighbors(int site) const { return adjacency_[site]; }

    std::vector<std::vector<int>> adjacency_;            // filled by build_lattice
};

Lattice build_lattice(int dim, int side);

// Path of n_sites sites at coordinates 0..n_sites-1 (d = 1, origin at the left
// end).  Covers the tiny pair/triple systems the centered box cannot express.
Lattice build_open_chain(int n_sites);

// Time-discretised version of the box: every site carries `slabs` intervals of
// width `slab_width`, periodic in the slab index.  Interval (x,k) neighbours
// (y,k) for lattice edges xy and (x,k+-1 mod slabs).
struct IntervalGrid {
    Lattice lattice;
    int slabs = 0;
    double slab_width = 0;
    double beta = 0;

    int interval_count() const { return lattice.site_count() * slabs; }
    int interval_id(int site, int k) const { return site * slabs + k; }
    int interval_site(int id) const { return id / slabs; }
    int interval_slab(int id) const { return id % slabs; }

    // Neighbour multiset per the adjacency rules; self-pairs (slabs == 1) are
    // dropped so the relation stays irreflexive, and the two vertical
    // neighbours collapse to a duplicated entry when slabs == 2.
    std::vector<int> neighbors(int id) const;
    // Same with duplicates removed, for graph algorithms.
    std::vector<int> neighbor_set(int id) const;
};

IntervalGrid build_interval_grid(const Lattice& lattice, double beta, double slab_width);

// Even-sublattice graph used by the independent-label percolation bound:
// vertices are the even sites of the linf-radius-R box crossed with `slabs`
// periodic slabs.  Same-slab adjacency joins sites at l1-distance exactly 2
// (the natural next-nearest-neighbour relation inside the even sublattice);
// vertical adjacency joins slabs k and k+-1 mod slabs at the same site.
struct XiGraph {
    int dim = 0;
    int radius = 0;
    int slabs = 0;
    std::vector<std::vector<int>> site_coords;    // even sites, lexicographic
    std::vector<std::vector<int>> site_adjacency; // same-slab neighbour sites

    int site_count() const { return static_cast<int>(site_coords.size()); }
    int vertex_count() const { return site_count() * slabs; }
    int vertex_id(int site, int k) const { return site * slabs + k; }
    int vertex_site(int id) const { return id / slabs; }
    int vertex_slab(int id) const { return id % slabs; }
    int site_at(const std::vector<int>& coords) const;   // -1 if absent

    std::vector<int> vertex_neighbors(int id) const;     // deduplicated
};

XiGraph build_xi(int dim, int radius, int slabs);

} // namespace loopsim
