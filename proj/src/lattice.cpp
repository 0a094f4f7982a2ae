#include "loopsim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loopsim {

int Lattice::site_count() const {
    int n = 1;
    for (int a = 0; a < dim; ++a) n *= points_per_axis();
    return n;
}

int Lattice::coord(int site, int axis) const {
    // lexicographic order: axis 0 varies slowest
    int stride = 1;
    for (int a = axis + 1; a < dim; ++a) stride *= points_per_axis();
    return (site / stride) % points_per_axis() - half();
}

std::vector<int> Lattice::site_coords(int site) const {
    std::vector<int> c(dim);
    for (int a = 0; a < dim; ++a) c[a] = coord(site, a);
    return c;
}

int Lattice::site_at(const std::vector<int>& coords) const {
    if (static_cast<int>(coords.size()) != dim) return -1;
    int id = 0;
    for (int a = 0; a < dim; ++a) {
        int shifted = coords[a] + half();
        if (shifted < 0 || shifted > side) return -1;
        id = id * points_per_axis() + shifted;
    }
    return id;
}

bool Lattice::is_even(int site) const {
    int sum = 0;
    for (int a = 0; a < dim; ++a) sum += coord(site, a);
    return ((sum % 2) + 2) % 2 == 0;
}

int Lattice::l1_distance(int a, int b) const {
    int d = 0;
    for (int ax = 0; ax < dim; ++ax) d += std::abs(coord(a, ax) - coord(b, ax));
    return d;
}

namespace {
Lattice build_box(int dim, int side) {
    Lattice lat;
    lat.dim = dim;
    lat.side = side;

    const int n = lat.site_count();
    lat.adjacency_.assign(n, {});
    for (int s = 0; s < n; ++s) {
        std::vector<int> c = lat.site_coords(s);
        for (int a = 0; a < dim; ++a) {
            if (c[a] + 1 <= lat.side - lat.half()) {
                std::vector<int> nb = c;
                ++nb[a];
                int t = lat.site_at(nb);
                lat.edges.emplace_back(s, t);
                lat.adjacency_[s].push_back(t);
                lat.adjacency_[t].push_back(s);
            }
        }
    }
    return lat;
}
} // namespace

Lattice build_lattice(int dim, int side) {
    if (dim < 1) throw std::invalid_argument("build_lattice: dimension must be >= 1");
    if (side < 0 || side % 2 != 0)
        throw std::invalid_argument("build_lattice: side must be an even non-negative integer");
    return build_box(dim, side);
}

Lattice build_open_chain(int n_sites) {
    if (n_sites < 1) throw std::invalid_argument("build_open_chain: need at least one site");
    return build_box(1, n_sites - 1);
}

std::vector<int> IntervalGrid::neighbors(int id) const {
    const int site = interval_site(id);
    const int k = interval_slab(id);
    std::vector<int> out;
    for (int nb : lattice.neighbors(site)) out.push_back(interval_id(nb, k));
    if (slabs > 1) {
        out.push_back(interval_id(site, (k + 1) % slabs));
        out.push_back(interval_id(site, (k - 1 + slabs) % slabs));
    }
    return out;
}

std::vector<int> IntervalGrid::neighbor_set(int id) const {
    std::vector<int> out = neighbors(id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

IntervalGrid build_interval_grid(const Lattice& lattice, double beta, double slab_width) {
    if (beta <= 0 || slab_width <= 0)
        throw std::invalid_argument("build_interval_grid: beta and slab width must be positive");
    const double ratio = beta / slab_width;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 || rounded < 1)
        throw std::invalid_argument(
            "build_interval_grid: slab width must divide beta into an integer number of slabs");

    IntervalGrid grid;
    grid.lattice = lattice;
    grid.slabs = static_cast<int>(rounded);
    grid.slab_width = slab_width;
    grid.beta = beta;
    return grid;
}

int XiGraph::site_at(const std::vector<int>& coords) const {
    int lo = 0, hi = site_count();
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (site_coords[mid] < coords)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < site_count() && site_coords[lo] == coords) return lo;
    return -1;
}

std::vector<int> XiGraph::vertex_neighbors(int id) const {
    const int site = vertex_site(id);
    const int k = vertex_slab(id);
    std::vector<int> out;
    for (int nb : site_adjacency[site]) out.push_back(vertex_id(nb, k));
    if (slabs == 2) {
        out.push_back(vertex_id(site, 1 - k));
    } else if (slabs > 2) {
        out.push_back(vertex_id(site, (k + 1) % slabs));
        out.push_back(vertex_id(site, (k - 1 + slabs) % slabs));
    }
    return out;
}

namespace {
// all integer displacement vectors of l1-length exactly 2
std::vector<std::vector<int>> displacements_l1_2(int dim) {
    std::vector<std::vector<int>> out;
    for (int a = 0; a < dim; ++a) {
        for (int s : {-2, 2}) {
            std::vector<int> v(dim, 0);
            v[a] = s;
            out.push_back(v);
        }
    }
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b)
            for (int sa : {-1, 1})
                for (int sb : {-1, 1}) {
                    std::vector<int> v(dim, 0);
                    v[a] = sa;
                    v[b] = sb;
                    out.push_back(v);
                }
    return out;
}
} // namespace

XiGraph build_xi(int dim, int radius, int slabs) {
    if (dim < 1) throw std::invalid_argument("build_xi: dimension must be >= 1");
    if (radius < 0) throw std::invalid_argument("build_xi: radius must be >= 0");
    if (slabs < 1) throw std::invalid_argument("build_xi: slab count must be >= 1");

    XiGraph xi;
    xi.dim = dim;
    xi.radius = radius;
    xi.slabs = slabs;

    // enumerate even sites of the box lexicographically
    std::vector<int> c(dim, -radius);
    while (true) {
        int sum = 0;
        for (int v : c) sum += v;
        if (((sum % 2) + 2) % 2 == 0) xi.site_coords.push_back(c);
        int a = dim - 1;
        while (a >= 0 && c[a] == radius) {
            c[a] = -radius;
            --a;
        }
        if (a < 0) break;
        ++c[a];
    }

    const auto moves = displacements_l1_2(dim);
    xi.site_adjacency.assign(xi.site_count(), {});
    for (int s = 0; s < xi.site_count(); ++s) {
        for (const auto& mv : moves) {
            std::vector<int> nb = xi.site_coords[s];
            bool inside = true;
            for (int a = 0; a < dim; ++a) {
                nb[a] += mv[a];
                if (nb[a] < -radius || nb[a] > radius) inside = false;
            }
            if (!inside) continue;
            int t = xi.site_at(nb);
            if (t >= 0) xi.site_adjacency[s].push_back(t);
        }
    }
    return xi;
}

} // namespace loopsim
