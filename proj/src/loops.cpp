#include "loopsim/loops.hpp"

#include <cassert>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace loopsim {

namespace {

struct WalkState {
    int site;
    int seg; // segment index within the column
    bool up;
    bool operator==(const WalkState&) const = default;
};

// Advance across the bridge endpoint that terminates the current segment in
// the direction of travel.  Columns involved here always have >= 1 endpoint.
WalkState step(const BridgeConfig& config, const WalkState& s) {
    const auto& col = config.column_hits[s.site];
    const int k = static_cast<int>(col.size());
    const ColumnHit& hit = s.up ? col[(s.seg + 1) % k] : col[s.seg];
    const bool cross = config.bridges[hit.bridge].kind == BridgeKind::cross;
    const int pk = static_cast<int>(config.column_hits[hit.partner_site].size());
    const int below = (hit.partner_hit - 1 + pk) % pk; // segment ending at the partner endpoint
    const int above = hit.partner_hit;                 // segment starting at it
    if (s.up)
        return cross ? WalkState{hit.partner_site, above, true}
                     : WalkState{hit.partner_site, below, false};
    return cross ? WalkState{hit.partner_site, below, false}
                 : WalkState{hit.partner_site, above, true};
}

inline double cyclic(double x, double beta) {
    x = std::fmod(x, beta);
    return x < 0 ? x + beta : x;
}

} // namespace

int LoopDecomposition::segment_at(int site, double t) const {
    const int first = col_offset[site];
    const int last = col_offset[site + 1]; // one past
    const int k = last - first;
    if (k == 1) return first;
    // greatest start <= t, wrapping below the first start into the last segment
    int lo = first, hi = last;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (seg_start[mid] <= t)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo == first ? last - 1 : lo - 1;
}

double LoopDecomposition::total_length() const {
    double sum = 0;
    for (double l : loop_length) sum += l;
    return sum;
}

LoopDecomposition trace_loops(const Lattice& lattice, const BridgeConfig& config) {
    const int n = lattice.site_count();
    LoopDecomposition d;
    d.beta = config.beta;
    d.col_offset.assign(n + 1, 0);
    for (int s = 0; s < n; ++s) {
        const int k = static_cast<int>(config.column_hits[s].size());
        d.col_offset[s + 1] = d.col_offset[s] + (k == 0 ? 1 : k);
    }
    const int n_segs = d.col_offset[n];
    d.seg_site.resize(n_segs);
    d.seg_start.resize(n_segs);
    d.seg_len.resize(n_segs);
    d.seg_loop.assign(n_segs, -1);

    for (int s = 0; s < n; ++s) {
        const auto& col = config.column_hits[s];
        const int k = static_cast<int>(col.size());
        const int base = d.col_offset[s];
        if (k == 0) {
            d.seg_site[base] = s;
            d.seg_start[base] = 0;
            d.seg_len[base] = config.beta;
            continue;
        }
        for (int j = 0; j < k; ++j) {
            d.seg_site[base + j] = s;
            d.seg_start[base + j] = col[j].time;
            double len = cyclic(col[(j + 1) % k].time - col[j].time, config.beta);
            if (len == 0) len = config.beta; // single endpoint: full wrap
            d.seg_len[base + j] = len;
        }
    }

    for (int seg0 = 0; seg0 < n_segs; ++seg0) {
        if (d.seg_loop[seg0] >= 0) continue;
        const int loop = static_cast<int>(d.loops.size());
        d.loops.emplace_back();
        d.loop_length.push_back(0);

        const int site0 = d.seg_site[seg0];
        if (config.column_hits[site0].empty()) {
            d.seg_loop[seg0] = loop;
            d.loops[loop].push_back(seg0);
            d.loop_length[loop] += config.beta;
            continue;
        }
        WalkState start{site0, seg0 - d.col_offset[site0], true};
        WalkState cur = start;
        do {
            const int id = d.col_offset[cur.site] + cur.seg;
            assert(d.seg_loop[id] < 0 && "segment reached twice; traversal rules corrupt");
            d.seg_loop[id] = loop;
            d.loops[loop].push_back(id);
            d.loop_length[loop] += d.seg_len[id];
            cur = step(config, cur);
        } while (!(cur == start));
    }
    return d;
}

int loop_through(const LoopDecomposition& decomp, int site, double t) {
    if (t < 0 || t >= decomp.beta)
        throw std::invalid_argument("loop_through: time outside [0,beta)");
    return decomp.seg_loop[decomp.segment_at(site, t)];
}

SplitLengths split_lengths(const Lattice& lattice, const BridgeConfig& config,
                           const LoopDecomposition& decomp, int terminal_site,
                           double terminal_time) {
    const int origin = lattice.origin();
    if (terminal_time < 0 || terminal_time >= config.beta)
        throw std::invalid_argument("split_lengths: terminal time outside [0,beta)");
    if (terminal_site < 0 || terminal_site >= lattice.site_count())
        throw std::invalid_argument("split_lengths: terminal site outside the lattice");
    if (terminal_site == origin && terminal_time == 0)
        throw std::invalid_argument("split_lengths: terminal coincides with the start point");

    const int loop = loop_through(decomp, origin, 0.0);
    if (loop_through(decomp, terminal_site, terminal_time) != loop)
        throw std::invalid_argument("split_lengths: terminal not on the loop through (0,0)");

    SplitLengths out;
    out.loop = loop;
    out.plus.assign(lattice.site_count(), 0.0);
    out.minus.assign(lattice.site_count(), 0.0);

    const double beta = config.beta;
    // First arc starts mid-segment at time 0; afterwards every segment is
    // entered at a boundary and covered in full unless the terminal is inside.
    int seg = decomp.segment_at(origin, 0.0);
    WalkState cur{origin, seg - decomp.col_offset[origin], true};
    double entry = 0.0; // entry time, meaningful for the upward first arc
    bool first = true;
    bool found = false;

    const long guard = 2 * decomp.segment_count() + 4;
    for (long iter = 0; iter < guard && !found; ++iter) {
        const int id = decomp.col_offset[cur.site] + cur.seg;
        const double start = decomp.seg_start[id];
        const double len = decomp.seg_len[id];
        double arc, arc_entry;
        if (cur.up) {
            arc_entry = first ? entry : start;
            arc = first ? cyclic(start + len - arc_entry, beta) : len;
            if (arc == 0) arc = len; // entry at the wrap point of a full-circle segment
            if (cur.site == terminal_site) {
                const double off = cyclic(terminal_time - arc_entry, beta);
                if (off < arc && !(first && off == 0)) {
                    out.plus[cur.site] += off;
                    found = true;
                    break;
                }
            }
        } else {
            // downward arcs always enter at the segment top and cover it fully
            arc_entry = cyclic(start + len, beta);
            arc = len;
            if (cur.site == terminal_site) {
                const double off = cyclic(arc_entry - terminal_time, beta);
                if (off > 0 && off <= arc) {
                    out.plus[cur.site] += off;
                    found = true;
                    break;
                }
            }
        }
        out.plus[cur.site] += arc;
        if (config.column_hits[cur.site].empty())
            break; // isolated circle; terminal must have been on it
        cur = step(config, cur);
        first = false;
    }
    if (!found)
        throw std::logic_error("split_lengths: walk finished without reaching the terminal");

    for (int id : decomp.loops[loop]) out.minus[decomp.seg_site[id]] += decomp.seg_len[id];
    for (int s = 0; s < lattice.site_count(); ++s) {
        out.minus[s] -= out.plus[s];
        if (out.minus[s] < 0 && out.minus[s] > -1e-12) out.minus[s] = 0;
    }
    return out;
}

void dump_loops(const LoopDecomposition& decomp, std::ostream& out) {
    out << "loop,segment,site,start,length\n";
    for (int l = 0; l < decomp.loop_count(); ++l)
        for (int id : decomp.loops[l]) {
            out.precision(17);
            out << l << ',' << id << ',' << decomp.seg_site[id] << ',' << decomp.seg_start[id]
                << ',' << decomp.seg_len[id] << '\n';
        }
}

} // namespace loopsim
