#include "loopsim/bridges.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "loopsim/rng.hpp"

namespace loopsim {

namespace {

// Sort bridges by (edge, time) and build the per-site time-sorted endpoint
// index with partner back references.
void finalize(const Lattice& lattice, BridgeConfig& cfg) {
    std::sort(cfg.bridges.begin(), cfg.bridges.end(), [](const Bridge& a, const Bridge& b) {
        if (a.edge != b.edge) return a.edge < b.edge;
        return a.time < b.time;
    });

    const int n = lattice.site_count();
    cfg.column_hits.assign(n, {});
    for (int b = 0; b < static_cast<int>(cfg.bridges.size()); ++b) {
        const auto [sa, sb] = lattice.edges[cfg.bridges[b].edge];
        cfg.column_hits[sa].push_back({cfg.bridges[b].time, b, sb, -1});
        cfg.column_hits[sb].push_back({cfg.bridges[b].time, b, sa, -1});
    }
    // bridge id -> hit position within each endpoint's column (the two
    // endpoints of a bridge always sit in distinct columns)
    std::vector<int> pos_at_a(cfg.bridges.size(), -1);
    std::vector<int> pos_at_b(cfg.bridges.size(), -1);
    for (int s = 0; s < n; ++s) {
        auto& col = cfg.column_hits[s];
        std::sort(col.begin(), col.end(),
                  [](const ColumnHit& a, const ColumnHit& b) { return a.time < b.time; });
        for (int i = 0; i < static_cast<int>(col.size()); ++i) {
            const int b = col[i].bridge;
            if (lattice.edges[cfg.bridges[b].edge].first == s)
                pos_at_a[b] = i;
            else
                pos_at_b[b] = i;
        }
    }
    for (int s = 0; s < n; ++s) {
        for (auto& hit : cfg.column_hits[s]) {
            const int b = hit.bridge;
            const auto [sa, sb] = lattice.edges[cfg.bridges[b].edge];
            hit.partner_hit = (s == sa) ? pos_at_b[b] : pos_at_a[b];
        }
    }
}

bool has_time_collision(const BridgeConfig& cfg) {
    // collisions matter per site column: two endpoints at the same time make
    // the traversal order ambiguous
    for (const auto& col : cfg.column_hits)
        for (size_t i = 1; i < col.size(); ++i)
            if (col[i].time == col[i - 1].time) return true;
    return false;
}

} // namespace

BridgeConfig sample_bridges(const Lattice& lattice, double beta, double u,
                            double intensity, std::uint64_t seed) {
    if (beta <= 0) throw std::invalid_argument("sample_bridges: beta must be positive");
    if (u < 0 || u > 1) throw std::invalid_argument("sample_bridges: u must lie in [0,1]");
    if (intensity < 0) throw std::invalid_argument("sample_bridges: negative intensity");

    BridgeConfig cfg;
    cfg.beta = beta;
    const int n_edges = static_cast<int>(lattice.edges.size());
    for (int e = 0; e < n_edges; ++e) {
        Rng rng(substream(seed, 0x6b71d6e5u, static_cast<std::uint64_t>(e)));
        const long k = rng.poisson(intensity * beta);
        for (long i = 0; i < k; ++i) {
            const double t = rng.uniform(beta);
            const BridgeKind kind = rng.bernoulli(u) ? BridgeKind::cross : BridgeKind::bar;
            cfg.bridges.push_back({e, t, kind});
        }
    }
    finalize(lattice, cfg);
    // Ties are probability-zero events of the continuous model; resample the
    // whole configuration rather than patching times.
    std::uint64_t retry = seed;
    while (has_time_collision(cfg)) {
        ++cfg.resampled_ties;
        retry = substream(retry, 0x7e5a11ceu);
        BridgeConfig again = sample_bridges(lattice, beta, u, intensity, retry);
        again.resampled_ties = cfg.resampled_ties;
        return again;
    }
    return cfg;
}

BridgeConfig make_bridge_config(const Lattice& lattice, double beta,
                                std::vector<Bridge> bridges) {
    if (beta <= 0) throw std::invalid_argument("make_bridge_config: beta must be positive");
    BridgeConfig cfg;
    cfg.beta = beta;
    for (const auto& b : bridges) {
        if (b.edge < 0 || b.edge >= static_cast<int>(lattice.edges.size()))
            throw std::invalid_argument("make_bridge_config: edge index out of range");
        if (b.time < 0 || b.time >= beta)
            throw std::invalid_argument("make_bridge_config: bridge time outside [0,beta)");
    }
    cfg.bridges = std::move(bridges);
    finalize(lattice, cfg);
    if (has_time_collision(cfg))
        throw std::invalid_argument("make_bridge_config: coinciding endpoint times");
    return cfg;
}

BridgeStatistics count_statistics(const Lattice& lattice,
                                  const std::vector<BridgeConfig>& configs) {
    BridgeStatistics st;
    const long cells = static_cast<long>(configs.size()) * lattice.edges.size();
    if (cells == 0) return st;

    double sum = 0, sum2 = 0;
    long crosses = 0;
    for (const auto& cfg : configs) {
        std::vector<long> per_edge(lattice.edges.size(), 0);
        for (const auto& b : cfg.bridges) {
            ++per_edge[b.edge];
            if (b.kind == BridgeKind::cross) ++crosses;
        }
        for (long c : per_edge) {
            sum += static_cast<double>(c);
            sum2 += static_cast<double>(c) * static_cast<double>(c);
        }
        st.total += cfg.size();
    }
    st.mean_count_per_edge = sum / static_cast<double>(cells);
    st.var_count_per_edge =
        sum2 / static_cast<double>(cells) - st.mean_count_per_edge * st.mean_count_per_edge;
    st.cross_fraction = st.total > 0 ? static_cast<double>(crosses) / st.total : 0.0;
    return st;
}

void dump_bridges(const Lattice& lattice, const BridgeConfig& config, std::ostream& out) {
    out << "site_a,site_b,time,kind\n";
    std::ostringstream line;
    line.precision(17);
    for (const auto& b : config.bridges) {
        const auto [sa, sb] = lattice.edges[b.edge];
        line.str("");
        line << sa << ',' << sb << ',' << b.time << ','
             << (b.kind == BridgeKind::cross ? "cross" : "bar") << '\n';
        out << line.str();
    }
}

BridgeConfig load_bridges(const Lattice& lattice, double beta, std::istream& in) {
    std::map<std::pair<int, int>, int> edge_of;
    for (int e = 0; e < static_cast<int>(lattice.edges.size()); ++e)
        edge_of[lattice.edges[e]] = e;

    std::vector<Bridge> bridges;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("site_a", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string field;
        int sa, sb;
        double t;
        std::string kind;
        if (!std::getline(row, field, ',')) throw std::runtime_error("bridge csv: bad row");
        sa = std::stoi(field);
        if (!std::getline(row, field, ',')) throw std::runtime_error("bridge csv: bad row");
        sb = std::stoi(field);
        if (!std::getline(row, field, ',')) throw std::runtime_error("bridge csv: bad row");
        t = std::stod(field);
        if (!std::getline(row, kind, ',')) throw std::runtime_error("bridge csv: bad row");
        auto it = edge_of.find({std::min(sa, sb), std::max(sa, sb)});
        if (it == edge_of.end()) throw std::runtime_error("bridge csv: unknown edge");
        bridges.push_back(
            {it->second, t, kind == "cross" ? BridgeKind::cross : BridgeKind::bar});
    }
    return make_bridge_config(lattice, beta, std::move(bridges));
}

} // namespace loopsim
