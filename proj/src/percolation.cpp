#include "loopsim/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "loopsim/loops.hpp"
#include "loopsim/rng.hpp"

namespace loopsim {

namespace {

constexpr std::uint64_t kStreamXi = 0x78692d6969ull;    // i.i.d. label fields
constexpr std::uint64_t kStreamPlain = 0x706c61696eull; // unweighted bridge runs

constexpr long kUnreached = std::numeric_limits<long>::max();

// Deque-based shortest path for 0/1 vertex weights over an explicit vertex
// set; returns distances and parent links.  A vertex's weight is paid on
// entry, and the source pays its own weight up front.
struct ZeroOnePath {
    std::vector<long> dist;
    std::vector<int> parent;

    template <typename Neighbors>
    void run(int n_vertices, int source, const std::vector<char>& cost,
             Neighbors&& neighbors) {
        dist.assign(n_vertices, kUnreached);
        parent.assign(n_vertices, -1);
        std::deque<int> frontier;
        dist[source] = cost[source] ? 1 : 0;
        frontier.push_back(source);
        std::vector<char> done(n_vertices, 0);
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop_front();
            if (done[u]) continue;
            done[u] = 1;
            for (int v : neighbors(u)) {
                const long nd = dist[u] + (cost[v] ? 1 : 0);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    parent[v] = u;
                    if (cost[v])
                        frontier.push_back(v);
                    else
                        frontier.push_front(v);
                }
            }
        }
    }

    std::vector<int> backtrack(int target) const {
        std::vector<int> path;
        for (int v = target; v >= 0; v = parent[v]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        return path;
    }
};

std::uint64_t zigzag(int v) {
    return v >= 0 ? 2ull * static_cast<std::uint64_t>(v)
                  : 2ull * static_cast<std::uint64_t>(-v) - 1;
}

} // namespace

Labeling classify(const IntervalGrid& grid, const BridgeConfig& config,
                  const std::vector<double>& field, double alpha) {
    if (static_cast<int>(field.size()) != grid.lattice.site_count())
        throw std::invalid_argument("classify: field size must match the lattice");
    if (!(alpha > 0)) throw std::invalid_argument("classify: alpha must be positive");
    if (std::abs(config.beta - grid.beta) > 1e-12)
        throw std::invalid_argument("classify: bridge configuration beta differs from grid");

    const int n = grid.interval_count();
    Labeling lab;
    lab.h_good.assign(n, 1);
    lab.omega_good.assign(n, 1);
    for (int s = 0; s < grid.lattice.site_count(); ++s)
        if (field[s] < alpha)
            for (int k = 0; k < grid.slabs; ++k) lab.h_good[grid.interval_id(s, k)] = 0;

    for (const Bridge& b : config.bridges) {
        int k = static_cast<int>(b.time / grid.slab_width);
        if (k >= grid.slabs) k = grid.slabs - 1;
        const auto [sa, sb] = grid.lattice.edges[b.edge];
        lab.omega_good[grid.interval_id(sa, k)] = 0;
        lab.omega_good[grid.interval_id(sb, k)] = 0;
    }

    lab.good.assign(n, 0);
    for (int i = 0; i < n; ++i) lab.good[i] = lab.h_good[i] && lab.omega_good[i];
    return lab;
}

PassageResult passage_time_gamma(const IntervalGrid& grid, const std::vector<char>& good,
                                 int x_site) {
    if (x_site < 0 || x_site >= grid.lattice.site_count())
        throw std::invalid_argument("passage_time_gamma: site outside the lattice");
    if (static_cast<int>(good.size()) != grid.interval_count())
        throw std::invalid_argument("passage_time_gamma: label size mismatch");

    // only good intervals in even columns cost anything
    std::vector<char> cost(grid.interval_count(), 0);
    for (int i = 0; i < grid.interval_count(); ++i)
        cost[i] = good[i] && grid.lattice.is_even(grid.interval_site(i));

    const int source = grid.interval_id(grid.lattice.origin(), 0);
    const int target = grid.interval_id(x_site, 0);

    ZeroOnePath sp;
    sp.run(grid.interval_count(), source, cost,
           [&](int u) { return grid.neighbor_set(u); });

    PassageResult out;
    out.value = sp.dist[target];
    out.witness = sp.backtrack(target);
    return out;
}

std::uint64_t xi_vertex_key(const std::vector<int>& coords, int slab) {
    std::uint64_t key = static_cast<std::uint64_t>(slab);
    for (std::size_t a = 0; a < coords.size(); ++a)
        key |= zigzag(coords[a]) << (16 * (a + 1));
    return key;
}

bool xi_vertex_good(std::uint64_t seed, std::uint64_t key, double p) {
    Rng rng(substream(seed, key));
    return rng.uniform01() < p;
}

std::vector<char> sample_xi_labels(const XiGraph& xi, double p, std::uint64_t seed) {
    if (!(p >= 0 && p <= 1))
        throw std::invalid_argument("sample_xi_labels: p must lie in [0,1]");
    std::vector<char> labels(xi.vertex_count());
    for (int s = 0; s < xi.site_count(); ++s)
        for (int k = 0; k < xi.slabs; ++k)
            labels[xi.vertex_id(s, k)] =
                xi_vertex_good(seed, xi_vertex_key(xi.site_coords[s], k), p);
    return labels;
}

std::vector<char> induce_xi_labels(const XiGraph& xi, const IntervalGrid& grid,
                                   const std::vector<char>& good) {
    if (xi.slabs != grid.slabs || xi.radius != grid.lattice.half() ||
        xi.dim != grid.lattice.dim)
        throw std::invalid_argument("induce_xi_labels: geometry mismatch");
    std::vector<char> labels(xi.vertex_count(), 0);
    for (int s = 0; s < xi.site_count(); ++s) {
        const int site = grid.lattice.site_at(xi.site_coords[s]);
        if (site < 0) throw std::invalid_argument("induce_xi_labels: site outside lattice");
        for (int k = 0; k < xi.slabs; ++k)
            labels[xi.vertex_id(s, k)] = good[grid.interval_id(site, k)];
    }
    return labels;
}

PassageResult passage_time_xi(const XiGraph& xi, const std::vector<char>& labels,
                              const std::vector<int>& x_coords) {
    const int x_site = xi.site_at(x_coords);
    if (x_site < 0)
        throw std::invalid_argument(
            "passage_time_xi: target must be an even site inside the box");
    if (static_cast<int>(labels.size()) != xi.vertex_count())
        throw std::invalid_argument("passage_time_xi: label size mismatch");
    const int origin = xi.site_at(std::vector<int>(xi.dim, 0));

    ZeroOnePath sp;
    sp.run(xi.vertex_count(), xi.vertex_id(origin, 0), labels,
           [&](int u) { return xi.vertex_neighbors(u); });

    PassageResult out;
    out.value = sp.dist[xi.vertex_id(x_site, 0)];
    out.witness = sp.backtrack(xi.vertex_id(x_site, 0));
    return out;
}

namespace {

// Lazy threshold search on the even-sublattice graph: vertices materialize on
// demand with labels drawn from (seed, key), and anything whose tentative
// distance already exceeds the admissible maximum is never expanded.  Returns
// whether some path from (0,0) to (x,0) costs at most t_max.
bool xi_path_within(int dim, int slabs, int radius, double p, long t_max,
                    const std::vector<int>& x_coords, std::uint64_t seed) {
    if (t_max < 0) return false;

    struct Node {
        std::vector<int> coords;
        int slab;
    };

    const std::uint64_t target = xi_vertex_key(x_coords, 0);
    const std::vector<int> origin(dim, 0);
    const std::uint64_t source = xi_vertex_key(origin, 0);
    if (source == target)
        throw std::invalid_argument("tail estimate: target coincides with the origin");

    auto label_cost = [&](std::uint64_t key) -> long {
        return xi_vertex_good(seed, key, p) ? 1 : 0;
    };

    std::unordered_map<std::uint64_t, long> dist;
    std::deque<Node> frontier;
    const long d0 = label_cost(source);
    if (d0 > t_max) return false;
    dist.emplace(source, d0);
    frontier.push_back({origin, 0});

    std::vector<std::pair<std::vector<int>, int>> moves; // (site displacement, slab step)
    for (int a = 0; a < dim; ++a)
        for (int s : {-2, 2}) {
            std::vector<int> v(dim, 0);
            v[a] = s;
            moves.emplace_back(v, 0);
        }
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b)
            for (int sa : {-1, 1})
                for (int sb : {-1, 1}) {
                    std::vector<int> v(dim, 0);
                    v[a] = sa;
                    v[b] = sb;
                    moves.emplace_back(v, 0);
                }
    if (slabs == 2) {
        moves.emplace_back(std::vector<int>(dim, 0), 1);
    } else if (slabs > 2) {
        moves.emplace_back(std::vector<int>(dim, 0), 1);
        moves.emplace_back(std::vector<int>(dim, 0), slabs - 1);
    }

    while (!frontier.empty()) {
        Node cur = std::move(frontier.front());
        frontier.pop_front();
        const std::uint64_t key = xi_vertex_key(cur.coords, cur.slab);
        const long d = dist.at(key);

        for (const auto& [dv, dk] : moves) {
            Node nb{cur.coords, (cur.slab + dk) % slabs};
            bool inside = true;
            for (int a = 0; a < dim; ++a) {
                nb.coords[a] += dv[a];
                if (nb.coords[a] < -radius || nb.coords[a] > radius) inside = false;
            }
            if (!inside) continue;
            const std::uint64_t nkey = xi_vertex_key(nb.coords, nb.slab);
            const long cost = label_cost(nkey);
            const long nd = d + cost;
            if (nd > t_max) continue;
            auto it = dist.find(nkey);
            if (it != dist.end() && it->second <= nd) continue;
            dist[nkey] = nd;
            if (nkey == target) return true;
            if (cost)
                frontier.push_back(std::move(nb));
            else
                frontier.push_front(std::move(nb));
        }
    }
    return false;
}

MCEstimate binomial_estimate(long hits, long n, std::uint64_t seed) {
    MCEstimate est;
    est.n = n;
    est.seed = seed;
    est.batches = 1;
    est.n_eff = static_cast<double>(n);
    const double m = static_cast<double>(hits) / static_cast<double>(n);
    est.mean = m;
    est.std_err = std::sqrt(m * (1 - m) / static_cast<double>(n));
    return est;
}

// Integer replica counts partition exactly, so totals are thread-invariant.
template <typename Pred>
long count_over_replicas(long n, int threads, Pred&& pred) {
    if (threads <= 1) {
        long hits = 0;
        for (long r = 0; r < n; ++r) hits += pred(r) ? 1 : 0;
        return hits;
    }
    const int k = threads;
    std::vector<long> partial(k, 0);
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (int i = 0; i < k; ++i)
        pool.emplace_back([&, i] {
            const long lo = n * i / k, hi = n * (i + 1) / k;
            long hits = 0;
            for (long r = lo; r < hi; ++r) hits += pred(r) ? 1 : 0;
            partial[i] = hits;
        });
    for (auto& t : pool) t.join();
    long hits = 0;
    for (long v : partial) hits += v;
    return hits;
}

} // namespace

MCEstimate tail_estimate_xi(int dim, int slabs, double p, double phi,
                            const std::vector<int>& x_coords, int radius, long n,
                            std::uint64_t seed, int threads) {
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("tail estimate: p outside [0,1]");
    if (!(phi > 0)) throw std::invalid_argument("tail estimate: phi must be positive");
    if (static_cast<int>(x_coords.size()) != dim)
        throw std::invalid_argument("tail estimate: coordinate dimension mismatch");
    if (n < 1) throw std::invalid_argument("tail estimate: need at least one sample");
    long norm = 0;
    int linf = 0;
    for (int c : x_coords) {
        norm += std::abs(c);
        linf = std::max(linf, std::abs(c));
    }
    if (norm % 2 != 0)
        throw std::invalid_argument("tail estimate: target must lie on the even sublattice");
    if (linf > radius)
        throw std::invalid_argument("tail estimate: target outside the truncation box");

    // strict inequality T < phi*|x| over integer passage times
    const long t_max = static_cast<long>(std::ceil(phi * static_cast<double>(norm))) - 1;

    const long hits = count_over_replicas(n, threads, [&](long r) {
        return xi_path_within(dim, slabs, radius, p, t_max, x_coords,
                              substream(seed, kStreamXi, r));
    });
    return binomial_estimate(hits, n, seed);
}

MCEstimate tail_estimate_gamma(const ModelParams& params, double delta, double alpha,
                               double phi, int x_site, long n, std::uint64_t seed,
                               int threads) {
    const IntervalGrid grid = build_interval_grid(params.lattice, params.beta, delta);
    const double threshold =
        phi * params.lattice.l1_distance(params.lattice.origin(), x_site);
    return estimate_event(params, n, seed, threads,
                          [&](const BridgeConfig& cfg, const LoopDecomposition&) {
                              Labeling lab = classify(grid, cfg, params.field, alpha);
                              return passage_time_gamma(grid, lab.good, x_site).value <
                                     threshold;
                          });
}

MCEstimate tail_estimate_gamma_poisson(const ModelParams& params, double intensity,
                                       double delta, double alpha, double phi, int x_site,
                                       long n, std::uint64_t seed, int threads) {
    params.validate();
    if (n < 1) throw std::invalid_argument("tail estimate: need at least one sample");
    const IntervalGrid grid = build_interval_grid(params.lattice, params.beta, delta);
    const double threshold =
        phi * params.lattice.l1_distance(params.lattice.origin(), x_site);

    const long hits = count_over_replicas(n, threads, [&](long r) {
        BridgeConfig cfg = sample_bridges(params.lattice, params.beta, params.u, intensity,
                                          substream(seed, kStreamPlain, r));
        Labeling lab = classify(grid, cfg, params.field, alpha);
        return passage_time_gamma(grid, lab.good, x_site).value < threshold;
    });
    return binomial_estimate(hits, n, seed);
}

DominationReport domination_check(const ModelParams& params, double delta, double alpha,
                                  double phi, int x_site, long n, std::uint64_t seed,
                                  int threads) {
    DominationReport report;
    report.weighted = tail_estimate_gamma(params, delta, alpha, phi, x_site, n,
                                          substream(seed, 0xd011), threads);
    report.dominating = tail_estimate_gamma_poisson(
        params, params.spin.theta(), delta, alpha, phi, x_site, n, substream(seed, 0xd012),
        threads);
    const double sigma = std::hypot(report.weighted.std_err, report.dominating.std_err);
    report.slack = report.dominating.mean + 3 * sigma - report.weighted.mean;
    report.pass = report.slack >= 0;
    return report;
}

bool monotone_increase_check(const IntervalGrid& grid, const BridgeConfig& config,
                             const std::vector<double>& field, double alpha, int x_site,
                             const Bridge& extra) {
    const Labeling before = classify(grid, config, field, alpha);
    std::vector<Bridge> bridges = config.bridges;
    bridges.push_back(extra);
    const BridgeConfig augmented =
        make_bridge_config(grid.lattice, config.beta, bridges);
    const Labeling after = classify(grid, augmented, field, alpha);

    const long t_before = passage_time_gamma(grid, before.good, x_site).value;
    const long t_after = passage_time_gamma(grid, after.good, x_site).value;
    return t_after <= t_before;
}

double independent_good_probability(double prob_h_below_alpha, int dim, int theta,
                                    double delta, int slabs) {
    if (!(prob_h_below_alpha >= 0 && prob_h_below_alpha <= 1))
        throw std::invalid_argument("good probability: P(h < alpha) outside [0,1]");
    if (dim < 1 || theta < 2 || slabs < 1 || !(delta > 0))
        throw std::invalid_argument("good probability: invalid parameters");
    return (1 - std::pow(prob_h_below_alpha, 1.0 / slabs)) *
           std::exp(-2.0 * dim * theta * delta);
}

} // namespace loopsim
