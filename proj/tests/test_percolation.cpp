#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "loopsim/bridges.hpp"
#include "loopsim/lattice.hpp"
#include "loopsim/percolation.hpp"
#include "loopsim/rng.hpp"

using namespace loopsim;

namespace {

// exhaustive minimum over simple grid paths, counting distinct good even
// intervals -- the reference semantics for the solver
struct BruteForce {
    const IntervalGrid& grid;
    const std::vector<char>& good;
    int target;
    long best = -1;

    BruteForce(const IntervalGrid& g, const std::vector<char>& labels, int x_site)
        : grid(g), good(labels), target(g.interval_id(x_site, 0)) {}

    void dfs(int id, std::vector<char>& seen, std::set<int>& paid, long cost) {
        if (best >= 0 && cost > best) return;
        if (id == target) {
            best = (best < 0) ? cost : std::min(best, cost);
            return;
        }
        for (int m : grid.neighbor_set(id)) {
            if (seen[m]) continue;
            seen[m] = 1;
            bool pays = good[m] && grid.lattice.is_even(grid.interval_site(m)) &&
                        paid.insert(m).second;
            dfs(m, seen, paid, cost + (pays ? 1 : 0));
            if (pays) paid.erase(m);
            seen[m] = 0;
        }
    }

    long run() {
        std::vector<char> seen(grid.interval_count(), 0);
        std::set<int> paid;
        int src = grid.interval_id(grid.lattice.origin(), 0);
        seen[src] = 1;
        long c0 = (good[src] && grid.lattice.is_even(grid.lattice.origin())) ? 1 : 0;
        if (good[src] && grid.lattice.is_even(grid.lattice.origin())) paid.insert(src);
        dfs(src, seen, paid, c0);
        return best;
    }
};

long recount_witness(const IntervalGrid& grid, const std::vector<char>& good,
                     const std::vector<int>& witness) {
    std::set<int> paid;
    long cost = 0;
    for (size_t i = 0; i < witness.size(); ++i) {
        int id = witness[i];
        if (i > 0) {
            auto nb = grid.neighbor_set(witness[i - 1]);
            REQUIRE(std::find(nb.begin(), nb.end(), id) != nb.end());
        }
        if (good[id] && grid.lattice.is_even(grid.interval_site(id)) && paid.insert(id).second)
            ++cost;
    }
    return cost;
}

std::vector<double> uniform_field(const Lattice& lat, double v) {
    return std::vector<double>(lat.site_count(), v);
}

} // namespace

TEST_CASE("labeling: empty configuration, field above threshold") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    BridgeConfig empty = make_bridge_config(lat, 1.0, {});
    Labeling lab = classify(grid, empty, uniform_field(lat, 1.0), 1.0);
    for (int id = 0; id < grid.interval_count(); ++id) {
        CHECK(lab.h_good[id] == 1);
        CHECK(lab.omega_good[id] == 1);
        CHECK(lab.good[id] == 1);
    }
}

TEST_CASE("labeling: a weak site spoils its whole column") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    BridgeConfig empty = make_bridge_config(lat, 1.0, {});
    auto field = uniform_field(lat, 1.0);
    const int weak = lat.site_at({1});
    field[weak] = 0.5;
    Labeling lab = classify(grid, empty, field, 1.0);
    for (int id = 0; id < grid.interval_count(); ++id) {
        bool expect = grid.interval_site(id) != weak;
        CHECK(static_cast<bool>(lab.h_good[id]) == expect);
        CHECK(static_cast<bool>(lab.good[id]) == expect);
        CHECK(lab.omega_good[id] == 1);
    }
}

TEST_CASE("labeling: one bridge spoils exactly its two endpoint intervals") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    // time 0.6 lies in slab 2 of 4
    int e = -1;
    for (size_t i = 0; i < lat.edges.size(); ++i)
        if (lat.edges[i].first == lat.site_at({0}) || lat.edges[i].second == lat.site_at({0}))
            if (lat.edges[i].first == lat.site_at({-1}) || lat.edges[i].second == lat.site_at({-1}))
                e = static_cast<int>(i);
    REQUIRE(e >= 0);
    BridgeConfig cfg = make_bridge_config(lat, 1.0, {{e, 0.6, BridgeKind::bar}});
    Labeling lab = classify(grid, cfg, uniform_field(lat, 1.0), 1.0);
    std::set<int> bad = {grid.interval_id(lat.site_at({0}), 2),
                         grid.interval_id(lat.site_at({-1}), 2)};
    for (int id = 0; id < grid.interval_count(); ++id) {
        CHECK(static_cast<bool>(lab.omega_good[id]) == (bad.count(id) == 0));
        CHECK(lab.h_good[id] == 1);
    }
}

TEST_CASE("labeling validates its inputs") {
    Lattice lat = build_lattice(1, 2);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.5);
    BridgeConfig empty = make_bridge_config(lat, 1.0, {});
    CHECK_THROWS(classify(grid, empty, uniform_field(lat, 1.0), 0.0));
    CHECK_THROWS(classify(grid, empty, {1.0}, 1.0));
    BridgeConfig wrong_beta = make_bridge_config(lat, 2.0, {});
    CHECK_THROWS(classify(grid, wrong_beta, uniform_field(lat, 1.0), 1.0));
}

TEST_CASE("grid passage time on explicit labelings") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    const int x = lat.site_at({2});

    std::vector<char> all_bad(grid.interval_count(), 0);
    PassageResult r0 = passage_time_gamma(grid, all_bad, x);
    CHECK(r0.value == 0);
    CHECK(recount_witness(grid, all_bad, r0.witness) == 0);

    std::vector<char> all_good(grid.interval_count(), 1);
    PassageResult r1 = passage_time_gamma(grid, all_good, x);
    CHECK(r1.value == 2); // both even columns 0 and 2 must be paid once
    CHECK(recount_witness(grid, all_good, r1.witness) == 2);

    // spoiling the origin column leaves only the far even column to pay
    std::vector<char> partial(grid.interval_count(), 1);
    for (int k = 0; k < grid.slabs; ++k) partial[grid.interval_id(lat.origin(), k)] = 0;
    PassageResult r2 = passage_time_gamma(grid, partial, x);
    CHECK(r2.value == 1);
}

TEST_CASE("grid passage time matches exhaustive search on random labelings") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.5);
    const int x = lat.site_at({2});
    Rng rng(1717);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<char> labels(grid.interval_count());
        for (auto& l : labels) l = rng.bernoulli(0.6) ? 1 : 0;
        PassageResult got = passage_time_gamma(grid, labels, x);
        BruteForce bf(grid, labels, x);
        CHECK(got.value == bf.run());
        CHECK(recount_witness(grid, labels, got.witness) == got.value);
        CHECK(got.witness.front() == grid.interval_id(lat.origin(), 0));
        CHECK(got.witness.back() == grid.interval_id(x, 0));
    }
}

TEST_CASE("grid passage time is monotone under label decrease") {
    Lattice lat = build_lattice(2, 2);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    const int x = lat.site_at({1, 1});
    Rng rng(515);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<char> labels(grid.interval_count());
        for (auto& l : labels) l = rng.bernoulli(0.7) ? 1 : 0;
        long before = passage_time_gamma(grid, labels, x).value;
        std::vector<char> lowered = labels;
        for (int flips = 0; flips < 3; ++flips)
            lowered[rng() % lowered.size()] = 0;
        long after = passage_time_gamma(grid, lowered, x).value;
        CHECK(after <= before);
    }
}

TEST_CASE("adding a bridge never increases the passage time") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    auto field = uniform_field(lat, 1.0);
    const int x = lat.site_at({2});
    Rng rng(626);
    for (int trial = 0; trial < 300; ++trial) {
        BridgeConfig cfg = sample_bridges(lat, 1.0, 0.5, 1.0, substream(626, trial));
        Bridge extra;
        extra.edge = static_cast<int>(rng() % lat.edges.size());
        extra.time = rng.uniform(1.0);
        extra.kind = rng.bernoulli(0.5) ? BridgeKind::cross : BridgeKind::bar;
        CHECK(monotone_increase_check(grid, cfg, field, 1.0, x, extra));
    }
}

TEST_CASE("one bridge on the unique geodesic lowers the passage time by one") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 1.0); // a single slab
    auto field = uniform_field(lat, 1.0);
    const int x = lat.site_at({2});
    BridgeConfig empty = make_bridge_config(lat, 1.0, {});
    Labeling before = classify(grid, empty, field, 1.0);
    CHECK(passage_time_gamma(grid, before.good, x).value == 2);

    int e = -1; // edge {1, 2}
    for (size_t i = 0; i < lat.edges.size(); ++i)
        if (lat.edges[i] == std::pair{lat.site_at({1}), lat.site_at({2})})
            e = static_cast<int>(i);
    REQUIRE(e >= 0);
    BridgeConfig one = make_bridge_config(lat, 1.0, {{e, 0.5, BridgeKind::cross}});
    Labeling after = classify(grid, one, field, 1.0);
    CHECK(passage_time_gamma(grid, after.good, x).value == 1);
    CHECK(monotone_increase_check(grid, empty, field, 1.0, x,
                                  {e, 0.5, BridgeKind::cross}));
}

TEST_CASE("independent label fields") {
    XiGraph xi = build_xi(2, 4, 4);
    auto ones = sample_xi_labels(xi, 1.0, 3);
    auto zeros = sample_xi_labels(xi, 0.0, 3);
    CHECK(std::count(ones.begin(), ones.end(), 1) == xi.vertex_count());
    CHECK(std::count(zeros.begin(), zeros.end(), 1) == 0);

    XiGraph big = build_xi(2, 50, 20);
    REQUIRE(big.vertex_count() >= 100000);
    auto half = sample_xi_labels(big, 0.5, 99);
    double mean = std::count(half.begin(), half.end(), 1) /
                  static_cast<double>(big.vertex_count());
    double se = 0.5 / std::sqrt(static_cast<double>(big.vertex_count()));
    CHECK(std::abs(mean - 0.5) < 5 * se);

    auto again = sample_xi_labels(big, 0.5, 99);
    CHECK(half == again);
}

TEST_CASE("labels depend only on the vertex key, not the box radius") {
    XiGraph small = build_xi(2, 2, 3);
    XiGraph large = build_xi(2, 4, 3);
    auto ls = sample_xi_labels(small, 0.37, 1234);
    auto ll = sample_xi_labels(large, 0.37, 1234);
    for (int s = 0; s < small.site_count(); ++s) {
        int t = large.site_at(small.site_coords[s]);
        REQUIRE(t >= 0);
        for (int k = 0; k < 3; ++k)
            CHECK(ls[small.vertex_id(s, k)] == ll[large.vertex_id(t, k)]);
    }
}

TEST_CASE("even-graph passage time against exhaustive search") {
    XiGraph xi = build_xi(2, 2, 2);
    Rng rng(2929);
    const std::vector<int> x = {2, 0};
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<char> labels(xi.vertex_count());
        for (auto& l : labels) l = rng.bernoulli(0.6) ? 1 : 0;
        PassageResult got = passage_time_xi(xi, labels, x);

        // independent oracle: Bellman-Ford fixpoint over vertex weights
        // (minimal walks never repay a vertex, so this matches set counting)
        const int src = xi.vertex_id(xi.site_at({0, 0}), 0);
        const int dst = xi.vertex_id(xi.site_at(x), 0);
        const long inf = 1 << 20;
        std::vector<long> dist(xi.vertex_count(), inf);
        dist[src] = labels[src] ? 1 : 0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int v = 0; v < xi.vertex_count(); ++v)
                for (int m : xi.vertex_neighbors(v)) {
                    long nd = dist[v] + (labels[m] ? 1 : 0);
                    if (nd < dist[m]) {
                        dist[m] = nd;
                        changed = true;
                    }
                }
        }
        CHECK(got.value == dist[dst]);
    }
    // all-good: the direct straight edge costs source plus target
    std::vector<char> ones(xi.vertex_count(), 1);
    CHECK(passage_time_xi(xi, ones, x).value == 2);
    std::vector<char> zeros(xi.vertex_count(), 0);
    CHECK(passage_time_xi(xi, zeros, x).value == 0);
}

TEST_CASE("lazy threshold search agrees with materialized labels") {
    const int dim = 2, slabs = 3, radius = 6;
    const double p = 0.7, phi = 0.6;
    const std::vector<int> x = {2, 0};
    XiGraph xi = build_xi(dim, radius, slabs);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        MCEstimate one = tail_estimate_xi(dim, slabs, p, phi, x, radius, 1, seed);
        auto labels = sample_xi_labels(xi, p, substream(seed, 0x78692d6969ull, 0));
        long t = passage_time_xi(xi, labels, x).value;
        double expect = (t < phi * 2) ? 1.0 : 0.0;
        CHECK(one.mean == expect);
    }
}

TEST_CASE("coupled labels: the even-graph time is dominated at short range") {
    // with the target two steps away the even graph has the direct edge, so
    // its passage time can never exceed the grid one
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    XiGraph xi = build_xi(1, 2, 4);
    auto field = uniform_field(lat, 1.0);
    const int x_site = lat.site_at({2});
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        BridgeConfig cfg = sample_bridges(lat, 1.0, 0.5, 1.0, substream(42, seed));
        Labeling lab = classify(grid, cfg, field, 1.0);
        auto xl = induce_xi_labels(xi, grid, lab.good);
        long tg = passage_time_gamma(grid, lab.good, x_site).value;
        long tx = passage_time_xi(xi, xl, {2}).value;
        CHECK(tx <= tg);
    }
}

TEST_CASE("coupled labels: slab drift through odd columns can invert the order") {
    // The grid path below changes slab inside an odd column, which the even
    // count never sees; the even graph has to pay for every vertical move.
    // One bridge on edge {2,3} in slab 1 is enough to give the grid a
    // two-cost route while every even-graph route still costs three.
    Lattice lat = build_lattice(1, 8);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    XiGraph xi = build_xi(1, 4, 4);
    auto field = uniform_field(lat, 1.0);
    int e = -1;
    for (size_t i = 0; i < lat.edges.size(); ++i)
        if (lat.edges[i] == std::pair{lat.site_at({2}), lat.site_at({3})})
            e = static_cast<int>(i);
    REQUIRE(e >= 0);
    BridgeConfig cfg = make_bridge_config(lat, 1.0, {{e, 0.3, BridgeKind::bar}});
    Labeling lab = classify(grid, cfg, field, 1.0);
    auto xl = induce_xi_labels(xi, grid, lab.good);
    CHECK(passage_time_gamma(grid, lab.good, lat.site_at({4})).value == 2);
    CHECK(passage_time_xi(xi, xl, {4}).value == 3);
}

TEST_CASE("geometry guards for induced labels") {
    Lattice lat = build_lattice(1, 4);
    IntervalGrid grid = build_interval_grid(lat, 1.0, 0.25);
    BridgeConfig empty = make_bridge_config(lat, 1.0, {});
    Labeling lab = classify(grid, empty, uniform_field(lat, 1.0), 1.0);
    CHECK_THROWS(induce_xi_labels(build_xi(1, 3, 4), grid, lab.good)); // radius
    CHECK_THROWS(induce_xi_labels(build_xi(1, 2, 2), grid, lab.good)); // slabs
    CHECK_THROWS(induce_xi_labels(build_xi(2, 2, 4), grid, lab.good)); // dimension
}

TEST_CASE("independent tail estimates") {
    // all-good labels can never fall below a fractional threshold
    MCEstimate zero = tail_estimate_xi(2, 2, 1.0, 0.1, {2, 0}, 6, 400, 5);
    CHECK(zero.mean == 0.0);
    CHECK(zero.std_err == 0.0);

    // the tail probability decreases with distance
    MCEstimate near = tail_estimate_xi(2, 4, 0.8, 0.1, {2, 0}, 6, 20000, 6);
    MCEstimate mid = tail_estimate_xi(2, 4, 0.8, 0.1, {4, 0}, 12, 20000, 6);
    MCEstimate far = tail_estimate_xi(2, 4, 0.8, 0.1, {6, 0}, 18, 20000, 6);
    CHECK(near.mean > mid.mean);
    CHECK(mid.mean >= far.mean);

    // doubling the truncation radius does not change coupled values
    MCEstimate r1 = tail_estimate_xi(2, 3, 0.85, 0.5, {2, 2}, 12, 500, 7);
    MCEstimate r2 = tail_estimate_xi(2, 3, 0.85, 0.5, {2, 2}, 24, 500, 7);
    CHECK(r1.mean == r2.mean);

    CHECK_THROWS(tail_estimate_xi(2, 4, 0.5, 0.1, {1, 0}, 6, 10, 8)); // odd site
    CHECK_THROWS(tail_estimate_xi(2, 4, 1.5, 0.1, {2, 0}, 6, 10, 8)); // bad p
}

TEST_CASE("weighted tail sits below the discretisation-matched independent tail") {
    Lattice lat = build_lattice(1, 4);
    ModelParams params = make_model(lat, 1.0, 0.5, 1, 1.0);
    const double delta = 0.125, alpha = 1.0, phi = 0.6;
    const int x_site = lat.site_at({2});
    MCEstimate weighted =
        tail_estimate_gamma(params, delta, alpha, phi, x_site, 20000, 17);
    double p = independent_good_probability(0.0, 1, params.spin.theta(), delta, 8);
    MCEstimate iid = tail_estimate_xi(1, 8, p, phi, {2}, 2, 20000, 18);
    CHECK(weighted.mean <= iid.mean + 3 * std::hypot(weighted.std_err, iid.std_err));
}

TEST_CASE("domination verdicts") {
    Lattice lat = build_lattice(1, 4);
    ModelParams params = make_model(lat, 1.0, 0.5, 1, 1.0);
    const int x = lat.site_at({2});
    DominationReport rep = domination_check(params, 0.25, 1.0, 0.25, x, 20000, 27);
    CHECK(rep.pass);
    CHECK(rep.weighted.mean >= 0.0);
    CHECK(rep.weighted.mean <= 1.0);
    CHECK(rep.dominating.mean >= 0.0);
    CHECK(rep.dominating.mean <= 1.0);
    CHECK(rep.slack >= 0.0);

    DominationReport trivial = domination_check(params, 0.25, 1.0, 100.0, x, 2000, 28);
    CHECK(trivial.pass);
    CHECK(trivial.dominating.mean == doctest::Approx(1.0));
}

TEST_CASE("independent good-probability bound") {
    CHECK(independent_good_probability(0.0, 2, 2, 0.25, 4) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(independent_good_probability(1.0, 2, 2, 0.25, 4) == doctest::Approx(0.0));
    CHECK(independent_good_probability(0.5, 1, 3, 0.1, 4) ==
          doctest::Approx((1 - std::pow(0.5, 0.25)) * std::exp(-0.6)).epsilon(1e-12));
    CHECK_THROWS(independent_good_probability(0.5, 1, 1, 0.1, 4));
}
