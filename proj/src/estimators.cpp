#include "loopsim/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "loopsim/loops.hpp"
#include "loopsim/rng.hpp"

namespace loopsim {

namespace {

constexpr std::uint64_t kStreamOmega = 0x73616d706cull; // bridge samples
constexpr std::uint64_t kStreamField = 0x6669656c64ull; // quenched field draws
constexpr std::uint64_t kStreamInner = 0x696e6e6572ull; // quenched inner runs

int batch_count(long n) { return static_cast<int>(std::min<long>(20, n)); }

struct BatchSums {
    double num = 0;      // numerator accumulator (unused for plain means)
    double den = 0;      // sum of weights W
    double den_sq = 0;   // sum of W^2
    long count = 0;
};

// One pass over n independent bridge configurations.  `accumulate` receives
// the replica's decomposition together with its weight W and adds the
// sample's numerator contribution; replica r draws from substream(seed,
// kStreamOmega, r), so results do not depend on the thread count.
template <typename F>
std::vector<BatchSums> run_batches(const ModelParams& params, long n, std::uint64_t seed,
                                   int threads, F&& per_sample) {
    const int nb = batch_count(n);
    std::vector<BatchSums> sums(nb);

    auto run_one = [&](int b) {
        const long lo = n * b / nb, hi = n * (b + 1) / nb;
        BatchSums& s = sums[b];
        for (long r = lo; r < hi; ++r) {
            BridgeConfig cfg = sample_bridges(params.lattice, params.beta, params.u, 1.0,
                                              substream(seed, kStreamOmega, r));
            LoopDecomposition decomp = trace_loops(params.lattice, cfg);
            double log_w = 0;
            for (int g = 0; g < decomp.loop_count(); ++g)
                log_w += log_loop_activity(params.spin,
                                           loop_weighted_length(decomp, g, params.field));
            const double w = std::exp(log_w);
            if (!std::isfinite(w))
                throw std::runtime_error("estimator: weight overflow; parameters exceed "
                                         "the direct-sampling scale");
            s.den += w;
            s.den_sq += w * w;
            s.count += 1;
            per_sample(cfg, decomp, log_w, w, s);
        }
    };

    if (threads <= 1 || nb == 1) {
        for (int b = 0; b < nb; ++b) run_one(b);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int b = next.fetch_add(1); b < nb; b = next.fetch_add(1)) run_one(b);
        };
        std::vector<std::thread> pool;
        const int k = std::min(threads, nb);
        pool.reserve(k);
        for (int i = 0; i < k; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return sums;
}

double total_den(const std::vector<BatchSums>& sums) {
    double d = 0;
    for (const auto& s : sums) d += s.den;
    return d;
}

double effective_samples(const std::vector<BatchSums>& sums) {
    double d = 0, d2 = 0;
    for (const auto& s : sums) {
        d += s.den;
        d2 += s.den_sq;
    }
    return d2 > 0 ? d * d / d2 : 0;
}

MCEstimate plain_mean(const std::vector<BatchSums>& sums, long n, std::uint64_t seed) {
    const int nb = static_cast<int>(sums.size());
    MCEstimate est;
    est.n = n;
    est.seed = seed;
    est.batches = nb;
    est.n_eff = effective_samples(sums);
    est.mean = total_den(sums) / static_cast<double>(n);

    if (nb >= 2) {
        double var = 0;
        for (const auto& s : sums) {
            const double m = s.den / static_cast<double>(s.count);
            var += (m - est.mean) * (m - est.mean);
        }
        est.std_err = std::sqrt(var / (nb * (nb - 1.0)));
    }
    return est;
}

// Jackknife over batches for num/den ratios; throws under_sampled_error on a
// zero numerator (unless zero is admissible) or an empty leave-one-out
// denominator.
MCEstimate ratio_mean(const std::vector<BatchSums>& sums, long n, std::uint64_t seed,
                      double scale, bool zero_ok = false) {
    const int nb = static_cast<int>(sums.size());
    double num = 0, den = 0;
    for (const auto& s : sums) {
        num += s.num;
        den += s.den;
    }
    if (den <= 0) throw under_sampled_error("ratio estimator: zero total weight");
    if (num <= 0 && !zero_ok)
        throw under_sampled_error("ratio estimator: no sample connected the two points");

    MCEstimate est;
    est.n = n;
    est.seed = seed;
    est.batches = nb;
    est.n_eff = effective_samples(sums);
    est.mean = scale * num / den;

    if (nb >= 2) {
        std::vector<double> loo(nb);
        for (int b = 0; b < nb; ++b) {
            const double d = den - sums[b].den;
            if (d <= 0)
                throw under_sampled_error("ratio estimator: a batch holds all the weight");
            loo[b] = scale * (num - sums[b].num) / d;
        }
        double mean_loo = 0;
        for (double v : loo) mean_loo += v;
        mean_loo /= nb;
        double var = 0;
        for (double v : loo) var += (v - mean_loo) * (v - mean_loo);
        est.std_err = std::sqrt(var * (nb - 1.0) / nb);
    }
    return est;
}

// Shared core of the correlation estimators: terminal point (x, t), the
// per-sample numerator chosen by `mode`.
enum class NumeratorMode { two_point, corollary };

MCEstimate correlation_estimate(const ModelParams& params, int x_site, double t,
                                NumeratorMode mode, long n, std::uint64_t seed,
                                int threads) {
    params.validate();
    if (n < 2) throw std::invalid_argument("estimator: need at least two samples");
    const int origin = params.lattice.origin();
    if (x_site < 0 || x_site >= params.lattice.site_count())
        throw std::invalid_argument("estimator: site outside the lattice");
    if (x_site == origin && t == 0)
        throw std::invalid_argument("estimator: the terminal must differ from (0,0); "
                                    "the exact oracle covers autocorrelations");
    if (t < 0 || t >= params.beta)
        throw std::invalid_argument("estimator: time displacement outside [0,beta)");

    auto sums = run_batches(
        params, n, seed, threads,
        [&](const BridgeConfig& cfg, const LoopDecomposition& decomp, double /*log_w*/,
            double w, BatchSums& s) {
            if (loop_through(decomp, x_site, t) != loop_through(decomp, origin, 0.0))
                return;
            SplitLengths split = split_lengths(params.lattice, cfg, decomp, x_site, t);
            double plus = 0, minus = 0;
            for (int y = 0; y < params.lattice.site_count(); ++y) {
                plus += params.field[y] * split.plus[y];
                minus += params.field[y] * split.minus[y];
            }
            if (mode == NumeratorMode::two_point) {
                // replace the connecting loop's activity z by ztilde
                s.num += w * std::exp(log_split_activity(params.spin, plus, minus) -
                                      log_loop_activity(params.spin, plus + minus));
            } else {
                s.num += w * std::exp(-plus);
            }
        });

    const double scale =
        mode == NumeratorMode::corollary ? 0.5 * spin_factor_sum(params.spin) : 1.0;
    return ratio_mean(sums, n, seed, scale);
}

} // namespace

void ModelParams::validate() const {
    if (beta <= 0) throw std::invalid_argument("model: beta must be positive");
    if (u < 0 || u > 1) throw std::invalid_argument("model: u must lie in [0,1]");
    if (static_cast<int>(field.size()) != lattice.site_count())
        throw std::invalid_argument("model: field size must match the site count");
    for (double h : field)
        if (!(h >= 0)) throw std::invalid_argument("model: field entries must be >= 0");
}

ModelParams make_model(const Lattice& lattice, double beta, double u, int twice_spin,
                       double uniform_field) {
    ModelParams p;
    p.lattice = lattice;
    p.beta = beta;
    p.u = u;
    p.spin = SpinParam(twice_spin);
    p.field.assign(lattice.site_count(), uniform_field);
    p.validate();
    return p;
}

MCEstimate estimate_partition(const ModelParams& params, long n, std::uint64_t seed,
                              int threads) {
    params.validate();
    if (n < 2) throw std::invalid_argument("estimator: need at least two samples");
    auto sums = run_batches(params, n, seed, threads,
                            [](const BridgeConfig&, const LoopDecomposition&, double,
                               double, BatchSums&) {});
    return plain_mean(sums, n, seed);
}

MCEstimate estimate_two_point(const ModelParams& params, int x_site, long n,
                              std::uint64_t seed, int threads) {
    return correlation_estimate(params, x_site, 0.0, NumeratorMode::two_point, n, seed,
                                threads);
}

MCEstimate estimate_schwinger(const ModelParams& params, int x_site, double t, long n,
                              std::uint64_t seed, int threads) {
    return correlation_estimate(params, x_site, t, NumeratorMode::two_point, n, seed,
                                threads);
}

MCEstimate estimate_corollary_rhs(const ModelParams& params, int x_site, long n,
                                  std::uint64_t seed, int threads) {
    return correlation_estimate(params, x_site, 0.0, NumeratorMode::corollary, n, seed,
                                threads);
}

MCEstimate estimate_event(
    const ModelParams& params, long n, std::uint64_t seed, int threads,
    const std::function<bool(const BridgeConfig&, const LoopDecomposition&)>& event) {
    params.validate();
    if (n < 2) throw std::invalid_argument("estimator: need at least two samples");
    auto sums = run_batches(params, n, seed, threads,
                            [&](const BridgeConfig& cfg, const LoopDecomposition& decomp,
                                double, double w, BatchSums& s) {
                                if (event(cfg, decomp)) s.num += w;
                            });
    return ratio_mean(sums, n, seed, 1.0, /*zero_ok=*/true);
}

std::vector<double> FieldDistribution::sample(const Lattice& lattice,
                                              std::uint64_t seed) const {
    std::vector<double> h(lattice.site_count());
    if (kind == Kind::point_mass) {
        if (!(value >= 0))
            throw std::invalid_argument("field distribution: point mass must be >= 0");
        std::fill(h.begin(), h.end(), value);
        return h;
    }
    if (!(eps >= 0 && eps <= 1))
        throw std::invalid_argument("field distribution: eps must lie in [0,1]");
    if (!(alpha >= 0))
        throw std::invalid_argument("field distribution: alpha must be >= 0");
    Rng rng(substream(seed, kStreamField));
    for (double& v : h) v = rng.bernoulli(eps) ? 0.0 : alpha;
    return h;
}

QuenchedEstimate quenched_two_point(const ModelParams& base, const FieldDistribution& dist,
                                    int x_site, long n_fields, long n, std::uint64_t seed,
                                    int threads) {
    if (n_fields < 1)
        throw std::invalid_argument("quenched: need at least one field sample");

    QuenchedEstimate out;
    out.n_fields = n_fields;

    std::vector<double> means(n_fields);
    double var_inner = 0, n_eff = 0;
    for (long i = 0; i < n_fields; ++i) {
        ModelParams params = base;
        params.field = dist.sample(base.lattice, substream(seed, kStreamField, i));
        try {
            MCEstimate inner = estimate_two_point(params, x_site, n,
                                                  substream(seed, kStreamInner, i), threads);
            means[i] = inner.mean;
            var_inner += inner.std_err * inner.std_err;
            n_eff += inner.n_eff;
        } catch (const under_sampled_error& e) {
            std::ostringstream msg;
            msg << e.what() << " [field draw " << i << ":";
            for (double h : params.field) msg << ' ' << h;
            msg << "]";
            throw under_sampled_error(msg.str());
        }
    }

    double grand = 0;
    for (double m : means) grand += m;
    grand /= static_cast<double>(n_fields);

    double between = 0;
    if (n_fields >= 2) {
        for (double m : means) between += (m - grand) * (m - grand);
        between /= (n_fields - 1.0);
    }
    out.between_variance = between;
    out.mean_inner_variance = var_inner / static_cast<double>(n_fields);

    out.combined.mean = grand;
    out.combined.n = n_fields * n;
    out.combined.seed = seed;
    out.combined.batches = static_cast<int>(n_fields);
    out.combined.n_eff = n_eff;
    // The observed spread of the per-field means already contains both noise
    // sources (field draw and inner sampling), so it estimates the total
    // variance of the grand mean directly.
    out.combined.std_err = n_fields >= 2
                               ? std::sqrt(between / static_cast<double>(n_fields))
                               : std::sqrt(out.mean_inner_variance);
    return out;
}

} // namespace loopsim
