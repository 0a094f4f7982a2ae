#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "loopsim/bridges.hpp"
#include "loopsim/lattice.hpp"
#include "loopsim/weights.hpp"

namespace loopsim {

// Model: nearest-neighbour interaction with cross weight u, spin S, inverse
// temperature beta and a per-site transverse field h >= 0.  Monte Carlo runs
// sample bridge configurations at intensity 1 per edge and reweight each
// sample by the product of loop activities.
struct ModelParams {
    Lattice lattice;
    double beta = 1.0;
    double u = 1.0;
    SpinParam spin;
    std::vector<double> field;

    void validate() const;
};

ModelParams make_model(const Lattice& lattice, double beta, double u, int twice_spin,
                       double uniform_field);

struct MCEstimate {
    double mean = 0;
    double std_err = 0;
    long n = 0;
    std::uint64_t seed = 0;
    int batches = 0;
    double n_eff = 0; // (sum W)^2 / sum W^2
};

// Raised when an importance-sampled run cannot produce a usable estimate
// (no connected samples, or an empty batch denominator).
struct under_sampled_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean of the total loop-activity weight; an unbiased estimate of the
// partition function.  Standard error by batch means over >= 20 batches.
MCEstimate estimate_partition(const ModelParams& params, long n, std::uint64_t seed,
                              int threads = 1);

// <S1_0 S1_x> as the ratio estimator
//   E[ 1{0 <-> x} ztilde/z * W ] / E[ W ],
// numerator and denominator sharing the same bridge stream; standard error by
// jackknife over batches.  x must differ from the origin.
MCEstimate estimate_two_point(const ModelParams& params, int x_site, long n,
                              std::uint64_t seed, int threads = 1);

// Imaginary-time version with terminal point (x, t); t = 0 reproduces
// estimate_two_point sample for sample.
MCEstimate estimate_schwinger(const ModelParams& params, int x_site, double t, long n,
                              std::uint64_t seed, int threads = 1);

// (1/2) spin_factor_sum * E[ 1{0 <-> x} e^{-sum_y h_y l+_y} W ] / E[ W ],
// the closed-form upper bound for the two-point function.
MCEstimate estimate_corollary_rhs(const ModelParams& params, int x_site, long n,
                                  std::uint64_t seed, int threads = 1);

// Probability of a configuration event under the weighted loop measure,
// computed as the ratio E_rho[1_event W] / E_rho[W] over the same stream.
// Unlike the correlation estimators a zero count is a valid estimate (the
// event may be impossible), so only an empty denominator raises.
struct LoopDecomposition;
MCEstimate estimate_event(
    const ModelParams& params, long n, std::uint64_t seed, int threads,
    const std::function<bool(const BridgeConfig&, const LoopDecomposition&)>& event);

// Per-site i.i.d. transverse field: either a point mass or a two-point law
// taking 0 with probability eps and `alpha` otherwise.
struct FieldDistribution {
    enum class Kind { point_mass, bernoulli } kind = Kind::point_mass;
    double value = 0;  // point mass
    double eps = 0;    // bernoulli: P(h = 0)
    double alpha = 0;  // bernoulli: value with probability 1 - eps

    std::vector<double> sample(const Lattice& lattice, std::uint64_t seed) const;
};

struct QuenchedEstimate {
    MCEstimate combined;          // mean over field draws, total-variance error
    double between_variance = 0;  // sample variance of the per-field means
    double mean_inner_variance = 0;
    long n_fields = 0;
};

// Disorder average of the two-point function: n_fields outer field draws,
// n per inner run.  Inner streams depend only on (seed, field index), so a
// degenerate distribution reproduces the fixed-field run bit for bit.
QuenchedEstimate quenched_two_point(const ModelParams& base, const FieldDistribution& dist,
                                    int x_site, long n_fields, long n, std::uint64_t seed,
                                    int threads = 1);

} // namespace loopsim
