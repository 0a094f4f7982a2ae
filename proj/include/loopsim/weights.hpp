#pragma once

#include <stdexcept>
#include <vector>

#include "loopsim/lattice.hpp"
#include "loopsim/loops.hpp"

namespace loopsim {

// Spin magnitude S as an integer 2S >= 1; theta = 2S+1 is the number of spin
// levels and the weight of a field-free loop.
struct SpinParam {
    int twice_spin = 1;

    SpinParam() = default;
    explicit SpinParam(int twice) : twice_spin(twice) {
        if (twice < 1) throw std::invalid_argument("SpinParam: 2S must be >= 1");
    }
    int theta() const { return twice_spin + 1; }
    double spin() const { return 0.5 * twice_spin; }
    double spin_square() const { // S(S+1)
        return 0.25 * twice_spin * (twice_spin + 2);
    }
};

// Loop activity z(X) = sum_{a=-S}^{S} e^{aX} with X the field-weighted
// vertical length of the loop.  Evaluated in the shifted form
// e^{SX} sum_j e^{-jX} so it never overflows for X up to ~700/S.
double log_loop_activity(const SpinParam& spin, double weighted_length);
double loop_activity(const SpinParam& spin, double weighted_length);

// Convenience overload: X = sum_y h_y * l_y(loop) from a decomposition.
double loop_weighted_length(const LoopDecomposition& decomp, int loop,
                            const std::vector<double>& field);

// Activity of the loop carrying both marked points, as a function of the
// field-weighted lengths P and M of its two arcs:
//   ztilde(P,M) = 1/4 sum_{a=-S}^{S-1} (S(S+1)-a(a+1))
//                 [ e^{(a+1)P + aM} + e^{aP + (a+1)M} ].
double log_split_activity(const SpinParam& spin, double plus_len, double minus_len);
double split_activity(const SpinParam& spin, double plus_len, double minus_len);

// sum_{a=-S}^{S-1} (S(S+1) - a(a+1)) = (2/3) S(S+1)(2S+1), evaluated exactly
// in integer arithmetic (values are quarter-integers).
double spin_factor_sum(const SpinParam& spin);

// z(X1+X2) / (z(X1) z(X2)); lies in [1/theta, 1] for non-negative arguments.
double merge_ratio(const SpinParam& spin, double x1, double x2);

} // namespace loopsim
