#include "loopsim/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace loopsim {

double log_loop_activity(const SpinParam& spin, double x) {
    if (x < 0) throw std::invalid_argument("loop_activity: negative weighted length");
    // sum_{a=-S}^{S} e^{ax} = e^{Sx} sum_{j=0}^{2S} e^{-jx}
    double tail = 0;
    for (int j = 0; j <= spin.twice_spin; ++j) tail += std::exp(-j * x);
    return spin.spin() * x + std::log(tail);
}

double loop_activity(const SpinParam& spin, double x) {
    return std::exp(log_loop_activity(spin, x));
}

double loop_weighted_length(const LoopDecomposition& decomp, int loop,
                            const std::vector<double>& field) {
    double x = 0;
    for (int id : decomp.loops[loop]) x += field[decomp.seg_site[id]] * decomp.seg_len[id];
    return x;
}

double log_split_activity(const SpinParam& spin, double p, double m) {
    if (p < 0 || m < 0) throw std::invalid_argument("split_activity: negative arc length");
    const double s = spin.spin();
    const double ss1 = spin.spin_square();
    // log-sum-exp over the 2 * 2S terms, shifted by the largest exponent
    const double shift = s * std::max(p, m) + (s - 1.0) * std::min(p, m);
    double sum = 0;
    for (int k = 0; k < spin.twice_spin; ++k) {
        const double a = -s + k; // a runs over -S .. S-1
        const double coeff = ss1 - a * (a + 1);
        sum += coeff * (std::exp((a + 1) * p + a * m - shift) +
                        std::exp(a * p + (a + 1) * m - shift));
    }
    return std::log(0.25 * sum) + shift;
}

double split_activity(const SpinParam& spin, double p, double m) {
    return std::exp(log_split_activity(spin, p, m));
}

double spin_factor_sum(const SpinParam& spin) {
    // work in quarter-integer units: 4*S(S+1) = 2S(2S+2), 4*a(a+1) = 2a(2a+2)
    const std::int64_t ts = spin.twice_spin;
    std::int64_t quarters = 0;
    for (std::int64_t k = 0; k < ts; ++k) {
        const std::int64_t two_a = -ts + 2 * k;
        quarters += ts * (ts + 2) - two_a * (two_a + 2);
    }
    return static_cast<double>(quarters) / 4.0;
}

double merge_ratio(const SpinParam& spin, double x1, double x2) {
    if (x1 < 0 || x2 < 0) throw std::invalid_argument("merge_ratio: negative weighted length");
    return std::exp(log_loop_activity(spin, x1 + x2) - log_loop_activity(spin, x1) -
                    log_loop_activity(spin, x2));
}

} // namespace loopsim
