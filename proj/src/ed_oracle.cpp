#include "loopsim/ed_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace loopsim {

namespace {

long power_checked(long base, int exp, long cap) {
    long v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= base;
        if (v > cap) return cap + 1;
    }
    return v;
}

// digit of `site` in basis index `idx`; site 0 most significant
struct DigitCodec {
    int n_sites;
    int theta;
    std::vector<long> stride;

    DigitCodec(int n, int th) : n_sites(n), theta(th), stride(n) {
        long s = 1;
        for (int i = n - 1; i >= 0; --i) {
            stride[i] = s;
            s *= th;
        }
    }
    int digit(long idx, int site) const {
        return static_cast<int>((idx / stride[site]) % theta);
    }
};

// accumulate kernel acting on the pair (p,q) into H
void add_pair_kernel(Eigen::MatrixXd& h, const DigitCodec& codec, int p, int q,
                     const Eigen::MatrixXd& kernel, double factor) {
    const int theta = codec.theta;
    const long dim = h.rows();
    for (long col = 0; col < dim; ++col) {
        const int dp = codec.digit(col, p);
        const int dq = codec.digit(col, q);
        const int kcol = dp * theta + dq;
        for (int dp2 = 0; dp2 < theta; ++dp2)
            for (int dq2 = 0; dq2 < theta; ++dq2) {
                const double v = kernel(dp2 * theta + dq2, kcol);
                if (v == 0) continue;
                const long row =
                    col + (dp2 - dp) * codec.stride[p] + (dq2 - dq) * codec.stride[q];
                h(row, col) += factor * v;
            }
    }
}

void add_site_operator(Eigen::MatrixXd& h, const DigitCodec& codec, int p,
                       const Eigen::MatrixXd& op, double factor) {
    const long dim = h.rows();
    for (long col = 0; col < dim; ++col) {
        const int dp = codec.digit(col, p);
        for (int dp2 = 0; dp2 < codec.theta; ++dp2) {
            const double v = op(dp2, dp);
            if (v == 0) continue;
            h(col + (dp2 - dp) * codec.stride[p], col) += factor * v;
        }
    }
}

void check_dimension(const Lattice& lattice, const SpinParam& spin) {
    if (power_checked(spin.theta(), lattice.site_count(), kMaxEDDimension) > kMaxEDDimension)
        throw std::invalid_argument("ed oracle: state space exceeds the dense solver cap");
}

Eigen::MatrixXd site_operator_full(const Lattice& lattice, const SpinParam& spin, int p,
                                   const Eigen::MatrixXd& op) {
    check_dimension(lattice, spin);
    const long dim = ed_dimension(lattice, spin);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    DigitCodec codec(lattice.site_count(), spin.theta());
    add_site_operator(a, codec, p, op, 1.0);
    return a;
}

} // namespace

long ed_dimension(const Lattice& lattice, const SpinParam& spin) {
    // saturates at cap+1 so callers can test feasibility without overflow
    return power_checked(spin.theta(), lattice.site_count(), kMaxEDDimension);
}

Eigen::MatrixXd spin_x_matrix(const SpinParam& spin) {
    const int theta = spin.theta();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(theta, theta);
    const double ss1 = spin.spin_square();
    for (int d = 0; d + 1 < theta; ++d) {
        const double a = d - spin.spin();
        const double v = 0.5 * std::sqrt(ss1 - a * (a + 1));
        m(d + 1, d) = v;
        m(d, d + 1) = v;
    }
    return m;
}

Eigen::MatrixXd spin_z_matrix(const SpinParam& spin) {
    const int theta = spin.theta();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(theta, theta);
    for (int d = 0; d < theta; ++d) m(d, d) = d - spin.spin();
    return m;
}

Eigen::MatrixXd pair_swap_kernel(const SpinParam& spin) {
    const int theta = spin.theta();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(theta * theta, theta * theta);
    for (int a = 0; a < theta; ++a)
        for (int b = 0; b < theta; ++b) t(b * theta + a, a * theta + b) = 1.0;
    return t;
}

Eigen::MatrixXd pair_projector_kernel(const SpinParam& spin) {
    const int theta = spin.theta();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(theta * theta, theta * theta);
    for (int a = 0; a < theta; ++a)
        for (int c = 0; c < theta; ++c) q(a * theta + a, c * theta + c) = 1.0;
    return q;
}

Eigen::MatrixXd build_hamiltonian_general(const Lattice& lattice, const SpinParam& spin,
                                          double u, const std::vector<double>& field) {
    if (static_cast<int>(field.size()) != lattice.site_count())
        throw std::invalid_argument("build_hamiltonian_general: field size mismatch");
    if (u < 0 || u > 1) throw std::invalid_argument("build_hamiltonian_general: u outside [0,1]");
    check_dimension(lattice, spin);
    const long dim = ed_dimension(lattice, spin);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    DigitCodec codec(lattice.site_count(), spin.theta());

    const Eigen::MatrixXd swap = pair_swap_kernel(spin);
    const Eigen::MatrixXd proj = pair_projector_kernel(spin);
    const Eigen::MatrixXd sz = spin_z_matrix(spin);
    for (const auto& [p, q] : lattice.edges) {
        add_pair_kernel(h, codec, p, q, swap, -u);
        add_pair_kernel(h, codec, p, q, proj, -(1.0 - u));
        h.diagonal().array() += 1.0;
    }
    for (int p = 0; p < lattice.site_count(); ++p)
        if (field[p] != 0) add_site_operator(h, codec, p, sz, -field[p]);
    return h;
}

Eigen::MatrixXd build_hamiltonian_spin_half(const Lattice& lattice, double u,
                                            const std::vector<double>& field) {
    if (static_cast<int>(field.size()) != lattice.site_count())
        throw std::invalid_argument("build_hamiltonian_spin_half: field size mismatch");
    const SpinParam spin(1);
    check_dimension(lattice, spin);
    const long dim = ed_dimension(lattice, spin);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    DigitCodec codec(lattice.site_count(), spin.theta());

    const Eigen::MatrixXd sx = spin_x_matrix(spin);
    const Eigen::MatrixXd sz = spin_z_matrix(spin);
    // i S2 is real: w = (S+ - S-)/2, so S2 (x) S2 = -(w (x) w)
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.5;
    w(0, 1) = -0.5;

    const int theta = spin.theta();
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(theta * theta, theta * theta);
    for (int i = 0; i < theta * theta; ++i)
        for (int j = 0; j < theta * theta; ++j) {
            const int a = i / theta, b = i % theta;
            const int c = j / theta, d = j % theta;
            kernel(i, j) = sx(a, c) * sx(b, d) - (2 * u - 1) * w(a, c) * w(b, d) +
                           sz(a, c) * sz(b, d);
        }
    for (const auto& [p, q] : lattice.edges) {
        add_pair_kernel(h, codec, p, q, kernel, -2.0);
        h.diagonal().array() += 0.5; // -2 * (-1/4) per edge
    }
    for (int p = 0; p < lattice.site_count(); ++p)
        if (field[p] != 0) add_site_operator(h, codec, p, sz, -field[p]);
    return h;
}

EDSolution diagonalize(const Eigen::MatrixXd& hamiltonian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double exact_partition(const EDSolution& sol, double beta) {
    if (beta < 0) throw std::invalid_argument("exact_partition: negative beta");
    const double e0 = sol.energies.minCoeff();
    double z = 0;
    for (long i = 0; i < sol.energies.size(); ++i) z += std::exp(-beta * (sol.energies[i] - e0));
    return z * std::exp(-beta * e0);
}

double exact_partition(const Eigen::MatrixXd& hamiltonian, double beta) {
    return exact_partition(diagonalize(hamiltonian), beta);
}

double exact_schwinger(const EDSolution& sol, const Lattice& lattice, const SpinParam& spin,
                       double beta, double t, int site_a, int site_b) {
    if (t < 0 || t > beta) throw std::invalid_argument("exact_schwinger: t outside [0,beta]");
    const Eigen::MatrixXd sx = spin_x_matrix(spin);
    const Eigen::MatrixXd a = sol.vectors.transpose() *
                              site_operator_full(lattice, spin, site_a, sx) * sol.vectors;
    const Eigen::MatrixXd b = sol.vectors.transpose() *
                              site_operator_full(lattice, spin, site_b, sx) * sol.vectors;
    const double e0 = sol.energies.minCoeff();
    const long dim = sol.energies.size();
    double num = 0, z = 0;
    for (long i = 0; i < dim; ++i) {
        z += std::exp(-beta * (sol.energies[i] - e0));
        for (long j = 0; j < dim; ++j)
            num += a(i, j) * b(j, i) *
                   std::exp(-(beta - t) * (sol.energies[i] - e0) - t * (sol.energies[j] - e0));
    }
    return num / z;
}

double exact_two_point(const EDSolution& sol, const Lattice& lattice, const SpinParam& spin,
                       double beta, int site_a, int site_b) {
    return exact_schwinger(sol, lattice, spin, beta, 0.0, site_a, site_b);
}

std::vector<ProfilePoint> decay_profile(int side, const SpinParam& spin, double u,
                                        double beta, double field_value) {
    const Lattice lattice = build_lattice(1, side);
    const std::vector<double> field(lattice.site_count(), field_value);
    const EDSolution sol = diagonalize(build_hamiltonian_general(lattice, spin, u, field));
    const int origin = lattice.origin();
    std::vector<ProfilePoint> out;
    for (int d = 1; d <= side / 2; ++d) {
        const int x = lattice.site_at({d});
        out.push_back({d, exact_two_point(sol, lattice, spin, beta, origin, x)});
    }
    return out;
}

} // namespace loopsim
