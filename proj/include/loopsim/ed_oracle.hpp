#pragma once

#include <Eigen/Dense>
#include <vector>

#include "loopsim/lattice.hpp"
#include "loopsim/weights.hpp"

namespace loopsim {

// Dense exact diagonalization on the full tensor-product space, usable up to
// dimension (2S+1)^{|sites|} <= 4096.  Basis index digits run over the spin
// levels of each site, site 0 most significant (lexicographic site order).

constexpr int kMaxEDDimension = 4096;

long ed_dimension(const Lattice& lattice, const SpinParam& spin);

// Single-site spin matrices in the level basis d = 0..2S, m = d - S.
Eigen::MatrixXd spin_x_matrix(const SpinParam& spin); // (S+ + S-)/2
Eigen::MatrixXd spin_z_matrix(const SpinParam& spin); // diag(m)

// Two-site kernels on the theta^2-dimensional pair space, index d1*theta+d2.
Eigen::MatrixXd pair_swap_kernel(const SpinParam& spin);      // |a b> -> |b a>
Eigen::MatrixXd pair_projector_kernel(const SpinParam& spin); // <ab|.|cd> = [a=b][c=d]

// H = -sum_{xy} (u T_xy + (1-u) Q_xy - 1) - sum_x h_x S3_x
Eigen::MatrixXd build_hamiltonian_general(const Lattice& lattice, const SpinParam& spin,
                                          double u, const std::vector<double>& field);

// Spin-1/2 form of the same interaction,
// H = -2 sum_{xy} (S1 S1 + (2u-1) S2 S2 + S3 S3 - 1/4) - sum_x h_x S3_x.
// Agrees entrywise with the general builder at 2S = 1.
Eigen::MatrixXd build_hamiltonian_spin_half(const Lattice& lattice, double u,
                                            const std::vector<double>& field);

struct EDSolution {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors; // columns
};

EDSolution diagonalize(const Eigen::MatrixXd& hamiltonian);

double exact_partition(const Eigen::MatrixXd& hamiltonian, double beta);
double exact_partition(const EDSolution& sol, double beta);

// <S1_0 S1_x> at inverse temperature beta.
double exact_two_point(const EDSolution& sol, const Lattice& lattice, const SpinParam& spin,
                       double beta, int site_a, int site_b);

// Tr(S1_0 e^{-(beta-t)H} S1_x e^{-tH}) / Z, the imaginary-time two-point
// function; t=0 reduces to exact_two_point.
double exact_schwinger(const EDSolution& sol, const Lattice& lattice, const SpinParam& spin,
                       double beta, double t, int site_a, int site_b);

// Two-point values along a chain from the origin, distances 1..L/2.
struct ProfilePoint {
    int distance;
    double value;
};
std::vector<ProfilePoint> decay_profile(int side, const SpinParam& spin, double u,
                                        double beta, double field_value);

} // namespace loopsim
