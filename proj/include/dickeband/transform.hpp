// transform.hpp — Band reduction of the Dicke coupling matrix via Householder
// similarity transforms, plus the independent oracles used to validate it
// (Lanczos chain mapping with modified Gram-Schmidt, cyclic Jacobi spectrum).

#pragma once

#include <Eigen/Dense>

#include "dickeband/model.hpp"

namespace dickeband::transform {

// One Householder step. The reflector is I - 2 v v^T / (v^T v); a skip step
// (nothing below the pivot to annihilate) carries an empty v.
struct HouseholderStep {
    int index{0};        // 1-based step i
    Eigen::VectorXd v;   // full-length, leading N_a+i-1 entries exactly zero
    double alpha{0.0};
    bool skip{false};
};

// Builds the reflector vector from column i of the intermediate matrix.
// Annihilates everything below row N_a+i (1-based) of that column.
HouseholderStep householder_vector(const Eigen::MatrixXd& intermediate, int step,
                                   int atom_count);

// Applies the step as a symmetric rank-2 update, A <- Q A Q^T, and
// accumulates Q <- Q_i Q. Annihilated entries are set to exact zero.
void apply_householder_step(Eigen::MatrixXd& a, Eigen::MatrixXd& q,
                            const HouseholderStep& step, int atom_count);

struct BandReduction {
    model::BandCouplingMatrix band;
    model::TransformRecord record;
};

// The coupling matrix transformation: orthogonally reduces the Dicke matrix
// to a symmetric band matrix of bandwidth N_a without touching the atom
// coordinates. For M <= N_a the input is returned unchanged with Q = I and
// the record's degenerate flag set.
BandReduction band_reduce(const model::DickeCouplingMatrix& dicke);

// --------------------------------------------------------------- chain oracle

struct ChainCoefficients {
    Eigen::VectorXd site_frequencies;  // xi_n
    Eigen::VectorXd hoppings;          // t_n, length M-1 (or shorter on breakdown)
};

// Reads the chain coefficients off a single-atom band (tridiagonal) matrix.
// Hoppings are reported in the nonnegative sign gauge (b_k -> -b_k leaves the
// Hamiltonian invariant), which is the convention Lanczos produces.
ChainCoefficients chain_coefficients(const model::BandCouplingMatrix& band);

// Independent chain mapping: Lanczos tridiagonalization of the boson block
// seeded by the normalized coupling vector, with full modified Gram-Schmidt
// reorthogonalization at every step. Single-atom specs only.
ChainCoefficients lanczos_chain_map_oracle(const model::DickeCouplingMatrix& dicke);

// ----------------------------------------------------------------- validation

struct BandValidationReport {
    double max_outside_band{0.0};
    double max_asymmetry{0.0};
    double atom_block_deviation{0.0};
    double tolerance{0.0};
    int worst_row{-1};
    int worst_col{-1};
    bool pass{false};
};

// Checks band structure (entries with |row-col| > N_a), symmetry, and that
// the atom block still holds the original frequencies. The tolerance is
// relative to the max-abs entry of the matrix.
BandValidationReport validate_band_structure(const model::BandCouplingMatrix& band,
                                             double tolerance = 1e-10);

// ------------------------------------------------------------ spectrum oracle

// Eigenvalues of a symmetric real matrix, sorted ascending. Cyclic Jacobi
// rotations; input must be symmetric within 1e-12.
Eigen::VectorXd symmetric_spectrum(const Eigen::MatrixXd& matrix);

}  // namespace dickeband::transform
