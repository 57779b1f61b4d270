// exact.hpp — Truncated-Hilbert-space Hamiltonians for the Dicke and band
// forms, fixed-step RK4 state evolution, and dense observables. This module
// is the ground-truth oracle the tensor-network path is validated against.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "dickeband/model.hpp"

namespace dickeband::exact {

using Complex = std::complex<double>;

// ------------------------------------------------------------------- layout

// Site ordering [atom_1 ... atom_{N_a}, boson_1 ... boson_M]; site 0 is the
// most significant digit of the basis index. Atom basis: |0> = ground,
// |1> = excited. Boson basis: Fock states |0> .. |N_f - 1>.
struct HilbertSpaceLayout {
    int atom_count{0};
    int mode_count{0};
    int fock_cutoff{2};

    static constexpr std::int64_t kDefaultDimensionCap = std::int64_t{1} << 24;

    HilbertSpaceLayout() = default;
    HilbertSpaceLayout(int atoms, int modes, int fock,
                       std::int64_t dimension_cap = kDefaultDimensionCap);

    int site_count() const { return atom_count + mode_count; }
    int site_dim(int site) const { return site < atom_count ? 2 : fock_cutoff; }
    std::int64_t dimension() const { return dim_; }
    std::int64_t stride(int site) const { return strides_[site]; }
    int digit(std::int64_t index, int site) const {
        return static_cast<int>((index / strides_[site]) % site_dim(site));
    }
    std::int64_t index_of(const std::vector<int>& digits) const;

private:
    std::int64_t dim_{0};
    std::vector<std::int64_t> strides_;
};

// ------------------------------------------------------------ local operators

struct LocalOperatorSet {
    Eigen::MatrixXcd sigma_x, sigma_z, sigma_plus, sigma_minus;  // 2x2
    Eigen::MatrixXcd annihilate, create, number;                 // N_f x N_f

    explicit LocalOperatorSet(int fock_cutoff);
};

// --------------------------------------------------------- sparse Hamiltonian

struct HamiltonianTerm {
    Complex coefficient{0.0, 0.0};
    // (site, local operator); sites strictly increasing
    std::vector<std::pair<int, Eigen::MatrixXcd>> factors;
};

class SparseHamiltonian {
public:
    SparseHamiltonian(HilbertSpaceLayout layout, std::vector<HamiltonianTerm> terms);

    const HilbertSpaceLayout& layout() const { return layout_; }
    const std::vector<HamiltonianTerm>& terms() const { return terms_; }
    std::int64_t dimension() const { return layout_.dimension(); }
    std::int64_t nonzeros() const { return static_cast<std::int64_t>(values_.size()); }

    // Compiles the CSR form and verifies hermiticity (throws if the
    // max |H - H^dagger| entry exceeds 1e-12 relative to the largest entry).
    void compile();
    bool compiled() const { return !row_ptr_.empty(); }

    void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    double hermiticity_residual() const;

    // Dense form for small audits only.
    Eigen::MatrixXcd to_dense() const;

private:
    HilbertSpaceLayout layout_;
    std::vector<HamiltonianTerm> terms_;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> cols_;
    std::vector<Complex> values_;
};

// H = sum_j (omega_{a,j}/2) sigma^z_j
//   + sum_k [omega_k a+_k a_k - i sum_j g_{j,k} sigma^x_j (a_k - a+_k)]
SparseHamiltonian build_dicke_hamiltonian(const model::SystemSpec& spec,
                                          const HilbertSpaceLayout& layout);

// H = sum_j [(omega_{a,j}/2) sigma^z_j - i sum_{k<=j} rho_{j,k} sigma^x_j (b_k - b+_k)]
//   + sum_k [xi_k b+_k b_k + sum_{j=1..N_a} t_{k,k+j} (b+_k b_{k+j} + b+_{k+j} b_k)]
SparseHamiltonian build_band_hamiltonian(const model::BandCouplingMatrix& band,
                                         const HilbertSpaceLayout& layout);

// ------------------------------------------------------------------ evolution

struct StateVector {
    Eigen::VectorXcd amplitudes;
    double time{0.0};

    double norm() const { return amplitudes.norm(); }
};

// Product state with the given per-site digits.
StateVector product_state(const HilbertSpaceLayout& layout,
                          const std::vector<int>& digits);
// |e,...,e,0,...,0>
StateVector all_excited_vacuum(const HilbertSpaceLayout& layout);

struct EvolveOptions {
    double dt{1e-3};
    std::int64_t steps{0};
    std::int64_t stride{1};          // sample every this many steps (and t = 0)
    double norm_drift_tolerance{1e-8};
};

struct NormDriftError : std::runtime_error {
    std::int64_t step;
    double drift;
    NormDriftError(std::int64_t step_, double drift_);
};

// Fixed-step RK4 on dpsi/dt = -i H psi. Samples (including the initial state)
// are handed to on_sample; throws NormDriftError if the norm drifts beyond
// tolerance, reporting the offending step.
void evolve(const SparseHamiltonian& h, const StateVector& psi0,
            const EvolveOptions& opts,
            const std::function<void(const StateVector&)>& on_sample);

// Convenience wrapper collecting the sampled trajectory.
std::vector<StateVector> evolve_trajectory(const SparseHamiltonian& h,
                                           const StateVector& psi0,
                                           const EvolveOptions& opts);

// ---------------------------------------------------------------- observables

// <sigma^+_j sigma^-_j>, the excited-state population of atom j (normalized).
double atomic_population(const StateVector& psi, const HilbertSpaceLayout& layout,
                         int atom);

// Diagonal of the two-atom reduced density matrix in basis {gg, ge, eg, ee}.
std::array<double, 4> two_atom_components(const StateVector& psi,
                                          const HilbertSpaceLayout& layout);

double energy_expectation(const SparseHamiltonian& h, const StateVector& psi);

// Max over modes of the population of the top Fock state |N_f - 1>;
// the truncation-boundary health monitor.
double top_fock_occupancy(const StateVector& psi, const HilbertSpaceLayout& layout);

// Dense oracles used to validate the MPS observables on small instances.
Eigen::MatrixXcd two_atom_density_matrix(const StateVector& psi,
                                         const HilbertSpaceLayout& layout);
Eigen::MatrixXcd boson_correlation_dense(const StateVector& psi,
                                         const HilbertSpaceLayout& layout);

}  // namespace dickeband::exact
