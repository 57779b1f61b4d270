// mps.hpp — Matrix product states over [atoms..., bosons...], TEBD time
// evolution of the band Hamiltonian with (N_a+1)-site gates decomposed into
// MPOs, and the tensor-network observables (populations, two-atom components,
// entanglement entropies, boson/field correlations).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dickeband/exact.hpp"
#include "dickeband/model.hpp"

namespace dickeband::mps {

using Complex = std::complex<double>;

// Rank-3 site tensor (left, phys, right), column-major with the left index
// fastest. left_mat and right_mat are zero-copy matricizations.
class Tensor3 {
public:
    Tensor3() : dl_(0), d_(0), dr_(0) {}
    Tensor3(int dl, int d, int dr)
        : dl_(dl), d_(d), dr_(dr), data_(Eigen::MatrixXcd::Zero(dl * d, dr)) {}

    int left() const { return dl_; }
    int phys() const { return d_; }
    int right() const { return dr_; }

    Complex& at(int l, int p, int r) { return data_(l + dl_ * p, r); }
    Complex at(int l, int p, int r) const { return data_(l + dl_ * p, r); }

    // (dl*d) x dr with row index l + dl*p
    Eigen::Map<Eigen::MatrixXcd> left_mat() {
        return {data_.data(), dl_ * d_, dr_};
    }
    Eigen::Map<const Eigen::MatrixXcd> left_mat() const {
        return {data_.data(), dl_ * d_, dr_};
    }
    // dl x (d*dr) with column index p + d*r
    Eigen::Map<Eigen::MatrixXcd> right_mat() {
        return {data_.data(), dl_, d_ * dr_};
    }
    Eigen::Map<const Eigen::MatrixXcd> right_mat() const {
        return {data_.data(), dl_, d_ * dr_};
    }

    double squared_norm() const { return data_.squaredNorm(); }
    bool all_finite() const { return data_.allFinite(); }

    // Rebinds the matrix as a (dl, d, dr) tensor; total size must match.
    static Tensor3 from_left_mat(Eigen::MatrixXcd m, int dl, int d);
    static Tensor3 from_right_mat(Eigen::MatrixXcd m, int d, int dr);

private:
    int dl_, d_, dr_;
    Eigen::MatrixXcd data_;
};

// --------------------------------------------------------------------- policy

struct TruncationPolicy {
    int chi_max{128};
    double cutoff{1e-10};  // per-truncation relative discarded weight

    // ledger
    double cumulative_discarded{0.0};  // absolute sum of squared dropped values
    std::int64_t truncation_count{0};
    double max_single_discard{0.0};

    void record(double discarded_abs);
};

// ------------------------------------------------------------------------ MPS

class MPS;
struct GateMPO;
void apply_mpo_and_truncate(MPS& mps, const GateMPO& gate, TruncationPolicy& policy);

class MPS {
public:
    MPS() = default;
    MPS(std::vector<int> site_dims);  // all-zero tensors, bond dims 1

    int site_count() const { return static_cast<int>(tensors_.size()); }
    int site_dim(int s) const { return tensors_[s].phys(); }
    int bond_dim(int bond) const;  // bond b sits between sites b-1 and b
    int max_bond_dim() const;
    int center() const { return center_; }

    // first atom_count sites are two-level atoms, the rest bosons
    int atom_count() const { return atom_count_; }
    void set_atom_count(int n) { atom_count_ = n; }

    Tensor3& tensor(int s) { return tensors_[s]; }
    const Tensor3& tensor(int s) const { return tensors_[s]; }

    // Exact (QR/LQ based) canonical-center moves.
    void move_center_to(int site);

    double norm() const;            // sqrt(<psi|psi>) read off the center tensor
    double squared_norm() const { return tensors_[center_].squared_norm(); }

    // Schmidt values across the bond (center is moved there). Values are the
    // raw singular values of the possibly sub-normalized state.
    Eigen::VectorXd bond_singular_values(int bond);

    // Last singular values seen at each bond (refreshed by truncating SVDs).
    const std::vector<Eigen::VectorXd>& bond_spectra() const { return bond_sv_; }

    // residual of the isometry conditions away from the center (for audits)
    double canonical_residual() const;

    void set_bond_spectrum(int bond, Eigen::VectorXd s);

private:
    friend void apply_mpo_and_truncate(MPS&, const GateMPO&, TruncationPolicy&);

    std::vector<Tensor3> tensors_;
    std::vector<Eigen::VectorXd> bond_sv_;  // index b: between sites b and b+1
    int center_{0};
    int atom_count_{0};
};

enum class InitialState { Psi1, Psi2, Psi3, AllExcited, Custom };

// Product/Bell initial states over [atoms..., bosons...] with all bosons in
// vacuum. psi1 = (|ee>+|gg>)/sqrt2, psi2 = (|eg>+|ge>)/sqrt2 (two atoms only),
// psi3 = (|g>+|e>)(|g>+|e>)/2, all_excited = |e...e,0...0>.
// Custom takes one normalized amplitude vector per site (product state).
MPS init_product_mps(const exact::HilbertSpaceLayout& layout, InitialState which,
                     const std::vector<Eigen::VectorXcd>& custom = {});

// Dense amplitudes in the exact-module basis ordering; small systems only.
Eigen::VectorXcd to_statevector(const MPS& mps);

// -------------------------------------------------------------------- GateMPO

struct MpoTensor {
    int wl{1}, dout{1}, din{1}, wr{1};
    Eigen::VectorXcd flat;  // (wl, dout, din, wr), wl fastest
    // contraction-ready form: (wl*din) x (dout*wr), rows w + wl*i, cols o + dout*w'
    Eigen::MatrixXcd zip_form;

    void build_zip_form();
};

struct GateMPO {
    int start{0};
    std::vector<int> dims;
    std::vector<MpoTensor> tensors;

    int site_count() const { return static_cast<int>(dims.size()); }
    int max_bond() const;
    Eigen::MatrixXcd recontract() const;  // dense gate, for audits
};

// Sequential SVD split of a dense gate into per-site MPO tensors. Singular
// values below cutoff (relative to the largest) are dropped; the recontraction
// residual stays below 1e-10 max-abs.
GateMPO decompose_gate_to_mpo(const Eigen::MatrixXcd& gate,
                              const std::vector<int>& site_dims,
                              double cutoff = 1e-13);

// U = exp(-i generator dt) by dense Hermitian eigendecomposition. Rejects
// generators with hermiticity residual > 1e-12 (relative) or dimension beyond
// the dense cap (4096).
Eigen::MatrixXcd exponentiate_gate(const Eigen::MatrixXcd& generator, double dt);

// Applies the gate MPO with the zip-up scheme followed by a right-to-left
// truncation sweep; the canonical center ends at the gate's first site.
// Discarded weight is recorded in the policy ledger.
void apply_mpo_and_truncate(MPS& mps, const GateMPO& gate, TruncationPolicy& policy);

// ----------------------------------------------------------------- scheduling

enum class GateKind { Atom, Boson };

struct Gate {
    GateKind kind{GateKind::Boson};
    int start{0};
    std::vector<int> dims;
    Eigen::MatrixXcd generator;
    std::string label;
};

// How atomic terms are bundled into gates. PerAtom follows one gate per atom
// with identity factors on intervening atom sites; MergedAtoms bundles every
// atomic term into a single gate over sites [atom_1 .. boson_{N_a}], which
// keeps the Trotter map exactly symmetric under atom exchange for
// exchange-symmetric couplings.
enum class AtomGateMode { PerAtom, MergedAtoms };

struct TrotterSchedule {
    std::vector<std::vector<Gate>> layers;  // same-layer gates are disjoint
    double dt{0.0};
    int fock_cutoff{2};
    int atom_count{0};
};

TrotterSchedule build_gate_layers(const model::BandCouplingMatrix& band,
                                  const exact::HilbertSpaceLayout& layout, double dt,
                                  AtomGateMode mode = AtomGateMode::PerAtom);

// Sum of all gate generators embedded in the full Hilbert space (term-sum
// audit against the band Hamiltonian; small systems only).
Eigen::MatrixXcd schedule_generator_sum(const TrotterSchedule& schedule,
                                        const exact::HilbertSpaceLayout& layout);

struct CompiledGate {
    GateKind kind{GateKind::Boson};
    GateMPO mpo;
    std::string label;
};

struct CompiledSchedule {
    std::vector<std::vector<CompiledGate>> layers;
    double dt{0.0};
    int max_mpo_bond{0};
};

// Exponentiates every gate for dt/2 and decomposes to MPOs; enforces the
// boson-gate bond bound N_f^{N_a} (even N_a) / N_f^{N_a+1} (odd N_a).
CompiledSchedule compile_schedule(const TrotterSchedule& schedule);

// ---------------------------------------------------------------- observables

// von Neumann entropy from the Schmidt values at the given bond, computed on
// the normalized spectrum; 0 ln 0 := 0.
double entanglement_entropy(MPS& mps, int bond);
double entropy_from_singular_values(const Eigen::VectorXd& s);

// Normalized local expectation <op> at a site.
double local_expectation(MPS& mps, int site, const Eigen::MatrixXcd& op);

std::array<double, 4> two_atom_components(MPS& mps);

Eigen::MatrixXcd two_site_rdm(MPS& mps);

// Hermitian M x M matrix of <b+_i b_j> over the boson sites (normalized).
Eigen::MatrixXcd boson_correlation_matrix(MPS& mps);

// First-order field correlation <E^(-) E^(+)>(x) on the given positions,
// using the transform record to rotate chain-mode correlations back to the
// physical modes: <a+ a> = U^T <b+ b> U, c_k(x) = sqrt(omega_k/2) u_{n_k}(x).
Eigen::VectorXd field_correlation(MPS& mps, const model::TransformRecord& record,
                                  const model::SystemSpec& spec,
                                  const std::vector<double>& positions);

// -------------------------------------------------------------------- running

struct ObservableRequest {
    std::int64_t stride{1};
    std::int64_t correlation_stride{0};  // 0 disables the correlation map
    std::vector<double> positions;       // field-correlation grid
};

struct TimePoint {
    double t{0.0};
    std::vector<double> populations;
    std::array<double, 4> components{0, 0, 0, 0};  // gg, ge, eg, ee (2 atoms)
    double entropy_bond1{0.0};
    double entropy_bond2{0.0};
    double norm2{1.0};
    double cumulative_discarded{0.0};
    int max_bond{1};
};

struct CorrelationMap {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<Eigen::VectorXd> values;  // one row per sampled time
};

struct TebdResult {
    std::vector<TimePoint> series;
    CorrelationMap correlation;
    int max_bond_reached{1};
    double wall_seconds{0.0};
};

// Second-order TEBD: per step, every layer is applied for dt/2 in order and
// then again in reverse order. Observables are sampled every stride steps.
TebdResult tebd_run(MPS mps, const CompiledSchedule& schedule,
                    TruncationPolicy& policy, std::int64_t steps,
                    const ObservableRequest& request,
                    const model::TransformRecord* record = nullptr,
                    const model::SystemSpec* spec = nullptr);

}  // namespace dickeband::mps
