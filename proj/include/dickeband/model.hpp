// model.hpp — System specifications and coupling matrices for the
// star-coupled (Dicke) and band-coupled forms of a few-atom multimode system.
//
// Units are normalized throughout: omega_{a,1} = 1, hbar = 1, cavity length
// L = 1 with walls at x = -1/2 and x = +1/2.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dickeband::model {

// ---------------------------------------------------------------- generators

enum class HarmonicRule { All, Odd };

// Fixes the overall coupling scale g0 of a cavity spec.
struct CouplingAnchor {
    enum class Kind { PairRatio, MaxRatio };
    Kind kind{Kind::PairRatio};
    int atom{0};   // 0-based, PairRatio only
    int mode{0};   // 0-based, PairRatio only
    double value{0.0};

    // g_{atom,mode} / omega_mode = value
    static CouplingAnchor pair_ratio(int atom, int mode, double value);
    // max_{j,k} |g_{j,k} / omega_k| = value
    static CouplingAnchor max_ratio(double value);
};

// Provenance of a generated spec; carries the per-mode harmonic numbers
// needed later to evaluate mode profiles at arbitrary positions.
struct GeneratorInfo {
    std::string kind{"custom"};      // "periodic_lattice" | "pec_cavity" | "custom"
    HarmonicRule rule{HarmonicRule::All};
    std::vector<int> harmonics;      // n_k per mode (empty for custom specs)
    double g0{0.0};
};

// PEC mode profile u_n(x) = sin(n pi (x + 1/2)) on x in [-1/2, 1/2].
double mode_profile(int harmonic, double x);

// ---------------------------------------------------------------- SystemSpec

struct SystemSpec {
    Eigen::VectorXd atom_frequencies;  // omega_{a,j}
    Eigen::VectorXd atom_positions;    // x_j in [-1/2, 1/2]
    Eigen::VectorXd mode_frequencies;  // omega_k, strictly increasing
    Eigen::MatrixXd coupling;          // g_{j,k}, N_a x M
    GeneratorInfo generator;

    int atom_count() const { return static_cast<int>(atom_frequencies.size()); }
    int mode_count() const { return static_cast<int>(mode_frequencies.size()); }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;

    std::string to_json() const;
    static SystemSpec from_json(const std::string& text);
};

// Single atom on a periodic lattice: omega_k = k, g_{1,k} = g sqrt(omega_k).
SystemSpec build_periodic_lattice_spec(int mode_count, double coupling_scale);

// Identical atoms in a 1D PEC cavity. harmonic_rule selects n = 1,2,3,...
// (All) or n = 1,3,5,... (Odd); g_{j,k} = g0 sqrt(omega_k/omega_1) u_{n_k}(x_j)
// with g0 fixed by the anchor.
SystemSpec build_pec_cavity_spec(const std::vector<double>& atom_positions,
                                 int mode_count, HarmonicRule rule,
                                 const CouplingAnchor& anchor);

// ---------------------------------------------------------- coupling matrices

// Symmetric (N_a+M)x(N_a+M) matrix: [diag(omega_a), g; g^T, diag(omega_f)].
class DickeCouplingMatrix {
public:
    DickeCouplingMatrix(Eigen::MatrixXd matrix, int atom_count);
    static DickeCouplingMatrix assemble(const SystemSpec& spec);

    const Eigen::MatrixXd& matrix() const { return mat_; }
    int atom_count() const { return atom_count_; }
    int mode_count() const { return static_cast<int>(mat_.rows()) - atom_count_; }
    int size() const { return static_cast<int>(mat_.rows()); }

    Eigen::VectorXd atom_frequencies() const;
    Eigen::VectorXd mode_frequencies() const;
    Eigen::MatrixXd coupling_block() const;  // N_a x M

private:
    Eigen::MatrixXd mat_;
    int atom_count_;
};

DickeCouplingMatrix assemble_dicke_matrix(const SystemSpec& spec);

// Symmetric band matrix with bandwidth N_a: [diag(omega_a), rho; rho^T, xi].
// rho is lower triangular (rho_{j,k} = 0 for k > j); the boson block has
// diagonal xi_k and off-diagonals t_{i,j} confined to |i-j| <= N_a.
class BandCouplingMatrix {
public:
    BandCouplingMatrix(Eigen::MatrixXd matrix, int atom_count);

    const Eigen::MatrixXd& matrix() const { return mat_; }
    int atom_count() const { return atom_count_; }
    int mode_count() const { return static_cast<int>(mat_.rows()) - atom_count_; }
    int size() const { return static_cast<int>(mat_.rows()); }

    double rho(int atom, int mode) const;  // field-atom coupling, 0-based
    double xi(int mode) const;             // transformed boson frequency
    double hopping(int mode_i, int mode_j) const;  // t_{ij}, 0 outside band

    Eigen::VectorXd atom_frequencies() const;

private:
    Eigen::MatrixXd mat_;
    int atom_count_;
};

// ------------------------------------------------------------ TransformRecord

// Accumulated orthogonal Q with the block structure [I_{N_a}, 0; 0, U].
// The chain boson operators relate to the originals as b_j = sum_k U_jk a_k.
struct TransformRecord {
    Eigen::MatrixXd q;                       // full (N_a+M)^2
    int atom_count{0};
    std::vector<Eigen::VectorXd> householder_vectors;  // one per applied step
    bool degenerate{false};  // M <= N_a: transformation skipped, Q = I

    Eigen::MatrixXd boson_block() const;     // U, M x M
    double orthogonality_residual() const;   // max |QQ^T - I|
    double atom_block_deviation() const;     // max |Q_aa - I| and off blocks
};

// --------------------------------------------------------------------- export

// Row-major full-storage CSV, 17 significant digits per entry.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

}  // namespace dickeband::model
