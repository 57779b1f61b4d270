#include "dickeband/model.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dickeband::model {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

CouplingAnchor CouplingAnchor::pair_ratio(int atom, int mode, double value) {
    CouplingAnchor a;
    a.kind = Kind::PairRatio;
    a.atom = atom;
    a.mode = mode;
    a.value = value;
    return a;
}

CouplingAnchor CouplingAnchor::max_ratio(double value) {
    CouplingAnchor a;
    a.kind = Kind::MaxRatio;
    a.value = value;
    return a;
}

double mode_profile(int harmonic, double x) {
    return std::sin(harmonic * kPi * (x + 0.5));
}

void SystemSpec::validate() const {
    const int na = atom_count();
    const int m = mode_count();
    require(na >= 1, "spec: need at least one atom");
    require(m >= 1, "spec: need at least one mode");
    require(atom_positions.size() == na, "spec: positions/frequencies size mismatch");
    for (int j = 0; j < na; ++j) {
        require(atom_frequencies(j) > 0.0, "spec: atom frequencies must be positive");
        require(std::isfinite(atom_frequencies(j)), "spec: non-finite atom frequency");
        require(atom_positions(j) >= -0.5 && atom_positions(j) <= 0.5,
                "spec: atom position outside the cavity [-1/2, 1/2]");
    }
    for (int k = 0; k < m; ++k) {
        require(mode_frequencies(k) > 0.0, "spec: mode frequencies must be positive");
        require(std::isfinite(mode_frequencies(k)), "spec: non-finite mode frequency");
        if (k > 0)
            require(mode_frequencies(k) > mode_frequencies(k - 1),
                    "spec: mode frequencies must be strictly increasing");
    }
    require(coupling.rows() == na && coupling.cols() == m,
            "spec: coupling matrix must be N_a x M");
    require(coupling.allFinite(), "spec: non-finite coupling entry");
}

SystemSpec build_periodic_lattice_spec(int mode_count, double coupling_scale) {
    require(mode_count >= 1, "periodic lattice: mode_count must be >= 1");
    require(std::isfinite(coupling_scale), "periodic lattice: non-finite coupling scale");
    SystemSpec spec;
    spec.atom_frequencies = Eigen::VectorXd::Ones(1);
    spec.atom_positions = Eigen::VectorXd::Zero(1);
    spec.mode_frequencies = Eigen::VectorXd::LinSpaced(mode_count, 1.0, mode_count);
    spec.coupling.resize(1, mode_count);
    for (int k = 0; k < mode_count; ++k)
        spec.coupling(0, k) = coupling_scale * std::sqrt(spec.mode_frequencies(k));
    spec.generator.kind = "periodic_lattice";
    spec.generator.g0 = coupling_scale;
    spec.generator.harmonics.resize(mode_count);
    for (int k = 0; k < mode_count; ++k) spec.generator.harmonics[k] = k + 1;
    spec.validate();
    return spec;
}

SystemSpec build_pec_cavity_spec(const std::vector<double>& atom_positions,
                                 int mode_count, HarmonicRule rule,
                                 const CouplingAnchor& anchor) {
    require(mode_count >= 1, "pec cavity: mode_count must be >= 1");
    require(!atom_positions.empty(), "pec cavity: need at least one atom");
    require(std::isfinite(anchor.value), "pec cavity: non-finite coupling normalization");
    const int na = static_cast<int>(atom_positions.size());

    SystemSpec spec;
    spec.atom_frequencies = Eigen::VectorXd::Ones(na);
    spec.atom_positions.resize(na);
    for (int j = 0; j < na; ++j) {
        require(atom_positions[j] >= -0.5 && atom_positions[j] <= 0.5,
                "pec cavity: atom position outside the cavity");
        spec.atom_positions(j) = atom_positions[j];
    }

    spec.mode_frequencies.resize(mode_count);
    spec.generator.harmonics.resize(mode_count);
    for (int k = 0; k < mode_count; ++k) {
        const int n = (rule == HarmonicRule::Odd) ? 2 * k + 1 : k + 1;
        spec.generator.harmonics[k] = n;
        spec.mode_frequencies(k) = static_cast<double>(n);
    }

    // Unscaled couplings sqrt(omega_k/omega_1) u_{n_k}(x_j), then solve for g0.
    Eigen::MatrixXd raw(na, mode_count);
    for (int j = 0; j < na; ++j)
        for (int k = 0; k < mode_count; ++k)
            raw(j, k) = std::sqrt(spec.mode_frequencies(k) / spec.mode_frequencies(0)) *
                        mode_profile(spec.generator.harmonics[k], spec.atom_positions(j));

    double g0 = 0.0;
    if (anchor.kind == CouplingAnchor::Kind::PairRatio) {
        require(anchor.atom >= 0 && anchor.atom < na && anchor.mode >= 0 &&
                    anchor.mode < mode_count,
                "pec cavity: anchor pair out of range");
        const double base = raw(anchor.atom, anchor.mode) /
                            spec.mode_frequencies(anchor.mode);
        require(base != 0.0, "pec cavity: anchor pair has zero mode profile");
        g0 = anchor.value / base;
    } else {
        double max_ratio = 0.0;
        for (int j = 0; j < na; ++j)
            for (int k = 0; k < mode_count; ++k)
                max_ratio = std::max(max_ratio,
                                     std::abs(raw(j, k)) / spec.mode_frequencies(k));
        require(max_ratio > 0.0 || anchor.value == 0.0,
                "pec cavity: all mode profiles vanish, cannot normalize");
        g0 = (max_ratio > 0.0) ? anchor.value / max_ratio : 0.0;
    }

    spec.coupling = g0 * raw;
    spec.generator.kind = "pec_cavity";
    spec.generator.rule = rule;
    spec.generator.g0 = g0;
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------- JSON

std::string SystemSpec::to_json() const {
    nlohmann::json j;
    j["atoms"]["frequencies"] = std::vector<double>(
        atom_frequencies.data(), atom_frequencies.data() + atom_frequencies.size());
    j["atoms"]["positions"] = std::vector<double>(
        atom_positions.data(), atom_positions.data() + atom_positions.size());
    j["modes"]["frequencies"] = std::vector<double>(
        mode_frequencies.data(), mode_frequencies.data() + mode_frequencies.size());
    std::vector<std::vector<double>> g(atom_count());
    for (int r = 0; r < atom_count(); ++r) {
        g[r].resize(mode_count());
        for (int c = 0; c < mode_count(); ++c) g[r][c] = coupling(r, c);
    }
    j["coupling"] = g;
    j["generator"]["kind"] = generator.kind;
    j["generator"]["rule"] = (generator.rule == HarmonicRule::Odd) ? "odd" : "all";
    j["generator"]["harmonics"] = generator.harmonics;
    j["generator"]["g0"] = generator.g0;
    return j.dump(2);
}

SystemSpec SystemSpec::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SystemSpec spec;
    const auto freq = j.at("atoms").at("frequencies").get<std::vector<double>>();
    const auto pos = j.at("atoms").at("positions").get<std::vector<double>>();
    const auto modes = j.at("modes").at("frequencies").get<std::vector<double>>();
    spec.atom_frequencies = Eigen::Map<const Eigen::VectorXd>(freq.data(), freq.size());
    spec.atom_positions = Eigen::Map<const Eigen::VectorXd>(pos.data(), pos.size());
    spec.mode_frequencies = Eigen::Map<const Eigen::VectorXd>(modes.data(), modes.size());
    const auto g = j.at("coupling").get<std::vector<std::vector<double>>>();
    require(!g.empty(), "spec json: empty coupling");
    spec.coupling.resize(g.size(), g[0].size());
    for (size_t r = 0; r < g.size(); ++r) {
        require(g[r].size() == g[0].size(), "spec json: ragged coupling rows");
        for (size_t c = 0; c < g[r].size(); ++c)
            spec.coupling(static_cast<int>(r), static_cast<int>(c)) = g[r][c];
    }
    if (j.contains("generator")) {
        const auto& gen = j.at("generator");
        spec.generator.kind = gen.value("kind", std::string("custom"));
        spec.generator.rule =
            gen.value("rule", std::string("all")) == "odd" ? HarmonicRule::Odd
                                                           : HarmonicRule::All;
        if (gen.contains("harmonics"))
            spec.generator.harmonics = gen.at("harmonics").get<std::vector<int>>();
        spec.generator.g0 = gen.value("g0", 0.0);
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------- coupling matrices

DickeCouplingMatrix::DickeCouplingMatrix(Eigen::MatrixXd matrix, int atom_count)
    : mat_(std::move(matrix)), atom_count_(atom_count) {
    require(mat_.rows() == mat_.cols(), "dicke matrix: not square");
    require(atom_count_ >= 1 && atom_count_ < mat_.rows(),
            "dicke matrix: bad atom count");
    require((mat_ - mat_.transpose()).cwiseAbs().maxCoeff() == 0.0,
            "dicke matrix: not symmetric");
    const int n = size();
    for (int r = 0; r < atom_count_; ++r)
        for (int c = 0; c < atom_count_; ++c)
            require(r == c || mat_(r, c) == 0.0, "dicke matrix: atom block not diagonal");
    for (int r = atom_count_; r < n; ++r)
        for (int c = atom_count_; c < n; ++c)
            require(r == c || mat_(r, c) == 0.0, "dicke matrix: boson block not diagonal");
}

DickeCouplingMatrix DickeCouplingMatrix::assemble(const SystemSpec& spec) {
    spec.validate();
    const int na = spec.atom_count();
    const int m = spec.mode_count();
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(na + m, na + m);
    mat.topLeftCorner(na, na) = spec.atom_frequencies.asDiagonal();
    mat.bottomRightCorner(m, m) = spec.mode_frequencies.asDiagonal();
    mat.topRightCorner(na, m) = spec.coupling;
    mat.bottomLeftCorner(m, na) = spec.coupling.transpose();
    return DickeCouplingMatrix(std::move(mat), na);
}

DickeCouplingMatrix assemble_dicke_matrix(const SystemSpec& spec) {
    return DickeCouplingMatrix::assemble(spec);
}

Eigen::VectorXd DickeCouplingMatrix::atom_frequencies() const {
    return mat_.diagonal().head(atom_count_);
}

Eigen::VectorXd DickeCouplingMatrix::mode_frequencies() const {
    return mat_.diagonal().tail(mode_count());
}

Eigen::MatrixXd DickeCouplingMatrix::coupling_block() const {
    return mat_.topRightCorner(atom_count_, mode_count());
}

BandCouplingMatrix::BandCouplingMatrix(Eigen::MatrixXd matrix, int atom_count)
    : mat_(std::move(matrix)), atom_count_(atom_count) {
    require(mat_.rows() == mat_.cols(), "band matrix: not square");
    require(atom_count_ >= 1 && atom_count_ <= mat_.rows(), "band matrix: bad atom count");
}

double BandCouplingMatrix::rho(int atom, int mode) const {
    return mat_(atom, atom_count_ + mode);
}

double BandCouplingMatrix::xi(int mode) const {
    return mat_(atom_count_ + mode, atom_count_ + mode);
}

double BandCouplingMatrix::hopping(int mode_i, int mode_j) const {
    if (mode_i == mode_j) return 0.0;
    return mat_(atom_count_ + mode_i, atom_count_ + mode_j);
}

Eigen::VectorXd BandCouplingMatrix::atom_frequencies() const {
    return mat_.diagonal().head(atom_count_);
}

// ------------------------------------------------------------ TransformRecord

Eigen::MatrixXd TransformRecord::boson_block() const {
    const int m = static_cast<int>(q.rows()) - atom_count;
    return q.bottomRightCorner(m, m);
}

double TransformRecord::orthogonality_residual() const {
    const Eigen::MatrixXd r =
        q * q.transpose() - Eigen::MatrixXd::Identity(q.rows(), q.cols());
    return r.cwiseAbs().maxCoeff();
}

double TransformRecord::atom_block_deviation() const {
    const int na = atom_count;
    const int m = static_cast<int>(q.rows()) - na;
    double dev = (q.topLeftCorner(na, na) - Eigen::MatrixXd::Identity(na, na))
                     .cwiseAbs()
                     .maxCoeff();
    if (m > 0) {
        dev = std::max(dev, q.topRightCorner(na, m).cwiseAbs().maxCoeff());
        dev = std::max(dev, q.bottomLeftCorner(m, na).cwiseAbs().maxCoeff());
    }
    return dev;
}

// ---------------------------------------------------------------------- CSV

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::ostringstream out;
    out.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << m(r, c);
        }
        out << '\n';
    }
    return out.str();
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), "csv: empty matrix");
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == rows[0].size(), "csv: ragged rows");
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

}  // namespace dickeband::model
