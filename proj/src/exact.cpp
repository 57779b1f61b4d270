#include "dickeband/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dickeband::exact {

namespace {
const Complex kImag(0.0, 1.0);
}

// --------------------------------------------------------------------- layout

HilbertSpaceLayout::HilbertSpaceLayout(int atoms, int modes, int fock,
                                       std::int64_t dimension_cap)
    : atom_count(atoms), mode_count(modes), fock_cutoff(fock) {
    if (atoms < 0 || modes < 0 || atoms + modes == 0)
        throw std::invalid_argument("layout: need at least one site");
    if (fock < 2) throw std::invalid_argument("layout: fock cutoff must be >= 2");

    const int sites = site_count();
    strides_.assign(sites, 1);
    dim_ = 1;
    for (int s = sites - 1; s >= 0; --s) {
        strides_[s] = dim_;
        const int d = site_dim(s);
        if (dim_ > dimension_cap / d)
            throw std::invalid_argument("layout: total dimension exceeds cap");
        dim_ *= d;
    }
}

std::int64_t HilbertSpaceLayout::index_of(const std::vector<int>& digits) const {
    if (static_cast<int>(digits.size()) != site_count())
        throw std::invalid_argument("layout: digit count mismatch");
    std::int64_t idx = 0;
    for (int s = 0; s < site_count(); ++s) {
        if (digits[s] < 0 || digits[s] >= site_dim(s))
            throw std::invalid_argument("layout: digit out of range");
        idx += digits[s] * strides_[s];
    }
    return idx;
}

// ----------------------------------------------------------- local operators

LocalOperatorSet::LocalOperatorSet(int fock_cutoff) {
    if (fock_cutoff < 2) throw std::invalid_argument("ops: fock cutoff must be >= 2");
    sigma_x = Eigen::MatrixXcd::Zero(2, 2);
    sigma_x(0, 1) = 1.0;
    sigma_x(1, 0) = 1.0;
    sigma_z = Eigen::MatrixXcd::Zero(2, 2);
    sigma_z(0, 0) = -1.0;  // |0> = ground
    sigma_z(1, 1) = 1.0;
    sigma_plus = Eigen::MatrixXcd::Zero(2, 2);
    sigma_plus(1, 0) = 1.0;  // |g> -> |e>
    sigma_minus = sigma_plus.adjoint();

    annihilate = Eigen::MatrixXcd::Zero(fock_cutoff, fock_cutoff);
    for (int n = 1; n < fock_cutoff; ++n) annihilate(n - 1, n) = std::sqrt(double(n));
    create = annihilate.adjoint();  // hard cutoff: b+ kills the top Fock state
    number = create * annihilate;
}

// -------------------------------------------------------- sparse Hamiltonian

SparseHamiltonian::SparseHamiltonian(HilbertSpaceLayout layout,
                                     std::vector<HamiltonianTerm> terms)
    : layout_(std::move(layout)), terms_(std::move(terms)) {
    for (const auto& term : terms_) {
        int prev = -1;
        for (const auto& [site, op] : term.factors) {
            if (site <= prev || site >= layout_.site_count())
                throw std::invalid_argument("hamiltonian term: bad site list");
            if (op.rows() != layout_.site_dim(site) || op.cols() != op.rows())
                throw std::invalid_argument("hamiltonian term: operator dim mismatch");
            prev = site;
        }
    }
}

void SparseHamiltonian::compile() {
    const std::int64_t dim = layout_.dimension();

    // Per term and per factor, the nonzero (col_digit, value) list for each
    // row digit, so rows can be enumerated directly.
    struct FactorMap {
        int site;
        std::int64_t stride;
        std::vector<std::vector<std::pair<int, Complex>>> by_row;
    };
    struct TermMap {
        Complex coeff;
        std::vector<FactorMap> factors;
    };
    std::vector<TermMap> maps;
    maps.reserve(terms_.size());
    for (const auto& term : terms_) {
        TermMap tm;
        tm.coeff = term.coefficient;
        if (tm.coeff == Complex(0.0, 0.0)) continue;
        for (const auto& [site, op] : term.factors) {
            FactorMap fm;
            fm.site = site;
            fm.stride = layout_.stride(site);
            fm.by_row.resize(op.rows());
            for (int r = 0; r < op.rows(); ++r)
                for (int c = 0; c < op.cols(); ++c)
                    if (op(r, c) != Complex(0.0, 0.0)) fm.by_row[r].push_back({c, op(r, c)});
            tm.factors.push_back(std::move(fm));
        }
        maps.push_back(std::move(tm));
    }

    row_ptr_.assign(dim + 1, 0);
    cols_.clear();
    values_.clear();

    std::vector<std::pair<std::int64_t, Complex>> row_entries;
    std::vector<std::int64_t> counts(dim, 0);

    // crude upper bound per row for reservation
    std::int64_t per_row = 0;
    for (const auto& tm : maps) {
        std::int64_t combos = 1;
        for (const auto& fm : tm.factors) {
            std::size_t mx = 0;
            for (const auto& lst : fm.by_row) mx = std::max(mx, lst.size());
            combos *= static_cast<std::int64_t>(mx);
        }
        per_row += combos;
    }
    cols_.reserve(dim * per_row);
    values_.reserve(dim * per_row);

    for (std::int64_t row = 0; row < dim; ++row) {
        row_entries.clear();
        for (const auto& tm : maps) {
            // expand the product of per-factor column options
            std::size_t nfac = tm.factors.size();
            // iterative product over at most a few factors
            std::vector<std::size_t> pick(nfac, 0);
            std::vector<const std::vector<std::pair<int, Complex>>*> lists(nfac);
            bool empty = false;
            for (std::size_t f = 0; f < nfac; ++f) {
                const auto& fm = tm.factors[f];
                const int rd = layout_.digit(row, fm.site);
                lists[f] = &fm.by_row[rd];
                if (lists[f]->empty()) {
                    empty = true;
                    break;
                }
            }
            if (empty) continue;
            while (true) {
                Complex val = tm.coeff;
                std::int64_t col = row;
                for (std::size_t f = 0; f < nfac; ++f) {
                    const auto& fm = tm.factors[f];
                    const auto& [cd, v] = (*lists[f])[pick[f]];
                    const int rd = layout_.digit(row, fm.site);
                    col += (cd - rd) * fm.stride;
                    val *= v;
                }
                row_entries.push_back({col, val});
                // advance mixed-radix pick
                std::size_t f = 0;
                for (; f < nfac; ++f) {
                    if (++pick[f] < lists[f]->size()) break;
                    pick[f] = 0;
                }
                if (f == nfac) break;
            }
        }
        std::sort(row_entries.begin(), row_entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        // merge duplicates
        std::int64_t start = static_cast<std::int64_t>(values_.size());
        for (std::size_t k = 0; k < row_entries.size(); ++k) {
            if (k > 0 && row_entries[k].first == row_entries[k - 1].first) {
                values_.back() += row_entries[k].second;
            } else {
                cols_.push_back(static_cast<std::int32_t>(row_entries[k].first));
                values_.push_back(row_entries[k].second);
            }
        }
        counts[row] = static_cast<std::int64_t>(values_.size()) - start;
    }
    for (std::int64_t r = 0; r < dim; ++r) row_ptr_[r + 1] = row_ptr_[r] + counts[r];

    const double res = hermiticity_residual();
    double scale = 0.0;
    for (const auto& v : values_) scale = std::max(scale, std::abs(v));
    if (res > 1e-12 * std::max(scale, 1.0))
        throw std::runtime_error("hamiltonian: hermiticity residual too large");
}

void SparseHamiltonian::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    if (row_ptr_.empty()) throw std::logic_error("hamiltonian: apply before compile");
    const std::int64_t dim = layout_.dimension();
    if (x.size() != dim) throw std::invalid_argument("hamiltonian: vector dim mismatch");
    y.resize(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < dim; ++r) {
        Complex acc(0.0, 0.0);
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += values_[k] * x(cols_[k]);
        y(r) = acc;
    }
}

Eigen::VectorXcd SparseHamiltonian::apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y;
    apply(x, y);
    return y;
}

double SparseHamiltonian::hermiticity_residual() const {
    double worst = 0.0;
    const std::int64_t dim = layout_.dimension();
    for (std::int64_t r = 0; r < dim; ++r) {
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const std::int64_t c = cols_[k];
            // find (c, r)
            const auto begin = cols_.begin() + row_ptr_[c];
            const auto end = cols_.begin() + row_ptr_[c + 1];
            const auto it = std::lower_bound(begin, end, static_cast<std::int32_t>(r));
            Complex other(0.0, 0.0);
            if (it != end && *it == static_cast<std::int32_t>(r))
                other = values_[it - cols_.begin()];
            worst = std::max(worst, std::abs(values_[k] - std::conj(other)));
        }
    }
    return worst;
}

Eigen::MatrixXcd SparseHamiltonian::to_dense() const {
    const std::int64_t dim = layout_.dimension();
    if (dim > 1 << 14) throw std::invalid_argument("to_dense: dimension too large");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::int64_t r = 0; r < dim; ++r)
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            out(r, cols_[k]) += values_[k];
    return out;
}

// --------------------------------------------------------------- constructors

SparseHamiltonian build_dicke_hamiltonian(const model::SystemSpec& spec,
                                          const HilbertSpaceLayout& layout) {
    spec.validate();
    if (layout.atom_count != spec.atom_count() || layout.mode_count != spec.mode_count())
        throw std::invalid_argument("dicke hamiltonian: layout/spec mismatch");
    const LocalOperatorSet ops(layout.fock_cutoff);
    const Eigen::MatrixXcd displacement = ops.annihilate - ops.create;  // a - a+

    std::vector<HamiltonianTerm> terms;
    for (int j = 0; j < layout.atom_count; ++j)
        terms.push_back({0.5 * spec.atom_frequencies(j), {{j, ops.sigma_z}}});
    for (int k = 0; k < layout.mode_count; ++k) {
        terms.push_back({spec.mode_frequencies(k), {{layout.atom_count + k, ops.number}}});
        for (int j = 0; j < layout.atom_count; ++j) {
            const double g = spec.coupling(j, k);
            if (g == 0.0) continue;
            terms.push_back({-kImag * g,
                             {{j, ops.sigma_x}, {layout.atom_count + k, displacement}}});
        }
    }
    SparseHamiltonian h(layout, std::move(terms));
    h.compile();
    return h;
}

SparseHamiltonian build_band_hamiltonian(const model::BandCouplingMatrix& band,
                                         const HilbertSpaceLayout& layout) {
    if (layout.atom_count != band.atom_count() || layout.mode_count != band.mode_count())
        throw std::invalid_argument("band hamiltonian: layout/band mismatch");
    const int na = layout.atom_count;
    const int m = layout.mode_count;
    const LocalOperatorSet ops(layout.fock_cutoff);
    const Eigen::MatrixXcd displacement = ops.annihilate - ops.create;

    std::vector<HamiltonianTerm> terms;
    for (int j = 0; j < na; ++j) {
        terms.push_back({0.5 * band.atom_frequencies()(j), {{j, ops.sigma_z}}});
        for (int k = 0; k <= j && k < m; ++k) {
            const double rho = band.rho(j, k);
            if (rho == 0.0) continue;
            terms.push_back({-kImag * rho, {{j, ops.sigma_x}, {na + k, displacement}}});
        }
    }
    for (int k = 0; k < m; ++k) {
        terms.push_back({band.xi(k), {{na + k, ops.number}}});
        for (int j = 1; j <= na; ++j) {
            if (k + j >= m) continue;  // t_{k,k+j} = 0 past the chain end
            const double t = band.hopping(k, k + j);
            if (t == 0.0) continue;
            terms.push_back({t, {{na + k, ops.create}, {na + k + j, ops.annihilate}}});
            terms.push_back({t, {{na + k, ops.annihilate}, {na + k + j, ops.create}}});
        }
    }
    SparseHamiltonian h(layout, std::move(terms));
    h.compile();
    return h;
}

// ------------------------------------------------------------------ evolution

StateVector product_state(const HilbertSpaceLayout& layout,
                          const std::vector<int>& digits) {
    StateVector psi;
    psi.amplitudes = Eigen::VectorXcd::Zero(layout.dimension());
    psi.amplitudes(layout.index_of(digits)) = 1.0;
    return psi;
}

StateVector all_excited_vacuum(const HilbertSpaceLayout& layout) {
    std::vector<int> digits(layout.site_count(), 0);
    for (int j = 0; j < layout.atom_count; ++j) digits[j] = 1;
    return product_state(layout, digits);
}

NormDriftError::NormDriftError(std::int64_t step_, double drift_)
    : std::runtime_error("norm drift " + std::to_string(drift_) + " at step " +
                         std::to_string(step_) + " (dt too large)"),
      step(step_),
      drift(drift_) {}

void evolve(const SparseHamiltonian& h, const StateVector& psi0,
            const EvolveOptions& opts,
            const std::function<void(const StateVector&)>& on_sample) {
    if (opts.dt <= 0.0) throw std::invalid_argument("evolve: dt must be positive");
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("evolve: initial state not normalized");

    const std::int64_t dim = h.dimension();
    StateVector psi = psi0;
    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    for (std::int64_t step = 0;; ++step) {
        if (step % opts.stride == 0 || step == opts.steps) on_sample(psi);
        if (step == opts.steps) break;

        const double dt = opts.dt;
        h.apply(psi.amplitudes, tmp);
        k1 = -kImag * tmp;
        h.apply(psi.amplitudes + (0.5 * dt) * k1, tmp);
        k2 = -kImag * tmp;
        h.apply(psi.amplitudes + (0.5 * dt) * k2, tmp);
        k3 = -kImag * tmp;
        h.apply(psi.amplitudes + dt * k3, tmp);
        k4 = -kImag * tmp;
        psi.amplitudes += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        psi.time += dt;

        const double drift = std::abs(psi.norm() - 1.0);
        if (drift > opts.norm_drift_tolerance) throw NormDriftError(step + 1, drift);
    }
}

std::vector<StateVector> evolve_trajectory(const SparseHamiltonian& h,
                                           const StateVector& psi0,
                                           const EvolveOptions& opts) {
    std::vector<StateVector> out;
    evolve(h, psi0, opts, [&](const StateVector& s) { out.push_back(s); });
    return out;
}

// ---------------------------------------------------------------- observables

double atomic_population(const StateVector& psi, const HilbertSpaceLayout& layout,
                         int atom) {
    if (atom < 0 || atom >= layout.atom_count)
        throw std::invalid_argument("atomic_population: bad atom index");
    const std::int64_t dim = layout.dimension();
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) {
        const double w = std::norm(psi.amplitudes(i));
        den += w;
        if (layout.digit(i, atom) == 1) num += w;
    }
    return num / den;
}

std::array<double, 4> two_atom_components(const StateVector& psi,
                                          const HilbertSpaceLayout& layout) {
    if (layout.atom_count != 2)
        throw std::invalid_argument("two_atom_components: need exactly two atoms");
    const std::int64_t dim = layout.dimension();
    std::array<double, 4> comps{0.0, 0.0, 0.0, 0.0};
    double den = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) {
        const double w = std::norm(psi.amplitudes(i));
        den += w;
        comps[2 * layout.digit(i, 0) + layout.digit(i, 1)] += w;
    }
    for (auto& c : comps) c /= den;
    return comps;
}

double energy_expectation(const SparseHamiltonian& h, const StateVector& psi) {
    const Eigen::VectorXcd hpsi = h.apply(psi.amplitudes);
    const Complex e = psi.amplitudes.dot(hpsi);
    return e.real() / psi.amplitudes.squaredNorm();
}

double top_fock_occupancy(const StateVector& psi, const HilbertSpaceLayout& layout) {
    const std::int64_t dim = layout.dimension();
    const int top = layout.fock_cutoff - 1;
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(layout.mode_count);
    for (std::int64_t i = 0; i < dim; ++i) {
        const double w = std::norm(psi.amplitudes(i));
        if (w == 0.0) continue;
        for (int k = 0; k < layout.mode_count; ++k)
            if (layout.digit(i, layout.atom_count + k) == top) occ(k) += w;
    }
    return layout.mode_count > 0 ? occ.maxCoeff() / psi.amplitudes.squaredNorm() : 0.0;
}

Eigen::MatrixXcd two_atom_density_matrix(const StateVector& psi,
                                         const HilbertSpaceLayout& layout) {
    if (layout.atom_count != 2)
        throw std::invalid_argument("two_atom_density_matrix: need exactly two atoms");
    const std::int64_t rest = layout.dimension() / 4;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4);
    // atoms are the two most significant digits: index = a * rest + r
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (std::int64_t r = 0; r < rest; ++r)
                rho(a, b) += psi.amplitudes(a * rest + r) *
                             std::conj(psi.amplitudes(b * rest + r));
    return rho / psi.amplitudes.squaredNorm();
}

Eigen::MatrixXcd boson_correlation_dense(const StateVector& psi,
                                         const HilbertSpaceLayout& layout) {
    const int m = layout.mode_count;
    const std::int64_t dim = layout.dimension();
    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(m, m);
    // <b+_i b_j>: apply b_j then b+_i columnwise over basis states
    for (std::int64_t idx = 0; idx < dim; ++idx) {
        const Complex amp = psi.amplitudes(idx);
        if (amp == Complex(0.0, 0.0)) continue;
        for (int j = 0; j < m; ++j) {
            const int sj = layout.atom_count + j;
            const int nj = layout.digit(idx, sj);
            if (nj == 0) continue;
            const Complex after_b = amp * std::sqrt(double(nj));
            const std::int64_t idx_b = idx - layout.stride(sj);
            for (int i = 0; i < m; ++i) {
                const int si = layout.atom_count + i;
                const int ni = layout.digit(idx_b, si);
                if (ni + 1 >= layout.fock_cutoff) continue;
                const std::int64_t idx_bd = idx_b + layout.stride(si);
                corr(i, j) += std::conj(psi.amplitudes(idx_bd)) *
                              std::sqrt(double(ni + 1)) * after_b;
            }
        }
    }
    return corr / psi.amplitudes.squaredNorm();
}

}  // namespace dickeband::exact
