#include "dickeband/mps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dickeband/linalg.hpp"

namespace dickeband::mps {

namespace {
const Complex kImag(0.0, 1.0);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// kron over a site list, site 0 most significant (matches the exact module)
Eigen::MatrixXcd kron_chain(const std::vector<Eigen::MatrixXcd>& ops) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (const auto& op : ops) out = kron(out, op);
    return out;
}

// Generic dense permutation, column-major (index 0 fastest). Output dimension
// q equals dims[perm[q]]; out[j0,...] = in[i...] with i[perm[q]] = j_q.
Eigen::VectorXcd permute_dense(const Eigen::VectorXcd& in,
                               const std::vector<int>& dims,
                               const std::vector<int>& perm) {
    const int rank = static_cast<int>(dims.size());
    std::vector<std::int64_t> in_strides(rank, 1);
    for (int q = 1; q < rank; ++q) in_strides[q] = in_strides[q - 1] * dims[q - 1];

    std::vector<int> out_dims(rank);
    for (int q = 0; q < rank; ++q) out_dims[q] = dims[perm[q]];
    std::vector<std::int64_t> map_strides(rank);  // in-stride of out index q
    for (int q = 0; q < rank; ++q) map_strides[q] = in_strides[perm[q]];

    const std::int64_t total = in.size();
    Eigen::VectorXcd out(total);
    std::vector<int> idx(rank, 0);
    std::int64_t src = 0;
    for (std::int64_t dst = 0; dst < total; ++dst) {
        out(dst) = in(src);
        for (int q = 0; q < rank; ++q) {
            src += map_strides[q];
            if (++idx[q] < out_dims[q]) break;
            src -= map_strides[q] * out_dims[q];
            idx[q] = 0;
        }
    }
    return out;
}

}  // namespace

// -------------------------------------------------------------------- Tensor3

Tensor3 Tensor3::from_left_mat(Eigen::MatrixXcd m, int dl, int d) {
    if (m.rows() != static_cast<Eigen::Index>(dl) * d)
        throw std::invalid_argument("tensor: left matricization shape mismatch");
    Tensor3 t;
    t.dl_ = dl;
    t.d_ = d;
    t.dr_ = static_cast<int>(m.cols());
    t.data_ = std::move(m);
    return t;
}

Tensor3 Tensor3::from_right_mat(Eigen::MatrixXcd m, int d, int dr) {
    if (m.cols() != static_cast<Eigen::Index>(d) * dr)
        throw std::invalid_argument("tensor: right matricization shape mismatch");
    Tensor3 t;
    t.dl_ = static_cast<int>(m.rows());
    t.d_ = d;
    t.dr_ = dr;
    m.resize(t.dl_ * d, dr);  // same storage, reinterpreted
    t.data_ = std::move(m);
    return t;
}

// --------------------------------------------------------------------- policy

void TruncationPolicy::record(double discarded_abs) {
    cumulative_discarded += discarded_abs;
    ++truncation_count;
    max_single_discard = std::max(max_single_discard, discarded_abs);
}

// ------------------------------------------------------------------------ MPS

MPS::MPS(std::vector<int> site_dims) {
    if (site_dims.empty()) throw std::invalid_argument("mps: need at least one site");
    tensors_.reserve(site_dims.size());
    for (int d : site_dims) tensors_.emplace_back(1, d, 1);
    bond_sv_.assign(site_dims.size() - 1, Eigen::VectorXd::Ones(1));
    center_ = 0;
}

int MPS::bond_dim(int bond) const {
    if (bond < 1 || bond >= site_count())
        throw std::invalid_argument("mps: bond index out of range");
    return tensors_[bond].left();
}

int MPS::max_bond_dim() const {
    int mx = 1;
    for (int b = 1; b < site_count(); ++b) mx = std::max(mx, bond_dim(b));
    return mx;
}

void MPS::move_center_to(int site) {
    if (site < 0 || site >= site_count())
        throw std::invalid_argument("mps: center target out of range");
    while (center_ < site) {
        Tensor3& a = tensors_[center_];
        auto qr = linalg::qr_thin(a.left_mat());
        const int d = a.phys();
        const int dl = a.left();
        Tensor3& b = tensors_[center_ + 1];
        Eigen::MatrixXcd next = qr.r * b.right_mat();
        tensors_[center_] = Tensor3::from_left_mat(std::move(qr.q), dl, d);
        tensors_[center_ + 1] = Tensor3::from_right_mat(std::move(next), b.phys(), b.right());
        ++center_;
    }
    while (center_ > site) {
        Tensor3& a = tensors_[center_];
        auto lq = linalg::lq_thin(a.right_mat());
        const int d = a.phys();
        const int dr = a.right();
        Tensor3& b = tensors_[center_ - 1];
        Eigen::MatrixXcd prev = b.left_mat() * lq.l;
        tensors_[center_] = Tensor3::from_right_mat(std::move(lq.q), d, dr);
        tensors_[center_ - 1] = Tensor3::from_left_mat(std::move(prev), b.left(), b.phys());
        --center_;
    }
}

double MPS::norm() const { return std::sqrt(tensors_[center_].squared_norm()); }

Eigen::VectorXd MPS::bond_singular_values(int bond) {
    if (bond < 1 || bond >= site_count())
        throw std::invalid_argument("mps: bond index out of range");
    move_center_to(bond);
    const Tensor3& a = tensors_[bond];
    auto svd = linalg::svd_econ(a.right_mat());
    bond_sv_[bond - 1] = svd.s;
    return svd.s;
}

void MPS::set_bond_spectrum(int bond, Eigen::VectorXd s) {
    bond_sv_[bond - 1] = std::move(s);
}

double MPS::canonical_residual() const {
    double worst = 0.0;
    for (int s = 0; s < site_count(); ++s) {
        if (s == center_) continue;
        const Tensor3& a = tensors_[s];
        if (s < center_) {
            Eigen::MatrixXcd g = a.left_mat().adjoint() * a.left_mat();
            g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
            worst = std::max(worst, g.cwiseAbs().maxCoeff());
        } else {
            Eigen::MatrixXcd g = a.right_mat() * a.right_mat().adjoint();
            g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
            worst = std::max(worst, g.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

MPS init_product_mps(const exact::HilbertSpaceLayout& layout, InitialState which,
                     const std::vector<Eigen::VectorXcd>& custom) {
    std::vector<int> dims(layout.site_count());
    for (int s = 0; s < layout.site_count(); ++s) dims[s] = layout.site_dim(s);
    MPS m(dims);
    m.set_atom_count(layout.atom_count);

    // bosons in vacuum
    for (int s = layout.atom_count; s < layout.site_count(); ++s)
        m.tensor(s).at(0, 0, 0) = 1.0;

    const double r2 = 1.0 / std::sqrt(2.0);
    switch (which) {
        case InitialState::Psi1:
        case InitialState::Psi2: {
            if (layout.atom_count != 2)
                throw std::invalid_argument("init: psi1/psi2 need exactly two atoms");
            Tensor3 a0(1, 2, 2), a1(2, 2, 1);
            a0.at(0, 0, 0) = r2;  // branch 0 rides |g>, branch 1 rides |e>
            a0.at(0, 1, 1) = r2;
            if (which == InitialState::Psi1) {
                a1.at(0, 0, 0) = 1.0;  // |gg> + |ee>
                a1.at(1, 1, 0) = 1.0;
            } else {
                a1.at(0, 1, 0) = 1.0;  // |ge> + |eg>
                a1.at(1, 0, 0) = 1.0;
            }
            m.tensor(0) = std::move(a0);
            m.tensor(1) = std::move(a1);
            m.set_bond_spectrum(1, Eigen::Vector2d(r2, r2));
            break;
        }
        case InitialState::Psi3: {
            if (layout.atom_count != 2)
                throw std::invalid_argument("init: psi3 needs exactly two atoms");
            for (int j = 0; j < 2; ++j) {
                m.tensor(j).at(0, 0, 0) = r2;
                m.tensor(j).at(0, 1, 0) = r2;
            }
            break;
        }
        case InitialState::AllExcited: {
            for (int j = 0; j < layout.atom_count; ++j) m.tensor(j).at(0, 1, 0) = 1.0;
            break;
        }
        case InitialState::Custom: {
            if (static_cast<int>(custom.size()) != layout.site_count())
                throw std::invalid_argument("init: need one amplitude vector per site");
            for (int s = 0; s < layout.site_count(); ++s) {
                if (custom[s].size() != layout.site_dim(s))
                    throw std::invalid_argument("init: amplitude dimension mismatch");
                if (std::abs(custom[s].norm() - 1.0) > 1e-12)
                    throw std::invalid_argument("init: custom amplitudes not normalized");
                Tensor3 t(1, layout.site_dim(s), 1);
                for (int p = 0; p < layout.site_dim(s); ++p) t.at(0, p, 0) = custom[s](p);
                m.tensor(s) = std::move(t);
            }
            break;
        }
    }
    m.move_center_to(0);
    return m;
}

Eigen::VectorXcd to_statevector(const MPS& mps) {
    const int sites = mps.site_count();
    std::int64_t dim = 1;
    for (int s = 0; s < sites; ++s) {
        dim *= mps.site_dim(s);
        if (dim > (std::int64_t{1} << 22))
            throw std::invalid_argument("to_statevector: dimension too large");
    }
    // acc(prefix, chi); prefix index has site 0 most significant
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
    for (int s = 0; s < sites; ++s) {
        const Tensor3& a = mps.tensor(s);
        const int d = a.phys(), chi = a.right();
        const Eigen::Index pref = acc.rows();
        Eigen::MatrixXcd prod = acc * a.right_mat();  // (pref, d*chi), col = p + d*r
        Eigen::MatrixXcd next(pref * d, chi);
        for (Eigen::Index x = 0; x < pref; ++x)
            for (int p = 0; p < d; ++p)
                for (int r = 0; r < chi; ++r) next(x * d + p, r) = prod(x, p + d * r);
        acc = std::move(next);
    }
    return acc.col(0);
}

// -------------------------------------------------------------------- GateMPO

void MpoTensor::build_zip_form() {
    zip_form.resize(static_cast<Eigen::Index>(wl) * din,
                    static_cast<Eigen::Index>(dout) * wr);
    for (int w = 0; w < wl; ++w)
        for (int o = 0; o < dout; ++o)
            for (int i = 0; i < din; ++i)
                for (int w2 = 0; w2 < wr; ++w2)
                    zip_form(w + static_cast<Eigen::Index>(wl) * i,
                             o + static_cast<Eigen::Index>(dout) * w2) =
                        flat(w + static_cast<Eigen::Index>(wl) *
                                     (o + static_cast<Eigen::Index>(dout) *
                                              (i + static_cast<Eigen::Index>(din) * w2)));
}

int GateMPO::max_bond() const {
    int mx = 1;
    for (const auto& t : tensors) mx = std::max({mx, t.wl, t.wr});
    return mx;
}

Eigen::MatrixXcd GateMPO::recontract() const {
    const int n = site_count();
    std::int64_t dim = 1;
    for (int d : dims) dim *= d;

    // accumulate (prod (o_s i_s) fused o1 fastest, w)
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
    for (int s = 0; s < n; ++s) {
        const MpoTensor& t = tensors[s];
        const Eigen::Map<const Eigen::MatrixXcd> w_mat(
            t.flat.data(), t.wl,
            static_cast<Eigen::Index>(t.dout) * t.din * t.wr);
        Eigen::MatrixXcd prod = acc * w_mat;  // (P, dout*din*wr)
        prod.resize(acc.rows() * t.dout * t.din, t.wr);
        acc = std::move(prod);
    }

    // reorder (o1,i1,...,on,in) -> (o_n..o_1, i_n..i_1) and view as matrix
    std::vector<int> tdims(2 * n);
    for (int s = 0; s < n; ++s) tdims[2 * s] = tdims[2 * s + 1] = dims[s];
    std::vector<int> perm(2 * n);
    for (int q = 0; q < n; ++q) {
        perm[q] = 2 * (n - 1 - q);          // o_{n-q}
        perm[n + q] = 2 * (n - 1 - q) + 1;  // i_{n-q}
    }
    Eigen::VectorXcd flat =
        permute_dense(Eigen::Map<const Eigen::VectorXcd>(acc.data(), acc.size()),
                      tdims, perm);
    return Eigen::Map<const Eigen::MatrixXcd>(flat.data(), dim, dim);
}

GateMPO decompose_gate_to_mpo(const Eigen::MatrixXcd& gate,
                              const std::vector<int>& site_dims, double cutoff) {
    const int n = static_cast<int>(site_dims.size());
    if (n < 1) throw std::invalid_argument("mpo: empty site list");
    std::int64_t dim = 1;
    for (int d : site_dims) dim *= d;
    if (gate.rows() != dim || gate.cols() != dim)
        throw std::invalid_argument("mpo: gate dimension does not match site dims");

    GateMPO out;
    out.dims = site_dims;
    out.tensors.resize(n);

    // gate tensor (o_n..o_1, i_n..i_1) -> (o_1,i_1,...,o_n,i_n)
    std::vector<int> tdims(2 * n);
    for (int q = 0; q < n; ++q) {
        tdims[q] = site_dims[n - 1 - q];      // o_n..o_1
        tdims[n + q] = site_dims[n - 1 - q];  // i_n..i_1
    }
    std::vector<int> perm(2 * n);
    for (int q = 0; q < n; ++q) {
        perm[2 * q] = n - 1 - q;          // o_{q+1}
        perm[2 * q + 1] = 2 * n - 1 - q;  // i_{q+1}
    }
    Eigen::VectorXcd flat = permute_dense(
        Eigen::Map<const Eigen::VectorXcd>(gate.data(), gate.size()), tdims, perm);

    int wl = 1;
    for (int s = 0; s < n - 1; ++s) {
        const int d = site_dims[s];
        const Eigen::Index rows = static_cast<Eigen::Index>(wl) * d * d;
        const Eigen::Index cols = flat.size() / rows;
        const Eigen::Map<const Eigen::MatrixXcd> m(flat.data(), rows, cols);
        auto svd = linalg::svd_econ(m);
        int keep = 0;
        const double threshold = cutoff * svd.s(0);
        while (keep < svd.s.size() && svd.s(keep) > threshold) ++keep;
        keep = std::max(keep, 1);

        MpoTensor& t = out.tensors[s];
        t.wl = wl;
        t.dout = t.din = d;
        t.wr = keep;
        t.flat = Eigen::Map<const Eigen::VectorXcd>(svd.u.data(), rows * keep);
        t.build_zip_form();

        Eigen::MatrixXcd rest =
            svd.s.head(keep).asDiagonal() * svd.vh.topRows(keep);
        flat = Eigen::Map<const Eigen::VectorXcd>(rest.data(), rest.size());
        wl = keep;
    }
    MpoTensor& last = out.tensors[n - 1];
    last.wl = wl;
    last.dout = last.din = site_dims[n - 1];
    last.wr = 1;
    last.flat = flat;
    last.build_zip_form();

    if (dim <= 2048) {
        const double residual = (out.recontract() - gate).cwiseAbs().maxCoeff();
        if (residual > 1e-10)
            throw std::runtime_error("mpo: recontraction residual above 1e-10");
    }
    return out;
}

Eigen::MatrixXcd exponentiate_gate(const Eigen::MatrixXcd& generator, double dt) {
    const Eigen::Index dim = generator.rows();
    if (generator.cols() != dim) throw std::invalid_argument("expm: not square");
    if (dim > 4096)
        throw std::invalid_argument("expm: dimension beyond the dense cap (4096)");
    const double scale = std::max(generator.cwiseAbs().maxCoeff(), 1.0);
    if ((generator - generator.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("expm: generator not hermitian");

    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;
    linalg::hermitian_eig(0.5 * (generator + generator.adjoint()), evals, evecs);
    Eigen::VectorXcd phases(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        phases(i) = std::exp(-kImag * (evals(i) * dt));
    Eigen::MatrixXcd u = evecs * phases.asDiagonal() * evecs.adjoint();

    const double unitarity =
        (u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (unitarity > 1e-12 * std::max<double>(1.0, static_cast<double>(dim)))
        throw std::runtime_error("expm: result failed the unitarity check");
    return u;
}

// ------------------------------------------------------------------- zip-up

void apply_mpo_and_truncate(MPS& mps, const GateMPO& gate, TruncationPolicy& policy) {
    const int n = gate.site_count();
    const int s0 = gate.start;
    if (s0 < 0 || s0 + n > mps.site_count())
        throw std::invalid_argument("apply: gate range outside the chain");
    for (int i = 0; i < n; ++i)
        if (mps.site_dim(s0 + i) != gate.dims[i])
            throw std::invalid_argument("apply: gate/site dimension mismatch");

    mps.move_center_to(s0);

    // Forward zip: contract site tensors with MPO tensors left to right,
    // truncating intermediate bonds slightly tighter than the final policy.
    const double zip_cutoff = 0.1 * policy.cutoff;
    Eigen::MatrixXcd carried;  // (K, chi * wl), column l + chi*w
    int big = 0;               // K
    for (int i = 0; i < n; ++i) {
        Tensor3& a = mps.tensors_[s0 + i];
        const MpoTensor& w = gate.tensors[i];
        const int chi_l = a.left(), d = a.phys(), chi_r = a.right();

        Eigen::MatrixXcd dm;  // (K*wl, din*chi_r), column p + d*r
        if (i == 0) {
            big = chi_l;
            dm = a.right_mat();
        } else {
            Eigen::MatrixXcd cm(static_cast<Eigen::Index>(big) * w.wl, chi_l);
            for (int k = 0; k < big; ++k)
                for (int l = 0; l < chi_l; ++l)
                    for (int ww = 0; ww < w.wl; ++ww)
                        cm(k + static_cast<Eigen::Index>(big) * ww, l) =
                            carried(k, l + static_cast<Eigen::Index>(chi_l) * ww);
            dm = cm * a.right_mat();
        }

        // (K*chi_r, wl*din)
        Eigen::MatrixXcd dm2(static_cast<Eigen::Index>(big) * chi_r,
                             static_cast<Eigen::Index>(w.wl) * d);
        for (int k = 0; k < big; ++k)
            for (int ww = 0; ww < w.wl; ++ww)
                for (int p = 0; p < d; ++p)
                    for (int r = 0; r < chi_r; ++r)
                        dm2(k + static_cast<Eigen::Index>(big) * r,
                            ww + static_cast<Eigen::Index>(w.wl) * p) =
                            dm(k + static_cast<Eigen::Index>(big) * ww,
                               p + static_cast<Eigen::Index>(d) * r);

        Eigen::MatrixXcd e = dm2 * w.zip_form;  // (K*chi_r, dout*wr)

        if (i < n - 1) {
            Eigen::MatrixXcd z(static_cast<Eigen::Index>(big) * w.dout,
                               static_cast<Eigen::Index>(chi_r) * w.wr);
            for (int k = 0; k < big; ++k)
                for (int o = 0; o < w.dout; ++o)
                    for (int r = 0; r < chi_r; ++r)
                        for (int w2 = 0; w2 < w.wr; ++w2)
                            z(k + static_cast<Eigen::Index>(big) * o,
                              r + static_cast<Eigen::Index>(chi_r) * w2) =
                                e(k + static_cast<Eigen::Index>(big) * r,
                                  o + static_cast<Eigen::Index>(w.dout) * w2);
            auto svd = linalg::svd_econ(z);
            auto cut = linalg::decide_truncation(svd.s, policy.chi_max, zip_cutoff);
            policy.record(cut.discarded_abs);
            mps.tensors_[s0 + i] =
                Tensor3::from_left_mat(svd.u.leftCols(cut.kept), big, w.dout);
            carried = svd.s.head(cut.kept).asDiagonal() * svd.vh.topRows(cut.kept);
            big = cut.kept;
        } else {
            Tensor3 t(big, w.dout, chi_r);
            for (int k = 0; k < big; ++k)
                for (int o = 0; o < w.dout; ++o)
                    for (int r = 0; r < chi_r; ++r)
                        t.at(k, o, r) = e(k + static_cast<Eigen::Index>(big) * r, o);
            mps.tensors_[s0 + i] = std::move(t);
        }
    }

    // Backward sweep: final truncation and canonical form, center back at s0.
    for (int t = s0 + n - 1; t > s0; --t) {
        Tensor3& a = mps.tensors_[t];
        const int d = a.phys(), chi_r = a.right();
        auto svd = linalg::svd_econ(a.right_mat());
        auto cut = linalg::decide_truncation(svd.s, policy.chi_max, policy.cutoff);
        policy.record(cut.discarded_abs);
        mps.tensors_[t] = Tensor3::from_right_mat(svd.vh.topRows(cut.kept), d, chi_r);
        mps.set_bond_spectrum(t, svd.s.head(cut.kept));
        Eigen::MatrixXcd us = svd.u.leftCols(cut.kept) *
                              svd.s.head(cut.kept).asDiagonal();
        Tensor3& prev = mps.tensors_[t - 1];
        mps.tensors_[t - 1] = Tensor3::from_left_mat(prev.left_mat() * us,
                                                     prev.left(), prev.phys());
    }
    mps.center_ = s0;

    if (!mps.tensors_[s0].all_finite())
        throw std::runtime_error("apply: non-finite tensor after gate application");
}

// ----------------------------------------------------------------- scheduling

TrotterSchedule build_gate_layers(const model::BandCouplingMatrix& band,
                                  const exact::HilbertSpaceLayout& layout, double dt,
                                  AtomGateMode mode) {
    if (dt <= 0.0) throw std::invalid_argument("schedule: dt must be positive");
    const int na = layout.atom_count;
    const int m = layout.mode_count;
    const int nf = layout.fock_cutoff;
    if (band.atom_count() != na || band.mode_count() != m)
        throw std::invalid_argument("schedule: band/layout mismatch");

    const exact::LocalOperatorSet ops(nf);
    const Eigen::MatrixXcd id_atom = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd id_boson = Eigen::MatrixXcd::Identity(nf, nf);
    const Eigen::MatrixXcd displacement = ops.annihilate - ops.create;

    TrotterSchedule schedule;
    schedule.dt = dt;
    schedule.fock_cutoff = nf;
    schedule.atom_count = na;

    if (mode == AtomGateMode::PerAtom || na == 1) {
        // Atom j's gate spans [atom_j .. boson_j]; intervening atoms carry
        // identity factors. Gates overlap, one layer each.
        for (int j = 0; j < na; ++j) {
            Gate gate;
            gate.kind = GateKind::Atom;
            gate.start = j;
            const int atoms_in_gate = na - j;
            const int bosons_in_gate = std::min(j + 1, m);
            for (int q = 0; q < atoms_in_gate; ++q) gate.dims.push_back(2);
            for (int q = 0; q < bosons_in_gate; ++q) gate.dims.push_back(nf);

            std::vector<Eigen::MatrixXcd> factors(gate.dims.size());
            auto identity_fill = [&]() {
                for (std::size_t q = 0; q < factors.size(); ++q)
                    factors[q] = q < static_cast<std::size_t>(atoms_in_gate) ? id_atom
                                                                             : id_boson;
            };
            identity_fill();
            factors[0] = 0.5 * band.atom_frequencies()(j) * ops.sigma_z;
            Eigen::MatrixXcd gen = kron_chain(factors);
            for (int k = 0; k <= j && k < m; ++k) {
                const double rho = band.rho(j, k);
                if (rho == 0.0) continue;
                identity_fill();
                factors[0] = ops.sigma_x;
                factors[atoms_in_gate + k] = displacement;
                gen += (-kImag * rho) * kron_chain(factors);
            }
            gate.generator = std::move(gen);
            gate.label = "atom" + std::to_string(j + 1);
            schedule.layers.push_back({std::move(gate)});
        }
    } else {
        // One exchange-symmetric gate carrying every atomic term, spanning
        // [atom_1 .. boson_{N_a}].
        Gate gate;
        gate.kind = GateKind::Atom;
        gate.start = 0;
        for (int q = 0; q < na; ++q) gate.dims.push_back(2);
        for (int q = 0; q < std::min(na, m); ++q) gate.dims.push_back(nf);

        std::vector<Eigen::MatrixXcd> factors(gate.dims.size());
        auto identity_fill = [&]() {
            for (std::size_t q = 0; q < factors.size(); ++q)
                factors[q] = q < static_cast<std::size_t>(na) ? id_atom : id_boson;
        };
        Eigen::MatrixXcd gen;
        bool first = true;
        for (int j = 0; j < na; ++j) {
            identity_fill();
            factors[j] = 0.5 * band.atom_frequencies()(j) * ops.sigma_z;
            Eigen::MatrixXcd term = kron_chain(factors);
            gen = first ? term : Eigen::MatrixXcd(gen + term);
            first = false;
            for (int k = 0; k <= j && k < m; ++k) {
                const double rho = band.rho(j, k);
                if (rho == 0.0) continue;
                identity_fill();
                factors[j] = ops.sigma_x;
                factors[na + k] = displacement;
                gen += (-kImag * rho) * kron_chain(factors);
            }
        }
        gate.generator = std::move(gen);
        gate.label = "atoms";
        schedule.layers.push_back({std::move(gate)});
    }

    // Boson-chain gates h_k on sites [boson_k .. boson_{k+N_a}], shortened at
    // the end of the chain; layered by k mod (N_a+1) for disjointness.
    std::vector<std::vector<Gate>> boson_layers(na + 1);
    for (int k = 0; k < m; ++k) {
        const int span = std::min(na, m - 1 - k);
        Gate gate;
        gate.kind = GateKind::Boson;
        gate.start = na + k;
        gate.dims.assign(span + 1, nf);

        std::vector<Eigen::MatrixXcd> factors(span + 1, id_boson);
        factors[0] = band.xi(k) * ops.number;
        Eigen::MatrixXcd gen = kron_chain(factors);
        for (int j = 1; j <= span; ++j) {
            const double t = band.hopping(k, k + j);
            if (t == 0.0) continue;
            std::fill(factors.begin(), factors.end(), id_boson);
            factors[0] = ops.create;
            factors[j] = ops.annihilate;
            gen += t * kron_chain(factors);
            std::fill(factors.begin(), factors.end(), id_boson);
            factors[0] = ops.annihilate;
            factors[j] = ops.create;
            gen += t * kron_chain(factors);
        }
        gate.generator = std::move(gen);
        gate.label = "boson" + std::to_string(k + 1);
        boson_layers[k % (na + 1)].push_back(std::move(gate));
    }
    for (auto& layer : boson_layers)
        if (!layer.empty()) schedule.layers.push_back(std::move(layer));
    return schedule;
}

Eigen::MatrixXcd schedule_generator_sum(const TrotterSchedule& schedule,
                                        const exact::HilbertSpaceLayout& layout) {
    const std::int64_t dim = layout.dimension();
    if (dim > 1 << 14)
        throw std::invalid_argument("schedule audit: dimension too large");
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& layer : schedule.layers) {
        for (const auto& gate : layer) {
            std::int64_t pre = 1, post = 1;
            for (int s = 0; s < gate.start; ++s) pre *= layout.site_dim(s);
            for (int s = gate.start + static_cast<int>(gate.dims.size());
                 s < layout.site_count(); ++s)
                post *= layout.site_dim(s);
            sum += kron(kron(Eigen::MatrixXcd::Identity(pre, pre), gate.generator),
                        Eigen::MatrixXcd::Identity(post, post));
        }
    }
    return sum;
}

CompiledSchedule compile_schedule(const TrotterSchedule& schedule) {
    CompiledSchedule out;
    out.dt = schedule.dt;
    const int na = schedule.atom_count;
    const int nf = schedule.fock_cutoff;
    // bond bound for (N_a+1)-site boson gates: N_f^{N_a} (even) / N_f^{N_a+1} (odd)
    std::int64_t boson_bound = 1;
    for (int q = 0; q < (na % 2 == 0 ? na : na + 1); ++q) boson_bound *= nf;

    for (const auto& layer : schedule.layers) {
        std::vector<CompiledGate> compiled;
        for (const auto& gate : layer) {
            CompiledGate cg;
            cg.kind = gate.kind;
            cg.label = gate.label;
            const Eigen::MatrixXcd u =
                exponentiate_gate(gate.generator, 0.5 * schedule.dt);
            cg.mpo = decompose_gate_to_mpo(u, gate.dims);
            cg.mpo.start = gate.start;
            if (gate.kind == GateKind::Boson &&
                cg.mpo.max_bond() > boson_bound)
                throw std::runtime_error("schedule: boson gate MPO bond exceeds bound");
            out.max_mpo_bond = std::max(out.max_mpo_bond, cg.mpo.max_bond());
            compiled.push_back(std::move(cg));
        }
        out.layers.push_back(std::move(compiled));
    }
    return out;
}

// --------------------------------------------------------------- observables

double entropy_from_singular_values(const Eigen::VectorXd& s) {
    double total = 0.0;
    for (int i = 0; i < s.size(); ++i) total += s(i) * s(i);
    if (total <= 0.0) return 0.0;
    double ent = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        const double p = s(i) * s(i) / total;
        if (p > 0.0) ent -= p * std::log(p);
    }
    return ent;
}

double entanglement_entropy(MPS& mps, int bond) {
    return entropy_from_singular_values(mps.bond_singular_values(bond));
}

double local_expectation(MPS& mps, int site, const Eigen::MatrixXcd& op) {
    mps.move_center_to(site);
    const Tensor3& a = mps.tensor(site);
    const int dl = a.left(), d = a.phys();
    if (op.rows() != d || op.cols() != d)
        throw std::invalid_argument("expectation: operator dimension mismatch");
    Tensor3 b(dl, d, a.right());
    for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q)
            if (op(p, q) != Complex(0, 0))
                b.left_mat().middleRows(dl * p, dl) +=
                    op(p, q) * a.left_mat().middleRows(dl * q, dl);
    const Complex val = (a.left_mat().conjugate().cwiseProduct(b.left_mat())).sum();
    return val.real() / a.squared_norm();
}

Eigen::MatrixXcd two_site_rdm(MPS& mps) {
    if (mps.atom_count() != 2)
        throw std::invalid_argument("two_site_rdm: need exactly two atoms");
    mps.move_center_to(0);
    const Tensor3& a0 = mps.tensor(0);
    const Tensor3& a1 = mps.tensor(1);
    const int d0 = a0.phys(), d1 = a1.phys(), chi = a1.right();
    // a0 has left bond 1: right_mat is (1, d0*b) -> view as (d0, b)
    const Eigen::Map<const Eigen::MatrixXcd> m0(a0.right_mat().data(), d0, a0.right());
    Eigen::MatrixXcd t = m0 * a1.right_mat();  // (d0, d1*chi), col = p1 + d1*r
    Eigen::MatrixXcd t2(d0 * d1, chi);         // row = p0*d1 + p1 (atom 1 slow)
    for (int p0 = 0; p0 < d0; ++p0)
        for (int p1 = 0; p1 < d1; ++p1)
            for (int r = 0; r < chi; ++r)
                t2(p0 * d1 + p1, r) = t(p0, p1 + d1 * r);
    Eigen::MatrixXcd rho = t2 * t2.adjoint();
    return rho / rho.trace().real();
}

std::array<double, 4> two_atom_components(MPS& mps) {
    const Eigen::MatrixXcd rho = two_site_rdm(mps);
    return {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(), rho(3, 3).real()};
}

namespace {

// E'(r, r') = sum_{l,l',p,p'} conj(A(l',p',r')) O(p',p) E(l,l') A(l,p,r)
Eigen::MatrixXcd op_transfer(const Tensor3& a, const Eigen::MatrixXcd& op,
                             const Eigen::MatrixXcd& env) {
    const int dl = a.left(), d = a.phys(), dr = a.right();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dr, dr);
    for (int p2 = 0; p2 < d; ++p2) {
        for (int p = 0; p < d; ++p) {
            const Complex o = op(p2, p);
            if (o == Complex(0, 0)) continue;
            const auto ap = a.left_mat().middleRows(dl * p, dl);    // (dl, dr) ket
            const auto ap2 = a.left_mat().middleRows(dl * p2, dl);  // (dl, dr) bra
            out.noalias() += o * (ap.transpose() * env * ap2.conjugate());
        }
    }
    return out;
}

Eigen::MatrixXcd plain_transfer(const Tensor3& a, const Eigen::MatrixXcd& env) {
    const int dl = a.left(), d = a.phys(), dr = a.right();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dr, dr);
    for (int p = 0; p < d; ++p) {
        const auto ap = a.left_mat().middleRows(dl * p, dl);
        out.noalias() += ap.transpose() * env * ap.conjugate();
    }
    return out;
}

// R(l, l') = sum_p A_p R_next A_p^dagger
Eigen::MatrixXcd right_env_step(const Tensor3& a, const Eigen::MatrixXcd& next) {
    const int dl = a.left(), d = a.phys();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dl, dl);
    for (int p = 0; p < d; ++p) {
        const auto ap = a.left_mat().middleRows(dl * p, dl);
        out.noalias() += ap * next * ap.adjoint();
    }
    return out;
}

}  // namespace

Eigen::MatrixXcd boson_correlation_matrix(MPS& mps) {
    const int na = mps.atom_count();
    const int sites = mps.site_count();
    const int m = sites - na;
    if (m <= 0) throw std::invalid_argument("boson correlation: no boson sites");
    const int nf = mps.site_dim(na);
    const exact::LocalOperatorSet ops(nf);

    mps.move_center_to(sites - 1);
    const double norm2 = mps.squared_norm();

    // right environments: renv[s] covers sites s..end
    std::vector<Eigen::MatrixXcd> renv(sites + 1);
    renv[sites] = Eigen::MatrixXcd::Identity(1, 1);
    for (int s = sites - 1; s >= na; --s)
        renv[s] = right_env_step(mps.tensor(s), renv[s + 1]);

    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        const int si = na + i;
        const Eigen::MatrixXcd left_id =
            Eigen::MatrixXcd::Identity(mps.tensor(si).left(), mps.tensor(si).left());
        {  // diagonal <n_i>
            const Eigen::MatrixXcd f = op_transfer(mps.tensor(si), ops.number, left_id);
            corr(i, i) = f.cwiseProduct(renv[si + 1]).sum() / norm2;
        }
        Eigen::MatrixXcd env = op_transfer(mps.tensor(si), ops.create, left_id);
        for (int j = i + 1; j < m; ++j) {
            const int sj = na + j;
            const Eigen::MatrixXcd f = op_transfer(mps.tensor(sj), ops.annihilate, env);
            corr(i, j) = f.cwiseProduct(renv[sj + 1]).sum() / norm2;
            corr(j, i) = std::conj(corr(i, j));
            if (j + 1 < m) env = plain_transfer(mps.tensor(sj), env);
        }
    }
    return corr;
}

Eigen::VectorXd field_correlation(MPS& mps, const model::TransformRecord& record,
                                  const model::SystemSpec& spec,
                                  const std::vector<double>& positions) {
    const int m = spec.mode_count();
    if (record.boson_block().rows() != m)
        throw std::invalid_argument("field correlation: record/spec mode mismatch");
    if (spec.generator.harmonics.empty())
        throw std::invalid_argument("field correlation: spec lacks mode profiles");

    const Eigen::MatrixXcd chain_corr = boson_correlation_matrix(mps);
    if (chain_corr.rows() != m)
        throw std::invalid_argument("field correlation: mps/spec mode mismatch");
    const Eigen::MatrixXd u = record.boson_block();
    const Eigen::MatrixXcd mode_corr = u.transpose() * chain_corr * u;  // <a+_k a_k'>

    const double scale = std::max(mode_corr.cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd out(positions.size());
    Eigen::VectorXd c(m);
    for (std::size_t ix = 0; ix < positions.size(); ++ix) {
        for (int k = 0; k < m; ++k)
            c(k) = std::sqrt(spec.mode_frequencies(k) / 2.0) *
                   model::mode_profile(spec.generator.harmonics[k], positions[ix]);
        const Complex g = c.cast<Complex>().transpose() * mode_corr * c.cast<Complex>();
        if (std::abs(g.imag()) > 1e-10 * scale || g.real() < -1e-10 * scale)
            throw std::runtime_error("field correlation: value not real-nonnegative");
        out(ix) = std::max(g.real(), 0.0);
    }
    return out;
}

// -------------------------------------------------------------------- running

namespace {

void apply_layer(MPS& mps, const std::vector<CompiledGate>& layer,
                 TruncationPolicy& policy) {
    if (layer.empty()) return;
    // gates in a layer act on disjoint ranges; sweep from whichever end is
    // closer to the current center
    const bool ascending =
        std::abs(mps.center() - layer.front().mpo.start) <=
        std::abs(mps.center() - layer.back().mpo.start);
    if (ascending) {
        for (const auto& gate : layer) apply_mpo_and_truncate(mps, gate.mpo, policy);
    } else {
        for (auto it = layer.rbegin(); it != layer.rend(); ++it)
            apply_mpo_and_truncate(mps, it->mpo, policy);
    }
}

}  // namespace

TebdResult tebd_run(MPS mps, const CompiledSchedule& schedule,
                    TruncationPolicy& policy, std::int64_t steps,
                    const ObservableRequest& request,
                    const model::TransformRecord* record,
                    const model::SystemSpec* spec) {
    const auto t_begin = std::chrono::steady_clock::now();
    TebdResult result;
    const int na = mps.atom_count();
    Eigen::MatrixXcd excited = Eigen::MatrixXcd::Zero(2, 2);
    excited(1, 1) = 1.0;

    const bool with_correlation =
        request.correlation_stride > 0 && record != nullptr && spec != nullptr &&
        !request.positions.empty();
    if (with_correlation) result.correlation.positions = request.positions;

    auto sample = [&](double t) {
        TimePoint pt;
        pt.t = t;
        pt.populations.resize(na);
        for (int j = 0; j < na; ++j) pt.populations[j] = local_expectation(mps, j, excited);
        if (na == 2) pt.components = two_atom_components(mps);
        if (mps.site_count() > 1) pt.entropy_bond1 = entanglement_entropy(mps, 1);
        if (mps.site_count() > 2) pt.entropy_bond2 = entanglement_entropy(mps, 2);
        pt.norm2 = mps.squared_norm();
        pt.cumulative_discarded = policy.cumulative_discarded;
        pt.max_bond = mps.max_bond_dim();
        result.series.push_back(std::move(pt));
        result.max_bond_reached = std::max(result.max_bond_reached, mps.max_bond_dim());
    };
    auto sample_correlation = [&](double t) {
        if (!with_correlation) return;
        result.correlation.times.push_back(t);
        result.correlation.values.push_back(
            field_correlation(mps, *record, *spec, request.positions));
    };

    sample(0.0);
    sample_correlation(0.0);
    for (std::int64_t step = 1; step <= steps; ++step) {
        for (const auto& layer : schedule.layers) apply_layer(mps, layer, policy);
        for (auto it = schedule.layers.rbegin(); it != schedule.layers.rend(); ++it)
            apply_layer(mps, *it, policy);

        const double t = static_cast<double>(step) * schedule.dt;
        if (step % request.stride == 0 || step == steps) sample(t);
        if (with_correlation &&
            (step % request.correlation_stride == 0 || step == steps))
            sample_correlation(t);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
            .count();
    return result;
}

}  // namespace dickeband::mps
