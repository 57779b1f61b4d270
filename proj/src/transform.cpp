#include "dickeband/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dickeband::transform {

namespace {
double sgn_one_at_zero(double x) { return x < 0.0 ? -1.0 : 1.0; }
}

HouseholderStep householder_vector(const Eigen::MatrixXd& intermediate, int step,
                                   int atom_count) {
    const int n = static_cast<int>(intermediate.rows());
    const int col = step - 1;            // 0-based column
    const int pivot = atom_count + step - 1;  // 0-based row of the surviving entry
    if (step < 1 || pivot >= n - 1)
        throw std::invalid_argument("householder_vector: step out of range");

    HouseholderStep hs;
    hs.index = step;

    const int len = n - pivot;
    const Eigen::VectorXd m = intermediate.col(col).tail(len);
    // Nothing strictly below the pivot: the column already satisfies the band
    // condition and the reflector would at most flip a sign.
    if (m.tail(len - 1).cwiseAbs().maxCoeff() == 0.0) {
        hs.skip = true;
        return hs;
    }

    hs.alpha = -sgn_one_at_zero(m(0)) * m.norm();
    hs.v = Eigen::VectorXd::Zero(n);
    hs.v.tail(len) = m;
    hs.v(pivot) -= hs.alpha;
    return hs;
}

void apply_householder_step(Eigen::MatrixXd& a, Eigen::MatrixXd& q,
                            const HouseholderStep& step, int atom_count) {
    if (step.skip) return;
    const int n = static_cast<int>(a.rows());
    const int col = step.index - 1;
    const int pivot = atom_count + step.index - 1;

    const Eigen::VectorXd& v = step.v;
    const double beta = 2.0 / v.squaredNorm();

    // Symmetric rank-2 update: A <- A - v w^T - w v^T with
    // w = beta (A v - (beta/2) (v^T A v) v).
    Eigen::VectorXd av = a * v;
    const double gamma = 0.5 * beta * v.dot(av);
    Eigen::VectorXd w = beta * (av - gamma * v);
    a.noalias() -= v * w.transpose();
    a.noalias() -= w * v.transpose();

    // The annihilated entries are exact zeros of the transformation.
    for (int r = pivot + 1; r < n; ++r) {
        a(r, col) = 0.0;
        a(col, r) = 0.0;
    }
    a(pivot, col) = step.alpha;
    a(col, pivot) = step.alpha;

    // Q <- Q_i Q, rank-1 update rows >= pivot only.
    Eigen::RowVectorXd vq = v.tail(n - pivot).transpose() * q.bottomRows(n - pivot);
    q.bottomRows(n - pivot).noalias() -= beta * v.tail(n - pivot) * vq;
}

BandReduction band_reduce(const model::DickeCouplingMatrix& dicke) {
    const int na = dicke.atom_count();
    const int m = dicke.mode_count();
    const int n = dicke.size();

    model::TransformRecord record;
    record.atom_count = na;
    record.q = Eigen::MatrixXd::Identity(n, n);

    if (m <= na) {
        // N_a - M + 1 atoms remain coupled to all modes; no reduction possible.
        record.degenerate = true;
        return {model::BandCouplingMatrix(dicke.matrix(), na), std::move(record)};
    }

    Eigen::MatrixXd a = dicke.matrix();
    // Column i needs annihilation below row N_a+i; that region is nonempty
    // for i = 1..M-1.
    for (int i = 1; i <= m - 1; ++i) {
        HouseholderStep step = householder_vector(a, i, na);
        if (!step.skip) record.householder_vectors.push_back(step.v);
        apply_householder_step(a, record.q, step, na);
    }
    return {model::BandCouplingMatrix(std::move(a), na), std::move(record)};
}

// ----------------------------------------------------------------- chain oracle

ChainCoefficients chain_coefficients(const model::BandCouplingMatrix& band) {
    if (band.atom_count() != 1)
        throw std::invalid_argument("chain_coefficients: single-atom matrices only");
    const int m = band.mode_count();
    ChainCoefficients c;
    c.site_frequencies.resize(m);
    c.hoppings.resize(std::max(0, m - 1));
    for (int k = 0; k < m; ++k) c.site_frequencies(k) = band.xi(k);
    for (int k = 0; k + 1 < m; ++k) c.hoppings(k) = std::abs(band.hopping(k, k + 1));
    return c;
}

ChainCoefficients lanczos_chain_map_oracle(const model::DickeCouplingMatrix& dicke) {
    if (dicke.atom_count() != 1)
        throw std::invalid_argument("lanczos oracle: single-atom specs only");
    const int m = dicke.mode_count();
    const Eigen::VectorXd omega = dicke.mode_frequencies();
    Eigen::VectorXd g = dicke.coupling_block().row(0).transpose();
    const double gnorm = g.norm();
    if (gnorm == 0.0)
        throw std::invalid_argument("lanczos oracle: zero coupling vector seed");

    std::vector<Eigen::VectorXd> basis;
    basis.push_back(g / gnorm);

    std::vector<double> xi, t;
    for (int step = 0; step < m; ++step) {
        const Eigen::VectorXd& qn = basis[step];
        Eigen::VectorXd w = omega.cwiseProduct(qn);  // H q with H = diag(omega)
        const double a = qn.dot(w);
        xi.push_back(a);
        if (step + 1 == m) break;
        w -= a * qn;
        if (step > 0) w -= t.back() * basis[step - 1];
        // Full modified Gram-Schmidt against all previous vectors, twice.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& qb : basis) w -= qb.dot(w) * qb;
        const double b = w.norm();
        if (b < 1e-14 * omega.cwiseAbs().maxCoeff()) break;  // breakdown: shorter chain
        t.push_back(b);
        basis.push_back(w / b);
    }

    ChainCoefficients c;
    c.site_frequencies =
        Eigen::Map<const Eigen::VectorXd>(xi.data(), static_cast<int>(xi.size()));
    c.hoppings = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<int>(t.size()));
    return c;
}

// ------------------------------------------------------------------ validation

BandValidationReport validate_band_structure(const model::BandCouplingMatrix& band,
                                             double tolerance) {
    const Eigen::MatrixXd& a = band.matrix();
    const int n = band.size();
    const int na = band.atom_count();
    BandValidationReport report;
    report.tolerance = tolerance;

    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (std::abs(r - c) > na) {
                const double mag = std::abs(a(r, c));
                if (mag > report.max_outside_band) {
                    report.max_outside_band = mag;
                    report.worst_row = r;
                    report.worst_col = c;
                }
            }
            if (c > r)
                report.max_asymmetry =
                    std::max(report.max_asymmetry, std::abs(a(r, c) - a(c, r)));
        }
    }
    for (int r = 0; r < na; ++r)
        for (int c = 0; c < na; ++c)
            if (r != c)
                report.atom_block_deviation =
                    std::max(report.atom_block_deviation, std::abs(a(r, c)));

    const double tol_abs = tolerance * scale;
    report.pass = report.max_outside_band <= tol_abs &&
                  report.max_asymmetry <= tol_abs &&
                  report.atom_block_deviation <= tol_abs;
    return report;
}

// ------------------------------------------------------------- spectrum oracle

Eigen::VectorXd symmetric_spectrum(const Eigen::MatrixXd& matrix) {
    const int n = static_cast<int>(matrix.rows());
    if (matrix.cols() != n) throw std::invalid_argument("spectrum: matrix not square");
    const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("spectrum: matrix not symmetric");

    Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());

    // Cyclic Jacobi sweeps until the off-diagonal Frobenius mass is negligible.
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-30 * scale * scale * n * n) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = sgn_one_at_zero(theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = arp - s * (arq + tau * arp);
                    a(p, r) = a(r, p);
                    a(r, q) = arq + s * (arp - tau * arq);
                    a(q, r) = a(r, q);
                }
            }
        }
    }

    Eigen::VectorXd ev = a.diagonal();
    std::sort(ev.data(), ev.data() + n);
    return ev;
}

}  // namespace dickeband::transform
