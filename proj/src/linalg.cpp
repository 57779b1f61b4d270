#include "dickeband/linalg.hpp"

#include <algorithm>
#include <stdexcept>

#ifdef DICKEBAND_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace dickeband::linalg {

#ifdef DICKEBAND_HAVE_LAPACKE
namespace {

bool lapack_svd(const Eigen::MatrixXcd& a, SvdResult& out, bool divide_and_conquer) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    Eigen::MatrixXcd work = a;  // overwritten
    out.u.resize(m, k);
    out.s.resize(k);
    out.vh.resize(k, n);
    lapack_int info;
    if (divide_and_conquer) {
        info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), m,
                              out.s.data(),
                              reinterpret_cast<lapack_complex_double*>(out.u.data()), m,
                              reinterpret_cast<lapack_complex_double*>(out.vh.data()), k);
    } else {
        Eigen::VectorXd superb(std::max<lapack_int>(1, k - 1));
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), m,
                              out.s.data(),
                              reinterpret_cast<lapack_complex_double*>(out.u.data()), m,
                              reinterpret_cast<lapack_complex_double*>(out.vh.data()), k,
                              superb.data());
    }
    return info == 0;
}

}  // namespace
#endif

SvdResult svd_econ(const Eigen::MatrixXcd& a) {
    if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("svd: empty matrix");
    SvdResult out;
#ifdef DICKEBAND_HAVE_LAPACKE
    if (lapack_svd(a, out, /*divide_and_conquer=*/true)) return out;
    if (lapack_svd(a, out, /*divide_and_conquer=*/false)) return out;
#endif
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.vh = svd.matrixV().adjoint();
    return out;
}

void hermitian_eig(const Eigen::MatrixXcd& a, Eigen::VectorXd& eigenvalues,
                   Eigen::MatrixXcd& eigenvectors) {
    if (a.rows() != a.cols()) throw std::invalid_argument("eig: matrix not square");
#ifdef DICKEBAND_HAVE_LAPACKE
    {
        const lapack_int n = static_cast<lapack_int>(a.rows());
        eigenvectors = a;
        eigenvalues.resize(n);
        const lapack_int info = LAPACKE_zheevd(
            LAPACK_COL_MAJOR, 'V', 'U', n,
            reinterpret_cast<lapack_complex_double*>(eigenvectors.data()), n,
            eigenvalues.data());
        if (info == 0) return;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig: eigendecomposition failed");
    eigenvalues = solver.eigenvalues();
    eigenvectors = solver.eigenvectors();
}

QrResult qr_thin(const Eigen::MatrixXcd& a) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    const int k = std::min(m, n);
    QrResult out;
#ifdef DICKEBAND_HAVE_LAPACKE
    {
        Eigen::MatrixXcd work = a;
        Eigen::VectorXcd tau(k);
        lapack_int info = LAPACKE_zgeqrf(
            LAPACK_COL_MAJOR, m, n,
            reinterpret_cast<lapack_complex_double*>(work.data()), m,
            reinterpret_cast<lapack_complex_double*>(tau.data()));
        if (info == 0) {
            out.r = Eigen::MatrixXcd::Zero(k, n);
            for (int c = 0; c < n; ++c)
                for (int r = 0; r <= std::min(c, k - 1); ++r) out.r(r, c) = work(r, c);
            info = LAPACKE_zungqr(
                LAPACK_COL_MAJOR, m, k, k,
                reinterpret_cast<lapack_complex_double*>(work.data()), m,
                reinterpret_cast<lapack_complex_double*>(tau.data()));
            if (info == 0) {
                out.q = work.leftCols(k);
                return out;
            }
        }
    }
#endif
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, k);
    out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return out;
}

LqResult lq_thin(const Eigen::MatrixXcd& a) {
    // A = L Q from the QR of A^dagger: A^dagger = Q' R' -> A = R'^dagger Q'^dagger
    QrResult qr = qr_thin(a.adjoint());
    LqResult out;
    out.l = qr.r.adjoint();
    out.q = qr.q.adjoint();
    return out;
}

TruncationDecision decide_truncation(const Eigen::VectorXd& s, int chi_max,
                                     double cutoff_rel) {
    const int n = static_cast<int>(s.size());
    TruncationDecision d;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += s(i) * s(i);
    if (total == 0.0) {
        d.kept = 1;
        return d;
    }
    double tail = 0.0;
    int kept = n;
    for (int i = n - 1; i >= 1; --i) {
        const double next = tail + s(i) * s(i);
        if (next <= cutoff_rel * total) {
            tail = next;
            kept = i;
        } else {
            break;
        }
    }
    kept = std::max(1, std::min(kept, std::max(1, chi_max)));
    double disc = 0.0;
    for (int i = kept; i < n; ++i) disc += s(i) * s(i);
    d.kept = kept;
    d.discarded_abs = disc;
    d.discarded_rel = disc / total;
    return d;
}

}  // namespace dickeband::linalg
