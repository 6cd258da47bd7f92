#include "qcrb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qcrb {

HermMatrix::HermMatrix(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) throw DimensionError("HermMatrix: matrix not square");
    Matrix anti = 0.5 * (a - a.adjoint());
    if (anti.cwiseAbs().maxCoeff() > tol * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw InvalidStateError("HermMatrix: input exceeds Hermiticity tolerance");
    mat_ = 0.5 * (a + a.adjoint());
}

HermMatrix HermMatrix::identity(int d) { return HermMatrix(Matrix::Identity(d, d)); }
HermMatrix HermMatrix::zero(int d) { return HermMatrix(Matrix::Zero(d, d)); }

EigResult eig_herm(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw SolverFailure("eig_herm: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

EigResult eig_herm(const HermMatrix& a) { return eig_herm(a.mat()); }

double trace_norm(const Matrix& a) {
    if (a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <
                                    1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

bool is_psd(const Matrix& a, double tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

bool is_psd(const HermMatrix& a, double tol) { return is_psd(a.mat(), tol); }

Matrix psd_sqrt(const HermMatrix& a, double tol) {
    EigResult e = eig_herm(a);
    RealVector w = e.eigenvalues;
    for (int i = 0; i < w.size(); ++i) {
        if (w[i] < -tol) throw InvalidStateError("psd_sqrt: matrix not PSD");
        w[i] = std::sqrt(std::max(w[i], 0.0));
    }
    return e.eigenvectors * w.asDiagonal() * e.eigenvectors.adjoint();
}

RealMatrix herm_to_real_embed(const Matrix& a) {
    const auto n = a.rows();
    RealMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = a.real();
    out.bottomRightCorner(n, n) = a.real();
    out.topRightCorner(n, n) = -a.imag();
    out.bottomLeftCorner(n, n) = a.imag();
    return out;
}

namespace {

// Orthonormal Hermitian basis element k of dimension d, k in [0, d^2):
// k = 0 is 1/sqrt(d), then the GMM ordering (symmetric pairs, antisymmetric
// pairs, diagonal). Kept local: gellmann.cpp builds the same matrices.
Matrix herm_basis_element(int d, int k) {
    Matrix m = Matrix::Zero(d, d);
    if (k == 0) {
        m = Matrix::Identity(d, d) / std::sqrt(double(d));
        return m;
    }
    k -= 1;
    const int pairs = d * (d - 1) / 2;
    if (k < pairs || k < 2 * pairs) {
        bool sym = k < pairs;
        int t = sym ? k : k - pairs;
        int a = 0;
        while (t >= d - 1 - a) { t -= d - 1 - a; ++a; }
        int b = a + 1 + t;
        const double s = 1.0 / std::sqrt(2.0);
        if (sym) {
            m(a, b) = s; m(b, a) = s;
        } else {
            m(a, b) = Complex(0, -s); m(b, a) = Complex(0, s);
        }
        return m;
    }
    int l = k - 2 * pairs + 1;  // diagonal index 1..d-1
    const double s = 1.0 / std::sqrt(double(l) * (l + 1));
    for (int i = 0; i < l; ++i) m(i, i) = s;
    m(l, l) = -double(l) * s;
    return m;
}

}  // namespace

RealVector herm_basis_vec(const HermMatrix& a) {
    const int d = a.dim();
    RealVector v(d * d);
    for (int k = 0; k < d * d; ++k)
        v[k] = (herm_basis_element(d, k).adjoint() * a.mat()).trace().real();
    return v;
}

HermMatrix herm_basis_unvec(const RealVector& v, int d) {
    if (v.size() != d * d) throw DimensionError("herm_basis_unvec: vector length != d^2");
    Matrix m = Matrix::Zero(d, d);
    for (int k = 0; k < d * d; ++k) m += v[k] * herm_basis_element(d, k);
    return HermMatrix(m);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CqMatrix::CqMatrix(int n, int d, const Matrix& flat) : n_(n), d_(d), flat_(flat) {
    if (flat.rows() != n * d || flat.cols() != n * d)
        throw DimensionError("CqMatrix: flat matrix has wrong size");
    Matrix anti = 0.5 * (flat_ - flat_.adjoint());
    if (anti.cwiseAbs().maxCoeff() > kHermTol * std::max(1.0, flat_.cwiseAbs().maxCoeff()))
        throw InvalidStateError("CqMatrix: flattened matrix not Hermitian");
    flat_ = 0.5 * (flat_ + flat_.adjoint());
}

void CqMatrix::set_block(int j, int k, const Matrix& b) {
    flat_.block(j * d_, k * d_, d_, d_) = b;
    flat_.block(k * d_, j * d_, d_, d_) = b.adjoint();
}

double CqMatrix::weighted_trace(const RealMatrix& w, const Matrix& rho) const {
    double out = 0;
    for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
            if (w(j, k) == 0.0) continue;
            out += w(j, k) * (rho * block(k, j)).trace().real();
        }
    return out;
}

}  // namespace qcrb
