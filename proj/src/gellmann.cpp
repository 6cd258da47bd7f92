#include "qcrb/gellmann.hpp"

#include <cmath>

namespace qcrb {

GmmBasis gmm_basis(int d) {
    if (d < 2 || d > 16) throw DimensionError("gmm_basis: d must be in [2, 16]");
    GmmBasis basis;
    basis.dim = d;
    const double s = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Matrix m = Matrix::Zero(d, d);
            m(a, b) = s; m(b, a) = s;
            basis.matrices.emplace_back(m);
        }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Matrix m = Matrix::Zero(d, d);
            m(a, b) = Complex(0, -s); m(b, a) = Complex(0, s);
            basis.matrices.emplace_back(m);
        }
    for (int l = 1; l < d; ++l) {
        Matrix m = Matrix::Zero(d, d);
        const double r = 1.0 / std::sqrt(double(l) * (l + 1));
        for (int i = 0; i < l; ++i) m(i, i) = r;
        m(l, l) = -double(l) * r;
        basis.matrices.emplace_back(m);
    }
    return basis;
}

StructureConstants structure_constants(const GmmBasis& basis) {
    const int n = basis.count();
    StructureConstants sc;
    sc.n = n;
    sc.d_sym.assign(static_cast<size_t>(n) * n * n, 0.0);
    sc.f_anti.assign(static_cast<size_t>(n) * n * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Matrix prod = basis[j].mat() * basis[k].mat();
            Matrix acom = prod + prod.adjoint();          // {l_j, l_k}
            Matrix com = prod - prod.adjoint().eval();    // [l_j, l_k]
            for (int l = 0; l < n; ++l) {
                sc.d_sym[(size_t(j) * n + k) * n + l] = (acom * basis[l].mat()).trace().real();
                sc.f_anti[(size_t(j) * n + k) * n + l] =
                    (Complex(0, -1) * (com * basis[l].mat()).trace()).real();
            }
        }
    return sc;
}

double IdentityReport::max_resid() const {
    return std::max(resid_sum_squares, std::max(resid_conjugation, resid_double_product));
}

IdentityReport verify_identities(const GmmBasis& basis) {
    const int d = basis.dim;
    const int n = basis.count();
    IdentityReport rep{};

    Matrix s1 = Matrix::Zero(d, d);
    for (int j = 0; j < n; ++j) s1 += basis[j].mat() * basis[j].mat();
    rep.resid_sum_squares =
        (s1 - double(d * d - 1) / d * Matrix::Identity(d, d)).cwiseAbs().maxCoeff();

    rep.resid_conjugation = 0;
    for (int j = 0; j < n; ++j) {
        Matrix s2 = conjugation_sum(basis[j].mat(), basis);
        rep.resid_conjugation =
            std::max(rep.resid_conjugation, (s2 + basis[j].mat() / d).cwiseAbs().maxCoeff());
    }

    Matrix s3 = Matrix::Zero(d, d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Matrix jk = basis[j].mat() * basis[k].mat();
            s3 += jk * jk;
        }
    rep.resid_double_product =
        (s3 + double(d * d - 1) / (d * d) * Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    return rep;
}

Matrix conjugation_sum(const Matrix& a, const GmmBasis& basis) {
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    for (const auto& l : basis.matrices) out += l.mat() * a * l.mat();
    return out;
}

}  // namespace qcrb
