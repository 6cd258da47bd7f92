#include "qcrb/qfi.hpp"

namespace qcrb {

QfiMatrices sld_rld(const StatModel& m) {
    m.validate();
    const int d = m.dim, n = m.n_params;
    EigResult e = eig_herm(m.rho);
    if (e.eigenvalues.minCoeff() < 1e-14)
        throw InvalidStateError("sld_rld: rho is singular; regularize the model first");

    QfiMatrices out;
    Matrix rho_inv = e.eigenvectors * e.eigenvalues.cwiseInverse().asDiagonal() *
                     e.eigenvectors.adjoint();

    for (int j = 0; j < n; ++j) {
        // SLD in rho's eigenbasis: L_ab = 2 (d rho)_ab / (w_a + w_b)
        Matrix db = e.eigenvectors.adjoint() * m.derivs[j].mat() * e.eigenvectors;
        Matrix lb(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const double denom = e.eigenvalues[a] + e.eigenvalues[b];
                lb(a, b) = denom < 1e-12 ? Complex(0, 0) : 2.0 * db(a, b) / denom;
            }
        out.l_sld.emplace_back(e.eigenvectors * lb * e.eigenvectors.adjoint());
        out.l_rld.push_back(rho_inv * m.derivs[j].mat());
    }

    out.j_sld = RealMatrix(n, n);
    out.j_rld = Matrix(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            out.j_sld(j, k) =
                (m.rho.mat() * out.l_sld[j].mat() * out.l_sld[k].mat()).trace().real();
            // Tr[rho L_k L_j^dag]
            out.j_rld(j, k) =
                (m.rho.mat() * out.l_rld[k] * out.l_rld[j].adjoint()).trace();
        }
    out.j_sld = 0.5 * (out.j_sld + out.j_sld.transpose()).eval();
    return out;
}

}  // namespace qcrb
