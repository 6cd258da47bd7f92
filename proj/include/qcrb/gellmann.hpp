#pragma once

// Generalized Gell-Mann matrices with the Tr(l_j l_k) = delta_jk
// normalization, su(d) structure constants, and the trace identities used as
// verification oracles.

#include <vector>

#include "qcrb/linalg.hpp"

namespace qcrb {

// lambda_1 .. lambda_{d^2-1}, ordered: symmetric (X-like) pairs, then
// antisymmetric (Y-like) pairs (lexicographic within each group), then the
// d-1 diagonal matrices.
struct GmmBasis {
    int dim = 0;
    std::vector<HermMatrix> matrices;

    int count() const { return static_cast<int>(matrices.size()); }
    const HermMatrix& operator[](int j) const { return matrices[j]; }
};

GmmBasis gmm_basis(int d);

// d_jkl = Tr({l_j,l_k} l_l)  (fully symmetric)
// f_jkl = -i Tr([l_j,l_k] l_l) (fully antisymmetric)
struct StructureConstants {
    int n = 0;
    std::vector<double> d_sym;   // dense, n^3
    std::vector<double> f_anti;  // dense, n^3

    double d(int j, int k, int l) const { return d_sym[(j * n + k) * n + l]; }
    double f(int j, int k, int l) const { return f_anti[(j * n + k) * n + l]; }
};

StructureConstants structure_constants(const GmmBasis& basis);

struct IdentityReport {
    double resid_sum_squares;      // sum l_j^2 = (d^2-1)/d 1
    double resid_conjugation;      // max_j | sum_m l_m l_j l_m + l_j/d |
    double resid_double_product;   // sum l_j l_k l_j l_k = -(d^2-1)/d^2 1
    double max_resid() const;
};

IdentityReport verify_identities(const GmmBasis& basis);

// sum_m l_m A l_m. For traceless Hermitian A this equals -A/d; for
// A = l_j l_k it equals delta_jk 1 - l_j l_k / d.
Matrix conjugation_sum(const Matrix& a, const GmmBasis& basis);

}  // namespace qcrb
