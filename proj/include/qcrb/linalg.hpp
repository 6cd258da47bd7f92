#pragma once

// Dense complex-Hermitian kernel: the carrier type for states, derivatives,
// POVM elements and basis matrices, plus the eigen/PSD/trace-norm utilities
// and the Hermitian <-> real-vector isomorphisms used everywhere else.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qcrb/errors.hpp"

namespace qcrb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

constexpr double kHermTol = 1e-12;

// Dense d x d Hermitian matrix. The constructor symmetrizes (A + A^dag)/2 and
// rejects inputs whose anti-Hermitian part exceeds the tolerance.
class HermMatrix {
  public:
    HermMatrix() = default;
    explicit HermMatrix(const Matrix& a, double tol = kHermTol);
    static HermMatrix identity(int d);
    static HermMatrix zero(int d);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& mat() const { return mat_; }
    Complex operator()(int i, int j) const { return mat_(i, j); }

    HermMatrix operator+(const HermMatrix& o) const { return HermMatrix(mat_ + o.mat_); }
    HermMatrix operator-(const HermMatrix& o) const { return HermMatrix(mat_ - o.mat_); }
    HermMatrix operator*(double s) const { return HermMatrix(mat_ * s); }
    double trace() const { return mat_.trace().real(); }

  private:
    Matrix mat_;
};

inline HermMatrix operator*(double s, const HermMatrix& a) { return a * s; }

struct EigResult {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // unitary, columns match eigenvalues
};

// Hermitian eigendecomposition (tridiagonalization + implicit QR under the
// hood); deterministic for a given input.
EigResult eig_herm(const HermMatrix& a);
EigResult eig_herm(const Matrix& a);

double trace_norm(const Matrix& a);
inline double trace_norm(const HermMatrix& a) { return trace_norm(a.mat()); }

bool is_psd(const HermMatrix& a, double tol);
bool is_psd(const Matrix& a, double tol);

// PSD square root via the eigenbasis; negative eigenvalues within tol are
// clamped to zero.
Matrix psd_sqrt(const HermMatrix& a, double tol = 1e-12);

// [[Re A, -Im A], [Im A, Re A]]; A >= 0 iff embed(A) >= 0 and
// trace(embed(A)) = 2 Re trace(A).
RealMatrix herm_to_real_embed(const Matrix& a);
inline RealMatrix herm_to_real_embed(const HermMatrix& a) { return herm_to_real_embed(a.mat()); }

// Coordinates in the orthonormal basis {1_d/sqrt(d)} followed by the
// generalized Gell-Mann matrices; preserves inner products.
RealVector herm_basis_vec(const HermMatrix& a);
HermMatrix herm_basis_unvec(const RealVector& v, int d);

Matrix kron(const Matrix& a, const Matrix& b);

// Operator on C^n (x) H_d stored as an n x n grid of d x d blocks; the
// flattened nd x nd matrix is kept Hermitian.
class CqMatrix {
  public:
    CqMatrix(int n, int d) : n_(n), d_(d), flat_(Matrix::Zero(n * d, n * d)) {}
    explicit CqMatrix(int n, int d, const Matrix& flat);

    int n_blocks() const { return n_; }
    int block_dim() const { return d_; }
    const Matrix& flat() const { return flat_; }

    Matrix block(int j, int k) const { return flat_.block(j * d_, k * d_, d_, d_); }
    void set_block(int j, int k, const Matrix& b);

    // Tr over both indices of (M * this) for an n x n classical weight and a
    // d x d quantum factor, i.e. Tr[(W (x) rho) L].
    double weighted_trace(const RealMatrix& w, const Matrix& rho) const;

  private:
    int n_, d_;
    Matrix flat_;
};

}  // namespace qcrb
