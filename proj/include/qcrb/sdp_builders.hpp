#pragma once

// Assembly of the HCRB and NHCRB semidefinite programs from a StatModel.
// Complex Hermitian blocks are mapped onto the real symmetric cone with
// [[Re, -Im], [Im, Re]]; the trace doubling is compensated by halving the
// embedded objective and constraint coefficients.

#include <vector>

#include "qcrb/model.hpp"
#include "qcrb/sdp.hpp"

namespace qcrb {

struct BuiltSdp {
    enum class Form { hcrb, nhcrb_full, nhcrb_reduced };

    SdpProblem problem;
    Form form = Form::nhcrb_full;
    int n = 0;            // parameter count
    int d = 0;            // Hilbert dimension
    int complex_dim = 0;  // complex size of the single PSD block
    double value_offset = 0;

    // Raw bound value before the -theta^T W theta correction.
    double raw_value(const SdpSolution& sol) const { return sol.primal_value + value_offset; }
};

// HCRB: variables are the real symmetric n x n cost matrix V and the LUB
// deformation coordinates; V >= Z_theta[X] is encoded through the Schur
// block [[V, R^dag], [R, 1]] with R_:j = vec(X_j sqrt(rho)).
BuiltSdp build_hcrb(const StatModel& m);

// NHCRB: variables are the classical-quantum matrix L (n x n grid of d x d
// Hermitian blocks, symmetric under the block transpose) and the LUB
// operators; the PSD coupling [[L, X], [X^T, 1_d]] >= 0 enforces L >= X X^T.
BuiltSdp build_nhcrb(const StatModel& m);

// Equivalent reduced encoding Z = L - X X^T >= 0 for models whose LUB
// operators are unique; much smaller for full-parameter models.
BuiltSdp build_nhcrb_reduced(const StatModel& m);

// Recover the complex Hermitian matrix represented by an embedded block.
Matrix embedded_to_complex(const RealMatrix& y_embedded);

// Recover the LUB operators stored in a solved NHCRB program (full form
// keeps them in the coupling blocks; reduced form recomputes them from the
// model's unique solution).
std::vector<HermMatrix> recover_x(const BuiltSdp& built, const SdpSolution& sol,
                                  const StatModel& m);

struct EstimatorExtraction {
    RealMatrix xi;      // n x m
    double residual;    // max_j |X_j - sum_l xi_jl Pi_l|_inf
};

// Least-squares solve of X_j = sum_l xi_jl Pi_l over a candidate POVM.
EstimatorExtraction extract_estimator(const std::vector<HermMatrix>& x_ops,
                                      const std::vector<HermMatrix>& povm_elements);

}  // namespace qcrb
