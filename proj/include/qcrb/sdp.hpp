#pragma once

// Self-contained primal-dual interior-point solver for standard-form
// semidefinite programs over block real-symmetric PSD cones:
//
//   min <C, Y>  s.t.  <A_k, Y> = b_k,  Y >= 0 (block diagonal)
//
// Path-following with Nesterov-Todd scaling and a Mehrotra
// predictor-corrector; the Schur complement is formed densely from sparse
// constraint matrices and factored with LAPACK.

#include <iosfwd>
#include <vector>

#include "qcrb/linalg.hpp"

namespace qcrb {

// One entry of a symmetric constraint matrix; row <= col, the mirrored entry
// is implied.
struct SdpTriplet {
    int block = 0;
    int row = 0;
    int col = 0;
    double value = 0;
};

struct SdpConstraint {
    std::vector<SdpTriplet> entries;
    double rhs = 0;
};

struct SdpProblem {
    std::vector<int> block_dims;
    std::vector<RealMatrix> objective;  // one dense symmetric matrix per block
    std::vector<SdpConstraint> constraints;
    bool maximize = false;

    int total_dim() const;
    void check() const;  // throws on malformed input
};

enum class SdpStatus { optimal, max_iterations, infeasible_detected };

struct SdpOptions {
    double gap_tol = 1e-8;
    double feas_tol = 1e-8;
    int max_iter = 200;
    bool verbose = false;
};

struct SdpSolution {
    double primal_value = 0;
    double dual_value = 0;
    std::vector<RealMatrix> y_mat;  // primal blocks
    RealVector y;                   // dual multipliers
    double gap = 0;                 // |primal - dual| / (1 + |primal|)
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
    SdpStatus status = SdpStatus::max_iterations;
};

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

// Plain-text sparse triplet dump (block, i, j, value per line) for
// cross-checking against external tools.
void dump_problem(const SdpProblem& p, std::ostream& os);

}  // namespace qcrb
