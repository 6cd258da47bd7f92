#pragma once

// Local statistical models: the true state, its parameter derivatives, an
// optional weight matrix, and the true parameter values. Includes the named
// model families from the estimation-theory analysis and the solver for the
// locally-unbiased-operator constraints.

#include <optional>
#include <string>
#include <vector>

#include "qcrb/gellmann.hpp"
#include "qcrb/linalg.hpp"

namespace qcrb {

struct StatModel {
    int dim = 0;
    int n_params = 0;
    HermMatrix rho;
    std::vector<HermMatrix> derivs;
    RealMatrix weight;      // n x n, symmetric PSD; identity by default
    RealVector theta_star;  // enters bounds only through -theta^T W theta

    // Throws InvalidStateError naming the first violated invariant.
    void validate() const;

    double theta_correction() const { return theta_star.dot(weight * theta_star); }
};

double purity(const StatModel& m);

StatModel gmm_model(int d, const RealVector& theta);
StatModel gmm_subset_model(int d, const std::vector<int>& index_set, const RealVector& theta_k);

// Replace derivs by B_j = sum_k eta_jk l_k and map theta' = eta theta;
// eta must be orthogonal and the model full-parameter.
StatModel onb_rotate(const StatModel& m, const RealMatrix& eta);

// rho_max(p) = p |+><+| + (1-p) 1/d with the full GMM derivative set.
StatModel depolarized_plus_model(int d, double p);

// Classical diagonal minimizer states: branch r has eigenvalues
// (p, ..., p, 1-(r-1)p) on the first r levels, p in [1/r, 1/(r-1)],
// regularized as (1-eps) rho + eps 1/d.
StatModel rank_deficient_min_model(int d, int branch, double p, double eps = 1e-6);

StatModel tensor_copies(const StatModel& m, int k);

struct LubFamily {
    std::vector<HermMatrix> particular;  // minimum-norm solution, one per parameter
    std::vector<HermMatrix> null_basis;  // shared deformation directions per parameter
    bool unique = false;

    // Max violation of Tr(rho X_j) = theta_j and Tr(d_k rho X_j) = delta_jk.
    double residual = 0;
};

LubFamily solve_lub(const StatModel& m);

// JSON model exchange format:
// {"d":., "n":., "rho":[[re,im],...], "derivs":[[[re,im],...],...],
//  "weight":[...], "theta_star":[...]} with row-major matrices.
StatModel model_from_json(const std::string& text);
std::string model_to_json(const StatModel& m);

}  // namespace qcrb
