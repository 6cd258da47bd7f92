#pragma once

// The bound catalog: closed-form SLD/RLD/GMCRB, SDP-backed HCRB and NHCRB,
// analytic special-case values, primal/dual certificates for the
// maximally-mixed solution, the commutator upper bound on the NHCRB, and the
// most-informative-bound feasible-point machinery.

#include <optional>
#include <vector>

#include "qcrb/bound_report.hpp"
#include "qcrb/povm.hpp"
#include "qcrb/qfi.hpp"
#include "qcrb/sdp_builders.hpp"

namespace qcrb {

BoundReport sld_crb(const StatModel& m);
BoundReport rld_crb(const StatModel& m);

// (Tr J_SLD^{-1/2})^2 / (k (d-1)); additive over simultaneously measured
// copies, hence the 1/k.
BoundReport gmcrb(const StatModel& m, int copies = 1);

BoundReport hcrb(const StatModel& m, const SdpOptions& opts = {});
BoundReport nhcrb(const StatModel& m, const SdpOptions& opts = {});

// min over V real symmetric >= Z[X] of Tr[W V] evaluated in closed form;
// valid only when the LUB operators are unique. Used as an independent check
// of the HCRB SDP.
double hcrb_closed_form_unique(const StatModel& m);

struct SuzukiReport {
    double value = 0;     // Tr Re Z[X] + sum_jk |rho [X_j, X_k]|_1
    double n_c_sld = 0;   // n * C_SLD, the parameter-count chain bound
};

// Commutator upper bound on the NHCRB at a given LUB choice (default: the
// Tr[W Z]-optimal member of the family).
SuzukiReport nhcrb_upper_suzuki(const StatModel& m,
                                const std::vector<HermMatrix>* x_choice = nullptr);

// X minimizing Tr[W Re Z[X]] over the LUB family.
std::vector<HermMatrix> sld_optimal_lub(const StatModel& m);

struct MmAnalytic {
    double hcrb = 0;         // n/d
    double nhcrb_upper = 0;  // n(d+1)/d
    bool nhcrb_exact = false;  // equality holds at n = d^2 - 1
};
MmAnalytic analytic_mm(int d, int n);

struct RhoMaxAnalytic {
    double hcrb = 0;
    double nhcrb = 0;
};
RhoMaxAnalytic analytic_rho_max(int d, double p);

BoundReport hcrb_lower_purity(const StatModel& m);  // d - P
BoundReport nhcrb_upper_mm(const StatModel& m);     // d^2 + d - 1 - P

// (d^2 + d - 1 - P) / (d - P), at most d + 2.
double enhancement_cap(int d, double state_purity);

struct CertificateReport {
    int d = 0;
    double primal_value = 0;        // Tr[(1 (x) rho_m) L*]
    double dual_value = 0;          // sum_k y*_k c_k
    double primal_min_eig = 0;      // min eig of L* - Lambda Lambda^T
    double dual_min_eig = 0;        // min eig of the dual slack matrix
    double n_spectrum_resid = 0;    // N spectrum distance from {0, 2}
    double m_spectrum_resid = 0;    // M spectrum distance from {0, 2}
    bool pass = false;
};

// Closed-form primal/dual optimality certificates for the full GMM model at
// the maximally-mixed state.
CertificateReport verify_mm_certificates(int d);

// Evaluates the feasible point X_sol of the most-informative bound's conic
// program; the value n(d+1)/d - theta^T theta upper-bounds the bound itself.
BoundReport micrb_feasible(const StatModel& m);

struct SeparabilityReport {
    double xi_residual = 0;          // least-squares residual of X_j on the SIC
    double constrained_block_resid = 0;  // identity and X blocks of the reconstruction
    double objective_resid = 0;      // reconstruction objective vs n(d+1)/d
    double feasibility_min_eig = 0;  // min eig of L_rec - X X^T
    double xi_min_trace = 0;         // min_l Tr Xi_l (always >= 1)
    double lstar_block_deviation = 0;  // reconstruction L vs the closed-form L*
    bool pass = false;
};

// Reconstructs a separable optimal solution sum_l Xi_l (x) Pi_l from the SIC
// estimator coefficients and checks it against X_sol. The optimal argument is
// degenerate: the reconstruction agrees with X_sol on every constrained block
// and in objective value, while its L part is a different optimal argument
// than the closed-form L*; lstar_block_deviation records that distance.
SeparabilityReport verify_xsol_separable(int d, const Povm& sic);

// Ordering-chain helper: all bounds of interest for one model.
struct BoundSet {
    double sld = 0, rld = 0, hcrb = 0, nhcrb = 0, gmcrb = 0;
    double hcrb_gap = 0, nhcrb_gap = 0;
};
BoundSet compute_bound_set(const StatModel& m, const SdpOptions& opts = {});

}  // namespace qcrb
