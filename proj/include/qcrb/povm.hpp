#pragma once

// POVMs: SIC construction from Weyl-Heisenberg fiducials, classical Fisher
// information, the Gill-Massar trace, and a local optimizer over rank-one
// informationally-complete POVMs.

#include <cstdint>
#include <string>
#include <vector>

#include "qcrb/bound_report.hpp"
#include "qcrb/model.hpp"

namespace qcrb {

struct Povm {
    int dim = 0;
    std::vector<HermMatrix> elements;

    int outcomes() const { return static_cast<int>(elements.size()); }
    // Throws InvalidStateError if elements are not PSD or do not sum to 1.
    void validate(double tol = 1e-10) const;
};

struct SicPovm : Povm {
    Eigen::VectorXcd fiducial;
    double overlap_residual = 0;  // max |Tr(P_a P_b) - 1/(d^2(d+1))|, a != b
};

// Weyl-Heisenberg covariant SIC POVM; d = 2 and 3 use exact fiducials, d in
// 4..8 ship numerically-found fiducials polished at construction time.
SicPovm sic_povm(int d);

// Classical Fisher information matrix of a POVM on a model; outcomes with
// probability below prob_floor are dropped (counted in dropped_outcomes).
RealMatrix cfi(const StatModel& m, const Povm& povm, double prob_floor = 1e-12,
               int* dropped_outcomes = nullptr);

BoundReport classical_crb(const StatModel& m, const Povm& povm);

// Tr[J_SLD^{-1} J]; at most d-1 for every POVM.
double gill_massar_check(const StatModel& m, const Povm& povm);

struct PovmOptResult {
    Povm povm;
    double trace_crb = 0;
    std::vector<double> history;  // objective per accepted iterate of best restart
    bool converged = false;
};

// Local minimizer of Tr[W J^-1] over rank-one m-outcome POVMs, parameterized
// by an unnormalized frame v_l with Pi_l = A^{-1/2} v_l v_l^dag A^{-1/2}.
PovmOptResult optimize_ic_povm(const StatModel& m, int outcomes, std::uint64_t seed,
                               int iters = 400, int restarts = 8);

Povm povm_from_json(const std::string& text);
std::string povm_to_json(const Povm& p);

// Fiducial data file: {"d":., "fiducial":[[re,im],...], "residual":.}
SicPovm sic_from_fiducial_json(const std::string& text);
std::string fiducial_to_json(const SicPovm& p);

}  // namespace qcrb
