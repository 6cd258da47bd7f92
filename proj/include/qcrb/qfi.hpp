#pragma once

// SLD and RLD logarithmic-derivative operators and their quantum Fisher
// information matrices.

#include <vector>

#include "qcrb/model.hpp"

namespace qcrb {

struct QfiMatrices {
    RealMatrix j_sld;               // real symmetric PSD
    Matrix j_rld;                   // complex Hermitian
    std::vector<HermMatrix> l_sld;  // 2 d_j rho = L rho + rho L
    std::vector<Matrix> l_rld;      // d_j rho = rho L (generally non-Hermitian)
};

QfiMatrices sld_rld(const StatModel& m);

}  // namespace qcrb
