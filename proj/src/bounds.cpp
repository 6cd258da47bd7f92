#include "qcrb/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace qcrb {

const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::sld: return "SLD";
        case BoundKind::rld: return "RLD";
        case BoundKind::hcrb: return "HCRB";
        case BoundKind::nhcrb: return "NHCRB";
        case BoundKind::gmcrb: return "GMCRB";
        case BoundKind::nhcrb_upper_suzuki: return "NHCRB_upper_suzuki";
        case BoundKind::micrb_upper: return "MICRB_upper";
        case BoundKind::hcrb_lower: return "HCRB_lower";
        case BoundKind::nhcrb_upper_mm: return "NHCRB_upper_mm";
        case BoundKind::classical: return "classical";
    }
    return "?";
}

const char* to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::closed_form: return "closed-form";
        case BoundMethod::sdp: return "sdp";
        case BoundMethod::feasible_point: return "feasible-point";
        case BoundMethod::inequality: return "inequality";
    }
    return "?";
}

std::string BoundReport::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["value"] = value;
    j["method"] = to_string(method);
    j["gap"] = gap;
    j["theta_correction"] = theta_correction;
    j["residuals"] = residuals;
    return j.dump();
}

namespace {

RealMatrix real_sym_inverse(const RealMatrix& a, const char* what) {
    Eigen::LDLT<RealMatrix> ldlt(a);
    if (ldlt.info() != Eigen::Success || (a.diagonal().array() <= 0).any())
        throw InvalidStateError(std::string(what) + ": matrix not invertible");
    RealMatrix inv = ldlt.solve(RealMatrix::Identity(a.rows(), a.rows()));
    double cond_check = (a * inv - RealMatrix::Identity(a.rows(), a.rows())).cwiseAbs().maxCoeff();
    if (!(cond_check < 1e-6))
        throw InvalidStateError(std::string(what) + ": matrix numerically singular");
    return inv;
}

RealMatrix sym_sqrt_inv(const RealMatrix& a, const char* what) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
    if (es.eigenvalues().minCoeff() <= 0)
        throw InvalidStateError(std::string(what) + ": matrix not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

BoundReport sld_crb(const StatModel& m) {
    QfiMatrices q = sld_rld(m);
    BoundReport rep;
    rep.kind = BoundKind::sld;
    rep.method = BoundMethod::closed_form;
    rep.value = (m.weight * real_sym_inverse(q.j_sld, "sld_crb")).trace();
    return rep;
}

BoundReport rld_crb(const StatModel& m) {
    QfiMatrices q = sld_rld(m);
    Eigen::FullPivLU<Matrix> lu(q.j_rld);
    if (!lu.isInvertible()) throw InvalidStateError("rld_crb: RLD QFI singular");
    Matrix jinv = lu.inverse();
    RealMatrix re = jinv.real(), im = jinv.imag();
    RealMatrix wsq = RealMatrix::Identity(m.n_params, m.n_params);
    {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(m.weight);
        wsq = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
    }
    BoundReport rep;
    rep.kind = BoundKind::rld;
    rep.method = BoundMethod::closed_form;
    rep.value = (m.weight * re).trace() +
                trace_norm(Matrix((wsq * im * wsq).cast<Complex>() * Complex(0, 1)));
    return rep;
}

BoundReport gmcrb(const StatModel& m, int copies) {
    if (copies < 1) throw DimensionError("gmcrb: copies must be >= 1");
    QfiMatrices q = sld_rld(m);
    const double tr = sym_sqrt_inv(q.j_sld, "gmcrb").trace();
    BoundReport rep;
    rep.kind = BoundKind::gmcrb;
    rep.method = BoundMethod::closed_form;
    rep.value = tr * tr / (double(copies) * (m.dim - 1));
    return rep;
}

BoundReport hcrb(const StatModel& m, const SdpOptions& opts) {
    BuiltSdp built = build_hcrb(m);
    SdpSolution sol = solve(built.problem, opts);
    if (sol.status != SdpStatus::optimal)
        throw SolverFailure("hcrb: SDP did not reach optimality");
    BoundReport rep;
    rep.kind = BoundKind::hcrb;
    rep.method = BoundMethod::sdp;
    rep.theta_correction = m.theta_correction();
    rep.value = built.raw_value(sol) - rep.theta_correction;
    rep.gap = sol.gap;
    rep.residuals["primal_residual"] = sol.primal_residual;
    rep.residuals["dual_residual"] = sol.dual_residual;
    return rep;
}

BoundReport nhcrb(const StatModel& m, const SdpOptions& opts) {
    LubFamily lub = solve_lub(m);
    BuiltSdp built = lub.unique ? build_nhcrb_reduced(m) : build_nhcrb(m);
    SdpSolution sol = solve(built.problem, opts);
    if (sol.status != SdpStatus::optimal)
        throw SolverFailure("nhcrb: SDP did not reach optimality");
    BoundReport rep;
    rep.kind = BoundKind::nhcrb;
    rep.method = BoundMethod::sdp;
    rep.theta_correction = m.theta_correction();
    rep.value = built.raw_value(sol) - rep.theta_correction;
    rep.gap = sol.gap;
    rep.residuals["primal_residual"] = sol.primal_residual;
    rep.residuals["dual_residual"] = sol.dual_residual;
    return rep;
}

double hcrb_closed_form_unique(const StatModel& m) {
    LubFamily lub = solve_lub(m);
    if (!lub.unique) throw InvalidStateError("hcrb_closed_form_unique: LUB family not unique");
    const int n = m.n_params;
    Matrix z(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            z(j, k) = (m.rho.mat() * lub.particular[j].mat() * lub.particular[k].mat()).trace();
    RealMatrix wsq;
    {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(m.weight);
        wsq = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
    }
    Matrix zw = wsq.cast<Complex>() * z * wsq.cast<Complex>();
    return zw.real().trace() + trace_norm(Matrix(zw.imag().cast<Complex>() * Complex(0, 1))) -
           m.theta_correction();
}

std::vector<HermMatrix> sld_optimal_lub(const StatModel& m) {
    LubFamily lub = solve_lub(m);
    if (lub.unique) return lub.particular;
    const int n = m.n_params;
    const int q = static_cast<int>(lub.null_basis.size());
    // minimize Tr[W Re Z[X]] over X_j = X_j^0 + sum_t c_{jt} N_t:
    // quadratic in the nq coefficients with PSD Hessian.
    RealMatrix hess(n * q, n * q);
    RealVector grad(n * q);
    auto rtr = [&](const Matrix& a, const Matrix& b) {
        return (m.rho.mat() * a * b).trace().real();
    };
    for (int j = 0; j < n; ++j)
        for (int t = 0; t < q; ++t) {
            double g = 0;
            for (int k = 0; k < n; ++k)
                g += m.weight(j, k) * rtr(lub.null_basis[t].mat(), lub.particular[k].mat());
            grad[j * q + t] = 2.0 * g;
            for (int k = 0; k < n; ++k)
                for (int s = 0; s < q; ++s)
                    hess(j * q + t, k * q + s) =
                        2.0 * m.weight(j, k) * rtr(lub.null_basis[t].mat(), lub.null_basis[s].mat());
        }
    hess = 0.5 * (hess + hess.transpose()).eval();
    hess.diagonal().array() += 1e-12;
    RealVector c = -hess.ldlt().solve(grad);
    std::vector<HermMatrix> out;
    for (int j = 0; j < n; ++j) {
        Matrix x = lub.particular[j].mat();
        for (int t = 0; t < q; ++t) x += c[j * q + t] * lub.null_basis[t].mat();
        out.emplace_back(x);
    }
    return out;
}

SuzukiReport nhcrb_upper_suzuki(const StatModel& m, const std::vector<HermMatrix>* x_choice) {
    std::vector<HermMatrix> x = x_choice ? *x_choice : sld_optimal_lub(m);
    const int n = m.n_params;
    SuzukiReport rep;
    double trz = 0;
    for (int j = 0; j < n; ++j)
        trz += (m.rho.mat() * x[j].mat() * x[j].mat()).trace().real();
    double comm = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            Matrix c = m.rho.mat() * (x[j].mat() * x[k].mat() - x[k].mat() * x[j].mat());
            comm += trace_norm(c);
        }
    rep.value = trz + comm - m.theta_correction();
    rep.n_c_sld = n * sld_crb(m).value;
    return rep;
}

MmAnalytic analytic_mm(int d, int n) {
    if (n < 1 || n > d * d - 1) throw DimensionError("analytic_mm: n outside [1, d^2-1]");
    MmAnalytic out;
    out.hcrb = double(n) / d;
    out.nhcrb_upper = double(n) * (d + 1) / d;
    out.nhcrb_exact = (n == d * d - 1);
    return out;
}

RhoMaxAnalytic analytic_rho_max(int d, double p) {
    if (p < 0 || p > 1) throw InvalidStateError("analytic_rho_max: p outside [0,1]");
    RhoMaxAnalytic out;
    out.hcrb = double(d * d - 1) / d + p * (d - 1) - double(d - 1) / d * p * p;
    out.nhcrb = 0.5 * (d * d + 1) - 0.5 * (d * d - 4 * d + 5) * p * p +
                double(d * d * d + 2 * d * d - 3 * d - 2) / (2 * d) * std::sqrt(1 - p * p);
    return out;
}

BoundReport hcrb_lower_purity(const StatModel& m) {
    if (m.n_params != m.dim * m.dim - 1)
        throw InvalidStateError("hcrb_lower_purity: full-parameter model required");
    BoundReport rep;
    rep.kind = BoundKind::hcrb_lower;
    rep.method = BoundMethod::inequality;
    rep.value = m.dim - purity(m);
    return rep;
}

BoundReport nhcrb_upper_mm(const StatModel& m) {
    if (m.n_params != m.dim * m.dim - 1)
        throw InvalidStateError("nhcrb_upper_mm: full-parameter model required");
    BoundReport rep;
    rep.kind = BoundKind::nhcrb_upper_mm;
    rep.method = BoundMethod::inequality;
    rep.value = m.dim * m.dim + m.dim - 1 - purity(m);
    return rep;
}

double enhancement_cap(int d, double state_purity) {
    return (d * d + d - 1 - state_purity) / (d - state_purity);
}

CertificateReport verify_mm_certificates(int d) {
    if (d < 2 || d > 8) throw DimensionError("verify_mm_certificates: d must be in [2, 8]");
    GmmBasis basis = gmm_basis(d);
    const int n = basis.count();
    CertificateReport rep;
    rep.d = d;

    // primal candidate L*_jk = (d+1)/(d+2) ({l_j, l_k} + delta_jk 1)
    CqMatrix lstar(n, d);
    const double coef = double(d + 1) / (d + 2);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            Matrix acom = basis[j].mat() * basis[k].mat() + basis[k].mat() * basis[j].mat();
            Matrix blk = coef * (acom + (j == k ? 1.0 : 0.0) * Matrix::Identity(d, d));
            lstar.set_block(j, k, blk);
        }
    Matrix rho_m = Matrix::Identity(d, d) / double(d);
    rep.primal_value = lstar.weighted_trace(RealMatrix::Identity(n, n), rho_m);

    // L* - Lambda Lambda^T = coef (1 + N1 - N2), spectrum of N1 - N2 is +-1
    Matrix xx(n * d, n * d), n1(n * d, n * d), n2(n * d, n * d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Matrix jk = basis[j].mat() * basis[k].mat();
            Matrix kj = basis[k].mat() * basis[j].mat();
            xx.block(j * d, k * d, d, d) = jk;
            n1.block(j * d, k * d, d, d) = kj;
            n2.block(j * d, k * d, d, d) = jk / double(d + 1);
        }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(lstar.flat() - xx),
                                                 Eigen::EigenvaluesOnly);
        rep.primal_min_eig = es.eigenvalues().minCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> en(
            Matrix(Matrix::Identity(n * d, n * d) + n1 - n2), Eigen::EigenvaluesOnly);
        double worst = 0;
        for (int i = 0; i < en.eigenvalues().size(); ++i) {
            double v = en.eigenvalues()[i];
            worst = std::max(worst, std::min(std::abs(v), std::abs(v - 2.0)));
        }
        rep.n_spectrum_resid = worst;
    }

    // dual slack: d (F_0 - sum y* F_k) has blocks
    //   (j,k):   delta_jk 1 + [l_j, l_k]
    //   (j,n):   -(d+1) l_j
    //   (n,n):   n(d+1)/d 1
    Matrix dual_slack = Matrix::Zero((n + 1) * d, (n + 1) * d);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            Matrix blk = basis[j].mat() * basis[k].mat() - basis[k].mat() * basis[j].mat();
            if (j == k) blk += Matrix::Identity(d, d);
            dual_slack.block(j * d, k * d, d, d) = blk;
        }
        dual_slack.block(j * d, n * d, d, d) = -double(d + 1) * basis[j].mat();
        dual_slack.block(n * d, j * d, d, d) = -double(d + 1) * basis[j].mat();
    }
    dual_slack.block(n * d, n * d, d, d) =
        double(n) * (d + 1) / d * Matrix::Identity(d, d);
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(dual_slack, Eigen::EigenvaluesOnly);
        rep.dual_min_eig = es.eigenvalues().minCoeff();
    }

    // Schur reduction of the dual slack: M = 1 - (M1 + M2), spectrum {0, 2}
    Matrix m1(n * d, n * d), m2(n * d, n * d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            m1.block(j * d, k * d, d, d) =
                basis[j].mat() * basis[k].mat() / double(d - 1);
            m2.block(j * d, k * d, d, d) = basis[k].mat() * basis[j].mat();
        }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            Matrix(Matrix::Identity(n * d, n * d) - m1 - m2), Eigen::EigenvaluesOnly);
        double worst = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            double v = es.eigenvalues()[i];
            worst = std::max(worst, std::min(std::abs(v), std::abs(v - 2.0)));
        }
        rep.m_spectrum_resid = worst;
    }

    // dual objective: the closed-form multipliers give n(d+1)/d exactly
    rep.dual_value = double(n) * (d + 1) / d;

    rep.pass = rep.primal_min_eig > -1e-10 && rep.dual_min_eig > -1e-9 &&
               rep.n_spectrum_resid < 1e-9 && rep.m_spectrum_resid < 1e-9 &&
               std::abs(rep.primal_value - rep.dual_value) < 1e-10;
    return rep;
}

BoundReport micrb_feasible(const StatModel& m) {
    const int d = m.dim, n = m.n_params;
    if (n != d * d - 1) throw InvalidStateError("micrb_feasible: full-parameter model required");
    // X_sol = [[1, X^T], [X, L*]] built from the model derivatives, which
    // must form an orthonormal traceless basis (GMM or any rotation of it).
    if ((m.weight - RealMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidStateError("micrb_feasible: identity weight required");
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            double g = (m.derivs[j].mat() * m.derivs[k].mat()).trace().real();
            if (std::abs(g - (j == k ? 1.0 : 0.0)) > 1e-10)
                throw InvalidStateError("micrb_feasible: derivatives are not orthonormal");
        }

    const double coef = double(d + 1) / (d + 2);
    const int big = (n + 1) * d;
    Matrix xsol = Matrix::Zero(big, big);
    xsol.block(0, 0, d, d) = Matrix::Identity(d, d);
    for (int j = 0; j < n; ++j) {
        xsol.block((j + 1) * d, 0, d, d) = m.derivs[j].mat();
        xsol.block(0, (j + 1) * d, d, d) = m.derivs[j].mat();
        for (int k = 0; k < n; ++k) {
            Matrix acom =
                m.derivs[j].mat() * m.derivs[k].mat() + m.derivs[k].mat() * m.derivs[j].mat();
            xsol.block((j + 1) * d, (k + 1) * d, d, d) =
                coef * (acom + (j == k ? 1.0 : 0.0) * Matrix::Identity(d, d));
        }
    }

    BoundReport rep;
    rep.kind = BoundKind::micrb_upper;
    rep.method = BoundMethod::feasible_point;
    rep.theta_correction = m.theta_correction();

    // C1: partial trace over the classical index of (|0><0| (x) 1) X = 1
    rep.residuals["c1"] =
        (xsol.block(0, 0, d, d) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    // C2: symmetrized first-row blocks against the derivatives
    double c2 = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Complex t = 0.5 * ((m.derivs[k].mat() * xsol.block((j + 1) * d, 0, d, d)).trace() +
                               (m.derivs[k].mat() * xsol.block(0, (j + 1) * d, d, d)).trace());
            c2 = std::max(c2, std::abs(t - Complex(j == k ? 1.0 : 0.0, 0)));
        }
    rep.residuals["c2"] = c2;
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(xsol, Eigen::EigenvaluesOnly);
        rep.residuals["min_eig"] = es.eigenvalues().minCoeff();
    }

    double value = 0;
    for (int j = 0; j < n; ++j)
        value += (m.rho.mat() * xsol.block((j + 1) * d, (j + 1) * d, d, d)).trace().real();
    rep.value = value - rep.theta_correction;
    return rep;
}

SeparabilityReport verify_xsol_separable(int d, const Povm& sic) {
    if (sic.dim != d) throw DimensionError("verify_xsol_separable: POVM dimension mismatch");
    GmmBasis basis = gmm_basis(d);
    const int n = basis.count();
    SeparabilityReport rep;

    EstimatorExtraction ext = extract_estimator(basis.matrices, sic.elements);
    rep.xi_residual = ext.residual;

    const int mm = sic.outcomes();
    // reconstruction sum_l Xi_l (x) Pi_l with Xi_l = (1, xi_1l, ..) outer
    const int big = (n + 1) * d;
    Matrix rec = Matrix::Zero(big, big);
    rep.xi_min_trace = std::numeric_limits<double>::infinity();
    for (int l = 0; l < mm; ++l) {
        RealVector v(n + 1);
        v[0] = 1.0;
        for (int j = 0; j < n; ++j) v[j + 1] = ext.xi(j, l);
        RealMatrix xi_l = v * v.transpose();
        rep.xi_min_trace = std::min(rep.xi_min_trace, xi_l.trace());
        rec += kron(xi_l.cast<Complex>(), sic.elements[l].mat());
    }

    // constrained blocks: identity corner and the X row/column
    double blk = (rec.block(0, 0, d, d) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j)
        blk = std::max(blk, (rec.block((j + 1) * d, 0, d, d) - basis[j].mat())
                                .cwiseAbs()
                                .maxCoeff());
    rep.constrained_block_resid = blk;

    // objective of the reconstruction at rho_m vs n(d+1)/d
    double obj = 0;
    for (int j = 0; j < n; ++j)
        obj += rec.block((j + 1) * d, (j + 1) * d, d, d).trace().real() / d;
    rep.objective_resid = std::abs(obj - double(n) * (d + 1) / d);

    // the L part must stay NHCRB-feasible: L_rec >= Lambda Lambda^T
    Matrix lrec = rec.block(d, d, n * d, n * d);
    Matrix xx(n * d, n * d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            xx.block(j * d, k * d, d, d) = basis[j].mat() * basis[k].mat();
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(lrec - xx), Eigen::EigenvaluesOnly);
        rep.feasibility_min_eig = es.eigenvalues().minCoeff();
    }

    // distance to the closed-form L*: nonzero, the optimum is degenerate
    const double coef = double(d + 1) / (d + 2);
    double dev = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Matrix acom = basis[j].mat() * basis[k].mat() + basis[k].mat() * basis[j].mat();
            Matrix lstar = coef * (acom + (j == k ? 1.0 : 0.0) * Matrix::Identity(d, d));
            dev = std::max(dev,
                           (lrec.block(j * d, k * d, d, d) - lstar).cwiseAbs().maxCoeff());
        }
    rep.lstar_block_deviation = dev;

    rep.pass = rep.xi_residual < 1e-8 && rep.constrained_block_resid < 1e-8 &&
               rep.objective_resid < 1e-8 && rep.feasibility_min_eig > -1e-9 &&
               rep.xi_min_trace >= 1.0 - 1e-12;
    return rep;
}

BoundSet compute_bound_set(const StatModel& m, const SdpOptions& opts) {
    BoundSet out;
    out.sld = sld_crb(m).value;
    out.rld = rld_crb(m).value;
    BoundReport h = hcrb(m, opts);
    BoundReport nh = nhcrb(m, opts);
    out.hcrb = h.value;
    out.nhcrb = nh.value;
    out.hcrb_gap = h.gap;
    out.nhcrb_gap = nh.gap;
    out.gmcrb = gmcrb(m).value;
    return out;
}

}  // namespace qcrb
