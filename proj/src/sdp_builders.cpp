#include "qcrb/sdp_builders.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace qcrb {

namespace {

// One entry of a complex Hermitian functional F (p <= q, F_qp implied);
// contributes 2 Re(conj(v) Y_pq) to Tr(F Y).
struct FEntry {
    int p, q;
    Complex v;
};

// Append embed(F)/2 to a constraint so that Tr(A y_embedded) = Re Tr(F Y).
void add_herm_functional(SdpConstraint& c, int cdim, const std::vector<FEntry>& f) {
    for (const auto& e : f) {
        const double re = 0.5 * e.v.real();
        const double im = 0.5 * e.v.imag();
        if (e.p == e.q) {
            if (re != 0) {
                c.entries.push_back({0, e.p, e.p, re});
                c.entries.push_back({0, cdim + e.p, cdim + e.p, re});
            }
        } else {
            if (re != 0) {
                c.entries.push_back({0, e.p, e.q, re});
                c.entries.push_back({0, cdim + e.p, cdim + e.q, re});
            }
            if (im != 0) {
                c.entries.push_back({0, e.p, cdim + e.q, -im});
                c.entries.push_back({0, e.q, cdim + e.p, im});
            }
        }
    }
}

// Functional picking Re Y_pq (v = 1/2) or Im Y_pq (v = i/2).
FEntry real_part(int p, int q) { return {p, q, Complex(0.5, 0)}; }
FEntry imag_part(int p, int q) { return {p, q, Complex(0, 0.5)}; }

void push_constraint(SdpProblem& prob, int cdim, const std::vector<FEntry>& f, double rhs) {
    SdpConstraint c;
    c.rhs = rhs;
    add_herm_functional(c, cdim, f);
    prob.constraints.push_back(std::move(c));
}

// Pin a d x d sub-block starting at complex offset (r0, c0) to the Hermitian
// matrix target; emits d^2 real constraints.
void pin_hermitian_block(SdpProblem& prob, int cdim, int r0, int c0, const Matrix& target) {
    const int d = static_cast<int>(target.rows());
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            push_constraint(prob, cdim, {real_part(r0 + a, c0 + b)}, target(a, b).real());
            if (a != b)
                push_constraint(prob, cdim, {imag_part(r0 + a, c0 + b)}, target(a, b).imag());
        }
}

// Dense Hermitian functional Re Tr(F B) on the block at complex offset
// (r0, c0), where B is the block and F a Hermitian d x d matrix: the carrier
// matrix has F/2 at (r0..,c0..) and F/2 mirrored, so every entry pair (a,b)
// maps to one FEntry with value F(b,a)/... Tr(F B) = sum_ab F_ab B_ba.
std::vector<FEntry> block_trace_functional(int r0, int c0, const Matrix& f) {
    const int d = static_cast<int>(f.rows());
    std::vector<FEntry> out;
    out.reserve(d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            // carrier entry at complex index (r0+a, c0+b) = conj(F_ab)/... we
            // need 2 Re(conj(v) B_ab) summed = Re Tr(F B) = Re sum F_ba B_ab,
            // so v = F_ba / 2, doubling cancels the half.
            Complex v = 0.5 * f(b, a);
            if (v != Complex(0, 0)) out.push_back({r0 + a, c0 + b, v});
        }
    return out;
}

RealMatrix embed_half(const Matrix& c) { return 0.5 * herm_to_real_embed(c); }

Matrix weight_kron_rho(const StatModel& m) {
    Matrix w = m.weight.cast<Complex>();
    return kron(w, m.rho.mat());
}

}  // namespace

Matrix embedded_to_complex(const RealMatrix& y) {
    const int p = static_cast<int>(y.rows()) / 2;
    Matrix out =
        0.5 * (y.topLeftCorner(p, p) + y.bottomRightCorner(p, p)).cast<Complex>();
    out += Complex(0, 0.5) *
           (y.bottomLeftCorner(p, p) - y.topRightCorner(p, p)).cast<Complex>();
    return out;
}

BuiltSdp build_nhcrb(const StatModel& m) {
    m.validate();
    LubFamily lub = solve_lub(m);
    const int n = m.n_params, d = m.dim;
    const int cdim = (n + 1) * d;

    BuiltSdp built;
    built.form = BuiltSdp::Form::nhcrb_full;
    built.n = n;
    built.d = d;
    built.complex_dim = cdim;

    SdpProblem& prob = built.problem;
    prob.block_dims = {2 * cdim};

    Matrix cobj = Matrix::Zero(cdim, cdim);
    cobj.topLeftCorner(n * d, n * d) = weight_kron_rho(m);
    prob.objective = {embed_half(cobj)};

    auto idx = [d](int blk, int a) { return blk * d + a; };

    // corner block fixed to the identity
    pin_hermitian_block(prob, cdim, n * d, n * d, Matrix::Identity(d, d));

    // block transpose symmetry: each off-diagonal L block Hermitian
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) {
                    if (a != b) {
                        push_constraint(prob, cdim,
                                        {real_part(idx(j, a), idx(k, b)),
                                         {idx(j, b), idx(k, a), Complex(-0.5, 0)}},
                                        0.0);
                        push_constraint(prob, cdim,
                                        {imag_part(idx(j, a), idx(k, b)),
                                         imag_part(idx(j, b), idx(k, a))},
                                        0.0);
                    } else {
                        push_constraint(prob, cdim, {imag_part(idx(j, a), idx(k, a))}, 0.0);
                    }
                }

    // X blocks: Hermitian and locally unbiased
    for (int j = 0; j < n; ++j) {
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                if (a != b) {
                    push_constraint(prob, cdim,
                                    {real_part(idx(j, a), idx(n, b)),
                                     {idx(j, b), idx(n, a), Complex(-0.5, 0)}},
                                    0.0);
                    push_constraint(prob, cdim,
                                    {imag_part(idx(j, a), idx(n, b)),
                                     imag_part(idx(j, b), idx(n, a))},
                                    0.0);
                } else {
                    push_constraint(prob, cdim, {imag_part(idx(j, a), idx(n, a))}, 0.0);
                }
            }
        push_constraint(prob, cdim, block_trace_functional(j * d, n * d, m.rho.mat()),
                        m.theta_star[j]);
        for (int k = 0; k < n; ++k)
            push_constraint(prob, cdim,
                            block_trace_functional(j * d, n * d, m.derivs[k].mat()),
                            k == j ? 1.0 : 0.0);
    }

    (void)lub;  // LUB freedom lives inside the PSD variable
    return built;
}

BuiltSdp build_nhcrb_reduced(const StatModel& m) {
    m.validate();
    LubFamily lub = solve_lub(m);
    if (!lub.unique)
        throw InvalidStateError("build_nhcrb_reduced: LUB operators are not unique");
    const int n = m.n_params, d = m.dim;
    const int cdim = n * d;

    BuiltSdp built;
    built.form = BuiltSdp::Form::nhcrb_reduced;
    built.n = n;
    built.d = d;
    built.complex_dim = cdim;

    SdpProblem& prob = built.problem;
    prob.block_dims = {2 * cdim};
    prob.objective = {embed_half(weight_kron_rho(m))};

    const auto& x = lub.particular;
    // value offset: Tr[(W (x) rho) X X^T]
    double offset = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (m.weight(j, k) == 0.0) continue;
            offset += m.weight(j, k) * (m.rho.mat() * x[k].mat() * x[j].mat()).trace().real();
        }
    built.value_offset = offset;

    auto idx = [d](int blk, int a) { return blk * d + a; };

    // anti-Hermitian part of Z block (j,k) pinned to -[X_j, X_k]/2
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            Matrix comm = x[j].mat() * x[k].mat() - x[k].mat() * x[j].mat();
            Matrix target = -0.5 * comm;
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) {
                    if (a != b) {
                        push_constraint(prob, cdim,
                                        {real_part(idx(j, a), idx(k, b)),
                                         {idx(j, b), idx(k, a), Complex(-0.5, 0)}},
                                        2.0 * target(a, b).real());
                        push_constraint(prob, cdim,
                                        {imag_part(idx(j, a), idx(k, b)),
                                         imag_part(idx(j, b), idx(k, a))},
                                        2.0 * target(a, b).imag());
                    } else {
                        push_constraint(prob, cdim, {imag_part(idx(j, a), idx(k, a))},
                                        target(a, a).imag());
                    }
                }
        }
    return built;
}

BuiltSdp build_hcrb(const StatModel& m) {
    m.validate();
    LubFamily lub = solve_lub(m);
    const int n = m.n_params, d = m.dim;
    const int dd = d * d;
    const int cdim = n + dd;
    const int q = static_cast<int>(lub.null_basis.size());

    BuiltSdp built;
    built.form = BuiltSdp::Form::hcrb;
    built.n = n;
    built.d = d;
    built.complex_dim = cdim;

    SdpProblem& prob = built.problem;
    prob.block_dims = {2 * cdim};

    Matrix cobj = Matrix::Zero(cdim, cdim);
    cobj.topLeftCorner(n, n) = m.weight.cast<Complex>();
    prob.objective = {embed_half(cobj)};

    // V real symmetric
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            push_constraint(prob, cdim, {imag_part(a, b)}, 0.0);

    // corner identity on the d^2 space
    pin_hermitian_block(prob, cdim, n, n, Matrix::Identity(dd, dd));

    const Matrix sq = psd_sqrt(m.rho);
    auto col_vec = [&](const Matrix& xop) {
        Matrix prod = xop * sq;
        Eigen::VectorXcd v(dd);
        int t = 0;
        for (int cc = 0; cc < d; ++cc)
            for (int rr = 0; rr < d; ++rr) v[t++] = prod(rr, cc);
        return v;
    };

    // R-block columns confined to the affine hull of {vec(X_j sqrt(rho))}
    RealMatrix dirs(2 * dd, std::max(q, 1));
    for (int t = 0; t < q; ++t) {
        Eigen::VectorXcd w = col_vec(lub.null_basis[t].mat());
        dirs.col(t).head(dd) = w.real();
        dirs.col(t).tail(dd) = w.imag();
    }
    RealMatrix complement;
    if (q == 0) {
        complement = RealMatrix::Identity(2 * dd, 2 * dd);
    } else {
        Eigen::JacobiSVD<RealMatrix> svd(dirs, Eigen::ComputeFullU);
        complement = svd.matrixU().rightCols(2 * dd - q);
    }

    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd r0 = col_vec(lub.particular[j].mat());
        for (int t = 0; t < complement.cols(); ++t) {
            std::vector<FEntry> f;
            double rhs = 0;
            for (int a = 0; a < dd; ++a) {
                const double alpha = complement(a, t);
                const double beta = complement(dd + a, t);
                if (alpha == 0 && beta == 0) continue;
                // Y_(j, n+a) = conj(R_(a,j)): Re picks Re r, Im picks -Im r
                f.push_back({j, n + a, Complex(0.5 * alpha, -0.5 * beta)});
                rhs += alpha * r0[a].real() + beta * r0[a].imag();
            }
            if (!f.empty()) push_constraint(prob, cdim, f, rhs);
        }
    }
    return built;
}

std::vector<HermMatrix> recover_x(const BuiltSdp& built, const SdpSolution& sol,
                                  const StatModel& m) {
    if (built.form == BuiltSdp::Form::nhcrb_reduced || built.form == BuiltSdp::Form::hcrb) {
        LubFamily lub = solve_lub(m);
        if (built.form == BuiltSdp::Form::nhcrb_reduced) return lub.particular;
        // HCRB: read the R block back and project onto the family
        Matrix y = embedded_to_complex(sol.y_mat.at(0));
        const int n = built.n, d = built.d, dd = d * d;
        const Matrix sq_inv = [&] {
            EigResult e = eig_herm(m.rho);
            RealVector w = e.eigenvalues;
            for (int i = 0; i < w.size(); ++i) w[i] = 1.0 / std::sqrt(std::max(w[i], 1e-300));
            return Matrix(e.eigenvectors * w.asDiagonal() * e.eigenvectors.adjoint());
        }();
        std::vector<HermMatrix> out;
        for (int j = 0; j < n; ++j) {
            Matrix prod(d, d);
            int t = 0;
            for (int cc = 0; cc < d; ++cc)
                for (int rr = 0; rr < d; ++rr) prod(rr, cc) = std::conj(y(j, n + t)), ++t;
            Matrix x = prod * sq_inv;
            out.emplace_back(0.5 * (x + x.adjoint()));
        }
        return out;
    }
    Matrix y = embedded_to_complex(sol.y_mat.at(0));
    const int n = built.n, d = built.d;
    std::vector<HermMatrix> out;
    for (int j = 0; j < n; ++j) {
        Matrix b = y.block(j * d, n * d, d, d);
        out.emplace_back(0.5 * (b + b.adjoint()));
    }
    return out;
}

EstimatorExtraction extract_estimator(const std::vector<HermMatrix>& x_ops,
                                      const std::vector<HermMatrix>& povm_elements) {
    const int n = static_cast<int>(x_ops.size());
    const int mm = static_cast<int>(povm_elements.size());
    if (n == 0 || mm == 0) throw DimensionError("extract_estimator: empty input");
    RealMatrix gram(mm, mm);
    for (int a = 0; a < mm; ++a)
        for (int b = 0; b < mm; ++b)
            gram(a, b) = (povm_elements[a].mat() * povm_elements[b].mat()).trace().real();
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(gram);

    EstimatorExtraction out;
    out.xi = RealMatrix(n, mm);
    out.residual = 0;
    for (int j = 0; j < n; ++j) {
        RealVector rhs(mm);
        for (int l = 0; l < mm; ++l)
            rhs[l] = (x_ops[j].mat() * povm_elements[l].mat()).trace().real();
        RealVector xi = cod.solve(rhs);
        out.xi.row(j) = xi.transpose();
        Matrix rec = Matrix::Zero(x_ops[j].dim(), x_ops[j].dim());
        for (int l = 0; l < mm; ++l) rec += xi[l] * povm_elements[l].mat();
        out.residual = std::max(out.residual, (rec - x_ops[j].mat()).cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace qcrb
