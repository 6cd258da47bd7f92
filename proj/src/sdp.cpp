#include "qcrb/sdp.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace qcrb {

// OpenBLAS picks its kernel set from the environment before main() runs on
// some setups misdetecting virtualized CPUs; pin the AVX-512 kernels when the
// hardware supports them. Runs before the (statically linked) BLAS
// initializer; never overrides a user-provided choice.
__attribute__((constructor(101))) static void pin_blas_kernels() {
    if (__builtin_cpu_supports("avx512f")) setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
}

int SdpProblem::total_dim() const {
    int t = 0;
    for (int d : block_dims) t += d;
    return t;
}

void SdpProblem::check() const {
    if (block_dims.empty()) throw DimensionError("sdp: no blocks");
    for (int d : block_dims)
        if (d < 1) throw DimensionError("sdp: non-positive block dimension");
    if (objective.size() != block_dims.size())
        throw DimensionError("sdp: objective block count mismatch");
    for (size_t b = 0; b < block_dims.size(); ++b) {
        if (objective[b].rows() != block_dims[b] || objective[b].cols() != block_dims[b])
            throw DimensionError("sdp: objective block size mismatch");
        if ((objective[b] - objective[b].transpose()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(1.0, objective[b].cwiseAbs().maxCoeff()))
            throw InvalidStateError("sdp: objective block not symmetric");
    }
    if (constraints.empty()) throw DimensionError("sdp: no constraints");
    for (const auto& c : constraints) {
        if (!std::isfinite(c.rhs)) throw InvalidStateError("sdp: non-finite rhs");
        for (const auto& t : c.entries) {
            if (t.block < 0 || t.block >= static_cast<int>(block_dims.size()))
                throw DimensionError("sdp: triplet block out of range");
            if (t.row < 0 || t.col < t.row || t.col >= block_dims[t.block])
                throw DimensionError("sdp: triplet index out of range (need row <= col)");
        }
    }
}

namespace {

using Blocks = std::vector<RealMatrix>;

Blocks zero_blocks(const std::vector<int>& dims) {
    Blocks b;
    b.reserve(dims.size());
    for (int d : dims) b.emplace_back(RealMatrix::Zero(d, d));
    return b;
}

double inner(const Blocks& a, const Blocks& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i].array() * b[i].array()).sum();
    return s;
}

// <A_k, Y> for a triplet-form symmetric constraint.
double constraint_dot(const SdpConstraint& c, const Blocks& y) {
    double s = 0;
    for (const auto& t : c.entries) {
        double v = y[t.block](t.row, t.col);
        s += (t.row == t.col) ? t.value * v : 2.0 * t.value * v;
    }
    return s;
}

void accumulate_combination(const std::vector<SdpConstraint>& cons, const RealVector& w,
                            Blocks& out) {
    for (size_t k = 0; k < cons.size(); ++k) {
        const double wk = w[static_cast<Eigen::Index>(k)];
        if (wk == 0.0) continue;
        for (const auto& t : cons[k].entries) {
            out[t.block](t.row, t.col) += wk * t.value;
            if (t.row != t.col) out[t.block](t.col, t.row) += wk * t.value;
        }
    }
}

struct EigBlocks {
    Blocks sqrt;      // Y^{1/2}
    Blocks chol;      // lower Cholesky factor
    double min_eig = 0;
};

// Symmetric PSD square roots and Cholesky factors; throws on loss of
// positive definiteness.
EigBlocks factor_blocks(const Blocks& y, const char* name) {
    EigBlocks out;
    out.min_eig = std::numeric_limits<double>::infinity();
    for (const auto& blk : y) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(blk);
        if (es.info() != Eigen::Success) throw SolverFailure("sdp: eigensolver failure");
        double mn = es.eigenvalues().minCoeff();
        out.min_eig = std::min(out.min_eig, mn);
        if (mn <= 0)
            throw SolverFailure(std::string("sdp: numerical breakdown, ") + name +
                                " lost positive definiteness");
        out.sqrt.push_back(es.eigenvectors() *
                           es.eigenvalues().cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose());
        Eigen::LLT<RealMatrix> llt(blk);
        if (llt.info() != Eigen::Success)
            throw SolverFailure(std::string("sdp: Cholesky breakdown on ") + name);
        out.chol.push_back(RealMatrix(llt.matrixL()));
    }
    return out;
}

// Largest alpha in (0, cap] with M + alpha*D >= 0, via the spectrum of
// L^{-1} D L^{-T}.
double max_step(const Blocks& chol, const Blocks& dir, double cap) {
    double alpha = cap;
    for (size_t b = 0; b < chol.size(); ++b) {
        RealMatrix t = chol[b].triangularView<Eigen::Lower>().solve(dir[b]);
        RealMatrix m =
            chol[b].triangularView<Eigen::Lower>().solve(RealMatrix(t.transpose()));
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
        double mn = es.eigenvalues().minCoeff();
        if (mn < 0) alpha = std::min(alpha, -1.0 / mn);
    }
    return alpha;
}

// Dense Schur complement H_kl = sum_blocks Tr(A_k W A_l W), exploiting the
// sparsity of the constraint matrices: for each k, D_k = W A_k W is formed
// from the few rows/columns A_k touches, then dotted against the sparse A_l.
class SchurAssembler {
  public:
    SchurAssembler(const SdpProblem& p) : p_(p) {
        for (const auto& c : p.constraints) {
            // distinct (block,row) pairs touched by the full symmetric pattern
            std::vector<std::pair<int, int>> rows;
            for (const auto& t : c.entries) {
                rows.push_back({t.block, t.row});
                if (t.row != t.col) rows.push_back({t.block, t.col});
            }
            std::sort(rows.begin(), rows.end());
            rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
            rows_.push_back(std::move(rows));
        }
    }

    void assemble(const Blocks& w, RealMatrix& h) const {
        const int m = static_cast<int>(p_.constraints.size());
        for (int k = 0; k < m; ++k) {
            Blocks dk = apply_scaled(k, w);
            for (int l = 0; l <= k; ++l) {
                double s = 0;
                for (const auto& t : p_.constraints[l].entries) {
                    double v = dk[t.block](t.row, t.col);
                    s += (t.row == t.col) ? t.value * v : 2.0 * t.value * v;
                }
                h(k, l) = s;
                h(l, k) = s;
            }
        }
    }

  private:
    // W A_k W for sparse A_k: gather the touched columns of W, build the
    // corresponding rows of A_k W, multiply back.
    Blocks apply_scaled(int k, const Blocks& w) const {
        Blocks out = zero_blocks(p_.block_dims);
        const auto& rows = rows_[k];
        size_t i = 0;
        while (i < rows.size()) {
            int blk = rows[i].first;
            size_t j = i;
            while (j < rows.size() && rows[j].first == blk) ++j;
            const int nr = static_cast<int>(j - i);
            const int n = p_.block_dims[blk];
            RealMatrix rk = RealMatrix::Zero(nr, n);
            RealMatrix wc(n, nr);
            for (int r = 0; r < nr; ++r) wc.col(r) = w[blk].col(rows_[k][i + r].second);
            auto row_index = [&](int r) {
                for (int q = 0; q < nr; ++q)
                    if (rows_[k][i + q].second == r) return q;
                return -1;
            };
            for (const auto& t : p_.constraints[k].entries) {
                if (t.block != blk) continue;
                rk.row(row_index(t.row)) += t.value * w[blk].row(t.col);
                if (t.row != t.col) rk.row(row_index(t.col)) += t.value * w[blk].row(t.row);
            }
            out[blk].noalias() = wc * rk;
            i = j;
        }
        return out;
    }

    const SdpProblem& p_;
    std::vector<std::vector<std::pair<int, int>>> rows_;
};

struct CholeskyM {
    RealMatrix l;  // column-major lower factor as filled by dpotrf
    void factor(RealMatrix h) {
        const int m = static_cast<int>(h.rows());
        double ridge = 0;
        for (int attempt = 0; attempt < 3; ++attempt) {
            l = h;
            if (ridge > 0) l.diagonal().array() += ridge;
            int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', m, l.data(), m);
            if (info == 0) return;
            double scale = h.diagonal().cwiseAbs().maxCoeff();
            ridge = (ridge == 0) ? 1e-14 * std::max(scale, 1.0) : ridge * 100;
        }
        throw SolverFailure("sdp: Schur complement not positive definite");
    }
    RealVector solve(RealVector rhs) const {
        const int m = static_cast<int>(l.rows());
        int info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', m, 1, l.data(), m, rhs.data(), m);
        if (info != 0) throw SolverFailure("sdp: Schur solve failed");
        return rhs;
    }
};

}  // namespace

SdpSolution solve(const SdpProblem& input, const SdpOptions& opts) {
    input.check();

    SdpProblem p = input;  // local copy so maximize can flip the objective
    const double sign = input.maximize ? -1.0 : 1.0;
    if (input.maximize)
        for (auto& c : p.objective) c = -c;

    const int m = static_cast<int>(p.constraints.size());
    const int ntot = p.total_dim();

    RealVector b(m);
    for (int k = 0; k < m; ++k) b[k] = p.constraints[k].rhs;

    double cmax = 0;
    for (const auto& c : p.objective) cmax = std::max(cmax, c.cwiseAbs().maxCoeff());
    const double tau_p = 1.0 + b.cwiseAbs().maxCoeff();
    const double tau_d = 1.0 + cmax;

    Blocks y = zero_blocks(p.block_dims);
    Blocks s = zero_blocks(p.block_dims);
    for (size_t bidx = 0; bidx < y.size(); ++bidx) {
        y[bidx].diagonal().setConstant(tau_p);
        s[bidx].diagonal().setConstant(tau_d);
    }
    RealVector dual(m);
    dual.setZero();

    SchurAssembler assembler(p);
    RealMatrix h(m, m);
    CholeskyM chol;

    const double bnorm = 1.0 + b.norm();
    double cnorm = 1.0;
    for (const auto& c : p.objective) cnorm += c.norm();

    SdpSolution sol;
    int stall_count = 0;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // residuals and convergence
        RealVector rp(m);
        for (int k = 0; k < m; ++k) rp[k] = b[k] - constraint_dot(p.constraints[k], y);
        Blocks rd = p.objective;
        for (size_t bi = 0; bi < rd.size(); ++bi) rd[bi] -= s[bi];
        accumulate_combination(p.constraints, -dual, rd);

        const double pobj = inner(p.objective, y);
        const double dobj = b.dot(dual);
        const double mu = inner(y, s) / ntot;
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        double rd_norm = 0;
        for (const auto& blk : rd) rd_norm += blk.squaredNorm();
        rd_norm = std::sqrt(rd_norm);

        sol.primal_value = sign * pobj;
        sol.dual_value = sign * dobj;
        sol.gap = gap;
        sol.primal_residual = rp.norm() / bnorm;
        sol.dual_residual = rd_norm / cnorm;
        sol.iterations = iter;

        if (opts.verbose) {
            std::ostringstream line;
            line << "iter " << iter << " pobj " << pobj << " dobj " << dobj << " gap " << gap
                 << " rp " << sol.primal_residual << " rd " << sol.dual_residual << " mu " << mu;
            std::fputs((line.str() + "\n").c_str(), stderr);
        }

        if (gap <= opts.gap_tol && sol.primal_residual <= opts.feas_tol &&
            sol.dual_residual <= opts.feas_tol) {
            sol.status = SdpStatus::optimal;
            break;
        }
        // dual objective diverging along a feasible ray: primal infeasible
        if (sol.dual_residual <= opts.feas_tol && dobj > 1e8 * (1.0 + std::abs(pobj))) {
            sol.status = SdpStatus::infeasible_detected;
            break;
        }

        EigBlocks fy = factor_blocks(y, "Y");
        EigBlocks fs = factor_blocks(s, "S");

        // NT scaling W = Y^{1/2} (Y^{1/2} S Y^{1/2})^{-1/2} Y^{1/2}
        Blocks w;
        for (size_t bi = 0; bi < y.size(); ++bi) {
            RealMatrix mid = fy.sqrt[bi] * s[bi] * fy.sqrt[bi];
            Eigen::SelfAdjointEigenSolver<RealMatrix> es(mid);
            if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
                throw SolverFailure("sdp: NT scaling breakdown");
            RealMatrix inv_sqrt = es.eigenvectors() *
                                  es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();
            w.push_back(fy.sqrt[bi] * inv_sqrt * fy.sqrt[bi]);
        }

        assembler.assemble(w, h);
        chol.factor(h);

        Blocks wrdw;
        for (size_t bi = 0; bi < y.size(); ++bi) wrdw.push_back(w[bi] * rd[bi] * w[bi]);

        auto direction = [&](const Blocks& rc, RealVector& dy_out, Blocks& dY, Blocks& dS) {
            RealVector rhs = rp;
            for (int k = 0; k < m; ++k) {
                double extra = 0;
                for (const auto& t : p.constraints[k].entries) {
                    double v = wrdw[t.block](t.row, t.col) - rc[t.block](t.row, t.col);
                    extra += (t.row == t.col) ? t.value * v : 2.0 * t.value * v;
                }
                rhs[k] += extra;
            }
            dy_out = chol.solve(rhs);
            dS = rd;
            accumulate_combination(p.constraints, -dy_out, dS);
            // dS = rd - sum dy A; dY = rc - W dS W
            dY.clear();
            for (size_t bi = 0; bi < y.size(); ++bi)
                dY.push_back(rc[bi] - w[bi] * dS[bi] * w[bi]);
        };

        // predictor
        Blocks rc_aff;
        for (const auto& blk : y) rc_aff.push_back(-blk);
        RealVector dy_aff;
        Blocks dY_aff, dS_aff;
        direction(rc_aff, dy_aff, dY_aff, dS_aff);

        double ap = max_step(fy.chol, dY_aff, 1.0);
        double ad = max_step(fs.chol, dS_aff, 1.0);
        double mu_aff = 0;
        {
            Blocks ya = y, sa = s;
            for (size_t bi = 0; bi < y.size(); ++bi) {
                ya[bi] += 0.99 * ap * dY_aff[bi];
                sa[bi] += 0.99 * ad * dS_aff[bi];
            }
            mu_aff = std::max(inner(ya, sa) / ntot, 0.0);
        }
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::min(std::max(sigma, 1e-8), 1.0);

        // corrector: sigma*mu*S^{-1} - Y - sym(dY_aff dS_aff S^{-1})
        Blocks rc;
        for (size_t bi = 0; bi < y.size(); ++bi) {
            RealMatrix sinv = fs.chol[bi].triangularView<Eigen::Lower>().solve(
                RealMatrix::Identity(y[bi].rows(), y[bi].rows()));
            sinv = fs.chol[bi].transpose().triangularView<Eigen::Upper>().solve(sinv).eval();
            RealMatrix second = dY_aff[bi] * dS_aff[bi] * sinv;
            rc.push_back(sigma * mu * sinv - y[bi] - 0.5 * (second + second.transpose()));
        }
        RealVector dy;
        Blocks dY, dS;
        direction(rc, dy, dY, dS);

        double ap2 = 0.99 * max_step(fy.chol, dY, 1.0 / 0.99);
        double ad2 = 0.99 * max_step(fs.chol, dS, 1.0 / 0.99);
        ap2 = std::min(ap2, 1.0);
        ad2 = std::min(ad2, 1.0);

        if (ap2 < 1e-6 && ad2 < 1e-6) {
            if (++stall_count >= 3)
                throw SolverFailure("sdp: step length collapsed (line search floor)");
        } else {
            stall_count = 0;
        }

        for (size_t bi = 0; bi < y.size(); ++bi) {
            y[bi] += ap2 * dY[bi];
            s[bi] += ad2 * dS[bi];
        }
        dual += ad2 * dy;
    }

    sol.y_mat = y;
    sol.y = sign * dual;
    return sol;
}

void dump_problem(const SdpProblem& p, std::ostream& os) {
    os << "blocks";
    for (int d : p.block_dims) os << ' ' << d;
    os << '\n' << (p.maximize ? "maximize" : "minimize") << '\n';
    for (size_t b = 0; b < p.objective.size(); ++b)
        for (Eigen::Index i = 0; i < p.objective[b].rows(); ++i)
            for (Eigen::Index j = i; j < p.objective[b].cols(); ++j)
                if (p.objective[b](i, j) != 0.0)
                    os << "C " << b << ' ' << i << ' ' << j << ' ' << p.objective[b](i, j)
                       << '\n';
    for (size_t k = 0; k < p.constraints.size(); ++k) {
        os << "A " << k << " rhs " << p.constraints[k].rhs << '\n';
        for (const auto& t : p.constraints[k].entries)
            os << "  " << t.block << ' ' << t.row << ' ' << t.col << ' ' << t.value << '\n';
    }
}

}  // namespace qcrb
