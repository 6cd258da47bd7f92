#include "qcrb/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace qcrb {

namespace {

RealMatrix identity_weight(int n) { return RealMatrix::Identity(n, n); }

Matrix plus_projector(int d) {
    Matrix m = Matrix::Constant(d, d, Complex(1.0 / d, 0));
    return m;
}

}  // namespace

void StatModel::validate() const {
    if (dim < 2) throw InvalidStateError("model: dim must be >= 2");
    if (n_params < 1) throw InvalidStateError("model: n_params must be >= 1");
    if (n_params > dim * dim - 1) throw InvalidStateError("model: n_params exceeds d^2 - 1");
    if (rho.dim() != dim) throw InvalidStateError("model: rho has wrong dimension");
    if (std::abs(rho.trace() - 1.0) > 1e-10) throw InvalidStateError("model: rho trace != 1");
    if (!is_psd(rho, 1e-10)) throw InvalidStateError("model: rho not PSD");
    if (static_cast<int>(derivs.size()) != n_params)
        throw InvalidStateError("model: deriv count != n_params");
    for (const auto& dr : derivs) {
        if (dr.dim() != dim) throw InvalidStateError("model: derivative has wrong dimension");
        if (std::abs(dr.trace()) > 1e-10) throw InvalidStateError("model: derivative not traceless");
    }
    RealMatrix gram(n_params, n_params);
    for (int j = 0; j < n_params; ++j)
        for (int k = 0; k < n_params; ++k)
            gram(j, k) = (derivs[j].mat() * derivs[k].mat()).trace().real();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-8)
        throw InvalidStateError("model: derivatives not linearly independent");
    if (weight.rows() != n_params || weight.cols() != n_params)
        throw InvalidStateError("model: weight has wrong size");
    if ((weight - weight.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidStateError("model: weight not symmetric");
    Eigen::SelfAdjointEigenSolver<RealMatrix> ew(weight, Eigen::EigenvaluesOnly);
    if (ew.eigenvalues().minCoeff() < -1e-10) throw InvalidStateError("model: weight not PSD");
    if (theta_star.size() != n_params)
        throw InvalidStateError("model: theta_star has wrong length");
}

double purity(const StatModel& m) { return (m.rho.mat() * m.rho.mat()).trace().real(); }

StatModel gmm_model(int d, const RealVector& theta) {
    GmmBasis basis = gmm_basis(d);
    const int n = basis.count();
    if (theta.size() != n) throw DimensionError("gmm_model: theta length != d^2 - 1");
    Matrix rho = Matrix::Identity(d, d) / double(d);
    for (int j = 0; j < n; ++j) rho += theta[j] * basis[j].mat();
    if (!is_psd(rho, 1e-12)) throw InvalidStateError("gmm_model: resulting state not PSD");
    StatModel m;
    m.dim = d;
    m.n_params = n;
    m.rho = HermMatrix(rho);
    m.derivs = basis.matrices;
    m.weight = identity_weight(n);
    m.theta_star = theta;
    return m;
}

StatModel gmm_subset_model(int d, const std::vector<int>& index_set, const RealVector& theta_k) {
    GmmBasis basis = gmm_basis(d);
    const int nmax = basis.count();
    const int n = static_cast<int>(index_set.size());
    if (n < 1 || n > nmax) throw DimensionError("gmm_subset_model: bad index set size");
    if (theta_k.size() != n) throw DimensionError("gmm_subset_model: theta length != |K|");
    Matrix rho = Matrix::Identity(d, d) / double(d);
    StatModel m;
    m.dim = d;
    m.n_params = n;
    for (int j = 0; j < n; ++j) {
        int idx = index_set[j];
        if (idx < 0 || idx >= nmax) throw DimensionError("gmm_subset_model: index out of range");
        rho += theta_k[j] * basis[idx].mat();
        m.derivs.push_back(basis[idx]);
    }
    if (!is_psd(rho, 1e-12)) throw InvalidStateError("gmm_subset_model: resulting state not PSD");
    m.rho = HermMatrix(rho);
    m.weight = identity_weight(n);
    m.theta_star = theta_k;
    return m;
}

StatModel onb_rotate(const StatModel& m, const RealMatrix& eta) {
    const int n = m.n_params;
    if (n != m.dim * m.dim - 1)
        throw InvalidStateError("onb_rotate: model is not full-parameter");
    if (eta.rows() != n || eta.cols() != n) throw DimensionError("onb_rotate: eta has wrong size");
    if ((eta * eta.transpose() - RealMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidStateError("onb_rotate: eta not orthogonal");
    StatModel out = m;
    out.derivs.clear();
    for (int j = 0; j < n; ++j) {
        Matrix b = Matrix::Zero(m.dim, m.dim);
        for (int k = 0; k < n; ++k) b += eta(j, k) * m.derivs[k].mat();
        out.derivs.emplace_back(b);
    }
    out.theta_star = eta * m.theta_star;
    return out;
}

StatModel depolarized_plus_model(int d, double p) {
    if (p < 0 || p > 1) throw InvalidStateError("depolarized_plus_model: p outside [0,1]");
    Matrix rho = p * plus_projector(d) + (1 - p) * Matrix::Identity(d, d) / double(d);
    GmmBasis basis = gmm_basis(d);
    StatModel m;
    m.dim = d;
    m.n_params = basis.count();
    m.rho = HermMatrix(rho);
    m.derivs = basis.matrices;
    m.weight = identity_weight(m.n_params);
    m.theta_star = RealVector(m.n_params);
    for (int j = 0; j < m.n_params; ++j)
        m.theta_star[j] = (m.rho.mat() * basis[j].mat()).trace().real();
    return m;
}

StatModel rank_deficient_min_model(int d, int branch, double p, double eps) {
    if (branch < 2 || branch > d) throw DimensionError("rank_deficient_min_model: bad branch");
    const double lo = 1.0 / branch, hi = 1.0 / (branch - 1);
    if (p < lo - 1e-12 || p > hi + 1e-12)
        throw InvalidStateError("rank_deficient_min_model: p outside branch purity window");
    Matrix rho = Matrix::Zero(d, d);
    for (int i = 0; i < branch - 1; ++i) rho(i, i) = p;
    rho(branch - 1, branch - 1) = 1.0 - (branch - 1) * p;
    rho = (1 - eps) * rho + eps * Matrix::Identity(d, d) / double(d);
    GmmBasis basis = gmm_basis(d);
    StatModel m;
    m.dim = d;
    m.n_params = basis.count();
    m.rho = HermMatrix(rho);
    m.derivs = basis.matrices;
    m.weight = identity_weight(m.n_params);
    m.theta_star = RealVector(m.n_params);
    for (int j = 0; j < m.n_params; ++j)
        m.theta_star[j] = (m.rho.mat() * basis[j].mat()).trace().real();
    return m;
}

StatModel tensor_copies(const StatModel& m, int k) {
    if (k < 1) throw DimensionError("tensor_copies: k must be >= 1");
    if (k == 1) return m;
    const long size = static_cast<long>(std::pow(double(m.dim), k));
    if (size * (m.n_params + 1) > 512)
        throw DimensionError("tensor_copies: SDP size budget exceeded");
    StatModel out;
    out.dim = static_cast<int>(size);
    out.n_params = m.n_params;
    Matrix rho_k = m.rho.mat();
    for (int i = 1; i < k; ++i) rho_k = kron(rho_k, m.rho.mat()).eval();
    out.rho = HermMatrix(rho_k);
    for (int j = 0; j < m.n_params; ++j) {
        Matrix dj = Matrix::Zero(size, size);
        for (int pos = 0; pos < k; ++pos) {
            Matrix term = (pos == 0) ? m.derivs[j].mat() : m.rho.mat();
            for (int i = 1; i < k; ++i)
                term = kron(term, (i == pos) ? m.derivs[j].mat() : m.rho.mat()).eval();
            dj += term;
        }
        out.derivs.emplace_back(dj);
    }
    out.weight = m.weight;
    out.theta_star = m.theta_star;
    return out;
}

LubFamily solve_lub(const StatModel& m) {
    const int d = m.dim, n = m.n_params;
    const int dd = d * d;
    // Constraint rows in the orthonormal Hermitian basis: <rho, X> and <d_k rho, X>.
    RealMatrix rows(n + 1, dd);
    rows.row(0) = herm_basis_vec(m.rho).transpose();
    for (int k = 0; k < n; ++k) rows.row(k + 1) = herm_basis_vec(m.derivs[k]).transpose();

    Eigen::JacobiSVD<RealMatrix> svd(rows, Eigen::ComputeFullV | Eigen::ComputeThinU);
    const double smax = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-12 * smax) ++rank;
    if (rank < n + 1)
        throw SolverFailure("solve_lub: unbiasedness constraints are rank-deficient");

    LubFamily fam;
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(rows);
    for (int j = 0; j < n; ++j) {
        RealVector rhs = RealVector::Zero(n + 1);
        rhs[0] = m.theta_star[j];
        rhs[j + 1] = 1.0;
        RealVector x = cod.solve(rhs);
        fam.particular.push_back(herm_basis_unvec(x, d));
    }
    for (int t = rank; t < dd; ++t)
        fam.null_basis.push_back(herm_basis_unvec(svd.matrixV().col(t), d));
    fam.unique = fam.null_basis.empty();

    fam.residual = 0;
    for (int j = 0; j < n; ++j) {
        const Matrix& xj = fam.particular[j].mat();
        fam.residual = std::max(
            fam.residual, std::abs((m.rho.mat() * xj).trace().real() - m.theta_star[j]));
        for (int k = 0; k < n; ++k) {
            double want = (j == k) ? 1.0 : 0.0;
            fam.residual = std::max(
                fam.residual, std::abs((m.derivs[k].mat() * xj).trace().real() - want));
        }
    }
    return fam;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out.push_back({m(i, j).real(), m(i, j).imag()});
    return out;
}

Matrix matrix_from_json(const json& j, int d, const char* what) {
    if (!j.is_array() || j.size() != static_cast<size_t>(d) * d)
        throw InvalidStateError(std::string("model json: ") + what + " has wrong length");
    Matrix m(d, d);
    size_t idx = 0;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c, ++idx)
            m(r, c) = Complex(j[idx][0].get<double>(), j[idx][1].get<double>());
    return m;
}

}  // namespace

StatModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    StatModel m;
    m.dim = j.at("d").get<int>();
    m.n_params = j.at("n").get<int>();
    if (m.dim < 2) throw InvalidStateError("model json: d must be >= 2");
    m.rho = HermMatrix(matrix_from_json(j.at("rho"), m.dim, "rho"), 1e-10);
    for (const auto& dj : j.at("derivs"))
        m.derivs.emplace_back(matrix_from_json(dj, m.dim, "deriv"), 1e-10);
    if (j.contains("weight")) {
        const auto& w = j.at("weight");
        if (w.size() != static_cast<size_t>(m.n_params) * m.n_params)
            throw InvalidStateError("model json: weight has wrong length");
        m.weight = RealMatrix(m.n_params, m.n_params);
        size_t idx = 0;
        for (int r = 0; r < m.n_params; ++r)
            for (int c = 0; c < m.n_params; ++c, ++idx) m.weight(r, c) = w[idx].get<double>();
    } else {
        m.weight = RealMatrix::Identity(m.n_params, m.n_params);
    }
    if (j.contains("theta_star")) {
        const auto& t = j.at("theta_star");
        if (t.size() != static_cast<size_t>(m.n_params))
            throw InvalidStateError("model json: theta_star has wrong length");
        m.theta_star = RealVector(m.n_params);
        for (int i = 0; i < m.n_params; ++i) m.theta_star[i] = t[i].get<double>();
    } else {
        m.theta_star = RealVector::Zero(m.n_params);
    }
    m.validate();
    return m;
}

std::string model_to_json(const StatModel& m) {
    json j;
    j["d"] = m.dim;
    j["n"] = m.n_params;
    j["rho"] = matrix_to_json(m.rho.mat());
    j["derivs"] = json::array();
    for (const auto& dr : m.derivs) j["derivs"].push_back(matrix_to_json(dr.mat()));
    j["weight"] = json::array();
    for (int r = 0; r < m.n_params; ++r)
        for (int c = 0; c < m.n_params; ++c) j["weight"].push_back(m.weight(r, c));
    j["theta_star"] = json::array();
    for (int i = 0; i < m.n_params; ++i) j["theta_star"].push_back(m.theta_star[i]);
    return j.dump(2);
}

}  // namespace qcrb
