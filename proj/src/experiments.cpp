#include "qcrb/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "qcrb/rng.hpp"

namespace qcrb {

namespace {

Matrix ginibre_state(int d, Rng& rng) {
    Matrix s(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s(i, j) = Complex(rng.normal(), rng.normal());
    Matrix rho = s * s.adjoint();
    return rho / rho.trace();
}

Matrix bloch_reject_state(int d, Rng& rng, const GmmBasis& basis) {
    const double bound = std::sqrt(double(d - 1) / d);
    for (int attempt = 0; attempt < 200000; ++attempt) {
        Matrix rho = Matrix::Identity(d, d) / double(d);
        for (int j = 0; j < basis.count(); ++j)
            rho += rng.uniform(-bound, bound) * basis[j].mat();
        if (is_psd(Matrix(rho), 0.0)) return rho;
    }
    throw SolverFailure("bloch_reject: sampler starvation");
}

std::string hash_model(const StatModel& m) {
    std::ostringstream os;
    os.precision(17);
    os << m.dim << ',' << m.n_params;
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) os << ',' << m.rho(i, j).real() << ',' << m.rho(i, j).imag();
    for (const auto& dr : m.derivs)
        for (int i = 0; i < m.dim; ++i)
            for (int j = 0; j < m.dim; ++j)
                os << ',' << dr(i, j).real() << ',' << dr(i, j).imag();
    return fnv1a_hex(os.str());
}

std::vector<HermMatrix> random_directions(int d, int n, Rng& rng, const GmmBasis& basis) {
    const int nmax = basis.count();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<HermMatrix> dirs;
        for (int j = 0; j < n; ++j) {
            Matrix m = Matrix::Zero(d, d);
            for (int k = 0; k < nmax; ++k) m += rng.normal() * basis[k].mat();
            dirs.emplace_back(m);
        }
        RealMatrix gram(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                gram(a, b) = (dirs[a].mat() * dirs[b].mat()).trace().real();
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() > 1e-8) return dirs;
    }
    throw SolverFailure("random_directions: could not draw independent derivatives");
}

RealVector gmm_coordinates(const Matrix& rho, const GmmBasis& basis) {
    RealVector t(basis.count());
    for (int j = 0; j < basis.count(); ++j) t[j] = (rho * basis[j].mat()).trace().real();
    return t;
}

}  // namespace

std::vector<HermMatrix> sample_states(const SampleSpec& spec) {
    GmmBasis basis = gmm_basis(spec.d);
    std::vector<HermMatrix> out;
    std::vector<double> grid = spec.mix_p.empty() ? std::vector<double>{0.0} : spec.mix_p;
    for (int i = 0; i < spec.count; ++i) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        Matrix rho;
        switch (spec.sampler) {
            case Sampler::ginibre:
                rho = ginibre_state(spec.d, rng);
                break;
            case Sampler::bloch_reject:
                rho = bloch_reject_state(spec.d, rng, basis);
                break;
            case Sampler::depolarized_mix: {
                const double p = grid[i % grid.size()];
                rho = (1 - p) * ginibre_state(spec.d, rng) +
                      p * Matrix::Identity(spec.d, spec.d) / double(spec.d);
                break;
            }
            case Sampler::plus_mix: {
                const double p = grid[i % grid.size()];
                Matrix plus = Matrix::Constant(spec.d, spec.d, Complex(1.0 / spec.d, 0));
                rho = (1 - p) * ginibre_state(spec.d, rng) + p * plus;
                break;
            }
        }
        out.emplace_back(rho);
    }
    return out;
}

StatModel sample_model_single(int d, int n, std::uint64_t sample_seed, Sampler sampler,
                              DerivMode mode, double mix_p) {
    GmmBasis basis = gmm_basis(d);
    Rng rng(sample_seed);
    Matrix rho;
    switch (sampler) {
        case Sampler::ginibre: rho = ginibre_state(d, rng); break;
        case Sampler::bloch_reject: rho = bloch_reject_state(d, rng, basis); break;
        case Sampler::depolarized_mix:
            rho = (1 - mix_p) * ginibre_state(d, rng) +
                  mix_p * Matrix::Identity(d, d) / double(d);
            break;
        case Sampler::plus_mix: {
            Matrix plus = Matrix::Constant(d, d, Complex(1.0 / d, 0));
            rho = (1 - mix_p) * ginibre_state(d, rng) + mix_p * plus;
            break;
        }
    }

    StatModel m;
    m.dim = d;
    m.n_params = n;
    m.rho = HermMatrix(rho);
    switch (mode) {
        case DerivMode::gmm_full:
            if (n != basis.count()) throw DimensionError("sample_model_single: gmm_full needs n = d^2-1");
            m.derivs = basis.matrices;
            m.theta_star = gmm_coordinates(rho, basis);
            break;
        case DerivMode::gmm_subset: {
            std::vector<int> all(basis.count());
            for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            // deterministic subset draw
            for (int i = basis.count() - 1; i > 0; --i)
                std::swap(all[i], all[rng.next_u64() % (i + 1)]);
            all.resize(n);
            std::sort(all.begin(), all.end());
            // remaining coefficients zero: project the state onto the subset
            Matrix rs = Matrix::Identity(d, d) / double(d);
            RealVector th(n);
            for (int j = 0; j < n; ++j) {
                th[j] = (rho * basis[all[j]].mat()).trace().real();
                rs += th[j] * basis[all[j]].mat();
            }
            if (!is_psd(Matrix(rs), 1e-12)) throw InvalidStateError("subset projection not PSD");
            m.rho = HermMatrix(rs);
            for (int j = 0; j < n; ++j) m.derivs.push_back(basis[all[j]]);
            m.theta_star = th;
            break;
        }
        case DerivMode::random_directions: {
            m.derivs = random_directions(d, n, rng, basis);
            m.theta_star = RealVector::Zero(n);
            break;
        }
    }
    m.weight = RealMatrix::Identity(n, n);
    if (m.theta_star.size() == 0) m.theta_star = RealVector::Zero(n);
    m.validate();
    return m;
}

std::vector<StatModel> sample_models(const SampleSpec& spec, DerivMode mode) {
    std::vector<StatModel> out;
    std::vector<double> grid = spec.mix_p.empty() ? std::vector<double>{0.0} : spec.mix_p;
    for (int i = 0; i < spec.count; ++i) {
        const double p = grid[i % grid.size()];
        for (int attempt = 0; attempt < 100; ++attempt) {
            try {
                out.push_back(sample_model_single(
                    spec.d, spec.n,
                    derive_seed(spec.seed, static_cast<std::uint64_t>(i) * 101 + attempt),
                    spec.sampler, mode, p));
                break;
            } catch (const InvalidStateError&) {
                continue;  // rejection: redraw
            }
        }
    }
    return out;
}

namespace {

RatioRecord make_record(const StatModel& m, const BoundSet& bs, std::uint64_t seed,
                        const std::string& tag) {
    RatioRecord r;
    r.d = m.dim;
    r.n = m.n_params;
    r.purity = purity(m);
    r.hcrb = bs.hcrb;
    r.nhcrb = bs.nhcrb;
    r.sld = bs.sld;
    r.rld = bs.rld;
    r.gmcrb = bs.gmcrb;
    r.ratio_nh = bs.nhcrb / bs.hcrb;
    r.delta = (bs.hcrb - bs.sld) / bs.sld;
    r.small_delta = (bs.nhcrb - bs.hcrb) / bs.hcrb;
    r.seed = seed;
    r.model_hash = hash_model(m);
    r.tag = tag;
    return r;
}

// Eq.-ordering sanity: quarantine instead of dropping when solver noise
// breaks max(SLD, RLD) <= HCRB <= NHCRB by more than 1e-5.
bool ordering_ok(const BoundSet& bs) {
    const double tol = 1e-5;
    return bs.hcrb >= std::max(bs.sld, bs.rld) - tol && bs.nhcrb >= bs.hcrb - tol;
}

}  // namespace

PuritySweepResult purity_sweep(int d, int samples, std::uint64_t seed, bool include_extremal) {
    if (d < 2 || d > 4) throw DimensionError("purity_sweep: d in [2,4] (SDP budget)");
    PuritySweepResult out;
    const int nmax = d * d - 1;
    for (int i = 0; i < samples; ++i) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        // cycle the samplers to cover the purity range
        Sampler samplers[3] = {Sampler::ginibre, Sampler::depolarized_mix, Sampler::plus_mix};
        const double p = Rng(s).uniform();
        StatModel m;
        try {
            m = sample_model_single(d, nmax, s, samplers[i % 3], DerivMode::gmm_full, p);
            BoundSet bs = compute_bound_set(m);
            RatioRecord rec = make_record(m, bs, s, "sample");
            if (!ordering_ok(bs)) {
                rec.tag = "quarantined-ordering";
                ++out.quarantined;
            }
            out.records.push_back(rec);
        } catch (const Error&) {
            ++out.solver_failures;
            continue;
        }
    }
    if (include_extremal) {
        for (int i = 0; i <= 20; ++i) {
            const double p = i / 20.0;
            RhoMaxAnalytic an = analytic_rho_max(d, p);
            out.max_curve.push_back({1.0 / d + p * p * (d - 1.0) / d, an.hcrb, an.nhcrb});
        }
        for (int branch = 2; branch <= d; ++branch) {
            for (int i = 0; i <= 8; ++i) {
                const double lo = 1.0 / branch, hi = 1.0 / (branch - 1);
                const double p = lo + (hi - lo) * i / 8.0;
                try {
                    StatModel m = rank_deficient_min_model(d, branch, p);
                    BoundSet bs = compute_bound_set(m);
                    out.min_curve.push_back({purity(m), bs.hcrb, bs.nhcrb});
                } catch (const Error&) {
                    ++out.solver_failures;
                }
            }
        }
    }
    return out;
}

std::vector<GridCell> ratio_grid(const std::vector<int>& d_range, const std::vector<int>& n_range,
                                 int samples_per_cell, std::uint64_t seed, bool force_analytic) {
    std::vector<GridCell> cells;
    for (int d : d_range)
        for (int n : n_range) {
            if (n > d * d - 1) continue;
            GridCell cell;
            cell.d = d;
            cell.n = n;
            double sum = 0;
            cell.min_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < samples_per_cell; ++i) {
                const std::uint64_t s =
                    derive_seed(seed, (static_cast<std::uint64_t>(d) << 40) ^
                                          (static_cast<std::uint64_t>(n) << 32) ^
                                          static_cast<std::uint64_t>(i));
                try {
                    StatModel m = sample_model_single(d, n, s, Sampler::ginibre,
                                                      DerivMode::random_directions);
                    BoundSet bs = compute_bound_set(m);
                    const double r = bs.nhcrb / bs.hcrb;
                    cell.min_ratio = std::min(cell.min_ratio, r);
                    cell.max_ratio = std::max(cell.max_ratio, r);
                    sum += r;
                    ++cell.samples_ok;
                } catch (const Error&) {
                    continue;
                }
            }
            if (force_analytic) {
                // maximally-mixed subset models cover the analytic extremes
                std::vector<int> subset(n);
                std::vector<int> comb(n);
                for (int i = 0; i < n; ++i) comb[i] = i;
                const int nmax = d * d - 1;
                bool more = true;
                while (more) {
                    try {
                        StatModel m = gmm_subset_model(d, comb, RealVector::Zero(n));
                        BoundSet bs = compute_bound_set(m);
                        cell.forced_max_ratio =
                            std::max(cell.forced_max_ratio, bs.nhcrb / bs.hcrb);
                    } catch (const Error&) {
                    }
                    // next combination
                    int i = n - 1;
                    while (i >= 0 && comb[i] == nmax - n + i) --i;
                    if (i < 0) {
                        more = false;
                    } else {
                        ++comb[i];
                        for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
                    }
                }
                cell.max_ratio = std::max(cell.max_ratio, cell.forced_max_ratio);
            }
            if (cell.samples_ok > 0) cell.mean_ratio = sum / cell.samples_ok;
            cell.empty = cell.samples_ok == 0 && cell.forced_max_ratio == 0;
            cells.push_back(cell);
        }
    return cells;
}

WeightedResult weighted_experiment(int d, int samples, std::uint64_t seed) {
    WeightedResult out;
    const int n = d * d - 1;
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        // random SPD weight, trace-normalized to n
        RealMatrix a(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = rng.normal();
        RealMatrix w = a * a.transpose() + 0.05 * RealMatrix::Identity(n, n);
        w *= double(n) / w.trace();
        try {
            StatModel ms = sample_model_single(d, n, derive_seed(seed, 1000000 + i),
                                               Sampler::ginibre, DerivMode::gmm_full);
            ms.weight = w;
            StatModel mm = gmm_model(d, RealVector::Zero(n));
            mm.weight = w;
            WeightedPair pair;
            pair.purity = purity(ms);
            pair.ratio_state = nhcrb(ms).value / hcrb(ms).value;
            pair.ratio_mm = nhcrb(mm).value / hcrb(mm).value;
            if (pair.ratio_state <= pair.ratio_mm + 1e-9) ++out.dominated;
            out.pairs.push_back(pair);
        } catch (const Error&) {
            ++out.solver_failures;
        }
    }
    return out;
}

GmNhResult gm_vs_nh_experiment(int d, int samples, std::uint64_t seed, int two_copy_budget) {
    GmNhResult out;
    const int nmax = d * d - 1;
    for (int i = 0; i < samples; ++i) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        try {
            StatModel m =
                sample_model_single(d, nmax, s, Sampler::ginibre, DerivMode::gmm_full);
            GmNhRecord rec;
            rec.purity = purity(m);
            rec.n = nmax;
            rec.hcrb = hcrb(m).value;
            rec.nhcrb = nhcrb(m).value;
            rec.gmcrb = gmcrb(m).value;
            rec.gmcrb_two_copy = gmcrb(m, 2).value;
            out.full_model.push_back(rec);
        } catch (const Error&) {
            ++out.solver_failures;
        }
    }
    for (int i = 0; i < samples; ++i) {
        const std::uint64_t s = derive_seed(seed, 5000000 + static_cast<std::uint64_t>(i));
        const int n = 2 + static_cast<int>(Rng(s).next_u64() % (nmax - 2));
        try {
            StatModel m =
                sample_model_single(d, n, s, Sampler::ginibre, DerivMode::random_directions);
            GmNhRecord rec;
            rec.purity = purity(m);
            rec.n = n;
            rec.hcrb = hcrb(m).value;
            rec.nhcrb = nhcrb(m).value;
            rec.gmcrb = gmcrb(m).value;
            rec.gmcrb_two_copy = gmcrb(m, 2).value;
            out.subset_model.push_back(rec);
        } catch (const Error&) {
            ++out.solver_failures;
        }
    }
    if (two_copy_budget > 0 && d <= 3) {
        for (int i = 0; i < two_copy_budget; ++i) {
            const std::uint64_t s = derive_seed(seed, 9000000 + static_cast<std::uint64_t>(i));
            try {
                StatModel m =
                    sample_model_single(d, nmax, s, Sampler::ginibre, DerivMode::gmm_full);
                double one = nhcrb(m).value;
                double two = nhcrb(tensor_copies(m, 2)).value;
                out.two_copy_nh.push_back({one, two});
            } catch (const Error&) {
                ++out.solver_failures;
            }
        }
    }
    return out;
}

std::vector<Table1Row> table1_reproduce(const SdpOptions& opts) {
    const int d = 3, nmax = 8;
    std::vector<Table1Row> rows;
    for (int n = 2; n <= nmax; ++n) {
        Table1Row row;
        row.n = n;
        row.nhcrb_min = std::numeric_limits<double>::infinity();
        std::vector<int> comb(n);
        for (int i = 0; i < n; ++i) comb[i] = i;
        bool more = true;
        while (more) {
            StatModel m = gmm_subset_model(d, comb, RealVector::Zero(n));
            const double h = hcrb(m, opts).value;
            const double nh = nhcrb(m, opts).value;
            row.hcrb = h;  // independent of the subset; n/d
            row.nhcrb_min = std::min(row.nhcrb_min, nh);
            row.nhcrb_max = std::max(row.nhcrb_max, nh);
            row.max_ratio = std::max(row.max_ratio, nh / h);
            ++row.subsets;
            int i = n - 1;
            while (i >= 0 && comb[i] == nmax - n + i) --i;
            if (i < 0) {
                more = false;
            } else {
                ++comb[i];
                for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

void write_csv(const std::vector<RatioRecord>& records, std::ostream& os) {
    os << "d,n,purity,hcrb,nhcrb,sld,rld,gmcrb,ratio_nh,delta,small_delta,seed,model_hash,tag\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        os << r.d << ',' << r.n << ',' << num(r.purity) << ',' << num(r.hcrb) << ','
           << num(r.nhcrb) << ',' << num(r.sld) << ',' << num(r.rld) << ',' << num(r.gmcrb)
           << ',' << num(r.ratio_nh) << ',' << num(r.delta) << ',' << num(r.small_delta) << ','
           << r.seed << ',' << r.model_hash << ',' << r.tag << '\n';
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = seed;
    j["requested"] = requested;
    j["produced"] = produced;
    j["solver_failures"] = solver_failures;
    j["quarantined"] = quarantined;
    j["content_hash"] = content_hash;
    j["solver"] = {{"gap_tol", solver.gap_tol},
                   {"feas_tol", solver.feas_tol},
                   {"max_iter", solver.max_iter}};
    return j.dump(2);
}

}  // namespace qcrb
