#pragma once

// Random sampling of states and models, the sweep/grid experiments, and
// deterministic CSV/JSON dataset emission.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcrb/bounds.hpp"

namespace qcrb {

enum class Sampler { ginibre, bloch_reject, depolarized_mix, plus_mix };

struct SampleSpec {
    int d = 3;
    int n = 8;
    int count = 100;
    std::uint64_t seed = 1;
    Sampler sampler = Sampler::ginibre;
    std::vector<double> mix_p;  // grid for the *_mix samplers
};

struct RatioRecord {
    int d = 0, n = 0;
    double purity = 0;
    double hcrb = 0, nhcrb = 0, sld = 0, rld = 0, gmcrb = 0;
    double ratio_nh = 0;      // nhcrb / hcrb
    double delta = 0;         // (hcrb - sld) / sld
    double small_delta = 0;   // (nhcrb - hcrb) / hcrb
    std::uint64_t seed = 0;
    std::string model_hash;
    std::string tag;          // sample | forced-* | quarantined-*
};

// Deterministic state stream; Ginibre, Bloch-cube rejection, or purity
// enrichment mixes of a Ginibre state with 1/d or |+><+|.
std::vector<HermMatrix> sample_states(const SampleSpec& spec);

enum class DerivMode { gmm_full, gmm_subset, random_directions };

std::vector<StatModel> sample_models(const SampleSpec& spec, DerivMode mode);

StatModel sample_model_single(int d, int n, std::uint64_t sample_seed, Sampler sampler,
                              DerivMode mode, double mix_p = 0.0);

struct ExperimentResult {
    std::vector<RatioRecord> records;
    int solver_failures = 0;
    int quarantined = 0;
};

struct PuritySweepResult : ExperimentResult {
    // analytic rho_max(p) envelope and SDP values for the rho_min branches
    std::vector<std::array<double, 3>> max_curve;  // purity, hcrb, nhcrb
    std::vector<std::array<double, 3>> min_curve;
};

PuritySweepResult purity_sweep(int d, int samples, std::uint64_t seed,
                               bool include_extremal = true);

struct GridCell {
    int d = 0, n = 0;
    int samples_ok = 0;
    double min_ratio = 0, mean_ratio = 0, max_ratio = 0;
    double forced_max_ratio = 0;  // max over the forced analytic models only
    bool empty = true;
};

std::vector<GridCell> ratio_grid(const std::vector<int>& d_range, const std::vector<int>& n_range,
                                 int samples_per_cell, std::uint64_t seed,
                                 bool force_analytic = true);

struct WeightedPair {
    double ratio_state = 0;  // NHCRB^W / HCRB^W at the sampled state
    double ratio_mm = 0;     // same weight at the maximally-mixed state
    double purity = 0;
};

struct WeightedResult {
    std::vector<WeightedPair> pairs;
    int dominated = 0;  // count with ratio_state <= ratio_mm + 1e-9
    int solver_failures = 0;
};

WeightedResult weighted_experiment(int d, int samples, std::uint64_t seed);

struct GmNhRecord {
    double purity = 0;
    int n = 0;
    double nhcrb = 0, gmcrb = 0, hcrb = 0;
    double gmcrb_two_copy = 0;
};

struct GmNhResult {
    std::vector<GmNhRecord> full_model;    // n = d^2-1
    std::vector<GmNhRecord> subset_model;  // n < d^2-1
    // two-copy NHCRB comparison on a small budget of full models
    std::vector<std::array<double, 2>> two_copy_nh;  // (one-copy, two-copy)
    int solver_failures = 0;
};

GmNhResult gm_vs_nh_experiment(int d, int samples, std::uint64_t seed, int two_copy_budget = 0);

struct Table1Row {
    int n = 0;
    double hcrb = 0;
    double nhcrb_min = 0, nhcrb_max = 0;
    double max_ratio = 0;
    int subsets = 0;
};

// Full enumeration of the C(8, n) GMM subsets of the maximally-mixed qutrit.
std::vector<Table1Row> table1_reproduce(const SdpOptions& opts = {});

void write_csv(const std::vector<RatioRecord>& records, std::ostream& os);

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    int requested = 0;
    int produced = 0;
    int solver_failures = 0;
    int quarantined = 0;
    std::string content_hash;  // FNV-1a of the emitted CSV bytes
    SdpOptions solver;

    std::string to_json() const;
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace qcrb
