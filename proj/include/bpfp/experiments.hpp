#pragma once

#include "bpfp/analysis.hpp"
#include "bpfp/bp.hpp"
#include "bpfp/homotopy.hpp"
#include "bpfp/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpfp {

struct ModelShape {
    std::string kind = "grid";  // grid | complete
    int rows = 3, cols = 3;     // complete graphs use rows as the node count
    PairwiseModel make(double J, double theta) const;
    std::string describe() const;
};

// cell centres: min + (k + 1/2) (max - min) / points
std::vector<double> sweep_axis(double lo, double hi, int points);

struct SweepSpec {
    ModelShape shape;
    double J_min = -2.0, J_max = 2.0;
    int J_points = 17;
    double theta_min = -2.0, theta_max = 2.0;
    int theta_points = 17;
    uint64_t seed = 1;
    SolveOptions solve;
    BpOptions bp;
    int threads = 1;
    std::optional<int> region_degree;
    void validate() const;
};

struct SweepRow {
    double J = 0.0, theta = 0.0;
    PhaseRegion region = PhaseRegion::III;
    BpStatus bp_status = BpStatus::MaxIters;
    int bp_iterations = 0;
    double bp_mse = 0.0;
    double bp_system_residual = 0.0;
    int n_positive = 0, n_real = 0, n_distinct = 0, n_stable = 0;
    long long bkk = 0;
    double mse_best = 0.0, mse_max = 0.0, mse_all = 0.0, mse_stable = 0.0;
    // no stable fixed point, STABLE falls back to ALL
    bool stable_fallback = false;
    bool solver_failed = false;
    std::string error;
    std::vector<FixedPointReport> reports;
};

struct CombinedMse {
    double max = 0.0, all = 0.0, stable = 0.0, best = 0.0;
    bool stable_fallback = false;
};
CombinedMse combined_mse(const std::vector<FixedPointReport>& reports, const std::vector<double>& exact);

SweepRow sweep_point(const PairwiseModel& m, double J, double theta, int region_degree, const SweepSpec& spec, StructureCache* cache);
std::vector<SweepRow> sweep(const SweepSpec& spec);

struct SliceRow {
    double theta = 0.0, J = 0.0;
    double exact_magnetization = 0.0;
    int fp_index = -1;
    double magnetization = 0.0;
    bool stable = false;
    bool max_bethe_Z = false;
    double spectral_radius = 0.0;
};

std::vector<SliceRow> slice(const ModelShape& shape, const std::vector<double>& thetas, const std::vector<double>& Js, uint64_t seed, const SolveOptions& solve, int threads);

struct TrialRow {
    int trial = 0;
    BpStatus bp_status = BpStatus::MaxIters;
    int bp_iterations = 0;
    int n_positive = 0, n_real = 0;
    double bp_mse = 0.0, nphc_mse = 0.0;
    double bp_system_residual = 0.0;
    bool solver_failed = false;
};

struct TrialSummary {
    std::vector<TrialRow> rows;
    int bp_converged = 0;
    int unique_positive = 0;
};

// couplings and fields drawn from U(-K, K) on a grid
TrialSummary random_grid_trials(const ModelShape& shape, int count, double K, uint64_t seed, const SolveOptions& solve, const BpOptions& bp, int threads);

struct TimingRow {
    std::string phase;
    double seconds = 0.0;
};

struct TimingReport {
    std::vector<TimingRow> first, reuse;
    bool reuse_skipped_mixed_volume = false;
};

TimingReport timing_report(const PairwiseModel& m, uint64_t seed, const SolveOptions& solve, const BpOptions& bp);

} // namespace bpfp
