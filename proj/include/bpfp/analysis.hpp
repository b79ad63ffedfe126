#pragma once

#include "bpfp/bp.hpp"
#include "bpfp/exact.hpp"
#include "bpfp/homotopy.hpp"
#include "bpfp/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace bpfp {

enum class Stability { Stable, Unstable, Marginal };
const char* to_string(Stability s);

struct FixedPointReport {
    MessageSet messages;
    std::vector<double> beliefs;                      // P(x_i = +1)
    std::vector<std::array<double, 4>> pairwise_beliefs;
    double bethe_F = 0.0;
    double bethe_Z = 0.0;
    double spectral_radius = 0.0;
    double damped_spectral_radius = 0.0;
    Stability stability = Stability::Unstable;
    bool stable = false;
    double mse_vs_exact = 0.0;
    double mean_magnetization = 0.0;
};

enum class PhaseRegion { I, II, III };
const char* to_string(PhaseRegion r);

enum class CombineMode { All, Stable, Max };
const char* to_string(CombineMode m);

double bethe_free_energy(const PairwiseModel& m, const std::vector<double>& beliefs, const std::vector<std::array<double, 4>>& pairwise);

// Jacobian of the normalized synchronous map in the mu(+1) coordinates
Eigen::MatrixXd bp_jacobian(const PairwiseModel& m, const MessageSet& fp);
Eigen::MatrixXd bp_jacobian_fd(const PairwiseModel& m, const MessageSet& fp, double h = 1e-6);
double spectral_radius(const Eigen::MatrixXd& jac);

struct StabilityResult {
    double spectral_radius = 0.0;
    Stability stability = Stability::Unstable;
    bool stable = false;
};
StabilityResult classify_radius(double rho, double margin = 1e-9);
StabilityResult stability(const PairwiseModel& m, const MessageSet& fp);

// Composite r-then-q map on q(1) of the slots in factors of arity >= 2.
std::vector<int> factor_state_slots(const FactorGraph& fg);
Eigen::MatrixXd factor_bp_jacobian_fd(const FactorGraph& fg, const FactorMessages& fp, double h = 1e-6);
StabilityResult factor_stability(const FactorGraph& fg, const FactorMessages& fp);

// p(J, d); nullopt when |J| is at or below the critical coupling
std::optional<double> phase_boundary(double J, int d);
PhaseRegion classify_region(double J, double theta, int d);
// (mean degree - 1) rounded, at least 2
int default_region_degree(const PairwiseModel& m);

std::vector<double> combine_marginals(const std::vector<FixedPointReport>& reports, CombineMode mode);

struct EvaluateOptions {
    double damping = 0.0;
};

FixedPointReport evaluate_fixed_point(const PairwiseModel& m, const MessageSet& fp, const ExactResult* exact, const EvaluateOptions& opts = {});
std::vector<FixedPointReport> evaluate_fixed_points(const PairwiseModel& m, const SolutionSet& sols, const ExactResult* exact = nullptr, const EvaluateOptions& opts = {});

} // namespace bpfp
