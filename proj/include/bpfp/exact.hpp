#pragma once

#include "bpfp/model.hpp"

#include <array>
#include <vector>

namespace bpfp {

inline constexpr int kExactMaxVariables = 25;

struct ExactResult {
    double log_partition = 0.0;
    // P(X_i = +1) for pairwise models, P(X_i = 1) for factor graphs
    std::vector<double> marginals;
    // per undirected edge, index 2*s_i + s_j with s = 1 for spin +1 (pairwise models only)
    std::vector<std::array<double, 4>> pairwise_marginals;
};

ExactResult enumerate_exact(const PairwiseModel& m);
ExactResult enumerate_exact(const FactorGraph& fg);

double mean_magnetization(const std::vector<double>& p_plus);
double mse(const std::vector<double>& exact, const std::vector<double>& approx);

} // namespace bpfp
