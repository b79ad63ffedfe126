#include "bpfp/exact.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bpfp;

TEST(Exact, DecoupledFieldsFollowTanh)
{
    std::vector<double> th{0.3, -1.2, 0.0, 2.0};
    const PairwiseModel m(4, {{0, 1}, {1, 2}, {2, 3}}, {0.0, 0.0, 0.0}, th);
    const auto r = enumerate_exact(m);
    double logZ = 0.0;
    for (size_t i = 0; i < th.size(); ++i) {
        EXPECT_NEAR(r.marginals[i], 0.5 * (1.0 + std::tanh(th[i])), 1e-12);
        logZ += std::log(2.0 * std::cosh(th[i]));
    }
    EXPECT_NEAR(r.log_partition, logZ, 1e-12);
}

TEST(Exact, SingleEdgeClosedForm)
{
    const double J = 0.8, t1 = -0.3, t2 = 1.1;
    const PairwiseModel m(2, {{0, 1}}, {J}, {t1, t2});
    const auto r = enumerate_exact(m);
    const double Z = oracle::single_edge_Z(J, t1, t2);
    EXPECT_NEAR(r.log_partition, std::log(Z), 1e-12);
    const double pp = std::exp(J + t1 + t2) / Z;
    EXPECT_NEAR(r.pairwise_marginals[0][3], pp, 1e-12);
}

TEST(Exact, ChainMatchesTransferMatrix)
{
    std::vector<double> J{0.5, -1.3, 2.0, 0.1, -0.7}, th{0.2, -0.4, 1.0, 0.0, -2.0, 0.6};
    std::vector<Edge> e;
    for (int i = 0; i < 5; ++i) e.push_back({i, i + 1});
    const auto r = enumerate_exact(PairwiseModel(6, e, J, th));
    const auto o = oracle::chain(J, th);
    EXPECT_NEAR(r.log_partition, o.logZ, 1e-10);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.marginals[i], o.p_plus[i], 1e-12);
}

TEST(Exact, PairwiseMarginalsConsistent)
{
    const auto m = build_grid(3, 3, -0.6, 0.4);
    const auto r = enumerate_exact(m);
    for (size_t k = 0; k < m.edges().size(); ++k) {
        auto [i, j] = m.edges()[k];
        const auto& p = r.pairwise_marginals[k];
        EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-12);
        EXPECT_NEAR(p[2] + p[3], r.marginals[i], 1e-12);
        EXPECT_NEAR(p[1] + p[3], r.marginals[j], 1e-12);
    }
}

TEST(Exact, FactorGraphAgreesWithPairwise)
{
    const auto m = build_complete(4, 0.9, -0.3);
    const auto a = enumerate_exact(m);
    const auto b = enumerate_exact(to_factor_graph(m));
    EXPECT_NEAR(a.log_partition, b.log_partition, 1e-12);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.marginals[i], b.marginals[i], 1e-12);
}

TEST(Exact, RejectsLargeModels)
{
    EXPECT_THROW(enumerate_exact(build_grid(1, kExactMaxVariables + 1, 1.0, 0.0)), std::length_error);
}

TEST(Exact, MseAndMagnetization)
{
    EXPECT_NEAR(mse({0.5, 0.5}, {0.7, 0.3}), 0.08, 1e-15);
    EXPECT_DOUBLE_EQ(mse({1.0, 1.0}, {0.0, 0.0}), 2.0);
    EXPECT_DOUBLE_EQ(mean_magnetization({1.0, 0.5}), 0.5);
}
