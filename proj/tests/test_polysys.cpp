#include "bpfp/polysys.hpp"
#include "bpfp/homotopy.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace bpfp;

TEST(Polysys, GridShape)
{
    const auto sys = build_bp_system(build_grid(3, 3, 1.0, 0.5));
    sys.validate();
    EXPECT_EQ(sys.equation_count(), 72u);
    EXPECT_EQ(sys.variable_count(), 72u);
    const auto st = stats(sys);
    const std::map<int, int> profile{{1, 24}, {2, 16}, {3, 24}, {4, 8}};
    EXPECT_EQ(st.degree_profile, profile);
}

TEST(Polysys, CompleteShape)
{
    const auto sys = build_bp_system(build_complete(4, 1.0, 0.5));
    EXPECT_EQ(sys.equation_count(), 36u);
    const auto st = stats(sys);
    const std::map<int, int> profile{{1, 12}, {3, 24}};
    EXPECT_EQ(st.degree_profile, profile);
}

TEST(Polysys, SingleEdgeProfile)
{
    const auto sys = build_bp_system(PairwiseModel(2, {{0, 1}}, {0.7}, {0.1, -0.2}));
    EXPECT_EQ(sys.equation_count(), 6u);
    const std::map<int, int> profile{{1, 6}};
    EXPECT_EQ(stats(sys).degree_profile, profile);
}

TEST(Polysys, ConvergedBpSolvesSystem)
{
    const auto m = build_grid(3, 3, 0.3, 0.2);
    const auto run = run_bp(m);
    ASSERT_EQ(run.status, BpStatus::Converged);
    const auto& f = run.final_messages;
    const auto sys = build_bp_system(m);
    EXPECT_LT(max_residual(sys, messages_to_point(m, f.plus, f.minus, f.alpha)), 1e-8);
}

TEST(Polysys, MessagePointRoundTrip)
{
    const auto m = build_complete(4, 0.5, 0.5);
    const auto s = bp_step(m, MessageSet::random(m, 3));
    const auto back = point_to_messages(m, messages_to_point(m, s.plus, s.minus, s.alpha));
    EXPECT_LT(message_change(s, back), 1e-15);
}

TEST(Polysys, WriteReadRoundTrip)
{
    const auto sys = build_bp_system(build_grid(2, 2, -0.4, 0.9));
    std::stringstream ss;
    write_system(ss, sys);
    const auto back = read_system(ss);
    ASSERT_EQ(back.variable_count(), sys.variable_count());
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    CVec x(sys.variable_count());
    for (auto& v : x) v = {g(rng), g(rng)};
    const auto a = residual(sys, x), b = residual(back, x);
    for (size_t k = 0; k < a.size(); ++k) EXPECT_LT(std::abs(a[k] - b[k]), 1e-9 * (1.0 + std::abs(a[k])));
}

TEST(Polysys, ReductionLiftsToFullSolutions)
{
    const auto m = build_grid(1, 3, 0.9, -0.4);
    const auto sys = build_bp_system(m);
    ASSERT_TRUE(sys.reduction);
    const auto sols = solve_all(sys, 2);
    ASSERT_FALSE(sols.distinct_complex.empty());
    for (const auto& p : sols.distinct_complex) {
        ASSERT_EQ(p.size(), sys.variable_count());
        EXPECT_LT(max_residual(sys, p), 1e-8);
    }
}

TEST(Polysys, FactorSystemForUnaryVariable)
{
    FactorGraph fg;
    fg.variable_count = 2;
    fg.cardinalities = {2, 2};
    fg.factors.push_back({{0}, {0.2, 0.8}});
    fg.factors.push_back({{0, 1}, {1.0, 0.5, 0.5, 1.0}});
    const auto sys = build_factor_bp_system(fg);
    sys.validate();
    const auto sols = solve_all(sys, 1);
    ASSERT_EQ(sols.positive_real.size(), 1u);
    const auto fm = point_to_factor_messages(fg, sols.positive_real[0]);
    const auto run = run_factor_bp(fg);
    const auto a = factor_beliefs(fg, fm), b = factor_beliefs(fg, run.final_messages);
    EXPECT_NEAR(a[0], 0.8, 1e-8);
    EXPECT_NEAR(a[1], b[1], 1e-8);
}

TEST(Polysys, RejectsMalformedSystem)
{
    PolynomialSystem s;
    s.var_names = {"x", "y"};
    s.is_message = {false, false};
    s.equations = {{{1.0, {1, 0}}}};
    EXPECT_THROW(s.validate(), std::invalid_argument);
}
