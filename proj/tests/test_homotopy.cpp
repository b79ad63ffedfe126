#include "bpfp/homotopy.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace bpfp;

namespace {

// 1 + a x + b x^2 y^2, 1 + c x + d y + e x y^2
PolynomialSystem worked_example(double a, double b, double c, double d, double e)
{
    PolynomialSystem s;
    s.var_names = {"x", "y"};
    s.is_message = {false, false};
    s.equations = {{{1.0, {0, 0}}, {a, {1, 0}}, {b, {2, 2}}}, {{1.0, {0, 0}}, {c, {1, 0}}, {d, {0, 1}}, {e, {1, 2}}}};
    return s;
}

bool has_match(const std::vector<CVec>& sols, cplx x, cplx y, double tol)
{
    return std::any_of(sols.begin(), sols.end(), [&](const CVec& p) { return std::abs(p[0] - x) < tol && std::abs(p[1] - y) < tol; });
}

} // namespace

TEST(Homotopy, WorkedExampleCellsWithFixedLifting)
{
    NewtonPolytopeSet P;
    P.supports = {{{0, 0}, {1, 0}, {2, 2}}, {{0, 0}, {0, 1}, {1, 0}, {1, 2}}};
    const auto dec = mixed_cells(P, {{0, 0, 0}, {0, 1, 1, 3}});
    ASSERT_EQ(dec.cells.size(), 2u);
    for (const auto& c : dec.cells) EXPECT_EQ(c.volume, 2);
    EXPECT_EQ(dec.bound(), 4);
}

TEST(Homotopy, WorkedExampleBoundIsSeedInvariant)
{
    const auto sys = worked_example(1, 1, 1, 1, 1);
    for (uint64_t seed : {1, 2, 3, 99}) EXPECT_EQ(bkk_bound(sys, seed).bound, 4);
}

TEST(Homotopy, WorkedExampleGenericSolutions)
{
    const double a = 2.0, b = -1.5, c = 0.5, d = 3.0, e = -0.75;
    const auto sols = solve_all(worked_example(a, b, c, d, e), 7);
    const auto ref = oracle::worked_example_solutions(a, b, c, d, e);
    ASSERT_EQ(ref.size(), 4u);
    EXPECT_EQ(sols.bkk, 4);
    ASSERT_EQ(sols.distinct_complex.size(), 4u);
    for (auto [x, y] : ref) EXPECT_TRUE(has_match(sols.distinct_complex, x, y, 1e-8));
}

TEST(Homotopy, WorkedExampleUnitCoefficients)
{
    const auto sols = solve_all(worked_example(1, 1, 1, 1, 1), 3);
    const auto ref = oracle::worked_example_solutions(1, 1, 1, 1, 1);
    ASSERT_EQ(ref.size(), 3u);
    EXPECT_EQ(sols.bkk, 4);
    EXPECT_EQ(sols.success_count(), 4);
    ASSERT_EQ(sols.distinct_complex.size(), 4u);
    for (auto [x, y] : ref) EXPECT_TRUE(has_match(sols.distinct_complex, x, y, 1e-8));
    EXPECT_TRUE(has_match(sols.distinct_complex, -1.0, 0.0, 1e-8));
}

TEST(Homotopy, BinomialSolutions)
{
    const std::vector<std::vector<long long>> V{{2, 1}, {0, 3}};
    const CVec b{cplx(1.0, 2.0), cplx(-0.5, 0.25)};
    const auto s = solve_binomial(V, b);
    ASSERT_EQ(s.size(), 6u);
    for (const auto& x : s) {
        EXPECT_LT(std::abs(x[0] * x[0] * x[1] - b[0]), 1e-10);
        EXPECT_LT(std::abs(x[1] * x[1] * x[1] - b[1]), 1e-10);
    }
}

TEST(Homotopy, DenseMixedVolumeIsBezout)
{
    NewtonPolytopeSet P;
    Support quad, cubic;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j) quad.push_back({i, j});
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) cubic.push_back({i, j});
    P.supports = {quad, cubic};
    EXPECT_EQ(bkk_bound(P, 1).bound, 6);
    Support quad3;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j)
            for (int k = 0; i + j + k <= 2; ++k) quad3.push_back({i, j, k});
    P.supports = {quad3, quad3, quad3};
    EXPECT_EQ(bkk_bound(P, 4).bound, 8);
}

TEST(Homotopy, IdentityHomotopyKeepsStart)
{
    const auto sys = worked_example(1, 1, 1, 1, 1);
    const auto ref = oracle::worked_example_solutions(1, 1, 1, 1, 1);
    const CVec x0{ref[0].first, ref[0].second};
    const auto r = track_path(sys, sys, cplx(0.6, 0.8), x0);
    EXPECT_EQ(r.status, PathStatus::Success);
    EXPECT_LT(std::abs(r.endpoint[0] - x0[0]) + std::abs(r.endpoint[1] - x0[1]), 1e-9);
}

TEST(Homotopy, StartSystemPointsSolveBinomials)
{
    const auto sys = worked_example(2, 1, -1, 1, 3);
    const auto bk = bkk_bound(sys, 5);
    const auto ss = start_system(bk.cells, 5);
    ASSERT_EQ(static_cast<long long>(ss.points.size()), bk.bound);
    for (size_t k = 0; k < ss.points.size(); ++k) EXPECT_LT(binomial_residual(ss, bk.cells, k), 1e-10);
}

TEST(Homotopy, PositiveCountSeedInvariant)
{
    const auto sys = build_bp_system(build_complete(4, 1.0, 0.5));
    SolveOptions o;
    const auto a = solve_all(sys, 1, o), b = solve_all(sys, 2, o);
    EXPECT_EQ(a.bkk, 120);
    EXPECT_EQ(a.bkk, b.bkk);
    EXPECT_EQ(a.positive_real.size(), b.positive_real.size());
    EXPECT_EQ(a.status_counts.at(PathStatus::Success), b.status_counts.at(PathStatus::Success));
}

TEST(Homotopy, CacheReusesStructure)
{
    StructureCache cache;
    const auto s1 = solve_all(build_bp_system(build_grid(1, 3, 0.5, 0.1)), 1, {}, &cache);
    const auto s2 = solve_all(build_bp_system(build_grid(1, 3, -0.8, 0.6)), 1, {}, &cache);
    EXPECT_FALSE(s1.timings.reused_structure);
    EXPECT_TRUE(s2.timings.reused_structure);
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_EQ(s2.positive_real.size(), 1u);
}
