#include "bpfp/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace bpfp;

TEST(Model, GridAndCompleteShapes)
{
    const auto g = build_grid(3, 3, 1.0, 0.5);
    EXPECT_EQ(g.node_count(), 9);
    EXPECT_EQ(g.edges().size(), 12u);
    EXPECT_EQ(g.directed_count(), 24);
    EXPECT_EQ(g.degree(4), 4);
    EXPECT_EQ(g.degree(0), 2);
    const auto k = build_complete(4, -2.0, 0.0);
    EXPECT_EQ(k.edges().size(), 6u);
    EXPECT_EQ(k.directed_count(), 12);
    EXPECT_DOUBLE_EQ(k.coupling(2, 1), -2.0);
}

TEST(Model, DirectedEdgesSorted)
{
    const auto g = build_grid(2, 3, 0.3, 0.1);
    const auto& d = g.directed();
    for (size_t e = 1; e < d.size(); ++e) EXPECT_LT(d[e - 1], d[e]);
    for (size_t e = 0; e < d.size(); ++e) EXPECT_EQ(g.dir_index(d[e].first, d[e].second), static_cast<int>(e));
}

TEST(Model, RejectsInvalidInput)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(PairwiseModel(2, {{0, 0}}, {1.0}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PairwiseModel(2, {{0, 2}}, {1.0}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PairwiseModel(2, {{0, 1}, {1, 0}}, {1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PairwiseModel(2, {{0, 1}}, {nan}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PairwiseModel(2, {{0, 1}}, {1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(build_grid(0, 3, 1.0, 0.0), std::invalid_argument);
}

TEST(Model, FactorGraphWeightsMatch)
{
    const auto m = build_grid(3, 3, 0.7, -0.4);
    const auto fg = to_factor_graph(m);
    for (int s = 0; s < 512; ++s) {
        Assignment a(9);
        std::vector<int> st(9);
        for (int i = 0; i < 9; ++i) {
            st[i] = (s >> i) & 1;
            a[i] = st[i] ? 1 : -1;
        }
        const double w = unnormalized_weight(m, a);
        EXPECT_NEAR(factor_weight(fg, st) / w, 1.0, 1e-12);
        EXPECT_NEAR(std::log(w), log_unnormalized_weight(m, a), 1e-12);
    }
}

TEST(Model, JsonRoundTrip)
{
    const auto m = build_complete(4, 0.25, -1.5);
    const auto back = std::get<PairwiseModel>(parse_model_json(model_to_json(m)));
    EXPECT_EQ(back.edges(), m.edges());
    EXPECT_EQ(back.couplings(), m.couplings());
    EXPECT_EQ(back.fields(), m.fields());
}

TEST(Model, JsonRejectsBadInput)
{
    EXPECT_THROW(parse_model_json(R"({"kind":"custom","nodes":2,"edges":[[0,1,"x"]],"fields":[0,0]})"), std::exception);
    EXPECT_THROW(parse_model_json(R"({"kind":"mystery"})"), std::exception);
    EXPECT_THROW(parse_model_json("not json"), std::exception);
}

TEST(Model, JsonFactorGraph)
{
    const auto any = parse_model_json(R"({"kind":"factor_graph","vars":2,"factors":[{"vars":[0],"table":[0.3,0.7]},{"vars":[0,1],"table":[1,0,0,1]}]})");
    const auto& fg = std::get<FactorGraph>(any);
    EXPECT_EQ(fg.variable_count, 2);
    EXPECT_DOUBLE_EQ(factor_weight(fg, {1, 1}), 0.7);
    EXPECT_DOUBLE_EQ(factor_weight(fg, {1, 0}), 0.0);
}
