#include "bpfp/codes.hpp"
#include "bpfp/exact.hpp"

#include <gtest/gtest.h>

using namespace bpfp;

TEST(Codes, SixteenCodewords)
{
    const auto cw = hamming_codewords();
    ASSERT_EQ(cw.size(), 16u);
    for (const auto& w : cw)
        for (const auto& chk : kHammingChecks) EXPECT_EQ((w[chk[0]] + w[chk[1]] + w[chk[2]] + w[chk[3]]) % 2, 0);
}

TEST(Codes, ExactMethodsAgree)
{
    for (int flip = 1; flip <= 7; ++flip)
        for (double eps : {0.01, 0.13, 0.21, 0.4}) {
            const auto code = build_hamming(flipped_word(flip), eps);
            for (int bit = 0; bit < 7; ++bit) EXPECT_NEAR(exact_bit_zero(code, bit), codeword_bit_zero(code, bit), 1e-12);
        }
}

TEST(Codes, ChannelValidation)
{
    EXPECT_THROW(BscChannel(0.6), std::invalid_argument);
    EXPECT_THROW(BscChannel(-0.1), std::invalid_argument);
    EXPECT_THROW(flipped_word(0), std::invalid_argument);
    EXPECT_THROW(build_hamming(Word7{2, 0, 0, 0, 0, 0, 0}, 0.1), std::invalid_argument);
}

TEST(Codes, BpMatchesPolynomialSolve)
{
    for (double eps : {0.05, 0.2}) {
        const auto b = decode_threshold(1, DecodeMethod::BP, {eps});
        const auto n = decode_threshold(1, DecodeMethod::NPHC, {eps});
        EXPECT_EQ(n.points[0].positive_fixed_points, 1);
        EXPECT_NEAR(b.points[0].p_bit_zero, n.points[0].p_bit_zero, 1e-6);
    }
}

TEST(Codes, ExactThresholdOnCoarseGrid)
{
    const auto r = decode_threshold(1, DecodeMethod::Exact, {0.1, 0.2, 0.3});
    ASSERT_TRUE(r.threshold);
    EXPECT_DOUBLE_EQ(*r.threshold, 0.2);
}
