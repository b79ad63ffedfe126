#pragma once

#include "bpfp/bp.hpp"
#include "bpfp/homotopy.hpp"
#include "bpfp/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace bpfp {

struct BscChannel {
    double epsilon = 0.0;
    explicit BscChannel(double eps);
};

using Word7 = std::array<int, 7>;

// parity checks over 0-based bit positions
extern const std::array<std::array<int, 4>, 3> kHammingChecks;

struct CodeInstance {
    Word7 received{};
    BscChannel channel{0.0};
    FactorGraph graph;
};

// soft_zero replaces the zero entries of the parity indicators
CodeInstance build_hamming(const Word7& y, double eps, double soft_zero = 0.0);
Word7 flipped_word(int flip_position);  // 1-based
std::vector<Word7> hamming_codewords();

enum class DecodeMethod { Exact, BP, NPHC };
const char* to_string(DecodeMethod m);

// P(X_bit = 0 | y) by enumeration of all 2^7 words and of the 16 codewords
double exact_bit_zero(const CodeInstance& code, int bit);
double codeword_bit_zero(const CodeInstance& code, int bit);

struct DecodePoint {
    double epsilon = 0.0;
    double p_bit_zero = 0.0;
    int positive_fixed_points = 0;
    int stable_fixed_points = 0;
    double spectral_radius = 0.0;
    std::optional<BpStatus> bp_status;
    int bp_iterations = 0;
    bool solver_failed = false;
};

struct DecodeOptions {
    BpOptions bp;
    SolveOptions solve;
    uint64_t seed = 1;
    double soft_zero = 0.0;
    int threads = 1;
};

struct DecodeResult {
    std::vector<DecodePoint> points;
    // largest grid epsilon with P(X_bit = 0 | y) > 0.5
    std::optional<double> threshold;
};

std::vector<double> default_epsilon_grid();
DecodeResult decode_threshold(int flip_position, DecodeMethod method, const std::vector<double>& eps_grid, const DecodeOptions& opts = {});

} // namespace bpfp
