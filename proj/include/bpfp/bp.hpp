#pragma once

#include "bpfp/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace bpfp {

// Messages indexed by the model's sorted directed edges.
struct MessageSet {
    std::vector<double> plus;   // mu_{i->j}(x_j = +1)
    std::vector<double> minus;  // mu_{i->j}(x_j = -1)
    std::vector<double> alpha;  // normalizer of the last update

    static MessageSet uniform(const PairwiseModel& m);
    static MessageSet random(const PairwiseModel& m, uint64_t seed);
    size_t size() const { return plus.size(); }
};

enum class BpStatus { Converged, MaxIters, LimitCycle };
const char* to_string(BpStatus s);

enum class BpInit { Uniform, Random, Explicit };

struct BpOptions {
    int max_iters = 10000;
    double tolerance = 1e-10;
    double damping = 0.0;
    BpInit init = BpInit::Uniform;
    uint64_t seed = 0;
    std::optional<MessageSet> initial;
    int cycle_window = 64;
    bool keep_history = true;
};

struct BpRun {
    BpStatus status = BpStatus::MaxIters;
    int period = 0;
    int iterations = 0;
    MessageSet final_messages;
    std::vector<double> residual_history;
};

MessageSet bp_step(const PairwiseModel& m, const MessageSet& msgs);
double message_change(const MessageSet& a, const MessageSet& b);
BpRun run_bp(const PairwiseModel& m, const BpOptions& opts = {});

std::vector<double> beliefs(const PairwiseModel& m, const MessageSet& msgs);
// per undirected edge, index 2*s_i + s_j with s = 1 for spin +1
std::vector<std::array<double, 4>> pairwise_beliefs(const PairwiseModel& m, const MessageSet& msgs);

// Factor-graph messages, one slot per (factor, position) edge in factor order.
struct FactorEdges {
    std::vector<std::pair<int, int>> slots;  // (factor, position)
    std::vector<int> variable;               // variable behind each slot
    std::vector<std::vector<int>> of_factor; // slot ids per factor
    std::vector<std::vector<int>> of_variable;
    explicit FactorEdges(const FactorGraph& fg);
    FactorEdges() = default;
};

struct FactorMessages {
    std::vector<std::array<double, 2>> q;  // variable -> factor, normalized
    std::vector<std::array<double, 2>> r;  // factor -> variable, unnormalized
    std::vector<double> alpha;

    static FactorMessages uniform(const FactorGraph& fg);
    static FactorMessages random(const FactorGraph& fg, uint64_t seed);
};

// r-update from the incoming q, then q-update from the fresh r
FactorMessages factor_bp_step(const FactorGraph& fg, const FactorMessages& msgs);
double factor_message_change(const FactorMessages& a, const FactorMessages& b);

struct FactorBpRun {
    BpStatus status = BpStatus::MaxIters;
    int period = 0;
    int iterations = 0;
    FactorMessages final_messages;
    std::vector<double> residual_history;
};

FactorBpRun run_factor_bp(const FactorGraph& fg, const BpOptions& opts = {}, const std::optional<FactorMessages>& init = {});
// P(Y_i = 1)
std::vector<double> factor_beliefs(const FactorGraph& fg, const FactorMessages& msgs);

} // namespace bpfp
