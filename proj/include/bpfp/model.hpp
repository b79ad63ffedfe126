#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bpfp {

using Edge = std::pair<int, int>;

// Binary pairwise Ising model, spins in {-1,+1}, beta fixed to 1.
class PairwiseModel {
public:
    PairwiseModel() = default;
    PairwiseModel(int n, std::vector<Edge> edges, std::vector<double> couplings, std::vector<double> fields);

    int node_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& couplings() const { return J_; }
    const std::vector<double>& fields() const { return theta_; }
    double coupling(int i, int j) const;
    double field(int i) const { return theta_[i]; }

    const std::vector<int>& neighbors(int i) const { return nbrs_[i]; }
    int degree(int i) const { return static_cast<int>(nbrs_[i].size()); }

    // directed edges i->j sorted lexicographically
    const std::vector<Edge>& directed() const { return directed_; }
    int directed_count() const { return static_cast<int>(directed_.size()); }
    int dir_index(int i, int j) const;
    // coupling of the undirected edge behind directed edge e
    double dir_coupling(int e) const { return dirJ_[e]; }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> J_;
    std::vector<double> theta_;
    std::vector<std::vector<int>> nbrs_;
    std::vector<Edge> directed_;
    std::vector<double> dirJ_;
    std::map<Edge, int> dir_idx_;
    std::map<Edge, int> edge_idx_;
};

struct Factor {
    std::vector<int> vars;
    // index = sum_k state(vars[k]) << k
    std::vector<double> table;
};

struct FactorGraph {
    int variable_count = 0;
    std::vector<int> cardinalities;
    std::vector<Factor> factors;

    void validate() const;
    // factors touching variable v, as (factor, position in factor)
    std::vector<std::pair<int, int>> factors_of(int v) const;
};

// spins in {-1,+1}
using Assignment = std::vector<int>;

PairwiseModel build_grid(int rows, int cols, const std::map<Edge, double>& couplings, const std::vector<double>& fields);
PairwiseModel build_grid(int rows, int cols, double J, double theta);
PairwiseModel build_complete(int n, double J, double theta);

double log_unnormalized_weight(const PairwiseModel& m, const Assignment& a);
double unnormalized_weight(const PairwiseModel& m, const Assignment& a);

// unary tables [e^-theta, e^theta], pairwise tables over (x_i, x_j), state 0 <-> spin -1
FactorGraph to_factor_graph(const PairwiseModel& m);
// states in {0,1}
double factor_weight(const FactorGraph& fg, const std::vector<int>& states);

using AnyModel = std::variant<PairwiseModel, FactorGraph>;
AnyModel parse_model_json(const std::string& text);
AnyModel load_model_file(const std::string& path);
std::string model_to_json(const PairwiseModel& m);

} // namespace bpfp
