#include "bpfp/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bpfp {

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

PairwiseModel::PairwiseModel(int n, std::vector<Edge> edges, std::vector<double> couplings, std::vector<double> fields)
    : n_(n), edges_(std::move(edges)), J_(std::move(couplings)), theta_(std::move(fields))
{
    require(n_ >= 1, "node count must be positive");
    require(J_.size() == edges_.size(), "coupling count does not match edge count");
    require(static_cast<int>(theta_.size()) == n_, "field count does not match node count");
    nbrs_.assign(n_, {});
    for (size_t k = 0; k < edges_.size(); ++k) {
        auto [i, j] = edges_[k];
        require(i >= 0 && j >= 0 && i < n_ && j < n_, "edge endpoint out of range");
        require(i != j, "self-loop");
        if (i > j) std::swap(i, j);
        edges_[k] = {i, j};
        require(edge_idx_.emplace(edges_[k], static_cast<int>(k)).second, "duplicate edge");
        require(std::isfinite(J_[k]), "non-finite coupling");
        nbrs_[i].push_back(j);
        nbrs_[j].push_back(i);
    }
    for (double t : theta_) require(std::isfinite(t), "non-finite field");
    for (auto& nb : nbrs_) std::sort(nb.begin(), nb.end());
    for (auto [i, j] : edges_) {
        directed_.push_back({i, j});
        directed_.push_back({j, i});
    }
    std::sort(directed_.begin(), directed_.end());
    for (size_t e = 0; e < directed_.size(); ++e) {
        dir_idx_[directed_[e]] = static_cast<int>(e);
        dirJ_.push_back(coupling(directed_[e].first, directed_[e].second));
    }
}

double PairwiseModel::coupling(int i, int j) const
{
    if (i > j) std::swap(i, j);
    auto it = edge_idx_.find({i, j});
    if (it == edge_idx_.end()) throw std::out_of_range("no such edge");
    return J_[it->second];
}

int PairwiseModel::dir_index(int i, int j) const
{
    auto it = dir_idx_.find({i, j});
    if (it == dir_idx_.end()) throw std::out_of_range("no such directed edge");
    return it->second;
}

void FactorGraph::validate() const
{
    require(variable_count >= 1, "variable count must be positive");
    require(static_cast<int>(cardinalities.size()) == variable_count, "cardinality list size mismatch");
    for (int c : cardinalities) require(c == 2, "only binary variables are supported");
    for (const auto& f : factors) {
        size_t expect = 1;
        for (int v : f.vars) {
            require(v >= 0 && v < variable_count, "factor variable out of range");
            expect *= cardinalities[v];
        }
        require(f.table.size() == expect, "factor table size mismatch");
        bool pos = false;
        for (double t : f.table) {
            require(std::isfinite(t) && t >= 0.0, "factor entries must be finite and non-negative");
            pos = pos || t > 0.0;
        }
        require(pos, "factor table is identically zero");
    }
}

std::vector<std::pair<int, int>> FactorGraph::factors_of(int v) const
{
    std::vector<std::pair<int, int>> out;
    for (size_t a = 0; a < factors.size(); ++a)
        for (size_t k = 0; k < factors[a].vars.size(); ++k)
            if (factors[a].vars[k] == v) out.push_back({static_cast<int>(a), static_cast<int>(k)});
    return out;
}

PairwiseModel build_grid(int rows, int cols, const std::map<Edge, double>& couplings, const std::vector<double>& fields)
{
    require(rows >= 1 && cols >= 1, "grid dimensions must be positive");
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) edges.push_back({v, v + 1});
            if (r + 1 < rows) edges.push_back({v, v + cols});
        }
    require(couplings.size() == edges.size(), "coupling map size does not match lattice");
    std::vector<double> J;
    for (auto e : edges) {
        auto it = couplings.find(e);
        require(it != couplings.end(), "coupling map missing a lattice edge");
        J.push_back(it->second);
    }
    return PairwiseModel(rows * cols, edges, J, fields);
}

PairwiseModel build_grid(int rows, int cols, double J, double theta)
{
    require(rows >= 1 && cols >= 1, "grid dimensions must be positive");
    std::map<Edge, double> cp;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) cp[{v, v + 1}] = J;
            if (r + 1 < rows) cp[{v, v + cols}] = J;
        }
    return build_grid(rows, cols, cp, std::vector<double>(rows * cols, theta));
}

PairwiseModel build_complete(int n, double J, double theta)
{
    require(n >= 1, "node count must be positive");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
    return PairwiseModel(n, edges, std::vector<double>(edges.size(), J), std::vector<double>(n, theta));
}

double log_unnormalized_weight(const PairwiseModel& m, const Assignment& a)
{
    require(static_cast<int>(a.size()) == m.node_count(), "assignment length mismatch");
    double s = 0.0;
    for (size_t k = 0; k < m.edges().size(); ++k) {
        auto [i, j] = m.edges()[k];
        s += m.couplings()[k] * a[i] * a[j];
    }
    for (int i = 0; i < m.node_count(); ++i) s += m.field(i) * a[i];
    return s;
}

double unnormalized_weight(const PairwiseModel& m, const Assignment& a)
{
    return std::exp(log_unnormalized_weight(m, a));
}

FactorGraph to_factor_graph(const PairwiseModel& m)
{
    FactorGraph fg;
    fg.variable_count = m.node_count();
    fg.cardinalities.assign(m.node_count(), 2);
    for (int i = 0; i < m.node_count(); ++i)
        fg.factors.push_back({{i}, {std::exp(-m.field(i)), std::exp(m.field(i))}});
    for (size_t k = 0; k < m.edges().size(); ++k) {
        auto [i, j] = m.edges()[k];
        double J = m.couplings()[k];
        Factor f{{i, j}, std::vector<double>(4)};
        for (int si = 0; si < 2; ++si)
            for (int sj = 0; sj < 2; ++sj) f.table[si | (sj << 1)] = std::exp(J * (2 * si - 1) * (2 * sj - 1));
        fg.factors.push_back(f);
    }
    return fg;
}

double factor_weight(const FactorGraph& fg, const std::vector<int>& states)
{
    require(static_cast<int>(states.size()) == fg.variable_count, "assignment length mismatch");
    double w = 1.0;
    for (const auto& f : fg.factors) {
        size_t idx = 0;
        for (size_t k = 0; k < f.vars.size(); ++k) idx |= static_cast<size_t>(states[f.vars[k]]) << k;
        w *= f.table[idx];
    }
    return w;
}

namespace {

double finite_number(const nlohmann::json& j)
{
    require(j.is_number(), "expected a number");
    double v = j.get<double>();
    require(std::isfinite(v), "NaN/Inf in model file");
    return v;
}

} // namespace

AnyModel parse_model_json(const std::string& text)
{
    nlohmann::json j = nlohmann::json::parse(text);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "factor_graph") {
        FactorGraph fg;
        fg.variable_count = j.at("vars").get<int>();
        fg.cardinalities.assign(fg.variable_count, 2);
        for (const auto& f : j.at("factors")) {
            Factor fac;
            fac.vars = f.at("vars").get<std::vector<int>>();
            for (const auto& t : f.at("table")) fac.table.push_back(finite_number(t));
            fg.factors.push_back(fac);
        }
        fg.validate();
        return fg;
    }
    require(kind == "grid" || kind == "complete" || kind == "custom", "unknown model kind: " + kind);
    int n = j.at("nodes").get<int>();
    std::vector<Edge> edges;
    std::vector<double> J;
    for (const auto& e : j.at("edges")) {
        require(e.is_array() && e.size() == 3, "edge entries are [i, j, J]");
        edges.push_back({e[0].get<int>(), e[1].get<int>()});
        J.push_back(finite_number(e[2]));
    }
    std::vector<double> th;
    for (const auto& t : j.at("fields")) th.push_back(finite_number(t));
    return PairwiseModel(n, edges, J, th);
}

AnyModel load_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str());
}

std::string model_to_json(const PairwiseModel& m)
{
    nlohmann::json j;
    j["kind"] = "custom";
    j["nodes"] = m.node_count();
    j["edges"] = nlohmann::json::array();
    for (size_t k = 0; k < m.edges().size(); ++k)
        j["edges"].push_back({m.edges()[k].first, m.edges()[k].second, m.couplings()[k]});
    j["fields"] = m.fields();
    return j.dump();
}

} // namespace bpfp
