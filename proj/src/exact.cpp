#include "bpfp/exact.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpfp {

namespace {

// Neumaier compensated sum
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x)
    {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

void check_capacity(int n)
{
    if (n > kExactMaxVariables)
        throw std::length_error("exact enumeration capped at " + std::to_string(kExactMaxVariables) + " variables");
}

template <class LogWeight, class Visit>
double enumerate(int n, LogWeight logw, Visit visit)
{
    const uint64_t total = uint64_t{1} << n;
    double mx = -std::numeric_limits<double>::infinity();
    for (uint64_t s = 0; s < total; ++s) mx = std::max(mx, logw(s));
    CompensatedSum z;
    for (uint64_t s = 0; s < total; ++s) {
        double lw = logw(s);
        if (lw == -std::numeric_limits<double>::infinity()) continue;
        double w = std::exp(lw - mx);
        z.add(w);
        visit(s, w);
    }
    return mx + std::log(z.value());
}

} // namespace

ExactResult enumerate_exact(const PairwiseModel& m)
{
    const int n = m.node_count();
    check_capacity(n);
    const auto& edges = m.edges();
    std::vector<CompensatedSum> marg(n);
    std::vector<std::array<CompensatedSum, 4>> pair(edges.size());
    auto logw = [&](uint64_t s) {
        double v = 0.0;
        for (size_t k = 0; k < edges.size(); ++k) {
            int xi = (s >> edges[k].first) & 1 ? 1 : -1;
            int xj = (s >> edges[k].second) & 1 ? 1 : -1;
            v += m.couplings()[k] * xi * xj;
        }
        for (int i = 0; i < n; ++i) v += m.field(i) * (((s >> i) & 1) ? 1 : -1);
        return v;
    };
    CompensatedSum z;
    auto visit = [&](uint64_t s, double w) {
        z.add(w);
        for (int i = 0; i < n; ++i)
            if ((s >> i) & 1) marg[i].add(w);
        for (size_t k = 0; k < edges.size(); ++k) {
            int si = (s >> edges[k].first) & 1, sj = (s >> edges[k].second) & 1;
            pair[k][2 * si + sj].add(w);
        }
    };
    ExactResult r;
    r.log_partition = enumerate(n, logw, visit);
    double Z = z.value();
    r.marginals.resize(n);
    for (int i = 0; i < n; ++i) r.marginals[i] = marg[i].value() / Z;
    r.pairwise_marginals.resize(edges.size());
    for (size_t k = 0; k < edges.size(); ++k)
        for (int c = 0; c < 4; ++c) r.pairwise_marginals[k][c] = pair[k][c].value() / Z;
    return r;
}

ExactResult enumerate_exact(const FactorGraph& fg)
{
    fg.validate();
    const int n = fg.variable_count;
    check_capacity(n);
    std::vector<std::vector<double>> logt;
    for (const auto& f : fg.factors) {
        std::vector<double> lt;
        for (double t : f.table) lt.push_back(t > 0 ? std::log(t) : -std::numeric_limits<double>::infinity());
        logt.push_back(lt);
    }
    auto logw = [&](uint64_t s) {
        double v = 0.0;
        for (size_t a = 0; a < fg.factors.size(); ++a) {
            const auto& f = fg.factors[a];
            size_t idx = 0;
            for (size_t k = 0; k < f.vars.size(); ++k) idx |= ((s >> f.vars[k]) & 1) << k;
            v += logt[a][idx];
        }
        return v;
    };
    std::vector<CompensatedSum> marg(n);
    CompensatedSum z;
    auto visit = [&](uint64_t s, double w) {
        z.add(w);
        for (int i = 0; i < n; ++i)
            if ((s >> i) & 1) marg[i].add(w);
    };
    ExactResult r;
    r.log_partition = enumerate(n, logw, visit);
    r.marginals.resize(n);
    for (int i = 0; i < n; ++i) r.marginals[i] = marg[i].value() / z.value();
    return r;
}

double mean_magnetization(const std::vector<double>& p_plus)
{
    if (p_plus.empty()) return 0.0;
    double s = 0.0;
    for (double p : p_plus) s += 2.0 * p - 1.0;
    return s / static_cast<double>(p_plus.size());
}

double mse(const std::vector<double>& exact, const std::vector<double>& approx)
{
    if (exact.size() != approx.size()) throw std::invalid_argument("mse: length mismatch");
    if (exact.empty()) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < exact.size(); ++i) s += (exact[i] - approx[i]) * (exact[i] - approx[i]);
    return 2.0 * s / static_cast<double>(exact.size());
}

} // namespace bpfp
