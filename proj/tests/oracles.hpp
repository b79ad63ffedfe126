#pragma once

#include "bpfp/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

// log Z and P(x_i = +1) of a chain 0-1-...-(n-1) by transfer matrices
struct ChainResult {
    double logZ = 0.0;
    std::vector<double> p_plus;
};

inline ChainResult chain(const std::vector<double>& J, const std::vector<double>& theta)
{
    const size_t n = theta.size();
    auto node = [&](size_t i, int s) { return std::exp(theta[i] * (s ? 1.0 : -1.0)); };
    auto pair = [&](size_t i, int a, int b) { return std::exp(J[i] * (a ? 1.0 : -1.0) * (b ? 1.0 : -1.0)); };
    std::vector<Eigen::Vector2d> fwd(n), bwd(n);
    fwd[0] = Eigen::Vector2d(node(0, 0), node(0, 1));
    for (size_t i = 1; i < n; ++i)
        for (int b = 0; b < 2; ++b) fwd[i][b] = node(i, b) * (fwd[i - 1][0] * pair(i - 1, 0, b) + fwd[i - 1][1] * pair(i - 1, 1, b));
    bwd[n - 1] = Eigen::Vector2d(1.0, 1.0);
    for (size_t i = n - 1; i-- > 0;)
        for (int a = 0; a < 2; ++a) bwd[i][a] = pair(i, a, 0) * node(i + 1, 0) * bwd[i + 1][0] + pair(i, a, 1) * node(i + 1, 1) * bwd[i + 1][1];
    ChainResult r;
    const double Z = fwd[n - 1].sum();
    r.logZ = std::log(Z);
    for (size_t i = 0; i < n; ++i) r.p_plus.push_back(fwd[i][1] * bwd[i][1] / Z);
    return r;
}

// Z of a single edge in closed form
inline double single_edge_Z(double J, double t1, double t2)
{
    return 2.0 * std::exp(J) * std::cosh(t1 + t2) + 2.0 * std::exp(-J) * std::cosh(t1 - t2);
}

inline std::vector<std::complex<double>> poly_roots(const std::vector<std::complex<double>>& c)
{
    // c[0] + c[1] z + ... + c[d] z^d via the companion matrix
    const int d = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -c[i] / c[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < d; ++i) out.push_back(es.eigenvalues()[i]);
    return out;
}

// Torus solutions of 1 + a x + b x^2 y^2 = 0, 1 + c x + d y + e x y^2 = 0 by elimination:
// y = (e (1 + a x) - b x (1 + c x)) / (b d x) and y^2 = -(1 + a x) / (b x^2) give the quartic
// (e (1 + a x) - b x (1 + c x))^2 + b d^2 (1 + a x) = 0; roots with x = -1/a are dropped.
inline std::vector<std::pair<std::complex<double>, std::complex<double>>> worked_example_solutions(double a, double b, double c, double d, double e)
{
    using C = std::complex<double>;
    // g(x) = e + (e a - b) x - b c x^2
    const double g0 = e, g1 = e * a - b, g2 = -b * c;
    std::vector<C> q{g0 * g0 + b * d * d, 2 * g0 * g1 + b * d * d * a, g1 * g1 + 2 * g0 * g2, 2 * g1 * g2, g2 * g2};
    while (std::abs(q.back()) == 0.0) q.pop_back();
    std::vector<std::pair<C, C>> out;
    for (C x : poly_roots(q)) {
        if (std::abs(1.0 + a * x) < 1e-9) continue;
        const C y = (e * (1.0 + a * x) - b * x * (1.0 + c * x)) / (b * d * x);
        out.push_back({x, y});
    }
    return out;
}

inline bpfp::PairwiseModel random_tree(int n, std::mt19937_64& rng, double K)
{
    std::uniform_real_distribution<double> u(-K, K);
    std::vector<bpfp::Edge> edges;
    std::vector<double> J, th;
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        edges.push_back({parent(rng), v});
        J.push_back(u(rng));
    }
    for (int v = 0; v < n; ++v) th.push_back(u(rng));
    return bpfp::PairwiseModel(n, edges, J, th);
}

} // namespace oracle
