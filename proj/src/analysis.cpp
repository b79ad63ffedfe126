#include "bpfp/analysis.hpp"

#include "bpfp/polysys.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpfp {

const char* to_string(Stability s)
{
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
    }
    return "?";
}

const char* to_string(PhaseRegion r)
{
    switch (r) {
    case PhaseRegion::I: return "I";
    case PhaseRegion::II: return "II";
    case PhaseRegion::III: return "III";
    }
    return "?";
}

const char* to_string(CombineMode m)
{
    switch (m) {
    case CombineMode::All: return "ALL";
    case CombineMode::Stable: return "STABLE";
    case CombineMode::Max: return "MAX";
    }
    return "?";
}

namespace {

double xlogy(double x, double y)
{
    return x < 1e-300 ? 0.0 : x * std::log(y);
}

} // namespace

double bethe_free_energy(const PairwiseModel& m, const std::vector<double>& beliefs, const std::vector<std::array<double, 4>>& pairwise)
{
    const auto& edges = m.edges();
    if (beliefs.size() != static_cast<size_t>(m.node_count()) || pairwise.size() != edges.size())
        throw std::invalid_argument("belief sizes do not match the model");
    double F = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
        const double J = m.couplings()[e];
        for (int si = 0; si < 2; ++si)
            for (int sj = 0; sj < 2; ++sj) {
                const double p = pairwise[e][2 * si + sj];
                if (p < 1e-300) continue;
                const double xi = si ? 1.0 : -1.0, xj = sj ? 1.0 : -1.0;
                F += p * (std::log(p) - J * xi * xj);
            }
    }
    for (int i = 0; i < m.node_count(); ++i) {
        const double pp = beliefs[i], pm = 1.0 - beliefs[i];
        const double th = m.field(i);
        F -= pp * th - pm * th;
        F -= (m.degree(i) - 1) * (xlogy(pp, pp) + xlogy(pm, pm));
    }
    return F;
}

Eigen::MatrixXd bp_jacobian(const PairwiseModel& m, const MessageSet& fp)
{
    const int n = m.directed_count();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    const auto& dir = m.directed();
    for (int e = 0; e < n; ++e) {
        const auto [i, j] = dir[e];
        const double J = m.dir_coupling(e), th = m.field(i);
        const double c1 = std::exp(J + th), c2 = std::exp(-J - th), c3 = std::exp(-J + th), c4 = std::exp(J - th);
        std::vector<int> in;
        for (int k : m.neighbors(i))
            if (k != j) in.push_back(m.dir_index(k, i));
        const size_t K = in.size();
        // prefix and suffix products avoid division by small messages
        std::vector<double> pp(K + 1, 1.0), sp(K + 1, 1.0), pm(K + 1, 1.0), sm(K + 1, 1.0);
        for (size_t a = 0; a < K; ++a) {
            pp[a + 1] = pp[a] * fp.plus[in[a]];
            pm[a + 1] = pm[a] * (1.0 - fp.plus[in[a]]);
        }
        for (size_t a = K; a-- > 0;) {
            sp[a] = sp[a + 1] * fp.plus[in[a]];
            sm[a] = sm[a + 1] * (1.0 - fp.plus[in[a]]);
        }
        const double P = pp[K], Q = pm[K];
        const double vp = c1 * P + c2 * Q, vm = c3 * P + c4 * Q, S = vp + vm;
        for (size_t a = 0; a < K; ++a) {
            const double dP = pp[a] * sp[a + 1], dQ = -pm[a] * sm[a + 1];
            const double dvp = c1 * dP + c2 * dQ, dvm = c3 * dP + c4 * dQ;
            jac(e, in[a]) += (dvp * vm - vp * dvm) / (S * S);
        }
    }
    return jac;
}

Eigen::MatrixXd bp_jacobian_fd(const PairwiseModel& m, const MessageSet& fp, double h)
{
    const int n = m.directed_count();
    Eigen::MatrixXd jac(n, n);
    for (int c = 0; c < n; ++c) {
        MessageSet a = fp, b = fp;
        a.plus[c] += h;
        a.minus[c] = 1.0 - a.plus[c];
        b.plus[c] -= h;
        b.minus[c] = 1.0 - b.plus[c];
        const MessageSet fa = bp_step(m, a), fb = bp_step(m, b);
        for (int r = 0; r < n; ++r) jac(r, c) = (fa.plus[r] - fb.plus[r]) / (2.0 * h);
    }
    return jac;
}

double spectral_radius(const Eigen::MatrixXd& jac)
{
    if (jac.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(jac, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

StabilityResult classify_radius(double rho, double margin)
{
    StabilityResult r;
    r.spectral_radius = rho;
    if (std::abs(rho - 1.0) <= margin)
        r.stability = Stability::Marginal;
    else
        r.stability = rho < 1.0 ? Stability::Stable : Stability::Unstable;
    r.stable = r.stability == Stability::Stable;
    return r;
}

StabilityResult stability(const PairwiseModel& m, const MessageSet& fp)
{
    return classify_radius(spectral_radius(bp_jacobian(m, fp)));
}

std::vector<int> factor_state_slots(const FactorGraph& fg)
{
    FactorEdges fe(fg);
    std::vector<int> out;
    for (size_t s = 0; s < fe.slots.size(); ++s)
        if (fg.factors[fe.slots[s].first].vars.size() >= 2) out.push_back(static_cast<int>(s));
    return out;
}

Eigen::MatrixXd factor_bp_jacobian_fd(const FactorGraph& fg, const FactorMessages& fp, double h)
{
    const std::vector<int> slots = factor_state_slots(fg);
    const auto n = static_cast<Eigen::Index>(slots.size());
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        FactorMessages a = fp, b = fp;
        const int s = slots[c];
        a.q[s] = {1.0 - (fp.q[s][1] + h), fp.q[s][1] + h};
        b.q[s] = {1.0 - (fp.q[s][1] - h), fp.q[s][1] - h};
        const FactorMessages fa = factor_bp_step(fg, a), fb = factor_bp_step(fg, b);
        for (Eigen::Index r = 0; r < n; ++r) jac(r, c) = (fa.q[slots[r]][1] - fb.q[slots[r]][1]) / (2.0 * h);
    }
    return jac;
}

StabilityResult factor_stability(const FactorGraph& fg, const FactorMessages& fp)
{
    return classify_radius(spectral_radius(factor_bp_jacobian_fd(fg, fp)));
}

std::optional<double> phase_boundary(double J, int d)
{
    if (d < 2) throw std::invalid_argument("region degree must be at least 2");
    const double jc = std::atanh(1.0 / d);
    if (std::abs(J) <= jc) return std::nullopt;
    const double w = std::tanh(std::abs(J));
    const double a = (d * w - 1.0) / (d / w - 1.0);
    const double b = (d - 1.0 / w) / (d - w);
    if (!(a >= 0.0 && a < 1.0 && b >= 0.0 && b < 1.0)) return std::nullopt;
    const double first = d * std::atanh(std::sqrt(a)), second = std::atanh(std::sqrt(b));
    return J > jc ? first - second : first + second;
}

PhaseRegion classify_region(double J, double theta, int d)
{
    const auto p = phase_boundary(J, d);
    if (!p) return PhaseRegion::III;
    const double at = std::abs(theta);
    if (J > 0.0 && J > *p && at <= *p) return PhaseRegion::I;
    if (J < 0.0 && at < *p) return PhaseRegion::II;
    return PhaseRegion::III;
}

int default_region_degree(const PairwiseModel& m)
{
    if (m.node_count() == 0) return 2;
    const double mean = 2.0 * static_cast<double>(m.edges().size()) / m.node_count();
    return std::max(2, static_cast<int>(std::lround(mean - 1.0)));
}

std::vector<double> combine_marginals(const std::vector<FixedPointReport>& reports, CombineMode mode)
{
    if (reports.empty()) throw std::invalid_argument("no fixed points to combine");
    std::vector<const FixedPointReport*> use;
    for (const auto& r : reports)
        if (mode != CombineMode::Stable || r.stable) use.push_back(&r);
    if (use.empty()) throw std::invalid_argument("no stable fixed point to combine");
    if (mode == CombineMode::Max) {
        const auto* best = *std::max_element(use.begin(), use.end(), [](auto* a, auto* b) { return a->bethe_F > b->bethe_F; });
        return best->beliefs;
    }
    // weights Z_B = exp(-F), normalized in log space
    double lo = std::numeric_limits<double>::infinity();
    for (const auto* r : use) lo = std::min(lo, r->bethe_F);
    std::vector<double> out(use.front()->beliefs.size(), 0.0);
    double total = 0.0;
    for (const auto* r : use) {
        const double w = std::exp(lo - r->bethe_F);
        total += w;
        for (size_t i = 0; i < out.size(); ++i) out[i] += w * r->beliefs[i];
    }
    for (double& v : out) v /= total;
    return out;
}

FixedPointReport evaluate_fixed_point(const PairwiseModel& m, const MessageSet& fp, const ExactResult* exact, const EvaluateOptions& opts)
{
    FixedPointReport r;
    r.messages = fp;
    r.beliefs = beliefs(m, fp);
    r.pairwise_beliefs = pairwise_beliefs(m, fp);
    r.bethe_F = bethe_free_energy(m, r.beliefs, r.pairwise_beliefs);
    r.bethe_Z = std::exp(-r.bethe_F);
    const Eigen::MatrixXd jac = bp_jacobian(m, fp);
    StabilityResult st = classify_radius(spectral_radius(jac));
    r.spectral_radius = st.spectral_radius;
    r.stability = st.stability;
    r.stable = st.stable;
    if (opts.damping > 0.0) {
        const Eigen::MatrixXd damped = (1.0 - opts.damping) * jac + opts.damping * Eigen::MatrixXd::Identity(jac.rows(), jac.cols());
        r.damped_spectral_radius = spectral_radius(damped);
    } else {
        r.damped_spectral_radius = r.spectral_radius;
    }
    if (exact) r.mse_vs_exact = mse(exact->marginals, r.beliefs);
    r.mean_magnetization = mean_magnetization(r.beliefs);
    return r;
}

std::vector<FixedPointReport> evaluate_fixed_points(const PairwiseModel& m, const SolutionSet& sols, const ExactResult* exact, const EvaluateOptions& opts)
{
    std::optional<ExactResult> own;
    if (!exact && m.node_count() <= kExactMaxVariables) {
        own = enumerate_exact(m);
        exact = &*own;
    }
    std::vector<FixedPointReport> out;
    for (const auto& p : sols.positive_real) out.push_back(evaluate_fixed_point(m, point_to_messages(m, p), exact, opts));
    return out;
}

} // namespace bpfp
