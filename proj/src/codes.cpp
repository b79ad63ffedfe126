#include "bpfp/codes.hpp"

#include "bpfp/analysis.hpp"
#include "bpfp/exact.hpp"
#include "bpfp/polysys.hpp"

#include <cmath>
#include <stdexcept>

namespace bpfp {

const std::array<std::array<int, 4>, 3> kHammingChecks = {{{0, 1, 2, 4}, {1, 2, 3, 5}, {0, 2, 3, 6}}};

BscChannel::BscChannel(double eps) : epsilon(eps)
{
    if (!(eps >= 0.0 && eps <= 0.5)) throw std::invalid_argument("crossover probability must lie in [0, 0.5]");
}

CodeInstance build_hamming(const Word7& y, double eps, double soft_zero)
{
    CodeInstance c;
    c.received = y;
    c.channel = BscChannel(eps);
    if (!(soft_zero >= 0.0 && soft_zero < 1.0)) throw std::invalid_argument("soft zero must lie in [0, 1)");
    FactorGraph& fg = c.graph;
    fg.variable_count = 7;
    fg.cardinalities.assign(7, 2);
    for (int i = 0; i < 7; ++i) {
        if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("received word must be binary");
        Factor f;
        f.vars = {i};
        f.table = y[i] == 0 ? std::vector<double>{1.0 - eps, eps} : std::vector<double>{eps, 1.0 - eps};
        fg.factors.push_back(f);
    }
    for (const auto& chk : kHammingChecks) {
        Factor f;
        f.vars.assign(chk.begin(), chk.end());
        f.table.resize(16);
        for (int s = 0; s < 16; ++s) f.table[s] = __builtin_popcount(s) % 2 == 0 ? 1.0 : soft_zero;
        fg.factors.push_back(f);
    }
    fg.validate();
    return c;
}

Word7 flipped_word(int flip_position)
{
    if (flip_position < 1 || flip_position > 7) throw std::invalid_argument("flip position must be in 1..7");
    Word7 y{};
    y[flip_position - 1] = 1;
    return y;
}

std::vector<Word7> hamming_codewords()
{
    std::vector<Word7> out;
    for (int s = 0; s < 128; ++s) {
        Word7 w{};
        for (int i = 0; i < 7; ++i) w[i] = (s >> i) & 1;
        bool ok = true;
        for (const auto& chk : kHammingChecks) {
            int par = 0;
            for (int v : chk) par ^= w[v];
            ok = ok && par == 0;
        }
        if (ok) out.push_back(w);
    }
    return out;
}

const char* to_string(DecodeMethod m)
{
    switch (m) {
    case DecodeMethod::Exact: return "exact";
    case DecodeMethod::BP: return "bp";
    case DecodeMethod::NPHC: return "nphc";
    }
    return "?";
}

double exact_bit_zero(const CodeInstance& code, int bit)
{
    return 1.0 - enumerate_exact(code.graph).marginals.at(bit);
}

double codeword_bit_zero(const CodeInstance& code, int bit)
{
    const double eps = code.channel.epsilon;
    double zero = 0.0, total = 0.0;
    for (const auto& w : hamming_codewords()) {
        double like = 1.0;
        for (int i = 0; i < 7; ++i) like *= w[i] == code.received[i] ? 1.0 - eps : eps;
        total += like;
        if (w[bit] == 0) zero += like;
    }
    return zero / total;
}

std::vector<double> default_epsilon_grid()
{
    std::vector<double> g;
    for (int k = 1; k <= 49; ++k) g.push_back(k / 100.0);
    return g;
}

DecodeResult decode_threshold(int flip_position, DecodeMethod method, const std::vector<double>& eps_grid, const DecodeOptions& opts)
{
    const Word7 y = flipped_word(flip_position);
    const int bit = flip_position - 1;
    DecodeResult res;
    StructureCache cache;
    for (double eps : eps_grid) {
        if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("epsilon grid must lie in (0, 0.5)");
        const CodeInstance code = build_hamming(y, eps, opts.soft_zero);
        DecodePoint pt;
        pt.epsilon = eps;
        if (method == DecodeMethod::Exact) {
            pt.p_bit_zero = exact_bit_zero(code, bit);
        } else if (method == DecodeMethod::BP) {
            const FactorBpRun run = run_factor_bp(code.graph, opts.bp);
            pt.bp_status = run.status;
            pt.bp_iterations = run.iterations;
            pt.p_bit_zero = 1.0 - factor_beliefs(code.graph, run.final_messages)[bit];
            const StabilityResult st = factor_stability(code.graph, run.final_messages);
            pt.spectral_radius = st.spectral_radius;
            pt.positive_fixed_points = run.status == BpStatus::Converged ? 1 : 0;
            pt.stable_fixed_points = st.stable ? 1 : 0;
        } else {
            SolveOptions so = opts.solve;
            so.threads = opts.threads;
            const PolynomialSystem sys = build_factor_bp_system(code.graph);
            const SolutionSet sols = solve_all(sys, opts.seed, so, &cache);
            pt.solver_failed = sols.failed;
            pt.positive_fixed_points = static_cast<int>(sols.positive_real.size());
            double best_rho = -1.0;
            for (const auto& p : sols.positive_real) {
                const FactorMessages fm = point_to_factor_messages(code.graph, p);
                const StabilityResult st = factor_stability(code.graph, fm);
                if (st.stable) ++pt.stable_fixed_points;
                // report the fixed point of smallest spectral radius
                if (best_rho < 0.0 || st.spectral_radius < best_rho) {
                    best_rho = st.spectral_radius;
                    pt.spectral_radius = st.spectral_radius;
                    pt.p_bit_zero = 1.0 - factor_beliefs(code.graph, fm)[bit];
                }
            }
            if (sols.positive_real.empty()) pt.p_bit_zero = std::nan("");
        }
        if (pt.p_bit_zero > 0.5 && (!res.threshold || eps > *res.threshold)) res.threshold = eps;
        res.points.push_back(pt);
    }
    return res;
}

} // namespace bpfp
