#include "bpfp/bp.hpp"

#include <cmath>
#include <deque>
#include <random>

namespace bpfp {

const char* to_string(BpStatus s)
{
    switch (s) {
    case BpStatus::Converged: return "Converged";
    case BpStatus::MaxIters: return "MaxIters";
    case BpStatus::LimitCycle: return "LimitCycle";
    }
    return "?";
}

MessageSet MessageSet::uniform(const PairwiseModel& m)
{
    MessageSet s;
    size_t E = m.directed_count();
    s.plus.assign(E, 0.5);
    s.minus.assign(E, 0.5);
    s.alpha.assign(E, 1.0);
    return s;
}

MessageSet MessageSet::random(const PairwiseModel& m, uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    MessageSet s = uniform(m);
    for (size_t e = 0; e < s.size(); ++e) {
        s.plus[e] = u(rng);
        s.minus[e] = 1.0 - s.plus[e];
    }
    return s;
}

MessageSet bp_step(const PairwiseModel& m, const MessageSet& msgs)
{
    const auto& dir = m.directed();
    MessageSet out;
    out.plus.resize(dir.size());
    out.minus.resize(dir.size());
    out.alpha.resize(dir.size());
    for (size_t e = 0; e < dir.size(); ++e) {
        auto [i, j] = dir[e];
        double pp = 1.0, pm = 1.0;
        for (int k : m.neighbors(i)) {
            if (k == j) continue;
            int ke = m.dir_index(k, i);
            pp *= msgs.plus[ke];
            pm *= msgs.minus[ke];
        }
        double J = m.dir_coupling(static_cast<int>(e)), th = m.field(i);
        // x_i = +1 and x_i = -1 contributions
        double vp = std::exp(J + th) * pp + std::exp(-J - th) * pm;
        double vm = std::exp(-J + th) * pp + std::exp(J - th) * pm;
        double a = 1.0 / (vp + vm);
        out.plus[e] = a * vp;
        out.minus[e] = a * vm;
        out.alpha[e] = a;
    }
    return out;
}

double message_change(const MessageSet& a, const MessageSet& b)
{
    double r = 0.0;
    for (size_t e = 0; e < a.size(); ++e) {
        r = std::max(r, std::abs(a.plus[e] - b.plus[e]));
        r = std::max(r, std::abs(a.minus[e] - b.minus[e]));
    }
    return r;
}

namespace {

struct CycleDetector {
    int window;
    std::deque<std::pair<int, std::vector<int64_t>>> seen;

    template <class Fill>
    int check(int iter, Fill fill)
    {
        std::vector<int64_t> key;
        fill(key);
        int period = 0;
        for (auto it = seen.rbegin(); it != seen.rend(); ++it)
            if (it->second == key) {
                period = iter - it->first;
                break;
            }
        seen.push_back({iter, std::move(key)});
        if (static_cast<int>(seen.size()) > window) seen.pop_front();
        return period;
    }
};

int64_t quantize(double v) { return std::llround(v * 1e8); }

// a repeat only counts as a cycle while the iterates still move
constexpr double kCycleMinChange = 1e-6;

} // namespace

BpRun run_bp(const PairwiseModel& m, const BpOptions& opts)
{
    MessageSet cur;
    switch (opts.init) {
    case BpInit::Uniform: cur = MessageSet::uniform(m); break;
    case BpInit::Random: cur = MessageSet::random(m, opts.seed); break;
    case BpInit::Explicit:
        if (!opts.initial) throw std::invalid_argument("explicit init without messages");
        cur = *opts.initial;
        break;
    }
    BpRun run;
    CycleDetector cyc{opts.cycle_window, {}};
    const double eps = opts.damping;
    for (int it = 1; it <= opts.max_iters; ++it) {
        MessageSet nxt = bp_step(m, cur);
        if (eps != 0.0)
            for (size_t e = 0; e < nxt.size(); ++e) {
                nxt.plus[e] = (1.0 - eps) * nxt.plus[e] + eps * cur.plus[e];
                nxt.minus[e] = (1.0 - eps) * nxt.minus[e] + eps * cur.minus[e];
            }
        double res = message_change(nxt, cur);
        if (opts.keep_history) run.residual_history.push_back(res);
        cur = std::move(nxt);
        run.iterations = it;
        if (res < opts.tolerance) {
            run.status = BpStatus::Converged;
            break;
        }
        int period = cyc.check(it, [&](std::vector<int64_t>& k) {
            for (double v : cur.plus) k.push_back(quantize(v));
        });
        if (period >= 2 && res > kCycleMinChange) {
            run.status = BpStatus::LimitCycle;
            run.period = period;
            break;
        }
    }
    cur.alpha = bp_step(m, cur).alpha;
    run.final_messages = std::move(cur);
    return run;
}

std::vector<double> beliefs(const PairwiseModel& m, const MessageSet& msgs)
{
    std::vector<double> b(m.node_count());
    for (int i = 0; i < m.node_count(); ++i) {
        double lp = m.field(i), lm = -m.field(i);
        for (int k : m.neighbors(i)) {
            int ke = m.dir_index(k, i);
            lp += std::log(msgs.plus[ke]);
            lm += std::log(msgs.minus[ke]);
        }
        b[i] = 1.0 / (1.0 + std::exp(lm - lp));
    }
    return b;
}

std::vector<std::array<double, 4>> pairwise_beliefs(const PairwiseModel& m, const MessageSet& msgs)
{
    std::vector<std::array<double, 4>> out;
    for (size_t k = 0; k < m.edges().size(); ++k) {
        auto [i, j] = m.edges()[k];
        auto incoming = [&](int node, int skip, int s) {
            double v = (s ? 1.0 : -1.0) * m.field(node);
            for (int l : m.neighbors(node)) {
                if (l == skip) continue;
                int le = m.dir_index(l, node);
                v += std::log(s ? msgs.plus[le] : msgs.minus[le]);
            }
            return v;
        };
        std::array<double, 4> lt{};
        double mx = -1e300;
        for (int si = 0; si < 2; ++si)
            for (int sj = 0; sj < 2; ++sj) {
                double v = m.couplings()[k] * (2 * si - 1) * (2 * sj - 1) + incoming(i, j, si) + incoming(j, i, sj);
                lt[2 * si + sj] = v;
                mx = std::max(mx, v);
            }
        double z = 0.0;
        for (double& v : lt) {
            v = std::exp(v - mx);
            z += v;
        }
        for (double& v : lt) v /= z;
        out.push_back(lt);
    }
    return out;
}

FactorEdges::FactorEdges(const FactorGraph& fg)
{
    of_factor.resize(fg.factors.size());
    of_variable.resize(fg.variable_count);
    for (size_t a = 0; a < fg.factors.size(); ++a)
        for (size_t k = 0; k < fg.factors[a].vars.size(); ++k) {
            int id = static_cast<int>(slots.size());
            slots.push_back({static_cast<int>(a), static_cast<int>(k)});
            variable.push_back(fg.factors[a].vars[k]);
            of_factor[a].push_back(id);
            of_variable[fg.factors[a].vars[k]].push_back(id);
        }
}

FactorMessages FactorMessages::uniform(const FactorGraph& fg)
{
    FactorEdges fe(fg);
    FactorMessages m;
    m.q.assign(fe.slots.size(), {0.5, 0.5});
    m.r.assign(fe.slots.size(), {1.0, 1.0});
    m.alpha.assign(fe.slots.size(), 1.0);
    return m;
}

FactorMessages FactorMessages::random(const FactorGraph& fg, uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    FactorMessages m = uniform(fg);
    for (auto& q : m.q) {
        q[0] = u(rng);
        q[1] = 1.0 - q[0];
    }
    return m;
}

FactorMessages factor_bp_step(const FactorGraph& fg, const FactorMessages& msgs)
{
    FactorEdges fe(fg);
    FactorMessages out = msgs;
    for (size_t a = 0; a < fg.factors.size(); ++a) {
        const auto& f = fg.factors[a];
        const auto& ids = fe.of_factor[a];
        const size_t arity = f.vars.size();
        for (size_t k = 0; k < arity; ++k) {
            std::array<double, 2> r{0.0, 0.0};
            for (size_t idx = 0; idx < f.table.size(); ++idx) {
                if (f.table[idx] == 0.0) continue;
                double w = f.table[idx];
                for (size_t l = 0; l < arity; ++l)
                    if (l != k) w *= msgs.q[ids[l]][(idx >> l) & 1];
                r[(idx >> k) & 1] += w;
            }
            out.r[ids[k]] = r;
        }
    }
    for (int v = 0; v < fg.variable_count; ++v)
        for (int s : fe.of_variable[v]) {
            std::array<double, 2> q{1.0, 1.0};
            for (int t : fe.of_variable[v])
                if (t != s) {
                    q[0] *= out.r[t][0];
                    q[1] *= out.r[t][1];
                }
            double a = 1.0 / (q[0] + q[1]);
            out.q[s] = {a * q[0], a * q[1]};
            out.alpha[s] = a;
        }
    return out;
}

double factor_message_change(const FactorMessages& a, const FactorMessages& b)
{
    double r = 0.0;
    for (size_t s = 0; s < a.q.size(); ++s) r = std::max({r, std::abs(a.q[s][0] - b.q[s][0]), std::abs(a.q[s][1] - b.q[s][1])});
    return r;
}

FactorBpRun run_factor_bp(const FactorGraph& fg, const BpOptions& opts, const std::optional<FactorMessages>& init)
{
    fg.validate();
    FactorMessages cur;
    if (init)
        cur = *init;
    else if (opts.init == BpInit::Random)
        cur = FactorMessages::random(fg, opts.seed);
    else
        cur = FactorMessages::uniform(fg);
    FactorBpRun run;
    CycleDetector cyc{opts.cycle_window, {}};
    const double eps = opts.damping;
    for (int it = 1; it <= opts.max_iters; ++it) {
        FactorMessages nxt = factor_bp_step(fg, cur);
        if (eps != 0.0)
            for (size_t s = 0; s < nxt.q.size(); ++s)
                for (int x = 0; x < 2; ++x) nxt.q[s][x] = (1.0 - eps) * nxt.q[s][x] + eps * cur.q[s][x];
        double res = factor_message_change(nxt, cur);
        if (opts.keep_history) run.residual_history.push_back(res);
        cur = std::move(nxt);
        run.iterations = it;
        if (res < opts.tolerance) {
            run.status = BpStatus::Converged;
            break;
        }
        int period = cyc.check(it, [&](std::vector<int64_t>& k) {
            for (const auto& q : cur.q) k.push_back(quantize(q[0]));
        });
        if (period >= 2 && res > kCycleMinChange) {
            run.status = BpStatus::LimitCycle;
            run.period = period;
            break;
        }
    }
    // refresh r and alpha so that they are consistent with the final q
    FactorMessages fin = factor_bp_step(fg, cur);
    cur.r = fin.r;
    cur.alpha = fin.alpha;
    run.final_messages = std::move(cur);
    return run;
}

std::vector<double> factor_beliefs(const FactorGraph& fg, const FactorMessages& msgs)
{
    FactorEdges fe(fg);
    std::vector<double> b(fg.variable_count);
    for (int v = 0; v < fg.variable_count; ++v) {
        double p0 = 1.0, p1 = 1.0;
        for (int s : fe.of_variable[v]) {
            p0 *= msgs.r[s][0];
            p1 *= msgs.r[s][1];
        }
        b[v] = p1 / (p0 + p1);
    }
    return b;
}

} // namespace bpfp
