#include "bpfp/experiments.hpp"

#include "bpfp/exact.hpp"
#include "bpfp/polysys.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace bpfp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
void run_jobs(size_t n, int threads, F&& f)
{
    const int T = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (T <= 1) {
        for (size_t k = 0; k < n; ++k) f(k);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t)
        pool.emplace_back([&] {
            for (size_t k = next++; k < n; k = next++) f(k);
        });
    for (auto& th : pool) th.join();
}

} // namespace

PairwiseModel ModelShape::make(double J, double theta) const
{
    if (kind == "grid") return build_grid(rows, cols, J, theta);
    if (kind == "complete") return build_complete(rows, J, theta);
    throw std::invalid_argument("unknown model kind: " + kind);
}

std::string ModelShape::describe() const
{
    if (kind == "grid") return "grid " + std::to_string(rows) + "x" + std::to_string(cols);
    return "complete K" + std::to_string(rows);
}

std::vector<double> sweep_axis(double lo, double hi, int points)
{
    if (points < 1) throw std::invalid_argument("axis needs at least one point");
    if (!(hi >= lo)) throw std::invalid_argument("empty axis range");
    std::vector<double> out;
    const double step = (hi - lo) / points;
    for (int k = 0; k < points; ++k) out.push_back(lo + (k + 0.5) * step);
    return out;
}

void SweepSpec::validate() const
{
    if (J_points < 1 || theta_points < 1) throw std::invalid_argument("sweep needs at least one point per axis");
    if (!(J_max >= J_min) || !(theta_max >= theta_min)) throw std::invalid_argument("empty sweep range");
    if (region_degree && *region_degree < 2) throw std::invalid_argument("region degree must be at least 2");
}

CombinedMse combined_mse(const std::vector<FixedPointReport>& reports, const std::vector<double>& exact)
{
    CombinedMse c;
    if (reports.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        c.max = c.all = c.stable = c.best = nan;
        return c;
    }
    c.max = mse(exact, combine_marginals(reports, CombineMode::Max));
    c.all = mse(exact, combine_marginals(reports, CombineMode::All));
    const bool any_stable = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.stable; });
    c.stable_fallback = !any_stable;
    c.stable = any_stable ? mse(exact, combine_marginals(reports, CombineMode::Stable)) : c.all;
    c.best = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) c.best = std::min(c.best, r.mse_vs_exact);
    return c;
}

SweepRow sweep_point(const PairwiseModel& m, double J, double theta, int region_degree, const SweepSpec& spec, StructureCache* cache)
{
    SweepRow row;
    row.J = J;
    row.theta = theta;
    row.region = classify_region(J, theta, region_degree);
    const ExactResult ex = enumerate_exact(m);
    const PolynomialSystem sys = build_bp_system(m);

    BpOptions bo = spec.bp;
    bo.keep_history = false;
    const BpRun run = run_bp(m, bo);
    row.bp_status = run.status;
    row.bp_iterations = run.iterations;
    row.bp_mse = mse(ex.marginals, beliefs(m, run.final_messages));
    const auto& fm = run.final_messages;
    row.bp_system_residual = max_residual(sys, messages_to_point(m, fm.plus, fm.minus, fm.alpha));

    try {
        SolveOptions so = spec.solve;
        const SolutionSet sols = solve_all(sys, spec.seed, so, cache);
        row.bkk = sols.bkk;
        row.solver_failed = sols.failed;
        row.n_positive = static_cast<int>(sols.positive_real.size());
        row.n_real = static_cast<int>(sols.real_solutions.size());
        row.n_distinct = static_cast<int>(sols.distinct_complex.size());
        row.reports = evaluate_fixed_points(m, sols, &ex);
        for (const auto& r : row.reports) row.n_stable += r.stable ? 1 : 0;
        const CombinedMse c = combined_mse(row.reports, ex.marginals);
        row.mse_best = c.best;
        row.mse_max = c.max;
        row.mse_all = c.all;
        row.mse_stable = c.stable;
        row.stable_fallback = c.stable_fallback;
        if (row.reports.empty()) row.error = "no positive real fixed point";
    } catch (const std::exception& e) {
        row.solver_failed = true;
        row.error = e.what();
    }
    return row;
}

std::vector<SweepRow> sweep(const SweepSpec& spec)
{
    spec.validate();
    const auto Js = sweep_axis(spec.J_min, spec.J_max, spec.J_points);
    const auto ths = sweep_axis(spec.theta_min, spec.theta_max, spec.theta_points);
    const int d = spec.region_degree ? *spec.region_degree : default_region_degree(spec.shape.make(1.0, 0.0));
    std::vector<SweepRow> rows(Js.size() * ths.size());
    StructureCache cache;
    SweepSpec inner = spec;
    if (spec.threads > 1) inner.solve.threads = 1;
    run_jobs(rows.size(), spec.threads, [&](size_t k) {
        const double J = Js[k / ths.size()], th = ths[k % ths.size()];
        rows[k] = sweep_point(spec.shape.make(J, th), J, th, d, inner, &cache);
    });
    return rows;
}

std::vector<SliceRow> slice(const ModelShape& shape, const std::vector<double>& thetas, const std::vector<double>& Js, uint64_t seed, const SolveOptions& solve, int threads)
{
    std::vector<std::vector<SliceRow>> parts(thetas.size() * Js.size());
    StructureCache cache;
    SolveOptions so = solve;
    if (threads > 1) so.threads = 1;
    run_jobs(parts.size(), threads, [&](size_t k) {
        const double th = thetas[k / Js.size()], J = Js[k % Js.size()];
        const PairwiseModel m = shape.make(J, th);
        const ExactResult ex = enumerate_exact(m);
        const double em = mean_magnetization(ex.marginals);
        const SolutionSet sols = solve_all(build_bp_system(m), seed, so, &cache);
        const auto reports = evaluate_fixed_points(m, sols, &ex);
        int best = -1;
        for (size_t i = 0; i < reports.size(); ++i)
            if (best < 0 || reports[i].bethe_F < reports[best].bethe_F) best = static_cast<int>(i);
        if (reports.empty()) {
            SliceRow r;
            r.theta = th;
            r.J = J;
            r.exact_magnetization = em;
            r.magnetization = std::numeric_limits<double>::quiet_NaN();
            parts[k].push_back(r);
            return;
        }
        for (size_t i = 0; i < reports.size(); ++i) {
            SliceRow r;
            r.theta = th;
            r.J = J;
            r.exact_magnetization = em;
            r.fp_index = static_cast<int>(i);
            r.magnetization = reports[i].mean_magnetization;
            r.stable = reports[i].stable;
            r.max_bethe_Z = static_cast<int>(i) == best;
            r.spectral_radius = reports[i].spectral_radius;
            parts[k].push_back(r);
        }
    });
    std::vector<SliceRow> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

TrialSummary random_grid_trials(const ModelShape& shape, int count, double K, uint64_t seed, const SolveOptions& solve, const BpOptions& bp, int threads)
{
    if (count < 0) throw std::invalid_argument("trial count must be non-negative");
    if (!(K >= 0.0)) throw std::invalid_argument("K must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-K, K);
    const PairwiseModel base = shape.make(0.0, 0.0);
    std::vector<PairwiseModel> models;
    for (int t = 0; t < count; ++t) {
        std::vector<double> J, th;
        for (size_t e = 0; e < base.edges().size(); ++e) J.push_back(K > 0.0 ? u(rng) : 0.0);
        for (int i = 0; i < base.node_count(); ++i) th.push_back(K > 0.0 ? u(rng) : 0.0);
        models.emplace_back(base.node_count(), base.edges(), J, th);
    }
    TrialSummary sum;
    sum.rows.resize(count);
    StructureCache cache;
    SolveOptions so = solve;
    if (threads > 1) so.threads = 1;
    run_jobs(models.size(), threads, [&](size_t t) {
        const PairwiseModel& m = models[t];
        TrialRow& row = sum.rows[t];
        row.trial = static_cast<int>(t);
        const ExactResult ex = enumerate_exact(m);
        BpOptions bo = bp;
        bo.keep_history = false;
        const BpRun run = run_bp(m, bo);
        row.bp_status = run.status;
        row.bp_iterations = run.iterations;
        row.bp_mse = mse(ex.marginals, beliefs(m, run.final_messages));
        const PolynomialSystem sys = build_bp_system(m);
        const auto& fm = run.final_messages;
        row.bp_system_residual = max_residual(sys, messages_to_point(m, fm.plus, fm.minus, fm.alpha));
        const SolutionSet sols = solve_all(sys, seed, so, &cache);
        row.solver_failed = sols.failed;
        row.n_positive = static_cast<int>(sols.positive_real.size());
        row.n_real = static_cast<int>(sols.real_solutions.size());
        const auto reports = evaluate_fixed_points(m, sols, &ex);
        row.nphc_mse = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : reports)
            if (std::isnan(row.nphc_mse) || r.mse_vs_exact < row.nphc_mse) row.nphc_mse = r.mse_vs_exact;
    });
    for (const auto& r : sum.rows) {
        sum.bp_converged += r.bp_status == BpStatus::Converged ? 1 : 0;
        sum.unique_positive += r.n_positive == 1 ? 1 : 0;
    }
    return sum;
}

TimingReport timing_report(const PairwiseModel& m, uint64_t seed, const SolveOptions& solve, const BpOptions& bp)
{
    TimingReport rep;
    StructureCache cache;
    const PolynomialSystem sys = build_bp_system(m);
    auto add = [](std::vector<TimingRow>& rows, const SolutionSet& s, double bp_seconds, double total) {
        rows.push_back({"mixed_volume", s.timings.mixed_volume});
        rows.push_back({"start_system", s.timings.start_system});
        rows.push_back({"polyhedral_tracking", s.timings.polyhedral});
        rows.push_back({"linear_tracking", s.timings.linear});
        rows.push_back({"post_processing", s.timings.post});
        rows.push_back({"bp", bp_seconds});
        rows.push_back({"total", total});
    };
    for (int pass = 0; pass < 2; ++pass) {
        const auto t0 = Clock::now();
        const SolutionSet s = solve_all(sys, seed, solve, &cache);
        const double solve_total = seconds_since(t0);
        const auto t1 = Clock::now();
        BpOptions bo = bp;
        bo.keep_history = false;
        run_bp(m, bo);
        const double bp_seconds = seconds_since(t1);
        add(pass == 0 ? rep.first : rep.reuse, s, bp_seconds, solve_total + bp_seconds);
        if (pass == 1) rep.reuse_skipped_mixed_volume = s.timings.reused_structure && s.timings.mixed_volume == 0.0;
    }
    return rep;
}

} // namespace bpfp
