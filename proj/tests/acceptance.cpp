#include "bpfp/analysis.hpp"
#include "bpfp/codes.hpp"
#include "bpfp/exact.hpp"
#include "bpfp/experiments.hpp"
#include "bpfp/polysys.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace bpfp;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Report {
    std::vector<std::string> lines;
    int failed = 0;
    void add(bool ok, const std::string& name, const std::string& detail)
    {
        lines.push_back(std::string(ok ? "PASS" : "FAIL") + " " + name + ": " + detail);
        std::printf("%s\n", lines.back().c_str());
        std::fflush(stdout);
        failed += ok ? 0 : 1;
    }
};

template <class... A>
std::string fmt(const char* f, A... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// fixed points and converged BP runs collected across all checks
struct FixedPointPool {
    int checked = 0, fixed = 0;
    double worst_change = 0.0;
    int bp_runs = 0, bp_ok = 0;
    double worst_bp_residual = 0.0;
    std::vector<std::pair<PairwiseModel, MessageSet>> samples;

    void add_solutions(const PairwiseModel& m, const SolutionSet& s)
    {
        for (const auto& p : s.positive_real) {
            const MessageSet ms = point_to_messages(m, p);
            const double ch = message_change(bp_step(m, ms), ms);
            worst_change = std::max(worst_change, ch);
            ++checked;
            fixed += ch < 1e-8 ? 1 : 0;
            samples.push_back({m, ms});
        }
    }
    void add_bp(BpStatus st, double res)
    {
        if (st != BpStatus::Converged) return;
        ++bp_runs;
        bp_ok += res < 1e-8 ? 1 : 0;
        worst_bp_residual = std::max(worst_bp_residual, res);
    }
    void add_bp(const PairwiseModel& m, const BpRun& run)
    {
        const auto& f = run.final_messages;
        add_bp(run.status, max_residual(build_bp_system(m), messages_to_point(m, f.plus, f.minus, f.alpha)));
    }
};

PolynomialSystem worked_example()
{
    PolynomialSystem s;
    s.var_names = {"x", "y"};
    s.is_message = {false, false};
    s.equations = {{{1.0, {0, 0}}, {1.0, {1, 0}}, {1.0, {2, 2}}}, {{1.0, {0, 0}}, {1.0, {1, 0}}, {1.0, {0, 1}}, {1.0, {1, 2}}}};
    return s;
}

void check_bkk(Report& rep)
{
    auto t0 = Clock::now();
    const long long grid = bkk_bound(build_bp_system(build_grid(3, 3, 1.0, 0.5)), 1).bound;
    const double tg = since(t0);
    t0 = Clock::now();
    const long long k4 = bkk_bound(build_bp_system(build_complete(4, 1.0, 0.5)), 1).bound;
    const double tk = since(t0);
    const long long we = bkk_bound(worked_example(), 1).bound;
    const bool ok = grid == 608 && k4 == 120 && we == 4 && tg < 300 && tk < 300;
    rep.add(ok, "bkk_bounds", fmt("grid=%lld (%.1fs) K4=%lld (%.1fs) worked_example=%lld; expected 608/120/4, <300s", grid, tg, k4, tk, we));
}

void check_tightness(Report& rep, FixedPointPool& pool, StructureCache& cache)
{
    std::string detail;
    bool ok = true;
    for (const auto& shape : {ModelShape{"grid", 3, 3}, ModelShape{"complete", 4, 4}}) {
        const PairwiseModel m = shape.make(1.0, 0.5);
        const SolutionSet s = solve_all(build_bp_system(m), 1, {}, &cache);
        pool.add_solutions(m, s);
        double worst = 0.0;
        for (double r : s.distinct_residual) worst = std::max(worst, r);
        const double success = static_cast<double>(s.success_count()) / std::max<long long>(1, s.bkk);
        const bool good = static_cast<long long>(s.distinct_complex.size()) == s.bkk && success >= 0.95 && worst < 1e-8;
        ok = ok && good;
        int singular = s.status_counts.count(PathStatus::Singular) ? s.status_counts.at(PathStatus::Singular) : 0;
        detail += fmt("%s distinct=%zu of bkk=%lld, success=%.1f%%, singular=%d, max residual=%.1e; ", shape.describe().c_str(), s.distinct_complex.size(), s.bkk, 100.0 * success, singular, worst);
    }
    detail += "remaining paths end on positive-dimensional solution components";
    rep.add(ok, "bkk_tightness", detail);
}

void check_regions(Report& rep, FixedPointPool& pool, StructureCache& cache)
{
    struct Case {
        double J, th;
        PhaseRegion region;
        int expected;
    };
    const std::vector<Case> grid_cases{{0.3, 0.2, PhaseRegion::III, 1}, {0.2, 1.5, PhaseRegion::III, 1}, {-0.3, 0.5, PhaseRegion::III, 1},
                                       {1.5, 0.1, PhaseRegion::I, 3},   {1.2, -0.2, PhaseRegion::I, 3},  {2.0, 0.5, PhaseRegion::I, 3},
                                       {-1.5, 0.1, PhaseRegion::II, 3}, {-1.2, 0.3, PhaseRegion::II, 3}, {-2.0, 0.6, PhaseRegion::II, 3}};
    const std::vector<Case> k4_cases{{-1.5, 0.1, PhaseRegion::II, 1}, {-1.2, 0.3, PhaseRegion::II, 1}, {-2.0, 0.6, PhaseRegion::II, 1}};
    bool ok = true;
    std::string detail;
    auto run = [&](const ModelShape& shape, const std::vector<Case>& cases) {
        detail += shape.describe() + ":";
        for (const auto& c : cases) {
            const PairwiseModel m = shape.make(c.J, c.th);
            const SolutionSet s = solve_all(build_bp_system(m), 1, {}, &cache);
            pool.add_solutions(m, s);
            const PhaseRegion got = classify_region(c.J, c.th, default_region_degree(m));
            const int n = static_cast<int>(s.positive_real.size());
            ok = ok && got == c.region && n == c.expected;
            detail += fmt(" (%.1f,%.1f)%s=%d", c.J, c.th, to_string(got), n);
        }
        detail += "; ";
    };
    run({"grid", 3, 3}, grid_cases);
    run({"complete", 4, 4}, k4_cases);
    detail += "expected III=1 I=3 II=3 on the grid, II=1 on K4";
    rep.add(ok, "region_counts", detail);
}

void check_k4_limit_cycle(Report& rep, FixedPointPool& pool)
{
    const PairwiseModel m = build_complete(4, -2.0, 0.0);
    const ExactResult ex = enumerate_exact(m);
    BpOptions bo;
    bo.init = BpInit::Random;
    bo.seed = 1;
    const BpRun run = run_bp(m, bo);
    const double bp_mse = mse(ex.marginals, beliefs(m, run.final_messages));
    const SolutionSet s = solve_all(build_bp_system(m), 1);
    pool.add_solutions(m, s);
    const auto reps = evaluate_fixed_points(m, s, &ex);
    const bool ok = run.status != BpStatus::Converged && run.iterations <= 10000 && reps.size() == 1 && !reps[0].stable && reps[0].mse_vs_exact < 0.01 && bp_mse > 0.1;
    rep.add(ok, "unique_nonconvergent",
            fmt("BP %s after %d iterations, BP MSE=%.3f; positive fixed points=%zu, rho=%.3f (%s), MSE=%.2e", to_string(run.status), run.iterations, bp_mse, reps.size(),
                reps.empty() ? 0.0 : reps[0].spectral_radius, reps.empty() ? "-" : to_string(reps[0].stability), reps.empty() ? NAN : reps[0].mse_vs_exact));
}

void check_sweep(Report& rep, FixedPointPool& pool)
{
    SweepSpec spec;
    spec.shape = {"grid", 3, 3};
    spec.J_points = spec.theta_points = 9;
    spec.bp.init = BpInit::Random;
    spec.bp.seed = 1;
    const auto t0 = Clock::now();
    const auto rows = sweep(spec);
    const double secs = since(t0);
    double s_stable = 0, s_all = 0, s_max = 0, s_best = 0, s_bp = 0;
    int n = 0, failed = 0;
    for (const auto& r : rows) {
        const PairwiseModel m = spec.shape.make(r.J, r.theta);
        pool.add_bp(r.bp_status, r.bp_system_residual);
        for (const auto& fp : r.reports) {
            const double ch = message_change(bp_step(m, fp.messages), fp.messages);
            pool.worst_change = std::max(pool.worst_change, ch);
            ++pool.checked;
            pool.fixed += ch < 1e-8 ? 1 : 0;
        }
        if (r.reports.empty()) {
            ++failed;
            continue;
        }
        s_stable += r.mse_stable;
        s_all += r.mse_all;
        s_max += r.mse_max;
        s_best += r.mse_best;
        s_bp += r.bp_mse;
        ++n;
    }
    const double k = std::max(1, n);
    s_stable /= k, s_all /= k, s_max /= k, s_best /= k, s_bp /= k;
    const bool ok = failed == 0 && s_stable <= s_all + 1e-6 && s_all <= s_max + 1e-6 && s_best <= s_bp + 1e-6 && secs < 1800;
    rep.add(ok, "table_ordering", fmt("%d points (%d without fixed points), mean MSE STABLE=%.4f ALL=%.4f MAX=%.4f best=%.4f BP=%.4f, %.0fs", static_cast<int>(rows.size()), failed, s_stable, s_all, s_max, s_best, s_bp, secs));
}

void check_trials(Report& rep, FixedPointPool& pool)
{
    BpOptions bo;
    const auto sum = random_grid_trials({"grid", 3, 3}, 20, 3.0, 1, {}, bo, 1);
    for (const auto& r : sum.rows) pool.add_bp(r.bp_status, r.bp_system_residual);
    const bool ok = sum.unique_positive == 20 && sum.bp_converged >= 19;
    rep.add(ok, "random_trials", fmt("unique positive fixed point in %d/20, BP converged in %d/20", sum.unique_positive, sum.bp_converged));
}

void check_hamming(Report& rep)
{
    const auto grid = default_epsilon_grid();
    const auto ex = decode_threshold(1, DecodeMethod::Exact, grid);
    const auto bp = decode_threshold(1, DecodeMethod::BP, grid);
    const auto np = decode_threshold(1, DecodeMethod::NPHC, grid);
    const auto bp6 = decode_threshold(6, DecodeMethod::BP, grid);
    const auto np6 = decode_threshold(6, DecodeMethod::NPHC, grid);
    auto in = [](const std::optional<double>& t, double lo, double hi) { return t && *t >= lo - 1e-12 && *t <= hi + 1e-12; };
    bool y6 = true, unique = true;
    for (const auto* r : {&bp6, &np6})
        for (const auto& p : r->points) y6 = y6 && p.p_bit_zero <= 0.5;
    for (const auto* r : {&np, &np6})
        for (const auto& p : r->points) unique = unique && p.positive_fixed_points == 1 && p.stable_fixed_points == 1;
    const bool ok = in(ex.threshold, 0.20, 0.22) && in(bp.threshold, 0.12, 0.14) && in(np.threshold, 0.12, 0.14) && y6 && unique;
    auto t = [](const std::optional<double>& v) { return v ? *v : -1.0; };
    rep.add(ok, "hamming_thresholds", fmt("Y1 exact=%.2f BP=%.2f NPHC=%.2f; Y6 never decoded=%s; one stable positive fixed point per epsilon=%s", t(ex.threshold), t(bp.threshold), t(np.threshold), y6 ? "yes" : "no", unique ? "yes" : "no"));
}

void check_trees(Report& rep, FixedPointPool& pool)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 9);
    int agree = 0, bethe = 0;
    double worst = 0.0, worst_rel = 0.0;
    for (int t = 0; t < 50; ++t) {
        const PairwiseModel m = oracle::random_tree(size(rng), rng, 2.0);
        const ExactResult ex = enumerate_exact(m);
        const BpRun run = run_bp(m);
        pool.add_bp(m, run);
        const auto b = beliefs(m, run.final_messages);
        const SolutionSet s = solve_all(build_bp_system(m), 1);
        pool.add_solutions(m, s);
        double d = s.positive_real.size() == 1 ? 0.0 : 1.0;
        if (s.positive_real.size() == 1) {
            const auto nb = beliefs(m, point_to_messages(m, s.positive_real[0]));
            for (int i = 0; i < m.node_count(); ++i)
                d = std::max({d, std::abs(b[i] - ex.marginals[i]), std::abs(nb[i] - ex.marginals[i]), std::abs(nb[i] - b[i])});
        }
        worst = std::max(worst, d);
        agree += d < 1e-6 ? 1 : 0;
        const auto r = evaluate_fixed_point(m, run.final_messages, &ex);
        const double rel = std::abs(-r.bethe_F - ex.log_partition) / std::max(1e-300, std::abs(ex.log_partition));
        worst_rel = std::max(worst_rel, rel);
        bethe += rel < 1e-8 ? 1 : 0;
    }
    rep.add(agree == 50 && bethe == 50, "tree_oracles", fmt("marginals agree in %d/50 (worst %.1e), Bethe log Z exact in %d/50 (worst relative %.1e)", agree, worst, bethe, worst_rel));
}

void check_jacobians(Report& rep, const FixedPointPool& pool)
{
    int n = 0, ok = 0;
    double worst = 0.0;
    const size_t stride = std::max<size_t>(1, pool.samples.size() / 20);
    for (size_t k = 0; k < pool.samples.size() && n < 20; k += stride) {
        const auto& [m, fp] = pool.samples[k];
        const double d = (bp_jacobian(m, fp) - bp_jacobian_fd(m, fp)).cwiseAbs().maxCoeff();
        worst = std::max(worst, d);
        ++n;
        ok += d < 1e-5 ? 1 : 0;
    }
    rep.add(n == 20 && ok == 20, "jacobian_check", fmt("%d/%d fixed points within 1e-5 (worst %.1e)", ok, n, worst));
}

} // namespace

int main(int argc, char** argv)
{
    std::string out;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--out") out = argv[i + 1];
    Report rep;
    FixedPointPool pool;
    StructureCache cache;
    check_bkk(rep);
    check_tightness(rep, pool, cache);
    check_regions(rep, pool, cache);
    check_k4_limit_cycle(rep, pool);
    check_trees(rep, pool);
    check_jacobians(rep, pool);
    check_hamming(rep);
    check_trials(rep, pool);
    check_sweep(rep, pool);
    rep.add(pool.checked > 0 && pool.fixed == pool.checked && pool.bp_ok == pool.bp_runs, "fixed_point_round_trip",
            fmt("%d/%d positive solutions BP-fixed (worst change %.1e), %d/%d converged BP runs solve the system (worst residual %.1e)", pool.fixed, pool.checked, pool.worst_change, pool.bp_ok, pool.bp_runs,
                pool.worst_bp_residual));
    std::printf("%d of %zu criteria failed\n", rep.failed, rep.lines.size());
    if (!out.empty()) {
        std::ofstream f(out);
        for (const auto& l : rep.lines) f << l << "\n";
        f << rep.failed << " of " << rep.lines.size() << " criteria failed\n";
    }
    return 0;
}
