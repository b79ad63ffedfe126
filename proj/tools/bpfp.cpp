#include "bpfp/analysis.hpp"
#include "bpfp/bp.hpp"
#include "bpfp/codes.hpp"
#include "bpfp/exact.hpp"
#include "bpfp/experiments.hpp"
#include "bpfp/homotopy.hpp"
#include "bpfp/model.hpp"
#include "bpfp/polysys.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace bpfp;

namespace {

struct Globals {
    uint64_t seed = 1;
    int threads = 1;
    std::string out;
    std::string invocation;
};

struct ModelArgs {
    std::string file;
    std::string kind = "grid";
    int rows = 3, cols = 3, n = 4;
    double J = 1.0, theta = 0.5;

    void add(CLI::App* sc)
    {
        sc->add_option("--model", file, "model JSON file");
        sc->add_option("--kind", kind, "grid | complete")->check(CLI::IsMember({"grid", "complete"}));
        sc->add_option("--rows", rows, "grid rows")->check(CLI::PositiveNumber);
        sc->add_option("--cols", cols, "grid columns")->check(CLI::PositiveNumber);
        sc->add_option("--n", n, "complete graph size")->check(CLI::PositiveNumber);
        sc->add_option("--J", J, "uniform coupling");
        sc->add_option("--theta", theta, "uniform field");
    }
    AnyModel load() const
    {
        if (!file.empty()) return load_model_file(file);
        if (kind == "complete") return build_complete(n, J, theta);
        return build_grid(rows, cols, J, theta);
    }
    ModelShape shape() const
    {
        ModelShape s;
        s.kind = kind;
        s.rows = kind == "complete" ? n : rows;
        s.cols = cols;
        return s;
    }
};

class Output {
public:
    explicit Output(const Globals& g)
    {
        if (!g.out.empty()) {
            file_ = std::make_unique<std::ofstream>(g.out);
            if (!*file_) throw std::runtime_error("cannot open " + g.out);
        }
        os() << std::setprecision(12);
        os() << "# " << g.invocation << "\n";
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string join_args(int argc, char** argv)
{
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

const PairwiseModel& require_pairwise(const AnyModel& m)
{
    if (!std::holds_alternative<PairwiseModel>(m)) throw std::invalid_argument("this command needs a pairwise model");
    return std::get<PairwiseModel>(m);
}

PolynomialSystem system_of(const AnyModel& m)
{
    if (std::holds_alternative<PairwiseModel>(m)) return build_bp_system(std::get<PairwiseModel>(m));
    return build_factor_bp_system(std::get<FactorGraph>(m));
}

struct BpArgs {
    std::string init;
    double damping = 0.0, tol = 1e-10;
    int max_iters = 10000;

    explicit BpArgs(std::string def) : init(std::move(def)) {}
    void add(CLI::App* sc)
    {
        sc->add_option("--bp-init", init, "uniform | random")->check(CLI::IsMember({"uniform", "random"}));
        sc->add_option("--damping", damping, "damping epsilon in [0,1)");
        sc->add_option("--max-iters", max_iters, "BP iteration cap");
        sc->add_option("--tol", tol, "BP convergence tolerance");
    }
    BpOptions options(uint64_t seed) const
    {
        BpOptions o;
        o.init = init == "random" ? BpInit::Random : BpInit::Uniform;
        o.damping = damping;
        o.max_iters = max_iters;
        o.tolerance = tol;
        o.seed = seed;
        return o;
    }
};

const char* flag(bool b) { return b ? "1" : "0"; }

// 0 Converged, 2 MaxIters, 3 LimitCycle
int exit_code(BpStatus s)
{
    return s == BpStatus::Converged ? 0 : s == BpStatus::MaxIters ? 2 : 3;
}

void write_solutions(std::ostream& os, const SolutionSet& s)
{
    os << "# bkk=" << s.bkk << " paths=" << s.raw_paths.size() << " success=" << s.success_count() << " failed=" << flag(s.failed);
    for (const auto& [st, c] : s.status_counts) os << ' ' << to_string(st) << '=' << c;
    os << "\n";
    const size_t nv = s.distinct_complex.empty() ? 0 : s.distinct_complex.front().size();
    os << "index,is_real,is_positive,residual";
    for (size_t v = 0; v < nv; ++v) os << ",v" << v + 1 << "_re,v" << v + 1 << "_im";
    os << "\n";
    for (size_t k = 0; k < s.distinct_complex.size(); ++k) {
        os << k << ',' << flag(s.distinct_real[k]) << ',' << flag(s.distinct_positive[k]) << ',' << s.distinct_residual[k];
        for (const auto& z : s.distinct_complex[k]) os << ',' << z.real() << ',' << z.imag();
        os << "\n";
    }
}

} // namespace

int main(int argc, char** argv)
{
    Globals g;
    g.invocation = join_args(argc, argv);
    CLI::App app{"Belief propagation fixed points by polyhedral homotopy continuation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output file (default stdout)");

    ModelArgs ma;
    BpArgs bp_args("uniform"), sweep_bp("random"), trial_bp("uniform"), timing_bp("uniform");

    auto* c_exact = app.add_subcommand("exact", "exact marginals by enumeration");
    ma.add(c_exact);

    auto* c_bp = app.add_subcommand("bp", "run belief propagation");
    ma.add(c_bp);
    bp_args.add(c_bp);

    std::string system_file;
    bool stats_only = false;
    auto* c_system = app.add_subcommand("system", "write the fixed-point polynomial system");
    ma.add(c_system);
    c_system->add_flag("--stats", stats_only, "print equation statistics instead of the system");

    auto* c_solve = app.add_subcommand("solve", "all isolated solutions of a system");
    ma.add(c_solve);
    c_solve->add_option("--system", system_file, "system text file");

    auto* c_analyze = app.add_subcommand("analyze", "fixed-point reports");
    ma.add(c_analyze);

    SweepSpec sw;
    bool full = false;
    std::string fp_file;
    auto* c_sweep = app.add_subcommand("sweep", "(J, theta) parameter sweep");
    c_sweep->add_option("--kind", ma.kind, "grid | complete")->check(CLI::IsMember({"grid", "complete"}));
    c_sweep->add_option("--rows", ma.rows);
    c_sweep->add_option("--cols", ma.cols);
    c_sweep->add_option("--n", ma.n);
    c_sweep->add_option("--J-min", sw.J_min);
    c_sweep->add_option("--J-max", sw.J_max);
    c_sweep->add_option("--J-points", sw.J_points);
    c_sweep->add_option("--theta-min", sw.theta_min);
    c_sweep->add_option("--theta-max", sw.theta_max);
    c_sweep->add_option("--theta-points", sw.theta_points);
    int region_d = 0;
    c_sweep->add_option("--region-degree", region_d, "d for the phase regions (default from mean degree)");
    c_sweep->add_flag("--full", full, "41 x 41 points");
    c_sweep->add_option("--fixed-points", fp_file, "also write per-fixed-point reports here");
    sweep_bp.add(c_sweep);

    std::vector<double> slice_thetas{0.0, 0.1, 0.5};
    double sJmin = -2.0, sJmax = 2.0;
    int sJpoints = 41;
    auto* c_slice = app.add_subcommand("slice", "magnetization of every fixed point along J");
    c_slice->add_option("--kind", ma.kind)->check(CLI::IsMember({"grid", "complete"}));
    c_slice->add_option("--rows", ma.rows);
    c_slice->add_option("--cols", ma.cols);
    c_slice->add_option("--n", ma.n);
    c_slice->add_option("--theta", slice_thetas, "field values");
    c_slice->add_option("--J-min", sJmin);
    c_slice->add_option("--J-max", sJmax);
    c_slice->add_option("--J-points", sJpoints);

    int trials = 100;
    double K = 3.0;
    auto* c_trials = app.add_subcommand("random-trials", "grids with random couplings and fields");
    c_trials->add_option("--count", trials)->check(CLI::NonNegativeNumber);
    c_trials->add_option("--K", K, "parameters drawn from U(-K, K)");
    c_trials->add_option("--rows", ma.rows);
    c_trials->add_option("--cols", ma.cols);
    trial_bp.add(c_trials);

    int flip = 1;
    std::string method = "exact";
    double eps_min = 0.01, eps_max = 0.49, eps_step = 0.01, soft_zero = 0.0;
    auto* c_ham = app.add_subcommand("hamming", "(7,4) Hamming decoding of a single flipped bit");
    c_ham->add_option("--flip", flip, "flipped bit, 1-based")->check(CLI::Range(1, 7));
    c_ham->add_option("--method", method)->check(CLI::IsMember({"exact", "bp", "nphc"}));
    c_ham->add_option("--eps-min", eps_min);
    c_ham->add_option("--eps-max", eps_max);
    c_ham->add_option("--eps-step", eps_step);
    c_ham->add_option("--soft-zero", soft_zero, "value replacing the parity indicator zeros");

    auto* c_timing = app.add_subcommand("timing", "wall clock per phase, first solve and structure reuse");
    ma.add(c_timing);
    timing_bp.add(c_timing);

    CLI11_PARSE(app, argc, argv);

    int code = 0;
    try {
        SolveOptions so;
        so.threads = g.threads;

        if (*c_exact) {
            const AnyModel m = ma.load();
            const ExactResult r = std::holds_alternative<PairwiseModel>(m) ? enumerate_exact(std::get<PairwiseModel>(m)) : enumerate_exact(std::get<FactorGraph>(m));
            Output out(g);
            const bool pairwise = std::holds_alternative<PairwiseModel>(m);
            out.os() << "# log_partition=" << r.log_partition << (pairwise ? "\nnode,p_plus\n" : "\nnode,p_one\n");
            for (size_t i = 0; i < r.marginals.size(); ++i) out.os() << i << ',' << r.marginals[i] << "\n";
        } else if (*c_bp) {
            const AnyModel m = ma.load();
            Output out(g);
            if (std::holds_alternative<PairwiseModel>(m)) {
                const auto& pm = std::get<PairwiseModel>(m);
                const BpRun r = run_bp(pm, bp_args.options(g.seed));
                code = exit_code(r.status);
                out.os() << "# status=" << to_string(r.status) << " iterations=" << r.iterations << " period=" << r.period << "\nnode,belief_plus\n";
                const auto b = beliefs(pm, r.final_messages);
                for (size_t i = 0; i < b.size(); ++i) out.os() << i << ',' << b[i] << "\n";
            } else {
                const auto& fg = std::get<FactorGraph>(m);
                const FactorBpRun r = run_factor_bp(fg, bp_args.options(g.seed));
                code = exit_code(r.status);
                out.os() << "# status=" << to_string(r.status) << " iterations=" << r.iterations << " period=" << r.period << "\nnode,p_one\n";
                const auto b = factor_beliefs(fg, r.final_messages);
                for (size_t i = 0; i < b.size(); ++i) out.os() << i << ',' << b[i] << "\n";
            }
        } else if (*c_system) {
            const PolynomialSystem sys = system_of(ma.load());
            Output out(g);
            if (stats_only) {
                const SystemStats st = stats(sys);
                out.os() << "# equations=" << st.num_equations << " total_degree=" << st.total_degree << "\ndegree,count\n";
                for (const auto& [d, c] : st.degree_profile) out.os() << d << ',' << c << "\n";
            } else {
                write_system(out.os(), sys);
            }
        } else if (*c_solve) {
            PolynomialSystem sys;
            if (!system_file.empty()) {
                std::ifstream in(system_file);
                if (!in) throw std::runtime_error("cannot open " + system_file);
                sys = read_system(in);
            } else {
                sys = system_of(ma.load());
            }
            const SolutionSet s = solve_all(sys, g.seed, so);
            Output out(g);
            write_solutions(out.os(), s);
        } else if (*c_analyze) {
            const AnyModel am = ma.load();
            const PairwiseModel& m = require_pairwise(am);
            const SolutionSet s = solve_all(build_bp_system(m), g.seed, so);
            const auto reports = evaluate_fixed_points(m, s);
            Output out(g);
            out.os() << "# positive_real=" << s.positive_real.size() << " real=" << s.real_solutions.size() << " distinct=" << s.distinct_complex.size() << "\n";
            out.os() << "fp_index,stable,spectral_radius,bethe_logZ,mse,mean_magnetization";
            for (int i = 0; i < m.node_count(); ++i) out.os() << ",b" << i;
            out.os() << "\n";
            for (size_t k = 0; k < reports.size(); ++k) {
                const auto& r = reports[k];
                out.os() << k << ',' << to_string(r.stability) << ',' << r.spectral_radius << ',' << -r.bethe_F << ',' << r.mse_vs_exact << ',' << r.mean_magnetization;
                for (double b : r.beliefs) out.os() << ',' << b;
                out.os() << "\n";
            }
        } else if (*c_sweep) {
            sw.shape = ma.shape();
            sw.seed = g.seed;
            sw.solve = so;
            sw.bp = sweep_bp.options(g.seed);
            sw.threads = g.threads;
            if (full) sw.J_points = sw.theta_points = 41;
            if (region_d > 0) sw.region_degree = region_d;
            const auto rows = sweep(sw);
            Output out(g);
            out.os() << "J,theta,region,bp_status,bp_iterations,bp_mse,n_positive,n_real,n_distinct,n_stable,mse_best,mse_max,mse_all,mse_stable,stable_fallback,solver_failed\n";
            for (const auto& r : rows)
                out.os() << r.J << ',' << r.theta << ',' << to_string(r.region) << ',' << to_string(r.bp_status) << ',' << r.bp_iterations << ',' << r.bp_mse << ','
                         << r.n_positive << ',' << r.n_real << ',' << r.n_distinct << ',' << r.n_stable << ',' << r.mse_best << ',' << r.mse_max << ',' << r.mse_all << ','
                         << r.mse_stable << ',' << flag(r.stable_fallback) << ',' << flag(r.solver_failed) << "\n";
            if (!fp_file.empty()) {
                Globals fg = g;
                fg.out = fp_file;
                Output fo(fg);
                fo.os() << "J,theta,fp_index,stable,spectral_radius,bethe_logZ,mse,mean_magnetization\n";
                for (const auto& r : rows)
                    for (size_t k = 0; k < r.reports.size(); ++k) {
                        const auto& f = r.reports[k];
                        fo.os() << r.J << ',' << r.theta << ',' << k << ',' << to_string(f.stability) << ',' << f.spectral_radius << ',' << -f.bethe_F << ',' << f.mse_vs_exact << ','
                                << f.mean_magnetization << "\n";
                    }
            }
        } else if (*c_slice) {
            const auto Js = sweep_axis(sJmin, sJmax, sJpoints);
            const auto rows = slice(ma.shape(), slice_thetas, Js, g.seed, so, g.threads);
            Output out(g);
            out.os() << "theta,J,exact_m,fp_index,m_tilde,stable,max_bethe_Z,spectral_radius\n";
            for (const auto& r : rows)
                out.os() << r.theta << ',' << r.J << ',' << r.exact_magnetization << ',' << r.fp_index << ',' << r.magnetization << ',' << flag(r.stable) << ','
                         << flag(r.max_bethe_Z) << ',' << r.spectral_radius << "\n";
        } else if (*c_trials) {
            ModelShape shape;
            shape.rows = ma.rows;
            shape.cols = ma.cols;
            const TrialSummary s = random_grid_trials(shape, trials, K, g.seed, so, trial_bp.options(g.seed), g.threads);
            Output out(g);
            out.os() << "trial,bp_status,bp_iterations,n_positive,n_real,bp_mse,nphc_mse,solver_failed\n";
            for (const auto& r : s.rows)
                out.os() << r.trial << ',' << to_string(r.bp_status) << ',' << r.bp_iterations << ',' << r.n_positive << ',' << r.n_real << ',' << r.bp_mse << ',' << r.nphc_mse
                         << ',' << flag(r.solver_failed) << "\n";
            out.os() << "# bp_converged=" << s.bp_converged << '/' << s.rows.size() << " unique_positive=" << s.unique_positive << '/' << s.rows.size() << "\n";
        } else if (*c_ham) {
            std::vector<double> grid;
            for (int k = 0;; ++k) {
                const double e = eps_min + k * eps_step;
                if (e > eps_max + 1e-12) break;
                grid.push_back(std::round(e * 1e9) / 1e9);
            }
            DecodeOptions dop;
            dop.seed = g.seed;
            dop.threads = g.threads;
            dop.soft_zero = soft_zero;
            const DecodeMethod dm = method == "exact" ? DecodeMethod::Exact : method == "bp" ? DecodeMethod::BP : DecodeMethod::NPHC;
            const DecodeResult r = decode_threshold(flip, dm, grid, dop);
            Output out(g);
            out.os() << "# threshold=";
            if (r.threshold)
                out.os() << *r.threshold;
            else
                out.os() << "none";
            out.os() << "\nepsilon,p_bit_zero,n_positive,n_stable,spectral_radius\n";
            for (const auto& p : r.points) out.os() << p.epsilon << ',' << p.p_bit_zero << ',' << p.positive_fixed_points << ',' << p.stable_fixed_points << ',' << p.spectral_radius << "\n";
        } else if (*c_timing) {
            const AnyModel am = ma.load();
            const TimingReport r = timing_report(require_pairwise(am), g.seed, so, timing_bp.options(g.seed));
            Output out(g);
            out.os() << "run,phase,seconds\n";
            for (const auto& t : r.first) out.os() << "first," << t.phase << ',' << t.seconds << "\n";
            for (const auto& t : r.reuse) out.os() << "reuse," << t.phase << ',' << t.seconds << "\n";
            out.os() << "# reuse_skipped_mixed_volume=" << flag(r.reuse_skipped_mixed_volume) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}
