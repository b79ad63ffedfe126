#include "bpfp/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace bpfp {

const char* to_string(PathStatus s)
{
    switch (s) {
    case PathStatus::Success: return "Success";
    case PathStatus::Diverged: return "Diverged";
    case PathStatus::Singular: return "Singular";
    case PathStatus::StepLimit: return "StepLimit";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

using IMat = std::vector<std::vector<long long>>;

long long checked(__int128 v)
{
    if (v > (__int128{1} << 62) || v < -(__int128{1} << 62)) throw std::overflow_error("integer overflow in Smith form");
    return static_cast<long long>(v);
}

// U A W = D diagonal, U and W unimodular.
void diagonalize(IMat& A, IMat& U, IMat& W)
{
    const int n = static_cast<int>(A.size());
    U.assign(n, std::vector<long long>(n, 0));
    W.assign(n, std::vector<long long>(n, 0));
    for (int i = 0; i < n; ++i) U[i][i] = W[i][i] = 1;
    auto row_op = [&](int dst, int src, long long q) {  // row_dst -= q row_src
        for (int k = 0; k < n; ++k) {
            A[dst][k] = checked(static_cast<__int128>(A[dst][k]) - static_cast<__int128>(q) * A[src][k]);
            U[dst][k] = checked(static_cast<__int128>(U[dst][k]) - static_cast<__int128>(q) * U[src][k]);
        }
    };
    auto col_op = [&](int dst, int src, long long q) {
        for (int k = 0; k < n; ++k) {
            A[k][dst] = checked(static_cast<__int128>(A[k][dst]) - static_cast<__int128>(q) * A[k][src]);
            W[k][dst] = checked(static_cast<__int128>(W[k][dst]) - static_cast<__int128>(q) * W[k][src]);
        }
    };
    for (int t = 0; t < n; ++t) {
        for (;;) {
            int pr = -1, pc = -1;
            long long best = 0;
            for (int i = t; i < n; ++i)
                for (int j = t; j < n; ++j)
                    if (A[i][j] != 0 && (best == 0 || std::llabs(A[i][j]) < best)) {
                        best = std::llabs(A[i][j]);
                        pr = i;
                        pc = j;
                    }
            if (pr < 0) throw std::invalid_argument("singular exponent matrix");
            std::swap(A[pr], A[t]);
            std::swap(U[pr], U[t]);
            for (int k = 0; k < n; ++k) {
                std::swap(A[k][pc], A[k][t]);
                std::swap(W[k][pc], W[k][t]);
            }
            bool clean = true;
            for (int i = t + 1; i < n; ++i) {
                if (A[i][t] == 0) continue;
                row_op(i, t, A[i][t] / A[t][t]);
                if (A[i][t] != 0) clean = false;
            }
            for (int j = t + 1; j < n; ++j) {
                if (A[t][j] == 0) continue;
                col_op(j, t, A[t][j] / A[t][t]);
                if (A[t][j] != 0) clean = false;
            }
            if (clean) break;
        }
    }
}

} // namespace

std::vector<CVec> solve_binomial(const IMat& V, const CVec& b)
{
    const int n = static_cast<int>(V.size());
    IMat D = V, U, W;
    diagonalize(D, U, W);
    // V z = log b + 2 pi i k  <=>  D u = U(log b) + 2 pi i k',  z = W u
    std::vector<cplx> Ulog(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) Ulog[i] += static_cast<double>(U[i][k]) * std::log(b[k]);
    std::vector<long long> d(n);
    long long total = 1;
    for (int i = 0; i < n; ++i) {
        d[i] = std::llabs(D[i][i]);
        total *= d[i];
    }
    std::vector<CVec> out;
    std::vector<long long> k(n, 0);
    const cplx twopi_i(0.0, 2.0 * std::numbers::pi);
    for (long long c = 0; c < total; ++c) {
        std::vector<cplx> u(n);
        for (int i = 0; i < n; ++i) u[i] = (Ulog[i] + twopi_i * static_cast<double>(k[i])) / static_cast<double>(D[i][i]);
        CVec x(n);
        for (int j = 0; j < n; ++j) {
            cplx z = 0.0;
            for (int i = 0; i < n; ++i)
                if (W[j][i]) z += static_cast<double>(W[j][i]) * u[i];
            x[j] = std::exp(z);
        }
        out.push_back(x);
        for (int i = 0; i < n; ++i) {
            if (++k[i] < d[i]) break;
            k[i] = 0;
        }
    }
    return out;
}

PolynomialSystem StartSystem::as_system() const
{
    PolynomialSystem s;
    const size_t n = polytopes.dim();
    for (size_t j = 0; j < n; ++j) s.var_names.push_back("x" + std::to_string(j));
    s.is_message.assign(n, true);
    for (size_t m = 0; m < n; ++m) {
        Equation eq;
        for (size_t k = 0; k < polytopes.supports[m].size(); ++k) eq.push_back({coeffs[m][k], polytopes.supports[m][k]});
        s.equations.push_back(eq);
    }
    return s;
}

StartSystem start_system(const MixedCellDecomposition& cells, uint64_t seed)
{
    StartSystem ss;
    ss.polytopes = cells.polytopes;
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1DULL + 17);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const size_t n = ss.polytopes.dim();
    for (const auto& S : ss.polytopes.supports) {
        std::vector<cplx> c;
        for (size_t k = 0; k < S.size(); ++k) c.push_back(std::polar(1.0, u(rng)));
        ss.coeffs.push_back(c);
    }
    for (size_t ci = 0; ci < cells.cells.size(); ++ci) {
        const auto& cell = cells.cells[ci];
        IMat V(n, std::vector<long long>(n));
        CVec b(n);
        for (size_t m = 0; m < n; ++m) {
            auto [p, q] = cell.edges[m];
            for (size_t j = 0; j < n; ++j) V[m][j] = ss.polytopes.supports[m][p][j] - ss.polytopes.supports[m][q][j];
            b[m] = -ss.coeffs[m][q] / ss.coeffs[m][p];
        }
        for (auto& x : solve_binomial(V, b)) {
            ss.points.push_back(std::move(x));
            ss.cell_of_point.push_back(static_cast<int>(ci));
        }
    }
    return ss;
}

double binomial_residual(const StartSystem& ss, const MixedCellDecomposition& cells, size_t k)
{
    const auto& cell = cells.cells[ss.cell_of_point[k]];
    const auto& x = ss.points[k];
    double r = 0.0;
    for (size_t m = 0; m < ss.polytopes.dim(); ++m) {
        auto [p, q] = cell.edges[m];
        auto mono = [&](int idx) {
            cplx v = 1.0;
            const auto& a = ss.polytopes.supports[m][idx];
            for (size_t j = 0; j < a.size(); ++j)
                for (int e = 0; e < a[j]; ++e) v *= x[j];
            return v;
        };
        r = std::max(r, std::abs(ss.coeffs[m][p] * mono(p) + ss.coeffs[m][q] * mono(q)));
    }
    return r;
}

SystemEvaluator::SystemEvaluator(const PolynomialSystem& sys) : n_(sys.variable_count())
{
    for (const auto& eq : sys.equations) {
        std::vector<T> ts;
        for (const auto& t : eq) {
            T c{t.coeff, {}};
            for (size_t j = 0; j < t.exps.size(); ++j)
                if (t.exps[j]) c.vp.push_back({static_cast<int>(j), t.exps[j]});
            if (c.vp.size() > 16) throw std::invalid_argument("term with more than 16 variables");
            ts.push_back(std::move(c));
        }
        eqs_.push_back(std::move(ts));
    }
}

namespace {

cplx ipow(cplx x, int e)
{
    cplx r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

template <class Coeff, class Terms>
void eval_terms(const Terms& eqs, const Eigen::VectorXcd& x, Eigen::VectorXcd& f, Eigen::MatrixXcd* jac, Coeff coeff)
{
    const Eigen::Index n = x.size();
    f.setZero(static_cast<Eigen::Index>(eqs.size()));
    if (jac) jac->setZero(static_cast<Eigen::Index>(eqs.size()), n);
    cplx pw[16];
    for (size_t m = 0; m < eqs.size(); ++m) {
        for (size_t ti = 0; ti < eqs[m].size(); ++ti) {
            const auto& t = eqs[m][ti];
            cplx c = coeff(m, ti, t);
            const size_t k = t.vp.size();
            cplx v = c;
            for (size_t a = 0; a < k && a < 16; ++a) {
                pw[a] = ipow(x[t.vp[a].first], t.vp[a].second);
                v *= pw[a];
            }
            f[m] += v;
            if (!jac) continue;
            for (size_t a = 0; a < k; ++a) {
                cplx d = c * static_cast<double>(t.vp[a].second) * ipow(x[t.vp[a].first], t.vp[a].second - 1);
                for (size_t b = 0; b < k; ++b)
                    if (b != a) d *= pw[b];
                (*jac)(static_cast<Eigen::Index>(m), t.vp[a].first) += d;
            }
        }
    }
}

} // namespace

void SystemEvaluator::eval(const Eigen::VectorXcd& x, Eigen::VectorXcd& f, Eigen::MatrixXcd* jac) const
{
    eval_terms(eqs_, x, f, jac, [](size_t, size_t, const T& t) { return t.c; });
}

LinearHomotopy::LinearHomotopy(const PolynomialSystem& start, const PolynomialSystem& target, cplx gamma) : n_(start.variable_count()), gamma_(gamma)
{
    if (start.variable_count() != target.variable_count() || start.equation_count() != target.equation_count() || start.equation_count() != n_)
        throw std::invalid_argument("homotopy dimension mismatch");
    for (size_t m = 0; m < n_; ++m) {
        std::map<std::vector<int>, std::pair<cplx, cplx>> merged;
        for (const auto& t : start.equations[m]) merged[t.exps].first += t.coeff;
        for (const auto& t : target.equations[m]) merged[t.exps].second += t.coeff;
        std::vector<T> ts;
        for (const auto& [e, c] : merged) {
            T t{c.first, c.second, {}};
            for (size_t j = 0; j < e.size(); ++j)
                if (e[j]) t.vp.push_back({static_cast<int>(j), e[j]});
            if (t.vp.size() > 16) throw std::invalid_argument("term with more than 16 variables");
            ts.push_back(std::move(t));
        }
        eqs_.push_back(std::move(ts));
    }
}

void LinearHomotopy::eval(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx, Eigen::VectorXcd* ht) const
{
    const auto n = static_cast<Eigen::Index>(n_);
    h.setZero(n);
    hx.setZero(n, n);
    if (ht) ht->setZero(n);
    const cplx gt = gamma_ * t;
    cplx pw[16], pre[17], suf[17];
    for (size_t m = 0; m < n_; ++m) {
        const auto row = static_cast<Eigen::Index>(m);
        for (const auto& term : eqs_[m]) {
            const size_t k = term.vp.size();
            pre[0] = 1.0;
            for (size_t a = 0; a < k; ++a) {
                pw[a] = ipow(x[term.vp[a].first], term.vp[a].second);
                pre[a + 1] = pre[a] * pw[a];
            }
            suf[k] = 1.0;
            for (size_t a = k; a-- > 0;) suf[a] = suf[a + 1] * pw[a];
            const cplx c = (1.0 - t) * term.q + gt * term.f;
            h[row] += c * pre[k];
            if (ht) (*ht)[row] += (gamma_ * term.f - term.q) * pre[k];
            for (size_t a = 0; a < k; ++a) {
                const int e = term.vp[a].second;
                cplx d = static_cast<double>(e) * ipow(x[term.vp[a].first], e - 1) * pre[a] * suf[a + 1];
                hx(row, term.vp[a].first) += c * d;
            }
        }
    }
}

namespace {

// Cell homotopy sum_k c_k x^{a_k} exp(g_k s), s from s0 < 0 up to 0.
class PolyhedralHomotopy : public Homotopy {
public:
    PolyhedralHomotopy(const StartSystem& ss, const MixedCell& cell) : n_(ss.polytopes.dim())
    {
        double gmin = 1e300;
        for (const auto& g : cell.gaps)
            for (double v : g)
                if (v > 0) gmin = std::min(gmin, v);
        if (gmin == 1e300) gmin = 1.0;
        for (size_t m = 0; m < n_; ++m) {
            std::vector<T> ts;
            for (size_t k = 0; k < ss.polytopes.supports[m].size(); ++k) {
                T t{ss.coeffs[m][k], cell.gaps[m][k] / gmin, {}};
                const auto& a = ss.polytopes.supports[m][k];
                for (size_t j = 0; j < a.size(); ++j)
                    if (a[j]) t.vp.push_back({static_cast<int>(j), a[j]});
                ts.push_back(std::move(t));
            }
            eqs_.push_back(std::move(ts));
        }
    }
    size_t dim() const override { return n_; }
    void eval(const Eigen::VectorXcd& x, double s, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx, Eigen::VectorXcd* ht) const override
    {
        eval_terms(eqs_, x, h, &hx, [s](size_t, size_t, const T& t) { return t.gap == 0.0 ? t.c : t.c * std::exp(t.gap * s); });
        if (ht) {
            Eigen::VectorXcd d;
            eval_terms(eqs_, x, d, nullptr, [s](size_t, size_t, const T& t) { return t.gap == 0.0 ? cplx(0.0) : t.c * t.gap * std::exp(t.gap * s); });
            *ht = d;
        }
    }

private:
    struct T {
        cplx c;
        double gap;
        std::vector<std::pair<int, int>> vp;
    };
    size_t n_;
    std::vector<std::vector<T>> eqs_;
};

Eigen::VectorXcd to_eigen(const CVec& v)
{
    Eigen::VectorXcd x(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
    return x;
}

CVec from_eigen(const Eigen::VectorXcd& x)
{
    return CVec(x.data(), x.data() + x.size());
}

double inf_norm(const Eigen::VectorXcd& v)
{
    double r = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) r = std::max(r, std::norm(v[i]));
    return std::sqrt(r);
}

// cheap conditioning estimate from the pivoted LU diagonal
bool well_posed(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu)
{
    const auto& u = lu.matrixLU();
    double lo = 1e300, hi = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double a = std::norm(u(i, i));
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    return hi > 0.0 && std::isfinite(hi) && lo > 1e-30 * hi;
}

// condition estimate of diag(1/row scale) J diag(max(|x|, 1))
double scaled_rcond(const Eigen::MatrixXcd& jac, const Eigen::VectorXcd& x)
{
    Eigen::MatrixXcd a = jac;
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) *= std::max(std::abs(x[j]), 1.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double r = a.row(i).cwiseAbs().maxCoeff();
        if (r > 0.0) a.row(i) /= r;
    }
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(a).rcond();
}

// 1 + max_ij |dh_i/dx_j| max(|x_j|, 1), the size of the largest monomial terms
double term_scale(const Eigen::MatrixXcd& jac, const Eigen::VectorXcd& x)
{
    double m = 0.0;
    for (Eigen::Index j = 0; j < jac.cols(); ++j) m = std::max(m, jac.col(j).cwiseAbs().maxCoeff() * std::max(std::abs(x[j]), 1.0));
    return 1.0 + m;
}

bool all_finite(const Eigen::VectorXcd& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    return true;
}

} // namespace

PathResult track(const Homotopy& hom, const CVec& x0, double t0, double t1, const TrackOptions& opts)
{
    PathResult res;
    const double L = std::abs(t1 - t0);
    const double dir = t1 > t0 ? 1.0 : -1.0;
    Eigen::VectorXcd x = to_eigen(x0), h, ht, dx;
    Eigen::MatrixXcd hx;
    double t = t0;
    double step = opts.initial_step * L;
    const double max_step = opts.max_step * L;
    int streak = 0;
    bool last_singular = false;

    auto correct = [&](Eigen::VectorXcd& y, double tt, int iters, double tol) {
        double prev = 0.0;
        for (int it = 0; it < iters; ++it) {
            hom.eval(y, tt, h, hx, nullptr);
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(hx);
            if (!well_posed(lu)) {
                last_singular = true;
                return false;
            }
            last_singular = false;
            Eigen::VectorXcd d = lu.solve(-h);
            y += d;
            if (!all_finite(y)) return false;
            const double dn = inf_norm(d), scale = tol * (1.0 + inf_norm(y));
            if (dn <= scale) return true;
            // a posteriori error of the updated iterate under contraction
            if (it > 0) {
                const double theta = dn / prev;
                if (theta < 0.5 && theta / (1.0 - theta) * dn <= scale) return true;
            }
            prev = dn;
        }
        return false;
    };
    auto finish = [&](PathStatus st) {
        res.status = st;
        res.endpoint = from_eigen(x);
        hom.eval(x, t, h, hx, nullptr);
        res.final_residual = inf_norm(h);
        return res;
    };

    if (!correct(x, t0, opts.polish_iters, opts.corrector_tol)) return finish(PathStatus::Singular);
    while (dir * (t1 - t) > 0.0) {
        if (res.steps >= opts.max_steps) return finish(PathStatus::StepLimit);
        double hs = std::min(step, std::abs(t1 - t));
        hom.eval(x, t, h, hx, &ht);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(hx);
        bool ok = well_posed(lu);
        Eigen::VectorXcd xp;
        double tn = (hs == std::abs(t1 - t)) ? t1 : t + dir * hs;
        if (ok) {
            dx = lu.solve(-ht);
            xp = x + (dir * hs) * dx;
            ok = all_finite(xp) && correct(xp, tn, opts.max_corrector_iters, opts.corrector_tol);
        } else {
            last_singular = true;
        }
        if (ok) {
            x = xp;
            t = tn;
            ++res.steps;
            if (inf_norm(x) > opts.divergence_bound) return finish(PathStatus::Diverged);
            if (++streak >= 4) {
                step = std::min(step * 1.5, max_step);
                streak = 0;
            }
        } else {
            step *= 0.5;
            streak = 0;
            if (step < opts.min_step * L) {
                if (inf_norm(x) > std::sqrt(opts.divergence_bound)) return finish(PathStatus::Diverged);
                return finish(last_singular ? PathStatus::Singular : PathStatus::StepLimit);
            }
        }
    }
    // final polish at the end of the path
    for (int it = 0; it < opts.polish_iters; ++it) {
        hom.eval(x, t1, h, hx, nullptr);
        if (inf_norm(h) < opts.final_tol) break;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(hx);
        if (!well_posed(lu)) break;
        Eigen::VectorXcd d = lu.solve(-h);
        if (!all_finite(x + d)) break;
        x += d;
    }
    hom.eval(x, t1, h, hx, nullptr);
    res.endpoint = from_eigen(x);
    res.final_residual = inf_norm(h);
    if (inf_norm(x) > opts.divergence_bound)
        res.status = PathStatus::Diverged;
    else
        res.status = res.final_residual < opts.final_tol * term_scale(hx, x) && scaled_rcond(hx, x) >= opts.singular_rcond ? PathStatus::Success : PathStatus::Singular;
    return res;
}

PathResult track_path(const PolynomialSystem& start, const PolynomialSystem& target, cplx gamma, const CVec& x0, const TrackOptions& opts)
{
    LinearHomotopy hom(start, target, gamma);
    return track(hom, x0, 0.0, 1.0, opts);
}

double newton_polish(const SystemEvaluator& ev, CVec& xv, int iters, double tol)
{
    Eigen::VectorXcd x = to_eigen(xv), f;
    Eigen::MatrixXcd J;
    for (int it = 0; it < iters; ++it) {
        ev.eval(x, f, &J);
        if (!all_finite(f) || inf_norm(f) < tol) break;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
        if (!well_posed(lu)) break;
        Eigen::VectorXcd d = lu.solve(-f);
        if (!all_finite(x + d)) break;
        x += d;
    }
    ev.eval(x, f, nullptr);
    xv = from_eigen(x);
    return all_finite(f) ? inf_norm(f) : std::numeric_limits<double>::infinity();
}

int SolutionSet::success_count() const
{
    auto it = status_counts.find(PathStatus::Success);
    return it == status_counts.end() ? 0 : it->second;
}

int count_real(const SolutionSet& sols) { return static_cast<int>(sols.real_solutions.size()); }

namespace {

template <class F>
void parallel_for(size_t count, int threads, F f)
{
    if (threads <= 1 || count < 2) {
        for (size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < count; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

std::shared_ptr<const PreparedStructure> prepare(const PolynomialSystem& tracked, uint64_t seed, const SolveOptions& opts)
{
    auto ps = std::make_shared<PreparedStructure>();
    auto t0 = Clock::now();
    ps->bkk = bkk_bound(NewtonPolytopeSet::of(tracked), seed);
    ps->mixed_volume_seconds = seconds_since(t0);
    t0 = Clock::now();
    ps->start = start_system(ps->bkk.cells, seed);
    ps->start_seconds = seconds_since(t0);
    t0 = Clock::now();
    const auto& cells = ps->bkk.cells.cells;
    std::vector<std::unique_ptr<PolyhedralHomotopy>> homs;
    for (const auto& c : cells) homs.push_back(std::make_unique<PolyhedralHomotopy>(ps->start, c));
    ps->generic_solutions.resize(ps->start.points.size());
    // at s0 every lifted term is below 1e-16 relative to the cell's binomial part
    const double s0 = std::log(1e-16);
    TrackOptions to = opts.track;
    parallel_for(ps->start.points.size(), opts.threads, [&](size_t k) {
        ps->generic_solutions[k] = track(*homs[ps->start.cell_of_point[k]], ps->start.points[k], s0, 0.0, to);
    });
    ps->polyhedral_seconds = seconds_since(t0);
    return ps;
}

} // namespace

std::shared_ptr<const PreparedStructure> StructureCache::get_or_build(const PolynomialSystem& tracked, uint64_t seed, const SolveOptions& opts, bool& reused)
{
    auto key = std::make_pair(tracked.support_hash(), seed);
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            reused = true;
            return it->second;
        }
    }
    std::lock_guard<std::mutex> build(build_mu_);
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            reused = true;
            return it->second;
        }
    }
    reused = false;
    auto ps = prepare(tracked, seed, opts);
    std::lock_guard<std::mutex> lk(mu_);
    entries_[key] = ps;
    return ps;
}

size_t StructureCache::size() const
{
    std::lock_guard<std::mutex> lk(mu_);
    return entries_.size();
}

void StructureCache::clear()
{
    std::lock_guard<std::mutex> lk(mu_);
    entries_.clear();
}

SolutionSet solve_all(const PolynomialSystem& sys, uint64_t seed, const SolveOptions& opts, StructureCache* cache)
{
    sys.validate();
    const bool reduced = opts.use_reduction && sys.reduction != nullptr;
    const PolynomialSystem& tracked = reduced ? *sys.reduction->system : sys;
    SolutionSet out;
    bool reused = false;
    std::shared_ptr<const PreparedStructure> ps = cache ? cache->get_or_build(tracked, seed, opts, reused) : prepare(tracked, seed, opts);
    out.bkk = ps->bkk.bound;
    out.timings.reused_structure = reused;
    if (!reused) {
        out.timings.mixed_volume = ps->mixed_volume_seconds;
        out.timings.start_system = ps->start_seconds;
        out.timings.polyhedral = ps->polyhedral_seconds;
    }

    auto t0 = Clock::now();
    std::mt19937_64 rng(seed ^ 0x5851F42D4C957F2DULL);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const cplx gamma = std::polar(1.0, u(rng));
    PolynomialSystem Q = ps->start.as_system();
    LinearHomotopy hom(Q, tracked, gamma);
    const size_t P = ps->generic_solutions.size();
    std::vector<PathResult> lin(P);
    parallel_for(P, opts.threads, [&](size_t k) {
        const auto& g = ps->generic_solutions[k];
        if (g.status != PathStatus::Success) {
            lin[k] = g;
            return;
        }
        lin[k] = track(hom, g.endpoint, 0.0, 1.0, opts.track);
    });
    out.timings.linear = seconds_since(t0);

    t0 = Clock::now();
    SystemEvaluator full(sys);
    out.raw_paths.resize(P);
    parallel_for(P, opts.threads, [&](size_t k) {
        PathResult r = lin[k];
        if (r.status == PathStatus::Success) {
            CVec x = reduced ? sys.reduction->lift(r.endpoint) : r.endpoint;
            bool finite = std::all_of(x.begin(), x.end(), [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
            if (!finite) {
                r.status = PathStatus::Singular;
            } else {
                r.final_residual = newton_polish(full, x, opts.track.polish_iters, opts.track.final_tol);
                r.endpoint = x;
                if (!(r.final_residual < 1e-8)) r.status = PathStatus::Singular;
            }
        }
        out.raw_paths[k] = std::move(r);
    });
    int unresolved = 0;
    for (const auto& r : out.raw_paths) {
        out.status_counts[r.status] += 1;
        if (r.status == PathStatus::Singular || r.status == PathStatus::StepLimit) ++unresolved;
    }
    out.failed = P > 0 && unresolved > opts.max_unresolved_fraction * static_cast<double>(P);

    // deduplicate in relative sup-norm
    std::vector<size_t> order;
    for (size_t k = 0; k < P; ++k)
        if (out.raw_paths[k].status == PathStatus::Success) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const auto& xa = out.raw_paths[a].endpoint;
        const auto& xb = out.raw_paths[b].endpoint;
        for (size_t i = 0; i < xa.size(); ++i) {
            if (xa[i].real() != xb[i].real()) return xa[i].real() < xb[i].real();
            if (xa[i].imag() != xb[i].imag()) return xa[i].imag() < xb[i].imag();
        }
        return false;
    });
    for (size_t k : order) {
        const auto& x = out.raw_paths[k].endpoint;
        double nx = 0.0;
        for (auto v : x) nx = std::max(nx, std::abs(v));
        bool dup = false;
        for (const auto& y : out.distinct_complex) {
            double d = 0.0;
            for (size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
            if (d <= opts.dedup_tol * std::max(1.0, nx)) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        out.distinct_complex.push_back(x);
        out.distinct_residual.push_back(out.raw_paths[k].final_residual);
        double im = 0.0;
        for (auto v : x) im = std::max(im, std::abs(v.imag()));
        bool real = im < opts.real_tol;
        bool pos = real;
        for (size_t i = 0; i < x.size() && pos; ++i)
            if (sys.is_message[i] && !(x[i].real() > opts.pos_tol)) pos = false;
        out.distinct_real.push_back(real);
        out.distinct_positive.push_back(pos);
        if (real) {
            CVec xr(x.size());
            for (size_t i = 0; i < x.size(); ++i) xr[i] = x[i].real();
            out.real_solutions.push_back(xr);
            if (pos) out.positive_real.push_back(xr);
        }
    }
    out.timings.post = seconds_since(t0);
    return out;
}

} // namespace bpfp
