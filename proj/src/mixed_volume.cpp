#include "bpfp/homotopy.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace bpfp {

NewtonPolytopeSet NewtonPolytopeSet::of(const PolynomialSystem& sys)
{
    NewtonPolytopeSet p;
    p.supports = sys.supports();
    return p;
}

long long MixedCellDecomposition::bound() const
{
    long long s = 0;
    for (const auto& c : cells) s += c.volume;
    return s;
}

namespace {

// Phase-one simplex for {w : A w >= b}, w free, started at w = 0.
bool lp_feasible(int d, const std::vector<double>& A, const std::vector<double>& b, int m, std::vector<double>& w)
{
    w.assign(d, 0.0);
    std::vector<int> viol;
    for (int i = 0; i < m; ++i)
        if (b[i] > 1e-12) viol.push_back(i);
    if (viol.empty()) return true;
    const int na = static_cast<int>(viol.size());
    const int cols = d + m + na + 1;
    std::vector<double> T(static_cast<size_t>(m + 1) * cols, 0.0);
    auto at = [&](int i, int j) -> double& { return T[static_cast<size_t>(i) * cols + j]; };
    std::vector<int> basis(m), art(m, -1);
    for (int k = 0; k < na; ++k) art[viol[k]] = k;
    for (int i = 0; i < m; ++i) {
        if (art[i] >= 0) {
            for (int j = 0; j < d; ++j) at(i, j) = A[static_cast<size_t>(i) * d + j];
            at(i, d + i) = -1;
            at(i, d + m + art[i]) = 1;
            at(i, cols - 1) = b[i];
            basis[i] = d + m + art[i];
        } else {
            for (int j = 0; j < d; ++j) at(i, j) = -A[static_cast<size_t>(i) * d + j];
            at(i, d + i) = 1;
            at(i, cols - 1) = -b[i];
            basis[i] = d + i;
        }
    }
    for (int i = 0; i < m; ++i)
        if (art[i] >= 0)
            for (int j = 0; j < cols; ++j)
                if (j < d + m || j == cols - 1) at(m, j) -= at(i, j);
    std::vector<char> inb(cols, 0);
    for (int i = 0; i < m; ++i) inb[basis[i]] = 1;
    std::vector<int> sgn(d, 1);
    const double eps = 1e-9;
    for (int it = 0; it < 4000; ++it) {
        int q = -1, dir = 1;
        double best = eps;
        for (int j = 0; j < cols - 1; ++j) {
            if (inb[j]) continue;
            double rc = at(m, j);
            if (j < d) {
                if (std::abs(rc) > best) {
                    best = std::abs(rc);
                    q = j;
                    dir = rc < 0 ? 1 : -1;
                }
            } else if (-rc > best) {
                best = -rc;
                q = j;
                dir = 1;
            }
        }
        if (q < 0) break;
        if (dir < 0) {
            for (int i = 0; i <= m; ++i) at(i, q) = -at(i, q);
            sgn[q] = -sgn[q];
        }
        int p = -1;
        double br = 1e300;
        for (int i = 0; i < m; ++i) {
            double a = at(i, q);
            if (a > eps && basis[i] >= d) {
                double rt = at(i, cols - 1) / a;
                if (rt < br - 1e-12) {
                    br = rt;
                    p = i;
                }
            }
        }
        if (p < 0) break;
        double pv = at(p, q);
        for (int j = 0; j < cols; ++j) at(p, j) /= pv;
        for (int i = 0; i <= m; ++i) {
            if (i == p) continue;
            double f = at(i, q);
            if (f != 0.0)
                for (int j = 0; j < cols; ++j) at(i, j) -= f * at(p, j);
        }
        inb[basis[p]] = 0;
        basis[p] = q;
        inb[q] = 1;
    }
    if (-at(m, cols - 1) > 1e-7) return false;
    for (int i = 0; i < m; ++i)
        if (basis[i] < d) w[basis[i]] = sgn[basis[i]] * at(i, cols - 1);
    return true;
}

// Polyhedron y = y0 + N z, {A z >= b}, with a feasible witness z.
struct State {
    int d = 0;
    std::vector<double> y0, N, A, b, z;
    int m = 0;
};

class Enumerator {
public:
    Enumerator(const NewtonPolytopeSet& P, const std::vector<std::vector<long long>>& lift) : P_(P), lift_(lift)
    {
        n_ = static_cast<int>(P.dim());
        wl_.resize(n_);
        for (int m = 0; m < n_; ++m)
            for (long long v : lift[m]) wl_[m].push_back(static_cast<double>(v) / 65536.0);
    }

    std::vector<MixedCell> run()
    {
        const int n = n_;
        if (n == 0) return {};
        for (int m = 0; m < n; ++m) {
            std::vector<std::pair<int, int>> es;
            int k = static_cast<int>(P_.supports[m].size());
            for (int p = 0; p < k; ++p)
                for (int q = p + 1; q < k; ++q) es.push_back({p, q});
            edges_.push_back(es);
            offset_.push_back(total_edges_);
            total_edges_ += static_cast<int>(es.size());
        }
        shares_.assign(n, {});
        std::vector<std::vector<char>> uses(n, std::vector<char>(n, 0));
        for (int m = 0; m < n; ++m)
            for (const auto& p : P_.supports[m])
                for (int j = 0; j < n; ++j)
                    if (p[j] != P_.supports[m][0][j]) uses[m][j] = 1;
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c) {
                if (a == c) continue;
                for (int j = 0; j < n; ++j)
                    if (uses[a][j] && uses[c][j]) {
                        shares_[a].push_back(c);
                        break;
                    }
            }
        vars_of_.assign(n, {});
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j)
                if (uses[m][j]) vars_of_[m].push_back(j);

        State root;
        root.d = n;
        root.y0.assign(n, 0.0);
        root.N.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) root.N[static_cast<size_t>(i) * n + i] = 1.0;
        root.z.assign(n, 0.0);

        std::vector<std::vector<int>> cand(n);
        std::vector<std::vector<State>> single(n);
        for (int m = 0; m < n; ++m) {
            single[m].resize(edges_[m].size());
            for (int e = 0; e < static_cast<int>(edges_[m].size()); ++e) {
                State c = root;
                if (apply(c, m, edges_[m][e]) && solve(c)) {
                    cand[m].push_back(e);
                    single[m][e] = std::move(c);
                }
            }
            if (cand[m].empty()) return {};
        }
        compat_.assign(total_edges_, std::vector<bool>(total_edges_, true));
        for (int a = 0; a < n; ++a)
            for (int ea : cand[a])
                for (int c : shares_[a])
                    for (int ec : cand[c]) {
                        int ia = offset_[a] + ea, ic = offset_[c] + ec;
                        if (ia > ic) continue;
                        State s = single[a][ea];
                        bool ok = apply(s, c, edges_[c][ec]) && solve(s);
                        compat_[ia][ic] = compat_[ic][ia] = ok;
                    }
        single.clear();
        std::vector<int> choice(n, -1);
        rec(root, choice, cand);
        return std::move(cells_);
    }

private:
    const NewtonPolytopeSet& P_;
    const std::vector<std::vector<long long>>& lift_;
    std::vector<std::vector<double>> wl_;
    int n_ = 0;
    std::vector<std::vector<std::pair<int, int>>> edges_;
    std::vector<int> offset_;
    int total_edges_ = 0;
    std::vector<std::vector<int>> shares_, vars_of_;
    std::vector<std::vector<bool>> compat_;
    std::vector<MixedCell> cells_;

    bool add_eq(State& s, const std::vector<double>& g, double h)
    {
        const int n = n_, d = s.d;
        std::vector<double> c(d, 0.0);
        double hh = h;
        for (int i = 0; i < n; ++i) {
            if (g[i] == 0.0) continue;
            hh -= g[i] * s.y0[i];
            for (int j = 0; j < d; ++j) c[j] += g[i] * s.N[static_cast<size_t>(i) * d + j];
        }
        int jp = -1;
        double bv = 1e-9;
        for (int j = 0; j < d; ++j)
            if (std::abs(c[j]) > bv) {
                bv = std::abs(c[j]);
                jp = j;
            }
        if (jp < 0) return std::abs(hh) < 1e-9;
        auto elim = [&](std::vector<double>& M, int rows, std::vector<double>& rhs, double sign) {
            std::vector<double> out(static_cast<size_t>(rows) * (d - 1));
            for (int i = 0; i < rows; ++i) {
                double f = M[static_cast<size_t>(i) * d + jp] / c[jp];
                int kk = 0;
                for (int k = 0; k < d; ++k) {
                    if (k == jp) continue;
                    out[static_cast<size_t>(i) * (d - 1) + kk] = M[static_cast<size_t>(i) * d + k] - f * c[k];
                    ++kk;
                }
                rhs[i] += sign * f * hh;
            }
            M.swap(out);
        };
        elim(s.N, n, s.y0, 1.0);
        elim(s.A, s.m, s.b, -1.0);
        std::vector<double> z2;
        for (int k = 0; k < d; ++k)
            if (k != jp) z2.push_back(s.z[k]);
        s.z.swap(z2);
        s.d = d - 1;
        return true;
    }

    void add_ineq(State& s, const std::vector<double>& g, double h)
    {
        const int d = s.d;
        std::vector<double> c(d, 0.0);
        double hh = h;
        for (int i = 0; i < n_; ++i) {
            if (g[i] == 0.0) continue;
            hh -= g[i] * s.y0[i];
            for (int j = 0; j < d; ++j) c[j] += g[i] * s.N[static_cast<size_t>(i) * d + j];
        }
        bool zero = true;
        for (double v : c)
            if (std::abs(v) > 1e-12) zero = false;
        if (zero && hh <= 1e-9) return;
        s.A.insert(s.A.end(), c.begin(), c.end());
        s.b.push_back(hh);
        ++s.m;
    }

    // <p - q, y> = w(q) - w(p) and <c - p, y> >= w(p) - w(c)
    bool apply(State& s, int eq, std::pair<int, int> e)
    {
        const auto& S = P_.supports[eq];
        auto [p, q] = e;
        std::vector<double> g(n_);
        for (int j = 0; j < n_; ++j) g[j] = S[p][j] - S[q][j];
        if (!add_eq(s, g, wl_[eq][q] - wl_[eq][p])) return false;
        for (int c = 0; c < static_cast<int>(S.size()); ++c) {
            if (c == p || c == q) continue;
            for (int j = 0; j < n_; ++j) g[j] = S[c][j] - S[p][j];
            add_ineq(s, g, wl_[eq][p] - wl_[eq][c]);
        }
        return true;
    }

    bool solve(State& s)
    {
        const int d = s.d, m = s.m;
        std::vector<double> bb(m);
        for (int i = 0; i < m; ++i) {
            double v = s.b[i];
            for (int j = 0; j < d; ++j) v -= s.A[static_cast<size_t>(i) * d + j] * s.z[j];
            bb[i] = v;
        }
        std::vector<double> w;
        if (!lp_feasible(d, s.A, bb, m, w)) return false;
        for (int j = 0; j < d; ++j) s.z[j] += w[j];
        return true;
    }

    bool compatible(int m, int e, const std::vector<int>& choice) const
    {
        int id = offset_[m] + e;
        for (int c : shares_[m])
            if (choice[c] >= 0 && !compat_[id][offset_[c] + choice[c]]) return false;
        return true;
    }

    void rec(State s, std::vector<int>& choice, std::vector<std::vector<int>> cand)
    {
        const int n = n_;
        std::map<std::pair<int, int>, State> cache;
        for (;;) {
            bool forced = false;
            for (int m = 0; m < n; ++m) {
                if (choice[m] >= 0) continue;
                std::vector<int> keep;
                for (int e : cand[m]) {
                    if (!compatible(m, e, choice)) continue;
                    State c = s;
                    if (!apply(c, m, edges_[m][e]) || !solve(c)) continue;
                    keep.push_back(e);
                    cache[{m, e}] = std::move(c);
                }
                if (keep.empty()) return;
                cand[m] = keep;
                if (keep.size() == 1) {
                    s = cache[{m, keep[0]}];
                    choice[m] = keep[0];
                    forced = true;
                    cache.clear();
                }
            }
            if (!forced) break;
            cache.clear();
        }
        // branch on the fewest candidates, preferring equations tied to chosen ones
        std::vector<char> used(n, 0);
        for (int m = 0; m < n; ++m)
            if (choice[m] >= 0)
                for (int j : vars_of_[m]) used[j] = 1;
        int bm = -1;
        double best = 1e300;
        for (int m = 0; m < n; ++m) {
            if (choice[m] >= 0) continue;
            int sh = 0;
            for (int j : vars_of_[m]) sh += used[j];
            double score = 1000.0 * static_cast<double>(cand[m].size()) - sh;
            if (score < best) {
                best = score;
                bm = m;
            }
        }
        if (bm < 0) {
            leaf(choice);
            return;
        }
        for (int e : cand[bm]) {
            State c;
            auto it = cache.find({bm, e});
            if (it != cache.end())
                c = it->second;
            else {
                c = s;
                if (!apply(c, bm, edges_[bm][e]) || !solve(c)) continue;
            }
            auto ch = choice;
            ch[bm] = e;
            rec(std::move(c), ch, cand);
        }
    }

    void leaf(const std::vector<int>& choice)
    {
        const int n = n_;
        std::vector<std::vector<mpq_class>> M(n, std::vector<mpq_class>(n + 1));
        for (int m = 0; m < n; ++m) {
            auto [p, q] = edges_[m][choice[m]];
            const auto& S = P_.supports[m];
            for (int j = 0; j < n; ++j) M[m][j] = S[p][j] - S[q][j];
            M[m][n] = static_cast<long>(lift_[m][q] - lift_[m][p]);
        }
        mpq_class det = 1;
        for (int c = 0; c < n; ++c) {
            int piv = -1;
            for (int r = c; r < n; ++r)
                if (M[r][c] != 0) {
                    piv = r;
                    break;
                }
            if (piv < 0) return;
            if (piv != c) {
                std::swap(M[piv], M[c]);
                det = -det;
            }
            det *= M[c][c];
            for (int r = 0; r < n; ++r) {
                if (r == c || M[r][c] == 0) continue;
                mpq_class f = M[r][c] / M[c][c];
                for (int k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
            }
        }
        std::vector<mpq_class> y(n);
        for (int j = 0; j < n; ++j) y[j] = M[j][n] / M[j][j];
        MixedCell cell;
        cell.gaps.resize(n);
        for (int m = 0; m < n; ++m) {
            const auto& S = P_.supports[m];
            auto [p, q] = edges_[m][choice[m]];
            auto lifted = [&](int k) {
                mpq_class v = static_cast<long>(lift_[m][k]);
                for (int j = 0; j < n; ++j)
                    if (S[k][j]) v += S[k][j] * y[j];
                return v;
            };
            mpq_class base = lifted(p);
            for (int k = 0; k < static_cast<int>(S.size()); ++k) {
                mpq_class g = lifted(k) - base;
                if (k != p && k != q) {
                    if (g < 0) return;  // float pruning let an infeasible leaf through
                    if (g == 0) throw NonGenericLifting("lifting is not generic");
                }
                cell.gaps[m].push_back(g.get_d());
            }
            cell.edges.push_back({p, q});
        }
        mpz_class vol = abs(det.get_num());
        cell.volume = vol.get_si();
        for (int j = 0; j < n; ++j) cell.normal.push_back(y[j].get_d());
        cells_.push_back(std::move(cell));
    }
};

std::vector<std::vector<long long>> random_lifting(const NewtonPolytopeSet& polys, uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long long> u(0, (1LL << 16) - 1);
    std::vector<std::vector<long long>> lift;
    for (const auto& S : polys.supports) {
        std::vector<long long> l;
        for (size_t k = 0; k < S.size(); ++k) l.push_back(u(rng));
        lift.push_back(l);
    }
    return lift;
}

} // namespace

MixedCellDecomposition mixed_cells(const NewtonPolytopeSet& polys, const std::vector<std::vector<long long>>& lifting)
{
    if (lifting.size() != polys.dim()) throw std::invalid_argument("lifting size mismatch");
    for (size_t m = 0; m < polys.dim(); ++m) {
        if (polys.supports[m].empty()) throw std::invalid_argument("empty support");
        if (lifting[m].size() != polys.supports[m].size()) throw std::invalid_argument("lifting size mismatch");
        for (const auto& p : polys.supports[m])
            if (p.size() != polys.dim()) throw std::invalid_argument("system is not square");
    }
    MixedCellDecomposition out;
    out.polytopes = polys;
    out.lifting = lifting;
    Enumerator en(polys, lifting);
    out.cells = en.run();
    return out;
}

BkkResult bkk_bound(const NewtonPolytopeSet& polys, uint64_t seed)
{
    BkkResult r;
    std::mt19937_64 seeds(seed ^ 0x9e3779b97f4a7c15ULL);
    uint64_t s = seed;
    for (int attempt = 1; attempt <= 16; ++attempt) {
        r.attempts = attempt;
        try {
            r.cells = mixed_cells(polys, random_lifting(polys, s));
            r.bound = r.cells.bound();
            return r;
        } catch (const NonGenericLifting&) {
            s = seeds();
        }
    }
    throw NonGenericLifting("no generic lifting found after 16 attempts");
}

BkkResult bkk_bound(const PolynomialSystem& sys, uint64_t seed)
{
    const PolynomialSystem& tracked = sys.reduction ? *sys.reduction->system : sys;
    return bkk_bound(NewtonPolytopeSet::of(tracked), seed);
}

} // namespace bpfp
