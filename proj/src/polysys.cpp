#include "bpfp/polysys.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bpfp {

void PolynomialSystem::validate() const
{
    const size_t n = variable_count();
    if (equations.size() != n) throw std::invalid_argument("system is not square");
    if (is_message.size() != n) throw std::invalid_argument("message mask size mismatch");
    for (const auto& eq : equations) {
        if (eq.empty()) throw std::invalid_argument("empty equation");
        for (const auto& t : eq) {
            if (t.coeff == cplx(0.0)) throw std::invalid_argument("zero coefficient term");
            if (t.exps.size() != n) throw std::invalid_argument("exponent vector length mismatch");
            for (int e : t.exps)
                if (e < 0) throw std::invalid_argument("negative exponent");
        }
    }
}

std::vector<std::vector<std::vector<int>>> PolynomialSystem::supports() const
{
    std::vector<std::vector<std::vector<int>>> out;
    for (const auto& eq : equations) {
        std::vector<std::vector<int>> s;
        for (const auto& t : eq) s.push_back(t.exps);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        out.push_back(s);
    }
    return out;
}

uint64_t PolynomialSystem::support_hash() const
{
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&](uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(variable_count());
    for (const auto& s : supports()) {
        mix(0xabcdefULL + s.size());
        for (const auto& p : s)
            for (int e : p) mix(static_cast<uint64_t>(e) + 7);
    }
    return h;
}

void PolyBuilder::add(cplx c, const std::vector<int>& e)
{
    if (c == cplx(0.0)) return;
    terms_[e] += c;
}

PolyBuilder PolyBuilder::constant(size_t nvars, cplx c)
{
    PolyBuilder p(nvars);
    p.add(c, std::vector<int>(nvars, 0));
    return p;
}

PolyBuilder PolyBuilder::variable(size_t nvars, int var, cplx c)
{
    PolyBuilder p(nvars);
    std::vector<int> e(nvars, 0);
    e[var] = 1;
    p.add(c, e);
    return p;
}

PolyBuilder& PolyBuilder::operator*=(const PolyBuilder& o)
{
    std::map<std::vector<int>, cplx> out;
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : o.terms_) {
            std::vector<int> e(ea);
            for (size_t k = 0; k < n_; ++k) e[k] += eb[k];
            out[e] += ca * cb;
        }
    terms_.swap(out);
    return *this;
}

PolyBuilder& PolyBuilder::operator+=(const PolyBuilder& o)
{
    for (const auto& [e, c] : o.terms_) terms_[e] += c;
    return *this;
}

Equation PolyBuilder::build() const
{
    Equation eq;
    for (const auto& [e, c] : terms_)
        if (c != cplx(0.0)) eq.push_back({c, e});
    return eq;
}

namespace {

std::shared_ptr<const PolynomialSystem> bp_ratio_system(const PairwiseModel& m)
{
    const int E = m.directed_count();
    auto sys = std::make_shared<PolynomialSystem>();
    for (int e = 0; e < E; ++e) {
        auto [i, j] = m.directed()[e];
        sys->var_names.push_back("r_" + std::to_string(i) + "_" + std::to_string(j));
    }
    sys->is_message.assign(E, true);
    for (int e = 0; e < E; ++e) {
        auto [i, j] = m.directed()[e];
        double J = m.dir_coupling(e), th = m.field(i);
        // mu(+)/mu(-) = (c1 R + c2) / (c3 R + c4),  R = prod of incoming ratios
        double c1 = std::exp(J + th), c2 = std::exp(-J - th), c3 = std::exp(-J + th), c4 = std::exp(J - th);
        std::vector<int> R(E, 0);
        for (int k : m.neighbors(i))
            if (k != j) R[m.dir_index(k, i)] += 1;
        std::vector<int> rR = R, r(E, 0), one(E, 0);
        rR[e] += 1;
        r[e] = 1;
        PolyBuilder p(E);
        p.add(c3, rR);
        p.add(c4, r);
        p.add(-c1, R);
        p.add(-c2, one);
        sys->equations.push_back(p.build());
    }
    sys->validate();
    return sys;
}

std::pair<cplx, cplx> bp_update_values(const PairwiseModel& m, int e, const CVec& plus, const CVec& minus)
{
    auto [i, j] = m.directed()[e];
    cplx pp = 1.0, pm = 1.0;
    for (int k : m.neighbors(i)) {
        if (k == j) continue;
        int ke = m.dir_index(k, i);
        pp *= plus[ke];
        pm *= minus[ke];
    }
    double J = m.dir_coupling(e), th = m.field(i);
    return {std::exp(J + th) * pp + std::exp(-J - th) * pm, std::exp(-J + th) * pp + std::exp(J - th) * pm};
}

} // namespace

PolynomialSystem build_bp_system(const PairwiseModel& m)
{
    const int E = m.directed_count();
    const size_t n = 3 * static_cast<size_t>(E);
    PolynomialSystem sys;
    for (int e = 0; e < E; ++e) {
        auto [i, j] = m.directed()[e];
        std::string s = std::to_string(i) + "_" + std::to_string(j);
        sys.var_names.push_back("mu_" + s + "_p");
        sys.var_names.push_back("mu_" + s + "_m");
    }
    for (int e = 0; e < E; ++e) {
        auto [i, j] = m.directed()[e];
        sys.var_names.push_back("alpha_" + std::to_string(i) + "_" + std::to_string(j));
    }
    sys.is_message.assign(n, false);
    for (int k = 0; k < 2 * E; ++k) sys.is_message[k] = true;

    for (int e = 0; e < E; ++e) {
        auto [i, j] = m.directed()[e];
        double J = m.dir_coupling(e), th = m.field(i);
        std::vector<int> Pp(n, 0), Pm(n, 0);
        Pp[2 * E + e] = 1;
        Pm[2 * E + e] = 1;
        for (int k : m.neighbors(i)) {
            if (k == j) continue;
            int ke = m.dir_index(k, i);
            Pp[2 * ke] += 1;
            Pm[2 * ke + 1] += 1;
        }
        for (int xj : {1, -1}) {
            PolyBuilder p(n);
            std::vector<int> own(n, 0);
            own[2 * e + (xj == 1 ? 0 : 1)] = 1;
            p.add(-1.0, own);
            p.add(std::exp(J * xj + th), Pp);
            p.add(std::exp(-J * xj - th), Pm);
            sys.equations.push_back(p.build());
        }
        PolyBuilder nrm(n);
        std::vector<int> a(n, 0), b(n, 0), z(n, 0);
        a[2 * e] = 1;
        b[2 * e + 1] = 1;
        nrm.add(1.0, a);
        nrm.add(1.0, b);
        nrm.add(-1.0, z);
        sys.equations.push_back(nrm.build());
    }
    sys.validate();

    auto red = std::make_shared<Reduction>();
    red->system = bp_ratio_system(m);
    red->lift = [m](const CVec& r) {
        const int E = m.directed_count();
        CVec plus(E), minus(E), out(3 * static_cast<size_t>(E));
        for (int e = 0; e < E; ++e) {
            minus[e] = 1.0 / (1.0 + r[e]);
            plus[e] = r[e] * minus[e];
        }
        for (int e = 0; e < E; ++e) {
            auto [vp, vm] = bp_update_values(m, e, plus, minus);
            out[2 * e] = plus[e];
            out[2 * e + 1] = minus[e];
            out[2 * E + e] = 1.0 / (vp + vm);
        }
        return out;
    };
    sys.reduction = red;
    return sys;
}

CVec messages_to_point(const PairwiseModel& m, const std::vector<double>& plus, const std::vector<double>& minus, const std::vector<double>& alpha)
{
    const int E = m.directed_count();
    CVec x(3 * static_cast<size_t>(E));
    for (int e = 0; e < E; ++e) {
        x[2 * e] = plus[e];
        x[2 * e + 1] = minus[e];
        x[2 * E + e] = alpha[e];
    }
    return x;
}

MessageSet point_to_messages(const PairwiseModel& m, const CVec& point)
{
    const int E = m.directed_count();
    if (point.size() != 3 * static_cast<size_t>(E)) throw std::invalid_argument("point length mismatch");
    MessageSet s;
    for (int e = 0; e < E; ++e) {
        s.plus.push_back(point[2 * e].real());
        s.minus.push_back(point[2 * e + 1].real());
        s.alpha.push_back(point[2 * E + e].real());
    }
    return s;
}

std::vector<int> factor_system_slots(const FactorGraph& fg)
{
    FactorEdges fe(fg);
    std::vector<int> out;
    for (size_t s = 0; s < fe.slots.size(); ++s)
        if (fg.factors[fe.slots[s].first].vars.size() >= 2) out.push_back(static_cast<int>(s));
    return out;
}

namespace {

struct FactorLayout {
    FactorEdges fe;
    std::vector<int> slots;     // system index -> slot id
    std::vector<int> index_of;  // slot id -> system index or -1
    explicit FactorLayout(const FactorGraph& fg) : fe(fg), slots(factor_system_slots(fg)), index_of(fe.slots.size(), -1)
    {
        for (size_t k = 0; k < slots.size(); ++k) index_of[slots[k]] = static_cast<int>(k);
    }
};

// r_{g->v}(x) evaluated for complex q given per system index
cplx eval_r(const FactorGraph& fg, const FactorLayout& L, int slot, int x, const std::vector<std::array<cplx, 2>>& q)
{
    auto [g, kt] = L.fe.slots[slot];
    const auto& f = fg.factors[g];
    cplx r = 0.0;
    for (size_t idx = 0; idx < f.table.size(); ++idx) {
        if (static_cast<int>((idx >> kt) & 1) != x || f.table[idx] == 0.0) continue;
        cplx w = f.table[idx];
        for (size_t l = 0; l < f.vars.size(); ++l)
            if (static_cast<int>(l) != kt) w *= q[L.index_of[L.fe.of_factor[g][l]]][(idx >> l) & 1];
        r += w;
    }
    return r;
}

} // namespace

PolynomialSystem build_factor_bp_system(const FactorGraph& fg)
{
    fg.validate();
    for (const auto& f : fg.factors)
        if (f.vars.size() > 8) throw std::invalid_argument("factor arity above 8");
    FactorLayout L(fg);
    const int S = static_cast<int>(L.slots.size());
    const size_t n = 3 * static_cast<size_t>(S);
    PolynomialSystem sys;
    for (int k = 0; k < S; ++k) {
        auto [a, pos] = L.fe.slots[L.slots[k]];
        std::string s = std::to_string(L.fe.variable[L.slots[k]]) + "_f" + std::to_string(a);
        sys.var_names.push_back("q_" + s + "_0");
        sys.var_names.push_back("q_" + s + "_1");
        (void)pos;
    }
    for (int k = 0; k < S; ++k) {
        auto [a, pos] = L.fe.slots[L.slots[k]];
        sys.var_names.push_back("alpha_" + std::to_string(L.fe.variable[L.slots[k]]) + "_f" + std::to_string(a));
        (void)pos;
    }
    sys.is_message.assign(n, false);
    for (int k = 0; k < 2 * S; ++k) sys.is_message[k] = true;

    // r_{g->v}(x) as a polynomial in the q variables
    auto r_poly = [&](int slot, int x, size_t nv, auto var_of) {
        auto [g, kt] = L.fe.slots[slot];
        const auto& f = fg.factors[g];
        PolyBuilder p(nv);
        for (size_t idx = 0; idx < f.table.size(); ++idx) {
            if (static_cast<int>((idx >> kt) & 1) != x || f.table[idx] == 0.0) continue;
            std::vector<int> e(nv, 0);
            for (size_t l = 0; l < f.vars.size(); ++l)
                if (static_cast<int>(l) != kt) var_of(e, L.index_of[L.fe.of_factor[g][l]], static_cast<int>((idx >> l) & 1));
            p.add(f.table[idx], e);
        }
        return p;
    };

    for (int k = 0; k < S; ++k) {
        int s = L.slots[k];
        int v = L.fe.variable[s];
        for (int x = 0; x < 2; ++x) {
            PolyBuilder prod = PolyBuilder::variable(n, 2 * S + k);
            for (int t : L.fe.of_variable[v]) {
                if (t == s) continue;
                prod *= r_poly(t, x, n, [](std::vector<int>& e, int idx, int bit) { e[2 * idx + bit] += 1; });
            }
            prod += PolyBuilder::variable(n, 2 * k + x, -1.0);
            sys.equations.push_back(prod.build());
        }
        PolyBuilder nrm = PolyBuilder::variable(n, 2 * k);
        nrm += PolyBuilder::variable(n, 2 * k + 1);
        nrm += PolyBuilder::constant(n, -1.0);
        sys.equations.push_back(nrm.build());
    }
    sys.validate();

    // ratio form: rho = q(1)/q(0); q(0)-common factors cancel in r(1)/r(0)
    auto red_sys = std::make_shared<PolynomialSystem>();
    for (int k = 0; k < S; ++k) red_sys->var_names.push_back("rho_" + std::to_string(k));
    red_sys->is_message.assign(S, true);
    for (int k = 0; k < S; ++k) {
        int s = L.slots[k];
        int v = L.fe.variable[s];
        PolyBuilder lhs = PolyBuilder::variable(S, k);
        PolyBuilder rhs = PolyBuilder::constant(S, -1.0);
        auto ratio_var = [](std::vector<int>& e, int idx, int bit) {
            if (bit) e[idx] += 1;
        };
        for (int t : L.fe.of_variable[v]) {
            if (t == s) continue;
            lhs *= r_poly(t, 0, S, ratio_var);
            rhs *= r_poly(t, 1, S, ratio_var);
        }
        lhs += rhs;
        red_sys->equations.push_back(lhs.build());
    }
    red_sys->validate();
    auto red = std::make_shared<Reduction>();
    red->system = red_sys;
    red->lift = [fg, L](const CVec& rho) {
        const int S = static_cast<int>(L.slots.size());
        std::vector<std::array<cplx, 2>> q(S);
        for (int k = 0; k < S; ++k) {
            q[k][0] = 1.0 / (1.0 + rho[k]);
            q[k][1] = rho[k] * q[k][0];
        }
        CVec out(3 * static_cast<size_t>(S));
        for (int k = 0; k < S; ++k) {
            int s = L.slots[k];
            cplx p0 = 1.0, p1 = 1.0;
            for (int t : L.fe.of_variable[L.fe.variable[s]]) {
                if (t == s) continue;
                p0 *= eval_r(fg, L, t, 0, q);
                p1 *= eval_r(fg, L, t, 1, q);
            }
            out[2 * k] = q[k][0];
            out[2 * k + 1] = q[k][1];
            out[2 * S + k] = 1.0 / (p0 + p1);
        }
        return out;
    };
    sys.reduction = red;
    return sys;
}

CVec factor_messages_to_point(const FactorGraph& fg, const FactorMessages& msgs)
{
    FactorLayout L(fg);
    const int S = static_cast<int>(L.slots.size());
    CVec x(3 * static_cast<size_t>(S));
    for (int k = 0; k < S; ++k) {
        x[2 * k] = msgs.q[L.slots[k]][0];
        x[2 * k + 1] = msgs.q[L.slots[k]][1];
        x[2 * S + k] = msgs.alpha[L.slots[k]];
    }
    return x;
}

FactorMessages point_to_factor_messages(const FactorGraph& fg, const CVec& point)
{
    FactorLayout L(fg);
    const int S = static_cast<int>(L.slots.size());
    if (point.size() != 3 * static_cast<size_t>(S)) throw std::invalid_argument("point length mismatch");
    FactorMessages m = FactorMessages::uniform(fg);
    for (int k = 0; k < S; ++k) m.q[L.slots[k]] = {point[2 * k].real(), point[2 * k + 1].real()};
    // remaining q (into unary factors) and all r follow from one update
    FactorMessages nxt = factor_bp_step(fg, m);
    for (size_t s = 0; s < m.q.size(); ++s)
        if (L.index_of[s] < 0) m.q[s] = nxt.q[s];
    FactorMessages fin = factor_bp_step(fg, m);
    m.r = fin.r;
    m.alpha = fin.alpha;
    return m;
}

CVec residual(const PolynomialSystem& sys, const CVec& point)
{
    if (point.size() != sys.variable_count()) throw std::invalid_argument("residual: point length mismatch");
    CVec out;
    for (const auto& eq : sys.equations) {
        cplx v = 0.0;
        for (const auto& t : eq) {
            cplx m = t.coeff;
            for (size_t k = 0; k < t.exps.size(); ++k)
                for (int p = 0; p < t.exps[k]; ++p) m *= point[k];
            v += m;
        }
        out.push_back(v);
    }
    return out;
}

double max_residual(const PolynomialSystem& sys, const CVec& point)
{
    double r = 0.0;
    for (const auto& v : residual(sys, point)) r = std::max(r, std::abs(v));
    return r;
}

int total_degree_of(const Equation& eq)
{
    int d = 0;
    for (const auto& t : eq) {
        int s = 0;
        for (int e : t.exps) s += e;
        d = std::max(d, s);
    }
    return d;
}

SystemStats stats(const PolynomialSystem& sys)
{
    SystemStats st;
    st.num_equations = sys.equation_count();
    mpz_class d = 1;
    for (const auto& eq : sys.equations) {
        int deg = total_degree_of(eq);
        st.degree_profile[deg] += 1;
        d *= deg;
    }
    st.total_degree = d.get_str();
    return st;
}

void write_system(std::ostream& os, const PolynomialSystem& sys)
{
    os << "# vars";
    for (const auto& v : sys.var_names) os << ' ' << v;
    os << "\n# message";
    for (bool b : sys.is_message) os << ' ' << (b ? 1 : 0);
    os << '\n';
    os.precision(17);
    for (const auto& eq : sys.equations) {
        for (size_t t = 0; t < eq.size(); ++t) {
            if (t) os << " | ";
            os << eq[t].coeff.real() << ' ' << eq[t].coeff.imag() << " :";
            for (int e : eq[t].exps) os << ' ' << e;
        }
        os << '\n';
    }
}

PolynomialSystem read_system(std::istream& is)
{
    PolynomialSystem sys;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line.rfind("# vars", 0) == 0) {
            std::string tok;
            ls >> tok >> tok;
            while (ls >> tok) sys.var_names.push_back(tok);
            continue;
        }
        if (line.rfind("# message", 0) == 0) {
            std::string tok;
            ls >> tok >> tok;
            int b;
            while (ls >> b) sys.is_message.push_back(b != 0);
            continue;
        }
        if (line[0] == '#') continue;
        Equation eq;
        std::string chunk;
        std::istringstream terms(line);
        while (std::getline(terms, chunk, '|')) {
            std::istringstream cs(chunk);
            double re, im;
            char colon;
            if (!(cs >> re >> im >> colon) || colon != ':') throw std::runtime_error("malformed term: " + chunk);
            Term t{{re, im}, {}};
            int e;
            while (cs >> e) t.exps.push_back(e);
            eq.push_back(t);
        }
        sys.equations.push_back(eq);
    }
    if (sys.is_message.empty()) sys.is_message.assign(sys.var_names.size(), true);
    sys.validate();
    return sys;
}

} // namespace bpfp
