#pragma once

#include "bpfp/bp.hpp"
#include "bpfp/model.hpp"

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace bpfp {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct Term {
    cplx coeff;
    std::vector<int> exps;
};
using Equation = std::vector<Term>;

struct PolynomialSystem;

// An equivalent square system in fewer variables whose torus solutions map
// one-to-one onto those of the parent system.
struct Reduction {
    std::shared_ptr<const PolynomialSystem> system;
    std::function<CVec(const CVec&)> lift;
};

struct PolynomialSystem {
    std::vector<std::string> var_names;
    std::vector<Equation> equations;
    // coordinates subject to the positivity filter
    std::vector<bool> is_message;
    std::shared_ptr<const Reduction> reduction;

    size_t variable_count() const { return var_names.size(); }
    size_t equation_count() const { return equations.size(); }
    void validate() const;
    // Newton-polytope supports, one exponent list per equation
    std::vector<std::vector<std::vector<int>>> supports() const;
    uint64_t support_hash() const;
};

struct SystemStats {
    size_t num_equations = 0;
    std::map<int, int> degree_profile;
    std::string total_degree;  // decimal big integer
};

// Builds a polynomial from a map of exponent vectors, merging like terms.
class PolyBuilder {
public:
    explicit PolyBuilder(size_t nvars) : n_(nvars) {}
    void add(cplx c, const std::vector<int>& e);
    PolyBuilder& operator*=(const PolyBuilder& o);
    PolyBuilder& operator+=(const PolyBuilder& o);
    static PolyBuilder constant(size_t nvars, cplx c);
    static PolyBuilder variable(size_t nvars, int var, cplx c = 1.0);
    Equation build() const;

private:
    size_t n_;
    std::map<std::vector<int>, cplx> terms_;
};

PolynomialSystem build_bp_system(const PairwiseModel& m);
PolynomialSystem build_factor_bp_system(const FactorGraph& fg);

// point on the full system from pairwise messages (+ their alpha)
CVec messages_to_point(const PairwiseModel& m, const std::vector<double>& plus, const std::vector<double>& minus, const std::vector<double>& alpha);

MessageSet point_to_messages(const PairwiseModel& m, const CVec& point);
// slots of factors with arity >= 2 carry variables (q0, q1) and alpha
std::vector<int> factor_system_slots(const FactorGraph& fg);
CVec factor_messages_to_point(const FactorGraph& fg, const FactorMessages& msgs);
FactorMessages point_to_factor_messages(const FactorGraph& fg, const CVec& point);

CVec residual(const PolynomialSystem& sys, const CVec& point);
double max_residual(const PolynomialSystem& sys, const CVec& point);
SystemStats stats(const PolynomialSystem& sys);
int total_degree_of(const Equation& eq);

void write_system(std::ostream& os, const PolynomialSystem& sys);
PolynomialSystem read_system(std::istream& is);

} // namespace bpfp
