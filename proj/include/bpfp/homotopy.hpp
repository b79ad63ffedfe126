#pragma once

#include "bpfp/polysys.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bpfp {

using Support = std::vector<std::vector<int>>;

struct NewtonPolytopeSet {
    std::vector<Support> supports;
    size_t dim() const { return supports.size(); }
    static NewtonPolytopeSet of(const PolynomialSystem& sys);
};

struct MixedCell {
    // one pair of support-point indices per equation
    std::vector<std::pair<int, int>> edges;
    long long volume = 0;
    // inner normal y of the lower facet (y, 1)
    std::vector<double> normal;
    // lifted gap <a,y> + w(a) - min over the support, per equation and support point
    std::vector<std::vector<double>> gaps;
};

struct MixedCellDecomposition {
    NewtonPolytopeSet polytopes;
    std::vector<std::vector<long long>> lifting;
    std::vector<MixedCell> cells;
    long long bound() const;
};

struct NonGenericLifting : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BkkResult {
    long long bound = 0;
    MixedCellDecomposition cells;
    int attempts = 0;
};

// Enumerates the mixed cells for an explicit lifting; throws NonGenericLifting on ties.
MixedCellDecomposition mixed_cells(const NewtonPolytopeSet& polys, const std::vector<std::vector<long long>>& lifting);
BkkResult bkk_bound(const NewtonPolytopeSet& polys, uint64_t seed);
// Runs on the attached reduction when the system carries one.
BkkResult bkk_bound(const PolynomialSystem& sys, uint64_t seed);

struct StartSystem {
    NewtonPolytopeSet polytopes;
    std::vector<std::vector<cplx>> coeffs;  // aligned with polytopes.supports
    std::vector<CVec> points;               // binomial-system solutions
    std::vector<int> cell_of_point;
    PolynomialSystem as_system() const;
};

StartSystem start_system(const MixedCellDecomposition& cells, uint64_t seed);
// residual of start point k on its cell's binomial system
double binomial_residual(const StartSystem& ss, const MixedCellDecomposition& cells, size_t k);

// Solutions of x^V = b (rows of V are exponent vectors), |det V| of them.
std::vector<CVec> solve_binomial(const std::vector<std::vector<long long>>& V, const CVec& b);

struct TrackOptions {
    double corrector_tol = 1e-10;
    int max_corrector_iters = 3;
    double initial_step = 0.01;
    double max_step = 0.1;
    double min_step = 1e-13;
    int max_steps = 100000;
    double divergence_bound = 1e8;
    // endpoint residual bound, relative to the largest monomial terms
    double final_tol = 1e-10;
    // endpoints whose row- and column-scaled Jacobian condition estimate falls below this are Singular
    double singular_rcond = 1e-10;
    int polish_iters = 12;
};

enum class PathStatus { Success, Diverged, Singular, StepLimit };
const char* to_string(PathStatus s);

struct PathResult {
    CVec endpoint;
    PathStatus status = PathStatus::StepLimit;
    double final_residual = 0.0;
    int steps = 0;
};

// Compiled sparse evaluator for values and Jacobians.
class SystemEvaluator {
public:
    SystemEvaluator() = default;
    explicit SystemEvaluator(const PolynomialSystem& sys);
    size_t dim() const { return n_; }
    void eval(const Eigen::VectorXcd& x, Eigen::VectorXcd& f, Eigen::MatrixXcd* jac) const;

private:
    struct T {
        cplx c;
        std::vector<std::pair<int, int>> vp;
    };
    size_t n_ = 0;
    std::vector<std::vector<T>> eqs_;
};

class Homotopy {
public:
    virtual ~Homotopy() = default;
    virtual size_t dim() const = 0;
    virtual void eval(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx, Eigen::VectorXcd* ht) const = 0;
};

// (1 - t) Q + gamma t F
class LinearHomotopy : public Homotopy {
public:
    LinearHomotopy(const PolynomialSystem& start, const PolynomialSystem& target, cplx gamma);
    size_t dim() const override { return n_; }
    void eval(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx, Eigen::VectorXcd* ht) const override;

private:
    struct T {
        cplx q, f;
        std::vector<std::pair<int, int>> vp;
    };
    size_t n_ = 0;
    std::vector<std::vector<T>> eqs_;
    cplx gamma_;
};

PathResult track(const Homotopy& h, const CVec& x0, double t0, double t1, const TrackOptions& opts);
PathResult track_path(const PolynomialSystem& start, const PolynomialSystem& target, cplx gamma, const CVec& x0, const TrackOptions& opts = {});
// Newton iterations on a square system; returns final max residual
double newton_polish(const SystemEvaluator& ev, CVec& x, int iters, double tol);

struct SolveOptions {
    TrackOptions track;
    double real_tol = 1e-6;
    double pos_tol = 1e-8;
    double dedup_tol = 1e-6;
    int threads = 1;
    double max_unresolved_fraction = 0.05;
    bool use_reduction = true;
};

struct SolveTimings {
    double mixed_volume = 0, start_system = 0, polyhedral = 0, linear = 0, post = 0;
    bool reused_structure = false;
};

struct SolutionSet {
    long long bkk = 0;
    std::vector<PathResult> raw_paths;
    std::vector<CVec> distinct_complex;
    std::vector<double> distinct_residual;
    std::vector<bool> distinct_real;
    std::vector<bool> distinct_positive;
    std::vector<CVec> real_solutions;
    std::vector<CVec> positive_real;
    std::map<PathStatus, int> status_counts;
    bool failed = false;
    SolveTimings timings;

    int success_count() const;
};

int count_real(const SolutionSet& sols);

// Mixed cells, start system and generic-system solutions, reusable across
// systems with the same monomial supports.
struct PreparedStructure {
    BkkResult bkk;
    StartSystem start;
    std::vector<PathResult> generic_solutions;
    double mixed_volume_seconds = 0, start_seconds = 0, polyhedral_seconds = 0;
};

class StructureCache {
public:
    std::shared_ptr<const PreparedStructure> get_or_build(const PolynomialSystem& tracked, uint64_t seed, const SolveOptions& opts, bool& reused);
    size_t size() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::mutex build_mu_;
    std::map<std::pair<uint64_t, uint64_t>, std::shared_ptr<const PreparedStructure>> entries_;
};

SolutionSet solve_all(const PolynomialSystem& sys, uint64_t seed, const SolveOptions& opts = {}, StructureCache* cache = nullptr);

} // namespace bpfp
