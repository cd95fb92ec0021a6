#pragma once

#include "phimax/geometry.hpp"
#include "phimax/ifs.hpp"
#include "phimax/shiftspace.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace phimax {

// === Convergence traces ===

struct TraceRecord {
    int iter = 0;
    double step_distance = 0.0;
    long long millis = 0;
};

struct ConvergenceTrace {
    std::vector<TraceRecord> records;

    void add(int iter, double step_distance, long long millis);
    // Median of successive step ratios; NaN with fewer than three records.
    double empirical_ratio() const;
    // Tab-separated with header "iter\tstep_distance\tmillis".
    std::string to_tsv() const;
};

// === Picard iteration of a single map ===

struct PicardResult {
    Point fixed_point;
    ConvergenceTrace trace;
    bool converged = false;
    double final_step = 0.0;
    int iterations = 0;
};

PicardResult picard(const MapSpec& f, const Point& x0, double tol = 1e-9,
                    int max_iter = 10'000);

// === Hutchinson operator ===

// Union of the map images of k, canonicalized at the given snap radius.
PointSet hutchinson_step(const IfsSystem& s, const PointSet& k,
                         double snap = kDefaultSnap);

struct AttractorOptions {
    double tol = 1e-6;
    int max_iter = 1000;
    std::size_t max_points = 2'000'000;
    double snap = kDefaultSnap;
};

struct AttractorResult {
    PointSet attractor;
    ConvergenceTrace trace;
    bool converged = false;
    double final_step = 0.0;
    int iterations = 0;
    double effective_snap = kDefaultSnap; // doubled whenever the cap is hit
    bool points_capped = false;
};

// Iterates the Hutchinson operator from k0 until the Hausdorff step falls
// below tol.  When a step would exceed max_points the snap radius doubles
// (coarsening the set) until the result fits.
AttractorResult hutchinson_attractor(const IfsSystem& s, const PointSet& k0,
                                     const AttractorOptions& opt = {});

// === Code-space functions ===

// A function from depth-truncated words to the box: one row of coordinates
// per word of length `depth`, in lexicographic word order.
class CodeFunction {
public:
    CodeFunction(Alphabet a, int dim, int depth, std::vector<double> table);
    static CodeFunction constant(Alphabet a, const Point& x0);

    const Alphabet& alphabet() const { return alphabet_; }
    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t rows() const { return table_.size() / dim_; }
    std::span<const double> row(std::size_t idx) const {
        return {table_.data() + idx * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& table() const { return table_; }

    std::size_t index_of(const FiniteWord& w) const; // length must equal depth
    Point value_at(const FiniteWord& w) const;
    // Value on the cylinder of the first `depth` letters of w.
    Point evaluate(const PeriodicWord& w) const;

    PointSet image(double snap = kDefaultSnap) const;
    // Same function seen at a deeper truncation (values constant on cylinders).
    CodeFunction refined(int deeper_depth, std::uint64_t cap = kDefaultWordCap) const;
    // "word,coord,...\n" per row, lexicographic, 17 significant digits.
    std::string to_csv() const;

private:
    Alphabet alphabet_{1};
    int dim_ = 0;
    int depth_ = 0;
    std::vector<double> table_;
};

// Sup over words of the pointwise distance, after refining to common depth.
double sup_distance(const CodeFunction& g, const CodeFunction& h,
                    std::uint64_t cap = kDefaultWordCap);

// One application of the code-space operator: (G g)(i w) = f_i(g(w)).
// Depth grows by one; the table grows by a factor of |I|.
CodeFunction code_step(const IfsSystem& s, const CodeFunction& g,
                       std::uint64_t cap = kDefaultWordCap);

struct CodeFixedPointOptions {
    double tol = 1e-9;
    int max_depth = 18;
    std::uint64_t cap = kDefaultWordCap;
};

struct CodeFixedPointResult {
    CodeFunction g;
    ConvergenceTrace trace;
    bool converged = false;
    double final_step = 0.0;
};

// Iterates code_step from the constant function at x0 until the sup step
// falls below tol.
CodeFixedPointResult code_fixed_point(const IfsSystem& s, const Point& x0,
                                      const CodeFixedPointOptions& opt = {});

// === Canonical projection ===

struct ProjectionOptions {
    double tol = 1e-9;
    int max_letters = 10'000;
};

struct ProjectionResult {
    Point point;
    bool converged = false;
    int letters_used = 0;
    double final_step = 0.0;
    double seed_spread = 0.0; // distance to the same run from a second seed
};

// pi(w) as the limit of f_{w1..wn}(seed), evaluated as f_prefix applied to
// the composed cycle map's fixed point with period-aligned steps.  The run
// is repeated from a second seed and the spread between the limits reported.
ProjectionResult canonical_projection(const IfsSystem& s, const PeriodicWord& w,
                                      const Point& seed,
                                      const ProjectionOptions& opt = {});

// Max over the words and letters i of d(eval(i w), f_i(eval(w))).
double verify_conjugacy(const IfsSystem& s,
                        const std::function<Point(const PeriodicWord&)>& eval,
                        const std::vector<PeriodicWord>& words);

// === Truncation ladder experiment ===

struct LadderRow {
    std::size_t level_size = 0;
    int depth = 0;
    double distance = 0.0; // Hausdorff between code image and attractor
};

struct LadderReport {
    std::vector<LadderRow> rows;
    std::vector<std::size_t> attractor_sizes;  // per level
    std::vector<bool> attractor_converged;     // per level
    // Tab-separated with header "level\tdepth\tdistance".
    std::string to_tsv() const;
};

// For each truncation level: run the attractor from {x0}, then walk the
// code-space iteration from the constant function at x0 and record the
// Hausdorff distance between its image and the attractor at each requested
// depth.
LadderReport ladder_experiment(const std::vector<std::vector<MapSpec>>& ladder,
                               const Box& box, const Point& x0,
                               const AttractorOptions& attract_opt,
                               const std::vector<int>& depths);

// === Rasterization ===

// Plain PGM (P2), 0 at occupied pixels and 255 elsewhere; rows written top
// to bottom.  Two-dimensional sets only.
std::string rasterize_pgm(const PointSet& pts, const Box& box, int width, int height);

} // namespace phimax
