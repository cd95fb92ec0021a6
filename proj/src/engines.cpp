#include "phimax/engines.hpp"

#include "phimax/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace phimax {

namespace {

class StepClock {
public:
    StepClock() : last_(std::chrono::steady_clock::now()) {}
    long long lap() {
        auto now = std::chrono::steady_clock::now();
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_;
};

std::uint64_t checked_table_rows(int alphabet, int depth, std::uint64_t cap) {
    std::uint64_t rows = 1;
    for (int k = 0; k < depth; ++k) {
        if (rows > cap / std::uint64_t(alphabet))
            throw cap_exceeded("code table would exceed cap of " + std::to_string(cap));
        rows *= std::uint64_t(alphabet);
    }
    if (rows > cap)
        throw cap_exceeded("code table would exceed cap of " + std::to_string(cap));
    return rows;
}

} // namespace

// === Convergence traces ===

void ConvergenceTrace::add(int iter, double step_distance, long long millis) {
    records.push_back({iter, step_distance, millis});
}

double ConvergenceTrace::empirical_ratio() const {
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < records.size(); ++i)
        if (records[i].step_distance > 0.0)
            ratios.push_back(records[i + 1].step_distance / records[i].step_distance);
    if (ratios.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    std::sort(ratios.begin(), ratios.end());
    std::size_t mid = ratios.size() / 2;
    if (ratios.size() % 2 == 1) return ratios[mid];
    return 0.5 * (ratios[mid - 1] + ratios[mid]);
}

std::string ConvergenceTrace::to_tsv() const {
    std::string out = "iter\tstep_distance\tmillis\n";
    for (const TraceRecord& r : records) {
        out += std::to_string(r.iter);
        out += '\t';
        out += format_double(r.step_distance);
        out += '\t';
        out += std::to_string(r.millis);
        out += '\n';
    }
    return out;
}

// === Picard iteration ===

PicardResult picard(const MapSpec& f, const Point& x0, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    PicardResult result;
    StepClock clock;
    Point x = x0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        Point next = f.apply(x);
        double step = distance(x, next);
        result.trace.add(iter, step, clock.lap());
        x = std::move(next);
        result.iterations = iter;
        result.final_step = step;
        if (step < tol) {
            result.converged = true;
            break;
        }
    }
    result.fixed_point = std::move(x);
    return result;
}

// === Hutchinson operator ===

PointSet hutchinson_step(const IfsSystem& s, const PointSet& k, double snap) {
    if (k.dim() != s.dim())
        throw std::invalid_argument("point set dimension does not match the system");
    const int d = s.dim();
    std::vector<double> flat(k.flat().size() * std::size_t(s.map_count()));
    std::size_t at = 0;
    for (int letter = 1; letter <= s.map_count(); ++letter) {
        const MapSpec& f = s.map(letter);
        for (std::size_t i = 0; i < k.size(); ++i) {
            f.apply_into(k.row(i), {flat.data() + at, std::size_t(d)});
            at += d;
        }
    }
    return PointSet(std::move(flat), d, snap);
}

AttractorResult hutchinson_attractor(const IfsSystem& s, const PointSet& k0,
                                     const AttractorOptions& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (opt.max_points < 1) throw std::invalid_argument("max_points must be >= 1");
    if (!(opt.snap > 0.0)) throw std::invalid_argument("snap radius must be positive");
    if (k0.dim() != s.dim())
        throw std::invalid_argument("seed set dimension does not match the system");

    ConvergenceTrace trace;
    StepClock clock;
    PointSet k = k0;
    double effective_snap = opt.snap;
    bool capped = false, converged = false;
    double final_step = 0.0;
    int iterations = 0;
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        PointSet next = hutchinson_step(s, k, effective_snap);
        while (next.size() > opt.max_points) {
            effective_snap *= 2.0;
            capped = true;
            next = PointSet(next.flat(), next.dim(), effective_snap);
        }
        double step = hausdorff(k, next);
        trace.add(iter, step, clock.lap());
        k = std::move(next);
        iterations = iter;
        final_step = step;
        if (step < opt.tol) {
            converged = true;
            break;
        }
    }
    return AttractorResult{std::move(k), std::move(trace), converged,
                           final_step, iterations, effective_snap, capped};
}

// === Code-space functions ===

CodeFunction::CodeFunction(Alphabet a, int dim, int depth, std::vector<double> table)
    : alphabet_(a), dim_(dim), depth_(depth), table_(std::move(table)) {
    if (dim_ < 1) throw std::invalid_argument("code function dimension must be positive");
    if (depth_ < 0) throw std::invalid_argument("code function depth must be nonnegative");
    std::uint64_t rows = 1;
    for (int k = 0; k < depth_; ++k) rows *= std::uint64_t(alphabet_.size);
    if (table_.size() != rows * std::uint64_t(dim_))
        throw std::invalid_argument("code table size does not match depth");
}

CodeFunction CodeFunction::constant(Alphabet a, const Point& x0) {
    return CodeFunction(a, x0.dim(), 0, x0.coords);
}

std::size_t CodeFunction::index_of(const FiniteWord& w) const {
    if (w.alphabet() != alphabet_)
        throw std::invalid_argument("word alphabet does not match the code function");
    if (static_cast<int>(w.length()) != depth_)
        throw std::invalid_argument("word length does not match the table depth");
    std::size_t idx = 0;
    for (int l : w.letters()) idx = idx * alphabet_.size + std::size_t(l - 1);
    return idx;
}

Point CodeFunction::value_at(const FiniteWord& w) const {
    auto r = row(index_of(w));
    return Point(std::vector<double>(r.begin(), r.end()));
}

Point CodeFunction::evaluate(const PeriodicWord& w) const {
    if (w.alphabet() != alphabet_)
        throw std::invalid_argument("word alphabet does not match the code function");
    std::size_t idx = 0;
    for (int k = 1; k <= depth_; ++k)
        idx = idx * alphabet_.size + std::size_t(w.letter_at(std::uint64_t(k)) - 1);
    auto r = row(idx);
    return Point(std::vector<double>(r.begin(), r.end()));
}

PointSet CodeFunction::image(double snap) const { return PointSet(table_, dim_, snap); }

CodeFunction CodeFunction::refined(int deeper_depth, std::uint64_t cap) const {
    if (deeper_depth < depth_)
        throw std::invalid_argument("refinement depth must not decrease");
    std::uint64_t rows = checked_table_rows(alphabet_.size, deeper_depth, cap);
    std::uint64_t repeat = rows / this->rows();
    std::vector<double> table;
    table.reserve(rows * std::uint64_t(dim_));
    // Deeper words sharing a prefix are lexicographically contiguous, so each
    // source row spans `repeat` consecutive destination rows.
    for (std::size_t i = 0; i < this->rows(); ++i)
        for (std::uint64_t k = 0; k < repeat; ++k) {
            auto r = row(i);
            table.insert(table.end(), r.begin(), r.end());
        }
    return CodeFunction(alphabet_, dim_, deeper_depth, std::move(table));
}

std::string CodeFunction::to_csv() const {
    std::vector<FiniteWord> words = enumerate_level(alphabet_, depth_, rows());
    std::string out;
    out.reserve(rows() * (std::size_t(depth_) + std::size_t(dim_) * 20));
    for (std::size_t i = 0; i < rows(); ++i) {
        out += format_word(words[i]);
        auto r = row(i);
        for (int k = 0; k < dim_; ++k) {
            out += ',';
            out += format_double(r[k]);
        }
        out += '\n';
    }
    return out;
}

double sup_distance(const CodeFunction& g, const CodeFunction& h, std::uint64_t cap) {
    if (g.alphabet() != h.alphabet())
        throw std::invalid_argument("code functions use different alphabets");
    if (g.dim() != h.dim())
        throw std::invalid_argument("code functions have different dimensions");
    int depth = std::max(g.depth(), h.depth());
    CodeFunction gg = g.refined(depth, cap), hh = h.refined(depth, cap);
    double worst = 0.0;
    for (std::size_t i = 0; i < gg.rows(); ++i)
        worst = std::max(worst, distance(gg.row(i), hh.row(i)));
    return worst;
}

CodeFunction code_step(const IfsSystem& s, const CodeFunction& g, std::uint64_t cap) {
    if (g.alphabet() != s.alphabet())
        throw std::invalid_argument("code function alphabet does not match the system");
    if (g.dim() != s.dim())
        throw std::invalid_argument("code function dimension does not match the system");
    checked_table_rows(s.map_count(), g.depth() + 1, cap);

    const int d = s.dim();
    std::vector<double> table(g.table().size() * std::size_t(s.map_count()));
    std::size_t at = 0;
    for (int letter = 1; letter <= s.map_count(); ++letter) {
        const MapSpec& f = s.map(letter);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            f.apply_into(g.row(i), {table.data() + at, std::size_t(d)});
            at += d;
        }
    }
    return CodeFunction(s.alphabet(), d, g.depth() + 1, std::move(table));
}

CodeFixedPointResult code_fixed_point(const IfsSystem& s, const Point& x0,
                                      const CodeFixedPointOptions& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (opt.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");

    StepClock clock;
    CodeFixedPointResult result{CodeFunction::constant(s.alphabet(), x0), {}, false, 0.0};
    for (int depth = 1; depth <= opt.max_depth; ++depth) {
        CodeFunction next = code_step(s, result.g, opt.cap);
        double step = sup_distance(next, result.g, opt.cap);
        result.trace.add(depth, step, clock.lap());
        result.g = std::move(next);
        result.final_step = step;
        if (step < opt.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// === Canonical projection ===

namespace {

// Applies f_{l1...lk} = f_{l1} o ... o f_{lk}, letters back to front.
Point apply_letters(const IfsSystem& s, const std::vector<int>& letters, Point x) {
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) x = s.apply(*it, x);
    return x;
}

struct CycleRun {
    Point limit;
    int letters = 0;
    double final_step = 0.0;
    bool converged = false;
};

// Picard iteration of the composed cycle map.  Steps are measured across a
// whole period, so equal iterates certify an exact fixed point; comparing
// across single letters instead can stall spuriously when the seed happens
// to sit on an early partial composition's fixed point.
CycleRun run_cycle(const IfsSystem& s, const std::vector<int>& cycle, Point y,
                   double tol, int letter_budget) {
    CycleRun r{std::move(y), 0, 0.0, false};
    while (r.letters + int(cycle.size()) <= letter_budget) {
        Point next = apply_letters(s, cycle, r.limit);
        r.letters += int(cycle.size());
        r.final_step = distance(r.limit, next);
        r.limit = std::move(next);
        if (r.final_step < tol) {
            r.converged = true;
            break;
        }
    }
    return r;
}

} // namespace

ProjectionResult canonical_projection(const IfsSystem& s, const PeriodicWord& w,
                                      const Point& seed, const ProjectionOptions& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (w.alphabet().size != s.map_count())
        throw std::invalid_argument("word alphabet does not match the system");
    if (seed.dim() != s.dim())
        throw std::invalid_argument("seed dimension does not match the system");
    const std::vector<int>& prefix = w.prefix().letters();
    const std::vector<int>& cycle = w.cycle().letters();
    int budget = opt.max_letters - int(prefix.size());
    if (budget < int(cycle.size()))
        throw std::invalid_argument("max_letters leaves no room for a full cycle");

    // pi(w) = f_prefix(x*) with x* the fixed point of the composed cycle map.
    CycleRun run = run_cycle(s, cycle, seed, opt.tol, budget);

    ProjectionResult result;
    result.point = apply_letters(s, prefix, run.limit);
    result.converged = run.converged;
    result.letters_used = int(prefix.size()) + run.letters;
    result.final_step = run.final_step;

    // The limit must not depend on the seed; rerun from a second one.
    Point alt = s.box().center();
    if (distance(alt, seed) == 0.0) alt = Point(s.box().lo);
    CycleRun other = run_cycle(s, cycle, alt, opt.tol, budget);
    result.seed_spread = distance(result.point, apply_letters(s, prefix, other.limit));
    return result;
}

double verify_conjugacy(const IfsSystem& s,
                        const std::function<Point(const PeriodicWord&)>& eval,
                        const std::vector<PeriodicWord>& words) {
    if (words.empty()) throw std::invalid_argument("conjugacy check needs words");
    double worst = 0.0;
    for (const PeriodicWord& w : words) {
        Point px = eval(w);
        for (int i = 1; i <= s.map_count(); ++i)
            worst = std::max(worst, distance(eval(branch(i, w)), s.apply(i, px)));
    }
    return worst;
}

// === Truncation ladder experiment ===

std::string LadderReport::to_tsv() const {
    std::string out = "level\tdepth\tdistance\n";
    for (const LadderRow& r : rows) {
        out += std::to_string(r.level_size);
        out += '\t';
        out += std::to_string(r.depth);
        out += '\t';
        out += format_double(r.distance);
        out += '\n';
    }
    return out;
}

LadderReport ladder_experiment(const std::vector<std::vector<MapSpec>>& ladder,
                               const Box& box, const Point& x0,
                               const AttractorOptions& attract_opt,
                               const std::vector<int>& depths) {
    if (ladder.empty()) throw std::invalid_argument("family ladder must be nonempty");
    if (depths.empty()) throw std::invalid_argument("depth list must be nonempty");
    for (int d : depths)
        if (d < 1) throw std::invalid_argument("depths must be >= 1");
    int max_depth = *std::max_element(depths.begin(), depths.end());

    LadderReport report;
    for (const auto& maps : ladder) {
        IfsSystem system(box, maps);
        AttractorResult attractor =
            hutchinson_attractor(system, PointSet({x0}, attract_opt.snap), attract_opt);
        report.attractor_sizes.push_back(attractor.attractor.size());
        report.attractor_converged.push_back(attractor.converged);

        CodeFunction g = CodeFunction::constant(system.alphabet(), x0);
        for (int depth = 1; depth <= max_depth; ++depth) {
            g = code_step(system, g);
            if (std::find(depths.begin(), depths.end(), depth) != depths.end())
                report.rows.push_back(
                    {maps.size(), depth,
                     hausdorff(g.image(attract_opt.snap), attractor.attractor)});
        }
    }
    return report;
}

// === Rasterization ===

std::string rasterize_pgm(const PointSet& pts, const Box& box, int width, int height) {
    if (pts.dim() != 2 || box.dim() != 2)
        throw std::invalid_argument("rasterization needs two-dimensional data");
    if (width < 1 || height < 1) throw std::invalid_argument("raster size must be positive");

    std::vector<char> occupied(std::size_t(width) * height, 0);
    double wx = box.hi[0] - box.lo[0], wy = box.hi[1] - box.lo[1];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto r = pts.row(i);
        int cx = wx > 0.0 ? int(std::floor((r[0] - box.lo[0]) / wx * width)) : 0;
        int cy = wy > 0.0 ? int(std::floor((r[1] - box.lo[1]) / wy * height)) : 0;
        cx = std::clamp(cx, 0, width - 1);
        cy = std::clamp(cy, 0, height - 1);
        occupied[std::size_t(height - 1 - cy) * width + cx] = 1;
    }

    std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + std::size_t(width) * height * 4);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            if (col) out += ' ';
            out += occupied[std::size_t(row) * width + col] ? "0" : "255";
        }
        out += '\n';
    }
    return out;
}

} // namespace phimax
