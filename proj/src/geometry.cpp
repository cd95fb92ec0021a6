#include "phimax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace phimax {

namespace {

void check_same_dim(std::size_t a, std::size_t b) {
    if (a != b)
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                    " vs " + std::to_string(b));
}

bool row_less(std::span<const double> a, std::span<const double> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Cell index of a coordinate on a uniform grid, clamped to the exactly
// representable integer range.
std::int64_t cell_of(double coord, double cell) {
    double q = std::floor(coord / cell);
    if (q > 9.0e15) q = 9.0e15;
    if (q < -9.0e15) q = -9.0e15;
    return static_cast<std::int64_t>(q);
}

std::uint64_t hash_cells(const std::int64_t* cells, int dim) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (int k = 0; k < dim; ++k) {
        std::uint64_t v = static_cast<std::uint64_t>(cells[k]);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// === Distance ===

double distance(std::span<const double> x, std::span<const double> y) {
    check_same_dim(x.size(), y.size());
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double d = x[k] - y[k];
        s += d * d;
    }
    return std::sqrt(s);
}

double distance(const Point& x, const Point& y) {
    return distance(std::span<const double>(x.coords), std::span<const double>(y.coords));
}

// === PointSet ===

PointSet::PointSet(const std::vector<Point>& pts, double snap) : snap_(snap) {
    if (pts.empty()) throw std::invalid_argument("empty point set");
    dim_ = pts.front().dim();
    flat_.reserve(pts.size() * dim_);
    for (const Point& p : pts) {
        check_same_dim(p.coords.size(), static_cast<std::size_t>(dim_));
        flat_.insert(flat_.end(), p.coords.begin(), p.coords.end());
    }
    canonicalize();
}

PointSet::PointSet(std::vector<double> flat, int dim, double snap)
    : dim_(dim), snap_(snap), flat_(std::move(flat)) {
    if (dim_ <= 0) throw std::invalid_argument("point dimension must be positive");
    if (flat_.empty() || flat_.size() % dim_ != 0)
        throw std::invalid_argument("flat point data must be a nonempty multiple of dim");
    canonicalize();
}

Point PointSet::point(std::size_t i) const {
    auto r = row(i);
    return Point(std::vector<double>(r.begin(), r.end()));
}

void PointSet::canonicalize() {
    if (!(snap_ > 0.0)) throw std::invalid_argument("snap radius must be positive");
    for (double v : flat_)
        if (!std::isfinite(v)) throw std::invalid_argument("point coordinates must be finite");

    const std::size_t n = flat_.size() / dim_;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t i, std::uint32_t j) {
        return row_less({flat_.data() + std::size_t(i) * dim_, std::size_t(dim_)},
                        {flat_.data() + std::size_t(j) * dim_, std::size_t(dim_)});
    });

    // Greedy pass in sorted order: keep a point unless an already kept point
    // lies within the snap radius, so clusters collapse onto their
    // lexicographically smallest member.
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
    std::vector<double> kept;
    kept.reserve(flat_.size());
    std::vector<std::int64_t> cells(dim_), probe(dim_);
    std::size_t kept_rows = 0;

    for (std::uint32_t idx : order) {
        const double* p = flat_.data() + std::size_t(idx) * dim_;
        for (int k = 0; k < dim_; ++k) cells[k] = cell_of(p[k], snap_);

        // Scan the 3^d neighborhood of the point's cell for a kept point
        // within the merge radius.
        bool merged = false;
        std::vector<int> off(dim_, -1);
        while (!merged) {
            for (int k = 0; k < dim_; ++k) probe[k] = cells[k] + off[k];
            auto it = grid.find(hash_cells(probe.data(), dim_));
            if (it != grid.end()) {
                for (std::uint32_t kr : it->second) {
                    std::span<const double> q{kept.data() + std::size_t(kr) * dim_,
                                              std::size_t(dim_)};
                    if (distance(q, {p, std::size_t(dim_)}) <= snap_) {
                        merged = true;
                        break;
                    }
                }
            }
            int k = 0;
            while (k < dim_ && off[k] == 1) off[k++] = -1;
            if (k == dim_) break;
            ++off[k];
        }
        if (merged) continue;

        kept.insert(kept.end(), p, p + dim_);
        grid[hash_cells(cells.data(), dim_)].push_back(static_cast<std::uint32_t>(kept_rows));
        ++kept_rows;
    }
    flat_ = std::move(kept);
}

std::string PointSet::to_csv() const {
    std::string out;
    out.reserve(size() * dim_ * 20);
    for (std::size_t i = 0; i < size(); ++i) {
        auto r = row(i);
        for (int k = 0; k < dim_; ++k) {
            if (k) out += ',';
            out += format_double(r[k]);
        }
        out += '\n';
    }
    return out;
}

PointSet PointSet::from_csv(const std::string& text, double snap) {
    std::vector<double> flat;
    int dim = -1;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        int cols = 0;
        std::size_t at = 0;
        while (at <= line.size()) {
            std::size_t comma = line.find(',', at);
            if (comma == std::string::npos) comma = line.size();
            std::string field = line.substr(at, comma - at);
            char* end = nullptr;
            double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0')
                throw std::invalid_argument("bad CSV number: '" + field + "'");
            flat.push_back(v);
            ++cols;
            at = comma + 1;
            if (comma == line.size()) break;
        }
        if (dim == -1) dim = cols;
        else if (cols != dim) throw std::invalid_argument("ragged CSV rows");
    }
    if (dim <= 0) throw std::invalid_argument("empty CSV point set");
    return PointSet(std::move(flat), dim, snap);
}

// === Set distances ===

namespace {

// Exact nearest-neighbor distance from each row of a to the rows of b,
// maximized over a (the directed Hausdorff distance).

double directed_brute(const PointSet& a, const PointSet& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto p = a.row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            double d = distance(p, b.row(j));
            if (d < best) {
                best = d;
                if (best == 0.0) break;
            }
        }
        if (best > worst) worst = best;
    }
    return worst;
}

// One-dimensional sets are numerically sorted, so each query reduces to the
// two neighbors around the insertion point.
double directed_sorted_1d(const PointSet& a, const PointSet& b) {
    const std::vector<double>& bs = b.flat();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a.flat()[i];
        auto it = std::lower_bound(bs.begin(), bs.end(), x);
        double best = std::numeric_limits<double>::infinity();
        if (it != bs.end()) best = std::min(best, distance({&x, 1}, {&*it, 1}));
        if (it != bs.begin()) best = std::min(best, distance({&x, 1}, {&*(it - 1), 1}));
        if (best > worst) worst = best;
    }
    return worst;
}

class GridIndex {
public:
    explicit GridIndex(const PointSet& b) : b_(b), dim_(b.dim()) {
        std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
        std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < b.size(); ++i) {
            auto r = b.row(i);
            for (int k = 0; k < dim_; ++k) {
                lo[k] = std::min(lo[k], r[k]);
                hi[k] = std::max(hi[k], r[k]);
            }
        }
        double extent = 0.0;
        for (int k = 0; k < dim_; ++k) extent = std::max(extent, hi[k] - lo[k]);
        double per_axis = std::ceil(std::pow(double(b.size()), 1.0 / dim_));
        cell_ = extent / std::max(per_axis, 1.0);
        if (!(cell_ > 0.0)) cell_ = 1.0;

        cell_lo_.resize(dim_);
        cell_hi_.resize(dim_);
        for (int k = 0; k < dim_; ++k) {
            cell_lo_[k] = cell_of(lo[k], cell_);
            cell_hi_[k] = cell_of(hi[k], cell_);
        }

        cells_.resize(dim_);
        for (std::size_t i = 0; i < b.size(); ++i) {
            auto r = b.row(i);
            for (int k = 0; k < dim_; ++k) cells_[k] = cell_of(r[k], cell_);
            buckets_[hash_cells(cells_.data(), dim_)].push_back(static_cast<std::uint32_t>(i));
        }
    }

    // Exact min distance from q to b: expand Chebyshev rings of cells until
    // the current best cannot be beaten by any unvisited ring.  The start
    // cell is clamped into the occupied range; clamping only shrinks index
    // gaps, so a point in ring r still lies farther than (r-1)*cell from q.
    double nearest(std::span<const double> q) {
        std::int64_t r_limit = 1;
        for (int k = 0; k < dim_; ++k) {
            std::int64_t c = cell_of(q[k], cell_);
            cells_[k] = std::clamp(c, cell_lo_[k], cell_hi_[k]);
            r_limit = std::max(r_limit, cell_hi_[k] - cell_lo_[k] + 1);
        }

        // Stop once unvisited rings are a full cell farther than the best
        // found, so rounding can never make the grid path disagree with the
        // quadratic scan.  r_limit covers every occupied cell.
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::int64_t> probe(dim_);
        for (std::int64_t r = 0; r <= r_limit; ++r) {
            scan_shell(q, r, 0, false, probe, best);
            if (best <= double(r - 1) * cell_) break;
        }
        return best;
    }

private:
    // Visit exactly the cells whose Chebyshev index distance from the start
    // cell equals r ("pinned" tracks whether some axis already sits at +-r).
    void scan_shell(std::span<const double> q, std::int64_t r, int axis, bool pinned,
                    std::vector<std::int64_t>& probe, double& best) {
        if (axis == dim_) {
            auto it = buckets_.find(hash_cells(probe.data(), dim_));
            if (it == buckets_.end()) return;
            for (std::uint32_t j : it->second) {
                double d = distance(q, b_.row(j));
                if (d < best) best = d;
            }
            return;
        }
        if (axis == dim_ - 1 && !pinned) {
            for (std::int64_t off : {-r, r}) {
                probe[axis] = cells_[axis] + off;
                scan_shell(q, r, axis + 1, true, probe, best);
                if (r == 0) break;
            }
            return;
        }
        for (std::int64_t off = -r; off <= r; ++off) {
            probe[axis] = cells_[axis] + off;
            scan_shell(q, r, axis + 1, pinned || std::llabs(off) == r, probe, best);
        }
    }

    const PointSet& b_;
    int dim_;
    double cell_ = 1.0;
    std::vector<std::int64_t> cell_lo_, cell_hi_;
    std::vector<std::int64_t> cells_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

} // namespace

double directed_distance(const PointSet& a, const PointSet& b) {
    check_same_dim(a.dim(), b.dim());
    if (a.dim() == 1) return directed_sorted_1d(a, b);
    if (a.size() * b.size() <= 250'000) return directed_brute(a, b);

    GridIndex index(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, index.nearest(a.row(i)));
    return worst;
}

double hausdorff(const PointSet& a, const PointSet& b) {
    return std::max(directed_distance(a, b), directed_distance(b, a));
}

bool within_expansion(const PointSet& a, const PointSet& b, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("expansion radius must be positive");
    return directed_distance(a, b) < eps;
}

} // namespace phimax
