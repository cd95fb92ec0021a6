#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace phimax {

// Merge radius used when canonicalizing point sets.
inline constexpr double kDefaultSnap = 1e-9;

// Round-trip text form used by every serializer: 17 significant digits.
std::string format_double(double v);

// === Points ===

// A point of R^d with the Euclidean metric.
struct Point {
    std::vector<double> coords;

    Point() = default;
    explicit Point(std::vector<double> c) : coords(std::move(c)) {}
    Point(std::initializer_list<double> c) : coords(c) {}

    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }
    bool operator==(const Point&) const = default;
};

// Euclidean distance; throws std::invalid_argument on dimension mismatch.
double distance(const Point& x, const Point& y);
double distance(std::span<const double> x, std::span<const double> y);

// === Point sets ===

// A finite nonempty subset of R^d.  Rows are stored flat (size() * dim()
// doubles), sorted lexicographically, with points closer than the snap
// radius merged onto the lexicographically smallest representative, so equal
// sets compare equal memberwise.
class PointSet {
public:
    PointSet(const std::vector<Point>& pts, double snap = kDefaultSnap);
    PointSet(std::vector<double> flat, int dim, double snap = kDefaultSnap);

    int dim() const { return dim_; }
    std::size_t size() const { return flat_.size() / dim_; }
    double snap() const { return snap_; }

    std::span<const double> row(std::size_t i) const {
        return {flat_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    Point point(std::size_t i) const;
    const std::vector<double>& flat() const { return flat_; }

    bool operator==(const PointSet& other) const {
        return dim_ == other.dim_ && flat_ == other.flat_;
    }

    // One point per line, comma-separated coordinates, 17 significant digits,
    // rows in sorted order.
    std::string to_csv() const;
    static PointSet from_csv(const std::string& text, double snap = kDefaultSnap);

private:
    int dim_ = 0;
    double snap_ = kDefaultSnap;
    std::vector<double> flat_;

    void canonicalize();
};

// === Set distances ===

// sup_{x in a} inf_{y in b} |x - y|.  Exact nearest-neighbor search; large
// inputs go through a uniform-grid index that returns the same values as the
// quadratic scan.
double directed_distance(const PointSet& a, const PointSet& b);

// Hausdorff distance: max of the two directed distances.
double hausdorff(const PointSet& a, const PointSet& b);

// True iff a lies inside the open eps-expansion of b.  eps must be positive.
bool within_expansion(const PointSet& a, const PointSet& b, double eps);

} // namespace phimax
