#include "phimax/ifs.hpp"

#include "phimax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phimax {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}

double horner(std::span<const double> c, double x) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

} // namespace

// === Box ===

Box::Box(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("box needs matching nonempty bounds");
    require_finite(lo, "box bounds");
    require_finite(hi, "box bounds");
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (!(lo[k] <= hi[k])) throw std::invalid_argument("box has lo > hi");
}

bool Box::contains(std::span<const double> x, double tol) const {
    if (x.size() != lo.size()) throw std::invalid_argument("dimension mismatch against box");
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (x[k] < lo[k] - tol || x[k] > hi[k] + tol) return false;
    return true;
}

double Box::diameter() const {
    double s = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(s);
}

Point Box::center() const {
    Point c;
    c.coords.resize(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) c.coords[k] = 0.5 * (lo[k] + hi[k]);
    return c;
}

std::vector<Point> Box::corners() const {
    if (dim() > 16) throw std::invalid_argument("corner enumeration limited to dimension 16");
    std::vector<Point> out;
    out.reserve(std::size_t(1) << dim());
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << dim()); ++mask) {
        Point p;
        p.coords.resize(lo.size());
        for (int k = 0; k < dim(); ++k) p.coords[k] = (mask >> k) & 1 ? hi[k] : lo[k];
        out.push_back(std::move(p));
    }
    return out;
}

// === Maps ===

MapSpec MapSpec::affine(std::vector<std::vector<double>> matrix, std::vector<double> offset) {
    MapSpec m;
    m.kind_ = Kind::Affine;
    m.dim_ = static_cast<int>(offset.size());
    if (m.dim_ < 1) throw std::invalid_argument("affine map needs a nonempty offset");
    if (matrix.size() != offset.size())
        throw std::invalid_argument("affine matrix must be square and match the offset");
    for (const auto& row : matrix) {
        if (row.size() != offset.size())
            throw std::invalid_argument("affine matrix must be square and match the offset");
        m.matrix_.insert(m.matrix_.end(), row.begin(), row.end());
    }
    m.offset_ = std::move(offset);
    require_finite(m.matrix_, "affine entries");
    require_finite(m.offset_, "affine entries");
    return m;
}

MapSpec MapSpec::poly1d(std::vector<double> coeffs, double lo, double hi) {
    MapSpec m;
    m.kind_ = Kind::Poly1d;
    m.dim_ = 1;
    if (coeffs.empty()) throw std::invalid_argument("polynomial needs coefficients");
    require_finite(coeffs, "polynomial coefficients");
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw std::invalid_argument("polynomial domain must be a proper interval");
    m.coeffs_ = std::move(coeffs);
    m.lo_ = lo;
    m.hi_ = hi;

    // Range over [lo, hi] is attained at the endpoints or at critical points;
    // a self-map must keep it inside the domain.
    std::vector<double> probes{lo, hi};
    if (m.coeffs_.size() > 2) {
        std::vector<double> deriv(m.coeffs_.size() - 1);
        for (std::size_t k = 1; k < m.coeffs_.size(); ++k) deriv[k - 1] = m.coeffs_[k] * double(k);
        for (double r : poly_roots_in_interval(deriv, lo, hi)) probes.push_back(r);
    }
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (double x : probes) {
        double v = horner(m.coeffs_, x);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmin < lo - 1e-12 || vmax > hi + 1e-12)
        throw std::invalid_argument("polynomial map leaves its domain");
    return m;
}

Point MapSpec::apply(const Point& x) const {
    Point out;
    out.coords.resize(dim_);
    apply_into(std::span<const double>(x.coords), std::span<double>(out.coords));
    return out;
}

void MapSpec::apply_into(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != dim_ || static_cast<int>(out.size()) != dim_)
        throw std::invalid_argument("dimension mismatch in map application");
    if (kind_ == Kind::Poly1d) {
        out[0] = horner(coeffs_, x[0]);
        return;
    }
    for (int r = 0; r < dim_; ++r) {
        double s = offset_[r];
        const double* row = matrix_.data() + std::size_t(r) * dim_;
        for (int k = 0; k < dim_; ++k) s += row[k] * x[k];
        out[r] = s;
    }
}

std::vector<double> poly_roots_in_interval(std::span<const double> coeffs, double lo,
                                           double hi, double tol) {
    if (!(lo <= hi)) throw std::invalid_argument("root interval has lo > hi");
    std::vector<double> c(coeffs.begin(), coeffs.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() <= 1) return {}; // constants have no isolated roots

    // Split at critical points so each piece is monotone, then bisect.
    std::vector<double> breaks{lo, hi};
    if (c.size() > 2) {
        std::vector<double> deriv(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) deriv[k - 1] = c[k] * double(k);
        for (double r : poly_roots_in_interval(deriv, lo, hi, tol)) breaks.push_back(r);
    }
    std::sort(breaks.begin(), breaks.end());

    std::vector<double> roots;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        double a = breaks[s], b = breaks[s + 1];
        double fa = horner(c, a), fb = horner(c, b);
        if (fa == 0.0) roots.push_back(a);
        if (fb == 0.0 && s + 2 == breaks.size()) roots.push_back(b);
        if (!(fa < 0.0) == !(fb < 0.0)) continue;
        for (int it = 0; it < 200 && b - a > tol * std::max(1.0, std::abs(a)); ++it) {
            double mid = 0.5 * (a + b);
            double fm = horner(c, mid);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if ((fm < 0.0) == (fa < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots)
        if (unique.empty() || r - unique.back() > 4.0 * tol * std::max(1.0, std::abs(r)))
            unique.push_back(r);
    return unique;
}

// === Certificates ===

ConvexCoefficients::ConvexCoefficients(int count_, std::vector<double> a_,
                                       std::vector<double> b_, std::vector<double> c_)
    : count(count_), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {
    std::size_t need = std::size_t(count) * count;
    if (count < 1 || a.size() != need || b.size() != need || c.size() != need)
        throw std::invalid_argument("convex coefficients need count^2 entries per table");
    for (const auto* tab : {&a, &b, &c}) {
        require_finite(*tab, "convex coefficients");
        for (double v : *tab)
            if (v < 0.0) throw std::invalid_argument("convex coefficients must be nonnegative");
    }
    if (!(max_d() < 1.0))
        throw std::invalid_argument("convex coefficient sums must stay below one");
}

ConvexCoefficients ConvexCoefficients::uniform(int count, double av, double bv, double cv) {
    std::size_t need = std::size_t(count) * count;
    return ConvexCoefficients(count, std::vector<double>(need, av),
                              std::vector<double>(need, bv), std::vector<double>(need, cv));
}

double ConvexCoefficients::d(int i, int j) const {
    std::size_t at = std::size_t(i) * count + j;
    return a.at(at) + b.at(at) + c.at(at);
}

double ConvexCoefficients::max_d() const {
    double m = 0.0;
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) m = std::max(m, d(i, j));
    return m;
}

// === Systems ===

IfsSystem::IfsSystem(Box box, std::vector<MapSpec> maps, std::optional<PhiCertificate> phi,
                     std::optional<ConvexCoefficients> convex)
    : box_(std::move(box)), maps_(std::move(maps)), phi_(std::move(phi)),
      convex_(std::move(convex)) {
    if (maps_.empty()) throw std::invalid_argument("system needs at least one map");
    for (const MapSpec& m : maps_) {
        if (m.dim() != box_.dim())
            throw std::invalid_argument("map dimension does not match the box");
        if (m.kind() == MapSpec::Kind::Poly1d) {
            // Self-mapping was verified on the declared domain; it must be
            // the ambient box.
            if (std::abs(m.domain_lo() - box_.lo[0]) > 1e-12 ||
                std::abs(m.domain_hi() - box_.hi[0]) > 1e-12)
                throw std::invalid_argument("polynomial domain must match the box");
        } else {
            // Affine images of a box are spanned by the corner images.
            for (const Point& c : box_.corners())
                if (!box_.contains(m.apply(c).coords, 1e-9))
                    throw std::invalid_argument("map sends a box corner outside the box");
        }
    }
    if (phi_ && phi_->p < 1) throw std::invalid_argument("certificate depth must be >= 1");
    if (convex_ && convex_->count != map_count())
        throw std::invalid_argument("convex coefficient tables must match the map count");
}

const MapSpec& IfsSystem::map(int letter) const {
    if (letter < 1 || letter > map_count())
        throw std::invalid_argument("map letter outside alphabet");
    return maps_[letter - 1];
}

Point IfsSystem::apply(int letter, const Point& x) const { return map(letter).apply(x); }

Point IfsSystem::apply_word(const FiniteWord& w, const Point& x) const {
    if (w.alphabet().size != map_count())
        throw std::invalid_argument("word alphabet does not match the system");
    Point v = x;
    for (std::size_t k = w.length(); k-- > 0;) v = apply(w.letters()[k], v);
    return v;
}

// === Sampled inequality checks ===

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i) {
        f /= base;
        r += f * double(i % base);
        i /= base;
    }
    return r;
}

Point halton_point(const Box& box, std::uint64_t idx, int base_offset) {
    Point p;
    p.coords.resize(box.dim());
    for (int k = 0; k < box.dim(); ++k) {
        double u = radical_inverse(idx, kPrimes[base_offset + k]);
        p.coords[k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
    }
    return p;
}

double clamp_into(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

// Running worst margin with the tolerance clamp applied.
struct MarginTracker {
    explicit MarginTracker(std::string name, double tol) : report_tol(tol) {
        report.inequality = std::move(name);
    }
    void add(double margin, const Point& x, const Point& y) {
        ++report.samples_used;
        double clamped = std::abs(margin) < report_tol ? 0.0 : margin;
        if (report.samples_used == 1 || margin > report.raw_worst_margin) {
            report.raw_worst_margin = margin;
            report.witness_x = x;
            report.witness_y = y;
        }
        worst_clamped = std::max(worst_clamped, clamped);
    }
    CheckReport finish() {
        if (report.samples_used == 0)
            throw std::invalid_argument("sample plan produced no pairs");
        report.worst_margin = worst_clamped;
        report.passed = worst_clamped <= 0.0;
        return report;
    }
    CheckReport report;
    double report_tol;
    double worst_clamped = -std::numeric_limits<double>::infinity();
};

} // namespace

std::vector<std::pair<Point, Point>> sample_pairs(const Box& box, const SamplePlan& plan) {
    if (plan.pair_count < 0 || plan.near_pair_count < 0)
        throw std::invalid_argument("sample counts must be nonnegative");
    if (!(plan.near_distance > 0.0))
        throw std::invalid_argument("near-pair distance must be positive");
    int d = box.dim();
    if (d > 10) throw std::invalid_argument("pair sampling limited to dimension 10");

    std::vector<std::pair<Point, Point>> out;
    out.reserve(std::size_t(plan.pair_count) + plan.near_pair_count + 64);

    for (int i = 0; i < plan.pair_count; ++i) {
        std::uint64_t idx = plan.seed + 1 + std::uint64_t(i);
        out.emplace_back(halton_point(box, idx, 0), halton_point(box, idx, d));
    }

    if (plan.include_corners && d <= 4) {
        std::vector<Point> cs = box.corners();
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i; j < cs.size(); ++j) out.emplace_back(cs[i], cs[j]);
    }

    for (int j = 0; j < plan.near_pair_count; ++j) {
        std::uint64_t idx = plan.seed + 1 + std::uint64_t(plan.pair_count) + std::uint64_t(j);
        Point x = halton_point(box, idx, 0);
        int axis = j % d;
        double sign = (j / d) % 2 == 0 ? 1.0 : -1.0;
        Point y = x;
        y.coords[axis] = clamp_into(x[axis] + sign * plan.near_distance, box.lo[axis], box.hi[axis]);
        if (distance(x, y) == 0.0)
            y.coords[axis] = clamp_into(x[axis] - sign * plan.near_distance, box.lo[axis], box.hi[axis]);
        if (distance(x, y) > 0.0) out.emplace_back(std::move(x), std::move(y));
    }
    return out;
}

CheckReport check_phi_max(const IfsSystem& s, const ComparisonFunction& phi, int p,
                          const SamplePlan& plan, std::uint64_t cap) {
    if (p < 1) throw std::invalid_argument("depth p must be >= 1");
    Alphabet a = s.alphabet();
    std::vector<FiniteWord> level = enumerate_level(a, p, cap);
    std::vector<FiniteWord> below = enumerate_below(a, p, cap);

    MarginTracker tracker("max over depth-" + std::to_string(p) +
                              " words of d(f_w x, f_w y) <= phi(max over shorter words)",
                          plan.margin_tolerance);
    for (const auto& [x, y] : sample_pairs(s.box(), plan)) {
        double lhs = 0.0;
        for (const FiniteWord& w : level)
            lhs = std::max(lhs, distance(s.apply_word(w, x), s.apply_word(w, y)));
        double arg = 0.0;
        for (const FiniteWord& w : below)
            arg = std::max(arg, distance(s.apply_word(w, x), s.apply_word(w, y)));
        tracker.add(lhs - phi(arg), x, y);
    }
    return tracker.finish();
}

CheckReport check_convex(const IfsSystem& s, const ConvexCoefficients& coeffs,
                         const SamplePlan& plan) {
    if (coeffs.count != s.map_count())
        throw std::invalid_argument("convex coefficient tables must match the map count");

    MarginTracker tracker(
        "d(f_i(f_j x), f_i(f_j y)) <= a_ij d(x,y) + b_ij d(f_i x, f_i y) + c_ij d(f_j x, f_j y)",
        plan.margin_tolerance);
    int m = s.map_count();
    for (const auto& [x, y] : sample_pairs(s.box(), plan)) {
        std::vector<Point> fx(m), fy(m);
        std::vector<double> dstep(m);
        for (int i = 0; i < m; ++i) {
            fx[i] = s.apply(i + 1, x);
            fy[i] = s.apply(i + 1, y);
            dstep[i] = distance(fx[i], fy[i]);
        }
        double dxy = distance(x, y);
        double margin = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::size_t at = std::size_t(i) * m + j;
                double lhs = distance(s.apply(i + 1, fx[j]), s.apply(i + 1, fy[j]));
                double rhs = coeffs.a[at] * dxy + coeffs.b[at] * dstep[i] + coeffs.c[at] * dstep[j];
                margin = std::max(margin, lhs - rhs);
            }
        tracker.add(margin, x, y);
    }
    return tracker.finish();
}

PhiCertificate to_phi_max(const ConvexCoefficients& coeffs) {
    return PhiCertificate{ComparisonFunction::linear(coeffs.max_d()), 2};
}

CheckReport check_pstep_contraction(const MapSpec& f, const Box& box,
                                    const ComparisonFunction& phi, int p,
                                    const SamplePlan& plan) {
    if (p < 1) throw std::invalid_argument("depth p must be >= 1");
    if (f.dim() != box.dim()) throw std::invalid_argument("map dimension does not match the box");

    MarginTracker tracker("d(f^p x, f^p y) <= phi(max over k < p of d(f^k x, f^k y))",
                          plan.margin_tolerance);
    for (const auto& [x, y] : sample_pairs(box, plan)) {
        Point xk = x, yk = y;
        double arg = 0.0;
        for (int k = 0; k < p; ++k) {
            arg = std::max(arg, distance(xk, yk));
            xk = f.apply(xk);
            yk = f.apply(yk);
        }
        tracker.add(distance(xk, yk) - phi(arg), x, y);
    }
    return tracker.finish();
}

// === Possibly infinite families ===

namespace {

// Largest delta of the halving sequence started at the box diameter for
// which every sampled pair closer than delta keeps its image distance below
// epsilon; 0 when even the smallest candidate fails.
double modulus_for_map(const MapSpec& f, const Box& box, double epsilon,
                       const std::vector<Point>& bases) {
    double delta = std::max(box.diameter(), epsilon);
    for (int attempt = 0; attempt <= 60; ++attempt, delta /= 2.0) {
        bool ok = true;
        for (const Point& x : bases) {
            for (int axis = 0; axis < box.dim() && ok; ++axis) {
                for (double sign : {1.0, -1.0}) {
                    Point y = x;
                    y.coords[axis] =
                        clamp_into(x[axis] + sign * 0.99 * delta, box.lo[axis], box.hi[axis]);
                    if (distance(x, y) == 0.0 || distance(x, y) >= delta) continue;
                    if (distance(f.apply(x), f.apply(y)) >= epsilon) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) break;
        }
        if (ok) return delta;
    }
    return 0.0;
}

} // namespace

FamilyConditionsReport check_family_conditions(const std::vector<std::vector<MapSpec>>& ladder,
                                               const Box& box, double epsilon,
                                               const SamplePlan& plan) {
    if (ladder.empty()) throw std::invalid_argument("family ladder must be nonempty");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    for (const auto& level : ladder) {
        if (level.empty()) throw std::invalid_argument("family levels must be nonempty");
        for (const MapSpec& f : level)
            if (f.dim() != box.dim())
                throw std::invalid_argument("map dimension does not match the box");
    }

    std::vector<Point> bases;
    int n_bases = std::max(plan.pair_count, 64);
    bases.reserve(std::size_t(n_bases) + (box.dim() <= 4 ? (1u << box.dim()) : 0u));
    for (int i = 0; i < n_bases; ++i)
        bases.push_back(halton_point(box, plan.seed + 1 + std::uint64_t(i), 0));
    if (box.dim() <= 4)
        for (Point& c : box.corners()) bases.push_back(std::move(c));

    FamilyConditionsReport report;
    report.epsilon = epsilon;

    std::size_t largest = 0;
    for (std::size_t l = 0; l < ladder.size(); ++l) {
        report.level_sizes.push_back(ladder[l].size());
        double bound = 0.0;
        for (const MapSpec& f : ladder[l])
            for (const Point& x : bases) {
                Point img = f.apply(x);
                for (double v : img.coords) bound = std::max(bound, std::abs(v));
            }
        report.image_bounds.push_back(bound);
        if (ladder[l].size() > ladder[largest].size()) largest = l;
    }
    for (const MapSpec& f : ladder[largest])
        report.per_map_delta.push_back(modulus_for_map(f, box, epsilon, bases));
    report.common_delta =
        *std::min_element(report.per_map_delta.begin(), report.per_map_delta.end());

    // Clause a evidence: image bounds that keep growing level over level.
    bool growing = report.image_bounds.size() > 1;
    for (std::size_t l = 0; l + 1 < report.image_bounds.size(); ++l)
        growing = growing && report.image_bounds[l + 1] >= report.image_bounds[l] * 1.01;
    report.bounded_images =
        !(growing && report.image_bounds.back() >= 2.0 * report.image_bounds.front());

    // Clause b evidence: a common modulus exists and the per-map moduli do
    // not keep falling with the map index.
    const auto& pm = report.per_map_delta;
    bool falling = pm.size() > 1;
    for (std::size_t i = 0; i + 1 < pm.size(); ++i) falling = falling && pm[i + 1] <= pm[i];
    bool vanishing = falling && pm.back() <= pm.front() / 2.0;
    report.equal_uniform_continuity = report.common_delta > 0.0 && !vanishing;

    report.passed = report.bounded_images && report.equal_uniform_continuity;
    if (!report.bounded_images) report.failed_clauses += 'a';
    if (!report.equal_uniform_continuity) report.failed_clauses += 'b';
    return report;
}

} // namespace phimax
