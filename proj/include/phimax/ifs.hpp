#pragma once

#include "phimax/comparison.hpp"
#include "phimax/geometry.hpp"
#include "phimax/shiftspace.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phimax {

// === Ambient box ===

// Axis-aligned compact box; the common domain of every map in a system.
struct Box {
    std::vector<double> lo, hi;

    Box(std::vector<double> lo_, std::vector<double> hi_);
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> x, double tol = 0.0) const;
    double diameter() const; // Euclidean diagonal
    Point center() const;
    std::vector<Point> corners() const; // 2^dim points, dim <= 16
};

// === Maps ===

// A self-map of the box: either affine x -> M x + v, or a univariate
// polynomial with Horner evaluation whose range over its domain is verified
// to stay inside the domain at construction.
class MapSpec {
public:
    enum class Kind { Affine, Poly1d };

    static MapSpec affine(std::vector<std::vector<double>> matrix, std::vector<double> offset);
    static MapSpec poly1d(std::vector<double> coeffs, double lo, double hi);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<double>& matrix_flat() const { return matrix_; } // row-major
    const std::vector<double>& offset() const { return offset_; }
    const std::vector<double>& coeffs() const { return coeffs_; } // ascending degree
    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }

    Point apply(const Point& x) const;
    void apply_into(std::span<const double> x, std::span<double> out) const;

private:
    MapSpec() = default;
    Kind kind_ = Kind::Affine;
    int dim_ = 0;
    std::vector<double> matrix_, offset_; // affine
    std::vector<double> coeffs_;          // poly1d
    double lo_ = 0.0, hi_ = 0.0;          // poly1d domain
};

// All roots of the polynomial (ascending coefficients) inside [lo, hi],
// located by splitting at critical points and bisecting monotone pieces.
std::vector<double> poly_roots_in_interval(std::span<const double> coeffs, double lo,
                                           double hi, double tol = 1e-12);

// === Certificates carried by a system ===

struct PhiCertificate {
    ComparisonFunction phi;
    int p = 1; // word depth of the max-contraction inequality
};

// Entrywise coefficients of the convex-contraction condition; row-major
// count x count, nonnegative, with every row sum d_ij = a+b+c below one.
struct ConvexCoefficients {
    int count = 0;
    std::vector<double> a, b, c;

    ConvexCoefficients(int count_, std::vector<double> a_, std::vector<double> b_,
                       std::vector<double> c_);
    static ConvexCoefficients uniform(int count, double a, double b, double c);
    double d(int i, int j) const; // 0-based
    double max_d() const;
};

// === Systems ===

// Finitely many self-maps of one box, with optional contraction certificates
// carried along from configuration.
class IfsSystem {
public:
    IfsSystem(Box box, std::vector<MapSpec> maps,
              std::optional<PhiCertificate> phi = std::nullopt,
              std::optional<ConvexCoefficients> convex = std::nullopt);

    int dim() const { return box_.dim(); }
    const Box& box() const { return box_; }
    int map_count() const { return static_cast<int>(maps_.size()); }
    Alphabet alphabet() const { return Alphabet(map_count()); }
    const MapSpec& map(int letter) const; // 1-based

    Point apply(int letter, const Point& x) const;
    // f_w = f_{w1} o ... o f_{wn}; the empty word is the identity.
    Point apply_word(const FiniteWord& w, const Point& x) const;

    const std::optional<PhiCertificate>& phi_certificate() const { return phi_; }
    const std::optional<ConvexCoefficients>& convex_coefficients() const { return convex_; }

private:
    Box box_;
    std::vector<MapSpec> maps_;
    std::optional<PhiCertificate> phi_;
    std::optional<ConvexCoefficients> convex_;
};

// === Sampled inequality checks ===

// Deterministic quasi-random pair samples over a box: Halton pairs, all
// corner pairs, and near-coincident pairs probing the small-distance regime.
struct SamplePlan {
    int pair_count = 2000;
    int near_pair_count = 100;
    double near_distance = 1e-6;
    bool include_corners = true;
    std::uint64_t seed = 1;          // offset into the Halton sequence
    double margin_tolerance = 1e-12; // |margin| below this counts as zero
};

std::vector<std::pair<Point, Point>> sample_pairs(const Box& box, const SamplePlan& plan);

// Outcome of sampling one inequality: worst margin = max over samples of
// (left side - right side), so any positive margin is a counterexample.
struct CheckReport {
    std::string inequality;
    bool passed = false;
    double worst_margin = 0.0;     // after the tolerance clamp
    double raw_worst_margin = 0.0; // before the clamp
    Point witness_x, witness_y;    // pair attaining the raw worst margin
    std::size_t samples_used = 0;
};

// max over words of length p of d(f_w x, f_w y)
//   <= phi( max over words shorter than p of d(f_w x, f_w y) ).
CheckReport check_phi_max(const IfsSystem& s, const ComparisonFunction& phi, int p,
                          const SamplePlan& plan = {},
                          std::uint64_t cap = kDefaultWordCap);

// d((f_i o f_j) x, (f_i o f_j) y)
//   <= a_ij d(x,y) + b_ij d(f_i x, f_i y) + c_ij d(f_j x, f_j y).
CheckReport check_convex(const IfsSystem& s, const ConvexCoefficients& coeffs,
                         const SamplePlan& plan = {});

// A system passing the convex condition satisfies the max condition with
// depth two and the linear gauge t -> (max d_ij) t.
PhiCertificate to_phi_max(const ConvexCoefficients& coeffs);

// Single-map variant: d(f^p x, f^p y) <= phi( max over k < p of d(f^k x, f^k y) ).
CheckReport check_pstep_contraction(const MapSpec& f, const Box& box,
                                    const ComparisonFunction& phi, int p,
                                    const SamplePlan& plan = {});

// === Possibly infinite families ===

// Numerical evidence for the family conditions on a ladder of finite
// truncations: (a) union images uniformly bounded across levels, and
// (b) one continuity modulus delta serving every map at tolerance epsilon.
// Per-map moduli are estimated on the largest truncation by a shrinking
// search; a modulus that keeps falling with the map index is the failure
// signature of clause b.
struct FamilyConditionsReport {
    double epsilon = 0.0;
    std::vector<std::size_t> level_sizes;
    std::vector<double> image_bounds;   // per level: sup norm over sampled images
    std::vector<double> per_map_delta;  // per map of the largest level
    double common_delta = 0.0;          // min over those maps
    bool bounded_images = false;        // clause a
    bool equal_uniform_continuity = false; // clause b
    bool passed = false;
    std::string failed_clauses;         // subset of "ab"
};

FamilyConditionsReport check_family_conditions(const std::vector<std::vector<MapSpec>>& ladder,
                                               const Box& box, double epsilon = 1e-3,
                                               const SamplePlan& plan = {});

} // namespace phimax
