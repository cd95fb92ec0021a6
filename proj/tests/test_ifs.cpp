#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phimax/errors.hpp"
#include "phimax/ifs.hpp"

#include <cmath>
#include <random>

using namespace phimax;

namespace {

IfsSystem cantor() {
    return IfsSystem(Box({0.0}, {1.0}),
                     {MapSpec::affine({{1.0 / 3.0}}, {0.0}),
                      MapSpec::affine({{1.0 / 3.0}}, {2.0 / 3.0})});
}

IfsSystem sierpinski() {
    return IfsSystem(Box({0.0, 0.0}, {1.0, 1.0}),
                     {MapSpec::affine({{0.5, 0.0}, {0.0, 0.5}}, {0.0, 0.0}),
                      MapSpec::affine({{0.5, 0.0}, {0.0, 0.5}}, {0.5, 0.0}),
                      MapSpec::affine({{0.5, 0.0}, {0.0, 0.5}}, {0.0, 0.5})});
}

IfsSystem convex_pair() {
    return IfsSystem(Box({0.0}, {1.0}),
                     {MapSpec::affine({{0.5}}, {0.0}),
                      MapSpec::poly1d({0.0, 0.0, 0.5}, 0.0, 1.0)});
}

IfsSystem identity_pair() {
    return IfsSystem(Box({0.0}, {1.0}),
                     {MapSpec::affine({{1.0}}, {0.0}), MapSpec::affine({{1.0}}, {0.0})});
}

std::vector<MapSpec> ladder_level(int n_maps) {
    std::vector<MapSpec> maps;
    for (int n = 1; n <= n_maps; ++n)
        maps.push_back(MapSpec::affine({{1.0 / 3.0}}, {2.0 / (3.0 * n)}));
    return maps;
}

std::vector<MapSpec> slope_growth_level(int n_maps) {
    std::vector<MapSpec> maps;
    for (int n = 1; n <= n_maps; ++n) maps.push_back(MapSpec::affine({{double(n)}}, {0.0}));
    return maps;
}

} // namespace

TEST_CASE("box geometry") {
    Box b({0.0, -1.0}, {2.0, 1.0});
    CHECK(b.dim() == 2);
    CHECK(b.diameter() == doctest::Approx(std::sqrt(8.0)));
    CHECK(b.center() == Point{1.0, 0.0});
    CHECK(b.contains(std::vector<double>{0.0, 0.0}));
    CHECK_FALSE(b.contains(std::vector<double>{2.1, 0.0}));
    CHECK(b.contains(std::vector<double>{2.1, 0.0}, 0.2));
    CHECK(b.corners().size() == 4);
    CHECK(b.corners()[3] == Point{2.0, 1.0});

    CHECK_THROWS_AS(Box({0.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Box({1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Box({}, {}), std::invalid_argument);
}

TEST_CASE("affine and polynomial application") {
    MapSpec f1 = MapSpec::affine({{1.0 / 3.0}}, {0.0});
    CHECK(f1.apply(Point{1.0}) == Point{1.0 / 3.0});

    MapSpec shear = MapSpec::affine({{1.0, 0.5}, {0.0, 1.0}}, {1.0, -1.0});
    CHECK(shear.apply(Point{2.0, 2.0}) == Point{4.0, 1.0});
    CHECK_THROWS_AS(shear.apply(Point{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MapSpec::affine({{1.0, 0.0}}, {0.0}), std::invalid_argument);

    MapSpec sq = MapSpec::poly1d({0.0, 0.0, 0.5}, 0.0, 1.0);
    CHECK(sq.apply(Point{1.0}) == Point{0.5});
    CHECK(sq.apply(Point{0.5}) == Point{0.125});
    CHECK(sq.dim() == 1);
}

TEST_CASE("polynomial self-map validation") {
    CHECK_NOTHROW(MapSpec::poly1d({0.0, 2.0, -2.0}, 0.0, 1.0)); // 2x(1-x), peak 1/2
    CHECK_NOTHROW(MapSpec::poly1d({0.0, 4.0, -4.0}, 0.0, 1.0)); // onto [0,1]
    CHECK_NOTHROW(MapSpec::poly1d({-0.6, 0.0, 1.0}, -1.0, 1.0));
    CHECK_NOTHROW(MapSpec::poly1d({0.0, 0.0, 0.0, 1.0}, -1.0, 1.0));
    CHECK_THROWS_AS(MapSpec::poly1d({0.5, 1.0}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MapSpec::poly1d({0.0, 0.0, 0.0, 1.5}, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MapSpec::poly1d({}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MapSpec::poly1d({0.0, 1.0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("polynomial root localization") {
    // (x-0.2)(x-0.5)(x-0.8)
    std::vector<double> cubic{-0.08, 0.66, -1.5, 1.0};
    auto roots = poly_roots_in_interval(cubic, 0.0, 1.0);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(roots[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(roots[2] == doctest::Approx(0.8).epsilon(1e-9));

    CHECK(poly_roots_in_interval(std::vector<double>{1.0, 0.0, 1.0}, -2.0, 2.0).empty());

    auto ends = poly_roots_in_interval(std::vector<double>{0.0, -1.0, 1.0}, 0.0, 1.0); // x(x-1)
    REQUIRE(ends.size() == 2);
    CHECK(ends[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ends[1] == doctest::Approx(1.0).epsilon(1e-9));

    auto dbl = poly_roots_in_interval(std::vector<double>{0.09, -0.6, 1.0}, 0.0, 1.0); // (x-0.3)^2
    REQUIRE(dbl.size() == 1);
    CHECK(dbl[0] == doctest::Approx(0.3).epsilon(1e-9));

    // (x^2-0.25)(x^2-0.04)
    auto quartic = poly_roots_in_interval(std::vector<double>{0.01, 0.0, -0.29, 0.0, 1.0}, -1.0, 1.0);
    REQUIRE(quartic.size() == 4);
    CHECK(quartic[0] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(quartic[3] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("system construction enforces the box") {
    CHECK_NOTHROW(cantor());
    CHECK_NOTHROW(sierpinski());
    CHECK_NOTHROW(convex_pair());

    CHECK_THROWS_AS(IfsSystem(Box({0.0}, {1.0}), {MapSpec::affine({{1.0}}, {1.0})}),
                    std::invalid_argument);
    CHECK_THROWS_AS(IfsSystem(Box({0.0}, {1.0}),
                              {MapSpec::poly1d({0.0, 0.0, 0.5}, 0.0, 2.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(IfsSystem(Box({0.0}, {1.0}), {}), std::invalid_argument);
    CHECK_THROWS_AS(IfsSystem(Box({0.0}, {1.0}), {MapSpec::affine({{0.5}}, {0.0})},
                              std::nullopt, ConvexCoefficients::uniform(2, 0.5, 0.0, 0.0)),
                    std::invalid_argument);

    IfsSystem s = cantor();
    CHECK(s.map_count() == 2);
    CHECK(s.alphabet().size == 2);
    CHECK_THROWS_AS(s.map(0), std::invalid_argument);
    CHECK_THROWS_AS(s.map(3), std::invalid_argument);
}

TEST_CASE("word application composes right to left") {
    IfsSystem s = cantor();
    Alphabet a = s.alphabet();
    CHECK(s.apply_word(parse_finite_word("12", a), Point{0.0}) ==
          Point{2.0 / 9.0});
    CHECK(s.apply_word(FiniteWord::empty(a), Point{0.37}) == Point{0.37});

    Point x{1.0};
    for (int n = 1; n <= 10; ++n) {
        std::vector<int> ones(n, 1);
        Point v = s.apply_word(FiniteWord(a, ones), x);
        CHECK(v[0] == doctest::Approx(std::pow(1.0 / 3.0, n)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(s.apply_word(parse_finite_word("13", Alphabet(3)), x),
                    std::invalid_argument);
}

TEST_CASE("word application is associative") {
    std::mt19937_64 rng(99);
    IfsSystem s = sierpinski();
    Alphabet a = s.alphabet();
    std::uniform_int_distribution<int> len(0, 5), letter(1, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> u_letters(len(rng)), v_letters(len(rng));
        for (int& l : u_letters) l = letter(rng);
        for (int& l : v_letters) l = letter(rng);
        std::vector<int> joined = u_letters;
        joined.insert(joined.end(), v_letters.begin(), v_letters.end());
        Point x{u(rng), u(rng)};
        CHECK(s.apply_word(FiniteWord(a, joined), x) ==
              s.apply_word(FiniteWord(a, u_letters),
                           s.apply_word(FiniteWord(a, v_letters), x)));
    }
}

TEST_CASE("affine words obey the slope-product bound") {
    std::mt19937_64 rng(1212);
    std::uniform_real_distribution<double> slope(-0.5, 0.5), u01(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 6), letters(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MapSpec> maps;
        std::vector<double> slopes;
        for (int i = 0; i < 3; ++i) {
            double a = slope(rng);
            double blo = std::max(0.0, -a), bhi = 1.0 - std::max(a, 0.0);
            double b = blo + (bhi - blo) * u01(rng);
            maps.push_back(MapSpec::affine({{a}}, {b}));
            slopes.push_back(std::abs(a));
        }
        IfsSystem s(Box({0.0}, {1.0}), maps);
        std::vector<int> w(len(rng));
        double product = 1.0;
        for (int& l : w) {
            l = letters(rng);
            product *= slopes[l - 1];
        }
        Point x{u01(rng)}, y{u01(rng)};
        FiniteWord word(s.alphabet(), w);
        CHECK(distance(s.apply_word(word, x), s.apply_word(word, y)) <=
              product * distance(x, y) + 1e-12);
    }
}

TEST_CASE("pair sampling is deterministic and box-bound") {
    Box b({0.0}, {1.0});
    SamplePlan plan;
    auto pairs = sample_pairs(b, plan);
    auto again = sample_pairs(b, plan);
    REQUIRE(pairs.size() == again.size());
    CHECK(pairs.size() == 2103); // 2000 Halton + 3 corner + 100 near
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].first == again[i].first);
        CHECK(pairs[i].second == again[i].second);
        CHECK(b.contains(std::vector<double>(pairs[i].first.coords)));
        CHECK(b.contains(std::vector<double>(pairs[i].second.coords)));
    }

    // Corner pairs present, including the degenerate one.
    bool has_00 = false, has_01 = false, has_11 = false;
    for (const auto& [x, y] : pairs) {
        has_00 = has_00 || (x == Point{0.0} && y == Point{0.0});
        has_01 = has_01 || (x == Point{0.0} && y == Point{1.0});
        has_11 = has_11 || (x == Point{1.0} && y == Point{1.0});
    }
    CHECK(has_00);
    CHECK(has_01);
    CHECK(has_11);

    SamplePlan other = plan;
    other.seed = 7;
    CHECK(sample_pairs(b, other)[0].first != pairs[0].first);

    SamplePlan near_only;
    near_only.pair_count = 0;
    near_only.include_corners = false;
    near_only.near_pair_count = 50;
    for (const auto& [x, y] : sample_pairs(b, near_only)) {
        double d = distance(x, y);
        CHECK(d > 0.0);
        // fl(x + delta) - x may overshoot delta by half an ulp of x.
        CHECK(d <= near_only.near_distance * (1.0 + 1e-9));
    }
}

TEST_CASE("phi-max check: exact contraction passes with zero margin") {
    auto report = check_phi_max(cantor(), ComparisonFunction::linear(1.0 / 3.0), 1);
    CHECK(report.passed);
    CHECK(report.worst_margin == 0.0);
    CHECK(std::abs(report.raw_worst_margin) < 1e-12);
    CHECK(report.samples_used == 2103);
}

TEST_CASE("phi-max check: identity fails with a positive witness") {
    IfsSystem id(Box({0.0}, {1.0}), {MapSpec::affine({{1.0}}, {0.0})});
    for (auto phi : {ComparisonFunction::linear(0.5), ComparisonFunction::rational()}) {
        auto report = check_phi_max(id, phi, 1);
        CHECK_FALSE(report.passed);
        CHECK(report.raw_worst_margin > 0.01);
        CHECK(distance(report.witness_x, report.witness_y) > 0.0);
    }
}

TEST_CASE("phi-max check: depth-2 certificate of the mixed pair") {
    auto report = check_phi_max(convex_pair(), ComparisonFunction::linear(0.5), 2);
    CHECK(report.passed);
    auto sierp = check_phi_max(sierpinski(), ComparisonFunction::linear(0.5), 1);
    CHECK(sierp.passed);
}

TEST_CASE("convex coefficient validation") {
    CHECK_NOTHROW(ConvexCoefficients::uniform(2, 0.5, 0.25, 0.2));
    CHECK(ConvexCoefficients::uniform(2, 0.5, 0.25, 0.2).max_d() == doctest::Approx(0.95));
    CHECK_THROWS_AS(ConvexCoefficients::uniform(2, 0.6, 0.3, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(ConvexCoefficients::uniform(2, -0.1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ConvexCoefficients(2, {0.5}, {0.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("convex check on the worked systems") {
    auto pair_report = check_convex(convex_pair(), ConvexCoefficients::uniform(2, 0.5, 0.0, 0.0));
    CHECK(pair_report.passed);

    auto cantor_report = check_convex(cantor(), ConvexCoefficients::uniform(2, 1.0 / 9.0, 0.0, 0.0));
    CHECK(cantor_report.passed);
    CHECK(cantor_report.worst_margin == 0.0); // compositions scale by exactly 1/9

    auto id_report = check_convex(identity_pair(), ConvexCoefficients::uniform(2, 0.9, 0.0, 0.0));
    CHECK_FALSE(id_report.passed);
    CHECK(id_report.raw_worst_margin == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("convex certificates convert to depth-2 linear phi-max") {
    PhiCertificate c1 = to_phi_max(ConvexCoefficients::uniform(3, 0.9, 0.0, 0.0));
    CHECK(c1.p == 2);
    CHECK(c1.phi.form() == ComparisonFunction::Form::Linear);
    CHECK(c1.phi.param() == 0.9);
    PhiCertificate c2 = to_phi_max(ConvexCoefficients::uniform(2, 0.25, 0.15, 0.1));
    CHECK(c2.phi.param() == doctest::Approx(0.5));

    // Round trip: systems passing check_convex pass the converted check.
    for (auto mk : {&convex_pair, &cantor}) {
        IfsSystem s = mk();
        ConvexCoefficients coeffs =
            ConvexCoefficients::uniform(2, s.map(1).matrix_flat()[0] == 0.5 ? 0.5 : 1.0 / 9.0,
                                        0.0, 0.0);
        REQUIRE(check_convex(s, coeffs).passed);
        PhiCertificate cert = to_phi_max(coeffs);
        CHECK(check_phi_max(s, cert.phi, cert.p).passed);
    }
}

TEST_CASE("single-map p-step contraction") {
    Box b({0.0}, {1.0});
    auto half = check_pstep_contraction(MapSpec::affine({{0.5}}, {0.0}), b,
                                        ComparisonFunction::linear(0.5), 1);
    CHECK(half.passed);
    CHECK(half.worst_margin == 0.0);

    auto sq = check_pstep_contraction(MapSpec::poly1d({0.0, 0.0, 0.5}, 0.0, 1.0), b,
                                      ComparisonFunction::linear(0.5), 2);
    CHECK(sq.passed);

    auto id = check_pstep_contraction(MapSpec::affine({{1.0}}, {0.0}), b,
                                      ComparisonFunction::linear(0.9), 1);
    CHECK_FALSE(id.passed);
}

TEST_CASE("family conditions: shared modulus ladder passes") {
    std::vector<std::vector<MapSpec>> ladder{ladder_level(2), ladder_level(4), ladder_level(8)};
    auto report = check_family_conditions(ladder, Box({0.0}, {1.0}), 1e-3);
    CHECK(report.passed);
    CHECK(report.failed_clauses.empty());
    CHECK(report.bounded_images);
    CHECK(report.equal_uniform_continuity);
    CHECK(report.common_delta > 0.0);
    REQUIRE(report.per_map_delta.size() == 8);
    for (double d : report.per_map_delta) CHECK(d == report.per_map_delta[0]);
    for (double b : report.image_bounds) CHECK(b == 1.0); // f_1(1) = 1 at every level
    CHECK(report.level_sizes == std::vector<std::size_t>{2, 4, 8});
}

TEST_CASE("family conditions: slope growth is rejected naming clause b") {
    auto single = check_family_conditions({slope_growth_level(5)}, Box({0.0}, {1.0}), 1e-3);
    CHECK_FALSE(single.passed);
    CHECK(single.failed_clauses == "b");
    CHECK(single.per_map_delta.front() > single.per_map_delta.back());

    std::vector<std::vector<MapSpec>> ladder{slope_growth_level(2), slope_growth_level(4),
                                             slope_growth_level(8)};
    auto multi = check_family_conditions(ladder, Box({0.0}, {1.0}), 1e-3);
    CHECK_FALSE(multi.passed);
    CHECK(multi.failed_clauses == "ab");
    CHECK_FALSE(multi.bounded_images);
}

TEST_CASE("family conditions: singleton passes trivially") {
    auto report = check_family_conditions({{MapSpec::affine({{0.5}}, {0.0})}},
                                          Box({0.0}, {1.0}), 1e-3);
    CHECK(report.passed);
    CHECK(report.common_delta > 0.0);

    CHECK_THROWS_AS(check_family_conditions({}, Box({0.0}, {1.0}), 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_family_conditions({{MapSpec::affine({{0.5}}, {0.0})}},
                                            Box({0.0}, {1.0}), 0.0),
                    std::invalid_argument);
}
