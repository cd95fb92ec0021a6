#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phimax/config.hpp"
#include "phimax/errors.hpp"

#include <cstdio>
#include <fstream>

using namespace phimax;

namespace {

const char* kCantorDoc = R"({
  "name": "middle-thirds system",
  "dimension": 1,
  "box": {"lo": [0.0], "hi": [1.0]},
  "maps": [
    {"type": "affine", "matrix": [[0.33333333333333331]], "offset": [0.0]},
    {"type": "affine", "matrix": [[0.33333333333333331]], "offset": [0.66666666666666663]}
  ],
  "phi": {"form": "linear", "c": 0.33333333333333331},
  "p": 1
})";

} // namespace

TEST_CASE("plain system document parses fully") {
    RunConfig cfg = parse_config(kCantorDoc);
    CHECK_FALSE(cfg.is_ladder());
    CHECK(cfg.maps.size() == 2);
    CHECK(cfg.box.lo[0] == 0.0);
    CHECK(cfg.box.hi[0] == 1.0);
    REQUIRE(cfg.phi.has_value());
    CHECK(cfg.phi->phi.form() == ComparisonFunction::Form::Linear);
    CHECK(cfg.phi->phi.param() == 0.33333333333333331);
    CHECK(cfg.phi->p == 1);
    CHECK_FALSE(cfg.convex.has_value());

    IfsSystem s = cfg.system();
    CHECK(s.dim() == 1);
    CHECK(s.map_count() == 2);
    CHECK(s.apply(2, Point{0.0})[0] == 0.66666666666666663);
}

TEST_CASE("poly1d maps and convex coefficients parse") {
    RunConfig cfg = parse_config(R"({
      "dimension": 1,
      "box": {"lo": [0.0], "hi": [1.0]},
      "maps": [
        {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
        {"type": "poly1d", "coeffs": [0.0, 0.0, 0.5], "domain": [0.0, 1.0]}
      ],
      "convex_coefficients": {"a": 0.5, "b": 0.0, "c": 0.0}
    })");
    REQUIRE(cfg.convex.has_value());
    CHECK(cfg.convex->count == 2);
    CHECK(cfg.convex->d(0, 0) == 0.5);
    CHECK(cfg.convex->max_d() == 0.5);
    CHECK(cfg.system().apply(2, Point{1.0})[0] == 0.5);

    RunConfig entrywise = parse_config(R"({
      "dimension": 1,
      "box": {"lo": [0.0], "hi": [1.0]},
      "maps": [
        {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
        {"type": "affine", "matrix": [[0.25]], "offset": [0.5]}
      ],
      "convex_coefficients": {
        "a": [[0.1, 0.2], [0.3, 0.4]],
        "b": 0.05,
        "c": [[0.0, 0.0], [0.0, 0.1]]
      }
    })");
    REQUIRE(entrywise.convex.has_value());
    CHECK(entrywise.convex->a[1] == 0.2);
    CHECK(entrywise.convex->b[3] == 0.05);
    CHECK(entrywise.convex->d(1, 1) == doctest::Approx(0.55));
}

TEST_CASE("ladder documents carry families and depths") {
    RunConfig cfg = parse_config(R"({
      "dimension": 1,
      "box": {"lo": [0.0], "hi": [1.0]},
      "ladder": [
        [{"type": "affine", "matrix": [[0.33333333333333331]], "offset": [0.66666666666666663]}],
        [{"type": "affine", "matrix": [[0.33333333333333331]], "offset": [0.66666666666666663]},
         {"type": "affine", "matrix": [[0.33333333333333331]], "offset": [0.33333333333333331]}]
      ],
      "depths": [1, 2, 3],
      "seed_point": [0.5],
      "tol": 1e-5
    })");
    CHECK(cfg.is_ladder());
    REQUIRE(cfg.ladder.size() == 2);
    CHECK(cfg.ladder[0].size() == 1);
    CHECK(cfg.ladder[1].size() == 2);
    CHECK(cfg.depths == std::vector<int>{1, 2, 3});
    REQUIRE(cfg.seed_point.has_value());
    CHECK((*cfg.seed_point)[0] == 0.5);
    CHECK(cfg.tol == 1e-5);
    CHECK_THROWS_AS(cfg.system(), config_error);
}

TEST_CASE("malformed documents are rejected with config_error") {
    auto bad = [](const char* text) { CHECK_THROWS_AS(parse_config(text), config_error); };

    bad("not json at all");
    bad("[1, 2, 3]");
    bad(R"({"dimension": 1})");                                   // no box
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]}})");    // no maps
    bad(R"({"dimension": 0, "box": {"lo": [], "hi": []},
           "maps": [{"type": "affine", "matrix": [[1]], "offset": [0]}]})");
    bad(R"({"dimension": 1, "box": {"lo": [0, 0], "hi": [1, 1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}]})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "spiral", "matrix": [[0.5]], "offset": [0]}]})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}],
           "surprise": true})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}],
           "p": 2})");                                            // p without phi
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}],
           "phi": {"form": "exotic"}})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}],
           "tol": -1.0})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0]}],
           "ladder": [[{"type": "affine", "matrix": [[0.5]], "offset": [0]}]]})");
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "ladder": [[{"type": "affine", "matrix": [[0.5]], "offset": [0]}]],
           "depths": [0]})");
    bad(R"({"dimension": 2, "box": {"lo": [0, 0], "hi": [1, 1]},
           "maps": [{"type": "poly1d", "coeffs": [0, 0.5], "domain": [0, 1]}]})");

    // Maps that escape the box are configuration errors, not crashes.
    bad(R"({"dimension": 1, "box": {"lo": [0], "hi": [1]},
           "maps": [{"type": "affine", "matrix": [[2.0]], "offset": [0]}]})");
}

TEST_CASE("pseudo-identity and scaled forms are reachable from documents") {
    RunConfig cfg = parse_config(R"({
      "dimension": 1,
      "box": {"lo": [0.0], "hi": [1.0]},
      "maps": [{"type": "affine", "matrix": [[1.0]], "offset": [0.0]}],
      "phi": {"form": "pseudo_identity"},
      "p": 1
    })");
    CHECK(cfg.phi->phi.form() == ComparisonFunction::Form::PseudoIdentity);

    RunConfig scaled = parse_config(R"({
      "dimension": 1,
      "box": {"lo": [0.0], "hi": [1.0]},
      "maps": [{"type": "affine", "matrix": [[0.5]], "offset": [0.25]}],
      "phi": {"form": "scaled_rational", "a": 2.0},
      "p": 3
    })");
    CHECK(scaled.phi->phi.param() == 2.0);
    CHECK(scaled.phi->p == 3);
}

TEST_CASE("load_config reads files and reports missing ones") {
    CHECK_THROWS_AS(load_config("/nonexistent/system.json"), config_error);

    std::string path = "test_config_roundtrip.json";
    {
        std::ofstream out(path);
        out << kCantorDoc;
    }
    RunConfig cfg = load_config(path);
    CHECK(cfg.maps.size() == 2);
    std::remove(path.c_str());
}
