#include "phimax/config.hpp"

#include "phimax/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace phimax {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw config_error("config: " + msg); }

const json& member(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing required field '") + key + "'");
    return *it;
}

double number_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

int int_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

std::vector<double> number_array(const json& v, const char* what) {
    if (!v.is_array() || v.empty()) fail(std::string(what) + " must be a nonempty array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) {
        if (!x.is_number()) fail(std::string(what) + " must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
    std::set<std::string> ok;
    for (const char* k : allowed) ok.insert(k);
    ok.insert("name"); // free-form description, ignored
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) fail(std::string("unknown field '") + it.key() + "' in " + where);
}

MapSpec parse_map(const json& j, int dim) {
    if (!j.is_object()) fail("each map must be an object");
    const json& type = member(j, "type");
    if (!type.is_string()) fail("map 'type' must be a string");
    std::string kind = type.get<std::string>();
    if (kind == "affine") {
        reject_unknown(j, {"type", "matrix", "offset"}, "an affine map");
        const json& m = member(j, "matrix");
        if (!m.is_array() || m.size() != std::size_t(dim))
            fail("affine 'matrix' must have one row per dimension");
        std::vector<std::vector<double>> matrix;
        for (const json& row : m) {
            matrix.push_back(number_array(row, "a matrix row"));
            if (matrix.back().size() != std::size_t(dim))
                fail("affine matrix rows must match the dimension");
        }
        std::vector<double> offset = number_array(member(j, "offset"), "'offset'");
        if (offset.size() != std::size_t(dim)) fail("'offset' must match the dimension");
        return MapSpec::affine(std::move(matrix), std::move(offset));
    }
    if (kind == "poly1d") {
        reject_unknown(j, {"type", "coeffs", "domain"}, "a poly1d map");
        if (dim != 1) fail("poly1d maps require dimension 1");
        std::vector<double> coeffs = number_array(member(j, "coeffs"), "'coeffs'");
        const json& dom = member(j, "domain");
        if (!dom.is_array() || dom.size() != 2 || !dom[0].is_number() || !dom[1].is_number())
            fail("'domain' must be [lo, hi]");
        return MapSpec::poly1d(std::move(coeffs), dom[0].get<double>(), dom[1].get<double>());
    }
    fail("map 'type' must be 'affine' or 'poly1d'");
}

std::vector<MapSpec> parse_maps(const json& v, int dim, const char* what) {
    if (!v.is_array() || v.empty()) fail(std::string(what) + " must be a nonempty array");
    std::vector<MapSpec> maps;
    maps.reserve(v.size());
    for (const json& m : v) maps.push_back(parse_map(m, dim));
    return maps;
}

ComparisonFunction parse_phi_form(const json& j) {
    if (!j.is_object()) fail("'phi' must be an object");
    const json& form = member(j, "form");
    if (!form.is_string()) fail("phi 'form' must be a string");
    std::string name = form.get<std::string>();
    if (name == "linear") {
        reject_unknown(j, {"form", "c"}, "'phi'");
        return ComparisonFunction::linear(number_field(j, "c"));
    }
    if (name == "rational") {
        reject_unknown(j, {"form"}, "'phi'");
        return ComparisonFunction::rational();
    }
    if (name == "scaled_rational") {
        reject_unknown(j, {"form", "a"}, "'phi'");
        return ComparisonFunction::scaled_rational(number_field(j, "a"));
    }
    if (name == "pseudo_identity") {
        reject_unknown(j, {"form"}, "'phi'");
        return ComparisonFunction::pseudo_identity();
    }
    fail("phi 'form' must be linear, rational, scaled_rational, or pseudo_identity");
}

// Coefficient blocks accept one scalar for all entries or a full matrix.
std::vector<double> parse_coefficient_block(const json& v, int count, const char* key) {
    std::vector<double> out;
    if (v.is_number()) {
        out.assign(std::size_t(count) * count, v.get<double>());
        return out;
    }
    if (!v.is_array() || v.size() != std::size_t(count))
        fail(std::string("convex coefficient '") + key +
             "' must be a scalar or a map-count-square matrix");
    for (const json& row : v) {
        std::vector<double> r = number_array(row, "a coefficient row");
        if (r.size() != std::size_t(count))
            fail(std::string("convex coefficient '") + key + "' rows must match the map count");
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

ConvexCoefficients parse_convex(const json& j, int count) {
    if (!j.is_object()) fail("'convex_coefficients' must be an object");
    reject_unknown(j, {"a", "b", "c"}, "'convex_coefficients'");
    return ConvexCoefficients(count, parse_coefficient_block(member(j, "a"), count, "a"),
                              parse_coefficient_block(member(j, "b"), count, "b"),
                              parse_coefficient_block(member(j, "c"), count, "c"));
}

} // namespace

IfsSystem RunConfig::system() const {
    if (is_ladder()) fail("this document defines a family ladder, not a single system");
    if (maps.empty()) fail("document has no maps");
    return IfsSystem(box, maps, phi, convex);
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("document must be a JSON object");
    reject_unknown(doc,
                   {"dimension", "box", "maps", "phi", "p", "convex_coefficients",
                    "ladder", "depths", "seed_point", "tol"},
                   "the document");

    int dim = int_field(doc, "dimension");
    if (dim < 1) fail("'dimension' must be at least 1");

    const json& boxj = member(doc, "box");
    if (!boxj.is_object()) fail("'box' must be an object with 'lo' and 'hi'");
    reject_unknown(boxj, {"lo", "hi"}, "'box'");
    std::vector<double> lo = number_array(member(boxj, "lo"), "box 'lo'");
    std::vector<double> hi = number_array(member(boxj, "hi"), "box 'hi'");
    if (lo.size() != std::size_t(dim) || hi.size() != std::size_t(dim))
        fail("box bounds must match the dimension");

    try {
        RunConfig cfg{Box(std::move(lo), std::move(hi)), {}, {}, {}, {}, {}, {}, {}};

        bool has_maps = doc.contains("maps"), has_ladder = doc.contains("ladder");
        if (has_maps == has_ladder)
            fail("document needs exactly one of 'maps' or 'ladder'");
        if (has_maps) cfg.maps = parse_maps(doc["maps"], dim, "'maps'");
        if (has_ladder) {
            const json& lv = doc["ladder"];
            if (!lv.is_array() || lv.empty()) fail("'ladder' must be a nonempty array");
            for (const json& level : lv)
                cfg.ladder.push_back(parse_maps(level, dim, "a ladder level"));
        }

        if (doc.contains("phi")) {
            int p = doc.contains("p") ? int_field(doc, "p") : 1;
            if (p < 1) fail("'p' must be at least 1");
            cfg.phi = PhiCertificate{parse_phi_form(doc["phi"]), p};
        } else if (doc.contains("p")) {
            fail("'p' requires a 'phi' certificate");
        }

        if (doc.contains("convex_coefficients")) {
            if (!has_maps) fail("'convex_coefficients' requires a 'maps' document");
            cfg.convex = parse_convex(doc["convex_coefficients"], int(cfg.maps.size()));
        }

        if (doc.contains("depths")) {
            const json& dv = doc["depths"];
            if (!dv.is_array() || dv.empty()) fail("'depths' must be a nonempty array");
            for (const json& d : dv) {
                if (!d.is_number_integer() || d.get<int>() < 1)
                    fail("'depths' entries must be positive integers");
                cfg.depths.push_back(d.get<int>());
            }
        }

        if (doc.contains("seed_point")) {
            std::vector<double> s = number_array(doc["seed_point"], "'seed_point'");
            if (s.size() != std::size_t(dim)) fail("'seed_point' must match the dimension");
            cfg.seed_point = Point(std::move(s));
        }

        if (doc.contains("tol")) {
            const json& t = doc["tol"];
            if (!t.is_number() || !(t.get<double>() > 0.0))
                fail("'tol' must be a positive number");
            cfg.tol = t.get<double>();
        }

        // Constructing the system surfaces invariance violations immediately.
        if (!cfg.is_ladder()) (void)cfg.system();
        return cfg;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what()); // domain validation failures are configuration errors
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const config_error& e) {
        throw config_error(std::string(e.what()) + " [" + path + "]");
    }
}

} // namespace phimax
