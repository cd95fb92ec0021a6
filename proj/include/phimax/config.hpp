#pragma once

#include "phimax/ifs.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phimax {

// One configuration document.  Plain-system documents carry `maps`; ladder
// documents carry `ladder`, a list of finite map families.  Either flavor
// may pin command defaults (tolerance, seed point, report depths) that
// command-line flags override.
struct RunConfig {
    Box box{{0.0}, {1.0}};
    std::vector<MapSpec> maps;
    std::optional<PhiCertificate> phi;
    std::optional<ConvexCoefficients> convex;
    std::vector<std::vector<MapSpec>> ladder;
    std::vector<int> depths;
    std::optional<Point> seed_point;
    std::optional<double> tol;

    bool is_ladder() const { return !ladder.empty(); }
    // Builds the system a plain document describes; rejects ladder documents.
    IfsSystem system() const;
};

// Both throw config_error with a diagnostic on any malformed input.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

} // namespace phimax
