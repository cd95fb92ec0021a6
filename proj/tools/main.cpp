#include <CLI11.hpp>
#include <json.hpp>

#include "phimax/comparison.hpp"
#include "phimax/config.hpp"
#include "phimax/engines.hpp"
#include "phimax/errors.hpp"
#include "phimax/geometry.hpp"
#include "phimax/ifs.hpp"
#include "phimax/shiftspace.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace phimax;

namespace {

using nlohmann::json;

// === Small helpers ===

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

Point parse_point_text(const std::string& text) {
    std::vector<double> coords;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            coords.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(unsigned(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw config_error("cannot parse coordinate '" + item + "'");
        }
    }
    if (coords.empty()) throw config_error("empty point '" + text + "'");
    return Point(std::move(coords));
}

Point resolve_seed(const std::string& flag, const RunConfig& cfg, const Box& box) {
    Point seed = !flag.empty()          ? parse_point_text(flag)
                 : cfg.seed_point       ? *cfg.seed_point
                                        : box.center();
    if (seed.dim() != box.dim())
        throw config_error("seed point dimension " + std::to_string(seed.dim()) +
                           " does not match the system dimension " +
                           std::to_string(box.dim()));
    return seed;
}

std::pair<int, int> parse_raster_size(const std::string& text) {
    auto x = text.find('x');
    int w = 0, h = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        w = std::stoi(text.substr(0, x));
        h = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw config_error("--pgm expects WIDTHxHEIGHT, got '" + text + "'");
    }
    if (w < 1 || h < 1) throw config_error("--pgm size must be positive");
    return {w, h};
}

std::string pgm_path_for(const std::string& out) {
    if (out.size() > 4 && out.ends_with(".csv"))
        return out.substr(0, out.size() - 4) + ".pgm";
    return out + ".pgm";
}

// Reads a word,coord,... table back into the point cloud it describes.
PointSet table_csv_points(const std::string& text) {
    std::vector<double> flat;
    int dim = 0;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto first = line.find(',');
        if (first == std::string::npos)
            throw config_error("table row without coordinates: '" + line + "'");
        std::stringstream row(line.substr(first + 1));
        std::string cell;
        int count = 0;
        while (std::getline(row, cell, ',')) {
            flat.push_back(std::stod(cell));
            ++count;
        }
        if (dim == 0) dim = count;
        if (count != dim) throw config_error("ragged table row: '" + line + "'");
    }
    if (flat.empty()) throw config_error("table file has no rows");
    return PointSet(std::move(flat), dim);
}

long long lap_ms(std::chrono::steady_clock::time_point& last) {
    auto now = std::chrono::steady_clock::now();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - last).count();
    last = now;
    return ms;
}

std::string point_text(const Point& p) {
    std::string out;
    for (int k = 0; k < p.dim(); ++k) {
        if (k) out += ',';
        out += format_double(p[k]);
    }
    return out;
}

// === check ===

constexpr int kCertifyNMax = 10'000;
constexpr double kCertifyDecayEps = 1e-9;
const std::vector<double> kCertifyGrid{0.1, 1.0, 10.0, 100.0};

struct CheckCollector {
    bool structured = false;
    bool all_passed = true;
    json checks = json::array();
    std::string text;

    void add_certify(const std::string& role, const CertifyReport& r) {
        int stalls = 0;
        for (const DecayResult& d : r.decay)
            if (d.status == DecayResult::Status::Stalled) ++stalls;
        all_passed = all_passed && r.passed;
        if (structured) {
            json j{{"kind", "certify"},
                   {"role", role},
                   {"passed", r.passed},
                   {"clause_i_monotonicity_violations", r.monotonicity_violations.size()},
                   {"clause_ii_decay_stalls", stalls},
                   {"strictness_violations", r.strictness_violations.size()},
                   {"max_decay_steps", r.max_decay_steps}};
            checks.push_back(std::move(j));
            return;
        }
        text += "[certify] gauge (" + role + ")\n";
        text += "[certify] clause i) monotone on grid: " +
                (r.monotonicity_violations.empty()
                     ? std::string("ok")
                     : "VIOLATED (" + std::to_string(r.monotonicity_violations.size()) +
                           " grid pairs)") +
                "\n";
        if (stalls == 0) {
            text += "[certify] clause ii) iterates vanish: ok";
            if (r.max_decay_steps >= 0)
                text += " (reached " + format_double(r.epsilon_decay) + " in <= " +
                        std::to_string(r.max_decay_steps) + " steps)";
            else
                text += " (still decreasing at n_max)";
            text += "\n";
        } else {
            text += "[certify] clause ii) iterates vanish: VIOLATED (stalled on " +
                    std::to_string(stalls) + " grid values)\n";
        }
        text += "[certify] strictness phi(t) < t: " +
                (r.strictness_violations.empty()
                     ? std::string("ok")
                     : "VIOLATED at t = " + format_double(r.strictness_violations.front())) +
                "\n";
        text += std::string("[certify] result: ") + (r.passed ? "PASS" : "FAIL") + "\n";
    }

    void add_margin(const std::string& kind, const CheckReport& r) {
        all_passed = all_passed && r.passed;
        if (structured) {
            json j{{"kind", kind},
                   {"inequality", r.inequality},
                   {"passed", r.passed},
                   {"worst_margin", r.worst_margin},
                   {"raw_worst_margin", r.raw_worst_margin},
                   {"samples_used", r.samples_used},
                   {"witness_x", r.witness_x.coords},
                   {"witness_y", r.witness_y.coords}};
            checks.push_back(std::move(j));
            return;
        }
        text += "[" + kind + "] inequality: " + r.inequality + "\n";
        text += "[" + kind + "] worst margin = " + format_double(r.worst_margin) +
                " (raw " + format_double(r.raw_worst_margin) + ") over " +
                std::to_string(r.samples_used) + " samples\n";
        if (!r.passed)
            text += "[" + kind + "] witness x = (" + point_text(r.witness_x) +
                    "), y = (" + point_text(r.witness_y) + ")\n";
        text += "[" + kind + "] result: " + (r.passed ? "PASS" : "FAIL") + "\n";
    }

    int finish(const std::string& command) {
        if (structured) {
            json out{{"command", command}, {"passed", all_passed}, {"checks", checks}};
            std::cout << out.dump(2) << "\n";
        } else {
            std::cout << text << "[" << command << "] result: "
                      << (all_passed ? "PASS" : "FAIL") << "\n";
        }
        return all_passed ? 0 : 1;
    }
};

int cmd_check(const RunConfig& cfg, const std::string& format) {
    if (!cfg.phi && !cfg.convex)
        throw config_error(
            "config carries neither 'phi' nor 'convex_coefficients'; nothing to check");
    IfsSystem s = cfg.system();
    CheckCollector out;
    out.structured = format == "structured";

    if (cfg.phi) {
        out.add_certify(cfg.phi->phi.describe(),
                        certify(cfg.phi->phi, kCertifyGrid, kCertifyNMax, kCertifyDecayEps));
        out.add_margin("phi-max", check_phi_max(s, cfg.phi->phi, cfg.phi->p));
    }
    if (cfg.convex) {
        out.add_margin("convex", check_convex(s, *cfg.convex));
        PhiCertificate derived = to_phi_max(*cfg.convex);
        out.add_certify("derived " + derived.phi.describe(),
                        certify(derived.phi, kCertifyGrid, kCertifyNMax, kCertifyDecayEps));
        out.add_margin("derived-phi-max", check_phi_max(s, derived.phi, derived.p));
    }
    return out.finish("check");
}

// === attract ===

struct AttractFlags {
    std::string config, seed, out, trace, pgm;
    double tol = 0.0; // 0 = unset
    int max_iter = 1000;
    std::size_t max_points = 2'000'000;
};

int cmd_attract(const AttractFlags& flags) {
    RunConfig cfg = load_config(flags.config);
    IfsSystem s = cfg.system();
    Point seed = resolve_seed(flags.seed, cfg, s.box());

    AttractorOptions opt;
    opt.tol = flags.tol > 0.0 ? flags.tol : cfg.tol.value_or(1e-6);
    opt.max_iter = flags.max_iter;
    opt.max_points = flags.max_points;

    int width = 0, height = 0;
    if (!flags.pgm.empty()) {
        if (s.dim() != 2) throw config_error("--pgm needs a two-dimensional system");
        if (flags.out.empty()) throw config_error("--pgm needs --out to derive the image path");
        std::tie(width, height) = parse_raster_size(flags.pgm);
    }

    AttractorResult run = hutchinson_attractor(s, PointSet({seed}, opt.snap), opt);

    std::string suffix = run.converged ? "" : ".partial";
    if (!flags.out.empty()) write_file(flags.out + suffix, run.attractor.to_csv());
    if (width > 0)
        write_file(pgm_path_for(flags.out) + suffix,
                   rasterize_pgm(run.attractor, s.box(), width, height));
    if (!flags.trace.empty()) write_file(flags.trace + suffix, run.trace.to_tsv());

    std::cout << "iterations = " << run.iterations << "\n"
              << "final_step = " << format_double(run.final_step) << "\n"
              << "points = " << run.attractor.size() << "\n";
    if (run.points_capped)
        std::cout << "snap coarsened to " << format_double(run.effective_snap)
                  << " to respect --max-points\n";
    std::cout << "converged = " << (run.converged ? "yes" : "no") << "\n";
    if (!run.converged)
        std::cerr << "did not converge within " << opt.max_iter
                  << " iterations; partial outputs carry a .partial suffix\n";
    return run.converged ? 0 : 1;
}

// === codespace ===

struct CodespaceFlags {
    std::string config, seed, out, trace, cross_check;
    int depth = -1;    // -1 = unset
    double tol = 0.0;  // 0 = unset
};

int cmd_codespace(const CodespaceFlags& flags) {
    RunConfig cfg = load_config(flags.config);
    IfsSystem s = cfg.system();
    Point seed = resolve_seed(flags.seed, cfg, s.box());
    if (flags.depth < -1) throw config_error("--depth must be nonnegative");
    if (!flags.cross_check.empty() && flags.out.empty())
        throw config_error("--cross-check needs --out (both files are re-read from disk)");

    // --depth alone builds the table at that exact depth; with a tolerance the
    // iteration stops early once the sup-norm step falls below it.
    bool tol_mode = flags.tol > 0.0 || flags.depth < 0;
    double tol = flags.tol > 0.0 ? flags.tol : cfg.tol.value_or(1e-3);
    int max_depth = flags.depth >= 0 ? flags.depth : 18;

    CodeFunction g = CodeFunction::constant(s.alphabet(), seed);
    ConvergenceTrace trace;
    auto last = std::chrono::steady_clock::now();
    bool converged = false;
    double final_step = 0.0;
    for (int depth = 1; depth <= max_depth; ++depth) {
        CodeFunction next = code_step(s, g);
        final_step = sup_distance(next, g);
        trace.add(depth, final_step, lap_ms(last));
        g = std::move(next);
        if (tol_mode && final_step < tol) {
            converged = true;
            break;
        }
    }

    if (!flags.out.empty()) write_file(flags.out, g.to_csv());
    if (!flags.trace.empty()) write_file(flags.trace, trace.to_tsv());

    std::cout << "depth = " << g.depth() << "\n"
              << "rows = " << g.rows() << "\n"
              << "final_step = " << format_double(final_step) << "\n";

    if (!flags.cross_check.empty()) {
        PointSet image = table_csv_points(read_file(flags.out));
        PointSet attractor = PointSet::from_csv(read_file(flags.cross_check));
        std::cout << "cross_check_hausdorff = "
                  << format_double(hausdorff(image, attractor)) << "\n";
    }

    if (tol_mode && !converged) {
        std::cerr << "sup step " << format_double(final_step) << " still above "
                  << format_double(tol) << " at depth " << max_depth << "\n";
        return 1;
    }
    return 0;
}

// === project ===

int cmd_project(const std::string& config_path, const std::string& word_text,
                const std::string& seed_flag, double tol_flag) {
    RunConfig cfg = load_config(config_path);
    IfsSystem s = cfg.system();
    Point seed = resolve_seed(seed_flag, cfg, s.box());
    double tol = tol_flag > 0.0 ? tol_flag : cfg.tol.value_or(1e-9);

    PeriodicWord word = parse_periodic_word(word_text, s.alphabet());
    ProjectionOptions opt;
    opt.tol = tol;
    ProjectionResult res = canonical_projection(s, word, seed, opt);

    auto eval = [&](const PeriodicWord& u) {
        return canonical_projection(s, u, seed, opt).point;
    };
    double residual = verify_conjugacy(s, eval, {word});

    std::cout << "word = " << format_word(word) << "\n"
              << "point = " << point_text(res.point) << "\n"
              << "letters = " << res.letters_used << "\n"
              << "final_step = " << format_double(res.final_step) << "\n"
              << "seed_spread = " << format_double(res.seed_spread) << "\n"
              << "conjugacy_residual = " << format_double(residual) << "\n";
    if (!res.converged) {
        std::cerr << "projection did not reach tol " << format_double(tol) << "\n";
        return 1;
    }
    return 0;
}

// === conjecture ===

struct ConjectureFlags {
    std::string config, seed, out;
    double tol = 0.0;
    int depth = -1;
    // Ladder levels with overlapping maps densify fast; a tighter default
    // point cap keeps the per-level attractor runs at desk scale.
    std::size_t max_points = 200'000;
};

constexpr double kFamilyEpsilon = 1e-3;

int cmd_conjecture(const ConjectureFlags& flags) {
    RunConfig cfg = load_config(flags.config);
    if (!cfg.is_ladder())
        throw config_error("'conjecture' needs a ladder document (field 'ladder')");
    Point seed = resolve_seed(flags.seed, cfg, cfg.box);

    FamilyConditionsReport fam =
        check_family_conditions(cfg.ladder, cfg.box, kFamilyEpsilon);
    for (std::size_t i = 0; i < fam.level_sizes.size(); ++i)
        std::cout << "[family] level " << i + 1 << ": " << fam.level_sizes[i]
                  << " maps, image bound " << format_double(fam.image_bounds[i]) << "\n";
    std::cout << "[family] clause a) uniformly bounded images: "
              << (fam.bounded_images ? "ok" : "FAILED") << "\n";
    std::cout << "[family] clause b) shared continuity modulus at eps = "
              << format_double(fam.epsilon) << ": "
              << (fam.equal_uniform_continuity ? "ok" : "FAILED") << " (delta = "
              << format_double(fam.common_delta) << ")\n";
    if (!fam.passed) {
        for (char c : fam.failed_clauses)
            std::cerr << "[family] violated clause " << c << ")\n";
        return 1;
    }

    std::vector<int> depths = cfg.depths;
    if (flags.depth > 0) {
        depths.clear();
        for (int d = 1; d <= flags.depth; ++d) depths.push_back(d);
    }
    if (depths.empty()) depths = {1, 2, 3, 4, 5, 6};

    AttractorOptions opt;
    opt.tol = flags.tol > 0.0 ? flags.tol : cfg.tol.value_or(1e-5);
    opt.max_points = flags.max_points;

    LadderReport report = ladder_experiment(cfg.ladder, cfg.box, seed, opt, depths);
    for (std::size_t i = 0; i < report.attractor_sizes.size(); ++i)
        std::cout << "[ladder] level " << i + 1 << ": attractor "
                  << report.attractor_sizes[i] << " points, converged = "
                  << (report.attractor_converged[i] ? "yes" : "no") << "\n";

    std::string tsv = report.to_tsv();
    if (!flags.out.empty()) {
        write_file(flags.out, tsv);
        std::cout << "report written to " << flags.out << "\n";
    } else {
        std::cout << tsv;
    }

    for (bool ok : report.attractor_converged)
        if (!ok) {
            std::cerr << "an attractor run did not converge; raise --tol or --max-iter\n";
            return 1;
        }
    return 0;
}

// === compare ===

int cmd_compare(const std::string& a_path, const std::string& b_path) {
    PointSet a = PointSet::from_csv(read_file(a_path));
    PointSet b = PointSet::from_csv(read_file(b_path));
    double h = hausdorff(a, b);
    std::cout << "hausdorff = " << format_double(h) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attractors of iterated function systems via set-space and "
                 "code-space fixed-point iteration"};
    app.require_subcommand(1);

    std::string check_config, check_format = "text";
    auto* check = app.add_subcommand("check", "certify the contraction hypotheses");
    check->add_option("config", check_config, "system configuration file")->required();
    check->add_option("--report-format", check_format, "text or structured")
        ->check(CLI::IsMember({"text", "structured"}));

    AttractFlags attract_flags;
    auto* attract = app.add_subcommand("attract", "iterate the set operator to the attractor");
    attract->add_option("config", attract_flags.config, "system configuration file")->required();
    attract->add_option("--tol", attract_flags.tol, "Hausdorff step tolerance")
        ->check(CLI::PositiveNumber);
    attract->add_option("--max-iter", attract_flags.max_iter, "iteration cap")
        ->check(CLI::PositiveNumber);
    attract->add_option("--max-points", attract_flags.max_points,
                        "point cap before snap coarsening")
        ->check(CLI::PositiveNumber);
    attract->add_option("--seed-point", attract_flags.seed, "start point, comma-separated");
    attract->add_option("--out", attract_flags.out, "attractor CSV path");
    attract->add_option("--trace", attract_flags.trace, "convergence trace TSV path");
    attract->add_option("--pgm", attract_flags.pgm, "raster size WIDTHxHEIGHT");

    CodespaceFlags code_flags;
    auto* codespace = app.add_subcommand("codespace", "iterate the code-space operator");
    codespace->add_option("config", code_flags.config, "system configuration file")->required();
    codespace->add_option("--depth", code_flags.depth, "table depth (0 = seed row only)")
        ->check(CLI::NonNegativeNumber);
    codespace->add_option("--tol", code_flags.tol, "sup-norm step tolerance")
        ->check(CLI::PositiveNumber);
    codespace->add_option("--seed-point", code_flags.seed, "start point, comma-separated");
    codespace->add_option("--out", code_flags.out, "word table CSV path");
    codespace->add_option("--trace", code_flags.trace, "convergence trace TSV path");
    codespace->add_option("--cross-check", code_flags.cross_check,
                          "attractor CSV to compare against (re-read from disk)");

    std::string project_config, project_word, project_seed;
    double project_tol = 0.0;
    auto* project = app.add_subcommand("project", "evaluate the canonical projection");
    project->add_option("config", project_config, "system configuration file")->required();
    project->add_option("--word", project_word, "eventually periodic word, e.g. 1(2)")
        ->required();
    project->add_option("--seed-point", project_seed, "start point, comma-separated");
    project->add_option("--tol", project_tol, "step tolerance")->check(CLI::PositiveNumber);

    ConjectureFlags conj_flags;
    auto* conjecture =
        app.add_subcommand("conjecture", "family-conditions check plus truncation ladder");
    conjecture->add_option("config", conj_flags.config, "ladder configuration file")
        ->required();
    conjecture->add_option("--tol", conj_flags.tol, "attractor tolerance")
        ->check(CLI::PositiveNumber);
    conjecture->add_option("--depth", conj_flags.depth, "report depths 1..N")
        ->check(CLI::PositiveNumber);
    conjecture->add_option("--seed-point", conj_flags.seed, "start point, comma-separated");
    conjecture->add_option("--out", conj_flags.out, "report TSV path");
    conjecture->add_option("--max-points", conj_flags.max_points,
                           "point cap before snap coarsening")
        ->check(CLI::PositiveNumber);

    std::string compare_a, compare_b;
    auto* compare = app.add_subcommand("compare", "Hausdorff distance between two CSV clouds");
    compare->add_option("a", compare_a, "first point cloud CSV")->required();
    compare->add_option("b", compare_b, "second point cloud CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*check) return cmd_check(load_config(check_config), check_format);
        if (*attract) return cmd_attract(attract_flags);
        if (*codespace) return cmd_codespace(code_flags);
        if (*project) return cmd_project(project_config, project_word, project_seed, project_tol);
        if (*conjecture) return cmd_conjecture(conj_flags);
        if (*compare) return cmd_compare(compare_a, compare_b);
    } catch (const config_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const cap_exceeded& e) {
        std::cerr << e.what() << "\n"
                  << "reduce --depth or split the run; the word table grows as "
                     "(map count)^depth\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
