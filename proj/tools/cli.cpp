#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nrange/classify.hpp"
#include "nrange/corpus.hpp"
#include "nrange/matrix_io.hpp"
#include "nrange/probe.hpp"
#include "nrange/report.hpp"

namespace nrange::cli {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
    std::size_t grid = kDefaultGridCount;
    double tol = kDefaultTol;
    int max_split_order = kDefaultMaxSplitOrder;
    double delta = kDefaultFitDelta;
    double epsilon = 0.05;
    std::size_t samples = 20000;
    std::uint64_t seed = 1;
    std::string out;
    std::string format;

    AnalysisOptions analysis() const { return {grid, tol, max_split_order, delta}; }
};

void validate(const RunConfig& c) {
    if (c.grid < kMinGridCount) throw InputError("--grid must be at least " + std::to_string(kMinGridCount));
    if (c.max_split_order < 3) throw InputError("--max-split-order must be at least 3");
    if (!(c.delta > 0.0 && c.delta <= 0.1)) throw InputError("--delta must lie in (0, 0.1]");
    if (!(c.tol > 0.0)) throw InputError("--tol must be positive");
    if (!(c.epsilon > 0.0 && c.epsilon <= 0.5)) throw InputError("--epsilon must lie in (0, 0.5]");
    if (c.samples == 0) throw InputError("--samples must be positive");
}

void apply_seed_env(RunConfig& c) {
    if (const char* env = std::getenv("NRANGE_SEED")) {
        try {
            c.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw InputError(std::string("NRANGE_SEED is not an unsigned integer: ") + env);
        }
    }
}

Complex parse_point(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InputError("point must be given as \"re,im\", got \"" + s + "\"");
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string re = s.substr(0, comma), im = s.substr(comma + 1);
        const double x = std::stod(re, &p1), y = std::stod(im, &p2);
        if (p1 != re.size() || p2 != im.size()) throw std::invalid_argument("trailing");
        return {x, y};
    } catch (const std::exception&) {
        throw InputError("point must be given as \"re,im\", got \"" + s + "\"");
    }
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

void add_analysis_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--grid", c.grid, "angle grid size (>= 360)");
    cmd->add_option("--tol", c.tol, "exceptional-point tolerance");
    cmd->add_option("--max-split-order", c.max_split_order, "highest Taylor order fitted (>= 3)");
    cmd->add_option("--delta", c.delta, "Taylor fit step in theta, (0, 0.1]");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inverse continuity of the numerical range map f_A(x) = x*Ax", "nrange"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string matrix_file, point, example_name;
    corpus::Example1Params p1;
    corpus::Example3Params p3;

    auto* analyze = app.add_subcommand("analyze", "classify boundary points and report continuity verdicts");
    analyze->add_option("matrix", matrix_file, "matrix JSON file")->required();
    add_analysis_flags(analyze, cfg);
    analyze->add_option("--out", cfg.out, "output file (default stdout)");
    analyze->add_option("--format", cfg.format, "json")->check(CLI::IsMember({"json"}));

    auto* plot = app.add_subcommand("plot", "SVG of boundary and critical curves, SVG of branches, CSV");
    plot->add_option("matrix", matrix_file, "matrix JSON file")->required();
    plot->add_option("--grid", cfg.grid, "angle grid size (>= 360)");
    plot->add_option("--out", cfg.out, "output prefix (default: matrix file stem)");
    plot->add_option("--format", cfg.format, "svg or csv (default both)")->check(CLI::IsMember({"svg", "csv"}));

    auto* probe = app.add_subcommand("probe", "empirical openness of f_A at the preimages of a boundary point");
    probe->add_option("matrix", matrix_file, "matrix JSON file")->required();
    probe->add_option("z,--z", point, "boundary point as re,im")->required();
    add_analysis_flags(probe, cfg);
    probe->add_option("--epsilon", cfg.epsilon, "ball radius in (0, 0.5]");
    probe->add_option("--samples", cfg.samples, "ball samples per preimage");
    probe->add_option("--seed", cfg.seed, "sampling seed (NRANGE_SEED overrides)");
    probe->add_option("--out", cfg.out, "output file (default stdout)");
    probe->add_option("--format", cfg.format, "json")->check(CLI::IsMember({"json"}));

    auto* examples = app.add_subcommand("examples", "write the built-in matrices as JSON");
    examples->add_option("name", example_name, "example name (default: all)");
    examples->add_option("--k1", p1.k1);
    examples->add_option("--k2", p1.k2);
    examples->add_option("--r", p1.r);
    examples->add_option("--w", p3.w);
    examples->add_option("--y", p3.y);
    examples->add_option("--xi", p3.xi);
    examples->add_option("--eta", p3.eta);
    examples->add_option("--c", p3.c);
    examples->add_option("--out", cfg.out, "output directory (single example: stdout if omitted)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        apply_seed_env(cfg);
        validate(cfg);
        if (analyze->parsed()) {
            const ComplexMatrix a = load_matrix_file(matrix_file);
            const AnalysisReport rep = analyze_all(a, cfg.analysis());
            emit(to_json(rep).dump(2) + "\n", cfg.out, out);
        } else if (plot->parsed()) {
            const ComplexMatrix a = load_matrix_file(matrix_file);
            const EigenBranchSet set = trace_branches(hermitian_parts(a), AngleGrid(cfg.grid));
            const std::string prefix = cfg.out.empty() ? fs::path(matrix_file).stem().string() : cfg.out;
            if (cfg.format.empty() || cfg.format == "svg") {
                emit(boundary_svg(a, set), prefix + "_boundary.svg", out);
                emit(branches_svg(set), prefix + "_branches.svg", out);
                out << prefix << "_boundary.svg\n" << prefix << "_branches.svg\n";
            }
            if (cfg.format.empty() || cfg.format == "csv") {
                std::ostringstream csv;
                write_branches_csv(csv, set, a);
                emit(csv.str(), prefix + "_branches.csv", out);
                out << prefix << "_branches.csv\n";
            }
        } else if (probe->parsed()) {
            const ComplexMatrix a = load_matrix_file(matrix_file);
            const Complex z = parse_point(point);
            ProbeOptions po;
            po.epsilon = cfg.epsilon;
            po.samples = cfg.samples;
            po.seed = cfg.seed;
            const ProbeReport rep = probe_point(a, z, po);
            const Candidate analytic = analyze_point(a, z, cfg.analysis());
            nlohmann::json j = to_json(rep);
            j["seed"] = cfg.seed;
            j["epsilon"] = cfg.epsilon;
            j["samples"] = cfg.samples;
            j["analytic"] = to_json(analytic);
            j["agreement"] = rep.empirical_strong == analytic.verdict.strong &&
                             rep.empirical_weak == analytic.verdict.weak;
            emit(j.dump(2) + "\n", cfg.out, out);
        } else if (examples->parsed()) {
            if (!example_name.empty() && cfg.out.empty()) {
                out << corpus::example_json(example_name, p1, p3).dump(2) << "\n";
            } else {
                const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
                fs::create_directories(dir);
                std::vector<std::string> names =
                    example_name.empty() ? corpus::example_names() : std::vector<std::string>{example_name};
                for (const auto& name : names) {
                    const auto path = (dir / (name + ".json")).string();
                    emit(corpus::example_json(name, p1, p3).dump(2) + "\n", path, out);
                    out << path << "\n";
                }
            }
        }
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const PreconditionError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

}  // namespace nrange::cli
