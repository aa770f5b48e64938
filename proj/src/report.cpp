#include "nrange/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "nrange/matrix_io.hpp"

namespace nrange {

namespace {

using nlohmann::json;

const char* holds(bool b) { return b ? "holds" : "fails"; }

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct Frame {
    double x0, y0, w, h;  // viewBox in plot coordinates (y already flipped)
};

Frame frame_for(double xmin, double xmax, double ymin, double ymax) {
    double w = xmax - xmin, h = ymax - ymin;
    const double span = std::max({w, h, 1e-9});
    if (w < 1e-3 * span) w = 1e-3 * span;
    if (h < 1e-3 * span) h = 1e-3 * span;
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    w *= 1.2;
    h *= 1.2;
    return {cx - 0.5 * w, -(cy + 0.5 * h), w, h};
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* colour, double width,
                     bool closed) {
    std::string s = closed ? "<polygon" : "<polyline";
    s += " fill=\"none\" stroke=\"";
    s += colour;
    s += "\" stroke-width=\"" + fmt(width) + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += fmt(pts[i].first) + "," + fmt(-pts[i].second);
    }
    s += "\"/>\n";
    return s;
}

std::string header(const Frame& f) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt(f.x0) + " " + fmt(f.y0) + " " + fmt(f.w) +
           " " + fmt(f.h) + "\" width=\"640\" height=\"" + fmt(640.0 * f.h / f.w) + "\">\n";
}

}  // namespace

json to_json(const SplitReport& r) {
    json j;
    j["theta0"] = r.theta0;
    j["group"] = r.group;
    j["order"] = r.split_order ? json(*r.split_order) : json(nullptr);
    j["parity"] = to_string(r.parity);
    j["minimal_branch_same_both_sides"] = r.minimal_branch_same_both_sides;
    json coeffs = json::array();
    for (Eigen::Index b = 0; b < r.coefficients.rows(); ++b) {
        json row = json::array();
        for (Eigen::Index k = 0; k < r.coefficients.cols(); ++k) row.push_back(r.coefficients(b, k));
        coeffs.push_back(row);
    }
    j["coefficients"] = coeffs;
    json thr = json::array();
    for (Eigen::Index k = 0; k < r.order_threshold.size(); ++k) thr.push_back(r.order_threshold(k));
    j["order_threshold"] = thr;
    j["residual_scale"] = r.residual_scale;
    j["delta"] = r.delta;
    j["max_order"] = r.max_order;
    j["exact_max_deviation"] = r.exact_max_deviation ? real_or_null(*r.exact_max_deviation) : json(nullptr);
    j["flags"] = r.flags;
    return j;
}

json to_json(const Candidate& c) {
    const auto& rec = c.record;
    const auto& v = c.verdict;
    json j;
    j["z"] = complex_to_json(rec.z);
    j["theta0"] = rec.theta0;
    j["kind"] = to_string(rec.kind);
    j["multiplicity"] = rec.multiplicity;
    j["multiply_generated"] = rec.multiply_generated;
    j["isolated_mg"] = rec.isolated_mg;
    j["flat_portion"] = rec.flat_index ? json(*rec.flat_index) : json(nullptr);
    if (v.split) {
        j["split"] = to_json(*v.split);
    } else {
        j["split"] = {{"order", nullptr}, {"parity", "none"}};
    }
    j["strong"] = holds(v.strong);
    j["weak"] = holds(v.weak);
    j["clause"] = to_string(v.clause);
    std::vector<std::string> flags = rec.flags;
    flags.insert(flags.end(), v.flags.begin(), v.flags.end());
    j["flags"] = flags;
    return j;
}

json to_json(const AnalysisReport& r) {
    json j;
    j["matrix"] = matrix_to_json(r.matrix);
    j["irreducible"] = r.irreducible;
    j["options"] = {{"grid", r.options.grid_count},
                    {"tol", r.options.tol},
                    {"max_split_order", r.options.max_split_order},
                    {"fit_delta", r.options.fit_delta}};
    j["diameter"] = r.diameter;
    json eps = json::array();
    for (const auto& ep : r.exceptional_points)
        eps.push_back({{"theta0", ep.theta0},
                       {"group", ep.group},
                       {"value", ep.value},
                       {"gap_residual", ep.gap_residual},
                       {"minimal", ep.minimal()}});
    j["exceptional_points"] = eps;
    json flats = json::array();
    for (const auto& fp : r.flat_portions)
        flats.push_back({{"theta", fp.theta},
                         {"start", complex_to_json(fp.start)},
                         {"end", complex_to_json(fp.end)},
                         {"branches", fp.branches}});
    j["flat_portions"] = flats;
    json cands = json::array();
    std::size_t weak_fail = 0;
    for (const auto& c : r.candidates) {
        cands.push_back(to_json(c));
        if (!c.verdict.weak) ++weak_fail;
    }
    j["candidates"] = cands;
    j["summary"] = {{"candidates", r.candidates.size()},
                    {"strong_failures", r.failure_count()},
                    {"weak_failures", weak_fail},
                    {"elsewhere", "strong=holds (non-round-or-generic)"}};
    return j;
}

json to_json(const ProbeReport& r) {
    json j;
    j["z"] = complex_to_json(r.z);
    j["theta0"] = r.theta0;
    json targets = json::array();
    for (const auto& t : r.targets)
        targets.push_back({{"side", t.side < 0 ? "left" : "right"},
                           {"target", complex_to_json(t.target)},
                           {"segment", t.segment},
                           {"reference_theta", t.reference_theta}});
    j["targets"] = targets;
    json pts = json::array();
    for (std::size_t i = 0; i < r.fiber.points.size(); ++i) {
        const auto& x = r.fiber.points[i];
        json vec = json::array();
        for (Eigen::Index k = 0; k < x.size(); ++k) vec.push_back(complex_to_json(x(k)));
        json p = {{"x", vec}, {"construction", r.fiber.construction[i]}};
        if (i < r.results.size()) {
            const auto& o = r.results[i];
            p["covers_left_arc"] = o.covers_left_arc;
            p["covers_right_arc"] = o.covers_right_arc;
            p["left_distance"] = o.left_distance;
            p["right_distance"] = o.right_distance;
        }
        pts.push_back(p);
    }
    j["fiber"] = pts;
    j["coverage_tol"] = r.results.empty() ? 0.0 : r.results.front().coverage_tol;
    j["empirical"] = {{"strong", holds(r.empirical_strong)}, {"weak", holds(r.empirical_weak)}};
    return j;
}

json to_json(const ConvexityResult& r) {
    return {{"max_hull_violation", r.max_hull_violation}, {"tol", r.tol}, {"pass", r.pass}, {"probes", r.probes}};
}

std::string boundary_svg(const ComplexMatrix& a, const EigenBranchSet& set) {
    const std::vector<Complex> boundary = trace_boundary(a, set.grid);
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& z : boundary) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
    }
    const Frame f = frame_for(xmin, xmax, ymin, ymax);
    const double stroke = 0.003 * std::max(f.w, f.h);
    std::string s = header(f);
    for (Eigen::Index k = 0; k < set.branch_count(); ++k) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& z : critical_curve(set, a, static_cast<int>(k))) pts.emplace_back(z.real(), z.imag());
        s += polyline(pts, kPalette[static_cast<std::size_t>(k) % kPalette.size()], stroke, true);
    }
    std::vector<std::pair<double, double>> bpts;
    for (const auto& z : boundary) bpts.emplace_back(z.real(), z.imag());
    s += polyline(bpts, "#000000", 2.0 * stroke, true);
    s += "</svg>\n";
    return s;
}

std::string branches_svg(const EigenBranchSet& set) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double lo = set.values.minCoeff(), hi = set.values.maxCoeff();
    const Frame f = frame_for(0.0, two_pi, lo, hi);
    const double stroke = 0.003 * std::max(f.w, f.h);
    std::string s = header(f);
    for (Eigen::Index k = 0; k < set.branch_count(); ++k) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t j = 0; j < set.grid.count(); ++j)
            pts.emplace_back(set.grid[j], set.values(static_cast<Eigen::Index>(j), k));
        s += polyline(pts, kPalette[static_cast<std::size_t>(k) % kPalette.size()], stroke, false);
    }
    s += "</svg>\n";
    return s;
}

}  // namespace nrange
