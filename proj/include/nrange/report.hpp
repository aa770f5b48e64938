#pragma once

// JSON serialization of analysis, split and probe results, and SVG plots of
// the boundary, the critical curves and the eigenvalue branches.

#include <string>

#include <json.hpp>

#include "nrange/branches.hpp"
#include "nrange/classify.hpp"
#include "nrange/perturb.hpp"
#include "nrange/probe.hpp"

namespace nrange {

nlohmann::json to_json(const SplitReport& r);
nlohmann::json to_json(const Candidate& c);
nlohmann::json to_json(const AnalysisReport& r);
nlohmann::json to_json(const ProbeReport& r);
nlohmann::json to_json(const ConvexityResult& r);

/// Boundary of F(A) (black) with every critical curve z_k(theta) overlaid in
/// its branch colour. Fixed viewBox: bounding box of the boundary + 10%.
std::string boundary_svg(const ComplexMatrix& a, const EigenBranchSet& set);

/// lambda_k(theta) against theta in [0, 2 pi).
std::string branches_svg(const EigenBranchSet& set);

}  // namespace nrange
