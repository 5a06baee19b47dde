#pragma once

#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

#include "dmk/mc_oracle.hpp"
#include "dmk/solver.hpp"

namespace dmk {

using Json = nlohmann::json;

inline constexpr const char* kSchemaTag = "dmk/1";
inline constexpr const char* kToolVersion = "dmk 1.0";

// Filesystem failures throw IoError; JSON parse failures throw SchemaViolation
// with the parser's position diagnostics.
Json load_json_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& content);

// Checks "schema": "dmk/1" and the expected "kind".
void require_schema(const Json& j, const std::string& kind);

DirectionWeightMeasure measure_from_json(const Json& j);
Json measure_to_json(const DirectionWeightMeasure& mu);

HPolytope polytope_from_json(const Json& j);
Json polytope_to_json(const HPolytope& P);

// Star body descriptor object: {"type": "ball"|"ellipsoid"|"polytope_gauge"|
// "radial_table_2d"|"radial_table_3d", ...}.
StarBody star_body_from_json(const Json& j, int dim);
// CLI shorthand: "ball", "ball:R", "cube", "cube:R", a path to a descriptor
// file, or an inline JSON object.
StarBody star_body_from_spec(const std::string& spec, int dim, Json* doc_out = nullptr);

// Density descriptor: {"type":"constant","value":v}, {"type":"affine",
// "base":b,"coeff":c,"axis":[..]} for b + c<u,axis>, or {"type":"cells",
// "resolution":r,"values":[..]} piecewise constant on the discretization cells.
std::function<double(const Vec&)> density_from_json(const Json& j, int n);

struct ProblemSpec {
  int dim = 0;
  double p = 0.0, q = 0.0;
  bool has_measure = false;
  DirectionWeightMeasure mu;
  bool has_density = false;
  std::function<double(const Vec&)> density;
  std::vector<int> resolutions;
  Json qdoc;
  std::optional<StarBody> Q;
  SolveOptions opts;
  std::string input_sha;
};

ProblemSpec parse_problem(const Json& j);

// Canonical serialization: sorted keys, compact separators, floats printed
// with 17 significant digits (non-finite values become null).
std::string canonical_dump(const Json& j);
std::string sha256_hex(const std::string& data);

Json measure_result_to_json(const DualMeasureResult& m);
Json report_to_json(const SolveReport& rep);
Json solution_to_json(const Solution& sol, double p, double q, bool normalized, const Json& qdoc,
                      const std::string& input_sha, const SolveOptions& opts);
Json mc_to_json(const McMeasure& m, double q, long long samples, unsigned long long seed);
Json density_result_to_json(const DensityResult& dr, double p, double q, const Json& qdoc,
                            const std::string& input_sha, const SolveOptions& opts);

// n=2: polygon, origin marker, facet normal arrows scaled by atom mass.
std::string render_svg(const VPolytope& V, const HPolytope& P, const std::vector<double>& atoms);
// n=3: OFF mesh, facet vertex cycles ordered counterclockwise from outside.
std::string render_off(const VPolytope& V);

}  // namespace dmk
