#include <cmath>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dmk/io.hpp"

namespace {

using dmk::Json;

int exit_for(const dmk::Error& e, bool in_solve) {
  switch (e.code()) {
    case dmk::ErrorCode::MeasureOnHemisphere:
      return in_solve ? 5 : 2;
    case dmk::ErrorCode::NotConverged:
      return 3;
    case dmk::ErrorCode::PEqualsQ:
      return 4;
    default:
      return 1;
  }
}

void emit(const Json& doc, const std::string& out) {
  std::string text = dmk::canonical_dump(doc) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    dmk::save_text_file(out, text);
  }
}

struct Cli {
  std::string path, qspec, out, svg;
  double p = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  double rtol = std::numeric_limits<double>::quiet_NaN();
  int max_iters = -1;
  long long samples = 1000000;
  unsigned long long seed = 0;
  bool normalized = false;
};

dmk::DirectionWeightMeasure measure_from_file(const Json& j) {
  require(j.is_object() && j.contains("kind"), dmk::ErrorCode::SchemaViolation,
          "expected a \"measure\" or \"problem\" document");
  if (j["kind"] == "problem") {
    dmk::ProblemSpec ps = dmk::parse_problem(j);
    if (ps.has_measure) return ps.mu;
    return dmk::discretize_density(ps.dim, ps.density, ps.resolutions.front(),
                                   ps.opts.quadrature_rtol);
  }
  dmk::require_schema(j, "measure");
  return dmk::measure_from_json(j);
}

int cmd_validate(const Cli& cli) {
  Json j = dmk::load_json_file(cli.path);
  dmk::DirectionWeightMeasure mu = measure_from_file(j);
  dmk::MeasureValidity mv = dmk::validate_measure(mu);
  Json doc;
  doc["schema"] = dmk::kSchemaTag;
  doc["kind"] = "validation";
  doc["valid"] = mv.valid;
  doc["atoms"] = mu.size();
  if (!mv.valid) {
    Json w = Json::array();
    for (Eigen::Index i = 0; i < mv.witness.size(); ++i) w.push_back(mv.witness[i]);
    doc["witness"] = w;
  }
  emit(doc, "");
  if (!mv.valid) {
    std::cerr << "measure lies in the closed hemisphere of the printed witness direction\n";
    return 2;
  }
  return 0;
}

int cmd_eval(const Cli& cli) {
  Json j = dmk::load_json_file(cli.path);
  dmk::HPolytope P = dmk::polytope_from_json(j);
  int n = P.dim();
  Json qdoc;
  dmk::StarBody Q =
      dmk::star_body_from_spec(cli.qspec.empty() ? "ball" : cli.qspec, n, &qdoc);
  double p = std::isnan(cli.p) ? 2.0 : cli.p;
  double q = std::isnan(cli.q) ? static_cast<double>(n) : cli.q;
  dmk::MeasureOptions mopt;
  if (!std::isnan(cli.rtol)) mopt.rtol = cli.rtol;
  dmk::DualMeasureResult m = dmk::dual_curvature_measure(P, Q, p, q, mopt);

  Json doc;
  doc["schema"] = dmk::kSchemaTag;
  doc["kind"] = "evaluation";
  doc["dim"] = n;
  doc["p"] = p;
  doc["q"] = q;
  doc["Q"] = qdoc;
  Json poly = dmk::polytope_to_json(P);
  poly.erase("schema");
  poly.erase("kind");
  doc["polytope"] = poly;
  doc["measure"] = dmk::measure_result_to_json(m);
  emit(doc, cli.out);
  return 0;
}

int cmd_solve(const Cli& cli) {
  Json j = dmk::load_json_file(cli.path);
  dmk::ProblemSpec ps = dmk::parse_problem(j);
  if (!std::isnan(cli.p)) ps.p = cli.p;
  if (!std::isnan(cli.q)) ps.q = cli.q;
  if (!std::isnan(cli.rtol)) ps.opts.quadrature_rtol = cli.rtol;
  if (cli.max_iters > 0) ps.opts.max_iters = cli.max_iters;
  if (cli.seed != 0) ps.opts.seed = cli.seed;
  if (!cli.qspec.empty()) ps.Q = dmk::star_body_from_spec(cli.qspec, ps.dim, &ps.qdoc);

  dmk::DirectionWeightMeasure mu =
      ps.has_measure ? ps.mu
                     : dmk::discretize_density(ps.dim, ps.density, ps.resolutions.back(),
                                               ps.opts.quadrature_rtol);
  dmk::Solution sol = cli.normalized
                          ? dmk::solve_normalized(mu, *ps.Q, ps.p, ps.q, ps.opts)
                          : dmk::solve(mu, *ps.Q, ps.p, ps.q, ps.opts);
  emit(dmk::solution_to_json(sol, ps.p, ps.q, cli.normalized, ps.qdoc, ps.input_sha, ps.opts),
       cli.out);
  if (!cli.svg.empty()) {
    if (ps.dim == 2) {
      dmk::save_text_file(cli.svg, dmk::render_svg(sol.geometry, sol.polytope, sol.measure.atoms_cq));
    } else {
      dmk::save_text_file(cli.svg, dmk::render_off(sol.geometry));
    }
  }
  if (sol.report.status != dmk::SolveStatus::Converged) {
    std::cerr << "solver did not converge (status written to the solution document)\n";
    return 3;
  }
  return 0;
}

int cmd_oracle(const Cli& cli) {
  Json j = dmk::load_json_file(cli.path);
  dmk::HPolytope P = dmk::polytope_from_json(j);
  int n = P.dim();
  dmk::StarBody Q = dmk::star_body_from_spec(cli.qspec.empty() ? "ball" : cli.qspec, n, nullptr);
  double q = std::isnan(cli.q) ? static_cast<double>(n) : cli.q;
  dmk::McMeasure m = dmk::mc_dual_curvature(P, Q, q, cli.samples, cli.seed);
  emit(dmk::mc_to_json(m, q, cli.samples, cli.seed), cli.out);
  return 0;
}

int cmd_approx(const Cli& cli) {
  Json j = dmk::load_json_file(cli.path);
  dmk::ProblemSpec ps = dmk::parse_problem(j);
  require(ps.has_density, dmk::ErrorCode::SchemaViolation,
          "approx: the problem document must define a \"density\"");
  if (!std::isnan(cli.p)) ps.p = cli.p;
  if (!std::isnan(cli.q)) ps.q = cli.q;
  if (!std::isnan(cli.rtol)) ps.opts.quadrature_rtol = cli.rtol;
  if (cli.max_iters > 0) ps.opts.max_iters = cli.max_iters;
  if (cli.seed != 0) ps.opts.seed = cli.seed;
  if (!cli.qspec.empty()) ps.Q = dmk::star_body_from_spec(cli.qspec, ps.dim, &ps.qdoc);

  dmk::DensityResult dr =
      dmk::solve_density(ps.dim, ps.density, ps.resolutions, *ps.Q, ps.p, ps.q, ps.opts);
  emit(dmk::density_result_to_json(dr, ps.p, ps.q, ps.qdoc, ps.input_sha, ps.opts), cli.out);
  for (const dmk::DensityStage& st : dr.stages) {
    if (st.solution.report.status != dmk::SolveStatus::Converged) {
      std::cerr << "stage at resolution " << st.resolution << " did not converge\n";
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete Lp dual Minkowski problem toolkit"};
  app.require_subcommand(1);
  Cli cli;

  CLI::App* validate = app.add_subcommand("validate", "hemisphere check for a measure");
  validate->add_option("file", cli.path, "measure or problem document")->required();

  CLI::App* eval = app.add_subcommand("eval", "dual curvature measure of a polytope");
  eval->add_option("file", cli.path, "polytope document")->required();
  eval->add_option("--Q", cli.qspec, "star body (ball, ball:R, cube, cube:R, file.json, inline)");
  eval->add_option("--p", cli.p, "Lp exponent (default 2)");
  eval->add_option("--q", cli.q, "dual volume exponent (default n)");
  eval->add_option("--rtol", cli.rtol, "quadrature relative tolerance");
  eval->add_option("--out", cli.out, "output path (default stdout)");

  CLI::App* solve = app.add_subcommand("solve", "solve Cpq(P,Q,.) = mu for P");
  solve->add_option("file", cli.path, "problem document")->required();
  solve->add_option("--p", cli.p, "override p");
  solve->add_option("--q", cli.q, "override q");
  solve->add_option("--Q", cli.qspec, "override the star body");
  solve->add_option("--out", cli.out, "solution document path (default stdout)");
  solve->add_option("--svg", cli.svg, "visualization path (SVG for n=2, OFF mesh for n=3)");
  solve->add_option("--seed", cli.seed, "seed recorded for reproducibility");
  solve->add_option("--rtol", cli.rtol, "quadrature relative tolerance");
  solve->add_option("--max-iters", cli.max_iters, "iteration budget");
  solve->add_flag("--normalized", cli.normalized, "solve Vq^-1 Cpq = mu (allows p = q)");

  CLI::App* oracle = app.add_subcommand("oracle", "Monte-Carlo estimate of Vq and atoms");
  oracle->add_option("file", cli.path, "polytope document")->required();
  oracle->add_option("--Q", cli.qspec, "star body");
  oracle->add_option("--q", cli.q, "dual volume exponent (default n)");
  oracle->add_option("--samples", cli.samples, "sample count (default 1e6)");
  oracle->add_option("--seed", cli.seed, "RNG seed");
  oracle->add_option("--out", cli.out, "output path (default stdout)");

  CLI::App* approx = app.add_subcommand("approx", "density discretization pipeline");
  approx->add_option("file", cli.path, "problem document with a density")->required();
  approx->add_option("--p", cli.p, "override p");
  approx->add_option("--q", cli.q, "override q");
  approx->add_option("--Q", cli.qspec, "override the star body");
  approx->add_option("--out", cli.out, "output path (default stdout)");
  approx->add_option("--seed", cli.seed, "seed recorded for reproducibility");
  approx->add_option("--rtol", cli.rtol, "quadrature relative tolerance");
  approx->add_option("--max-iters", cli.max_iters, "iteration budget per stage");

  CLI11_PARSE(app, argc, argv);

  bool in_solve = solve->parsed() || approx->parsed();
  try {
    if (validate->parsed()) return cmd_validate(cli);
    if (eval->parsed()) return cmd_eval(cli);
    if (solve->parsed()) return cmd_solve(cli);
    if (oracle->parsed()) return cmd_oracle(cli);
    if (approx->parsed()) return cmd_approx(cli);
  } catch (const dmk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e, in_solve);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
