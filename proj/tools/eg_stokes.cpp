// eg-stokes: experiment driver for the enriched Galerkin Stokes solver.
//
//   eg-stokes convergence --example ex1 --levels 2..6 --theta 0 --alpha 1.0 --out dir/
//   eg-stokes solvers --example ex1 --levels 3..6 --precond bd,bl,bu,md,ml,mu
//   eg-stokes channel --mesh file.msh --mu 0.01 | --mu-split 1.0,0.01,0.5
//   eg-stokes infsup --levels 2..4 --alpha 10

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "egstokes/harness.hpp"

namespace {

using namespace egs;

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string &s) {
  std::vector<double> out;
  for (const auto &item : split_list(s)) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

ViscositySplit parse_split(const std::string &s) {
  const auto v = parse_doubles(s);
  if (v.size() != 3) throw std::invalid_argument("--mu-split expects top,bottom,y");
  return {v[0], v[1], v[2]};
}

struct Options {
  std::string example = "ex1";
  std::string levels;
  std::string mesh;
  double theta = 0.0;
  double alpha = 1.0;
  double mu = 1.0;
  std::string mu_list;
  std::string mu_split;
  std::string precond;
  double tol = 0.0;
  int max_iters = 1000;
  std::string out;
};

ExperimentConfig make_config(const Options &o) {
  ExperimentConfig c;
  c.example = parse_example(o.example);
  if (!o.levels.empty()) c.levels = parse_levels(o.levels);
  c.mesh_file = o.mesh;
  if (o.theta != -1.0 && o.theta != 0.0 && o.theta != 1.0)
    throw std::invalid_argument("--theta must be -1, 0 or 1");
  c.disc.theta = static_cast<int>(o.theta);
  c.disc.alpha = o.alpha;
  c.mu = o.mu;
  if (!o.mu_list.empty()) c.mu_values = parse_doubles(o.mu_list);
  if (!o.mu_split.empty()) c.mu_split = parse_split(o.mu_split);
  for (const auto &k : split_list(o.precond)) c.preconds.push_back(parse_precond_kind(k));
  if (o.tol > 0.0) c.tol = o.tol;
  c.max_iters = o.max_iters;
  c.out_dir = o.out;
  return c;
}

std::ofstream open_csv(const std::filesystem::path &dir, const std::string &name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw HarnessError("cannot write " + (dir / name).string());
  return f;
}

int cmd_convergence(const Options &o) {
  ExperimentConfig c = make_config(o);
  if (!c.levels) c.levels = LevelRange{2, 6};
  c.validate();
  const auto study = run_convergence(c);
  write_convergence_csv(std::cout, study.rows);
  if (!c.out_dir.empty()) {
    auto f = open_csv(c.out_dir, "convergence_" + o.example + ".csv");
    write_convergence_csv(f, study.rows);
  }
  if (study.failure) {
    std::cerr << "error: " << *study.failure << "\n";
    return 2;
  }
  return 0;
}

int cmd_solvers(const Options &o) {
  ExperimentConfig c = make_config(o);
  if ((c.example == ExampleId::Ex1 || c.example == ExampleId::Ex2) && !c.levels)
    c.levels = LevelRange{3, 6};
  if (c.example == ExampleId::Ex3 && c.mu_values.empty() && o.mu_list.empty())
    c.mu_values = {1.0, 0.1, 0.01, 0.001};
  c.validate();
  const auto cells = run_solver_study(c);
  write_solver_csv(std::cout, cells);
  if (!c.out_dir.empty()) {
    auto f = open_csv(c.out_dir, "solvers_" + o.example + ".csv");
    write_solver_csv(f, cells);
  }
  int failed = 0;
  for (const auto &cell : cells) {
    if (!cell.converged) {
      ++failed;
      std::cerr << "warning: " << cell.label << " " << to_string(cell.kind) << ": " << cell.message << "\n";
    }
  }
  return failed ? 3 : 0;
}

int cmd_channel(const Options &o) {
  ExperimentConfig c = make_config(o);
  c.example = c.mu_split ? ExampleId::Ex4 : ExampleId::Ex3;
  if (c.mesh_file.empty()) throw HarnessError("--mesh is required");
  c.validate();
  const auto res = run_channel(c);
  std::printf("velocity DoFs %zu, pressure DoFs %zu\n", res.velocity_dofs, res.pressure_dofs);
  std::printf("%s: %s after %d iterations, relative residual %.3e, %.2f s\n",
              res.report.preconditioner.c_str(), to_string(res.report.status), res.report.iterations,
              res.report.true_rel_residual, res.report.seconds);
  std::printf("divergence residual %.3e, flux in %.6f out %.6f, cuts %.6f %.6f\n",
              res.divergence_residual, res.inflow, res.outflow, res.left_cut, res.right_cut);
  if (!res.vtk_file.empty()) std::printf("wrote %s\n", res.vtk_file.string().c_str());
  return res.report.converged() ? 0 : 3;
}

int cmd_infsup(const Options &o) {
  ExperimentConfig c = make_config(o);
  if (!c.levels) c.levels = LevelRange{2, 4};
  std::printf("level,h,beta,iterations,residual\n");
  const double mu = c.mu;
  for (int level : c.levels->levels()) {
    const Mesh mesh = generate_unit_square(level, BoundarySpec::all_dirichlet());
    const auto est = estimate_infsup(mesh, c.disc.alpha, [mu](const Vec2 &) { return mu; });
    std::printf("%d,%.6e,%.10f,%d,%.3e\n", level, std::ldexp(1.0, -level), est.beta, est.iterations,
                est.residual);
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Enriched Galerkin Stokes experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App *sub) {
    sub->add_option("--theta", o.theta, "Symmetrization parameter (-1, 0, 1)");
    sub->add_option("--alpha", o.alpha, "Penalty parameter");
    sub->add_option("--tol", o.tol, "Outer relative tolerance");
    sub->add_option("--max-iters", o.max_iters, "Outer iteration limit");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto *conv = app.add_subcommand("convergence", "Error table on uniform meshes");
  conv->add_option("--example", o.example, "ex1 or ex2");
  conv->add_option("--levels", o.levels, "Refinement levels, e.g. 2..6");
  conv->add_option("--mu", o.mu, "Viscosity");
  conv->add_option("--precond", o.precond, "Preconditioner (default bl)");
  common(conv);

  auto *solv = app.add_subcommand("solvers", "Iteration counts per preconditioner");
  solv->add_option("--example", o.example, "ex1, ex2, ex3 or ex4");
  solv->add_option("--levels", o.levels, "Refinement levels for ex1/ex2");
  solv->add_option("--mesh", o.mesh, "Mesh file for ex3/ex4");
  solv->add_option("--mu", o.mu, "Viscosity");
  solv->add_option("--mu-list", o.mu_list, "Viscosities for ex3, comma separated");
  solv->add_option("--mu-split", o.mu_split, "top,bottom,y for ex4");
  solv->add_option("--precond", o.precond, "Comma-separated list (default all)");
  common(solv);

  auto *chan = app.add_subcommand("channel", "Channel flow around the obstacle");
  chan->add_option("--mesh", o.mesh, "Mesh file")->required();
  auto *mu_opt = chan->add_option("--mu", o.mu, "Constant viscosity");
  chan->add_option("--mu-split", o.mu_split, "top,bottom,y viscosity jump")->excludes(mu_opt);
  chan->add_option("--precond", o.precond, "Preconditioner (default bl)");
  common(chan);

  auto *inf = app.add_subcommand("infsup", "Discrete inf-sup constant");
  inf->add_option("--levels", o.levels, "Refinement levels, e.g. 2..4");
  inf->add_option("--mu", o.mu, "Viscosity");
  inf->add_option("--alpha", o.alpha, "Penalty parameter");

  CLI11_PARSE(app, argc, argv);
  try {
    if (conv->parsed()) return cmd_convergence(o);
    if (solv->parsed()) return cmd_solvers(o);
    if (chan->parsed()) return cmd_channel(o);
    if (inf->parsed()) return cmd_infsup(o);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
