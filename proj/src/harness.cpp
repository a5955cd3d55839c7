#include "egstokes/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace egs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int parse_int(const std::string &s, const std::string &whole) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("bad level range '" + whole + "'");
  return v;
}

std::string fraction_label(int level) { return "1/" + std::to_string(1 << level); }

Problem problem_for(const ExperimentConfig &config, double mu) {
  if (config.example == ExampleId::Ex4)
    return builtin_problem(ExampleId::Ex4, 1.0, config.mu_split.value_or(ViscositySplit{}));
  return builtin_problem(config.example, mu);
}

double rate(double coarse, double fine) {
  if (coarse <= 0.0 || fine <= 0.0) return 0.0;
  return std::log2(coarse / fine);
}

}  // namespace

std::vector<int> LevelRange::levels() const {
  std::vector<int> out;
  for (int l = first; l <= last; ++l) out.push_back(l);
  return out;
}

LevelRange parse_levels(const std::string &text) {
  LevelRange r;
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    r.first = r.last = parse_int(text, text);
  } else {
    r.first = parse_int(text.substr(0, dots), text);
    r.last = parse_int(text.substr(dots + 2), text);
  }
  if (r.first < 1 || r.last < r.first) throw std::invalid_argument("bad level range '" + text + "'");
  return r;
}

void ExperimentConfig::validate() const {
  disc.validate();
  const bool channel = example == ExampleId::Ex3 || example == ExampleId::Ex4;
  if (channel && mesh_file.empty())
    throw HarnessError(std::string(to_string(example)) + " needs a mesh file");
  if (!channel && !levels)
    throw HarnessError(std::string(to_string(example)) + " needs a level range");
  if (!(mu > 0.0)) throw HarnessError("viscosity must be positive");
  for (double m : mu_values)
    if (!(m > 0.0)) throw HarnessError("viscosity must be positive");
  if (mu_split && (!(mu_split->mu_top > 0.0) || !(mu_split->mu_bottom > 0.0)))
    throw HarnessError("viscosity must be positive");
  if (tol && !(*tol > 0.0)) throw HarnessError("tolerance must be positive");
  if (max_iters < 1) throw HarnessError("max_iters must be at least 1");
}

ConvergenceStudy run_convergence(const ExperimentConfig &config,
                                 const std::optional<Problem> &problem) {
  if (!config.levels) throw HarnessError("convergence study needs a level range");
  if (!problem && config.example == ExampleId::Custom)
    throw HarnessError("the custom example needs a problem definition");
  const Problem pr = problem ? *problem : problem_for(config, config.mu);
  if (pr.needs_mesh_file) throw HarnessError("convergence studies run on the unit square only");
  if (!pr.spec.has_exact()) throw HarnessError("convergence study needs an exact solution");
  const PrecondKind kind = config.preconds.empty() ? PrecondKind::BL : config.preconds.front();

  ConvergenceStudy study;
  for (int level : config.levels->levels()) {
    const auto t0 = Clock::now();
    const Mesh mesh = generate_unit_square(level, pr.bc);
    const BlockSystem sys = assemble_system(mesh, config.disc, pr.spec);
    StokesSolveOptions opts;
    opts.outer.rel_tol = config.tol.value_or(1e-10);
    opts.outer.max_iters = config.max_iters;
    StokesSolution sol;
    try {
      sol = solve_stokes(sys, kind, opts);
    } catch (const SolverError &e) {
      study.failure = "level " + std::to_string(level) + ": " + e.what();
      return study;
    }
    if (!sol.report.converged()) {
      std::ostringstream msg;
      msg << "level " << level << ": outer solve " << to_string(sol.report.status) << " after "
          << sol.report.iterations << " iterations";
      study.failure = msg.str();
      return study;
    }
    const ErrorNorms err =
        errors_vs_exact(mesh, sys.dofs, sol.u, sol.p, pr.spec, config.disc.alpha, sys.mu_cells);
    ConvergenceRow row;
    row.h = std::ldexp(1.0, -level);
    row.velocity_dofs = sys.n_u();
    row.pressure_dofs = sys.n_p();
    row.energy_error = err.energy;
    row.pressure_error = err.pressure_l2;
    if (!study.rows.empty()) {
      row.velocity_rate = rate(study.rows.back().energy_error, row.energy_error);
      row.pressure_rate = rate(study.rows.back().pressure_error, row.pressure_error);
    }
    row.iterations = sol.report.iterations;
    row.seconds = seconds_since(t0);
    study.rows.push_back(row);
  }
  return study;
}

void write_convergence_csv(std::ostream &out, const std::vector<ConvergenceRow> &rows) {
  out << "h,velocity_dofs,energy_error,velocity_rate,pressure_dofs,pressure_error,pressure_rate\n";
  char buf[256];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf, "%.6e,%zu,%.6e,%.4f,%zu,%.6e,%.4f\n", r.h, r.velocity_dofs,
                  r.energy_error, r.velocity_rate, r.pressure_dofs, r.pressure_error,
                  r.pressure_rate);
    out << buf;
  }
}

std::vector<SolverCell> run_solver_study(const ExperimentConfig &config) {
  config.validate();
  const auto kinds = config.preconds.empty() ? all_precond_kinds() : config.preconds;

  struct Case {
    std::string label;
    int level;
    double mu;
    Problem problem;
  };
  std::vector<Case> cases;
  if (config.example == ExampleId::Ex1 || config.example == ExampleId::Ex2) {
    for (int level : config.levels->levels())
      cases.push_back({fraction_label(level), level, config.mu, problem_for(config, config.mu)});
  } else if (config.example == ExampleId::Ex3) {
    const auto mus = config.mu_values.empty() ? std::vector<double>{config.mu} : config.mu_values;
    for (double mu : mus) {
      std::ostringstream label;
      label << "mu=" << mu;
      cases.push_back({label.str(), 0, mu, problem_for(config, mu)});
    }
  } else if (config.example == ExampleId::Ex4) {
    cases.push_back({"discontinuous", 0, 0.0, problem_for(config, 1.0)});
  } else {
    throw HarnessError("solver studies need a built-in example");
  }

  std::vector<SolverCell> cells;
  for (const auto &c : cases) {
    const Mesh mesh = c.problem.needs_mesh_file ? import_mesh(config.mesh_file, c.problem.bc)
                                                : generate_unit_square(c.level, c.problem.bc);
    const double h = c.problem.needs_mesh_file ? mesh.mesh_size() : std::ldexp(1.0, -c.level);
    const BlockSystem sys = assemble_system(mesh, config.disc, c.problem.spec);
    const auto vprec = EgVelocityPreconditioner::from_system(sys);
    for (PrecondKind kind : kinds) {
      SolverCell cell;
      cell.label = c.label;
      cell.h = h;
      cell.mu = c.mu;
      cell.kind = kind;
      StokesSolveOptions opts;
      opts.outer.rel_tol = config.tol.value_or(1e-6);
      opts.outer.max_iters = config.max_iters;
      const auto t0 = Clock::now();
      try {
        const auto sol = solve_stokes(sys, kind, vprec, opts);
        cell.iterations = sol.report.iterations;
        cell.converged = sol.report.converged();
        if (!cell.converged) cell.message = to_string(sol.report.status);
      } catch (const std::exception &e) {
        cell.converged = false;
        cell.message = e.what();
      }
      cell.seconds = seconds_since(t0);
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_solver_csv(std::ostream &out, const std::vector<SolverCell> &cells) {
  out << "case,h,mu,precond,iterations,seconds,converged\n";
  char buf[256];
  for (const auto &c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%.6e,%.6e,%s,%d,%.3f,%d\n", c.label.c_str(), c.h, c.mu,
                  to_string(c.kind), c.iterations, c.seconds, c.converged ? 1 : 0);
    out << buf;
  }
}

FluxSummary region_flux(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
                        const VectorField &g, const std::function<bool(const Vec2 &)> &in_region) {
  std::vector<char> inside(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) inside[c] = in_region(mesh.cell_centroids[c]);

  // Three-point Gauss is exact for the linear traces and the quadratic inflow.
  static constexpr std::array<double, 3> t{0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
  static constexpr std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  FluxSummary out;
  for (const auto &f : mesh.facets) {
    const bool plus_in = inside[static_cast<std::size_t>(f.plus_cell)];
    if (f.interior()) {
      const bool minus_in = inside[static_cast<std::size_t>(*f.minus_cell)];
      if (plus_in == minus_in) continue;
      double flux = 0.0;
      for (int q = 0; q < 3; ++q) {
        const Vec2 x = mesh.facet_point(f, t[q]);
        const Vec2 avg = 0.5 * (eval_velocity(mesh, dofs, u, f.plus_cell, x) +
                                eval_velocity(mesh, dofs, u, *f.minus_cell, x));
        flux += w[q] * dot(avg, f.normal);
      }
      // n_e points out of T+.
      out.cut += (plus_in ? 1.0 : -1.0) * f.length * flux;
    } else if (plus_in) {
      double flux = 0.0;
      for (int q = 0; q < 3; ++q) {
        const Vec2 x = mesh.facet_point(f, t[q]);
        const Vec2 v = f.dirichlet() ? g(x) : eval_velocity(mesh, dofs, u, f.plus_cell, x);
        flux += w[q] * dot(v, f.normal);
      }
      out.boundary += f.length * flux;
    }
  }
  return out;
}

double ChannelResult::flux_imbalance() const {
  const double d = std::max({std::abs(left_cut - inflow), std::abs(right_cut - outflow),
                             std::abs(inflow - outflow)});
  return d / std::abs(inflow);
}

ChannelResult run_channel(const ExperimentConfig &config, StokesSolution *solution,
                          Mesh *mesh_out) {
  if (config.mesh_file.empty()) throw HarnessError("channel run needs a mesh file");
  const ExampleId id = config.mu_split ? ExampleId::Ex4 : ExampleId::Ex3;
  const Problem pr = builtin_problem(id, config.mu, config.mu_split.value_or(ViscositySplit{}));
  const Mesh mesh = import_mesh(config.mesh_file, pr.bc);
  const BlockSystem sys = assemble_system(mesh, config.disc, pr.spec);
  StokesSolveOptions opts;
  opts.outer.rel_tol = config.tol.value_or(1e-6);
  opts.outer.max_iters = config.max_iters;
  const PrecondKind kind = config.preconds.empty() ? PrecondKind::BL : config.preconds.front();
  StokesSolution sol = solve_stokes(sys, kind, opts);

  ChannelResult res;
  res.report = sol.report;
  res.velocity_dofs = sys.n_u();
  res.pressure_dofs = sys.n_p();
  std::vector<double> bu(sys.n_p());
  sys.B.multiply(sol.u.coeffs, bu);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < bu.size(); ++t) {
    num = std::max(num, std::abs(bu[t] - sys.rhs_p[t]));
    den = std::max(den, std::abs(sys.rhs_p[t]));
  }
  res.divergence_residual = den > 0.0 ? num / den : num;
  const auto left = region_flux(mesh, sys.dofs, sol.u, pr.spec.g, [](const Vec2 &x) { return x.x < 0.3; });
  const auto right = region_flux(mesh, sys.dofs, sol.u, pr.spec.g, [](const Vec2 &x) { return x.x > 0.7; });
  res.inflow = -left.boundary;
  res.outflow = right.boundary;
  res.left_cut = left.cut;
  res.right_cut = -right.cut;

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    res.vtk_file = config.out_dir / "channel.vtk";
    write_vtk(mesh, sys.dofs, sol.u, sol.p, res.vtk_file);
  }
  if (solution) *solution = std::move(sol);
  if (mesh_out) *mesh_out = mesh;
  return res;
}

InfSupEstimate estimate_infsup(const Mesh &mesh, double alpha, const ScalarField &mu,
                               const InfSupOptions &options) {
  if (!mesh.has_dirichlet()) throw SolverError("inf-sup estimate needs a Dirichlet boundary");
  const DofMap dofs = DofMap::build(mesh);
  const auto mu_cells = cell_viscosity(mesh, mu);
  const SparseMatrix ae = assemble_energy_gram(mesh, dofs, alpha, mu_cells);
  const SparseMatrix b = assemble_b(mesh, dofs);
  const SparseMatrix bt = b.transpose();
  const std::size_t np = dofs.n_p(), nu = dofs.n_u();
  const bool mean_zero = dofs.mean_zero_pressure;

  // Work with D^{-1/2} S D^{-1/2}, D = M_p / (2 mu); its null vector is D^{1/2} 1.
  std::vector<double> dsqrt(np), null(np);
  for (std::size_t t = 0; t < np; ++t) dsqrt[t] = std::sqrt(mesh.cell_areas[t] / (2.0 * mu_cells[t]));
  const double nn = vec::norm2(dsqrt);
  for (std::size_t t = 0; t < np; ++t) null[t] = dsqrt[t] / nn;
  auto deflate = [&](std::span<double> x) {
    if (!mean_zero) return;
    const double c = vec::dot(x, null);
    vec::axpy(-c, null, x);
  };

  const EgVelocityPreconditioner hprec(ae, ae.leading_block(dofs.n_cg()), dofs.n_vertices);
  KrylovConfig inner;
  inner.rel_tol = options.inner_tol;
  inner.max_iters = 2000;
  std::vector<double> tmp_u(nu);
  LinearOperator schur = [&](std::span<const double> x, std::span<double> y) {
    std::vector<double> q(np);
    for (std::size_t t = 0; t < np; ++t) q[t] = x[t] / dsqrt[t];
    bt.multiply(q, tmp_u);
    const auto r = pcg(as_operator(ae), [&](std::span<const double> a, std::span<double> z) { hprec.apply(a, z); },
                       tmp_u, inner);
    if (!r.report.converged()) throw SolverError("energy-matrix solve failed in inf-sup estimate");
    b.multiply(r.solution, y);
    for (std::size_t t = 0; t < np; ++t) y[t] /= dsqrt[t];
    deflate(y);
  };

  // Lanczos with full reorthogonalization on the deflated operator. The
  // smallest eigenvalues come in close pairs, which stalls plain inverse
  // iteration; the extreme Ritz value converges quickly here.
  const std::size_t dim = np - (mean_zero ? 1 : 0);
  if (dim == 0) throw SolverError("inf-sup estimate needs at least one non-constant pressure mode");
  const std::size_t max_steps = std::min<std::size_t>(dim, static_cast<std::size_t>(options.max_iters));

  std::vector<std::vector<double>> basis;
  std::vector<double> alphas, betas;
  std::vector<double> v(np);
  // Deterministic, non-smooth start vector.
  for (std::size_t t = 0; t < np; ++t) v[t] = std::sin(1.0 + 12.9898 * static_cast<double>(t));
  deflate(v);
  vec::scale(1.0 / vec::norm2(v), v);

  InfSupEstimate est;
  std::vector<double> w(np);
  Eigen::VectorXd ritz_vec;
  for (std::size_t j = 0; j < max_steps; ++j) {
    basis.push_back(v);
    schur(v, w);
    alphas.push_back(vec::dot(v, w));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto &b : basis) vec::axpy(-vec::dot(b, w), b, w);
      deflate(w);
    }
    const double beta = vec::norm2(w);

    const std::size_t m = alphas.size();
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t i = 0; i + 1 < m; ++i) sub[static_cast<Eigen::Index>(i)] = betas[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub);
    const double theta = tri.eigenvalues()[0];
    ritz_vec = tri.eigenvectors().col(0);
    est.lambda_min = theta;
    est.iterations = static_cast<int>(m);
    est.residual = std::abs(beta * ritz_vec[static_cast<Eigen::Index>(m - 1)]) / theta;
    if (est.residual <= options.tol || beta <= 1e-14 * std::abs(theta) || m == max_steps) break;
    betas.push_back(beta);
    v = w;
    vec::scale(1.0 / beta, v);
  }

  // Confirm the Ritz pair with an explicit residual.
  std::vector<double> x(np, 0.0), sx(np);
  for (std::size_t i = 0; i < basis.size(); ++i) vec::axpy(ritz_vec[static_cast<Eigen::Index>(i)], basis[i], x);
  vec::scale(1.0 / vec::norm2(x), x);
  schur(x, sx);
  vec::axpy(-est.lambda_min, x, sx);
  est.residual = vec::norm2(sx) / est.lambda_min;
  if (!(est.lambda_min > 0.0) || est.residual > 10.0 * options.tol) {
    std::ostringstream msg;
    msg << "Lanczos iteration stagnated after " << est.iterations << " steps (eigen-residual "
        << est.residual << ")";
    throw SolverError(msg.str());
  }
  est.beta = std::sqrt(est.lambda_min);
  return est;
}

void write_vtk(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
               const DiscretePressure &p, const std::filesystem::path &path) {
  if (u.coeffs.size() != dofs.n_u() || p.values.size() != dofs.n_p())
    throw HarnessError("solution does not match the mesh");
  std::ofstream out(path);
  if (!out) throw HarnessError("cannot open " + path.string());
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\neg-stokes solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto &v : mesh.vertices) out << v.x << " " << v.y << " 0\n";
  out << "CELLS " << mesh.num_cells() << " " << 4 * mesh.num_cells() << "\n";
  for (const auto &c : mesh.cells) out << "3 " << c[0] << " " << c[1] << " " << c[2] << "\n";
  out << "CELL_TYPES " << mesh.num_cells() << "\n";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << "\nVECTORS velocity_cg double\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const int i = static_cast<int>(v);
    out << u.coeffs[dofs.x_dof(i)] << " " << u.coeffs[dofs.y_dof(i)] << " 0\n";
  }
  out << "CELL_DATA " << mesh.num_cells() << "\nVECTORS velocity double\n";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 uc = eval_velocity(mesh, dofs, u, static_cast<int>(c), mesh.cell_centroids[c]);
    out << uc.x << " " << uc.y << " 0\n";
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double v : p.values) out << v << "\n";
  if (!out) throw HarnessError("write failed for " + path.string());
}

}  // namespace egs
