#include "egstokes/assembly.hpp"

#include <cmath>
#include <sstream>

#include "egstokes/quadrature.hpp"

namespace egs {

void DiscretizationParams::validate() const {
  if (theta != -1 && theta != 0 && theta != 1) {
    std::ostringstream msg;
    msg << "theta must be -1, 0 or 1; got " << theta;
    throw AssemblyError(msg.str());
  }
  if (!(alpha > 0.0)) throw AssemblyError("penalty parameter alpha must be positive");
}

void BlockSystem::apply(std::span<const double> x, std::span<double> y) const {
  const auto xu = x.subspan(0, n_u());
  const auto xp = x.subspan(n_u(), n_p());
  auto yu = y.subspan(0, n_u());
  auto yp = y.subspan(n_u(), n_p());
  A.multiply(xu, yu);
  Bt.multiply_add(1.0, xp, yu);
  B.multiply(xu, yp);
}

std::vector<double> BlockSystem::rhs() const {
  std::vector<double> b(rhs_u);
  b.insert(b.end(), rhs_p.begin(), rhs_p.end());
  return b;
}

namespace {

constexpr int kQ = static_cast<int>(quad::kEdgeGauss3.size());

/// Traces of the local basis functions of the cells adjacent to one facet.
struct FacetFunction {
  int dof = 0;
  int side_cell = 0;
  /// Contribution to the jump at each quadrature point.
  std::array<Vec2, kQ> jump{};
  /// Contribution to {eps(v)} n_e.
  Vec2 avg_traction;
  /// Plain trace at each quadrature point (used for boundary loads).
  std::array<Vec2, kQ> trace{};
};

std::vector<FacetFunction> facet_functions(const Mesh &mesh, const DofMap &dofs, const Facet &f) {
  std::vector<FacetFunction> out;
  out.reserve(2 * CellBasis::kSize);
  const bool interior = f.interior();
  auto add_side = [&](int cell, double sign) {
    const CellBasis b = cell_basis(mesh, dofs, cell);
    std::array<std::array<double, 3>, kQ> lambda;
    std::array<Vec2, kQ> x;
    for (int q = 0; q < kQ; ++q) {
      x[q] = mesh.facet_point(f, quad::kEdgeGauss3[q].t);
      lambda[q] = barycentric(mesh, cell, x[q]);
    }
    const double w = interior ? 0.5 : 1.0;
    for (int i = 0; i < CellBasis::kSize; ++i) {
      FacetFunction ff;
      ff.dof = b.dofs[i];
      ff.side_cell = cell;
      ff.avg_traction = w * (b.strain(i) * f.normal);
      // Continuous hats have no jump across interior facets.
      const bool jumps = !interior || i == 6;
      for (int q = 0; q < kQ; ++q) {
        ff.trace[q] = b.value(i, lambda[q], x[q]);
        ff.jump[q] = jumps ? sign * ff.trace[q] : Vec2{};
      }
      out.push_back(ff);
    }
  };
  add_side(f.plus_cell, 1.0);
  if (interior) add_side(*f.minus_cell, -1.0);
  return out;
}

double edge_integral_jj(const FacetFunction &a, const FacetFunction &b) {
  double s = 0.0;
  for (int q = 0; q < kQ; ++q) s += quad::kEdgeGauss3[q].weight * dot(a.jump[q], b.jump[q]);
  return s;
}

/// Integral over the facet (divided by |e|) of the jump of `a` against a constant vector.
double edge_integral_jc(const FacetFunction &a, const Vec2 &c) {
  double s = 0.0;
  for (int q = 0; q < kQ; ++q) s += quad::kEdgeGauss3[q].weight * dot(a.jump[q], c);
  return s;
}

void add_volume_strain(const Mesh &mesh, const DofMap &dofs, const std::vector<double> &mu_cells,
                       std::vector<Triplet> &trip) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis b = cell_basis(mesh, dofs, static_cast<int>(c));
    std::array<Mat2, CellBasis::kSize> eps;
    for (int i = 0; i < CellBasis::kSize; ++i) eps[i] = b.strain(i);
    const double scale = 2.0 * mu_cells[c] * mesh.cell_areas[c];
    for (int i = 0; i < CellBasis::kSize; ++i)
      for (int j = 0; j < CellBasis::kSize; ++j)
        trip.push_back({b.dofs[i], b.dofs[j], scale * contract(eps[j], eps[i])});
  }
}

void check_mu(const Mesh &mesh, const std::vector<double> &mu_cells) {
  if (mu_cells.size() != mesh.num_cells()) throw AssemblyError("viscosity array has wrong length");
}

}  // namespace

SparseMatrix assemble_a(const Mesh &mesh, const DofMap &dofs, const DiscretizationParams &params,
                        const std::vector<double> &mu_cells) {
  params.validate();
  check_mu(mesh, mu_cells);
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_cells() * 49 + mesh.num_facets() * 196);
  add_volume_strain(mesh, dofs, mu_cells, trip);

  const double theta = params.theta;
  for (const auto &f : mesh.facets) {
    if (f.neumann()) continue;
    const auto fn = facet_functions(mesh, dofs, f);
    const double two_mu = 2.0 * facet_viscosity(f, mu_cells);
    const double penalty = params.alpha / f.h_e;
    for (const auto &test : fn) {
      for (const auto &trial : fn) {
        // -({eps(u)} n, [v]) + theta ([u], {eps(v)} n) + alpha/h ([u], [v])
        const double v = -edge_integral_jc(test, trial.avg_traction) +
                         theta * edge_integral_jc(trial, test.avg_traction) +
                         penalty * edge_integral_jj(trial, test);
        if (v != 0.0) trip.push_back({test.dof, trial.dof, two_mu * f.length * v});
      }
    }
  }
  return SparseMatrix::from_triplets(dofs.n_u(), dofs.n_u(), std::move(trip));
}

SparseMatrix assemble_energy_gram(const Mesh &mesh, const DofMap &dofs, double alpha,
                                  const std::vector<double> &mu_cells) {
  if (!(alpha > 0.0)) throw AssemblyError("penalty parameter alpha must be positive");
  check_mu(mesh, mu_cells);
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_cells() * 49 + mesh.num_facets() * 100);
  add_volume_strain(mesh, dofs, mu_cells, trip);
  for (const auto &f : mesh.facets) {
    if (f.neumann()) continue;
    const auto fn = facet_functions(mesh, dofs, f);
    const double scale = 2.0 * facet_viscosity(f, mu_cells) * alpha / f.h_e * f.length;
    for (const auto &test : fn) {
      for (const auto &trial : fn) {
        const double v = edge_integral_jj(trial, test);
        if (v != 0.0) trip.push_back({test.dof, trial.dof, scale * v});
      }
    }
  }
  return SparseMatrix::from_triplets(dofs.n_u(), dofs.n_u(), std::move(trip));
}

SparseMatrix assemble_b(const Mesh &mesh, const DofMap &dofs) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_cells() * 7 + mesh.num_facets() * 28);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis b = cell_basis(mesh, dofs, static_cast<int>(c));
    for (int i = 0; i < CellBasis::kSize; ++i) {
      const double div = b.divergence(i);
      if (div != 0.0)
        trip.push_back({static_cast<int>(c), b.dofs[i], -mesh.cell_areas[c] * div});
    }
  }
  for (const auto &f : mesh.facets) {
    if (f.neumann()) continue;
    const auto fn = facet_functions(mesh, dofs, f);
    const double w = f.interior() ? 0.5 : 1.0;
    std::array<int, 2> pcells{f.plus_cell, f.minus_cell.value_or(-1)};
    for (int pc : pcells) {
      if (pc < 0) continue;
      for (const auto &trial : fn) {
        const double v = edge_integral_jc(trial, f.normal);
        if (v != 0.0) trip.push_back({pc, trial.dof, w * f.length * v});
      }
    }
  }
  return SparseMatrix::from_triplets(dofs.n_p(), dofs.n_u(), std::move(trip));
}

LoadVectors assemble_rhs(const Mesh &mesh, const DofMap &dofs, const DiscretizationParams &params,
                         const ProblemSpec &spec, const std::vector<double> &mu_cells) {
  params.validate();
  check_mu(mesh, mu_cells);
  if (!spec.f) throw AssemblyError("problem has no body force");
  if (mesh.has_dirichlet() && !spec.g) throw AssemblyError("Dirichlet facets present but g is missing");
  if (mesh.has_neumann() && !spec.s) throw AssemblyError("Neumann facets present but s is missing");

  LoadVectors out{std::vector<double>(dofs.n_u(), 0.0), std::vector<double>(dofs.n_p(), 0.0)};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis b = cell_basis(mesh, dofs, static_cast<int>(c));
    const auto &cell = mesh.cells[c];
    for (const auto &q : quad::kTriangleDeg4) {
      const Vec2 x = q.bary[0] * mesh.vertices[cell[0]] + q.bary[1] * mesh.vertices[cell[1]] +
                     q.bary[2] * mesh.vertices[cell[2]];
      const Vec2 fx = spec.f(x);
      const double w = q.weight * mesh.cell_areas[c];
      for (int i = 0; i < CellBasis::kSize; ++i)
        out.rhs_u[b.dofs[i]] += w * dot(fx, b.value(i, q.bary, x));
    }
  }

  for (const auto &f : mesh.facets) {
    if (f.interior()) continue;
    const auto fn = facet_functions(mesh, dofs, f);
    std::array<Vec2, kQ> data;
    for (int q = 0; q < kQ; ++q) {
      const Vec2 x = mesh.facet_point(f, quad::kEdgeGauss3[q].t);
      data[q] = f.dirichlet() ? spec.g(x) : spec.s(x);
    }
    if (f.neumann()) {
      for (const auto &test : fn) {
        double v = 0.0;
        for (int q = 0; q < kQ; ++q) v += quad::kEdgeGauss3[q].weight * dot(data[q], test.trace[q]);
        out.rhs_u[test.dof] += f.length * v;
      }
      continue;
    }
    const double two_mu = 2.0 * facet_viscosity(f, mu_cells);
    const double penalty = params.alpha / f.h_e;
    for (const auto &test : fn) {
      double v = 0.0;
      for (int q = 0; q < kQ; ++q)
        v += quad::kEdgeGauss3[q].weight *
             (params.theta * dot(data[q], test.avg_traction) + penalty * dot(data[q], test.jump[q]));
      out.rhs_u[test.dof] += two_mu * f.length * v;
    }
    double flux = 0.0;
    for (int q = 0; q < kQ; ++q) flux += quad::kEdgeGauss3[q].weight * dot(data[q], f.normal);
    out.rhs_p[static_cast<std::size_t>(f.plus_cell)] += f.length * flux;
  }
  return out;
}

std::vector<double> assemble_pressure_mass(const Mesh &mesh) { return mesh.cell_areas; }

BlockSystem assemble_system(const Mesh &mesh, const DiscretizationParams &params,
                            const ProblemSpec &spec) {
  params.validate();
  if (!spec.mu) throw AssemblyError("problem has no viscosity");
  if (!mesh.has_dirichlet())
    throw AssemblyError("the Dirichlet boundary is empty; velocity is determined only up to rigid motions");
  BlockSystem sys;
  sys.dofs = DofMap::build(mesh);
  sys.params = params;
  sys.mu_cells = cell_viscosity(mesh, spec.mu);
  sys.A = assemble_a(mesh, sys.dofs, params, sys.mu_cells);
  sys.B = assemble_b(mesh, sys.dofs);
  sys.Bt = sys.B.transpose();
  sys.AE = assemble_energy_gram(mesh, sys.dofs, params.alpha, sys.mu_cells);
  sys.Mp = assemble_pressure_mass(mesh);
  auto rhs = assemble_rhs(mesh, sys.dofs, params, spec, sys.mu_cells);
  sys.rhs_u = std::move(rhs.rhs_u);
  sys.rhs_p = std::move(rhs.rhs_p);
  return sys;
}

}  // namespace egs
