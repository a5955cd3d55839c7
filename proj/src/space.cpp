#include "egstokes/space.hpp"

#include <cmath>
#include <sstream>

#include "egstokes/quadrature.hpp"

namespace egs {

DofMap DofMap::build(const Mesh &mesh) {
  DofMap d;
  d.n_vertices = mesh.num_vertices();
  d.n_cells = mesh.num_cells();
  d.mean_zero_pressure = !mesh.has_neumann();
  return d;
}

CellBasis cell_basis(const Mesh &mesh, const DofMap &dofs, int cell) {
  CellBasis b;
  b.cell = cell;
  const auto &c = mesh.cells[static_cast<std::size_t>(cell)];
  for (int k = 0; k < 3; ++k) {
    b.dofs[k] = dofs.x_dof(c[k]);
    b.dofs[3 + k] = dofs.y_dof(c[k]);
  }
  b.dofs[6] = dofs.enrichment_dof(cell);
  b.centroid = mesh.cell_centroids[static_cast<std::size_t>(cell)];

  // grad lambda_k is the inward edge normal of the opposite edge scaled by
  // |e_k| / (2 |T|).
  const double two_area = 2.0 * mesh.cell_areas[static_cast<std::size_t>(cell)];
  for (int k = 0; k < 3; ++k) {
    const Vec2 &p = mesh.vertices[c[(k + 1) % 3]];
    const Vec2 &q = mesh.vertices[c[(k + 2) % 3]];
    const Vec2 e = q - p;
    b.grad_lambda[k] = {-e.y / two_area, e.x / two_area};
  }
  return b;
}

std::vector<double> cell_viscosity(const Mesh &mesh, const ScalarField &mu) {
  std::vector<double> out(mesh.num_cells());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = mu(mesh.cell_centroids[c]);
    if (!(out[c] > 0.0)) {
      std::ostringstream msg;
      msg << "viscosity must be positive; got " << out[c] << " in cell " << c;
      throw SpaceError(msg.str());
    }
  }
  return out;
}

double facet_viscosity(const Facet &facet, const std::vector<double> &mu_cells) {
  const double mp = mu_cells[static_cast<std::size_t>(facet.plus_cell)];
  if (!facet.minus_cell) return mp;
  const double mm = mu_cells[static_cast<std::size_t>(*facet.minus_cell)];
  return 2.0 * mp * mm / (mp + mm);
}

namespace {

Vec2 local_value(const CellBasis &b, const std::vector<double> &coeffs,
                 const std::array<double, 3> &lambda, const Vec2 &x) {
  Vec2 v;
  for (int i = 0; i < CellBasis::kSize; ++i) v += coeffs[b.dofs[i]] * b.value(i, lambda, x);
  return v;
}

Mat2 local_gradient(const CellBasis &b, const std::vector<double> &coeffs) {
  Mat2 g;
  for (int i = 0; i < CellBasis::kSize; ++i) g += coeffs[b.dofs[i]] * b.gradient(i);
  return g;
}

void check_length(const DofMap &dofs, const DiscreteVelocity &u) {
  if (u.coeffs.size() != dofs.n_u()) throw SpaceError("velocity vector length mismatch");
}

/// Jump of u across facet f at parameter t: trace from the plus side minus
/// trace from the minus side (just the trace on the boundary).
Vec2 facet_jump(const Mesh &mesh, const std::vector<double> &coeffs,
                const Facet &f, const CellBasis &plus, const CellBasis *minus, double t) {
  const Vec2 x = mesh.facet_point(f, t);
  Vec2 jump = local_value(plus, coeffs, barycentric(mesh, plus.cell, x), x);
  if (minus) jump -= local_value(*minus, coeffs, barycentric(mesh, minus->cell, x), x);
  return jump;
}

}  // namespace

Vec2 eval_velocity(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u, int cell,
                   const Vec2 &point) {
  check_length(dofs, u);
  const auto lambda = barycentric(mesh, cell, point);
  for (double l : lambda) {
    if (l < -1e-12) throw SpaceError("evaluation point lies outside the cell");
  }
  return local_value(cell_basis(mesh, dofs, cell), u.coeffs, lambda, point);
}

StrainDiv eval_strain_and_div(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
                              int cell) {
  check_length(dofs, u);
  const Mat2 g = local_gradient(cell_basis(mesh, dofs, cell), u.coeffs);
  return {g.symmetric_part(), g.trace()};
}

double energy_norm(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u, double alpha,
                   const std::vector<double> &mu_cells) {
  check_length(dofs, u);
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Mat2 eps = local_gradient(cell_basis(mesh, dofs, static_cast<int>(c)), u.coeffs)
                         .symmetric_part();
    sum += 2.0 * mu_cells[c] * mesh.cell_areas[c] * contract(eps, eps);
  }
  for (const auto &f : mesh.facets) {
    if (f.neumann()) continue;
    const CellBasis plus = cell_basis(mesh, dofs, f.plus_cell);
    CellBasis minus;
    if (f.minus_cell) minus = cell_basis(mesh, dofs, *f.minus_cell);
    double jj = 0.0;
    for (const auto &q : quad::kEdgeGauss3) {
      const Vec2 j = facet_jump(mesh, u.coeffs, f, plus, f.minus_cell ? &minus : nullptr, q.t);
      jj += q.weight * dot(j, j);
    }
    sum += 2.0 * facet_viscosity(f, mu_cells) * alpha / f.h_e * f.length * jj;
  }
  return std::sqrt(sum);
}

DiscreteVelocity interpolate(const Mesh &mesh, const DofMap &dofs, const VectorField &field) {
  DiscreteVelocity u{std::vector<double>(dofs.n_u(), 0.0)};
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 val = field(mesh.vertices[v]);
    u.coeffs[dofs.x_dof(static_cast<int>(v))] = val.x;
    u.coeffs[dofs.y_dof(static_cast<int>(v))] = val.y;
  }
  return u;
}

DiscretePressure project_cellwise(const Mesh &mesh, const ScalarField &field) {
  DiscretePressure p{std::vector<double>(mesh.num_cells(), 0.0)};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto &cell = mesh.cells[c];
    double avg = 0.0;
    for (const auto &q : quad::kTriangleDeg4) {
      const Vec2 x = q.bary[0] * mesh.vertices[cell[0]] + q.bary[1] * mesh.vertices[cell[1]] +
                     q.bary[2] * mesh.vertices[cell[2]];
      avg += q.weight * field(x);
    }
    p.values[c] = avg;
  }
  return p;
}

ErrorNorms errors_vs_exact(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u_h,
                           const DiscretePressure &p_h, const ProblemSpec &spec, double alpha,
                           const std::vector<double> &mu_cells) {
  if (!spec.has_exact()) throw SpaceError("problem does not provide an exact solution");
  check_length(dofs, u_h);
  if (p_h.values.size() != dofs.n_p()) throw SpaceError("pressure vector length mismatch");

  double energy2 = 0.0;
  double pressure2 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto &cell = mesh.cells[c];
    const Mat2 eps_h = local_gradient(cell_basis(mesh, dofs, static_cast<int>(c)), u_h.coeffs)
                           .symmetric_part();
    double e2 = 0.0, p2 = 0.0;
    for (const auto &q : quad::kTriangleDeg4) {
      const Vec2 x = q.bary[0] * mesh.vertices[cell[0]] + q.bary[1] * mesh.vertices[cell[1]] +
                     q.bary[2] * mesh.vertices[cell[2]];
      const Mat2 d = spec.exact_grad_u(x).symmetric_part() - eps_h;
      e2 += q.weight * contract(d, d);
      const double dp = spec.exact_p(x) - p_h.values[c];
      p2 += q.weight * dp * dp;
    }
    energy2 += 2.0 * mu_cells[c] * mesh.cell_areas[c] * e2;
    pressure2 += mesh.cell_areas[c] * p2;
  }

  for (const auto &f : mesh.facets) {
    if (f.neumann()) continue;
    const CellBasis plus = cell_basis(mesh, dofs, f.plus_cell);
    CellBasis minus;
    if (f.minus_cell) minus = cell_basis(mesh, dofs, *f.minus_cell);
    double jj = 0.0;
    for (const auto &q : quad::kEdgeGauss3) {
      // The exact velocity is continuous, so only its boundary trace enters.
      Vec2 j = facet_jump(mesh, u_h.coeffs, f, plus, f.minus_cell ? &minus : nullptr, q.t);
      if (!f.interior()) j = spec.exact_u(mesh.facet_point(f, q.t)) - j;
      jj += q.weight * dot(j, j);
    }
    energy2 += 2.0 * facet_viscosity(f, mu_cells) * alpha / f.h_e * f.length * jj;
  }
  return {std::sqrt(energy2), std::sqrt(pressure2)};
}

}  // namespace egs
