#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "egstokes/geometry.hpp"
#include "egstokes/mesh.hpp"

namespace egs {

using ScalarField = std::function<double(const Vec2 &)>;
using VectorField = std::function<Vec2(const Vec2 &)>;
using TensorField = std::function<Mat2(const Vec2 &)>;

/// Degree-of-freedom layout of the enriched velocity space and the
/// piecewise-constant pressure space.
///
/// Velocity unknowns are blocked: all x-components of the vertex values, then
/// all y-components, then one enrichment coefficient per cell. The CG1 part is
/// therefore the contiguous range [0, 2 * n_vertices).
struct DofMap {
  std::size_t n_vertices = 0;
  std::size_t n_cells = 0;
  /// Pressure lives in L^2_0 (no Neumann boundary).
  bool mean_zero_pressure = true;

  static DofMap build(const Mesh &mesh);

  std::size_t n_u() const { return 2 * n_vertices + n_cells; }
  std::size_t n_p() const { return n_cells; }
  std::size_t n_cg() const { return 2 * n_vertices; }
  std::size_t enrichment_offset() const { return 2 * n_vertices; }

  int x_dof(int vertex) const { return vertex; }
  int y_dof(int vertex) const { return static_cast<int>(n_vertices) + vertex; }
  int enrichment_dof(int cell) const { return static_cast<int>(2 * n_vertices) + cell; }
};

struct DiscreteVelocity {
  std::vector<double> coeffs;
};

struct DiscretePressure {
  std::vector<double> values;
};

/// Data of a Stokes problem. Empty std::function members mean "not provided".
struct ProblemSpec {
  ScalarField mu;
  VectorField f;
  VectorField g;
  VectorField s;
  VectorField exact_u;
  TensorField exact_grad_u;
  ScalarField exact_p;

  bool has_exact() const { return exact_u && exact_grad_u && exact_p; }
};

class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The seven local velocity basis functions of one cell: x-hats of the three
/// vertices, y-hats of the three vertices, then the enrichment x - x_T.
struct CellBasis {
  static constexpr int kSize = 7;

  int cell = -1;
  std::array<int, kSize> dofs{};
  std::array<Vec2, 3> grad_lambda{};
  Vec2 centroid;

  Vec2 value(int i, const std::array<double, 3> &lambda, const Vec2 &x) const {
    if (i < 3) return {lambda[i], 0.0};
    if (i < 6) return {0.0, lambda[i - 3]};
    return x - centroid;
  }
  Mat2 gradient(int i) const {
    if (i < 3) return Mat2{{grad_lambda[i].x, grad_lambda[i].y, 0.0, 0.0}};
    if (i < 6) return Mat2{{0.0, 0.0, grad_lambda[i - 3].x, grad_lambda[i - 3].y}};
    return Mat2::identity();
  }
  Mat2 strain(int i) const { return gradient(i).symmetric_part(); }
  double divergence(int i) const { return gradient(i).trace(); }
};

CellBasis cell_basis(const Mesh &mesh, const DofMap &dofs, int cell);

/// Viscosity sampled at cell centroids; throws SpaceError if not positive.
std::vector<double> cell_viscosity(const Mesh &mesh, const ScalarField &mu);

/// Viscosity used on a facet: the incident cell's value on the boundary, the
/// harmonic mean of both sides on interior facets.
double facet_viscosity(const Facet &facet, const std::vector<double> &mu_cells);

/// Velocity of u at a point of the given cell.
Vec2 eval_velocity(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u, int cell,
                   const Vec2 &point);

struct StrainDiv {
  Mat2 strain;
  double div = 0.0;
};

/// Cellwise-constant strain and divergence of u.
StrainDiv eval_strain_and_div(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
                              int cell);

/// Energy norm of u; facet sums run over interior and Dirichlet facets.
double energy_norm(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u, double alpha,
                   const std::vector<double> &mu_cells);

/// CG1 nodal interpolant (enrichment coefficients zero).
DiscreteVelocity interpolate(const Mesh &mesh, const DofMap &dofs, const VectorField &field);

/// Cell-average projection of a scalar field, using the degree-4 rule.
DiscretePressure project_cellwise(const Mesh &mesh, const ScalarField &field);

struct ErrorNorms {
  double energy = 0.0;
  double pressure_l2 = 0.0;
};

/// Energy-norm velocity error and L2 pressure error against the exact
/// solution stored in the problem.
ErrorNorms errors_vs_exact(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u_h,
                           const DiscretePressure &p_h, const ProblemSpec &spec, double alpha,
                           const std::vector<double> &mu_cells);

}  // namespace egs
