#pragma once

#include <stdexcept>
#include <vector>

#include "egstokes/mesh.hpp"
#include "egstokes/space.hpp"
#include "egstokes/sparse.hpp"

namespace egs {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interior-penalty parameters. theta = 1 is NIPG, -1 SIPG, 0 IIPG.
struct DiscretizationParams {
  int theta = 0;
  double alpha = 1.0;

  void validate() const;
};

/// All matrices and load vectors of one discrete Stokes problem:
///   [ A  B^T ] [u]   [rhs_u]
///   [ B  0   ] [p] = [rhs_p]
struct BlockSystem {
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix Bt;
  /// Energy inner product Gram matrix.
  SparseMatrix AE;
  /// Diagonal of the pressure mass matrix (cell areas).
  std::vector<double> Mp;
  std::vector<double> rhs_u;
  std::vector<double> rhs_p;
  DiscretizationParams params;
  std::vector<double> mu_cells;
  DofMap dofs;

  std::size_t n_u() const { return A.rows(); }
  std::size_t n_p() const { return B.rows(); }
  std::size_t size() const { return n_u() + n_p(); }

  /// y = [A B^T; B 0] x on the concatenated vector.
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> rhs() const;
};

SparseMatrix assemble_a(const Mesh &mesh, const DofMap &dofs, const DiscretizationParams &params,
                        const std::vector<double> &mu_cells);

SparseMatrix assemble_b(const Mesh &mesh, const DofMap &dofs);

struct LoadVectors {
  std::vector<double> rhs_u;
  std::vector<double> rhs_p;
};

/// Right-hand sides of the momentum and continuity equations. The viscosity
/// is taken from mu_cells; spec.f must be set, spec.s is required when Neumann
/// facets exist and spec.g when Dirichlet facets exist.
LoadVectors assemble_rhs(const Mesh &mesh, const DofMap &dofs, const DiscretizationParams &params,
                         const ProblemSpec &spec, const std::vector<double> &mu_cells);

SparseMatrix assemble_energy_gram(const Mesh &mesh, const DofMap &dofs, double alpha,
                                  const std::vector<double> &mu_cells);

std::vector<double> assemble_pressure_mass(const Mesh &mesh);

/// Everything at once; mu is sampled at cell centroids from spec.mu. Throws
/// AssemblyError when the mesh has no Dirichlet facet.
BlockSystem assemble_system(const Mesh &mesh, const DiscretizationParams &params,
                            const ProblemSpec &spec);

}  // namespace egs
