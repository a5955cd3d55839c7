#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "egstokes/sparse.hpp"

namespace egs {

struct AmgOptions {
  /// Connection i-j is strong if |a_ij| > threshold * sqrt(|a_ii a_jj|).
  double strength_threshold = 0.08;
  /// Damping of the Jacobi step that smooths the tentative prolongation.
  double prolongation_damping = 2.0 / 3.0;
  /// Damping of the Jacobi pre- and post-smoother.
  double smoother_damping = 2.0 / 3.0;
  int pre_sweeps = 1;
  int post_sweeps = 1;
  std::size_t max_coarse = 200;
  int max_levels = 25;
  /// Optional per-unknown component label; connections between unknowns of
  /// different components are ignored when forming aggregates.
  std::vector<int> components;
};

struct AmgLevel {
  SparseMatrix a;
  /// Prolongation from the next coarser level (empty on the coarsest level).
  SparseMatrix p;
  SparseMatrix r;
  std::vector<double> inv_diag;
  /// Aggregate index of every unknown of this level.
  std::vector<int> aggregates;
  std::vector<int> components;
};

/// Smoothed-aggregation multigrid hierarchy for a symmetric positive definite
/// matrix.
struct AmgHierarchy {
  std::vector<AmgLevel> levels;
  Eigen::MatrixXd coarse_matrix;
  Eigen::LDLT<Eigen::MatrixXd> coarse_solver;
  AmgOptions options;

  std::size_t num_levels() const { return levels.size(); }
  /// Ratio of total nonzeros over all levels to the fine-level nonzeros.
  double operator_complexity() const;
};

/// Greedy aggregation on the strength graph. Returns the aggregate index of
/// every unknown and the number of aggregates.
std::pair<std::vector<int>, int> aggregate(const SparseMatrix &a, double threshold,
                                           std::span<const int> components = {});

AmgHierarchy amg_setup(const SparseMatrix &a, const AmgOptions &options = {});

/// One V-cycle with zero initial guess.
std::vector<double> amg_vcycle(const AmgHierarchy &hier, std::span<const double> rhs);
void amg_vcycle(const AmgHierarchy &hier, std::span<const double> rhs, std::span<double> z);

}  // namespace egs
