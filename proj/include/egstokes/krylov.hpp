#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "egstokes/sparse.hpp"

namespace egs {

/// Action y = Op(x). Implementations must not alias x and y.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

LinearOperator as_operator(const SparseMatrix &a);
LinearOperator identity_operator();

struct KrylovConfig {
  double rel_tol = 1e-6;
  int max_iters = 1000;
  /// 0 means no restart.
  int restart = 0;
  bool record_history = false;

  void validate() const;
};

enum class SolverStatus { Converged, MaxIterations, Breakdown, NotANumber };

const char *to_string(SolverStatus s);

struct SolverReport {
  SolverStatus status = SolverStatus::MaxIterations;
  int iterations = 0;
  /// Relative residual tracked by the Krylov recurrence.
  double rel_residual = 0.0;
  /// ||b - A x|| / ||b|| recomputed from the returned iterate.
  double true_rel_residual = 0.0;
  std::vector<double> history;
  double seconds = 0.0;
  std::string preconditioner;
  /// Total and largest inner iteration counts of nested solves, if any.
  long inner_iterations = 0;
  int max_inner_iterations = 0;

  bool converged() const { return status == SolverStatus::Converged; }
};

struct KrylovResult {
  std::vector<double> solution;
  SolverReport report;
};

/// Right-preconditioned flexible GMRES. The preconditioner may change from one
/// application to the next. Starts from x0 if given, zero otherwise.
KrylovResult fgmres(const LinearOperator &op, const LinearOperator &precond,
                    std::span<const double> rhs, const KrylovConfig &config,
                    std::span<const double> x0 = {});

/// Preconditioned conjugate gradients for symmetric positive definite systems.
KrylovResult pcg(const LinearOperator &op, const LinearOperator &precond,
                 std::span<const double> rhs, const KrylovConfig &config);

/// `sweeps` steps of damped Jacobi, x <- x + damping * D^{-1} (b - A x).
/// Throws LinearAlgebraError on a zero diagonal entry.
void jacobi_smooth(const SparseMatrix &a, std::span<const double> rhs, std::span<double> x,
                   int sweeps, double damping);

/// Removes the area-weighted mean: p <- p - (sum_T p_T |T|) / |Omega|.
void project_mean_zero(std::span<double> p, std::span<const double> cell_areas);

/// Removes the plain mean, making p orthogonal to the constant vector. This is
/// the projection onto the range of the divergence block when the pressure is
/// only defined up to a constant.
void project_sum_zero(std::span<double> p);

}  // namespace egs
