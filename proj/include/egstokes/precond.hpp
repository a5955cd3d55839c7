#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "egstokes/amg.hpp"
#include "egstokes/assembly.hpp"
#include "egstokes/krylov.hpp"

namespace egs {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block preconditioners for the saddle-point system. The B variants invert
/// the velocity block to a tight tolerance, the M variants only approximately.
enum class PrecondKind { BD, BL, BU, MD, ML, MU };

const char *to_string(PrecondKind k);
/// Case-insensitive; throws std::invalid_argument.
PrecondKind parse_precond_kind(const std::string &name);
std::vector<PrecondKind> all_precond_kinds();

enum class VelocitySolveMode { Exact, Inexact };

VelocitySolveMode velocity_mode_for(PrecondKind k);

struct EgPrecondOptions {
  double jacobi_damping = 2.0 / 3.0;
  AmgOptions amg;
};

/// Multiplicative two-level preconditioner for the EG velocity block: a
/// global damped Jacobi sweep, one AMG V-cycle on the continuous piecewise
/// linear unknowns, and a second global Jacobi sweep.
class EgVelocityPreconditioner {
 public:
  /// `cg_matrix` is the SPD operator the AMG hierarchy is built from; it must
  /// be the n_cg x n_cg leading block (the CG1 unknowns).
  EgVelocityPreconditioner(const SparseMatrix &a, const SparseMatrix &cg_matrix,
                           std::size_t n_vertices, const EgPrecondOptions &options = {});

  /// Builds the hierarchy from the CG1 block of the symmetric part of A.
  static EgVelocityPreconditioner from_system(const BlockSystem &sys,
                                              const EgPrecondOptions &options = {});

  void apply(std::span<const double> r, std::span<double> z) const;
  const AmgHierarchy &amg() const { return amg_; }
  std::size_t n_cg() const { return n_cg_; }

 private:
  const SparseMatrix *a_;
  std::vector<double> inv_diag_;
  std::size_t n_cg_;
  double damping_;
  AmgHierarchy amg_;
};

/// Approximate action of A^{-1} by preconditioned inner FGMRES.
class VelocityBlockSolver {
 public:
  VelocityBlockSolver(const SparseMatrix &a, const EgVelocityPreconditioner &precond,
                      VelocitySolveMode mode, double exact_tol = 1e-12, double inexact_tol = 1e-3,
                      int max_iters = 1000);

  /// Throws SolverError if the inner solve fails to converge.
  void apply(std::span<const double> r, std::span<double> z) const;

  VelocitySolveMode mode() const { return mode_; }
  double tolerance() const { return tol_; }
  long total_iterations() const { return total_; }
  int max_iterations_seen() const { return max_seen_; }
  int applications() const { return calls_; }

 private:
  const SparseMatrix *a_;
  const EgVelocityPreconditioner *precond_;
  VelocitySolveMode mode_;
  double tol_;
  int max_iters_;
  mutable long total_ = 0;
  mutable int max_seen_ = 0;
  mutable int calls_ = 0;
};

/// Applies one of the six block preconditioners to a residual (r_u, r_p).
class BlockPreconditioner {
 public:
  BlockPreconditioner(PrecondKind kind, const BlockSystem &sys, const VelocityBlockSolver &vsolve);

  void apply(std::span<const double> r, std::span<double> z) const;
  PrecondKind kind() const { return kind_; }
  /// Diagonal of the pressure block inverse, 2 mu_T / |T|.
  const std::vector<double> &pressure_scale() const { return pscale_; }

 private:
  PrecondKind kind_;
  const BlockSystem *sys_;
  const VelocityBlockSolver *vsolve_;
  std::vector<double> pscale_;
};

struct StokesSolveOptions {
  KrylovConfig outer;
  double exact_tol = 1e-12;
  double inexact_tol = 1e-3;
  int inner_max_iters = 1000;
  EgPrecondOptions velocity;
};

struct StokesSolution {
  DiscreteVelocity u;
  DiscretePressure p;
  SolverReport report;
};

/// Solves the block system with outer FGMRES and the chosen preconditioner.
/// For pure-Dirichlet problems the pressure part of the load is projected onto
/// the range of B, preconditioned pressure updates and the returned pressure
/// are made area-weighted mean-zero.
StokesSolution solve_stokes(const BlockSystem &sys, PrecondKind kind,
                            const StokesSolveOptions &options = {});

/// Same, reusing an existing velocity preconditioner.
StokesSolution solve_stokes(const BlockSystem &sys, PrecondKind kind,
                            const EgVelocityPreconditioner &vprec,
                            const StokesSolveOptions &options);

}  // namespace egs
