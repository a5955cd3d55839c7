#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "egstokes/assembly.hpp"
#include "egstokes/precond.hpp"
#include "egstokes/problems.hpp"

namespace egs {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inclusive range of refinement levels, written "2..6" or "4".
struct LevelRange {
  int first = 2;
  int last = 6;
  std::vector<int> levels() const;
};

/// Throws std::invalid_argument on malformed input or first > last or first < 1.
LevelRange parse_levels(const std::string &text);

struct ExperimentConfig {
  ExampleId example = ExampleId::Ex1;
  std::optional<LevelRange> levels;
  std::filesystem::path mesh_file;
  DiscretizationParams disc;
  /// Constant viscosity; for solver studies on ex3 every entry of mu_values
  /// is run instead.
  double mu = 1.0;
  std::vector<double> mu_values;
  std::optional<ViscositySplit> mu_split;
  std::vector<PrecondKind> preconds;
  /// Outer FGMRES tolerance; unset means the driver's default.
  std::optional<double> tol;
  int max_iters = 1000;
  std::filesystem::path out_dir;

  /// Checks example-specific requirements; throws HarnessError.
  void validate() const;
};

struct ConvergenceRow {
  double h = 0.0;
  std::size_t velocity_dofs = 0;
  double energy_error = 0.0;
  double velocity_rate = 0.0;
  std::size_t pressure_dofs = 0;
  double pressure_error = 0.0;
  double pressure_rate = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Set when a level failed; rows holds the levels completed before it.
  std::optional<std::string> failure;
};

/// Solves each level (default: BL preconditioner, tolerance 1e-10) and measures
/// the errors against the exact solution. `problem` overrides the built-in
/// example when given.
ConvergenceStudy run_convergence(const ExperimentConfig &config,
                                 const std::optional<Problem> &problem = std::nullopt);

void write_convergence_csv(std::ostream &out, const std::vector<ConvergenceRow> &rows);

struct SolverCell {
  std::string label;
  double h = 0.0;
  double mu = 0.0;
  PrecondKind kind = PrecondKind::BD;
  int iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::string message;
};

/// Outer iteration counts for every (level or viscosity) x preconditioner
/// pair, default tolerance 1e-6. A failing pair is recorded and the study
/// continues.
std::vector<SolverCell> run_solver_study(const ExperimentConfig &config);

void write_solver_csv(std::ostream &out, const std::vector<SolverCell> &cells);

/// Net conservative flux out of a set of cells: {u_h}.n on interior facets
/// separating the set from its complement and the data g.n on Dirichlet
/// facets of the set.
struct FluxSummary {
  double boundary = 0.0;
  double cut = 0.0;
};

FluxSummary region_flux(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
                        const VectorField &g, const std::function<bool(const Vec2 &)> &in_region);

struct ChannelResult {
  SolverReport report;
  std::size_t velocity_dofs = 0;
  std::size_t pressure_dofs = 0;
  /// max_T |(B u_h - g_p)_T| / max_T |g_p|_T.
  double divergence_residual = 0.0;
  /// Data flux through x = 0 and x = 1 (positive in the flow direction).
  double inflow = 0.0;
  double outflow = 0.0;
  /// Discrete flux in the flow direction across cuts near x = 0.3 and x = 0.7.
  double left_cut = 0.0;
  double right_cut = 0.0;

  double flux_imbalance() const;
  std::filesystem::path vtk_file;
};

/// Solves a channel example on an imported mesh and writes channel.vtk into
/// config.out_dir (skipped when out_dir is empty). Default BL, tolerance 1e-6.
ChannelResult run_channel(const ExperimentConfig &config,
                          StokesSolution *solution = nullptr, Mesh *mesh_out = nullptr);

struct InfSupOptions {
  double tol = 1e-9;
  int max_iters = 2000;
  double inner_tol = 1e-12;
};

struct InfSupEstimate {
  double beta = 0.0;
  double lambda_min = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// beta_h = sqrt(lambda_min) of B A_E^{-1} B^T q = lambda (1/2mu) M_p q,
/// restricted to mean-zero q for pure-Dirichlet meshes. Lanczos with full
/// reorthogonalization; A_E is inverted by PCG with the EG preconditioner.
/// Throws SolverError if the Ritz pair does not reach the tolerance.
InfSupEstimate estimate_infsup(const Mesh &mesh, double alpha, const ScalarField &mu,
                               const InfSupOptions &options = {});

/// Legacy ASCII VTK (3.0): CG1 velocity as point data, centroid velocity and
/// pressure as cell data.
void write_vtk(const Mesh &mesh, const DofMap &dofs, const DiscreteVelocity &u,
               const DiscretePressure &p, const std::filesystem::path &path);

}  // namespace egs
