#include "egstokes/precond.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace egs {

const char *to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::BD: return "BD";
    case PrecondKind::BL: return "BL";
    case PrecondKind::BU: return "BU";
    case PrecondKind::MD: return "MD";
    case PrecondKind::ML: return "ML";
    case PrecondKind::MU: return "MU";
  }
  return "?";
}

PrecondKind parse_precond_kind(const std::string &name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto k : all_precond_kinds())
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown preconditioner '" + name + "'");
}

std::vector<PrecondKind> all_precond_kinds() {
  return {PrecondKind::BD, PrecondKind::BL, PrecondKind::BU,
          PrecondKind::MD, PrecondKind::ML, PrecondKind::MU};
}

VelocitySolveMode velocity_mode_for(PrecondKind k) {
  switch (k) {
    case PrecondKind::BD:
    case PrecondKind::BL:
    case PrecondKind::BU: return VelocitySolveMode::Exact;
    default: return VelocitySolveMode::Inexact;
  }
}

EgVelocityPreconditioner::EgVelocityPreconditioner(const SparseMatrix &a,
                                                   const SparseMatrix &cg_matrix,
                                                   std::size_t n_vertices,
                                                   const EgPrecondOptions &options)
    : a_(&a), n_cg_(2 * n_vertices), damping_(options.jacobi_damping) {
  if (cg_matrix.rows() != n_cg_ || cg_matrix.cols() != n_cg_)
    throw SolverError("CG block has the wrong size for the velocity preconditioner");
  inv_diag_ = a.diagonal_values();
  for (double &d : inv_diag_) {
    if (d == 0.0) throw LinearAlgebraError("velocity block has a zero diagonal entry");
    d = 1.0 / d;
  }
  AmgOptions amg = options.amg;
  if (amg.components.empty()) {
    amg.components.assign(n_cg_, 0);
    std::fill(amg.components.begin() + static_cast<std::ptrdiff_t>(n_vertices), amg.components.end(), 1);
  }
  amg_ = amg_setup(cg_matrix, amg);
}

EgVelocityPreconditioner EgVelocityPreconditioner::from_system(const BlockSystem &sys,
                                                               const EgPrecondOptions &options) {
  const SparseMatrix cg = sys.A.symmetric_part().leading_block(sys.dofs.n_cg());
  return EgVelocityPreconditioner(sys.A, cg, sys.dofs.n_vertices, options);
}

void EgVelocityPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const std::size_t n = r.size();
  std::vector<double> res(n);
  // (i) Jacobi from zero.
  for (std::size_t i = 0; i < n; ++i) z[i] = damping_ * inv_diag_[i] * r[i];
  // (ii) V-cycle on the CG1 unknowns of the current residual.
  a_->multiply(z, res);
  for (std::size_t i = 0; i < n; ++i) res[i] = r[i] - res[i];
  std::vector<double> corr(n_cg_);
  amg_vcycle(amg_, std::span<const double>(res.data(), n_cg_), corr);
  for (std::size_t i = 0; i < n_cg_; ++i) z[i] += corr[i];
  // (iii) Jacobi again.
  a_->multiply(z, res);
  for (std::size_t i = 0; i < n; ++i) z[i] += damping_ * inv_diag_[i] * (r[i] - res[i]);
}

VelocityBlockSolver::VelocityBlockSolver(const SparseMatrix &a,
                                         const EgVelocityPreconditioner &precond,
                                         VelocitySolveMode mode, double exact_tol,
                                         double inexact_tol, int max_iters)
    : a_(&a),
      precond_(&precond),
      mode_(mode),
      tol_(mode == VelocitySolveMode::Exact ? exact_tol : inexact_tol),
      max_iters_(max_iters) {}

void VelocityBlockSolver::apply(std::span<const double> r, std::span<double> z) const {
  KrylovConfig cfg;
  cfg.rel_tol = tol_;
  cfg.max_iters = max_iters_;
  const auto result = fgmres(
      as_operator(*a_),
      [this](std::span<const double> x, std::span<double> y) { precond_->apply(x, y); }, r, cfg);
  ++calls_;
  total_ += result.report.iterations;
  max_seen_ = std::max(max_seen_, result.report.iterations);
  if (!result.report.converged()) {
    std::ostringstream msg;
    msg << "velocity block solve did not converge (" << to_string(result.report.status) << " after "
        << result.report.iterations << " inner iterations, relative residual "
        << result.report.rel_residual << ")";
    throw SolverError(msg.str());
  }
  std::copy(result.solution.begin(), result.solution.end(), z.begin());
}

BlockPreconditioner::BlockPreconditioner(PrecondKind kind, const BlockSystem &sys,
                                         const VelocityBlockSolver &vsolve)
    : kind_(kind), sys_(&sys), vsolve_(&vsolve), pscale_(sys.n_p()) {
  for (std::size_t t = 0; t < pscale_.size(); ++t) pscale_[t] = 2.0 * sys.mu_cells[t] / sys.Mp[t];
}

void BlockPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const std::size_t nu = sys_->n_u(), np = sys_->n_p();
  const auto ru = r.subspan(0, nu);
  const auto rp = r.subspan(nu, np);
  auto zu = z.subspan(0, nu);
  auto zp = z.subspan(nu, np);
  switch (kind_) {
    case PrecondKind::BD:
    case PrecondKind::MD:
      vsolve_->apply(ru, zu);
      for (std::size_t t = 0; t < np; ++t) zp[t] = pscale_[t] * rp[t];
      break;
    case PrecondKind::BL:
    case PrecondKind::ML: {
      vsolve_->apply(ru, zu);
      std::vector<double> bz(np);
      sys_->B.multiply(zu, bz);
      for (std::size_t t = 0; t < np; ++t) zp[t] = pscale_[t] * (rp[t] - bz[t]);
      break;
    }
    case PrecondKind::BU:
    case PrecondKind::MU: {
      for (std::size_t t = 0; t < np; ++t) zp[t] = pscale_[t] * rp[t];
      std::vector<double> rhs(ru.begin(), ru.end());
      sys_->Bt.multiply_add(-1.0, zp, rhs);
      vsolve_->apply(rhs, zu);
      break;
    }
  }
}

StokesSolution solve_stokes(const BlockSystem &sys, PrecondKind kind,
                            const StokesSolveOptions &options) {
  const auto vprec = EgVelocityPreconditioner::from_system(sys, options.velocity);
  return solve_stokes(sys, kind, vprec, options);
}

StokesSolution solve_stokes(const BlockSystem &sys, PrecondKind kind,
                            const EgVelocityPreconditioner &vprec,
                            const StokesSolveOptions &options) {
  const std::size_t nu = sys.n_u(), np = sys.n_p();
  const bool mean_zero = sys.dofs.mean_zero_pressure;
  VelocityBlockSolver vsolve(sys.A, vprec, velocity_mode_for(kind), options.exact_tol,
                             options.inexact_tol, options.inner_max_iters);
  BlockPreconditioner bprec(kind, sys, vsolve);

  std::vector<double> b = sys.rhs();
  if (mean_zero) project_sum_zero(std::span<double>(b).subspan(nu, np));

  LinearOperator op = [&sys](std::span<const double> x, std::span<double> y) { sys.apply(x, y); };
  LinearOperator prec = [&](std::span<const double> r, std::span<double> z) {
    bprec.apply(r, z);
    if (mean_zero) project_mean_zero(z.subspan(nu, np), sys.Mp);
  };

  auto result = fgmres(op, prec, b, options.outer);
  StokesSolution sol;
  sol.report = std::move(result.report);
  sol.report.preconditioner = to_string(kind);
  sol.report.inner_iterations = vsolve.total_iterations();
  sol.report.max_inner_iterations = vsolve.max_iterations_seen();
  sol.u.coeffs.assign(result.solution.begin(), result.solution.begin() + static_cast<std::ptrdiff_t>(nu));
  sol.p.values.assign(result.solution.begin() + static_cast<std::ptrdiff_t>(nu), result.solution.end());
  if (mean_zero) project_mean_zero(sol.p.values, sys.Mp);
  return sol;
}

}  // namespace egs
