#include "egstokes/krylov.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace egs {

LinearOperator as_operator(const SparseMatrix &a) {
  return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

LinearOperator identity_operator() {
  return [](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), y.begin());
  };
}

void KrylovConfig::validate() const {
  if (!(rel_tol > 0.0)) throw LinearAlgebraError("rel_tol must be positive");
  if (max_iters < 1) throw LinearAlgebraError("max_iters must be at least 1");
  if (restart < 0) throw LinearAlgebraError("restart must be non-negative");
}

const char *to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max-iterations";
    case SolverStatus::Breakdown: return "breakdown";
    case SolverStatus::NotANumber: return "nan";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double true_residual(const LinearOperator &op, std::span<const double> rhs,
                     std::span<const double> x, double bnorm) {
  std::vector<double> r(rhs.size());
  op(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  return vec::norm2(r) / bnorm;
}

}  // namespace

KrylovResult fgmres(const LinearOperator &op, const LinearOperator &precond,
                    std::span<const double> rhs, const KrylovConfig &config,
                    std::span<const double> x0) {
  config.validate();
  const auto t0 = Clock::now();
  const std::size_t n = rhs.size();
  KrylovResult out;
  out.solution.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.solution.begin());
  SolverReport &rep = out.report;

  const double bnorm = vec::norm2(rhs);
  if (!std::isfinite(bnorm)) {
    rep.status = SolverStatus::NotANumber;
    rep.seconds = seconds_since(t0);
    return out;
  }
  if (bnorm == 0.0) {
    std::fill(out.solution.begin(), out.solution.end(), 0.0);
    rep.status = SolverStatus::Converged;
    if (config.record_history) rep.history.push_back(0.0);
    rep.seconds = seconds_since(t0);
    return out;
  }

  const int cycle = config.restart > 0 ? config.restart : config.max_iters;
  std::vector<std::vector<double>> v, z;
  // Hessenberg columns, already rotated to upper triangular form.
  std::vector<std::vector<double>> h;
  std::vector<double> cs, sn, g;
  std::vector<double> r(n), w(n);

  int total = 0;
  bool done = false;
  // Set when the previous cycle ended on an invariant subspace.
  bool after_breakdown = false;
  while (!done) {
    op(out.solution, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    double beta = vec::norm2(r);
    rep.rel_residual = beta / bnorm;
    if (!std::isfinite(beta)) {
      rep.status = SolverStatus::NotANumber;
      break;
    }
    if (config.record_history && rep.history.empty()) rep.history.push_back(rep.rel_residual);
    if (rep.rel_residual <= config.rel_tol) {
      rep.status = SolverStatus::Converged;
      break;
    }
    if (total >= config.max_iters) {
      rep.status = SolverStatus::MaxIterations;
      break;
    }

    v.assign(1, r);
    vec::scale(1.0 / beta, v[0]);
    z.clear();
    h.clear();
    cs.clear();
    sn.clear();
    g.assign(1, beta);

    int j = 0;
    bool stop_cycle = false;
    while (j < cycle && total < config.max_iters && !stop_cycle) {
      z.emplace_back(n);
      precond(v[j], z[j]);
      op(z[j], w);
      std::vector<double> col(j + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        col[i] = vec::dot(w, v[i]);
        vec::axpy(-col[i], v[i], w);
      }
      // One reorthogonalization pass keeps the basis orthogonal for the long
      // unrestarted cycles used by the outer solver.
      for (int i = 0; i <= j; ++i) {
        const double c = vec::dot(w, v[i]);
        col[i] += c;
        vec::axpy(-c, v[i], w);
      }
      col[j + 1] = vec::norm2(w);
      const double hnext = col[j + 1];

      for (int i = 0; i < j; ++i) {
        const double a = cs[i] * col[i] + sn[i] * col[i + 1];
        col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
        col[i] = a;
      }
      const double denom = std::hypot(col[j], col[j + 1]);
      if (!std::isfinite(denom)) {
        rep.status = SolverStatus::NotANumber;
        done = true;
        break;
      }
      if (denom == 0.0) {
        // Singular least-squares problem: the new direction adds nothing.
        rep.status = SolverStatus::Breakdown;
        z.pop_back();
        done = true;
        break;
      }
      cs.push_back(col[j] / denom);
      sn.push_back(col[j + 1] / denom);
      col[j] = denom;
      col[j + 1] = 0.0;
      g.push_back(-sn[j] * g[j]);
      g[j] = cs[j] * g[j];
      col.pop_back();
      h.push_back(std::move(col));

      ++j;
      ++total;
      rep.rel_residual = std::abs(g[j]) / bnorm;
      if (config.record_history) rep.history.push_back(rep.rel_residual);
      if (rep.rel_residual <= config.rel_tol) {
        rep.status = SolverStatus::Converged;
        stop_cycle = true;
        done = true;
      } else if (hnext <= 1e-14 * beta) {
        // Invariant subspace: the update is exact up to rounding. Restart once
        // from the true residual; a second breakdown in a row is final.
        stop_cycle = true;
        if (after_breakdown) {
          rep.status = SolverStatus::Breakdown;
          done = true;
        }
        after_breakdown = true;
      } else {
        after_breakdown = false;
        v.emplace_back(w);
        vec::scale(1.0 / hnext, v.back());
      }
    }

    // Back substitution on the triangular factor and update of x.
    const int m = static_cast<int>(h.size());
    std::vector<double> y(static_cast<std::size_t>(m), 0.0);
    for (int i = m - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < m; ++k) s -= h[k][i] * y[k];
      y[i] = s / h[i][i];
    }
    for (int i = 0; i < m; ++i) vec::axpy(y[i], z[i], out.solution);
    if (!done && total >= config.max_iters) {
      rep.status = SolverStatus::MaxIterations;
      done = true;
    }
  }

  rep.iterations = total;
  rep.true_rel_residual = true_residual(op, rhs, out.solution, bnorm);
  if (!std::isfinite(rep.true_rel_residual)) rep.status = SolverStatus::NotANumber;
  rep.seconds = seconds_since(t0);
  return out;
}

KrylovResult pcg(const LinearOperator &op, const LinearOperator &precond,
                 std::span<const double> rhs, const KrylovConfig &config) {
  config.validate();
  const auto t0 = Clock::now();
  const std::size_t n = rhs.size();
  KrylovResult out;
  out.solution.assign(n, 0.0);
  SolverReport &rep = out.report;
  const double bnorm = vec::norm2(rhs);
  if (bnorm == 0.0) {
    rep.status = SolverStatus::Converged;
    rep.seconds = seconds_since(t0);
    return out;
  }
  std::vector<double> r(rhs.begin(), rhs.end()), zv(n), p(n), q(n);
  precond(r, zv);
  p = zv;
  double rz = vec::dot(r, zv);
  if (config.record_history) rep.history.push_back(1.0);
  rep.status = SolverStatus::MaxIterations;
  for (int k = 0; k < config.max_iters; ++k) {
    op(p, q);
    const double pq = vec::dot(p, q);
    if (!(pq > 0.0)) {
      rep.status = std::isfinite(pq) ? SolverStatus::Breakdown : SolverStatus::NotANumber;
      break;
    }
    const double a = rz / pq;
    vec::axpy(a, p, out.solution);
    vec::axpy(-a, q, r);
    rep.iterations = k + 1;
    rep.rel_residual = vec::norm2(r) / bnorm;
    if (config.record_history) rep.history.push_back(rep.rel_residual);
    if (!std::isfinite(rep.rel_residual)) {
      rep.status = SolverStatus::NotANumber;
      break;
    }
    if (rep.rel_residual <= config.rel_tol) {
      rep.status = SolverStatus::Converged;
      break;
    }
    precond(r, zv);
    const double rz_new = vec::dot(r, zv);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = zv[i] + beta * p[i];
  }
  rep.true_rel_residual = true_residual(op, rhs, out.solution, bnorm);
  rep.seconds = seconds_since(t0);
  return out;
}

void jacobi_smooth(const SparseMatrix &a, std::span<const double> rhs, std::span<double> x,
                   int sweeps, double damping) {
  const auto d = a.diagonal_values();
  for (double v : d) {
    if (v == 0.0) throw LinearAlgebraError("Jacobi smoother: zero diagonal entry");
  }
  std::vector<double> ax(x.size());
  for (int s = 0; s < sweeps; ++s) {
    a.multiply(x, ax);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += damping * (rhs[i] - ax[i]) / d[i];
  }
}

void project_mean_zero(std::span<double> p, std::span<const double> cell_areas) {
  double weighted = 0.0, area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    weighted += p[i] * cell_areas[i];
    area += cell_areas[i];
  }
  const double mean = weighted / area;
  for (double &v : p) v -= mean;
}

void project_sum_zero(std::span<double> p) {
  if (p.empty()) return;
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  for (double &v : p) v -= mean;
}

}  // namespace egs
