#include "egstokes/amg.hpp"

#include <cmath>
#include <sstream>

namespace egs {

double AmgHierarchy::operator_complexity() const {
  if (levels.empty()) return 0.0;
  double total = 0.0;
  for (const auto &l : levels) total += static_cast<double>(l.a.nnz());
  return total / static_cast<double>(levels.front().a.nnz());
}

std::pair<std::vector<int>, int> aggregate(const SparseMatrix &a, double threshold,
                                           std::span<const int> components) {
  const std::size_t n = a.rows();
  const auto offsets = a.offsets();
  const auto cols = a.columns();
  const auto vals = a.values();
  const auto diag = a.diagonal_values();
  auto same_component = [&](std::size_t i, std::size_t j) {
    return components.empty() || components[i] == components[j];
  };

  // Strong neighbour lists.
  std::vector<std::vector<int>> strong(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(cols[k]);
      if (j == i || !same_component(i, j)) continue;
      if (std::abs(vals[k]) > threshold * std::sqrt(std::abs(diag[i] * diag[j])))
        strong[i].push_back(cols[k]);
    }
  }

  std::vector<int> agg(n, -1);
  int count = 0;

  // Phase 1: seed aggregates at nodes whose whole strong neighbourhood is free.
  for (std::size_t i = 0; i < n; ++i) {
    if (agg[i] >= 0 || strong[i].empty()) continue;
    bool free = true;
    for (int j : strong[i]) free = free && agg[j] < 0;
    if (!free) continue;
    agg[i] = count;
    for (int j : strong[i]) agg[j] = count;
    ++count;
  }

  // Phase 2: attach leftovers to the aggregate of their strongest aggregated neighbour.
  std::vector<int> phase2 = agg;
  for (std::size_t i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    double best = -1.0;
    for (int j : strong[i]) {
      if (agg[j] < 0) continue;
      const double w = std::abs(a.coeff(i, static_cast<std::size_t>(j)));
      if (w > best) {
        best = w;
        phase2[i] = agg[j];
      }
    }
  }
  agg = std::move(phase2);

  // Phase 3: group whatever is left with its free strong neighbours. Nodes
  // without strong connections join the aggregate of their largest coupling.
  for (std::size_t i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    if (!strong[i].empty()) {
      agg[i] = count;
      for (int j : strong[i])
        if (agg[j] < 0) agg[j] = count;
      ++count;
      continue;
    }
    double best = 0.0;
    int target = -1;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      const int j = cols[k];
      if (static_cast<std::size_t>(j) == i || agg[j] < 0 || !same_component(i, j)) continue;
      if (std::abs(vals[k]) > best) {
        best = std::abs(vals[k]);
        target = agg[j];
      }
    }
    agg[i] = target >= 0 ? target : count++;
  }
  return {std::move(agg), count};
}

namespace {

std::vector<double> inverse_diagonal(const SparseMatrix &a) {
  auto d = a.diagonal_values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) {
      std::ostringstream msg;
      msg << "AMG setup: zero diagonal in row " << i;
      throw LinearAlgebraError(msg.str());
    }
    d[i] = 1.0 / d[i];
  }
  return d;
}

}  // namespace

AmgHierarchy amg_setup(const SparseMatrix &a, const AmgOptions &options) {
  if (a.rows() != a.cols()) throw LinearAlgebraError("AMG setup: matrix must be square");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a.offsets()[i] == a.offsets()[i + 1]) {
      std::ostringstream msg;
      msg << "AMG setup: empty row " << i;
      throw LinearAlgebraError(msg.str());
    }
  }
  if (!options.components.empty() && options.components.size() != a.rows())
    throw LinearAlgebraError("AMG setup: component labels have wrong length");

  AmgHierarchy hier;
  hier.options = options;
  AmgLevel fine;
  fine.a = a;
  fine.components = options.components;
  hier.levels.push_back(std::move(fine));

  while (hier.levels.back().a.rows() > options.max_coarse) {
    if (static_cast<int>(hier.levels.size()) >= options.max_levels)
      throw LinearAlgebraError("AMG setup: level limit reached before the coarse size target");
    AmgLevel &lvl = hier.levels.back();
    const std::size_t n = lvl.a.rows();
    lvl.inv_diag = inverse_diagonal(lvl.a);
    auto [agg, nc] = aggregate(lvl.a, options.strength_threshold, lvl.components);
    if (static_cast<std::size_t>(nc) >= n)
      throw LinearAlgebraError("AMG setup: aggregation failed to coarsen");
    lvl.aggregates = agg;

    // Tentative prolongation: injection of aggregate constants, columns
    // normalised. Smoothed by one damped Jacobi step.
    std::vector<int> size(static_cast<std::size_t>(nc), 0);
    for (int g : agg) ++size[static_cast<std::size_t>(g)];
    std::vector<Triplet> pt;
    pt.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      pt.push_back({static_cast<int>(i), agg[i], 1.0 / std::sqrt(static_cast<double>(size[agg[i]]))});
    const SparseMatrix tentative = SparseMatrix::from_triplets(n, static_cast<std::size_t>(nc), pt);
    SparseMatrix dinv_a = lvl.a;
    {
      const auto offs = dinv_a.offsets();
      auto vals = dinv_a.values();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = offs[i]; k < offs[i + 1]; ++k) vals[k] *= lvl.inv_diag[i];
    }
    lvl.p = add(tentative, 1.0, multiply(dinv_a, tentative), -options.prolongation_damping);
    lvl.r = lvl.p.transpose();

    AmgLevel coarse;
    coarse.a = multiply(lvl.r, multiply(lvl.a, lvl.p));
    if (!lvl.components.empty()) {
      coarse.components.assign(static_cast<std::size_t>(nc), 0);
      for (std::size_t i = 0; i < n; ++i) coarse.components[agg[i]] = lvl.components[i];
    }
    hier.levels.push_back(std::move(coarse));
  }

  AmgLevel &last = hier.levels.back();
  const std::size_t nc = last.a.rows();
  hier.coarse_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = last.a.offsets()[i]; k < last.a.offsets()[i + 1]; ++k)
      hier.coarse_matrix(static_cast<Eigen::Index>(i), last.a.columns()[k]) = last.a.values()[k];
  hier.coarse_solver.compute(hier.coarse_matrix);
  if (hier.coarse_solver.info() != Eigen::Success)
    throw LinearAlgebraError("AMG setup: coarse factorisation failed");
  return hier;
}

namespace {

void smooth(const AmgLevel &lvl, std::span<const double> b, std::span<double> x, int sweeps,
            double omega, std::vector<double> &work) {
  for (int s = 0; s < sweeps; ++s) {
    lvl.a.multiply(x, work);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * lvl.inv_diag[i] * (b[i] - work[i]);
  }
}

void cycle(const AmgHierarchy &hier, std::size_t l, std::span<const double> b, std::span<double> x) {
  const AmgLevel &lvl = hier.levels[l];
  std::fill(x.begin(), x.end(), 0.0);
  if (l + 1 == hier.levels.size()) {
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> xx(x.data(), static_cast<Eigen::Index>(x.size()));
    xx = hier.coarse_solver.solve(bb);
    return;
  }
  const auto &opt = hier.options;
  std::vector<double> work(x.size());
  smooth(lvl, b, x, opt.pre_sweeps, opt.smoother_damping, work);
  lvl.a.multiply(x, work);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = b[i] - work[i];
  std::vector<double> bc(lvl.r.rows()), xc(lvl.r.rows());
  lvl.r.multiply(work, bc);
  cycle(hier, l + 1, bc, xc);
  lvl.p.multiply_add(1.0, xc, x);
  smooth(lvl, b, x, opt.post_sweeps, opt.smoother_damping, work);
}

}  // namespace

void amg_vcycle(const AmgHierarchy &hier, std::span<const double> rhs, std::span<double> z) {
  cycle(hier, 0, rhs, z);
}

std::vector<double> amg_vcycle(const AmgHierarchy &hier, std::span<const double> rhs) {
  std::vector<double> z(rhs.size());
  cycle(hier, 0, rhs, z);
  return z;
}

}  // namespace egs
