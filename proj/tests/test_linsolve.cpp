#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "egstokes/amg.hpp"
#include "egstokes/krylov.hpp"
#include "oracles.hpp"

using namespace egs;

namespace {

SparseMatrix laplace_1d(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i);
    t.push_back({k, k, 2.0});
    if (i > 0) t.push_back({k, k - 1, -1.0});
    if (i + 1 < n) t.push_back({k, k + 1, -1.0});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix laplace_2d(int n) {
  std::vector<Triplet> t;
  auto id = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      t.push_back({id(i, j), id(i, j), 4.0});
      if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
      if (i + 1 < n) t.push_back({id(i, j), id(i + 1, j), -1.0});
      if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
      if (j + 1 < n) t.push_back({id(i, j), id(i, j + 1), -1.0});
    }
  return SparseMatrix::from_triplets(static_cast<std::size_t>(n * n), static_cast<std::size_t>(n * n),
                                     std::move(t));
}

double max_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("sparse matrix basics") {
  const auto m = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {0, 2, 2.0}, {1, 1, 3.0}, {0, 0, 4.0}});
  CHECK(m.nnz() == 3);
  CHECK(m.coeff(0, 0) == 5.0);
  CHECK(m.coeff(1, 2) == 0.0);
  const std::vector<double> x{1.0, 1.0, 1.0};
  const auto y = m * x;
  CHECK(y[0] == 7.0);
  CHECK(y[1] == 3.0);
  const auto t = m.transpose();
  CHECK(t.rows() == 3);
  CHECK(t.coeff(2, 0) == 2.0);
  CHECK((oracle::dense(t) - oracle::dense(m).transpose()).norm() == 0.0);

  const auto sq = SparseMatrix::from_triplets(3, 3, {{0, 1, 2.0}, {1, 0, 4.0}, {2, 2, 1.0}});
  CHECK(sq.symmetric_part().coeff(0, 1) == 3.0);
  CHECK(sq.leading_block(2).rows() == 2);
  CHECK(sq.leading_block(2).coeff(1, 0) == 4.0);
  CHECK(sq.scaled(-2.0).coeff(2, 2) == -2.0);
  CHECK(sq.max_abs() == 4.0);
  const auto prod = multiply(sq, sq);
  CHECK((oracle::dense(prod) - oracle::dense(sq) * oracle::dense(sq)).norm() == 0.0);
  const auto sum = add(sq, 1.0, SparseMatrix::identity(3), 2.0);
  CHECK(sum.coeff(1, 1) == 2.0);
  CHECK(sum.coeff(2, 2) == 3.0);
}

TEST_CASE("fgmres on the identity converges in one step") {
  const auto id = SparseMatrix::identity(5);
  const std::vector<double> b{1, 2, 3, 4, 5};
  const auto r = fgmres(as_operator(id), identity_operator(), b, {1e-12, 10});
  CHECK(r.report.converged());
  CHECK(r.report.iterations == 1);
  CHECK(max_diff(r.solution, b) < 1e-14);
}

TEST_CASE("fgmres on a nonsymmetric 2x2 system") {
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, -1.0}, {1, 1, 3.0}});
  const std::vector<double> b{3.0, 2.0};
  const auto r = fgmres(as_operator(a), identity_operator(), b, {1e-14, 10});
  CHECK(r.report.converged());
  CHECK(r.report.iterations <= 2);
  CHECK(r.solution[0] == doctest::Approx(1.0));
  CHECK(r.solution[1] == doctest::Approx(1.0));
}

TEST_CASE("fgmres residual history is monotone") {
  std::mt19937 rng(4);
  const auto a = add(laplace_2d(12), 1.0, SparseMatrix::identity(144), 0.5);
  const auto b = oracle::random_vector(144, rng);
  KrylovConfig cfg{1e-10, 500};
  cfg.record_history = true;
  const auto r = fgmres(as_operator(a), identity_operator(), b, cfg);
  REQUIRE(r.report.converged());
  for (std::size_t k = 1; k < r.report.history.size(); ++k)
    CHECK(r.report.history[k] <= r.report.history[k - 1] * (1.0 + 1e-12));
  CHECK(r.report.true_rel_residual < 1e-9);

  // Scaling the right-hand side does not change the iteration count.
  auto b2 = b;
  vec::scale(1e6, b2);
  const auto r2 = fgmres(as_operator(a), identity_operator(), b2, cfg);
  CHECK(r2.report.iterations == r.report.iterations);

  // Restarting still converges.
  KrylovConfig rcfg{1e-8, 2000, 10};
  CHECK(fgmres(as_operator(a), identity_operator(), b, rcfg).report.converged());
}

TEST_CASE("fgmres degenerate inputs") {
  const auto id = SparseMatrix::identity(3);
  const std::vector<double> zero(3, 0.0);
  const auto r0 = fgmres(as_operator(id), identity_operator(), zero, {});
  CHECK(r0.report.converged());
  CHECK(r0.report.iterations == 0);
  for (double v : r0.solution) CHECK(v == 0.0);

  const std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK(fgmres(as_operator(id), identity_operator(), bad, {}).report.status == SolverStatus::NotANumber);

  const std::vector<double> b{1.0, 1.0, 1.0};
  const LinearOperator poison = [](std::span<const double>, std::span<double> y) {
    for (double &v : y) v = std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_FALSE(fgmres(as_operator(id), poison, b, {}).report.converged());

  CHECK_THROWS_AS(fgmres(as_operator(id), identity_operator(), b, {0.0, 10}), LinearAlgebraError);
  CHECK_THROWS_AS(fgmres(as_operator(id), identity_operator(), b, {1e-6, 0}), LinearAlgebraError);

  // Too few iterations is reported, not thrown.
  const auto lap = laplace_1d(50);
  std::vector<double> ones(50, 1.0);
  const auto rm = fgmres(as_operator(lap), identity_operator(), ones, {1e-12, 3});
  CHECK(rm.report.status == SolverStatus::MaxIterations);
  CHECK(rm.report.iterations == 3);
}

TEST_CASE("pcg agrees with a dense solve") {
  std::mt19937 rng(8);
  const auto a = laplace_2d(8);
  const auto b = oracle::random_vector(64, rng);
  const auto r = pcg(as_operator(a), identity_operator(), b, {1e-12, 500});
  REQUIRE(r.report.converged());
  const Eigen::VectorXd ref = oracle::dense(a).ldlt().solve(oracle::as_eigen(b));
  CHECK((oracle::as_eigen(r.solution) - ref).norm() < 1e-9 * ref.norm());
}

TEST_CASE("damped Jacobi") {
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
  std::vector<double> x{0.0, 0.0};
  jacobi_smooth(a, std::vector<double>{2.0, 4.0}, x, 1, 1.0);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 1.0);
  x = {0.0, 0.0};
  jacobi_smooth(a, std::vector<double>{2.0, 4.0}, x, 1, 0.5);
  CHECK(x[0] == 0.5);
  // Two half-steps on a diagonal system: 1 - (1/2)^2.
  jacobi_smooth(a, std::vector<double>{2.0, 4.0}, x, 1, 0.5);
  CHECK(x[0] == 0.75);
  const auto singular = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  CHECK_THROWS_AS(jacobi_smooth(singular, std::vector<double>{1.0, 1.0}, x, 1, 1.0), LinearAlgebraError);
}

TEST_CASE("pressure projections") {
  std::vector<double> p{1.0, 2.0, 3.0};
  project_sum_zero(p);
  CHECK(p[0] == doctest::Approx(-1.0));
  CHECK(p[2] == doctest::Approx(1.0));

  std::vector<double> q{1.0, 4.0};
  project_mean_zero(q, std::vector<double>{3.0, 1.0});
  // Weighted mean (3 + 4) / 4 = 1.75.
  CHECK(q[0] == doctest::Approx(-0.75));
  CHECK(q[1] == doctest::Approx(2.25));
  CHECK(3.0 * q[0] + q[1] == doctest::Approx(0.0));

  std::vector<double> empty;
  project_sum_zero(empty);
  CHECK(empty.empty());
}

TEST_CASE("aggregation covers every node") {
  const auto a = laplace_2d(10);
  const auto [agg, count] = aggregate(a, 0.08);
  CHECK(count > 1);
  CHECK(count < 100);
  std::vector<int> sizes(static_cast<std::size_t>(count), 0);
  for (int g : agg) {
    REQUIRE(g >= 0);
    REQUIRE(g < count);
    ++sizes[g];
  }
  for (int s : sizes) CHECK(s > 0);

  // Component labels keep the two halves apart.
  std::vector<int> comp(100);
  for (int i = 0; i < 100; ++i) comp[i] = i < 50 ? 0 : 1;
  const auto [agg2, count2] = aggregate(a, 0.08, comp);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j < 100; ++j)
      if (agg2[i] == agg2[j]) CHECK(comp[i] == comp[j]);
  CHECK(count2 > 0);
}

TEST_CASE("AMG V-cycle as a CG preconditioner") {
  const std::size_t n = 1000;
  const auto a = laplace_1d(n);
  AmgOptions opts;
  opts.max_coarse = 10;
  const auto hier = amg_setup(a, opts);
  CHECK(hier.num_levels() >= 3);
  CHECK(hier.operator_complexity() < 2.5);
  for (std::size_t l = 1; l < hier.num_levels(); ++l)
    CHECK(hier.levels[l].a.rows() < hier.levels[l - 1].a.rows());

  std::mt19937 rng(12);
  const auto b = oracle::random_vector(n, rng);
  const LinearOperator m = [&hier](std::span<const double> r, std::span<double> z) { amg_vcycle(hier, r, z); };
  const auto r = pcg(as_operator(a), m, b, {1e-8, 200});
  CHECK(r.report.converged());
  CHECK(r.report.iterations <= 15);
  const auto plain = pcg(as_operator(a), identity_operator(), b, {1e-8, 2000});
  CHECK(plain.report.iterations > 3 * r.report.iterations);

  // The V-cycle is a symmetric linear operator.
  const auto x = oracle::random_vector(n, rng), y = oracle::random_vector(n, rng);
  const auto mx = amg_vcycle(hier, x), my = amg_vcycle(hier, y);
  CHECK(vec::dot(y, mx) == doctest::Approx(vec::dot(x, my)).epsilon(1e-10));
  std::vector<double> xy(n);
  for (std::size_t i = 0; i < n; ++i) xy[i] = 2.0 * x[i] - 3.0 * y[i];
  const auto mxy = amg_vcycle(hier, xy);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(mxy[i] - (2.0 * mx[i] - 3.0 * my[i])));
  CHECK(worst < 1e-10);
}

TEST_CASE("AMG on a 2D Laplacian is mesh independent") {
  int prev = 0;
  for (int n : {16, 32, 64}) {
    const auto a = laplace_2d(n);
    const auto hier = amg_setup(a);
    const std::vector<double> b(a.rows(), 1.0);
    const LinearOperator m = [&hier](std::span<const double> r, std::span<double> z) { amg_vcycle(hier, r, z); };
    const auto r = pcg(as_operator(a), m, b, {1e-8, 300});
    REQUIRE(r.report.converged());
    if (prev) CHECK(r.report.iterations <= prev + 5);
    prev = r.report.iterations;
  }
}

TEST_CASE("AMG setup errors") {
  const auto hole = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {2, 2, 1.0}});
  CHECK_THROWS_AS(amg_setup(hole), LinearAlgebraError);
  const auto rect = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(amg_setup(rect), LinearAlgebraError);
  AmgOptions bad;
  bad.components = {0, 1};
  CHECK_THROWS_AS(amg_setup(laplace_1d(5), bad), LinearAlgebraError);
}

TEST_CASE("fgmres with an exact preconditioner") {
  // One step reaches an invariant subspace; a tolerance at rounding level must
  // still be met after the restart, and an unreachable one must terminate
  // (the status then depends on whether the estimate hit exactly zero).
  std::mt19937 rng(14);
  const auto a = add(laplace_2d(20), 1.0, SparseMatrix::identity(400), 0.1);
  const auto ldlt = oracle::dense(a).ldlt();
  const LinearOperator exact = [&ldlt](std::span<const double> r, std::span<double> z) {
    const Eigen::VectorXd x = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
    std::copy(x.data(), x.data() + x.size(), z.begin());
  };
  const auto b = oracle::random_vector(400, rng);
  const auto r = fgmres(as_operator(a), exact, b, {1e-13, 50});
  CHECK(r.report.converged());
  CHECK(r.report.iterations <= 3);
  CHECK(r.report.true_rel_residual <= 1e-13);

  const auto hard = fgmres(as_operator(a), exact, b, {1e-30, 50});
  CHECK(hard.report.iterations <= 50);
  CHECK(hard.report.true_rel_residual < 1e-14);
}
