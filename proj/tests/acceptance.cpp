// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
//
//   acceptance [--data DIR] [--report FILE] [--strict]
//
// Exit status is 0 once every criterion has been evaluated; --strict turns
// any FAIL into a nonzero status.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egstokes/harness.hpp"

namespace {

using namespace egs;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string &what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string &what) { details.push_back("      " + what); }
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool within(double got, double ref, double rel) { return std::abs(got - ref) <= rel * std::abs(ref); }

const std::vector<PrecondKind> kKinds = all_precond_kinds();

// Reference tables for the uniform-mesh examples (h = 1/4 ... 1/64).
constexpr double kEx1Energy[] = {1.3624, 0.6706, 0.3206, 0.1545, 0.0756};
constexpr double kEx1Pressure[] = {1.1553, 0.4991, 0.1914, 0.0726, 0.0286};
constexpr double kEx2EnergyFinest = 0.0750;
// Iteration counts, BD BL BU MD ML MU.
const std::map<int, std::vector<int>> kEx1Counts = {
    {3, {22, 11, 11, 22, 14, 17}}, {4, {24, 12, 12, 24, 15, 18}},
    {5, {24, 11, 11, 24, 15, 18}}, {6, {22, 11, 10, 24, 14, 20}}};
const std::map<double, std::vector<int>> kEx3Counts = {{1.0, {31, 16, 13, 32, 21, 25}},
                                                       {0.1, {34, 18, 16, 36, 23, 24}},
                                                       {0.01, {41, 21, 21, 42, 28, 27}},
                                                       {0.001, {47, 25, 25, 45, 30, 30}}};
const std::vector<int> kEx4Counts = {137, 73, 66, 136, 93, 88};

Outcome dof_counts() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t nu[] = {82, 290, 1090, 4226, 16642};
  const std::size_t np[] = {32, 128, 512, 2048, 8192};
  for (int level = 2; level <= 6; ++level) {
    const DofMap d = DofMap::build(generate_unit_square(level, BoundarySpec::all_dirichlet()));
    o.require(d.n_u() == nu[level - 2] && d.n_p() == np[level - 2],
              fmt("h=1/%d: %zu/%zu (expected %zu/%zu)", 1 << level, d.n_u(), d.n_p(), nu[level - 2],
                  np[level - 2]));
  }
  const double s = seconds_since(t0);
  o.require(s < 1.0, fmt("runtime %.3f s < 1 s", s));
  return o;
}

ConvergenceStudy convergence(ExampleId id) {
  ExperimentConfig c;
  c.example = id;
  c.levels = LevelRange{2, 6};
  c.disc = {0, 1.0};
  return run_convergence(c);
}

void report_rows(Outcome &o, const ConvergenceStudy &s) {
  for (const auto &r : s.rows)
    o.note(fmt("h=1/%-3d energy %.4f (rate %.2f)  pressure %.4f (rate %.2f)  %d its", (int)std::lround(1 / r.h),
               r.energy_error, r.velocity_rate, r.pressure_error, r.pressure_rate, r.iterations));
}

void check_rates(Outcome &o, const ConvergenceStudy &s) {
  for (std::size_t k = 1; k < s.rows.size(); ++k) {
    const auto &r = s.rows[k];
    const int n = (int)std::lround(1 / r.h);
    o.require(r.velocity_rate >= 0.9 && r.velocity_rate <= 1.25,
              fmt("velocity rate to h=1/%d: %.3f in [0.9, 1.25]", n, r.velocity_rate));
    o.require(r.pressure_rate >= 1.0, fmt("pressure rate to h=1/%d: %.3f >= 1.0", n, r.pressure_rate));
  }
}

Outcome convergence_ex1() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto s = convergence(ExampleId::Ex1);
  if (s.failure) {
    o.require(false, "study failed: " + *s.failure);
    return o;
  }
  report_rows(o, s);
  check_rates(o, s);
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    const auto &r = s.rows[k];
    const int n = (int)std::lround(1 / r.h);
    o.require(within(r.energy_error, kEx1Energy[k], 0.25),
              fmt("h=1/%d energy %.4f vs %.4f (%+.0f%%)", n, r.energy_error, kEx1Energy[k],
                  100 * (r.energy_error / kEx1Energy[k] - 1)));
    o.require(within(r.pressure_error, kEx1Pressure[k], 0.25),
              fmt("h=1/%d pressure %.4f vs %.4f (%+.0f%%)", n, r.pressure_error, kEx1Pressure[k],
                  100 * (r.pressure_error / kEx1Pressure[k] - 1)));
  }
  const double sec = seconds_since(t0);
  o.require(sec < 120.0, fmt("runtime %.1f s < 120 s", sec));

  // Diagnostic only: with half the jump penalty the pressure column lines up
  // with the reference to four digits. Not used for the verdict.
  ExperimentConfig c;
  c.example = ExampleId::Ex1;
  c.levels = LevelRange{2, 5};
  c.disc = {0, 0.5};
  const auto half = run_convergence(c);
  if (!half.failure) {
    std::string line = "diagnostic alpha=0.5 pressure:";
    for (const auto &r : half.rows) line += fmt(" %.4f", r.pressure_error);
    o.note(line);
  }
  return o;
}

Outcome convergence_ex2() {
  Outcome o;
  const auto s = convergence(ExampleId::Ex2);
  if (s.failure) {
    o.require(false, "study failed: " + *s.failure);
    return o;
  }
  report_rows(o, s);
  check_rates(o, s);
  const double e = s.rows.back().energy_error;
  o.require(within(e, kEx2EnergyFinest, 0.25),
            fmt("h=1/64 energy %.4f vs %.4f (%+.0f%%)", e, kEx2EnergyFinest, 100 * (e / kEx2EnergyFinest - 1)));
  return o;
}

std::string row(const std::vector<int> &v) {
  std::string s;
  for (int x : v) s += fmt("%4d", x);
  return s;
}

std::vector<int> counts_of(const std::vector<SolverCell> &cells, const std::string &label, Outcome &o) {
  std::vector<int> out;
  for (PrecondKind k : kKinds)
    for (const auto &c : cells)
      if (c.label == label && c.kind == k) {
        o.require(c.converged, fmt("%s %s converged%s%s", label.c_str(), to_string(k),
                                   c.message.empty() ? "" : ": ", c.message.c_str()));
        out.push_back(c.iterations);
      }
  return out;
}

void band(Outcome &o, const std::string &label, const std::vector<int> &got, const std::vector<int> &ref) {
  for (std::size_t i = 0; i < got.size(); ++i)
    o.require(within(got[i], ref[i], 0.5),
              fmt("%s %s: %d vs %d within 50%%", label.c_str(), to_string(kKinds[i]), got[i], ref[i]));
}

Outcome solvers_ex1() {
  Outcome o;
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.levels = LevelRange{3, 6};
  const auto cells = run_solver_study(c);
  std::map<int, std::vector<int>> got;
  o.note("        BD  BL  BU  MD  ML  MU");
  for (int level = 3; level <= 6; ++level) {
    got[level] = counts_of(cells, "1/" + std::to_string(1 << level), o);
    o.note(fmt("1/%-3d %s   (reference%s)", 1 << level, row(got[level]).c_str(), row(kEx1Counts.at(level)).c_str()));
  }
  for (int level = 3; level <= 6; ++level) band(o, "h=1/" + std::to_string(1 << level), got[level], kEx1Counts.at(level));
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    int lo = 1 << 30, hi = 0;
    for (const auto &[level, v] : got) lo = std::min(lo, v[i]), hi = std::max(hi, v[i]);
    o.require(hi - lo <= 3, fmt("%s spread over h: %d..%d (at most 3 apart)", to_string(kKinds[i]), lo, hi));
  }
  const double sec = seconds_since(t0);
  o.require(sec < 300.0, fmt("runtime %.1f s < 300 s", sec));
  return o;
}

Outcome viscosity_ex3(const std::filesystem::path &mesh) {
  Outcome o;
  ExperimentConfig c;
  c.example = ExampleId::Ex3;
  c.mesh_file = mesh;
  c.mu_values = {1.0, 0.1, 0.01, 0.001};
  const auto cells = run_solver_study(c);
  std::map<double, std::vector<int>> got;
  o.note("          BD  BL  BU  MD  ML  MU");
  for (double mu : c.mu_values) {
    std::ostringstream label;
    label << "mu=" << mu;
    got[mu] = counts_of(cells, label.str(), o);
    o.note(fmt("%-9s%s   (reference%s)", label.str().c_str(), row(got[mu]).c_str(), row(kEx3Counts.at(mu)).c_str()));
  }
  for (double mu : c.mu_values) band(o, fmt("mu=%g", mu), got[mu], kEx3Counts.at(mu));
  // Non-decreasing as mu decreases, checked for every column whose reference
  // is itself non-decreasing.
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    bool ref_mono = true, mono = true;
    for (std::size_t k = 1; k < c.mu_values.size(); ++k) {
      const double a = c.mu_values[k - 1], b = c.mu_values[k];
      ref_mono = ref_mono && kEx3Counts.at(b)[i] >= kEx3Counts.at(a)[i];
      mono = mono && got[b][i] >= got[a][i];
    }
    const std::string seq = fmt("%d,%d,%d,%d", got[1.0][i], got[0.1][i], got[0.01][i], got[0.001][i]);
    if (ref_mono)
      o.require(mono, fmt("%s non-decreasing as mu decreases: %s", to_string(kKinds[i]), seq.c_str()));
    else
      o.note(fmt("%s reference column is not monotone; ours %s", to_string(kKinds[i]), seq.c_str()));
  }
  return o;
}

Outcome discontinuous_ex4(const std::filesystem::path &mesh) {
  Outcome o;
  ExperimentConfig c;
  c.example = ExampleId::Ex4;
  c.mesh_file = mesh;
  c.mu_split = ViscositySplit{};
  const auto cells = run_solver_study(c);
  const auto got = counts_of(cells, "discontinuous", o);
  o.note(fmt("BD..MU %s   (reference%s)", row(got).c_str(), row(kEx4Counts).c_str()));
  band(o, "ex4", got, kEx4Counts);
  return o;
}

double quad_form(const SparseMatrix &m, const std::vector<double> &x, const std::vector<double> &y) {
  return vec::dot(x, m * y);
}

std::vector<double> random_vector(std::size_t n, std::mt19937 &rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double &x : v) x = d(rng);
  return v;
}

Outcome theta_identity() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(1);
  const Mesh m = generate_unit_square(3, BoundarySpec::all_dirichlet());
  const DofMap d = DofMap::build(m);
  const std::vector<double> mu(m.num_cells(), 1.0);
  const auto a = assemble_a(m, d, {1, 1.0}, mu);
  const auto ae = assemble_energy_gram(m, d, 1.0, mu);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto v = random_vector(d.n_u(), rng);
    const double x = quad_form(a, v, v), y = quad_form(ae, v, v);
    worst = std::max(worst, std::abs(x - y) / std::abs(y));
  }
  o.require(worst <= 1e-12, fmt("max relative gap over 100 samples %.2e <= 1e-12", worst));
  const double s = seconds_since(t0);
  o.require(s < 1.0, fmt("runtime %.3f s < 1 s", s));
  return o;
}

Outcome coercivity_continuity() {
  Outcome o;
  std::mt19937 rng(2);
  const Mesh m = generate_unit_square(3, BoundarySpec::all_dirichlet());
  const DofMap d = DofMap::build(m);
  const std::vector<double> mu(m.num_cells(), 1.0);
  const auto ae = assemble_energy_gram(m, d, 10.0, mu);
  for (int theta : {-1, 0}) {
    const auto a = assemble_a(m, d, {theta, 10.0}, mu);
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto u = random_vector(d.n_u(), rng), v = random_vector(d.n_u(), rng);
      const double vv = quad_form(ae, v, v), uu = quad_form(ae, u, u);
      lo = std::min(lo, quad_form(a, v, v) / vv);
      hi = std::max(hi, std::abs(quad_form(a, u, v)) / std::sqrt(uu * vv));
    }
    o.require(lo >= 0.5, fmt("theta=%d: min a(v,v)/|||v|||^2 = %.4f >= 0.5", theta, lo));
    o.require(hi <= 2.0, fmt("theta=%d: max |a(u,v)|/(|||u||| |||v|||) = %.4f <= 2", theta, hi));
  }
  return o;
}

Outcome infsup() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<double> betas;
  for (int level = 2; level <= 4; ++level) {
    const Mesh m = generate_unit_square(level, BoundarySpec::all_dirichlet());
    const auto a = estimate_infsup(m, 10.0, [](const Vec2 &) { return 1.0; });
    const auto b = estimate_infsup(m, 10.0, [](const Vec2 &) { return 100.0; });
    o.require(a.beta > 0.0, fmt("h=1/%d: beta %.6f (%d Lanczos steps, residual %.1e)", 1 << level, a.beta,
                                a.iterations, a.residual));
    const double gap = std::abs(a.beta - b.beta) / a.beta;
    o.require(gap <= 1e-8, fmt("h=1/%d: mu=100 gives %.10f, relative change %.1e <= 1e-8", 1 << level, b.beta, gap));
    if (!betas.empty()) {
      const double decay = 1.0 - a.beta / betas.back();
      o.require(decay < 0.10, fmt("h=1/%d: decay %.2f%% < 10%%", 1 << level, 100 * decay));
    }
    betas.push_back(a.beta);
  }
  const double s = seconds_since(t0);
  o.require(s < 60.0, fmt("runtime %.1f s < 60 s", s));
  return o;
}

Outcome patch_test() {
  Outcome o;
  for (bool mixed : {false, true}) {
    ExperimentConfig c;
    c.example = ExampleId::Custom;
    c.levels = LevelRange{2, 6};
    c.tol = 1e-13;
    const auto s = run_convergence(c, linear_patch_problem(mixed));
    if (s.failure) {
      o.require(false, "study failed: " + *s.failure);
      continue;
    }
    for (const auto &r : s.rows)
      o.require(r.energy_error < 1e-10 && r.pressure_error < 1e-10,
                fmt("%s h=1/%d: energy %.1e, pressure %.1e", mixed ? "mixed" : "Dirichlet",
                    (int)std::lround(1 / r.h), r.energy_error, r.pressure_error));
  }
  return o;
}

Outcome mass_balance(const std::filesystem::path &mesh) {
  Outcome o;
  for (bool split : {false, true}) {
    ExperimentConfig c;
    c.mesh_file = mesh;
    c.mu = 0.01;
    if (split) c.mu_split = ViscositySplit{};
    c.tol = 1e-10;
    const auto r = run_channel(c);
    const char *name = split ? "discontinuous mu" : "mu=0.01";
    o.require(r.report.converged(), fmt("%s: solve %s in %d iterations", name, to_string(r.report.status),
                                        r.report.iterations));
    o.require(r.divergence_residual <= 1e-8,
              fmt("%s: max|B u - g_p| / max|g_p| = %.2e <= 1e-8", name, r.divergence_residual));
    o.require(r.flux_imbalance() <= 1e-8,
              fmt("%s: in %.12f, out %.12f, cuts %.12f %.12f, imbalance %.2e <= 1e-8", name, r.inflow,
                  r.outflow, r.left_cut, r.right_cut, r.flux_imbalance()));
  }
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria for the EG Stokes solver"};
  std::string data_dir = EGS_DATA_DIR;
  std::string report;
  bool strict = false;
  app.add_option("--data", data_dir, "Directory holding obstacle_h7.msh");
  app.add_option("--report", report, "Also write the results to this file");
  app.add_flag("--strict", strict, "Nonzero exit status if any criterion fails");
  CLI11_PARSE(app, argc, argv);
  const std::filesystem::path mesh = std::filesystem::path(data_dir) / "obstacle_h7.msh";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"DoF counts on the uniform meshes", dof_counts},
      {"convergence, Dirichlet example", convergence_ex1},
      {"convergence, mixed boundary example", convergence_ex2},
      {"preconditioner robustness in h", solvers_ex1},
      {"preconditioner robustness in mu (obstacle mesh)", [&] { return viscosity_ex3(mesh); }},
      {"discontinuous viscosity (obstacle mesh)", [&] { return discontinuous_ex4(mesh); }},
      {"theta = 1 energy identity", theta_identity},
      {"coercivity and continuity sampling", coercivity_continuity},
      {"discrete inf-sup constant", infsup},
      {"linear patch test", patch_test},
      {"mass balance in the channel", [&] { return mass_balance(mesh); }},
  };

  std::ostringstream all;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::ostringstream block;
    block << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first
          << fmt(" (%.1f s)", seconds_since(t0)) << "\n";
    for (const auto &d : o.details) block << "    " << d << "\n";
    std::cout << block.str() << std::flush;
    all << block.str();
    failed += o.pass ? 0 : 1;
  }
  const std::string summary = fmt("%zu criteria, %d passed, %d failed\n", criteria.size(),
                                  (int)criteria.size() - failed, failed);
  std::cout << summary;
  all << summary;
  if (!report.empty()) std::ofstream(report) << all.str();
  return strict && failed ? 1 : 0;
}
