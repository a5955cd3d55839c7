#include "egstokes/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace egs {

ExampleId parse_example(const std::string &name) {
  if (name == "ex1") return ExampleId::Ex1;
  if (name == "ex2") return ExampleId::Ex2;
  if (name == "ex3") return ExampleId::Ex3;
  if (name == "ex4") return ExampleId::Ex4;
  if (name == "custom") return ExampleId::Custom;
  throw std::invalid_argument("unknown example '" + name + "'");
}

const char *to_string(ExampleId id) {
  switch (id) {
    case ExampleId::Ex1: return "ex1";
    case ExampleId::Ex2: return "ex2";
    case ExampleId::Ex3: return "ex3";
    case ExampleId::Ex4: return "ex4";
    case ExampleId::Custom: return "custom";
  }
  return "?";
}

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 trig_u(const Vec2 &x) {
  return {std::sin(kPi * x.x) * std::sin(kPi * x.y), std::cos(kPi * x.x) * std::cos(kPi * x.y)};
}

Mat2 trig_grad_u(const Vec2 &x) {
  const double sx = std::sin(kPi * x.x), cx = std::cos(kPi * x.x);
  const double sy = std::sin(kPi * x.y), cy = std::cos(kPi * x.y);
  return Mat2{{kPi * cx * sy, kPi * sx * cy, -kPi * sx * cy, -kPi * cx * sy}};
}

double trig_p(const Vec2 &x) { return std::sin(kPi * x.x) * std::cos(kPi * x.y); }

Vec2 traction(const Mat2 &grad_u, double p, double mu, const Vec2 &n) {
  Mat2 sigma = 2.0 * mu * grad_u.symmetric_part();
  sigma(0, 0) -= p;
  sigma(1, 1) -= p;
  return sigma * n;
}

/// Outward normal of the unit square at a boundary point.
Vec2 square_normal(const Vec2 &x) {
  constexpr double tol = 1e-12;
  if (std::abs(x.y) <= tol) return {0.0, -1.0};
  if (std::abs(x.y - 1.0) <= tol) return {0.0, 1.0};
  if (std::abs(x.x) <= tol) return {-1.0, 0.0};
  return {1.0, 0.0};
}

ProblemSpec trig_spec(double mu) {
  ProblemSpec s;
  s.mu = [mu](const Vec2 &) { return mu; };
  s.exact_u = trig_u;
  s.exact_grad_u = trig_grad_u;
  s.exact_p = trig_p;
  // f = -div(2 mu eps(u)) + grad p with -div(2 mu eps(u)) = 2 mu pi^2 u here.
  s.f = [mu](const Vec2 &x) {
    const Vec2 u = trig_u(x);
    const Vec2 grad_p{kPi * std::cos(kPi * x.x) * std::cos(kPi * x.y),
                      -kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y)};
    return 2.0 * mu * kPi * kPi * u + grad_p;
  };
  s.g = trig_u;
  s.s = [mu](const Vec2 &x) { return traction(trig_grad_u(x), trig_p(x), mu, square_normal(x)); };
  return s;
}

}  // namespace

Vec2 channel_boundary_velocity(const Vec2 &x) {
  constexpr double tol = 1e-12;
  if (std::abs(x.x) <= tol || std::abs(x.x - 1.0) <= tol) return {4.0 * x.y * (1.0 - x.y), 0.0};
  return {0.0, 0.0};
}

Problem builtin_problem(ExampleId id, double mu, const ViscositySplit &split) {
  if (!(mu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  Problem pr;
  pr.id = id;
  switch (id) {
    case ExampleId::Ex1:
      pr.spec = trig_spec(mu);
      pr.bc = BoundarySpec::all_dirichlet();
      break;
    case ExampleId::Ex2:
      pr.spec = trig_spec(mu);
      pr.bc = BoundarySpec::dirichlet_left_right();
      break;
    case ExampleId::Ex3:
    case ExampleId::Ex4:
      pr.needs_mesh_file = true;
      pr.bc = BoundarySpec::all_dirichlet();
      pr.spec.f = [](const Vec2 &) { return Vec2{}; };
      pr.spec.g = channel_boundary_velocity;
      if (id == ExampleId::Ex3) {
        pr.spec.mu = [mu](const Vec2 &) { return mu; };
      } else {
        if (!(split.mu_top > 0.0) || !(split.mu_bottom > 0.0))
          throw std::invalid_argument("viscosity must be positive");
        pr.spec.mu = [split](const Vec2 &x) {
          return x.y > split.y_split ? split.mu_top : split.mu_bottom;
        };
      }
      break;
    case ExampleId::Custom:
      throw std::invalid_argument("the custom example has no built-in data");
  }
  return pr;
}

Problem linear_patch_problem(bool mixed, double mu) {
  Problem pr;
  pr.id = ExampleId::Custom;
  pr.bc = mixed ? BoundarySpec::dirichlet_left_right() : BoundarySpec::all_dirichlet();
  // Divergence-free linear field; a constant pressure is only meaningful
  // (not projected away) when a traction boundary exists.
  const double p0 = mixed ? 1.5 : 0.0;
  auto u = [](const Vec2 &x) { return Vec2{x.x + 2.0 * x.y + 1.0, 3.0 * x.x - x.y - 2.0}; };
  const Mat2 grad{{1.0, 2.0, 3.0, -1.0}};
  pr.spec.mu = [mu](const Vec2 &) { return mu; };
  pr.spec.f = [](const Vec2 &) { return Vec2{}; };
  pr.spec.g = u;
  pr.spec.s = [grad, p0, mu](const Vec2 &x) { return traction(grad, p0, mu, square_normal(x)); };
  pr.spec.exact_u = u;
  pr.spec.exact_grad_u = [grad](const Vec2 &) { return grad; };
  pr.spec.exact_p = [p0](const Vec2 &) { return p0; };
  return pr;
}

}  // namespace egs
