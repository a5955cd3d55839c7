#pragma once

#include <string>

#include "egstokes/mesh.hpp"
#include "egstokes/space.hpp"

namespace egs {

enum class ExampleId { Ex1, Ex2, Ex3, Ex4, Custom };

/// Accepts "ex1".."ex4" and "custom"; throws std::invalid_argument.
ExampleId parse_example(const std::string &name);
const char *to_string(ExampleId id);

/// Viscosity rule of the channel examples: mu_top above y_split, mu_bottom at
/// or below it.
struct ViscositySplit {
  double mu_top = 1.0;
  double mu_bottom = 0.01;
  double y_split = 0.5;
};

struct Problem {
  ExampleId id = ExampleId::Custom;
  ProblemSpec spec;
  BoundarySpec bc;
  /// Needs an imported mesh (channel examples) rather than a refinement level.
  bool needs_mesh_file = false;
};

/// Built-in examples. For ex1/ex2 and ex3 `mu` is the constant viscosity; ex4
/// uses `split`.
///   ex1: trigonometric exact solution, Dirichlet everywhere.
///   ex2: same solution, Dirichlet on x = 0, 1 and traction on y = 0, 1.
///   ex3: channel around an obstacle, parabolic inflow/outflow, constant mu.
///   ex4: as ex3 with a viscosity jump across y = split.y_split.
Problem builtin_problem(ExampleId id, double mu = 1.0, const ViscositySplit &split = {});

/// Linear velocity, constant pressure; reproduced exactly by the scheme.
/// With mixed = true the boundary is Dirichlet on x = 0, 1 and Neumann elsewhere.
Problem linear_patch_problem(bool mixed, double mu = 1.0);

/// Parabolic channel profile used on x = 0 and x = 1, zero elsewhere.
Vec2 channel_boundary_velocity(const Vec2 &x);

}  // namespace egs
