#pragma once

#include <array>

namespace egs::quad {

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by |T|).
struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;
};

/// Edge rule on the parameter t in [0, 1]; weights sum to 1 (multiply by |e|).
struct EdgePoint {
  double t;
  double weight;
};

/// Degree-4, 6-point symmetric rule (Dunavant).
inline constexpr std::array<TrianglePoint, 6> kTriangleDeg4 = {{
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
}};

/// 3-point Gauss-Legendre on [0, 1], exact to degree 5.
inline constexpr std::array<EdgePoint, 3> kEdgeGauss3 = {{
    {0.11270166537925831, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.88729833462074169, 5.0 / 18.0},
}};

}  // namespace egs::quad
