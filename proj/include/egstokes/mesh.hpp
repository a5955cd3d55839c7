#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "egstokes/geometry.hpp"

namespace egs {

/// Raised for malformed mesh input, non-manifold topology, or degenerate cells.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FacetMarker { Interior, DirichletBoundary, NeumannBoundary };

/// Decides the boundary condition type of a boundary facet from its midpoint.
struct BoundarySpec {
  std::function<FacetMarker(const Vec2 &midpoint)> classifier;

  /// Every boundary facet is Dirichlet.
  static BoundarySpec all_dirichlet();
  /// Dirichlet on x = 0 and x = 1, Neumann elsewhere.
  static BoundarySpec dirichlet_left_right();
  /// Every boundary facet is Neumann. Only useful for local operator tests.
  static BoundarySpec all_neumann();
};

struct Facet {
  std::array<int, 2> vertices{};
  FacetMarker marker = FacetMarker::Interior;
  int plus_cell = -1;
  std::optional<int> minus_cell;
  /// Unit normal; from plus_cell into minus_cell, or outward on the boundary.
  Vec2 normal;
  double length = 0.0;
  /// Penalty length scale |e|^{1/(d-1)}; equals length in 2D.
  double h_e = 0.0;

  bool interior() const { return minus_cell.has_value(); }
  bool dirichlet() const { return marker == FacetMarker::DirichletBoundary; }
  bool neumann() const { return marker == FacetMarker::NeumannBoundary; }
};

/// Conforming triangulation with counter-clockwise cells and oriented facets.
/// Immutable once built.
struct Mesh {
  int dim = 2;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<Facet> facets;
  std::vector<double> cell_areas;
  std::vector<Vec2> cell_centroids;
  /// Facet indices of the three cell edges; edge k joins local vertices k and k+1.
  std::vector<std::array<int, 3>> cell_facets;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }
  std::size_t num_facets() const { return facets.size(); }
  std::size_t num_interior_facets() const;
  std::size_t num_boundary_facets() const { return num_facets() - num_interior_facets(); }
  bool has_dirichlet() const;
  bool has_neumann() const;
  double total_area() const;
  /// Largest cell diameter.
  double mesh_size() const;
  Vec2 facet_midpoint(const Facet &f) const;
  Vec2 facet_point(const Facet &f, double t) const;
};

/// Edge key lookup used to override boundary markers from a file.
struct MarkerOverride {
  int a = 0;
  int b = 0;
  FacetMarker marker = FacetMarker::DirichletBoundary;
};

/// Builds the facet list of a counter-clockwise triangulation.
///
/// Facets are created in order of first encounter while looping over cells and
/// their local edges, so the plus cell of an interior facet is always the
/// incident cell with the smaller index.
std::vector<Facet> build_facets(const std::vector<Vec2> &vertices,
                                const std::vector<std::array<int, 3>> &cells,
                                const BoundarySpec &bc,
                                const std::vector<MarkerOverride> &overrides = {},
                                std::vector<std::array<int, 3>> *cell_facets = nullptr);

/// Assembles a Mesh from raw vertices and cells. Clockwise cells are flipped;
/// degenerate cells raise MeshError.
Mesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells,
               const BoundarySpec &bc, const std::vector<MarkerOverride> &overrides = {});

/// Uniform 2^L x 2^L grid on the unit square, each square split along its
/// bottom-left to top-right diagonal.
Mesh generate_unit_square(int level, const BoundarySpec &bc);

/// Reads the ASCII mesh format (see docs/mesh_format.md).
Mesh import_mesh(const std::filesystem::path &file, const BoundarySpec &bc);
Mesh parse_mesh(const std::string &text, const BoundarySpec &bc);

/// Writes a mesh in the same ASCII format (markers are emitted for every
/// boundary edge).
void export_mesh(const Mesh &mesh, const std::filesystem::path &file);

/// Barycentric coordinates of p with respect to cell c.
std::array<double, 3> barycentric(const Mesh &mesh, int cell, const Vec2 &p);

/// Index of a cell containing p (barycentric tolerance tol), or -1.
int locate_cell(const Mesh &mesh, const Vec2 &p, double tol = 1e-12);

}  // namespace egs
