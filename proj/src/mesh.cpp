#include "egstokes/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace egs {

namespace {

constexpr double kCoordTol = 1e-12;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double signed_area(const Vec2 &a, const Vec2 &b, const Vec2 &c) {
  return 0.5 * cross(b - a, c - a);
}

Vec2 outward_normal(const Vec2 &a, const Vec2 &b) {
  // Edge a->b of a counter-clockwise cell: the interior lies to the left.
  const Vec2 d = b - a;
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

}  // namespace

BoundarySpec BoundarySpec::all_dirichlet() {
  return {[](const Vec2 &) { return FacetMarker::DirichletBoundary; }};
}

BoundarySpec BoundarySpec::dirichlet_left_right() {
  return {[](const Vec2 &m) {
    if (std::abs(m.x) <= kCoordTol || std::abs(m.x - 1.0) <= kCoordTol)
      return FacetMarker::DirichletBoundary;
    return FacetMarker::NeumannBoundary;
  }};
}

BoundarySpec BoundarySpec::all_neumann() {
  return {[](const Vec2 &) { return FacetMarker::NeumannBoundary; }};
}

std::size_t Mesh::num_interior_facets() const {
  return static_cast<std::size_t>(
      std::count_if(facets.begin(), facets.end(), [](const Facet &f) { return f.interior(); }));
}

bool Mesh::has_dirichlet() const {
  return std::any_of(facets.begin(), facets.end(), [](const Facet &f) { return f.dirichlet(); });
}

bool Mesh::has_neumann() const {
  return std::any_of(facets.begin(), facets.end(), [](const Facet &f) { return f.neumann(); });
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : cell_areas) s += a;
  return s;
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (const auto &c : cells) {
    for (int k = 0; k < 3; ++k)
      h = std::max(h, norm(vertices[c[(k + 1) % 3]] - vertices[c[k]]));
  }
  return h;
}

Vec2 Mesh::facet_midpoint(const Facet &f) const { return facet_point(f, 0.5); }

Vec2 Mesh::facet_point(const Facet &f, double t) const {
  const Vec2 &a = vertices[f.vertices[0]];
  const Vec2 &b = vertices[f.vertices[1]];
  return (1.0 - t) * a + t * b;
}

std::vector<Facet> build_facets(const std::vector<Vec2> &vertices,
                                const std::vector<std::array<int, 3>> &cells,
                                const BoundarySpec &bc,
                                const std::vector<MarkerOverride> &overrides,
                                std::vector<std::array<int, 3>> *cell_facets) {
  std::vector<Facet> facets;
  facets.reserve(cells.size() * 3 / 2 + 16);
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(cells.size() * 3);
  if (cell_facets) cell_facets->assign(cells.size(), {-1, -1, -1});

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto &cell = cells[c];
    for (int k = 0; k < 3; ++k) {
      const int a = cell[k];
      const int b = cell[(k + 1) % 3];
      const auto key = edge_key(a, b);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(facets.size()));
      if (inserted) {
        Facet f;
        f.vertices = {a, b};
        f.plus_cell = static_cast<int>(c);
        f.normal = outward_normal(vertices[a], vertices[b]);
        f.length = norm(vertices[b] - vertices[a]);
        f.h_e = f.length;
        facets.push_back(f);
      } else {
        Facet &f = facets[it->second];
        if (f.minus_cell) {
          std::ostringstream msg;
          msg << "non-manifold edge (" << a << ", " << b << ") shared by more than two cells";
          throw MeshError(msg.str());
        }
        f.minus_cell = static_cast<int>(c);
      }
      if (cell_facets) (*cell_facets)[c][k] = it->second;
    }
  }

  std::unordered_map<std::uint64_t, FacetMarker> forced;
  for (const auto &o : overrides) forced[edge_key(o.a, o.b)] = o.marker;

  for (auto &f : facets) {
    if (f.interior()) {
      f.marker = FacetMarker::Interior;
      continue;
    }
    if (auto it = forced.find(edge_key(f.vertices[0], f.vertices[1])); it != forced.end()) {
      f.marker = it->second;
      continue;
    }
    const Vec2 mid = 0.5 * (vertices[f.vertices[0]] + vertices[f.vertices[1]]);
    f.marker = bc.classifier(mid);
    if (f.marker == FacetMarker::Interior)
      throw MeshError("boundary classifier returned Interior for a boundary facet");
  }
  return facets;
}

Mesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells,
               const BoundarySpec &bc, const std::vector<MarkerOverride> &overrides) {
  Mesh mesh;
  const int nv = static_cast<int>(vertices.size());
  mesh.cell_areas.reserve(cells.size());
  mesh.cell_centroids.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto &cell = cells[c];
    for (int v : cell) {
      if (v < 0 || v >= nv) {
        std::ostringstream msg;
        msg << "cell " << c << " references vertex " << v << " out of range";
        throw MeshError(msg.str());
      }
    }
    double area = signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
    if (area < 0.0) {
      std::swap(cell[1], cell[2]);
      area = -area;
    }
    if (!(area > 0.0)) {
      std::ostringstream msg;
      msg << "cell " << c << " is degenerate (zero area)";
      throw MeshError(msg.str());
    }
    mesh.cell_areas.push_back(area);
    mesh.cell_centroids.push_back(
        (1.0 / 3.0) * (vertices[cell[0]] + vertices[cell[1]] + vertices[cell[2]]));
  }
  mesh.facets = build_facets(vertices, cells, bc, overrides, &mesh.cell_facets);
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  return mesh;
}

Mesh generate_unit_square(int level, const BoundarySpec &bc) {
  if (level < 1) throw MeshError("refinement level must be >= 1");
  const int n = 1 << level;
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(n) * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  return make_mesh(std::move(vertices), std::move(cells), bc);
}

namespace {

bool next_content_line(std::istream &in, std::string &line, int &lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(int lineno, const std::string &what) {
  std::ostringstream msg;
  msg << "mesh parse error at line " << lineno << ": " << what;
  throw MeshError(msg.str());
}

std::size_t read_header(const std::string &line, const std::string &keyword, int lineno) {
  std::istringstream ss(line);
  std::string word;
  long long count = -1;
  if (!(ss >> word) || word != keyword || !(ss >> count) || count < 0)
    parse_fail(lineno, "expected '" + keyword + " <count>'");
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh parse_mesh(const std::string &text, const BoundarySpec &bc) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  if (!next_content_line(in, line, lineno)) parse_fail(lineno, "empty mesh file");
  const std::size_t nv = read_header(line, "vertices", lineno);
  std::vector<Vec2> vertices(nv);
  for (auto &v : vertices) {
    if (!next_content_line(in, line, lineno)) parse_fail(lineno, "unexpected end of vertices");
    std::istringstream ss(line);
    if (!(ss >> v.x >> v.y)) parse_fail(lineno, "expected 'x y'");
  }

  if (!next_content_line(in, line, lineno)) parse_fail(lineno, "missing cells section");
  const std::size_t nc = read_header(line, "cells", lineno);
  std::vector<std::array<int, 3>> cells(nc);
  for (auto &c : cells) {
    if (!next_content_line(in, line, lineno)) parse_fail(lineno, "unexpected end of cells");
    std::istringstream ss(line);
    if (!(ss >> c[0] >> c[1] >> c[2])) parse_fail(lineno, "expected 'i j k'");
  }

  std::vector<MarkerOverride> overrides;
  std::optional<double> declared_area;
  while (next_content_line(in, line, lineno)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "boundary_markers") {
      const std::size_t nm = read_header(line, "boundary_markers", lineno);
      for (std::size_t k = 0; k < nm; ++k) {
        if (!next_content_line(in, line, lineno)) parse_fail(lineno, "unexpected end of markers");
        std::istringstream ms(line);
        MarkerOverride o;
        std::string tag;
        if (!(ms >> o.a >> o.b >> tag)) parse_fail(lineno, "expected 'i j marker'");
        if (tag == "D")
          o.marker = FacetMarker::DirichletBoundary;
        else if (tag == "N")
          o.marker = FacetMarker::NeumannBoundary;
        else
          parse_fail(lineno, "marker must be D or N");
        overrides.push_back(o);
      }
    } else if (word == "area") {
      double a = 0.0;
      if (!(ss >> a)) parse_fail(lineno, "expected 'area <value>'");
      declared_area = a;
    } else {
      parse_fail(lineno, "unknown section '" + word + "'");
    }
  }

  Mesh mesh = make_mesh(std::move(vertices), std::move(cells), bc, overrides);
  if (declared_area && std::abs(mesh.total_area() - *declared_area) > 1e-9) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "mesh area " << mesh.total_area()
        << " does not match declared area " << *declared_area;
    throw MeshError(msg.str());
  }
  return mesh;
}

Mesh import_mesh(const std::filesystem::path &file, const BoundarySpec &bc) {
  std::ifstream in(file);
  if (!in) throw MeshError("cannot open mesh file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mesh(buf.str(), bc);
}

void export_mesh(const Mesh &mesh, const std::filesystem::path &file) {
  std::ofstream out(file);
  if (!out) throw MeshError("cannot write mesh file " + file.string());
  out << std::setprecision(17);
  out << "vertices " << mesh.num_vertices() << "\n";
  for (const auto &v : mesh.vertices) out << v.x << " " << v.y << "\n";
  out << "cells " << mesh.num_cells() << "\n";
  for (const auto &c : mesh.cells) out << c[0] << " " << c[1] << " " << c[2] << "\n";
  out << "boundary_markers " << mesh.num_boundary_facets() << "\n";
  for (const auto &f : mesh.facets) {
    if (f.interior()) continue;
    out << f.vertices[0] << " " << f.vertices[1] << " " << (f.dirichlet() ? "D" : "N") << "\n";
  }
}

std::array<double, 3> barycentric(const Mesh &mesh, int cell, const Vec2 &p) {
  const auto &c = mesh.cells[static_cast<std::size_t>(cell)];
  const Vec2 &a = mesh.vertices[c[0]];
  const Vec2 &b = mesh.vertices[c[1]];
  const Vec2 &d = mesh.vertices[c[2]];
  const double two_area = cross(b - a, d - a);
  const double l1 = cross(p - a, d - a) / two_area;
  const double l2 = cross(b - a, p - a) / two_area;
  return {1.0 - l1 - l2, l1, l2};
}

int locate_cell(const Mesh &mesh, const Vec2 &p, double tol) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto l = barycentric(mesh, static_cast<int>(c), p);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return static_cast<int>(c);
  }
  return -1;
}

}  // namespace egs
