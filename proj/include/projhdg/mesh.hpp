// Conforming triangular meshes of planar domains: structured generator for
// the unit square, connectivity builder with a fixed global face
// orientation, and a plain-text importer.
//
// Face convention: the vertex pair is stored with the lower vertex id first
// and the face is parameterized from that vertex; the unit normal is the
// outward normal of the lower-indexed adjacent cell (outward of the domain
// on boundary faces), so sign(K, F) = +1 for that cell and -1 for the other.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace projhdg {

struct Face {
  int v0 = -1, v1 = -1;          // vertex ids, v0 < v1
  int cell_minus = -1;           // lower-indexed adjacent cell
  int cell_plus = -1;            // higher-indexed adjacent cell, -1 on boundary
  int edge_minus = -1;           // local edge of the face in cell_minus
  int edge_plus = -1;
  bool flip_minus = false;       // local traversal opposite to v0 -> v1
  bool flip_plus = false;
  Eigen::Vector2d normal;        // unit, outward for cell_minus
  double length = 0.0;

  bool boundary() const { return cell_plus < 0; }
};

struct Mesh {
  Eigen::MatrixXd vertices;      // V x 2
  Eigen::MatrixXi cells;         // C x 3, counterclockwise
  std::vector<Face> faces;
  Eigen::MatrixXi cell_faces;    // C x 3, face id of local edge e = (v_e, v_{e+1})
  double h_global = 0.0;         // max cell diameter

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_cells() const { return static_cast<int>(cells.rows()); }
  int num_faces() const { return static_cast<int>(faces.size()); }

  int sign(int cell, int face) const {
    return faces[face].cell_minus == cell ? 1 : -1;
  }
};

// Affine map x = v0 + J * xhat from the reference triangle onto a cell.
struct CellGeom {
  Eigen::Vector2d v0;
  Eigen::Matrix2d J;
  Eigen::Matrix2d Jinv;
  double detJ = 0.0;             // = 2 |K|, positive for CCW cells

  Eigen::Vector2d map(const Eigen::Vector2d& xhat) const { return v0 + J * xhat; }
  Eigen::Vector2d unmap(const Eigen::Vector2d& x) const { return Jinv * (x - v0); }
};

inline CellGeom cell_geom(const Mesh& mesh, int cell) {
  CellGeom g;
  const auto row = mesh.cells.row(cell);
  g.v0 = mesh.vertices.row(row(0)).transpose();
  const Eigen::Vector2d p1 = mesh.vertices.row(row(1)).transpose();
  const Eigen::Vector2d p2 = mesh.vertices.row(row(2)).transpose();
  g.J.col(0) = p1 - g.v0;
  g.J.col(1) = p2 - g.v0;
  g.detJ = g.J.determinant();
  g.Jinv = g.J.inverse();
  return g;
}

// Point on face f at parameter t in [0,1], measured from the lower vertex.
inline Eigen::Vector2d face_point(const Mesh& mesh, int face, double t) {
  const Face& f = mesh.faces[face];
  const Eigen::Vector2d a = mesh.vertices.row(f.v0).transpose();
  const Eigen::Vector2d b = mesh.vertices.row(f.v1).transpose();
  return a + t * (b - a);
}

// Completes a vertex/cell pair into a Mesh: cells are reoriented
// counterclockwise, faces deduplicated and oriented, h computed. Rejects
// non-conforming inputs: degenerate cells, an edge shared by more than two
// cells, and hanging vertices sitting inside a boundary edge.
inline Mesh build_connectivity(const Eigen::MatrixXd& vertices,
                               const Eigen::MatrixXi& cells) {
  if (vertices.cols() != 2 || (cells.size() > 0 && cells.cols() != 3))
    throw std::invalid_argument("build_connectivity: bad table shapes");
  const int nv = static_cast<int>(vertices.rows());
  const int nc = static_cast<int>(cells.rows());
  if (nc == 0) throw std::invalid_argument("build_connectivity: no cells");

  Mesh mesh;
  mesh.vertices = vertices;
  mesh.cells = cells;

  for (int c = 0; c < nc; ++c) {
    for (int e = 0; e < 3; ++e) {
      const int v = mesh.cells(c, e);
      if (v < 0 || v >= nv)
        throw std::invalid_argument("build_connectivity: vertex id out of range");
      if (v == mesh.cells(c, (e + 1) % 3))
        throw std::invalid_argument("build_connectivity: repeated vertex in cell");
    }
    const Eigen::Vector2d p0 = vertices.row(mesh.cells(c, 0)).transpose();
    const Eigen::Vector2d p1 = vertices.row(mesh.cells(c, 1)).transpose();
    const Eigen::Vector2d p2 = vertices.row(mesh.cells(c, 2)).transpose();
    const double twice_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                              (p1.y() - p0.y()) * (p2.x() - p0.x());
    if (twice_area == 0.0)
      throw std::invalid_argument("build_connectivity: degenerate cell");
    if (twice_area < 0.0) std::swap(mesh.cells(c, 1), mesh.cells(c, 2));
  }

  std::map<std::pair<int, int>, int> face_of;
  mesh.cell_faces.resize(nc, 3);
  for (int c = 0; c < nc; ++c) {
    for (int e = 0; e < 3; ++e) {
      const int p = mesh.cells(c, e);
      const int q = mesh.cells(c, (e + 1) % 3);
      const auto key = std::make_pair(std::min(p, q), std::max(p, q));
      auto it = face_of.find(key);
      if (it == face_of.end()) {
        Face f;
        f.v0 = key.first;
        f.v1 = key.second;
        f.cell_minus = c;
        f.edge_minus = e;
        f.flip_minus = (p > q);
        it = face_of.emplace(key, static_cast<int>(mesh.faces.size())).first;
        mesh.faces.push_back(f);
      } else {
        Face& f = mesh.faces[it->second];
        if (f.cell_plus >= 0)
          throw std::invalid_argument(
              "build_connectivity: face shared by more than two cells");
        f.cell_plus = c;
        f.edge_plus = e;
        f.flip_plus = (p > q);
      }
      mesh.cell_faces(c, e) = it->second;
    }
  }

  for (Face& f : mesh.faces) {
    const Eigen::Vector2d a = vertices.row(f.v0).transpose();
    const Eigen::Vector2d b = vertices.row(f.v1).transpose();
    f.length = (b - a).norm();
    const Eigen::Vector2d t = (b - a) / f.length;
    // Outward normal of cell_minus: rotate the traversal tangent of
    // cell_minus clockwise (interior lies left of a CCW traversal).
    const double s = f.flip_minus ? -1.0 : 1.0;
    f.normal = Eigen::Vector2d(s * t.y(), -s * t.x());
  }

  // Hanging-vertex check on the boundary edge set (edge count 1): a vertex
  // of another count-1 edge strictly inside an edge marks a T-junction.
  std::vector<int> bnd_faces;
  std::vector<int> bnd_verts;
  {
    std::vector<char> seen(nv, 0);
    for (int i = 0; i < mesh.num_faces(); ++i)
      if (mesh.faces[i].boundary()) {
        bnd_faces.push_back(i);
        seen[mesh.faces[i].v0] = 1;
        seen[mesh.faces[i].v1] = 1;
      }
    for (int v = 0; v < nv; ++v)
      if (seen[v]) bnd_verts.push_back(v);
  }
  for (int fi : bnd_faces) {
    const Face& f = mesh.faces[fi];
    const Eigen::Vector2d a = vertices.row(f.v0).transpose();
    const Eigen::Vector2d b = vertices.row(f.v1).transpose();
    const Eigen::Vector2d d = b - a;
    for (int v : bnd_verts) {
      if (v == f.v0 || v == f.v1) continue;
      const Eigen::Vector2d p = vertices.row(v).transpose();
      const double s = (p - a).dot(d) / d.squaredNorm();
      if (s <= 1e-12 || s >= 1.0 - 1e-12) continue;
      const double dist = std::abs(d.x() * (p.y() - a.y()) -
                                   d.y() * (p.x() - a.x())) / f.length;
      if (dist < 1e-12 * f.length)
        throw std::invalid_argument("build_connectivity: hanging vertex");
    }
  }

  mesh.h_global = 0.0;
  for (int c = 0; c < nc; ++c)
    for (int e = 0; e < 3; ++e) {
      const Face& f = mesh.faces[mesh.cell_faces(c, e)];
      mesh.h_global = std::max(mesh.h_global, f.length);
    }
  return mesh;
}

// Structured mesh of the unit square: n x n squares, each split along the
// diagonal from its lower-left to its upper-right corner. 2n^2 cells,
// (n+1)^2 vertices, 3n^2 + 2n faces, h = sqrt(2)/n.
inline Mesh generate_structured(int n) {
  if (n <= 0) throw std::invalid_argument("generate_structured: n must be positive");
  const int nv = (n + 1) * (n + 1);
  Eigen::MatrixXd vertices(nv, 2);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const int id = j * (n + 1) + i;
      vertices(id, 0) = static_cast<double>(i) / n;
      vertices(id, 1) = static_cast<double>(j) / n;
    }
  Eigen::MatrixXi cells(2 * n * n, 3);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = j * (n + 1) + i;
      const int b = a + 1;
      const int c = a + n + 2;
      const int d = a + n + 1;
      const int id = 2 * (j * n + i);
      cells.row(id) << a, b, c;
      cells.row(id + 1) << a, c, d;
    }
  return build_connectivity(vertices, cells);
}

// Plain-text mesh format: a header "V C", then V vertex lines "x y", then
// C cell lines "i j k" with 0-based vertex ids.
inline Mesh read_mesh(std::istream& in) {
  int nv = -1, nc = -1;
  if (!(in >> nv >> nc) || nv <= 0 || nc <= 0)
    throw std::invalid_argument("read_mesh: bad header");
  Eigen::MatrixXd vertices(nv, 2);
  for (int v = 0; v < nv; ++v)
    if (!(in >> vertices(v, 0) >> vertices(v, 1)))
      throw std::invalid_argument("read_mesh: truncated vertex list");
  Eigen::MatrixXi cells(nc, 3);
  for (int c = 0; c < nc; ++c)
    if (!(in >> cells(c, 0) >> cells(c, 1) >> cells(c, 2)))
      throw std::invalid_argument("read_mesh: truncated cell list");
  return build_connectivity(vertices, cells);
}

inline Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_mesh_file: cannot open " + path);
  return read_mesh(in);
}

// Writes the same plain-text format accepted by read_mesh.
inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.num_vertices() << " " << mesh.num_cells() << "\n";
  const auto old_prec = out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c)
    out << mesh.cells(c, 0) << " " << mesh.cells(c, 1) << " "
        << mesh.cells(c, 2) << "\n";
  out.precision(old_prec);
}

}  // namespace projhdg
