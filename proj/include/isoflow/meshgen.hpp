#pragma once

#include "isoflow/mesh.hpp"

namespace isoflow {

/// Structured triangulation of [lo, hi] with nx by ny cells, each split along its
/// lower-left to upper-right diagonal. Vertex 0 is the lower-left corner.
TriMesh square_mesh(Vec2 lo, Vec2 hi, int nx, int ny);

/// Concentric-ring triangulation of a disk. The boundary is a regular polygon with
/// `boundary_n` vertices, the first at angle 0; every ring has a vertex at angle 0.
TriMesh disk_mesh(Vec2 center, double radius, int boundary_n, int rings);

/// Ring triangulation of an annulus. Returned unvalidated: it is the canonical
/// non-disk input and make_mesh() rejects it.
struct RawMesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
};
RawMesh annulus_triangles(Vec2 center, double inner, double outer, int boundary_n, int rings);

/// Square mesh whose vertex count is close to `target_vertices`.
TriMesh square_mesh_with_vertices(Vec2 lo, Vec2 hi, int target_vertices);

}  // namespace isoflow
