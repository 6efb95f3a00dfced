#pragma once

#include "isoflow/geometry.hpp"

#include <array>
#include <memory>
#include <vector>

namespace isoflow {

using Triangle = std::array<int, 3>;

/// Triangulated planar domain. Triangles are counter-clockwise; `boundary_loop` lists the
/// single closed boundary in counter-clockwise order.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<int> boundary_loop;
};

/// Checks index ranges, finiteness, orientation, area and edge manifoldness. Throws
/// ValidationError naming the violated invariant.
void validate_triangles(const std::vector<Vec2>& vertices, const std::vector<Triangle>& triangles);

/// Extracts the counter-clockwise boundary loop, starting at the lowest-index boundary
/// vertex. Throws NotDiskTopology when the boundary is not exactly one closed loop.
std::vector<int> extract_boundary_loop(const std::vector<Vec2>& vertices, const std::vector<Triangle>& triangles);

/// Validates and fills in the boundary loop.
TriMesh make_mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles);

/// Neighbour of triangle t across its edge i, where edge i runs from corner i to corner i+1.
/// -1 marks a boundary edge.
std::vector<std::array<int, 3>> triangle_neighbours(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, int t);
double total_area(const TriMesh& mesh);
std::vector<double> edge_lengths(const TriMesh& mesh);
double median_edge_length(const TriMesh& mesh);
BBox bounding_box(const TriMesh& mesh);

struct Barycentric {
    std::array<double, 3> w{};
};

/// Arc-length parametrization of a closed boundary polyline, counter-clockwise.
class BoundaryParam {
public:
    BoundaryParam() = default;
    explicit BoundaryParam(std::vector<Vec2> loop_points);

    double length() const { return length_; }
    std::size_t segment_count() const { return points_.size(); }
    const std::vector<Vec2>& points() const { return points_; }
    /// Cumulative arc length at loop point i; cumulative(0) == 0.
    double cumulative(std::size_t i) const { return cumulative_[i]; }

    /// Wraps s into [0, L).
    double wrap(double s) const;
    Vec2 point(double s) const;
    /// Unit tangent. At a corner the preceding segment wins.
    Vec2 tangent(double s) const;
    /// Segment index i covering s, so that s lies in (cumulative(i), cumulative(i+1)].
    std::size_t segment_at(double s) const;
    Vec2 segment_start(std::size_t i) const { return points_[i]; }
    Vec2 segment_end(std::size_t i) const { return points_[(i + 1) % points_.size()]; }
    Vec2 segment_tangent(std::size_t i) const;
    /// Outward unit normal of segment i.
    Vec2 segment_normal(std::size_t i) const;

    struct Projection {
        double s = 0.0;
        Vec2 point;
        double distance = 0.0;
        std::size_t segment = 0;
    };
    /// Closest boundary point; equidistant candidates resolve to the smallest s.
    Projection project(Vec2 x) const;

private:
    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
    double length_ = 0.0;
};

/// Immutable mesh with point location (uniform bucket grid) and its boundary parametrization.
/// Shared read-only between fields, integrators and queries.
class Domain {
public:
    explicit Domain(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    const BoundaryParam& boundary() const { return boundary_; }
    const std::vector<std::array<int, 3>>& neighbours() const { return neighbours_; }
    const BBox& bbox() const { return bbox_; }
    double median_edge() const { return median_edge_; }

    /// Containing triangle or -1. Without a hint the lowest-index containing triangle wins,
    /// which makes queries on shared edges deterministic.
    int locate(Vec2 x) const;
    /// Faster location starting from a previous triangle. Result may differ from locate() on
    /// shared edges.
    int locate(Vec2 x, int hint) const;
    bool contains(Vec2 x) const { return locate(x) >= 0; }
    /// Triangle closest to x (x itself may be outside the mesh).
    int nearest_triangle(Vec2 x) const;

    Barycentric barycentric(int t, Vec2 x) const;
    bool inside_triangle(int t, Vec2 x) const;
    /// Mean edge length of the triangle at or nearest to x.
    double local_edge_length(Vec2 x) const;

private:
    void build_grid();
    std::size_t cell_of(Vec2 x, int* ix, int* iy) const;

    TriMesh mesh_;
    BoundaryParam boundary_;
    std::vector<std::array<int, 3>> neighbours_;
    std::vector<double> inv_area2_;
    BBox bbox_;
    double median_edge_ = 0.0;

    int nx_ = 1, ny_ = 1;
    double cell_w_ = 1.0, cell_h_ = 1.0;
    std::vector<std::vector<int>> cells_;
};

using DomainPtr = std::shared_ptr<const Domain>;

DomainPtr make_domain(TriMesh mesh);

}  // namespace isoflow
