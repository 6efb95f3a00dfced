#pragma once

#include "isoflow/critical.hpp"
#include "isoflow/mesh.hpp"

#include <string>
#include <vector>

namespace isoflow {

struct CutAnchor {
    enum class Kind { CriticalPoint, Boundary };
    Kind kind = Kind::Boundary;
    int cp = -1;     // critical point index
    double s = 0.0;  // boundary parameter

    static CutAnchor critical(int i) { return {Kind::CriticalPoint, i, 0.0}; }
    static CutAnchor boundary(double s) { return {Kind::Boundary, -1, s}; }
    bool is_boundary() const { return kind == Kind::Boundary; }
    std::string str() const;
};

/// Polyline c(t); points left of the tangent satisfy det(c', x - c) > 0.
struct CutPath {
    int id = -1;
    std::vector<Vec2> points;
    CutAnchor start;
    CutAnchor end;
};

/// Tree of cut paths over the critical points plus one boundary anchor.
struct CutSet {
    std::vector<CutPath> paths;
    std::vector<CriticalPoint> cps;

    bool empty() const { return paths.empty(); }
    /// Index of the path anchored at the boundary, or -1.
    int boundary_path() const;
};

/// Euclidean minimum spanning tree over the critical points plus a straight segment from
/// the node nearest the boundary to its closest boundary point. Paths point towards the
/// boundary. Crossing or escaping segments are bent at their midpoint (20 attempts).
CutSet place_cuts_auto(const std::vector<CriticalPoint>& cps, const Domain& domain);

/// Validates manual paths: endpoints snapped to their anchors, then tree structure,
/// coverage, containment and simplicity are checked.
/// Throws UncoveredCriticalPoint, CyclicCuts, SelfIntersection or ValidationError.
CutSet place_cuts_manual(std::vector<CutPath> paths, const std::vector<CriticalPoint>& cps, const Domain& domain);

void validate_cut_set(const CutSet& cuts, const Domain& domain);

// -- embedding ---------------------------------------------------------------------

/// One mesh edge on a cut, in path direction, with the vertex copies on either side.
struct CutEdge {
    int path = -1;
    int u = -1, w = -1;  // refined-mesh vertices, u -> w follows the path
    int left_u = -1, left_w = -1;
    int right_u = -1, right_w = -1;
    int left_tri = -1, right_tri = -1;
};

/// Refined mesh with every cut path on a chain of edges, and the vertices along cuts
/// duplicated so the two sides are disconnected. Vertices [0, refined_count) are the
/// refined mesh; copies are appended.
struct CutMesh {
    TriMesh mesh;
    int refined_count = 0;
    std::vector<int> origin;                 // final vertex -> refined vertex
    std::vector<std::vector<int>> copies;    // refined vertex -> all final vertices
    std::vector<std::vector<int>> chains;    // per path: refined vertex chain
    std::vector<CutEdge> edges;
    std::vector<char> on_cut;                // per refined vertex
    TriMesh refined;                         // before duplication

    int duplicated_count() const { return static_cast<int>(mesh.vertices.size()) - refined_count; }
    /// Polyline geometry of path p as embedded.
    std::vector<Vec2> chain_points(int p) const;
};

/// Rebuilds on_cut, copies, the refined mesh and the left/right edge table from `mesh`,
/// `refined_count`, `origin` and `chains`.
void finish_cut_mesh(CutMesh& cm);

/// Throws GeometryFailure on degenerate configurations.
CutMesh embed_cuts(const TriMesh& mesh, const CutSet& cuts);

/// Per-path result of the gradient-preserving test.
struct CutCheck {
    int path = -1;
    double h = 0.0;
    double max_jump_error = 0.0;     // |(left - right) - h|
    double max_gradient_mismatch = 0.0;  // |g_left - g_right| / max(|g_left|, |g_right|)
    int samples = 0;
    bool zero_jump = false;  // h == 0 declared
    bool pass = false;
};

/// Checks conditions 2 and 3 of a gradient-preserving cut on per-vertex values. NaN
/// vertices are skipped.
std::vector<CutCheck> check_gradient_preserving(const CutMesh& cm, const std::vector<double>& values,
                                                const std::vector<double>& h, double jump_tol, double grad_tol);

}  // namespace isoflow
