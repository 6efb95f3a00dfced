#pragma once

#include "isoflow/critical.hpp"
#include "isoflow/cuts.hpp"
#include "isoflow/integrate.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace isoflow {

/// a(s), b(s) along the boundary, built from a_s = grad a . d' and b_s = grad b . d'.
/// Values start at 0 at `origin` and run counter-clockwise; the mismatch after one loop is
/// the closure (absorbed by the cut anchored at `origin`).
struct BoundaryTable {
    double length = 0.0;
    double origin = 0.0;
    // quadratic pieces: nodes s[3k], s[3k+1], s[3k+2] relative to origin
    std::vector<double> u0, du;                 // piece start (relative) and width
    std::vector<double> fa0, fa1, fa2, fb0, fb1, fb2;  // integrands at start, middle, end
    std::vector<double> a_start, b_start;       // cumulative values at piece start
    std::vector<char> outflow;                  // per piece
    double closure_a = 0.0;
    double closure_b = 0.0;

    double a(double s) const;
    double b(double s) const;
    double a_s(double s) const;
    double b_s(double s) const;
    std::size_t pieces() const { return u0.size(); }
};

/// Values of a, b (and their tangential derivatives) around the circle that bounds an
/// excised critical point. Angles are measured from +x.
struct CircleTable {
    int cp = -1;
    Vec2 center;
    double radius = 0.0;
    std::vector<double> theta;  // uniform, starting at theta0
    std::vector<double> da, db;  // grad . tangent (counter-clockwise)
    std::vector<double> a, b;    // cumulative from theta0, attachment jumps included
    double flux_a = 0.0;  // counter-clockwise circulation of grad a
    double flux_b = 0.0;
    double offset_a = 0.0, offset_b = 0.0;
    struct Attachment {
        double theta;
        int path;
        double jump_a, jump_b;
    };
    std::vector<Attachment> attachments;

    double value_a(double th) const;
    double value_b(double th) const;
    Vec2 point(double th) const { return center + radius * Vec2{std::cos(th), std::sin(th)}; }
};

struct ScalarizeOptions {
    double eps_factor = 2.0;      // excision radius in local edge lengths
    bool periodic = false;        // closed-orbit mode for a single center
    int circle_samples = 192;
    double transfer_tol = 1e-2;   // relative, reported only
    double rtol = 1e-8;           // integrator tolerances
    double atol = 1e-10;
    bool verbose = false;
};

struct ScalarMetrics {
    double residual_a_median = 0.0, residual_a_max = 0.0;
    double residual_b_median = 0.0, residual_b_max = 0.0;
    int residual_triangles = 0;
    double transfer_mismatch_a = 0.0;  // 90th percentile over inflow samples, relative to the a-range
    double transfer_mismatch_b = 0.0;
    double circle_closure_a = 0.0;     // max |flux + attachment jumps| over sink circles
    int retried_traces = 0;
    int excised_vertices = 0;
    int switch_points = 0;
};

/// Per-vertex a and b on a cut mesh with per-cut jumps.
struct ScalarPair {
    std::shared_ptr<const CutMesh> cut_mesh;
    std::vector<double> a, b;
    std::vector<double> h_a, h_b;  // per cut path
    std::vector<char> excised;     // vertex inside an excision disk
    std::vector<CriticalPoint> cps;
    std::vector<double> radii;     // excision radius per critical point
    std::vector<CutPath> paths;
    bool periodic = false;
    BoundaryTable boundary;
    std::vector<CircleTable> circles;
    std::vector<SwitchPoint> switches;
    ScalarMetrics metrics;

    const TriMesh& mesh() const { return cut_mesh->mesh; }
    /// PL gradient of a or b on triangle t (NaN when a corner value is undefined).
    Vec2 grad_a(int t) const;
    Vec2 grad_b(int t) const;
    double a_range() const;
};

/// The full construction: excision, boundary and circle tables, cut jumps, then one forward
/// trace per cut-mesh vertex. Throws NotSimpleHere (with the vertex), UncoveredCriticalPoint,
/// UnsupportedCriticalPoint.
ScalarPair compute_scalar_pair(const VectorField& field, DomainPtr domain, const CutSet& cuts,
                               const ScalarizeOptions& opt = {});

/// Median and max over triangles of |v.grad a|/(|v||grad a|) and |v.grad b - 1|, with v at
/// the centroid. Triangles touching excised vertices are skipped.
void residual_metrics(const VectorField& field, ScalarPair& pair);

/// Wraps given per-vertex values on an uncut mesh (no critical points, no cuts).
ScalarPair scalar_pair_from_values(const TriMesh& mesh, std::vector<double> a, std::vector<double> b);

void write_scalar_pair(std::ostream& out, const ScalarPair& pair);
ScalarPair read_scalar_pair(std::istream& in);
void save_scalar_pair(const std::string& path, const ScalarPair& pair);
ScalarPair load_scalar_pair(const std::string& path);

}  // namespace isoflow
