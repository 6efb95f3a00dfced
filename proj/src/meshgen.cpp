#include "isoflow/meshgen.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace isoflow {

TriMesh square_mesh(Vec2 lo, Vec2 hi, int nx, int ny) {
    if (nx < 1 || ny < 1) throw Error(ErrorCode::ValidationError, "square mesh needs at least one cell");
    std::vector<Vec2> verts;
    verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            // exact end points so boundary coordinates are not perturbed by rounding
            const double x = i == nx ? hi.x : lo.x + (hi.x - lo.x) * i / nx;
            const double y = j == ny ? hi.y : lo.y + (hi.y - lo.y) * j / ny;
            verts.emplace_back(x, y);
        }
    }
    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(2) * nx * ny);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return make_mesh(std::move(verts), std::move(tris));
}

TriMesh square_mesh_with_vertices(Vec2 lo, Vec2 hi, int target_vertices) {
    const double aspect = (hi.x - lo.x) / (hi.y - lo.y);
    const double ny = std::sqrt(static_cast<double>(target_vertices) / aspect);
    const int cy = std::max(1, static_cast<int>(std::lround(ny)) - 1);
    const int cx = std::max(1, static_cast<int>(std::lround(ny * aspect)) - 1);
    return square_mesh(lo, hi, cx, cy);
}

namespace {

// Triangulates the strip between two concentric rings by merging their angular orders.
void zip_rings(const std::vector<int>& inner, const std::vector<double>& inner_angle, const std::vector<int>& outer,
               const std::vector<double>& outer_angle, std::vector<Triangle>& tris) {
    const std::size_t m = inner.size();
    const std::size_t n = outer.size();
    std::size_t i = 0, j = 0;
    auto angle_at = [](const std::vector<double>& a, std::size_t k) {
        return k < a.size() ? a[k] : 2.0 * std::numbers::pi;
    };
    while (i < m || j < n) {
        const double ai = angle_at(inner_angle, i + 1);
        const double aj = angle_at(outer_angle, j + 1);
        if (j < n && (i >= m || aj <= ai)) {
            tris.push_back({inner[i % m], outer[j], outer[(j + 1) % n]});
            ++j;
        } else {
            tris.push_back({inner[i], outer[j % n], inner[(i + 1) % m]});
            ++i;
        }
    }
}

struct Rings {
    std::vector<Vec2> verts;
    std::vector<std::vector<int>> ids;
    std::vector<std::vector<double>> angles;
};

Rings make_rings(Vec2 center, double r0, double r1, int boundary_n, int rings, int first_ring) {
    Rings out;
    for (int k = first_ring; k <= rings; ++k) {
        const double frac = static_cast<double>(k) / rings;
        const double r = k == rings ? r1 : r0 + (r1 - r0) * frac;
        const double rel = r1 > 0.0 ? r / r1 : 1.0;
        const int count = k == rings ? boundary_n : std::max(6, static_cast<int>(std::lround(boundary_n * rel)));
        std::vector<int> ids;
        std::vector<double> angles;
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * std::numbers::pi * i / count;
            ids.push_back(static_cast<int>(out.verts.size()));
            angles.push_back(a);
            out.verts.push_back(center + r * Vec2{std::cos(a), std::sin(a)});
        }
        out.ids.push_back(std::move(ids));
        out.angles.push_back(std::move(angles));
    }
    return out;
}

}  // namespace

TriMesh disk_mesh(Vec2 center, double radius, int boundary_n, int rings) {
    if (boundary_n < 6 || rings < 1) throw Error(ErrorCode::ValidationError, "disk mesh too coarse");
    // outer ring first so the lowest-index boundary vertex sits at angle 0
    Rings r = make_rings(center, 0.0, radius, boundary_n, rings, 1);
    std::vector<Vec2> verts;
    std::vector<int> remap(r.verts.size());
    std::vector<Triangle> tris;
    const int nrings = static_cast<int>(r.ids.size());
    for (int k = nrings - 1; k >= 0; --k) {
        for (int id : r.ids[k]) {
            remap[id] = static_cast<int>(verts.size());
            verts.push_back(r.verts[id]);
        }
    }
    for (auto& ring : r.ids)
        for (int& id : ring) id = remap[id];
    const int c = static_cast<int>(verts.size());
    verts.push_back(center);
    const auto& first = r.ids[0];
    for (std::size_t i = 0; i < first.size(); ++i) tris.push_back({c, first[i], first[(i + 1) % first.size()]});
    for (int k = 0; k + 1 < nrings; ++k) zip_rings(r.ids[k], r.angles[k], r.ids[k + 1], r.angles[k + 1], tris);
    return make_mesh(std::move(verts), std::move(tris));
}

RawMesh annulus_triangles(Vec2 center, double inner, double outer, int boundary_n, int rings) {
    Rings r = make_rings(center, inner, outer, boundary_n, rings, 0);
    RawMesh out;
    out.vertices = r.verts;
    for (std::size_t k = 0; k + 1 < r.ids.size(); ++k) {
        zip_rings(r.ids[k], r.angles[k], r.ids[k + 1], r.angles[k + 1], out.triangles);
    }
    return out;
}

}  // namespace isoflow
