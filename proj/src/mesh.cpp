#include "isoflow/mesh.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace isoflow {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

constexpr double kBaryTol = 1e-12;

}  // namespace

void validate_triangles(const std::vector<Vec2>& vertices, const std::vector<Triangle>& triangles) {
    const int n = static_cast<int>(vertices.size());
    for (int i = 0; i < n; ++i) {
        if (!is_finite(vertices[i])) {
            throw Error(ErrorCode::ValidationError, "vertex " + std::to_string(i) + " has a non-finite coordinate");
        }
    }
    std::unordered_map<std::uint64_t, int> edge_use;
    edge_use.reserve(triangles.size() * 3);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= n) {
                throw Error(ErrorCode::ValidationError,
                            "triangle " + std::to_string(t) + " references vertex " + std::to_string(tri[k]) +
                                " out of range [0, " + std::to_string(n) + ")");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw Error(ErrorCode::ValidationError, "triangle " + std::to_string(t) + " repeats a vertex");
        }
        const double area2 = orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if (!(area2 > 0.0)) {
            throw Error(ErrorCode::ValidationError, "triangle " + std::to_string(t) +
                                                        (area2 == 0.0 ? " is degenerate (zero area)"
                                                                      : " is not counter-clockwise"));
        }
        for (int k = 0; k < 3; ++k) {
            if (++edge_use[edge_key(tri[k], tri[(k + 1) % 3])] > 2) {
                throw Error(ErrorCode::ValidationError, "edge (" + std::to_string(tri[k]) + ", " +
                                                            std::to_string(tri[(k + 1) % 3]) +
                                                            ") is shared by more than two triangles");
            }
        }
    }
}

std::vector<int> extract_boundary_loop(const std::vector<Vec2>& vertices, const std::vector<Triangle>& triangles) {
    std::unordered_map<std::uint64_t, int> edge_use;
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k) ++edge_use[edge_key(tri[k], tri[(k + 1) % 3])];
    }
    std::map<int, int> next;
    std::size_t boundary_edges = 0;
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            if (edge_use[edge_key(a, b)] != 1) continue;
            ++boundary_edges;
            if (!next.emplace(a, b).second) {
                throw Error(ErrorCode::NotDiskTopology, "boundary vertex " + std::to_string(a) + " is non-manifold");
            }
        }
    }
    if (next.empty()) throw Error(ErrorCode::NotDiskTopology, "mesh has no boundary");
    const int start = next.begin()->first;
    std::vector<int> loop;
    int v = start;
    do {
        loop.push_back(v);
        auto it = next.find(v);
        if (it == next.end()) throw Error(ErrorCode::NotDiskTopology, "boundary is not closed");
        v = it->second;
        if (loop.size() > boundary_edges) throw Error(ErrorCode::NotDiskTopology, "boundary walk does not close");
    } while (v != start);
    if (loop.size() != boundary_edges) {
        throw Error(ErrorCode::NotDiskTopology,
                    "boundary has more than one loop (" + std::to_string(boundary_edges) + " boundary edges, loop of " +
                        std::to_string(loop.size()) + ")");
    }
    // Euler characteristic of a disk is 1
    const long long euler = static_cast<long long>(vertices.size()) - static_cast<long long>(edge_use.size()) +
                            static_cast<long long>(triangles.size());
    std::size_t used = 0;
    {
        std::vector<char> seen(vertices.size(), 0);
        for (const auto& tri : triangles)
            for (int k : tri) seen[k] = 1;
        for (char c : seen) used += c;
    }
    const long long isolated = static_cast<long long>(vertices.size() - used);
    if (euler - isolated != 1) {
        throw Error(ErrorCode::NotDiskTopology, "Euler characteristic " + std::to_string(euler - isolated) + " != 1");
    }
    return loop;
}

TriMesh make_mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles) {
    validate_triangles(vertices, triangles);
    TriMesh mesh;
    mesh.boundary_loop = extract_boundary_loop(vertices, triangles);
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    return mesh;
}

std::vector<std::array<int, 3>> triangle_neighbours(const TriMesh& mesh) {
    std::unordered_map<std::uint64_t, std::pair<int, int>> owner;  // directed edge -> (tri, edge index)
    owner.reserve(mesh.triangles.size() * 3);
    auto directed = [](int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) owner[directed(tri[k], tri[(k + 1) % 3])] = {static_cast<int>(t), k};
    }
    std::vector<std::array<int, 3>> nb(mesh.triangles.size(), {-1, -1, -1});
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            auto it = owner.find(directed(tri[(k + 1) % 3], tri[k]));
            if (it != owner.end()) nb[t][k] = it->second.first;
        }
    }
    return nb;
}

double triangle_area(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return 0.5 * orient(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

double total_area(const TriMesh& mesh) {
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) sum += triangle_area(mesh, static_cast<int>(t));
    return sum;
}

std::vector<double> edge_lengths(const TriMesh& mesh) {
    std::vector<double> out;
    out.reserve(mesh.triangles.size() * 3 / 2 + mesh.boundary_loop.size());
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            // interior edges appear twice; keep the a<b copy, plus boundary edges
            if (a < b) out.push_back(distance(mesh.vertices[a], mesh.vertices[b]));
        }
    }
    return out;
}

double median_edge_length(const TriMesh& mesh) {
    auto lengths = edge_lengths(mesh);
    if (lengths.empty()) return 0.0;
    auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
    std::nth_element(lengths.begin(), mid, lengths.end());
    return *mid;
}

BBox bounding_box(const TriMesh& mesh) {
    BBox box;
    for (const auto& p : mesh.vertices) box.expand(p);
    return box;
}

// ---------------------------------------------------------------------------

BoundaryParam::BoundaryParam(std::vector<Vec2> loop_points) : points_(std::move(loop_points)) {
    cumulative_.resize(points_.size() + 1, 0.0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        cumulative_[i + 1] = cumulative_[i] + distance(points_[i], points_[(i + 1) % points_.size()]);
    }
    length_ = cumulative_.back();
}

double BoundaryParam::wrap(double s) const {
    double w = std::fmod(s, length_);
    if (w < 0.0) w += length_;
    if (w >= length_) w = 0.0;
    return w;
}

std::size_t BoundaryParam::segment_at(double s) const {
    const double w = wrap(s);
    if (w == 0.0) return points_.size() - 1;
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), w);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    return i == 0 ? 0 : i - 1;
}

Vec2 BoundaryParam::point(double s) const {
    const double w = wrap(s);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), w);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    if (i >= points_.size()) i = points_.size() - 1;
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double u = seg > 0.0 ? (w - cumulative_[i]) / seg : 0.0;
    return points_[i] + u * (segment_end(i) - points_[i]);
}

Vec2 BoundaryParam::segment_tangent(std::size_t i) const { return normalized(segment_end(i) - segment_start(i)); }

Vec2 BoundaryParam::segment_normal(std::size_t i) const {
    const Vec2 t = segment_tangent(i);
    return {t.y, -t.x};
}

Vec2 BoundaryParam::tangent(double s) const { return segment_tangent(segment_at(s)); }

BoundaryParam::Projection BoundaryParam::project(Vec2 x) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    const double tie = 1e-12 * std::max(1.0, length_);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        double u = 0.0;
        const Vec2 c = closest_on_segment(points_[i], segment_end(i), x, &u);
        const double d = distance(c, x);
        if (d < best.distance - tie) {
            best.distance = d;
            best.point = c;
            best.segment = i;
            best.s = cumulative_[i] + u * (cumulative_[i + 1] - cumulative_[i]);
        }
    }
    best.s = wrap(best.s);
    return best;
}

// ---------------------------------------------------------------------------

Domain::Domain(TriMesh mesh) : mesh_(std::move(mesh)) {
    validate_triangles(mesh_.vertices, mesh_.triangles);
    if (mesh_.boundary_loop.empty()) mesh_.boundary_loop = extract_boundary_loop(mesh_.vertices, mesh_.triangles);
    std::vector<Vec2> loop;
    loop.reserve(mesh_.boundary_loop.size());
    for (int v : mesh_.boundary_loop) loop.push_back(mesh_.vertices[v]);
    boundary_ = BoundaryParam(std::move(loop));
    neighbours_ = triangle_neighbours(mesh_);
    inv_area2_.resize(mesh_.triangles.size());
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
        inv_area2_[t] = 1.0 / (2.0 * triangle_area(mesh_, static_cast<int>(t)));
    }
    bbox_ = bounding_box(mesh_);
    median_edge_ = median_edge_length(mesh_);
    build_grid();
}

DomainPtr make_domain(TriMesh mesh) { return std::make_shared<const Domain>(std::move(mesh)); }

void Domain::build_grid() {
    const double w = std::max(bbox_.hi.x - bbox_.lo.x, 1e-300);
    const double h = std::max(bbox_.hi.y - bbox_.lo.y, 1e-300);
    const double cells = std::max<double>(1.0, static_cast<double>(mesh_.triangles.size()) / 2.0);
    const double side = std::sqrt(w * h / cells);
    nx_ = std::clamp(static_cast<int>(std::ceil(w / side)), 1, 4096);
    ny_ = std::clamp(static_cast<int>(std::ceil(h / side)), 1, 4096);
    cell_w_ = w / nx_;
    cell_h_ = h / ny_;
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
        BBox tb;
        for (int k : mesh_.triangles[t]) tb.expand(mesh_.vertices[k]);
        int x0, y0, x1, y1;
        cell_of(tb.lo, &x0, &y0);
        cell_of(tb.hi, &x1, &y1);
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix) cells_[static_cast<std::size_t>(iy) * nx_ + ix].push_back(static_cast<int>(t));
    }
}

std::size_t Domain::cell_of(Vec2 x, int* ix, int* iy) const {
    int cx = static_cast<int>(std::floor((x.x - bbox_.lo.x) / cell_w_));
    int cy = static_cast<int>(std::floor((x.y - bbox_.lo.y) / cell_h_));
    cx = std::clamp(cx, 0, nx_ - 1);
    cy = std::clamp(cy, 0, ny_ - 1);
    *ix = cx;
    *iy = cy;
    return static_cast<std::size_t>(cy) * nx_ + cx;
}

Barycentric Domain::barycentric(int t, Vec2 x) const {
    const auto& tri = mesh_.triangles[t];
    const Vec2 p0 = mesh_.vertices[tri[0]];
    const Vec2 p1 = mesh_.vertices[tri[1]];
    const Vec2 p2 = mesh_.vertices[tri[2]];
    const double inv = inv_area2_[t];
    Barycentric b;
    b.w[0] = orient(x, p1, p2) * inv;
    b.w[1] = orient(p0, x, p2) * inv;
    b.w[2] = 1.0 - b.w[0] - b.w[1];
    return b;
}

bool Domain::inside_triangle(int t, Vec2 x) const {
    const auto b = barycentric(t, x);
    return b.w[0] >= -kBaryTol && b.w[1] >= -kBaryTol && b.w[2] >= -kBaryTol;
}

int Domain::locate(Vec2 x) const {
    if (!bbox_.contains(x, 1e-12 * bbox_.diagonal())) return -1;
    int ix, iy;
    const auto& cell = cells_[cell_of(x, &ix, &iy)];
    for (int t : cell) {
        if (inside_triangle(t, x)) return t;
    }
    return -1;
}

int Domain::locate(Vec2 x, int hint) const {
    if (hint >= 0) {
        if (inside_triangle(hint, x)) return hint;
        for (int nb : neighbours_[hint]) {
            if (nb >= 0 && inside_triangle(nb, x)) return nb;
        }
    }
    return locate(x);
}

int Domain::nearest_triangle(Vec2 x) const {
    int t = locate(x);
    if (t >= 0) return t;
    int ix, iy;
    cell_of(x, &ix, &iy);
    double best = std::numeric_limits<double>::infinity();
    int best_t = -1;
    for (int ring = 0; ring < std::max(nx_, ny_); ++ring) {
        for (int cy = iy - ring; cy <= iy + ring; ++cy) {
            for (int cx = ix - ring; cx <= ix + ring; ++cx) {
                if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) continue;
                if (std::max(std::abs(cx - ix), std::abs(cy - iy)) != ring) continue;
                for (int cand : cells_[static_cast<std::size_t>(cy) * nx_ + cx]) {
                    const auto& tri = mesh_.triangles[cand];
                    double d = std::numeric_limits<double>::infinity();
                    for (int k = 0; k < 3; ++k) {
                        d = std::min(d, distance(closest_on_segment(mesh_.vertices[tri[k]],
                                                                    mesh_.vertices[tri[(k + 1) % 3]], x),
                                                 x));
                    }
                    if (d < best || (d == best && cand < best_t)) {
                        best = d;
                        best_t = cand;
                    }
                }
            }
        }
        // a candidate found in ring r can only be beaten by cells within ~ one more ring
        if (best_t >= 0 && ring >= 1) break;
    }
    return best_t;
}

double Domain::local_edge_length(Vec2 x) const {
    const int t = nearest_triangle(x);
    if (t < 0) return median_edge_;
    const auto& tri = mesh_.triangles[t];
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) sum += distance(mesh_.vertices[tri[k]], mesh_.vertices[tri[(k + 1) % 3]]);
    return sum / 3.0;
}

}  // namespace isoflow
