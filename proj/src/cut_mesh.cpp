#include "isoflow/cuts.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <set>
#include <numeric>

namespace isoflow {

std::vector<Vec2> CutMesh::chain_points(int p) const {
    std::vector<Vec2> out;
    for (int v : chains.at(static_cast<std::size_t>(p))) out.push_back(refined.vertices[static_cast<std::size_t>(v)]);
    return out;
}

namespace {

constexpr double kSnap = 0.15;

// Triangle soup with vertex -> triangle incidence, edited in place.
class Soup {
public:
    std::vector<Vec2> V;
    std::vector<Triangle> T;
    std::vector<char> alive;
    std::vector<std::vector<int>> vt;
    std::vector<char> boundary;
    std::vector<char> locked;  // vertices that must not absorb snaps

    explicit Soup(const TriMesh& m) : V(m.vertices), T(m.triangles), alive(m.triangles.size(), 1) {
        vt.resize(V.size());
        for (std::size_t t = 0; t < T.size(); ++t)
            for (int k = 0; k < 3; ++k) vt[static_cast<std::size_t>(T[t][k])].push_back(static_cast<int>(t));
        boundary.assign(V.size(), 0);
        for (int v : m.boundary_loop) boundary[static_cast<std::size_t>(v)] = 1;
        locked.assign(V.size(), 0);
    }

    int add_vertex(Vec2 x, bool on_boundary) {
        V.push_back(x);
        vt.emplace_back();
        boundary.push_back(on_boundary ? 1 : 0);
        locked.push_back(0);
        return static_cast<int>(V.size()) - 1;
    }
    void kill(int t) {
        alive[static_cast<std::size_t>(t)] = 0;
        for (int k = 0; k < 3; ++k) {
            auto& l = vt[static_cast<std::size_t>(T[static_cast<std::size_t>(t)][k])];
            l.erase(std::remove(l.begin(), l.end(), t), l.end());
        }
    }
    int add(Triangle tri) {
        if (!(orient(V[static_cast<std::size_t>(tri[0])], V[static_cast<std::size_t>(tri[1])], V[static_cast<std::size_t>(tri[2])]) > 0.0))
            throw Error(ErrorCode::GeometryFailure, "cut embedding produced a degenerate triangle");
        T.push_back(tri);
        alive.push_back(1);
        const int t = static_cast<int>(T.size()) - 1;
        for (int k = 0; k < 3; ++k) vt[static_cast<std::size_t>(tri[k])].push_back(t);
        return t;
    }
    std::vector<int> edge_tris(int u, int w) const {
        std::vector<int> out;
        for (int t : vt[static_cast<std::size_t>(u)]) {
            const auto& tri = T[static_cast<std::size_t>(t)];
            if (tri[0] == w || tri[1] == w || tri[2] == w) out.push_back(t);
        }
        return out;
    }
    int split_edge(int a, int b, Vec2 x) {
        const auto tris = edge_tris(a, b);
        const int m = add_vertex(x, tris.size() == 1);
        for (int t : tris) {
            const Triangle tri = T[static_cast<std::size_t>(t)];
            int k = 0;
            while (!((tri[k] == a && tri[(k + 1) % 3] == b) || (tri[k] == b && tri[(k + 1) % 3] == a))) ++k;
            const int p = tri[k], q = tri[(k + 1) % 3], o = tri[(k + 2) % 3];
            kill(t);
            add({p, m, o});
            add({m, q, o});
        }
        return m;
    }
    int split_triangle(int t, Vec2 x) {
        const Triangle tri = T[static_cast<std::size_t>(t)];
        const int m = add_vertex(x, false);
        kill(t);
        add({tri[0], tri[1], m});
        add({tri[1], tri[2], m});
        add({tri[2], tri[0], m});
        return m;
    }
    double local_edge(int t) const {
        const auto& tri = T[static_cast<std::size_t>(t)];
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
            s += distance(V[static_cast<std::size_t>(tri[k])], V[static_cast<std::size_t>(tri[(k + 1) % 3])]);
        return s / 3.0;
    }

    // Inserts x as a vertex. `boundary_point` forces the point onto a boundary edge.
    int insert_point(Vec2 x, bool boundary_point) {
        int best_t = -1;
        double best_min = -std::numeric_limits<double>::infinity();
        std::array<double, 3> best_w{};
        for (std::size_t t = 0; t < T.size(); ++t) {
            if (!alive[t]) continue;
            const Vec2 p0 = V[static_cast<std::size_t>(T[t][0])], p1 = V[static_cast<std::size_t>(T[t][1])], p2 = V[static_cast<std::size_t>(T[t][2])];
            const double a2 = orient(p0, p1, p2);
            std::array<double, 3> w{orient(x, p1, p2) / a2, orient(p0, x, p2) / a2, orient(p0, p1, x) / a2};
            const double mn = std::min({w[0], w[1], w[2]});
            if (mn > best_min) {
                best_min = mn;
                best_t = static_cast<int>(t);
                best_w = w;
            }
        }
        if (best_t < 0 || best_min < -1e-6) throw Error(ErrorCode::GeometryFailure, "cut point lies outside the mesh");
        const Triangle tri = T[static_cast<std::size_t>(best_t)];
        const double le = local_edge(best_t);
        // nearest corner
        int kc = 0;
        for (int k = 1; k < 3; ++k)
            if (distance(x, V[static_cast<std::size_t>(tri[k])]) < distance(x, V[static_cast<std::size_t>(tri[kc])])) kc = k;
        const int vc = tri[kc];
        const double dc = distance(x, V[static_cast<std::size_t>(vc)]);
        if (dc <= 1e-12 * le) return vc;
        if (dc <= kSnap * le && !locked[static_cast<std::size_t>(vc)] && (boundary_point == static_cast<bool>(boundary[static_cast<std::size_t>(vc)])))
            return vc;
        if (boundary_point) {
            // split the boundary edge of this triangle closest to x
            int ke = -1;
            double de = 1e300;
            for (int k = 0; k < 3; ++k) {
                const int a = tri[k], b = tri[(k + 1) % 3];
                if (edge_tris(a, b).size() != 1) continue;
                const double d = distance(x, closest_on_segment(V[static_cast<std::size_t>(a)], V[static_cast<std::size_t>(b)], x));
                if (d < de) {
                    de = d;
                    ke = k;
                }
            }
            if (ke < 0 || de > 1e-6 * le) throw Error(ErrorCode::GeometryFailure, "boundary cut anchor is not on the boundary");
            const int a = tri[ke], b = tri[(ke + 1) % 3];
            double t = 0.0;
            const Vec2 y = closest_on_segment(V[static_cast<std::size_t>(a)], V[static_cast<std::size_t>(b)], x, &t);
            if (t <= 1e-9 || t >= 1.0 - 1e-9) return t < 0.5 ? a : b;
            return split_edge(a, b, y);
        }
        // on an edge?
        for (int k = 0; k < 3; ++k) {
            if (best_w[k] > 1e-9) continue;
            const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
            if (edge_tris(a, b).size() == 1) throw Error(ErrorCode::GeometryFailure, "interior cut point lies on the boundary");
            double t = 0.0;
            const Vec2 y = closest_on_segment(V[static_cast<std::size_t>(a)], V[static_cast<std::size_t>(b)], x, &t);
            return split_edge(a, b, y);
        }
        return split_triangle(best_t, x);
    }

    // Walks from vertex u to vertex q through the triangulation, appending the visited chain
    // (excluding u) to `chain`.
    void walk(int u, int q, std::vector<int>& chain) {
        const Vec2 Q = V[static_cast<std::size_t>(q)];
        for (int guard = 0; u != q; ++guard) {
            if (guard > 1000000) throw Error(ErrorCode::GeometryFailure, "cut walk does not terminate");
            const Vec2 U = V[static_cast<std::size_t>(u)];
            const Vec2 d = Q - U;
            const double dl = norm(d);
            int next = -1;
            for (int t : vt[static_cast<std::size_t>(u)]) {
                const auto& tri = T[static_cast<std::size_t>(t)];
                int k = 0;
                while (tri[k] != u) ++k;
                const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
                const Vec2 A = V[static_cast<std::size_t>(a)], B = V[static_cast<std::size_t>(b)];
                const double ca = cross(A - U, d), cb = cross(d, B - U);
                const double tol_a = 1e-10 * norm(A - U) * dl, tol_b = 1e-10 * norm(B - U) * dl;
                if (std::fabs(ca) <= tol_a && dot(A - U, d) > 0.0) {
                    next = a;
                    break;
                }
                if (std::fabs(cb) <= tol_b && dot(B - U, d) > 0.0) {
                    next = b;
                    break;
                }
                if (ca < 0.0 || cb < 0.0) continue;
                // the ray leaves through edge a-b
                double s = 0.0, tt = 0.0;
                if (!segment_intersection(U, U + 2.0 * d, A, B, &s, &tt)) continue;
                if (2.0 * s * dl > dl * (1.0 + 1e-9))
                    throw Error(ErrorCode::GeometryFailure, "cut walk passed its target");
                if (tt < kSnap && !locked[static_cast<std::size_t>(a)] && !boundary[static_cast<std::size_t>(a)])
                    next = a;
                else if (tt > 1.0 - kSnap && !locked[static_cast<std::size_t>(b)] && !boundary[static_cast<std::size_t>(b)])
                    next = b;
                else if (tt <= 1e-9 || tt >= 1.0 - 1e-9)
                    throw Error(ErrorCode::GeometryFailure, "cut passes through a protected vertex");
                else
                    next = split_edge(a, b, A + tt * (B - A));
                if (boundary[static_cast<std::size_t>(next)] && next != q)
                    throw Error(ErrorCode::GeometryFailure, "cut touches the boundary");
                break;
            }
            if (next < 0) throw Error(ErrorCode::GeometryFailure, "cut walk lost its triangle");
            chain.push_back(next);
            locked[static_cast<std::size_t>(next)] = 1;
            u = next;
        }
    }
};

std::pair<int, int> ekey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

CutMesh embed_cuts(const TriMesh& mesh, const CutSet& cuts) {
    CutMesh cm;
    Soup soup(mesh);
    std::map<int, int> cp_vertex;
    cm.chains.resize(cuts.paths.size());

    // anchors first, so walks never snap onto them
    auto anchor_vertex = [&](const CutAnchor& a, Vec2 x) {
        if (a.is_boundary()) return soup.insert_point(x, true);
        auto it = cp_vertex.find(a.cp);
        if (it != cp_vertex.end()) return it->second;
        const int v = soup.insert_point(x, false);
        cp_vertex[a.cp] = v;
        return v;
    };
    std::vector<std::vector<int>> stops(cuts.paths.size());
    for (std::size_t p = 0; p < cuts.paths.size(); ++p) {
        const auto& path = cuts.paths[p];
        stops[p].push_back(anchor_vertex(path.start, path.points.front()));
        soup.locked[static_cast<std::size_t>(stops[p].back())] = 1;
        stops[p].push_back(anchor_vertex(path.end, path.points.back()));
        soup.locked[static_cast<std::size_t>(stops[p].back())] = 1;
    }
    for (std::size_t p = 0; p < cuts.paths.size(); ++p) {
        const auto& path = cuts.paths[p];
        std::vector<int> st{stops[p].front()};
        for (std::size_t i = 1; i + 1 < path.points.size(); ++i) {
            st.push_back(soup.insert_point(path.points[i], false));
            soup.locked[static_cast<std::size_t>(st.back())] = 1;
        }
        st.push_back(stops[p].back());
        auto& chain = cm.chains[p];
        chain.push_back(st.front());
        for (std::size_t i = 0; i + 1 < st.size(); ++i) soup.walk(st[i], st[i + 1], chain);
    }

    // compact
    std::vector<Triangle> tris;
    for (std::size_t t = 0; t < soup.T.size(); ++t)
        if (soup.alive[t]) tris.push_back(soup.T[t]);
    cm.refined = make_mesh(soup.V, tris);
    cm.refined_count = static_cast<int>(soup.V.size());

    // cut edges
    std::set<std::pair<int, int>> cut_keys;
    std::vector<char> on_cut(soup.V.size(), 0);
    for (const auto& ch : cm.chains) {
        for (std::size_t i = 0; i + 1 < ch.size(); ++i)
            if (!cut_keys.insert(ekey(ch[i], ch[i + 1])).second)
                throw Error(ErrorCode::GeometryFailure, "two cuts share a mesh edge");
        for (int v : ch) on_cut[static_cast<std::size_t>(v)] = 1;
    }

    // duplicate: split each cut vertex's fan into components joined by non-cut edges
    std::vector<std::vector<int>> vt(soup.V.size());
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int k = 0; k < 3; ++k) vt[static_cast<std::size_t>(tris[t][k])].push_back(static_cast<int>(t));
    std::vector<Vec2> verts = soup.V;
    cm.origin.resize(verts.size());
    std::iota(cm.origin.begin(), cm.origin.end(), 0);
    std::vector<Triangle> out = tris;
    for (std::size_t v = 0; v < soup.V.size(); ++v) {
        if (!on_cut[v]) continue;
        const auto& fan = vt[v];
        std::vector<int> comp(fan.size());
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> root = [&](int x) {
            return comp[static_cast<std::size_t>(x)] == x ? x : comp[static_cast<std::size_t>(x)] = root(comp[static_cast<std::size_t>(x)]);
        };
        for (std::size_t i = 0; i < fan.size(); ++i)
            for (std::size_t j = i + 1; j < fan.size(); ++j) {
                const auto& ti = tris[static_cast<std::size_t>(fan[i])];
                const auto& tj = tris[static_cast<std::size_t>(fan[j])];
                for (int a : ti) {
                    if (a == static_cast<int>(v)) continue;
                    if (std::find(tj.begin(), tj.end(), a) == tj.end()) continue;
                    if (cut_keys.count(ekey(static_cast<int>(v), a))) continue;
                    comp[static_cast<std::size_t>(root(static_cast<int>(i)))] = root(static_cast<int>(j));
                }
            }
        std::map<int, int> copy_of;  // component root -> vertex
        for (std::size_t i = 0; i < fan.size(); ++i) {
            const int r = root(static_cast<int>(i));
            auto it = copy_of.find(r);
            int nv;
            if (it != copy_of.end()) {
                nv = it->second;
            } else if (copy_of.empty()) {
                nv = static_cast<int>(v);
                copy_of[r] = nv;
            } else {
                nv = static_cast<int>(verts.size());
                verts.push_back(verts[v]);
                cm.origin.push_back(static_cast<int>(v));
                copy_of[r] = nv;
            }
            for (int& c : out[static_cast<std::size_t>(fan[i])])
                if (c == static_cast<int>(v)) c = nv;
        }
    }
    cm.mesh = make_mesh(verts, out);
    finish_cut_mesh(cm);
    return cm;
}

void finish_cut_mesh(CutMesh& cm) {
    const std::size_t nr = static_cast<std::size_t>(cm.refined_count);
    const std::size_t nv = cm.mesh.vertices.size();
    if (cm.origin.size() != nv) throw Error(ErrorCode::ValidationError, "cut mesh origin map has the wrong size");
    std::vector<Triangle> rtris = cm.mesh.triangles;
    for (auto& t : rtris)
        for (int& c : t) {
            if (c < 0 || static_cast<std::size_t>(c) >= nv) throw Error(ErrorCode::ValidationError, "triangle index out of range");
            c = cm.origin[static_cast<std::size_t>(c)];
            if (c < 0 || static_cast<std::size_t>(c) >= nr) throw Error(ErrorCode::ValidationError, "origin index out of range");
        }
    cm.refined = make_mesh(std::vector<Vec2>(cm.mesh.vertices.begin(), cm.mesh.vertices.begin() + static_cast<std::ptrdiff_t>(nr)), rtris);
    cm.copies.assign(nr, {});
    for (std::size_t v = 0; v < nv; ++v) cm.copies[static_cast<std::size_t>(cm.origin[v])].push_back(static_cast<int>(v));
    cm.on_cut.assign(nr, 0);
    cm.edges.clear();

    std::vector<std::vector<int>> vt(nr);
    for (std::size_t t = 0; t < rtris.size(); ++t)
        for (int k = 0; k < 3; ++k) vt[static_cast<std::size_t>(rtris[t][k])].push_back(static_cast<int>(t));
    for (std::size_t p = 0; p < cm.chains.size(); ++p) {
        const auto& ch = cm.chains[p];
        for (int v : ch) cm.on_cut[static_cast<std::size_t>(v)] = 1;
        for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
            CutEdge e;
            e.path = static_cast<int>(p);
            e.u = ch[i];
            e.w = ch[i + 1];
            const Vec2 U = cm.refined.vertices[static_cast<std::size_t>(e.u)], W = cm.refined.vertices[static_cast<std::size_t>(e.w)];
            for (int t : vt[static_cast<std::size_t>(e.u)]) {
                const auto& tri = rtris[static_cast<std::size_t>(t)];
                if (std::find(tri.begin(), tri.end(), e.w) == tri.end()) continue;
                int o = -1, ku = -1, kw = -1;
                for (int k = 0; k < 3; ++k) {
                    if (tri[k] == e.u) ku = k;
                    else if (tri[k] == e.w) kw = k;
                    else o = tri[k];
                }
                const auto& ft = cm.mesh.triangles[static_cast<std::size_t>(t)];
                if (orient(U, W, cm.refined.vertices[static_cast<std::size_t>(o)]) > 0.0) {
                    e.left_tri = t;
                    e.left_u = ft[ku];
                    e.left_w = ft[kw];
                } else {
                    e.right_tri = t;
                    e.right_u = ft[ku];
                    e.right_w = ft[kw];
                }
            }
            if (e.left_tri < 0 || e.right_tri < 0) throw Error(ErrorCode::GeometryFailure, "cut edge lies on the boundary");
            cm.edges.push_back(e);
        }
    }
}

namespace {

Vec2 pl_gradient(const TriMesh& m, int t, const std::vector<double>& f) {
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = m.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 e1 = m.vertices[static_cast<std::size_t>(tri[1])] - p0;
    const Vec2 e2 = m.vertices[static_cast<std::size_t>(tri[2])] - p0;
    const double d1 = f[static_cast<std::size_t>(tri[1])] - f[static_cast<std::size_t>(tri[0])];
    const double d2 = f[static_cast<std::size_t>(tri[2])] - f[static_cast<std::size_t>(tri[0])];
    const double det = cross(e1, e2);
    return {(d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det};
}

bool finite_tri(const TriMesh& m, int t, const std::vector<double>& f) {
    for (int v : m.triangles[static_cast<std::size_t>(t)])
        if (!std::isfinite(f[static_cast<std::size_t>(v)])) return false;
    return true;
}

}  // namespace

std::vector<CutCheck> check_gradient_preserving(const CutMesh& cm, const std::vector<double>& values,
                                                const std::vector<double>& h, double jump_tol, double grad_tol) {
    std::vector<CutCheck> out(cm.chains.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p].path = static_cast<int>(p);
        out[p].h = p < h.size() ? h[p] : 0.0;
        out[p].zero_jump = out[p].h == 0.0;
    }
    for (const auto& e : cm.edges) {
        auto& c = out[static_cast<std::size_t>(e.path)];
        const std::pair<int, int> pairs[2] = {{e.left_u, e.right_u}, {e.left_w, e.right_w}};
        for (auto [l, r] : pairs) {
            if (l == r) continue;  // slit tip
            const double vl = values[static_cast<std::size_t>(l)], vr = values[static_cast<std::size_t>(r)];
            if (!std::isfinite(vl) || !std::isfinite(vr)) continue;
            c.max_jump_error = std::max(c.max_jump_error, std::fabs((vl - vr) - c.h));
            ++c.samples;
        }
        if (finite_tri(cm.mesh, e.left_tri, values) && finite_tri(cm.mesh, e.right_tri, values)) {
            const Vec2 gl = pl_gradient(cm.mesh, e.left_tri, values);
            const Vec2 gr = pl_gradient(cm.mesh, e.right_tri, values);
            const double den = std::max(norm(gl), norm(gr));
            if (den > 0.0) c.max_gradient_mismatch = std::max(c.max_gradient_mismatch, norm(gl - gr) / den);
        }
    }
    for (auto& c : out) c.pass = !c.zero_jump && c.max_jump_error <= jump_tol && c.max_gradient_mismatch <= grad_tol;
    return out;
}

}  // namespace isoflow
