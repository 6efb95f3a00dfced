#include "isoflow/query.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace isoflow {

PairIndex::PairIndex(const ScalarPair& pair) : pair_(&pair) {
    const CutMesh& cm = *pair.cut_mesh;
    const TriMesh& m = cm.mesh;
    const std::size_t nt = m.triangles.size();
    nbr_ = triangle_neighbours(m);
    cut_.assign(nt, {});
    tri_excised_.assign(nt, 0);
    for (std::size_t t = 0; t < nt; ++t)
        for (int v : m.triangles[t])
            if (pair.excised[static_cast<std::size_t>(v)]) tri_excised_[t] = 1;

    for (std::size_t e = 0; e < cm.edges.size(); ++e) {
        const CutEdge& ce = cm.edges[e];
        for (bool left : {true, false}) {
            const int t = left ? ce.left_tri : ce.right_tri;
            const int u = left ? ce.left_u : ce.right_u, w = left ? ce.left_w : ce.right_w;
            const auto& tri = m.triangles[static_cast<std::size_t>(t)];
            for (int k = 0; k < 3; ++k) {
                const int p = tri[static_cast<std::size_t>(k)], q = tri[static_cast<std::size_t>((k + 1) % 3)];
                if ((p == u && q == w) || (p == w && q == u)) cut_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = {static_cast<int>(e), left};
            }
        }
    }

    median_edge_ = median_edge_length(m);
    box_ = bounding_box(m);
    cell_ = std::max(2.0 * median_edge_, 1e-12);
    nx_ = std::max(1, static_cast<int>(std::ceil((box_.hi.x - box_.lo.x) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((box_.hi.y - box_.lo.y) / cell_)));
    cells_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
    auto clampi = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1); };
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = m.triangles[t];
        Vec2 lo = m.vertices[static_cast<std::size_t>(tri[0])], hi = lo;
        for (int v : tri) {
            const Vec2 p = m.vertices[static_cast<std::size_t>(v)];
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        const int x0 = clampi((lo.x - box_.lo.x) / cell_, nx_), x1 = clampi((hi.x - box_.lo.x) / cell_, nx_);
        const int y0 = clampi((lo.y - box_.lo.y) / cell_, ny_), y1 = clampi((hi.y - box_.lo.y) / cell_, ny_);
        for (int j = y0; j <= y1; ++j)
            for (int i = x0; i <= x1; ++i) cells_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
    }
}

namespace {

Barycentric bary(const TriMesh& m, int t, Vec2 x) {
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const Vec2 a = m.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 b = m.vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 c = m.vertices[static_cast<std::size_t>(tri[2])];
    const double det = cross(b - a, c - a);
    Barycentric r;
    r.w[1] = cross(x - a, c - a) / det;
    r.w[2] = cross(b - a, x - a) / det;
    r.w[0] = 1.0 - r.w[1] - r.w[2];
    return r;
}

}  // namespace

std::vector<int> PairIndex::locate_all(Vec2 x) const {
    std::vector<int> out;
    const double tol = 1e-12 * std::max(1.0, box_.diagonal());
    if (x.x < box_.lo.x - tol || x.y < box_.lo.y - tol || x.x > box_.hi.x + tol || x.y > box_.hi.y + tol) return out;
    const int i = std::clamp(static_cast<int>(std::floor((x.x - box_.lo.x) / cell_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((x.y - box_.lo.y) / cell_)), 0, ny_ - 1);
    const auto& m = pair_->mesh();
    for (int t : cells_[static_cast<std::size_t>(j * nx_ + i)]) {
        const auto b = bary(m, t, x);
        if (b.w[0] >= -1e-12 && b.w[1] >= -1e-12 && b.w[2] >= -1e-12) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

int PairIndex::locate(Vec2 x) const {
    const auto all = locate_all(x);
    return all.empty() ? -1 : all.front();
}

double PairIndex::interpolate(const std::vector<double>& values, int t, Vec2 x) const {
    const auto& m = pair_->mesh();
    const auto b = bary(m, t, x);
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    return b.w[0] * values[static_cast<std::size_t>(tri[0])] + b.w[1] * values[static_cast<std::size_t>(tri[1])] +
           b.w[2] * values[static_cast<std::size_t>(tri[2])];
}

std::vector<int> FlowQueryResult::multiplicities(std::size_t paths) const {
    std::vector<int> out(paths, 0);
    for (const auto& c : crossings)
        if (c.path >= 0 && static_cast<std::size_t>(c.path) < paths) out[static_cast<std::size_t>(c.path)] += c.sign;
    return out;
}

const char* side_name(StreamSide s) {
    switch (s) {
        case StreamSide::Left: return "left";
        case StreamSide::Right: return "right";
        default: return "none";
    }
}

namespace {

// One piece of a walked isoline inside one triangle.
struct Segment {
    int tri = -1;
    Vec2 p, q;           // entry and exit
    double level = 0.0;  // isovalue in this triangle's frame
    double bp = 0.0, bq = 0.0;  // secondary values at p and q, continued across cuts
};

enum class WalkEnd { Stopped, Boundary, Excised, Stuck, Loop, Cap };

// Marches the isoline `level` of V through the cut mesh. Secondary values S (b for a-isolines)
// are carried along so they stay continuous where the walk crosses a cut.
class Walker {
public:
    Walker(const PairIndex& ix, const std::vector<double>& v, const std::vector<double>* s) : ix_(ix), m_(ix.pair().mesh()), v_(v), s_(s) {}

    bool crosses(int t, int k, double c) const {
        const double va = val(t, k), vb = val(t, k + 1);
        return (va >= c) != (vb >= c);
    }
    double param(int t, int k, double c) const {
        const double va = val(t, k), vb = val(t, k + 1);
        return vb == va ? 0.5 : std::clamp((c - va) / (vb - va), 0.0, 1.0);
    }
    Vec2 edge_point(int t, int k, double s) const { return (1.0 - s) * pos(t, k) + s * pos(t, k + 1); }
    double sec_on_edge(int t, int k, double s) const {
        if (!s_) return 0.0;
        return (1.0 - s) * (*s_)[vid(t, k)] + s * (*s_)[vid(t, k + 1)];
    }

    // Exit edge other than k_in. When the entry did not register as a crossing, the farther
    // of two candidates wins.
    int exit_edge(int t, double c, int k_in, Vec2 p_in) const {
        int best = -1;
        double far = -1.0;
        for (int k = 0; k < 3; ++k) {
            if (k == k_in || !crosses(t, k, c)) continue;
            const double d = distance(edge_point(t, k, param(t, k, c)), p_in);
            if (d > far) {
                far = d;
                best = k;
            }
        }
        return best;
    }

    // Walks from point p0 in t0 (interior start or entry on edge k_in), leaving through k_out.
    template <class Visit>
    WalkEnd walk(int t0, double level, Vec2 p0, double s0, int k_out, Visit&& visit, std::vector<CutCrossing>* crossings) const {
        int t = t0;
        double c = level;
        Vec2 p = p0;
        double sp = s0;
        double boff = 0.0;
        const std::size_t cap = 8 * m_.triangles.size() + 16;
        // (triangle, exit edge) -> b offset on first visit; a repeat with the same offset is
        // a closed PL isoline, which a simple field cannot have
        std::unordered_map<long long, double> seen;
        for (std::size_t step = 0; step < cap; ++step) {
            const double s = param(t, k_out, c);
            Segment seg;
            seg.tri = t;
            seg.p = p;
            seg.q = edge_point(t, k_out, s);
            seg.level = c;
            seg.bp = sp;
            seg.bq = sec_on_edge(t, k_out, s) + boff;
            if (!visit(seg)) return WalkEnd::Stopped;
            const long long key = 3LL * t + k_out;
            const auto [it, fresh] = seen.emplace(key, boff);
            if (!fresh && it->second == boff && !ix_.pair().periodic) return WalkEnd::Loop;

            // move across edge k_out
            int nt = ix_.neighbour(t, k_out);
            int k_in = -1;
            double nc = c;
            const int u = vid_i(t, k_out), w = vid_i(t, k_out + 1);
            if (nt >= 0) {
                for (int k = 0; k < 3; ++k)
                    if (vid_i(nt, k) == w && vid_i(nt, k + 1) == u) k_in = k;
            } else {
                const auto cs = ix_.cut_side(t, k_out);
                if (cs.edge < 0) return WalkEnd::Boundary;
                const CutEdge& ce = ix_.pair().cut_mesh->edges[static_cast<std::size_t>(cs.edge)];
                const int su = cs.left ? ce.left_u : ce.right_u;
                const int pu = cs.left ? ce.right_u : ce.left_u, pw = cs.left ? ce.right_w : ce.left_w;
                nt = cs.left ? ce.right_tri : ce.left_tri;
                const int mu = u == su ? pu : pw, mw = u == su ? pw : pu;
                for (int k = 0; k < 3; ++k)
                    if (vid_i(nt, k) == mw && vid_i(nt, k + 1) == mu) k_in = k;
                if (k_in < 0) return WalkEnd::Stuck;
                // same point on the partner edge; the partner runs w -> u
                const double s2 = 1.0 - s;
                nc = (1.0 - s2) * val(nt, k_in) + s2 * val(nt, k_in + 1);
                if (s_) boff += sec_on_edge(t, k_out, s) - sec_on_edge(nt, k_in, s2);
                const int sign = cs.left ? 1 : -1;
                if (crossings) crossings->push_back({ce.path, sign, seg.q});
            }
            if (k_in < 0) return WalkEnd::Stuck;
            if (ix_.excised(nt)) return WalkEnd::Excised;
            for (int k = 0; k < 3; ++k)
                if (!std::isfinite(val(nt, k))) return WalkEnd::Excised;
            p = seg.q;
            sp = seg.bq;
            t = nt;
            c = nc;
            k_out = exit_edge(t, c, k_in, p);
            if (k_out < 0) return WalkEnd::Stuck;
        }
        return WalkEnd::Cap;
    }

    Vec2 gradient(int t) const {
        const Vec2 p0 = pos(t, 0), e1 = pos(t, 1) - p0, e2 = pos(t, 2) - p0;
        const double d1 = val(t, 1) - val(t, 0), d2 = val(t, 2) - val(t, 0);
        const double det = cross(e1, e2);
        return {(d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det};
    }
    double variation(int t) const {
        const double a = val(t, 0), b = val(t, 1), c = val(t, 2);
        return std::max({a, b, c}) - std::min({a, b, c});
    }

private:
    std::size_t vid(int t, int k) const { return static_cast<std::size_t>(vid_i(t, k)); }
    int vid_i(int t, int k) const { return m_.triangles[static_cast<std::size_t>(t)][static_cast<std::size_t>(k % 3)]; }
    double val(int t, int k) const { return v_[vid(t, k)]; }
    Vec2 pos(int t, int k) const { return m_.vertices[vid(t, k)]; }

    const PairIndex& ix_;
    const TriMesh& m_;
    const std::vector<double>& v_;
    const std::vector<double>* s_;
};

int start_triangle(const PairIndex& ix, Vec2 x) {
    const int t = ix.locate(x);
    if (t < 0) throw Error(ErrorCode::OutOfDomain, "query point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") is outside the domain");
    const auto& pair = ix.pair();
    bool excised = ix.excised(t);
    for (std::size_t k = 0; k < pair.cps.size(); ++k) excised = excised || distance(x, pair.cps[k].position) < pair.radii[k];
    if (excised)
        throw Error(ErrorCode::EntersExcisedRegion,
                    "query point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") lies in an excised critical-point disk");
    return t;
}

// Triangle at x in which the isoline through x actually passes (x may sit on an edge the
// isoline runs along). Falls back to `t`.
int crossing_triangle(const PairIndex& ix, const Walker& w, const std::vector<double>& v, Vec2 x, int t) {
    for (int c : ix.locate_all(x)) {
        if (ix.excised(c)) continue;
        const double level = ix.interpolate(v, c, x);
        int n = 0;
        for (int k = 0; k < 3; ++k) n += w.crosses(c, k, level);
        if (n >= 2) return c;
    }
    return t;
}

// Crossing edges of the isoline through x in t, sorted along `dir` (best first).
std::vector<int> exits_along(const Walker& w, int t, double c, Vec2 x, Vec2 dir) {
    std::vector<std::pair<double, int>> cand;
    for (int k = 0; k < 3; ++k)
        if (w.crosses(t, k, c)) cand.push_back({-dot(w.edge_point(t, k, w.param(t, k, c)) - x, dir), k});
    std::sort(cand.begin(), cand.end());
    std::vector<int> out;
    for (auto& [d, k] : cand) out.push_back(k);
    return out;
}

}  // namespace

FlowQueryResult advect_lookup(const PairIndex& ix, Vec2 x, double tau) {
    const auto& pair = ix.pair();
    FlowQueryResult res;
    res.endpoint = x;
    Walker w(ix, pair.a, &pair.b);
    const int t = crossing_triangle(ix, w, pair.a, x, start_triangle(ix, x));
    if (tau == 0.0) return res;
    const double c = ix.interpolate(pair.a, t, x);
    const double b0 = ix.interpolate(pair.b, t, x);
    const double target = b0 + tau;
    // the flow runs with grad a on its left
    const Vec2 g = w.gradient(t);
    const Vec2 dir = (tau > 0.0 ? 1.0 : -1.0) * Vec2{g.y, -g.x};
    const auto ex = exits_along(w, t, c, x, dir);
    if (ex.empty()) throw Error(ErrorCode::NotSimpleHere, "a is flat at the query point");
    bool done = false;
    Segment last;
    const WalkEnd end = w.walk(
        t, c, x, b0, ex.front(),
        [&](const Segment& s) {
            last = s;
            if ((s.bp - target) * (s.bq - target) <= 0.0 && s.bq != s.bp) {
                const double f = (target - s.bp) / (s.bq - s.bp);
                res.endpoint = s.p + f * (s.q - s.p);
                done = true;
                return false;
            }
            return true;
        },
        &res.crossings);
    if (done) return res;
    switch (end) {
        case WalkEnd::Boundary:
            res.out_of_domain = true;
            res.endpoint = last.q;
            res.tau_exit = last.bq - b0;
            return res;
        case WalkEnd::Excised:
            throw Error(ErrorCode::EntersExcisedRegion, "isoline reaches an excised critical-point disk");
        default:
            throw Error(ErrorCode::NotSimpleHere, std::string("isoline walk ") + (end == WalkEnd::Cap    ? "hit the step cap"
                                                                                                  : end == WalkEnd::Loop ? "closed on itself"
                                                                                                                         : "lost the level") +
                                                      " near (" + std::to_string(last.q.x) + ", " + std::to_string(last.q.y) + ")");
    }
}

ConnectivityResult connectivity(const PairIndex& ix, Vec2 x1, Vec2 x2) {
    const auto& pair = ix.pair();
    Walker w(ix, pair.a, &pair.b);
    const int t1 = crossing_triangle(ix, w, pair.a, x1, start_triangle(ix, x1));
    const int t2 = crossing_triangle(ix, w, pair.a, x2, start_triangle(ix, x2));

    struct Probe {
        bool hit = false;
        double delta_tau = 0.0;
        std::vector<CutCrossing> crossings;
        double best = std::numeric_limits<double>::infinity();
        Vec2 q;
        int q_tri = -1;
    };
    // walks the isoline through `from` both ways, looking for `to`
    auto probe = [&](Vec2 from, int tf, Vec2 to, int tt) {
        Probe pr;
        const double c = ix.interpolate(pair.a, tf, from);
        const double b0 = ix.interpolate(pair.b, tf, from);
        const double a_to = ix.interpolate(pair.a, tt, to);
        const Vec2 g = w.gradient(tf);
        const Vec2 flow{g.y, -g.x};
        const double same = 1e-3 * w.variation(tf);
        for (double sgn : {1.0, -1.0}) {
            const auto ex = exits_along(w, tf, c, from, sgn * flow);
            if (ex.empty()) break;
            double eps = 0.0;
            int steps = 0;
            std::vector<CutCrossing> cr;
            w.walk(
                tf, c, from, b0, ex.front(),
                [&](const Segment& s) {
                    eps = std::max(eps, w.variation(s.tri));
                    double f = 0.0;
                    const Vec2 q = closest_on_segment(s.p, s.q, to, &f);
                    if (distance(q, to) < pr.best) {
                        pr.best = distance(q, to);
                        pr.q = q;
                        pr.q_tri = s.tri;
                    }
                    if (s.tri == tt && std::fabs(a_to - s.level) <= eps) {
                        pr.hit = true;
                        const double b_to = ix.interpolate(pair.b, tt, to) + (s.bq - ix.interpolate(pair.b, tt, s.q));
                        pr.delta_tau = b_to - b0;
                        pr.crossings = cr;
                        return false;
                    }
                    // a closed isoline is back where it started
                    return !(s.tri == tf && std::fabs(s.level - c) <= same && steps++ > 0);
                },
                &cr);
            if (pr.hit) return pr;
        }
        return pr;
    };

    ConnectivityResult out;
    Probe fwd = probe(x1, t1, x2, t2);
    if (!fwd.hit) {
        const Probe back = probe(x2, t2, x1, t1);
        if (back.hit) {
            fwd.hit = true;
            fwd.delta_tau = -back.delta_tau;
            fwd.crossings = back.crossings;
        }
    }
    if (fwd.hit) {
        out.connected = true;
        out.delta_tau = fwd.delta_tau;
        out.crossings = fwd.crossings;
        out.crossed_cut = !out.crossings.empty();
        return out;
    }
    if (fwd.q_tri >= 0) {
        // first-order: a varies linearly off the isoline in the nearest walked triangle
        const Vec2 g = w.gradient(fwd.q_tri);
        const double da = dot(g, x2 - fwd.q);
        out.side = da > 0.0 ? StreamSide::Left : StreamSide::Right;
        out.distance = norm(g) > 0.0 ? std::fabs(da) / norm(g) : fwd.best;
    }
    return out;
}

std::vector<Isoline> extract_isoline(const PairIndex& ix, double value, FieldSel sel) {
    const auto& pair = ix.pair();
    const auto& vals = sel == FieldSel::A ? pair.a : pair.b;
    const auto& m = pair.mesh();
    Walker w(ix, vals, nullptr);
    std::vector<char> seen(m.triangles.size(), 0);
    std::vector<Isoline> out;
    auto usable = [&](int t) {
        if (ix.excised(t)) return false;
        for (int v : m.triangles[static_cast<std::size_t>(t)])
            if (!std::isfinite(vals[static_cast<std::size_t>(v)])) return false;
        return true;
    };
    for (std::size_t t0 = 0; t0 < m.triangles.size(); ++t0) {
        const int t = static_cast<int>(t0);
        if (seen[t0] || !usable(t)) continue;
        std::vector<int> ks;
        for (int k = 0; k < 3; ++k)
            if (w.crosses(t, k, value)) ks.push_back(k);
        if (ks.size() != 2) continue;
        const Vec2 pa = w.edge_point(t, ks[0], w.param(t, ks[0], value));
        const Vec2 pb = w.edge_point(t, ks[1], w.param(t, ks[1], value));
        seen[t0] = 1;

        const double same = 1e-3 * w.variation(t);
        auto at_start_level = [&](const Segment& s) { return std::fabs(s.level - value) <= same; };
        Isoline line;
        bool closed = false;
        // forward: from pa out through ks[1]
        std::vector<Vec2> fwd{pa};
        w.walk(
            t, value, pa, 0.0, ks[1],
            [&](const Segment& s) {
                if (s.tri == t && at_start_level(s) && fwd.size() > 1) {
                    closed = true;
                    return false;
                }
                if (at_start_level(s)) seen[static_cast<std::size_t>(s.tri)] = 1;
                fwd.push_back(s.q);
                return true;
            },
            nullptr);
        if (closed) {
            line.points = std::move(fwd);
            line.points.push_back(line.points.front());
            line.closed = true;
            out.push_back(std::move(line));
            continue;
        }
        std::vector<Vec2> bwd;
        w.walk(
            t, value, pb, 0.0, ks[0],
            [&](const Segment& s) {
                if (at_start_level(s)) seen[static_cast<std::size_t>(s.tri)] = 1;
                bwd.push_back(s.q);
                return true;
            },
            nullptr);
        // bwd starts with pa (the seed segment walked backwards); skip it
        std::reverse(bwd.begin(), bwd.end());
        if (!bwd.empty()) bwd.pop_back();
        line.points = std::move(bwd);
        line.points.insert(line.points.end(), fwd.begin(), fwd.end());
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace isoflow
