#include "isoflow/cuts.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isoflow {

std::string CutAnchor::str() const {
    std::ostringstream os;
    os.precision(17);
    if (is_boundary())
        os << "boundary:" << s;
    else
        os << "cp:" << cp;
    return os.str();
}

int CutSet::boundary_path() const {
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (paths[i].start.is_boundary() || paths[i].end.is_boundary()) return static_cast<int>(i);
    return -1;
}

namespace {

Vec2 anchor_point(const CutAnchor& a, const std::vector<CriticalPoint>& cps, const Domain& domain) {
    if (a.is_boundary()) return domain.boundary().point(a.s);
    return cps.at(static_cast<std::size_t>(a.cp)).position;
}

// Segments (p1,p2) and (q1,q2) meet somewhere other than a shared endpoint.
bool segments_conflict(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double tol) {
    double s = 0, t = 0;
    if (!segment_intersection(p1, p2, q1, q2, &s, &t)) return false;
    const Vec2 x = p1 + s * (p2 - p1);
    const bool shared = (distance(p1, q1) <= tol || distance(p1, q2) <= tol || distance(p2, q1) <= tol ||
                         distance(p2, q2) <= tol);
    if (!shared) return true;
    // touching only at the shared endpoint is fine; collinear overlap is not
    for (Vec2 e : {p1, p2})
        for (Vec2 f : {q1, q2})
            if (distance(e, f) <= tol && distance(x, e) <= tol) {
                const Vec2 dp = (e == p1 ? p2 - p1 : p1 - p2);
                const Vec2 dq = (f == q1 ? q2 - q1 : q1 - q2);
                const double c = cross(dp, dq);
                if (std::fabs(c) > 1e-12 * norm(dp) * norm(dq)) return false;
                return dot(dp, dq) > 0.0;
            }
    return true;
}

// Whole segment within the domain, sampled at a spacing of half a median edge.
bool segment_inside(Vec2 p, Vec2 q, const Domain& domain, bool p_on_boundary, bool q_on_boundary) {
    const double len = distance(p, q);
    const int n = std::max(2, static_cast<int>(std::ceil(2.0 * len / domain.median_edge())));
    const int lo = p_on_boundary ? 1 : 0;
    const int hi = q_on_boundary ? n - 1 : n;
    for (int i = lo; i <= hi; ++i) {
        const Vec2 x = p + (static_cast<double>(i) / n) * (q - p);
        if (!domain.contains(x)) return false;
    }
    // the open part must not touch the boundary polyline
    const auto& bp = domain.boundary();
    const double tol = 1e-9 * domain.bbox().diagonal();
    for (std::size_t k = 0; k < bp.segment_count(); ++k) {
        double s = 0, t = 0;
        if (!segment_intersection(p, q, bp.segment_start(k), bp.segment_end(k), &s, &t)) continue;
        const double at = s * len;
        if ((p_on_boundary && at <= tol) || (q_on_boundary && at >= len - tol)) continue;
        return false;
    }
    return true;
}

struct Seg {
    int path;
    Vec2 a, b;
};

std::vector<Seg> all_segments(const std::vector<CutPath>& paths) {
    std::vector<Seg> out;
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (std::size_t i = 0; i + 1 < paths[p].points.size(); ++i)
            out.push_back({static_cast<int>(p), paths[p].points[i], paths[p].points[i + 1]});
    return out;
}

// First pair of conflicting segments, or {-1,-1}.
std::pair<int, int> find_conflict(const std::vector<Seg>& segs, double tol) {
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j)
            if (segments_conflict(segs[i].a, segs[i].b, segs[j].a, segs[j].b, tol))
                return {static_cast<int>(i), static_cast<int>(j)};
    return {-1, -1};
}

bool path_inside(const CutPath& p, const Domain& domain) {
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
        const bool pb = i == 0 && p.start.is_boundary();
        const bool qb = i + 2 == p.points.size() && p.end.is_boundary();
        if (!segment_inside(p.points[i], p.points[i + 1], domain, pb, qb)) return false;
    }
    return true;
}

bool paths_clean(const std::vector<CutPath>& paths, const Domain& domain, double tol) {
    for (const auto& p : paths)
        if (!path_inside(p, domain)) return false;
    return find_conflict(all_segments(paths), tol).first < 0;
}

}  // namespace

CutSet place_cuts_auto(const std::vector<CriticalPoint>& cps, const Domain& domain) {
    CutSet out;
    out.cps = cps;
    const std::size_t n = cps.size();
    if (n == 0) return out;

    // Prim's algorithm, ties broken by index
    std::vector<int> parent(n, -1);
    std::vector<double> best(n, 1e300);
    std::vector<char> in(n, 0);
    std::vector<std::pair<int, int>> edges;
    best[0] = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
        int u = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (!in[i] && (u < 0 || best[i] < best[static_cast<std::size_t>(u)])) u = static_cast<int>(i);
        in[static_cast<std::size_t>(u)] = 1;
        if (parent[static_cast<std::size_t>(u)] >= 0) edges.emplace_back(u, parent[static_cast<std::size_t>(u)]);
        for (std::size_t i = 0; i < n; ++i) {
            if (in[i]) continue;
            const double d = distance(cps[i].position, cps[static_cast<std::size_t>(u)].position);
            if (d < best[i]) {
                best[i] = d;
                parent[i] = u;
            }
        }
    }

    // root: node nearest the boundary
    const auto& bp = domain.boundary();
    int root = 0;
    BoundaryParam::Projection root_proj = bp.project(cps[0].position);
    for (std::size_t i = 1; i < n; ++i) {
        const auto pr = bp.project(cps[i].position);
        if (pr.distance < root_proj.distance) {
            root = static_cast<int>(i);
            root_proj = pr;
        }
    }

    // orient every tree edge towards the root, so all paths lead to the boundary
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<int> up(n, -1), order{root};
    std::vector<char> seen(n, 0);
    seen[static_cast<std::size_t>(root)] = 1;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto nb = adj[static_cast<std::size_t>(order[k])];
        std::sort(nb.begin(), nb.end());
        for (int w : nb)
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                up[static_cast<std::size_t>(w)] = order[k];
                order.push_back(w);
            }
    }

    std::vector<CutPath> paths;
    {
        CutPath p;
        p.points = {cps[static_cast<std::size_t>(root)].position, root_proj.point};
        p.start = CutAnchor::critical(root);
        p.end = CutAnchor::boundary(root_proj.s);
        paths.push_back(p);
    }
    for (std::size_t k = 1; k < order.size(); ++k) {
        const int c = order[k];
        CutPath p;
        p.points = {cps[static_cast<std::size_t>(c)].position, cps[static_cast<std::size_t>(up[static_cast<std::size_t>(c)])].position};
        p.start = CutAnchor::critical(c);
        p.end = CutAnchor::critical(up[static_cast<std::size_t>(c)]);
        paths.push_back(p);
    }

    // reroute: bend an offending segment at its midpoint, trying growing sideways offsets
    const double tol = 1e-9 * domain.bbox().diagonal();
    const double unit = 2.0 * domain.median_edge();
    const double diag = domain.bbox().diagonal();
    for (int attempt = 0; attempt < 20 && !paths_clean(paths, domain, tol); ++attempt) {
        int victim = -1, seg = -1;
        for (std::size_t p = 0; p < paths.size() && victim < 0; ++p)
            for (std::size_t i = 0; i + 1 < paths[p].points.size(); ++i) {
                const bool pb = i == 0 && paths[p].start.is_boundary();
                const bool qb = i + 2 == paths[p].points.size() && paths[p].end.is_boundary();
                if (!segment_inside(paths[p].points[i], paths[p].points[i + 1], domain, pb, qb)) {
                    victim = static_cast<int>(p);
                    seg = static_cast<int>(i);
                    break;
                }
            }
        if (victim < 0) {
            // bend the later segment; the boundary path comes first
            const auto segs = all_segments(paths);
            const Seg& s = segs[static_cast<std::size_t>(find_conflict(segs, tol).second)];
            victim = s.path;
            const auto& pts = paths[static_cast<std::size_t>(victim)].points;
            for (std::size_t k = 0; k + 1 < pts.size(); ++k)
                if (pts[k] == s.a && pts[k + 1] == s.b) seg = static_cast<int>(k);
        }
        auto& path = paths[static_cast<std::size_t>(victim)];
        const Vec2 a = path.points[static_cast<std::size_t>(seg)];
        const Vec2 b = path.points[static_cast<std::size_t>(seg) + 1];
        const Vec2 n = rotate90(normalized(b - a));
        const Vec2 m = 0.5 * (a + b);
        Vec2 pick = m;
        bool found = false;
        for (double mag = unit; mag < diag && !found; mag *= 1.5)
            for (double sgn : {1.0, -1.0}) {
                const Vec2 c = m + sgn * mag * n;
                if (!domain.contains(c)) continue;
                auto trial = paths;
                auto& tp = trial[static_cast<std::size_t>(victim)].points;
                tp.insert(tp.begin() + seg + 1, c);
                const bool pb = seg == 0 && path.start.is_boundary();
                const bool qb = static_cast<std::size_t>(seg) + 2 == path.points.size() && path.end.is_boundary();
                if (!segment_inside(a, c, domain, pb, false) || !segment_inside(c, b, domain, false, qb)) continue;
                if (find_conflict(all_segments(trial), tol).first >= 0) continue;
                pick = c;
                found = true;
                break;
            }
        if (!found) pick = domain.contains(m + unit * n) ? m + unit * n : m - unit * n;
        path.points.insert(path.points.begin() + seg + 1, pick);
    }
    if (!paths_clean(paths, domain, tol))
        throw Error(ErrorCode::GeometryFailure, "automatic cut placement failed after 20 reroutes; set cuts manually");

    for (std::size_t i = 0; i < paths.size(); ++i) paths[i].id = static_cast<int>(i);
    out.paths = std::move(paths);
    return out;
}

void validate_cut_set(const CutSet& cuts, const Domain& domain) {
    const std::size_t n = cuts.cps.size();
    const double tol = 1e-9 * domain.bbox().diagonal();
    if (n == 0 && cuts.paths.empty()) return;

    // graph over cps plus node n for the boundary
    int boundary_anchors = 0;
    std::vector<int> comp(n + 1);
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int x) {
        while (comp[static_cast<std::size_t>(x)] != x) x = comp[static_cast<std::size_t>(x)] = comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(x)])];
        return x;
    };
    std::vector<char> covered(n, 0);
    for (const auto& p : cuts.paths) {
        if (p.points.size() < 2) throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " has fewer than two points");
        for (std::size_t i = 0; i + 1 < p.points.size(); ++i)
            if (distance(p.points[i], p.points[i + 1]) <= tol)
                throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " has a zero-length segment");
        int ends[2];
        int k = 0;
        for (const CutAnchor* a : {&p.start, &p.end}) {
            if (a->is_boundary()) {
                ++boundary_anchors;
                ends[k++] = static_cast<int>(n);
            } else {
                if (a->cp < 0 || static_cast<std::size_t>(a->cp) >= n)
                    throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " anchors unknown critical point " + std::to_string(a->cp));
                covered[static_cast<std::size_t>(a->cp)] = 1;
                ends[k++] = a->cp;
            }
        }
        if (ends[0] == ends[1]) throw Error(ErrorCode::CyclicCuts, "cut " + std::to_string(p.id) + " starts and ends at the same anchor");
        const int ra = find(ends[0]), rb = find(ends[1]);
        if (ra == rb) throw Error(ErrorCode::CyclicCuts, "cut " + std::to_string(p.id) + " closes a cycle");
        comp[static_cast<std::size_t>(ra)] = rb;
    }
    std::string missing;
    for (std::size_t i = 0; i < n; ++i)
        if (!covered[i]) missing += (missing.empty() ? "" : ",") + std::to_string(i);
    if (!missing.empty()) throw Error(ErrorCode::UncoveredCriticalPoint, "critical points not on any cut: " + missing);
    if (boundary_anchors != 1)
        throw Error(ErrorCode::ValidationError, "cut set needs exactly one boundary anchor, found " + std::to_string(boundary_anchors));
    for (std::size_t i = 0; i < n; ++i)
        if (find(static_cast<int>(i)) != find(static_cast<int>(n)))
            throw Error(ErrorCode::UncoveredCriticalPoint, "critical point " + std::to_string(i) + " is not connected to the boundary");

    const auto conflict = find_conflict(all_segments(cuts.paths), tol);
    if (conflict.first >= 0) throw Error(ErrorCode::SelfIntersection, "cut segments intersect");
    for (const auto& p : cuts.paths)
        if (!path_inside(p, domain)) throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " leaves the domain");
}

CutSet place_cuts_manual(std::vector<CutPath> paths, const std::vector<CriticalPoint>& cps, const Domain& domain) {
    const double snap = 0.5 * domain.median_edge();
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto& p = paths[i];
        if (p.id < 0) p.id = static_cast<int>(i);
        if (p.points.empty()) throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " is empty");
        for (auto* pr : {&p.start, &p.end}) {
            if (!pr->is_boundary() && (pr->cp < 0 || static_cast<std::size_t>(pr->cp) >= cps.size()))
                throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " anchors unknown critical point " + std::to_string(pr->cp));
            if (pr->is_boundary()) pr->s = domain.boundary().wrap(pr->s);
        }
        // snap end points onto their anchors
        const Vec2 s0 = anchor_point(p.start, cps, domain);
        const Vec2 s1 = anchor_point(p.end, cps, domain);
        if (distance(p.points.front(), s0) > snap || distance(p.points.back(), s1) > snap)
            throw Error(ErrorCode::ValidationError, "cut " + std::to_string(p.id) + " does not end at its anchors");
        p.points.front() = s0;
        p.points.back() = s1;
    }
    CutSet out;
    out.cps = cps;
    out.paths = std::move(paths);
    validate_cut_set(out, domain);
    return out;
}

}  // namespace isoflow
