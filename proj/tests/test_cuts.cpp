#include "doctest.h"

#include "isoflow/cuts.hpp"
#include "isoflow/error.hpp"
#include "isoflow/field.hpp"
#include "isoflow/meshgen.hpp"

#include <cmath>
#include <numbers>

using namespace isoflow;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Undefined;
}

CriticalPoint make_cp(int id, Vec2 x, Mat2 j) {
    CriticalPoint cp;
    cp.id = id;
    cp.position = x;
    cp.jacobian = j;
    cp.eigen = classify(j);
    return cp;
}

// Value at a final vertex, evaluated slightly towards its incident triangles so that copies
// on a cut pick their own side.
template <class F>
std::vector<double> sided_values(const CutMesh& cm, F&& f) {
    const auto& m = cm.mesh;
    std::vector<Vec2> pull(m.vertices.size());
    for (const auto& t : m.triangles) {
        const Vec2 c = (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0;
        for (int v : t) pull[v] += c - m.vertices[v];
    }
    std::vector<double> out(m.vertices.size());
    for (std::size_t v = 0; v < out.size(); ++v) {
        const Vec2 x = m.vertices[v];
        out[v] = f(x, x + 1e-9 * normalized(pull[v]));
    }
    return out;
}

double theta(Vec2 p) {
    const double t = std::atan2(p.y, p.x);
    return t < 0.0 ? t + 2.0 * std::numbers::pi : t;
}

}  // namespace

TEST_CASE("automatic cuts: empty, single saddle, four critical points") {
    auto disk = make_domain(disk_mesh({0, 0}, 1.0, 256, 24));
    CHECK(place_cuts_auto({}, *disk).empty());

    const auto one = place_cuts_auto({make_cp(0, {0, 0}, reference_saddle_matrix())}, *disk);
    REQUIRE(one.paths.size() == 1);
    const auto& p = one.paths[0];
    REQUIRE(p.points.size() == 2);
    CHECK(p.start.kind == CutAnchor::Kind::CriticalPoint);
    CHECK(p.end.is_boundary());
    // polygonal disk: the nearest boundary point sits on the first edge, next to (1,0)
    CHECK(distance(p.points[0], p.points[1]) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(distance(p.points[1], Vec2{1, 0}) < 0.02);
    validate_cut_set(one, *disk);

    auto sq = make_domain(square_mesh({-1, -1}, {1, 1}, 100, 100));
    const auto cps = find_critical_points(sample_field(three_sources_one_saddle(), sq));
    REQUIRE(cps.size() == 4);
    const auto cuts = place_cuts_auto(cps, *sq);
    CHECK(cuts.paths.size() == 4);
    int boundary = 0;
    for (const auto& c : cuts.paths) boundary += c.start.is_boundary() + c.end.is_boundary();
    CHECK(boundary == 1);
    CHECK(cuts.boundary_path() == 0);
    validate_cut_set(cuts, *sq);
}

TEST_CASE("automatic cuts bend around a re-entrant corner") {
    // L-shaped domain: the upper-right quadrant is removed, so the straight tree edge leaves it
    const TriMesh sq = square_mesh({-1, -1}, {1, 1}, 40, 40);
    std::vector<Triangle> keep;
    for (const auto& t : sq.triangles) {
        const Vec2 c = (sq.vertices[t[0]] + sq.vertices[t[1]] + sq.vertices[t[2]]) / 3.0;
        if (!(c.x > 0.0 && c.y > 0.0)) keep.push_back(t);
    }
    std::vector<int> used(sq.vertices.size(), -1);
    std::vector<Vec2> verts;
    for (auto& t : keep)
        for (int& v : t) {
            if (used[v] < 0) {
                used[v] = static_cast<int>(verts.size());
                verts.push_back(sq.vertices[v]);
            }
            v = used[v];
        }
    auto dom = make_domain(make_mesh(verts, keep));
    const Mat2 j = reference_node_matrix();
    std::vector<CriticalPoint> cps{make_cp(0, {0.5, -0.1}, j), make_cp(1, {-0.1, 0.5}, j)};
    const auto cuts = place_cuts_auto(cps, *dom);
    validate_cut_set(cuts, *dom);
    REQUIRE(cuts.paths.size() == 2);
    CHECK(cuts.paths[1].points.size() > 2);
    const auto cm = embed_cuts(dom->mesh(), cuts);
    CHECK(std::fabs(total_area(cm.mesh) - 3.0) < 1e-10);
}

TEST_CASE("manual cuts are validated") {
    auto sq = make_domain(square_mesh({-1, -1}, {1, 1}, 20, 20));
    const Mat2 j = reference_saddle_matrix();
    std::vector<CriticalPoint> cps{make_cp(0, {-0.5, 0.0}, j), make_cp(1, {0.5, 0.0}, j)};
    const double s_right = sq->boundary().project({1.0, 0.0}).s;

    CutPath a;
    a.points = {{-0.5, 0.0}, {0.5, 0.0}};
    a.start = CutAnchor::critical(0);
    a.end = CutAnchor::critical(1);
    CutPath b;
    b.points = {{0.5, 0.0}, {1.0, 0.0}};
    b.start = CutAnchor::critical(1);
    b.end = CutAnchor::boundary(s_right);

    const auto ok = place_cuts_manual({a, b}, cps, *sq);
    CHECK(ok.paths.size() == 2);
    CHECK(ok.paths[0].id == 0);

    CHECK(code_of([&] { place_cuts_manual({b}, cps, *sq); }) == ErrorCode::UncoveredCriticalPoint);

    // second tree edge bent so it crosses the first one
    CutPath c;
    c.points = {{-0.5, 0.0}, {0.0, 0.3}, {0.0, -0.3}, {0.5, 0.0}};
    c.start = CutAnchor::critical(0);
    c.end = CutAnchor::critical(1);
    CutPath d = b;
    std::vector<CriticalPoint> three = cps;
    three.push_back(make_cp(2, {0.0, 0.6}, j));
    CutPath e;
    e.points = {{0.0, 0.6}, {0.0, -0.6}, {-0.5, 0.0}};
    e.start = CutAnchor::critical(2);
    e.end = CutAnchor::critical(0);
    CHECK(code_of([&] { place_cuts_manual({a, d, e}, three, *sq); }) == ErrorCode::SelfIntersection);

    CHECK(code_of([&] { place_cuts_manual({a, b, c}, cps, *sq); }) == ErrorCode::CyclicCuts);
}

TEST_CASE("embedding: empty set, cut along mesh edges, cut through triangles") {
    const TriMesh m = square_mesh({-1, -1}, {1, 1}, 8, 8);
    auto dom = make_domain(m);

    CutSet none;
    const auto cm0 = embed_cuts(m, none);
    CHECK(cm0.duplicated_count() == 0);
    CHECK(cm0.mesh.vertices == m.vertices);
    CHECK(cm0.mesh.triangles == m.triangles);

    // from the vertex at the origin along y = 0 to the boundary: the chain visits the tip,
    // 3 interior vertices and a boundary vertex. The tip stays single, the other 4 split.
    CutSet s;
    s.cps = {make_cp(0, {0, 0}, reference_node_matrix())};
    CutPath p;
    p.points = {{0, 0}, {1, 0}};
    p.start = CutAnchor::critical(0);
    p.end = CutAnchor::boundary(dom->boundary().project({1, 0}).s);
    s.paths = {p};
    const auto cm = embed_cuts(m, s);
    CHECK(cm.refined_count == static_cast<int>(m.vertices.size()));
    CHECK(cm.duplicated_count() == 4);
    CHECK(cm.chains[0].size() == 5);
    CHECK(cm.edges.size() == 4);
    CHECK(total_area(cm.mesh) == doctest::Approx(total_area(m)).epsilon(1e-12));
    for (const auto& e : cm.edges) {
        CHECK(e.left_w != e.right_w);
        CHECK(cm.mesh.vertices[e.left_w] == cm.mesh.vertices[e.right_w]);
    }

    // oblique polyline through triangle interiors
    CutSet o;
    o.cps = {make_cp(0, {0.11, 0.13}, reference_node_matrix())};
    CutPath q;
    q.points = {{0.11, 0.13}, {0.4, 0.52}, {0.2, 1.0}};
    q.start = CutAnchor::critical(0);
    q.end = CutAnchor::boundary(dom->boundary().project({0.2, 1.0}).s);
    o.paths = {q};
    const auto cmo = embed_cuts(m, o);
    CHECK(cmo.refined_count > static_cast<int>(m.vertices.size()));
    CHECK(cmo.duplicated_count() == static_cast<int>(cmo.chains[0].size()) - 1);
    CHECK(std::fabs(total_area(cmo.mesh) - total_area(m)) <= 1e-10 * total_area(m));
    CHECK(cmo.mesh.boundary_loop.size() == m.boundary_loop.size() + 1 + 2 * (cmo.chains[0].size() - 1));
}

TEST_CASE("gradient-preserving check") {
    const TriMesh m = square_mesh({-1, -1}, {1, 1}, 40, 40);
    auto dom = make_domain(m);
    CutSet s;
    s.cps = {make_cp(0, {0, 0}, reference_node_matrix())};
    CutPath p;
    p.points = {{1, 0}, {0, 0}};
    p.start = CutAnchor::boundary(dom->boundary().project({1, 0}).s);
    p.end = CutAnchor::critical(0);
    s.paths = {p};
    const auto cm = embed_cuts(m, s);

    // polar angle; the neighbourhood of the singular point is left out like an excised disk
    const auto th = sided_values(cm, [](Vec2 x, Vec2 toward) { return norm(x) < 0.3 ? NAN : theta(toward); });
    const double two_pi = 2.0 * std::numbers::pi;
    auto r = check_gradient_preserving(cm, th, {two_pi}, 1e-6, 0.2);
    REQUIRE(r.size() == 1);
    CHECK(r[0].samples > 10);
    CHECK(r[0].max_jump_error < 1e-6);
    CHECK(r[0].max_gradient_mismatch < 0.2);
    CHECK(r[0].pass);

    // x times the left-side indicator: the jump grows along the cut
    const Vec2 dir{-1, 0};
    const auto bad = sided_values(cm, [&](Vec2 x, Vec2 toward) { return cross(dir, toward - x) > 0.0 ? x.x : 0.0; });
    r = check_gradient_preserving(cm, bad, {0.5}, 1e-3, 0.2);
    CHECK_FALSE(r[0].pass);
    CHECK(r[0].max_jump_error > 0.3);

    // continuous field, zero jump declared
    std::vector<double> smooth(cm.mesh.vertices.size());
    for (std::size_t v = 0; v < smooth.size(); ++v) smooth[v] = cm.mesh.vertices[v].y;
    r = check_gradient_preserving(cm, smooth, {0.0}, 1e-9, 0.2);
    CHECK(r[0].zero_jump);
    CHECK(r[0].max_jump_error < 1e-12);
    CHECK_FALSE(r[0].pass);
}
