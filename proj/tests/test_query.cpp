#include "doctest.h"

#include "isoflow/critical.hpp"
#include "isoflow/cuts.hpp"
#include "isoflow/error.hpp"
#include "isoflow/field.hpp"
#include "isoflow/integrate.hpp"
#include "isoflow/meshgen.hpp"
#include "isoflow/query.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace isoflow;

namespace {

struct Fixture {
    DomainPtr dom;
    ScalarPair pair;
};

Fixture uniform_up(int n) {
    Fixture f;
    f.dom = make_domain(square_mesh({0, 0}, {1, 1}, n, n));
    f.pair = compute_scalar_pair(sample_field(AnalyticField::constant({0, 1}), f.dom), f.dom, CutSet{});
    return f;
}

Fixture rotation() {
    Fixture f;
    f.dom = make_domain(disk_mesh({0, 0}, 1.0, 96, 24));
    const auto field = sample_field(AnalyticField::linear(Mat2::rotation90()), f.dom);
    ScalarizeOptions opt;
    opt.periodic = true;
    f.pair = compute_scalar_pair(field, f.dom, place_cuts_auto(find_critical_points(field), *f.dom), opt);
    return f;
}

}  // namespace

TEST_CASE("advect lookup on the uniform field") {
    const auto f = uniform_up(10);
    const PairIndex ix(f.pair);
    auto r = advect_lookup(ix, {0.3, 0.2}, 0.5);
    CHECK_FALSE(r.out_of_domain);
    CHECK(distance(r.endpoint, Vec2{0.3, 0.7}) < 1e-6);
    r = advect_lookup(ix, {0.3, 0.7}, -0.5);
    CHECK(distance(r.endpoint, Vec2{0.3, 0.2}) < 1e-6);
    r = advect_lookup(ix, {0.3, 0.8}, 0.5);
    CHECK(r.out_of_domain);
    CHECK(r.tau_exit == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(r.endpoint.y == doctest::Approx(1.0));
    CHECK(distance(advect_lookup(ix, {0.3, 0.2}, 0.0).endpoint, Vec2{0.3, 0.2}) == 0.0);
}

TEST_CASE("advect lookup around a rotation crosses the cut") {
    const auto f = rotation();
    const PairIndex ix(f.pair);
    const double le = ix.median_edge();
    // starts just below the cut so the quarter turn has to cross it
    const Vec2 x{0.5 * std::cos(-0.2), 0.5 * std::sin(-0.2)};
    const auto r = advect_lookup(ix, x, std::numbers::pi / 2);
    CHECK_FALSE(r.out_of_domain);
    const Vec2 expect{0.5 * std::cos(std::numbers::pi / 2 - 0.2), 0.5 * std::sin(std::numbers::pi / 2 - 0.2)};
    CHECK(distance(r.endpoint, expect) < 2.0 * le);
    const auto m = r.multiplicities(f.pair.paths.size());
    CHECK(std::abs(m[0]) == 1);

    // reversibility
    const auto back = advect_lookup(ix, r.endpoint, -std::numbers::pi / 2);
    CHECK(distance(back.endpoint, x) < 2.0 * le);

    // a full turn and a bit
    const auto turn = advect_lookup(ix, {0.0, 0.6}, 2.0 * std::numbers::pi + 0.5);
    CHECK(distance(turn.endpoint, Vec2{-0.6 * std::sin(0.5), 0.6 * std::cos(0.5)}) < 2.0 * le);

    bool excised = false;
    try {
        advect_lookup(ix, {0.0, 0.0}, 1.0);
    } catch (const Error& e) {
        excised = e.code() == ErrorCode::EntersExcisedRegion;
    }
    CHECK(excised);
}

TEST_CASE("lookup matches integration on a shear field") {
    auto dom = make_domain(square_mesh({-1, -1}, {1, 1}, 50, 50));
    const auto an = AnalyticField::linear({0, 0, 1, 0}, {1, 0.2});
    const auto field = sample_field(an, dom);
    const auto pair = compute_scalar_pair(field, dom, CutSet{});
    const PairIndex ix(pair);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.9, 0.9), tt(0.05, 0.6);
    int tested = 0;
    double worst = 0.0;
    for (int i = 0; i < 60; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const double tau = tt(rng);
        Vec2 ref;
        try {
            ref = flow_map(field, dom, x, tau);
        } catch (const Error&) {
            continue;
        }
        const auto r = advect_lookup(ix, x, tau);
        if (r.out_of_domain) continue;
        worst = std::max(worst, distance(r.endpoint, ref));
        ++tested;
    }
    CHECK(tested > 20);
    CHECK(worst < 2.0 * ix.median_edge());
}

TEST_CASE("connectivity") {
    const auto f = uniform_up(20);
    const PairIndex ix(f.pair);
    auto c = connectivity(ix, {0.3, 0.2}, {0.3, 0.9});
    CHECK(c.connected);
    CHECK(c.delta_tau == doctest::Approx(0.7).epsilon(1e-6));
    c = connectivity(ix, {0.3, 0.9}, {0.3, 0.2});
    CHECK(c.connected);
    CHECK(c.delta_tau == doctest::Approx(-0.7).epsilon(1e-6));

    c = connectivity(ix, {0.3, 0.2}, {0.4, 0.9});
    CHECK_FALSE(c.connected);
    CHECK(c.distance == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(c.side == StreamSide::Right);
    const auto back = connectivity(ix, {0.4, 0.9}, {0.3, 0.2});
    CHECK_FALSE(back.connected);
    CHECK(back.side == StreamSide::Left);

    const auto r = rotation();
    const PairIndex rx(r.pair);
    const Vec2 p{0.6 * std::cos(-0.15), 0.6 * std::sin(-0.15)}, q{0.6 * std::cos(0.15), 0.6 * std::sin(0.15)};
    c = connectivity(rx, p, q);
    CHECK(c.connected);
    CHECK(c.crossed_cut);
    CHECK(c.delta_tau == doctest::Approx(0.3).epsilon(0.05));
    CHECK(connectivity(rx, q, p).connected);
}

TEST_CASE("isolines") {
    const TriMesh m = square_mesh({0, 0}, {1, 1}, 7, 7);
    std::vector<double> a, b;
    for (const Vec2& x : m.vertices) {
        a.push_back(x.y);
        b.push_back(x.x);
    }
    const auto pair = scalar_pair_from_values(m, a, b);
    const PairIndex ix(pair);
    auto lines = extract_isoline(ix, 0.5);
    REQUIRE(lines.size() == 1);
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < lines[0].points.size(); ++i) len += distance(lines[0].points[i], lines[0].points[i + 1]);
    CHECK(len == doctest::Approx(1.0).epsilon(1e-9));
    for (const Vec2& p : lines[0].points) CHECK(p.y == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(extract_isoline(ix, 2.0).empty());

    // closed isolines of a around the rotation, continuous across the cut
    const auto r = rotation();
    const PairIndex rx(r.pair);
    const double level = -0.5 * 0.6 * 0.6;
    lines = extract_isoline(rx, level);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].closed);
    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < lines[0].points.size(); ++i)
        gap = std::max(gap, distance(lines[0].points[i], lines[0].points[i + 1]));
    CHECK(gap < 2.0 * rx.median_edge());
    for (const Vec2& p : lines[0].points) CHECK(std::fabs(norm(p) - 0.6) < 0.01);
}
