#include "doctest.h"

#include "isoflow/error.hpp"
#include "isoflow/meshgen.hpp"
#include "isoflow/streamline.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace isoflow;

namespace {

StreamlineSamples samples_at(const VectorField& f, DomainPtr d, Vec2 x, int m = 8) {
    Tracer tr(f, d);
    auto hit = tr.trace_to_boundary(x);
    return streamline_samples(f, hit.backward, hit.forward, m);
}

AnalyticField spiral_sector() { return AnalyticField::linear({0.5, 1.0, -0.3, -0.2}, {1.0, 0.6}); }

}  // namespace

TEST_CASE("separating function of simple fields") {
    auto sq = make_domain(square_mesh({-1, -1}, {1, 1}, 8, 8));
    {
        auto p = separating_function(samples_at(AnalyticField::constant({0.3, 1}), sq, {0.1, 0.2}));
        for (double s : p.s_l) CHECK(s == 0.0);
    }
    {
        auto disk = make_domain(disk_mesh({0, 0}, 1.0, 64, 6));
        const auto rot = AnalyticField::linear(Mat2::rotation90());
        Tracer tr(rot, disk);
        auto r = tr.trace({0.5, 0.0}, 1, {{}, nullptr, true, 1.0});
        auto smp = streamline_samples(rot, Trace{}, r.trace, 4);
        auto p = separating_function(smp);
        for (double s : p.s_l) CHECK(std::fabs(s) < 1e-14);
    }
    {
        // radial field along the ray through (0.5, 0.25): integrand is 1
        auto d = make_domain(square_mesh({0.2, 0.1}, {1, 1}, 6, 6));
        auto smp = samples_at(AnalyticField::linear(Mat2::identity()), d, {0.5, 0.25});
        auto p = separating_function(smp);
        for (std::size_t i = 0; i < smp.size(); ++i)
            CHECK(p.s_l[i] == doctest::Approx(smp.tau[i] - smp.tau[0]).epsilon(1e-12));
    }
}

TEST_CASE("normalization offset closed form") {
    auto sq = make_domain(square_mesh({0, 0}, {1, 1}, 4, 4));
    {
        auto p = separating_function(samples_at(AnalyticField::constant({0, 1}), sq, {0.3, 0.4}));
        CHECK(normalization_offset(p) == doctest::Approx(0.0).epsilon(1e-14));
    }
    {
        auto p = separating_function(samples_at(AnalyticField::constant({0, 2}), sq, {0.3, 0.4}));
        CHECK(normalization_offset(p) == doctest::Approx(std::log(0.5)).epsilon(1e-13));
    }
}

TEST_CASE("normalization offset is the objective minimizer") {
    auto d = make_domain(square_mesh({-1, -1}, {1, 1}, 10, 10));
    const auto f = spiral_sector();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    for (int k = 0; k < 8; ++k) {
        auto p = separating_function(samples_at(f, d, {u(rng), u(rng)}));
        const double sm = normalization_offset(p);
        const double g = oracle::golden_min([&](double s) { return normalization_objective(p, s); }, sm - 5, sm + 5);
        CHECK(std::fabs(g - sm) < 1e-6);
        const double at = normalization_objective(p, sm);
        CHECK(normalization_objective(p, sm + 0.01) > at);
        CHECK(normalization_objective(p, sm - 0.01) > at);
    }
}

TEST_CASE("optimal r") {
    auto sq = make_domain(square_mesh({-1, -1}, {1, 1}, 6, 6));
    {
        auto smp = samples_at(AnalyticField::constant({1, 0.2}), sq, {0.0, 0.1});
        auto r = optimal_r(smp);
        CHECK(r.r0 == 0.0);
        for (std::size_t i = 0; i < smp.size(); ++i) {
            CHECK(r.phi[i] == 1.0);
            CHECK(r.rho[i] == 0.0);
        }
    }
    {
        auto shear = AnalyticField::linear({0, 1, 0, 0}, {2, 0});
        auto smp = samples_at(shear, sq, {-0.2, 0.3});
        auto r = optimal_r(smp);
        CHECK(std::fabs(oracle::brute_force_r0(smp, r) - r.r0) < 1e-4);
        const double at = r_objective(smp, r, r.r0);
        CHECK(r_objective(smp, r, r.r0 + 0.01) >= at);
        CHECK(r_objective(smp, r, r.r0 - 0.01) >= at);
    }
    {
        auto smp = samples_at(spiral_sector(), sq, {0.4, -0.5});
        auto r = optimal_r(smp);
        CHECK(std::fabs(oracle::brute_force_r0(smp, r) - r.r0) < 1e-4);
    }
}

TEST_CASE("gradients") {
    CHECK(norm(gradient_a({0, 1}, 0) - Vec2{-1, 0}) < 1e-15);
    CHECK(norm(gradient_a({1, 0}, 0) - Vec2{0, 1}) < 1e-15);
    CHECK(norm(gradient_b({0, 2}, 0) - Vec2{0, 0.5}) < 1e-15);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 50; ++k) {
        const Vec2 v{u(rng), u(rng)};
        const double s = u(rng), r = u(rng);
        CHECK(std::fabs(dot(v, gradient_a(v, s))) < 1e-12 * norm(v) * norm(gradient_a(v, s)));
        CHECK(dot(v, gradient_b(v, r)) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::fabs(dot(gradient_a(v, s), gradient_b(v, 0))) < 1e-12);
    }
    try {
        gradient_a({0, 0}, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVelocity);
    }
}

TEST_CASE("streamline gradients converge") {
    auto d = make_domain(square_mesh({-1, -1}, {1, 1}, 10, 10));
    const auto f = spiral_sector();
    Tracer tr(f, d);
    auto hit = tr.trace_to_boundary({0.2, 0.1});
    auto g = streamline_gradients(f, hit.backward, hit.forward);
    CHECK(g.m >= 4);
    const Vec2 v = f.value({0.2, 0.1});
    CHECK(std::fabs(dot(v, g.grad_a)) < 1e-12);
    CHECK(dot(v, g.grad_b) == doctest::Approx(1.0));
}
