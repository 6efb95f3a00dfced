#include "isoflow/streamline.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>

namespace isoflow {

TraceNodes StreamlineSamples::as_nodes() const {
    TraceNodes n;
    n.tau = tau;
    n.x = x;
    n.m = m;
    return n;
}

StreamlineSamples streamline_samples(const VectorField& field, const Trace& backward, const Trace& forward, int m) {
    StreamlineSamples out;
    out.m = m;
    const TraceNodes b = trace_nodes(backward, m);
    const TraceNodes f = trace_nodes(forward, m);
    // backward nodes run from 0 down to tau0
    for (std::size_t i = b.tau.size(); i-- > 1;) {
        out.tau.push_back(b.tau[i]);
        out.x.push_back(b.x[i]);
    }
    out.origin = out.tau.size();
    for (std::size_t i = 0; i < f.tau.size(); ++i) {
        out.tau.push_back(f.tau[i]);
        out.x.push_back(f.x[i]);
    }
    out.v.resize(out.x.size());
    out.j.resize(out.x.size());
    int hint = -1;
    for (std::size_t i = 0; i < out.x.size(); ++i) {
        out.v[i] = field.value_extended(out.x[i], hint);
        out.j[i] = field.jacobian_extended(out.x[i], hint);
    }
    return out;
}

SeparationProfile separating_function(const StreamlineSamples& samples) {
    SeparationProfile p;
    p.samples = samples;
    std::vector<double> g(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double sp = norm(samples.v[i]);
        if (!(sp > 0.0)) throw Error(ErrorCode::ZeroVelocity, "streamline passes a zero of the field");
        const Vec2 w = rotate90(samples.v[i] / sp);
        g[i] = quad(w, samples.j[i], w);
    }
    p.s_l = cumulative_integral(samples.as_nodes(), g);
    for (double s : p.s_l)
        if (!std::isfinite(s)) throw Error(ErrorCode::QuadratureFailure, "separating function is not finite");
    return p;
}

double normalization_offset(const SeparationProfile& profile) {
    const auto& smp = profile.samples;
    const auto nodes = smp.as_nodes();
    if (smp.size() < 3) {
        // zero-length streamline: the ratio tends to 1/|v|
        const double sp = norm(smp.v[smp.origin]);
        if (!(sp > 0.0)) throw Error(ErrorCode::DegenerateNormalization, "zero speed on a point streamline");
        return -std::log(sp);
    }
    // shift by min s_l so the exponentials stay in range
    const double lo = *std::min_element(profile.s_l.begin(), profile.s_l.end());
    std::vector<double> num(smp.size()), den(smp.size());
    for (std::size_t i = 0; i < smp.size(); ++i) {
        const double e = std::exp(-(profile.s_l[i] - lo));
        num[i] = e * e;
        den[i] = norm(smp.v[i]) * e;
    }
    const double n = simpson(nodes, num);
    const double d = simpson(nodes, den);
    if (!(d > 0.0) || !(n > 0.0) || !std::isfinite(n) || !std::isfinite(d))
        throw Error(ErrorCode::DegenerateNormalization, "normalization integrals degenerate");
    return std::log(n / d) - lo;
}

double normalization_objective(const SeparationProfile& profile, double s_m) {
    const auto& smp = profile.samples;
    std::vector<double> f(smp.size());
    for (std::size_t i = 0; i < smp.size(); ++i) {
        const double d = std::exp(-profile.s_l[i] - s_m) - norm(smp.v[i]);
        f[i] = d * d;
    }
    return simpson(smp.as_nodes(), f);
}

double CoGradientRatio::alpha_angle() const { return std::atan(r_origin); }

CoGradientRatio optimal_r(const StreamlineSamples& samples) {
    CoGradientRatio r;
    const std::size_t n = samples.size();
    r.c1.resize(n);
    r.c2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sp = norm(samples.v[i]);
        if (!(sp > 0.0)) throw Error(ErrorCode::ZeroVelocity, "streamline passes a zero of the field");
        const Vec2 vb = samples.v[i] / sp;
        const Vec2 wb = rotate90(vb);
        const Mat2& j = samples.j[i];
        r.c1[i] = quad(vb, j, vb) - quad(wb, j, wb);
        r.c2[i] = quad(vb, j, wb) + quad(wb, j, vb);
    }
    const auto nodes = samples.as_nodes();
    const auto c1_int = cumulative_integral(nodes, r.c1);
    r.phi.resize(n);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.phi[i] = std::exp(c1_int[i]);
        g[i] = r.c2[i] * std::exp(-c1_int[i]);
    }
    const auto g_int = cumulative_integral(nodes, g);
    r.rho.resize(n);
    std::vector<double> pp(n), pr(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.rho[i] = r.phi[i] * g_int[i];
        pp[i] = r.phi[i] * r.phi[i];
        pr[i] = r.phi[i] * r.rho[i];
    }
    if (n < 3) {
        r.r0 = 0.0;
    } else {
        const double a = simpson(nodes, pp);
        const double b = simpson(nodes, pr);
        if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0))
            throw Error(ErrorCode::QuadratureFailure, "co-gradient ratio integrals are not finite");
        r.r0 = -b / a;
    }
    r.r_origin = r.phi[samples.origin] * r.r0 + r.rho[samples.origin];
    if (!std::isfinite(r.r_origin)) throw Error(ErrorCode::QuadratureFailure, "co-gradient ratio is not finite");
    return r;
}

double r_objective(const StreamlineSamples& samples, const CoGradientRatio& ratio, double r0) {
    std::vector<double> f(samples.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = ratio.phi[i] * r0 + ratio.rho[i];
        f[i] = r * r;
    }
    return simpson(samples.as_nodes(), f);
}

Vec2 gradient_a(Vec2 v, double s) {
    const Frame f = frame_of(v);
    return std::exp(-s) * f.w_bar;
}

Vec2 gradient_b(Vec2 v, double r) {
    const Frame f = frame_of(v);
    return (f.v_bar - r * f.w_bar) / f.speed;
}

StreamlineGradients streamline_gradients(const VectorField& field, const Trace& backward, const Trace& forward) {
    StreamlineGradients out;
    double prev_s = 0.0, prev_r = 0.0;
    for (int m = 2; m <= 16; m *= 2) {
        const auto smp = streamline_samples(field, backward, forward, m);
        const auto prof = separating_function(smp);
        SeparationProfile p = prof;
        p.s_m = normalization_offset(prof);
        const auto ratio = optimal_r(smp);
        const double s = p.s();
        const double r = ratio.r_origin;
        out.s = s;
        out.r = r;
        out.m = m;
        if (smp.size() < 3) break;
        if (m > 2 && std::fabs(s - prev_s) <= 1e-8 * std::max(1.0, std::fabs(s)) &&
            std::fabs(r - prev_r) <= 1e-8 * std::max(1.0, std::fabs(r)))
            break;
        prev_s = s;
        prev_r = r;
    }
    const Vec2 v0 = backward.samples.empty() ? forward.samples.front().x : backward.samples.front().x;
    int hint = -1;
    const Vec2 v = field.value_extended(v0, hint);
    out.grad_a = gradient_a(v, out.s);
    out.grad_b = gradient_b(v, out.r);
    return out;
}

}  // namespace isoflow
