#pragma once

#include "isoflow/field.hpp"
#include "isoflow/integrate.hpp"

#include <vector>

namespace isoflow {

/// Field samples along one whole streamline, tau ascending from tau0 to tau1. Nodes come in
/// Simpson panels (every step of both half-traces split into m pieces).
struct StreamlineSamples {
    std::vector<double> tau;
    std::vector<Vec2> x;
    std::vector<Vec2> v;
    std::vector<Mat2> j;
    std::size_t origin = 0;  // node with tau = 0
    int m = 2;

    std::size_t size() const { return tau.size(); }
    TraceNodes as_nodes() const;
};

StreamlineSamples streamline_samples(const VectorField& field, const Trace& backward, const Trace& forward, int m);

/// s_l(tau) accumulated from tau0, and the offset s_m.
struct SeparationProfile {
    StreamlineSamples samples;
    std::vector<double> s_l;
    double s_m = 0.0;
    /// s = s_l(0) + s_m
    double s() const { return s_l[samples.origin] + s_m; }
};

/// Cumulative integral of w^T J w along the streamline.
SeparationProfile separating_function(const StreamlineSamples& samples);

/// Closed-form minimizer of normalization_objective(). Throws DegenerateNormalization.
double normalization_offset(const SeparationProfile& profile);

/// Integral of (exp(-s_l - s_m) - |v|)^2 over the streamline.
double normalization_objective(const SeparationProfile& profile, double s_m);

/// r(tau) = Phi(tau) r0 + rho(tau) solving dr/dtau = c1 r + c2 with the optimal r0.
struct CoGradientRatio {
    std::vector<double> phi;
    std::vector<double> rho;
    std::vector<double> c1;
    std::vector<double> c2;
    double r0 = 0.0;
    double r_origin = 0.0;
    /// angle with tan(alpha) = r at tau = 0
    double alpha_angle() const;
};

/// Throws QuadratureFailure on non-finite intermediate values.
CoGradientRatio optimal_r(const StreamlineSamples& samples);

/// Integral of r(tau)^2 for a given initial value.
double r_objective(const StreamlineSamples& samples, const CoGradientRatio& ratio, double r0);

/// grad a = exp(-s) w_bar. Throws ZeroVelocity.
Vec2 gradient_a(Vec2 v, double s);
/// grad b = (v_bar - r w_bar) / |v|. Throws ZeroVelocity.
Vec2 gradient_b(Vec2 v, double r);

/// grad a and grad b at the start of a streamline with quadrature refinement
/// (m = 2, 4, 8, 16 until the relative change drops below 1e-8).
struct StreamlineGradients {
    Vec2 grad_a;
    Vec2 grad_b;
    double s = 0.0;
    double r = 0.0;
    int m = 0;
};
StreamlineGradients streamline_gradients(const VectorField& field, const Trace& backward, const Trace& forward);

}  // namespace isoflow
