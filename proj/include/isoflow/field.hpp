#pragma once

#include "isoflow/geometry.hpp"
#include "isoflow/mesh.hpp"

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace isoflow {

/// A steady 2D vector field. `value`/`jacobian` are the checked evaluations; the
/// `_extended` variants are what integrators call: they accept a location hint and
/// extrapolate past the mesh so Runge-Kutta stages may straddle the boundary.
class VectorField {
public:
    virtual ~VectorField() = default;

    virtual Vec2 value(Vec2 x) const = 0;
    virtual Mat2 jacobian(Vec2 x) const = 0;
    virtual Vec2 value_extended(Vec2 x, int& hint) const = 0;
    virtual Mat2 jacobian_extended(Vec2 x, int& hint) const = 0;
};

/// Piecewise-linear field: one vector per mesh vertex, linear inside each triangle.
class PLVectorField final : public VectorField {
public:
    PLVectorField(DomainPtr domain, std::vector<Vec2> vectors);

    const DomainPtr& domain() const { return domain_; }
    const std::vector<Vec2>& vectors() const { return vectors_; }

    Vec2 value(Vec2 x) const override;
    Mat2 jacobian(Vec2 x) const override;
    Vec2 value_extended(Vec2 x, int& hint) const override;
    Mat2 jacobian_extended(Vec2 x, int& hint) const override;

    /// Exact gradient of the interpolant on triangle t.
    const Mat2& triangle_jacobian(int t) const { return jac_[t]; }
    Vec2 value_in_triangle(int t, Vec2 x) const;

private:
    DomainPtr domain_;
    std::vector<Vec2> vectors_;
    std::vector<Mat2> jac_;
};

/// Closed-form fields: constants, affine fields J x + c, and complex-product composites
/// with prescribed critical points.
class AnalyticField final : public VectorField {
public:
    enum class Kind { Constant, Linear, Composite };

    static AnalyticField constant(Vec2 c);
    /// v(x) = J x + c
    static AnalyticField linear(const Mat2& j, Vec2 c = {});

    /// v = Re/Im of  scale * exp(i psi(x)) * prod(z - node_k) * conj(prod(z - saddle_k)).
    /// Each node is a source/sink whose Jacobian is a rotation-scaling with angle
    /// `node_angles_deg[k]` (|angle| < 90: source, > 90: sink); every saddle position is a
    /// saddle. The phase psi is the lowest-gradient polynomial in {1, x, y, xy} hitting those
    /// angles. No other zeros exist.
    static AnalyticField composite(std::vector<Vec2> nodes, std::vector<double> node_angles_deg,
                                   std::vector<Vec2> saddles, double scale = 1.0);

    Kind kind() const { return kind_; }
    const Mat2& matrix() const { return j_; }
    Vec2 offset() const { return c_; }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Vec2>& saddles() const { return saddles_; }
    const std::vector<double>& node_angles() const { return node_angles_; }
    double scale() const { return scale_; }

    Vec2 value(Vec2 x) const override;
    Mat2 jacobian(Vec2 x) const override;
    Vec2 value_extended(Vec2 x, int&) const override { return value(x); }
    Mat2 jacobian_extended(Vec2 x, int&) const override { return jacobian(x); }

private:
    AnalyticField() = default;

    Kind kind_ = Kind::Constant;
    Mat2 j_;
    Vec2 c_;
    std::vector<Vec2> nodes_;
    std::vector<Vec2> saddles_;
    std::vector<double> node_angles_;
    std::vector<double> psi_;  // coefficients of 1, x, y, xy
    double scale_ = 1.0;
};

/// Samples an analytic field at the domain vertices.
PLVectorField sample_field(const VectorField& field, DomainPtr domain);

Vec2 eval_field(const VectorField& field, Vec2 x);
Mat2 jacobian_at(const VectorField& field, Vec2 x);

/// Normalized field direction v/|v| and its counter-clockwise perpendicular.
struct Frame {
    Vec2 v_bar;
    Vec2 w_bar;
    double speed = 0.0;
};
/// Throws ZeroVelocity for v == 0.
Frame frame_of(Vec2 v);

// -- named test fields ------------------------------------------------------

/// Linear fields v = J x with the three reference Jacobians: saddle, real node, spiral.
Mat2 reference_saddle_matrix();
Mat2 reference_node_matrix();
Mat2 reference_spiral_matrix();

/// Three swirling sources and a saddle, inside [-1,1]^2.
AnalyticField three_sources_one_saddle();
/// Two sources, two sinks and two saddles, inside [-1,1]^2.
AnalyticField two_sources_two_sinks_two_saddles();

}  // namespace isoflow
