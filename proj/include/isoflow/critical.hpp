#pragma once

#include "isoflow/field.hpp"

#include <complex>
#include <string>
#include <vector>

namespace isoflow {

enum class CpClass { Saddle, NodeSourceSink, SpiralSourceSink, Unsupported };

const char* cp_class_name(CpClass c);

struct EigenData {
    CpClass cls = CpClass::Unsupported;
    std::complex<double> lambda1, lambda2;  // real case: lambda1 <= lambda2
    Vec2 r1, r2;                            // real case only, unit length
    bool real = false;
};

/// Eigen analysis of a 2x2 Jacobian. Centers, defective and singular matrices are Unsupported.
EigenData classify(const Mat2& j);

struct CriticalPoint {
    int id = -1;
    Vec2 position;
    Mat2 jacobian;
    EigenData eigen;
    int triangle = -1;

    CpClass cls() const { return eigen.cls; }
    bool is_source() const { return jacobian.trace() > 0.0 && cls() != CpClass::Saddle; }
    bool is_sink() const { return jacobian.trace() < 0.0 && cls() != CpClass::Saddle; }
};

/// Zeros of a PL field, one per triangle root, merged across shared edges. Throws
/// DegenerateTriangleField when a triangle vanishes on a line or everywhere.
std::vector<CriticalPoint> find_critical_points(const PLVectorField& field);

/// sign(p) |p|^q. Throws Undefined for p = 0 and q <= 0.
double signed_pow(double p, double q);

/// Closed-form scalar s with v^T grad s = 0 for the linear field v = J x.
struct LocalScalarModel {
    CpClass cls = CpClass::Unsupported;
    Mat2 j;
    // saddle and node
    double lambda1 = 0.0, lambda2 = 0.0;
    Vec2 r1, r2;
    // spiral
    Mat2 j_hat;
    double alpha = 0.0;
    double beta = 0.0;
    Vec2 a, b;
    Mat2 c;
    // the value jumps across the line through the origin along cut_dir
    bool has_cut = false;
    Vec2 cut_dir;
};

/// Throws UnsupportedCriticalPoint for centers and degenerate Jacobians.
LocalScalarModel local_model(const Mat2& j);

/// Evaluates the model at x (relative to the critical point). Throws AtCriticalPoint at
/// the origin and OnCutLocus on the jump line.
double local_scalar(const LocalScalarModel& m, Vec2 x);

/// |v^T grad s| / (|v| |grad s|) with central differences of step h.
double model_residual(const LocalScalarModel& m, Vec2 x, double h = 1e-6);

}  // namespace isoflow
