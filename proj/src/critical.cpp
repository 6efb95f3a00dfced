#include "isoflow/critical.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>

namespace isoflow {

const char* cp_class_name(CpClass c) {
    switch (c) {
        case CpClass::Saddle: return "saddle";
        case CpClass::NodeSourceSink: return "node";
        case CpClass::SpiralSourceSink: return "spiral";
        case CpClass::Unsupported: return "unsupported";
    }
    return "unsupported";
}

namespace {

Vec2 canonical(Vec2 r) {
    r = normalized(r);
    if (r.x < 0.0 || (r.x == 0.0 && r.y < 0.0)) r = -r;
    return r;
}

Vec2 eigenvector(const Mat2& j, double lambda) {
    // rows of (J - lambda I) are orthogonal to the eigenvector
    const Vec2 u{j.b, lambda - j.a};
    const Vec2 w{lambda - j.d, j.c};
    return canonical(norm2(u) >= norm2(w) ? u : w);
}

}  // namespace

EigenData classify(const Mat2& j) {
    EigenData e;
    const double scale = max_abs(j);
    if (!(scale > 0.0)) return e;
    const double tr = j.trace();
    const double det = j.det();
    const double disc = 0.25 * tr * tr - det;
    const double tiny = 1e-12 * scale * scale;
    if (std::fabs(det) <= tiny) return e;

    if (disc > tiny) {
        const double sq = std::sqrt(disc);
        // stable pair: the larger-magnitude root first, the other from the product
        const double big = tr >= 0.0 ? 0.5 * tr + sq : 0.5 * tr - sq;
        const double small = det / big;
        const double l1 = std::min(big, small), l2 = std::max(big, small);
        e.real = true;
        e.lambda1 = l1;
        e.lambda2 = l2;
        e.r1 = eigenvector(j, l1);
        e.r2 = eigenvector(j, l2);
        e.cls = det < 0.0 ? CpClass::Saddle : CpClass::NodeSourceSink;
        return e;
    }
    if (disc < -tiny) {
        const double im = std::sqrt(-disc);
        e.lambda1 = {0.5 * tr, -im};
        e.lambda2 = {0.5 * tr, im};
        e.cls = std::fabs(tr) > 1e-12 * scale ? CpClass::SpiralSourceSink : CpClass::Unsupported;
        return e;
    }
    // repeated eigenvalue: a star node if J is a multiple of the identity, else defective
    e.real = true;
    e.lambda1 = e.lambda2 = 0.5 * tr;
    if (std::fabs(j.b) <= 1e-12 * scale && std::fabs(j.c) <= 1e-12 * scale) {
        e.r1 = {1.0, 0.0};
        e.r2 = {0.0, 1.0};
        e.cls = CpClass::NodeSourceSink;
    }
    return e;
}

std::vector<CriticalPoint> find_critical_points(const PLVectorField& field) {
    const auto& dom = *field.domain();
    const auto& mesh = dom.mesh();
    const auto& vec = field.vectors();
    const double tol = 1e-9 * dom.bbox().diagonal();
    std::vector<CriticalPoint> out;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 v0 = vec[tri[0]], v1 = vec[tri[1]], v2 = vec[tri[2]];
        const double vmax = std::max({norm(v0), norm(v1), norm(v2)});
        // quick reject: a zero needs both components to change sign (or vanish)
        auto straddles = [](double a, double b, double c) {
            return std::min({a, b, c}) <= 0.0 && std::max({a, b, c}) >= 0.0;
        };
        if (!straddles(v0.x, v1.x, v2.x) || !straddles(v0.y, v1.y, v2.y)) continue;
        const Mat2& j = field.triangle_jacobian(static_cast<int>(t));
        const Vec2 p0 = mesh.vertices[tri[0]];
        const double h = norm(mesh.vertices[tri[1]] - p0) + norm(mesh.vertices[tri[2]] - p0);
        const double det = j.det();
        if (vmax == 0.0 || std::fabs(det) * h * h <= 1e-14 * vmax * vmax) {
            if (vmax == 0.0)
                throw Error(ErrorCode::DegenerateTriangleField,
                            "field vanishes on all of triangle " + std::to_string(t));
            // rank one: the zero set is a line when v0 lies in the range of J
            const Vec2 col = norm2(j.col(0)) >= norm2(j.col(1)) ? j.col(0) : j.col(1);
            if (norm2(col) > 0.0 && std::fabs(cross(col, v0)) <= 1e-12 * norm(col) * vmax)
                throw Error(ErrorCode::DegenerateTriangleField,
                            "field vanishes along a line in triangle " + std::to_string(t));
            continue;
        }
        const Mat2 inv{j.d / det, -j.b / det, -j.c / det, j.a / det};
        const Vec2 x = p0 - inv * v0;
        const auto bc = dom.barycentric(static_cast<int>(t), x);
        const double eps = 1e-10;
        if (bc.w[0] < -eps || bc.w[1] < -eps || bc.w[2] < -eps) continue;
        bool dup = false;
        for (const auto& cp : out) {
            if (distance(cp.position, x) <= tol) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        CriticalPoint cp;
        cp.position = x;
        cp.jacobian = j;
        cp.eigen = classify(j);
        cp.triangle = static_cast<int>(t);
        cp.id = static_cast<int>(out.size());
        out.push_back(cp);
    }
    return out;
}

double signed_pow(double p, double q) {
    if (p == 0.0) {
        if (q <= 0.0) throw Error(ErrorCode::Undefined, "signed power of zero with non-positive exponent");
        return 0.0;
    }
    const double m = std::pow(std::fabs(p), q);
    return p > 0.0 ? m : -m;
}

LocalScalarModel local_model(const Mat2& j) {
    const EigenData e = classify(j);
    LocalScalarModel m;
    m.cls = e.cls;
    m.j = j;
    switch (e.cls) {
        case CpClass::Saddle:
        case CpClass::NodeSourceSink:
            m.lambda1 = e.lambda1.real();
            m.lambda2 = e.lambda2.real();
            m.r1 = e.r1;
            m.r2 = e.r2;
            if (e.cls == CpClass::NodeSourceSink) {
                // the factor with the negative exponent has a pole on its eigenline
                m.has_cut = true;
                m.cut_dir = m.lambda1 > 0.0 ? m.r1 : m.r2;
            }
            break;
        case CpClass::SpiralSourceSink: {
            const Mat2 rj = Mat2::rotation90() * j;
            m.j_hat = 0.5 * (rj + rj.transposed());
            m.alpha = j.trace();
            m.beta = std::sqrt(std::fabs(m.j_hat.det()));
            m.a = m.j_hat.row(0);
            m.b = Mat2::rotation90().row(0);
            m.c = m.j_hat;
            m.has_cut = true;
            // arctan jumps where b^T x = 0
            m.cut_dir = canonical(rotate90(m.b));
            break;
        }
        case CpClass::Unsupported:
            throw Error(ErrorCode::UnsupportedCriticalPoint, "no closed-form model for this Jacobian");
    }
    return m;
}

double local_scalar(const LocalScalarModel& m, Vec2 x) {
    if (x.x == 0.0 && x.y == 0.0) throw Error(ErrorCode::AtCriticalPoint, "model evaluated at the critical point");
    switch (m.cls) {
        case CpClass::Saddle:
            return signed_pow(cross(x, m.r1), -m.lambda1) * signed_pow(cross(x, m.r2), m.lambda2);
        case CpClass::NodeSourceSink: {
            if (cross(x, m.cut_dir) == 0.0) throw Error(ErrorCode::OnCutLocus, "point on the node model's cut line");
            return std::atan(signed_pow(cross(x, m.r1), -m.lambda1) * signed_pow(cross(x, m.r2), m.lambda2));
        }
        case CpClass::SpiralSourceSink: {
            const double den = m.beta * dot(m.b, x);
            if (den == 0.0) throw Error(ErrorCode::OnCutLocus, "point on the spiral model's cut line");
            // |.| keeps the log real when J_hat is negative definite (clockwise rotation)
            return m.alpha * std::atan(dot(m.a, x) / den) + m.beta * std::log(std::fabs(quad(x, m.c, x)));
        }
        case CpClass::Unsupported: break;
    }
    throw Error(ErrorCode::UnsupportedCriticalPoint, "no closed-form model for this Jacobian");
}

double model_residual(const LocalScalarModel& m, Vec2 x, double h) {
    const Vec2 g{(local_scalar(m, x + Vec2{h, 0}) - local_scalar(m, x - Vec2{h, 0})) / (2 * h),
                 (local_scalar(m, x + Vec2{0, h}) - local_scalar(m, x - Vec2{0, h})) / (2 * h)};
    const Vec2 v = m.j * x;
    const double den = norm(v) * norm(g);
    return den > 0.0 ? std::fabs(dot(v, g)) / den : 0.0;
}

}  // namespace isoflow
