#include "isoflow/geometry.hpp"
#include "isoflow/error.hpp"

#include <ostream>

namespace isoflow {

bool segment_intersection(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double* s, double* t) {
    const Vec2 r = p2 - p1;
    const Vec2 u = q2 - q1;
    const double den = cross(r, u);
    const Vec2 w = q1 - p1;
    if (den == 0.0) {
        // parallel; report collinear overlap as an intersection at the first shared point
        if (cross(w, r) != 0.0) return false;
        const double rr = norm2(r);
        if (rr == 0.0) return false;
        const double t0 = dot(w, r) / rr;
        const double t1 = dot(q2 - p1, r) / rr;
        const double lo = std::fmax(0.0, std::fmin(t0, t1));
        const double hi = std::fmin(1.0, std::fmax(t0, t1));
        if (lo > hi) return false;
        if (s) *s = lo;
        if (t) {
            const double uu = norm2(u);
            *t = uu > 0.0 ? dot(p1 + lo * r - q1, u) / uu : 0.0;
        }
        return true;
    }
    const double ss = cross(w, u) / den;
    const double tt = cross(w, r) / den;
    if (ss < 0.0 || ss > 1.0 || tt < 0.0 || tt > 1.0) return false;
    if (s) *s = ss;
    if (t) *t = tt;
    return true;
}

std::ostream& operator<<(std::ostream& os, Vec2 v) { return os << '(' << v.x << ", " << v.y << ')'; }

std::ostream& operator<<(std::ostream& os, const Mat2& m) {
    return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutsideDomain: return "OutsideDomain";
        case ErrorCode::NotDiskTopology: return "NotDiskTopology";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::LeftDomain: return "LeftDomain";
        case ErrorCode::StagnationNearCritical: return "StagnationNearCritical";
        case ErrorCode::NotSimpleHere: return "NotSimpleHere";
        case ErrorCode::DegenerateTriangleField: return "DegenerateTriangleField";
        case ErrorCode::Undefined: return "Undefined";
        case ErrorCode::OnCutLocus: return "OnCutLocus";
        case ErrorCode::AtCriticalPoint: return "AtCriticalPoint";
        case ErrorCode::UncoveredCriticalPoint: return "UncoveredCriticalPoint";
        case ErrorCode::CyclicCuts: return "CyclicCuts";
        case ErrorCode::SelfIntersection: return "SelfIntersection";
        case ErrorCode::GeometryFailure: return "GeometryFailure";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
        case ErrorCode::ZeroVelocity: return "ZeroVelocity";
        case ErrorCode::InconsistentTransfer: return "InconsistentTransfer";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::EntersExcisedRegion: return "EntersExcisedRegion";
        case ErrorCode::IOError: return "IOError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::UnsupportedCriticalPoint: return "UnsupportedCriticalPoint";
    }
    return "Unknown";
}

}  // namespace isoflow
