#pragma once

#include <array>
#include <cmath>
#include <iosfwd>

namespace isoflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr Vec2& operator/=(double s) { x /= s; y /= s; return *this; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// Determinant of the 2x2 matrix with columns a, b.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return dot(a, a); }
/// Counter-clockwise quarter turn, the matrix [[0,-1],[1,0]].
constexpr Vec2 rotate90(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double a = 0.0, b = 0.0;
    double c = 0.0, d = 0.0;

    constexpr Mat2() = default;
    constexpr Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 rotation90() { return {0.0, -1.0, 1.0, 0.0}; }
    static constexpr Mat2 from_columns(Vec2 c0, Vec2 c1) { return {c0.x, c1.x, c0.y, c1.y}; }

    constexpr double det() const { return a * d - b * c; }
    constexpr double trace() const { return a + d; }
    constexpr Mat2 transposed() const { return {a, c, b, d}; }
    constexpr Vec2 row(int i) const { return i == 0 ? Vec2{a, b} : Vec2{c, d}; }
    constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

constexpr Vec2 operator*(const Mat2& m, Vec2 v) { return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y}; }
constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}
constexpr Mat2 operator+(const Mat2& m, const Mat2& n) { return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d}; }
constexpr Mat2 operator-(const Mat2& m, const Mat2& n) { return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d}; }
constexpr Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
/// u^T M v
constexpr double quad(Vec2 u, const Mat2& m, Vec2 v) { return dot(u, m * v); }

inline double max_abs(const Mat2& m) {
    return std::fmax(std::fmax(std::fabs(m.a), std::fabs(m.b)), std::fmax(std::fabs(m.c), std::fabs(m.d)));
}

/// Twice the signed area of triangle (p, q, r); positive for counter-clockwise order.
constexpr double orient(Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); }

struct BBox {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void expand(Vec2 p) {
        lo.x = std::fmin(lo.x, p.x); lo.y = std::fmin(lo.y, p.y);
        hi.x = std::fmax(hi.x, p.x); hi.y = std::fmax(hi.y, p.y);
    }
    double diagonal() const { return norm(hi - lo); }
    bool contains(Vec2 p, double pad = 0.0) const {
        return p.x >= lo.x - pad && p.x <= hi.x + pad && p.y >= lo.y - pad && p.y <= hi.y + pad;
    }
};

/// Closest point on segment [p, q] to x; `t` receives the segment parameter in [0, 1].
inline Vec2 closest_on_segment(Vec2 p, Vec2 q, Vec2 x, double* t = nullptr) {
    const Vec2 d = q - p;
    const double len2 = norm2(d);
    double u = len2 > 0.0 ? dot(x - p, d) / len2 : 0.0;
    u = std::fmin(1.0, std::fmax(0.0, u));
    if (t) *t = u;
    return p + u * d;
}

/// Proper or touching intersection of segments [p1,p2] and [q1,q2]. On success `s` and `t`
/// receive the parameters along each segment.
bool segment_intersection(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double* s = nullptr, double* t = nullptr);

std::ostream& operator<<(std::ostream& os, Vec2 v);
std::ostream& operator<<(std::ostream& os, const Mat2& m);

}  // namespace isoflow
