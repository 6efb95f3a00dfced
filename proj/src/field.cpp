#include "isoflow/field.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace isoflow {

PLVectorField::PLVectorField(DomainPtr domain, std::vector<Vec2> vectors)
    : domain_(std::move(domain)), vectors_(std::move(vectors)) {
    const auto& mesh = domain_->mesh();
    if (vectors_.size() != mesh.vertices.size()) {
        throw Error(ErrorCode::ValidationError, "vector count " + std::to_string(vectors_.size()) +
                                                    " does not match vertex count " +
                                                    std::to_string(mesh.vertices.size()));
    }
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        if (!is_finite(vectors_[i])) {
            throw Error(ErrorCode::ValidationError, "vector at vertex " + std::to_string(i) + " is not finite");
        }
    }
    jac_.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 p0 = mesh.vertices[tri[0]];
        const Mat2 e = Mat2::from_columns(mesh.vertices[tri[1]] - p0, mesh.vertices[tri[2]] - p0);
        const Mat2 dv = Mat2::from_columns(vectors_[tri[1]] - vectors_[tri[0]], vectors_[tri[2]] - vectors_[tri[0]]);
        const double det = e.det();
        const Mat2 e_inv{e.d / det, -e.b / det, -e.c / det, e.a / det};
        jac_[t] = dv * e_inv;
    }
}

Vec2 PLVectorField::value_in_triangle(int t, Vec2 x) const {
    const auto& tri = domain_->mesh().triangles[t];
    const auto b = domain_->barycentric(t, x);
    return b.w[0] * vectors_[tri[0]] + b.w[1] * vectors_[tri[1]] + b.w[2] * vectors_[tri[2]];
}

Vec2 PLVectorField::value(Vec2 x) const {
    const int t = domain_->locate(x);
    if (t < 0) throw Error(ErrorCode::OutsideDomain, "no triangle contains the query point");
    return value_in_triangle(t, x);
}

Mat2 PLVectorField::jacobian(Vec2 x) const {
    const int t = domain_->locate(x);
    if (t < 0) throw Error(ErrorCode::OutsideDomain, "no triangle contains the query point");
    return jac_[t];
}

Vec2 PLVectorField::value_extended(Vec2 x, int& hint) const {
    int t = domain_->locate(x, hint);
    if (t >= 0) {
        hint = t;
        return value_in_triangle(t, x);
    }
    t = domain_->nearest_triangle(x);
    // barycentric weights extend the triangle's linear function past its edges
    return value_in_triangle(t, x);
}

Mat2 PLVectorField::jacobian_extended(Vec2 x, int& hint) const {
    int t = domain_->locate(x, hint);
    if (t >= 0) {
        hint = t;
        return jac_[t];
    }
    return jac_[domain_->nearest_triangle(x)];
}

// ---------------------------------------------------------------------------

AnalyticField AnalyticField::constant(Vec2 c) {
    AnalyticField f;
    f.kind_ = Kind::Constant;
    f.c_ = c;
    return f;
}

AnalyticField AnalyticField::linear(const Mat2& j, Vec2 c) {
    AnalyticField f;
    f.kind_ = Kind::Linear;
    f.j_ = j;
    f.c_ = c;
    return f;
}

namespace {

using cplx = std::complex<double>;

cplx to_c(Vec2 p) { return {p.x, p.y}; }

std::array<double, 4> psi_basis(Vec2 p) { return {1.0, p.x, p.y, p.x * p.y}; }

// Solves the square system a x = b by partial-pivot elimination.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-14) throw Error(ErrorCode::ValidationError, "singular phase system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

}  // namespace

AnalyticField AnalyticField::composite(std::vector<Vec2> nodes, std::vector<double> node_angles_deg,
                                       std::vector<Vec2> saddles, double scale) {
    if (nodes.size() != node_angles_deg.size() || nodes.empty() || nodes.size() > 4) {
        throw Error(ErrorCode::ValidationError, "composite field needs 1-4 nodes with one angle each");
    }
    AnalyticField f;
    f.kind_ = Kind::Composite;
    f.nodes_ = std::move(nodes);
    f.saddles_ = std::move(saddles);
    f.node_angles_ = std::move(node_angles_deg);
    f.scale_ = scale;

    // Unrotated Jacobian coefficient at each node: prod_{j != k}(z_k - z_j) * conj(prod(z_k - s)).
    const std::size_t n = f.nodes_.size();
    std::vector<double> base_phase(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx c = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != k) c *= to_c(f.nodes_[k]) - to_c(f.nodes_[j]);
        for (const auto& s : f.saddles_) c *= std::conj(to_c(f.nodes_[k]) - to_c(s));
        base_phase[k] = std::arg(c);
    }
    // psi(node_k) = target_k - base_k + 2 pi w_k; pick the wraps giving the flattest phase.
    const std::size_t nb = n;
    std::vector<std::vector<double>> a(n, std::vector<double>(nb));
    for (std::size_t k = 0; k < n; ++k) {
        const auto basis = psi_basis(f.nodes_[k]);
        for (std::size_t j = 0; j < nb; ++j) a[k][j] = basis[j];
    }
    double best_norm = std::numeric_limits<double>::infinity();
    int combos = 1;
    for (std::size_t k = 0; k < n; ++k) combos *= 3;
    for (int code = 0; code < combos; ++code) {
        std::vector<double> rhs(n);
        int c = code;
        for (std::size_t k = 0; k < n; ++k) {
            const int wrap = c % 3 - 1;
            c /= 3;
            rhs[k] = f.node_angles_[k] * std::numbers::pi / 180.0 - base_phase[k] + 2.0 * std::numbers::pi * wrap;
        }
        auto coef = solve_dense(a, rhs);
        double g = 0.0;
        for (std::size_t j = 1; j < coef.size(); ++j) g += coef[j] * coef[j];
        if (g < best_norm - 1e-12) {
            best_norm = g;
            f.psi_.assign(4, 0.0);
            std::copy(coef.begin(), coef.end(), f.psi_.begin());
        }
    }
    return f;
}

Vec2 AnalyticField::value(Vec2 x) const {
    switch (kind_) {
        case Kind::Constant: return c_;
        case Kind::Linear: return j_ * x + c_;
        case Kind::Composite: {
            const cplx z = to_c(x);
            cplx h = 1.0, g = 1.0;
            for (const auto& p : nodes_) h *= z - to_c(p);
            for (const auto& p : saddles_) g *= z - to_c(p);
            const auto b = psi_basis(x);
            double psi = 0.0;
            for (int k = 0; k < 4; ++k) psi += psi_[k] * b[k];
            const cplx f = scale_ * std::polar(1.0, psi) * h * std::conj(g);
            return {f.real(), f.imag()};
        }
    }
    return {};
}

Mat2 AnalyticField::jacobian(Vec2 x) const {
    switch (kind_) {
        case Kind::Constant: return {};
        case Kind::Linear: return j_;
        case Kind::Composite: {
            const cplx z = to_c(x);
            cplx h = 1.0, g = 1.0, dh = 0.0, dg = 0.0;
            for (const auto& p : nodes_) {
                dh = dh * (z - to_c(p)) + h;
                h *= z - to_c(p);
            }
            for (const auto& p : saddles_) {
                dg = dg * (z - to_c(p)) + g;
                g *= z - to_c(p);
            }
            const auto b = psi_basis(x);
            double psi = 0.0;
            for (int k = 0; k < 4; ++k) psi += psi_[k] * b[k];
            const double psi_x = psi_[1] + psi_[3] * x.y;
            const double psi_y = psi_[2] + psi_[3] * x.x;
            const cplx i(0.0, 1.0);
            const cplx m = scale_ * std::polar(1.0, psi);
            const cplx hg = h * std::conj(g);
            // d/dx conj(g) = conj(g'), d/dy conj(g) = -i conj(g'), d/dy h = i h'
            const cplx fx = m * (i * psi_x * hg + dh * std::conj(g) + h * std::conj(dg));
            const cplx fy = m * (i * psi_y * hg + i * dh * std::conj(g) - i * h * std::conj(dg));
            return {fx.real(), fy.real(), fx.imag(), fy.imag()};
        }
    }
    return {};
}

PLVectorField sample_field(const VectorField& field, DomainPtr domain) {
    std::vector<Vec2> vecs;
    vecs.reserve(domain->mesh().vertices.size());
    for (const auto& p : domain->mesh().vertices) {
        int hint = -1;
        vecs.push_back(field.value_extended(p, hint));
    }
    return PLVectorField(std::move(domain), std::move(vecs));
}

Vec2 eval_field(const VectorField& field, Vec2 x) { return field.value(x); }
Mat2 jacobian_at(const VectorField& field, Vec2 x) { return field.jacobian(x); }

Frame frame_of(Vec2 v) {
    const double s = norm(v);
    if (!(s > 0.0)) throw Error(ErrorCode::ZeroVelocity, "field vanishes; frame undefined");
    Frame f;
    f.speed = s;
    f.v_bar = v / s;
    f.w_bar = rotate90(f.v_bar);
    return f;
}

Mat2 reference_saddle_matrix() { return {-2.0, 1.5, 0.0, 1.0}; }
Mat2 reference_node_matrix() { return {2.0, -0.5, 0.0, 1.0}; }
Mat2 reference_spiral_matrix() { return {1.0, 4.0, -2.0, 3.0}; }

AnalyticField three_sources_one_saddle() {
    return AnalyticField::composite({{-0.5, 0.45}, {0.5, 0.4}, {0.05, -0.55}}, {60.0, -30.0, -60.0}, {{0.02, 0.08}});
}

AnalyticField two_sources_two_sinks_two_saddles() {
    return AnalyticField::composite({{-0.55, 0.5}, {0.5, 0.45}, {0.55, -0.5}, {-0.5, -0.45}},
                                    {60.0, -60.0, -120.0, 120.0}, {{-0.4, 0.02}, {0.38, -0.03}});
}

}  // namespace isoflow
