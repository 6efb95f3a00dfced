#include "isoflow/scalarize.hpp"
#include "isoflow/error.hpp"
#include "isoflow/streamline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>

namespace isoflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// integrals over [0, u] of the quadratic Lagrange basis on nodes 0, 1/2, 1
void quad_weights(double u, double w[3]) {
    const double u2 = u * u, u3 = u2 * u;
    w[0] = (2.0 / 3.0) * u3 - 1.5 * u2 + u;
    w[1] = -(4.0 / 3.0) * u3 + 2.0 * u2;
    w[2] = (2.0 / 3.0) * u3 - 0.5 * u2;
}

double quad_value(double u, double f0, double f1, double f2) {
    return f0 * 2.0 * (u - 0.5) * (u - 1.0) - f1 * 4.0 * u * (u - 1.0) + f2 * 2.0 * u * (u - 0.5);
}

// Piece containing relative parameter u; pieces are sorted by u0.
std::size_t piece_of(const std::vector<double>& u0, double u) {
    auto it = std::upper_bound(u0.begin(), u0.end(), u);
    return it == u0.begin() ? 0 : static_cast<std::size_t>(it - u0.begin()) - 1;
}

double wrap_rel(const BoundaryTable& t, double s) {
    double u = std::fmod(s - t.origin, t.length);
    if (u < 0.0) u += t.length;
    if (u >= t.length) u = 0.0;
    return u;
}

double table_integral(const BoundaryTable& t, double s, bool b) {
    if (t.u0.empty()) return 0.0;
    const double u = wrap_rel(t, s);
    const std::size_t k = piece_of(t.u0, u);
    const double x = std::clamp((u - t.u0[k]) / t.du[k], 0.0, 1.0);
    double w[3];
    quad_weights(x, w);
    if (b) return t.b_start[k] + t.du[k] * (w[0] * t.fb0[k] + w[1] * t.fb1[k] + w[2] * t.fb2[k]);
    return t.a_start[k] + t.du[k] * (w[0] * t.fa0[k] + w[1] * t.fa1[k] + w[2] * t.fa2[k]);
}

double table_derivative(const BoundaryTable& t, double s, bool b) {
    if (t.u0.empty()) return 0.0;
    const double u = wrap_rel(t, s);
    const std::size_t k = piece_of(t.u0, u);
    const double x = std::clamp((u - t.u0[k]) / t.du[k], 0.0, 1.0);
    return b ? quad_value(x, t.fb0[k], t.fb1[k], t.fb2[k]) : quad_value(x, t.fa0[k], t.fa1[k], t.fa2[k]);
}

double circle_interp(const CircleTable& c, const std::vector<double>& v, double th) {
    const std::size_t n = c.theta.size();
    if (n == 0) return 0.0;
    const double step = kTwoPi / static_cast<double>(n);
    double u = std::fmod(th - c.theta[0], kTwoPi);
    if (u < 0.0) u += kTwoPi;
    const double f = u / step;
    std::size_t i = std::min(static_cast<std::size_t>(f), n - 1);
    const double w = f - static_cast<double>(i);
    // the last interval wraps to theta0 + 2 pi, where the table has been closed to v[0]
    const double v1 = i + 1 < n ? v[i + 1] : v[0];
    return (1.0 - w) * v[i] + w * v1;
}

}  // namespace

double BoundaryTable::a(double s) const { return table_integral(*this, s, false); }
double BoundaryTable::b(double s) const { return table_integral(*this, s, true); }
double BoundaryTable::a_s(double s) const { return table_derivative(*this, s, false); }
double BoundaryTable::b_s(double s) const { return table_derivative(*this, s, true); }

double CircleTable::value_a(double th) const { return offset_a + circle_interp(*this, a, th); }
double CircleTable::value_b(double th) const { return offset_b + circle_interp(*this, b, th); }

Vec2 ScalarPair::grad_a(int t) const {
    const auto& m = mesh();
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = m.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 e1 = m.vertices[static_cast<std::size_t>(tri[1])] - p0, e2 = m.vertices[static_cast<std::size_t>(tri[2])] - p0;
    const double d1 = a[static_cast<std::size_t>(tri[1])] - a[static_cast<std::size_t>(tri[0])];
    const double d2 = a[static_cast<std::size_t>(tri[2])] - a[static_cast<std::size_t>(tri[0])];
    const double det = cross(e1, e2);
    return {(d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det};
}

Vec2 ScalarPair::grad_b(int t) const {
    const auto& m = mesh();
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = m.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 e1 = m.vertices[static_cast<std::size_t>(tri[1])] - p0, e2 = m.vertices[static_cast<std::size_t>(tri[2])] - p0;
    const double d1 = b[static_cast<std::size_t>(tri[1])] - b[static_cast<std::size_t>(tri[0])];
    const double d2 = b[static_cast<std::size_t>(tri[2])] - b[static_cast<std::size_t>(tri[0])];
    const double det = cross(e1, e2);
    return {(d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det};
}

double ScalarPair::a_range() const {
    double lo = 1e300, hi = -1e300;
    for (double v : a)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return hi > lo ? hi - lo : 0.0;
}

namespace {

bool is_center(const CriticalPoint& cp) {
    const Mat2& j = cp.jacobian;
    return j.det() > 0.0 && std::fabs(j.trace()) <= 1e-9 * std::sqrt(j.det());
}

struct Value {
    double a = 0.0, b = 0.0;
    int terminal = 0;  // 0: boundary, k+1: circle of critical point k
};

// Everything the per-point evaluations need.
class Builder {
public:
    Builder(const VectorField& field, DomainPtr domain, const CutSet& cuts, const ScalarizeOptions& opt)
        : field_(field), domain_(std::move(domain)), cuts_(cuts), opt_(opt), tracer_(field_, domain_) {
        tracer_.rtol = opt.rtol;
        tracer_.atol = opt.atol;
    }

    ScalarPair run();

private:
    // setup
    void classify_points();
    void make_barriers(const CutMesh& cm, bool stop);

    // gradients on the streamline through x (both directions, terminal disks respected)
    StreamlineGradients gradients_at(Vec2 x, double* forward_time = nullptr);
    TraceResult trace_retry(Vec2 x, int dir, const TraceOptions& o);

    void build_boundary_table();
    void build_circles();
    void compute_jumps();
    Value evaluate(Vec2 x);
    void link_sinks();
    void build_periodic_table(const CutMesh& cm);
    Value evaluate_periodic(Vec2 x);
    double anchor_s_ = 0.0;
    bool have_anchor_ = false;

    const VectorField& field_;
    DomainPtr domain_;
    const CutSet& cuts_;
    ScalarizeOptions opt_;
    Tracer tracer_;

    std::vector<double> radius_;
    std::vector<StopDisk> sources_, sinks_;
    BarrierSet barriers_;
    std::vector<SwitchPoint> switches_;
    BoundaryTable table_;
    std::vector<CircleTable> circles_;  // one per critical point; empty theta for saddles
    std::vector<double> h_a_, h_b_;
    std::vector<std::vector<Vec2>> chains_;
    ScalarMetrics metrics_;

    // closed-orbit mode: a along the cut, parametrized by arclength from the center end
    std::vector<Vec2> pchain_;
    std::vector<double> pcum_;
    BoundaryTable ptable_;
    double period_ = 0.0;
};

void Builder::classify_points() {
    const auto& cps = cuts_.cps;
    radius_.resize(cps.size());
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const auto& cp = cps[k];
        radius_[k] = opt_.eps_factor * domain_->local_edge_length(cp.position);
        if (is_center(cp)) {
            if (!opt_.periodic)
                throw Error(ErrorCode::UnsupportedCriticalPoint,
                            "center at (" + std::to_string(cp.position.x) + ", " + std::to_string(cp.position.y) +
                                ") needs closed-orbit mode");
            continue;
        }
        if (cp.cls() == CpClass::Unsupported)
            throw Error(ErrorCode::UnsupportedCriticalPoint,
                        "degenerate critical point " + std::to_string(k) + " at (" + std::to_string(cp.position.x) + ", " +
                            std::to_string(cp.position.y) + ")");
        const StopDisk d{static_cast<int>(k), cp.position, radius_[k]};
        if (cp.is_source()) sources_.push_back(d);
        if (cp.is_sink()) sinks_.push_back(d);
    }
    if (opt_.periodic) {
        if (cps.size() != 1 || !is_center(cps[0]))
            throw Error(ErrorCode::UnsupportedCriticalPoint, "closed-orbit mode needs exactly one center");
    }
}

void Builder::make_barriers(const CutMesh& cm, bool stop) {
    std::vector<Barrier> bs;
    for (std::size_t p = 0; p < cm.chains.size(); ++p) {
        auto pts = cm.chain_points(static_cast<int>(p));
        if (opt_.periodic && pts.size() >= 2) {
            // orbits hugging the boundary leave the polygon; carry the cut past it
            const bool start_out = cuts_.paths[p].start.is_boundary();
            const Vec2 tip = start_out ? pts.front() : pts.back();
            const Vec2 prev = start_out ? pts[1] : pts[pts.size() - 2];
            const Vec2 ext = tip + 3.0 * domain_->median_edge() * normalized(tip - prev);
            if (start_out) pts.insert(pts.begin(), ext);
            else pts.push_back(ext);
        }
        bs.push_back({static_cast<int>(p), std::move(pts), stop});
    }
    BBox box = domain_->bbox();
    const double pad = 0.5 * box.diagonal();
    box.lo -= Vec2{pad, pad};
    box.hi += Vec2{pad, pad};
    barriers_ = BarrierSet(std::move(bs), box, 2.0 * domain_->median_edge());
}

TraceResult Builder::trace_retry(Vec2 x, int dir, const TraceOptions& o) {
    try {
        return tracer_.trace(x, dir, o);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::StagnationNearCritical && e.code() != ErrorCode::NotSimpleHere) throw;
        // a point on a separatrix: step off it sideways
        int hint = -1;
        const Vec2 v = field_.value_extended(x, hint);
        const double le = domain_->local_edge_length(x);
        const Vec2 w = norm(v) > 0.0 ? rotate90(normalized(v)) : Vec2{1.0, 0.0};
        for (double f : {1e-8, -1e-8, 1e-6, -1e-6, 1e-4, -1e-4}) {
            const Vec2 y = x + f * le * w;
            if (!domain_->contains(y)) continue;
            try {
                auto r = tracer_.trace(y, dir, o);
                ++metrics_.retried_traces;
                return r;
            } catch (const Error& e2) {
                if (e2.code() != ErrorCode::StagnationNearCritical && e2.code() != ErrorCode::NotSimpleHere) throw;
            }
        }
        throw Error(ErrorCode::NotSimpleHere, std::string("trace from (") + std::to_string(x.x) + ", " + std::to_string(x.y) +
                                                  ") does not reach a terminal curve: " + e.what());
    }
}

StreamlineGradients Builder::gradients_at(Vec2 x, double* forward_time) {
    TraceOptions fo, bo;
    fo.keep_trace = bo.keep_trace = true;
    if (opt_.periodic) {
        fo.barriers = bo.barriers = &barriers_;
        fo.boundary_stops = bo.boundary_stops = false;
    } else {
        fo.disks = sinks_;
        bo.disks = sources_;
    }
    const auto fw = trace_retry(x, +1, fo);
    const auto bw = trace_retry(x, -1, bo);
    if (forward_time) *forward_time = fw.tau_end;
    return streamline_gradients(field_, bw.trace, fw.trace);
}


// Fills one quadratic piece table. `f(u, &fa, &fb)` evaluates both integrands at relative
// parameter u; breakpoints split pieces where the integrands may jump.
template <class F>
void fill_table(BoundaryTable& t, std::vector<double> br, double total, double target, F&& f) {
    std::sort(br.begin(), br.end());
    std::vector<double> cuts;
    for (double u : br) {
        if (u < -1e-12 * total || u >= total * (1.0 - 1e-12)) continue;
        if (cuts.empty() || u - cuts.back() > 1e-12 * total) cuts.push_back(std::max(u, 0.0));
    }
    if (cuts.empty() || cuts.front() > 0.0) cuts.insert(cuts.begin(), 0.0);
    cuts.push_back(total);
    double acc_a = 0.0, acc_b = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double ua = cuts[i], ub = cuts[i + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((ub - ua) / target)));
        const double d = (ub - ua) / n;
        const double inset = 1e-7 * d;
        double pa = 0.0, pb = 0.0;
        f(ua + inset, &pa, &pb);
        for (int j = 0; j < n; ++j) {
            const double x0 = ua + j * d;
            double ma, mb, ea, eb;
            f(x0 + 0.5 * d, &ma, &mb);
            f(j + 1 == n ? ub - inset : x0 + d, &ea, &eb);
            t.u0.push_back(x0);
            t.du.push_back(d);
            t.fa0.push_back(pa);
            t.fa1.push_back(ma);
            t.fa2.push_back(ea);
            t.fb0.push_back(pb);
            t.fb1.push_back(mb);
            t.fb2.push_back(eb);
            t.a_start.push_back(acc_a);
            t.b_start.push_back(acc_b);
            acc_a += d * (pa + 4.0 * ma + ea) / 6.0;
            acc_b += d * (pb + 4.0 * mb + eb) / 6.0;
            pa = ea;
            pb = eb;
        }
    }
    t.closure_a = acc_a;
    t.closure_b = acc_b;
}

void Builder::build_boundary_table() {
    const auto& bp = domain_->boundary();
    const double L = bp.length();
    table_ = BoundaryTable{};
    table_.length = L;
    switches_ = boundary_switch_points(field_, bp);
    double origin = 0.0;
    if (have_anchor_) {
        origin = anchor_s_;
    } else {
        for (const auto& sw : switches_)
            if (sw.to_outflow) {
                origin = sw.s;
                break;
            }
    }
    table_.origin = bp.wrap(origin);
    auto rel = [&](double s) {
        double u = std::fmod(s - table_.origin, L);
        return u < 0.0 ? u + L : u;
    };
    std::vector<double> br{0.0};
    for (std::size_t i = 0; i < bp.segment_count(); ++i) br.push_back(rel(bp.cumulative(i)));
    for (const auto& sw : switches_) br.push_back(rel(sw.s));
    const double inward = 1e-7 * domain_->median_edge();
    fill_table(table_, br, L, domain_->median_edge(), [&](double u, double* fa, double* fb) {
        const double s = bp.wrap(table_.origin + u);
        const std::size_t seg = bp.segment_at(s);
        const Vec2 x = bp.point(s) - inward * bp.segment_normal(seg);
        const auto g = gradients_at(x);
        const Vec2 t = bp.segment_tangent(seg);
        *fa = dot(g.grad_a, t);
        *fb = dot(g.grad_b, t);
    });
    for (std::size_t k = 0; k < table_.pieces(); ++k) {
        const double s = table_.origin + table_.u0[k] + 0.5 * table_.du[k];
        table_.outflow.push_back(boundary_flux(field_, bp, bp.wrap(s)) > 0.0 ? 1 : 0);
    }
}

void Builder::build_circles() {
    const auto& cps = cuts_.cps;
    circles_.assign(cps.size(), CircleTable{});
    const int n = std::max(16, opt_.circle_samples);
    const double step = kTwoPi / n;
    for (std::size_t k = 0; k < cps.size(); ++k) {
        auto& c = circles_[k];
        c.cp = static_cast<int>(k);
        c.center = cps[k].position;
        c.radius = radius_[k];
        if (!(cps[k].is_source() || cps[k].is_sink())) continue;
        c.theta.resize(static_cast<std::size_t>(n));
        c.da.resize(c.theta.size());
        c.db.resize(c.theta.size());
        for (int j = 0; j < n; ++j) {
            const double th = j * step;
            c.theta[static_cast<std::size_t>(j)] = th;
            const Vec2 y = c.point(th);
            if (!domain_->contains(y))
                throw Error(ErrorCode::GeometryFailure, "critical point " + std::to_string(k) + " is too close to the boundary");
            const auto g = gradients_at(y);
            const Vec2 t{-std::sin(th), std::cos(th)};
            c.da[static_cast<std::size_t>(j)] = dot(g.grad_a, t) * c.radius;
            c.db[static_cast<std::size_t>(j)] = dot(g.grad_b, t) * c.radius;
        }
        double fa = 0.0, fb = 0.0;
        for (int j = 0; j < n; ++j) {
            fa += c.da[static_cast<std::size_t>(j)] * step;
            fb += c.db[static_cast<std::size_t>(j)] * step;
        }
        c.flux_a = fa;
        c.flux_b = fb;
    }
}

// Angle where the embedded chain of path p leaves the circle around its anchor cp.
double attachment_angle(const std::vector<Vec2>& chain, bool at_start, Vec2 c, double r) {
    std::vector<Vec2> pts = chain;
    if (!at_start) std::reverse(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        if (norm(b - c) < r) continue;
        // solve |a + t (b - a) - c| = r for the exit
        const Vec2 d = b - a, f = a - c;
        const double A = dot(d, d), B = 2.0 * dot(f, d), C = dot(f, f) - r * r;
        const double disc = std::max(0.0, B * B - 4.0 * A * C);
        const double t = std::clamp((-B + std::sqrt(disc)) / (2.0 * A), 0.0, 1.0);
        const Vec2 x = a + t * d - c;
        return std::atan2(x.y, x.x);
    }
    const Vec2 x = pts.back() - c;
    return std::atan2(x.y, x.x);
}

void Builder::compute_jumps() {
    const auto& cps = cuts_.cps;
    const std::size_t n = cps.size();
    const auto& paths = cuts_.paths;
    auto node = [&](const CutAnchor& a) { return a.is_boundary() ? static_cast<int>(n) : a.cp; };
    for (std::size_t p = 0; p < paths.size(); ++p) {
        // nodes still attached to the boundary once path p is removed
        std::vector<char> reached(n + 1, 0);
        std::deque<int> q{static_cast<int>(n)};
        reached[n] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            for (std::size_t e = 0; e < paths.size(); ++e) {
                if (e == p) continue;
                const int x = node(paths[e].start), y = node(paths[e].end);
                for (auto [from, to] : {std::pair{x, y}, std::pair{y, x}})
                    if (from == u && !reached[static_cast<std::size_t>(to)]) {
                        reached[static_cast<std::size_t>(to)] = 1;
                        q.push_back(to);
                    }
            }
        }
        double fa = 0.0, fb = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (!reached[k]) {
                fa += circles_[k].flux_a;
                fb += circles_[k].flux_b;
            }
        if (paths[p].start.is_boundary() || paths[p].end.is_boundary()) {
            fa = table_.closure_a;
            fb = table_.closure_b;
        }
        const bool start_in_subtree = !reached[static_cast<std::size_t>(node(paths[p].start))];
        const double sgn = start_in_subtree ? -1.0 : 1.0;
        h_a_[p] = sgn * fa;
        h_b_[p] = sgn * fb;
    }

    // sink circles: attachment jumps, cumulative values, closure spread over the turn
    for (std::size_t k = 0; k < n; ++k) {
        auto& c = circles_[k];
        if (c.theta.empty()) continue;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            for (bool at_start : {true, false}) {
                const auto& an = at_start ? paths[p].start : paths[p].end;
                if (an.is_boundary() || an.cp != static_cast<int>(k)) continue;
                double th = attachment_angle(chains_[p], at_start, c.center, c.radius);
                if (th < 0.0) th += kTwoPi;
                const double sg = at_start ? 1.0 : -1.0;
                c.attachments.push_back({th, static_cast<int>(p), sg * h_a_[p], sg * h_b_[p]});
            }
        }
        const std::size_t m = c.theta.size();
        const double step = kTwoPi / static_cast<double>(m);
        c.a.assign(m, 0.0);
        c.b.assign(m, 0.0);
        auto jumps_in = [&](double lo, double hi, double* ja, double* jb) {
            *ja = *jb = 0.0;
            for (const auto& at : c.attachments)
                if (at.theta > lo && at.theta <= hi) {
                    *ja += at.jump_a;
                    *jb += at.jump_b;
                }
        };
        double ja, jb;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            jumps_in(c.theta[j], c.theta[j + 1], &ja, &jb);
            c.a[j + 1] = c.a[j] + 0.5 * (c.da[j] + c.da[j + 1]) * step + ja;
            c.b[j + 1] = c.b[j] + 0.5 * (c.db[j] + c.db[j + 1]) * step + jb;
        }
        jumps_in(c.theta[m - 1], kTwoPi, &ja, &jb);
        double ja0, jb0;
        jumps_in(-1.0, 0.0, &ja0, &jb0);
        const double close_a = c.a[m - 1] + 0.5 * (c.da[m - 1] + c.da[0]) * step + ja + ja0;
        const double close_b = c.b[m - 1] + 0.5 * (c.db[m - 1] + c.db[0]) * step + jb + jb0;
        for (std::size_t j = 0; j < m; ++j) {
            c.a[j] -= close_a * c.theta[j] / kTwoPi;
            c.b[j] -= close_b * c.theta[j] / kTwoPi;
        }
        if (cuts_.cps[k].is_sink())
            metrics_.circle_closure_a = std::max(metrics_.circle_closure_a, std::fabs(close_a) / std::max(std::fabs(c.flux_a), 1e-300));
    }
}

Value Builder::evaluate(Vec2 x) {
    TraceOptions o;
    o.disks = sinks_;
    o.barriers = &barriers_;
    o.keep_trace = false;
    const auto r = trace_retry(x, +1, o);
    Value v;
    for (const auto& c : r.crossings) {
        v.a += c.sign * h_a_[static_cast<std::size_t>(c.barrier)];
        v.b += c.sign * h_b_[static_cast<std::size_t>(c.barrier)];
    }
    if (r.stop == TraceStop::Boundary) {
        v.a += table_.a(r.s);
        v.b += table_.b(r.s) - r.tau_end;
        v.terminal = 0;
    } else if (r.stop == TraceStop::Disk) {
        const auto& c = circles_[static_cast<std::size_t>(r.disk)];
        const Vec2 d = r.end - c.center;
        const double th = std::atan2(d.y, d.x);
        v.a += c.value_a(th);
        v.b += c.value_b(th) - r.tau_end;
        v.terminal = r.disk + 1;
    } else {
        throw Error(ErrorCode::NotSimpleHere, "trace stopped without reaching a terminal curve");
    }
    return v;
}

// Saddles tie the sink tables to the boundary table: both sides of a stable separatrix
// must carry the same value.
void Builder::link_sinks() {
    if (sinks_.empty()) return;
    const auto& cps = cuts_.cps;
    struct Link {
        int t_plus, t_minus;
        double da, db;  // offset(t_plus) - offset(t_minus)
    };
    std::vector<Link> links;
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const auto& cp = cps[k];
        if (cp.cls() != CpClass::Saddle) continue;
        const Vec2 stable = cp.eigen.r1, unstable = cp.eigen.r2;
        const double delta = 1.5 * radius_[k];
        // side of the stable manifold a start point falls on: where the trace leaves the saddle
        auto side = [&](Vec2 x) -> int {
            TraceOptions o;
            o.disks = sinks_;
            o.keep_trace = true;
            TraceResult r;
            try {
                r = tracer_.trace(x, +1, o);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::StagnationNearCritical || e.code() == ErrorCode::NotSimpleHere) return 0;
                throw;
            }
            const auto& sm = r.trace.samples;
            std::size_t closest = 0;
            for (std::size_t i = 1; i < sm.size(); ++i)
                if (norm(sm[i].x - cp.position) < norm(sm[closest].x - cp.position)) closest = i;
            for (std::size_t i = closest; i < sm.size(); ++i)
                if (norm(sm[i].x - cp.position) > 2.0 * delta) return dot(sm[i].x - cp.position, unstable) > 0.0 ? 1 : -1;
            return dot(r.end - cp.position, unstable) > 0.0 ? 1 : -1;
        };
        for (double branch : {1.0, -1.0}) {
            const Vec2 p0 = cp.position + branch * delta * stable;
            if (!domain_->contains(p0)) continue;
            double lo = -delta, hi = delta;
            const int s_lo = side(p0 + lo * unstable), s_hi = side(p0 + hi * unstable);
            if (s_lo == 0 || s_hi == 0 || s_lo == s_hi) continue;
            for (int it = 0; it < 60 && hi - lo > 1e-9 * delta; ++it) {
                const double mid = 0.5 * (lo + hi);
                const int sm = side(p0 + mid * unstable);
                if (sm == 0) break;
                (sm == s_lo ? lo : hi) = mid;
            }
            const double eta = std::max(1e-6 * delta, hi - lo);
            const double mid = 0.5 * (lo + hi);
            const Value vp = evaluate(p0 + (mid + eta) * unstable);
            const Value vm = evaluate(p0 + (mid - eta) * unstable);
            if (vp.terminal == vm.terminal) continue;
            // b is logarithmically singular on the separatrix; match it at symmetric points
            // a fixed distance away, where the two linger times roughly cancel
            const Value bp = evaluate(p0 + (mid + 0.25 * delta) * unstable);
            const Value bm = evaluate(p0 + (mid - 0.25 * delta) * unstable);
            const double db = (bp.terminal == vp.terminal && bm.terminal == vm.terminal) ? bm.b - bp.b : 0.0;
            links.push_back({vp.terminal, vm.terminal, vm.a - vp.a, db});
        }
    }
    // breadth-first from the boundary table (or the first sink when nothing leaves the domain)
    const std::size_t nt = cps.size() + 1;
    std::vector<char> known(nt, 0);
    std::vector<double> off_a(nt, 0.0), off_b(nt, 0.0);
    bool any_outflow = false;
    for (char o : table_.outflow) any_outflow = any_outflow || o;
    const int root = any_outflow ? 0 : sinks_.front().id + 1;
    known[static_cast<std::size_t>(root)] = 1;
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& l : links) {
            const auto tp = static_cast<std::size_t>(l.t_plus), tm = static_cast<std::size_t>(l.t_minus);
            if (known[tm] && !known[tp]) {
                off_a[tp] = off_a[tm] + l.da;
                off_b[tp] = off_b[tm] + l.db;
                known[tp] = grew = true;
            } else if (known[tp] && !known[tm]) {
                off_a[tm] = off_a[tp] - l.da;
                off_b[tm] = off_b[tp] - l.db;
                known[tm] = grew = true;
            }
        }
    }
    for (const auto& d : sinks_) {
        auto& c = circles_[static_cast<std::size_t>(d.id)];
        c.offset_a = off_a[static_cast<std::size_t>(d.id) + 1];
        c.offset_b = off_b[static_cast<std::size_t>(d.id) + 1];
        if (!known[static_cast<std::size_t>(d.id) + 1] && opt_.verbose)
            std::cerr << "sink " << d.id << " is not linked to the boundary table; offset left at 0\n";
    }
}

void Builder::build_periodic_table(const CutMesh& cm) {
    const auto& path = cuts_.paths.front();
    pchain_ = cm.chain_points(0);
    if (path.start.is_boundary()) std::reverse(pchain_.begin(), pchain_.end());
    pcum_.assign(pchain_.size(), 0.0);
    for (std::size_t i = 1; i < pchain_.size(); ++i) pcum_[i] = pcum_[i - 1] + distance(pchain_[i - 1], pchain_[i]);
    const double total = pcum_.back();
    const double r0 = radius_[0];
    ptable_ = BoundaryTable{};
    ptable_.length = total * 2.0 + 1.0;
    ptable_.origin = 0.0;
    std::vector<double> br{r0};
    for (double c : pcum_)
        if (c > r0) br.push_back(c);
    double period_sum = 0.0;
    int period_n = 0;
    const double le = domain_->median_edge();
    BoundaryTable tmp;
    fill_table(tmp, br, total, le, [&](double u, double* fa, double* fb) {
        if (u < r0) u = r0;
        const std::size_t i = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(pcum_.begin(), pcum_.end(), u) - pcum_.begin()), pcum_.size() - 1);
        const std::size_t i0 = i == 0 ? 0 : i - 1;
        const Vec2 a = pchain_[i0], b = pchain_[std::max<std::size_t>(i, 1)];
        const Vec2 t = normalized(b - a);
        const double f = (u - pcum_[i0]) / std::max(distance(a, b), 1e-300);
        Vec2 y = a + std::clamp(f, 0.0, 1.0) * (b - a);
        // start just downstream of the cut so the forward trace runs one full period
        int hint = -1;
        const Vec2 v = field_.value_extended(y, hint);
        const Vec2 n = rotate90(t);
        y += (dot(v, n) > 0.0 ? 1.0 : -1.0) * 1e-7 * le * n;
        // the outer end lies on the boundary polygon; back off along the cut until inside
        for (int k = 0; k < 40 && !domain_->contains(y); ++k) y -= 1e-3 * le * t;
        double tau = 0.0;
        const auto g = gradients_at(y, &tau);
        period_sum += tau;
        ++period_n;
        *fa = dot(g.grad_a, t);
        *fb = 0.0;
    });
    // shift so the table starts at the disk edge
    ptable_ = tmp;
    ptable_.length = total * 2.0 + 1.0;
    period_ = period_n > 0 ? period_sum / period_n : 0.0;
}

Value Builder::evaluate_periodic(Vec2 x) {
    TraceOptions o;
    o.barriers = &barriers_;
    o.keep_trace = false;
    o.boundary_stops = false;
    const auto r = trace_retry(x, +1, o);
    if (r.stop != TraceStop::Barrier || r.crossings.empty())
        throw Error(ErrorCode::NotSimpleHere, "closed orbit does not return to the periodic cut");
    // arclength of the hit from the center end
    const Vec2 p = r.crossings.back().point;
    double best = 1e300, ell = 0.0;
    for (std::size_t i = 0; i + 1 < pchain_.size(); ++i) {
        double t = 0.0;
        const Vec2 q = closest_on_segment(pchain_[i], pchain_[i + 1], p, &t);
        const double d = distance(p, q);
        if (d < best) {
            best = d;
            ell = pcum_[i] + t * distance(pchain_[i], pchain_[i + 1]);
        }
    }
    Value v;
    v.a = ptable_.a(ell);
    v.b = -r.tau_end;
    return v;
}

ScalarPair Builder::run() {
    classify_points();
    validate_cut_set(cuts_, *domain_);
    auto cm = std::make_shared<CutMesh>(embed_cuts(domain_->mesh(), cuts_));
    for (std::size_t p = 0; p < cm->chains.size(); ++p) chains_.push_back(cm->chain_points(static_cast<int>(p)));
    make_barriers(*cm, opt_.periodic);
    h_a_.assign(cuts_.paths.size(), 0.0);
    h_b_.assign(cuts_.paths.size(), 0.0);

    if (opt_.periodic) {
        build_periodic_table(*cm);
        h_b_[0] = -period_;
    } else {
        const int bp = cuts_.boundary_path();
        if (bp >= 0) {
            const auto& ch = chains_[static_cast<std::size_t>(bp)];
            const Vec2 end = cuts_.paths[static_cast<std::size_t>(bp)].start.is_boundary() ? ch.front() : ch.back();
            anchor_s_ = domain_->boundary().project(end).s;
            have_anchor_ = true;
        }
        build_boundary_table();
        build_circles();
        compute_jumps();
        link_sinks();
    }

    const TriMesh& m = cm->mesh;
    const std::size_t nv = m.vertices.size();
    std::vector<Vec2> side(nv);
    std::vector<double> le(nv, 0.0);
    std::vector<int> cnt(nv, 0);
    for (const auto& t : m.triangles) {
        const Vec2 c = (m.vertices[static_cast<std::size_t>(t[0])] + m.vertices[static_cast<std::size_t>(t[1])] +
                        m.vertices[static_cast<std::size_t>(t[2])]) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const auto v = static_cast<std::size_t>(t[k]);
            side[v] += c - m.vertices[v];
            le[v] += distance(m.vertices[v], m.vertices[static_cast<std::size_t>(t[(k + 1) % 3])]);
            ++cnt[v];
        }
    }
    std::vector<char> on_boundary(nv, 0);
    for (int v : m.boundary_loop) on_boundary[static_cast<std::size_t>(v)] = 1;

    ScalarPair out;
    out.a.assign(nv, 0.0);
    out.b.assign(nv, 0.0);
    out.excised.assign(nv, 0);
    const auto& cps = cuts_.cps;
    for (std::size_t v = 0; v < nv; ++v) {
        const Vec2 x = m.vertices[v];
        const double e = cnt[v] ? le[v] / cnt[v] : domain_->median_edge();
        const bool cut_vertex = cm->on_cut[static_cast<std::size_t>(cm->origin[v])] != 0;
        Vec2 dir = norm(side[v]) > 0.0 ? normalized(side[v]) : Vec2{};
        Vec2 xe = x;
        if (cut_vertex) xe = x + 1e-6 * e * dir;
        else if (on_boundary[v]) xe = x + 1e-9 * e * dir;

        int disk = -1;
        for (std::size_t k = 0; k < cps.size(); ++k)
            if (distance(x, cps[k].position) < radius_[k]) disk = static_cast<int>(k);
        try {
            if (disk >= 0) {
                out.excised[v] = 1;
                ++metrics_.excised_vertices;
                const auto& cp = cps[static_cast<std::size_t>(disk)];
                Vec2 r = xe - cp.position;
                if (norm(r) < 1e-12 * e) {
                    // the critical point itself: step away from the first cut leaving it
                    r = norm(dir) > 0.0 ? dir : Vec2{1.0, 0.0};
                    for (std::size_t p = 0; p < chains_.size(); ++p) {
                        const auto& ch = chains_[p];
                        if (distance(ch.front(), cp.position) < 1e-12 * e) r = -(ch[1] - ch[0]);
                        else if (distance(ch.back(), cp.position) < 1e-12 * e) r = -(ch[ch.size() - 2] - ch.back());
                        else continue;
                        break;
                    }
                }
                const Vec2 y = cp.position + radius_[static_cast<std::size_t>(disk)] * normalized(r);
                const Value val = opt_.periodic ? evaluate_periodic(y) : evaluate(y);
                out.a[v] = val.a;
                out.b[v] = std::numeric_limits<double>::quiet_NaN();
            } else {
                const Value val = opt_.periodic ? evaluate_periodic(xe) : evaluate(xe);
                out.a[v] = val.a;
                out.b[v] = val.b;
                if (xe != x) {
                    // undo the nudge to first order
                    try {
                        const auto g = gradients_at(xe);
                        out.a[v] += dot(g.grad_a, x - xe);
                        out.b[v] += dot(g.grad_b, x - xe);
                    } catch (const Error&) {
                    }
                }
            }
        } catch (const Error& err) {
            if (err.code() == ErrorCode::NotSimpleHere || err.code() == ErrorCode::StagnationNearCritical)
                throw Error(ErrorCode::NotSimpleHere, "vertex " + std::to_string(v) + ": " + err.what());
            throw;
        }
    }

    // inflow transfer: traced values against the integrated table
    if (!opt_.periodic) {
        double lo = 1e300, hi = -1e300;
        for (double a : out.a) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        const double range = std::max(hi - lo, 1e-300);
        double blo = 1e300, bhi = -1e300;
        for (double b : out.b)
            if (std::isfinite(b)) {
                blo = std::min(blo, b);
                bhi = std::max(bhi, b);
            }
        const double brange = std::max(bhi - blo, 1e-300);
        const auto& bpar = domain_->boundary();
        std::vector<double> ea, eb;
        for (std::size_t k = 0; k < table_.pieces(); ++k) {
            if (table_.outflow[k]) continue;
            const double s = bpar.wrap(table_.origin + table_.u0[k] + 0.5 * table_.du[k]);
            const Vec2 x = bpar.point(s) - 1e-7 * domain_->median_edge() * bpar.segment_normal(bpar.segment_at(s));
            try {
                const Value val = evaluate(x);
                if (val.terminal != 0) continue;  // ends in a sink, no boundary counterpart
                ea.push_back(std::fabs(val.a - table_.a(s)) / range);
                eb.push_back(std::fabs(val.b - table_.b(s)) / brange);
            } catch (const Error&) {
            }
        }
        // 90th percentile: inflow samples sitting on a stable separatrix are singular in b
        auto p90 = [](std::vector<double> x) {
            if (x.empty()) return 0.0;
            const auto k = x.begin() + static_cast<std::ptrdiff_t>((x.size() * 9) / 10);
            std::nth_element(x.begin(), k, x.end());
            return *k;
        };
        metrics_.transfer_mismatch_a = p90(ea);
        metrics_.transfer_mismatch_b = p90(eb);
    }

    out.cut_mesh = cm;
    out.h_a = h_a_;
    out.h_b = h_b_;
    out.cps = cps;
    out.radii = radius_;
    out.paths = cuts_.paths;
    out.periodic = opt_.periodic;
    out.boundary = table_;
    out.circles = circles_;
    out.switches = switches_;
    metrics_.switch_points = static_cast<int>(switches_.size());
    out.metrics = metrics_;
    residual_metrics(field_, out);
    return out;
}

}  // namespace

ScalarPair compute_scalar_pair(const VectorField& field, DomainPtr domain, const CutSet& cuts, const ScalarizeOptions& opt) {
    Builder b(field, std::move(domain), cuts, opt);
    return b.run();
}

void residual_metrics(const VectorField& field, ScalarPair& pair) {
    const auto& m = pair.mesh();
    std::vector<double> ra, rb;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        bool skip = false;
        for (int v : tri) skip = skip || pair.excised[static_cast<std::size_t>(v)] || !std::isfinite(pair.a[static_cast<std::size_t>(v)]);
        if (skip) continue;
        const Vec2 c = (m.vertices[static_cast<std::size_t>(tri[0])] + m.vertices[static_cast<std::size_t>(tri[1])] +
                        m.vertices[static_cast<std::size_t>(tri[2])]) / 3.0;
        int hint = -1;
        const Vec2 v = field.value_extended(c, hint);
        const Vec2 ga = pair.grad_a(static_cast<int>(t));
        const double den = norm(v) * norm(ga);
        if (den > 0.0) ra.push_back(std::fabs(dot(v, ga)) / den);
        bool bfin = true;
        for (int k : tri) bfin = bfin && std::isfinite(pair.b[static_cast<std::size_t>(k)]);
        if (bfin) rb.push_back(std::fabs(dot(v, pair.grad_b(static_cast<int>(t))) - 1.0));
    }
    auto med = [](std::vector<double> x) {
        if (x.empty()) return 0.0;
        const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
        std::nth_element(x.begin(), mid, x.end());
        return *mid;
    };
    auto mx = [](const std::vector<double>& x) { return x.empty() ? 0.0 : *std::max_element(x.begin(), x.end()); };
    pair.metrics.residual_a_median = med(ra);
    pair.metrics.residual_a_max = mx(ra);
    pair.metrics.residual_b_median = med(rb);
    pair.metrics.residual_b_max = mx(rb);
    pair.metrics.residual_triangles = static_cast<int>(ra.size());
}

}  // namespace isoflow
