#include "isoflow/integrate.hpp"
#include "isoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace isoflow {

Vec2 TraceStep::at(double tau) const {
    const double th = h != 0.0 ? (tau - t0) / h : 0.0;
    const double th1 = 1.0 - th;
    return rc[0] + th * (rc[1] + th1 * (rc[2] + th * (rc[3] + th1 * rc[4])));
}

Vec2 Trace::position(double tau) const {
    if (steps.empty()) return samples.empty() ? Vec2{} : samples.front().x;
    const bool fwd = steps.front().h > 0.0;
    // steps are ordered by |tau|
    auto it = std::lower_bound(steps.begin(), steps.end(), tau, [fwd](const TraceStep& s, double t) {
        return fwd ? s.t1() < t : s.t1() > t;
    });
    if (it == steps.end()) --it;
    return it->at(tau);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "tau,x,y,speed\n";
    const auto prec = out.precision(17);
    for (const auto& s : trace.samples) out << s.tau << ',' << s.x.x << ',' << s.x.y << ',' << s.speed << '\n';
    out.precision(prec);
}

// ---------------------------------------------------------------------------

BarrierSet::BarrierSet(std::vector<Barrier> barriers, const BBox& box, double cell)
    : barriers_(std::move(barriers)), box_(box) {
    const double w = std::max(box.hi.x - box.lo.x, 1e-300);
    const double h = std::max(box.hi.y - box.lo.y, 1e-300);
    cell_ = std::max(cell, std::max(w, h) / 512.0);
    nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(h / cell_)));
    grid_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t b = 0; b < barriers_.size(); ++b) {
        const auto& c = barriers_[b].chain;
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            const int x0 = std::clamp(static_cast<int>((std::min(c[i].x, c[i + 1].x) - box_.lo.x) / cell_) - 1, 0, nx_ - 1);
            const int x1 = std::clamp(static_cast<int>((std::max(c[i].x, c[i + 1].x) - box_.lo.x) / cell_) + 1, 0, nx_ - 1);
            const int y0 = std::clamp(static_cast<int>((std::min(c[i].y, c[i + 1].y) - box_.lo.y) / cell_) - 1, 0, ny_ - 1);
            const int y1 = std::clamp(static_cast<int>((std::max(c[i].y, c[i + 1].y) - box_.lo.y) / cell_) + 1, 0, ny_ - 1);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    grid_[static_cast<std::size_t>(y) * nx_ + x].emplace_back(static_cast<int>(b), static_cast<int>(i));
        }
    }
}

std::vector<BarrierSet::Hit> BarrierSet::crossings(Vec2 p, Vec2 q) const {
    std::vector<Hit> out;
    if (barriers_.empty()) return out;
    const int x0 = std::clamp(static_cast<int>((std::min(p.x, q.x) - box_.lo.x) / cell_), 0, nx_ - 1);
    const int x1 = std::clamp(static_cast<int>((std::max(p.x, q.x) - box_.lo.x) / cell_), 0, nx_ - 1);
    const int y0 = std::clamp(static_cast<int>((std::min(p.y, q.y) - box_.lo.y) / cell_), 0, ny_ - 1);
    const int y1 = std::clamp(static_cast<int>((std::max(p.y, q.y) - box_.lo.y) / cell_), 0, ny_ - 1);
    std::vector<std::pair<int, int>> cand;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const auto& cell = grid_[static_cast<std::size_t>(y) * nx_ + x];
            cand.insert(cand.end(), cell.begin(), cell.end());
        }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (auto [b, i] : cand) {
        const auto& c = barriers_[b].chain;
        const Vec2 a = c[i];
        const Vec2 d = c[i + 1] - a;
        const double sp = cross(d, p - a);
        const double sq = cross(d, q - a);
        if (sp == 0.0 || (sp > 0.0 && sq > 0.0) || (sp < 0.0 && sq < 0.0)) continue;
        const double t = sp / (sp - sq);
        const Vec2 x = p + t * (q - p);
        double along = dot(x - a, d) / norm2(d);
        const bool last = static_cast<std::size_t>(i) + 2 == c.size();
        if (along < 0.0 || along > 1.0 || (along == 1.0 && !last)) continue;
        out.push_back({b, i, t, along, sp > 0.0 ? 1 : -1});
    }
    std::sort(out.begin(), out.end(), [](const Hit& l, const Hit& r) { return l.t < r.t; });
    return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr int kSubChords = 4;
constexpr int kBisect = 52;
constexpr long kMaxSteps = 2000000;
constexpr int kStagnantSteps = 50;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

}  // namespace

Tracer::Tracer(const VectorField& field, DomainPtr domain) : field_(field), domain_(std::move(domain)) {
    std::vector<double> speeds;
    speeds.reserve(domain_->mesh().vertices.size());
    int hint = -1;
    for (const auto& p : domain_->mesh().vertices) speeds.push_back(norm(field_.value_extended(p, hint)));
    median_speed_ = median_of(speeds);
    if (!(median_speed_ > 0.0)) median_speed_ = 1.0;
    time_cap_ = 50.0 * domain_->bbox().diagonal() / median_speed_;
    eps_v_ = 1e-9 * median_speed_;
    max_step_len_ = 2.0 * domain_->median_edge();
}

TraceResult Tracer::trace(Vec2 x, int direction, const TraceOptions& opt) const {
    const double dir = direction >= 0 ? 1.0 : -1.0;
    int hint = domain_->locate(x);
    if (hint < 0) throw Error(ErrorCode::OutsideDomain, "trace start (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") is outside the domain");

    auto f = [&](Vec2 p, int& h) { return dir * field_.value_extended(p, h); };
    auto inside = [&](Vec2 p, int& h) {
        const int t = domain_->locate(p, h);
        if (t >= 0) h = t;
        return t >= 0;
    };
    auto in_disk = [&](Vec2 p) -> int {
        for (std::size_t i = 0; i < opt.disks.size(); ++i)
            if (norm2(p - opt.disks[i].center) < opt.disks[i].radius * opt.disks[i].radius) return static_cast<int>(i);
        return -1;
    };

    TraceResult res;
    Trace& tr = res.trace;
    Vec2 y = x;
    Vec2 k1 = f(y, hint);
    double speed = norm(k1);
    auto push_sample = [&](double t, Vec2 p, double sp) {
        if (!opt.keep_trace) return;
        int h = hint;
        tr.samples.push_back({dir * t, p, sp, field_.jacobian_extended(p, h)});
    };
    push_sample(0.0, y, speed);
    if (!(speed > eps_v_)) throw Error(ErrorCode::StagnationNearCritical, "field vanishes at the trace start");

    {
        const int d = in_disk(y);
        if (d >= 0) {
            res.stop = TraceStop::Disk;
            res.disk = opt.disks[d].id;
            res.end = y;
            return res;
        }
    }

    const double cap = opt.max_time > 0.0 ? opt.max_time : time_cap_;
    double t = 0.0;
    double h = std::min(0.1 * domain_->median_edge() / speed, cap);
    int stagnant = 0;
    long nsteps = 0;
    Vec2 k2, k3, k4, k5, k6, k7;

    while (true) {
        if (opt.max_time > 0.0 && t >= opt.max_time) {
            res.stop = TraceStop::Time;
            res.tau_end = dir * t;
            res.end = y;
            return res;
        }
        if (t >= cap || ++nsteps > kMaxSteps)
            throw Error(ErrorCode::NotSimpleHere, "trajectory did not reach the boundary within the time cap");

        h = std::min(h, max_step_len_ / std::max(speed, eps_v_));
        if (opt.max_time > 0.0) h = std::min(h, opt.max_time - t);

        // one adaptive attempt loop
        Vec2 y1;
        double err = 0.0;
        int hk = hint;
        for (int attempt = 0;; ++attempt) {
            k2 = f(y + h * (a21 * k1), hk);
            k3 = f(y + h * (a31 * k1 + a32 * k2), hk);
            k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3), hk);
            k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), hk);
            k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), hk);
            y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            k7 = f(y1, hk);
            const Vec2 e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double sx = atol + rtol * std::max(std::fabs(y.x), std::fabs(y1.x));
            const double sy = atol + rtol * std::max(std::fabs(y.y), std::fabs(y1.y));
            err = std::sqrt(0.5 * ((e.x / sx) * (e.x / sx) + (e.y / sy) * (e.y / sy)));
            if (!std::isfinite(err)) err = 1e10;
            if (err <= 1.0 || h < 1e-14 * std::max(1.0, t)) break;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (attempt > 60) break;
        }

        TraceStep st;
        st.t0 = dir * t;
        st.h = dir * h;
        st.rc[0] = y;
        st.rc[1] = y1 - y;
        st.rc[2] = h * k1 - st.rc[1];
        st.rc[3] = st.rc[1] - h * k7 - st.rc[2];
        st.rc[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        auto pos = [&](double th) { return st.at(st.t0 + th * st.h); };

        // events along the step, in order of the sub-chords
        bool stopped = false;
        double th_prev = 0.0;
        Vec2 p_prev = y;
        int h_ev = hint;
        for (int sc = 1; sc <= kSubChords && !stopped; ++sc) {
            const double th = static_cast<double>(sc) / kSubChords;
            const Vec2 p = sc == kSubChords ? y1 : pos(th);
            const bool out = !inside(p, h_ev) && opt.boundary_stops;
            const int disk = in_disk(p);

            double th_event = 2.0;
            TraceStop kind = TraceStop::Boundary;
            if (out) {
                double lo = th_prev, hi = th;
                int hb = hint;
                for (int i = 0; i < kBisect; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (inside(pos(mid), hb)) lo = mid;
                    else hi = mid;
                }
                th_event = hi;
                kind = TraceStop::Boundary;
            }
            if (disk >= 0) {
                const auto& dk = opt.disks[disk];
                double lo = th_prev, hi = th;
                for (int i = 0; i < kBisect; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (norm2(pos(mid) - dk.center) < dk.radius * dk.radius) hi = mid;
                    else lo = mid;
                }
                if (hi < th_event) {
                    th_event = hi;
                    kind = TraceStop::Disk;
                    res.disk = dk.id;
                }
            }
            if (opt.barriers) {
                for (const auto& hit : opt.barriers->crossings(p_prev, p)) {
                    const auto& chain = opt.barriers->barriers()[hit.barrier].chain;
                    const Vec2 a = chain[hit.segment];
                    const Vec2 dseg = chain[hit.segment + 1] - a;
                    // refine on the curved trajectory
                    double lo = th_prev, hi = th;
                    const double s_lo = cross(dseg, pos(lo) - a);
                    for (int i = 0; i < kBisect; ++i) {
                        const double mid = 0.5 * (lo + hi);
                        if ((cross(dseg, pos(mid) - a) > 0.0) == (s_lo > 0.0)) lo = mid;
                        else hi = mid;
                    }
                    const double th_c = 0.5 * (lo + hi);
                    if (th_c >= th_event) break;
                    Crossing c;
                    c.barrier = opt.barriers->barriers()[hit.barrier].id;
                    c.segment = hit.segment;
                    c.tau = st.t0 + th_c * st.h;
                    c.point = pos(th_c);
                    c.along = std::clamp(dot(c.point - a, dseg) / norm2(dseg), 0.0, 1.0);
                    c.sign = hit.sign;
                    res.crossings.push_back(c);
                    if (opt.barriers->barriers()[hit.barrier].stop) {
                        th_event = th_c;
                        kind = TraceStop::Barrier;
                        res.barrier = c.barrier;
                        break;
                    }
                }
            }
            if (th_event <= 1.0) {
                stopped = true;
                if (kind != TraceStop::Disk) res.disk = -1;
                if (kind != TraceStop::Barrier) res.barrier = -1;
                // drop crossings recorded past the event
                while (!res.crossings.empty() && dir * (res.crossings.back().tau - (st.t0 + th_event * st.h)) > 0.0)
                    res.crossings.pop_back();
                Vec2 pe = pos(th_event);
                const double te = t + th_event * h;
                if (kind == TraceStop::Boundary) {
                    const auto pr = domain_->boundary().project(pe);
                    pe = pr.point;
                    res.s = pr.s;
                } else if (kind == TraceStop::Barrier) {
                    pe = res.crossings.back().point;
                }
                // the polynomial stays parametrized by the full step; end_tau() marks the cut
                if (opt.keep_trace) tr.steps.push_back(st);
                res.stop = kind;
                res.tau_end = dir * te;
                res.end = pe;
                int hj = hint;
                if (opt.keep_trace) {
                    tr.samples.push_back({dir * te, pe, norm(field_.value_extended(pe, hj)),
                                          field_.jacobian_extended(pe, hj)});
                }
                return res;
            }
            th_prev = th;
            p_prev = p;
        }

        // accept the full step
        if (opt.keep_trace) tr.steps.push_back(st);
        t += h;
        y = y1;
        k1 = k7;
        hint = h_ev;
        speed = norm(k1);
        push_sample(t, y, speed);
        if (speed < eps_v_) {
            if (++stagnant > kStagnantSteps)
                throw Error(ErrorCode::StagnationNearCritical, "trajectory stagnates near a critical point");
        } else {
            stagnant = 0;
        }
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
}

Vec2 Tracer::flow_map(Vec2 x, double tau) const {
    if (tau == 0.0) {
        if (domain_->locate(x) < 0) throw Error(ErrorCode::OutsideDomain, "point outside the domain");
        return x;
    }
    TraceOptions opt;
    opt.max_time = std::fabs(tau);
    opt.keep_trace = false;
    const auto r = trace(x, tau > 0.0 ? 1 : -1, opt);
    if (r.stop == TraceStop::Boundary)
        throw LeftDomainError(r.tau_end, "trajectory left the domain at tau=" + std::to_string(r.tau_end));
    return r.end;
}

BoundaryHit Tracer::trace_to_boundary(Vec2 x) const {
    BoundaryHit hit;
    try {
        auto fw = trace(x, +1);
        auto bw = trace(x, -1);
        hit.tau1 = fw.tau_end;
        hit.d1 = fw.end;
        hit.s1 = fw.s;
        hit.tau0 = bw.tau_end;
        hit.d0 = bw.end;
        hit.s0 = bw.s;
        hit.forward = std::move(fw.trace);
        hit.backward = std::move(bw.trace);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StagnationNearCritical)
            throw Error(ErrorCode::NotSimpleHere, "trajectory meets a critical point");
        throw;
    }
    return hit;
}

Vec2 flow_map(const VectorField& field, DomainPtr domain, Vec2 x, double tau) {
    return Tracer(field, std::move(domain)).flow_map(x, tau);
}

BoundaryHit trace_to_boundary(const VectorField& field, DomainPtr domain, Vec2 x) {
    return Tracer(field, std::move(domain)).trace_to_boundary(x);
}

// ---------------------------------------------------------------------------

namespace {

// v at a boundary vertex, evaluated without relying on point location ties.
Vec2 boundary_value(const VectorField& field, Vec2 p) {
    int hint = -1;
    return field.value_extended(p, hint);
}

}  // namespace

double boundary_flux(const VectorField& field, const BoundaryParam& boundary, double s) {
    const std::size_t i = boundary.segment_at(s);
    const Vec2 a = boundary.segment_start(i);
    const Vec2 b = boundary.segment_end(i);
    const double len = norm(b - a);
    const double u = len > 0.0 ? std::clamp((boundary.wrap(s) - boundary.cumulative(i)) / len, 0.0, 1.0) : 0.0;
    const Vec2 n = boundary.segment_normal(i);
    return (1.0 - u) * dot(boundary_value(field, a), n) + u * dot(boundary_value(field, b), n);
}

std::vector<SwitchPoint> boundary_switch_points(const VectorField& field, const BoundaryParam& boundary) {
    const std::size_t n = boundary.segment_count();
    const double L = boundary.length();
    std::vector<Vec2> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = boundary_value(field, boundary.points()[i]);

    // f(u) = (1-u) f0 + u f1 on each segment
    std::vector<std::pair<double, double>> f(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 nn = boundary.segment_normal(i);
        f[i] = {dot(vals[i], nn), dot(vals[(i + 1) % n], nn)};
        scale = std::max({scale, std::fabs(f[i].first), std::fabs(f[i].second)});
    }
    const double zero = 1e-14 * std::max(scale, 1e-300);
    auto sgn = [zero](double v) { return v > zero ? 1 : (v < -zero ? -1 : 0); };

    // Sign of flux as a sequence of pieces: (s_begin, s_end, sign). Zero runs are kept as sign 0.
    struct Piece {
        double s0, s1;
        int sign;
    };
    std::vector<Piece> pieces;
    auto add = [&](double s0, double s1, int sign) {
        if (s1 <= s0) return;
        if (!pieces.empty() && pieces.back().sign == sign) pieces.back().s1 = s1;
        else pieces.push_back({s0, s1, sign});
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double sa = boundary.cumulative(i);
        const double len = norm(boundary.segment_end(i) - boundary.segment_start(i));
        const double sb = sa + len;
        const int g0 = sgn(f[i].first), g1 = sgn(f[i].second);
        if (g0 == 0 && g1 == 0) {
            add(sa, sb, 0);
        } else if (g0 == 0) {
            add(sa, sb, g1);
        } else if (g1 == 0) {
            add(sa, sb, g0);
        } else if (g0 == g1) {
            add(sa, sb, g0);
        } else {
            const double u = f[i].first / (f[i].first - f[i].second);
            add(sa, sa + u * len, g0);
            add(sa + u * len, sb, g1);
        }
    }
    // merge wrap-around
    if (pieces.size() > 1 && pieces.front().sign == pieces.back().sign) {
        pieces.front().s0 = pieces.back().s0 - L;
        pieces.pop_back();
    }
    // Zero runs: switch at their midpoint if signs differ across them, else drop.
    std::vector<Piece> nz;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (pieces[k].sign != 0) {
            nz.push_back(pieces[k]);
            continue;
        }
        const int prev = pieces[(k + pieces.size() - 1) % pieces.size()].sign;
        const int next = pieces[(k + 1) % pieces.size()].sign;
        const double mid = 0.5 * (pieces[k].s0 + pieces[k].s1);
        if (prev == next && prev != 0) {
            // tangential touch: absorb
            nz.push_back({pieces[k].s0, pieces[k].s1, prev});
        } else {
            nz.push_back({pieces[k].s0, mid, prev});
            nz.push_back({mid, pieces[k].s1, next});
        }
    }
    std::vector<Piece> merged;
    for (const auto& p : nz) {
        if (!merged.empty() && merged.back().sign == p.sign) merged.back().s1 = p.s1;
        else merged.push_back(p);
    }
    if (merged.size() > 1 && merged.front().sign == merged.back().sign) {
        merged.front().s0 = merged.back().s0 - L;
        merged.pop_back();
    }
    std::vector<SwitchPoint> out;
    if (merged.size() <= 1) return out;
    for (const auto& p : merged) {
        double s = p.s0;
        s = std::fmod(s, L);
        if (s < 0.0) s += L;
        out.push_back({s, p.sign > 0});
    }
    std::sort(out.begin(), out.end(), [](const SwitchPoint& a, const SwitchPoint& b) { return a.s < b.s; });
    std::vector<SwitchPoint> dedup;
    for (const auto& sp : out) {
        if (!dedup.empty() && sp.s - dedup.back().s < 1e-9 * L) continue;
        dedup.push_back(sp);
    }
    if (dedup.size() > 1 && dedup.front().s + L - dedup.back().s < 1e-9 * L) dedup.pop_back();
    return dedup;
}

// ---------------------------------------------------------------------------

TraceNodes trace_nodes(const Trace& trace, int m) {
    TraceNodes nodes;
    nodes.m = m;
    if (trace.steps.empty()) {
        nodes.tau.push_back(0.0);
        nodes.x.push_back(trace.samples.empty() ? Vec2{} : trace.samples.front().x);
        return nodes;
    }
    const double t_end = trace.end_tau();
    nodes.tau.reserve(trace.steps.size() * m + 1);
    nodes.x.reserve(trace.steps.size() * m + 1);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& st = trace.steps[i];
        const double ta = st.t0;
        // the final step may be cut short at an event
        const double tb = i + 1 == trace.steps.size() ? t_end : st.t1();
        for (int k = 0; k < m; ++k) {
            const double tau = ta + (tb - ta) * k / m;
            nodes.tau.push_back(tau);
            nodes.x.push_back(k == 0 && i == 0 ? trace.samples.front().x : st.at(tau));
        }
    }
    nodes.tau.push_back(t_end);
    nodes.x.push_back(trace.samples.back().x);
    return nodes;
}

std::vector<double> cumulative_integral(const TraceNodes& nodes, const std::vector<double>& f) {
    const std::size_t n = nodes.tau.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 2 < n; i += 2) {
        const double h = 0.5 * (nodes.tau[i + 2] - nodes.tau[i]);
        out[i + 1] = out[i] + h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        out[i + 2] = out[i] + h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    return out;
}

double simpson(const TraceNodes& nodes, const std::vector<double>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < nodes.tau.size(); i += 2) {
        const double h = 0.5 * (nodes.tau[i + 2] - nodes.tau[i]);
        sum += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    return sum;
}

}  // namespace isoflow
