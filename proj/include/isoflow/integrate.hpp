#pragma once

#include "isoflow/field.hpp"
#include "isoflow/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

namespace isoflow {

/// One accepted Runge-Kutta step with its dense-output polynomial.
struct TraceStep {
    double t0 = 0.0;
    double h = 0.0;  // signed: negative for backward traces
    Vec2 rc[5];

    double t1() const { return t0 + h; }
    Vec2 at(double tau) const;
};

struct TraceSample {
    double tau = 0.0;
    Vec2 x;
    double speed = 0.0;
    Mat2 jacobian;
};

/// Sampled trajectory phi(x, tau). Samples sit at accepted steps and at the end event.
struct Trace {
    std::vector<TraceSample> samples;
    std::vector<TraceStep> steps;

    double end_tau() const { return samples.empty() ? 0.0 : samples.back().tau; }
    /// Dense-output position; tau must lie between 0 and end_tau().
    Vec2 position(double tau) const;
};

void write_trace_csv(std::ostream& out, const Trace& trace);

/// Polylines a trace may cross. Crossings are recorded with a side sign; a barrier
/// flagged `stop` ends the trace at its first crossing.
struct Barrier {
    int id = -1;
    std::vector<Vec2> chain;
    bool stop = false;
};

struct Crossing {
    int barrier = -1;
    int segment = -1;
    double tau = 0.0;
    Vec2 point;
    double along = 0.0;  // parameter on the crossed segment
    int sign = 0;        // +1: left to right of the barrier direction
};

class BarrierSet {
public:
    BarrierSet() = default;
    BarrierSet(std::vector<Barrier> barriers, const BBox& box, double cell);

    const std::vector<Barrier>& barriers() const { return barriers_; }
    bool empty() const { return barriers_.empty(); }

    /// Crossings of segment p->q, ordered along it. `t` of each is the fraction on p->q.
    struct Hit {
        int barrier;
        int segment;
        double t;
        double along;
        int sign;
    };
    std::vector<Hit> crossings(Vec2 p, Vec2 q) const;

private:
    std::vector<Barrier> barriers_;
    BBox box_;
    double cell_ = 1.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::pair<int, int>>> grid_;
};

/// Disk the trace is not allowed to enter (excised critical point).
struct StopDisk {
    int id = -1;
    Vec2 center;
    double radius = 0.0;
};

enum class TraceStop { Boundary, Disk, Barrier, Time };

struct TraceResult {
    TraceStop stop = TraceStop::Boundary;
    double tau_end = 0.0;
    Vec2 end;
    double s = std::numeric_limits<double>::quiet_NaN();  // boundary parameter for Boundary stops
    int disk = -1;
    int barrier = -1;
    std::vector<Crossing> crossings;
    Trace trace;
};

struct TraceOptions {
    std::vector<StopDisk> disks;
    const BarrierSet* barriers = nullptr;
    bool keep_trace = true;
    /// Stop at exactly this |tau| instead of failing on the time cap (0: off).
    double max_time = 0.0;
    /// When false the trace runs on past the boundary using the extended field.
    bool boundary_stops = true;
};

/// (tau0, tau1, d0, d1, s0, s1) plus both half-traces.
struct BoundaryHit {
    double tau0 = 0.0;
    double tau1 = 0.0;
    Vec2 d0;
    Vec2 d1;
    double s0 = 0.0;
    double s1 = 0.0;
    Trace backward;
    Trace forward;
};

/// Adaptive Dormand-Prince 5(4) streamline integrator on a domain.
class Tracer {
public:
    /// Keeps a reference to `field`; it must outlive the tracer.
    Tracer(const VectorField& field, DomainPtr domain);
    Tracer(VectorField&&, DomainPtr) = delete;

    const VectorField& field() const { return field_; }
    const DomainPtr& domain() const { return domain_; }
    double median_speed() const { return median_speed_; }
    double time_cap() const { return time_cap_; }
    double stagnation_speed() const { return eps_v_; }

    double rtol = 1e-8;
    double atol = 1e-10;

    /// Integrates along +v (direction +1) or -v (direction -1) until the boundary,
    /// a stop disk, a stop barrier or max_time. Throws NotSimpleHere on the time cap
    /// or stagnation.
    TraceResult trace(Vec2 x, int direction, const TraceOptions& opt = {}) const;

    /// phi(x, tau). Throws LeftDomain (with the exit time) or StagnationNearCritical.
    Vec2 flow_map(Vec2 x, double tau) const;

    BoundaryHit trace_to_boundary(Vec2 x) const;

private:
    const VectorField& field_;
    DomainPtr domain_;
    double median_speed_ = 0.0;
    double time_cap_ = 0.0;
    double eps_v_ = 0.0;
    double max_step_len_ = 0.0;
};

Vec2 flow_map(const VectorField& field, DomainPtr domain, Vec2 x, double tau);
BoundaryHit trace_to_boundary(const VectorField& field, DomainPtr domain, Vec2 x);

struct SwitchPoint {
    double s = 0.0;
    bool to_outflow = false;  // label of the interval that starts here
};

/// Parameters where v.n changes sign along the boundary, in increasing s. v is taken
/// linear on each boundary segment.
std::vector<SwitchPoint> boundary_switch_points(const VectorField& field, const BoundaryParam& boundary);

/// v.n at boundary parameter s, evaluated from the segment's linear restriction.
double boundary_flux(const VectorField& field, const BoundaryParam& boundary, double s);

// -- quadrature along traces ----------------------------------------------------

/// Nodes of a trace: every step split into m equal pieces (m even), so
/// nodes 2k, 2k+1, 2k+2 of one step form Simpson panels.
struct TraceNodes {
    std::vector<double> tau;
    std::vector<Vec2> x;
    int m = 2;
};
TraceNodes trace_nodes(const Trace& trace, int m);

/// Cumulative integral of f over the nodes, starting at 0. Even nodes use Simpson,
/// odd nodes the (5, 8, -1)/12 rule on the containing panel.
std::vector<double> cumulative_integral(const TraceNodes& nodes, const std::vector<double>& f);
double simpson(const TraceNodes& nodes, const std::vector<double>& f);

}  // namespace isoflow
