// isoflow command-line front end.
#include "isoflow/config.hpp"
#include "isoflow/error.hpp"
#include "isoflow/query.hpp"
#include "isoflow/render.hpp"
#include "isoflow/scalarize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace isoflow;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, ConfigFail = 2, TopologyFail = 3, NumericFail = 4, ValidateFail = 5 };

int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::IOError: return ConfigFail;
    case ErrorCode::UnsupportedCriticalPoint:
    case ErrorCode::UncoveredCriticalPoint:
    case ErrorCode::CyclicCuts:
    case ErrorCode::SelfIntersection:
    case ErrorCode::NotDiskTopology:
    case ErrorCode::DegenerateTriangleField:
    case ErrorCode::GeometryFailure: return TopologyFail;
    case ErrorCode::ValidationError: return ConfigFail;  // rejected input; validate reports its own failures
    default: return NumericFail;
    }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json vec(Vec2 v) { return json::array({v.x, v.y}); }

// NaN and infinities are not JSON
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cp_json(const CriticalPoint& cp) {
    json j;
    j["id"] = cp.id;
    j["position"] = vec(cp.position);
    j["class"] = cp_class_name(cp.cls());
    j["kind"] = cp.cls() == CpClass::Saddle ? "saddle" : cp.is_source() ? "source" : cp.is_sink() ? "sink" : "other";
    j["lambda1"] = json::array({cp.eigen.lambda1.real(), cp.eigen.lambda1.imag()});
    j["lambda2"] = json::array({cp.eigen.lambda2.real(), cp.eigen.lambda2.imag()});
    j["jacobian"] = json::array({cp.jacobian.a, cp.jacobian.b, cp.jacobian.c, cp.jacobian.d});
    if (cp.cls() != CpClass::Unsupported) {
        const LocalScalarModel m = local_model(cp.jacobian);
        j["cut_ray"] = m.has_cut ? vec(m.cut_dir) : json(nullptr);
    } else {
        j["cut_ray"] = nullptr;
    }
    return j;
}

std::string spair_path(const RunConfig& c) { return (fs::path(c.out_dir) / (c.name + ".spair")).string(); }

void ensure_dir(const std::string& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw Error(ErrorCode::IOError, "cannot create " + d + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
}

// Kink of a PL field across a cut edge, |g_left - g_right| / max(|g_left|, |g_right|), set
// against the largest kink across the ordinary edges of the same two triangles. A PL field
// kinks across every edge; the cut only fails when it adds a kink of its own. Edges within
// three excision radii of a critical point are not judged.
struct CutKink {
    double worst = 0.0;   // largest cut kink not explained by its neighbourhood
    double excess = 0.0;  // largest cut kink / max(neighbourhood kink, grad_tol)
};

std::vector<CutKink> cut_kinks(const PairIndex& ix, const std::vector<double>& vals, double grad_tol) {
    const ScalarPair& pair = ix.pair();
    const auto& cm = *pair.cut_mesh;
    const auto& m = cm.mesh;
    auto grad = [&](int t, bool& ok) {
        const auto& tri = m.triangles[static_cast<std::size_t>(t)];
        const Vec2 p0 = m.vertices[static_cast<std::size_t>(tri[0])];
        const Vec2 e1 = m.vertices[static_cast<std::size_t>(tri[1])] - p0, e2 = m.vertices[static_cast<std::size_t>(tri[2])] - p0;
        const double v0 = vals[static_cast<std::size_t>(tri[0])];
        const double d1 = vals[static_cast<std::size_t>(tri[1])] - v0, d2 = vals[static_cast<std::size_t>(tri[2])] - v0;
        ok = std::isfinite(v0) && std::isfinite(d1) && std::isfinite(d2);
        const double det = cross(e1, e2);
        return Vec2{(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
    };
    auto kink = [&](int t, int n, bool& ok) {
        bool o1 = false, o2 = false;
        const Vec2 g1 = grad(t, o1), g2 = grad(n, o2);
        const double den = std::max(norm(g1), norm(g2));
        ok = o1 && o2 && den > 0.0;
        return ok ? norm(g1 - g2) / den : 0.0;
    };
    std::vector<CutKink> out(cm.chains.size());
    for (const auto& e : cm.edges) {
        if (e.left_tri < 0 || e.right_tri < 0) continue;
        // a is under-resolved in the annulus around an excision disk
        const Vec2 mid = 0.5 * (cm.refined.vertices[static_cast<std::size_t>(e.u)] + cm.refined.vertices[static_cast<std::size_t>(e.w)]);
        bool near = false;
        for (std::size_t i = 0; i < pair.cps.size(); ++i) near = near || distance(mid, pair.cps[i].position) < 3.0 * pair.radii[i];
        if (near) continue;
        bool ok = false;
        const double k_cut = kink(e.left_tri, e.right_tri, ok);
        if (!ok) continue;
        double base = 0.0;
        for (int t : {e.left_tri, e.right_tri})
            for (int k = 0; k < 3; ++k) {
                const int n = ix.neighbour(t, k);
                bool okn = false;
                if (n >= 0) base = std::max(base, kink(t, n, okn));
            }
        const double ref = std::max(base, grad_tol);
        auto& r = out[static_cast<std::size_t>(e.path)];
        if (k_cut / ref > r.excess) {
            r.excess = k_cut / ref;
            r.worst = k_cut;
        }
    }
    return out;
}

struct CheckSummary {
    json j = json::array();
    bool cut_fail = false;
};

CheckSummary cut_checks(const ScalarPair& pair, const RunConfig& c) {
    CheckSummary s;
    const PairIndex ix(pair);
    const double floor_a = 1e-3 * pair.a_range();
    // values inside excision disks are radial extensions, not part of the cut construction
    std::vector<double> a = pair.a, b = pair.b;
    for (std::size_t v = 0; v < a.size(); ++v)
        if (pair.excised[v]) a[v] = b[v] = std::nan("");
    for (const auto& [name, vals, h] : {std::tuple{"a", &a, &pair.h_a}, std::tuple{"b", &b, &pair.h_b}}) {
        // the jump tolerance is relative to max(|h|, 1e-3 a-range)
        const auto kinks = cut_kinks(ix, *vals, c.grad_tol);
        for (const auto& r : check_gradient_preserving(*pair.cut_mesh, *vals, *h, 1.0, c.grad_tol)) {
            const double scale = std::max(std::fabs(r.h), floor_a);
            const CutKink& kk = kinks[static_cast<std::size_t>(r.path)];
            const bool jump_ok = r.max_jump_error <= c.jump_tol * scale;
            const bool grad_ok = kk.excess <= 1.5;
            // b is log-singular next to saddle separatrices, so only its jump is enforced
            const bool pass = jump_ok && (grad_ok || std::string(name) == "b");
            json e;
            e["field"] = name;
            e["path"] = r.path;
            e["h"] = r.h;
            e["samples"] = r.samples;
            e["max_jump_error"] = r.max_jump_error;
            e["jump_limit"] = c.jump_tol * scale;
            e["max_gradient_mismatch"] = finite_or_null(r.max_gradient_mismatch);
            e["gradient_mismatch_excess"] = kk.excess;
            e["pass"] = pass;
            if (!pass && std::string(name) == "a") s.cut_fail = true;
            s.j.push_back(e);
        }
    }
    return s;
}

json metrics_json(const ScalarMetrics& m) {
    json j;
    j["residual_a_median"] = m.residual_a_median;
    j["residual_a_max"] = m.residual_a_max;
    j["residual_b_median"] = m.residual_b_median;
    j["residual_b_max"] = m.residual_b_max;
    j["residual_triangles"] = m.residual_triangles;
    j["transfer_mismatch_a"] = m.transfer_mismatch_a;
    j["transfer_mismatch_b"] = m.transfer_mismatch_b;
    j["circle_closure_a"] = m.circle_closure_a;
    j["retried_traces"] = m.retried_traces;
    j["excised_vertices"] = m.excised_vertices;
    return j;
}

// -- compute ---------------------------------------------------------------------------

int cmd_compute(const RunConfig& c) {
    const auto t0 = Clock::now();
    RunInputs in = prepare_inputs(c);
    const double t_prep = seconds_since(t0);
    const auto t1 = Clock::now();
    ScalarPair pair = compute_scalar_pair(*in.field, in.domain, in.cuts, scalarize_options(c));
    const double t_scalar = seconds_since(t1);

    ensure_dir(c.out_dir);
    save_scalar_pair(spair_path(c), pair);

    json r;
    r["name"] = c.name;
    r["field"] = c.field_kind;
    r["mesh_vertices"] = in.domain->mesh().vertices.size();
    r["mesh_triangles"] = in.domain->mesh().triangles.size();
    r["cut_mesh_vertices"] = pair.mesh().vertices.size();
    r["duplicated_vertices"] = pair.cut_mesh->duplicated_count();
    r["periodic"] = pair.periodic;
    r["critical_points"] = json::array();
    for (const auto& cp : pair.cps) r["critical_points"].push_back(cp_json(cp));
    r["cut_edges"] = pair.cut_mesh->edges.size();
    json cuts = json::array();
    for (std::size_t p = 0; p < pair.paths.size(); ++p) {
        const auto& path = pair.paths[p];
        json e;
        e["path"] = p;
        e["start"] = path.start.str();
        e["end"] = path.end.str();
        e["points"] = path.points.size();
        e["h_a"] = pair.h_a[p];
        e["h_b"] = pair.h_b[p];
        cuts.push_back(e);
    }
    r["cuts"] = cuts;
    // a boundary anchor inside an inflow stretch is legal but worth knowing about
    const int bp = in.cuts.boundary_path();
    if (bp >= 0) {
        const auto& path = in.cuts.paths[static_cast<std::size_t>(bp)];
        const double s = path.start.is_boundary() ? path.start.s : path.end.s;
        r["boundary_anchor"] = s;
        r["boundary_anchor_on_inflow"] = boundary_flux(*in.field, in.domain->boundary(), s) < 0.0;
    }
    r["switch_points"] = pair.switches.size();
    r["metrics"] = metrics_json(pair.metrics);
    const CheckSummary cc = cut_checks(pair, c);
    r["cut_checks"] = cc.j;
    r["thresholds_met"] = pair.metrics.residual_a_median <= c.residual_a_median &&
                          pair.metrics.residual_b_median <= c.residual_b_median && !cc.cut_fail;
    write_text((fs::path(c.out_dir) / (c.name + ".report.json")).string(), r.dump(2) + "\n");

    json timing;
    timing["prepare_s"] = t_prep;
    timing["scalarize_s"] = t_scalar;
    timing["total_s"] = seconds_since(t0);
    write_text((fs::path(c.out_dir) / (c.name + ".timing.json")).string(), timing.dump(2) + "\n");

    std::cout << "wrote " << spair_path(c) << "\n";
    std::cout << "critical points " << pair.cps.size() << ", cut edges " << pair.cut_mesh->edges.size() << ", residual a "
              << num(pair.metrics.residual_a_median) << ", residual b " << num(pair.metrics.residual_b_median) << "\n";
    return Ok;
}

// -- critical --------------------------------------------------------------------------

int cmd_critical(const RunConfig& c, bool as_json) {
    const auto field = make_field(c);
    const auto cps = find_critical_points(*field);
    if (as_json) {
        json j = json::array();
        for (const auto& cp : cps) j.push_back(cp_json(cp));
        std::cout << j.dump(2) << "\n";
        return Ok;
    }
    std::printf("%4s %12s %12s %-12s %-8s %24s %24s %22s\n", "id", "x", "y", "class", "kind", "lambda1", "lambda2", "cut_ray");
    for (const auto& cp : cps) {
        const json j = cp_json(cp);
        char l1[64], l2[64], ray[64] = "-";
        std::snprintf(l1, sizeof l1, "%.5g%+.5gi", cp.eigen.lambda1.real(), cp.eigen.lambda1.imag());
        std::snprintf(l2, sizeof l2, "%.5g%+.5gi", cp.eigen.lambda2.real(), cp.eigen.lambda2.imag());
        if (!j["cut_ray"].is_null()) std::snprintf(ray, sizeof ray, "(%.4f, %.4f)", j["cut_ray"][0].get<double>(), j["cut_ray"][1].get<double>());
        std::printf("%4d %12.6f %12.6f %-12s %-8s %24s %24s %22s\n", cp.id, cp.position.x, cp.position.y, cp_class_name(cp.cls()),
                    j["kind"].get<std::string>().c_str(), l1, l2, ray);
    }
    return Ok;
}

// -- query -----------------------------------------------------------------------------

json crossings_json(const std::vector<CutCrossing>& cs) {
    json j = json::array();
    for (const auto& c : cs) j.push_back({{"path", c.path}, {"sign", c.sign}, {"point", vec(c.point)}});
    return j;
}

int cmd_advect(const RunConfig& c, Vec2 x, double tau) {
    const ScalarPair pair = load_scalar_pair(spair_path(c));
    const PairIndex ix(pair);
    const FlowQueryResult r = advect_lookup(ix, x, tau);
    json j;
    j["query"] = "advect";
    j["x"] = vec(x);
    j["tau"] = tau;
    j["out_of_domain"] = r.out_of_domain;
    j["endpoint"] = vec(r.endpoint);
    j["tau_exit"] = r.tau_exit;
    j["crossings"] = crossings_json(r.crossings);
    j["multiplicities"] = r.multiplicities(pair.paths.size());
    std::cout << j.dump() << "\n";
    return Ok;
}

int cmd_connect(const RunConfig& c, Vec2 x1, Vec2 x2) {
    const ScalarPair pair = load_scalar_pair(spair_path(c));
    const PairIndex ix(pair);
    const ConnectivityResult r = connectivity(ix, x1, x2);
    json j;
    j["query"] = "connect";
    j["x1"] = vec(x1);
    j["x2"] = vec(x2);
    j["connected"] = r.connected;
    j["side"] = side_name(r.side);
    j["distance"] = r.distance;
    j["delta_tau"] = r.delta_tau;
    j["crossed_cut"] = r.crossed_cut;
    j["crossings"] = crossings_json(r.crossings);
    std::cout << j.dump() << "\n";
    return Ok;
}

// -- render ----------------------------------------------------------------------------

int cmd_render(const RunConfig& c, const std::string& what, int threads) {
    ensure_dir(c.out_dir);
    const auto base = fs::path(c.out_dir) / c.name;
    const bool all = what == "all";
    if (all || what == "lic") {
        const auto field = make_field(c);
        LicOptions o;
        o.width = o.height = c.lic_size;
        o.kernel_half_length = c.lic_half_length;
        o.seed = c.seed;
        o.threads = threads;
        write_png(lic_image(*field, field->domain()->bbox(), o), base.string() + ".lic.png");
        std::cout << "wrote " << base.string() << ".lic.png\n";
    }
    if (all || what == "height" || what == "isolines") {
        const ScalarPair pair = load_scalar_pair(spair_path(c));
        if (all || what == "height") {
            export_height_field(pair, base.string() + ".a.obj", {FieldSel::A, 0.0});
            export_height_field(pair, base.string() + ".b.obj", {FieldSel::B, 0.0});
            std::cout << "wrote " << base.string() << ".a.obj, " << base.string() << ".b.obj\n";
        }
        if (all || what == "isolines") {
            const PairIndex ix(pair);
            save_isoline_svg(ix, c.levels, base.string() + ".isolines.svg");
            std::cout << "wrote " << base.string() << ".isolines.svg\n";
        }
    }
    return Ok;
}

// -- bench -----------------------------------------------------------------------------

int cmd_bench(const RunConfig& c, int n, const std::string& out_path) {
    const auto field = make_field(c);
    const DomainPtr dom = field->domain();
    const ScalarPair pair = load_scalar_pair(spair_path(c));
    const PairIndex ix(pair);

    // typical transit time: a tenth of the diagonal at the median vertex speed
    std::vector<double> speeds;
    for (Vec2 v : field->vectors()) speeds.push_back(norm(v));
    std::nth_element(speeds.begin(), speeds.begin() + static_cast<long>(speeds.size() / 2), speeds.end());
    const double speed = std::max(speeds[speeds.size() / 2], 1e-12);
    const double tau_max = 0.1 * dom->bbox().diagonal() / speed;

    std::mt19937_64 rng(c.seed);
    auto uniform = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const BBox box = dom->bbox();

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error(ErrorCode::IOError, "cannot write " + out_path);
        out = &file;
    }
    *out << "x,y,tau,err,lookup_ns,rk_ns\n";
    int rows = 0, skipped = 0, failed = 0;
    for (int q = 0; q < n; ++q) {
        const Vec2 x{box.lo.x + uniform() * (box.hi.x - box.lo.x), box.lo.y + uniform() * (box.hi.y - box.lo.y)};
        const double tau = uniform() * tau_max;
        Vec2 ref, got;
        long long rk_ns = 0, lookup_ns = 0;
        try {
            if (!dom->contains(x)) throw Error(ErrorCode::OutOfDomain, "start outside");
            auto t0 = Clock::now();
            ref = flow_map(*field, dom, x, tau);
            rk_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
            t0 = Clock::now();
            FlowQueryResult r;
            try {
                r = advect_lookup(ix, x, tau);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::EntersExcisedRegion) throw;
                // the reference exists but the isoline walk gave up: counted, not hidden
                std::cerr << "bench: lookup failed at " << num(x.x) << ' ' << num(x.y) << " tau " << num(tau) << ": " << e.what() << "\n";
                ++failed;
                continue;
            }
            lookup_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
            if (r.out_of_domain) throw Error(ErrorCode::OutOfDomain, "isoline leaves first");
            got = r.endpoint;
        } catch (const Error& e) {
            const auto code = e.code();
            if (code == ErrorCode::OutOfDomain || code == ErrorCode::LeftDomain || code == ErrorCode::EntersExcisedRegion ||
                code == ErrorCode::OutsideDomain || code == ErrorCode::StagnationNearCritical) {
                ++skipped;
                continue;
            }
            throw;
        }
        *out << num(x.x) << ',' << num(x.y) << ',' << num(tau) << ',' << num(norm(got - ref)) << ',' << lookup_ns << ',' << rk_ns << "\n";
        ++rows;
    }
    std::cerr << "bench: " << rows << " rows, " << skipped << " skipped (out of domain or excised), " << failed << " lookup failures\n";
    return failed ? NumericFail : Ok;
}

// -- validate --------------------------------------------------------------------------

int cmd_validate(const RunConfig& c, bool recompute) {
    ScalarPair pair = load_scalar_pair(spair_path(c));
    const auto& m = pair.mesh();
    int failed = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << "\n";
        if (!ok) ++failed;
    };

    // structural invariants
    const std::size_t nv = m.vertices.size();
    report("sizes", pair.a.size() == nv && pair.b.size() == nv && pair.excised.size() == nv &&
                        pair.h_a.size() == pair.paths.size() && pair.h_b.size() == pair.paths.size() &&
                        pair.cut_mesh->chains.size() == pair.paths.size(),
           "");
    int undefined_a = 0;
    for (std::size_t v = 0; v < nv; ++v)
        if (!pair.excised[v] && !(std::isfinite(pair.a[v]) && std::isfinite(pair.b[v]))) ++undefined_a;
    report("defined outside excision disks", undefined_a == 0, std::to_string(undefined_a) + " undefined vertices");
    bool tree = pair.paths.size() == pair.cps.size() || pair.cps.empty();
    int boundary_anchors = 0;
    for (const auto& p : pair.paths) boundary_anchors += p.start.is_boundary() + p.end.is_boundary();
    tree = tree && (pair.paths.empty() ? boundary_anchors == 0 : boundary_anchors == 1);
    report("cut tree", tree, std::to_string(pair.paths.size()) + " paths, " + std::to_string(boundary_anchors) + " boundary anchors");

    // cut conditions
    const CheckSummary cc = cut_checks(pair, c);
    for (const auto& e : cc.j) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "jump error %.3g (limit %.3g), gradient mismatch %s, %.3g x the neighbouring kinks (limit 1.5)",
                      e["max_jump_error"].get<double>(), e["jump_limit"].get<double>(), e["max_gradient_mismatch"].dump().c_str(),
                      e["gradient_mismatch_excess"].get<double>());
        report("cut " + e["field"].get<std::string>() + std::to_string(e["path"].get<int>()), e["pass"].get<bool>(), buf);
    }

    // residuals against the field the config describes
    const auto field = make_field(c);
    residual_metrics(*field, pair);
    report("residual a", pair.metrics.residual_a_median <= c.residual_a_median,
           "median " + num(pair.metrics.residual_a_median) + " (limit " + num(c.residual_a_median) + ")");
    report("residual b", pair.metrics.residual_b_median <= c.residual_b_median,
           "median " + num(pair.metrics.residual_b_median) + " (limit " + num(c.residual_b_median) + ")");

    if (recompute) {
        // the construction is deterministic, so a fresh run must agree to rounding
        RunInputs in = prepare_inputs(c);
        const ScalarPair fresh = compute_scalar_pair(*in.field, in.domain, in.cuts, scalarize_options(c));
        int bad = 0;
        if (fresh.a.size() != nv) {
            bad = -1;
        } else {
            const double tol = 1e-9 * std::max(pair.a_range(), 1e-300);
            for (std::size_t v = 0; v < nv; ++v) {
                const bool na = std::isnan(fresh.a[v]) != std::isnan(pair.a[v]);
                const bool nb = std::isnan(fresh.b[v]) != std::isnan(pair.b[v]);
                if (na || nb || std::fabs(fresh.a[v] - pair.a[v]) > tol || std::fabs(fresh.b[v] - pair.b[v]) > tol) ++bad;
            }
        }
        report("recompute", bad == 0, bad < 0 ? "mesh differs" : std::to_string(bad) + " vertices differ");
    }

    if (failed) {
        std::cout << failed << " check(s) failed\n" << error_name(ErrorCode::ValidationError) << "\n";
        return ValidateFail;
    }
    std::cout << "all checks passed\n";
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isoflow: stream lines as isolines of two scalar fields"};
    app.require_subcommand(1);
    app.fallthrough();  // --threads may follow the subcommand
    std::string config_path;
    int threads = 0;
    app.add_option("--threads", threads, "cap on worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

    auto with_config = [&](CLI::App* sub) { sub->add_option("-c,--config", config_path, "run config (INI)")->required(); };

    auto* compute = app.add_subcommand("compute", "critical points, cuts and the scalar pair; writes .spair and a report");
    with_config(compute);

    auto* critical = app.add_subcommand("critical", "list critical points");
    with_config(critical);
    bool critical_json = false;
    critical->add_flag("--json", critical_json, "JSON instead of a table");

    auto* query = app.add_subcommand("query", "isoline lookups on a computed pair");
    query->require_subcommand(1);
    auto* advect = query->add_subcommand("advect", "endpoint after time tau");
    with_config(advect);
    double qx = 0, qy = 0, tau = 0, x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    advect->add_option("--x", qx)->required();
    advect->add_option("--y", qy)->required();
    advect->add_option("--tau", tau)->required();
    auto* connect = query->add_subcommand("connect", "does the stream line through x1 pass x2");
    with_config(connect);
    connect->add_option("--x1", x1)->required();
    connect->add_option("--y1", y1)->required();
    connect->add_option("--x2", x2)->required();
    connect->add_option("--y2", y2)->required();

    auto* render = app.add_subcommand("render", "LIC image, height fields and isoline drawing");
    with_config(render);
    std::string what = "all";
    render->add_option("--what", what, "lic | height | isolines | all")->check(CLI::IsMember({"lic", "height", "isolines", "all"}));

    auto* bench = app.add_subcommand("bench", "lookup against integration; CSV on stdout");
    with_config(bench);
    int n_queries = 100;
    std::string bench_out;
    bench->add_option("-n,--queries", n_queries)->check(CLI::PositiveNumber);
    bench->add_option("-o,--out", bench_out, "CSV file instead of stdout");

    auto* validate = app.add_subcommand("validate", "re-check a computed pair");
    with_config(validate);
    bool no_recompute = false;
    validate->add_flag("--no-recompute", no_recompute, "skip the comparison against a fresh computation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc != 0) std::cerr << "ConfigError\n";
        return rc == 0 ? 0 : ConfigFail;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (threads > 0) cfg.threads = threads;
        if (compute->parsed()) return cmd_compute(cfg);
        if (critical->parsed()) return cmd_critical(cfg, critical_json);
        if (advect->parsed()) return cmd_advect(cfg, {qx, qy}, tau);
        if (connect->parsed()) return cmd_connect(cfg, {x1, y1}, {x2, y2});
        if (render->parsed()) return cmd_render(cfg, what, cfg.threads);
        if (bench->parsed()) return cmd_bench(cfg, n_queries, bench_out);
        if (validate->parsed()) return cmd_validate(cfg, !no_recompute);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n" << e.name() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n" << error_name(ErrorCode::Undefined) << "\n";
        return NumericFail;
    }
    return ConfigFail;
}
