#include "isoflow/config.hpp"
#include "isoflow/error.hpp"
#include "isoflow/field_io.hpp"
#include "isoflow/meshgen.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace isoflow {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::ConfigError, key + ": " + why);
}

double to_double(const std::string& key, std::string v) {
    // strip brackets left over from array syntax
    std::erase_if(v, [](char c) { return c == '[' || c == ']' || c == ' ' || c == '"'; });
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(d)) bad(key, "expected a number, got '" + v + "'");
    return d;
}

// One config entry: section path joined with '.', raw inputs.
using Table = std::map<std::string, std::vector<std::string>>;

std::vector<double> numbers(const Table& t, const std::string& key) {
    std::vector<double> out;
    for (const auto& in : t.at(key)) {
        std::stringstream ss(in);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::erase_if(tok, [](char c) { return c == '[' || c == ']' || c == ' '; });
            if (!tok.empty()) out.push_back(to_double(key, tok));
        }
    }
    return out;
}

std::vector<Vec2> points(const Table& t, const std::string& key) {
    const auto v = numbers(t, key);
    if (v.size() % 2 != 0) bad(key, "expected x,y pairs");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
    return out;
}

Vec2 point(const Table& t, const std::string& key) {
    const auto p = points(t, key);
    if (p.size() != 1) bad(key, "expected one x,y pair");
    return p[0];
}

std::string word(const Table& t, const std::string& key) {
    const auto& v = t.at(key);
    if (v.size() != 1) bad(key, "expected a single value");
    std::string s = v[0];
    std::erase_if(s, [](char c) { return c == '"'; });
    return s;
}

double number(const Table& t, const std::string& key) {
    const auto v = numbers(t, key);
    if (v.size() != 1) bad(key, "expected a single number");
    return v[0];
}

int integer(const Table& t, const std::string& key) {
    const double d = number(t, key);
    if (d != std::floor(d) || std::fabs(d) > 1e9) bad(key, "expected an integer");
    return static_cast<int>(d);
}

bool boolean(const Table& t, const std::string& key) {
    const std::string w = word(t, key);
    if (w == "true" || w == "1" || w == "yes" || w == "on") return true;
    if (w == "false" || w == "0" || w == "no" || w == "off") return false;
    bad(key, "expected true or false");
}

CutAnchor anchor(const Table& t, const std::string& key) {
    const std::string w = word(t, key);
    const auto colon = w.find(':');
    if (colon == std::string::npos) bad(key, "expected cp:<index> or boundary:<s>");
    const std::string kind = w.substr(0, colon), val = w.substr(colon + 1);
    if (kind == "cp") {
        const double d = to_double(key, val);
        if (d < 0 || d != std::floor(d)) bad(key, "critical point index must be a non-negative integer");
        return CutAnchor::critical(static_cast<int>(d));
    }
    if (kind == "boundary") return CutAnchor::boundary(to_double(key, val));
    bad(key, "unknown anchor kind '" + kind + "'");
}

RunConfig from_items(const std::vector<CLI::ConfigItem>& items) {
    Table t;
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--") continue;
        std::string key;
        for (const auto& p : it.parents) key += p + ".";
        key += it.name;
        if (t.count(key)) bad(key, "given twice");
        t[key] = it.inputs;
    }

    static const std::vector<std::string> known = {
        "field.kind", "field.file", "field.vector", "field.matrix", "field.offset", "field.nodes", "field.node_angles",
        "field.saddles", "field.scale", "mesh.shape", "mesh.lo", "mesh.hi", "mesh.nx", "mesh.ny", "mesh.vertices",
        "mesh.center", "mesh.radius", "mesh.boundary_n", "mesh.rings", "cuts.mode", "tolerances.rtol", "tolerances.atol",
        "tolerances.eps_factor", "tolerances.periodic", "tolerances.circle_samples", "tolerances.residual_a_median",
        "tolerances.residual_b_median", "tolerances.jump_tol", "tolerances.grad_tol", "tolerances.transfer_tol",
        "output.dir", "output.name", "output.seed", "output.lic_size", "output.lic_half_length", "output.levels",
        "output.threads"};
    std::map<std::string, std::map<std::string, std::string>> cut_sections;  // name -> key -> full key
    for (const auto& [key, v] : t) {
        if (key.rfind("cuts.", 0) == 0 && key != "cuts.mode") {
            const auto dot = key.find('.', 5);
            if (dot == std::string::npos) bad(key, "cut entries belong in a [cuts.<name>] section");
            const std::string name = key.substr(5, dot - 5), field = key.substr(dot + 1);
            if (field != "points" && field != "anchor_start" && field != "anchor_end") bad(key, "unknown cut key");
            cut_sections[name][field] = key;
            continue;
        }
        if (std::find(known.begin(), known.end(), key) == known.end()) bad(key, "unknown key");
    }

    RunConfig c;
    auto has = [&](const char* k) { return t.count(k) > 0; };
    if (has("field.kind")) c.field_kind = word(t, "field.kind");
    static const std::vector<std::string> kinds = {"file", "constant", "linear", "composite", "fig10", "fig11"};
    if (std::find(kinds.begin(), kinds.end(), c.field_kind) == kinds.end()) bad("field.kind", "unknown kind '" + c.field_kind + "'");
    if (has("field.file")) c.field_file = word(t, "field.file");
    if (c.field_kind == "file" && c.field_file.empty()) bad("field.file", "required for kind = file");
    if (c.field_kind != "file" && !c.field_file.empty()) bad("field.file", "only one field source may be given");
    if (has("field.vector")) c.constant = point(t, "field.vector");
    if (has("field.matrix")) {
        const auto m = numbers(t, "field.matrix");
        if (m.size() != 4) bad("field.matrix", "expected four numbers a, b, c, d");
        c.matrix = {m[0], m[1], m[2], m[3]};
    }
    if (has("field.offset")) c.offset = point(t, "field.offset");
    if (has("field.nodes")) c.nodes = points(t, "field.nodes");
    if (has("field.saddles")) c.saddles = points(t, "field.saddles");
    if (has("field.node_angles")) c.node_angles = numbers(t, "field.node_angles");
    if (has("field.scale")) c.scale = number(t, "field.scale");
    if (c.field_kind == "composite" && c.nodes.size() != c.node_angles.size()) bad("field.node_angles", "one angle per node");

    if (has("mesh.shape")) c.mesh_shape = word(t, "mesh.shape");
    if (c.mesh_shape != "square" && c.mesh_shape != "disk") bad("mesh.shape", "expected square or disk");
    if (has("mesh.lo")) c.lo = point(t, "mesh.lo");
    if (has("mesh.hi")) c.hi = point(t, "mesh.hi");
    if (has("mesh.nx")) c.nx = integer(t, "mesh.nx");
    if (has("mesh.ny")) c.ny = integer(t, "mesh.ny");
    if (has("mesh.vertices")) c.vertices = integer(t, "mesh.vertices");
    if (has("mesh.center")) c.center = point(t, "mesh.center");
    if (has("mesh.radius")) c.radius = number(t, "mesh.radius");
    if (has("mesh.boundary_n")) c.boundary_n = integer(t, "mesh.boundary_n");
    if (has("mesh.rings")) c.rings = integer(t, "mesh.rings");
    if (c.nx < 1 || c.ny < 1 || c.boundary_n < 3 || c.rings < 1 || c.vertices < 0) bad("mesh", "resolution out of range");
    if (!(c.hi.x > c.lo.x && c.hi.y > c.lo.y)) bad("mesh.hi", "must exceed mesh.lo");
    if (!(c.radius > 0.0)) bad("mesh.radius", "must be positive");

    if (has("cuts.mode")) c.cut_mode = word(t, "cuts.mode");
    if (c.cut_mode != "auto" && c.cut_mode != "manual") bad("cuts.mode", "expected auto or manual");
    for (const auto& [name, keys] : cut_sections) {
        for (const char* need : {"points", "anchor_start", "anchor_end"})
            if (!keys.count(need)) bad("cuts." + name, std::string("missing ") + need);
        CutPath p;
        p.points = points(t, keys.at("points"));
        if (p.points.size() < 2) bad(keys.at("points"), "a cut needs at least two points");
        p.start = anchor(t, keys.at("anchor_start"));
        p.end = anchor(t, keys.at("anchor_end"));
        c.manual_cuts.push_back(std::move(p));
    }
    if (c.cut_mode == "auto" && !c.manual_cuts.empty()) bad("cuts.mode", "cut sections given but mode is auto");

    auto positive = [&](const char* key, double& dst) {
        if (!has(key)) return;
        dst = number(t, key);
        if (!(dst > 0.0)) bad(key, "must be positive");
    };
    positive("tolerances.rtol", c.rtol);
    positive("tolerances.atol", c.atol);
    positive("tolerances.eps_factor", c.eps_factor);
    positive("tolerances.residual_a_median", c.residual_a_median);
    positive("tolerances.residual_b_median", c.residual_b_median);
    positive("tolerances.jump_tol", c.jump_tol);
    positive("tolerances.grad_tol", c.grad_tol);
    positive("tolerances.transfer_tol", c.transfer_tol);
    if (has("tolerances.periodic")) c.periodic = boolean(t, "tolerances.periodic");
    if (has("tolerances.circle_samples")) c.circle_samples = integer(t, "tolerances.circle_samples");
    if (c.circle_samples < 16) bad("tolerances.circle_samples", "at least 16");

    if (has("output.dir")) c.out_dir = word(t, "output.dir");
    if (has("output.name")) c.name = word(t, "output.name");
    if (has("output.seed")) {
        const double s = number(t, "output.seed");
        if (s < 0 || s != std::floor(s)) bad("output.seed", "expected a non-negative integer");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (has("output.lic_size")) c.lic_size = integer(t, "output.lic_size");
    if (has("output.lic_half_length")) c.lic_half_length = integer(t, "output.lic_half_length");
    if (has("output.levels")) c.levels = integer(t, "output.levels");
    if (has("output.threads")) c.threads = integer(t, "output.threads");
    if (c.lic_size < 1 || c.lic_half_length < 0 || c.levels < 0 || c.threads < 0) bad("output", "value out of range");
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    return from_items(items);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::shared_ptr<const PLVectorField> make_field(const RunConfig& c) {
    if (c.field_kind == "file") return std::make_shared<PLVectorField>(load_field(c.field_file));
    TriMesh mesh;
    if (c.mesh_shape == "disk") mesh = disk_mesh(c.center, c.radius, c.boundary_n, c.rings);
    else if (c.vertices > 0) mesh = square_mesh_with_vertices(c.lo, c.hi, c.vertices);
    else mesh = square_mesh(c.lo, c.hi, c.nx, c.ny);
    auto dom = make_domain(std::move(mesh));
    std::optional<AnalyticField> f;
    if (c.field_kind == "constant") f = AnalyticField::constant(c.constant);
    else if (c.field_kind == "linear") f = AnalyticField::linear(c.matrix, c.offset);
    else if (c.field_kind == "composite") f = AnalyticField::composite(c.nodes, c.node_angles, c.saddles, c.scale);
    else if (c.field_kind == "fig10") f = three_sources_one_saddle();
    else f = two_sources_two_sinks_two_saddles();
    return std::make_shared<PLVectorField>(sample_field(*f, dom));
}

RunInputs prepare_inputs(const RunConfig& c) {
    RunInputs in;
    in.field = make_field(c);
    in.domain = in.field->domain();
    in.cps = find_critical_points(*in.field);
    if (c.cut_mode == "manual") in.cuts = place_cuts_manual(c.manual_cuts, in.cps, *in.domain);
    else in.cuts = place_cuts_auto(in.cps, *in.domain);
    return in;
}

ScalarizeOptions scalarize_options(const RunConfig& c) {
    ScalarizeOptions o;
    o.eps_factor = c.eps_factor;
    o.periodic = c.periodic;
    o.circle_samples = c.circle_samples;
    o.transfer_tol = c.transfer_tol;
    o.rtol = c.rtol;
    o.atol = c.atol;
    return o;
}

}  // namespace isoflow
