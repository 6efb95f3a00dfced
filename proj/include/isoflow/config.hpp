#pragma once

#include "isoflow/critical.hpp"
#include "isoflow/cuts.hpp"
#include "isoflow/field.hpp"
#include "isoflow/scalarize.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace isoflow {

/// Everything a run needs; read from an INI file (see docs/config.md).
struct RunConfig {
    // [field]
    std::string field_kind = "constant";  // file | constant | linear | composite | fig10 | fig11
    std::string field_file;
    Vec2 constant{0.0, 1.0};
    Mat2 matrix = Mat2::identity();
    Vec2 offset;
    std::vector<Vec2> nodes, saddles;
    std::vector<double> node_angles;
    double scale = 1.0;

    // [mesh] (ignored for file fields, which carry their mesh)
    std::string mesh_shape = "square";  // square | disk
    Vec2 lo{-1.0, -1.0}, hi{1.0, 1.0};
    int nx = 64, ny = 64;
    int vertices = 0;  // > 0 overrides nx, ny with a near-square grid of about this many vertices
    Vec2 center;
    double radius = 1.0;
    int boundary_n = 128, rings = 32;

    // [cuts]
    std::string cut_mode = "auto";  // auto | manual
    std::vector<CutPath> manual_cuts;

    // [tolerances]
    double rtol = 1e-8, atol = 1e-10;
    double eps_factor = 2.0;
    bool periodic = false;
    int circle_samples = 192;
    double residual_a_median = 0.05, residual_b_median = 0.05;
    double jump_tol = 1e-2;  // relative to max(|h|, 1e-3 a-range)
    double grad_tol = 0.5;
    double transfer_tol = 1e-2;

    // [output]
    std::string out_dir = "out";
    std::string name = "run";
    std::uint64_t seed = 1;
    int lic_size = 512;
    int lic_half_length = 15;
    int levels = 20;
    int threads = 0;
};

/// Throws ConfigError naming the offending key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Field, domain, critical points and cuts for a config. Analytic fields are sampled at the
/// mesh vertices, so every run works on a piecewise-linear field.
struct RunInputs {
    DomainPtr domain;
    std::shared_ptr<const PLVectorField> field;
    std::vector<CriticalPoint> cps;
    CutSet cuts;
};

std::shared_ptr<const PLVectorField> make_field(const RunConfig& cfg);
RunInputs prepare_inputs(const RunConfig& cfg);
ScalarizeOptions scalarize_options(const RunConfig& cfg);

}  // namespace isoflow
