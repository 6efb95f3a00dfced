#pragma once

#include "isoflow/field.hpp"
#include "isoflow/query.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace isoflow {

/// Grayscale image, values in [0, 1], row 0 at the top.
struct RasterImage {
    int width = 0, height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

/// Seeded white noise, identical on every platform for a given seed.
RasterImage noise_image(int width, int height, std::uint64_t seed);

struct LicOptions {
    int width = 512, height = 512;
    int kernel_half_length = 15;  // pixels
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
};

/// Box-kernel line integral convolution of seeded noise over `window`. The field is
/// evaluated with extension outside its domain.
RasterImage lic_image(const VectorField& field, const BBox& window, const LicOptions& opt = {});

/// 8-bit grayscale PNG.
void write_png(const RasterImage& img, const std::string& path);

struct HeightOptions {
    FieldSel field = FieldSel::A;
    double scale = 0.0;  // 0: height range = 20% of the bbox diagonal
};

/// Wavefront OBJ of (x, y, scale * value) over the cut mesh, duplicated vertices included
/// so cuts show as tears. Undefined values sit at the lowest finite height. Returns the scale.
double export_height_field(const ScalarPair& pair, const std::string& path, const HeightOptions& opt = {});
double write_height_field(std::ostream& out, const ScalarPair& pair, const HeightOptions& opt = {});

/// SVG of n_levels evenly spaced interior isolines of a, with cuts dashed.
std::string isoline_svg(const PairIndex& index, int n_levels);
void save_isoline_svg(const PairIndex& index, int n_levels, const std::string& path);

}  // namespace isoflow
