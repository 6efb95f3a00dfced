#include "isoflow/render.hpp"
#include "isoflow/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace isoflow {

RasterImage noise_image(int width, int height, std::uint64_t seed) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::ValidationError, "image dimensions must be positive");
    RasterImage img;
    img.width = width;
    img.height = height;
    img.values.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    std::mt19937_64 rng(seed);
    // top 53 bits, so the values do not depend on the standard library's distributions
    for (double& v : img.values) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return img;
}

RasterImage lic_image(const VectorField& field, const BBox& window, const LicOptions& opt) {
    RasterImage noise = noise_image(opt.width, opt.height, opt.seed);
    if (opt.kernel_half_length <= 0) return noise;
    const int W = opt.width, H = opt.height;
    const double dx = (window.hi.x - window.lo.x) / W, dy = (window.hi.y - window.lo.y) / H;
    if (!(dx > 0.0) || !(dy > 0.0)) throw Error(ErrorCode::ValidationError, "LIC window is empty");
    RasterImage out = noise;
    const int L = opt.kernel_half_length;

    auto render_rows = [&](int r0, int r1) {
        int hint = -1;
        // unit step in pixel space along the field; zero where the field vanishes
        auto dir = [&](Vec2 p, bool& ok) {
            const Vec2 x{window.lo.x + p.x * dx, window.hi.y - p.y * dy};
            const Vec2 v = field.value_extended(x, hint);
            const Vec2 d{v.x / dx, -v.y / dy};
            const double n = norm(d);
            ok = n > 1e-12 && std::isfinite(n);
            return ok ? d / n : Vec2{};
        };
        for (int j = r0; j < r1; ++j)
            for (int i = 0; i < W; ++i) {
                double sum = noise.at(i, j);
                int count = 1;
                for (double sgn : {1.0, -1.0}) {
                    Vec2 p{i + 0.5, j + 0.5};
                    for (int s = 0; s < L; ++s) {
                        bool ok1 = false, ok2 = false;
                        const Vec2 d1 = sgn * dir(p, ok1);
                        if (!ok1) break;
                        const Vec2 d2 = sgn * dir(p + 0.5 * d1, ok2);
                        if (!ok2) break;
                        p += d2;
                        const int pi = static_cast<int>(std::floor(p.x)), pj = static_cast<int>(std::floor(p.y));
                        if (pi < 0 || pj < 0 || pi >= W || pj >= H) break;
                        sum += noise.at(pi, pj);
                        ++count;
                    }
                }
                out.values[static_cast<std::size_t>(j) * static_cast<std::size_t>(W) + static_cast<std::size_t>(i)] = sum / count;
            }
    };

    int nthreads = opt.threads > 0 ? opt.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nthreads = std::min(nthreads, H);
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) {
        const int r0 = H * k / nthreads, r1 = H * (k + 1) / nthreads;
        pool.emplace_back(render_rows, r0, r1);
    }
    for (auto& t : pool) t.join();
    return out;
}

void write_png(const RasterImage& img, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error(ErrorCode::IOError, "cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error(ErrorCode::IOError, "PNG encoding failed for " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            row[static_cast<std::size_t>(x)] = static_cast<png_byte>(std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw Error(ErrorCode::IOError, "write failed for " + path);
}

double write_height_field(std::ostream& out, const ScalarPair& pair, const HeightOptions& opt) {
    const auto& m = pair.mesh();
    const auto& vals = opt.field == FieldSel::A ? pair.a : pair.b;
    double lo = INFINITY, hi = -INFINITY;
    for (double v : vals)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    double scale = opt.scale;
    if (scale <= 0.0) scale = hi > lo ? 0.2 * bounding_box(m).diagonal() / (hi - lo) : 1.0;
    char buf[128];
    out << "# height field, scale " << scale << "\n";
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        const double h = std::isfinite(vals[v]) ? vals[v] : lo;
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", m.vertices[v].x, m.vertices[v].y, h * scale);
        out << buf;
    }
    for (const auto& t : m.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
    return scale;
}

double export_height_field(const ScalarPair& pair, const std::string& path, const HeightOptions& opt) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
    const double s = write_height_field(out, pair, opt);
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
    return s;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string isoline_svg(const PairIndex& ix, int n_levels) {
    const ScalarPair& pair = ix.pair();
    const auto& m = pair.mesh();
    const BBox box = bounding_box(m);
    const double w = box.hi.x - box.lo.x, h = box.hi.y - box.lo.y;
    const double stroke = 0.002 * box.diagonal();
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << fmt(box.lo.x) << ' ' << fmt(-box.hi.y) << ' ' << fmt(w)
      << ' ' << fmt(h) << "\" width=\"800\" height=\"" << static_cast<int>(std::lround(800.0 * h / std::max(w, 1e-300))) << "\">\n";
    s << "<rect class=\"frame\" x=\"" << fmt(box.lo.x) << "\" y=\"" << fmt(-box.hi.y) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"" << fmt(stroke) << "\"/>\n";
    // y is flipped so the picture reads like the domain
    s << "<g transform=\"scale(1,-1)\" fill=\"none\">\n";

    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t v = 0; v < pair.a.size(); ++v)
        if (std::isfinite(pair.a[v]) && !pair.excised[v]) {
            lo = std::min(lo, pair.a[v]);
            hi = std::max(hi, pair.a[v]);
        }
    if (n_levels > 0 && hi > lo) {
        for (int k = 0; k < n_levels; ++k) {
            const double level = lo + (hi - lo) * (k + 1) / (n_levels + 1);
            for (const auto& line : extract_isoline(ix, level)) {
                if (line.points.size() < 2) continue;
                s << "<path class=\"isoline\" stroke=\"black\" stroke-width=\"" << fmt(stroke) << "\" d=\"";
                for (std::size_t i = 0; i < line.points.size(); ++i)
                    s << (i ? " L" : "M") << fmt(line.points[i].x) << ',' << fmt(line.points[i].y);
                if (line.closed) s << " Z";
                s << "\"/>\n";
            }
        }
    }
    for (std::size_t p = 0; p < pair.cut_mesh->chains.size(); ++p) {
        const auto pts = pair.cut_mesh->chain_points(static_cast<int>(p));
        s << "<path class=\"cut\" stroke=\"red\" stroke-dasharray=\"" << fmt(4 * stroke) << ',' << fmt(3 * stroke) << "\" stroke-width=\""
          << fmt(1.5 * stroke) << "\" d=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " L" : "M") << fmt(pts[i].x) << ',' << fmt(pts[i].y);
        s << "\"/>\n";
    }
    s << "</g>\n</svg>\n";
    return s.str();
}

void save_isoline_svg(const PairIndex& index, int n_levels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
    out << isoline_svg(index, n_levels);
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
}

}  // namespace isoflow
