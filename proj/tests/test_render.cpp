#include "doctest.h"

#include "isoflow/critical.hpp"
#include "isoflow/cuts.hpp"
#include "isoflow/field.hpp"
#include "isoflow/meshgen.hpp"
#include "isoflow/render.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace isoflow;

namespace {

// mean |lag-1 correlation| of the centred image along columns (vertical) or rows
double lag1(const RasterImage& img, bool vertical) {
    double mean = 0.0;
    for (double v : img.values) mean += v;
    mean /= static_cast<double>(img.values.size());
    double num = 0.0, den = 0.0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double a = img.at(x, y) - mean;
            den += a * a;
            const int nx = vertical ? x : x + 1, ny = vertical ? y + 1 : y;
            if (nx < img.width && ny < img.height) num += a * (img.at(nx, ny) - mean);
        }
    return std::fabs(num / den);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("LIC: empty kernel, streak direction, determinism") {
    const auto up = AnalyticField::constant({0, 1});
    const BBox box{{-1, -1}, {1, 1}};
    LicOptions o;
    o.width = o.height = 96;
    o.kernel_half_length = 0;
    o.seed = 42;
    CHECK(lic_image(up, box, o).values == noise_image(96, 96, 42).values);

    o.kernel_half_length = 10;
    const auto img = lic_image(up, box, o);
    CHECK(lag1(img, true) > 5.0 * lag1(img, false));

    // the three reference matrices, away from the origin
    for (const Mat2& j : {reference_saddle_matrix(), reference_node_matrix(), reference_spiral_matrix()}) {
        o.width = o.height = 64;
        o.kernel_half_length = 6;
        const auto f = AnalyticField::linear(j);
        const auto lic = lic_image(f, BBox{{0.5, -0.1}, {0.7, 0.1}}, o);
        // near (0.6, 0) the flow direction of J x is J (0.6, 0)
        const Vec2 v = j * Vec2{0.6, 0.0};
        const bool vertical = std::fabs(v.y) > std::fabs(v.x);
        CHECK(lag1(lic, vertical) > lag1(lic, !vertical));
    }

    o.threads = 3;
    const auto a = lic_image(up, box, o);
    o.threads = 1;
    const auto b = lic_image(up, box, o);
    CHECK(a.values == b.values);
    write_png(a, "lic_a.png");
    write_png(b, "lic_b.png");
    CHECK(slurp("lic_a.png") == slurp("lic_b.png"));
    CHECK(slurp("lic_a.png").substr(1, 3) == "PNG");
    std::remove("lic_a.png");
    std::remove("lic_b.png");
}

TEST_CASE("height field export") {
    const TriMesh m = square_mesh({0, 0}, {1, 1}, 4, 4);
    const auto flat = scalar_pair_from_values(m, std::vector<double>(m.vertices.size(), 2.0), std::vector<double>(m.vertices.size(), 0.0));
    std::ostringstream out;
    HeightOptions ho;
    ho.scale = 0.5;
    write_height_field(out, flat, ho);
    std::istringstream in(out.str());
    std::string line;
    int verts = 0;
    while (std::getline(in, line))
        if (line.rfind("v ", 0) == 0) {
            ++verts;
            double x, y, z;
            std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &y, &z);
            CHECK(z == doctest::Approx(1.0));
        }
    CHECK(verts == static_cast<int>(m.vertices.size()));

    // rotation: the tear along the cut equals |h_b| times the scale
    auto dom = make_domain(disk_mesh({0, 0}, 1.0, 64, 12));
    const auto field = sample_field(AnalyticField::linear(Mat2::rotation90()), dom);
    ScalarizeOptions opt;
    opt.periodic = true;
    const auto pair = compute_scalar_pair(field, dom, place_cuts_auto(find_critical_points(field), *dom), opt);
    HeightOptions hb;
    hb.field = FieldSel::B;
    std::ostringstream obj;
    const double scale = write_height_field(obj, pair, hb);
    std::vector<double> z;
    std::istringstream zin(obj.str());
    while (std::getline(zin, line))
        if (line.rfind("v ", 0) == 0) {
            double x, y, h;
            std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &y, &h);
            z.push_back(h);
        }
    REQUIRE(z.size() == pair.mesh().vertices.size());
    int pairs = 0;
    for (const auto& e : pair.cut_mesh->edges) {
        if (e.left_w == e.right_w || pair.excised[e.left_w]) continue;
        CHECK(std::fabs(std::fabs(z[e.left_w] - z[e.right_w]) - std::fabs(pair.h_b[0]) * scale) < 1e-3 * std::fabs(pair.h_b[0]) * scale);
        ++pairs;
    }
    CHECK(pairs > 3);
}

TEST_CASE("isoline SVG") {
    const TriMesh m = square_mesh({0, 0}, {1, 1}, 8, 8);
    std::vector<double> a, b;
    for (const Vec2& x : m.vertices) {
        a.push_back(x.y);
        b.push_back(x.x);
    }
    const auto pair = scalar_pair_from_values(m, a, b);
    const PairIndex ix(pair);
    auto count = [](const std::string& s, const std::string& what) {
        std::size_t n = 0;
        for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
        return n;
    };
    const std::string svg = isoline_svg(ix, 9);
    CHECK(count(svg, "class=\"isoline\"") == 9);
    CHECK(count(svg, " Z\"") == 0);
    const std::string empty = isoline_svg(ix, 0);
    CHECK(count(empty, "class=\"isoline\"") == 0);
    CHECK(count(empty, "class=\"frame\"") == 1);
    CHECK(isoline_svg(ix, 9) == svg);
}
