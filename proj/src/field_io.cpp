#include "isoflow/field_io.hpp"
#include "isoflow/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace isoflow {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-blank, non-comment line.
    std::istringstream next(const char* what) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return std::istringstream(line);
        }
        fail(std::string("unexpected end of file, expected ") + what);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no_) + ": " + msg);
    }

    int line() const { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

// Parses a double token, accepting nan/inf spellings so they reach validation.
bool read_number(std::istringstream& ss, double& v) {
    std::string tok;
    if (!(ss >> tok)) return false;
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    return end != tok.c_str() && *end == '\0';
}

bool at_end(std::istringstream& ss) {
    std::string rest;
    return !(ss >> rest);
}

}  // namespace

PLVectorField read_field(std::istream& in) {
    LineReader r(in);
    {
        auto ss = r.next("header");
        std::string magic;
        int version = 0;
        if (!(ss >> magic >> version) || magic != "plvf" || version != 1 || !at_end(ss))
            r.fail("expected header 'plvf 1'");
    }
    long n = 0;
    {
        auto ss = r.next("'verts N'");
        std::string kw;
        if (!(ss >> kw >> n) || kw != "verts" || n < 0 || !at_end(ss)) r.fail("expected 'verts N'");
    }
    std::vector<Vec2> pos;
    std::vector<Vec2> vec;
    pos.reserve(n);
    vec.reserve(n);
    for (long i = 0; i < n; ++i) {
        auto ss = r.next("vertex line");
        double x, y, vx, vy;
        if (!read_number(ss, x) || !read_number(ss, y) || !read_number(ss, vx) || !read_number(ss, vy) || !at_end(ss))
            r.fail("expected 'x y vx vy'");
        if (!std::isfinite(x) || !std::isfinite(y))
            throw Error(ErrorCode::ValidationError, "vertex " + std::to_string(i) + " position is not finite");
        if (!std::isfinite(vx) || !std::isfinite(vy))
            throw Error(ErrorCode::ValidationError, "vertex " + std::to_string(i) + " vector is not finite");
        pos.emplace_back(x, y);
        vec.emplace_back(vx, vy);
    }
    long m = 0;
    {
        auto ss = r.next("'tris M'");
        std::string kw;
        if (!(ss >> kw >> m) || kw != "tris" || m < 0 || !at_end(ss)) r.fail("expected 'tris M'");
    }
    std::vector<Triangle> tris;
    tris.reserve(m);
    for (long t = 0; t < m; ++t) {
        auto ss = r.next("triangle line");
        long i, j, k;
        if (!(ss >> i >> j >> k) || !at_end(ss)) r.fail("expected 'i j k'");
        for (long idx : {i, j, k}) {
            if (idx < 0 || idx >= n)
                throw Error(ErrorCode::ValidationError, "triangle " + std::to_string(t) + " index " +
                                                            std::to_string(idx) + " out of range");
        }
        tris.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
    }
    auto domain = make_domain(make_mesh(std::move(pos), std::move(tris)));
    return PLVectorField(std::move(domain), std::move(vec));
}

PLVectorField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot open " + path);
    return read_field(in);
}

void write_field(std::ostream& out, const PLVectorField& field) {
    const auto& mesh = field.domain()->mesh();
    out << std::setprecision(17);
    out << "plvf 1\n";
    out << "verts " << mesh.vertices.size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        out << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << ' ' << field.vectors()[i].x << ' '
            << field.vectors()[i].y << "\n";
    }
    out << "tris " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
}

void save_field(const std::string& path, const PLVectorField& field) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
    write_field(out, field);
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
}

}  // namespace isoflow
