#include "isoflow/error.hpp"
#include "isoflow/scalarize.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace isoflow {

namespace {

// Whitespace-separated tokens; '#' starts a comment.
class Tokens {
public:
    explicit Tokens(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            std::istringstream ss(line);
            std::string t;
            while (ss >> t) toks_.push_back(t);
        }
    }
    bool done() const { return pos_ >= toks_.size(); }
    const std::string& word(const char* what) {
        if (done()) throw Error(ErrorCode::ParseError, std::string("unexpected end of scalar file, expected ") + what);
        return toks_[pos_++];
    }
    void expect(const char* kw) {
        if (word(kw) != kw) throw Error(ErrorCode::ParseError, std::string("expected '") + kw + "' in scalar file");
    }
    double num(const char* what) {
        const std::string& t = word(what);
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end) throw Error(ErrorCode::ParseError, std::string("bad number for ") + what + ": " + t);
        return v;
    }
    long count(const char* what) {
        const double v = num(what);
        if (v < 0 || v != std::floor(v) || v > 1e9) throw Error(ErrorCode::ParseError, std::string("bad count for ") + what);
        return static_cast<long>(v);
    }

private:
    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
};

void write_anchor(std::ostream& out, const CutAnchor& a) {
    if (a.is_boundary()) out << "boundary " << a.s;
    else out << "cp " << a.cp;
}

CutAnchor read_anchor(Tokens& t) {
    const std::string kind = t.word("anchor kind");
    if (kind == "boundary") return CutAnchor::boundary(t.num("anchor s"));
    if (kind == "cp") return CutAnchor::critical(static_cast<int>(t.count("anchor cp")));
    throw Error(ErrorCode::ParseError, "unknown anchor kind '" + kind + "'");
}

}  // namespace

void write_scalar_pair(std::ostream& out, const ScalarPair& pair) {
    const CutMesh& cm = *pair.cut_mesh;
    const auto& m = cm.mesh;
    out << std::setprecision(17);
    out << "spair 1\n";
    out << "periodic " << (pair.periodic ? 1 : 0) << "\n";
    out << "refined " << cm.refined_count << "\n";
    out << "verts " << m.vertices.size() << "\n";
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        out << m.vertices[v].x << ' ' << m.vertices[v].y << ' ' << pair.a[v] << ' ' << pair.b[v] << ' ' << cm.origin[v] << "\n";
    out << "tris " << m.triangles.size() << "\n";
    for (const auto& t : m.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    out << "cps " << pair.cps.size() << "\n";
    for (std::size_t k = 0; k < pair.cps.size(); ++k) {
        const auto& c = pair.cps[k];
        const Mat2& j = c.jacobian;
        out << c.position.x << ' ' << c.position.y << ' ' << j.a << ' ' << j.b << ' ' << j.c << ' ' << j.d << ' '
            << pair.radii[k] << "\n";
    }
    out << "cuts " << pair.paths.size() << "\n";
    for (std::size_t p = 0; p < pair.paths.size(); ++p) {
        const auto& path = pair.paths[p];
        out << "cut " << pair.h_a[p] << ' ' << pair.h_b[p] << ' ';
        write_anchor(out, path.start);
        out << ' ';
        write_anchor(out, path.end);
        out << ' ' << path.points.size();
        for (const Vec2& x : path.points) out << ' ' << x.x << ' ' << x.y;
        const auto& ch = cm.chains[p];
        out << ' ' << ch.size();
        for (int v : ch) out << ' ' << v;
        out << "\n";
    }
}

ScalarPair read_scalar_pair(std::istream& in) {
    Tokens t(in);
    t.expect("spair");
    if (t.count("version") != 1) throw Error(ErrorCode::ParseError, "unsupported scalar file version");
    ScalarPair pair;
    t.expect("periodic");
    pair.periodic = t.count("periodic flag") != 0;
    auto cm = std::make_shared<CutMesh>();
    t.expect("refined");
    cm->refined_count = static_cast<int>(t.count("refined count"));
    t.expect("verts");
    const long nv = t.count("vertex count");
    std::vector<Vec2> verts(static_cast<std::size_t>(nv));
    pair.a.resize(verts.size());
    pair.b.resize(verts.size());
    cm->origin.resize(verts.size());
    for (long v = 0; v < nv; ++v) {
        const auto i = static_cast<std::size_t>(v);
        verts[i].x = t.num("x");
        verts[i].y = t.num("y");
        pair.a[i] = t.num("a");
        pair.b[i] = t.num("b");
        cm->origin[i] = static_cast<int>(t.count("origin"));
    }
    t.expect("tris");
    const long nt = t.count("triangle count");
    std::vector<Triangle> tris(static_cast<std::size_t>(nt));
    for (auto& tri : tris)
        for (int& c : tri) c = static_cast<int>(t.count("triangle index"));
    cm->mesh = make_mesh(verts, tris);

    t.expect("cps");
    const long nc = t.count("cp count");
    for (long k = 0; k < nc; ++k) {
        CriticalPoint cp;
        cp.id = static_cast<int>(k);
        cp.position.x = t.num("cp x");
        cp.position.y = t.num("cp y");
        Mat2 j;
        j.a = t.num("jacobian");
        j.b = t.num("jacobian");
        j.c = t.num("jacobian");
        j.d = t.num("jacobian");
        cp.jacobian = j;
        cp.eigen = classify(j);
        pair.cps.push_back(cp);
        pair.radii.push_back(t.num("radius"));
    }
    t.expect("cuts");
    const long np = t.count("cut count");
    for (long p = 0; p < np; ++p) {
        t.expect("cut");
        pair.h_a.push_back(t.num("h_a"));
        pair.h_b.push_back(t.num("h_b"));
        CutPath path;
        path.id = static_cast<int>(p);
        path.start = read_anchor(t);
        path.end = read_anchor(t);
        const long npts = t.count("point count");
        for (long i = 0; i < npts; ++i) {
            const double x = t.num("point x");
            path.points.push_back({x, t.num("point y")});
        }
        std::vector<int> ch(static_cast<std::size_t>(t.count("chain length")));
        for (int& v : ch) {
            v = static_cast<int>(t.count("chain vertex"));
            if (v >= cm->refined_count) throw Error(ErrorCode::ParseError, "chain vertex out of range");
        }
        cm->chains.push_back(std::move(ch));
        pair.paths.push_back(std::move(path));
    }
    if (!t.done()) throw Error(ErrorCode::ParseError, "trailing data in scalar file");
    if (cm->refined_count > nv) throw Error(ErrorCode::ParseError, "refined count exceeds vertex count");
    finish_cut_mesh(*cm);

    pair.excised.assign(verts.size(), 0);
    for (std::size_t v = 0; v < verts.size(); ++v)
        for (std::size_t k = 0; k < pair.cps.size(); ++k)
            if (distance(verts[v], pair.cps[k].position) < pair.radii[k]) pair.excised[v] = 1;
    pair.cut_mesh = std::move(cm);
    return pair;
}

ScalarPair scalar_pair_from_values(const TriMesh& mesh, std::vector<double> a, std::vector<double> b) {
    if (a.size() != mesh.vertices.size() || b.size() != mesh.vertices.size())
        throw Error(ErrorCode::ValidationError, "value arrays do not match the vertex count");
    ScalarPair pair;
    pair.cut_mesh = std::make_shared<CutMesh>(embed_cuts(mesh, CutSet{}));
    pair.a = std::move(a);
    pair.b = std::move(b);
    pair.excised.assign(mesh.vertices.size(), 0);
    return pair;
}

void save_scalar_pair(const std::string& path, const ScalarPair& pair) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
    write_scalar_pair(out, pair);
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
}

ScalarPair load_scalar_pair(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot read " + path);
    return read_scalar_pair(in);
}

}  // namespace isoflow
