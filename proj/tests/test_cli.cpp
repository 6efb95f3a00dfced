// End-to-end checks of the isoflow executable. The binary path comes from ISOFLOW_CLI.
#include "doctest.h"

#include "isoflow/query.hpp"
#include "isoflow/scalarize.hpp"

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace isoflow;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;  // stdout
    std::string err;  // stderr
};

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("isoflow_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        static const struct Cleanup {
            fs::path p;
            ~Cleanup() {
                std::error_code ec;
                fs::remove_all(p, ec);
            }
        } cleanup{d};
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run cli(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    const std::string cmd = "cd '" + work_dir().string() + "' && '" ISOFLOW_CLI "' " + args + " > '" + out.string() +
                            "' 2> '" + err.string() + "'";
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string last_line(const std::string& s) {
    std::string t = s;
    while (!t.empty() && t.back() == '\n') t.pop_back();
    const auto p = t.rfind('\n');
    return p == std::string::npos ? t : t.substr(p + 1);
}

void config(const std::string& name, const std::string& body) {
    std::ofstream(work_dir() / (name + ".ini")) << body << "\n[output]\ndir = out\nname = " << name << "\n";
}

const char* constant_ini = "[field]\nkind = constant\nvector = 0.3, 1\n[mesh]\nnx = 16\nny = 16\n";

}  // namespace

TEST_CASE("compute and validate a constant field") {
    config("constant", constant_ini);
    const Run c = cli("compute -c constant.ini");
    REQUIRE_MESSAGE(c.code == 0, c.err);
    CHECK(fs::exists(work_dir() / "out" / "constant.spair"));
    const auto report = nlohmann::json::parse(slurp(work_dir() / "out" / "constant.report.json"));
    CHECK(report["critical_points"].empty());
    CHECK(report["thresholds_met"].get<bool>());

    const Run v = cli("validate -c constant.ini");
    CHECK_MESSAGE(v.code == 0, (v.out + v.err));

    // a truncated pair file is rejected
    const fs::path spair = work_dir() / "out" / "constant.spair";
    const std::string good = slurp(spair);
    std::ofstream(spair, std::ios::binary) << good.substr(0, good.size() / 2);
    CHECK(cli("validate -c constant.ini").code != 0);
    std::ofstream(spair, std::ios::binary) << good;
}

TEST_CASE("advect output matches the library bit for bit") {
    config("constant", constant_ini);
    REQUIRE(cli("compute -c constant.ini").code == 0);
    const Run q = cli("query advect -c constant.ini --x 0.1 --y -0.2 --tau 0.5");
    REQUIRE_MESSAGE(q.code == 0, q.err);
    const auto j = nlohmann::json::parse(q.out);

    const ScalarPair pair = load_scalar_pair((work_dir() / "out" / "constant.spair").string());
    const PairIndex ix(pair);
    const FlowQueryResult r = advect_lookup(ix, {0.1, -0.2}, 0.5);
    CHECK(j["endpoint"][0].get<double>() == r.endpoint.x);
    CHECK(j["endpoint"][1].get<double>() == r.endpoint.y);
    CHECK(j["out_of_domain"].get<bool>() == r.out_of_domain);
}

TEST_CASE("bench on a constant field") {
    config("constant", constant_ini);
    REQUIRE(cli("compute -c constant.ini").code == 0);
    const int n = 40;
    const Run b = cli("bench -c constant.ini -n " + std::to_string(n));
    REQUIRE_MESSAGE(b.code == 0, b.err);
    std::istringstream in(b.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,tau,err,lookup_ns,rk_ns");
    int rows = 0;
    double worst = 0.0;
    while (std::getline(in, line)) {
        std::vector<double> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(std::stod(cell));
        REQUIRE(f.size() == 6);
        worst = std::max(worst, f[3]);
        ++rows;
    }
    CHECK(worst < 1e-6);
    int reported = -1, skipped = -1;
    REQUIRE(std::sscanf(b.err.c_str(), "bench: %d rows, %d skipped", &reported, &skipped) == 2);
    CHECK(reported == rows);
    CHECK(rows + skipped == n);
}

TEST_CASE("a center without periodic mode is unsupported") {
    config("center", "[field]\nkind = linear\nmatrix = 0, -1, 1, 0\n[mesh]\nshape = disk\nboundary_n = 48\nrings = 8\n");
    const Run c = cli("compute -c center.ini");
    CHECK(c.code == 3);
    CHECK(last_line(c.err) == "UnsupportedCriticalPoint");
}

TEST_CASE("critical points of the three-source fixture") {
    config("fig10", "[field]\nkind = fig10\n[mesh]\nnx = 32\nny = 32\n");
    const Run c = cli("critical -c fig10.ini --json");
    REQUIRE_MESSAGE(c.code == 0, c.err);
    const auto j = nlohmann::json::parse(c.out);
    REQUIRE(j.is_array());
    CHECK(j.size() == 4);
}

TEST_CASE("bad configs") {
    config("typo", "[field]\nkind = constant\nvectr = 1, 0\n");
    Run c = cli("compute -c typo.ini");
    CHECK(c.code == 2);
    CHECK(last_line(c.err) == "ConfigError");

    c = cli("compute -c missing.ini");
    CHECK(c.code == 2);
}
