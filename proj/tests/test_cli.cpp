#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cli.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = dyadic::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string tmp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("dyadic_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("eval examples") {
    CHECK(run({"eval", "walsh", "--n", "5", "--g", "101|0"}).out == "1\n");
    CHECK(run({"eval", "dirichlet", "--N", "5", "--g", "000|0"}).out == "5\n");
    CHECK(run({"eval", "dirichlet", "--N", "5", "--g", "100|0"}).out == "1\n");
    CHECK(run({"eval", "dirichlet", "--N", "5", "--g", "100|0", "--method", "naive"}).out == "1\n");
    CHECK(run({"eval", "rademacher", "--k", "2", "--g", "001|0"}).out == "-1\n");
    const std::string path = tmp("series.json");
    std::ofstream(path) << R"({"d":2,"coeffs":[{"n":[0,0],"c":"3/4"},{"n":[1,0],"c":"1"}],"bound_rank":1})";
    CHECK(run({"eval", "partial-sum", "--series", path, "--N", "2", "--g", "1|0,0|0"}).out == "-1/4\n");
    CHECK(run({"eval", "partial-sum", "--series", path, "--N", "1,1", "--g", "1|0,0|0"}).out == "3/4\n");
    CHECK(run({"eval", "partial-sum", "--series", path, "--N", "2", "--g", "1|0,0|0", "--approx"}).out.rfind("-0.25", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("exit codes and help") {
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("verify") != std::string::npos);
    for (const char* sub : {"eval", "render", "series", "qm", "verify"}) CHECK(run({sub, "--help"}).code == 0);
    CHECK(run({"eval", "walsh", "--help"}).code == 0);
    CHECK(run({"eval", "walsh", "--n", "5", "--g", "101|0", "--bogus"}).code == 2);
    CHECK(run({"eval", "walsh", "--n", "5"}).code == 2);
    const Run bad = run({"eval", "walsh", "--n", "5", "--g", "10x|0"});
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());
    CHECK(run({"verify", "nonsense"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"eval", "dirichlet", "--N", "0", "--g", "0|0"}).code == 2);
}

TEST_CASE("verify suites") {
    const Run k = run({"verify", "kernels", "--max-N", "64", "--rank", "6"});
    CHECK(k.code == 0);
    const auto kj = nlohmann::json::parse(k.out);
    CHECK(kj.at("ok").get<bool>());
    CHECK(kj.at("suite") == "kernels");
    const Run t8 = run({"verify", "theorem8", "--S", "4", "--rank", "10", "--samples", "50"});
    CHECK(t8.code == 0);
    CHECK(nlohmann::json::parse(t8.out).at("report").contains("growth"));
    const Run a = run({"verify", "lemma1", "--d", "2", "--trials", "2", "--points", "2", "--max-k1", "3", "--seed", "7"});
    const Run b = run({"verify", "lemma1", "--d", "2", "--trials", "2", "--points", "2", "--max-k1", "3", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(nlohmann::json::parse(a.out).at("seed") == 7);
    const Run f = run({"verify", "falsify", "--kind", "diagonal", "--K", "3", "--rademacher-k", "2"});
    CHECK(f.code == 0);
    const auto fj = nlohmann::json::parse(f.out);
    CHECK(fj.at("report").at("dimension") == 0);
    CHECK(fj.at("report").at("equations") == 97);
    CHECK(run({"verify", "falsify", "--kind", "whole", "--K", "2"}).code == 0);
    CHECK(run({"verify", "lemma4", "--instances", "5"}).code == 0);
    CHECK(run({"verify", "tk", "--max-k", "2", "--trials", "2"}).code == 0);
    CHECK(run({"verify", "probes"}).code == 0);
    CHECK(run({"verify", "lemma2", "--K", "5", "--ks", "2"}).code == 0);
}

TEST_CASE("render") {
    const std::string out = tmp("empty.pgm");
    const Run e = run({"render", "--json", R"({"kind":"empty","d":2})", "--k", "4", "--out", out});
    CHECK(e.code == 0);
    CHECK(e.out.find("16x16") != std::string::npos);
    const std::string bytes = slurp(out);
    REQUIRE(bytes.size() == 13 + 256);
    for (std::size_t i = 13; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
    const std::string diag = tmp("diag.pgm");
    const Run d1 = run({"render", "--json", R"({"kind":"diagonal","d":2,"lower":[]})", "--k", "6", "--out", diag});
    const std::string first = slurp(diag);
    const Run d2 = run({"--threads", "3", "render", "--json", R"({"kind":"diagonal","d":2,"lower":[]})", "--k", "6", "--out", diag});
    CHECK(d1.code == 0);
    CHECK(d1.out == d2.out);
    CHECK(slurp(diag) == first);
    int set = 0;
    for (std::size_t i = 13; i < first.size(); ++i) set += static_cast<unsigned char>(first[i]) == 255;
    CHECK(set == 64);
    CHECK(run({"render", "--json", "{", "--k", "2", "--out", diag}).code == 2);
    CHECK(run({"render", "--k", "2", "--out", diag}).code == 2);
    std::remove(out.c_str());
    std::remove(diag.c_str());
}

TEST_CASE("series and qm round trip") {
    const std::string s = tmp("t8.json"), csv = tmp("t8.csv");
    CHECK(run({"series", "build", "theorem8", "--S", "2", "--out", s}).code == 0);
    const Run inspect = run({"series", "inspect", "--series", s});
    CHECK(inspect.code == 0);
    CHECK_FALSE(inspect.out.empty());
    CHECK(run({"qm", "build", "--series", s, "--K", "4", "--out", csv}).code == 0);
    CHECK(run({"qm", "check", "--csv", csv}).code == 0);
    const std::string fast = slurp(csv);
    CHECK(run({"qm", "build", "--series", s, "--K", "4", "--naive", "--out", csv}).code == 0);
    CHECK(slurp(csv) == fast);
    // Break additivity in the first rank-1 row.
    std::string broken = fast;
    const auto pos = broken.find("\n1,0,0,");
    REQUIRE(pos != std::string::npos);
    broken.insert(pos + 7, "1");
    std::ofstream(csv) << broken;
    CHECK(run({"qm", "check", "--csv", csv}).code == 1);
    const Run r1 = run({"series", "build", "random", "--d", "2", "--bound", "2", "--seed", "5"});
    const Run r2 = run({"series", "build", "random", "--d", "2", "--bound", "2", "--seed", "5"});
    CHECK(r1.code == 0);
    CHECK(r1.out == r2.out);
    CHECK(nlohmann::json::parse(r1.out).at("seed") == 5);
    std::remove(s.c_str());
    std::remove(csv.c_str());
}
