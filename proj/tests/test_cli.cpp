#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "oracles.hpp"

using namespace chains4d;
namespace fs = std::filesystem;

namespace {

struct Result {
    int rc;
    std::string out;
};

Result sh(const std::string& args) {
    const char* bin = std::getenv("CHAINS4D_BIN");
    std::string cmd = std::string(bin ? bin : "chains4d") + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t k = fread(buf, 1, sizeof buf, p)) out.append(buf, k);
    const int st = pclose(p);
    return {WEXITSTATUS(st), out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        if (!std::getenv("CHAINS4D_BIN")) GTEST_SKIP() << "CHAINS4D_BIN not set";
        dir = fs::temp_directory_path() /
              ("chains4d-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir);
    }
    void TearDown() override {
        if (!dir.empty()) fs::remove_all(dir);
    }
    std::string f(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_F(Cli, GenerateRunVerify) {
    ASSERT_EQ(sh("generate open-random --d 4 --n 20 --seed 3 --out " + f("c.txt")).rc, 0);
    const auto r = sh("run open " + f("c.txt") + " --seed 3 --out " + f("t.json"));
    ASSERT_EQ(r.rc, 0);
    const auto summary = nlohmann::json::parse(r.out);
    EXPECT_EQ(summary["moves"], 19);
    EXPECT_EQ(summary["bound"], 60);
    EXPECT_TRUE(summary["verified"].get<bool>());
    EXPECT_TRUE(summary["within_bound"].get<bool>());
    EXPECT_EQ(sh("verify " + f("t.json")).rc, 0);
}

TEST_F(Cli, OutputsAreByteIdentical) {
    ASSERT_EQ(sh("generate closed-random --n 7 --seed 5 --out " + f("c.txt")).rc, 0);
    ASSERT_EQ(sh("run closed " + f("c.txt") + " --seed 2 --out " + f("a.json")).rc, 0);
    ASSERT_EQ(sh("run closed " + f("c.txt") + " --seed 2 --out " + f("b.json")).rc, 0);
    EXPECT_EQ(slurp(f("a.json")), slurp(f("b.json")));
    EXPECT_FALSE(slurp(f("a.json")).empty());
}

TEST_F(Cli, ExitCodes) {
    std::ofstream(f("bad.txt")) << "4 3 open\n0 0 0 0\n2 0 0 0\n2 1 0 0\n1 -1 0 0\n";
    EXPECT_EQ(sh("run open " + f("bad.txt")).rc, 2);
    std::ofstream(f("junk.txt")) << "4 two open\n";
    EXPECT_EQ(sh("run open " + f("junk.txt")).rc, 3);
    std::ofstream(f("junk.json")) << "{ nope";
    EXPECT_EQ(sh("verify " + f("junk.json")).rc, 3);
    ASSERT_EQ(sh("generate fixture:unit-square --out " + f("sq.txt")).rc, 0);
    EXPECT_EQ(sh("run closed " + f("sq.txt")).rc, 1);
}

TEST_F(Cli, TamperedTraceFailsVerify) {
    ASSERT_EQ(sh("generate open-random --n 12 --seed 9 --out " + f("c.txt")).rc, 0);
    ASSERT_EQ(sh("run open " + f("c.txt") + " --out " + f("t.json")).rc, 0);
    std::ifstream in(f("t.json"));
    auto tr = read_trace(in);
    std::get<Rotation>(tr.moves[4]).pivot[1] += 1e-3;
    std::ofstream o(f("t2.json"));
    write_trace(o, tr);
    o.close();
    const auto r = sh("verify " + f("t2.json"));
    EXPECT_EQ(r.rc, 1);
    EXPECT_EQ(nlohmann::json::parse(r.out)["first_failing_move"], 4);
}

TEST_F(Cli, RenderPixelsAreScaledCoordinates) {
    ASSERT_EQ(sh("generate open-random --n 5 --seed 4 --out " + f("c.txt")).rc, 0);
    ASSERT_EQ(sh("run open " + f("c.txt") + " --out " + f("t.json")).rc, 0);
    ASSERT_EQ(sh("render " + f("t.json") + " --scale 100 --frames 0 --out " + f("fr")).rc, 0);
    const std::string svg = slurp(f("fr-0.svg"));
    std::ifstream in(f("c.txt"));
    const auto pts = positions(read_structure(in));
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
    std::istringstream ps(m[1].str());
    std::string pair;
    std::size_t i = 0;
    while (ps >> pair) {
        double x, y;
        ASSERT_EQ(std::sscanf(pair.c_str(), "%lf,%lf", &x, &y), 2);
        ASSERT_LT(i, pts.size());
        EXPECT_NEAR(x, 100 * pts[i][0], 1e-4);
        EXPECT_NEAR(y, 100 * pts[i][1], 1e-4);
        ++i;
    }
    EXPECT_EQ(i, pts.size());
}

TEST_F(Cli, RenderZeroMoveTraceGivesOneFrame) {
    std::ofstream(f("tri.txt")) << "4 3 closed\n0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 0 0\n";
    ASSERT_EQ(sh("run closed " + f("tri.txt") + " --out " + f("t.json")).rc, 0);
    const auto r = sh("render " + f("t.json") + " --out " + f("fr"));
    ASSERT_EQ(r.rc, 0);
    EXPECT_TRUE(fs::exists(f("fr-0.svg")));
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
    EXPECT_NE(sh("render " + f("t.json") + " --frames 3 --out " + f("fr")).rc, 0);
}
