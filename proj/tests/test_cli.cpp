#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "shadowban/cli.hpp"

using namespace shadowban;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sbcli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

struct CoutCapture {
    std::ostringstream stream;
    std::streambuf* saved;
    CoutCapture() : saved(std::cout.rdbuf(stream.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(saved); }
    std::string text() const { return stream.str(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

void make_path_files(const TempDir& dir, const std::string& n = "11") {
    REQUIRE(run_cli({"generate", "path", "--n", n, "--out-edges", dir.file("edges.csv"),
                     "--out-nodes", dir.file("nodes.csv")}) == 0);
}

} // namespace

TEST_CASE("generate path writes loadable files") {
    TempDir dir;
    make_path_files(dir);
    NetworkBundle b = load_network(dir.file("edges.csv"), dir.file("nodes.csv"));
    CHECK(b.network.vertex_count() == 11);
    CHECK(b.network.edge_count() == 20);
    CHECK(b.opinions.front() == 0.0);
    CHECK(b.opinions.back() == 1.0);
}

TEST_CASE("generate sbm parses the connection matrix and is seeded") {
    TempDir dir;
    REQUIRE(run_cli({"generate", "sbm", "--sizes", "5,5", "--p", "1,0.05;0.05,1", "--opinions",
                     "0.35,0.65", "--seed", "3", "--out-edges", dir.file("e1.csv"), "--out-nodes",
                     dir.file("n1.csv")}) == 0);
    REQUIRE(run_cli({"generate", "sbm", "--sizes", "5,5", "--p", "1,0.05;0.05,1", "--opinions",
                     "0.35,0.65", "--seed", "3", "--out-edges", dir.file("e2.csv"), "--out-nodes",
                     dir.file("n2.csv")}) == 0);
    CHECK(read_file(dir.file("e1.csv")) == read_file(dir.file("e2.csv")));
    NetworkBundle b = load_network(dir.file("e1.csv"), dir.file("n1.csv"));
    CHECK(b.network.vertex_count() == 10);
    CHECK(b.opinions[0] == 0.35);
    CHECK(b.opinions[9] == 0.65);
    CHECK(b.network.edge_count() >= 40);
}

TEST_CASE("generate er writes uniform opinions") {
    TempDir dir;
    REQUIRE(run_cli({"generate", "er", "--n", "50", "--p", "0.1", "--seed", "9", "--out-edges",
                     dir.file("edges.csv"), "--out-nodes", dir.file("nodes.csv")}) == 0);
    NetworkBundle b = load_network(dir.file("edges.csv"), dir.file("nodes.csv"));
    CHECK(b.network.vertex_count() == 50);
    for (double v : b.opinions) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("simulate produces the run directory contract") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("run");
    CoutCapture capture;
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--objective", "max-mean", "--horizon-days", "30", "--omega",
                     "0.01", "--epsilon", "0.101", "--s-network", "0.5"}) == 0);
    CHECK(capture.text().find("terminal_mean=") != std::string::npos);
    CHECK(capture.text().find("mean_ban=") != std::string::npos);

    const std::string traj = read_file(out + "/trajectory.csv");
    CHECK(traj.rfind("day,mean,variance,q05,q25,q50,q75,q95,mean_ban_strength,ban_rate_low,ban_rate_high\n", 0) == 0);
    CHECK(line_count(traj) == 32);  // header + days 0..29 + terminal day 30

    const std::string log = read_file(out + "/run.log");
    CHECK(log.rfind("day=0 mean_ban_strength=0.5 banned_edges=10\n", 0) == 0);
    CHECK(line_count(log) == 30);

    for (const char* name : {"config.json", "histogram_initial.csv", "histogram_final.csv",
                             "final_opinions.csv"})
        CHECK(fs::exists(out + "/" + std::string(name)));
    CHECK(read_file(out + "/histogram_initial.csv").rfind("bin_left,bin_right,density\n", 0) == 0);
    CHECK(read_file(out + "/final_opinions.csv").rfind("node,opinion\n", 0) == 0);
}

TEST_CASE("config echo reproduces the run byte for byte") {
    TempDir dir;
    make_path_files(dir);
    const std::string out_a = dir.file("runA"), out_b = dir.file("runB");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out_a, "--horizon-days", "20", "--omega", "0.01", "--epsilon",
                     "0.101"}) == 0);
    REQUIRE(run_cli({"simulate", "--config", out_a + "/config.json", "--out", out_b}) == 0);
    CHECK(read_file(out_a + "/trajectory.csv") == read_file(out_b + "/trajectory.csv"));
    CHECK(read_file(out_a + "/final_opinions.csv") == read_file(out_b + "/final_opinions.csv"));
}

TEST_CASE("flags override config values") {
    TempDir dir;
    make_path_files(dir);
    const std::string cfg = dir.file("cfg.json");
    {
        RunSpec spec;
        spec.edges = dir.file("edges.csv");
        spec.nodes = dir.file("nodes.csv");
        spec.out = dir.file("runC");
        spec.sim.horizon_days = 10.0;
        spec.sim.dynamics.omega = 0.01;
        spec.sim.dynamics.epsilon = 0.101;
        write_config(cfg, spec);
    }
    REQUIRE(run_cli({"simulate", "--config", cfg, "--horizon-days", "15"}) == 0);
    const std::string traj = read_file(dir.file("runC") + "/trajectory.csv");
    CHECK(line_count(traj) == 17);  // header + days 0..14 + terminal
    const RunSpec echoed = read_config(dir.file("runC") + "/config.json");
    CHECK(echoed.sim.horizon_days == 15.0);
    CHECK(echoed.sim.dynamics.epsilon == 0.101);
}

TEST_CASE("baseline keeps every ban at zero") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("base");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "10", "--omega", "0.01", "--epsilon", "0.101",
                     "--baseline"}) == 0);
    const std::string log = read_file(out + "/run.log");
    for (std::size_t pos = 0; (pos = log.find("mean_ban_strength=", pos)) != std::string::npos;
         pos += 18)
        CHECK(log.compare(pos + 18, 2, "0 ") == 0);
}

TEST_CASE("save-policies writes one snapshot per policy instant") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("snap");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "5", "--omega", "0.01", "--epsilon", "0.101",
                     "--save-policies"}) == 0);
    for (int d = 0; d < 5; ++d) CHECK(fs::exists(out + "/policy_day_" + std::to_string(d) + ".csv"));
    CHECK_FALSE(fs::exists(out + "/policy_day_5.csv"));
    CHECK(read_file(out + "/policy_day_0.csv") ==
          "source,target,u\n0,1,1\n1,2,1\n2,3,1\n3,4,1\n4,5,1\n5,6,1\n6,7,1\n7,8,1\n8,9,1\n9,10,1\n");
}

TEST_CASE("analyze replays snapshots into the bias report") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("ana");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "5", "--omega", "0.01", "--epsilon", "0.101",
                     "--save-policies"}) == 0);
    CoutCapture capture;
    REQUIRE(run_cli({"analyze", "--run", out}) == 0);
    CHECK(capture.text().find("rows=5") != std::string::npos);
    const std::string report = read_file(out + "/analyze_report.csv");
    CHECK(report.rfind("day,ban_rate_low,ban_rate_high,upward_count,downward_count,neutral_count,"
                       "upward_mass,downward_mass,neutral_mass\n", 0) == 0);
    CHECK(report.find("\n0,1,0.8,0,10,0,0,10,0\n") != std::string::npos);
}

TEST_CASE("analyze accepts a custom report path and empty reports") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("anab");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "3", "--omega", "0.01", "--epsilon", "0.101",
                     "--baseline", "--save-policies"}) == 0);
    const std::string report = dir.file("custom_report.csv");
    REQUIRE(run_cli({"analyze", "--run", out, "--out", report}) == 0);
    CHECK(line_count(read_file(report)) == 1);  // header only: no banned instants
}

TEST_CASE("analyze without snapshots fails with guidance") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("nosnap");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "3", "--omega", "0.01", "--epsilon",
                     "0.101"}) == 0);
    CHECK(run_cli({"analyze", "--run", out}) == 1);
}

TEST_CASE("sweep writes the grid csv and summary line") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("sweep");
    CoutCapture capture;
    REQUIRE(run_cli({"sweep", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "20", "--omega", "0.01", "--epsilon", "0.101",
                     "--s-network", "0,0.5"}) == 0);
    CHECK(capture.text().find("rows=2 failed=0") != std::string::npos);
    const std::string csv = read_file(out + "/sweep.csv");
    CHECK(csv.rfind("s_network,s_edge,epsilon,omega,relative_objective,status\n", 0) == 0);
    CHECK(line_count(csv) == 3);
    CHECK(csv.find("\n0,1,0.101,0.01,1,ok\n") != std::string::npos);
    const RunSpec echoed = read_config(out + "/config.json");
    CHECK(echoed.grid.s_network == std::vector<double>{0.0, 0.5});
}

TEST_CASE("parallel sweep output matches serial output") {
    TempDir dir;
    make_path_files(dir);
    const std::string out1 = dir.file("sw1"), out2 = dir.file("sw2");
    CoutCapture capture;
    REQUIRE(run_cli({"sweep", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out1, "--horizon-days", "15", "--omega", "0.01", "--epsilon", "0.101",
                     "--s-network", "0.1,0.4,0.8"}) == 0);
    REQUIRE(run_cli({"sweep", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out2, "--horizon-days", "15", "--omega", "0.01", "--epsilon", "0.101",
                     "--s-network", "0.1,0.4,0.8", "--workers", "3"}) == 0);
    CHECK(read_file(out1 + "/sweep.csv") == read_file(out2 + "/sweep.csv"));
}

TEST_CASE("usage and input errors exit with code 1") {
    TempDir dir;
    CHECK(run_cli({"simulate", "--no-such-flag"}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"generate", "path"}) == 1);  // missing --n
    CHECK(run_cli({"simulate", "--edges", dir.file("missing.csv"), "--nodes",
                   dir.file("missing_nodes.csv"), "--out", dir.file("r")}) == 1);
    CHECK(run_cli({"simulate", "--out", dir.file("r2")}) == 1);  // no inputs at all
    CHECK(run_cli({"analyze", "--run", dir.file("no_run_here")}) == 1);
    CHECK(run_cli({"generate", "path", "--n", "1", "--out-edges", dir.file("e.csv"), "--out-nodes",
                   dir.file("n.csv")}) == 1);

    make_path_files(dir);
    CHECK(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                   "--out", dir.file("r3"), "--objective", "bogus"}) == 1);
    CHECK(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                   "--out", dir.file("r4"), "--horizon-days", "10.5"}) == 1);
    CHECK(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                   "--out", dir.file("r5"), "--s-network", "1.5"}) == 1);

    std::ofstream(dir.file("bad.json")) << "{\"horizon_days\": 10, \"mystery\": 1}";
    CHECK(run_cli({"simulate", "--config", dir.file("bad.json")}) == 1);
    std::ofstream(dir.file("broken.json")) << "{not json";
    CHECK(run_cli({"simulate", "--config", dir.file("broken.json")}) == 1);
}

TEST_CASE("corrupted snapshots fail analysis with code 1") {
    TempDir dir;
    make_path_files(dir);
    const std::string out = dir.file("corrupt");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "2", "--omega", "0.01", "--epsilon", "0.101",
                     "--save-policies"}) == 0);
    std::ofstream(out + "/policy_day_1.csv") << "source,target,u\n0,9,1\n";  // no such edge
    CHECK(run_cli({"analyze", "--run", out}) == 1);
    std::ofstream(out + "/policy_day_1.csv") << "source,target,u\n0,1,2.5\n";  // u outside [0, 1]
    CHECK(run_cli({"analyze", "--run", out}) == 1);
    std::ofstream(out + "/policy_day_1.csv") << "source,target,u\n0,1\n";  // too few fields
    CHECK(run_cli({"analyze", "--run", out}) == 1);
}

TEST_CASE("help exits cleanly") {
    CoutCapture capture;
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"simulate", "--help"}) == 0);
    CHECK(capture.text().find("simulate") != std::string::npos);
}

TEST_CASE("string node ids flow through simulate and analyze") {
    TempDir dir;
    std::ofstream(dir.file("nodes.csv")) << "node,opinion\nleft,0.2\nmid,0.5\nright,0.8\n";
    std::ofstream(dir.file("edges.csv"))
        << "source,target,rate\nleft,mid,1\nmid,left,1\nmid,right,1\nright,mid,1\n";
    const std::string out = dir.file("run");
    REQUIRE(run_cli({"simulate", "--edges", dir.file("edges.csv"), "--nodes", dir.file("nodes.csv"),
                     "--out", out, "--horizon-days", "4", "--omega", "0.01", "--epsilon", "0.5",
                     "--save-policies"}) == 0);
    const std::string snap = read_file(out + "/policy_day_0.csv");
    CHECK(snap.find("left") != std::string::npos);
    CHECK(read_file(out + "/final_opinions.csv").find("mid,") != std::string::npos);
    CHECK(fs::exists(dir.file("nodes.csv") + ".idmap.csv"));
    REQUIRE(run_cli({"analyze", "--run", out}) == 0);
    CHECK(fs::exists(out + "/analyze_report.csv"));
}
