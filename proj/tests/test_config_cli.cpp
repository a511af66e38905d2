#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thermofem/cli.hpp"
#include "thermofem/config.hpp"
#include "thermofem/errors.hpp"
#include "thermofem/mesh.hpp"

using namespace thermofem;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(THERMOFEM_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("thermofem_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string tiny_mms(const fs::path& out, const std::string& sizes = "[2, 4, 8]") {
    return R"({"name": "tiny", "scheme": "euler", "degree": 1, "mesh_sizes": )" + sizes +
           R"(, "tau": 0.0625, "final_time": 0.125, "output_dir": ")" + out.string() + "\"}";
}

class ScopedEnv {
public:
    ScopedEnv(const char* name, const std::string& value) : name_(name) { setenv(name, value.c_str(), 1); }
    ~ScopedEnv() { unsetenv(name_); }

private:
    const char* name_;
};

}  // namespace

TEST(Configs, ShippedMmsConfigsParse) {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        const auto stem = e.path().stem().string();
        if (stem.rfind("example1", 0) != 0) continue;
        ++count;
        const auto c = load_mms_config(e.path());
        EXPECT_EQ(c.name, stem);
        EXPECT_NO_THROW(c.study.validate());
        EXPECT_DOUBLE_EQ(c.study.tau, 1.0 / 128);
        EXPECT_DOUBLE_EQ(c.study.final_time, 1.0);
        EXPECT_DOUBLE_EQ(c.study.pair.a2, 1e-4);
        EXPECT_EQ(c.study.variant.tag, stem.find("kuznetsov") != std::string::npos ? WaveVariant::Kuznetsov
                                                                                  : WaveVariant::Westervelt);
    }
    EXPECT_EQ(count, 6u);
    const auto p3 = load_mms_config(kConfigs / "example1_bdf2_p3.json");
    EXPECT_EQ(p3.study.mesh_sizes, (std::vector<std::size_t>{4, 8, 16, 32}));
    EXPECT_EQ(p3.study.scheme, SchemeKind::BDF2);
    EXPECT_EQ(p3.study.degree, 3);
}

TEST(Configs, ShippedScenarioConfigsParse) {
    const auto e2 = load_scenario_config(kConfigs / "example2.json");
    const auto ref = ScenarioConfig::example2();
    EXPECT_EQ(e2.example, ExampleKind::InitialExcitation);
    EXPECT_DOUBLE_EQ(e2.heat.kappa, ref.heat.kappa);
    EXPECT_DOUBLE_EQ(e2.heat.nu, ref.heat.nu);
    EXPECT_EQ(e2.model.speed.coefficients, quintic_liver_law().coefficients);
    EXPECT_EQ(e2.snapshots, ref.snapshots);
    const auto e3 = load_scenario_config(kConfigs / "example3.json");
    EXPECT_EQ(e3.example, ExampleKind::SourceExcitation);
    EXPECT_EQ(e3.variant.tag, WaveVariant::Kuznetsov);
    EXPECT_DOUBLE_EQ(e3.amplitude, 1e8);
    EXPECT_EQ(steps_for(e3.final_time, e3.tau), 400u);
}

TEST(Configs, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_mms_config(R"({"mesh_sizes": [8,16,32], "colour": 1})"), ConfigError);
    EXPECT_THROW(parse_mms_config(R"({"model": {"speed": 3}})"), ConfigError);
    EXPECT_THROW(parse_mms_config(R"({"mesh_sizes": [8,16]})"), ConfigError);
    EXPECT_THROW(parse_mms_config(R"({"degree": "two"})"), ConfigError);
    EXPECT_THROW(parse_mms_config("{not json"), ConfigError);
    EXPECT_THROW(parse_scenario_config(R"({"example": "initial_excitation", "projection": "ritz"})"), ConfigError);
    EXPECT_THROW(parse_scenario_config(R"({"formats": ["png"]})"), ConfigError);
    EXPECT_THROW(load_mms_config("/nonexistent/config.json"), ConfigError);
    try {
        parse_mms_config(R"({"heat": {"kappa": 1, "sigma": 2}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("/heat"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos) << e.what();
    }
}

TEST(Configs, DescribeRoundTrips) {
    const auto c = load_mms_config(kConfigs / "example1_bdf2_p2.json");
    const auto again = parse_mms_config(describe(c));
    EXPECT_EQ(again.study.mesh_sizes, c.study.mesh_sizes);
    EXPECT_EQ(again.study.degree, c.study.degree);
    EXPECT_EQ(again.study.scheme, c.study.scheme);
    EXPECT_DOUBLE_EQ(again.study.heat.nu, c.study.heat.nu);
    EXPECT_EQ(again.study.model.speed.coefficients, c.study.model.speed.coefficients);
    EXPECT_EQ(again.study.linear.method, c.study.linear.method);
    EXPECT_EQ(describe(again), describe(c));
    const auto s = load_scenario_config(kConfigs / "example3.json");
    const auto s2 = parse_scenario_config(describe(s));
    EXPECT_DOUBLE_EQ(s2.heat.kappa, s.heat.kappa);
    EXPECT_EQ(s2.snapshots, s.snapshots);
    EXPECT_EQ(describe(s2), describe(s));
}

TEST(Configs, OutputDirOverride) {
    unsetenv("THERMOFEM_OUTPUT_DIR");
    EXPECT_EQ(resolve_output_dir("results", "run"), fs::path("results"));
    ScopedEnv env("THERMOFEM_OUTPUT_DIR", "/tmp/override");
    EXPECT_EQ(resolve_output_dir("results", "run"), fs::path("/tmp/override/run"));
}

TEST(Cli, MmsWritesDeterministicCsv) {
    const auto dir = scratch("mms");
    write_file(dir / "tiny.json", tiny_mms(dir / "out"));
    std::ostringstream out, err;
    ASSERT_EQ(cmd_mms(dir / "tiny.json", {}, out, err), kExitOk) << err.str();
    const auto first = read_file(dir / "out" / "tiny.csv");
    EXPECT_EQ(first.rfind("h,E_tau,L2_error,rate_E,rate_L2\n", 0), 0u);
    EXPECT_TRUE(fs::exists(dir / "out" / "tiny_plot.dat"));
    RunOptions threaded;
    threaded.jobs = 3;
    ASSERT_EQ(cmd_mms(dir / "tiny.json", threaded, out, err), kExitOk);
    EXPECT_EQ(read_file(dir / "out" / "tiny.csv"), first);
    fs::remove_all(dir);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    const auto dir = scratch("bad");
    write_file(dir / "one.json", tiny_mms(dir / "out", "[8]"));
    std::ostringstream out, err;
    EXPECT_EQ(cmd_mms(dir / "one.json", {}, out, err), kExitConfig);
    EXPECT_FALSE(err.str().empty());
    EXPECT_EQ(cmd_mms(dir / "missing.json", {}, out, err), kExitConfig);
    EXPECT_EQ(cmd_scenario(dir / "missing.json", {}, out, err), kExitConfig);
    MeshgenOptions none;
    EXPECT_EQ(cmd_meshgen(none, out, err), kExitConfig);
    MeshgenOptions zero;
    zero.unit_square = 0;
    EXPECT_EQ(cmd_meshgen(zero, out, err), kExitConfig);
    fs::remove_all(dir);
}

TEST(Cli, RuntimeFailureExitsWithOne) {
    const auto dir = scratch("runtime");
    write_file(dir / "diverge.json",
               R"({"name": "d", "mesh_sizes": [2, 4, 8], "tau": 0.0625, "final_time": 0.125,
                   "fixed_point": {"tol": 1e-300, "max_iter": 1}, "output_dir": ")" +
                   (dir / "out").string() + "\"}");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_mms(dir / "diverge.json", {}, out, err), kExitRuntime);
    fs::remove_all(dir);
}

TEST(Cli, DryRunPrintsResolvedConfig) {
    const auto dir = scratch("dry");
    write_file(dir / "tiny.json", tiny_mms(dir / "out"));
    RunOptions dry;
    dry.dry_run = true;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_mms(dir / "tiny.json", dry, out, err), kExitOk);
    EXPECT_NE(out.str().find("\"mesh_sizes\""), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out"));
    std::ostringstream sout;
    EXPECT_EQ(cmd_scenario(kConfigs / "example3.json", dry, sout, err), kExitOk);
    EXPECT_NE(sout.str().find("source_excitation"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, EnvironmentRedirectsOutput) {
    const auto dir = scratch("env");
    write_file(dir / "tiny.json", tiny_mms(dir / "configured"));
    ScopedEnv env("THERMOFEM_OUTPUT_DIR", (dir / "redirected").string());
    std::ostringstream out, err;
    ASSERT_EQ(cmd_mms(dir / "tiny.json", {}, out, err), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "redirected" / "tiny" / "tiny.csv"));
    EXPECT_FALSE(fs::exists(dir / "configured"));
    fs::remove_all(dir);
}

TEST(Cli, ScenarioWritesSnapshots) {
    const auto dir = scratch("scenario");
    write_file(dir / "s.json", R"({"name": "coarse", "example": "initial_excitation", "mesh": {"focused_h": 0.004},
        "tau": 1e-7, "final_time": 5e-7, "snapshots": [1, 2, 3, 4, 5], "formats": ["vtk", "csv"],
        "output_dir": ")" + (dir / "out").string() + "\"}");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_scenario(dir / "s.json", {}, out, err), kExitOk) << err.str();
    std::size_t vtk = 0, csv = 0;
    for (const auto& e : fs::directory_iterator(dir / "out")) {
        vtk += e.path().extension() == ".vtk";
        csv += e.path().extension() == ".csv";
    }
    EXPECT_EQ(vtk, 5u);
    EXPECT_EQ(csv, 5u);
    EXPECT_TRUE(fs::exists(dir / "out" / "coarse_summary.json"));
    fs::remove_all(dir);
}

TEST(Cli, MeshgenUnitSquareAndFocused) {
    const auto dir = scratch("meshgen");
    MeshgenOptions sq;
    sq.unit_square = 16;
    sq.output = dir / "square.txt";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_meshgen(sq, out, err), kExitOk);
    EXPECT_EQ(load_mesh(sq.output).num_triangles(), 512u);
    MeshgenOptions fo;
    fo.focused_h = 4e-3;
    fo.output = dir / "focused.txt";
    ASSERT_EQ(cmd_meshgen(fo, out, err), kExitOk);
    const Mesh a = load_mesh(fo.output);
    const Mesh b = focused_domain_mesh(4e-3);
    EXPECT_EQ(a.num_triangles(), b.num_triangles());
    EXPECT_EQ(a.triangles(), b.triangles());
    for (std::size_t i = 0; i < a.num_vertices(); ++i) {
        EXPECT_EQ(a.vertices()[i].x, b.vertices()[i].x);
        EXPECT_EQ(a.vertices()[i].y, b.vertices()[i].y);
    }
    fs::remove_all(dir);
}
