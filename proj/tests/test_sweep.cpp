#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "duffing/sweep.hpp"

using namespace duffing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("duffing_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode config_error(const json& j) {
  try {
    config_from_json(j).validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io_failure;  // sentinel: no error raised
}

}  // namespace

TEST(Ranges, ParseAndGrid) {
  const Range r = parse_range("-10:2:241", "delta");
  EXPECT_EQ(r.count, 241);
  EXPECT_EQ(r.at(0), -10.0);
  EXPECT_EQ(r.at(240), 2.0);
  EXPECT_NEAR(r.at(120), -4.0, 1e-14);
  EXPECT_THROW(parse_range("1:2", "x"), Error);
  EXPECT_THROW(parse_range("1:2:0", "x"), Error);
  EXPECT_THROW(parse_range("a:2:3", "x"), Error);
}

TEST(Scan, ParseSpec) {
  const ScanSpec s = parse_scan("epsilon=3.2");
  EXPECT_EQ(s.axis, "epsilon");
  EXPECT_EQ(s.value, 3.2);
  EXPECT_THROW(parse_scan("gamma=1"), Error);
  EXPECT_THROW(parse_scan("epsilon"), Error);
}

TEST(Config, RejectsBadDocuments) {
  EXPECT_EQ(config_error({{"gama", 2.0}}), ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"gamma", -1.0}}), ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"method", "magic"}}), ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"workers", 0}}), ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"analyze", {"entropy"}}}), ErrorCode::invalid_config);  // no point
  EXPECT_EQ(config_error({{"analyze", {"tomography"}}, {"point", {{"delta", -5.2}, {"epsilon", 3.2}}}}),
            ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"gamma", "two"}}), ErrorCode::invalid_config);
  EXPECT_EQ(config_error({{"epsilon_range", "-1:2:3"}}), ErrorCode::invalid_config);
}

TEST(Config, RoundTrip) {
  SweepConfig c;
  c.gamma = 0.5;
  c.method = Method::both;
  c.scan = ScanSpec{"delta", -2.0};
  const SweepConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.gamma, 0.5);
  EXPECT_EQ(back.method, Method::both);
  ASSERT_TRUE(back.scan.has_value());
  EXPECT_EQ(back.scan->axis, "delta");
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Cells, BothMethodsAgree) {
  SweepConfig c;
  c.method = Method::both;
  for (double d : {-7.8, -5.2, 0.5}) {
    const CellResult r = evaluate_cell(c, d, 3.2);
    EXPECT_EQ(r.status, "ok");
    ASSERT_TRUE(r.alternate.has_value());
    EXPECT_LT(r.discrepancy, 1e-6);
    EXPECT_LT(r.residual, tol::resid);
  }
}

TEST(Cells, ErrorsAreRecordedNotThrown) {
  SweepConfig c;
  c.method = Method::numeric;
  c.dim = 1;
  const CellResult r = evaluate_cell(c, -1.0, 1.0);
  EXPECT_EQ(r.status, "invalid-dimension");
  EXPECT_TRUE(std::isnan(r.value.real()));
}

TEST(Sweep, ByteIdenticalAcrossWorkerCounts) {
  SweepConfig c;
  c.method = Method::both;
  c.delta = parse_range("-8:0:9", "delta");
  c.epsilon = parse_range("0.5:3:4", "epsilon");
  std::string csv[2];
  int k = 0;
  for (int w : {1, 4}) {
    c.workers = w;
    c.out_dir = scratch("workers" + std::to_string(w)).string();
    run(c);
    csv[k++] = slurp(fs::path(c.out_dir) / "sweep.csv");
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_NE(csv[0].find("delta,epsilon,re_a"), std::string::npos);
}

TEST(Sweep, ManifestIsDeterministic) {
  SweepConfig c;
  c.delta = parse_range("-6:-2:5", "delta");
  c.epsilon = parse_range("1:2:2", "epsilon");
  c.out_dir = scratch("manifest").string();
  run(c);
  const std::string a = slurp(fs::path(c.out_dir) / "manifest.json");
  run(c);
  EXPECT_EQ(a, slurp(fs::path(c.out_dir) / "manifest.json"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "timing.json"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "bifurcation.csv"));
}

TEST(Scan, OutOfRangeValueRejected) {
  SweepConfig c;
  c.scan = ScanSpec{"epsilon", 50.0};
  try {
    line_scan(c, *c.scan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Analyze, UndrivenMetastableIsDegenerate) {
  SweepConfig c;
  c.point = std::make_pair(-3.0, 0.0);
  c.analyze = {"metastable"};
  c.out_dir = scratch("degenerate").string();
  try {
    run(c);
    FAIL();
  } catch (const RunError& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_request);
    EXPECT_EQ(e.task, "metastable");
  }
}

TEST(Analyze, PointCEntropyAndSpectrum) {
  SweepConfig c;
  c.point = std::make_pair(-5.2, 3.2);
  c.analyze = {"entropy", "spectrum"};
  c.out_dir = scratch("pointc").string();
  const RunSummary s = run(c);
  EXPECT_NEAR(s.manifest["results"]["entropy"]["entropy_bits"].get<double>(), 1.736, 0.01);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "spectrum.csv"));
}

#ifdef DUFFING_CLI_PATH
namespace {
int run_cli(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string("\"") + DUFFING_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  return std::system(cmd.c_str());
}
}  // namespace

TEST(Cli, ErrorsAreJsonOnStderr) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path err = dir / "stderr.txt";
  EXPECT_NE(run_cli("--gamma=-1 --out-dir " + (dir / "o").string(), err), 0);
  const json j = json::parse(slurp(err));
  EXPECT_EQ(j["error"]["code"], "invalid-config");
  EXPECT_EQ(j["error"]["task"], "config");

  EXPECT_NE(run_cli("--point=-3,0 --analyze metastable --out-dir " + (dir / "o").string(), err), 0);
  const json k = json::parse(slurp(err));
  EXPECT_EQ(k["error"]["code"], "degenerate-request");
  EXPECT_EQ(k["error"]["task"], "metastable");
}

TEST(Cli, ScanWritesCsv) {
  const fs::path dir = scratch("cli_scan");
  EXPECT_EQ(run_cli("--scan epsilon=3.2 --delta-range=-8:-2:7 --out-dir " + dir.string(), dir.parent_path() / "cli_scan_err"), 0);
  EXPECT_TRUE(fs::exists(dir / "scan.csv"));
}
#endif
