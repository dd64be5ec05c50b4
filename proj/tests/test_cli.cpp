#include <sys/wait.h>

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <random>
#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>
#include <json.hpp>

#include "../tools/output.hpp"

using ds_cli::num;
using ds_cli::parse_csv;
using ds_cli::Table;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(DS_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

double cell(const Table& t, size_t row, const std::string& col) {
  auto it = std::find(t.header.begin(), t.header.end(), col);
  if (it == t.header.end()) throw std::runtime_error("no column " + col);
  return std::strtod(t.rows.at(row)[it - t.header.begin()].c_str(), nullptr);
}

}  // namespace

TEST(Output, NumbersRoundTrip) {
  std::mt19937_64 g(9);
  for (int i = 0; i < 1000; ++i) {
    double v;
    uint64_t bits = g();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(std::strtod(num(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(num(INFINITY), "inf");
  EXPECT_EQ(num(-INFINITY), "-inf");
  EXPECT_EQ(num(NAN), "nan");
  EXPECT_TRUE(std::isinf(std::strtod(num(-INFINITY).c_str(), nullptr)));
}

TEST(Output, CsvParsesBackToTheSameTable) {
  Table t;
  t.format = "test/1";
  t.header = {"a", "b"};
  t.add({num(1.0 / 3.0), "x"});
  t.add({num(-2e-300), num(NAN)});
  auto back = parse_csv(t.csv());
  EXPECT_EQ(back.format, t.format);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.csv(), t.csv());
  EXPECT_THROW(t.add({"only one"}), std::logic_error);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("spectrum --preset no-such-preset").code, 1);
  EXPECT_EQ(run("spectrum --preset box --param bogus=1").code, 1);
  EXPECT_EQ(run("spectrum --preset box --param z=abc").code, 1);
  EXPECT_EQ(run("--no-such-flag").code, 1);
  EXPECT_EQ(run("spectrum --preset example2-broken").code, 3);
  EXPECT_EQ(run("verify-algebra").code, 0);
  EXPECT_EQ(run("verify-algebra --inject-fault").code, 2);
}

TEST(Cli, UnknownPresetListsTheCatalog) {
  std::string cmd = std::string(DS_CLI_PATH) + " spectrum --preset nope 2>&1";
  FILE* f = popen(cmd.c_str(), "r");
  std::string all;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) all.append(buf, n);
  pclose(f);
  EXPECT_NE(all.find("example1-fig1-left"), std::string::npos);
  EXPECT_NE(all.find("dwt-zundel"), std::string::npos);
}

TEST(Cli, BoxSpectrumValues) {
  auto r = run("spectrum --preset box");
  ASSERT_EQ(r.code, 0);
  auto t = parse_csv(r.out);
  EXPECT_EQ(t.format, "deformed-spectra/spectrum/1");
  ASSERT_GE(t.rows.size(), 4u);
  for (size_t n = 0; n < 4; ++n) {
    double exact = 0.5 * (n + 1) * (n + 1);
    EXPECT_DOUBLE_EQ(cell(t, n, "E_analytic"), exact);
    EXPECT_NEAR(cell(t, n, "E_numeric"), exact, 1e-7);
  }
}

TEST(Cli, OutputIsDeterministic) {
  auto a = run("spectrum --preset example1-fig1-left"), b = run("spectrum --preset example1-fig1-left");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto p = run("potential --preset example2");
  EXPECT_EQ(p.out, run("potential --preset example2").out);
}

TEST(Cli, JsonOutput) {
  auto r = run("spectrum --preset sl2-warmup --format json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["format"], "deformed-spectra/spectrum/1");
  ASSERT_GE(j["rows"].size(), 4u);
  auto algebra = nlohmann::json::parse(run("verify-algebra").out);
  EXPECT_EQ(algebra["format"], "deformed-spectra/algebra-report/1");
}

TEST(Cli, PresetFileMatchesEquivalentParams) {
  std::string file = std::string(DS_SOURCE_DIR) + "/docs/examples/example1-deep.json";
  auto a = run("spectrum --preset-file " + file);
  auto b = run("spectrum --preset example1-fig1-left --param z=2 --param mu_0=3 --param states=6");
  ASSERT_EQ(a.code, 0);
  auto ta = parse_csv(a.out), tb = parse_csv(b.out);
  EXPECT_EQ(ta.rows.size(), 6u);
  EXPECT_EQ(ta.rows, tb.rows);
  EXPECT_EQ(run("spectrum --preset-file /nonexistent.json").code, 1);
}

TEST(Cli, CompareReportsSmallGap) {
  auto r = run("compare --preset example1-fig2-left");
  ASSERT_EQ(r.code, 0);
  auto t = parse_csv(r.out);
  for (size_t i = 0; i < t.rows.size(); ++i)
    EXPECT_LT(cell(t, i, "abs_diff"), 1e-8 * std::max(1.0, std::abs(cell(t, i, "U_closed"))));
}

TEST(Cli, ZscanLimitsAndPoles) {
  auto r = run("zscan --preset example3-text --z 0,0.25,inf");
  ASSERT_EQ(r.code, 0);
  auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(cell(t, 0, "pole"), 1.0);  // z = 0 carries the centrifugal term
  EXPECT_EQ(cell(t, 1, "pole"), 0.0);
  EXPECT_EQ(cell(t, 2, "pole"), 0.0);
  // z = inf with mu0 = mu- = mu+ = 1 is an oscillator shifted by mu0.
  EXPECT_NEAR(cell(t, 2, "E0"), 1.5, 1e-6);
  EXPECT_NEAR(cell(t, 2, "E1"), 2.5, 1e-6);
  // A single finite z agrees with the spectrum command.
  auto s = parse_csv(run("spectrum --preset example3-text --param z=0.25").out);
  EXPECT_NEAR(cell(t, 1, "E0"), cell(s, 0, "E_numeric"), 1e-9 * std::abs(cell(s, 0, "E_numeric")));
}

TEST(Cli, FigureWritesManifest) {
  auto dir = std::filesystem::temp_directory_path() / ("ds-cli-test-" + std::to_string(getpid()));
  auto r = run("figure f5 --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  auto man = nlohmann::json::parse(ds_cli::read_file((dir / "f5.json").string()));
  EXPECT_EQ(man["format"], "deformed-spectra/figure/1");
  ASSERT_EQ(man["panels"].size(), 1u);
  EXPECT_EQ(man["panels"][0]["potentials"], 4);
  EXPECT_TRUE(std::filesystem::exists(dir / "f5.svg"));
  EXPECT_EQ(run("figure f99 --out " + dir.string()).code, 1);
  std::filesystem::remove_all(dir);
}
