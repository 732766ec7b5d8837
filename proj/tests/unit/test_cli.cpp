#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "config.hpp"
#include "pmllab/errors.hpp"
#include "runner.hpp"

using namespace pmllab;
using namespace pmllab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pmllab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text, "t.ini");
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const ExperimentConfig c = parse_config_text("[experiment]\nkind = check:algebra\n");
  EXPECT_EQ(c.kind, "check:algebra");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_DOUBLE_EQ(c.cfl, 0.5);
  EXPECT_DOUBLE_EQ(c.desk.sigma0, 20.0);
  EXPECT_NE(c.to_text().find("cfl = 0.5"), std::string::npos);
}

TEST(Config, EchoParsesBackToSameConfig) {
  ExperimentConfig c = parse_config_text(
      "[experiment]\nkind = freqdomain\nseed = 9\n[freqdomain]\ntaus = 2+1i, 4, 3-2.5i\nnodes = 9 11 13\n"
      "[timedomain]\nprobes = 0 0 0, 0.1 0.2 0.3\n");
  const std::string text = c.to_text();
  EXPECT_EQ(parse_config_text(text).to_text(), text);
  ASSERT_EQ(c.taus.size(), 3u);
  EXPECT_EQ(c.taus[2], cplx(3.0, -2.5));
  EXPECT_EQ(c.fd_nodes[2], 13);
  EXPECT_EQ(c.probes[1](2), 0.3);
}

TEST(Config, CommentsAndBlankLines) {
  const ExperimentConfig c = parse_config_text("# header\n\n[profile]  # layer\nsigma0 = 5 # weak\n");
  EXPECT_DOUBLE_EQ(c.desk.sigma0, 5.0);
}

TEST(Config, CflAboveBoundNamesTheBound) {
  EXPECT_THROW(parse_config_text("[timedomain]\ncfl = 1.5\n"), ValidationError);
  const std::string m = message_of("[timedomain]\ncfl = 1.5\n");
  EXPECT_NE(m.find("timedomain.cfl"), std::string::npos);
  EXPECT_NE(m.find("CFL bound"), std::string::npos);
}

TEST(Config, NegativeSigmaCitesNonNegativity) {
  EXPECT_THROW(parse_config_text("[profile]\nsigma0 = -1\n"), ValidationError);
  EXPECT_NE(message_of("[profile]\nsigma0 = -1\n").find("sigma >= 0"), std::string::npos);
}

TEST(Config, ReportsEveryValidationError) {
  const std::string m = message_of("[profile]\nsigma0 = -1\norder = 0\n[timedomain]\ncfl = 2\n");
  EXPECT_NE(m.find("profile.sigma0"), std::string::npos);
  EXPECT_NE(m.find("profile.order"), std::string::npos);
  EXPECT_NE(m.find("timedomain.cfl"), std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  const std::string text = "[experiment]\nbogus = 1\nkind\n[nowhere]\nx = 1\n[timedomain]\ncfl = fast\ncfl = 0.5\n";
  EXPECT_THROW(parse_config_text(text, "t.ini"), ParseError);
  const std::string m = message_of(text);
  EXPECT_NE(m.find("t.ini:2: unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(m.find("t.ini:3: expected 'key = value'"), std::string::npos);
  EXPECT_NE(m.find("t.ini:4: unknown section [nowhere]"), std::string::npos);
  EXPECT_NE(m.find("t.ini:7: timedomain.cfl: 'fast' is not a number"), std::string::npos);
  EXPECT_NE(m.find("t.ini:8: duplicate key 'cfl'"), std::string::npos);
}

TEST(Config, KeyBeforeSectionRejected) { EXPECT_THROW(parse_config_text("seed = 3\n"), ParseError); }

TEST(Config, UnknownKindAndCheckRejected) {
  EXPECT_THROW(parse_config_text("[experiment]\nkind = movie\n"), ValidationError);
  EXPECT_THROW(parse_config_text("[experiment]\nkind = check:nothing\n"), ValidationError);
  EXPECT_THROW(parse_config_text("[experiment]\nsuite = most\n"), ValidationError);
}

TEST(Config, SourceOutsideInnerBoxRejected) {
  EXPECT_THROW(parse_config_text("[timedomain]\nsource_center = 0.4 0 0\n"), ValidationError);
}

TEST(Config, MissingFileIsParseError) { EXPECT_THROW(parse_config("/nonexistent/pmllab.ini"), ParseError); }

TEST(Complex, Forms) {
  EXPECT_EQ(parse_complex("2"), cplx(2.0, 0.0));
  EXPECT_EQ(parse_complex("2+1i"), cplx(2.0, 1.0));
  EXPECT_EQ(parse_complex("-0.5-3i"), cplx(-0.5, -3.0));
  EXPECT_EQ(parse_complex("4i"), cplx(0.0, 4.0));
  EXPECT_EQ(parse_complex("1e2-i"), cplx(100.0, -1.0));
  EXPECT_EQ(parse_complex(" 3 + 2i "), cplx(3.0, 2.0));
  EXPECT_THROW(parse_complex("2 3i"), std::invalid_argument);
  EXPECT_THROW(parse_complex("abc"), std::invalid_argument);
  EXPECT_THROW(parse_complex(""), std::invalid_argument);
}

TEST(Runner, Sha256KnownVector) {
  const fs::path p = scratch("sha");
  fs::create_directories(p);
  std::ofstream(p / "abc") << "abc";
  EXPECT_EQ(sha256_file((p / "abc").string()), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, PassingCheckExitsZeroWithManifest) {
  const fs::path out = scratch("pass");
  ExperimentConfig c = parse_config_text("[experiment]\nkind = check:algebra\n");
  c.output = out.string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), kPass);
  EXPECT_NE(log.str().find("PASS algebra"), std::string::npos);
  std::istringstream manifest(slurp(out / "manifest.txt"));
  std::string hash, name;
  std::size_t size = 0;
  int entries = 0;
  while (manifest >> hash >> size >> name) {
    EXPECT_EQ(hash, sha256_file((out / name).string())) << name;
    EXPECT_EQ(size, fs::file_size(out / name));
    ++entries;
  }
  EXPECT_GE(entries, 3);
  const CheckReport r = CheckReport::from_text(slurp(out / "algebra.report.txt"));
  EXPECT_TRUE(r.passed());
}

TEST(Runner, ZeroToleranceExitsTwo) {
  ExperimentConfig c = parse_config_text("[experiment]\nkind = check:algebra\ntolerance_scale = 0\n");
  c.output = scratch("fail").string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), kCheckFailed);
  EXPECT_NE(log.str().find("FAIL algebra"), std::string::npos);
}

TEST(Runner, MissingOutputDirectoryIsCreated) {
  const fs::path out = scratch("nested") / "a" / "b";
  ExperimentConfig c = parse_config_text("[experiment]\nkind = check:perturbation\n");
  c.output = out.string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), kPass);
  EXPECT_TRUE(fs::exists(out / "manifest.txt"));
}

TEST(Runner, UnwritableOutputExitsOne) {
  const fs::path base = scratch("file");
  fs::create_directories(base);
  std::ofstream(base / "plain") << "x";
  ExperimentConfig c = parse_config_text("[experiment]\nkind = check:algebra\n");
  c.output = (base / "plain" / "sub").string();
  std::ostringstream log;
  EXPECT_EQ(run_experiment(c, log), kRuntimeError);
  EXPECT_NE(log.str().find("error:"), std::string::npos);
}

TEST(Runner, IdenticalConfigAndSeedGiveIdenticalCsvs) {
  const std::string text =
      "[experiment]\nkind = timedomain\nseed = 5\n[timedomain]\nnodes = 11\nfinal_time = 0.5\nsnapshot_stride = 4\n"
      "probes = 0 0 0, 0.3 0 0\n";
  ExperimentConfig a = parse_config_text(text);
  ExperimentConfig b = a;
  a.output = scratch("det_a").string();
  b.output = scratch("det_b").string();
  std::ostringstream log;
  ASSERT_EQ(run_experiment(a, log), kPass);
  ASSERT_EQ(run_experiment(b, log), kPass);
  int csvs = 0;
  for (const auto& entry : fs::directory_iterator(a.output)) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(fs::path(b.output) / entry.path().filename())) << entry.path();
    ++csvs;
  }
  EXPECT_GE(csvs, 4);
}

TEST(Runner, DifferentSeedChangesTheSource) {
  const std::string text = "[experiment]\nkind = freqdomain\n[freqdomain]\nnodes = 9\ntaus = 3\n";
  ExperimentConfig a = parse_config_text(text);
  ExperimentConfig b = a;
  b.seed = 2;
  a.output = scratch("seed_a").string();
  b.output = scratch("seed_b").string();
  std::ostringstream log;
  ASSERT_EQ(run_experiment(a, log), kPass);
  ASSERT_EQ(run_experiment(b, log), kPass);
  EXPECT_NE(slurp(fs::path(a.output) / "tau_0_slice.csv"), slurp(fs::path(b.output) / "tau_0_slice.csv"));
}
