#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "pmllab/timedomain.hpp"

using namespace pmllab;

// Regression goldens for three canonical pulses. Set PMLLAB_UPDATE_GOLDENS=1
// to rewrite the files after an intended change.

namespace {

struct Scenario {
  const char* name;
  Vec3 half;
  double sigma0;
  double final_time;
  int nodes;
};

RunResult run_scenario(const Scenario& s) {
  const BoxDomain box(s.half, 0.5);
  SimConfig c;
  c.n = {s.nodes, s.nodes, s.nodes};
  c.final_time = s.final_time;
  c.probes = {Vec3(0.0, 0.0, 0.0), Vec3(0.6 * s.half(0), 0.1, -0.2)};
  SourceSpec src;
  src.radius = 0.45 * s.half.minCoeff();
  src.duration = 0.5;
  src.polarization = Spinor(cplx(1.0, 0.0), cplx(0.0, 0.5));
  const Profiles p = s.sigma0 > 0 ? layer_profiles(box, ProfileKind::polynomial, s.sigma0)
                                  : Profiles{AbsorptionProfile::none(), AbsorptionProfile::none(),
                                             AbsorptionProfile::none()};
  return run(c, box, p, src);
}

std::string render(const Recording& rec) {
  std::string out = "t,l2,boundary_l2,re_p0_u1,im_p0_u1,re_p1_u2,im_p1_u2\n";
  for (std::size_t k = 0; k < rec.times.size(); k += 2) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", rec.times[k], rec.l2[k],
                       rec.boundary_l2[k], rec.probe_series[0][k](0).real(), rec.probe_series[0][k](0).imag(),
                       rec.probe_series[1][k](1).real(), rec.probe_series[1][k](1).imag());
  }
  return out;
}

std::vector<std::vector<double>> parse(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

void PrintTo(const Scenario& s, std::ostream* os) { *os << s.name; }

class Golden : public ::testing::TestWithParam<Scenario> {};

}  // namespace

TEST_P(Golden, MatchesStoredSeries) {
  const Scenario& s = GetParam();
  const std::string path = std::string(PMLLAB_GOLDEN_DIR) + "/" + s.name + ".csv";
  const std::string fresh = render(run_scenario(s).recording);
  const char* update = std::getenv("PMLLAB_UPDATE_GOLDENS");
  if (update != nullptr && std::string(update) == "1") {
    std::ofstream(path) << fresh;
    GTEST_SKIP() << "rewrote " << path;
  }
  std::ifstream is(path);
  ASSERT_TRUE(is) << "missing golden " << path;
  std::stringstream stored;
  stored << is.rdbuf();
  const auto want = parse(stored.str());
  const auto got = parse(fresh);
  ASSERT_EQ(want.size(), got.size());
  double scale = 0.0;
  for (const auto& row : want) scale = std::max(scale, std::abs(row[1]));
  for (std::size_t r = 0; r < want.size(); ++r) {
    ASSERT_EQ(want[r].size(), got[r].size());
    for (std::size_t c = 0; c < want[r].size(); ++c) {
      EXPECT_NEAR(got[r][c], want[r][c], 1e-10 * (1.0 + scale)) << s.name << " row " << r << " col " << c;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Pulses, Golden,
                         ::testing::Values(Scenario{"free_space_pulse", Vec3(3.0, 3.0, 3.0), 0.0, 1.5, 31},
                                           Scenario{"pml_pulse", Vec3(1.0, 1.0, 1.0), 20.0, 3.0, 21},
                                           Scenario{"hard_wall_pulse", Vec3(1.0, 1.0, 1.0), 0.0, 3.0, 15}),
                         [](const auto& info) { return std::string(info.param.name); });
