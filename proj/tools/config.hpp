#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pmllab/verify.hpp"

namespace pmllab::cli {

/// Line-oriented experiment description; see docs/config.md.
struct ExperimentConfig {
  // [experiment]
  std::string kind = "suite";  // timedomain | freqdomain | check:<name> | suite
  std::string suite = "identities";
  std::uint64_t seed = 1;
  std::string output = "pmllab_out";
  double tolerance_scale = 1.0;
  int threads = 1;

  // [domain] and [profile]
  DeskSetup desk;

  // [timedomain]
  std::array<int, 3> td_nodes{24, 24, 24};
  double cfl = 0.5;
  double final_time = 4.0;
  double source_radius = 0.3;
  double source_duration = 1.0;
  Vec3 source_center = Vec3::Zero();
  std::vector<Vec3> probes{Vec3::Zero()};
  int snapshot_stride = 0;

  // [freqdomain]
  std::array<int, 3> fd_nodes{16, 16, 16};
  std::vector<cplx> taus{cplx(2.0, 1.0)};
  double fd_source_radius = 0.45;
  std::string formulation = "stretched";  // stretched | helmholtz

  /// Canonical form with every key; parses back to the same config.
  std::string to_text() const;
};

/// Throws ParseError (syntax, with line numbers) or ValidationError (field
/// names); the message lists every problem found, one per line.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ExperimentConfig parse_config(const std::string& path);

/// "2", "2+1i", "-0.5-3i", "4i".
cplx parse_complex(const std::string& s);

}  // namespace pmllab::cli
