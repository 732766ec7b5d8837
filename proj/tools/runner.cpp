#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "pmllab/errors.hpp"
#include "pmllab/freqdomain.hpp"
#include "pmllab/suite.hpp"
#include "pmllab/timedomain.hpp"

namespace fs = std::filesystem;

namespace pmllab::cli {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    files_.push_back(name);
  }

  /// Registers a file written by someone else.
  void add(const std::string& name) { files_.push_back(name); }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void manifest() {
    std::sort(files_.begin(), files_.end());
    std::string m;
    for (const auto& f : files_) {
      const fs::path p = dir_ / f;
      m += fmt::format("{}  {}  {}\n", sha256_file(p.string()), fs::file_size(p), f);
    }
    write("manifest.txt", m);
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

CheckOptions check_options(const ExperimentConfig& c) {
  CheckOptions o;
  o.seed = c.seed;
  o.tolerance_scale = c.tolerance_scale;
  o.threads = c.threads;
  return o;
}

Spinor seeded_polarization(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Spinor p(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  return p / p.norm();
}

std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + num(row[c]);
    out += "\n";
  }
  return out;
}

/// Mid-plane (k = n/2) values of a field.
std::string slice_csv(const SpinorField& f) {
  const Grid& g = f.grid();
  std::string out = "x,y,z,re_u1,im_u1,re_u2,im_u2\n";
  const int k = g.n[2] / 2;
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      const std::size_t node = g.index(i, j, k);
      const Vec3 x = g.point(node);
      const Spinor u = f.at(node);
      out += fmt::format("{},{},{},{},{},{},{}\n", num(x(0)), num(x(1)), num(x(2)), num(u(0).real()),
                         num(u(0).imag()), num(u(1).real()), num(u(1).imag()));
    }
  }
  return out;
}

int run_checks(const ExperimentConfig& c, const std::vector<const SuiteEntry*>& entries, Artifacts& art,
               std::ostream& log) {
  bool all = true;
  std::string summary = "number,check,status,verdicts,failed\n";
  for (const SuiteEntry* e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    const CheckReport r = e->run(c.desk, check_options(c));
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t failed = 0;
    for (const Verdict& v : r.verdicts()) failed += v.pass ? 0 : 1;
    all = all && r.passed();
    art.write(e->name + ".report.txt", r.to_text());
    for (const auto& [name, t] : r.tables()) art.write(fmt::format("{}_{}.csv", e->name, name), table_csv(t));
    summary += fmt::format("{},{},{},{},{}\n", e->number, e->name, r.passed() ? "pass" : "fail", r.verdicts().size(),
                           failed);
    log << fmt::format("{} {} ({:.1f} s)\n", r.passed() ? "PASS" : "FAIL", e->name, s);
    for (const Verdict& v : r.verdicts()) {
      if (!v.pass) log << fmt::format("  failed {}: {} {} {}\n", v.criterion, num(v.value), v.relation, num(v.bound));
    }
  }
  art.write("summary.csv", summary);
  return all ? kPass : kCheckFailed;
}

int run_timedomain(const ExperimentConfig& c, Artifacts& art, std::ostream& log) {
  SimConfig sim;
  sim.n = c.td_nodes;
  sim.cfl = c.cfl;
  sim.final_time = c.final_time;
  sim.probes = c.probes;
  sim.snapshot_stride = c.snapshot_stride;
  sim.threads = c.threads;
  SourceSpec src;
  src.center = c.source_center;
  src.radius = c.source_radius;
  src.duration = c.source_duration;
  src.polarization = seeded_polarization(c.seed);
  const BoxDomain box = c.desk.box();
  const RunResult result = run(sim, box, c.desk.profiles(), src);
  const Recording& rec = result.recording;
  for (std::size_t p = 0; p < rec.probe_points.size(); ++p) {
    const std::string name = fmt::format("probe_{}.csv", p);
    rec.write_probe_csv(art.path(name).string(), p);
    art.add(name);
  }
  std::string series = "t,l2,boundary_l2,source_l2,max_abs,energy\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    series += fmt::format("{},{},{},{},{},{}\n", num(rec.times[i]), num(rec.l2[i]), num(rec.boundary_l2[i]),
                          num(rec.source_l2[i]), num(rec.max_abs[i]), num(rec.energy[i]));
  }
  art.write("series.csv", series);
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    art.write(fmt::format("snapshot_{:04d}.csv", k), slice_csv(rec.snapshots[k].total));
  }
  log << fmt::format("timedomain: {} steps, dt = {:.6g}, final max |u| = {:.6g}\n", rec.times.size() - 1, rec.dt,
                     rec.max_abs.back());
  return kPass;
}

int run_freqdomain(const ExperimentConfig& c, Artifacts& art, std::ostream& log) {
  const BoxDomain box = c.desk.box();
  const Grid g = Grid::over_box(box, c.fd_nodes);
  SourceSpec src;
  src.radius = c.fd_source_radius;
  src.polarization = seeded_polarization(c.seed);
  const SpinorField F = src.spatial(g);
  std::string table = "re_tau,im_tau,l2,max_abs,solve_residual,second_bc_max\n";
  for (std::size_t k = 0; k < c.taus.size(); ++k) {
    const StretchContext ctx(c.taus[k], c.desk.profiles());
    SolveResult info;
    SpinorField u;
    if (c.formulation == "helmholtz") {
      u = solve_helmholtz(assemble_helmholtz(ctx, g, F), SolveOptions{}, &info);
    } else {
      u = solve_stretched(ctx, g, F, SolveOptions{}, &info);
    }
    const double bc = second_bc_residual(u, ctx).max;
    table += fmt::format("{},{},{},{},{},{}\n", num(c.taus[k].real()), num(c.taus[k].imag()), num(u.l2_norm()),
                         num(u.max_abs()), num(info.residual), num(bc));
    art.write(fmt::format("tau_{}_slice.csv", k), slice_csv(u));
    log << fmt::format("freqdomain: tau = {}{:+}i, ||u|| = {:.6g}, solve residual {:.2g}\n", c.taus[k].real(),
                       c.taus[k].imag(), u.l2_norm(), info.residual);
  }
  art.write("freqdomain.csv", table);
  return kPass;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  try {
    Artifacts art(config.output);
    art.write("config.txt", config.to_text());
    int code = kPass;
    if (config.kind == "timedomain") {
      code = run_timedomain(config, art, log);
    } else if (config.kind == "freqdomain") {
      code = run_freqdomain(config, art, log);
    } else if (config.kind == "suite") {
      code = run_checks(config, suite(config.suite), art, log);
    } else {
      code = run_checks(config, {&find_check(config.kind.substr(6))}, art, log);
    }
    art.manifest();
    return code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace pmllab::cli
