#include "config.hpp"

#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pmllab/errors.hpp"
#include "pmllab/suite.hpp"
#include "pmllab/timedomain.hpp"

namespace pmllab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument(fmt::format("'{}' is not an integer", s));
  return v;
}

Vec3 to_vec3(const std::string& s) {
  const auto w = words(s);
  if (w.size() != 3) throw std::invalid_argument(fmt::format("'{}' needs three numbers", s));
  return Vec3(to_double(w[0]), to_double(w[1]), to_double(w[2]));
}

std::array<int, 3> to_nodes(const std::string& s) {
  const auto w = words(s);
  if (w.size() == 1) {
    const int n = static_cast<int>(to_integer(w[0]));
    return {n, n, n};
  }
  if (w.size() == 3) {
    return {static_cast<int>(to_integer(w[0])), static_cast<int>(to_integer(w[1])),
            static_cast<int>(to_integer(w[2]))};
  }
  throw std::invalid_argument(fmt::format("'{}' needs one or three node counts", s));
}

std::string num(double v) { return fmt::format("{}", v); }
std::string vec(const Vec3& v) { return fmt::format("{} {} {}", v(0), v(1), v(2)); }
std::string nodes(const std::array<int, 3>& n) {
  return n[0] == n[1] && n[1] == n[2] ? std::to_string(n[0]) : fmt::format("{} {} {}", n[0], n[1], n[2]);
}
std::string complex_text(cplx z) { return fmt::format("{}{:+}i", z.real(), z.imag()); }

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<Field> f = {
      {"experiment", "kind", [](C& c, S v) { c.kind = v; }, [](const C& c) { return c.kind; }},
      {"experiment", "suite", [](C& c, S v) { c.suite = v; }, [](const C& c) { return c.suite; }},
      {"experiment", "seed",
       [](C& c, S v) {
         const long long s = to_integer(v);
         if (s < 0) throw std::invalid_argument("seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       },
       [](const C& c) { return std::to_string(c.seed); }},
      {"experiment", "output", [](C& c, S v) { c.output = v; }, [](const C& c) { return c.output; }},
      {"experiment", "tolerance_scale", [](C& c, S v) { c.tolerance_scale = to_double(v); },
       [](const C& c) { return num(c.tolerance_scale); }},
      {"experiment", "threads", [](C& c, S v) { c.threads = static_cast<int>(to_integer(v)); },
       [](const C& c) { return std::to_string(c.threads); }},
      {"domain", "half_lengths", [](C& c, S v) { c.desk.half_lengths = to_vec3(v); },
       [](const C& c) { return vec(c.desk.half_lengths); }},
      {"domain", "inner_fraction", [](C& c, S v) { c.desk.inner_fraction = to_double(v); },
       [](const C& c) { return num(c.desk.inner_fraction); }},
      {"profile", "kind",
       [](C& c, S v) {
         if (v == "polynomial") {
           c.desk.profile = ProfileKind::polynomial;
         } else if (v == "smooth") {
           c.desk.profile = ProfileKind::smooth;
         } else {
           throw std::invalid_argument(fmt::format("'{}' is not polynomial or smooth", v));
         }
       },
       [](const C& c) { return std::string(c.desk.profile == ProfileKind::polynomial ? "polynomial" : "smooth"); }},
      {"profile", "sigma0", [](C& c, S v) { c.desk.sigma0 = to_double(v); },
       [](const C& c) { return num(c.desk.sigma0); }},
      {"profile", "order", [](C& c, S v) { c.desk.order = static_cast<int>(to_integer(v)); },
       [](const C& c) { return std::to_string(c.desk.order); }},
      {"timedomain", "nodes", [](C& c, S v) { c.td_nodes = to_nodes(v); },
       [](const C& c) { return nodes(c.td_nodes); }},
      {"timedomain", "cfl", [](C& c, S v) { c.cfl = to_double(v); }, [](const C& c) { return num(c.cfl); }},
      {"timedomain", "final_time", [](C& c, S v) { c.final_time = to_double(v); },
       [](const C& c) { return num(c.final_time); }},
      {"timedomain", "source_radius", [](C& c, S v) { c.source_radius = to_double(v); },
       [](const C& c) { return num(c.source_radius); }},
      {"timedomain", "source_duration", [](C& c, S v) { c.source_duration = to_double(v); },
       [](const C& c) { return num(c.source_duration); }},
      {"timedomain", "source_center", [](C& c, S v) { c.source_center = to_vec3(v); },
       [](const C& c) { return vec(c.source_center); }},
      {"timedomain", "probes",
       [](C& c, S v) {
         c.probes.clear();
         for (const auto& p : split(v, ',')) c.probes.push_back(to_vec3(p));
       },
       [](const C& c) {
         std::string s;
         for (std::size_t i = 0; i < c.probes.size(); ++i) s += (i ? ", " : "") + vec(c.probes[i]);
         return s;
       }},
      {"timedomain", "snapshot_stride", [](C& c, S v) { c.snapshot_stride = static_cast<int>(to_integer(v)); },
       [](const C& c) { return std::to_string(c.snapshot_stride); }},
      {"freqdomain", "nodes", [](C& c, S v) { c.fd_nodes = to_nodes(v); },
       [](const C& c) { return nodes(c.fd_nodes); }},
      {"freqdomain", "taus",
       [](C& c, S v) {
         c.taus.clear();
         for (const auto& t : split(v, ',')) c.taus.push_back(parse_complex(t));
       },
       [](const C& c) {
         std::string s;
         for (std::size_t i = 0; i < c.taus.size(); ++i) s += (i ? ", " : "") + complex_text(c.taus[i]);
         return s;
       }},
      {"freqdomain", "source_radius", [](C& c, S v) { c.fd_source_radius = to_double(v); },
       [](const C& c) { return num(c.fd_source_radius); }},
      {"freqdomain", "formulation", [](C& c, S v) { c.formulation = v; },
       [](const C& c) { return c.formulation; }},
  };
  return f;
}

void validate(const ExperimentConfig& c, std::vector<std::string>& errors) {
  auto bad = [&](const std::string& field, const std::string& what) { errors.push_back(field + ": " + what); };
  if (c.kind.rfind("check:", 0) == 0) {
    try {
      find_check(c.kind.substr(6));
    } catch (const ValidationError& e) {
      bad("experiment.kind", e.what());
    }
  } else if (c.kind != "suite" && c.kind != "timedomain" && c.kind != "freqdomain") {
    bad("experiment.kind", fmt::format("'{}' is not timedomain, freqdomain, suite or check:<name>", c.kind));
  }
  if (c.kind == "suite") {
    try {
      pmllab::suite(c.suite);
    } catch (const ValidationError& e) {
      bad("experiment.suite", e.what());
    }
  }
  if (c.output.empty()) bad("experiment.output", "must not be empty");
  if (!(c.tolerance_scale >= 0.0)) bad("experiment.tolerance_scale", "must be >= 0");
  if (c.threads < 1) bad("experiment.threads", "must be >= 1");
  for (int a = 0; a < 3; ++a) {
    if (!(c.desk.half_lengths(a) > 0.0)) bad("domain.half_lengths", "must be positive");
  }
  if (!(c.desk.inner_fraction > 0.0 && c.desk.inner_fraction < 1.0)) {
    bad("domain.inner_fraction", "must lie in (0, 1)");
  }
  if (!(c.desk.sigma0 >= 0.0)) bad("profile.sigma0", fmt::format("{} violates sigma >= 0", c.desk.sigma0));
  if (c.desk.order < 1) bad("profile.order", "must be >= 1");

  SimConfig sim;
  sim.n = c.td_nodes;
  sim.cfl = c.cfl;
  sim.final_time = c.final_time;
  sim.snapshot_stride = c.snapshot_stride;
  sim.threads = c.threads;
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) {
    bad("timedomain.cfl", fmt::format("{} violates the CFL bound 0 < cfl <= 1", c.cfl));
  } else {
    try {
      sim.validate();
    } catch (const DomainError& e) {
      bad("timedomain", e.what());
    }
  }
  const bool box_ok = c.desk.half_lengths.minCoeff() > 0.0 && c.desk.inner_fraction > 0.0 &&
                      c.desk.inner_fraction < 1.0;
  if (box_ok) {
    const BoxDomain box = c.desk.box();
    SourceSpec src;
    src.center = c.source_center;
    src.radius = c.source_radius;
    src.duration = c.source_duration;
    try {
      src.validate(box);
    } catch (const DomainError& e) {
      bad("timedomain.source", e.what());
    }
    for (const Vec3& p : c.probes) {
      if ((p.cwiseAbs() - c.desk.half_lengths).maxCoeff() > 0.0) bad("timedomain.probes", "probe outside the box");
    }
    SourceSpec fsrc;
    fsrc.radius = c.fd_source_radius;
    try {
      fsrc.validate(box);
    } catch (const DomainError& e) {
      bad("freqdomain.source_radius", e.what());
    }
  }
  for (int a = 0; a < 3; ++a) {
    if (c.fd_nodes[a] < 5) {
      bad("freqdomain.nodes", "need at least 5 nodes per axis");
      break;
    }
  }
  if (c.taus.empty()) bad("freqdomain.taus", "must list at least one tau");
  for (cplx t : c.taus) {
    if (!(t.real() > 0.0)) bad("freqdomain.taus", fmt::format("{} needs Re tau > 0", complex_text(t)));
  }
  if (c.formulation != "stretched" && c.formulation != "helmholtz") {
    bad("freqdomain.formulation", fmt::format("'{}' is not stretched or helmholtz", c.formulation));
  }
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += (s.empty() ? "" : "\n") + l;
  return s;
}

}  // namespace

cplx parse_complex(const std::string& text) {
  static const std::regex re(
      R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(?:([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*i)?\s*$)");
  std::smatch m;
  if (text.find_first_not_of(" \t") == std::string::npos || !std::regex_match(text, m, re)) {
    throw std::invalid_argument(fmt::format("'{}' is not a complex number", text));
  }
  const bool has_imag = text.find('i') != std::string::npos;
  const bool unsigned_imag = m[2].length() == 0;
  double re_part = m[1].matched ? std::stod(m[1].str()) : 0.0;
  double im_part = 0.0;
  if (has_imag) {
    const double sign = m[2].str() == "-" ? -1.0 : 1.0;
    if (m[3].matched) {
      if (m[1].matched && unsigned_imag) throw std::invalid_argument(fmt::format("'{}' is not a complex number", text));
      im_part = sign * std::stod(m[3].str());
    } else if (m[1].matched && unsigned_imag) {
      im_part = re_part;  // "4i"
      re_part = 0.0;
    } else {
      im_part = sign;
    }
  }
  return {re_part, im_part};
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      section = f.section;
      out += (out.empty() ? "" : "\n") + fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(*this));
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  std::vector<std::string> syntax;
  std::set<std::string> seen;
  std::set<std::string> sections;
  for (const Field& f : fields()) sections.insert(f.section);
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  auto err = [&](const std::string& what) { syntax.push_back(fmt::format("{}:{}: {}", source, line, what)); };
  while (std::getline(is, raw)) {
    ++line;
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        err("unterminated section header");
        continue;
      }
      section = trim(body.substr(1, body.size() - 2));
      if (!sections.count(section)) err(fmt::format("unknown section [{}]", section));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      err("expected 'key = value'");
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (section.empty()) {
      err(fmt::format("key '{}' before any [section]", key));
      continue;
    }
    if (!sections.count(section)) continue;
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (field == nullptr) {
      err(fmt::format("unknown key '{}' in [{}]", key, section));
      continue;
    }
    if (!seen.insert(section + "." + key).second) {
      err(fmt::format("duplicate key '{}' in [{}]", key, section));
      continue;
    }
    try {
      field->set(c, value);
    } catch (const std::invalid_argument& e) {
      err(fmt::format("{}.{}: {}", section, key, e.what()));
    }
  }
  if (!syntax.empty()) throw ParseError(join(syntax));
  std::vector<std::string> invalid;
  validate(c, invalid);
  if (!invalid.empty()) throw ValidationError(join(invalid));
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace pmllab::cli
