#include "pmllab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace pmllab {

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

Grid Grid::over_box(const BoxDomain& box, const std::array<int, 3>& n) {
  Grid g;
  g.n = n;
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 5) throw std::invalid_argument("grid needs at least 5 nodes per axis");
    g.lower(a) = -box.half_length(a);
    g.h(a) = 2.0 * box.half_length(a) / (n[a] - 1);
  }
  return g;
}

std::array<int, 3> Grid::coords(std::size_t node) const {
  const int i = static_cast<int>(node % n[0]);
  const std::size_t rest = node / n[0];
  return {i, static_cast<int>(rest % n[1]), static_cast<int>(rest / n[1])};
}

std::size_t Grid::stride(int axis) const {
  if (axis == 0) return 1;
  if (axis == 1) return static_cast<std::size_t>(n[0]);
  return static_cast<std::size_t>(n[0]) * n[1];
}

Vec3 Grid::point(std::size_t node) const {
  const auto c = coords(node);
  return point(c[0], c[1], c[2]);
}

double Grid::volume_weight(std::size_t node) const {
  const auto c = coords(node);
  double w = cell_volume();
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0 || c[a] == n[a] - 1) w *= 0.5;
  }
  return w;
}

std::size_t Grid::nearest(const Vec3& x) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::lround((x(a) - lower(a)) / h(a))), 0, n[a] - 1);
  }
  return index(c[0], c[1], c[2]);
}

bool Grid::on_boundary(std::size_t node) const {
  const auto c = coords(node);
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0 || c[a] == n[a] - 1) return true;
  }
  return false;
}

std::vector<int> node_faces(const Grid& g, std::size_t node) {
  const auto c = g.coords(node);
  std::vector<int> faces;
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0) faces.push_back(a + 1);
  }
  for (int a = 0; a < 3; ++a) {
    if (c[a] == g.n[a] - 1) faces.push_back(a + 4);
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

Vec3 grid_boundary_normal(const Grid& g, std::size_t node) {
  Vec3 n = Vec3::Zero();
  for (int k : node_faces(g, node)) n += face_normal(k);
  return n.normalized();
}

void SpinorField::fill_zero() { std::fill(data_.begin(), data_.end(), cplx(0.0)); }

SpinorField& SpinorField::operator+=(const SpinorField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpinorField& SpinorField::operator*=(cplx a) {
  for (cplx& v : data_) v *= a;
  return *this;
}

double SpinorField::l2_norm() const {
  double s = 0.0;
  for (std::size_t node = 0; node < nodes(); ++node) {
    s += grid_.volume_weight(node) * (std::norm(data_[node]) + std::norm(data_[nodes() + node]));
  }
  return std::sqrt(s);
}

double SpinorField::boundary_l2_norm() const {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    for (int side : {0, grid_.n[a] - 1}) {
      std::array<int, 3> ix{};
      ix[a] = side;
      for (int p = 0; p < grid_.n[b]; ++p) {
        for (int q = 0; q < grid_.n[c]; ++q) {
          ix[b] = p;
          ix[c] = q;
          double w = grid_.h(b) * grid_.h(c);
          if (p == 0 || p == grid_.n[b] - 1) w *= 0.5;
          if (q == 0 || q == grid_.n[c] - 1) w *= 0.5;
          const std::size_t node = grid_.index(ix[0], ix[1], ix[2]);
          s += w * (std::norm(data_[node]) + std::norm(data_[nodes() + node]));
        }
      }
    }
  }
  return std::sqrt(s);
}

double SpinorField::max_abs() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

void write_snapshot(const std::string& path, const SpinorField& f, double time) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path);
  for (const cplx& v : f.data()) {
    put_le(bin, v.real());
    put_le(bin, v.imag());
  }
  std::ofstream hdr(path + ".hdr");
  if (!hdr) throw std::runtime_error("cannot write " + path + ".hdr");
  const Grid& g = f.grid();
  hdr << fmt::format("dims {} {} {}\n", g.n[0], g.n[1], g.n[2]);
  hdr << fmt::format("spacing {:.17g} {:.17g} {:.17g}\n", g.h(0), g.h(1), g.h(2));
  hdr << fmt::format("lower {:.17g} {:.17g} {:.17g}\n", g.lower(0), g.lower(1), g.lower(2));
  hdr << fmt::format("time {:.17g}\n", time);
  hdr << "components u1 u2\n";
  hdr << "layout component-major x-fastest f64le re-im\n";
}

SpinorField read_snapshot(const std::string& path, double* time) {
  std::ifstream hdr(path + ".hdr");
  if (!hdr) throw std::runtime_error("cannot read " + path + ".hdr");
  Grid g;
  double t = 0.0;
  std::string line;
  while (std::getline(hdr, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dims") ls >> g.n[0] >> g.n[1] >> g.n[2];
    if (key == "spacing") ls >> g.h(0) >> g.h(1) >> g.h(2);
    if (key == "lower") ls >> g.lower(0) >> g.lower(1) >> g.lower(2);
    if (key == "time") ls >> t;
  }
  SpinorField f(g);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + path);
  for (cplx& v : f.data()) {
    const double re = get_le(bin);
    const double im = get_le(bin);
    v = cplx(re, im);
  }
  if (!bin) throw std::runtime_error("snapshot " + path + " is truncated");
  if (time != nullptr) *time = t;
  return f;
}

}  // namespace pmllab
