#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pmllab/geometry.hpp"
#include "pmllab/pauli.hpp"

namespace pmllab {

/// Collocated tensor grid over a box: node (i, j, k) sits at lower + (i h_1,
/// j h_2, k h_3), x fastest.
struct Grid {
  std::array<int, 3> n{0, 0, 0};
  Vec3 lower = Vec3::Zero();
  Vec3 h = Vec3::Ones();

  /// n_j nodes spanning [-L_j/2, L_j/2], so h_j = L_j / (n_j - 1).
  static Grid over_box(const BoxDomain& box, const std::array<int, 3>& n);

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
  }
  std::array<int, 3> coords(std::size_t node) const;
  std::size_t stride(int axis) const;
  Vec3 point(int i, int j, int k) const { return lower + Vec3(i * h(0), j * h(1), k * h(2)); }
  Vec3 point(std::size_t node) const;
  double cell_volume() const { return h(0) * h(1) * h(2); }
  /// Trapezoidal volume weight of a node (halved once per boundary axis).
  double volume_weight(std::size_t node) const;
  /// Nearest node to x (clamped to the grid).
  std::size_t nearest(const Vec3& x) const;
  bool on_boundary(std::size_t node) const;
  bool operator==(const Grid& o) const { return n == o.n && lower == o.lower && h == o.h; }
};

/// Faces of the grid boundary a node lies on, as face indices 1..6 in
/// increasing order.
std::vector<int> node_faces(const Grid& g, std::size_t node);

/// Outward unit normal used for the boundary condition at a boundary grid
/// node: the face normal on faces, the normalised sum of the face normals on
/// edges and corners.
Vec3 grid_boundary_normal(const Grid& g, std::size_t node);

/// Two-component complex field on a grid, component-major storage: all of
/// component 0, then all of component 1.
class SpinorField {
 public:
  SpinorField() = default;
  explicit SpinorField(const Grid& g) : grid_(g), data_(2 * g.size(), cplx(0.0)) {}

  const Grid& grid() const { return grid_; }
  std::size_t nodes() const { return grid_.size(); }
  cplx* component(int c) { return data_.data() + c * nodes(); }
  const cplx* component(int c) const { return data_.data() + c * nodes(); }
  double* raw(int c) { return reinterpret_cast<double*>(component(c)); }
  const double* raw(int c) const { return reinterpret_cast<const double*>(component(c)); }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  Spinor at(std::size_t node) const { return {data_[node], data_[nodes() + node]}; }
  void set(std::size_t node, const Spinor& v) {
    data_[node] = v(0);
    data_[nodes() + node] = v(1);
  }
  void fill_zero();

  SpinorField& operator+=(const SpinorField& o);
  SpinorField& operator-=(const SpinorField& o);
  SpinorField& operator*=(cplx a);

  /// Trapezoidal L2 norm over the box.
  double l2_norm() const;
  /// L2 norm over the six faces (trapezoidal on each face).
  double boundary_l2_norm() const;
  double max_abs() const;

 private:
  Grid grid_;
  std::vector<cplx> data_;
};

/// Flat little-endian f64 (re, im) pairs, component-major, x fastest, plus a
/// text header next to it (path + ".hdr").
void write_snapshot(const std::string& path, const SpinorField& f, double time);
SpinorField read_snapshot(const std::string& path, double* time = nullptr);

}  // namespace pmllab
