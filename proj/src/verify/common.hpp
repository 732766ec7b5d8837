#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pmllab/pauli.hpp"

namespace pmllab::detail {

/// w(x) = sum_m c_m exp(i k_m . x) with exact derivatives.
struct TrigField {
  std::vector<Vec3> k;
  std::vector<Spinor> c;

  Spinor value(const Vec3& x) const {
    Spinor s = Spinor::Zero();
    for (std::size_t m = 0; m < k.size(); ++m) s += std::exp(kI * k[m].dot(x)) * c[m];
    return s;
  }
  Spinor derivative(const Vec3& x, int j) const {
    Spinor s = Spinor::Zero();
    for (std::size_t m = 0; m < k.size(); ++m) s += (kI * k[m](j)) * std::exp(kI * k[m].dot(x)) * c[m];
    return s;
  }
  Spinor second(const Vec3& x, int j) const {
    Spinor s = Spinor::Zero();
    for (std::size_t m = 0; m < k.size(); ++m) s -= (k[m](j) * k[m](j)) * std::exp(kI * k[m].dot(x)) * c[m];
    return s;
  }
};

inline TrigField random_trig(std::mt19937_64& rng, int terms, double kmax) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g;
  TrigField f;
  for (int m = 0; m < terms; ++m) {
    Vec3 k;
    do {
      k = Vec3(u(rng), u(rng), u(rng));
    } while (k.norm() > 1.0);
    f.k.push_back(kmax * k);
    f.c.emplace_back(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  }
  return f;
}

/// Observed order from errors at two step sizes.
inline double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

/// Least-squares slope of log e against log h.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double max_abs(const Matrix2C& m) { return m.cwiseAbs().maxCoeff(); }

/// Complex directions with |Im xi| <= 0.7 |Re xi| and |xi| in [0.1, 10].
inline Vec3C random_holomorphic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  Vec3 re;
  do {
    re = Vec3(u(rng), u(rng), u(rng));
  } while (re.norm() < 0.1);
  Vec3 im(u(rng), u(rng), u(rng));
  im *= 0.7 * re.norm() * std::abs(u(rng)) / im.norm();
  const double s = scale(rng);
  return Vec3C(s * re.cast<cplx>() + kI * s * im.cast<cplx>());
}

inline Vec3C random_complex(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> g;
  Vec3C z;
  for (int j = 0; j < 3; ++j) z(j) = cplx(g(rng), g(rng));
  return radius * z;
}

}  // namespace pmllab::detail
