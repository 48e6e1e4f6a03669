#pragma once

// Discrete complex fields produced by the solvers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace helmest {

// Radial profile on r_i = r0 + i h, i = 0..m.
struct RadialField {
  int n = 3;
  double r0 = 0.0;
  double h = 0.01;
  std::vector<std::complex<double>> v;

  int nodes() const { return static_cast<int>(v.size()); }
  double rmax() const { return r0 + h * (nodes() - 1); }
  double r(int i) const { return r0 + h * i; }

  // Four-point Lagrange interpolation; zero outside [r0, rmax].
  std::complex<double> value(double r) const { return interp(r, false); }
  std::complex<double> derivative(double r) const { return interp(r, true); }

 private:
  std::complex<double> interp(double rr, bool deriv) const {
    const int m = nodes() - 1;
    if (m < 3 || rr < r0 || rr > rmax()) return 0.0;
    const double s = (rr - r0) / h;
    int i = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, m - 3);
    const double t = s - i;  // local coordinate, nodes at 0,1,2,3
    double w[4];
    if (!deriv) {
      w[0] = -(t - 1) * (t - 2) * (t - 3) / 6;
      w[1] = t * (t - 2) * (t - 3) / 2;
      w[2] = -t * (t - 1) * (t - 3) / 2;
      w[3] = t * (t - 1) * (t - 2) / 6;
    } else {
      w[0] = -((t - 2) * (t - 3) + (t - 1) * (t - 3) + (t - 1) * (t - 2)) / (6 * h);
      w[1] = ((t - 2) * (t - 3) + t * (t - 3) + t * (t - 2)) / (2 * h);
      w[2] = -((t - 1) * (t - 3) + t * (t - 3) + t * (t - 1)) / (2 * h);
      w[3] = ((t - 1) * (t - 2) + t * (t - 2) + t * (t - 1)) / (6 * h);
    }
    std::complex<double> acc = 0;
    for (int k = 0; k < 4; ++k) acc += w[k] * v[i + k];
    return acc;
  }
};

// Cubic grid of (M+1)^3 nodes x = -L + i h on [-L, L]^3; boundary nodes hold 0.
struct GridField3D {
  double L = 8.0;
  double h = 0.25;
  int M = 64;
  double obstacle_r0 = 0.0;  // 0 = no obstacle
  std::vector<std::complex<double>> v;

  int side() const { return M + 1; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * side() + j) * side() + k;
  }
  double coord(int i) const { return -L + h * i; }
  std::complex<double>& at(int i, int j, int k) { return v[index(i, j, k)]; }
  const std::complex<double>& at(int i, int j, int k) const { return v[index(i, j, k)]; }

  // Unknown node: strictly inside the box and outside the obstacle.
  bool active(int i, int j, int k) const {
    if (i <= 0 || j <= 0 || k <= 0 || i >= M || j >= M || k >= M) return false;
    if (obstacle_r0 <= 0) return true;
    const double x = coord(i), y = coord(j), z = coord(k);
    return x * x + y * y + z * z >= obstacle_r0 * obstacle_r0;
  }
};

}  // namespace helmest
