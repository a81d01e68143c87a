#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fowler {

// Partition of the periodic interval [-L, L].
struct Mesh {
  double L = 1.0;
  std::vector<double> nodes;  // x_0 = -L < x_1 < ... < x_N = L
  bool uniform = false;
  double h = 0.0;  // max element width

  int num_elements() const { return static_cast<int>(nodes.size()) - 1; }
  double width(int e) const { return nodes[e + 1] - nodes[e]; }
};

inline Mesh build_uniform_mesh(double L, int N) {
  if (L <= 0.0) throw std::invalid_argument("mesh: L must be positive");
  if (N < 2) throw std::invalid_argument("mesh: need at least 2 elements");
  Mesh m;
  m.L = L;
  m.nodes.resize(N + 1);
  for (int j = 0; j <= N; ++j) m.nodes[j] = -L + (2.0 * L * j) / N;
  m.nodes[0] = -L;
  m.nodes[N] = L;
  m.uniform = true;
  m.h = 2.0 * L / N;
  return m;
}

// Map x into [-L, L).
inline double wrap_coordinate(const Mesh& m, double x) {
  const double period = 2.0 * m.L;
  double y = x - period * std::floor((x + m.L) / period);
  if (y >= m.L) y -= period;
  if (y < -m.L) y += period;
  return y;
}

// Element index j with wrapped x in [x_j, x_{j+1}).
inline int element_containing(const Mesh& m, double x) {
  const double y = wrap_coordinate(m, x);
  const int N = m.num_elements();
  if (m.uniform) {
    int j = static_cast<int>(std::floor((y + m.L) / m.h));
    return std::clamp(j, 0, N - 1);
  }
  auto it = std::upper_bound(m.nodes.begin(), m.nodes.end(), y);
  int j = static_cast<int>(it - m.nodes.begin()) - 1;
  return std::clamp(j, 0, N - 1);
}

// Element index j with wrapped x in (x_j, x_{j+1}]; used when sweeping
// leftwards through the mesh.
inline int element_left_of(const Mesh& m, double x) {
  double y = wrap_coordinate(m, x);
  const int N = m.num_elements();
  if (y <= m.nodes.front()) return N - 1;
  auto it = std::lower_bound(m.nodes.begin(), m.nodes.end(), y);  // first node >= y
  int j = static_cast<int>(it - m.nodes.begin());
  return std::clamp(j - 1, 0, N - 1);
}

}  // namespace fowler
