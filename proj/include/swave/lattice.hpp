#pragma once

// Truncated Fourier lattice on the torus: the set of modes j in Z^d with
// |j| <= n (Euclidean ball, boundary included), plus a dense index for
// coefficient lookup.

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

namespace swave {

using Mode = std::array<int, 3>;  // third entry 0 when d == 2

struct LatticeSpec {
  int d = 2;
  int n = 1;
  std::vector<Mode> modes;        // symmetric: j in set <=> -j in set
  std::vector<int> box_index_;    // (2n+1)^d lookup table, -1 outside ball

  LatticeSpec(int d_, int n_) : d(d_), n(n_) {
    if (d != 2 && d != 3) throw std::invalid_argument("lattice: d must be 2 or 3");
    if (n < 1) throw std::invalid_argument("lattice: n must be >= 1");
    const int w = 2 * n + 1;
    const int kmax2 = (d == 3) ? n : 0;
    box_index_.assign(std::size_t(w) * w * (d == 3 ? w : 1), -1);
    for (int j2 = -kmax2; j2 <= kmax2; ++j2)
      for (int j1 = -n; j1 <= n; ++j1)
        for (int j0 = -n; j0 <= n; ++j0) {
          if (j0 * j0 + j1 * j1 + j2 * j2 > n * n) continue;
          box_index_[box_slot(j0, j1, j2)] = int(modes.size());
          modes.push_back({j0, j1, j2});
        }
  }

  std::size_t box_slot(int j0, int j1, int j2) const {
    const int w = 2 * n + 1;
    std::size_t s = std::size_t(j0 + n) + std::size_t(w) * (j1 + n);
    if (d == 3) s += std::size_t(w) * w * (j2 + n);
    return s;
  }

  // Index of mode j, or -1 if outside the ball.
  int index_of(int j0, int j1, int j2) const {
    if (j0 < -n || j0 > n || j1 < -n || j1 > n) return -1;
    if (d == 2) {
      if (j2 != 0) return -1;
    } else if (j2 < -n || j2 > n) {
      return -1;
    }
    return box_index_[box_slot(j0, j1, j2)];
  }
  int index_of(const Mode& j) const { return index_of(j[0], j[1], j[2]); }

  std::size_t size() const { return modes.size(); }

  static int norm2(const Mode& j) {
    return j[0] * j[0] + j[1] * j[1] + j[2] * j[2];
  }
};

using LatticePtr = std::shared_ptr<const LatticeSpec>;

inline LatticePtr make_lattice(int d, int n) {
  return std::make_shared<const LatticeSpec>(d, n);
}

}  // namespace swave
