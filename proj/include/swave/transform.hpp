#pragma once

// Physical-space sampling of spectral fields on uniform power-of-two grids,
// via an in-place radix-2 Cooley-Tukey transform. Used for pointwise
// nonlinearities and covariance quadrature; the slow direct transform that
// tests check against lives with the tests.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "swave/field.hpp"

namespace swave {

namespace detail {

// In-place radix-2 FFT. sign = +1 gives sum x_k e^{+2 pi i k m / G}
// (synthesis), sign = -1 the analysis direction. No normalization.
inline void fft_pow2(Complex* x, std::size_t g, std::size_t stride, int sign) {
  // bit reversal
  for (std::size_t i = 1, j = 0; i < g; ++i) {
    std::size_t bit = g >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i * stride], x[j * stride]);
  }
  for (std::size_t len = 2; len <= g; len <<= 1) {
    const double ang = sign * kTwoPi / double(len);
    const Complex wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < g; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex a = x[(i + k) * stride];
        Complex b = x[(i + k + len / 2) * stride] * w;
        x[(i + k) * stride] = a + b;
        x[(i + k + len / 2) * stride] = a - b;
        w *= wl;
      }
    }
  }
}

inline bool is_pow2(std::size_t g) { return g && !(g & (g - 1)); }

}  // namespace detail

// Smallest power of two >= m.
inline std::size_t next_pow2(std::size_t m) {
  std::size_t g = 1;
  while (g < m) g <<= 1;
  return g;
}

// Workspace for transforms between a lattice and a G^d grid, G a power of two
// with G >= 2n+1 so every mode has a distinct bin.
class GridTransform {
 public:
  GridTransform(LatticePtr lat, std::size_t grid)
      : lat_(std::move(lat)), g_(grid) {
    if (!detail::is_pow2(g_)) throw std::invalid_argument("grid must be a power of two");
    if (g_ < std::size_t(2 * lat_->n + 1))
      throw std::invalid_argument("grid too coarse for the lattice");
    npts_ = 1;
    for (int a = 0; a < lat_->d; ++a) npts_ *= g_;
    buf_.resize(npts_);
  }

  std::size_t grid() const { return g_; }
  std::size_t points() const { return npts_; }

  // Sample a scalar field component on the grid (row-major, axis 0 fastest).
  void to_grid(const SpectralField& f, int comp, std::vector<double>& out) {
    std::fill(buf_.begin(), buf_.end(), Complex{});
    const auto& lat = *lat_;
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const Mode& j = lat.modes[m];
      buf_[bin(j)] = f.at(comp, int(m));
    }
    transform(+1);
    out.resize(npts_);
    for (std::size_t i = 0; i < npts_; ++i) out[i] = buf_[i].real();
  }

  // Inverse: take grid samples of a real function, return the coefficients
  // restricted to the lattice ball (aliased bins outside the ball dropped).
  void from_grid(const std::vector<double>& in, SpectralField& f, int comp) {
    for (std::size_t i = 0; i < npts_; ++i) buf_[i] = Complex(in[i], 0.0);
    transform(-1);
    const double scale = 1.0 / double(npts_);
    const auto& lat = *lat_;
    for (std::size_t m = 0; m < lat.size(); ++m)
      f.at(comp, int(m)) = buf_[bin(lat.modes[m])] * scale;
  }

 private:
  std::size_t bin(const Mode& j) const {
    std::size_t s = std::size_t((j[0] % int(g_) + int(g_)) % int(g_));
    s += g_ * std::size_t((j[1] % int(g_) + int(g_)) % int(g_));
    if (lat_->d == 3) s += g_ * g_ * std::size_t((j[2] % int(g_) + int(g_)) % int(g_));
    return s;
  }

  void transform(int sign) {
    const int d = lat_->d;
    // axis 0: contiguous rows
    for (std::size_t off = 0; off < npts_; off += g_)
      detail::fft_pow2(buf_.data() + off, g_, 1, sign);
    // axis 1
    const std::size_t planes = (d == 3) ? g_ : 1;
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t c = 0; c < g_; ++c)
        detail::fft_pow2(buf_.data() + p * g_ * g_ + c, g_, g_, sign);
    // axis 2
    if (d == 3)
      for (std::size_t i = 0; i < g_ * g_; ++i)
        detail::fft_pow2(buf_.data() + i, g_, g_ * g_, sign);
  }

  LatticePtr lat_;
  std::size_t g_;
  std::size_t npts_;
  std::vector<Complex> buf_;
};

}  // namespace swave
