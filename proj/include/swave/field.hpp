#pragma once

// Real scalar/vector fields on T^d stored as truncated Fourier coefficients,
// with the Sobolev calculus used throughout: norms, Laplacian, gradient,
// Galerkin projection and the heat-semigroup multiplier.
//
// Convention: e_j(x) = exp(2*pi*i*j.x), so Delta e_j = -4*pi^2*|j|^2 e_j and
// the H^s weight is (1+|j|^2)^s. Real-valued fields satisfy
// coeff(-j) = conj(coeff(j)).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swave/lattice.hpp"

namespace swave {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925287;
inline constexpr double kFourPi2 = 39.47841760435743447533796;

struct SpectralField {
  LatticePtr lattice;
  int components = 1;  // 1 (scalar) or d (vector)
  std::vector<Complex> coeffs;  // [c * nmodes + m]

  SpectralField() = default;
  SpectralField(LatticePtr lat, int comps = 1)
      : lattice(std::move(lat)), components(comps),
        coeffs(std::size_t(comps) * lattice->size(), Complex{}) {}

  Complex& at(int comp, int mode) { return coeffs[std::size_t(comp) * lattice->size() + mode]; }
  const Complex& at(int comp, int mode) const {
    return coeffs[std::size_t(comp) * lattice->size() + mode];
  }

  bool scalar() const { return components == 1; }
};

// Zero field on the given lattice.
inline SpectralField zero_field(const LatticePtr& lat, int comps = 1) {
  return SpectralField(lat, comps);
}

// Set the conjugate pair for mode j so the field stays real:
// coeff(j) = c, coeff(-j) = conj(c). For j = 0 the imaginary part of c is
// discarded.
inline void set_mode_pair(SpectralField& f, int comp, const Mode& j, Complex c) {
  const int ip = f.lattice->index_of(j);
  const int im = f.lattice->index_of(-j[0], -j[1], -j[2]);
  if (ip < 0 || im < 0) throw std::out_of_range("set_mode_pair: mode outside ball");
  if (ip == im) {
    f.at(comp, ip) = Complex(c.real(), 0.0);
  } else {
    f.at(comp, ip) = c;
    f.at(comp, im) = std::conj(c);
  }
}

inline SpectralField& operator+=(SpectralField& a, const SpectralField& b) {
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] += b.coeffs[i];
  return a;
}
inline SpectralField& operator-=(SpectralField& a, const SpectralField& b) {
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] -= b.coeffs[i];
  return a;
}
inline SpectralField& operator*=(SpectralField& a, double s) {
  for (auto& c : a.coeffs) c *= s;
  return a;
}
inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

// axpy: a += s * b, avoiding a temporary in hot loops.
inline void add_scaled(SpectralField& a, double s, const SpectralField& b) {
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] += s * b.coeffs[i];
}

// ( sum_j (1+|j|^2)^s |u_hat(j)|^2 )^(1/2), summed over components.
inline double sobolev_norm(const SpectralField& f, double s) {
  const auto& lat = *f.lattice;
  double acc = 0.0;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const double w = std::pow(1.0 + LatticeSpec::norm2(lat.modes[m]), s);
      acc += w * std::norm(f.at(c, int(m)));
    }
  return std::sqrt(acc);
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

// L^2 pairing of two real fields: integral of u.w over the torus.
inline double l2_inner(const SpectralField& a, const SpectralField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    acc += (a.coeffs[i] * std::conj(b.coeffs[i])).real();
  return acc;
}

inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const auto& lat = *f.lattice;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m)
      out.at(c, int(m)) *= -kFourPi2 * LatticeSpec::norm2(lat.modes[m]);
  return out;
}

// Galerkin projection Pi_m: zero all coefficients with |j| > m.
inline SpectralField project(const SpectralField& f, int m) {
  if (m < 0) throw std::invalid_argument("project: negative truncation");
  SpectralField out = f;
  const auto& lat = *f.lattice;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t k = 0; k < lat.size(); ++k)
      if (LatticeSpec::norm2(lat.modes[k]) > m * m) out.at(c, int(k)) = Complex{};
  return out;
}

// Heat semigroup e^{kappa t Delta}: multiply mode j by exp(-4 pi^2 kappa t |j|^2).
inline SpectralField heat_multiply(const SpectralField& f, double kappa, double t) {
  if (t < 0) throw std::invalid_argument("heat_multiply: negative time");
  SpectralField out = f;
  const auto& lat = *f.lattice;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m)
      out.at(c, int(m)) *= std::exp(-kFourPi2 * kappa * t * LatticeSpec::norm2(lat.modes[m]));
  return out;
}

// In-place variant used by the integrators.
inline void heat_multiply_inplace(SpectralField& f, double kappa, double t) {
  const auto& lat = *f.lattice;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m)
      f.at(c, int(m)) *= std::exp(-kFourPi2 * kappa * t * LatticeSpec::norm2(lat.modes[m]));
}

// Gradient of a scalar field: component i at mode j is 2 pi i j_i u_hat(j).
inline SpectralField gradient(const SpectralField& f) {
  if (!f.scalar()) throw std::invalid_argument("gradient: expects a scalar field");
  const auto& lat = *f.lattice;
  SpectralField out(f.lattice, lat.d);
  for (int c = 0; c < lat.d; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m)
      out.at(c, int(m)) = Complex(0.0, kTwoPi * lat.modes[m][c]) * f.at(0, int(m));
  return out;
}

// Max over saved times of the H^s norm (discrete C([0,T];H^s) surrogate).
template <class Series>
inline double sup_time_norm(const Series& series, double s) {
  if (series.empty()) throw std::invalid_argument("sup_time_norm: empty series");
  double best = 0.0;
  for (const auto& [t, f] : series) best = std::max(best, sobolev_norm(f, s));
  return best;
}

// Largest conjugate-symmetry defect, for validity checks.
inline double conjugate_symmetry_defect(const SpectralField& f) {
  const auto& lat = *f.lattice;
  double worst = 0.0;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const Mode& j = lat.modes[m];
      const int im = lat.index_of(-j[0], -j[1], -j[2]);
      worst = std::max(worst,
                       std::abs(f.at(c, int(m)) - std::conj(f.at(c, im))));
    }
  return worst;
}

}  // namespace swave
