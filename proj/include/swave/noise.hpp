#pragma once

// Divergence-free transport noise on the torus: sigma_{k,i} = theta_k a_{k,i}
// e_k with {a_{k,i}} an orthonormal frame of k-perp. The basis is stored in
// real form (cosine/sine channels of amplitude sqrt(2) theta_k over a
// half-lattice), so driving each channel by an independent real Brownian
// motion reproduces the covariance
//   Q(x-y) = sum_k theta_k^2 (I - k (x) k / |k|^2) e^{2 pi i k.(x-y)}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "swave/field.hpp"
#include "swave/rng.hpp"

namespace swave {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

struct NoiseSpec {
  int d = 2;
  double kappa = 1.0;                 // normalization: sum theta^2 = d/(d-1) * kappa
  std::vector<Mode> support;          // symmetric set K, 0 excluded
  std::vector<double> theta;          // theta_k >= 0, aligned with support

  double theta_sum_sq() const {
    double s = 0.0;
    for (double t : theta) s += t * t;
    return s;
  }
  double theta_sup_sq() const {
    double s = 0.0;
    for (double t : theta) s = std::max(s, t * t);
    return s;
  }
  int max_mode() const {
    int m = 0;
    for (const Mode& k : support)
      m = std::max({m, std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
    return m;
  }
};

namespace detail {

inline bool lex_positive(const Mode& k) {
  if (k[0] != 0) return k[0] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[2] > 0;
}

// All coordinate permutations and sign flips of k (restricted to d coords).
inline std::vector<Mode> lattice_orbit(const Mode& k, int d) {
  std::vector<Mode> out;
  std::array<int, 3> perm = {0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  if (d == 2) {
    perms = {{0, 1, 2}, {1, 0, 2}};
  } else {
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  }
  const int flips = 1 << d;
  for (const auto& p : perms)
    for (int f = 0; f < flips; ++f) {
      Mode m = {k[p[0]], k[p[1]], k[p[2]]};
      for (int c = 0; c < d; ++c)
        if (f & (1 << c)) m[c] = -m[c];
      out.push_back(m);
    }
  return out;
}

}  // namespace detail

// theta uniform over the shell {0 < |k| <= N}; sum theta^2 = d/(d-1) kappa.
inline NoiseSpec uniform_shell_spec(int d, double kappa, int N) {
  if (d != 2 && d != 3) throw std::invalid_argument("noise: d must be 2 or 3");
  if (N < 1) throw std::invalid_argument("noise: shell radius must be >= 1");
  if (kappa <= 0) throw std::invalid_argument("noise: kappa must be positive");
  NoiseSpec spec;
  spec.d = d;
  spec.kappa = kappa;
  const int zmax = (d == 3) ? N : 0;
  for (int k2 = -zmax; k2 <= zmax; ++k2)
    for (int k1 = -N; k1 <= N; ++k1)
      for (int k0 = -N; k0 <= N; ++k0) {
        if (k0 == 0 && k1 == 0 && k2 == 0) continue;
        if (k0 * k0 + k1 * k1 + k2 * k2 > N * N) continue;
        spec.support.push_back({k0, k1, k2});
      }
  const double t2 = (double(d) / (d - 1)) * kappa / double(spec.support.size());
  spec.theta.assign(spec.support.size(), std::sqrt(t2));
  return spec;
}

inline void validate_spec(const NoiseSpec& spec) {
  if (spec.support.empty()) throw std::invalid_argument("noise: empty support");
  std::map<Mode, double> amp;
  for (std::size_t i = 0; i < spec.support.size(); ++i) {
    const Mode& k = spec.support[i];
    if (k[0] == 0 && k[1] == 0 && (spec.d == 2 || k[2] == 0))
      throw std::invalid_argument("noise: zero mode in support");
    if (spec.d == 2 && k[2] != 0)
      throw std::invalid_argument("noise: 3rd component nonzero in d=2");
    amp[k] = spec.theta[i];
  }
  for (const auto& [k, t] : amp) {
    for (const Mode& m : detail::lattice_orbit(k, spec.d)) {
      auto it = amp.find(m);
      if (it == amp.end() || std::abs(it->second - t) > 1e-12)
        throw std::invalid_argument("noise: support/theta not lattice-symmetric");
    }
  }
}

// One real noise channel: sigma(x) = amp * a * cos(2 pi k.x) or sin(2 pi k.x).
struct NoiseChannel {
  Mode k;
  Vec3 a;
  double amp;   // sqrt(2) * theta_k
  bool sine;
  std::uint64_t key;  // stable id shared across lattices and shell families
};

struct CovarianceReport {
  Mat3 q0 = {};
  double kappa_eff = 0.0;   // q0[0][0] / 2
  double l1_norm = 0.0;
  double l2_norm = 0.0;
  double fourier_sup = 0.0; // max theta_k^2
};

class NoiseBasis {
 public:
  explicit NoiseBasis(NoiseSpec spec) : spec_(std::move(spec)) {
    validate_spec(spec_);
    const int d = spec_.d;
    for (std::size_t i = 0; i < spec_.support.size(); ++i) {
      const Mode& k = spec_.support[i];
      if (!detail::lex_positive(k)) continue;  // half-lattice
      const auto frame = make_frame(k, d);
      const double amp = std::sqrt(2.0) * spec_.theta[i];
      for (int fi = 0; fi < d - 1; ++fi) {
        channels_.push_back({k, frame[fi], amp, false, channel_key(k, fi, false)});
        channels_.push_back({k, frame[fi], amp, true, channel_key(k, fi, true)});
      }
    }
  }

  const NoiseSpec& spec() const { return spec_; }
  const std::vector<NoiseChannel>& channels() const { return channels_; }
  int dim() const { return spec_.d; }
  int max_mode() const { return spec_.max_mode(); }

  // Orthonormal frame of k-perp; deterministic, and identical for k and -k.
  static std::array<Vec3, 2> make_frame(const Mode& k, int d) {
    const double nk = std::sqrt(double(LatticeSpec::norm2(k)));
    if (d == 2) {
      // a_k = k_perp / |k| with k_perp = (k2, -k1)
      return {Vec3{k[1] / nk, -k[0] / nk, 0.0}, Vec3{}};
    }
    const Vec3 kh = {k[0] / nk, k[1] / nk, k[2] / nk};
    // complete from the coordinate axis least aligned with k
    int axis = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(kh[c]) < std::abs(kh[axis])) axis = c;
    Vec3 b1 = {};
    b1[axis] = 1.0;
    const double proj = b1[0] * kh[0] + b1[1] * kh[1] + b1[2] * kh[2];
    for (int c = 0; c < 3; ++c) b1[c] -= proj * kh[c];
    const double nb = std::sqrt(b1[0] * b1[0] + b1[1] * b1[1] + b1[2] * b1[2]);
    for (int c = 0; c < 3; ++c) b1[c] /= nb;
    const Vec3 b2 = {kh[1] * b1[2] - kh[2] * b1[1], kh[2] * b1[0] - kh[0] * b1[2],
                     kh[0] * b1[1] - kh[1] * b1[0]};
    return {b1, b2};
  }

  static std::uint64_t channel_key(const Mode& k, int frame, bool sine) {
    auto enc = [](int v) { return std::uint64_t(v + 2048) & 0xFFFu; };
    return (enc(k[0]) << 40) | (enc(k[1]) << 28) | (enc(k[2]) << 16) |
           (std::uint64_t(frame) << 1) | std::uint64_t(sine);
  }

 private:
  NoiseSpec spec_;
  std::vector<NoiseChannel> channels_;
};

inline NoiseBasis build_basis(const NoiseSpec& spec) { return NoiseBasis(spec); }

// Q(x) = Q(x, 0): sum over half-lattice channels of amp^2 a(x)a cos(2 pi k.x).
inline Mat3 covariance_at(const NoiseBasis& basis, const Vec3& x) {
  Mat3 q = {};
  for (const NoiseChannel& ch : basis.channels()) {
    if (ch.sine) continue;  // cos/sin pair contributes one cosine term
    const double phase = kTwoPi * (ch.k[0] * x[0] + ch.k[1] * x[1] + ch.k[2] * x[2]);
    const double w = ch.amp * ch.amp * std::cos(phase);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) q[r][c] += w * ch.a[r] * ch.a[c];
  }
  return q;
}

inline double frobenius(const Mat3& m, int d) {
  double s = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) s += m[r][c] * m[r][c];
  return std::sqrt(s);
}

// Quadrature of |Q| over the torus on a uniform grid with `level` points per
// axis. level must be at least 2 * max|k|; the L^2 value is exact (up to
// rounding) once level exceeds 4 * max|k|.
inline CovarianceReport covariance_norms(const NoiseBasis& basis, int level) {
  const int kmax = basis.max_mode();
  if (level < 2 * kmax)
    throw std::invalid_argument("covariance_norms: quadrature level too coarse");
  const int d = basis.dim();
  CovarianceReport rep;
  rep.q0 = covariance_at(basis, {0.0, 0.0, 0.0});
  rep.kappa_eff = rep.q0[0][0] / 2.0;
  rep.fourier_sup = basis.spec().theta_sup_sq();
  const int gz = (d == 3) ? level : 1;
  double sum1 = 0.0, sum2 = 0.0;
  for (int iz = 0; iz < gz; ++iz)
    for (int iy = 0; iy < level; ++iy)
      for (int ix = 0; ix < level; ++ix) {
        const Vec3 x = {double(ix) / level, double(iy) / level, double(iz) / level};
        const double f = frobenius(covariance_at(basis, x), d);
        sum1 += f;
        sum2 += f * f;
      }
  const double npts = double(level) * level * gz;
  rep.l1_norm = sum1 / npts;
  rep.l2_norm = std::sqrt(sum2 / npts);
  return rep;
}

// out += scale * sigma_ch . grad(f), truncated to the lattice ball.
// Coefficient rule for the cosine channel: source mode j sends
// amp/2 * (a . 2 pi i j) f_hat(j) to modes j +- k; the sine channel sends
// -i amp/2 (...) to j + k and +i amp/2 (...) to j - k.
inline void transport_accumulate(const NoiseChannel& ch, const SpectralField& f,
                                 double scale, SpectralField& out) {
  const auto& lat = *f.lattice;
  const Mode& k = ch.k;
  const double half = 0.5 * ch.amp * scale;
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const Complex c = f.at(0, int(m));
    if (c.real() == 0.0 && c.imag() == 0.0) continue;
    const Mode& j = lat.modes[m];
    const double adotj = ch.a[0] * j[0] + ch.a[1] * j[1] + ch.a[2] * j[2];
    if (adotj == 0.0) continue;
    const Complex g = Complex(0.0, kTwoPi * adotj) * c;  // (a . grad) in Fourier
    const int ip = lat.index_of(j[0] + k[0], j[1] + k[1], j[2] + k[2]);
    const int im = lat.index_of(j[0] - k[0], j[1] - k[1], j[2] - k[2]);
    if (!ch.sine) {
      if (ip >= 0) out.at(0, ip) += half * g;
      if (im >= 0) out.at(0, im) += half * g;
    } else {
      const Complex ig(-g.imag(), g.real());  // i * g
      if (ip >= 0) out.at(0, ip) -= half * ig;
      if (im >= 0) out.at(0, im) += half * ig;
    }
  }
}

inline SpectralField transport_apply(const NoiseBasis& basis, std::size_t channel,
                                     const SpectralField& f) {
  if (!f.scalar()) throw std::invalid_argument("transport_apply: expects a scalar field");
  SpectralField out(f.lattice, 1);
  transport_accumulate(basis.channels().at(channel), f, 1.0, out);
  return out;
}

inline int support_radius(const SpectralField& f) {
  const auto& lat = *f.lattice;
  int r2 = 0;
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < lat.size(); ++m)
      if (std::norm(f.at(c, int(m))) > 0.0)
        r2 = std::max(r2, LatticeSpec::norm2(lat.modes[m]));
  return int(std::ceil(std::sqrt(double(r2))));
}

// (1/2) sum_ch sigma_ch . grad(sigma_ch . grad f). Requires the field to be
// supported on |j| <= n - 2 max|k| so no mass leaves the ball; equals
// kappa_eff * Laplacian(f) there.
inline SpectralField ito_correction(const NoiseBasis& basis, const SpectralField& f) {
  if (!f.scalar()) throw std::invalid_argument("ito_correction: expects a scalar field");
  if (support_radius(f) > f.lattice->n - 2 * basis.max_mode())
    throw std::invalid_argument("ito_correction: support too close to the ball boundary");
  SpectralField out(f.lattice, 1);
  for (const NoiseChannel& ch : basis.channels()) {
    SpectralField tmp(f.lattice, 1);
    transport_accumulate(ch, f, 1.0, tmp);
    transport_accumulate(ch, tmp, 0.5, out);
  }
  return out;
}

// One Brownian increment per channel at the given step, basis order.
inline std::vector<double> sample_increments(const BrownianDriver& driver,
                                             const NoiseBasis& basis,
                                             std::uint64_t step) {
  std::vector<double> dw(basis.channels().size());
  for (std::size_t c = 0; c < dw.size(); ++c)
    dw[c] = driver.increment(basis.channels()[c].key, step);
  return dw;
}

// Uniform-shell family with fixed kappa and ||Q^N||_{L^1} -> 0.
inline std::vector<NoiseSpec> make_scaling_family(int d, double kappa,
                                                  const std::vector<int>& shells) {
  if (shells.empty()) throw std::invalid_argument("scaling family: no shells");
  for (std::size_t i = 1; i < shells.size(); ++i)
    if (shells[i] <= shells[i - 1])
      throw std::invalid_argument("scaling family: shells must be increasing");
  std::vector<NoiseSpec> out;
  out.reserve(shells.size());
  for (int N : shells) out.push_back(uniform_shell_spec(d, kappa, N));
  return out;
}

}  // namespace swave
