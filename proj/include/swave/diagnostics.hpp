#pragma once

// Energy functionals, truncation-difference energies, increment statistics
// and stochastic-convolution probes.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "swave/dynamics.hpp"
#include "swave/field.hpp"
#include "swave/noise.hpp"

namespace swave {

// Precomputed (1+|j|^2)^s weights for repeated norm evaluations.
class SobolevWeights {
 public:
  SobolevWeights(const LatticePtr& lat, double s) {
    w_.reserve(lat->size());
    for (const Mode& j : lat->modes)
      w_.push_back(std::pow(1.0 + LatticeSpec::norm2(j), s));
  }
  double norm_sq(const SpectralField& f) const {
    double acc = 0.0;
    for (int c = 0; c < f.components; ++c)
      for (std::size_t m = 0; m < w_.size(); ++m)
        acc += w_[m] * std::norm(f.at(c, int(m)));
    return acc;
  }
  double norm(const SpectralField& f) const { return std::sqrt(norm_sq(f)); }

 private:
  std::vector<double> w_;
};

// Kahan-compensated accumulator for order-stable ensemble reductions.
class CompensatedSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

struct EnergyRecord {
  double t = 0.0;
  double e_u_h1 = 0.0;  // ||u||_{H^1}^2
  double e_v_l2 = 0.0;  // ||v||_{L^2}^2
  double total = 0.0;
};

inline EnergyRecord energy(const GalerkinState& s) {
  EnergyRecord r;
  r.t = s.t;
  const double h1 = sobolev_norm(s.u, 1.0);
  const double l2 = sobolev_norm(s.v, 0.0);
  r.e_u_h1 = h1 * h1;
  r.e_v_l2 = l2 * l2;
  r.total = r.e_u_h1 + r.e_v_l2;
  return r;
}

// Conserved functional of the pure wave flow: sum_j 4 pi^2 |j|^2 |u_j|^2 + |v_j|^2.
inline double wave_energy(const GalerkinState& s) {
  const auto& lat = *s.u.lattice;
  double e = 0.0;
  for (std::size_t m = 0; m < lat.size(); ++m) {
    e += kFourPi2 * LatticeSpec::norm2(lat.modes[m]) * std::norm(s.u.at(0, int(m)));
    e += std::norm(s.v.at(0, int(m)));
  }
  return e;
}

struct DifferenceEnergy {
  double t = 0.0;
  int n_low = 0, n_high = 0;
  double w_l2 = 0.0;   // ||u_m - u_n||_{L^2}^2
  double z_hm1 = 0.0;  // ||v_m - v_n||_{H^{-1}}^2
  double total = 0.0;
};

// Embed a field into a (larger) lattice, zero-padding the new modes.
inline SpectralField embed(const SpectralField& f, const LatticePtr& lat) {
  SpectralField g(lat, f.components);
  for (int c = 0; c < f.components; ++c)
    for (std::size_t m = 0; m < f.lattice->size(); ++m) {
      const int dst = lat->index_of(f.lattice->modes[m]);
      if (dst >= 0) g.at(c, dst) = f.at(c, int(m));
    }
  return g;
}

// N_{m,n}(t) per saved time.
inline std::vector<DifferenceEnergy> difference_energy(const PairedTrajectories& pair) {
  if (pair.fine.size() != pair.coarse.size())
    throw std::invalid_argument("difference_energy: misaligned trajectories");
  std::vector<DifferenceEnergy> out;
  out.reserve(pair.fine.size());
  for (std::size_t i = 0; i < pair.fine.size(); ++i) {
    const auto& [tf, sf] = pair.fine[i];
    const auto& [tc, sc] = pair.coarse[i];
    if (std::abs(tf - tc) > 1e-12)
      throw std::invalid_argument("difference_energy: misaligned times");
    DifferenceEnergy d;
    d.t = tf;
    d.n_low = sc.u.lattice->n;
    d.n_high = sf.u.lattice->n;
    const SpectralField w = sf.u - embed(sc.u, sf.u.lattice);
    const SpectralField z = sf.v - embed(sc.v, sf.v.lattice);
    const double wl2 = sobolev_norm(w, 0.0);
    const double zh = sobolev_norm(z, -1.0);
    d.w_l2 = wl2 * wl2;
    d.z_hm1 = zh * zh;
    d.total = d.w_l2 + d.z_hm1;
    out.push_back(d);
  }
  return out;
}

inline double sup_difference_energy(const PairedTrajectories& pair) {
  double sup = 0.0;
  for (const auto& d : difference_energy(pair)) sup = std::max(sup, d.total);
  return sup;
}

struct IncrementMomentTable {
  std::vector<double> lags;
  std::vector<double> moments;  // E ||v(t)-v(s)||^4_{H^{-rho}} per lag
  double slope = 0.0;           // fitted log-log slope vs lag
};

// Monte Carlo fourth moments of velocity increments over an ensemble of
// trajectories saved on a common uniform time grid.
inline IncrementMomentTable increment_moment(const std::vector<Trajectory>& ensemble,
                                             double rho,
                                             const std::vector<std::size_t>& lag_steps) {
  if (lag_steps.size() < 2)
    throw std::invalid_argument("increment_moment: need at least 2 lags");
  if (ensemble.empty() || ensemble.front().empty())
    throw std::invalid_argument("increment_moment: empty ensemble");
  const auto& times = ensemble.front();
  const double dt_save = times.size() > 1 ? times[1].first - times[0].first : 0.0;
  SobolevWeights wts(times.front().second.v.lattice, -rho);

  IncrementMomentTable table;
  for (std::size_t lag : lag_steps) {
    CompensatedSum acc;
    std::size_t count = 0;
    for (const auto& traj : ensemble)
      for (std::size_t i = 0; i + lag < traj.size(); ++i) {
        const double nsq = wts.norm_sq(traj[i + lag].second.v - traj[i].second.v);
        acc.add(nsq * nsq);
        ++count;
      }
    table.lags.push_back(double(lag) * dt_save);
    table.moments.push_back(count ? acc.value() / double(count) : 0.0);
  }
  // log-log fit over the nonzero lags
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int np = 0;
  for (std::size_t i = 0; i < table.lags.size(); ++i) {
    if (table.lags[i] <= 0.0 || table.moments[i] <= 0.0) continue;
    const double lx = std::log(table.lags[i]), ly = std::log(table.moments[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++np;
  }
  if (np >= 2) table.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  return table;
}

// Left-point Riemann-Ito discretization of
//   Z_t = sum_k int_0^t e^{kappa (t-s) Delta} (sigma_k . grad v_s) dB^k_s,
// with v given per step. Advances incrementally: Z <- e^{kappa dt Delta}(Z + G(v_i) dW_i).
class StochasticConvolution {
 public:
  StochasticConvolution(const NoiseBasis& basis, double kappa, const BrownianDriver& driver,
                        const LatticePtr& lat)
      : basis_(basis), kappa_(kappa), driver_(driver), z_(lat, 1) {}

  // Consume one step with the velocity field frozen at the step's left point.
  void advance(const SpectralField& v_step) {
    const auto& chans = basis_.channels();
    for (std::size_t c = 0; c < chans.size(); ++c) {
      const double dw = driver_.increment(chans[c].key, step_);
      if (dw != 0.0) transport_accumulate(chans[c], v_step, dw, z_);
    }
    heat_multiply_inplace(z_, kappa_, driver_.dt());
    ++step_;
  }

  const SpectralField& value() const { return z_; }
  std::uint64_t steps() const { return step_; }

 private:
  const NoiseBasis& basis_;
  double kappa_;
  BrownianDriver driver_;
  SpectralField z_;
  std::uint64_t step_ = 0;
};

// Z_t for a stored velocity trajectory sampled at every step.
inline SpectralField stochastic_convolution(const NoiseBasis& basis,
                                            const std::vector<SpectralField>& v_steps,
                                            double kappa, const BrownianDriver& driver) {
  if (v_steps.empty()) throw std::invalid_argument("stochastic_convolution: empty trajectory");
  StochasticConvolution sc(basis, kappa, driver, v_steps.front().lattice);
  for (const auto& v : v_steps) sc.advance(v);
  return sc.value();
}

// Deterministic side of the Ito isometry at time t = nsteps*dt for a frozen v:
//   sum_ch sum_i dt || e^{kappa (t-t_i) Delta} (sigma_ch . grad v) ||^2_{H^{-eps}}.
inline double isometry_quadrature(const NoiseBasis& basis, const SpectralField& v,
                                  double kappa, double dt, std::uint64_t nsteps,
                                  double sobolev_order) {
  SobolevWeights wts(v.lattice, sobolev_order);
  CompensatedSum acc;
  for (std::size_t c = 0; c < basis.channels().size(); ++c) {
    SpectralField g(v.lattice, 1);
    transport_accumulate(basis.channels()[c], v, 1.0, g);
    for (std::uint64_t i = 0; i < nsteps; ++i) {
      const double tau = double(nsteps - i) * dt;  // left-point weight e^{kappa(t - t_i)}
      acc.add(dt * wts.norm_sq(heat_multiply(g, kappa, tau)));
    }
  }
  return acc.value();
}

struct ConvolutionScalingRow {
  double q_l1 = 0.0;       // ||Q^N||_{L^1}
  double sup_moment = 0.0; // E sup_t ||Z_t||^2_{H^{-a}}
};

struct ConvolutionScalingReport {
  std::vector<ConvolutionScalingRow> rows;
  double slope = 0.0;   // fitted d log(moment) / d log(||Q||_{L1})
  double target = 0.0;  // 2(a - eps)/d
};

// E sup_t ||Z_t||^2_{H^{-a}} across a scaling family at fixed kappa, with the
// fitted ||Q^N||_{L^1} exponent.
inline ConvolutionScalingReport convolution_bound_report(
    const std::vector<NoiseSpec>& family, const SpectralField& frozen_v,
    double kappa, double a, double eps, double T, double dt, std::size_t paths,
    std::uint64_t seed) {
  if (family.size() < 3)
    throw std::invalid_argument("convolution_bound_report: need a family of >= 3");
  ConvolutionScalingReport rep;
  rep.target = 2.0 * (a - eps) / double(family.front().d);
  SobolevWeights wts(frozen_v.lattice, -a);
  const auto nsteps = std::uint64_t(std::llround(T / dt));
  for (const NoiseSpec& spec : family) {
    NoiseBasis basis(spec);
    const auto norms = covariance_norms(basis, std::max(2 * basis.max_mode(), 16));
    CompensatedSum acc;
    for (std::size_t p = 0; p < paths; ++p) {
      auto driver = BrownianDriver::for_path(seed, p, dt);
      StochasticConvolution sc(basis, kappa, driver, frozen_v.lattice);
      double sup = 0.0;
      for (std::uint64_t i = 0; i < nsteps; ++i) {
        sc.advance(frozen_v);
        sup = std::max(sup, wts.norm_sq(sc.value()));
      }
      acc.add(sup);
    }
    rep.rows.push_back({norms.l1_norm, acc.value() / double(paths)});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int np = int(rep.rows.size());
  for (const auto& r : rep.rows) {
    const double lx = std::log(r.q_l1), ly = std::log(r.sup_moment);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  rep.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  return rep;
}

}  // namespace swave
