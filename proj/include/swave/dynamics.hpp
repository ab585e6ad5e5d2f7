#pragma once

// Time integrators for the four systems: the Ito Galerkin systems with noise
// on displacement (SWE1) or velocity (SWE2, with the kappa*Delta v drift),
// and the deterministic wave / damped-wave limits.
//
// All schemes advance the linear part (wave rotation, plus the viscous
// damping where the model has it) with the exact per-mode 2x2 matrix
// exponential, so the mode-n dispersion imposes no step-size constraint.
// The schemes differ in how forcing and noise enter:
//   EULER_MARUYAMA    - left-point (Ito) forcing and noise
//   EXP_EULER         - trapezoidal nonlinearity, left-point (Ito) noise
//   STRATONOVICH_HEUN - predictor-corrector (Stratonovich) noise, and NO
//                       explicit kappa*Delta v drift for SWE2: the damping
//                       has to emerge from the averaged noise term.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swave/field.hpp"
#include "swave/noise.hpp"
#include "swave/nonlinearity.hpp"
#include "swave/rng.hpp"

namespace swave {

enum class Model { SWE1, SWE2, Wave, DampedWave };
enum class Scheme { EulerMaruyama, ExpEuler, StratonovichHeun };

inline bool is_stochastic(Model m) { return m == Model::SWE1 || m == Model::SWE2; }
inline bool has_damping(Model m) { return m == Model::SWE2 || m == Model::DampedWave; }

struct GalerkinState {
  double t = 0.0;
  SpectralField u;  // displacement
  SpectralField v;  // velocity
};

struct ModelSpec {
  Model model = Model::Wave;
  const NoiseBasis* basis = nullptr;  // required for SWE1/SWE2
  Nonlinearity f;
  double kappa = 0.0;  // effective diffusivity; used by SWE2 / DAMPED_WAVE

  void validate() const {
    if (is_stochastic(model) && basis == nullptr)
      throw std::invalid_argument("model: stochastic system needs a noise basis");
    if (!is_stochastic(model) && basis != nullptr)
      throw std::invalid_argument("model: deterministic system must not carry a basis");
    if (has_damping(model) && kappa <= 0.0)
      throw std::invalid_argument("model: kappa must be positive where used");
  }
};

struct StepScheme {
  Scheme scheme = Scheme::EulerMaruyama;
  double dt = 1e-3;
  int dealias = 2;

  void validate(Model m) const {
    if (dt <= 0.0) throw std::invalid_argument("scheme: dt must be positive");
    if (scheme == Scheme::StratonovichHeun && !is_stochastic(m))
      throw std::invalid_argument("scheme: Heun is for the stochastic systems");
  }
};

struct BlowUpError : std::runtime_error {
  double t_last;
  double energy_last;
  BlowUpError(double t, double e)
      : std::runtime_error("integration aborted: energy " + std::to_string(e) +
                           " at t=" + std::to_string(t) +
                           " (CFL violation or overflow)"),
        t_last(t), energy_last(e) {}
};

// Drift fields (du/dt, dv/dt) of the Ito form; used directly by tests and as
// the forcing reference for the schemes.
inline std::pair<SpectralField, SpectralField> drift(const ModelSpec& model,
                                                     const GalerkinState& s,
                                                     int dealias = 2) {
  model.validate();
  SpectralField dv = laplacian(s.u);
  if (!model.f.zero()) dv += apply_f(model.f, s.u, dealias);
  if (has_damping(model.model)) add_scaled(dv, model.kappa, laplacian(s.v));
  return {s.v, std::move(dv)};
}

// Noise contribution to dv for one step: sum_ch transport(phi) * dW_ch with
// phi = u (SWE1) or v (SWE2), truncated to the ball.
inline SpectralField diffusion(const ModelSpec& model, const GalerkinState& s,
                               const std::vector<double>& increments) {
  model.validate();
  if (!is_stochastic(model.model))
    throw std::invalid_argument("diffusion: deterministic model");
  const SpectralField& phi = (model.model == Model::SWE1) ? s.u : s.v;
  SpectralField out(phi.lattice, 1);
  const auto& chans = model.basis->channels();
  for (std::size_t c = 0; c < chans.size(); ++c)
    if (increments[c] != 0.0) transport_accumulate(chans[c], phi, increments[c], out);
  return out;
}

namespace detail {

// exp(dt * [[0,1],[-w2,-c]]) entries, row-major.
inline std::array<double, 4> wave_expm(double w2, double c, double dt) {
  const std::complex<double> s = std::sqrt(std::complex<double>(0.25 * c * c - w2));
  const double mu = -0.5 * c;
  const std::complex<double> sd = s * dt;
  const std::complex<double> ch = std::cosh(sd);
  std::complex<double> shc;  // sinh(s dt)/s, -> dt as s -> 0
  if (std::abs(sd) > 1e-6) {
    shc = std::sinh(sd) / s;
  } else {
    shc = dt * (1.0 + sd * sd / 6.0);
  }
  const double e = std::exp(mu * dt);
  return {e * (ch + 0.5 * c * shc).real(), e * shc.real(),
          e * (-w2 * shc).real(), e * (ch - 0.5 * c * shc).real()};
}

}  // namespace detail

// Exact flow of (u', v') = (v, -4 pi^2 |j|^2 u - kappa 4 pi^2 |j|^2 v),
// tabulated per mode for one step size.
class LinearPropagator {
 public:
  LinearPropagator(const LatticePtr& lat, double kappa, double dt) {
    mats_.reserve(lat->size());
    for (const Mode& j : lat->modes) {
      const double w2 = kFourPi2 * LatticeSpec::norm2(j);
      mats_.push_back(detail::wave_expm(w2, kappa * w2, dt));
    }
  }

  void apply(SpectralField& u, SpectralField& v) const {
    for (std::size_t m = 0; m < mats_.size(); ++m) {
      const auto& e = mats_[m];
      const Complex a = u.at(0, int(m)), b = v.at(0, int(m));
      u.at(0, int(m)) = e[0] * a + e[1] * b;
      v.at(0, int(m)) = e[2] * a + e[3] * b;
    }
  }

 private:
  std::vector<std::array<double, 4>> mats_;
};

// Energy E = ||u||_{H^1}^2 + ||v||_{L^2}^2 with precomputed weights.
inline double galerkin_energy(const GalerkinState& s) {
  const auto& lat = *s.u.lattice;
  double e = 0.0;
  for (std::size_t m = 0; m < lat.size(); ++m) {
    e += (1.0 + LatticeSpec::norm2(lat.modes[m])) * std::norm(s.u.at(0, int(m)));
    e += std::norm(s.v.at(0, int(m)));
  }
  return e;
}

class Integrator {
 public:
  Integrator(const ModelSpec& model, const StepScheme& scheme, const LatticePtr& lat)
      : model_(model), scheme_(scheme) {
    model_.validate();
    scheme_.validate(model_.model);
    const bool damped = has_damping(model_.model) &&
                        scheme_.scheme != Scheme::StratonovichHeun;
    prop_ = std::make_unique<LinearPropagator>(lat, damped ? model_.kappa : 0.0,
                                               scheme_.dt);
  }

  const ModelSpec& model() const { return model_; }
  const StepScheme& scheme() const { return scheme_; }

  // Advance one step; `increments` holds one Brownian increment per channel
  // (ignored for the deterministic models).
  //
  // Forcing and noise increments are added to v BEFORE the linear propagator
  // is applied (mild form): the increment then picks up the e^{kappa dt Delta}
  // factor of its own step, which is what keeps the stiff modes of SWE2
  // stable. Left-point evaluation of the noise coefficient is preserved, so
  // EULER_MARUYAMA / EXP_EULER remain Ito schemes.
  void step(GalerkinState& s, const std::vector<double>& increments) const {
    const bool stochastic = is_stochastic(model_.model);
    const bool with_f = !model_.f.zero();

    switch (scheme_.scheme) {
      case Scheme::EulerMaruyama: {
        if (with_f)
          add_scaled(s.v, scheme_.dt, apply_f(model_.f, s.u, scheme_.dealias));
        if (stochastic) {
          // left-point coefficient: accumulate into a scratch field so later
          // channels do not see earlier channels' increments
          SpectralField g(s.v.lattice, 1);
          diffuse(model_.model == Model::SWE1 ? s.u : s.v, increments, 1.0, g);
          s.v += g;
        }
        prop_->apply(s.u, s.v);
        break;
      }
      case Scheme::ExpEuler: {
        SpectralField f_old;
        if (with_f) f_old = apply_f(model_.f, s.u, scheme_.dealias);
        if (stochastic) {
          SpectralField g(s.v.lattice, 1);
          diffuse(model_.model == Model::SWE1 ? s.u : s.v, increments, 1.0, g);
          s.v += g;
        }
        prop_->apply(s.u, s.v);
        if (with_f) {
          // trapezoidal nonlinearity: average of f at the step endpoints
          const SpectralField f_new = apply_f(model_.f, s.u, scheme_.dealias);
          add_scaled(s.v, 0.5 * scheme_.dt, f_old);
          add_scaled(s.v, 0.5 * scheme_.dt, f_new);
        }
        break;
      }
      case Scheme::StratonovichHeun: {
        // Heun predictor-corrector on the noise; for SWE2 the propagator has
        // no damping and the Ito correction kappa*Delta v must emerge from
        // the averaged increment products.
        SpectralField f_old;
        if (with_f) f_old = apply_f(model_.f, s.u, scheme_.dealias);
        if (model_.model == Model::SWE1) {
          // coefficient depends on u only, and u carries no noise: average
          // the transport of u at the step endpoints
          SpectralField u_pred = s.u;
          SpectralField v_pred = s.v;
          prop_->apply(u_pred, v_pred);
          diffuse(s.u, increments, 0.5, s.v);
          diffuse(u_pred, increments, 0.5, s.v);
        } else {
          SpectralField g1(s.v.lattice, 1);
          diffuse(s.v, increments, 1.0, g1);
          SpectralField v_pred = s.v;
          v_pred += g1;
          add_scaled(s.v, 0.5, g1);
          SpectralField g2(s.v.lattice, 1);
          diffuse(v_pred, increments, 1.0, g2);
          add_scaled(s.v, 0.5, g2);
        }
        prop_->apply(s.u, s.v);
        if (with_f) {
          const SpectralField f_new = apply_f(model_.f, s.u, scheme_.dealias);
          add_scaled(s.v, 0.5 * scheme_.dt, f_old);
          add_scaled(s.v, 0.5 * scheme_.dt, f_new);
        }
        break;
      }
    }
    s.t += scheme_.dt;

    const double e = galerkin_energy(s);
    if (!std::isfinite(e) || e > 1e12) throw BlowUpError(s.t, e);
  }

 private:
  void diffuse(const SpectralField& phi, const std::vector<double>& dw,
               double scale, SpectralField& out) const {
    const auto& chans = model_.basis->channels();
    for (std::size_t c = 0; c < chans.size(); ++c)
      if (dw[c] != 0.0) transport_accumulate(chans[c], phi, scale * dw[c], out);
  }

  ModelSpec model_;
  StepScheme scheme_;
  std::unique_ptr<LinearPropagator> prop_;
};

using Trajectory = std::vector<std::pair<double, GalerkinState>>;

namespace detail {

inline std::vector<std::uint64_t> save_steps(const std::vector<double>& save_times,
                                             double dt, std::uint64_t nsteps) {
  std::vector<std::uint64_t> idx;
  for (double t : save_times) {
    const auto k = std::uint64_t(std::llround(t / dt));
    idx.push_back(std::min(k, nsteps));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace detail

// Integrate over [0, T], returning snapshots at the requested times (snapped
// to the step grid). Bit-reproducible for a given (driver seed, config).
inline Trajectory run(const ModelSpec& model, const StepScheme& scheme,
                      const GalerkinState& init, double T,
                      const BrownianDriver& driver,
                      const std::vector<double>& save_times) {
  model.validate();
  scheme.validate(model.model);
  const auto nsteps = std::uint64_t(std::llround(T / scheme.dt));
  const auto saves = detail::save_steps(save_times, scheme.dt, nsteps);

  Integrator integ(model, scheme, init.u.lattice);
  GalerkinState s = init;
  Trajectory out;
  std::size_t next_save = 0;
  auto maybe_save = [&](std::uint64_t k) {
    while (next_save < saves.size() && saves[next_save] == k) {
      out.emplace_back(s.t, s);
      ++next_save;
    }
  };
  maybe_save(0);
  std::vector<double> dw;
  for (std::uint64_t k = 0; k < nsteps; ++k) {
    if (is_stochastic(model.model))
      dw = sample_increments(driver, *model.basis, k);
    integ.step(s, dw);
    maybe_save(k + 1);
  }
  if (out.empty()) out.emplace_back(s.t, s);
  return out;
}

struct PairedTrajectories {
  Trajectory fine;    // truncation m
  Trajectory coarse;  // truncation n < m
};

// Two truncation levels driven by the identical Brownian path (increments
// shared by channel id), for the Cauchy difference energies.
inline PairedTrajectories coupled_pair_run(const ModelSpec& model,
                                           const StepScheme& scheme,
                                           const GalerkinState& init, double T,
                                           const BrownianDriver& driver,
                                           int m, int n,
                                           const std::vector<double>& save_times) {
  if (m <= n) throw std::invalid_argument("coupled_pair_run: need m > n");
  model.validate();
  scheme.validate(model.model);
  auto lat_fine = make_lattice(init.u.lattice->d, m);
  auto lat_coarse = make_lattice(init.u.lattice->d, n);

  auto restrict_to = [&](const SpectralField& f, const LatticePtr& lat) {
    SpectralField g(lat, 1);
    for (std::size_t k = 0; k < lat->size(); ++k) {
      const int src = f.lattice->index_of(lat->modes[k]);
      if (src >= 0) g.at(0, int(k)) = f.at(0, src);
    }
    return g;
  };
  GalerkinState sf{0.0, restrict_to(init.u, lat_fine), restrict_to(init.v, lat_fine)};
  GalerkinState sc{0.0, restrict_to(init.u, lat_coarse), restrict_to(init.v, lat_coarse)};

  const auto nsteps = std::uint64_t(std::llround(T / scheme.dt));
  const auto saves = detail::save_steps(save_times, scheme.dt, nsteps);
  Integrator integ_f(model, scheme, lat_fine);
  Integrator integ_c(model, scheme, lat_coarse);

  PairedTrajectories out;
  std::size_t next_save = 0;
  auto maybe_save = [&](std::uint64_t k) {
    while (next_save < saves.size() && saves[next_save] == k) {
      out.fine.emplace_back(sf.t, sf);
      out.coarse.emplace_back(sc.t, sc);
      ++next_save;
    }
  };
  maybe_save(0);
  std::vector<double> dw;
  for (std::uint64_t k = 0; k < nsteps; ++k) {
    if (is_stochastic(model.model))
      dw = sample_increments(driver, *model.basis, k);
    integ_f.step(sf, dw);
    integ_c.step(sc, dw);
    maybe_save(k + 1);
  }
  return out;
}

}  // namespace swave
