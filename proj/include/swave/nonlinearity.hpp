#pragma once

// Pluggable nonlinear forcing f(u). The catalogue is fixed and analytic so
// the Lipschitz constant and C_b^2 metadata stay trustworthy; f is evaluated
// pointwise on an oversampled grid and truncated back to the ball.

#include <cmath>
#include <stdexcept>
#include <string>

#include "swave/rng.hpp"
#include "swave/transform.hpp"

namespace swave {

enum class NonlinKind { Zero, Linear, Sin, SmoothSat };

struct Nonlinearity {
  NonlinKind kind = NonlinKind::Zero;
  double c = 0.0;

  double lipschitz_const() const {
    switch (kind) {
      case NonlinKind::Zero: return 0.0;
      case NonlinKind::Linear: return std::abs(c);
      case NonlinKind::Sin: return std::abs(c);
      case NonlinKind::SmoothSat: return std::abs(c);  // sup |d/du u/(1+u^2)| = 1 at u=0
    }
    return 0.0;
  }
  bool cb2() const { return kind != NonlinKind::Linear; }
  bool zero() const { return kind == NonlinKind::Zero || c == 0.0; }

  double operator()(double u) const {
    switch (kind) {
      case NonlinKind::Zero: return 0.0;
      case NonlinKind::Linear: return c * u;
      case NonlinKind::Sin: return c * std::sin(u);
      case NonlinKind::SmoothSat: return c * u / (1.0 + u * u);
    }
    return 0.0;
  }

  std::string to_string() const {
    switch (kind) {
      case NonlinKind::Zero: return "zero";
      case NonlinKind::Linear: return "linear:" + std::to_string(c);
      case NonlinKind::Sin: return "sin:" + std::to_string(c);
      case NonlinKind::SmoothSat: return "smoothsat:" + std::to_string(c);
    }
    return "zero";
  }
};

// Config strings: "zero" | "linear:c" | "sin:c" | "smoothsat:c".
inline Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "zero") return {NonlinKind::Zero, 0.0};
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const std::string name = s.substr(0, colon);
    const double c = std::stod(s.substr(colon + 1));
    if (name == "linear") return {NonlinKind::Linear, c};
    if (name == "sin") return {NonlinKind::Sin, c};
    if (name == "smoothsat") return {NonlinKind::SmoothSat, c};
  }
  throw std::invalid_argument("unknown nonlinearity: " + s);
}

// Pi_n f(u): evaluate pointwise on a grid of at least dealias_level*(2n+1)
// points per axis (rounded up to a power of two), transform back, truncate.
inline SpectralField apply_f(const Nonlinearity& f, const SpectralField& u,
                             int dealias_level = 2) {
  if (!u.scalar()) throw std::invalid_argument("apply_f: expects a scalar field");
  if (dealias_level < 1) throw std::invalid_argument("apply_f: dealias level < 1");
  SpectralField out(u.lattice, 1);
  if (f.kind == NonlinKind::Zero) return out;
  if (f.kind == NonlinKind::Linear) {  // commutes with the transform
    out = u;
    out *= f.c;
    return out;
  }
  const std::size_t g = next_pow2(std::size_t(dealias_level) * (2 * u.lattice->n + 1));
  GridTransform tr(u.lattice, g);
  std::vector<double> vals;
  tr.to_grid(u, 0, vals);
  for (double& v : vals) v = f(v);
  tr.from_grid(vals, out, 0);
  return out;
}

// Max observed |f(a)-f(b)|/|a-b| over seeded random sample pairs.
inline double lipschitz_check(const Nonlinearity& f, std::size_t samples = 2000,
                              std::uint64_t seed = 7) {
  if (samples < 1000) throw std::invalid_argument("lipschitz_check: need >= 1000 samples");
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = 5.0 * counter_normal(seed, 0, i);
    const double b = 5.0 * counter_normal(seed, 1, i);
    if (a == b) continue;
    worst = std::max(worst, std::abs(f(a) - f(b)) / std::abs(a - b));
  }
  return worst;
}

}  // namespace swave
