// Spectral core: lattice, Sobolev calculus, projections, heat multiplier and
// the grid transform, all checked against slow direct oracles.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "swave/field.hpp"
#include "swave/transform.hpp"
#include "swave/experiments.hpp"

using namespace swave;

namespace {

// Direct (slow) synthesis of a scalar field at grid point index (ix, iy[, iz]).
Complex direct_eval(const SpectralField& f, double x, double y, double z) {
  const auto& lat = *f.lattice;
  Complex acc{};
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const Mode& j = lat.modes[m];
    const double phase = kTwoPi * (j[0] * x + j[1] * y + j[2] * z);
    acc += f.at(0, int(m)) * Complex(std::cos(phase), std::sin(phase));
  }
  return acc;
}

SpectralField random_real_field(const LatticePtr& lat, std::uint64_t seed) {
  SpectralField f(lat, 1);
  for (std::size_t m = 0; m < lat->size(); ++m) {
    const Mode& j = lat->modes[m];
    if (!swave::detail::lex_positive(j) && LatticeSpec::norm2(j) != 0) continue;
    const Complex c(counter_normal(seed, m, 0), counter_normal(seed, m, 1));
    set_mode_pair(f, 0, j, 0.3 * c / (1.0 + LatticeSpec::norm2(j)));
  }
  return f;
}

}  // namespace

TEST_CASE("lattice ball membership and symmetry") {
  for (int d : {2, 3}) {
    const auto lat = make_lattice(d, 4);
    for (std::size_t m = 0; m < lat->size(); ++m) {
      const Mode& j = lat->modes[m];
      REQUIRE(LatticeSpec::norm2(j) <= 16);
      // -j is in the set with a valid index
      const int im = lat->index_of(-j[0], -j[1], -j[2]);
      REQUIRE(im >= 0);
      REQUIRE(lat->index_of(j) == int(m));
    }
    REQUIRE(lat->index_of(5, 0, 0) == -1);
    REQUIRE(lat->index_of(3, 3, 0) == -1);  // |j|^2 = 18 > 16
  }
  // d=2 lattice has no third-axis modes
  const auto lat2 = make_lattice(2, 3);
  REQUIRE(lat2->index_of(1, 0, 1) == -1);
  CHECK_THROWS_AS(make_lattice(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_lattice(2, 0), std::invalid_argument);
}

TEST_CASE("sobolev norm of a conjugate mode pair") {
  const auto lat = make_lattice(2, 4);
  SpectralField f(lat, 1);
  set_mode_pair(f, 0, {2, 1, 0}, Complex(0.5, 0.0));  // cos(2 pi (2x+y))
  // ||f||_{H^s}^2 = 2 * (1+5)^s * 0.25
  for (double s : {-1.0, 0.0, 1.0, 2.0}) {
    const double expect = std::sqrt(2.0 * std::pow(6.0, s) * 0.25);
    CHECK(sobolev_norm(f, s) == Catch::Approx(expect).epsilon(1e-12));
  }
  CHECK(conjugate_symmetry_defect(f) == 0.0);
}

TEST_CASE("grid transform matches the direct transform and round-trips") {
  for (int d : {2, 3}) {
    const auto lat = make_lattice(d, d == 2 ? 4 : 3);
    const auto f = random_real_field(lat, 11 + d);
    const std::size_t g = 16;
    GridTransform tr(lat, g);
    std::vector<double> vals;
    tr.to_grid(f, 0, vals);

    // direct oracle at a few grid points
    const std::size_t gz = (d == 3) ? g : 1;
    for (std::size_t iz = 0; iz < gz; iz += 5)
      for (std::size_t iy = 0; iy < g; iy += 7)
        for (std::size_t ix = 0; ix < g; ix += 3) {
          const Complex direct = direct_eval(f, double(ix) / g, double(iy) / g,
                                             double(iz) / g);
          const std::size_t idx = ix + g * iy + g * g * iz * (d == 3 ? 1 : 0);
          CHECK(std::abs(direct.imag()) < 1e-10);  // real field
          CHECK(vals[idx] == Catch::Approx(direct.real()).margin(1e-10));
        }

    // analysis round trip
    SpectralField back(lat, 1);
    tr.from_grid(vals, back, 0);
    double worst = 0.0;
    for (std::size_t m = 0; m < lat->size(); ++m)
      worst = std::max(worst, std::abs(back.at(0, int(m)) - f.at(0, int(m))));
    CHECK(worst < 1e-10);

    // Parseval: mean of u^2 over the grid equals ||u||_{L^2}^2
    double msq = 0.0;
    for (double v : vals) msq += v * v;
    msq /= double(vals.size());
    const double l2 = l2_norm(f);
    CHECK(msq == Catch::Approx(l2 * l2).epsilon(1e-10));
  }
  CHECK_THROWS_AS(GridTransform(make_lattice(2, 8), 12), std::invalid_argument);
  CHECK_THROWS_AS(GridTransform(make_lattice(2, 8), 16), std::invalid_argument);
}

TEST_CASE("projection is a self-adjoint contraction") {
  const auto lat = make_lattice(2, 6);
  const auto f = random_real_field(lat, 3);
  const auto g = random_real_field(lat, 4);
  const auto pf = project(f, 3);
  // contraction and idempotence
  CHECK(l2_norm(pf) <= l2_norm(f) + 1e-15);
  const auto ppf = project(pf, 3);
  for (std::size_t i = 0; i < pf.coeffs.size(); ++i)
    CHECK(ppf.coeffs[i] == pf.coeffs[i]);
  // self-adjointness <Pf, g> = <f, Pg>
  CHECK(l2_inner(pf, g) == Catch::Approx(l2_inner(f, project(g, 3))).margin(1e-12));
  // modes outside |j| <= 3 are zeroed, inside untouched
  for (std::size_t m = 0; m < lat->size(); ++m) {
    if (LatticeSpec::norm2(lat->modes[m]) > 9)
      CHECK(pf.at(0, int(m)) == Complex{});
    else
      CHECK(pf.at(0, int(m)) == f.at(0, int(m)));
  }
  CHECK_THROWS_AS(project(f, -1), std::invalid_argument);
}

TEST_CASE("heat multiplier: smoothing bound and semigroup property") {
  const auto lat = make_lattice(2, 8);
  const auto f = random_real_field(lat, 5);
  const double kappa = 0.3;

  // semigroup: e^{k t} e^{k s} = e^{k (t+s)}
  const auto a = heat_multiply(heat_multiply(f, kappa, 0.2), kappa, 0.3);
  const auto b = heat_multiply(f, kappa, 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    worst = std::max(worst, std::abs(a.coeffs[i] - b.coeffs[i]));
  CHECK(worst < 1e-14);

  // smoothing: ||e^{kappa t Delta} f||_{H^r} <= C (kappa t)^{-rho/2} ||f||_{H^{r-rho}}
  // via the scalar bound x^{rho} e^{-x} <= (rho/e)^{rho} applied per mode
  const double rho = 1.0, t = 0.05;
  const double lhs = sobolev_norm(heat_multiply(f, kappa, t), 1.0);
  const double cbound = std::pow(rho / (2.0 * std::exp(1.0) * kFourPi2 * kappa * t), rho / 2.0);
  const double rhs = std::max(1.0, cbound) * sobolev_norm(f, 0.0);
  CHECK(lhs <= rhs * (1.0 + 1e-12));
  CHECK_THROWS_AS(heat_multiply(f, kappa, -0.1), std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences on the grid") {
  const auto lat = make_lattice(2, 5);
  const auto f = random_real_field(lat, 9);
  const auto grad = gradient(f);
  const std::size_t g = 512;  // fine grid so the FD error is small
  GridTransform tr(lat, g);
  std::vector<double> u, gx;
  tr.to_grid(f, 0, u);
  // component 0 of the gradient as a scalar field
  SpectralField g0(lat, 1);
  for (std::size_t m = 0; m < lat->size(); ++m) g0.at(0, int(m)) = grad.at(0, int(m));
  tr.to_grid(g0, 0, gx);
  const double h = 1.0 / double(g);
  double worst = 0.0;
  for (std::size_t iy = 0; iy < g; iy += 17)
    for (std::size_t ix = 0; ix < g; ix += 13) {
      const double up = u[(ix + 1) % g + g * iy];
      const double um = u[(ix + g - 1) % g + g * iy];
      worst = std::max(worst, std::abs((up - um) / (2 * h) - gx[ix + g * iy]));
    }
  // second-order FD: error ~ h^2 |u'''| / 6 with |u'''| up to (2 pi n)^3 amp
  CHECK(worst < 2e-2);
  CHECK_THROWS_AS(gradient(SpectralField(lat, 2)), std::invalid_argument);
}

TEST_CASE("laplacian is the divergence of the gradient") {
  const auto lat = make_lattice(3, 3);
  const auto f = random_real_field(lat, 21);
  const auto lap = laplacian(f);
  const auto grad = gradient(f);
  for (std::size_t m = 0; m < lat->size(); ++m) {
    const Mode& j = lat->modes[m];
    Complex div{};
    for (int c = 0; c < 3; ++c)
      div += Complex(0.0, kTwoPi * j[c]) * grad.at(c, int(m));
    CHECK(std::abs(div - lap.at(0, int(m))) < 1e-13);
    CHECK(std::abs(lap.at(0, int(m)) -
                   Complex(-kFourPi2 * LatticeSpec::norm2(j)) * f.at(0, int(m))) < 1e-13);
  }
}

TEST_CASE("field arithmetic and compensated helpers") {
  const auto lat = make_lattice(2, 3);
  auto f = random_real_field(lat, 1);
  const auto g = random_real_field(lat, 2);
  auto h = f + g;
  add_scaled(h, -1.0, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    worst = std::max(worst, std::abs(h.coeffs[i] - f.coeffs[i]));
  CHECK(worst < 1e-15);
  CHECK(l2_norm(2.0 * f) == Catch::Approx(2.0 * l2_norm(f)).epsilon(1e-13));
  CHECK_THROWS_AS(set_mode_pair(f, 0, {7, 0, 0}, Complex(1, 0)), std::out_of_range);
}
