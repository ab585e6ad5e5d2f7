// Experiment harness: rate fitting, ensembles, the Cauchy study and the
// scaling studies (small, fast configurations), persistence and determinism.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "swave/experiments.hpp"
#include "swave/io.hpp"

using namespace swave;

TEST_CASE("rate fitting on synthetic data") {
  {
    const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
    const auto fit = fit_rate(x, x);  // y = x
    CHECK(fit.slope == Catch::Approx(1.0).margin(1e-12));
    CHECK(fit.r2 == Catch::Approx(1.0).margin(1e-12));
  }
  {
    std::vector<double> x = {0.5, 1.0, 3.0, 10.0}, y;
    for (double v : x) y.push_back(2.7 * std::pow(v, 0.15));
    const auto fit = fit_rate(x, y);
    CHECK(fit.slope == Catch::Approx(0.15).margin(1e-10));
    CHECK(std::exp(fit.intercept) == Catch::Approx(2.7).epsilon(1e-10));
  }
  {
    const std::vector<double> x = {1.0, 2.0, 4.0}, y = {5.0, 5.0, 5.0};
    CHECK(fit_rate(x, y).slope == Catch::Approx(0.0).margin(1e-12));
  }
  CHECK_THROWS_AS(fit_rate({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({1.0, 1.0, 3.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("initial data constructors") {
  const auto lat = make_lattice(2, 8);
  const auto s = single_mode_init(lat, {2, 1, 0}, 2.0);
  // 2 cos(2 pi (2x+y)): coefficient pair of magnitude 1
  CHECK(s.u.at(0, lat->index_of(2, 1, 0)) == Complex(1.0, 0.0));
  CHECK(s.u.at(0, lat->index_of(-2, -1, 0)) == Complex(1.0, 0.0));
  CHECK(l2_norm(s.v) == 0.0);
  CHECK(conjugate_symmetry_defect(s.u) == 0.0);

  const auto r1 = random_h1_init(lat, 1.0, 5);
  const auto r2 = random_h1_init(lat, 1.0, 5);
  const auto r3 = random_h1_init(lat, 1.0, 6);
  CHECK(conjugate_symmetry_defect(r1.u) == 0.0);
  CHECK(conjugate_symmetry_defect(r1.v) == 0.0);
  CHECK(l2_norm(r1.u - r2.u) == 0.0);       // seeded determinism
  CHECK(l2_norm(r1.u - r3.u) > 0.0);
  CHECK(std::isfinite(sobolev_norm(r1.u, 1.0)));

  const auto t = uniform_save_times(2.0, 5);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 2.0);
  CHECK(t[2] == Catch::Approx(1.0));
}

TEST_CASE("ensemble map is order-deterministic under threading") {
  auto job = [](std::size_t i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 1000; ++k)
      acc += std::sin(double(i * 1000 + k)) * 1e-3;
    return acc;
  };
  const auto serial = ensemble_map(64, 1, job);
  const auto parallel = ensemble_map(64, 3, job);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(serial[i] == parallel[i]);  // bitwise
  CHECK(mean_of({1.0, 2.0, 3.0}) == Catch::Approx(2.0));
}

TEST_CASE("scaling family preconditions are enforced") {
  CHECK_NOTHROW(detail::prepare_family(2, 0.5, {1, 2, 4}));
  CHECK_THROWS(detail::prepare_family(2, 0.5, {2, 1}));
  ScalingStudyConfig cfg;
  cfg.gamma = 0.7;
  CHECK_THROWS_AS(run_scaling_swe1(cfg), std::invalid_argument);
  ScalingStudyConfig c2;
  c2.a = 0.7;
  CHECK_THROWS_AS(run_scaling_swe2(c2), std::invalid_argument);
  ScalingStudyConfig c3;
  c3.shells = {1, 2, 3};
  c3.f = parse_nonlinearity("linear:1");  // not C_b^2
  CHECK_THROWS_AS(run_scaling_swe2(c3), std::invalid_argument);
  ScalingStudyConfig c4;
  c4.shells = {1, 2, 3};
  c4.eps = 0.6;  // eps > a
  CHECK_THROWS_AS(run_scaling_swe2(c4), std::invalid_argument);
}

TEST_CASE("cauchy study input validation and basic monotonicity") {
  const auto lat = make_lattice(2, 12);
  const auto init = single_mode_init(lat, {1, 0, 0});
  const auto noise = uniform_shell_spec(2, 1.0, 2);
  CHECK_THROWS_AS(run_cauchy_study(2, {4, 4}, 12, 4e-3, 0.1, {}, noise, 1, 2, init),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_cauchy_study(2, {4, 8, 12}, 12, 4e-3, 0.1, {}, noise, 1, 2, init),
                  std::invalid_argument);  // reference must be strictly largest
  const auto res = run_cauchy_study(2, {3, 6}, 12, 4e-3, 0.25,
                                    parse_nonlinearity("sin:1"), noise, 4, 8, init, 9);
  REQUIRE(res.sup_n.size() == 2);
  CHECK(res.sup_n[0] > 0.0);
  CHECK(res.sup_n[1] < res.sup_n[0]);  // higher truncation is closer to the reference
  CHECK(res.config_echo.at("study") == "cauchy");
}

TEST_CASE("study persistence: round trip, CSV companion, error paths") {
  RateReport rep;
  rep.quantity = "test quantity";
  rep.x = {0.5, 0.2, 0.1};
  rep.y = {3.0, 2.0, 1.0};
  rep.y_alt = {4.0, 4.1, 4.2};
  rep.slope = 0.42;
  rep.intercept = -1.0;
  rep.r2 = 0.99;
  rep.target = 0.15;
  rep.tolerance = 0.05;
  rep.pass = true;
  rep.config_echo = {{"study", "unit"}};
  const auto dir = std::filesystem::temp_directory_path() / "swave_persist_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "report.json").string();
  persist_study(rep, path);
  const auto back = load_study(path);
  CHECK(back.quantity == rep.quantity);
  CHECK(back.x == rep.x);
  CHECK(back.y == rep.y);
  CHECK(back.y_alt == rep.y_alt);
  CHECK(back.slope == rep.slope);
  CHECK(back.pass == rep.pass);
  CHECK(back.config_echo.at("study") == "unit");
  CHECK(std::filesystem::exists(dir / "report.csv"));
  CHECK_THROWS(persist_study(rep, "/nonexistent-dir-xyz/report.json"));
  CHECK_THROWS(load_study("/nonexistent-dir-xyz/report.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("small scaling study re-runs bitwise from the echoed config") {
  ScalingStudyConfig cfg;
  cfg.d = 2;
  cfg.kappa = 0.5;
  cfg.shells = {1, 2, 3};
  cfg.paths = 4;
  cfg.n = 8;
  cfg.dt = 4e-3;
  cfg.T = 0.1;
  cfg.gamma = 0.25;
  cfg.seed = 12;
  cfg.save_count = 9;
  const auto r1 = run_scaling_swe1(cfg);
  // reconstruct the config from the echo and re-run
  ScalingStudyConfig c2;
  const auto& e = r1.config_echo;
  c2.d = e.at("d").get<int>();
  c2.kappa = e.at("kappa").get<double>();
  c2.shells = e.at("shells").get<std::vector<int>>();
  c2.paths = e.at("paths").get<std::size_t>();
  c2.n = e.at("n").get<int>();
  c2.dt = e.at("dt").get<double>();
  c2.T = e.at("T").get<double>();
  c2.f = parse_nonlinearity(e.at("f").get<std::string>());
  c2.gamma = e.at("gamma").get<double>();
  c2.seed = e.at("seed").get<std::uint64_t>();
  c2.save_count = e.at("save_count").get<std::size_t>();
  c2.threads = 2;  // threading must not change the numbers
  const auto r2 = run_scaling_swe1(c2);
  REQUIRE(r1.y.size() == r2.y.size());
  for (std::size_t i = 0; i < r1.y.size(); ++i) CHECK(r1.y[i] == r2.y[i]);
}

TEST_CASE("run config and noise spec JSON round trips") {
  const auto spec = uniform_shell_spec(2, 0.8, 2);
  const auto back = noise_spec_from_json(noise_spec_to_json(spec));
  CHECK(back.d == spec.d);
  CHECK(back.kappa == Catch::Approx(spec.kappa).epsilon(1e-12));
  REQUIRE(back.support.size() == spec.support.size());

  const auto lat = make_lattice(2, 5);
  const auto s = random_h1_init(lat, 1.0, 9);
  const auto f2 = field_from_json(field_to_json(s.u));
  CHECK(l2_norm(f2 - s.u) == 0.0);

  nlohmann::json j = {{"model", "swe2"}, {"scheme", "heun"}, {"n", 12},
                      {"dt", 5e-4}, {"kappa", 0.3}, {"init", "single-mode:2,1"}};
  const auto cfg = run_config_from_json(j);
  CHECK(parse_model(cfg.model) == Model::SWE2);
  CHECK(parse_scheme(cfg.scheme) == Scheme::StratonovichHeun);
  CHECK(cfg.n == 12);
  const auto init = make_init(cfg.init, lat, 1);
  CHECK(init.u.at(0, lat->index_of(2, 1, 0)) == Complex(0.5, 0.0));
  CHECK_THROWS(parse_model("heat"));
  CHECK_THROWS(parse_scheme("milstein"));
}
