// Command-line front end: single simulations, the Galerkin-Cauchy study, the
// two scaling-limit studies, covariance norm tables, and a self-check suite.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "swave/diagnostics.hpp"
#include "swave/dynamics.hpp"
#include "swave/experiments.hpp"
#include "swave/io.hpp"
#include "swave/noise.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return j;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct GlobalOpts {
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;   // 0 -> keep the config's seed
  int threads = 1;
};

void add_global(CLI::App* cmd, GlobalOpts& g, bool config_required = true) {
  auto* c = cmd->add_option("--config", g.config, "JSON configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", g.seed, "override the config seed (nonzero)");
  cmd->add_option("--out-dir", g.out_dir, "output directory");
  cmd->add_option("--threads", g.threads, "worker threads for ensembles");
}

swave::ScalingStudyConfig scaling_config_from_json(const json& j) {
  swave::ScalingStudyConfig c;
  if (j.contains("d")) c.d = j["d"].get<int>();
  if (j.contains("kappa")) c.kappa = j["kappa"].get<double>();
  if (j.contains("shells")) c.shells = j["shells"].get<std::vector<int>>();
  if (j.contains("paths")) c.paths = j["paths"].get<std::size_t>();
  if (j.contains("n")) c.n = j["n"].get<int>();
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("T")) c.T = j["T"].get<double>();
  if (j.contains("f")) c.f = swave::parse_nonlinearity(j["f"].get<std::string>());
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("a")) c.a = j["a"].get<double>();
  if (j.contains("eps")) c.eps = j["eps"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("save_count")) c.save_count = j["save_count"].get<std::size_t>();
  if (j.contains("init_mode")) {
    const auto v = j["init_mode"].get<std::vector<int>>();
    c.init_mode = {v[0], v.size() > 1 ? v[1] : 0, v.size() > 2 ? v[2] : 0};
  }
  if (j.contains("init_amplitude")) c.init_amplitude = j["init_amplitude"].get<double>();
  return c;
}

int cmd_simulate(const GlobalOpts& g) {
  auto cfg = swave::run_config_from_json(load_json(g.config));
  if (g.seed != 0) cfg.seed = g.seed;
  const auto lat = swave::make_lattice(cfg.d, cfg.n);

  std::optional<swave::NoiseBasis> basis_storage;
  const swave::NoiseBasis* basis_ptr = nullptr;
  const swave::Model model = swave::parse_model(cfg.model);
  double kappa = 0.0;
  if (swave::is_stochastic(model)) {
    const auto nspec = cfg.noise.is_null()
                           ? swave::uniform_shell_spec(cfg.d, cfg.kappa, cfg.shell)
                           : swave::noise_spec_from_json(cfg.noise);
    basis_storage.emplace(nspec);
    basis_ptr = &*basis_storage;
    kappa = swave::covariance_at(*basis_storage, {0, 0, 0})[0][0] / 2.0;
  } else if (swave::has_damping(model)) {
    kappa = cfg.kappa;
  }

  swave::ModelSpec mspec{model, basis_ptr, swave::parse_nonlinearity(cfg.f), kappa};
  swave::StepScheme scheme{swave::parse_scheme(cfg.scheme), cfg.dt};
  const auto init = swave::make_init(cfg.init, lat, cfg.seed);
  auto save_times = cfg.save_times;
  if (save_times.empty()) save_times = swave::uniform_save_times(cfg.T, 65);

  const auto driver = swave::BrownianDriver::for_path(cfg.seed, 0, cfg.dt);
  const auto traj = swave::run(mspec, scheme, init, cfg.T, driver, save_times);

  std::filesystem::create_directories(g.out_dir);
  swave::write_energy_csv(traj, join_path(g.out_dir, "energy.csv"));
  swave::save_field(traj.back().second.u, join_path(g.out_dir, "u_final.json"));
  swave::save_field(traj.back().second.v, join_path(g.out_dir, "v_final.json"));
  {
    json echo = load_json(g.config);
    echo["seed"] = cfg.seed;
    std::ofstream out(join_path(g.out_dir, "config_echo.json"));
    out << echo.dump(2) << "\n";
  }
  std::printf("simulate: %zu snapshots, final t=%.6g, energy=%.6g\n", traj.size(),
              traj.back().first, swave::energy(traj.back().second).total);
  return 0;
}

int cmd_covariance(const GlobalOpts& g) {
  const auto spec = swave::noise_spec_from_json(load_json(g.config));
  swave::NoiseBasis basis(spec);
  const int level = std::max(2 * basis.max_mode(), 16);
  const auto rep = swave::covariance_norms(basis, level);
  const double closed = (spec.d - 1) * [&] {
    double s = 0.0;
    for (double t : spec.theta) s += t * t * t * t;
    return s;
  }();
  std::printf("kappa_eff   %.12g\n", rep.kappa_eff);
  std::printf("l1_norm     %.12g\n", rep.l1_norm);
  std::printf("l2_norm     %.12g   (closed form %.12g)\n", rep.l2_norm,
              std::sqrt(closed));
  std::printf("fourier_sup %.12g\n", rep.fourier_sup);
  std::filesystem::create_directories(g.out_dir);
  std::ofstream out(join_path(g.out_dir, "covariance.json"));
  out << swave::covariance_report_to_json(rep, spec.d).dump(2) << "\n";
  const bool pass = std::abs(rep.l2_norm * rep.l2_norm - closed) <=
                    1e-8 * std::max(closed, 1e-300);
  std::printf("l2 closed-form check: %s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_cauchy(const GlobalOpts& g) {
  const json j = load_json(g.config);
  const int d = j.value("d", 2);
  const auto truncations = j.at("truncations").get<std::vector<int>>();
  const int reference = j.at("reference").get<int>();
  const double dt = j.value("dt", 2e-3);
  const double T = j.value("T", 0.5);
  const auto f = swave::parse_nonlinearity(j.value("f", std::string("zero")));
  const auto nspec = swave::noise_spec_from_json(j.at("noise"));
  std::uint64_t seed = j.value("seed", std::uint64_t(1));
  if (g.seed != 0) seed = g.seed;
  const std::size_t paths = j.value("paths", std::size_t(32));
  const std::size_t save_count = j.value("save_count", std::size_t(33));

  const auto lat = swave::make_lattice(d, reference);
  swave::Mode jm = {1, 0, 0};
  if (j.contains("init_mode")) {
    const auto v = j["init_mode"].get<std::vector<int>>();
    jm = {v[0], v.size() > 1 ? v[1] : 0, v.size() > 2 ? v[2] : 0};
  }
  const auto init = swave::single_mode_init(lat, jm, j.value("init_amplitude", 1.0));

  const auto res = swave::run_cauchy_study(d, truncations, reference, dt, T, f, nspec,
                                           seed, paths, init, save_count, g.threads);
  bool pass = true;
  for (std::size_t i = 0; i < res.sup_n.size(); ++i) {
    std::printf("n=%-3d  E sup_t N = %.8e\n", res.truncations[i], res.sup_n[i]);
    if (i > 0) pass = pass && res.sup_n[i] <= 1.2 * res.sup_n[i - 1];
  }
  pass = pass && res.sup_n.back() <= 0.5 * res.sup_n.front();
  std::printf("decay check: %s\n", pass ? "PASS" : "FAIL");

  std::filesystem::create_directories(g.out_dir);
  json out;
  out["truncations"] = res.truncations;
  out["sup_n"] = res.sup_n;
  out["slope_vs_invn2"] = res.slope_vs_invn2;
  out["pass"] = pass;
  out["config"] = res.config_echo;
  std::ofstream os(join_path(g.out_dir, "cauchy.json"));
  os << out.dump(2) << "\n";
  std::ofstream csv(join_path(g.out_dir, "cauchy.csv"));
  csv.precision(17);
  csv << "n,sup_difference_energy\n";
  for (std::size_t i = 0; i < res.sup_n.size(); ++i)
    csv << res.truncations[i] << "," << res.sup_n[i] << "\n";
  return pass ? 0 : 1;
}

int cmd_scaling(const GlobalOpts& g, bool swe2) {
  auto cfg = scaling_config_from_json(load_json(g.config));
  if (g.seed != 0) cfg.seed = g.seed;
  cfg.threads = g.threads;
  const auto rep = swe2 ? swave::run_scaling_swe2(cfg) : swave::run_scaling_swe1(cfg);
  for (std::size_t i = 0; i < rep.x.size(); ++i)
    std::printf("q_l1=%.6g  err=%.8e\n", rep.x[i], rep.y[i]);
  if (swe2)
    std::printf("slope=%.4f r2=%.4f target=%.4f (tol %.2f)\n", rep.slope, rep.r2,
                rep.target, rep.tolerance);
  std::printf("%s\n", rep.pass ? "PASS" : "FAIL");
  std::filesystem::create_directories(g.out_dir);
  swave::persist_study(rep, join_path(g.out_dir, swe2 ? "scaling-swe2.json"
                                                      : "scaling-swe1.json"));
  return rep.pass ? 0 : 1;
}

// Fast structural self-checks: covariance closed forms, isotropy, the
// quadratic-variation and emergent-Laplacian identities, skew-adjointness,
// deterministic exactness, and bitwise determinism of a small ensemble.
int cmd_verify(const GlobalOpts& g) {
  using namespace swave;
  int failures = 0;
  auto report = [&](const char* name, bool ok, double value) {
    std::printf("%-34s %s  (%.3e)\n", name, ok ? "PASS" : "FAIL", value);
    if (!ok) ++failures;
  };

  // covariance closed form and isotropy over a handful of specs
  double worst_l2 = 0.0, worst_iso = 0.0;
  for (int d : {2, 3})
    for (int N : {1, 2, 3}) {
      NoiseBasis basis(uniform_shell_spec(d, 0.7, N));
      const auto rep = covariance_norms(basis, std::max(2 * basis.max_mode(), 16));
      double closed = 0.0;
      for (double t : basis.spec().theta) closed += t * t * t * t;
      closed *= (d - 1);
      worst_l2 = std::max(worst_l2,
                          std::abs(rep.l2_norm * rep.l2_norm - closed) / closed);
      const auto q0 = rep.q0;
      double trace = 0.0;
      for (int r = 0; r < d; ++r) trace += q0[r][r];
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          const double expect = (r == c) ? trace / d : 0.0;
          worst_iso = std::max(worst_iso, std::abs(q0[r][c] - expect) / trace);
        }
    }
  report("covariance l2 closed form", worst_l2 <= 1e-8, worst_l2);
  report("covariance isotropy", worst_iso <= 1e-10, worst_iso);

  // transport identities on an interior-supported random field
  {
    const auto lat = make_lattice(2, 12);
    NoiseBasis basis(uniform_shell_spec(2, 0.7, 2));
    const double keff = covariance_at(basis, {0, 0, 0})[0][0] / 2.0;
    const SpectralField u = project(random_h1_init(lat, 1.0, 3).u, 8);
    double qv = 0.0;
    for (std::size_t c = 0; c < basis.channels().size(); ++c) {
      const double nn = l2_norm(transport_apply(basis, c, u));
      qv += nn * nn;
    }
    const SpectralField gu = gradient(u);
    const double gn = l2_norm(gu);
    const double rhs = 2.0 * keff * gn * gn;
    report("quadratic variation identity", std::abs(qv - rhs) <= 1e-8 * rhs,
           std::abs(qv - rhs) / rhs);

    SpectralField lap = laplacian(u);
    lap *= keff;
    const double rel = l2_norm(ito_correction(basis, u) - lap) / l2_norm(lap);
    report("emergent Laplacian identity", rel <= 1e-8, rel);

    double skew = 0.0;
    for (std::size_t c = 0; c < basis.channels().size(); ++c)
      skew = std::max(skew, std::abs(l2_inner(transport_apply(basis, c, u), u)));
    report("transport skew-adjointness", skew <= 1e-10, skew);
  }

  // deterministic exactness of the linear propagator
  {
    const auto lat = make_lattice(2, 4);
    const auto init = single_mode_init(lat, {1, 0, 0});
    ModelSpec wave{Model::Wave, nullptr, {}, 0.0};
    const auto traj = run(wave, {Scheme::ExpEuler, 1e-3}, init, 1.0,
                          BrownianDriver(0, 1e-3), {1.0});
    const int idx = lat->index_of(1, 0, 0);
    const double err = std::abs(traj.back().second.u.at(0, idx) -
                                0.5 * std::cos(kTwoPi));
    report("deterministic wave exactness", err <= 5e-3, err);
  }

  // bitwise determinism of a tiny ensemble study
  {
    ScalingStudyConfig cfg;
    cfg.d = 2; cfg.kappa = 0.5; cfg.shells = {1, 2, 3}; cfg.paths = 4;
    cfg.n = 8; cfg.dt = 4e-3; cfg.T = 0.1; cfg.gamma = 0.25;
    cfg.seed = g.seed != 0 ? g.seed : 99;
    cfg.save_count = 9; cfg.threads = g.threads;
    const auto r1 = run_scaling_swe1(cfg);
    const auto r2 = run_scaling_swe1(cfg);
    bool same = r1.y.size() == r2.y.size();
    for (std::size_t i = 0; same && i < r1.y.size(); ++i) same = r1.y[i] == r2.y[i];
    report("ensemble determinism", same, same ? 0.0 : 1.0);
  }

  std::printf("verify: %s\n", failures == 0 ? "PASS" : "FAIL");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral Galerkin simulator for stochastic wave equations "
               "with transport noise"};
  app.require_subcommand(1);

  GlobalOpts g_sim, g_cov, g_cau, g_s1, g_s2, g_ver;
  auto* sim = app.add_subcommand("simulate", "integrate a single trajectory");
  add_global(sim, g_sim);
  auto* cov = app.add_subcommand("covariance", "covariance norm table for a noise spec");
  add_global(cov, g_cov);
  auto* cau = app.add_subcommand("cauchy", "Galerkin truncation Cauchy study");
  add_global(cau, g_cau);
  auto* s1 = app.add_subcommand("scaling-swe1", "structure-preservation scaling study");
  add_global(s1, g_s1);
  auto* s2 = app.add_subcommand("scaling-swe2", "dissipative scaling-rate study");
  add_global(s2, g_s2);
  auto* ver = app.add_subcommand("verify", "run the structural invariant checks");
  add_global(ver, g_ver, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(g_sim);
    if (cov->parsed()) return cmd_covariance(g_cov);
    if (cau->parsed()) return cmd_cauchy(g_cau);
    if (s1->parsed()) return cmd_scaling(g_s1, false);
    if (s2->parsed()) return cmd_scaling(g_s2, true);
    if (ver->parsed()) return cmd_verify(g_ver);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
