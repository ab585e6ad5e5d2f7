#pragma once

// File formats: field snapshots, noise specs, run configs (JSON) and the
// CSV diagnostics emitted by the CLI.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swave/diagnostics.hpp"
#include "swave/dynamics.hpp"
#include "swave/experiments.hpp"
#include "swave/field.hpp"
#include "swave/noise.hpp"

namespace swave {

// Snapshot schema: {d, n, components, modes: [{j: [..], re: [..], im: [..]}]}.
inline nlohmann::json field_to_json(const SpectralField& f) {
  nlohmann::json j;
  const auto& lat = *f.lattice;
  j["d"] = lat.d;
  j["n"] = lat.n;
  j["components"] = f.components;
  nlohmann::json modes = nlohmann::json::array();
  for (std::size_t m = 0; m < lat.size(); ++m) {
    nlohmann::json entry;
    std::vector<int> jv(lat.modes[m].begin(), lat.modes[m].begin() + lat.d);
    entry["j"] = jv;
    std::vector<double> re, im;
    for (int c = 0; c < f.components; ++c) {
      re.push_back(f.at(c, int(m)).real());
      im.push_back(f.at(c, int(m)).imag());
    }
    entry["re"] = re;
    entry["im"] = im;
    modes.push_back(std::move(entry));
  }
  j["modes"] = std::move(modes);
  return j;
}

inline SpectralField field_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const int n = j.at("n").get<int>();
  const int comps = j.at("components").get<int>();
  SpectralField f(make_lattice(d, n), comps);
  for (const auto& entry : j.at("modes")) {
    const auto jv = entry.at("j").get<std::vector<int>>();
    Mode mode = {jv[0], jv[1], d == 3 ? jv[2] : 0};
    const int idx = f.lattice->index_of(mode);
    if (idx < 0) throw std::runtime_error("field snapshot: mode outside ball");
    const auto re = entry.at("re").get<std::vector<double>>();
    const auto im = entry.at("im").get<std::vector<double>>();
    for (int c = 0; c < comps; ++c) f.at(c, idx) = Complex(re[c], im[c]);
  }
  return f;
}

inline void save_field(const SpectralField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_field: cannot open " + path);
  out << field_to_json(f).dump(2) << "\n";
}

inline SpectralField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_field: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return field_from_json(j);
}

// NoiseSpec schema: {d, kappa, mode: "uniform-shell"|"explicit", N?, theta?}.
inline nlohmann::json noise_spec_to_json(const NoiseSpec& spec) {
  nlohmann::json j;
  j["d"] = spec.d;
  j["kappa"] = spec.kappa;
  j["mode"] = "explicit";
  nlohmann::json th = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.support.size(); ++i) {
    std::vector<int> kv(spec.support[i].begin(), spec.support[i].begin() + spec.d);
    th.push_back({{"k", kv}, {"theta", spec.theta[i]}});
  }
  j["theta"] = std::move(th);
  return j;
}

inline NoiseSpec noise_spec_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const double kappa = j.at("kappa").get<double>();
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "uniform-shell")
    return uniform_shell_spec(d, kappa, j.at("N").get<int>());
  if (mode != "explicit") throw std::runtime_error("noise spec: unknown mode " + mode);
  NoiseSpec spec;
  spec.d = d;
  for (const auto& entry : j.at("theta")) {
    const auto kv = entry.at("k").get<std::vector<int>>();
    spec.support.push_back({kv[0], kv[1], d == 3 ? kv[2] : 0});
    spec.theta.push_back(entry.at("theta").get<double>());
  }
  // kappa follows from the normalization sum theta^2 = d/(d-1) kappa
  spec.kappa = (double(d - 1) / d) * spec.theta_sum_sq();
  validate_spec(spec);
  return spec;
}

inline nlohmann::json covariance_report_to_json(const CovarianceReport& rep, int d) {
  nlohmann::json j;
  nlohmann::json q0 = nlohmann::json::array();
  for (int r = 0; r < d; ++r) {
    std::vector<double> row(rep.q0[r].begin(), rep.q0[r].begin() + d);
    q0.push_back(row);
  }
  j["Q0"] = std::move(q0);
  j["kappa_eff"] = rep.kappa_eff;
  j["l1_norm"] = rep.l1_norm;
  j["l2_norm"] = rep.l2_norm;
  j["fourier_sup"] = rep.fourier_sup;
  return j;
}

// ---------------------------------------------------------------------------
// run configuration for `simulate`

struct RunConfig {
  std::string model = "wave";     // swe1 | swe2 | wave | damped-wave
  std::string scheme = "euler";   // euler | exp-euler | heun
  int d = 2;
  int n = 16;
  double dt = 1e-3;
  double T = 1.0;
  double kappa = 1.0;             // noise target kappa (stochastic models)
  std::string f = "zero";
  std::uint64_t seed = 1;
  std::vector<double> save_times; // empty -> 65 uniform times
  std::string init = "single-mode:1,0";
  nlohmann::json noise;           // optional explicit NoiseSpec JSON
  int shell = 1;                  // uniform shell when `noise` absent
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("model")) c.model = j["model"].get<std::string>();
  if (j.contains("scheme")) c.scheme = j["scheme"].get<std::string>();
  if (j.contains("d")) c.d = j["d"].get<int>();
  if (j.contains("n")) c.n = j["n"].get<int>();
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("T")) c.T = j["T"].get<double>();
  if (j.contains("kappa")) c.kappa = j["kappa"].get<double>();
  if (j.contains("f")) c.f = j["f"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("save_times")) c.save_times = j["save_times"].get<std::vector<double>>();
  if (j.contains("init")) c.init = j["init"].get<std::string>();
  if (j.contains("noise")) c.noise = j["noise"];
  if (j.contains("shell")) c.shell = j["shell"].get<int>();
  return c;
}

inline Model parse_model(const std::string& s) {
  if (s == "swe1") return Model::SWE1;
  if (s == "swe2") return Model::SWE2;
  if (s == "wave") return Model::Wave;
  if (s == "damped-wave") return Model::DampedWave;
  throw std::invalid_argument("unknown model: " + s);
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::EulerMaruyama;
  if (s == "exp-euler") return Scheme::ExpEuler;
  if (s == "heun") return Scheme::StratonovichHeun;
  throw std::invalid_argument("unknown scheme: " + s);
}

// init strings: path to a snapshot file, "single-mode:j0,j1[,j2]" or
// "random-h1:amplitude".
inline GalerkinState make_init(const std::string& spec, const LatticePtr& lat,
                               std::uint64_t seed) {
  if (spec.rfind("single-mode:", 0) == 0) {
    Mode j = {0, 0, 0};
    std::string rest = spec.substr(12);
    for (int c = 0; c < lat->d; ++c) {
      const auto comma = rest.find(',');
      j[c] = std::stoi(rest.substr(0, comma));
      if (comma == std::string::npos) break;
      rest = rest.substr(comma + 1);
    }
    return single_mode_init(lat, j);
  }
  if (spec.rfind("random-h1:", 0) == 0)
    return random_h1_init(lat, std::stod(spec.substr(10)), seed);
  GalerkinState s{0.0, embed(load_field(spec), lat), SpectralField(lat, 1)};
  return s;
}

inline void write_energy_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_energy_csv: cannot open " + path);
  out.precision(17);
  out << "t,e_u_h1,e_v_l2,total\n";
  for (const auto& [t, s] : traj) {
    const EnergyRecord r = energy(s);
    out << t << "," << r.e_u_h1 << "," << r.e_v_l2 << "," << r.total << "\n";
  }
}

inline void write_difference_csv(const std::vector<DifferenceEnergy>& diffs,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_difference_csv: cannot open " + path);
  out.precision(17);
  out << "t,w_l2,z_hm1,total\n";
  for (const auto& d : diffs)
    out << d.t << "," << d.w_l2 << "," << d.z_hm1 << "," << d.total << "\n";
}

}  // namespace swave
