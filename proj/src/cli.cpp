// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "shiftmd/analysis.hpp"
#include "shiftmd/costmodel.hpp"
#include "shiftmd/dataset.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/kvfile.hpp"
#include "shiftmd/md.hpp"
#include "shiftmd/net.hpp"
#include "shiftmd/train.hpp"

namespace shiftmd::cli {

namespace fs = std::filesystem;

namespace {

std::vector<int> parse_arch(const std::string& s) {
  std::vector<int> arch;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t pos = 0;
      arch.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("invalid architecture '" + s + "' (expected comma-separated layer widths, e.g. 3,3,3,2)");
    }
  }
  if (arch.size() < 2) throw Error("architecture needs at least two layers");
  return arch;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
  return v;
}

// Resolved options of a parsed subcommand as key = value text.
std::string resolved_config(const CLI::App& sub) {
  auto kv = parse_key_values(sub.config_to_str(true, false));
  kv.erase("config");
  for (auto& [_, v] : kv) v = unquote(v);
  return "# shiftmd " + sub.get_name() + "\n" + write_key_values(kv);
}

// CLI11 only reads config files attached to the top-level app, so a
// subcommand's --config file is expanded into --key=value arguments here.
// Keys already given on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      used = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      used = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + used));
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_key_value_file(path)) {
      const std::string flag = "--" + key;
      const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
      if (!given) injected.push_back(flag + "=" + unquote(value));
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    break;
  }
  return args;
}

// Output directory with a resolved-config snapshot and a log that mirrors
// what goes to stdout.
class Run {
 public:
  Run(const CLI::App& sub, std::string out_dir, std::ostream& out) : out_(out) {
    if (out_dir.empty()) {
      const char* root = std::getenv(kOutRootEnv);
      out_dir = (fs::path(root && *root ? root : "runs") / sub.get_name()).string();
    }
    dir_ = out_dir;
    fs::create_directories(dir_);
    write_text(dir_ / "config.ini", resolved_config(sub));
    log_.open(dir_ / "run.log", std::ios::binary);
    if (!log_) throw Error("cannot write " + (dir_ / "run.log").string());
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void log(const std::string& line) {
    out_ << line << "\n";
    log_ << line << "\n";
  }

 private:
  std::ostream& out_;
  fs::path dir_;
  std::ofstream log_;
};

struct GenDataArgs {
  std::size_t n = 1000;
  std::uint64_t seed = 7;
  double bond_amp = 0.08, angle_amp = 15.0, max_translation = 5.0;
  dataset::SurrogateParams params;
  std::string out;
};

struct TrainArgs {
  std::string data, out, arch = "3,3,3,2";
  train::TrainConfig cfg;
};

struct QuantizeArgs {
  std::string model, data, out;
  quant::QuantConfig q;
  train::TrainConfig cfg;
};

struct EvalArgs {
  std::string model, data, out, engine = "sqnn", split = "test";
};

struct MdArgs {
  std::string model, out, engine = "sqnn";
  md::SimConfig cfg;
  bool binary = false;
  dataset::SurrogateParams params;
};

struct AnalyzeArgs {
  std::string traj, reference, out;
  double dt = 0.0;
  bool vdos = false;
  std::size_t max_lag = 8192;
  std::size_t n_peaks = 3;
  double min_frequency = 500.0;
};

struct CostArgs {
  std::string arch = "3,3,3,2", costs, out;
  int K = 3, sqnn_bits = 13, fqnn_bits = 16, shift_options = 16;
};

void add_train_options(CLI::App* sub, train::TrainConfig& cfg) {
  sub->add_option("--epochs", cfg.epochs, "training epochs")->check(CLI::PositiveNumber);
  sub->add_option("--batch", cfg.batch_size, "minibatch size")->check(CLI::PositiveNumber);
  sub->add_option("--lr", cfg.learning_rate, "initial learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--lr-decay", cfg.lr_decay, "per-epoch learning-rate factor")->check(CLI::PositiveNumber);
  sub->add_option("--seed", cfg.seed, "random seed");
}

void write_history(const fs::path& p, const std::vector<train::EpochRecord>& h) {
  std::string text = "# epoch train_rmse_meV_per_A test_rmse_meV_per_A\n";
  for (const auto& r : h) text += std::to_string(r.epoch) + " " + fmt("%.6f", r.train_rmse) + " " + fmt("%.6f", r.test_rmse) + "\n";
  write_text(p, text);
}

md::Trajectory load_trajectory(const std::string& path) {
  if (fs::path(path).extension() == ".bin") return md::read_trajectory_binary(path);
  return md::read_trajectory_xyz(path);
}

void cmd_gen_data(const CLI::App& sub, const GenDataArgs& a, std::ostream& out) {
  Run run(sub, a.out, out);
  dataset::GenConfig g;
  g.n = a.n;
  g.seed = a.seed;
  g.bond_amplitude = a.bond_amp;
  g.angle_amplitude_deg = a.angle_amp;
  g.max_translation = a.max_translation;
  const auto data = dataset::generate_dataset(a.params, g);
  dataset::save_dataset(data, a.params, g, run.dir().string());
  run.log("generated " + std::to_string(a.n) + " frames (train " + std::to_string(data.train.size()) + ", test " +
          std::to_string(data.test.size()) + ") into " + run.dir().string());
}

void cmd_train(const CLI::App& sub, const TrainArgs& a, std::ostream& out) {
  const auto data = dataset::load_dataset(a.data);
  Run run(sub, a.out, out);
  const auto result = train::train_cnn(data, parse_arch(a.arch), a.cfg);
  net::save_model(result.model, run.path("model.json").string());
  write_history(run.path("train_log.txt"), result.history);
  const auto& last = result.history.back();
  run.log("trained " + a.arch + " for " + std::to_string(last.epoch) + " epochs: train RMSE " + fmt("%.3f", last.train_rmse) +
          " meV/A, test RMSE " + fmt("%.3f", last.test_rmse) + " meV/A (hydrogen local components)");
}

void cmd_quantize(const CLI::App& sub, const QuantizeArgs& a, std::ostream& out) {
  const auto model = net::load_model(a.model);
  Run run(sub, a.out, out);
  net::MlpModel q;
  if (a.cfg.epochs == 0) {
    q = model;
    net::quantize_model(q, a.q);
    run.log("quantized without fine-tuning, K=" + std::to_string(a.q.K));
  } else {
    if (a.data.empty()) throw Error("quantize: --data is required when fine-tuning (use --epochs 0 to skip)");
    const auto data = dataset::load_dataset(a.data);
    const auto result = train::finetune_sqnn(model, data, a.cfg, a.q);
    q = result.model;
    write_history(run.path("finetune_log.txt"), result.history);
    run.log("fine-tuned for " + std::to_string(a.cfg.epochs) + " epochs with K=" + std::to_string(a.q.K) + ": test RMSE " +
            fmt("%.3f", result.history.back().test_rmse) + " meV/A (float forward, quantized weights)");
  }
  net::save_model(q, run.path("model.json").string());
}

void cmd_eval(const CLI::App& sub, const EvalArgs& a, std::ostream& out) {
  const auto model = net::load_model(a.model);
  const auto data = dataset::load_dataset(a.data);
  const auto engine = net::parse_engine(a.engine);
  if (a.split != "test" && a.split != "train") throw Error("--split must be test or train");
  const auto& frames = a.split == "test" ? data.test : data.train;
  Run run(sub, a.out, out);
  const auto scatter = analysis::force_scatter(model, frames, engine);
  std::vector<double> x, y;
  for (const auto& [p, r] : scatter.points) {
    x.push_back(p);
    y.push_back(r);
  }
  analysis::write_columns(run.path("scatter.dat").string(), x, y, "predicted_eV_per_A reference_eV_per_A");
  const std::string report = "engine = " + std::string(net::to_string(engine)) + "\nsplit = " + a.split + "\nframes = " +
                             std::to_string(frames.size()) + "\nrmse_meV_per_A = " + fmt("%.6f", scatter.rmse) + "\n";
  write_text(run.path("rmse.txt"), report);
  run.log(std::string(net::to_string(engine)) + " force RMSE on " + a.split + " split: " + fmt("%.3f", scatter.rmse) + " meV/A");
}

void cmd_md(const CLI::App& sub, MdArgs a, std::ostream& out) {
  a.cfg.engine = net::parse_engine(a.engine);
  net::MlpModel model;
  if (a.cfg.engine != net::Engine::Surrogate) {
    if (a.model.empty()) throw Error("md: --model is required for the " + a.engine + " engine");
    model = net::load_model(a.model);
  }
  Run run(sub, a.out, out);
  const auto traj = md::run_md(a.cfg, model, std::nullopt, a.params);
  md::write_trajectory_xyz(run.path("trajectory.xyz").string(), traj);
  if (a.binary) md::write_trajectory_binary(run.path("trajectory.bin").string(), traj);
  std::vector<double> t, ke;
  for (const auto& f : traj.frames) {
    t.push_back(f.time);
    ke.push_back(f.kinetic + (std::isnan(f.potential) ? 0.0 : f.potential));
  }
  analysis::write_columns(run.path("energy.dat").string(), t, ke,
                          a.cfg.engine == net::Engine::Surrogate ? "time_fs total_energy_eV" : "time_fs kinetic_energy_eV");
  run.log("ran " + std::to_string(a.cfg.steps) + " steps of " + a.engine + " MD (dt " + fmt("%g", a.cfg.dt) + " fs), " +
          std::to_string(traj.frames.size()) + " frames written");
}

void cmd_analyze(const CLI::App& sub, const AnalyzeArgs& a, std::ostream& out) {
  const auto traj = load_trajectory(a.traj);
  if (traj.frames.empty()) throw Error("analyze: trajectory " + a.traj + " has no frames");
  double dt = a.dt;
  if (dt <= 0 && traj.frames.size() > 1) dt = traj.frames[1].time - traj.frames[0].time;
  Run run(sub, a.out, out);

  nlohmann::ordered_json summary;
  summary["trajectory"] = a.traj;
  summary["frames"] = traj.frames.size();
  const auto stats = analysis::structural_stats(traj);
  summary["bond_length_mean_A"] = stats.bond_mean;
  summary["bond_length_std_A"] = stats.bond_std;
  summary["angle_mean_deg"] = stats.angle_mean;
  summary["angle_std_deg"] = stats.angle_std;
  run.log("bond length " + fmt("%.5f", stats.bond_mean) + " +- " + fmt("%.5f", stats.bond_std) + " A, H-O-H angle " +
          fmt("%.3f", stats.angle_mean) + " +- " + fmt("%.3f", stats.angle_std) + " deg");

  std::vector<analysis::Peak> peaks;
  analysis::VdosOptions vopt;
  vopt.max_lag = a.max_lag;
  if (a.vdos) {
    const auto spec = analysis::vdos(traj, dt, vopt);
    analysis::write_columns(run.path("vdos.dat").string(), spec.frequencies, spec.dos, "wavenumber_cm-1 normalized_dos");
    peaks = analysis::dominant_peaks(spec, a.n_peaks, a.min_frequency);
    nlohmann::ordered_json jp = nlohmann::ordered_json::array();
    for (const auto& p : peaks) {
      jp.push_back({{"frequency_cm-1", p.frequency}, {"height", p.height}});
      run.log("VDOS peak at " + fmt("%.1f", p.frequency) + " cm-1 (height " + fmt("%.3f", p.height) + ")");
    }
    summary["vdos_bin_width_cm-1"] = spec.bin_width;
    summary["peaks"] = std::move(jp);
  }

  if (!a.reference.empty()) {
    const auto ref = load_trajectory(a.reference);
    const auto rstats = analysis::structural_stats(ref);
    std::vector<std::pair<std::string, double>> reference = {{"bond_A", rstats.bond_mean}, {"angle_deg", rstats.angle_mean}};
    std::map<std::string, double> candidate = {{"bond_A", stats.bond_mean}, {"angle_deg", stats.angle_mean}};
    if (a.vdos) {
      const auto rpeaks = analysis::dominant_peaks(analysis::vdos(ref, dt, vopt), a.n_peaks, a.min_frequency);
      for (std::size_t i = 0; i < std::min(rpeaks.size(), peaks.size()); ++i) {
        const std::string key = "peak" + std::to_string(i + 1) + "_cm-1";
        reference.emplace_back(key, rpeaks[i].frequency);
        candidate[key] = peaks[i].frequency;
      }
    }
    const auto table = analysis::error_report(reference, {{"candidate", candidate}});
    write_text(run.path("error_table.txt"), table.render());
    run.log(table.render());
    nlohmann::ordered_json je;
    for (const auto& [k, v] : table.errors.front().second) je[k] = v;
    summary["relative_error_percent"] = std::move(je);
  }
  write_text(run.path("summary.json"), summary.dump(1) + "\n");
}

void cmd_cost(const CLI::App& sub, const CostArgs& a, std::ostream& out) {
  const auto arch = parse_arch(a.arch);
  cost::UnitCosts costs = a.costs.empty() ? cost::UnitCosts{} : cost::load_unit_costs(a.costs);
  Run run(sub, a.out, out);
  const auto s = cost::estimate_cost(arch, cost::Scheme::sqnn(a.K, a.sqnn_bits, a.shift_options), costs);
  const auto m = cost::estimate_cost(arch, cost::Scheme::fqnn(a.fqnn_bits), costs);
  const double ratio = static_cast<double>(s.matrix_units) / static_cast<double>(m.matrix_units);
  std::string report = "[sqnn K=" + std::to_string(a.K) + ", " + std::to_string(a.sqnn_bits) + " bits]\n" + s.render() + "\n[fqnn " +
                       std::to_string(a.fqnn_bits) + " bits]\n" + m.render() + "\n";
  report += "activation phi/tanh = " + fmt("%.4f", cost::activation_ratio(costs)) + "\n";
  report += "matrix units sqnn/fqnn = " + fmt("%.4f", ratio) + "\n";
  write_text(run.path("cost_report.txt"), report);
  nlohmann::ordered_json j;
  j["arch"] = arch;
  j["K"] = a.K;
  j["sqnn"] = nlohmann::ordered_json::parse(s.to_json());
  j["fqnn"] = nlohmann::ordered_json::parse(m.to_json());
  j["activation_ratio"] = cost::activation_ratio(costs);
  j["shift_to_multiply_ratio"] = ratio;
  write_text(run.path("cost.json"), j.dump(1) + "\n");
  run.log(report);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"shiftmd: shift-accumulate neural force fields for water MD"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_file;  // consumed by expand_config; declared for --help
  auto config = [&](CLI::App* sub) { sub->add_option("--config", config_file, "key = value file; command-line flags override it"); };

  GenDataArgs gen;
  auto* s_gen = app.add_subcommand("gen-data", "generate a surrogate-labelled water dataset");
  config(s_gen);
  s_gen->add_option("--n", gen.n, "number of frames")->check(CLI::PositiveNumber);
  s_gen->add_option("--seed", gen.seed, "random seed");
  s_gen->add_option("--bond-amp", gen.bond_amp, "O-H perturbation half-width (A)")->check(CLI::NonNegativeNumber);
  s_gen->add_option("--angle-amp", gen.angle_amp, "H-O-H perturbation half-width (deg)")->check(CLI::NonNegativeNumber);
  s_gen->add_option("--max-translation", gen.max_translation, "rigid translation half-width (A)")->check(CLI::NonNegativeNumber);
  s_gen->add_option("--r0", gen.params.r0, "equilibrium O-H length (A)");
  s_gen->add_option("--theta0", gen.params.theta0_deg, "equilibrium H-O-H angle (deg)");
  s_gen->add_option("--k-bond", gen.params.k_bond, "bond force constant (eV/A^2)");
  s_gen->add_option("--k-angle", gen.params.k_angle, "angle force constant (eV/rad^2)");
  s_gen->add_option("--out", gen.out, "output directory");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "train the float (CNN) force model");
  config(s_train);
  s_train->add_option("--data", tr.data, "dataset directory (train.xyz, test.xyz)")->required();
  s_train->add_option("--arch", tr.arch, "layer widths");
  add_train_options(s_train, tr.cfg);
  s_train->add_option("--out", tr.out, "output directory");

  QuantizeArgs qa;
  qa.cfg = train::finetune_defaults();
  auto* s_quant = app.add_subcommand("quantize", "quantize weights to K powers of two, with optional fine-tuning");
  config(s_quant);
  s_quant->add_option("--model", qa.model, "pre-trained model file")->required()->check(CLI::ExistingFile);
  s_quant->add_option("--data", qa.data, "dataset directory for fine-tuning");
  s_quant->add_option("--k", qa.q.K, "power-of-two terms per weight")->check(CLI::PositiveNumber);
  s_quant->add_option("--exp-min", qa.q.exp_min, "smallest shift exponent");
  s_quant->add_option("--exp-max", qa.q.exp_max, "largest shift exponent");
  s_quant->add_option("--epochs", qa.cfg.epochs, "fine-tuning epochs (0 = quantize only)");
  s_quant->add_option("--batch", qa.cfg.batch_size, "minibatch size")->check(CLI::PositiveNumber);
  s_quant->add_option("--lr", qa.cfg.learning_rate, "initial learning rate")->check(CLI::PositiveNumber);
  s_quant->add_option("--lr-decay", qa.cfg.lr_decay, "per-epoch learning-rate factor")->check(CLI::PositiveNumber);
  s_quant->add_option("--seed", qa.cfg.seed, "random seed");
  s_quant->add_option("--out", qa.out, "output directory");

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "force RMSE and scatter data for one engine");
  config(s_eval);
  s_eval->add_option("--model", ev.model, "model file")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--data", ev.data, "dataset directory")->required();
  s_eval->add_option("--engine", ev.engine, "float | fqnn | sqnn | surrogate");
  s_eval->add_option("--split", ev.split, "test | train");
  s_eval->add_option("--out", ev.out, "output directory");

  MdArgs mda;
  auto* s_md = app.add_subcommand("md", "run water molecular dynamics");
  config(s_md);
  s_md->add_option("--model", mda.model, "model file (not needed for the surrogate engine)");
  s_md->add_option("--engine", mda.engine, "float | fqnn | sqnn | surrogate");
  s_md->add_option("--steps", mda.cfg.steps, "number of steps");
  s_md->add_option("--dt", mda.cfg.dt, "time step (fs)")->check(CLI::PositiveNumber);
  s_md->add_option("--temperature", mda.cfg.temperature_init, "initial temperature (K)")->check(CLI::NonNegativeNumber);
  s_md->add_option("--seed", mda.cfg.seed, "velocity seed");
  s_md->add_option("--record-every", mda.cfg.record_every, "store every n-th step")->check(CLI::PositiveNumber);
  s_md->add_option("--remove-rotation", mda.cfg.remove_rotation, "start without rigid rotation (true/false)");
  s_md->add_flag("--binary", mda.binary, "also write trajectory.bin");
  s_md->add_option("--k-bond", mda.params.k_bond, "surrogate bond force constant (eV/A^2)");
  s_md->add_option("--k-angle", mda.params.k_angle, "surrogate angle force constant (eV/rad^2)");
  s_md->add_option("--out", mda.out, "output directory");

  AnalyzeArgs an;
  auto* s_an = app.add_subcommand("analyze", "structure, VDOS and relative errors of a trajectory");
  config(s_an);
  s_an->add_option("--traj", an.traj, "trajectory (.xyz or .bin)")->required()->check(CLI::ExistingFile);
  s_an->add_option("--reference", an.reference, "reference trajectory for the error table")->check(CLI::ExistingFile);
  s_an->add_option("--dt", an.dt, "frame spacing (fs); default from frame times");
  s_an->add_flag("--vdos", an.vdos, "compute the vibrational density of states");
  s_an->add_option("--max-lag", an.max_lag, "correlation length in frames (0 = full)");
  s_an->add_option("--peaks", an.n_peaks, "number of dominant peaks to report");
  s_an->add_option("--min-frequency", an.min_frequency, "ignore peaks below this wavenumber (cm-1)");
  s_an->add_option("--out", an.out, "output directory");

  CostArgs co;
  auto* s_cost = app.add_subcommand("cost", "transistor-count estimate of the shift and multiplier datapaths");
  config(s_cost);
  s_cost->add_option("--arch", co.arch, "layer widths");
  s_cost->add_option("--k", co.K, "power-of-two terms per weight")->check(CLI::PositiveNumber);
  s_cost->add_option("--sqnn-bits", co.sqnn_bits, "shift datapath width");
  s_cost->add_option("--fqnn-bits", co.fqnn_bits, "multiplier datapath width");
  s_cost->add_option("--shift-options", co.shift_options, "distinct shift amounts per shifter");
  s_cost->add_option("--costs", co.costs, "unit-cost override file")->check(CLI::ExistingFile);
  s_cost->add_option("--out", co.out, "output directory");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (s_gen->parsed()) cmd_gen_data(*s_gen, gen, out);
    if (s_train->parsed()) cmd_train(*s_train, tr, out);
    if (s_quant->parsed()) cmd_quantize(*s_quant, qa, out);
    if (s_eval->parsed()) cmd_eval(*s_eval, ev, out);
    if (s_md->parsed()) cmd_md(*s_md, mda, out);
    if (s_an->parsed()) cmd_analyze(*s_an, an, out);
    if (s_cost->parsed()) cmd_cost(*s_cost, co, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace shiftmd::cli
