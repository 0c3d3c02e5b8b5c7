// Command-line front end: simulate, sweep-fig2, converge, scaling.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qtraj/config.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/io.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/runner.hpp"

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::stringstream is(item);
    T v{};
    if (!(is >> v)) throw qtraj::ConfigError("cannot parse list item '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw qtraj::ConfigError("empty list");
  return out;
}

void print_summary(const qtraj::RunManifest& m) {
  std::cout << "wrote " << m.path.string() << '\n';
  for (const auto& r : m.runs) {
    const auto last = r.layers.back().finalize();
    std::cout << r.strategy << " chi=" << r.chi_max << " final S=" << last.entropy.mean << " +- "
              << last.entropy.se << " chi_eff=" << last.chi_eff.mean << " +- " << last.chi_eff.se
              << " (" << r.wall_seconds << " s)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive trajectory unravelings for noisy random circuits"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run an experiment config");
  std::string config_path, engine, dump_circuit, out_dir;
  sim->add_option("--config", config_path, "Experiment JSON")->required();
  sim->add_option("--engine", engine, "trajectories | mpdo | dense");
  sim->add_option("--dump-circuit", dump_circuit, "Write the circuit plans as JSON");
  sim->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* fig2 = app.add_subcommand("sweep-fig2", "Two-qubit (theta, phi) grid sweep");
  std::string channel = "ad", fig2_out = "fig2.csv";
  double rate = 0.1;
  int samples = 100000;
  std::uint64_t seed = 1;
  fig2->add_option("--channel", channel, "ad | pf | bf | bpf");
  fig2->add_option("--rate", rate, "Channel rate");
  fig2->add_option("--samples", samples, "Random states");
  fig2->add_option("--seed", seed, "Sampling seed");
  fig2->add_option("--out", fig2_out, "Output CSV");

  auto* conv = app.add_subcommand("converge", "Bond-dimension convergence ladder");
  std::string conv_config, chis, conv_out;
  conv->add_option("--config", conv_config, "Experiment JSON")->required();
  conv->add_option("--chis", chis, "Comma-separated ladder, e.g. 32,64,128");
  conv->add_option("--out", conv_out, "Output directory");

  auto* scal = app.add_subcommand("scaling", "chi_eff / L versus 1 / L over a rate sweep");
  std::string scal_config, rates, scal_out;
  scal->add_option("--config", scal_config, "Experiment JSON")->required();
  scal->add_option("--rates", rates, "Comma-separated rates")->required();
  scal->add_option("--out", scal_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      qtraj::ExperimentConfig cfg = qtraj::load_config(config_path);
      if (!engine.empty()) cfg.engine = qtraj::parse_engine(engine);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      cfg.validate();
      if (!dump_circuit.empty()) {
        nlohmann::json plans = nlohmann::json::array();
        for (const auto& p : qtraj::make_plans(cfg)) plans.push_back(p.to_json());
        qtraj::write_file_atomic(dump_circuit, plans.dump() + "\n");
      }
      print_summary(qtraj::run(cfg));
    } else if (*fig2) {
      const auto pts = qtraj::fig2_sweep(qtraj::parse_channel_kind(channel), rate, samples, seed);
      std::ostringstream out;
      qtraj::write_fig2_csv(pts, out);
      qtraj::write_file_atomic(fig2_out, out.str());
      std::cout << "wrote " << fig2_out << '\n';
    } else if (*conv) {
      qtraj::ExperimentConfig cfg = qtraj::load_config(conv_config);
      if (!chis.empty()) cfg.chi_ladder = parse_list<int>(chis);
      if (!conv_out.empty()) cfg.output_dir = conv_out;
      const auto rep = qtraj::convergence_ladder(cfg);
      for (const auto& c : rep.cutoffs) {
        std::cout << c.strategy << " chi " << c.chi_lo << " vs " << c.chi_hi
                  << ": converged through layer " << c.converged_depth << '\n';
      }
    } else if (*scal) {
      qtraj::ExperimentConfig cfg = qtraj::load_config(scal_config);
      if (!scal_out.empty()) cfg.output_dir = scal_out;
      const auto rep = qtraj::scaling_report(cfg, parse_list<double>(rates));
      for (const auto& [name, pc] : rep.crossover) std::cout << name << " crossover rate " << pc << '\n';
    }
  } catch (const qtraj::TrajectoryFailure& e) {
    std::cerr << "error: " << e.what() << " (replay: seed " << e.seed() << ", trajectory "
              << e.trajectory() << ")\n";
    return 3;
  } catch (const qtraj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
