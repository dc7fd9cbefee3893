// duffing: response maps, line scans and point analyses of the driven,
// damped Kerr oscillator.
//
//   duffing --method both --delta-range=-10:2:241 --epsilon-range=0.05:5:100 --workers 4
//   duffing --scan epsilon=3.2 --delta-range=-10:2:241
//   duffing --point=-5.2,3.2 --analyze spectrum,metastable,mixing-curve
//
// Flags override keys of the --config document. On failure the exit code is
// nonzero and stderr carries {"error": {"code", "message", "task"}}.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "duffing/duffing.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<double, double> parse_point(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw duffing::Error(duffing::ErrorCode::invalid_config, "point must be delta,epsilon");
  try {
    return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
    throw duffing::Error(duffing::ErrorCode::invalid_config, "point must be two numbers: '" + s + "'");
  }
}

int fail(const duffing::Error& e, const std::string& task) {
  std::cerr << duffing::error_json(e, task).dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state spectroscopy of the driven, damped Kerr oscillator"};
  app.set_version_flag("--version", duffing::kVersion);

  std::string config_path, method, delta_range, epsilon_range, scan, analyze, point, out_dir, circuit;
  std::optional<double> gamma, chi;
  std::optional<int> workers, dim;
  app.add_option("--config", config_path, "JSON config document")->check(CLI::ExistingFile);
  app.add_option("--method", method, "numeric | closed-form | series | both");
  app.add_option("--gamma", gamma, "damping rate");
  app.add_option("--chi", chi, "anharmonicity");
  app.add_option("--delta-range", delta_range, "detuning grid min:max:count");
  app.add_option("--epsilon-range", epsilon_range, "drive grid min:max:count");
  app.add_option("--scan", scan, "line scan, epsilon=<value> or delta=<value>");
  app.add_option("--analyze", analyze, "comma list of wigner,entropy,spectrum,metastable,mixing-curve,fano,onset");
  app.add_option("--point", point, "analysis point delta,epsilon");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--dim", dim, "fixed Fock truncation (disables adaptation)");
  app.add_option("--circuit", circuit, "circuit parameter JSON (SI units)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(duffing::Error(duffing::ErrorCode::invalid_config, e.what()), "config");
  }

  duffing::SweepConfig cfg;
  try {
    if (!config_path.empty()) cfg = duffing::load_config(config_path);
    if (!method.empty()) cfg.method = duffing::parse_method(method);
    if (gamma) cfg.gamma = *gamma;
    if (chi) cfg.chi = *chi;
    if (!delta_range.empty()) cfg.delta = duffing::parse_range(delta_range, "delta range");
    if (!epsilon_range.empty()) cfg.epsilon = duffing::parse_range(epsilon_range, "epsilon range");
    if (!scan.empty()) cfg.scan = duffing::parse_scan(scan);
    if (!analyze.empty()) cfg.analyze = split(analyze, ',');
    if (!point.empty()) cfg.point = parse_point(point);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers) cfg.workers = *workers;
    if (dim) cfg.dim = *dim;
    if (!circuit.empty()) cfg.circuit = duffing::load_circuit(circuit);
  } catch (const duffing::Error& e) {
    return fail(e, "config");
  }

  try {
    const auto summary = duffing::run(cfg);
    std::cout << "wrote " << summary.files.size() << " files to " << cfg.out_dir << "\n";
  } catch (const duffing::RunError& e) {
    return fail(e, e.task);
  } catch (const duffing::Error& e) {
    return fail(e, "run");
  } catch (const std::exception& e) {
    return fail(duffing::Error(duffing::ErrorCode::io_failure, e.what()), "run");
  }
  return 0;
}
