#pragma once

// Parameter sweeps, line scans and point analyses, with deterministic CSV and
// JSON artifacts. Used by the duffing command-line tool.

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "duffing/circuit.hpp"
#include "duffing/closed_form.hpp"
#include "duffing/lindblad.hpp"
#include "duffing/parallel.hpp"
#include "duffing/perturbation.hpp"
#include "duffing/phase_space.hpp"
#include "duffing/semiclassical.hpp"

namespace duffing {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::json;

enum class Method { numeric, closed_form, series, both };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::numeric: return "numeric";
    case Method::closed_form: return "closed-form";
    case Method::series: return "series";
    case Method::both: return "both";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "numeric") return Method::numeric;
  if (s == "closed-form") return Method::closed_form;
  if (s == "series") return Method::series;
  if (s == "both") return Method::both;
  throw Error(ErrorCode::invalid_config, "unknown method '" + s + "' (numeric|closed-form|series|both)");
}

struct Range {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  double at(int i) const { return count == 1 ? min : min + (max - min) * i / (count - 1); }
  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(at(i));
    return v;
  }
  bool contains(double x) const { return x >= std::min(min, max) && x <= std::max(min, max); }
  void validate(const std::string& name) const {
    if (!std::isfinite(min) || !std::isfinite(max) || count < 1 || (count > 1 && !(max > min))) {
      throw Error(ErrorCode::invalid_config, name + " must be min:max:count with max > min and count >= 1");
    }
  }
};

/// "min:max:count"
inline Range parse_range(const std::string& s, const std::string& name) {
  Range r;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &r.min, &r.max, &r.count, &tail) != 3) {
    throw Error(ErrorCode::invalid_config, name + " must look like min:max:count, got '" + s + "'");
  }
  r.validate(name);
  return r;
}

struct ScanSpec {
  std::string axis;  // "epsilon" fixes epsilon and scans delta; "delta" the reverse
  double value = 0.0;
};

/// "epsilon=3.2" or "delta=-6"
inline ScanSpec parse_scan(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::invalid_config, "scan must look like epsilon=<value> or delta=<value>");
  ScanSpec sc;
  sc.axis = s.substr(0, eq);
  if (sc.axis != "epsilon" && sc.axis != "delta") throw Error(ErrorCode::invalid_config, "scan axis must be epsilon or delta");
  try {
    std::size_t used = 0;
    sc.value = std::stod(s.substr(eq + 1), &used);
    if (used != s.size() - eq - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_config, "scan value is not a number: '" + s + "'");
  }
  return sc;
}

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> t = {"wigner", "entropy", "spectrum", "metastable", "mixing-curve", "fano", "onset"};
  return t;
}

struct SweepConfig {
  double gamma = 2.0;
  double chi = 1.0;
  Range delta{-10.0, 2.0, 241};
  Range epsilon{0.05, 5.0, 100};
  Method method = Method::closed_form;
  int workers = 1;
  int dim = 0;  // 0: adaptive truncation
  std::string out_dir = "out";
  std::optional<ScanSpec> scan;
  std::vector<std::string> analyze;
  std::optional<std::pair<double, double>> point;  // (delta, epsilon)
  std::optional<CircuitParams> circuit;
  GridSpec wigner_grid{};
  int spectrum_count = 6;
  std::vector<int> onset_lines{1, 2};
  std::vector<double> onset_gammas{0.003, 0.01, 0.03};
  double fano_center = -1.0;
  double fano_half_width = 0.05;
  int fano_samples = 501;

  ModelParams params(double d, double e) const { return ModelParams{d, chi, e, gamma}; }

  void validate() const {
    if (!std::isfinite(gamma) || !(gamma > 0.0)) throw Error(ErrorCode::invalid_config, "gamma must be > 0");
    if (!std::isfinite(chi) || !(chi > 0.0)) throw Error(ErrorCode::invalid_config, "chi must be > 0");
    delta.validate("delta range");
    epsilon.validate("epsilon range");
    if (std::min(epsilon.min, epsilon.max) < 0.0) throw Error(ErrorCode::invalid_config, "epsilon must be >= 0");
    if (workers < 1) throw Error(ErrorCode::invalid_config, "workers must be >= 1");
    if (dim != 0 && dim < 2) throw Error(ErrorCode::invalid_config, "dim must be >= 2 (or 0 for adaptive)");
    if (spectrum_count < 2) throw Error(ErrorCode::invalid_config, "spectrum_count must be >= 2");
    for (const auto& t : analyze) {
      if (std::find(known_tasks().begin(), known_tasks().end(), t) == known_tasks().end()) {
        throw Error(ErrorCode::invalid_config, "unknown analysis task '" + t + "'");
      }
    }
    if (!analyze.empty() && !point) {
      const bool needs_point = std::any_of(analyze.begin(), analyze.end(), [](const std::string& t) {
        return t != "onset" && t != "fano";
      });
      if (needs_point) throw Error(ErrorCode::invalid_config, "analysis tasks need a point (delta, epsilon)");
    }
    if (point && (!std::isfinite(point->first) || !std::isfinite(point->second) || point->second < 0.0)) {
      throw Error(ErrorCode::invalid_config, "point must be finite with epsilon >= 0");
    }
    if (fano_samples < 50 || !(fano_half_width > 0.0)) throw Error(ErrorCode::invalid_config, "fano window needs >= 50 samples");
    for (int n : onset_lines) {
      if (n < 1) throw Error(ErrorCode::invalid_config, "onset lines must be >= 1");
    }
    for (double g : onset_gammas) {
      if (!(g > 0.0)) throw Error(ErrorCode::invalid_config, "onset gammas must be > 0");
    }
    wigner_grid.validate();
  }
};

namespace detail {

inline Range range_from_json(const json& j, const std::string& name) {
  if (j.is_string()) return parse_range(j.get<std::string>(), name);
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, name + " must be a string or object");
  Range r;
  r.min = j.at("min").get<double>();
  r.max = j.at("max").get<double>();
  r.count = j.at("count").get<int>();
  r.validate(name);
  return r;
}

}  // namespace detail

/// Reads a config document. Unknown keys are rejected.
inline SweepConfig config_from_json(const json& j, const std::string& base_dir = ".") {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "config must be a JSON object");
  static const std::vector<std::string> keys = {
      "gamma", "chi", "delta_range", "epsilon_range", "method", "workers", "dim", "out_dir", "scan", "analyze",
      "point", "circuit", "wigner", "spectrum_count", "onset", "fano"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw Error(ErrorCode::invalid_config, "unknown config key '" + it.key() + "'");
    }
  }
  SweepConfig c;
  try {
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("chi")) c.chi = j["chi"].get<double>();
    if (j.contains("delta_range")) c.delta = detail::range_from_json(j["delta_range"], "delta range");
    if (j.contains("epsilon_range")) c.epsilon = detail::range_from_json(j["epsilon_range"], "epsilon range");
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("dim")) c.dim = j["dim"].get<int>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("scan")) {
      const auto& sj = j["scan"];
      if (sj.is_object()) {
        c.scan = parse_scan(sj.at("axis").get<std::string>() + "=0");
        c.scan->value = sj.at("value").get<double>();
      } else {
        c.scan = parse_scan(sj.get<std::string>());
      }
    }
    if (j.contains("analyze")) c.analyze = j["analyze"].get<std::vector<std::string>>();
    if (j.contains("point")) c.point = std::make_pair(j["point"].at("delta").get<double>(), j["point"].at("epsilon").get<double>());
    if (j.contains("circuit")) {
      const auto& cj = j["circuit"];
      if (cj.is_string()) {
        std::filesystem::path p(cj.get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        c.circuit = load_circuit(p.string());
      } else {
        c.circuit = circuit_from_json(cj);
      }
    }
    if (j.contains("wigner")) {
      const auto& w = j["wigner"];
      c.wigner_grid.re_min = w.value("re_min", c.wigner_grid.re_min);
      c.wigner_grid.re_max = w.value("re_max", c.wigner_grid.re_max);
      c.wigner_grid.im_min = w.value("im_min", c.wigner_grid.im_min);
      c.wigner_grid.im_max = w.value("im_max", c.wigner_grid.im_max);
      c.wigner_grid.nx = w.value("nx", c.wigner_grid.nx);
      c.wigner_grid.ny = w.value("ny", c.wigner_grid.ny);
    }
    if (j.contains("spectrum_count")) c.spectrum_count = j["spectrum_count"].get<int>();
    if (j.contains("onset")) {
      const auto& o = j["onset"];
      if (o.contains("lines")) c.onset_lines = o["lines"].get<std::vector<int>>();
      if (o.contains("gammas")) c.onset_gammas = o["gammas"].get<std::vector<double>>();
    }
    if (j.contains("fano")) {
      const auto& f = j["fano"];
      c.fano_center = f.value("center", c.fano_center);
      c.fano_half_width = f.value("half_width", c.fano_half_width);
      c.fano_samples = f.value("samples", c.fano_samples);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("bad config value: ") + e.what());
  }
  return c;
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path().string());
}

inline json config_to_json(const SweepConfig& c) {
  json j;
  j["gamma"] = c.gamma;
  j["chi"] = c.chi;
  j["delta_range"] = {{"min", c.delta.min}, {"max", c.delta.max}, {"count", c.delta.count}};
  j["epsilon_range"] = {{"min", c.epsilon.min}, {"max", c.epsilon.max}, {"count", c.epsilon.count}};
  j["method"] = to_string(c.method);
  j["dim"] = c.dim;
  if (c.scan) j["scan"] = {{"axis", c.scan->axis}, {"value", c.scan->value}};
  if (!c.analyze.empty()) j["analyze"] = c.analyze;
  if (c.point) j["point"] = {{"delta", c.point->first}, {"epsilon", c.point->second}};
  return j;
}

// ---------------------------------------------------------------------------
// Cells

struct CellResult {
  double delta = 0.0;
  double epsilon = 0.0;
  complex value{NAN, NAN};               // primary: numeric for both/numeric, else the chosen route
  std::optional<complex> alternate;      // closed form when method = both
  double discrepancy = NAN;              // |numeric - closed form| when method = both
  int dim = 0;                           // truncation used by the numeric route
  double residual = NAN;                 // see evaluate_cell
  int precision_digits = 0;              // hypergeometric working precision
  std::string status = "ok";
};

/// residual: max|S[rho0]| for the numeric route; 1e-16 x cancellation for the
/// closed form; |cubic|^2 / |linear| (size of the next order) for the series.
inline CellResult evaluate_cell(const SweepConfig& cfg, double delta, double eps) {
  CellResult r;
  r.delta = delta;
  r.epsilon = eps;
  const ModelParams p = cfg.params(delta, eps);
  try {
    std::optional<complex> closed;
    if (cfg.method == Method::closed_form || cfg.method == Method::both) {
      const ResponseReport rep = dw_response_report(p);
      closed = rep.value;
      r.precision_digits = std::max(rep.numerator.precision_digits, rep.denominator.precision_digits);
      r.residual = 1e-16 * std::max(rep.numerator.cancellation, rep.denominator.cancellation);
      r.value = rep.value;
    }
    if (cfg.method == Method::numeric || cfg.method == Method::both) {
      const auto ss = converged_steady_state(p, cfg.dim);
      r.dim = ss.dim;
      r.residual = ss.residual;
      r.value = expectation(annihilation(ss.dim), ss.rho);
    }
    if (cfg.method == Method::both) {
      r.alternate = closed;
      r.discrepancy = std::abs(r.value - *closed);
    }
    if (cfg.method == Method::series) {
      r.value = response_series(p);
      const complex lin = -2.0 * eps / complex(2.0 * delta, -cfg.gamma);
      const complex cubic = r.value - lin;
      r.residual = std::abs(lin) > 0.0 ? std::norm(cubic) / std::abs(lin) : 0.0;
    }
  } catch (const Error& e) {
    r.status = std::string(to_string(e.code()));
    r.value = complex(NAN, NAN);
  }
  return r;
}

struct SweepResult {
  std::vector<double> delta;
  std::vector<double> epsilon;
  std::vector<CellResult> cells;  // epsilon-major: index = ie * delta.size() + id
  Method method = Method::closed_form;

  const CellResult& at(int id, int ie) const { return cells[static_cast<std::size_t>(ie) * delta.size() + id]; }
};

inline SweepResult sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult s;
  s.method = cfg.method;
  s.delta = cfg.delta.values();
  s.epsilon = cfg.epsilon.values();
  const std::size_t nd = s.delta.size();
  s.cells.resize(nd * s.epsilon.size());
  parallel_for(s.cells.size(), cfg.workers, [&](std::size_t k) {
    s.cells[k] = evaluate_cell(cfg, s.delta[k % nd], s.epsilon[k / nd]);
  });
  return s;
}

/// One-dimensional cut at fixed epsilon (over the delta range) or fixed
/// delta (over the epsilon range).
inline std::vector<CellResult> line_scan(const SweepConfig& cfg, const ScanSpec& scan) {
  cfg.validate();
  const bool fix_eps = scan.axis == "epsilon";
  const Range& fixed_range = fix_eps ? cfg.epsilon : cfg.delta;
  if (!fixed_range.contains(scan.value)) {
    throw Error(ErrorCode::invalid_argument, "scan value lies outside the configured " + scan.axis + " range");
  }
  const std::vector<double> axis = fix_eps ? cfg.delta.values() : cfg.epsilon.values();
  std::vector<CellResult> out(axis.size());
  parallel_for(axis.size(), cfg.workers, [&](std::size_t k) {
    out[k] = fix_eps ? evaluate_cell(cfg, axis[k], scan.value) : evaluate_cell(cfg, scan.value, axis[k]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot create output directory " + dir_);
  }

  void write(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

inline std::string cells_csv(const std::vector<CellResult>& cells) {
  std::ostringstream o;
  o << "delta,epsilon,re_a,im_a,abs_a,re_alt,im_alt,discrepancy,dim,residual,precision_digits,status\n";
  for (const auto& c : cells) {
    o << fmt(c.delta) << ',' << fmt(c.epsilon) << ',' << fmt(c.value.real()) << ',' << fmt(c.value.imag()) << ','
      << fmt(std::abs(c.value)) << ',';
    if (c.alternate) {
      o << fmt(c.alternate->real()) << ',' << fmt(c.alternate->imag()) << ',' << fmt(c.discrepancy);
    } else {
      o << ",,";
    }
    o << ',' << c.dim << ',' << fmt(c.residual) << ',' << c.precision_digits << ',' << c.status << '\n';
  }
  return o.str();
}

inline std::string bifurcation_csv(const BifurcationCurves& b) {
  std::ostringstream o;
  o << "delta,eps_lower,eps_upper\n";
  for (std::size_t k = 0; k < b.delta.size(); ++k) {
    o << fmt(b.delta[k]) << ',' << fmt(b.eps_lower[k]) << ',' << fmt(b.eps_upper[k]) << '\n';
  }
  return o.str();
}

inline std::string wigner_csv(const WignerGrid& g) {
  std::ostringstream o;
  o << "re_alpha,im_alpha,w\n";
  for (int i = 0; i < g.spec.nx; ++i)
    for (int j = 0; j < g.spec.ny; ++j) o << fmt(g.spec.x(i)) << ',' << fmt(g.spec.y(j)) << ',' << fmt(g.values(i, j)) << '\n';
  return o.str();
}

inline json wigner_header(const WignerGrid& g, const ModelParams& p, int dim, const std::string& state) {
  return {{"state", state},
          {"re_range", {g.spec.re_min, g.spec.re_max}},
          {"im_range", {g.spec.im_min, g.spec.im_max}},
          {"nx", g.spec.nx},
          {"ny", g.spec.ny},
          {"dim", dim},
          {"params", {{"delta", p.delta}, {"chi", p.chi}, {"epsilon", p.epsilon}, {"gamma", p.gamma}}},
          {"integral", g.integral()},
          {"edge_max", g.edge_max},
          {"truncation_warning", g.truncation_warning}};
}

inline json complex_json(complex z) { return {z.real(), z.imag()}; }

struct RunError : Error {
  std::string task;
  RunError(const Error& e, std::string t) : Error(e.code(), e.what()), task(std::move(t)) {}
};

struct RunSummary {
  json manifest;
  std::vector<std::string> files;
};

inline json sweep_summary(const std::vector<CellResult>& cells) {
  int failures = 0, escalated = 0, dmin = 0, dmax = 0;
  double max_disc = 0.0, max_res = 0.0;
  bool any_disc = false;
  for (const auto& c : cells) {
    if (c.status != "ok") {
      ++failures;
      continue;
    }
    if (c.precision_digits > 16) ++escalated;
    if (c.dim > 0) {
      dmin = dmin == 0 ? c.dim : std::min(dmin, c.dim);
      dmax = std::max(dmax, c.dim);
    }
    if (c.alternate) {
      any_disc = true;
      max_disc = std::max(max_disc, c.discrepancy);
    }
    if (std::isfinite(c.residual)) max_res = std::max(max_res, c.residual);
  }
  json j = {{"cells", cells.size()}, {"failures", failures}, {"max_residual", max_res}, {"precision_escalations", escalated}};
  if (dmax > 0) j["dim_range"] = {dmin, dmax};
  if (any_disc) j["max_discrepancy"] = max_disc;
  return j;
}

// ---------------------------------------------------------------------------
// Point analyses

inline json analyze(const SweepConfig& cfg, ArtifactWriter& out) {
  json results = json::object();
  auto has = [&](const std::string& t) { return std::find(cfg.analyze.begin(), cfg.analyze.end(), t) != cfg.analyze.end(); };
  const bool want_state = has("wigner") || has("entropy") || has("spectrum") || has("metastable") || has("mixing-curve");
  std::string task;
  try {
    if (want_state) {
      task = "entropy";
      const ModelParams p = cfg.params(cfg.point->first, cfg.point->second);
      const auto ss = converged_steady_state(p, cfg.dim);
      const int d = ss.dim;
      if (has("entropy")) {
        const json e = {{"entropy_bits", von_neumann_entropy(ss.rho)},
                        {"purity", purity(ss.rho.matrix())},
                        {"photon_number", expectation(number_operator(d), ss.rho).real()},
                        {"a", complex_json(expectation(annihilation(d), ss.rho))},
                        {"dim", d},
                        {"top_population", ss.top_population},
                        {"residual", ss.residual}};
        out.write_json("entropy.json", e);
        results["entropy"] = e;
      }
      if (has("wigner")) {
        task = "wigner";
        const WignerGrid g = wigner(ss.rho, cfg.wigner_grid);
        out.write("wigner_rho0.csv", wigner_csv(g));
        out.write_json("wigner_rho0.json", wigner_header(g, p, d, "rho0"));
        const auto peaks = local_maxima(g, 1e-3);
        json pk = json::array();
        for (const auto& q : peaks) pk.push_back({{"re", q.re}, {"im", q.im}, {"value", q.value}, {"phase", q.phase()}});
        results["wigner"] = {{"integral", g.integral()}, {"truncation_warning", g.truncation_warning}, {"local_maxima", pk}};
      }
      std::optional<SpectrumSlice> spec;
      if (has("spectrum") || has("metastable") || has("mixing-curve")) {
        task = "spectrum";
        const Superoperator s = build_superoperator(p, d);
        spec = low_lying_spectrum(s, std::min(cfg.spectrum_count, d * d));
        if (has("spectrum")) {
          std::ostringstream o;
          o << "index,re_lambda,im_lambda,abs_lambda\n";
          json ev = json::array();
          for (std::size_t k = 0; k < spec->eigenvalues.size(); ++k) {
            const complex l = spec->eigenvalues[k];
            o << k << ',' << fmt(l.real()) << ',' << fmt(l.imag()) << ',' << fmt(std::abs(l)) << '\n';
            ev.push_back(complex_json(l));
          }
          out.write("spectrum.csv", o.str());
          results["spectrum"] = {{"eigenvalues", ev}, {"dim", d}};
        }
      }
      if (has("metastable") || has("mixing-curve")) {
        task = has("metastable") ? "metastable" : "mixing-curve";
        const complex l1 = spec->eigenvalues[1];
        if (!is_real_eigenvalue(l1)) {
          throw Error(ErrorCode::degenerate_request, "slowest decay mode is oscillatory; no metastable pair");
        }
        const MetastablePair pair = metastable_extremes(ss.rho, spec->right_eigenmatrices[1]);
        const Matrix num = number_operator(d);
        const json m = {{"lambda1", l1.real()},
                        {"beta_minus", pair.beta_minus},
                        {"beta_plus", pair.beta_plus},
                        {"steady_state_fraction", pair.steady_state_fraction()},
                        {"entropy_rho0", von_neumann_entropy(ss.rho)},
                        {"entropy_minus", von_neumann_entropy(pair.rho_minus)},
                        {"entropy_plus", von_neumann_entropy(pair.rho_plus)},
                        {"photons_minus", expectation(num, pair.rho_minus).real()},
                        {"photons_plus", expectation(num, pair.rho_plus).real()},
                        {"a_minus", complex_json(expectation(annihilation(d), pair.rho_minus))},
                        {"a_plus", complex_json(expectation(annihilation(d), pair.rho_plus))}};
        if (has("metastable")) {
          out.write_json("metastable.json", m);
          results["metastable"] = m;
          if (has("wigner")) {
            task = "wigner";
            const WignerGrid gp = wigner(pair.rho_plus, cfg.wigner_grid);
            const WignerGrid gm = wigner(pair.rho_minus, cfg.wigner_grid);
            out.write("wigner_rho_plus.csv", wigner_csv(gp));
            out.write_json("wigner_rho_plus.json", wigner_header(gp, p, d, "rho_plus"));
            out.write("wigner_rho_minus.csv", wigner_csv(gm));
            out.write_json("wigner_rho_minus.json", wigner_header(gm, p, d, "rho_minus"));
          }
        }
        if (has("mixing-curve")) {
          task = "mixing-curve";
          const MixingCurve mc = mixing_curve(pair);
          std::ostringstream o;
          o << "x,entropy,linear,excess,binary\n";
          for (const auto& pt : mc.points) {
            o << fmt(pt.x) << ',' << fmt(pt.entropy) << ',' << fmt(pt.linear) << ',' << fmt(pt.excess) << ','
              << fmt(pt.binary) << '\n';
          }
          out.write("mixing_curve.csv", o.str());
          results["mixing-curve"] = {{"max_excess", mc.max_excess},
                                     {"x_at_max", mc.x_at_max},
                                     {"steady_state_x", mc.steady_state_x},
                                     {"shape_scale", mc.shape_scale},
                                     {"shape_deviation", mc.shape_deviation},
                                     {"commutator_norm", mc.commutator_norm}};
        }
      }
    }
    if (has("fano")) {
      task = "fano";
      const double eps = cfg.point ? cfg.point->second : 0.012;
      const ModelParams p = cfg.params(cfg.fano_center, eps);
      const ResponseLine line =
          closed_form_line(p, cfg.fano_center - cfg.fano_half_width, cfg.fano_center + cfg.fano_half_width, cfg.fano_samples);
      std::ostringstream o;
      o << "delta,abs_a\n";
      const auto mag = line.magnitude();
      for (std::size_t k = 0; k < mag.size(); ++k) o << fmt(line.delta[k]) << ',' << fmt(mag[k]) << '\n';
      out.write("fano_line.csv", o.str());
      const FanoFit f = fano_fit(line.delta, mag);
      const json fj = {{"q_fano", f.q_fano},
                       {"q_formula", fano_q(p)},
                       {"amplitude", f.amplitude},
                       {"center", f.center},
                       {"width", f.width},
                       {"background", f.background},
                       {"slope", f.slope},
                       {"reference", f.reference},
                       {"rms", f.rms},
                       {"line_amplitude", f.line_amplitude},
                       {"trough_delta", f.trough_delta},
                       {"trough_high_side", f.trough_high_side},
                       {"epsilon", eps}};
      out.write_json("fano.json", fj);
      results["fano"] = fj;
    }
    if (has("onset")) {
      task = "onset";
      OnsetOptions opt;
      opt.workers = cfg.workers;
      std::ostringstream o;
      o << "n,gamma,eps_onset\n";
      json oj = json::array();
      for (int n : cfg.onset_lines) {
        const OnsetResult r = onset_scan(n, cfg.onset_gammas, ModelParams{0.0, cfg.chi, 0.0, 1.0}, opt);
        for (const auto& pt : r.points) o << n << ',' << fmt(pt.gamma) << ',' << fmt(pt.eps_onset) << '\n';
        json e = {{"n", n}, {"prefactor", r.prefactor}};
        e["slope"] = r.slope ? json(*r.slope) : json(nullptr);
        oj.push_back(e);
      }
      out.write("onset.csv", o.str());
      results["onset"] = oj;
    }
  } catch (const Error& e) {
    throw RunError(e, task);
  }
  return results;
}

inline json circuit_report(const SweepConfig& cfg) {
  const CircuitModel m = to_model(*cfg.circuit);
  json j = {{"omega0", m.omega0},
            {"c_total", m.c_total},
            {"r_eq", std::isfinite(m.r_eq) ? json(m.r_eq) : json(nullptr)},
            {"r_total", m.r_total},
            {"coupling", m.coupling},
            {"delta", m.params.delta},
            {"chi", m.params.chi},
            {"epsilon", m.params.epsilon},
            {"gamma", m.params.gamma},
            {"warnings", m.warnings}};
  try {
    const complex a = dw_response(m.params);
    const V2Signal v = v2_signal(a, *cfg.circuit);
    j["a"] = complex_json(a);
    j["v2"] = {{"cos_amplitude", v.cos_amplitude}, {"sin_amplitude", v.sin_amplitude}, {"prefactor", v.prefactor}};
  } catch (const Error& e) {
    j["v2_error"] = std::string(to_string(e.code()));
  }
  return j;
}

/// Runs whatever the config asks for: point analyses when `analyze` is set,
/// otherwise a line scan when `scan` is set, otherwise the full sweep.
/// manifest.json is a pure function of the config; wall time goes to timing.json.
inline RunSummary run(const SweepConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw RunError(e, "config");
  }
  ArtifactWriter out(cfg.out_dir);
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);

  if (cfg.circuit) {
    json cj;
    try {
      cj = circuit_report(cfg);
    } catch (const Error& e) {
      throw RunError(e, "circuit");
    }
    out.write_json("circuit.json", cj);
    manifest["circuit"] = cj;
  }

  if (!cfg.analyze.empty()) {
    manifest["mode"] = "analyze";
    manifest["results"] = analyze(cfg, out);
  } else if (cfg.scan) {
    manifest["mode"] = "scan";
    std::vector<CellResult> cells;
    try {
      cells = line_scan(cfg, *cfg.scan);
    } catch (const Error& e) {
      throw RunError(e, "scan");
    }
    out.write("scan.csv", cells_csv(cells));
    manifest["summary"] = sweep_summary(cells);
  } else {
    manifest["mode"] = "sweep";
    SweepResult s;
    try {
      s = sweep(cfg);
    } catch (const Error& e) {
      throw RunError(e, "sweep");
    }
    out.write("sweep.csv", cells_csv(s.cells));
    out.write("bifurcation.csv", bifurcation_csv(bifurcation_boundary(cfg.chi, cfg.gamma, cfg.delta.min,
                                                                      std::max(cfg.delta.max, cfg.delta.min + 1e-12),
                                                                      std::max(cfg.delta.count, 2))));
    manifest["summary"] = sweep_summary(s.cells);
  }
  manifest["files"] = out.files();
  out.write_json("manifest.json", manifest);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.write_json("timing.json", {{"wall_seconds", wall}, {"workers", cfg.workers}});
  return {manifest, out.files()};
}

inline json error_json(const Error& e, const std::string& task) {
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"task", task}}}};
}

}  // namespace duffing
