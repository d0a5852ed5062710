// Parameter sweeps over N or eta, CSV emission, external comparison data
// and gnuplot script generation.
#pragma once

#include "interf/estimation.hpp"
#include "interf/roundtrip.hpp"
#include "interf/states.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace interf {

enum class StateFamily { optimal, mm, no, noon };
enum class SweepAxis { n, eta };

inline std::string to_string(StateFamily f) {
  switch (f) {
    case StateFamily::optimal: return "optimal";
    case StateFamily::mm: return "mm";
    case StateFamily::no: return "no";
    case StateFamily::noon: return "noon";
  }
  return "?";
}

inline std::string to_string(SweepAxis a) { return a == SweepAxis::n ? "n" : "eta"; }

/// Bad sweep configuration; maps to a usage error.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Closed form disagreed with the oracle during a validated sweep.
struct ValidationFailure : std::runtime_error {
  ValidationReport report;
  ValidationFailure(const std::string& what, ValidationReport rep) : std::runtime_error(what), report(std::move(rep)) {}
};

/// Unreadable or malformed input file.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  StateFamily family = StateFamily::optimal;
  SweepAxis axis = SweepAxis::n;
  double fixed_eta = 0.9;
  double fixed_n = 20.0;
  std::optional<double> n_min;  // family-dependent default, see resolved_n_min()
  double n_max = 30.0;
  double n_step = 1.0;
  double eta_min = 0.5;
  double eta_max = 1.0;
  double eta_step = 0.05;
  int m_prime = 3;
  int phi_grid_points = 720;
  int rounds = 1;
  bool validate = false;
  std::optional<std::string> external_comparison_file;
  std::string output_path = "sweep.csv";
  int threads = 0;  // 0 = hardware concurrency

  /// mm needs M = 2N - M' > M', i.e. N > M'.
  double resolved_n_min() const {
    if (n_min) return *n_min;
    return family == StateFamily::mm ? m_prime + 1.0 : 2.0;
  }
};

/// Inclusive range lo, lo+step, ..., <= hi (values computed as lo + k*step).
inline std::vector<double> inclusive_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("range step must be > 0");
  if (hi < lo) throw ConfigError("empty range: max < min");
  std::vector<double> v;
  const double slack = 1e-9 * step;
  for (long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    if (x > hi + slack) break;
    v.push_back(x);
  }
  return v;
}

inline std::vector<double> sweep_values(const SweepConfig& cfg) {
  return cfg.axis == SweepAxis::n ? inclusive_range(cfg.resolved_n_min(), cfg.n_max, cfg.n_step)
                                  : inclusive_range(cfg.eta_min, cfg.eta_max, cfg.eta_step);
}

/// Parameters of one sweep row.
struct RowParams {
  double n = 0.0;
  double eta = 1.0;
  int m = 0;        // largest Fock index of the input state (0 for noon)
  int m_prime = 0;  // mm / no only
};

inline int as_integer(double x, const char* what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9) throw ConfigError(std::string(what) + " must be an integer, got " + std::to_string(x));
  return static_cast<int>(r);
}

inline RowParams row_params(const SweepConfig& cfg, double sweep_value) {
  RowParams p;
  p.n = cfg.axis == SweepAxis::n ? sweep_value : cfg.fixed_n;
  p.eta = cfg.axis == SweepAxis::eta ? sweep_value : cfg.fixed_eta;
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  if (!(p.n >= 1.0)) throw ConfigError("N must be >= 1");
  switch (cfg.family) {
    case StateFamily::optimal:
      p.m = as_integer(2.0 * p.n, "M = 2N");
      break;
    case StateFamily::no:
      p.m = as_integer(2.0 * p.n, "M = 2N");
      p.m_prime = 0;
      break;
    case StateFamily::mm:
      if (cfg.m_prime < 0) throw ConfigError("M' must be >= 0");
      p.m_prime = cfg.m_prime;
      p.m = as_integer(2.0 * p.n - cfg.m_prime, "M = 2N - M'");
      if (p.m <= p.m_prime) throw ConfigError("M&M family needs M = 2N - M' > M' (N > M')");
      break;
    case StateFamily::noon:
      break;
  }
  return p;
}

inline void check_config(const SweepConfig& cfg) {
  if (cfg.phi_grid_points < 3) throw ConfigError("phi grid needs at least 3 points");
  if (cfg.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (cfg.output_path.empty()) throw ConfigError("output path is empty");
  for (double v : sweep_values(cfg)) row_params(cfg, v);
}

struct CurvePoint {
  double sweep_value = 0.0;
  std::optional<double> min_rms;
  std::optional<double> argmin_phi;
  std::optional<double> avg_rms;
  std::optional<double> holevo;
  std::optional<double> mm_error;
  double shot_noise = 0.0;
  double heisenberg = 0.0;
  double noon_baseline = 0.0;
  std::optional<double> external;
};

struct RowResult {
  CurvePoint point;
  std::optional<double> rms_about_mean;  // diagnostic, optimal family
  std::optional<double> oracle_deviation;
  std::optional<double> route_deviation;  // mm: matrix vs closed error-propagation
};

inline RowResult compute_row(const SweepConfig& cfg, double sweep_value) {
  const RowParams p = row_params(cfg, sweep_value);
  RowResult r;
  r.point.sweep_value = sweep_value;
  const auto b = baselines(p.n, p.eta);
  r.point.shot_noise = b.shot_noise;
  r.point.heisenberg = b.heisenberg;
  r.point.noon_baseline = b.noon_error;
  if (!(b.heisenberg <= b.shot_noise)) throw std::logic_error("Heisenberg line above shot noise");

  const int grid = cfg.phi_grid_points;
  const RoundTripConfig rt{0.0, 0.0, p.eta, p.eta, p.m, cfg.rounds};

  if (cfg.family == StateFamily::optimal) {
    const PhaseFamily fam =
        cfg.rounds == 1 ? PhaseFamily(closed_form_rho(p.m, p.eta, 0.0), 1)
                        : PhaseFamily::from_oracle(optimal_phase_state(p.m), rt);
    const PovmResponse povm(fam, p.m);
    auto rms = [&](double phi) { return circular_rms(povm.at(phi)); };
    const auto best = minimize_over_phase(rms, kTwoPi, grid);
    r.point.min_rms = best.value;
    r.point.argmin_phi = best.phi;
    r.point.avg_rms = average_over_phase(rms, kTwoPi, grid).mean;
    r.point.holevo = holevo_variance(fam.at_zero());
    r.rms_about_mean = circular_rms_about_mean(povm.at(best.phi));
    if (cfg.validate && cfg.rounds == 1) {
      RoundTripConfig at = rt;
      at.phi = best.phi;
      at.theta = 0.7;
      r.oracle_deviation =
          max_abs_difference(closed_form_rho(p.m, p.eta, best.phi), roundtrip_oracle(optimal_phase_state(p.m), at));
    }
  } else if (cfg.family == StateFamily::mm || cfg.family == StateFamily::no) {
    const MmStateSpec spec(p.m, p.m_prime);
    const double period = kTwoPi / spec.delta();
    PhaseOptimum best;
    if (cfg.rounds == 1) {
      const auto in = mm_error_inputs(spec, p.eta);
      best = minimize_over_phase([&](double phi) { return mm_error_closed(in, phi); }, period, grid);
      if (cfg.validate) {
        RoundTripConfig at = rt;
        at.phi = best.phi;
        at.theta = 0.7;
        const DensityMatrix sigma = closed_form_sigma(spec, p.eta, best.phi);
        r.oracle_deviation = max_abs_difference(sigma, roundtrip_oracle(mm_state(spec), at));
        const double matrix_route = mm_error(sigma, spec);
        r.route_deviation = std::abs(matrix_route - best.value) / best.value;
      }
    } else {
      const PhaseFamily fam = PhaseFamily::from_oracle(mm_state(spec), rt);
      best = minimize_over_phase([&](double phi) { return mm_error(fam.at(phi), spec, fam.phase_weight()); }, period,
                                 grid);
    }
    r.point.mm_error = best.value;
    r.point.argmin_phi = best.phi;
  }
  return r;
}

/// INTERF_THREADS caps the worker count; 0 or unset means automatic.
inline int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("INTERF_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(1, jobs)));
}

struct SweepResult {
  std::vector<RowResult> rows;  // ascending sweep value
  std::optional<ValidationReport> validation;
  int max_m = 0;
};

inline ValidationReport prevalidate(const SweepConfig& cfg, const std::vector<double>& values) {
  int max_m = 1;
  std::set<double> etas;
  for (double v : values) {
    const auto p = row_params(cfg, v);
    max_m = std::max(max_m, p.m);
    etas.insert(p.eta);
  }
  etas.insert(1.0);
  return validate_closed_forms(std::min(max_m, 8), {etas.begin(), etas.end()}, {0.0, 0.3, 1.2});
}

/// Rows are independent; they run on a worker pool and are stored by index.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  check_config(cfg);
  const auto values = sweep_values(cfg);
  SweepResult res;
  if (cfg.validate && cfg.family != StateFamily::noon) {
    res.validation = prevalidate(cfg, values);
    if (!res.validation->passed()) throw ValidationFailure("closed forms disagree with the oracle", *res.validation);
  }

  res.rows.resize(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        res.rows[i] = compute_row(cfg, values[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nw = worker_count(cfg.threads, values.size());
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < nw; ++k) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < values.size(); ++i) {
    res.max_m = std::max(res.max_m, row_params(cfg, values[i]).m);
    const auto& row = res.rows[i];
    if (cfg.validate && row.oracle_deviation && *row.oracle_deviation >= 1e-10) {
      ValidationReport rep = res.validation.value_or(ValidationReport{});
      ValidationCell c;
      c.form = cfg.family == StateFamily::optimal ? "rho" : "sigma";
      const auto p = row_params(cfg, values[i]);
      c.m = p.m;
      c.m_prime = cfg.family == StateFamily::optimal ? -1 : p.m_prime;
      c.eta = p.eta;
      c.phi = row.point.argmin_phi.value_or(0.0);
      c.max_dev = *row.oracle_deviation;
      rep.cells.push_back(c);
      rep.worst = c;
      throw ValidationFailure("closed form disagrees with the oracle on a sweep row", rep);
    }
    if (cfg.validate && row.route_deviation && *row.route_deviation >= 1e-8) {
      throw ValidationFailure("matrix and closed error-propagation routes disagree",
                              res.validation.value_or(ValidationReport{}));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "sweep,min_rms,argmin_phi,avg_rms,holevo,mm_error,shot_noise,heisenberg,noon,external";
inline constexpr int kCsvColumns = 10;

/// 12 significant digits; "inf" for the sentinel.
inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

inline std::string to_csv_row(const CurvePoint& p) {
  std::string s = format_number(p.sweep_value);
  for (const auto& f : {p.min_rms, p.argmin_phi, p.avg_rms, p.holevo, p.mm_error}) s += "," + format_optional(f);
  s += "," + format_number(p.shot_noise) + "," + format_number(p.heisenberg) + "," + format_number(p.noon_baseline);
  s += "," + format_optional(p.external);
  return s;
}

inline std::string to_csv(const std::vector<RowResult>& rows) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : rows) s += to_csv_row(r.point) + '\n';
  return s;
}

/// sweep,rms_about_mean for the optimal family.
inline std::string to_diagnostic_csv(const std::vector<RowResult>& rows) {
  std::string s = "sweep,rms_about_mean\n";
  for (const auto& r : rows) s += format_number(r.point.sweep_value) + "," + format_optional(r.rms_about_mean) + '\n';
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// External comparison data
// ---------------------------------------------------------------------------

struct MergeResult {
  std::string csv;
  int matched = 0;
  std::vector<std::string> warnings;
};

/// Fills the external column from a two-column (sweep_value, error) CSV by
/// exact match of the 12-digit sweep value. Unmatched rows stay empty.
inline MergeResult merge_external(const std::string& csv_text, const std::string& comparison_text) {
  std::map<std::string, std::string> table;
  int lineno = 0;
  for (const auto& raw : split_lines(comparison_text)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_fields(line);
    if (f.size() != 2) throw InputError("comparison line " + std::to_string(lineno) + ": expected two fields");
    const auto x = parse_number(trim(f[0]));
    const auto y = parse_number(trim(f[1]));
    if (!x || !y) throw InputError("comparison line " + std::to_string(lineno) + ": non-numeric field");
    table[format_number(*x)] = format_number(*y);
  }

  const auto lines = split_lines(csv_text);
  if (lines.empty() || lines.front() != kCsvHeader) throw InputError("sweep CSV lacks the standard header");
  MergeResult res;
  res.csv = lines.front() + '\n';
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i]);
    if (static_cast<int>(f.size()) != kCsvColumns) throw InputError("sweep CSV row " + std::to_string(i) + " malformed");
    const auto x = parse_number(f[0]);
    if (!x) throw InputError("sweep CSV row " + std::to_string(i) + ": bad sweep value");
    const auto it = table.find(format_number(*x));
    f.back() = it != table.end() ? it->second : std::string();
    if (it != table.end()) ++res.matched;
    std::string row = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) row += "," + f[k];
    res.csv += row + '\n';
  }
  if (!table.empty() && res.matched == 0) res.warnings.push_back("no comparison sweep value matched any CSV row");
  return res;
}

inline MergeResult merge_external_files(const std::string& csv_path, const std::string& comparison_path) {
  return merge_external(read_file(csv_path), read_file(comparison_path));
}

// ---------------------------------------------------------------------------
// gnuplot script
// ---------------------------------------------------------------------------

/// Which CSV columns carry at least one value, keyed by header name.
inline std::map<std::string, bool> populated_columns(const std::string& csv_text) {
  const auto lines = split_lines(csv_text);
  if (lines.empty() || lines.front() != kCsvHeader) throw InputError("CSV lacks the standard header");
  const auto names = split_fields(lines.front());
  std::map<std::string, bool> have;
  for (const auto& n : names) have[n] = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    for (std::size_t k = 0; k < f.size() && k < names.size(); ++k)
      if (!f[k].empty()) have[names[k]] = true;
  }
  return have;
}

inline std::string gnuplot_script(const std::string& csv_text, const std::string& csv_name,
                                  const std::string& x_label = "sweep value") {
  const auto have = populated_columns(csv_text);
  std::vector<std::string> traces;
  traces.push_back("'" + csv_name +
                   "' using 1:7:8 with filledcurves fillcolor rgb '#d0d0d0' fillstyle solid 0.6 noborder "
                   "title 'quantum region (shot noise to Heisenberg)'");
  auto add = [&](const char* col, const std::string& t) {
    if (have.at(col)) traces.push_back("'' " + t);
  };
  add("min_rms", "using 1:2 with lines linewidth 2 linecolor rgb 'black' title 'min RMS'");
  add("holevo", "using 1:5 with points pointtype 1 linecolor rgb 'black' title 'Holevo variance'");
  add("avg_rms", "using 1:4 with lines dashtype 2 linecolor rgb 'gray50' title 'average RMS'");
  add("mm_error", "using 1:6 with lines linewidth 2 linecolor rgb 'black' title 'M\\&M error propagation'");
  add("noon", "using 1:9 with lines dashtype '-.' linecolor rgb 'black' title 'NOON'");
  add("external", "using 1:10 with lines dashtype 2 linecolor rgb 'black' title 'two-mode optimum (external)'");

  std::ostringstream os;
  os << "# gnuplot -p <this file>\n"
     << "set datafile separator ','\n"
     << "set datafile missing ''\n"
     << "set key autotitle columnhead\n"
     << "set logscale y\n"
     << "set xlabel '" << x_label << "'\n"
     << "set ylabel 'phase error (rad)'\n"
     << "set key top right\n"
     << "plot ";
  for (std::size_t i = 0; i < traces.size(); ++i) os << (i ? ", \\\n     " : "") << traces[i];
  os << '\n';
  return os.str();
}

/// Writes <csv stem>.gp next to the CSV and returns its path.
inline std::string emit_gnu_plot_script(const std::string& csv_path, const std::string& x_label = "sweep value") {
  namespace fs = std::filesystem;
  if (!fs::exists(csv_path)) throw InputError("CSV not found: " + csv_path);
  const std::string text = read_file(csv_path);
  fs::path script = csv_path;
  script.replace_extension(".gp");
  write_file(script.string(), gnuplot_script(text, fs::path(csv_path).filename().string(), x_label));
  return script.string();
}

}  // namespace interf
