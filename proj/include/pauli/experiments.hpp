#ifndef PAULI_EXPERIMENTS_HPP
#define PAULI_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/fidelity.hpp"
#include "pauli/potentials.hpp"
#include "pauli/propagator.hpp"
#include "pauli/spectral.hpp"
#include "pauli/thermal.hpp"

namespace pauli {

enum class SweepAxis { ProcessTime, BufferCount, Anharmonicity, Temperature, ParticleNumberGap };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::ProcessTime: return "process_time";
    case SweepAxis::BufferCount: return "buffer_count";
    case SweepAxis::Anharmonicity: return "anharmonicity";
    case SweepAxis::Temperature: return "temperature";
    case SweepAxis::ParticleNumberGap: return "particle_number_gap";
  }
  return "?";
}

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Config files: UTF-8 text, `key = value` per line, `#` starts a comment.

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected `key = value`");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw InputError("config line " + std::to_string(line_no) + ": duplicate key `" + key + "`");
    }
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file `" + path + "`");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline double parse_number(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw InputError("config: `" + key + "` expects a number, got `" + value + "`");
  }
  return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (v < 0.0 || v != std::floor(v)) {
    throw InputError("config: `" + key + "` expects a non-negative integer, got `" + value + "`");
  }
  return static_cast<std::size_t>(v);
}

/// a, a + step, ... up to b inclusive, each value computed as a + i*step.
inline std::vector<double> stepped_range(double a, double b, double step) {
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + static_cast<double>(i) * step;
  return out;
}

/// Comma-separated numbers, or an inclusive range `start:stop[:step]`.
inline std::vector<double> parse_values(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (value.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number(key, trim(item)));
    if (parts.size() < 2 || parts.size() > 3) throw InputError("config: `" + key + "` range must be start:stop[:step]");
    const double step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0) || parts[1] < parts[0]) throw InputError("config: `" + key + "` range is empty or has step <= 0");
    return stepped_range(parts[0], parts[1], step);
  }
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parse_number(key, t));
  }
  if (out.empty()) throw InputError("config: `" + key + "` is empty");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config: `" + key + "` expects true/false, got `" + value + "`");
}

// ---------------------------------------------------------------------------

struct SweepSpec {
  PotentialSchedule schedule = PotentialSchedule::expansion(Shape::Sinusoidal, 25.0, 1.0);
  std::optional<SweepAxis> axis;
  std::vector<double> axis_values;
  std::size_t n_protected = 2;
  std::vector<std::size_t> n_buffer{0};
  double tau = 0.0;
  double threshold = 0.95;
  double tail_bound = 1e-6;
  std::size_t n_points = 0;
  PropagationSettings settings;
  bool auto_dt = true;
  bool verify_oracle = false;
  std::size_t workers = 1;

  std::size_t max_buffer() const { return *std::max_element(n_buffer.begin(), n_buffer.end()); }

  void validate() const {
    if (n_buffer.empty()) throw InputError("sweep: N_b list is empty");
    if (n_protected + max_buffer() == 0) throw InputError("sweep: need N_p + N_b >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("sweep: threshold must lie in (0,1)");
    if (!(tau >= 0.0)) throw InputError("sweep: tau must be >= 0");
    if (axis) {
      if (axis_values.empty()) throw InputError("sweep: axis grid is empty");
      if (!std::is_sorted(axis_values.begin(), axis_values.end())) throw InputError("sweep: axis grid must be ascending");
    }
  }
};

/// Default axis grids spanning the usual figure ranges for each task.
inline std::vector<double> default_axis_values(SweepAxis axis, Task task) {
  const auto range = stepped_range;
  switch (axis) {
    case SweepAxis::ProcessTime:
      if (task == Task::Expansion) return range(2.0, 50.0, 2.0);
      if (task == Task::Transport) return range(2.0, 30.0, 0.5);
      return range(0.5, 6.0, 0.5);
    case SweepAxis::BufferCount: return range(0.0, 16.0, 1.0);
    case SweepAxis::Anharmonicity: return range(0.2, 2.0, 0.1);
    case SweepAxis::Temperature: return task == Task::Splitting ? range(0.0, 1.0, 0.05) : range(0.0, 2.0, 0.1);
    case SweepAxis::ParticleNumberGap: return range(1.0, 20.0, 1.0);
  }
  return {};
}

inline SweepAxis parse_axis(const std::string& v) {
  if (v == "process_time" || v == "T") return SweepAxis::ProcessTime;
  if (v == "buffer_count" || v == "N_b") return SweepAxis::BufferCount;
  if (v == "anharmonicity" || v == "lambda") return SweepAxis::Anharmonicity;
  if (v == "temperature" || v == "tau") return SweepAxis::Temperature;
  if (v == "particle_number_gap" || v == "gap" || v == "N") return SweepAxis::ParticleNumberGap;
  throw InputError("config: unknown axis `" + v + "`");
}

/// Builds a SweepSpec from config keys. Unknown keys are rejected.
inline SweepSpec make_sweep_spec(const ConfigMap& cfg) {
  static const std::vector<std::string> known = {
      "task", "shape", "T", "omega_i", "omega_f", "x0i", "x0f", "h_i", "h_f", "lambda", "N_p", "N_b", "tau",
      "axis", "axis_values", "threshold", "tail_bound", "n_points", "dt", "verify_oracle", "tolerance",
      "auto_dt", "workers"};
  for (const auto& [k, v] : cfg) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("config: unknown key `" + k + "`");
  }
  const auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = cfg.find(k);
    if (it == cfg.end()) return std::nullopt;
    return it->second;
  };
  const auto num = [&](const std::string& k, double dflt) {
    auto v = get(k);
    return v ? parse_number(k, *v) : dflt;
  };

  const auto task_s = get("task");
  if (!task_s) throw InputError("config: `task` is required (expansion | transport | splitting)");
  Shape shape = Shape::Sinusoidal;
  if (auto s = get("shape")) {
    if (*s == "linear") shape = Shape::Linear;
    else if (*s == "sinusoidal") shape = Shape::Sinusoidal;
    else throw InputError("config: unknown shape `" + *s + "`");
  }

  SweepSpec spec;
  const double omega_i = num("omega_i", 1.0);
  if (*task_s == "expansion") {
    spec.schedule = PotentialSchedule({ExpansionParams{omega_i, num("omega_f", 0.01)}}, shape, num("T", 25.0),
                                      num("lambda", 1.0));
  } else if (*task_s == "transport") {
    spec.schedule = PotentialSchedule({TransportParams{num("x0i", 0.0), num("x0f", 90.0), omega_i}}, shape,
                                      num("T", 11.5), num("lambda", 1.0));
  } else if (*task_s == "splitting") {
    spec.schedule = PotentialSchedule({SplittingParams{num("h_i", 0.0), num("h_f", 20.0), omega_i}}, shape,
                                      num("T", 2.0), num("lambda", 0.0));
  } else {
    throw InputError("config: unknown task `" + *task_s + "`");
  }

  if (auto v = get("N_p")) spec.n_protected = parse_count("N_p", *v);
  if (auto v = get("N_b")) {
    spec.n_buffer.clear();
    for (double x : parse_values("N_b", *v)) spec.n_buffer.push_back(parse_count("N_b", format_double(x)));
  }
  spec.tau = num("tau", 0.0);
  spec.threshold = num("threshold", 0.95);
  spec.tail_bound = num("tail_bound", 1e-6);
  if (auto v = get("n_points")) spec.n_points = parse_count("n_points", *v);
  spec.settings.dt = num("dt", 1e-3);
  spec.settings.tolerance = num("tolerance", 1e-4);
  if (auto v = get("verify_oracle")) spec.verify_oracle = parse_bool("verify_oracle", *v);
  if (auto v = get("auto_dt")) spec.auto_dt = parse_bool("auto_dt", *v);
  if (auto v = get("workers")) spec.workers = std::max<std::size_t>(1, parse_count("workers", *v));
  if (auto v = get("axis")) {
    spec.axis = parse_axis(*v);
    auto values = get("axis_values");
    spec.axis_values = values ? parse_values("axis_values", *values) : default_axis_values(*spec.axis, spec.schedule.task());
  }
  if (spec.n_points != 0 && (spec.n_points & (spec.n_points - 1)) != 0) {
    throw InputError("config: n_points must be a power of two");
  }
  if (!(spec.settings.dt > 0.0)) throw InputError("config: dt must be positive");
  spec.validate();
  return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path) { return make_sweep_spec(load_config(path)); }

// ---------------------------------------------------------------------------

struct SweepRow {
  double axis_value = 0.0;
  Task task = Task::Expansion;
  Shape shape = Shape::Sinusoidal;
  double T = 0.0;
  double lambda = 0.0;
  std::size_t n_protected = 0;
  std::size_t n_buffer = 0;
  double tau = 0.0;
  double fidelity = 0.0;
  FidelityMethod method = FidelityMethod::GramDeterminant;
  double dt = 0.0;
  std::size_t n_points = 0;
  double dt_check_delta = -1.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::ProcessTime;
  std::vector<SweepRow> rows;
};

namespace detail {

// Runs job(i) for i in [0, count) on at most `workers` threads. Failures are
// rethrown in index order, so the reported error does not depend on timing.
inline void run_pool(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class F>
auto annotate(const std::string& where, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const NeedsMoreLevelsError& e) {
    throw NeedsMoreLevelsError(where + ": " + e.what(), e.required_levels());
  } catch (const GridError& e) {
    throw GridError(where + ": " + e.what(), e.side());
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + ": " + e.what());
  }
}

}  // namespace detail

/// Evolution for one grid point of a sweep, sized for the largest particle
/// number and temperature it will be asked about.
inline EvolvedLevels evolve_point(const SweepSpec& spec, const PotentialSchedule& schedule, std::size_t n_max,
                                  double tau_max, bool auto_dt, const PropagationSettings& settings) {
  EvolveOptions opt;
  opt.auto_dt = auto_dt;
  opt.n_points = spec.n_points;
  if (tau_max > 0.0) {
    return evolve_for_temperature(schedule, spec.n_protected, n_max, tau_max, spec.tail_bound, settings, opt);
  }
  return evolve_levels(schedule, n_max, spec.n_protected, settings, opt);
}

inline double point_fidelity(const SweepSpec& spec, const EvolvedLevels& ev, std::size_t n_buffer, double tau,
                             FidelityMethod* method) {
  if (tau > 0.0) {
    *method = FidelityMethod::GramDeterminant;
    return ensemble_fidelity(ev, spec.n_protected, n_buffer, tau, spec.tail_bound).result.value;
  }
  const FidelityResult r = ev.fidelity(spec.n_protected, n_buffer, spec.verify_oracle);
  *method = r.method;
  return r.value;
}

/**
 * One row per (axis value, N_b) pair, ordered by axis index then N_b. The
 * first grid point runs with automatic dt halving when enabled; the step it
 * settles on is reused for every other point of the family.
 */
inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  if (!spec.axis) throw InputError("sweep: no axis given");
  const SweepAxis axis = *spec.axis;
  if (axis == SweepAxis::ParticleNumberGap) {
    throw InputError("sweep: the particle_number_gap axis is served by the gap command");
  }
  SweepResult result{axis, {}};
  const auto& values = spec.axis_values;

  // Jobs: one evolution each. Axes over N_b or tau share a single evolution.
  std::vector<PotentialSchedule> schedules;
  std::size_t n_max = spec.n_protected + spec.max_buffer();
  double tau_max = spec.tau;
  switch (axis) {
    case SweepAxis::ProcessTime:
      for (double T : values) schedules.push_back(spec.schedule.with_T(T));
      break;
    case SweepAxis::Anharmonicity:
      for (double l : values) schedules.push_back(spec.schedule.with_lambda(l));
      break;
    case SweepAxis::BufferCount:
      schedules.push_back(spec.schedule);
      for (double v : values) {
        if (v < 0.0 || v != std::floor(v)) throw InputError("sweep: buffer_count axis needs non-negative integers");
      }
      n_max = spec.n_protected + static_cast<std::size_t>(values.back());
      break;
    case SweepAxis::Temperature:
      schedules.push_back(spec.schedule);
      if (values.front() < 0.0) throw InputError("sweep: temperatures must be >= 0");
      tau_max = values.back();
      break;
    case SweepAxis::ParticleNumberGap: break;
  }

  std::vector<std::vector<SweepRow>> per_job(schedules.size());
  PropagationSettings settings = spec.settings;
  const auto run_job = [&](std::size_t i, bool auto_dt) {
    const PotentialSchedule& sched = schedules[i];
    std::ostringstream where;
    where << "sweep point " << i << " (" << sched.describe() << ")";
    detail::annotate(where.str(), [&] {
      const EvolvedLevels ev = evolve_point(spec, sched, n_max, tau_max, auto_dt, settings);
      if (auto_dt) settings.dt = ev.dt;
      const auto emit = [&](double axis_value, std::size_t nb, double tau) {
        SweepRow row;
        row.axis_value = axis_value;
        row.task = sched.task();
        row.shape = sched.shape();
        row.T = sched.T();
        row.lambda = sched.lambda();
        row.n_protected = spec.n_protected;
        row.n_buffer = nb;
        row.tau = tau;
        row.fidelity = point_fidelity(spec, ev, nb, tau, &row.method);
        if (!(row.fidelity >= 0.0 && row.fidelity <= 1.0 + 1e-10)) {
          throw ConvergenceError("sweep: fidelity outside [0, 1]");
        }
        row.dt = ev.dt;
        row.n_points = ev.grid.size();
        row.dt_check_delta = ev.dt_check_delta;
        per_job[i].push_back(row);
      };
      if (axis == SweepAxis::BufferCount) {
        for (double v : values) emit(v, static_cast<std::size_t>(v), spec.tau);
      } else if (axis == SweepAxis::Temperature) {
        for (double tau : values) {
          for (std::size_t nb : spec.n_buffer) emit(tau, nb, tau);
        }
      } else {
        const double v = axis == SweepAxis::ProcessTime ? sched.T() : sched.lambda();
        for (std::size_t nb : spec.n_buffer) emit(v, nb, spec.tau);
      }
    });
  };

  run_job(0, spec.auto_dt);
  if (schedules.size() > 1) {
    detail::run_pool(schedules.size() - 1, spec.workers, [&](std::size_t i) { run_job(i + 1, false); });
  }
  for (auto& rows : per_job) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

inline void write_csv(std::ostream& os, const SweepResult& r) {
  os << "axis,axis_value,task,shape,T,lambda,N_p,N_b,tau,F,method,dt,n_points,dt_check_delta\n";
  for (const auto& row : r.rows) {
    os << to_string(r.axis) << ',' << format_double(row.axis_value) << ',' << to_string(row.task) << ','
       << to_string(row.shape) << ',' << format_double(row.T) << ',' << format_double(row.lambda) << ','
       << row.n_protected << ',' << row.n_buffer << ',' << format_double(row.tau) << ','
       << format_double(row.fidelity) << ',' << to_string(row.method) << ',' << format_double(row.dt) << ','
       << row.n_points << ',' << format_double(row.dt_check_delta) << '\n';
  }
}

inline void write_gap_csv(std::ostream& os, double lambda, const std::vector<GapPoint>& gaps) {
  os << "N,lambda,delta_E\n";
  for (const auto& g : gaps) os << g.N << ',' << format_double(lambda) << ',' << format_double(g.delta_e) << '\n';
}

// ---------------------------------------------------------------------------

struct MinBufferRow {
  double T = 0.0;
  std::size_t n_buffer_min = 0;
  bool saturated = false;  ///< no N_b <= N_b_max qualifies; n_buffer_min is then N_b_max + 1
};

/// Fidelity table F[T index][N_b] for N_b = 0..n_buffer_max.
inline std::vector<std::vector<double>> buffer_table(const SweepSpec& spec, const std::vector<double>& t_grid,
                                                     std::size_t n_buffer_max) {
  SweepSpec s = spec;
  s.axis = SweepAxis::ProcessTime;
  s.axis_values = t_grid;
  s.n_buffer.clear();
  for (std::size_t nb = 0; nb <= n_buffer_max; ++nb) s.n_buffer.push_back(nb);
  const SweepResult r = run_sweep(s);
  std::vector<std::vector<double>> table(t_grid.size(), std::vector<double>(n_buffer_max + 1));
  for (std::size_t i = 0; i < r.rows.size(); ++i) table[i / (n_buffer_max + 1)][r.rows[i].n_buffer] = r.rows[i].fidelity;
  return table;
}

/**
 * For each T on the grid, the smallest N_b <= n_buffer_max with
 * F(T', N_b) >= threshold at every grid point T' >= T. Only the supplied
 * discrete grid is consulted.
 */
inline std::vector<MinBufferRow> min_buffer_from_table(const std::vector<double>& t_grid,
                                                       const std::vector<std::vector<double>>& table,
                                                       double threshold) {
  const std::size_t nt = t_grid.size();
  std::vector<MinBufferRow> out(nt);
  if (nt == 0) return out;
  const std::size_t nb_count = table.front().size();
  for (std::size_t i = 0; i < nt; ++i) {
    out[i].T = t_grid[i];
    out[i].saturated = true;
    out[i].n_buffer_min = nb_count;
    for (std::size_t nb = 0; nb < nb_count; ++nb) {
      bool ok = true;
      for (std::size_t k = i; k < nt && ok; ++k) ok = table[k][nb] >= threshold;
      if (ok) {
        out[i].n_buffer_min = nb;
        out[i].saturated = false;
        break;
      }
    }
  }
  return out;
}

inline std::vector<MinBufferRow> min_buffer_search(const SweepSpec& spec, const std::vector<double>& t_grid,
                                                   std::size_t n_buffer_max) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw InputError("min_buffer_search: T grid must be nonempty and ascending");
  }
  return min_buffer_from_table(t_grid, buffer_table(spec, t_grid, n_buffer_max), spec.threshold);
}

inline void write_min_buffer_csv(std::ostream& os, const std::vector<MinBufferRow>& rows, double threshold) {
  os << "T,N_b_min,saturated,threshold,grid_points,T_min,T_max\n";
  for (const auto& r : rows) {
    os << format_double(r.T) << ',' << r.n_buffer_min << ',' << (r.saturated ? "true" : "false") << ','
       << format_double(threshold) << ',' << rows.size() << ',' << format_double(rows.front().T) << ','
       << format_double(rows.back().T) << '\n';
  }
}

// ---------------------------------------------------------------------------

enum class CrossingStatus { Crossed, AboveRange, BelowRange };

inline std::string_view to_string(CrossingStatus s) {
  switch (s) {
    case CrossingStatus::Crossed: return "crossed";
    case CrossingStatus::AboveRange: return "above_range";
    case CrossingStatus::BelowRange: return "below_range";
  }
  return "?";
}

struct CompensationRow {
  std::size_t n_buffer = 0;
  CrossingStatus status = CrossingStatus::Crossed;
  double tau_cross = 0.0;  ///< interpolated crossing; the open bound otherwise
  std::optional<double> spacing;  ///< tau_cross minus that of the previous crossed row
};

/// First downward crossing of `threshold` along the grid, by linear interpolation.
inline CompensationRow find_crossing(const std::vector<double>& tau_grid, const std::vector<double>& f,
                                     double threshold) {
  CompensationRow row;
  if (f.front() < threshold) {
    row.status = CrossingStatus::BelowRange;
    row.tau_cross = tau_grid.front();
    return row;
  }
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (f[k] < threshold) {
      const double s = (f[k - 1] - threshold) / (f[k - 1] - f[k]);
      row.tau_cross = tau_grid[k - 1] + s * (tau_grid[k] - tau_grid[k - 1]);
      return row;
    }
  }
  row.status = CrossingStatus::AboveRange;
  row.tau_cross = tau_grid.back();
  return row;
}

inline std::vector<CompensationRow> compensation_from_table(const std::vector<double>& tau_grid,
                                                            const std::vector<std::size_t>& n_buffers,
                                                            const std::vector<std::vector<double>>& f_by_buffer,
                                                            double threshold) {
  std::vector<CompensationRow> out;
  std::optional<double> previous;
  for (std::size_t b = 0; b < n_buffers.size(); ++b) {
    CompensationRow row = find_crossing(tau_grid, f_by_buffer[b], threshold);
    row.n_buffer = n_buffers[b];
    if (row.status == CrossingStatus::Crossed) {
      if (previous) row.spacing = row.tau_cross - *previous;
      previous = row.tau_cross;
    }
    out.push_back(row);
  }
  return out;
}

/**
 * For each N_b, the temperature at which F(tau) first drops below the
 * threshold, and the spacing between successive crossings. Lines that never
 * cross inside the grid are reported as open intervals.
 */
inline std::vector<CompensationRow> temperature_compensation_report(const SweepSpec& spec,
                                                                    const std::vector<double>& tau_grid,
                                                                    const std::vector<std::size_t>& n_buffers) {
  if (tau_grid.empty() || !std::is_sorted(tau_grid.begin(), tau_grid.end())) {
    throw InputError("temperature_compensation_report: tau grid must be nonempty and ascending");
  }
  SweepSpec s = spec;
  s.axis = SweepAxis::Temperature;
  s.axis_values = tau_grid;
  s.n_buffer = n_buffers;
  const SweepResult r = run_sweep(s);
  std::vector<std::vector<double>> f(n_buffers.size(), std::vector<double>(tau_grid.size()));
  for (std::size_t i = 0; i < r.rows.size(); ++i) f[i % n_buffers.size()][i / n_buffers.size()] = r.rows[i].fidelity;
  return compensation_from_table(tau_grid, n_buffers, f, spec.threshold);
}

inline void write_compensation_csv(std::ostream& os, const std::vector<CompensationRow>& rows) {
  os << "N_b,status,tau_cross,spacing\n";
  for (const auto& r : rows) {
    os << r.n_buffer << ',' << to_string(r.status) << ',' << format_double(r.tau_cross) << ','
       << (r.spacing ? format_double(*r.spacing) : std::string()) << '\n';
  }
}

}  // namespace pauli

#endif  // PAULI_EXPERIMENTS_HPP
