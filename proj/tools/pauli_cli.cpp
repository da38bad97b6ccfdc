#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "pauli/pauli.hpp"

using namespace pauli;

namespace {

struct ScenarioArgs {
  std::string shape = "sinusoidal";
  double T = 0.0;
  double lambda = 1.0;
  double omega_i = 1.0;
  double omega_f = 0.01;
  double x0i = 0.0;
  double x0f = 90.0;
  double h_i = 0.0;
  double h_f = 20.0;
  std::size_t n_protected = 2;
  std::size_t n_buffer = 0;
  double tau = 0.0;
  double dt = 1e-3;
  double tail_bound = 1e-6;
  std::size_t n_points = 0;
  bool no_auto_dt = false;
  bool oracle = false;
};

Shape parse_shape(const std::string& s) {
  if (s == "linear") return Shape::Linear;
  if (s == "sinusoidal") return Shape::Sinusoidal;
  throw InputError("unknown shape `" + s + "` (linear | sinusoidal)");
}

void add_common(CLI::App* cmd, ScenarioArgs& a, double default_T) {
  a.T = default_T;
  cmd->add_option("--shape", a.shape, "linear | sinusoidal")->capture_default_str();
  cmd->add_option("-T,--time", a.T, "process time")->capture_default_str();
  cmd->add_option("--Np", a.n_protected, "protected particles")->capture_default_str();
  cmd->add_option("--Nb", a.n_buffer, "buffer particles")->capture_default_str();
  cmd->add_option("--tau", a.tau, "temperature k_B T / hbar omega")->capture_default_str();
  cmd->add_option("--dt", a.dt, "initial time step")->capture_default_str();
  cmd->add_option("--tail-bound", a.tail_bound, "omitted Boltzmann weight")->capture_default_str();
  cmd->add_option("--n-points", a.n_points, "grid points (power of two, 0 = task default)");
  cmd->add_flag("--no-auto-dt", a.no_auto_dt, "skip the dt halving check");
  cmd->add_flag("--oracle", a.oracle, "use the subset enumeration for F (small N only)");
}

int run_scenario(const PotentialSchedule& s, const ScenarioArgs& a) {
  PropagationSettings st;
  st.dt = a.dt;
  EvolveOptions opt;
  opt.auto_dt = !a.no_auto_dt;
  opt.n_points = a.n_points;
  double f = 0.0;
  if (a.tau > 0.0) {
    f = thermal_fidelity(s, a.n_protected, a.n_buffer, a.tau, st, opt, a.tail_bound).value;
  } else {
    f = scenario_fidelity(s, a.n_protected, a.n_buffer, st, opt, a.oracle).value;
  }
  std::cout << format_double(f) << '\n';
  return 0;
}

// Writes to `path`, or stdout when it is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file `" + path + "`");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pauli-blocking protected control of trapped fermions in 1D"};
  app.require_subcommand(1);

  ScenarioArgs ex;
  auto* expand = app.add_subcommand("expand", "trap expansion, prints the fidelity");
  add_common(expand, ex, 25.0);
  expand->add_option("--lambda", ex.lambda, "anharmonicity")->capture_default_str();
  expand->add_option("--omega-i", ex.omega_i)->capture_default_str();
  expand->add_option("--omega-f", ex.omega_f)->capture_default_str();

  ScenarioArgs tr;
  auto* transport = app.add_subcommand("transport", "trap transport, prints the fidelity");
  add_common(transport, tr, 11.5);
  transport->add_option("--lambda", tr.lambda, "anharmonicity")->capture_default_str();
  transport->add_option("--x0i", tr.x0i)->capture_default_str();
  transport->add_option("--x0f", tr.x0f)->capture_default_str();

  ScenarioArgs sp;
  auto* split = app.add_subcommand("split", "trap splitting, prints the fidelity");
  add_common(split, sp, 2.0);
  split->add_option("--hi", sp.h_i, "initial barrier height")->capture_default_str();
  split->add_option("--hf", sp.h_f, "final barrier height")->capture_default_str();

  std::string sweep_config;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep from a config file, CSV output");
  sweep->add_option("config", sweep_config)->required();
  sweep->add_option("-o,--output", sweep_out, "CSV file (default stdout)");

  double gap_lambda = 1.0;
  std::size_t gap_nmax = 20;
  std::size_t gap_points = 1024;
  std::string gap_out;
  auto* gap = app.add_subcommand("gap", "Fermi gap E_N+1 - E_N of the static trap, CSV output");
  gap->add_option("--lambda", gap_lambda)->capture_default_str();
  gap->add_option("--nmax", gap_nmax, "largest N")->capture_default_str();
  gap->add_option("--n-points", gap_points)->capture_default_str();
  gap->add_option("-o,--output", gap_out);

  std::string mb_config;
  std::string mb_out;
  auto* minbuffer = app.add_subcommand("minbuffer", "smallest N_b reaching the threshold, per T on the axis grid");
  minbuffer->add_option("config", mb_config)->required();
  minbuffer->add_option("-o,--output", mb_out);

  std::string tc_config;
  std::string tc_out;
  auto* tempcomp = app.add_subcommand("tempcomp", "threshold crossings in tau for each N_b");
  tempcomp->add_option("config", tc_config)->required();
  tempcomp->add_option("-o,--output", tc_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*expand) {
      return run_scenario(
          PotentialSchedule::expansion(parse_shape(ex.shape), ex.T, ex.lambda, ex.omega_i, ex.omega_f), ex);
    }
    if (*transport) {
      return run_scenario(PotentialSchedule::transport(parse_shape(tr.shape), tr.T, tr.lambda, tr.x0i, tr.x0f), tr);
    }
    if (*split) {
      return run_scenario(PotentialSchedule::splitting(parse_shape(sp.shape), sp.T, sp.h_i, sp.h_f), sp);
    }
    if (*sweep) {
      const SweepSpec spec = load_sweep_spec(sweep_config);
      const SweepResult r = run_sweep(spec);
      emit(sweep_out, [&](std::ostream& os) { write_csv(os, r); });
    }
    if (*gap) {
      const auto g = fermi_gap_profile(gap_lambda, gap_nmax, Grid::symmetric(12.0, gap_points));
      emit(gap_out, [&](std::ostream& os) { write_gap_csv(os, gap_lambda, g); });
    }
    if (*minbuffer) {
      const SweepSpec spec = load_sweep_spec(mb_config);
      if (spec.axis != SweepAxis::ProcessTime) throw InputError("minbuffer: config needs `axis = T`");
      const auto rows = min_buffer_search(spec, spec.axis_values, spec.max_buffer());
      emit(mb_out, [&](std::ostream& os) { write_min_buffer_csv(os, rows, spec.threshold); });
    }
    if (*tempcomp) {
      const SweepSpec spec = load_sweep_spec(tc_config);
      if (spec.axis != SweepAxis::Temperature) throw InputError("tempcomp: config needs `axis = tau`");
      const auto rows = temperature_compensation_report(spec, spec.axis_values, spec.n_buffer);
      emit(tc_out, [&](std::ostream& os) { write_compensation_csv(os, rows); });
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
