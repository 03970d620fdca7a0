#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cattaneo/cattaneo.hpp"
#include "cattaneo/io.hpp"
#include "cattaneo/verify.hpp"

using namespace cattaneo;

namespace {

enum ExitCode : int { kOk = 0, kInvalidConfig = 1, kNumerical = 2, kVerifyFailed = 3 };

struct Overrides {
  std::string config;
  std::string out;
  std::optional<int> cells;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<double> lambda_max;
  std::optional<int> points;
  std::optional<std::uint64_t> seed;
  std::string fault;
  std::vector<double> xs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "root directory for run output");
  cmd->add_option("--n", o.cells, "number of grid cells");
  cmd->add_option("--dt", o.dt, "time step");
  cmd->add_option("--tfinal", o.t_final, "final time");
  cmd->add_option("--lambda-max", o.lambda_max, "sweep half-width on the imaginary axis");
  cmd->add_option("--points", o.points, "number of sweep points");
  cmd->add_option("--seed", o.seed, "seed for random presets and checks");
}

RunConfig load_config(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) {
    const std::filesystem::path path = o.config;
    c = config_from_json(read_json_file(path), path.parent_path());
  }
  if (o.cells) c.cells = *o.cells;
  if (o.dt) c.dt = *o.dt;
  if (o.t_final) c.t_final = *o.t_final;
  if (o.lambda_max) c.lambda_max = *o.lambda_max;
  if (o.points) c.sweep_points = *o.points;
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.outputs = o.out;
  check_config(c);
  if (c.lambda_max < 0.0) throw ConfigError("sweep.lambda_max must be nonnegative");
  if (c.sweep_points < 3) throw ConfigError("sweep.points must be >= 3");
  return c;
}

json fit_to_json(const std::vector<double>& t, const std::vector<double>& e, DecayModel model) {
  try {
    const auto f = fit_decay(t, e, model);
    return {{"rate", f.rate}, {"r_squared", f.r_squared}, {"t_lo", f.t_lo}, {"t_hi", f.t_hi}, {"samples", f.samples}};
  } catch (const std::invalid_argument& err) {
    return {{"rate", nullptr}, {"reason", err.what()}};
  }
}

int cmd_simulate(const RunConfig& c) {
  const Grid grid = build_grid(c.spec.length, c.cells);
  const auto a = assemble_generator(c.spec, grid);
  const auto u0 = to_state(load_initial_data(c, grid), a);
  const auto consts = lyapunov_constants(c.spec, grid);
  const auto traj = integrate(a, u0, c.dt, c.t_final, c.sample_stride);
  const bool nodal = theta_on_nodes(c.spec.bc);

  std::vector<std::string> header{"t", "E1", "E2", "D1", "F1", "L1", "theta_mean"};
  if (nodal) header.insert(header.end(), {"theta_x_lhs", "theta_x_rhs"});
  header.push_back("energy_balance_residual");
  CsvWriter csv(header);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& u = traj.states[i];
    std::vector<double> row{traj.times[i],          energy(a, u, 1),       energy(a, u, 2),
                            dissipation(a, u, 1),   functional_F(a, u, 1), lyapunov(a, u, 1, consts),
                            theta_mean(a, u)};
    if (nodal) {
      const auto b = check_theta_x_bound(a, u);
      row.insert(row.end(), {b.lhs, b.rhs});
    }
    row.push_back(std::max(traj.balance_residual_e1[i], traj.balance_residual_e2[i]));
    csv.row(row);
  }

  const auto series = energy_series(a, traj);
  json summary = {{"config", config_to_json(c)},
                  {"samples", traj.times.size()},
                  {"E1_initial", series.e1.front()},
                  {"E1_final", series.e1.back()},
                  {"fit_exponential", fit_to_json(series.times, series.e1, DecayModel::Exponential)},
                  {"fit_polynomial", fit_to_json(series.times, series.e1, DecayModel::Polynomial)}};
  if (nodal) {
    const auto pb = check_polynomial_bound(series, consts);
    const auto ly = check_lyapunov_decay(a, traj, consts);
    summary["polynomial_bound"] = {{"max_ratio", pb.max_ratio}, {"C_final", pb.C_final}, {"pass", pb.pass}};
    summary["lyapunov"] = {{"nonincreasing", ly.nonincreasing},
                           {"slope_inequality", ly.slope_inequality},
                           {"worst_slope_margin", ly.worst_slope_margin}};
  }

  const auto dir = make_run_directory(c.outputs, config_to_json(c));
  write_atomic(dir / "trajectory.csv", csv.str());
  write_atomic(dir / "constants.json", dump_json(constants_to_json(consts)));
  write_atomic(dir / "summary.json", dump_json(summary));
  std::cout << dir.string() << "\n";
  return kOk;
}

int cmd_spectrum(const RunConfig& c) {
  const auto a = assemble_generator(c.spec, build_grid(c.spec.length, c.cells));
  const auto r = eigenvalues(a);
  auto ev = r.eigenvalues;
  std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() < y.imag();
  });
  CsvWriter csv({"re", "im"});
  for (const auto& l : ev) csv.row({l.real(), l.imag()});
  json deflated = json::array();
  for (const auto& d : r.deflated)
    deflated.push_back({{"re", d.eigenvalue.real()}, {"im", d.eigenvalue.imag()}, {"residual", d.residual}});
  const json summary = {{"config", config_to_json(c)},
                        {"spectral_abscissa", r.spectral_abscissa},
                        {"deflated_count", r.deflated.size()},
                        {"deflated", deflated},
                        {"max_relative_residual", r.max_relative_residual},
                        {"generator_norm", r.generator_norm}};
  const auto dir = make_run_directory(c.outputs, config_to_json(c));
  write_atomic(dir / "spectrum.csv", csv.str());
  write_atomic(dir / "spectrum.json", dump_json(summary));
  std::cout << dir.string() << "\n";
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  const auto a = assemble_generator(c.spec, build_grid(c.spec.length, c.cells));
  const auto s = sweep_resolvent(ResolventAnalysis(a), c.lambda_max, c.sweep_points);
  CsvWriter csv({"lambda", "norm"});
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) csv.row({s.lambdas[i], s.norms[i]});
  const json summary = {{"config", config_to_json(c)}, {"sup_norm", s.sup_norm}};
  const auto dir = make_run_directory(c.outputs, config_to_json(c));
  write_atomic(dir / "sweep.csv", csv.str());
  write_atomic(dir / "sweep_summary.json", dump_json(summary));
  std::cout << dir.string() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& c, const std::string& fault) {
  VerifyOptions opt;
  if (fault == "beta_sign") opt.balance.beta_sign = -1.0;
  const auto report = run_verification(c, opt);
  const auto dir = make_run_directory(c.outputs, config_to_json(c));
  json doc = report_to_json(report);
  doc["config"] = config_to_json(c);
  write_atomic(dir / "verify_report.json", dump_json(doc));
  for (const auto& ch : report.checks)
    std::printf("%-4s %-34s value=%-24s threshold=%s\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(),
                format_double(ch.value).c_str(), format_double(ch.threshold).c_str());
  std::cout << dir.string() << "\n";
  return report.pass() ? kOk : kVerifyFailed;
}

int cmd_oracle(const RunConfig& c, std::vector<double> xs) {
  if (c.spec.bc != BoundaryMode::DirichletTheta) throw ConfigError("oracle needs bc = dirichlet_theta");
  const StationaryOracle oracle(c.spec, c.forcing);
  if (xs.empty())
    for (int i = 0; i <= 10; ++i) xs.push_back(c.spec.length * i / 10.0);
  std::cout << "x,q,theta\n";
  for (double x : xs)
    std::cout << format_double(x) << "," << format_double(oracle.q(x)) << "," << format_double(oracle.theta(x))
              << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermoviscoelastic Cattaneo system: simulation, spectra and resolvent sweeps"};
  app.require_subcommand(1);
  Overrides o;
  auto* simulate = app.add_subcommand("simulate", "integrate in time and write energy diagnostics");
  auto* spectrum = app.add_subcommand("spectrum", "dense eigenvalues of the semi-discrete generator");
  auto* sweep = app.add_subcommand("sweep", "energy-norm resolvent along the imaginary axis");
  auto* verify = app.add_subcommand("verify", "run the property suite");
  auto* oracle = app.add_subcommand("oracle", "closed-form stationary solution at given points");
  for (auto* cmd : {simulate, spectrum, sweep, verify, oracle}) add_common(cmd, o);
  verify->add_option("--inject-fault", o.fault, "deliberate fault for testing the suite")
      ->check(CLI::IsMember({"beta_sign"}))
      ->group("");
  oracle->add_option("--x", o.xs, "evaluation points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    const RunConfig c = load_config(o);
    if (simulate->parsed()) return cmd_simulate(c);
    if (spectrum->parsed()) return cmd_spectrum(c);
    if (sweep->parsed()) return cmd_sweep(c);
    if (verify->parsed()) return cmd_verify(c, o.fault);
    return cmd_oracle(c, o.xs);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const SingularShift& e) {
    std::cerr << "error: resolvent singular at lambda=" << format_double(e.lambda()) << ": " << e.what() << "\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
