// qmeter: constructs indirect measurement schemes, extracts their Kraus
// representation, and checks the survival-activity trade-off and
// noise-disturbance relations on them.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmeter/experiments.hpp"
#include "qmeter/json_io.hpp"
#include "qmeter/version.hpp"

namespace fs = std::filesystem;
using namespace qmeter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPhysics = 1;
constexpr int kExitUsage = 2;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_xi(const std::optional<double>& xi) {
  return xi ? fmt17(*xi) : std::string("unbounded");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

struct CommonFlags {
  int trials = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string format = "csv";
  double unbias_tol = 1e-5;
  double reg_tol = 1e-8;
  int max_restarts = 50;
  bool dump = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, int default_trials) {
  flags.trials = default_trials;
  cmd->add_option("--trials", flags.trials, "Number of trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "Master seed (64-bit unsigned)");
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--format", flags.format, "Record file format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--unbias-tol", flags.unbias_tol,
                  "Unbiasedness residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--reg-tol", flags.reg_tol,
                  "Regularity threshold for survival-activity inverses")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-restarts", flags.max_restarts,
                  "Optimizer restarts per unitary")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--dump", flags.dump, "Write accepted scheme JSON files");
}

ExperimentConfig make_config(const CLI::App* cmd, CommonFlags& flags) {
  ExperimentConfig config;
  config.trials = flags.trials;
  config.unbias_tol = flags.unbias_tol;
  config.reg_tol = flags.reg_tol;
  config.max_restarts = flags.max_restarts;
  if (cmd->count("--seed") > 0) {
    config.master_seed = flags.seed;
  } else if (const char* env = std::getenv("QMETER_SEED")) {
    config.master_seed = std::strtoull(env, nullptr, 10);
  }
  return config;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file " + path.string());
  out << content;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const ExperimentConfig& config,
                    const std::vector<std::string>& outputs) {
  io::json manifest{
      {"subcommand", subcommand},
      {"config", io::config_to_json(config)},
      {"master_seed", config.master_seed},
      {"version", kVersion},
      {"timestamp",
       static_cast<long long>(
           std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
               .count())},
      {"outputs", outputs},
  };
  write_file(dir / (subcommand + "_manifest.json"), manifest.dump(2) + "\n");
}

int cmd_random_sweep(CommonFlags& flags, const CLI::App* cmd) {
  ExperimentConfig config = make_config(cmd, flags);
  std::vector<TrialRecord> records = run_random_sweep(config);

  fs::create_directories(flags.out_dir);
  const fs::path dir(flags.out_dir);

  std::string body;
  std::string plot = "cv2,lhs\n";
  double max_cv2 = 1.0;
  std::vector<int> violations;
  if (flags.format == "csv") {
    body = "trial,d_S,d_P,seed,cv2,xi,noise_ratio,lhs,rhs,residual,status,"
           "satisfied\n";
    for (const auto& r : records) {
      body += std::to_string(r.trial_index) + "," + std::to_string(r.d_s) +
              "," + std::to_string(r.d_p) + "," + std::to_string(r.seed) +
              "," + fmt17(r.report.cv_squared) + "," + fmt_xi(r.report.xi) +
              "," + fmt17(r.report.noise_ratio) + "," + fmt17(r.report.lhs) +
              "," + fmt17(r.report.rhs) + "," + fmt17(r.report.residual) +
              "," + to_string(r.status) + "," + bool_str(r.report.satisfied) +
              "\n";
    }
  } else {
    io::json arr = io::json::array();
    for (const auto& r : records) {
      io::json rec = io::tur_report_to_json(r.report);
      rec["trial"] = r.trial_index;
      rec["d_S"] = r.d_s;
      rec["d_P"] = r.d_p;
      rec["seed"] = r.seed;
      rec["residual"] = r.report.residual;
      rec["status"] = to_string(r.status);
      arr.push_back(std::move(rec));
    }
    body = arr.dump(2) + "\n";
  }
  for (const auto& r : records) {
    if (r.status != TrialStatus::Ok) continue;
    plot += fmt17(r.report.cv_squared) + "," + fmt17(r.report.lhs) + "\n";
    max_cv2 = std::max(max_cv2, r.report.cv_squared);
    if (!r.report.satisfied) violations.push_back(r.trial_index);
  }
  std::string reference = "x,y\n0,0\n" + fmt17(max_cv2) + "," + fmt17(max_cv2) + "\n";

  const std::string records_name =
      flags.format == "csv" ? "random_sweep.csv" : "random_sweep.json";
  write_file(dir / records_name, body);
  write_file(dir / "random_sweep_plot.csv", plot);
  write_file(dir / "random_sweep_reference.csv", reference);
  write_manifest(dir, "random_sweep", config,
                 {records_name, "random_sweep_plot.csv",
                  "random_sweep_reference.csv"});

  if (!violations.empty()) {
    std::cerr << "bound violated in trials:";
    for (int t : violations) std::cerr << " " << t;
    std::cerr << "\n";
    return kExitPhysics;
  }
  std::cout << records.size() << " trials written to "
            << (dir / records_name).string() << "\n";
  return kExitOk;
}

int cmd_qubit_tradeoff(CommonFlags& flags, const CLI::App* cmd) {
  ExperimentConfig config = make_config(cmd, flags);
  QubitSweep sweep = run_qubit_tradeoff(config);

  fs::create_directories(flags.out_dir);
  const fs::path dir(flags.out_dir);

  std::string body = "trial,residual,xi,one_plus_noise_ratio,cv2,satisfied\n";
  std::string plot = "xi,one_plus_noise_ratio\n";
  std::vector<int> violations;
  double min_xi = std::numeric_limits<double>::infinity(), max_xi = 0.0;
  double cv2 = 4.0;
  for (const auto& r : sweep.records) {
    const double one_plus = 1.0 + r.report.noise_ratio;
    body += std::to_string(r.trial_index) + "," + fmt17(r.residual) + "," +
            fmt_xi(r.report.xi) + "," + fmt17(one_plus) + "," +
            fmt17(r.report.cv_squared) + "," + bool_str(r.report.satisfied) +
            "\n";
    cv2 = r.report.cv_squared;
    if (!r.report.satisfied) violations.push_back(r.trial_index);
    if (r.report.xi) {
      plot += fmt17(*r.report.xi) + "," + fmt17(one_plus) + "\n";
      min_xi = std::min(min_xi, *r.report.xi);
      max_xi = std::max(max_xi, *r.report.xi);
    }
  }

  // Reference curve y = cv2/x over the observed xi range.
  std::string reference = "xi,bound\n";
  if (std::isfinite(min_xi) && max_xi > min_xi) {
    for (int i = 0; i <= 200; ++i) {
      const double x = min_xi * std::pow(max_xi / min_xi, i / 200.0);
      reference += fmt17(x) + "," + fmt17(cv2 / x) + "\n";
    }
  }

  std::vector<std::string> outputs = {"qubit_tradeoff.csv",
                                      "qubit_tradeoff_plot.csv",
                                      "qubit_tradeoff_reference.csv"};
  write_file(dir / "qubit_tradeoff.csv", body);
  write_file(dir / "qubit_tradeoff_plot.csv", plot);
  write_file(dir / "qubit_tradeoff_reference.csv", reference);
  if (flags.dump) {
    write_file(dir / "qubit_state.json",
               io::density_to_json(qubit_target_state()).dump(2) + "\n");
    outputs.push_back("qubit_state.json");
    for (const auto& r : sweep.records) {
      if (!r.scheme) continue;
      char name[64];
      std::snprintf(name, sizeof(name), "scheme_%04d.json", r.trial_index);
      write_file(dir / name, io::scheme_to_json(*r.scheme).dump(2) + "\n");
      outputs.push_back(name);
    }
  }
  write_manifest(dir, "qubit_tradeoff", config, outputs);

  std::cout << sweep.records.size() << " accepted schemes ("
            << sweep.failures << " of " << sweep.attempts
            << " attempts failed)\n";
  if (!violations.empty()) {
    std::cerr << "bound violated in trials:";
    for (int t : violations) std::cerr << " " << t;
    std::cerr << "\n";
    return kExitPhysics;
  }
  return kExitOk;
}

Observable named_qubit_observable(const std::string& name) {
  if (name == "sigma_x") return Observable(pauli_x());
  if (name == "sigma_y") return Observable(pauli_y());
  if (name == "sigma_z") return Observable(pauli_z());
  throw ValidationError("unknown observable name: " + name);
}

int cmd_ndr(CommonFlags& flags, const CLI::App* cmd,
            const std::vector<double>& xi_values, const std::string& b_name) {
  ExperimentConfig config = make_config(cmd, flags);
  Observable b = named_qubit_observable(b_name);
  NdrSweep sweep = run_ndr_sweep(config, b);

  fs::create_directories(flags.out_dir);
  const fs::path dir(flags.out_dir);

  std::string body =
      "trial,dn_a_over_da,dd_b_over_db,xi,noise_floor,ndr_slack,"
      "holds_additive,holds_reciprocal\n";
  bool physics_failure = false;
  double rhs = 0.0;
  for (const auto& r : sweep.records) {
    const double noise_ratio = r.noise_a / r.std_a;
    const double dist_ratio = r.dist_b / r.std_b;
    body += std::to_string(r.trial_index) + "," + fmt17(noise_ratio) + "," +
            fmt17(dist_ratio) + "," + fmt_xi(r.xi) + "," + fmt17(r.floor) +
            "," + fmt17(r.slack) + "," + bool_str(r.holds_additive) + "," +
            bool_str(r.holds_reciprocal) + "\n";
    rhs = 1.0 + r.commutator_abs / (2.0 * r.std_a * r.std_b);
    if (!r.holds_additive || !r.holds_reciprocal) physics_failure = true;
    if (noise_ratio < r.floor - 1e-7) physics_failure = true;
  }

  // Reciprocal-form equality curve: (x + 1)(y + 1) = rhs.
  std::string frontier = "dn_a_over_da,dd_b_over_db\n";
  for (int i = 0; i <= 300; ++i) {
    const double x = 3.0 * i / 300.0;
    const double y = rhs / (x + 1.0) - 1.0;
    if (y < 0.0) break;
    frontier += fmt17(x) + "," + fmt17(y) + "\n";
  }

  std::string floors = "xi,noise_floor\n";
  const double cv2 =
      sweep.records.empty() ? 4.0 : sweep.records.front().cv_squared;
  for (double xi : xi_values)
    floors += fmt17(xi) + "," + fmt17(noise_floor(xi, cv2)) + "\n";

  write_file(dir / "ndr.csv", body);
  write_file(dir / "ndr_frontier.csv", frontier);
  write_file(dir / "ndr_floors.csv", floors);
  write_manifest(dir, "ndr", config,
                 {"ndr.csv", "ndr_frontier.csv", "ndr_floors.csv"});

  std::cout << sweep.records.size() << " records written to "
            << (dir / "ndr.csv").string() << "\n";
  return physics_failure ? kExitPhysics : kExitOk;
}

io::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::SchemaError(path, "cannot open file");
  io::json j;
  try {
    in >> j;
  } catch (const io::json::parse_error& e) {
    throw io::SchemaError(path, e.what());
  }
  return j;
}

int cmd_verify(const std::string& scheme_path, const std::string& state_path,
               CommonFlags& flags) {
  MeasurementScheme scheme = io::scheme_from_json(load_json(scheme_path));
  DensityOperator rho_s =
      io::density_from_json(load_json(state_path), "state");

  bool ok = true;
  auto report_line = [&](const std::string& name, const std::string& value,
                         bool passed) {
    std::cout << (passed ? "[ok]   " : "[FAIL] ") << name << " = " << value
              << "\n";
    ok = ok && passed;
  };

  try {
    TurReport report = tur_bound(scheme, rho_s, flags.unbias_tol,
                                 flags.reg_tol);
    report_line("unbiasedness_residual", fmt17(report.residual),
                report.residual <= flags.unbias_tol);
    std::cout << "       dN2 = " << fmt17(report.var_n)
              << ", dA2 = " << fmt17(report.var_a)
              << ", <A> = " << fmt17(report.mean_a) << "\n";
    std::cout << "       xi = " << fmt_xi(report.xi) << " (selected l = ["
              << report.selected_l.k << "," << report.selected_l.j << ","
              << report.selected_l.m << "])\n";
    report_line("bound lhs >= rhs",
                fmt17(report.lhs) + " >= " + fmt17(report.rhs),
                report.satisfied);
    const double scale = 1.0 + report.meter.variance;
    report_line("variance_decomposition_residual",
                fmt17(report.decomposition_error),
                report.decomposition_error <= 1e-9 * scale);

    PurifyReport purified =
        purify_and_verify(kraus_from_scheme(scheme), rho_s);
    report_line("purified_meter_mean_error", fmt17(purified.mean_error), true);
    report_line("purified_meter_variance_error",
                fmt17(purified.variance_error), true);
    report_line("purified_state_error", fmt17(purified.state_error), true);
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency check failed: " << e.what() << "\n";
    return kExitPhysics;
  }
  return ok ? kExitOk : kExitPhysics;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indirect-measurement scheme construction and verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags sweep_flags, tradeoff_flags, ndr_flags, verify_flags;

  CLI::App* sweep = app.add_subcommand(
      "random-sweep", "Random schemes across dimensions, trade-off bound");
  add_common_flags(sweep, sweep_flags, 1000);

  CLI::App* tradeoff = app.add_subcommand(
      "qubit-tradeoff", "Optimized qubit schemes at fixed target and state");
  add_common_flags(tradeoff, tradeoff_flags, 100);

  CLI::App* ndr = app.add_subcommand(
      "ndr", "Noise-disturbance records for optimized qubit schemes");
  add_common_flags(ndr, ndr_flags, 100);
  std::vector<double> xi_values;
  std::string b_name = "sigma_x";
  ndr->add_option("--xi", xi_values, "Survival activities for floor lines");
  ndr->add_option("--b", b_name, "Incompatible observable")
      ->check(CLI::IsMember({"sigma_x", "sigma_y", "sigma_z"}));

  CLI::App* verify = app.add_subcommand(
      "verify", "Audit one scheme file against one state file");
  std::string scheme_path, state_path;
  verify->add_option("scheme", scheme_path, "Scheme JSON file")->required();
  verify->add_option("state", state_path, "Density operator JSON file")
      ->required();
  add_common_flags(verify, verify_flags, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sweep->parsed()) return cmd_random_sweep(sweep_flags, sweep);
    if (tradeoff->parsed()) return cmd_qubit_tradeoff(tradeoff_flags, tradeoff);
    if (ndr->parsed()) return cmd_ndr(ndr_flags, ndr, xi_values, b_name);
    if (verify->parsed())
      return cmd_verify(scheme_path, state_path, verify_flags);
  } catch (const io::SchemaError& e) {
    std::cerr << "schema error at " << e.path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPhysics;
  }
  return kExitUsage;
}
