#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cqr/csv.hpp"
#include "cqr/error.hpp"
#include "cqr/estimator.hpp"
#include "cqr/inference.hpp"
#include "cqr/simulation.hpp"
#include "report.hpp"

namespace cqreg {
namespace {

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t thread_count() {
  const char* env = std::getenv("CQREG_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  std::size_t value = 0;
  const std::string text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("CQREG_THREADS must be a non-negative integer, got '" + text + "'");
  return value;
}

cqr::CsvTable read_input(const std::string& path, Streams& io) {
  if (path == "-") return cqr::read_csv(io.in);
  return cqr::read_csv_file(path);
}

void write_text(const std::string& path, const std::string& text, Streams& io) {
  if (path.empty() || path == "-") {
    io.out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw UsageError("failed writing '" + path + "'");
}

Metadata metadata_for(const std::string& input, const cqr::Dataset& data) {
  Metadata meta;
  meta.input = input;
  meta.n = data.n();
  meta.p = data.p();
  meta.covariates = data.covariate_names();
  return meta;
}

std::string process_csv(const cqr::QuantileProcess& process, const cqr::Dataset& data) {
  std::ostringstream os;
  os << std::setprecision(17) << "tau_lo,tau_hi,flag";
  for (const auto& name : data.covariate_names()) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < process.segment_count(); ++k) {
    os << process.breakpoints()[k] << ',' << process.segment_end(k) << ',' << cqr::to_string(process.flags()[k]);
    const auto& b = process.coefficients()[k];
    for (Eigen::Index j = 0; j < b.size(); ++j) os << ',' << b[j];
    os << '\n';
  }
  return os.str();
}

struct FitArgs {
  std::string input;
  bool log_time = false;
  double tau_max = 0.0;
  std::string output;
  std::string process_csv;
};

int cmd_fit(const FitArgs& a, Streams& io) {
  const cqr::Dataset data = cqr::load_dataset(read_input(a.input, io), a.log_time);
  cqr::FitConfig config;
  config.tau_max = a.tau_max;
  const cqr::QuantileProcess process = cqr::fit(data, config);
  json doc{{"metadata", metadata_json(metadata_for(a.input, data))}, {"process", process_json(process)}};
  write_text(a.output, dump(doc), io);
  if (!a.process_csv.empty()) write_text(a.process_csv, process_csv(process, data), io);
  return kExitOk;
}

struct SeArgs {
  std::string input;
  std::vector<double> taus;
  std::size_t boot = 200;
  std::uint64_t seed = 1;
  std::vector<double> trim;
  std::string output;
  bool log_time = false;
};

int cmd_se(const SeArgs& a, Streams& io) {
  if (a.boot < 2) throw UsageError("--boot must be at least 2");
  if (!a.trim.empty() && a.trim.size() != 2) throw UsageError("--trim takes two values, tau1,tau2");
  const cqr::Dataset data = cqr::load_dataset(read_input(a.input, io), a.log_time);
  const cqr::QuantileProcess process = cqr::fit(data);

  cqr::BootstrapOptions options;
  options.replicates = a.boot;
  options.seed = a.seed;
  options.threads = thread_count();
  if (!a.trim.empty()) options.trim = std::make_pair(a.trim[0], a.trim[1]);
  const cqr::BootstrapSummary summary = cqr::bootstrap(data, process, a.taus, options);

  Metadata meta = metadata_for(a.input, data);
  meta.seed = a.seed;
  json doc{{"metadata", metadata_json(meta)},
           {"process", process_json(process)},
           {"bootstrap", bootstrap_json(summary)}};
  if (summary.trimmed) doc["trimmed"] = trimmed_json(*summary.trimmed);
  write_text(a.output, dump(doc), io);
  return kExitOk;
}

struct SimulateArgs {
  int scenario = 2;
  std::size_t n = 200;
  std::size_t reps = 200;
  std::size_t boot = 200;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a, Streams& io) {
  if (a.reps < 2) throw UsageError("--reps must be at least 2");
  if (a.boot == 1) throw UsageError("--boot must be 0 (no standard errors) or at least 2");
  if (a.n < 2) throw UsageError("--n must be at least 2");
  cqr::MonteCarloOptions options;
  options.n = a.n;
  options.reps = a.reps;
  options.boot = a.boot;
  options.seed = a.seed;
  options.threads = thread_count();
  const cqr::MonteCarloReport report = cqr::run_monte_carlo(cqr::Scenario::make(a.scenario), options);
  const json doc = monte_carlo_json(report);
  write_text(a.output, dump(doc), io);
  if (!a.output.empty() && a.output != "-") io.out << doc["table"].get<std::string>();
  return kExitOk;
}

struct KmArgs {
  std::string input;
  std::string output;
};

int cmd_km(const KmArgs& a, Streams& io) {
  const cqr::Dataset data = cqr::load_dataset(read_input(a.input, io));
  json doc{{"metadata", metadata_json(metadata_for(a.input, data))}};
  doc.update(km_json(data));
  write_text(a.output, dump(doc), io);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"Censored quantile regression: full coefficient process, bootstrap inference, simulation", "cqreg"};
  app.set_version_flag("--version", std::string(CQREG_VERSION));
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit the quantile coefficient process");
  fit->add_option("--input", fit_args.input, "CSV with columns time,status,covariates... ('-' for stdin)")->required();
  fit->add_flag("--log-time", fit_args.log_time, "Replace times by their natural logarithm");
  fit->add_option("--tau-max", fit_args.tau_max, "Upper limit of the estimated range (default 1 - 1/n)");
  fit->add_option("--output", fit_args.output, "JSON output path (default stdout)");
  fit->add_option("--process-csv", fit_args.process_csv, "Also write the process as CSV rows for plotting");

  SeArgs se_args;
  auto* se = app.add_subcommand("se", "Multiplier-bootstrap standard errors and Wald intervals");
  se->add_option("--input", se_args.input, "CSV input ('-' for stdin)")->required();
  se->add_flag("--log-time", se_args.log_time, "Replace times by their natural logarithm");
  se->add_option("--taus", se_args.taus, "Comma-separated probabilities")->required()->delimiter(',');
  se->add_option("--boot", se_args.boot, "Bootstrap replicates")->capture_default_str();
  se->add_option("--seed", se_args.seed, "Random seed")->capture_default_str();
  se->add_option("--trim", se_args.trim, "Trimmed-mean effect range tau1,tau2")->delimiter(',');
  se->add_option("--output", se_args.output, "JSON output path (default stdout)");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of a simulation scenario");
  sim->add_option("--scenario", sim_args.scenario, "Scenario 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  sim->add_option("--n", sim_args.n, "Sample size")->capture_default_str();
  sim->add_option("--reps", sim_args.reps, "Monte Carlo replicates")->capture_default_str();
  sim->add_option("--boot", sim_args.boot, "Bootstrap replicates per sample (0 skips SE)")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
  sim->add_option("--output", sim_args.output, "JSON output path (default stdout)");

  KmArgs km_args;
  auto* km = app.add_subcommand("km", "Kaplan-Meier estimate, Nelson-Aalen increments and quantiles");
  km->add_option("--input", km_args.input, "CSV with columns time,status ('-' for stdin)")->required();
  km->add_option("--output", km_args.output, "JSON output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*fit) return cmd_fit(fit_args, io);
    if (*se) return cmd_se(se_args, io);
    if (*sim) return cmd_simulate(sim_args, io);
    if (*km) return cmd_km(km_args, io);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const cqr::Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == cqr::ErrorCode::TooManyFailures) return kExitInternal;
    return e.is_data_error() ? kExitUser : kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace cqreg
