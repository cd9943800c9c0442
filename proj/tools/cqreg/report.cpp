#include "report.hpp"

#include <sstream>

#include "cqr/error.hpp"
#include "cqr/oracles.hpp"

namespace cqreg {

json vector_json(const cqr::Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

cqr::Vector vector_from_json(const json& j) {
  cqr::Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

json metadata_json(const Metadata& meta) {
  json names = meta.covariates;
  return json{{"input", meta.input},
              {"n", meta.n},
              {"p", meta.p},
              {"seed", meta.seed ? json(*meta.seed) : json(nullptr)},
              {"coefficients", names},
              {"version", CQREG_VERSION}};
}

json process_json(const cqr::QuantileProcess& process) {
  json coefficients = json::array();
  for (const auto& b : process.coefficients()) coefficients.push_back(vector_json(b));
  json flags = json::array();
  for (auto f : process.flags()) flags.push_back(cqr::to_string(f));
  return json{{"breakpoints", process.breakpoints()},
              {"coefficients", coefficients},
              {"tau_end", process.tau_end()},
              {"flags", flags}};
}

cqr::QuantileProcess process_from_json(const json& j) {
  std::vector<cqr::Vector> coefficients;
  for (const auto& b : j.at("coefficients")) coefficients.push_back(vector_from_json(b));
  return cqr::QuantileProcess(j.at("breakpoints").get<std::vector<double>>(), std::move(coefficients),
                              j.at("tau_end").get<double>());
}

namespace {

json interval_json(const cqr::IntervalSummary& s) {
  json out{{"estimate", vector_json(s.point)},
           {"se", vector_json(s.se)},
           {"ci_lower", vector_json(s.lower)},
           {"ci_upper", vector_json(s.upper)},
           {"included", s.draws.rows()},
           {"excluded", s.excluded}};
  if (s.pct_lower.size() > 0) {
    out["percentile_lower"] = vector_json(s.pct_lower);
    out["percentile_upper"] = vector_json(s.pct_upper);
  }
  return out;
}

}  // namespace

json bootstrap_json(const cqr::BootstrapSummary& summary) {
  json at = json::array();
  for (std::size_t t = 0; t < summary.taus.size(); ++t) {
    json row = interval_json(summary.at[t]);
    row["tau"] = summary.taus[t];
    at.push_back(std::move(row));
  }
  return json{{"replicates", summary.replicates},
              {"failed_fits", summary.failed_fits},
              {"multiplier", "exponential"},
              {"wald_z", cqr::kWaldZ},
              {"taus", summary.taus},
              {"estimates", at}};
}

json trimmed_json(const cqr::TrimmedSummary& trimmed) {
  json out = interval_json(trimmed.estimate);
  out["tau1"] = trimmed.tau1;
  out["tau2"] = trimmed.tau2;
  return out;
}

json monte_carlo_json(const cqr::MonteCarloReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back(json{{"tau", c.tau},
                         {"component", c.component},
                         {"truth", c.truth},
                         {"replicates", c.replicates},
                         {"bias", c.bias},
                         {"sd", c.sd},
                         {"median_bias", c.median_bias},
                         {"mean_se", std::isnan(c.mean_se) ? json(nullptr) : json(c.mean_se)},
                         {"coverage", std::isnan(c.coverage) ? json(nullptr) : json(c.coverage)}});
  }
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back(json{{"replicate", f.replicate}, {"reason", f.reason}});
  std::ostringstream table;
  cqr::write_table(table, report);
  return json{{"scenario", report.scenario},
              {"n", report.options.n},
              {"reps", report.options.reps},
              {"boot", report.options.boot},
              {"seed", report.options.seed},
              {"taus", report.options.taus},
              {"completed", report.completed},
              {"failures", failures},
              {"censoring_rate", {{"mean", report.censoring_mean},
                                  {"min", report.censoring_min},
                                  {"max", report.censoring_max}}},
              {"banner", report.banner.empty() ? json(nullptr) : json(report.banner)},
              {"cells", cells},
              {"table", table.str()}};
}

json km_json(const cqr::Dataset& data) {
  if (data.p() != 1)
    throw cqr::Error(cqr::ErrorCode::InvalidArgument, "km takes time and status columns only; found " +
                                                          std::to_string(data.p() - 1) + " covariate column(s)");
  const cqr::StepFunction cdf = cqr::oracles::kaplan_meier(data);
  const cqr::StepFunction hazard = cqr::oracles::nelson_aalen(data);
  const double last = data.times().maxCoeff();

  std::vector<double> levels{0.0};
  for (double v : cdf.values())
    if (v < 1.0 && v > levels.back()) levels.push_back(v);
  std::vector<double> quantiles;
  for (double tau : levels) quantiles.push_back(cqr::oracles::km_inverse(cdf, tau, &last));

  return json{{"kaplan_meier", {{"times", cdf.jump_points()}, {"cdf", cdf.values()}}},
              {"nelson_aalen",
               {{"times", hazard.jump_points()},
                {"increments", cqr::oracles::nelson_aalen_increments(data)},
                {"cumulative", hazard.values()}}},
              {"inverse", {{"breakpoints", levels}, {"quantiles", quantiles}}}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace cqreg
