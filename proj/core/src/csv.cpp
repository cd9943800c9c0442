#include "cqr/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "cqr/error.hpp"

namespace cqr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": '" + std::string(field) + "' is not a number");
  }
  return value;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto fields = split(view);
    if (!have_header) {
      for (auto f : fields) table.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(table.header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::MalformedRow, "input is empty; a header row is required");
  if (table.header.size() < 2)
    throw Error(ErrorCode::MalformedRow, "header must name at least the time and status columns");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedRow, "cannot open '" + path + "'");
  return read_csv(in);
}

Dataset load_dataset(const std::vector<std::vector<double>>& rows, std::vector<std::string> covariate_names,
                     bool log_time) {
  if (rows.empty()) throw Error(ErrorCode::MalformedRow, "no data rows");
  const auto arity = rows.front().size();
  if (arity < 2) throw Error(ErrorCode::MalformedRow, "rows need at least time and status");
  std::vector<Observation> observations;
  observations.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto where = "row " + std::to_string(r + 1);
    if (row.size() != arity) throw Error(ErrorCode::MalformedRow, where + " has wrong arity");
    double time = row[0];
    if (!std::isfinite(time)) throw Error(ErrorCode::MalformedRow, where + ": time is not finite");
    if (log_time) {
      if (!(time > 0.0)) throw Error(ErrorCode::MalformedRow, where + ": --log-time needs positive times");
      time = std::log(time);
    }
    if (row[1] != 0.0 && row[1] != 1.0) throw Error(ErrorCode::MalformedRow, where + ": status must be 0 or 1");
    Observation obs;
    obs.x = time;
    obs.delta = static_cast<int>(row[1]);
    obs.z.resize(static_cast<Eigen::Index>(arity - 1));
    obs.z[0] = 1.0;
    for (std::size_t k = 2; k < arity; ++k) obs.z[static_cast<Eigen::Index>(k - 1)] = row[k];
    observations.push_back(std::move(obs));
  }
  return Dataset(observations, std::move(covariate_names));
}

Dataset load_dataset(const CsvTable& table, bool log_time) {
  std::vector<std::string> names;
  for (std::size_t k = 2; k < table.header.size(); ++k) names.push_back(table.header[k]);
  return load_dataset(table.rows, std::move(names), log_time);
}

}  // namespace cqr
