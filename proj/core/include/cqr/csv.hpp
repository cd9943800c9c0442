#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cqr/model.hpp"

namespace cqr {

/// Parsed numeric table: header names plus one row of doubles per record.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a comma-separated table with a mandatory header row. Blank lines are
/// skipped; every other line must parse as numbers with the header's arity.
/// Throws Error{MalformedRow}.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Builds a Dataset from records laid out as (time, status, z1, ..., z_{p-1}).
/// The intercept column is prepended; input order is preserved. With
/// `log_time` the time column is replaced by its natural log (times must be
/// positive). Throws Error{MalformedRow} or Error{SingularDesign}.
Dataset load_dataset(const std::vector<std::vector<double>>& rows,
                     std::vector<std::string> covariate_names = {}, bool log_time = false);
Dataset load_dataset(const CsvTable& table, bool log_time = false);

}  // namespace cqr
