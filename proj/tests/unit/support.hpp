#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cqr/csv.hpp"
#include "cqr/model.hpp"

namespace testing_support {

using Rows = std::vector<std::vector<double>>;

inline cqr::Dataset one_sample(const std::vector<double>& x, const std::vector<int>& delta) {
  Rows rows;
  for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({x[i], static_cast<double>(delta[i])});
  return cqr::load_dataset(rows);
}

/// Censored linear model with uniform covariates: log-scale errors are
/// standard normal, censoring uniform on [-1, censor_span - 1].
inline Rows censored_rows(std::mt19937_64& rng, std::size_t n, std::size_t p, double censor_span,
                          bool integer_times = false) {
  std::normal_distribution<> noise;
  std::uniform_real_distribution<> unif;
  Rows rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row{0.0, 1.0};
    double t = noise(rng);
    for (std::size_t k = 1; k < p; ++k) {
      const double z = unif(rng);
      row.push_back(z);
      t += (k % 2 == 1 ? 1.0 : -0.5) * z;
    }
    const double c = censor_span > 0.0 ? censor_span * unif(rng) - 1.0 : INFINITY;
    if (integer_times) t = std::round(2.0 * t) / 2.0;
    row[0] = std::min(t, c);
    row[1] = t <= c ? 1.0 : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace testing_support
