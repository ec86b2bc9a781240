#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "patt/errors.hpp"
#include "patt/rng.hpp"

namespace patt {

enum class feature_kind { continuous, binary };

/*
 * Labeled dataset for the logistic-regression target. Labels are stored as
 * -1/+1. The pipeline flags record which stages already ran; stages refuse to
 * run twice, and normalization must precede interaction features (engineered
 * columns are treated as continuous but never re-normalized).
 */
struct dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<feature_kind> kinds;
  std::vector<std::string> feature_names;
  std::vector<std::string> notes;  // e.g. auto-detected binary columns
  bool normalized = false;
  bool engineered = false;
  bool has_intercept = false;
};

namespace detail {

inline double parse_number(const std::string& tok, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw io_error("csv: cannot parse '" + tok + "' as a number (row " + std::to_string(row) +
                   ", column '" + col + "')");
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) {
    // Trim surrounding whitespace; quoting is not supported for numeric data.
    const auto b = tok.find_first_not_of(" \t\r");
    const auto e = tok.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : tok.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/*
 * Load a headered CSV with one label column; every other column is a feature.
 * Labels must take exactly two values from {-1, 0, 1} (0/1 is mapped to
 * -1/+1). Feature kinds are auto-detected: a column with exactly two distinct
 * values is binary (noted), anything else continuous.
 */
inline dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw io_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error("csv: '" + path + "' is empty");
  const std::vector<std::string> header = detail::split_csv_line(line);
  std::ptrdiff_t label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = static_cast<std::ptrdiff_t>(j);
  if (label_idx < 0) throw usage_error("csv: label column '" + label_column + "' not found");
  const std::size_t n_cols = header.size();
  if (n_cols < 2) throw usage_error("csv: need at least one feature column");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> toks = detail::split_csv_line(line);
    if (toks.size() != n_cols)
      throw io_error("csv: row " + std::to_string(line_no) + " has " + std::to_string(toks.size()) +
                     " fields, expected " + std::to_string(n_cols));
    std::vector<double> vals(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) vals[j] = detail::parse_number(toks[j], line_no, header[j]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw usage_error("csv: '" + path + "' has no data rows");

  dataset ds;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(n_cols - 1);
  ds.X.resize(n, d);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index jj = 0;
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (static_cast<std::ptrdiff_t>(j) == label_idx)
        ds.y(i) = rows[static_cast<std::size_t>(i)][j];
      else
        ds.X(i, jj++) = rows[static_cast<std::size_t>(i)][j];
    }
  }
  for (std::size_t j = 0; j < n_cols; ++j)
    if (static_cast<std::ptrdiff_t>(j) != label_idx) ds.feature_names.push_back(header[j]);

  std::set<double> label_values(ds.y.data(), ds.y.data() + ds.y.size());
  if (label_values == std::set<double>{0.0, 1.0}) {
    for (Eigen::Index i = 0; i < n; ++i) ds.y(i) = ds.y(i) == 0.0 ? -1.0 : 1.0;
  } else if (label_values != std::set<double>{-1.0, 1.0}) {
    throw usage_error("csv: labels must take the two values 0/1 or -1/+1");
  }

  ds.kinds.resize(static_cast<std::size_t>(d), feature_kind::continuous);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < n && distinct.size() <= 2; ++i) distinct.insert(ds.X(i, j));
    if (distinct.size() == 2) {
      ds.kinds[static_cast<std::size_t>(j)] = feature_kind::binary;
      ds.notes.push_back("feature '" + ds.feature_names[static_cast<std::size_t>(j)] +
                         "' auto-detected as binary");
    }
  }
  return ds;
}

/*
 * Standardize continuous features to sample mean 0 and variance 1 (divisor
 * n - 1); remap binary features onto {0, 1} (smaller observed value -> 0) and
 * leave them out of standardization. Zero-variance continuous features are a
 * data error.
 */
inline void normalize_features(dataset& ds) {
  if (ds.normalized) throw usage_error("normalize_features: already normalized");
  if (ds.engineered || ds.has_intercept)
    throw usage_error("normalize_features: must run before interaction/intercept stages");
  const Eigen::Index n = ds.X.rows();
  if (n < 2) throw usage_error("normalize_features: need at least two rows");
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
    auto col = ds.X.col(j);
    if (ds.kinds[static_cast<std::size_t>(j)] == feature_kind::binary) {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      if (lo == hi) throw usage_error("normalize_features: binary feature '" +
                                      ds.feature_names[static_cast<std::size_t>(j)] +
                                      "' has a single value");
      for (Eigen::Index i = 0; i < n; ++i) col(i) = col(i) == lo ? 0.0 : 1.0;
    } else {
      const double mu = col.mean();
      const double var = (col.array() - mu).square().sum() / static_cast<double>(n - 1);
      if (!(var > 0.0))
        throw usage_error("normalize_features: zero-variance continuous feature '" +
                          ds.feature_names[static_cast<std::size_t>(j)] + "'");
      col = (col.array() - mu) / std::sqrt(var);
    }
  }
  ds.normalized = true;
}

/*
 * Append all pairwise interaction columns x_i * x_j for i <= j, in row-major
 * pair order, after the original features. Engineered columns count as
 * continuous but are never re-normalized.
 */
inline void add_interactions(dataset& ds) {
  if (ds.engineered) throw usage_error("add_interactions: already added");
  if (ds.has_intercept) throw usage_error("add_interactions: must run before the intercept");
  const Eigen::Index d = ds.X.cols();
  const Eigen::Index extra = d * (d + 1) / 2;
  Eigen::MatrixXd out(ds.X.rows(), d + extra);
  out.leftCols(d) = ds.X;
  Eigen::Index k = d;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j, ++k) {
      out.col(k) = ds.X.col(i).cwiseProduct(ds.X.col(j));
      ds.feature_names.push_back(ds.feature_names[static_cast<std::size_t>(i)] + "*" +
                                 ds.feature_names[static_cast<std::size_t>(j)]);
      ds.kinds.push_back(feature_kind::continuous);
    }
  ds.X = std::move(out);
  ds.engineered = true;
}

/* Append the constant intercept column, always the last column. */
inline void add_intercept(dataset& ds) {
  if (ds.has_intercept) throw usage_error("add_intercept: already added");
  ds.X.conservativeResize(Eigen::NoChange, ds.X.cols() + 1);
  ds.X.col(ds.X.cols() - 1).setOnes();
  ds.feature_names.emplace_back("intercept");
  ds.kinds.push_back(feature_kind::continuous);
  ds.has_intercept = true;
}

/*
 * Synthetic logistic-regression data: standard-normal features, a
 * standard-normal weight vector, labels +1 with probability
 * 1/(1+exp(-<a_i, w>)). Symmetric by construction, so label balance
 * concentrates near 1/2.
 */
inline dataset synthesize_logistic_data(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  if (n < 2 || d < 1) throw usage_error("synthesize_logistic_data: need n >= 2, d >= 1");
  rng_stream rng(seed, 0xDA7AULL);
  dataset ds;
  ds.X.resize(n, d);
  ds.y.resize(n);
  Eigen::VectorXd w = rng.normal_vector(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = rng.normal();
    const double z = ds.X.row(i) * w;
    const double p1 = 1.0 / (1.0 + std::exp(-z));
    ds.y(i) = rng.uniform01() <= p1 ? 1.0 : -1.0;
  }
  ds.kinds.assign(static_cast<std::size_t>(d), feature_kind::continuous);
  for (Eigen::Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

}  // namespace patt
