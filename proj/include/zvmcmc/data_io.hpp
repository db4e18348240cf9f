#pragma once

#include "zvmcmc/diagnostics.hpp"
#include "zvmcmc/models.hpp"
#include "zvmcmc/samplers.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zv {

/// Exchange-rate (or any positive price) series S(0..T).
struct PriceSeries {
  std::vector<std::string> dates;
  Vector prices;
};

/// Reads a CSV with a header row. The column named `y` is the 0/1 response;
/// the regressors are `columns` if given, otherwise every other column in file
/// order. Throws LoadError with the offending row/column.
BinaryRegressionData load_design_matrix(const std::filesystem::path& path, bool add_intercept,
                                        const std::vector<std::string>& columns = {});

/// Reads `date,price` CSV rows (header required, dates strictly increasing).
PriceSeries load_price_series(const std::filesystem::path& path);

/// Simple returns (S(t) - S(t-1)) / S(t-1); h0 is the sample variance of the
/// returns.
ReturnsSeries prices_to_returns(const PriceSeries& series);

/// `iter,beta_1..beta_d,grad_1..grad_d` with 17 significant digits.
void export_chain(const ChainOutput& chain, const std::filesystem::path& path);
ChainOutput import_chain(const std::filesystem::path& path);

struct DegreeSummary {
  int degree = 0;
  double zv_mean = 0.0;
  RatioReport ratio;
  /// Median over replications of asvar(f) / asvar(f~) on the evaluation chain.
  double batch_means_ratio = 0.0;
  /// Fraction of replications whose ZV estimate lies in the reference interval.
  std::optional<double> coverage;
};

struct ParameterSummary {
  std::string label;
  double ordinary_mean = 0.0;
  double ordinary_variance = 0.0;
  std::optional<double> reference_point;
  std::optional<double> reference_lo;
  std::optional<double> reference_hi;
  std::optional<double> ordinary_coverage;
  std::vector<DegreeSummary> degrees;
};

struct ReplicationRecord {
  int index = 0;
  std::uint64_t fit_seed = 0;
  std::uint64_t eval_seed = 0;
  bool ok = true;
  std::string error;
  double fit_accept_rate = 1.0;
  double eval_accept_rate = 1.0;
  Vector ordinary;
  std::map<int, Vector> zv;
  std::map<int, Vector> asvar_ratio;  // batch-means asvar(f) / asvar(f~) per parameter
  std::map<int, bool> ridge_applied;
  // timing (excluded from determinism comparisons)
  double ordinary_seconds = 0.0;
  std::map<int, double> zv_seconds;
};

struct StudyReport {
  nlohmann::json config;
  std::string model;
  std::string sampler;
  std::string evaluation_sampler;
  std::string protocol;
  std::vector<std::string> parameters;
  std::vector<int> degrees;
  std::vector<ReplicationRecord> replications;
  std::vector<ParameterSummary> summary;
  std::optional<std::size_t> reference_length;
  double pilot_accept_rate = std::numeric_limits<double>::quiet_NaN();
  bool partial = false;
  std::vector<std::string> notes;
};

/// JSON document; wall-clock values are confined to the top-level `timing` key.
nlohmann::json study_to_json(const StudyReport& report);

/// One row per replication x parameter x method.
std::string study_to_csv(const StudyReport& report);

/// Writes study.json and study.csv into `directory` (created if needed).
void export_study(const StudyReport& report, const std::filesystem::path& directory);

/// Encodes a double for JSON: non-finite values become "inf"/"-inf"/"nan" strings.
nlohmann::json encode_number(double value);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace zv
