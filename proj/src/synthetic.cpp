#include "zvmcmc/synthetic.hpp"

#include "zvmcmc/normal.hpp"
#include "zvmcmc/rng.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace zv::synthetic {
namespace {

// Class-conditional (mean, sd) of length, left, right, bottom.
constexpr std::array<std::array<double, 2>, 4> kGenuine{{{214.97, 0.38}, {129.94, 0.36}, {129.72, 0.40}, {8.31, 0.64}}};
constexpr std::array<std::array<double, 2>, 4> kForged{{{214.82, 0.35}, {130.30, 0.26}, {130.19, 0.29}, {10.53, 1.13}}};
constexpr std::array<double, 4> kLinkCoefficients{-1.22, 0.95, 0.98, 1.14};

// Days since 1970-01-01 to (y, m, d); proleptic Gregorian calendar.
std::array<int, 3> civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const long doe = z - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = yoe + era * 400;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  const long d = doy - (153 * mp + 2) / 5 + 1;
  const long m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace

BinaryRegressionData banknote(std::uint64_t seed, bool add_intercept) {
  Rng rng(seed);
  constexpr int kPerClass = 100;
  const int offset = add_intercept ? 1 : 0;
  BinaryRegressionData data;
  data.design.resize(2 * kPerClass, 4 + offset);
  data.response.resize(2 * kPerClass);
  for (int i = 0; i < 2 * kPerClass; ++i) {
    const auto& cls = i < kPerClass ? kGenuine : kForged;
    double eta = 0.0;
    if (add_intercept) data.design(i, 0) = 1.0;
    for (int j = 0; j < 4; ++j) {
      // two decimals, like the published measurements
      const double raw = cls[j][0] + cls[j][1] * rng.normal();
      const double x = std::round(raw * 100.0) / 100.0;
      data.design(i, j + offset) = x;
      eta += kLinkCoefficients[j] * x;
    }
    data.response(i) = rng.uniform() < normal::cdf(eta) ? 1 : 0;
  }
  data.validate();
  return data;
}

PriceSeries exchange_rate(std::uint64_t seed, int days) {
  if (days < 3) throw SetupError("exchange_rate: need at least 3 days");
  Rng rng(seed);
  const double omega1 = 1.2e-6, omega2 = 0.12, omega3 = 0.82;
  PriceSeries series;
  series.prices.resize(days);
  double price = 2.95;
  double h = omega1 / (1.0 - omega2 - omega3);
  double previous_r = 0.0;
  long day = 5480;  // 1985-01-02
  for (int t = 0; t < days; ++t) {
    while (true) {
      const long weekday = (day + 4) % 7;  // 0 = Sunday
      if (weekday != 0 && weekday != 6) break;
      ++day;
    }
    const auto ymd = civil_from_days(day);
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%04d-%02d-%02d", ymd[0], ymd[1], ymd[2]);
    series.dates.emplace_back(buffer);
    if (t > 0) {
      h = omega1 + omega3 * h + omega2 * previous_r * previous_r;
      previous_r = std::sqrt(h) * rng.normal();
      price *= 1.0 + previous_r;
    }
    series.prices(t) = std::round(price * 1e5) / 1e5;
    ++day;
  }
  return series;
}

void write_banknote_csv(const BinaryRegressionData& data, const std::filesystem::path& path) {
  std::ostringstream os;
  const auto d = data.regressors();
  const auto first = d - 4;
  static constexpr const char* kNames[] = {"length", "left", "right", "bottom"};
  for (Eigen::Index j = first; j < d; ++j) os << kNames[j - first] << ',';
  os << "y\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.observations(); ++i) {
    for (Eigen::Index j = first; j < d; ++j) os << data.design(i, j) << ',';
    os << data.response(i) << '\n';
  }
  write_text_file(path, os.str());
}

void write_price_csv(const PriceSeries& series, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "date,price\n" << std::setprecision(17);
  for (std::size_t t = 0; t < series.dates.size(); ++t)
    os << series.dates[t] << ',' << series.prices(static_cast<Eigen::Index>(t)) << '\n';
  write_text_file(path, os.str());
}

}  // namespace zv::synthetic
