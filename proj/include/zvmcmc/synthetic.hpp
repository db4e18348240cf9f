#pragma once

#include "zvmcmc/data_io.hpp"
#include "zvmcmc/models.hpp"

#include <cstdint>

namespace zv::synthetic {

/// Banknote-like data: 100 "genuine" and 100 "counterfeit" rows of
/// (length, left, right, bottom) drawn from class-conditional normals with
/// realistic means and spreads, and responses drawn from a probit link so the
/// classes overlap and the flat-prior posterior is proper.
BinaryRegressionData banknote(std::uint64_t seed, bool add_intercept = false);

/// GARCH(1,1)-driven exchange-rate path of `days` business days starting
/// 1985-01-02, with daily relative-return variance around 2e-5.
PriceSeries exchange_rate(std::uint64_t seed, int days = 751);

/// Writes `banknote` as CSV (`length,left,right,bottom,y`).
void write_banknote_csv(const BinaryRegressionData& data, const std::filesystem::path& path);

/// Writes a price series as `date,price`.
void write_price_csv(const PriceSeries& series, const std::filesystem::path& path);

}  // namespace zv::synthetic
