#include "zvmcmc/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace zv {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string location(const fs::path& path, std::size_t line, std::string_view column = {}) {
  std::ostringstream os;
  os << path.string() << ":" << line;
  if (!column.empty()) os << " (column '" << column << "')";
  return os.str();
}

bool parse_double(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  const char* begin = cell.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(value);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream os;
      os << location(path, line_no) << ": expected " << table.header.size() << " cells, found " << cells.size();
      throw LoadError(os.str());
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw LoadError(path.string() + ": empty file (header row required)");
  return table;
}

std::string format_double(double value) {
  std::ostringstream os;
  os << std::setprecision(17) << value;
  return os.str();
}

}  // namespace

BinaryRegressionData load_design_matrix(const fs::path& path, bool add_intercept,
                                        const std::vector<std::string>& columns) {
  const CsvTable table = read_csv(path);
  const auto find_column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw LoadError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t y_col = find_column("y");
  std::vector<std::size_t> x_cols;
  if (columns.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (c != y_col) x_cols.push_back(c);
  } else {
    for (const auto& name : columns) x_cols.push_back(find_column(name));
  }
  if (x_cols.empty()) throw LoadError(path.string() + ": no regressor columns");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto offset = add_intercept ? 1 : 0;
  BinaryRegressionData data;
  data.design.resize(n, static_cast<Eigen::Index>(x_cols.size()) + offset);
  data.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const auto line = table.line_numbers[static_cast<std::size_t>(i)];
    double y = 0;
    if (!parse_double(row[y_col], y) || (y != 0.0 && y != 1.0))
      throw LoadError(location(path, line, "y") + ": response '" + row[y_col] + "' is not 0 or 1");
    data.response(i) = static_cast<int>(y);
    if (add_intercept) data.design(i, 0) = 1.0;
    for (std::size_t c = 0; c < x_cols.size(); ++c) {
      double v = 0;
      if (!parse_double(row[x_cols[c]], v))
        throw LoadError(location(path, line, table.header[x_cols[c]]) + ": non-numeric value '" + row[x_cols[c]] + "'");
      data.design(i, static_cast<Eigen::Index>(c) + offset) = v;
    }
    if ((data.design.row(i).array() == 0.0).all())
      throw LoadError(location(path, line) + ": all regressors are zero");
  }
  try {
    data.validate();
  } catch (const SetupError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  return data;
}

PriceSeries load_price_series(const fs::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2) throw LoadError(path.string() + ": expected two columns (date,price)");
  PriceSeries series;
  series.prices.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    double price = 0;
    if (!parse_double(row[1], price))
      throw LoadError(location(path, table.line_numbers[i], table.header[1]) + ": non-numeric price '" + row[1] + "'");
    if (!(price > 0))
      throw LoadError(location(path, table.line_numbers[i], table.header[1]) + ": price must be positive");
    if (!series.dates.empty() && !(series.dates.back() < row[0]))
      throw LoadError(location(path, table.line_numbers[i], table.header[0]) + ": dates must be strictly increasing");
    series.dates.push_back(row[0]);
    series.prices(static_cast<Eigen::Index>(i)) = price;
  }
  return series;
}

ReturnsSeries prices_to_returns(const PriceSeries& series) {
  const auto count = series.prices.size();
  if (count < 3) throw LoadError("price series needs at least 3 prices");
  for (Eigen::Index t = 0; t < count; ++t)
    if (!(series.prices(t) > 0) || !std::isfinite(series.prices(t))) {
      std::ostringstream os;
      os << "price at position " << t + 1 << " is not positive";
      throw LoadError(os.str());
    }
  ReturnsSeries out;
  out.returns = (series.prices.tail(count - 1).array() - series.prices.head(count - 1).array()) /
                series.prices.head(count - 1).array();
  const double mean = out.returns.mean();
  out.h0 = (out.returns.array() - mean).square().sum() / static_cast<double>(out.returns.size() - 1);
  if (!(out.h0 > 0)) throw LoadError("degenerate price series: returns have zero variance (h0 must be positive)");
  return out;
}

void export_chain(const ChainOutput& chain, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chain file " + path.string());
  const auto d = chain.dimension();
  out << "iter";
  for (Eigen::Index j = 0; j < d; ++j) out << ",beta_" << j + 1;
  for (Eigen::Index j = 0; j < d; ++j) out << ",grad_" << j + 1;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    out << i + 1;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << chain.draws(i, j);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << (chain.has_gradients() ? chain.gradients(i, j) : std::nan(""));
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing chain file " + path.string());
}

ChainOutput import_chain(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const auto cols = table.header.size();
  if (cols < 3 || (cols - 1) % 2 != 0 || table.header[0] != "iter")
    throw LoadError(path.string() + ": not a chain file (expected iter,beta_*,grad_*)");
  const auto d = static_cast<Eigen::Index>((cols - 1) / 2);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  ChainOutput chain;
  chain.draws.resize(n, d);
  chain.gradients.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < 2 * d; ++j) {
      double v = 0;
      const auto& cell = row[static_cast<std::size_t>(j + 1)];
      if (!parse_double(cell, v))
        throw LoadError(location(path, table.line_numbers[static_cast<std::size_t>(i)], table.header[static_cast<std::size_t>(j + 1)]) +
                        ": non-numeric value '" + cell + "'");
      (j < d ? chain.draws(i, j) : chain.gradients(i, j - d)) = v;
    }
  }
  return chain;
}

nlohmann::json encode_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

namespace {

nlohmann::json encode_vector(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(encode_number(v(i)));
  return out;
}

nlohmann::json encode_optional(const std::optional<double>& v) { return v ? encode_number(*v) : nlohmann::json(); }

}  // namespace

nlohmann::json study_to_json(const StudyReport& report) {
  using nlohmann::json;
  json doc;
  doc["config"] = report.config.is_null() ? json::object() : report.config;
  doc["model"] = report.model;
  doc["sampler"] = report.sampler;
  doc["evaluation_sampler"] = report.evaluation_sampler;
  doc["protocol"] = report.protocol;
  doc["parameters"] = report.parameters;
  doc["degrees"] = report.degrees;
  doc["partial"] = report.partial;
  doc["notes"] = report.notes;
  doc["pilot_accept_rate"] = encode_number(report.pilot_accept_rate);
  doc["reference_length"] = report.reference_length ? json(*report.reference_length) : json();

  json seeds = json::array();
  json reps = json::array();
  json timing_reps = json::array();
  for (const auto& rec : report.replications) {
    seeds.push_back(rec.fit_seed);
    json r;
    r["index"] = rec.index;
    r["fit_seed"] = rec.fit_seed;
    r["eval_seed"] = rec.eval_seed;
    r["ok"] = rec.ok;
    r["error"] = rec.error;
    r["fit_accept_rate"] = encode_number(rec.fit_accept_rate);
    r["eval_accept_rate"] = encode_number(rec.eval_accept_rate);
    r["ordinary"] = encode_vector(rec.ordinary);
    json zv = json::object();
    for (const auto& [degree, v] : rec.zv) zv[std::to_string(degree)] = encode_vector(v);
    r["zv"] = zv;
    json asvar = json::object();
    for (const auto& [degree, v] : rec.asvar_ratio) asvar[std::to_string(degree)] = encode_vector(v);
    r["batch_means_ratio"] = asvar;
    json ridge = json::object();
    for (const auto& [degree, flag] : rec.ridge_applied) ridge[std::to_string(degree)] = flag;
    r["ridge_applied"] = ridge;
    reps.push_back(r);

    json t;
    t["index"] = rec.index;
    t["ordinary_seconds"] = rec.ordinary_seconds;
    json zt = json::object();
    for (const auto& [degree, s] : rec.zv_seconds) zt[std::to_string(degree)] = s;
    t["zv_seconds"] = zt;
    timing_reps.push_back(t);
  }
  doc["seeds"] = seeds;
  doc["replications"] = reps;

  json summary = json::array();
  for (const auto& p : report.summary) {
    json s;
    s["parameter"] = p.label;
    s["ordinary_mean"] = encode_number(p.ordinary_mean);
    s["ordinary_variance"] = encode_number(p.ordinary_variance);
    s["reference_point"] = encode_optional(p.reference_point);
    s["reference_lo"] = encode_optional(p.reference_lo);
    s["reference_hi"] = encode_optional(p.reference_hi);
    s["ordinary_coverage"] = encode_optional(p.ordinary_coverage);
    json degrees = json::array();
    for (const auto& d : p.degrees) {
      json e;
      e["degree"] = d.degree;
      e["zv_mean"] = encode_number(d.zv_mean);
      e["zv_variance"] = encode_number(d.ratio.zv_variance);
      e["ordinary_variance"] = encode_number(d.ratio.ordinary_variance);
      e["ratio"] = encode_number(d.ratio.point);
      e["ratio_infinite"] = d.ratio.infinite;
      e["interval_available"] = d.ratio.interval_available;
      e["ratio_lo"] = encode_number(d.ratio.lo);
      e["ratio_hi"] = encode_number(d.ratio.hi);
      e["interval_method"] = d.ratio.method;
      e["batch_means_ratio"] = encode_number(d.batch_means_ratio);
      e["coverage"] = encode_optional(d.coverage);
      degrees.push_back(e);
    }
    s["degrees"] = degrees;
    summary.push_back(s);
  }
  doc["summary"] = summary;

  // Wall-clock measurements live only here.
  json timing;
  double ordinary_total = 0.0;
  std::map<int, double> zv_total;
  for (const auto& rec : report.replications) {
    ordinary_total += rec.ordinary_seconds;
    for (const auto& [degree, s] : rec.zv_seconds) zv_total[degree] += s;
  }
  timing["ordinary_seconds"] = ordinary_total;
  json zt = json::object(), ratio = json::object();
  for (const auto& [degree, s] : zv_total) {
    zt[std::to_string(degree)] = s;
    ratio[std::to_string(degree)] = encode_number(ordinary_total > 0 ? s / ordinary_total : std::nan(""));
  }
  timing["zv_seconds"] = zt;
  timing["zv_over_ordinary"] = ratio;
  timing["replications"] = timing_reps;
  doc["timing"] = timing;
  return doc;
}

std::string study_to_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "replication,fit_seed,parameter,method,estimate\n";
  for (const auto& rec : report.replications) {
    if (!rec.ok) continue;
    for (std::size_t k = 0; k < report.parameters.size(); ++k) {
      const auto idx = static_cast<Eigen::Index>(k);
      os << rec.index << ',' << rec.fit_seed << ',' << report.parameters[k] << ",ordinary,"
         << format_double(rec.ordinary(idx)) << '\n';
      for (const auto& [degree, v] : rec.zv)
        os << rec.index << ',' << rec.fit_seed << ',' << report.parameters[k] << ",zv" << degree << ','
           << format_double(v(idx)) << '\n';
    }
  }
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void export_study(const StudyReport& report, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + directory.string() + ": " + ec.message());
  write_text_file(directory / "study.json", study_to_json(report).dump(2) + "\n");
  write_text_file(directory / "study.csv", study_to_csv(report));
}

}  // namespace zv
