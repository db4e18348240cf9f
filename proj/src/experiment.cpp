#include "zvmcmc/experiment.hpp"

#include "zvmcmc/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace zv {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::set<std::string> kKnownKeys = {
    "name", "model", "mu", "sigma2", "rate", "shape", "scale", "data_path", "columns", "synthetic_seed",
    "add_intercept", "prior_sd", "sampler", "eval_sampler", "burn_in", "fit_length", "eval_burn_in", "eval_length",
    "proposal", "proposal_sd", "proposal_scale", "seed", "degrees", "exclusions", "single_chain", "moments", "functions",
    "replications", "bootstrap_resamples", "reference_length", "diagnose_length", "delta", "threads", "keep_chains",
    "out", "comment"};

constexpr std::size_t kMinPhaseLength = 100;

// "line N" of the first occurrence of "key" in the source text.
std::string where(const std::string& text, const std::string& key, const json& overrides) {
  if (overrides.contains(key)) return "command-line override --" + key;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return "config";
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
  return "line " + std::to_string(line);
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "gibbs" || name == "gibbs_probit") return SamplerKind::gibbs_probit;
  if (name == "rwmh" || name == "rw_metropolis" || name == "metropolis") return SamplerKind::rw_metropolis;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected gibbs or rwmh)");
}

// Mode search for the regression/GARCH posteriors: damped Newton with a
// finite-difference Hessian of the analytic gradient.
PosteriorScale laplace(const TargetModel& model, ParamVector x) {
  const auto d = model.dimension();
  auto hessian = [&](const ParamVector& at) {
    Matrix H(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double base = std::abs(at(j));
      const double h = 1e-5 * (model.kind() == ModelKind::garch ? base : std::max(base, 1e-2));
      ParamVector up = at, down = at;
      up(j) += h;
      down(j) -= h;
      H.col(j) = (grad_log_density(model, up) - grad_log_density(model, down)) / (2 * h);
    }
    return Matrix(0.5 * (H + H.transpose()));
  };
  double lp = log_density(model, x);
  for (int iter = 0; iter < 200; ++iter) {
    const Vector g = grad_log_density(model, x);
    const Matrix negH = -hessian(x);
    Vector step;
    Eigen::LLT<Matrix> llt(negH);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(g);
    } else {
      // gradient ascent scaled by the diagonal curvature
      step = g.array() / negH.diagonal().cwiseAbs().array().max(1e-12);
    }
    double t = 1.0;
    bool improved = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const ParamVector candidate = x + t * step;
      bool interior = in_support(model, candidate);
      if (interior && model.kind() == ModelKind::garch) interior = candidate(1) > 0 && candidate(2) > 0;
      if (!interior) continue;
      const double lp_candidate = log_density(model, candidate);
      if (std::isfinite(lp_candidate) && lp_candidate >= lp) {
        x = candidate;
        lp = lp_candidate;
        improved = true;
        break;
      }
    }
    const double rel = (t * step).cwiseAbs().cwiseQuotient(x.cwiseAbs().cwiseMax(1e-12)).maxCoeff();
    if (!improved || rel < 1e-10) break;
  }
  PosteriorScale out;
  out.mode = x;
  const Matrix negH = -hessian(x);
  out.sd = negH.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseInverse().cwiseSqrt();
  Eigen::LLT<Matrix> llt(negH);
  if (llt.info() == Eigen::Success) out.covariance = llt.solve(Matrix::Identity(d, d));
  else out.covariance = out.sd.array().square().matrix().asDiagonal();
  return out;
}

void check_positive_length(std::size_t value, const char* key, const std::string& text, const json& overrides) {
  if (value < kMinPhaseLength)
    throw ConfigError(where(text, key, overrides) + ": '" + key + "' must be at least " + std::to_string(kMinPhaseLength));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const json& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset > 0 ? offset - 1 : 0), '\n');
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("line 1: config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) doc[key] = value;

  for (const auto& [key, value] : doc.items())
    if (!kKnownKeys.contains(key)) throw ConfigError(where(text, key, overrides) + ": unknown key '" + key + "'");

  ExperimentConfig c;
  c.source = doc;
  const auto read = [&](const char* key, auto& target) {
    if (!doc.contains(key) || doc[key].is_null()) return;
    try {
      doc[key].get_to(target);
    } catch (const json::exception& e) {
      throw ConfigError(where(text, key, overrides) + ": bad value for '" + key + "': " + e.what());
    }
  };
  const auto fail = [&](const char* key, const std::string& message) -> ConfigError {
    return ConfigError(where(text, key, overrides) + ": " + message);
  };

  read("name", c.name);
  std::string model = "gaussian";
  read("model", model);
  try {
    c.model = model_kind_from_string(model);
  } catch (const SetupError& e) {
    throw fail("model", e.what());
  }
  read("mu", c.mu);
  read("sigma2", c.sigma2);
  read("rate", c.rate);
  read("shape", c.shape);
  read("scale", c.scale);
  if (doc.contains("data_path") && !doc["data_path"].is_null()) {
    std::string path;
    read("data_path", path);
    c.data_path = path;
  }
  read("columns", c.columns);
  read("synthetic_seed", c.synthetic_seed);
  read("add_intercept", c.add_intercept);
  if (doc.contains("prior_sd")) {
    std::vector<double> sd;
    read("prior_sd", sd);
    if (sd.size() != 3) throw fail("prior_sd", "'prior_sd' needs three entries");
    c.prior_sd = Eigen::Vector3d(sd[0], sd[1], sd[2]);
    if ((c.prior_sd.array() <= 0).any() || !c.prior_sd.allFinite())
      throw fail("prior_sd", "'prior_sd' entries must be positive");
  }

  const SamplerKind default_sampler = c.model == ModelKind::probit ? SamplerKind::gibbs_probit : SamplerKind::rw_metropolis;
  c.sampler = default_sampler;
  for (const char* key : {"sampler", "eval_sampler"}) {
    if (!doc.contains(key)) continue;
    std::string name;
    read(key, name);
    try {
      (std::string(key) == "sampler" ? c.sampler : c.eval_sampler) = sampler_from_string(name);
    } catch (const std::invalid_argument& e) {
      throw fail(key, e.what());
    }
  }
  if (!doc.contains("eval_sampler")) c.eval_sampler = c.sampler;
  for (auto kind : {c.sampler, c.eval_sampler})
    if (kind == SamplerKind::gibbs_probit && c.model != ModelKind::probit)
      throw fail("sampler", "the gibbs sampler is only available for the probit model");

  read("burn_in", c.burn_in);
  read("fit_length", c.fit_length);
  read("eval_burn_in", c.eval_burn_in);
  read("eval_length", c.eval_length);
  check_positive_length(c.fit_length, "fit_length", text, overrides);
  check_positive_length(c.eval_length, "eval_length", text, overrides);
  if (doc.contains("proposal_sd") && !doc["proposal_sd"].is_null()) {
    std::vector<double> sd;
    read("proposal_sd", sd);
    c.proposal_sd = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    if ((c.proposal_sd->array() <= 0).any() || !c.proposal_sd->allFinite())
      throw fail("proposal_sd", "'proposal_sd' entries must be positive");
  }
  if (doc.contains("proposal")) {
    std::string shape;
    read("proposal", shape);
    if (shape == "diagonal") c.proposal = ProposalShape::diagonal;
    else if (shape == "laplace") c.proposal = ProposalShape::laplace;
    else throw fail("proposal", "'proposal' must be \"diagonal\" or \"laplace\"");
  }
  if (c.proposal == ProposalShape::laplace && c.proposal_sd)
    throw fail("proposal_sd", "'proposal_sd' cannot be combined with \"proposal\": \"laplace\"");
  read("proposal_scale", c.proposal_scale);
  if (!(c.proposal_scale > 0)) throw fail("proposal_scale", "'proposal_scale' must be positive");
  read("seed", c.seed);

  read("degrees", c.degrees);
  if (c.degrees.empty()) throw fail("degrees", "'degrees' must not be empty");
  for (int degree : c.degrees)
    if (degree < 1 || degree > kMaxBasisDegree)
      throw fail("degrees", "unsupported degree " + std::to_string(degree) + " (supported degrees: 1, 2, 3)");
  std::sort(c.degrees.begin(), c.degrees.end());
  c.degrees.erase(std::unique(c.degrees.begin(), c.degrees.end()), c.degrees.end());
  if (doc.contains("exclusions") && !doc["exclusions"].is_null()) {
    std::vector<MultiIndex> ex;
    read("exclusions", ex);
    c.exclusions = ex;
  }
  read("single_chain", c.single_chain);
  if (doc.contains("moments")) {
    std::string m;
    read("moments", m);
    if (m == "raw") c.moments = MomentConvention::raw;
    else if (m == "centered") c.moments = MomentConvention::centered;
    else throw fail("moments", "'moments' must be \"raw\" or \"centered\"");
  }
  if (doc.contains("functions")) {
    std::vector<std::string> fs;
    read("functions", fs);
    for (const auto& f : fs) {
      try {
        c.functions.push_back(TargetFunction::parse(f));
      } catch (const SetupError& e) {
        throw fail("functions", e.what());
      }
    }
  }

  read("replications", c.replications);
  if (c.replications < 1) throw fail("replications", "'replications' must be at least 1");
  read("bootstrap_resamples", c.bootstrap_resamples);
  if (c.bootstrap_resamples < 1) throw fail("bootstrap_resamples", "'bootstrap_resamples' must be positive");
  read("reference_length", c.reference_length);
  if (c.reference_length != 0 && c.reference_length < kMinReferenceLength)
    throw fail("reference_length", "'reference_length' must be 0 (disabled) or at least 100000");
  read("diagnose_length", c.diagnose_length);
  check_positive_length(c.diagnose_length, "diagnose_length", text, overrides);
  read("delta", c.delta);
  if (!(c.delta > 0)) throw fail("delta", "'delta' must be positive");
  read("threads", c.threads);
  if (c.threads < 0) throw fail("threads", "'threads' must be non-negative");
  read("keep_chains", c.keep_chains);
  read("out", c.out);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const json& overrides) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ":" + e.what());
  }
}

TargetModel build_model(const ExperimentConfig& config) {
  auto check_file = [](const std::string& path) {
    if (!std::filesystem::exists(path)) throw DataError("data file not found: " + path);
  };
  try {
    switch (config.model) {
      case ModelKind::gaussian: return TargetModel::gaussian(config.mu, config.sigma2);
      case ModelKind::exponential: return TargetModel::exponential(config.rate);
      case ModelKind::gamma: return TargetModel::gamma(config.shape, config.scale);
      case ModelKind::probit:
      case ModelKind::logit: {
        BinaryRegressionData data;
        if (config.data_path) {
          check_file(*config.data_path);
          data = load_design_matrix(*config.data_path, config.add_intercept, config.columns);
        } else {
          data = synthetic::banknote(config.synthetic_seed, config.add_intercept);
        }
        return config.model == ModelKind::probit ? TargetModel::probit(std::move(data))
                                                 : TargetModel::logit(std::move(data));
      }
      case ModelKind::garch: {
        PriceSeries prices;
        if (config.data_path) {
          check_file(*config.data_path);
          prices = load_price_series(*config.data_path);
        } else {
          prices = synthetic::exchange_rate(config.synthetic_seed);
        }
        GarchPrior prior;
        prior.prior_sd = config.prior_sd;
        return TargetModel::garch(prices_to_returns(prices), prior);
      }
    }
  } catch (const LoadError& e) {
    throw DataError(e.what());
  } catch (const SetupError& e) {
    throw ConfigError(std::string("invalid model parameters: ") + e.what());
  }
  throw ConfigError("unknown model");
}

PosteriorScale posterior_scale(const TargetModel& model) {
  PosteriorScale out;
  switch (model.kind()) {
    case ModelKind::gaussian: {
      const auto& g = model.as<GaussianTarget>();
      out.mode = g.mean;
      out.sd = g.variance.cwiseSqrt();
      return out;
    }
    case ModelKind::exponential: {
      const double rate = model.as<ExponentialTarget>().rate;
      out.mode = Vector::Constant(1, 1.0 / rate);
      out.sd = Vector::Constant(1, 1.0 / rate);
      return out;
    }
    case ModelKind::gamma: {
      const auto& g = model.as<GammaTarget>();
      out.mode = Vector::Constant(1, g.shape * g.scale);
      out.sd = Vector::Constant(1, std::sqrt(g.shape) * g.scale);
      return out;
    }
    case ModelKind::probit:
    case ModelKind::logit: return laplace(model, Vector::Zero(model.dimension()));
    case ModelKind::garch: {
      const auto& series = model.as<GarchPosterior>().series;
      const double variance = series.returns.squaredNorm() / static_cast<double>(series.returns.size());
      return laplace(model, Eigen::Vector3d(0.1 * variance, 0.1, 0.8));
    }
  }
  throw SetupError("posterior_scale: unknown model");
}

SamplerConfig phase_config(const ExperimentConfig& config, const TargetModel& model, const PosteriorScale& scale,
                           std::size_t burn_in, std::size_t length, std::uint64_t seed) {
  SamplerConfig sc;
  sc.burn_in = burn_in;
  sc.length = length;
  sc.seed = seed;
  sc.init = scale.mode;
  if (config.proposal_sd) {
    if (config.proposal_sd->size() != model.dimension())
      throw ConfigError("'proposal_sd' has " + std::to_string(config.proposal_sd->size()) + " entries, model dimension is " +
                        std::to_string(model.dimension()));
    sc.proposal_sd = *config.proposal_sd;
  } else {
    const double factor = config.proposal_scale * 2.4 / std::sqrt(static_cast<double>(model.dimension()));
    sc.proposal_sd = factor * scale.sd;
    if (config.proposal == ProposalShape::laplace) {
      const Matrix cov = scale.covariance.size() > 0 ? scale.covariance : Matrix(scale.sd.array().square().matrix().asDiagonal());
      Eigen::LLT<Matrix> llt(cov);
      if (llt.info() != Eigen::Success) throw SetupError("laplace proposal: posterior covariance is not positive definite");
      sc.proposal_factor = factor * Matrix(llt.matrixL());
    }
  }
  return sc;
}

std::vector<TargetFunction> target_functions(const ExperimentConfig& config, const TargetModel& model) {
  if (!config.functions.empty()) {
    for (const auto& f : config.functions)
      if (f.coordinate >= model.dimension())
        throw ConfigError("function " + f.label() + " refers to a coordinate beyond the model dimension");
    return config.functions;
  }
  std::vector<TargetFunction> out;
  for (Eigen::Index k = 0; k < model.dimension(); ++k) out.push_back({k, TargetFunction::Transform::identity});
  return out;
}

namespace {

struct ReplicationContext {
  const ExperimentConfig& config;
  const TargetModel& model;
  const PosteriorScale& scale;
  const std::vector<TargetFunction>& functions;
  const std::vector<MultiIndex>& exclusions;
};

ReplicationRecord run_replication(const ReplicationContext& ctx, int index) {
  const auto& config = ctx.config;
  ReplicationRecord rec;
  rec.index = index;
  rec.fit_seed = config.seed + 2 * static_cast<std::uint64_t>(index);
  rec.eval_seed = rec.fit_seed + 1;
  const auto p = static_cast<Eigen::Index>(ctx.functions.size());
  try {
    const ChainOutput fit_chain = run_sampler(
        config.sampler, ctx.model, phase_config(config, ctx.model, ctx.scale, config.burn_in, config.fit_length, rec.fit_seed));
    ChainOutput eval_storage;
    if (!config.single_chain)
      eval_storage = run_sampler(config.eval_sampler, ctx.model,
                                 phase_config(config, ctx.model, ctx.scale, config.eval_burn_in, config.eval_length, rec.eval_seed));
    const ChainOutput& eval_chain = config.single_chain ? fit_chain : eval_storage;
    rec.fit_accept_rate = fit_chain.accept_rate;
    rec.eval_accept_rate = eval_chain.accept_rate;

    const double chain_seconds = fit_chain.sampling_seconds + fit_chain.gradient_seconds +
                                 (config.single_chain ? 0.0 : eval_chain.sampling_seconds + eval_chain.gradient_seconds);
    rec.ordinary_seconds = eval_chain.sampling_seconds;

    std::vector<Vector> fit_f, eval_f;
    rec.ordinary.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      fit_f.push_back(ctx.functions[static_cast<std::size_t>(k)].evaluate(fit_chain.draws));
      eval_f.push_back(config.single_chain ? fit_f.back() : ctx.functions[static_cast<std::size_t>(k)].evaluate(eval_chain.draws));
      rec.ordinary(k) = eval_f.back().mean();
    }

    const int batches = 20;
    for (int degree : config.degrees) {
      const auto start = Clock::now();
      const auto basis = monomial_basis(static_cast<int>(ctx.model.dimension()), degree, ctx.exclusions);
      const auto fit_cv = eval_control_variates(fit_chain, basis);
      const auto eval_cv = config.single_chain ? fit_cv : eval_control_variates(eval_chain, basis);
      Vector estimates(p), asvar_ratio(p);
      bool ridge = false;
      FitOptions options;
      options.moments = config.moments;
      for (Eigen::Index k = 0; k < p; ++k) {
        const auto fit = fit_coefficients(fit_cv, fit_f[static_cast<std::size_t>(k)], options);
        ridge = ridge || fit.ridge_applied;
        const Vector ftilde = renormalize(eval_f[static_cast<std::size_t>(k)], eval_cv, fit);
        estimates(k) = ftilde.mean();
        const double a_f = batch_means_asvar(eval_f[static_cast<std::size_t>(k)], batches);
        const double a_zv = batch_means_asvar(ftilde, batches);
        asvar_ratio(k) = a_zv > 0 ? a_f / a_zv : std::numeric_limits<double>::infinity();
      }
      rec.zv[degree] = estimates;
      rec.asvar_ratio[degree] = asvar_ratio;
      rec.ridge_applied[degree] = ridge;
      rec.zv_seconds[degree] = chain_seconds + seconds_since(start);
    }
    if (config.keep_chains) {
      const auto dir = std::filesystem::path(config.out) / "chains";
      std::filesystem::create_directories(dir);
      export_chain(fit_chain, dir / ("rep" + std::to_string(index) + "_fit.csv"));
      if (!config.single_chain) export_chain(eval_chain, dir / ("rep" + std::to_string(index) + "_eval.csv"));
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(count, threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) fn(i);
  };
  if (workers == 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

double median_of(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

StudyReport run_study(const ExperimentConfig& config) {
  const TargetModel model = build_model(config);
  const PosteriorScale scale = posterior_scale(model);
  const auto functions = target_functions(config, model);
  const auto exclusions = config.exclusions ? *config.exclusions : default_exclusions(model);
  // surface basis/exclusion problems once, before sampling
  for (int degree : config.degrees) {
    try {
      monomial_basis(static_cast<int>(model.dimension()), degree, exclusions);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  StudyReport report;
  report.config = config.source;
  report.model = std::string(model.name());
  report.sampler = std::string(to_string(config.sampler));
  report.evaluation_sampler = std::string(to_string(config.eval_sampler));
  report.protocol = std::string(to_string(config.single_chain ? Protocol::single_chain : Protocol::two_chain));
  report.degrees = config.degrees;
  for (const auto& f : functions) report.parameters.push_back(f.label());
  if (config.sampler == SamplerKind::gibbs_probit && config.eval_sampler == SamplerKind::gibbs_probit && !config.single_chain)
    report.notes.push_back("evaluation phase uses the same Gibbs sampler as the fitting phase");
  if (config.sampler == SamplerKind::rw_metropolis || config.eval_sampler == SamplerKind::rw_metropolis) {
    const auto pilot = rw_metropolis(model, phase_config(config, model, scale, 0, 1, config.seed));
    report.pilot_accept_rate = pilot.pilot_accept_rate;
  }

  const ReplicationContext ctx{config, model, scale, functions, exclusions};
  report.replications.resize(static_cast<std::size_t>(config.replications));
  parallel_for(config.replications, config.threads,
               [&](int r) { report.replications[static_cast<std::size_t>(r)] = run_replication(ctx, r); });

  // aggregate in replication order
  ReplicationStudy study;
  std::vector<const ReplicationRecord*> ok;
  for (const auto& rec : report.replications) {
    if (rec.ok) ok.push_back(&rec);
    else report.partial = true;
  }
  const auto R = static_cast<Eigen::Index>(ok.size());
  const auto p = static_cast<Eigen::Index>(functions.size());
  study.ordinary_estimates.resize(R, p);
  for (int degree : config.degrees) study.zv_estimates[degree].resize(R, p);
  for (Eigen::Index r = 0; r < R; ++r) {
    const auto& rec = *ok[static_cast<std::size_t>(r)];
    study.seeds.push_back(rec.fit_seed);
    study.ordinary_estimates.row(r) = rec.ordinary.transpose();
    for (int degree : config.degrees) study.zv_estimates[degree].row(r) = rec.zv.at(degree).transpose();
  }

  std::optional<ReferenceEstimate> reference;
  if (config.reference_length > 0) {
    auto sc = phase_config(config, model, scale, config.eval_burn_in, config.reference_length,
                           config.seed + 2 * static_cast<std::uint64_t>(config.replications));
    reference = long_chain_reference(model, functions, config.eval_sampler, sc);
    report.reference_length = config.reference_length;
  }

  BootstrapOptions boot;
  boot.resamples = config.bootstrap_resamples;
  boot.seed = config.seed;
  const auto inside = [&](const Matrix& estimates, Eigen::Index k) {
    if (estimates.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
    Eigen::Index hits = 0;
    for (Eigen::Index r = 0; r < estimates.rows(); ++r)
      hits += estimates(r, k) >= reference->lo(k) && estimates(r, k) <= reference->hi(k);
    return static_cast<double>(hits) / static_cast<double>(estimates.rows());
  };
  for (Eigen::Index k = 0; k < p; ++k) {
    ParameterSummary s;
    s.label = functions[static_cast<std::size_t>(k)].label();
    const Vector ord = study.ordinary_estimates.col(k);
    s.ordinary_mean = R > 0 ? ord.mean() : std::numeric_limits<double>::quiet_NaN();
    s.ordinary_variance = R > 1 ? (ord.array() - ord.mean()).square().sum() / static_cast<double>(R - 1)
                                : std::numeric_limits<double>::quiet_NaN();
    if (reference) {
      s.reference_point = reference->point(k);
      s.reference_lo = reference->lo(k);
      s.reference_hi = reference->hi(k);
      s.ordinary_coverage = inside(study.ordinary_estimates, k);
    }
    for (int degree : config.degrees) {
      DegreeSummary ds;
      ds.degree = degree;
      const Vector zv = study.zv_estimates[degree].col(k);
      ds.zv_mean = R > 0 ? zv.mean() : std::numeric_limits<double>::quiet_NaN();
      if (R >= 2) {
        ds.ratio = variance_ratio(study, k, degree, boot);
      } else {
        ds.ratio.point = std::numeric_limits<double>::quiet_NaN();
        ds.ratio.ordinary_variance = std::numeric_limits<double>::quiet_NaN();
        ds.ratio.zv_variance = std::numeric_limits<double>::quiet_NaN();
        ds.ratio.method = "not available (fewer than 2 replications)";
      }
      std::vector<double> per_rep;
      for (const auto* rec : ok) per_rep.push_back(rec->asvar_ratio.at(degree)(k));
      ds.batch_means_ratio = median_of(per_rep);
      if (reference) ds.coverage = inside(study.zv_estimates[degree], k);
      s.degrees.push_back(ds);
    }
    report.summary.push_back(std::move(s));
  }
  return report;
}

json run_diagnostics(const ExperimentConfig& config) {
  const TargetModel model = build_model(config);
  const PosteriorScale scale = posterior_scale(model);
  const auto functions = target_functions(config, model);
  const auto exclusions = config.exclusions ? *config.exclusions : default_exclusions(model);

  const ChainOutput chain = run_sampler(config.eval_sampler, model,
                                        phase_config(config, model, scale, config.eval_burn_in, config.diagnose_length, config.seed));
  json doc;
  doc["model"] = std::string(model.name());
  doc["sampler"] = std::string(to_string(config.eval_sampler));
  doc["length"] = config.diagnose_length;
  doc["seed"] = config.seed;
  doc["accept_rate"] = encode_number(chain.accept_rate);
  doc["config"] = config.source;

  const auto linnik = linnik_estimate(chain);
  json lj = json::array();
  bool any_flag = false;
  for (Eigen::Index j = 0; j < model.dimension(); ++j) {
    any_flag = any_flag || linnik.divergent[static_cast<std::size_t>(j)];
    lj.push_back({{"coordinate", j + 1},
                  {"estimate", encode_number(linnik.estimate(j))},
                  {"standard_error", encode_number(linnik.standard_error(j))},
                  {"statistic", encode_number(linnik.statistic(j))},
                  {"tail_index", encode_number(linnik.tail_index(j))},
                  {"divergent", static_cast<bool>(linnik.divergent[static_cast<std::size_t>(j)])}});
  }
  doc["linnik"] = lj;

  json per_degree = json::array();
  for (int degree : config.degrees) {
    const auto basis = monomial_basis(static_cast<int>(model.dimension()), degree, exclusions);
    const auto cv = eval_control_variates(chain, basis);
    json zero = json::array();
    double max_abs_z = 0.0;
    for (const auto& col : cv_zero_mean_test(cv)) {
      zero.push_back({{"monomial", col.monomial},
                      {"mean", encode_number(col.mean)},
                      {"z", encode_number(col.z_score)},
                      {"degenerate", col.degenerate}});
      if (!col.degenerate) max_abs_z = std::max(max_abs_z, std::abs(col.z_score));
    }
    json moments = json::array();
    for (const auto& col : moment_diagnostic(cv, config.delta)) {
      any_flag = any_flag || col.divergent;
      moments.push_back({{"monomial", col.monomial},
                         {"moment", encode_number(col.moment)},
                         {"statistic", encode_number(col.statistic)},
                         {"tail_index", encode_number(col.tail_index)},
                         {"divergent", col.divergent}});
    }
    per_degree.push_back({{"degree", degree},
                          {"zero_mean", zero},
                          {"max_abs_z", max_abs_z},
                          {"moments", moments},
                          {"delta", config.delta}});
  }
  doc["control_variates"] = per_degree;
  doc["advisory_flags"] = any_flag;

  if (config.diagnose_length >= kMinReferenceLength) {
    json ref = json::array();
    const int batches = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(chain.size()))));
    for (const auto& f : functions) {
      const Vector values = f.evaluate(chain.draws);
      const double half = 1.959963984540054 * std::sqrt(batch_means_asvar(values, batches) / static_cast<double>(values.size()));
      ref.push_back({{"parameter", f.label()},
                     {"point", encode_number(values.mean())},
                     {"lo", encode_number(values.mean() - half)},
                     {"hi", encode_number(values.mean() + half)}});
    }
    doc["reference"] = ref;
  }
  return doc;
}

}  // namespace zv
