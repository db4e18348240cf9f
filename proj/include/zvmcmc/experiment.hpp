#pragma once

#include "zvmcmc/data_io.hpp"
#include "zvmcmc/diagnostics.hpp"
#include "zvmcmc/zv_estimate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zv {

/// Malformed or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable input data referenced by a configuration (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape of the random-walk increments: independent per coordinate, or
/// correlated along the Laplace covariance of the posterior.
enum class ProposalShape { diagonal, laplace };

/// Flat experiment description; see configs/*.json for annotated examples.
struct ExperimentConfig {
  std::string name = "experiment";
  ModelKind model = ModelKind::gaussian;

  // toy targets
  double mu = 0.0;
  double sigma2 = 1.0;
  double rate = 1.0;
  double shape = 3.0;
  double scale = 1.0;

  // data-backed models
  std::optional<std::string> data_path;
  std::vector<std::string> columns;
  std::uint64_t synthetic_seed = 1;
  bool add_intercept = false;
  Eigen::Vector3d prior_sd = Eigen::Vector3d::Constant(1000.0);

  // sampling
  SamplerKind sampler = SamplerKind::rw_metropolis;
  SamplerKind eval_sampler = SamplerKind::rw_metropolis;
  std::size_t burn_in = 1000;
  std::size_t fit_length = 2000;
  std::size_t eval_burn_in = 1000;
  std::size_t eval_length = 2000;
  ProposalShape proposal = ProposalShape::diagonal;
  std::optional<Vector> proposal_sd;
  double proposal_scale = 1.0;
  std::uint64_t seed = 1;

  // zero-variance
  std::vector<int> degrees{1, 2};
  std::optional<std::vector<MultiIndex>> exclusions;
  bool single_chain = false;
  MomentConvention moments = MomentConvention::centered;
  std::vector<TargetFunction> functions;  // empty: every coordinate

  // study
  int replications = 100;
  int bootstrap_resamples = 1000;
  std::size_t reference_length = 0;
  std::size_t diagnose_length = 100000;
  double delta = 0.5;
  int threads = 0;
  bool keep_chains = false;
  std::string out = "out";

  nlohmann::json source;  // the document the config was read from, after overrides
};

/// Parses and validates a config document. Errors carry the line of the
/// offending key in `text` when available.
ExperimentConfig parse_config(const std::string& text, const nlohmann::json& overrides = nlohmann::json::object());
ExperimentConfig load_config(const std::filesystem::path& path,
                             const nlohmann::json& overrides = nlohmann::json::object());

/// Builds the target model, loading or synthesising data. Throws DataError on
/// missing or invalid data files.
TargetModel build_model(const ExperimentConfig& config);

/// Rough posterior location and per-coordinate scale. For the regression and
/// GARCH posteriors this is the Laplace mode and the conditional standard
/// deviations 1/sqrt(-H_jj); the toy targets use closed forms.
struct PosteriorScale {
  ParamVector mode;
  Vector sd;
  Matrix covariance;  // inverse negative Hessian; empty for the toy targets
};
PosteriorScale posterior_scale(const TargetModel& model);

/// Sampler configuration for one phase of the protocol.
SamplerConfig phase_config(const ExperimentConfig& config, const TargetModel& model, const PosteriorScale& scale,
                           std::size_t burn_in, std::size_t length, std::uint64_t seed);

std::vector<TargetFunction> target_functions(const ExperimentConfig& config, const TargetModel& model);

/// Executes the replication study (fit chain seed base+2r, eval chain seed
/// base+2r+1) and aggregates it.
StudyReport run_study(const ExperimentConfig& config);

/// Long-chain diagnostics: zero-mean tests, Linnik functional, moment
/// stability and the reference interval.
nlohmann::json run_diagnostics(const ExperimentConfig& config);

}  // namespace zv
