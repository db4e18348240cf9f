// Acceptance suite: one PASS/FAIL line per criterion.
//
// Real data can be supplied with ZVMCMC_BANKNOTE_CSV (columns length, left,
// right, bottom, y) and ZVMCMC_DEMGBP_CSV (date,price). Without them the
// seeded synthetic generators are used.

#include "test_support.hpp"

#include "zvmcmc/experiment.hpp"
#include "zvmcmc/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace zv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double sample_variance(const Vector& x) { return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1); }

ExperimentConfig shipped(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object()) {
  nlohmann::json o = overrides;
  const char* env = nullptr;
  if (name == "probit_banknote" || name == "logit_banknote") env = std::getenv("ZVMCMC_BANKNOTE_CSV");
  if (name == "garch_demgbp") env = std::getenv("ZVMCMC_DEMGBP_CSV");
  if (env && *env) o["data_path"] = env;
  return load_config(std::filesystem::path(ZVMCMC_CONFIG_DIR) / (name + ".json"), o);
}

std::string data_source(const ExperimentConfig& c) { return c.data_path ? *c.data_path : "synthetic"; }

ChainOutput mh_chain(const TargetModel& model, std::size_t length, std::uint64_t seed, double proposal,
                     double init = 1.0) {
  SamplerConfig config;
  config.length = length;
  config.burn_in = 1000;
  config.seed = seed;
  config.proposal_sd = Vector::Constant(model.dimension(), proposal);
  config.init = Vector::Constant(model.dimension(), init);
  return rw_metropolis(model, config);
}

// Cached studies shared between criteria.
std::map<std::string, StudyReport> studies;
std::map<std::string, double> study_seconds;

const StudyReport& study(const std::string& name) {
  auto it = studies.find(name);
  if (it != studies.end()) return it->second;
  const auto start = Clock::now();
  auto report = run_study(shipped(name));
  study_seconds[name] = elapsed(start);
  return studies.emplace(name, std::move(report)).first->second;
}

// "beta_1 d1 [lo, hi]" style summary of a study.
std::string ratio_table(const StudyReport& report) {
  std::ostringstream os;
  for (const auto& p : report.summary) {
    os << " " << p.label << ":";
    for (const auto& d : p.degrees)
      os << " d" << d.degree << "=" << (d.ratio.infinite ? std::string("inf") : fmt(d.ratio.point)) << "["
         << fmt(d.ratio.lo) << "," << fmt(d.ratio.hi) << "]";
  }
  return os.str();
}

const DegreeSummary& degree_of(const ParameterSummary& p, int degree) {
  for (const auto& d : p.degrees)
    if (d.degree == degree) return d;
  throw std::runtime_error("degree missing from study");
}

Outcome analytic_zero_variance() {
  const auto start = Clock::now();
  const auto model = TargetModel::gaussian(2.0, 3.0);
  const auto chain = mh_chain(model, 10000, 1, 2.4 * std::sqrt(3.0));
  const auto cv = eval_control_variates(chain, monomial_basis(1, 1));
  ZVFit<double> exact;
  exact.coefficients = Vector::Constant(1, -2.0 * 3.0);
  const Vector ft = renormalize(Vector(chain.draws.col(0)), cv, exact);
  const double var = sample_variance(ft);
  const double err = std::abs(ft.mean() - 2.0);
  const double secs = elapsed(start);
  return {var < 1e-20 && err <= 8 * std::numeric_limits<double>::epsilon() * 2.0 && secs < 1.0,
          "var=" + fmt(var) + " |est-2|=" + fmt(err) + " " + fmt(secs) + "s"};
}

Outcome exponential_example() {
  const auto start = Clock::now();
  const auto model = TargetModel::exponential(1.0);
  const auto fit_chain = mh_chain(model, 2000, 11, 2.4);
  const auto eval_chain = mh_chain(model, 10000, 12, 2.4);
  const auto f = [](const Eigen::Ref<const Vector>& x) { return x(0); };
  const auto fitted = zv_estimate(model, f, fit_chain, eval_chain, 2, default_exclusions(model));
  const double ratio = sample_variance(Vector(eval_chain.draws.col(0))) / sample_variance(fitted.ftilde);

  const auto cv = eval_control_variates(eval_chain, monomial_basis(1, 2, {{1}}));
  ZVFit<double> exact;
  exact.coefficients = Vector::Constant(1, -1.0);
  const Vector ft = renormalize(Vector(eval_chain.draws.col(0)), cv, exact);
  const double var = sample_variance(ft);
  const double err = std::abs(ft.mean() - 1.0);

  const auto linear = fit_coefficients(eval_control_variates(fit_chain, monomial_basis(1, 1)), fit_chain.draws.col(0));
  const bool degenerate = linear.all_degenerate && linear.dropped_columns.size() == 1;
  const double secs = elapsed(start);
  return {ratio >= 50 && var < 1e-20 && err <= 1e-14 && degenerate && secs < 2.0,
          "fitted ratio=" + fmt(ratio) + " exact var=" + fmt(var) + " |est-1|=" + fmt(err) +
              " linear degenerate=" + (degenerate ? "yes" : "no") + " " + fmt(secs) + "s"};
}

Outcome basis_counts() {
  bool ok = monomial_basis(4, 1).size() == 4 && monomial_basis(4, 2).size() == 14 && monomial_basis(3, 3).size() == 19;
  for (int d = 1; d <= 6; ++d)
    for (int p = 1; p <= 3; ++p) {
      long binom = 1;
      for (int i = 1; i <= d; ++i) binom = binom * (p + i) / i;
      ok = ok && static_cast<long>(monomial_basis(d, p).size()) == binom - 1;
    }
  return {ok, "|B(4,1)|=" + std::to_string(monomial_basis(4, 1).size()) + " |B(4,2)|=" +
                  std::to_string(monomial_basis(4, 2).size()) + " |B(3,3)|=" + std::to_string(monomial_basis(3, 3).size())};
}

Outcome gradient_check() {
  const auto start = Clock::now();
  Rng rng(4);
  std::vector<TargetModel> models{TargetModel::gaussian(Vector::Constant(3, 1.0), Vector::Constant(3, 2.0)),
                                  TargetModel::exponential(1.5), TargetModel::gamma(3.0, 2.0),
                                  build_model(shipped("probit_banknote")), build_model(shipped("logit_banknote")),
                                  build_model(shipped("garch_demgbp"))};
  double worst = 0.0;
  std::ostringstream os;
  for (const auto& model : models) {
    const auto scale = posterior_scale(model);
    double model_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      ParamVector beta = scale.mode;
      for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double spread = model.kind() == ModelKind::garch ? 0.5 * std::min(scale.sd(j), scale.mode(j)) : 2.0 * scale.sd(j);
        beta(j) += spread * (2 * rng.uniform() - 1);
      }
      if (!in_support(model, beta)) beta = scale.mode;
      // relative steps for GARCH keep the stencil inside the support
      Vector fd(beta.size());
      for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double h = model.kind() == ModelKind::garch ? 1e-6 * beta(j) : 1e-6 * (std::abs(beta(j)) + scale.sd(j));
        ParamVector up = beta, down = beta;
        up(j) += h;
        down(j) -= h;
        fd(j) = (log_density(model, up) - log_density(model, down)) / (2 * h);
      }
      const Vector g = grad_log_density(model, beta);
      model_worst = std::max(model_worst, ((g - fd).cwiseAbs().array() / g.cwiseAbs().array().max(1e-8)).maxCoeff());
    }
    worst = std::max(worst, model_worst);
    os << " " << model.name() << "=" << fmt(model_worst, 2);
  }
  const double secs = elapsed(start);
  return {worst < 1e-5 && secs < 10, "max rel err" + os.str() + " " + fmt(secs) + "s"};
}

Outcome quadrature_zero_mean() {
  const auto start = Clock::now();
  const double inf = std::numeric_limits<double>::infinity();
  struct Case {
    TargetModel model;
    MonomialBasis basis;
    double lo;
    std::function<double(double)> density;
  };
  const double s = std::sqrt(3.0);
  std::vector<Case> cases{
      {TargetModel::gaussian(2.0, 3.0), monomial_basis(1, 3), -inf,
       [s](double x) { return std::exp(-0.5 * std::pow((x - 2.0) / s, 2)) / (s * std::sqrt(2 * M_PI)); }},
      {TargetModel::exponential(1.0), monomial_basis(1, 3, {{1}}), 0.0, [](double x) { return std::exp(-x); }},
      {TargetModel::gamma(3.0, 1.0), monomial_basis(1, 3), 0.0, [](double x) { return 0.5 * x * x * std::exp(-x); }}};
  double worst = 0.0;
  std::size_t columns = 0;
  for (auto& c : cases) {
    for (std::size_t k = 0; k < c.basis.size(); ++k, ++columns) {
      const double integral = test::integrate(
          [&](double x) {
            const double w = c.density(x);
            if (w == 0.0 || (c.lo == 0.0 && x <= 0)) return 0.0;
            const Matrix draws = Matrix::Constant(1, 1, x);
            const Matrix grad = grad_log_density(c.model, Vector::Constant(1, x)).transpose();
            return eval_control_variates(draws, grad, c.basis).values(0, static_cast<Eigen::Index>(k)) * w;
          },
          c.lo, inf);
      worst = std::max(worst, std::abs(integral));
    }
  }
  const double secs = elapsed(start);
  return {worst < 1e-8 && secs < 5, std::to_string(columns) + " columns, max |integral|=" + fmt(worst) + " " + fmt(secs) + "s"};
}

Outcome regression_study(const std::string& name, double lo, double hi) {
  const auto& report = study(name);
  bool ok = !report.partial;
  for (const auto& p : report.summary) {
    const auto& d1 = degree_of(p, 1);
    const auto& d2 = degree_of(p, 2);
    ok = ok && d1.ratio.interval_available && d1.ratio.hi >= lo && d1.ratio.lo <= hi;
    ok = ok && d2.ratio.point >= 1e3;
  }
  const double secs = study_seconds[name];
  return {ok && secs < 300, "data=" + data_source(shipped(name)) + ratio_table(report) + " " + fmt(secs) + "s"};
}

Outcome garch_study() {
  const auto& report = study("garch_demgbp");
  bool ok = !report.partial;
  for (const auto& p : report.summary) {
    ok = ok && degree_of(p, 1).ratio.point >= 5;
    ok = ok && degree_of(p, 2).ratio.point >= 500;
    ok = ok && degree_of(p, 3).ratio.point >= 5000;
  }
  const double secs = study_seconds["garch_demgbp"];
  return {ok && secs < 900, "data=" + data_source(shipped("garch_demgbp")) + ratio_table(report) + " " + fmt(secs) + "s"};
}

Outcome coverage() {
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream os;
  for (const std::string name : {"probit_banknote", "garch_demgbp"}) {
    const auto report = run_study(shipped(name, {{"replications", 50}, {"reference_length", 1000000}}));
    os << " " << name << ":";
    for (const auto& p : report.summary) {
      os << " " << p.label;
      for (const auto& d : p.degrees) {
        const double c = d.coverage.value_or(0.0);
        ok = ok && c >= 0.9;
        os << " d" << d.degree << "=" << fmt(c, 2);
      }
    }
  }
  const double secs = elapsed(start);
  return {ok && secs < 600, "coverage" + os.str() + " " + fmt(secs) + "s"};
}

Outcome timing_overhead() {
  bool ok = true;
  std::ostringstream os;
  for (const auto& entry : std::filesystem::directory_iterator(ZVMCMC_CONFIG_DIR)) {
    const auto name = entry.path().stem().string();
    const auto& report = study(name);
    const auto timing = study_to_json(report)["timing"]["zv_over_ordinary"];
    double worst = 0.0;
    for (const auto& [degree, value] : timing.items()) {
      const double r = value.is_number() ? value.get<double>() : std::numeric_limits<double>::infinity();
      worst = std::max(worst, r);
      ok = ok && std::isfinite(r) && r < 10;
    }
    os << " " << name << "=" << fmt(worst, 3);
  }
  return {ok, "max zv/ordinary time" + os.str()};
}

Outcome linnik() {
  const auto start = Clock::now();
  const double sigma2 = 3.0;
  const auto g = linnik_estimate(mh_chain(TargetModel::gaussian(2.0, sigma2), 100000, 31, 2.4 * std::sqrt(sigma2), 2.0));
  const bool gaussian_ok = std::abs(g.estimate(0) - 1.0 / sigma2) < 4 * g.standard_error(0);
  const auto stable = linnik_estimate(mh_chain(TargetModel::gamma(3.0, 1.0), 100000, 32, 2.4 * std::sqrt(3.0), 3.0));
  int flagged = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    flagged += linnik_estimate(mh_chain(TargetModel::gamma(1.5, 1.0), 100000, 100 + seed, 2.4 * std::sqrt(1.5), 1.5))
                   .divergent[0];
  const double secs = elapsed(start);
  return {gaussian_ok && !stable.divergent[0] && flagged >= 16 && secs < 60,
          "gaussian m=" + fmt(g.estimate(0), 5) + " (1/sigma^2=" + fmt(1.0 / sigma2, 5) + ", se=" + fmt(g.standard_error(0), 2) +
              ") gamma(3) divergent=" + (stable.divergent[0] ? "yes" : "no") + " gamma(1.5) flagged " +
              std::to_string(flagged) + "/20 " + fmt(secs) + "s"};
}

Outcome determinism() {
  const auto& first = study("probit_banknote");
  auto a = study_to_json(first);
  auto b = study_to_json(run_study(shipped("probit_banknote")));
  a.erase("timing");
  b.erase("timing");
  const bool same = a.dump(2) == b.dump(2);
  return {same, std::string("probit_banknote re-run ") + (same ? "byte-identical" : "differs") + " (" +
                    std::to_string(a.dump(2).size()) + " bytes)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"analytic zero-variance (gaussian, exact coefficient)", analytic_zero_variance},
      {"exponential example", exponential_example},
      {"basis-count identities", basis_counts},
      {"gradient correctness (six model kinds)", gradient_check},
      {"zero-mean quadrature oracle", quadrature_zero_mean},
      {"probit replication study", [] { return regression_study("probit_banknote", 10, 200); }},
      {"logit replication study", [] { return regression_study("logit_banknote", 5, 150); }},
      {"garch replication study", garch_study},
      {"unbiasedness coverage against a 1e6 reference chain", coverage},
      {"cpu overhead sanity", timing_overhead},
      {"linnik / clt diagnostics", linnik},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("[%s] %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
