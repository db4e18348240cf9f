#include "test_support.hpp"

#include "zvmcmc/diagnostics.hpp"
#include "zvmcmc/normal.hpp"
#include "zvmcmc/samplers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace zv;

namespace {

double standard_error(const Vector& x) { return std::sqrt(batch_means_asvar(x, 50) / static_cast<double>(x.size())); }

Vector draws_of(double mean, double sd, double lo, double hi, int n, std::uint64_t seed) {
  Rng rng(seed);
  return Vector::NullaryExpr(n, [&] { return truncated_normal_draw(mean, sd, lo, hi, rng); });
}

}  // namespace

TEST_CASE("truncated normal on the positive half line has mean sqrt(2/pi)") {
  const Vector x = draws_of(0, 1, 0, INFINITY, 100000, 1);
  CHECK((x.array() > 0).all());
  const double se = std::sqrt((1 - 2 / std::numbers::pi) / x.size());
  CHECK(std::abs(x.mean() - std::sqrt(2 / std::numbers::pi)) < 4 * se);
}

TEST_CASE("truncated normal far tail") {
  const Vector x = draws_of(0, 1, 10, INFINITY, 20000, 2);
  CHECK((x.array() > 10).all());
  CHECK(x.allFinite());
  const double expected = normal::pdf_over_cdf(-10.0);
  CHECK(x.mean() == doctest::Approx(expected).epsilon(1e-3));
  const Vector mirrored = draws_of(0, 1, -INFINITY, -8, 1000, 3);
  CHECK((mirrored.array() < -8).all());
}

TEST_CASE("truncated normal two-sided intervals") {
  SUBCASE("symmetric (-1, 1) variance") {
    const Vector x = draws_of(0, 1, -1, 1, 100000, 4);
    const double z = 2 * normal::cdf(1.0) - 1;
    const double variance = 1 - 2 * normal::pdf(1.0) / z;
    const double sample = (x.array() - x.mean()).square().mean();
    CHECK(sample == doctest::Approx(variance).epsilon(0.01));
    CHECK((x.array().abs() < 1).all());
  }
  SUBCASE("narrow interval far from the mean") {
    const Vector x = draws_of(3, 2, -20, -19.99, 1000, 5);
    CHECK((x.array() > -20).all());
    CHECK((x.array() < -19.99).all());
  }
  SUBCASE("interval with quadrature mean") {
    const double lo = 0.5, hi = 2.5;
    const double mass = normal::cdf(hi) - normal::cdf(lo);
    const double mean = test::integrate([](double t) { return t * normal::pdf(t); }, lo, hi) / mass;
    const Vector x = draws_of(0, 1, lo, hi, 100000, 6);
    const double sd = std::sqrt((x.array() - x.mean()).square().mean());
    CHECK(std::abs(x.mean() - mean) < 4 * sd / std::sqrt(100000.0));
  }
}

TEST_CASE("truncated normal rejects malformed input") {
  Rng rng(1);
  CHECK_THROWS_AS(truncated_normal_draw(0, 1, 1, 1, rng), DomainError);
  CHECK_THROWS_AS(truncated_normal_draw(0, 1, 2, 1, rng), DomainError);
  CHECK_THROWS_AS(truncated_normal_draw(0, 0, 0, 1, rng), DomainError);
  CHECK_THROWS_AS(truncated_normal_draw(0, 1, std::nan(""), 1, rng), DomainError);
}

TEST_CASE("random-walk metropolis on a standard normal") {
  SamplerConfig config;
  config.length = 50000;
  config.proposal_sd = Vector::Constant(1, 2.4);
  config.init = Vector::Zero(1);
  config.seed = 17;
  const auto chain = rw_metropolis(TargetModel::gaussian(0, 1), config);
  REQUIRE(chain.size() == 50000);
  const Vector x = chain.draws.col(0);
  CHECK(std::abs(x.mean()) < 4 * standard_error(x));
  CHECK(chain.accept_rate > 0.3);
  CHECK(chain.accept_rate < 0.6);
  CHECK(std::isfinite(chain.pilot_accept_rate));
  CHECK(chain.sampler_tag == "rw_metropolis");
}

TEST_CASE("random-walk metropolis with a huge proposal stays valid") {
  SamplerConfig config;
  config.length = 2000;
  config.proposal_sd = Vector::Constant(1, 1e6);
  config.init = Vector::Constant(1, 0.3);
  const auto chain = rw_metropolis(TargetModel::gaussian(0, 1), config);
  CHECK(chain.accept_rate < 0.01);
  CHECK(chain.draws.allFinite());
  int repeats = 0;
  for (Eigen::Index i = 1; i < chain.size(); ++i) repeats += chain.draws(i, 0) == chain.draws(i - 1, 0);
  CHECK(repeats > 1980);
}

TEST_CASE("random-walk metropolis respects bounded support") {
  SamplerConfig config;
  config.length = 5000;
  config.proposal_sd = Vector::Constant(1, 3.0);
  config.init = Vector::Constant(1, 1.0);
  const auto chain = rw_metropolis(TargetModel::exponential(1.0), config);
  CHECK((chain.draws.array() > 0).all());
}

TEST_CASE("correlated proposal factor") {
  SamplerConfig config;
  config.length = 20000;
  config.init = Vector::Zero(2);
  Matrix L(2, 2);
  L << 1.0, 0.0, 0.9, 0.4;
  config.proposal_factor = L;
  const auto model = TargetModel::gaussian(Vector::Zero(2), Vector::Ones(2));
  const auto chain = rw_metropolis(model, config);
  CHECK(chain.accept_rate > 0.2);
  CHECK(std::abs(chain.draws.col(0).mean()) < 4 * standard_error(chain.draws.col(0)));
  config.proposal_factor(1, 1) = -1.0;
  CHECK_THROWS_AS(rw_metropolis(model, config), SetupError);
}

TEST_CASE("samplers are bit-reproducible and cache exact gradients") {
  const auto data = test::random_binary_data(21, 50, 2);
  const auto model = TargetModel::logit(data);
  SamplerConfig config;
  config.length = 300;
  config.burn_in = 50;
  config.proposal_sd = Vector::Constant(2, 0.3);
  config.init = Vector::Zero(2);
  config.seed = 99;
  const auto a = rw_metropolis(model, config);
  const auto b = rw_metropolis(model, config);
  CHECK(a.draws == b.draws);
  CHECK(a.gradients == b.gradients);
  for (Eigen::Index i = 0; i < a.size(); i += 37)
    CHECK(a.gradients.row(i).transpose() == grad_log_density(model, a.draws.row(i).transpose()));
  config.seed = 100;
  CHECK(rw_metropolis(model, config).draws != a.draws);

  const auto g1 = gibbs_probit(data, config);
  const auto g2 = gibbs_probit(data, config);
  CHECK(g1.draws == g2.draws);
  CHECK(g1.gradients == g2.gradients);
  CHECK(g1.accept_rate == 1.0);
  const auto probit = TargetModel::probit(data);
  CHECK(g1.gradients.row(5).transpose() == grad_log_density(probit, g1.draws.row(5).transpose()));
}

TEST_CASE("gibbs probit matches a one-dimensional quadrature posterior") {
  // pi(beta) proportional to Phi(beta) Phi(-2 beta)
  BinaryRegressionData data{(Matrix(2, 1) << 1.0, 2.0).finished(), (Eigen::VectorXi(2) << 1, 0).finished()};
  auto density = [](double b) { return normal::cdf(b) * normal::cdf(-2 * b); };
  const double inf = std::numeric_limits<double>::infinity();
  const double z = test::integrate(density, -inf, inf);
  const double mean = test::integrate([&](double b) { return b * density(b); }, -inf, inf) / z;
  const double second = test::integrate([&](double b) { return b * b * density(b); }, -inf, inf) / z;

  SamplerConfig config;
  config.length = 100000;
  config.init = Vector::Zero(1);
  config.seed = 3;
  const auto chain = gibbs_probit(data, config);
  const Vector x = chain.draws.col(0);
  CHECK(std::abs(x.mean() - mean) < 4 * standard_error(x));
  const Vector sq = x.array().square().matrix();
  CHECK(std::abs(sq.mean() - second) < 4 * standard_error(sq));
}

TEST_CASE("sampler setup errors") {
  SamplerConfig config;
  config.proposal_sd = Vector::Constant(1, 1.0);
  config.init = Vector::Constant(1, -1.0);
  CHECK_THROWS_AS(rw_metropolis(TargetModel::exponential(1), config), DomainError);
  config.init = Vector::Zero(2);
  CHECK_THROWS_AS(rw_metropolis(TargetModel::gaussian(0, 1), config), SetupError);
  config.init = Vector::Zero(1);
  config.proposal_sd = Vector::Constant(1, 0.0);
  CHECK_THROWS_AS(rw_metropolis(TargetModel::gaussian(0, 1), config), SetupError);
  auto rank_deficient = test::random_binary_data(1, 20, 2);
  rank_deficient.design.col(1) = rank_deficient.design.col(0);
  config.init = Vector::Zero(2);
  CHECK_THROWS_AS(gibbs_probit(rank_deficient, config), SetupError);
}
