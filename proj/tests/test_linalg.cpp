// Frozen spot values come from tests/oracle/reference_values.py.
#include <catch2/catch_amalgamated.hpp>

#include <patt/linalg.hpp>
#include <patt/rng.hpp>

#include <cmath>

namespace {

Eigen::MatrixXd random_spd(int d, patt::rng_stream& rng) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + static_cast<double>(d) * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST_CASE("cholesky of a hand-checked 2x2 matrix", "[linalg]") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 4.0, 2.0, 2.0, 5.0;
  auto res = patt::cholesky_regularized(sigma);
  REQUIRE(res.epsilon_used == 0.0);
  REQUIRE(res.regularization_steps == 0);
  REQUIRE(res.L(0, 0) == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(res.L(1, 0) == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(res.L(1, 1) == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(res.L(0, 1) == 0.0);
}

TEST_CASE("cholesky reconstructs random SPD matrices without regularization", "[linalg]") {
  patt::rng_stream rng(2024, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial;
    Eigen::MatrixXd sigma = random_spd(d, rng);
    auto res = patt::cholesky_regularized(sigma);
    REQUIRE(res.epsilon_used == 0.0);
    Eigen::MatrixXd back = res.L * res.L.transpose();
    REQUIRE((back - sigma).cwiseAbs().maxCoeff() < 1e-9 * sigma.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("cholesky regularizes a rank-deficient matrix", "[linalg]") {
  patt::rng_stream rng(7, 0);
  Eigen::VectorXd u = rng.normal_vector(6);
  Eigen::MatrixXd sigma = u * u.transpose();  // rank 1, not PD
  auto res = patt::cholesky_regularized(sigma);
  REQUIRE(res.epsilon_used > 0.0);
  REQUIRE(res.regularization_steps >= 1);
  Eigen::MatrixXd target = sigma;
  target.diagonal().array() += res.epsilon_used;
  Eigen::MatrixXd back = res.L * res.L.transpose();
  REQUIRE((back - target).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, target.cwiseAbs().maxCoeff()));
}

TEST_CASE("cholesky rejects bad input", "[linalg]") {
  Eigen::MatrixXd nonsquare(2, 3);
  nonsquare.setZero();
  REQUIRE_THROWS_AS(patt::cholesky_regularized(nonsquare), patt::usage_error);

  Eigen::MatrixXd withnan = Eigen::MatrixXd::Identity(2, 2);
  withnan(0, 1) = std::nan("");
  REQUIRE_THROWS_AS(patt::cholesky_regularized(withnan), patt::numerical_error);
}

TEST_CASE("quadratic form through the factor matches a frozen value", "[linalg]") {
  Eigen::MatrixXd pi(3, 3);
  pi << 2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 0.5;
  Eigen::VectorXd r(3);
  r << 0.4 - 1.0, -1.0 + 2.0, 1.25 - 0.5;
  auto res = patt::cholesky_regularized(pi);
  REQUIRE(patt::quadform_from_chol(res.L, r) == Catch::Approx(3.513114285714286).epsilon(1e-12));
}

TEST_CASE("quadratic form agrees with a dense solve", "[linalg]") {
  patt::rng_stream rng(99, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3 + 2 * trial;
    Eigen::MatrixXd sigma = random_spd(d, rng);
    Eigen::VectorXd r = rng.normal_vector(d);
    auto res = patt::cholesky_regularized(sigma);
    const double direct = r.dot(sigma.ldlt().solve(r));
    REQUIRE(patt::quadform_from_chol(res.L, r) == Catch::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("gaussian log-density matches a frozen value", "[linalg]") {
  Eigen::VectorXd c(3), x(3);
  c << 0.5, -1.0, 2.0;
  x << 1.0, 0.2, -0.7;
  Eigen::MatrixXd L(3, 3);
  L << 1.5, 0.0, 0.0, 0.3, 0.8, 0.0, -0.2, 0.1, 2.0;
  REQUIRE(patt::mvn_logpdf(x, &c, &L) == Catch::Approx(-5.5928420626623625).epsilon(1e-13));
}

TEST_CASE("gaussian log-density fast paths agree with the general path", "[linalg]") {
  Eigen::VectorXd x(3);
  x << 1.0, 0.2, -0.7;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  REQUIRE(patt::mvn_logpdf(x, nullptr, nullptr) ==
          Catch::Approx(patt::mvn_logpdf(x, &zero, &eye)).epsilon(1e-14));
  // sigma scales the whole factor: N(x; c, sigma^2 L L^T)
  Eigen::MatrixXd two = 2.0 * eye;
  REQUIRE(patt::mvn_logpdf(x, nullptr, nullptr, 2.0) ==
          Catch::Approx(patt::mvn_logpdf(x, &zero, &two, 1.0)).epsilon(1e-14));
}

TEST_CASE("softplus is stable at extreme arguments", "[linalg]") {
  REQUIRE(patt::softplus(40.0) == 40.0);
  REQUIRE(patt::softplus(-40.0) == Catch::Approx(4.248354255291589e-18).epsilon(1e-12));
  REQUIRE(patt::softplus(0.0) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
}
