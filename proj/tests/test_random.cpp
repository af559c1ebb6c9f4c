#include <doctest.h>

#include <cmath>
#include <vector>

#include "nhdp/random.hpp"

using nhdp::Rng;
using nhdp::Simplex;

TEST_CASE("dirichlet concentration limit pins the mean") {
  Rng rng(1);
  const Simplex s = nhdp::sample_dirichlet(std::vector<double>{1e9, 1e9}, rng);
  CHECK(std::abs(s[0] - 0.5) < 1e-3);
  CHECK(std::abs(s[1] - 0.5) < 1e-3);
}

TEST_CASE("dirichlet moments match closed form over 1e5 draws") {
  // Monte-Carlo oracle: symmetric Dirichlet(1,1,1) has mean 1/3 per entry;
  // Dirichlet(2,2) has Var[x0] = 2*2 / (4^2 * 5) = 0.05.
  Rng rng(2);
  const int n = 100000;
  double mean[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const Simplex s =
        nhdp::sample_dirichlet(std::vector<double>{1, 1, 1}, rng);
    for (int j = 0; j < 3; ++j) mean[j] += s[j];
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(mean[j] / n - 1.0 / 3) < 0.01);
  }

  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Simplex s = nhdp::sample_dirichlet(std::vector<double>{2, 2}, rng);
    sum += s[0];
    sum2 += s[0] * s[0];
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(std::abs(var - 0.05) < 0.005);
}

TEST_CASE("dirichlet rejects bad concentrations") {
  Rng rng(3);
  CHECK_THROWS_AS(nhdp::sample_dirichlet(std::vector<double>{}, rng),
                  nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::sample_dirichlet(std::vector<double>{1.0}, rng),
                  nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::sample_dirichlet(std::vector<double>{1.0, 0.0}, rng),
                  nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::sample_dirichlet(std::vector<double>{1.0, -2.0}, rng),
                  nhdp::ConfigError);
}

TEST_CASE("dirichlet draws are valid simplexes") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::size_t len = 2 + (rng.next_u64() % 6);
    std::vector<double> alpha(len);
    for (double& a : alpha) a = 0.05 + 3.0 * rng.next_unit();
    const Simplex s = nhdp::sample_dirichlet(alpha, rng);
    CHECK(Simplex::is_valid(s.weights()));
  }
}

TEST_CASE("beta mean over 1e5 draws") {
  Rng rng(5);
  const int n = 100000;
  double m11 = 0.0, m26 = 0.0;
  for (int i = 0; i < n; ++i) m11 += nhdp::sample_beta(1, 1, rng);
  for (int i = 0; i < n; ++i) m26 += nhdp::sample_beta(2, 6, rng);
  CHECK(std::abs(m11 / n - 0.5) < 0.01);
  CHECK(std::abs(m26 / n - 0.25) < 0.01);
}

TEST_CASE("beta degenerate concentration") {
  Rng rng(6);
  const double v = nhdp::sample_beta(1e9, 1, rng);
  CHECK(v > 1.0 - 1e-3);
  CHECK(v <= 1.0);
}

TEST_CASE("beta rejects non-positive parameters") {
  Rng rng(7);
  CHECK_THROWS_AS(nhdp::sample_beta(0.0, 1.0, rng), nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::sample_beta(1.0, -1.0, rng), nhdp::ConfigError);
}

TEST_CASE("discrete point mass always returns its atom") {
  Rng rng(8);
  const Simplex p(std::vector<double>{1.0, 0.0, 0.0});
  for (int i = 0; i < 100; ++i) CHECK(nhdp::sample_discrete(p, rng) == 0);
}

TEST_CASE("discrete frequencies within total variation 0.01") {
  Rng rng(9);
  const int n = 100000;
  {
    const Simplex p(std::vector<double>{0.5, 0.5});
    int zero = 0;
    for (int i = 0; i < n; ++i) zero += nhdp::sample_discrete(p, rng) == 0;
    CHECK(std::abs(double(zero) / n - 0.5) < 0.01);
  }
  {
    const Simplex p(std::vector<double>{0.2, 0.3, 0.5});
    double freq[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) freq[nhdp::sample_discrete(p, rng)] += 1.0;
    double tv = 0.0;
    for (int j = 0; j < 3; ++j) tv += std::abs(freq[j] / n - p[j]);
    CHECK(tv / 2 < 0.01);
  }
}

TEST_CASE("invalid simplex construction throws") {
  CHECK_THROWS_AS(Simplex(std::vector<double>{0.5, 0.6}), nhdp::ConfigError);
  CHECK_THROWS_AS(Simplex(std::vector<double>{-0.1, 1.1}), nhdp::ConfigError);
  CHECK_THROWS_AS(Simplex(std::vector<double>{}), nhdp::ConfigError);
}

TEST_CASE("log_sum_exp analytic values") {
  CHECK(nhdp::log_sum_exp(std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(nhdp::log_sum_exp(std::vector<double>{-1000.0, -1000.0}) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-12));
  CHECK(nhdp::log_sum_exp(std::vector<double>{3.25}) == 3.25);
  CHECK_THROWS_AS(nhdp::log_sum_exp(std::vector<double>{}),
                  nhdp::ConfigError);
}

TEST_CASE("log_sum_exp shift invariance") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng.next_u64() % 8;
    std::vector<double> v(len), shifted(len);
    const double c = -500.0 + 1000.0 * rng.next_unit();
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = -50.0 + 100.0 * rng.next_unit();
      shifted[i] = v[i] + c;
    }
    CHECK(std::abs(nhdp::log_sum_exp(shifted) - c - nhdp::log_sum_exp(v)) <
          1e-12);
  }
}

TEST_CASE("equal seeds give bitwise-identical interleaved draws") {
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    CHECK(nhdp::sample_beta(0.7, 2.3, a) == nhdp::sample_beta(0.7, 2.3, b));
    const Simplex pa =
        nhdp::sample_dirichlet(std::vector<double>{0.5, 1.5, 3.0}, a);
    const Simplex pb =
        nhdp::sample_dirichlet(std::vector<double>{0.5, 1.5, 3.0}, b);
    CHECK(pa.weights() == pb.weights());
    CHECK(nhdp::sample_discrete(pa, a) == nhdp::sample_discrete(pb, b));
    CHECK(a.next_u64() == b.next_u64());
  }
}
