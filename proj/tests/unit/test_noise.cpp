#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spdekit/error.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/rng.hpp"

using namespace spdekit;

namespace {

double column_variance(const RowMatrix& m, Eigen::Index col) {
  const double mean = m.col(col).mean();
  return (m.col(col).array() - mean).square().sum() / static_cast<double>(m.rows() - 1);
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("Philox4x32-10 known answers") {
  using P = Philox4x32;
  CHECK(P::generate({0, 0, 0, 0}, {0, 0}) ==
        P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(P::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                    {0xffffffffu, 0xffffffffu}) ==
        P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(P::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                    {0xa4093822u, 0x299f31d0u}) ==
        P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform mapping stays inside the open interval") {
  CHECK(to_unit_open(0) > 0.0);
  CHECK(to_unit_open(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("white increments have variance dt") {
  const auto basis = build_basis(Domain({2.0 * std::numbers::pi}), 4, true);
  const double dt = 1e-3;
  const auto inc = sample_increments({NoiseKind::White, 1.0}, basis, dt, 100000, 11);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double v = column_variance(inc, k) / dt;
    CHECK(v > 0.99);
    CHECK(v < 1.01);
  }
}

TEST_CASE("correlated increments scale as lambda^(-2 gamma)") {
  const auto basis = build_basis(Domain({2.0 * std::numbers::pi}), 4, false);  // 1, 1, 4, 4
  const double dt = 1e-2;
  NoiseSpec spec{NoiseKind::SpatialCorrelated, 1.0, 1.0};
  const auto inc = sample_increments(spec, basis, dt, 100000, 5);
  CHECK(basis.eigenvalues()[2] == doctest::Approx(4.0));
  CHECK(column_variance(inc, 2) == doctest::Approx(dt / 16.0).epsilon(0.02));
  CHECK(column_variance(inc, 3) == doctest::Approx(dt / 16.0).epsilon(0.02));
  CHECK(column_variance(inc, 0) == doctest::Approx(dt).epsilon(0.02));

  const auto with_zero = build_basis(Domain({1.0}), 3, true);
  CHECK_THROWS_AS(sample_increments(spec, with_zero, dt, 10, 0), InvalidArgument);
}

TEST_CASE("white equals correlated with gamma zero") {
  const auto basis = build_basis(Domain({1.0, 2.0}), 9, true);
  const auto a = sample_increments({NoiseKind::White, 1.3}, basis, 0.01, 50, 8);
  const auto b = sample_increments({NoiseKind::SpatialCorrelated, 1.3, 0.0}, basis, 0.01, 50, 8);
  CHECK(a == b);
}

TEST_CASE("OU forcing with mu = 0 integrates a Brownian motion") {
  const int modes = 8000;
  const double dt = 0.01;
  const int steps = 100;
  const auto basis = build_basis(Domain({1.0}), modes, true);
  const auto inc = sample_increments({NoiseKind::OuForcing, 1.0, 0.0, 0.0}, basis, dt, steps, 21);
  // Increment at step m is xi(t_m) dt with xi Brownian: Var / dt^2 = t_m.
  for (int m : {25, 50, 100 - 1}) {
    const double t = m * dt;
    const double v = inc.row(m).squaredNorm() / modes / (dt * dt);
    CHECK(v / t == doctest::Approx(1.0).epsilon(0.05));
  }
  // Accumulated path against the exact double sum of min(t_i, t_j).
  const Vector total = inc.colwise().sum().transpose();
  double exact = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) exact += std::min(i, j) * dt * dt * dt;
  }
  CHECK(total.squaredNorm() / modes == doctest::Approx(exact).epsilon(0.05));
  CHECK(inc.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("OU forcing approaches white noise as mu grows") {
  const double mu = 1e4;
  const double sigma = 0.7;
  const double dt = 1e-5;
  const int window = 1000;
  const int windows = 100;
  const auto basis = build_basis(Domain({1.0}), 128, true);
  const auto inc = sample_increments({NoiseKind::OuForcing, sigma * mu, 0.0, mu}, basis, dt,
                                     window * (windows + 1), 4);
  double sum = 0.0;
  int count = 0;
  for (int w = 1; w <= windows; ++w) {
    const Eigen::RowVectorXd agg = inc.middleRows(w * window, window).colwise().sum();
    sum += agg.squaredNorm();
    count += static_cast<int>(agg.size());
  }
  const double white = sigma * sigma * window * dt;
  CHECK(sum / count / white == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("OU integrated has the exact transition variance") {
  const double mu = 2.0;
  const double dt = 0.01;
  const int steps = 200;
  const auto basis = build_basis(Domain({1.0}), 4000, true);
  const auto inc = sample_increments({NoiseKind::OuIntegrated, 1.5, 0.0, mu}, basis, dt, steps, 2);
  const Vector w = inc.colwise().sum().transpose();
  const double t = steps * dt;
  const double exact = 2.25 * -std::expm1(-2.0 * mu * t) / (2.0 * mu);
  CHECK(w.squaredNorm() / w.size() == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("modes are uncorrelated") {
  const auto basis = build_basis(Domain({1.0}), 10, true);
  const int steps = 10000;
  const auto inc = sample_increments({NoiseKind::White, 1.0}, basis, 1.0, steps, 99);
  const double bound = 4.0 / std::sqrt(static_cast<double>(steps));
  for (Eigen::Index i = 0; i < 10; ++i) {
    for (Eigen::Index j = i + 1; j < 10; ++j) {
      const double c = inc.col(i).dot(inc.col(j)) /
                       std::sqrt(inc.col(i).squaredNorm() * inc.col(j).squaredNorm());
      CHECK(std::abs(c) < bound);
    }
  }
}

TEST_CASE("streams are reproducible and independent of the mode count") {
  const auto big = build_basis(Domain({1.0}), 10, true);
  const auto small = big.truncated(5);
  for (auto kind : {NoiseKind::White, NoiseKind::OuForcing, NoiseKind::OuIntegrated}) {
    NoiseSpec spec{kind, 1.0, 0.0, 0.5};
    const auto a = sample_increments(spec, big, 0.01, 64, 1234);
    const auto b = sample_increments(spec, big, 0.01, 64, 1234);
    const auto c = sample_increments(spec, small, 0.01, 64, 1234);
    CHECK(a == b);
    CHECK(RowMatrix(a.leftCols(5)) == c);
    const auto other = sample_increments(spec, big, 0.01, 64, 1235);
    CHECK(a != other);
  }
}

TEST_CASE("invalid noise parameters") {
  const auto basis = build_basis(Domain({1.0}), 3, true);
  CHECK_THROWS_AS(sample_increments({NoiseKind::White, 0.0}, basis, 0.1, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_increments({NoiseKind::White, 1.0, -1.0}, basis, 0.1, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_increments({NoiseKind::OuForcing, 1.0, 0.0, -1.0}, basis, 0.1, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_increments({NoiseKind::White, 1.0}, basis, 0.0, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_increments({NoiseKind::White, 1.0}, basis, 0.1, 0, 0), InvalidArgument);
  CHECK(noise_kind_from_string(to_string(NoiseKind::OuIntegrated)) == NoiseKind::OuIntegrated);
  CHECK_THROWS_AS(noise_kind_from_string("pink"), InvalidArgument);
}

}  // TEST_SUITE
