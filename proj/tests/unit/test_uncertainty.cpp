#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spdekit/error.hpp"
#include "spdekit/uncertainty.hpp"

using namespace spdekit;

TEST_SUITE("uncertainty") {

TEST_CASE("CLT variance") {
  CHECK(clt_variance(1.0, 2, 10.0, 1.0 / std::numbers::pi) == doctest::Approx(2.0 * std::numbers::pi / 5.0));
  CHECK(clt_variance(1.0, 1, 1.0, 0.25) == doctest::Approx(24.0));
  CHECK(clt_variance(1.0, 1, 2.0, 0.25) == doctest::Approx(12.0));
  CHECK(clt_variance(3.0, 3, 1.0, 0.5) == doctest::Approx(3.0 * clt_variance(1.0, 3, 1.0, 0.5)));
  CHECK(clt_variance(1.0, 3, 1.0, 1.0) == doctest::Approx(2.0 * clt_variance(1.0, 3, 1.0, 2.0)));
  CHECK_THROWS_AS(clt_variance(0.0, 1, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(clt_variance(1.0, 4, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("confidence interval") {
  const auto ci = confidence_interval(1.0, 1, 1.0, 0.25, 100);
  const double half = 1.96 * std::sqrt(24.0 / 1e6);
  CHECK(ci.high - 1.0 == doctest::Approx(half));
  CHECK(1.0 - ci.low == doctest::Approx(half));
  CHECK(half == doctest::Approx(9.6e-3).epsilon(0.01));

  const auto a = confidence_interval(2.0, 2, 3.0, 0.3, 50);
  const auto b = confidence_interval(2.0, 2, 3.0, 0.3, 100);
  CHECK((a.high - a.low) / (b.high - b.low) == doctest::Approx(2.0));
  CHECK(a.low < 2.0);
  CHECK(a.high > 2.0);
  CHECK_THROWS_AS(confidence_interval(-0.1, 1, 1.0, 0.25, 10), NumericalError);
  CHECK_THROWS_AS(confidence_interval(0.0, 1, 1.0, 0.25, 10), NumericalError);
}

TEST_CASE("predicted rates") {
  using K = RatePrediction::Kind;
  const auto diff2 = predicted_rate(EstimatedParameter::Diffusivity, 2);
  CHECK(diff2.kind == K::PowerLaw);
  CHECK(diff2.exponent == doctest::Approx(-1.0));
  CHECK(diff2.clt);
  CHECK(predicted_rate(EstimatedParameter::Diffusivity, 1).exponent == doctest::Approx(-1.5));

  const auto r3 = predicted_rate(EstimatedParameter::Reaction, 3);
  CHECK(r3.kind == K::PowerLaw);
  CHECK(r3.exponent == doctest::Approx(-1.0 / 6.0));
  CHECK(predicted_rate(EstimatedParameter::Reaction, 2).kind == K::Logarithmic);
  CHECK(predicted_rate(EstimatedParameter::Reaction, 1).kind == K::NoDecay);

  const auto m3 = predicted_rate(EstimatedParameter::Diffusivity, 3, 2.0);
  CHECK(m3.kind == K::PowerLaw);
  CHECK(m3.exponent == doctest::Approx(-2.0 / 3.0));
  CHECK_FALSE(m3.clt);

  const auto boundary = predicted_rate(EstimatedParameter::Diffusivity, 2, 2.0);
  CHECK(boundary.exponent == doctest::Approx(-1.0));
  CHECK_FALSE(boundary.clt);
  CHECK(predicted_rate(EstimatedParameter::Diffusivity, 2, 4.0).clt);
  CHECK(predicted_rate(EstimatedParameter::Diffusivity, 2, 1.0).exponent == doctest::Approx(-0.5));

  CHECK_THROWS_AS(predicted_rate(EstimatedParameter::Diffusivity, 2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(predicted_rate(EstimatedParameter::Diffusivity, 0), InvalidArgument);
  CHECK_FALSE(predicted_rate(EstimatedParameter::Reaction, 2).describe().empty());

  for (int d = 1; d <= 3; ++d) {
    double prev = 0.0;
    for (double eta = 0.25; eta <= 6.0; eta += 0.25) {
      const double e = predicted_rate(EstimatedParameter::Diffusivity, d, eta).exponent;
      CHECK(e <= prev + 1e-15);
      prev = e;
    }
  }
}

}  // TEST_SUITE
