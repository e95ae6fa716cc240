#pragma once

#include <optional>
#include <string>

#include "spdekit/estimator.hpp"

namespace spdekit {

/// Asymptotic variance 2 theta0 (d + 2) / (T Lambda d) of
/// N^{1/2 + 1/d} (theta0_hat - theta0).
double clt_variance(double theta0, int d, double T, double weyl);

/// theta0_hat -+ z sqrt(clt_variance(theta0_hat, ...) / N^{1 + 2/d}).
Interval confidence_interval(double theta0_hat, int d, double T, double weyl, int N,
                             double z = 1.96);

enum class EstimatedParameter { Diffusivity, Reaction };

struct RatePrediction {
  enum class Kind { PowerLaw, Logarithmic, NoDecay };
  Kind kind = Kind::PowerLaw;
  double exponent = 0.0;  ///< power of N; meaningful for PowerLaw only
  bool clt = false;       ///< CLT with unchanged intervals holds

  std::string describe() const;
};

/// Predicted decay of the estimation error in N. `misspec_eta` is the
/// stability index of a misspecified drift (diffusivity only).
RatePrediction predicted_rate(EstimatedParameter parameter, int d,
                              std::optional<double> misspec_eta = std::nullopt);

}  // namespace spdekit
