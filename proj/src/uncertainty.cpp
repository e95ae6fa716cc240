#include "spdekit/uncertainty.hpp"

#include <cmath>
#include <sstream>

#include "spdekit/error.hpp"

namespace spdekit {

double clt_variance(double theta0, int d, double T, double weyl) {
  if (!(theta0 > 0.0) || !(T > 0.0) || !(weyl > 0.0) || d < 1 || d > 3) {
    throw InvalidArgument("CLT variance needs theta0, T, Lambda > 0 and d in {1,2,3}");
  }
  return 2.0 * theta0 * (d + 2) / (T * weyl * d);
}

Interval confidence_interval(double theta0_hat, int d, double T, double weyl, int N, double z) {
  if (!(theta0_hat > 0.0)) {
    throw NumericalError("confidence interval needs a positive diffusivity estimate");
  }
  if (N < 1 || !(z > 0.0)) throw InvalidArgument("confidence interval needs N >= 1 and z > 0");
  const double var = clt_variance(theta0_hat, d, T, weyl) / std::pow(N, 1.0 + 2.0 / d);
  const double half = z * std::sqrt(var);
  return {theta0_hat - half, theta0_hat + half};
}

std::string RatePrediction::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::PowerLaw: os << "N^" << exponent; break;
    case Kind::Logarithmic: os << "1/ln(N)"; break;
    case Kind::NoDecay: os << "no decay"; break;
  }
  if (clt) os << " (CLT)";
  return os.str();
}

RatePrediction predicted_rate(EstimatedParameter parameter, int d, std::optional<double> eta) {
  if (d < 1 || d > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  RatePrediction r;
  if (parameter == EstimatedParameter::Reaction) {
    if (d >= 3) {
      r.exponent = -(0.5 - 1.0 / d);
    } else if (d == 2) {
      r.kind = RatePrediction::Kind::Logarithmic;
    } else {
      r.kind = RatePrediction::Kind::NoDecay;
    }
    return r;
  }
  const double full = -(0.5 + 1.0 / d);
  if (!eta) {
    r.exponent = full;
    r.clt = true;
    return r;
  }
  if (!(*eta > 0.0)) throw InvalidArgument("stability index must be positive");
  const double boundary = 1.0 + d / 2.0;
  if (*eta >= boundary) {
    r.exponent = full;
    r.clt = *eta > boundary;
  } else {
    r.exponent = -*eta / d;
  }
  return r;
}

}  // namespace spdekit
