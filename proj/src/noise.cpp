#include "spdekit/noise.hpp"

#include <cmath>

#include "spdekit/error.hpp"
#include "spdekit/rng.hpp"

namespace spdekit {

namespace {
constexpr std::uint32_t kNoiseStream = 0x6e6f6973u;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::White: return "white";
    case NoiseKind::SpatialCorrelated: return "correlated";
    case NoiseKind::OuForcing: return "ou-forcing";
    case NoiseKind::OuIntegrated: return "ou-integrated";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "white") return NoiseKind::White;
  if (name == "correlated") return NoiseKind::SpatialCorrelated;
  if (name == "ou-forcing") return NoiseKind::OuForcing;
  if (name == "ou-integrated") return NoiseKind::OuIntegrated;
  throw InvalidArgument("unknown noise kind '" + name +
                        "' (expected white, correlated, ou-forcing, ou-integrated)");
}

void NoiseSpec::validate() const {
  if (!(sigma > 0.0)) throw InvalidArgument("noise intensity sigma must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("noise correlation exponent gamma must be >= 0");
  if (!(mu >= 0.0)) throw InvalidArgument("noise relaxation rate mu must be >= 0");
}

Vector NoiseSpec::mode_variance(const SpectralBasis& basis) const {
  const double g = kind == NoiseKind::SpatialCorrelated ? gamma : 0.0;
  if (g > 0.0 && basis.has_zero_mode()) {
    throw InvalidArgument("spatially correlated noise with gamma > 0 is undefined on the zero mode");
  }
  return eigenvalue_powers(basis, -2.0 * g) * (sigma * sigma);
}

NoiseStream::NoiseStream(const NoiseSpec& spec, const SpectralBasis& basis, double dt,
                         std::uint64_t seed)
    : spec_(spec), dt_(dt), seed_(seed) {
  spec_.validate();
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const Vector q = spec_.mode_variance(basis);
  // Exact OU transition: variance q (1 - e^{-2 mu dt}) / (2 mu), -> q dt as mu -> 0.
  double transition = dt;
  if (spec_.kind == NoiseKind::OuForcing || spec_.kind == NoiseKind::OuIntegrated) {
    decay_ = std::exp(-spec_.mu * dt);
    if (spec_.mu > 0.0) transition = -std::expm1(-2.0 * spec_.mu * dt) / (2.0 * spec_.mu);
  }
  scale_ = (q * transition).cwiseSqrt();
  state_ = Vector::Zero(basis.size());
}

void NoiseStream::next(std::span<double> out) {
  const auto n = static_cast<Eigen::Index>(out.size());
  if (n > scale_.size()) throw InvalidArgument("more noise modes requested than the basis holds");
  const auto step = static_cast<std::uint64_t>(step_);
  Eigen::Index k = 0;
  auto draw = [&](Eigen::Index mode, double z) {
    switch (spec_.kind) {
      case NoiseKind::White:
      case NoiseKind::SpatialCorrelated:
        out[mode] = scale_[mode] * z;
        break;
      case NoiseKind::OuForcing:
        // Left-point value of xi times dt, then advance xi.
        out[mode] = state_[mode] * dt_;
        state_[mode] = decay_ * state_[mode] + scale_[mode] * z;
        break;
      case NoiseKind::OuIntegrated: {
        const double next = decay_ * state_[mode] + scale_[mode] * z;
        out[mode] = next - state_[mode];
        state_[mode] = next;
        break;
      }
    }
  };
  for (; k + 1 < n; k += 2) {
    const auto [a, b] = normal_pair(seed_, kNoiseStream, static_cast<std::uint32_t>(k / 2), step);
    draw(k, a);
    draw(k + 1, b);
  }
  if (k < n) draw(k, normal_at(seed_, kNoiseStream, static_cast<std::uint32_t>(k), step));
  ++step_;
}

RowMatrix sample_increments(const NoiseSpec& spec, const SpectralBasis& basis, double dt,
                            int steps, std::uint64_t seed) {
  if (steps < 1) throw InvalidArgument("number of steps must be at least 1");
  NoiseStream stream(spec, basis, dt, seed);
  RowMatrix out(steps, basis.size());
  for (int m = 0; m < steps; ++m) {
    stream.next({out.row(m).data(), static_cast<std::size_t>(basis.size())});
  }
  return out;
}

}  // namespace spdekit
