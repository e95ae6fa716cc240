#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "spdekit/domain.hpp"
#include "spdekit/trajectory.hpp"

namespace spdekit {

enum class NoiseKind { White, SpatialCorrelated, OuForcing, OuIntegrated };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Fluctuation model. White is SpatialCorrelated with gamma = 0; the OU
/// kinds relax at rate mu and are white in space.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::White;
  double sigma = 1.0;
  double gamma = 0.0;
  double mu = 0.0;

  void validate() const;
  /// Per-mode intensity sigma^2 lambda_k^{-2 gamma} of the driving white noise.
  Vector mode_variance(const SpectralBasis& basis) const;
};

/// Stateful generator of per-step mode increments. Every Gaussian draw is
/// addressed by (seed, mode, step), so results do not depend on how many
/// modes are generated or in which order.
class NoiseStream {
 public:
  NoiseStream(const NoiseSpec& spec, const SpectralBasis& basis, double dt,
              std::uint64_t seed);

  /// Fills `out` with the increments over [t_step, t_step + dt] for the first
  /// out.size() modes. Steps must be requested in order 0, 1, 2, ...
  void next(std::span<double> out);
  long step() const noexcept { return step_; }

 private:
  NoiseSpec spec_;
  double dt_;
  std::uint64_t seed_;
  Vector scale_;   // std-dev of the fresh Gaussian per step and mode
  Vector state_;   // xi (OuForcing) or W (OuIntegrated)
  double decay_ = 1.0;
  long step_ = 0;
};

/// M x N matrix of increments (integral of xi over each step).
RowMatrix sample_increments(const NoiseSpec& spec, const SpectralBasis& basis, double dt,
                            int steps, std::uint64_t seed);

}  // namespace spdekit
