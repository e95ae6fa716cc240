#pragma once

#include <cstdint>
#include <vector>

#include "spdekit/domain.hpp"
#include "spdekit/drift.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/trajectory.hpp"

namespace spdekit {

struct SimulationConfig {
  Domain domain;
  int n_modes = 64;             ///< N_sim, modes integrated
  bool include_zero_mode = true;
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  int observe = 0;              ///< modes returned; 0 means all n_modes
  int stride = 1;               ///< keep every stride-th step
  Vector initial;               ///< initial mode vector; empty means zero
  double blowup_bound = 1e12;
  std::vector<int> quad_shape;  ///< pseudospectral grid; empty means dealiased default
  RowMatrix increments;         ///< steps x n_modes noise increments; empty means drawn from seed

  void validate() const;
  long steps() const;
};

/// Semi-implicit Euler-Maruyama in mode space: the diffusion term is
/// implicit, every other term explicit at the left endpoint,
///   X_{m+1} = (X_m + dt * sum_i theta_i F_i(X_m) + dW_m) / (1 + theta_0 lambda dt).
/// Inhibitor terms advance by their exact exponential recursion.
ModeTrajectory simulate(const DriftDictionary& dict, const NoiseSpec& noise,
                        const SimulationConfig& config);

/// Activator trajectory U of the FitzHugh-Nagumo system, U(0) = V(0) = 0
/// unless config.initial is set. When `inhibitor` is non-null it receives V.
ModeTrajectory simulate(const FHNParams& params, const NoiseSpec& noise,
                        const SimulationConfig& config, ModeTrajectory* inhibitor = nullptr);

/// Periodic Gaussian smoothing: multiplies every Fourier component of the
/// frames by exp(-lambda sigma_f^2 / 2).
GridFrameSeries smooth_frames(const GridFrameSeries& frames, double bandwidth);

/// The same filter applied to mode coefficients.
ModeTrajectory smooth_modes(const ModeTrajectory& traj, double bandwidth);

}  // namespace spdekit
