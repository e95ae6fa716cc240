#pragma once

#include <vector>

#include <Eigen/Core>

#include "spdekit/domain.hpp"

namespace spdekit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time series of the first N spectral coefficients; row m holds X^{(k)}_{t_m}.
struct ModeTrajectory {
  SpectralBasis basis;
  std::vector<double> times;
  RowMatrix coeffs;

  int mode_count() const noexcept { return static_cast<int>(coeffs.cols()); }
  int step_count() const noexcept { return static_cast<int>(coeffs.rows()) - 1; }
  double duration() const { return times.back() - times.front(); }
  /// Common time step; throws InvalidArgument when the grid is not uniform.
  double uniform_dt() const;
  /// Keep the first n modes.
  ModeTrajectory truncated(int n) const;
  /// Throws InvalidArgument on shape mismatch, non-increasing times or
  /// non-finite coefficients.
  void validate() const;
};

/// Pixel frames of the field on a uniform grid, frame spacing dt.
/// Row m of `frames` is frame m, row-major over the grid.
struct GridFrameSeries {
  Domain domain;
  std::vector<int> grid_shape;
  double dt = 1.0;
  RowMatrix frames;

  int frame_count() const noexcept { return static_cast<int>(frames.rows()); }
  int point_count() const noexcept;
  void validate() const;
};

ModeTrajectory project_frames_to_modes(const GridFrameSeries& frames,
                                       const SpectralBasis& basis);

GridFrameSeries modes_to_grid(const ModeTrajectory& traj, const std::vector<int>& grid_shape);

}  // namespace spdekit
