#include "spdekit/trajectory.hpp"

#include <cmath>
#include <string>

#include "spdekit/error.hpp"
#include "spdekit/spectral_grid.hpp"

namespace spdekit {

double ModeTrajectory::uniform_dt() const {
  if (times.size() < 2) throw InvalidArgument("trajectory needs at least two time points");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (std::abs((times[m] - times[m - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InvalidArgument("time grid is not uniform at step " + std::to_string(m));
    }
  }
  return dt;
}

ModeTrajectory ModeTrajectory::truncated(int n) const {
  if (n < 1 || n > mode_count()) {
    throw InvalidArgument("cannot observe " + std::to_string(n) + " of " +
                          std::to_string(mode_count()) + " modes");
  }
  return {basis.truncated(n), times, coeffs.leftCols(n)};
}

void ModeTrajectory::validate() const {
  if (coeffs.rows() != static_cast<Eigen::Index>(times.size())) {
    throw InvalidArgument("coefficient rows do not match the number of times");
  }
  if (coeffs.cols() != basis.size()) {
    throw InvalidArgument("coefficient columns do not match the basis size");
  }
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (!(times[m] > times[m - 1])) throw InvalidArgument("times must be strictly increasing");
  }
  if (!coeffs.allFinite()) throw InvalidArgument("trajectory contains non-finite values");
}

int GridFrameSeries::point_count() const noexcept {
  int p = 1;
  for (int n : grid_shape) p *= n;
  return p;
}

void GridFrameSeries::validate() const {
  if (static_cast<int>(grid_shape.size()) != domain.dim()) {
    throw InvalidArgument("grid shape does not match the domain dimension");
  }
  for (int n : grid_shape) {
    if (n < 1) throw InvalidArgument("grid extents must be positive");
  }
  if (frames.rows() < 2) throw InvalidArgument("a frame series needs at least two frames");
  if (frames.cols() != point_count()) {
    throw InvalidArgument("frame size does not match the grid shape");
  }
  if (!(dt > 0.0)) throw InvalidArgument("frame spacing must be positive");
  if (!frames.allFinite()) throw InvalidArgument("frames contain non-finite values");
}

ModeTrajectory project_frames_to_modes(const GridFrameSeries& frames,
                                       const SpectralBasis& basis) {
  frames.validate();
  if (!(basis.domain() == frames.domain)) {
    throw InvalidArgument("basis and frames live on different domains");
  }
  if (basis.size() > frames.point_count()) {
    throw InvalidArgument("more modes requested than grid points available");
  }
  SpectralGrid grid(basis, frames.grid_shape);
  ModeTrajectory out;
  out.basis = basis;
  out.coeffs.resize(frames.frames.rows(), basis.size());
  out.times.resize(static_cast<std::size_t>(frames.frames.rows()));
  for (Eigen::Index m = 0; m < frames.frames.rows(); ++m) {
    out.times[static_cast<std::size_t>(m)] = frames.dt * static_cast<double>(m);
    grid.project({frames.frames.row(m).data(), static_cast<std::size_t>(frames.frames.cols())},
                 {out.coeffs.row(m).data(), static_cast<std::size_t>(basis.size())});
  }
  return out;
}

GridFrameSeries modes_to_grid(const ModeTrajectory& traj, const std::vector<int>& grid_shape) {
  SpectralGrid grid(traj.basis, grid_shape);
  GridFrameSeries out;
  out.domain = traj.basis.domain();
  out.grid_shape = grid_shape;
  out.dt = traj.times.size() >= 2 ? traj.uniform_dt() : 1.0;
  out.frames.resize(traj.coeffs.rows(), grid.point_count());
  for (Eigen::Index m = 0; m < traj.coeffs.rows(); ++m) {
    grid.synthesize({traj.coeffs.row(m).data(), static_cast<std::size_t>(traj.coeffs.cols())},
                    {out.frames.row(m).data(), static_cast<std::size_t>(grid.point_count())});
  }
  return out;
}

}  // namespace spdekit
