#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "spdekit/domain.hpp"

namespace spdekit {

/// Uniform periodic grid paired with a spectral basis. Converts between mode
/// coefficients and point values with FFTW; quadrature is the rectangle rule
/// with weight prod(h_i). Grid point j sits at x_i = j_i * L_i / n_i and
/// values are stored row-major (last axis fastest).
///
/// An instance owns scratch buffers and is not safe for concurrent use;
/// create one per thread.
class SpectralGrid {
 public:
  SpectralGrid(const SpectralBasis& basis, std::vector<int> shape);
  ~SpectralGrid();
  SpectralGrid(SpectralGrid&&) noexcept;
  SpectralGrid& operator=(SpectralGrid&&) noexcept;
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  /// Smallest FFT-friendly shape on which products of up to three basis
  /// functions, and products with a field of bandwidth extra_bandwidth, are
  /// free of aliasing onto the basis.
  static std::vector<int> dealiased_shape(const SpectralBasis& basis,
                                          int extra_bandwidth = 0);

  /// Smallest even shape on which every basis wavevector is representable.
  static std::vector<int> minimal_shape(const SpectralBasis& basis);

  const SpectralBasis& basis() const noexcept { return basis_; }
  const std::vector<int>& shape() const noexcept { return shape_; }
  int point_count() const noexcept { return points_; }
  double cell_volume() const noexcept { return cell_volume_; }
  /// Coordinate of grid index j along an axis.
  double coordinate(int axis, int j) const;

  void synthesize(std::span<const double> coeffs, std::span<double> values);
  void project(std::span<const double> values, std::span<double> coeffs);

  /// Projections of a grid field onto the cosine and the sine function of
  /// every basis wavevector (whichever partner the basis actually holds).
  void project_pairs(std::span<const double> values, std::span<double> cos_part,
                     std::span<double> sin_part);

 private:
  struct Slot;
  void forward(std::span<const double> values);

  SpectralBasis basis_;
  std::vector<int> shape_;
  int points_ = 0;
  int spectrum_size_ = 0;
  double cell_volume_ = 0.0;
  std::vector<Slot> slots_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Throws InvalidArgument when a basis wavevector cannot be represented on
/// the grid (|m_i| >= n_i / 2).
void check_representable(const SpectralBasis& basis, const std::vector<int>& shape);

}  // namespace spdekit
