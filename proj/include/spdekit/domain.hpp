#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace spdekit {

using Vector = Eigen::VectorXd;
using Wavevector = std::array<int, 3>;

/// Periodic rectangle [0,L_1] x ... x [0,L_d], d in {1,2,3}.
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<double> lengths);

  int dim() const noexcept { return static_cast<int>(lengths_.size()); }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  double length(int axis) const { return lengths_.at(axis); }
  double volume() const noexcept;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::vector<double> lengths_{1.0};
};

/// One real trigonometric eigenfunction of -Laplace on the periodic box.
/// The zero wavevector is the constant function |D|^{-1/2}; every other
/// wavevector is stored once (first nonzero component positive) and carries
/// a cosine and a sine partner, each normalized by sqrt(2/|D|).
struct Mode {
  Wavevector wavevector{0, 0, 0};
  bool sine = false;
  double eigenvalue = 0.0;

  bool is_zero() const noexcept {
    return wavevector[0] == 0 && wavevector[1] == 0 && wavevector[2] == 0;
  }
};

/// The first N eigenpairs of -Laplace, ascending in eigenvalue; ties broken
/// lexicographically on the wavevector, cosine before sine.
class SpectralBasis {
 public:
  SpectralBasis() = default;
  SpectralBasis(Domain domain, std::vector<Mode> modes);

  const Domain& domain() const noexcept { return domain_; }
  int size() const noexcept { return static_cast<int>(modes_.size()); }
  const Mode& mode(int k) const { return modes_.at(k); }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  bool has_zero_mode() const noexcept;

  /// Largest |m_i| over all modes, per axis.
  std::array<int, 3> max_wavenumber() const noexcept;

  /// Basis made of the first n modes.
  SpectralBasis truncated(int n) const;

  /// Smallest strictly positive eigenvalue ("first eigenfrequency").
  double first_nonzero_eigenvalue() const;

 private:
  Domain domain_;
  std::vector<Mode> modes_;
  Vector eigenvalues_;
};

SpectralBasis build_basis(const Domain& domain, int n_modes,
                          bool include_zero_mode = true);

/// Lambda = 4 pi^2 (B_d |D|)^{-2/d}, the limit of lambda_k / k^{2/d}.
double weyl_constant(const Domain& domain);

/// Multiplies coefficient k by lambda_k^gamma.
Vector apply_fractional_laplacian(const Vector& coeffs,
                                  const SpectralBasis& basis, double gamma);

/// lambda_k^gamma for every mode, with 0^gamma := 0 for gamma > 0 and
/// 0^0 := 1. Throws for gamma < 0 on a basis containing the zero mode.
Vector eigenvalue_powers(const SpectralBasis& basis, double gamma);

}  // namespace spdekit
