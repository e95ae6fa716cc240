#include "spdekit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spdekit/error.hpp"

namespace spdekit {

Domain::Domain(std::vector<double> lengths) : lengths_(std::move(lengths)) {
  if (lengths_.empty() || lengths_.size() > 3) {
    throw InvalidArgument("domain dimension must be 1, 2 or 3, got " +
                          std::to_string(lengths_.size()));
  }
  for (double l : lengths_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InvalidArgument("domain side lengths must be positive and finite");
    }
  }
}

double Domain::volume() const noexcept {
  double v = 1.0;
  for (double l : lengths_) v *= l;
  return v;
}

SpectralBasis::SpectralBasis(Domain domain, std::vector<Mode> modes)
    : domain_(std::move(domain)), modes_(std::move(modes)) {
  eigenvalues_.resize(static_cast<Eigen::Index>(modes_.size()));
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    eigenvalues_[static_cast<Eigen::Index>(k)] = modes_[k].eigenvalue;
  }
}

bool SpectralBasis::has_zero_mode() const noexcept {
  return std::any_of(modes_.begin(), modes_.end(),
                     [](const Mode& m) { return m.is_zero(); });
}

std::array<int, 3> SpectralBasis::max_wavenumber() const noexcept {
  std::array<int, 3> out{0, 0, 0};
  for (const auto& m : modes_) {
    for (int i = 0; i < 3; ++i) out[i] = std::max(out[i], std::abs(m.wavevector[i]));
  }
  return out;
}

SpectralBasis SpectralBasis::truncated(int n) const {
  if (n < 1 || n > size()) {
    throw InvalidArgument("cannot truncate a basis of " + std::to_string(size()) +
                          " modes to " + std::to_string(n));
  }
  return SpectralBasis(domain_, std::vector<Mode>(modes_.begin(), modes_.begin() + n));
}

double SpectralBasis::first_nonzero_eigenvalue() const {
  for (const auto& m : modes_) {
    if (m.eigenvalue > 0.0) return m.eigenvalue;
  }
  throw InvalidArgument("basis has no mode with a nonzero eigenvalue");
}

namespace {

double eigenvalue_of(const Domain& domain, const Wavevector& m) {
  double lambda = 0.0;
  for (int i = 0; i < domain.dim(); ++i) {
    const double q = 2.0 * std::numbers::pi * m[i] / domain.length(i);
    lambda += q * q;
  }
  return lambda;
}

// First nonzero component positive: one representative per +-m pair.
bool is_canonical(const Wavevector& m) {
  for (int v : m) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

std::vector<Mode> enumerate_modes(const Domain& domain, int radius,
                                  bool include_zero_mode) {
  const int d = domain.dim();
  std::vector<Mode> out;
  Wavevector m{0, 0, 0};
  const int r1 = radius;
  const int r2 = d >= 2 ? radius : 0;
  const int r3 = d >= 3 ? radius : 0;
  for (m[0] = -r1; m[0] <= r1; ++m[0]) {
    for (m[1] = -r2; m[1] <= r2; ++m[1]) {
      for (m[2] = -r3; m[2] <= r3; ++m[2]) {
        const double lambda = eigenvalue_of(domain, m);
        if (m[0] == 0 && m[1] == 0 && m[2] == 0) {
          if (include_zero_mode) out.push_back({m, false, 0.0});
          continue;
        }
        if (!is_canonical(m)) continue;
        out.push_back({m, false, lambda});
        out.push_back({m, true, lambda});
      }
    }
  }
  return out;
}

bool mode_less(const Mode& a, const Mode& b) {
  if (a.eigenvalue != b.eigenvalue) return a.eigenvalue < b.eigenvalue;
  if (a.wavevector != b.wavevector) return a.wavevector < b.wavevector;
  return !a.sine && b.sine;
}

}  // namespace

SpectralBasis build_basis(const Domain& domain, int n_modes, bool include_zero_mode) {
  if (n_modes < 1) {
    throw InvalidArgument("number of modes must be at least 1, got " +
                          std::to_string(n_modes));
  }
  // Grow the enumeration box until every wavevector outside it is strictly
  // above the n-th eigenvalue found inside.
  int radius = 1;
  for (;;) {
    auto modes = enumerate_modes(domain, radius, include_zero_mode);
    if (static_cast<int>(modes.size()) >= n_modes) {
      std::sort(modes.begin(), modes.end(), mode_less);
      double outside = std::numeric_limits<double>::infinity();
      for (int i = 0; i < domain.dim(); ++i) {
        const double q = 2.0 * std::numbers::pi * (radius + 1) / domain.length(i);
        outside = std::min(outside, q * q);
      }
      if (modes[static_cast<std::size_t>(n_modes) - 1].eigenvalue < outside) {
        modes.resize(static_cast<std::size_t>(n_modes));
        return SpectralBasis(domain, std::move(modes));
      }
    }
    radius = std::max(radius + 1, radius * 3 / 2);
  }
}

double weyl_constant(const Domain& domain) {
  constexpr double pi = std::numbers::pi;
  const int d = domain.dim();
  const double unit_ball = d == 1 ? 2.0 : d == 2 ? pi : 4.0 * pi / 3.0;
  return 4.0 * pi * pi * std::pow(unit_ball * domain.volume(), -2.0 / d);
}

Vector eigenvalue_powers(const SpectralBasis& basis, double gamma) {
  const Vector& lambda = basis.eigenvalues();
  Vector out(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0.0) {
      if (gamma < 0.0) {
        throw InvalidArgument(
            "negative power of the Laplacian is undefined on the zero mode");
      }
      out[k] = gamma == 0.0 ? 1.0 : 0.0;
    } else {
      out[k] = gamma == 0.0 ? 1.0 : std::pow(lambda[k], gamma);
    }
  }
  return out;
}

Vector apply_fractional_laplacian(const Vector& coeffs, const SpectralBasis& basis,
                                  double gamma) {
  if (coeffs.size() != basis.size()) {
    throw InvalidArgument("coefficient vector length does not match the basis");
  }
  return coeffs.cwiseProduct(eigenvalue_powers(basis, gamma));
}

}  // namespace spdekit
