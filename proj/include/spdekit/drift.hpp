#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdekit/domain.hpp"
#include "spdekit/spectral_grid.hpp"
#include "spdekit/trajectory.hpp"

namespace spdekit {

enum class TermKind {
  Diffusion,            ///< Laplace X, i.e. -lambda_k in mode space
  Poly,                 ///< X^j
  FhnF1,                ///< -X (u0 - X)
  FhnF2,                ///< X^2 (u0 - X)
  Advection,            ///< -div(X v)
  Inhibitor,            ///< -int_0^t e^{(t-s)(D_V Laplace - eps)} X(s) ds
  FractionalDiffusion,  ///< -(-Laplace)^{alpha/2} X
};

/// One plane-wave component A cos(2 pi m.x / L + phase) of a velocity
/// coordinate.
struct VelocityWave {
  int axis = 0;
  Wavevector wavevector{0, 0, 0};
  double amplitude = 0.0;
  double phase = 0.0;

  friend bool operator==(const VelocityWave&, const VelocityWave&) = default;
};

/// Stationary velocity field v(x): constant part plus a few plane waves.
struct VelocityField {
  std::array<double, 3> constant{0.0, 0.0, 0.0};
  std::vector<VelocityWave> waves;

  double value(int axis, std::span<const double> x, const Domain& domain) const;
  /// Largest |m_i| among the wave components.
  int bandwidth() const noexcept;
  /// v = amplitude * (sin(2 pi x_1/L_1), ..., sin(2 pi x_d/L_d)); compressible.
  static VelocityField compressible(int dim, double amplitude);

  friend bool operator==(const VelocityField&, const VelocityField&) = default;
};

struct DriftTerm {
  TermKind kind = TermKind::Diffusion;
  double intensity = 0.0;
  bool known = false;
  int power = 1;                      // Poly
  double u0 = 1.0;                    // FhnF1, FhnF2
  double inhibitor_diffusivity = 0.0; // Inhibitor: D_V
  double inhibitor_rate = 1.0;        // Inhibitor: eps
  double alpha = 1.0;                 // FractionalDiffusion
  VelocityField velocity;             // Advection

  static DriftTerm diffusion(double intensity, bool known = false);
  static DriftTerm poly(int power, double intensity, bool known = false);
  static DriftTerm fhn_f1(double u0, double intensity, bool known = false);
  static DriftTerm fhn_f2(double u0, double intensity, bool known = false);
  static DriftTerm advection(VelocityField v, double intensity, bool known = false);
  static DriftTerm inhibitor(double diffusivity, double rate, double intensity,
                             bool known = false);
  static DriftTerm fractional(double alpha, double intensity, bool known = false);

  /// Short identifier such as "diffusion", "poly3", "fhn_f1", "inhibitor".
  std::string name() const;
  /// True when the term acts as a diagonal multiplier in mode space.
  bool is_diagonal() const noexcept;
  bool needs_grid() const noexcept { return !is_diagonal() && kind != TermKind::Inhibitor; }
  /// Same operator (kind and shape parameters), ignoring intensity and flags.
  bool same_operator(const DriftTerm& other) const noexcept;
  void validate() const;
};

/// Ordered dictionary F_0..F_p with F_0 the diffusion term, plus fixed
/// terms F_* whose intensities are known.
struct DriftDictionary {
  std::vector<DriftTerm> terms;
  std::vector<DriftTerm> fixed_terms;

  void validate() const;
  const DriftTerm& diffusion() const { return terms.front(); }
  /// Bandwidth of the advection velocity fields, for grid sizing.
  int velocity_bandwidth() const noexcept;
  std::string describe() const;
};

/// Activator-inhibitor (FitzHugh-Nagumo type) parameters.
struct FHNParams {
  double diffusivity_u = 1.0;
  double diffusivity_v = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double eps = 1.0;
  double b = 1.0;
  double u0 = 1.0;
  double a = 0.5;

  void validate() const;
  /// theta_1 = k1 u0 a, theta_2 = k1, theta_3 = k2 eps b.
  std::array<double, 3> reaction_intensities() const noexcept;
  /// {diffusion D_U, F1, F2, F3} with the intensities above.
  DriftDictionary to_dictionary() const;
};

/// Mode-wise exact recursion of the inhibitor convolution,
/// g_k(t+dt) = e^{-a dt} g_k(t) + u_k(t) (1 - e^{-a dt}) / a, a = D_V lambda_k + eps.
class InhibitorState {
 public:
  InhibitorState(const SpectralBasis& basis, double diffusivity, double rate, double dt);
  void advance(std::span<const double> u);
  /// Current value of the (negative) convolution term, -g.
  void value(std::span<double> out) const;
  const Vector& convolution() const noexcept { return g_; }

 private:
  Vector decay_;
  Vector gain_;
  Vector g_;
};

/// Evaluates dictionary terms on a fixed basis. Pseudospectral terms are
/// computed on a dealiased grid: synthesize, apply the pointwise map,
/// project back. Not safe for concurrent use.
class DriftEvaluator {
 public:
  explicit DriftEvaluator(const SpectralBasis& basis, int velocity_bandwidth = 0,
                          std::vector<int> grid_shape = {});

  const SpectralBasis& basis() const noexcept { return basis_; }
  std::optional<std::vector<int>> grid_shape() const;

  /// Mode coefficients of F(X_N) for every term except Inhibitor, which
  /// needs history (see InhibitorState / inhibitor_convolution).
  void evaluate(const DriftTerm& term, std::span<const double> state, std::span<double> out);

 private:
  SpectralGrid& grid();
  const std::vector<std::vector<double>>& velocity_on_grid(const VelocityField& v);

  SpectralBasis basis_;
  int velocity_bandwidth_ = 0;
  std::vector<int> requested_shape_;
  std::unique_ptr<SpectralGrid> grid_;
  std::vector<double> values_;
  std::vector<double> work_;
  Vector cos_part_;
  Vector sin_part_;
  std::vector<std::pair<VelocityField, std::vector<std::vector<double>>>> velocity_cache_;
};

/// Stateless convenience wrapper around DriftEvaluator. Inhibitor terms use
/// `history` (whose last row must equal `state`).
Vector evaluate_drift_term(const DriftTerm& term, const Vector& state,
                           const SpectralBasis& basis,
                           const ModeTrajectory* history = nullptr,
                           std::vector<int> grid_shape = {});

/// Returns the F_3 trajectory -g(t_m) for the given activator trajectory,
/// starting from g(t_0) = 0.
ModeTrajectory inhibitor_convolution(const ModeTrajectory& u, double diffusivity, double rate);

}  // namespace spdekit
