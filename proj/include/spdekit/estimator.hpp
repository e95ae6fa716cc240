#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spdekit/drift.hpp"
#include "spdekit/trajectory.hpp"

namespace spdekit {

using Matrix = Eigen::MatrixXd;

/// What to estimate and from which part of the data.
struct EstimationProblem {
  /// terms[0] is the diffusion term. Terms flagged `known` (and every entry
  /// of fixed_terms) enter with their stored intensity; the rest are unknown.
  DriftDictionary dictionary;
  /// Exponent alpha of the (-Laplace)^alpha weight applied to every term.
  double weight_exponent = 0.0;
  /// Observed modes X_N; 0 means every mode of the trajectory.
  int mode_count = 0;
  /// Modes [first_mode, N) enter the sums; the drift is still evaluated on X_N.
  int first_mode = 0;
  /// Optional [t_a, t_b] restriction of the observation window.
  std::optional<std::pair<double, double>> time_range;
  /// Pseudospectral grid; empty means the dealiased default.
  std::vector<int> quad_shape;

  /// Plain diffusivity problem: diffusion is the only (unknown) term.
  static EstimationProblem plain(double weight_exponent = 0.0, int mode_count = 0);
};

struct NormalEquations {
  Matrix gram;                    ///< A_N over the unknown terms
  Vector rhs;                     ///< b_N
  std::vector<std::string> names; ///< unknown term names, dictionary order
  std::vector<int> term_index;    ///< their positions in dictionary.terms
  int N = 0;
  double T = 0.0;
  double dt = 0.0;
};

/// A_ij = sum_m <G_i(t_m), G_j(t_m)> dt,
/// b_i  = sum_m <G_i(t_m), dX_m - G_*(t_m) dt>,
/// with G_i the weighted mode coefficients of F_i(X_N) at the left endpoint
/// and <.,.> the mode-space inner product. Sums run in ascending time order.
NormalEquations assemble_normal_equations(const ModeTrajectory& traj,
                                          const EstimationProblem& problem);

struct LeastSquaresSolution {
  Vector theta;
  double condition_number = 0.0;
  bool ill_conditioned = false;  ///< condition number above 1e10
};

/// Solves A theta = b by Cholesky. A rank-deficient A raises NumericalError
/// naming the collinear terms when `names` is given.
LeastSquaresSolution solve_least_squares(const Matrix& gram, const Vector& rhs,
                                         const std::vector<std::string>& names = {});

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct EstimationResult {
  std::vector<std::string> names;
  Vector theta_hat;
  Matrix gram;
  Vector rhs;
  double condition_number = 0.0;
  bool ill_conditioned = false;
  /// CLT interval, filled for the diffusivity when it is estimated and positive.
  std::vector<std::optional<Interval>> confidence;
  std::vector<std::optional<double>> standard_error;
  int N_used = 0;
  double T_used = 0.0;
  double dt = 0.0;
};

/// Assembles, solves and attaches diffusivity confidence intervals.
EstimationResult estimate(const ModeTrajectory& traj, const EstimationProblem& problem,
                          double z = 1.96);

/// theta_0 = sum_m sum_k lambda^{1+2a} X_k(t_m) (-dX_k) / sum_m sum_k lambda^{2+2a} X_k^2 dt.
double plain_diffusivity(const ModeTrajectory& traj, double weight_exponent = 0.0);

/// Closed form of the diffusion-term numerator int <(Laplace X)_N, dX_N>:
/// -1/2 sum_k lambda_k (X_k(T)^2 - X_k(0)^2 - sigma^2 lambda_k^{-2 gamma} T).
/// The overall minus sign follows from lambda_k >= 0 being eigenvalues of -Laplace.
double ito_numerator_closed_form(const ModeTrajectory& traj, double sigma, double gamma);

enum class RiemannRule { Left, Right };

/// Riemann sum sum_m sum_k (-lambda_k) X_k(t*) (X_k(t_{m+1}) - X_k(t_m)),
/// t* the left or right endpoint.
double ito_numerator_riemann(const ModeTrajectory& traj, RiemannRule rule = RiemannRule::Left);

struct NoiseEstimate {
  double sigma = 0.0;
  double gamma = 0.0;
  double lambda_a = 0.0;
  double lambda_b = 0.0;
};

/// Quadratic-variation identification from the two smallest distinct
/// nonzero eigenvalues; equal-eigenvalue modes are averaged first.
NoiseEstimate identify_noise_parameters(const ModeTrajectory& traj);

struct LassoOptions {
  /// Coordinates exempt from the penalty (e.g. the diffusivity).
  std::vector<bool> unpenalized;
  double tolerance = 1e-10;
  int max_sweeps = 200000;
};

/// Cyclic coordinate descent on 1/2 t'At - b't + lambda sum|t_i| for each
/// lambda, warm-started along the grid.
std::vector<Vector> lasso_path(const Matrix& gram, const Vector& rhs,
                               const std::vector<double>& lambda_grid,
                               const LassoOptions& options = {});

/// `count` log-spaced values from the smallest lambda giving an all-zero
/// penalized solution down to ratio times it, followed by 0.
std::vector<double> default_lambda_grid(const Matrix& gram, const Vector& rhs,
                                        const LassoOptions& options = {}, int count = 50,
                                        double ratio = 1e-4);

/// Renormalized least-squares objective 1/2 t'At - b't.
double renormalized_objective(const Matrix& gram, const Vector& rhs, const Vector& theta);

/// Stability index: reaction 2, advection 1, inhibitor 4, fractional 2 - alpha.
double stability_index(const DriftTerm& term);
/// Composite rule: the minimum over the components.
double stability_index(const std::vector<DriftTerm>& terms);

}  // namespace spdekit
