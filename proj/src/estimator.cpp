#include "spdekit/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spdekit/error.hpp"
#include "spdekit/uncertainty.hpp"

namespace spdekit {

EstimationProblem EstimationProblem::plain(double weight_exponent, int mode_count) {
  EstimationProblem p;
  p.dictionary.terms = {DriftTerm::diffusion(0.0)};
  p.weight_exponent = weight_exponent;
  p.mode_count = mode_count;
  return p;
}

namespace {

struct StepRange {
  long begin = 0;  // first left endpoint
  long end = 0;    // one past the last left endpoint
};

StepRange step_range(const ModeTrajectory& traj,
                     const std::optional<std::pair<double, double>>& window) {
  const long steps = traj.step_count();
  if (!window) return {0, steps};
  const auto [ta, tb] = *window;
  if (!(tb > ta)) throw InvalidArgument("time range must satisfy t_a < t_b");
  const double tol = 1e-9 * std::max(1.0, std::abs(traj.times.back()));
  StepRange r{steps, 0};
  for (long m = 0; m < steps; ++m) {
    const auto mu = static_cast<std::size_t>(m);
    if (traj.times[mu] >= ta - tol && traj.times[mu + 1] <= tb + tol) {
      r.begin = std::min(r.begin, m);
      r.end = std::max(r.end, m + 1);
    }
  }
  if (r.end <= r.begin) throw InvalidArgument("time range contains no complete step");
  return r;
}

int resolve_mode_count(const ModeTrajectory& traj, int requested) {
  if (requested < 0 || requested > traj.mode_count()) {
    throw InvalidArgument("requested " + std::to_string(requested) + " modes but the data holds " +
                          std::to_string(traj.mode_count()));
  }
  return requested == 0 ? traj.mode_count() : requested;
}

}  // namespace

NormalEquations assemble_normal_equations(const ModeTrajectory& traj,
                                          const EstimationProblem& problem) {
  traj.validate();
  if (traj.times.size() < 2) throw InvalidArgument("trajectory needs at least two time points");
  const double dt = traj.uniform_dt();
  const DriftDictionary& dict = problem.dictionary;
  dict.validate();

  const int N = resolve_mode_count(traj, problem.mode_count);
  if (problem.first_mode < 0 || problem.first_mode >= N) {
    throw InvalidArgument("first_mode must lie in [0, N)");
  }
  const SpectralBasis basis = traj.basis.truncated(N);
  const Vector weight = eigenvalue_powers(basis, problem.weight_exponent);
  const StepRange range = step_range(traj, problem.time_range);

  struct Active {
    const DriftTerm* term;
    int row;  // row in G for unknowns, -1 for known terms
    std::size_t inhibitor = 0;
  };
  std::vector<Active> active;
  NormalEquations out;
  for (std::size_t i = 0; i < dict.terms.size(); ++i) {
    const DriftTerm& t = dict.terms[i];
    if (t.known) {
      active.push_back({&t, -1});
    } else {
      active.push_back({&t, static_cast<int>(out.names.size())});
      out.names.push_back(t.name());
      out.term_index.push_back(static_cast<int>(i));
    }
  }
  for (const auto& t : dict.fixed_terms) active.push_back({&t, -1});
  if (out.names.empty()) throw InvalidArgument("estimation problem has no unknown term");

  std::vector<InhibitorState> inhibitors;
  for (auto& a : active) {
    if (a.term->kind == TermKind::Inhibitor) {
      if (std::abs(traj.times.front()) > 1e-12) {
        throw InvalidArgument("the inhibitor term needs the full activator history from t = 0");
      }
      a.inhibitor = inhibitors.size();
      inhibitors.emplace_back(basis, a.term->inhibitor_diffusivity, a.term->inhibitor_rate, dt);
    }
  }

  DriftEvaluator evaluator(basis, dict.velocity_bandwidth(), problem.quad_shape);
  const auto p = static_cast<Eigen::Index>(out.names.size());
  const auto n = static_cast<Eigen::Index>(N);
  const auto nz = static_cast<std::size_t>(N);
  const Eigen::Index first = problem.first_mode;
  const Eigen::Index used = n - first;

  Matrix gram = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  Matrix G(p, used);
  Vector fixed(used), term(n), state(n), increment(used);

  for (long m = 0; m < range.end; ++m) {
    state = traj.coeffs.row(m).head(n).transpose();
    const bool in_window = m >= range.begin;
    if (in_window) {
      fixed.setZero();
      for (const auto& a : active) {
        if (a.row < 0 && a.term->intensity == 0.0) continue;
        if (a.term->kind == TermKind::Inhibitor) {
          inhibitors[a.inhibitor].value({term.data(), nz});
        } else {
          evaluator.evaluate(*a.term, {state.data(), nz}, {term.data(), nz});
        }
        const auto weighted = term.tail(used).cwiseProduct(weight.tail(used));
        if (a.row >= 0) {
          G.row(a.row) = weighted.transpose();
        } else {
          fixed += a.term->intensity * weighted;
        }
      }
      increment = (traj.coeffs.row(m + 1).segment(first, used) -
                   traj.coeffs.row(m).segment(first, used)).transpose().cwiseProduct(weight.tail(used));
      gram.noalias() += (G * G.transpose()) * dt;
      rhs.noalias() += G * (increment - fixed * dt);
    }
    for (auto& inh : inhibitors) inh.advance({state.data(), nz});
  }

  out.gram = std::move(gram);
  out.rhs = std::move(rhs);
  out.N = N;
  out.T = traj.times[static_cast<std::size_t>(range.end)] - traj.times[static_cast<std::size_t>(range.begin)];
  out.dt = dt;
  return out;
}

LeastSquaresSolution solve_least_squares(const Matrix& gram, const Vector& rhs,
                                         const std::vector<std::string>& names) {
  if (gram.rows() != gram.cols() || gram.rows() != rhs.size() || gram.rows() == 0) {
    throw InvalidArgument("normal equations must be a nonempty square system");
  }
  if (!gram.allFinite() || !rhs.allFinite()) {
    throw NumericalError("normal equations contain non-finite entries");
  }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, gram.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("Gram matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double bottom = ev.minCoeff();
  if (!(top > 0.0) || bottom <= 1e-13 * top) {
    std::ostringstream os;
    os << "Gram matrix is rank deficient (the normal equations are not uniquely solvable)";
    if (!names.empty()) {
      const Vector null = eig.eigenvectors().col(0);
      os << "; collinear terms:";
      for (Eigen::Index i = 0; i < null.size(); ++i) {
        if (std::abs(null[i]) > 0.1) os << " " << names[static_cast<std::size_t>(i)];
      }
    }
    throw NumericalError(os.str());
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed");
  LeastSquaresSolution sol;
  sol.theta = llt.solve(rhs);
  sol.condition_number = top / bottom;
  sol.ill_conditioned = sol.condition_number > 1e10;
  return sol;
}

EstimationResult estimate(const ModeTrajectory& traj, const EstimationProblem& problem, double z) {
  const NormalEquations ne = assemble_normal_equations(traj, problem);
  const LeastSquaresSolution sol = solve_least_squares(ne.gram, ne.rhs, ne.names);
  EstimationResult r;
  r.names = ne.names;
  r.theta_hat = sol.theta;
  r.gram = ne.gram;
  r.rhs = ne.rhs;
  r.condition_number = sol.condition_number;
  r.ill_conditioned = sol.ill_conditioned;
  r.N_used = ne.N;
  r.T_used = ne.T;
  r.dt = ne.dt;
  r.confidence.assign(ne.names.size(), std::nullopt);
  r.standard_error.assign(ne.names.size(), std::nullopt);
  for (std::size_t i = 0; i < ne.names.size(); ++i) {
    if (ne.term_index[i] != 0) continue;
    const double theta0 = sol.theta[static_cast<Eigen::Index>(i)];
    if (!(theta0 > 0.0)) continue;
    const Domain& dom = traj.basis.domain();
    const Interval ci = confidence_interval(theta0, dom.dim(), ne.T, weyl_constant(dom), ne.N, z);
    r.confidence[i] = ci;
    r.standard_error[i] = (ci.high - ci.low) / (2.0 * z);
  }
  return r;
}

double plain_diffusivity(const ModeTrajectory& traj, double weight_exponent) {
  traj.validate();
  if (traj.times.size() < 2) throw InvalidArgument("trajectory needs at least two time points");
  const double dt = traj.uniform_dt();
  const Vector& lambda = traj.basis.eigenvalues();
  // G_k = -lambda_k^{1+a} X_k, weighted increment lambda_k^a dX_k.
  const Vector w = eigenvalue_powers(traj.basis, weight_exponent);
  const Vector g = -lambda.cwiseProduct(w);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index m = 0; m + 1 < traj.coeffs.rows(); ++m) {
    double step_num = 0.0;
    double step_den = 0.0;
    for (Eigen::Index k = 0; k < traj.coeffs.cols(); ++k) {
      const double gk = g[k] * traj.coeffs(m, k);
      step_den += gk * gk;
      step_num += gk * (w[k] * (traj.coeffs(m + 1, k) - traj.coeffs(m, k)));
    }
    den += step_den * dt;
    num += step_num;
  }
  if (!(den > 0.0)) {
    throw NumericalError("plain diffusivity estimator is degenerate: the weighted Laplacian of the data vanishes");
  }
  return num / den;
}

double ito_numerator_closed_form(const ModeTrajectory& traj, double sigma, double gamma) {
  traj.validate();
  const Vector& lambda = traj.basis.eigenvalues();
  const double T = traj.duration();
  const auto last = traj.coeffs.rows() - 1;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    const double qv = sigma * sigma * std::pow(lambda[k], -2.0 * gamma) * T;
    const double x0 = traj.coeffs(0, k);
    const double xT = traj.coeffs(last, k);
    sum += lambda[k] * (xT * xT - x0 * x0 - qv);
  }
  return -0.5 * sum;
}

double ito_numerator_riemann(const ModeTrajectory& traj, RiemannRule rule) {
  traj.validate();
  const Vector& lambda = traj.basis.eigenvalues();
  const int offset = rule == RiemannRule::Left ? 0 : 1;
  double sum = 0.0;
  for (Eigen::Index m = 0; m + 1 < traj.coeffs.rows(); ++m) {
    double step = 0.0;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      step += -lambda[k] * traj.coeffs(m + offset, k) * (traj.coeffs(m + 1, k) - traj.coeffs(m, k));
    }
    sum += step;
  }
  return sum;
}

NoiseEstimate identify_noise_parameters(const ModeTrajectory& traj) {
  traj.validate();
  if (traj.times.size() < 2) throw InvalidArgument("trajectory needs at least two time points");
  const Vector& lambda = traj.basis.eigenvalues();
  // Group nonzero eigenvalues (the basis is sorted ascending).
  std::vector<std::pair<double, std::vector<Eigen::Index>>> groups;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] <= 0.0) continue;
    if (!groups.empty() && std::abs(lambda[k] - groups.back().first) <= 1e-12 * lambda[k]) {
      groups.back().second.push_back(k);
    } else {
      if (groups.size() == 2) break;
      groups.push_back({lambda[k], {k}});
    }
  }
  if (groups.size() < 2) {
    throw InvalidArgument("noise identification needs two distinct nonzero eigenvalues");
  }
  auto quadratic_variation = [&](const std::vector<Eigen::Index>& modes) {
    double q = 0.0;
    for (Eigen::Index k : modes) {
      for (Eigen::Index m = 0; m + 1 < traj.coeffs.rows(); ++m) {
        const double d = traj.coeffs(m + 1, k) - traj.coeffs(m, k);
        q += d * d;
      }
    }
    return q / static_cast<double>(modes.size());
  };
  const double qa = quadratic_variation(groups[0].second);
  const double qb = quadratic_variation(groups[1].second);
  if (!(qa > std::numeric_limits<double>::min()) || !(qb > std::numeric_limits<double>::min())) {
    throw NumericalError("quadratic variation vanishes; the data carries no noise to identify");
  }
  NoiseEstimate est;
  est.lambda_a = groups[0].first;
  est.lambda_b = groups[1].first;
  est.gamma = std::log(qa / qb) / (2.0 * std::log(est.lambda_b / est.lambda_a));
  est.sigma = std::sqrt(qa * std::pow(est.lambda_a, 2.0 * est.gamma) / traj.duration());
  return est;
}

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

bool is_unpenalized(const LassoOptions& o, Eigen::Index i) {
  return static_cast<std::size_t>(i) < o.unpenalized.size() && o.unpenalized[static_cast<std::size_t>(i)];
}

}  // namespace

std::vector<Vector> lasso_path(const Matrix& gram, const Vector& rhs,
                               const std::vector<double>& lambda_grid,
                               const LassoOptions& options) {
  const Eigen::Index p = gram.rows();
  if (gram.cols() != p || rhs.size() != p || p == 0) {
    throw InvalidArgument("LASSO needs a nonempty square system");
  }
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    if (lambda_grid[i] > lambda_grid[i - 1]) {
      throw InvalidArgument("LASSO penalty grid must be descending");
    }
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) throw InvalidArgument("LASSO penalties must be nonnegative");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(gram(i, i) > 0.0)) throw NumericalError("LASSO needs a positive Gram diagonal");
  }

  std::vector<Vector> path;
  Vector theta = Vector::Zero(p);
  for (double lambda : lambda_grid) {
    bool converged = false;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      double change = 0.0;
      for (Eigen::Index i = 0; i < p; ++i) {
        const double r = rhs[i] - gram.row(i).dot(theta) + gram(i, i) * theta[i];
        const double next = is_unpenalized(options, i) ? r / gram(i, i)
                                                        : soft_threshold(r, lambda) / gram(i, i);
        change = std::max(change, std::abs(next - theta[i]));
        theta[i] = next;
      }
      if (change < options.tolerance * std::max(1.0, theta.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      const Vector grad = gram * theta - rhs;
      std::ostringstream os;
      os << "LASSO coordinate descent did not converge at lambda = " << lambda << " after "
         << options.max_sweeps << " sweeps; gradient residual " << grad.cwiseAbs().maxCoeff();
      throw NumericalError(os.str());
    }
    path.push_back(theta);
  }
  return path;
}

std::vector<double> default_lambda_grid(const Matrix& gram, const Vector& rhs,
                                        const LassoOptions& options, int count, double ratio) {
  const Eigen::Index p = gram.rows();
  if (count < 1 || !(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument("penalty grid needs count >= 1 and ratio in (0, 1)");
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (is_unpenalized(options, i)) free.push_back(i);
  }
  Vector theta = Vector::Zero(p);
  if (!free.empty()) {
    const auto f = static_cast<Eigen::Index>(free.size());
    Matrix a(f, f);
    Vector b(f);
    for (Eigen::Index i = 0; i < f; ++i) {
      b[i] = rhs[free[static_cast<std::size_t>(i)]];
      for (Eigen::Index j = 0; j < f; ++j) a(i, j) = gram(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
    const Vector sol = a.llt().solve(b);
    for (Eigen::Index i = 0; i < f; ++i) theta[free[static_cast<std::size_t>(i)]] = sol[i];
  }
  const Vector residual = rhs - gram * theta;
  double top = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!is_unpenalized(options, i)) top = std::max(top, std::abs(residual[i]));
  }
  std::vector<double> grid;
  if (top > 0.0) {
    for (int j = 0; j < count; ++j) {
      const double frac = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
      grid.push_back(top * std::pow(ratio, frac));
    }
  }
  grid.push_back(0.0);
  return grid;
}

double renormalized_objective(const Matrix& gram, const Vector& rhs, const Vector& theta) {
  return 0.5 * theta.dot(gram * theta) - rhs.dot(theta);
}

double stability_index(const DriftTerm& term) {
  switch (term.kind) {
    case TermKind::Poly:
    case TermKind::FhnF1:
    case TermKind::FhnF2: return 2.0;
    case TermKind::Advection: return 1.0;
    case TermKind::Inhibitor: return 4.0;
    case TermKind::FractionalDiffusion:
      term.validate();
      return 2.0 - term.alpha;
    case TermKind::Diffusion: break;
  }
  throw InvalidArgument("the diffusion term has no stability index");
}

double stability_index(const std::vector<DriftTerm>& terms) {
  if (terms.empty()) throw InvalidArgument("stability index of an empty term list");
  double eta = std::numeric_limits<double>::infinity();
  for (const auto& t : terms) eta = std::min(eta, stability_index(t));
  return eta;
}

}  // namespace spdekit
