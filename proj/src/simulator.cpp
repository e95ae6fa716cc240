#include "spdekit/simulator.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <string>

#include "spdekit/error.hpp"
#include "spdekit/spectral_grid.hpp"
#include "fftw_lock.hpp"

namespace spdekit {

void SimulationConfig::validate() const {
  if (n_modes < 1) throw InvalidArgument("simulation needs at least one mode");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(T > 0.0)) throw InvalidArgument("time horizon must be positive");
  if (observe < 0 || observe > n_modes) {
    throw InvalidArgument("observed mode count must lie in [1, n_modes]");
  }
  if (stride < 1) throw InvalidArgument("stride must be at least 1");
  if (initial.size() != 0 && initial.size() != n_modes) {
    throw InvalidArgument("initial condition has " + std::to_string(initial.size()) +
                          " modes, expected " + std::to_string(n_modes));
  }
  if (!(blowup_bound > 0.0)) throw InvalidArgument("blow-up bound must be positive");
  if (increments.size() != 0 && (increments.rows() != steps() || increments.cols() != n_modes)) {
    throw InvalidArgument("supplied increments are " + std::to_string(increments.rows()) + " x " +
                          std::to_string(increments.cols()) + ", expected " +
                          std::to_string(steps()) + " x " + std::to_string(n_modes));
  }
}

long SimulationConfig::steps() const {
  const double m = std::round(T / dt);
  if (std::abs(m * dt - T) > 1e-9 * T) {
    throw InvalidArgument("time horizon is not a multiple of the time step");
  }
  return static_cast<long>(m);
}

ModeTrajectory simulate(const DriftDictionary& dict, const NoiseSpec& noise,
                        const SimulationConfig& config) {
  dict.validate();
  config.validate();
  noise.validate();
  const long steps = config.steps();
  const SpectralBasis basis =
      build_basis(config.domain, config.n_modes, config.include_zero_mode);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const auto nz = static_cast<std::size_t>(n);
  const double theta0 = dict.diffusion().intensity;
  if (theta0 < 0.0) throw InvalidArgument("diffusivity must be nonnegative");

  // Explicit terms: dictionary terms after the diffusion plus fixed terms.
  std::vector<const DriftTerm*> explicit_terms;
  for (std::size_t i = 1; i < dict.terms.size(); ++i) explicit_terms.push_back(&dict.terms[i]);
  for (const auto& t : dict.fixed_terms) explicit_terms.push_back(&t);

  DriftEvaluator evaluator(basis, dict.velocity_bandwidth(), config.quad_shape);
  std::vector<InhibitorState> inhibitors;
  std::vector<std::size_t> inhibitor_slot(explicit_terms.size(), 0);
  for (std::size_t i = 0; i < explicit_terms.size(); ++i) {
    const DriftTerm& t = *explicit_terms[i];
    if (t.kind == TermKind::Inhibitor) {
      inhibitor_slot[i] = inhibitors.size();
      inhibitors.emplace_back(basis, t.inhibitor_diffusivity, t.inhibitor_rate, config.dt);
    }
  }

  NoiseStream stream(noise, basis, config.dt, config.seed);
  const bool external = config.increments.size() != 0;
  const Vector implicit = (Vector::Ones(n) + basis.eigenvalues() * (theta0 * config.dt)).cwiseInverse();

  const int observe = config.observe == 0 ? config.n_modes : config.observe;
  const long kept = steps / config.stride + 1;
  ModeTrajectory out;
  out.basis = basis.truncated(observe);
  out.coeffs.resize(kept, observe);
  out.times.reserve(static_cast<std::size_t>(kept));

  Vector x = config.initial.size() == 0 ? Vector::Zero(n) : config.initial;
  Vector drift(n), term(n), dw(n);
  long row = 0;
  auto record = [&](long step) {
    out.coeffs.row(row) = x.head(observe).transpose();
    out.times.push_back(static_cast<double>(step) * config.dt);
    ++row;
  };
  record(0);
  for (long step = 0; step < steps; ++step) {
    drift.setZero();
    for (std::size_t i = 0; i < explicit_terms.size(); ++i) {
      const DriftTerm& t = *explicit_terms[i];
      if (t.intensity == 0.0) continue;
      if (t.kind == TermKind::Inhibitor) {
        inhibitors[inhibitor_slot[i]].value({term.data(), nz});
      } else {
        evaluator.evaluate(t, {x.data(), nz}, {term.data(), nz});
      }
      drift += t.intensity * term;
    }
    for (auto& inh : inhibitors) inh.advance({x.data(), nz});
    if (external) {
      dw = config.increments.row(step).transpose();
    } else {
      stream.next({dw.data(), nz});
    }
    x = (x + config.dt * drift + dw).cwiseProduct(implicit);
    const double peak = x.cwiseAbs().maxCoeff();
    if (!(peak <= config.blowup_bound)) {
      throw BlowUpError("simulation blew up at step " + std::to_string(step + 1) +
                            " (|X_k| = " + std::to_string(peak) + ")",
                        step + 1);
    }
    if ((step + 1) % config.stride == 0) record(step + 1);
  }
  return out;
}

ModeTrajectory simulate(const FHNParams& params, const NoiseSpec& noise,
                        const SimulationConfig& config, ModeTrajectory* inhibitor) {
  const DriftDictionary dict = params.to_dictionary();
  if (inhibitor == nullptr) return simulate(dict, noise, config);
  SimulationConfig full = config;
  const ModeTrajectory u = simulate(dict, noise, full);
  // V = eps b g with g the convolution of the recorded activator path; exact
  // only for stride 1, where it reproduces the state used during stepping.
  if (config.stride != 1) {
    throw InvalidArgument("the inhibitor path is only available for stride 1");
  }
  ModeTrajectory conv = inhibitor_convolution(u, params.diffusivity_v, params.eps);
  conv.coeffs *= -params.eps * params.b;
  *inhibitor = std::move(conv);
  return u;
}

GridFrameSeries smooth_frames(const GridFrameSeries& frames, double bandwidth) {
  if (!(bandwidth >= 0.0)) throw InvalidArgument("smoothing bandwidth must be nonnegative");
  frames.validate();
  GridFrameSeries out = frames;
  if (bandwidth == 0.0) return out;

  const int d = frames.domain.dim();
  const auto& shape = frames.grid_shape;
  const int last = shape[static_cast<std::size_t>(d - 1)] / 2 + 1;
  const int points = frames.point_count();
  const int spectrum = points / shape[static_cast<std::size_t>(d - 1)] * last;

  // Multiplier per stored frequency: exp(-|q|^2 s^2 / 2) / n_points.
  std::vector<double> factor(static_cast<std::size_t>(spectrum));
  std::array<int, 3> idx{0, 0, 0};
  std::array<int, 3> ext{1, 1, 1};
  for (int i = 0; i < d - 1; ++i) ext[static_cast<std::size_t>(i)] = shape[static_cast<std::size_t>(i)];
  ext[static_cast<std::size_t>(d - 1)] = last;
  for (int s = 0; s < spectrum; ++s) {
    double lambda = 0.0;
    for (int i = 0; i < d; ++i) {
      const int n = shape[static_cast<std::size_t>(i)];
      int q = idx[static_cast<std::size_t>(i)];
      if (i < d - 1 && q > n / 2) q -= n;
      const double w = 2.0 * std::numbers::pi * q / frames.domain.length(i);
      lambda += w * w;
    }
    factor[static_cast<std::size_t>(s)] = std::exp(-0.5 * lambda * bandwidth * bandwidth) / points;
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < ext[static_cast<std::size_t>(i)]) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }

  double* real = fftw_alloc_real(static_cast<std::size_t>(points));
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(spectrum));
  std::vector<int> dims(shape.begin(), shape.end());
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c(d, dims.data(), real, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r(d, dims.data(), spec, real, FFTW_ESTIMATE);
  }
  for (Eigen::Index m = 0; m < out.frames.rows(); ++m) {
    std::copy_n(out.frames.row(m).data(), points, real);
    fftw_execute(fwd);
    for (int s = 0; s < spectrum; ++s) {
      spec[s][0] *= factor[static_cast<std::size_t>(s)];
      spec[s][1] *= factor[static_cast<std::size_t>(s)];
    }
    fftw_execute(bwd);
    std::copy_n(real, points, out.frames.row(m).data());
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(real);
  fftw_free(spec);
  return out;
}

ModeTrajectory smooth_modes(const ModeTrajectory& traj, double bandwidth) {
  if (!(bandwidth >= 0.0)) throw InvalidArgument("smoothing bandwidth must be nonnegative");
  ModeTrajectory out = traj;
  if (bandwidth == 0.0) return out;
  const Vector factor = (traj.basis.eigenvalues() * (-0.5 * bandwidth * bandwidth)).array().exp();
  out.coeffs = traj.coeffs * factor.asDiagonal();
  return out;
}

}  // namespace spdekit
