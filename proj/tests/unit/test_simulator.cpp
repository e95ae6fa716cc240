#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spdekit/error.hpp"
#include "spdekit/simulator.hpp"
#include "spdekit/spectral_grid.hpp"

using namespace spdekit;

namespace {

constexpr double kPi = std::numbers::pi;

DriftDictionary linear_model(double theta0, double theta1) {
  DriftDictionary d;
  d.terms = {DriftTerm::diffusion(theta0), DriftTerm::poly(1, theta1)};
  return d;
}

SimulationConfig base_config(int modes, double T, double dt, bool zero = false) {
  SimulationConfig c;
  c.domain = Domain({2.0 * kPi});
  c.n_modes = modes;
  c.include_zero_mode = zero;
  c.T = T;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("noiseless heat decay") {
  auto c = base_config(3, 1.0, 1e-3);
  c.initial = Vector::Zero(3);
  c.initial[0] = 1.0;
  c.increments = RowMatrix::Zero(c.steps(), 3);
  DriftDictionary heat;
  heat.terms = {DriftTerm::diffusion(1.0)};
  const auto traj = simulate(heat, {}, c);
  CHECK(traj.step_count() == 1000);
  CHECK(std::abs(traj.coeffs(1000, 0) - std::exp(-1.0)) < 1e-3);
  CHECK(traj.coeffs(1000, 2) == 0.0);
  CHECK(traj.times.back() == doctest::Approx(1.0));
}

TEST_CASE("pure noise has Brownian variance") {
  auto c = base_config(4, 1.0, 0.01);
  DriftDictionary none;
  none.terms = {DriftTerm::diffusion(0.0)};
  double sum = 0.0;
  const int paths = 10000;
  for (int p = 0; p < paths; ++p) {
    c.seed = static_cast<std::uint64_t>(p);
    c.stride = 100;
    const auto traj = simulate(none, {}, c);
    sum += traj.coeffs.row(1).squaredNorm();
  }
  CHECK(sum / (4.0 * paths) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("decoupled FitzHugh-Nagumo reaches the heat-equation stationary law") {
  FHNParams p;
  p.k1 = 0.0;
  p.k2 = 0.0;
  p.diffusivity_u = 1.0;
  auto c = base_config(6, 50.0, 2e-3);
  c.stride = 250;
  double acc[3] = {0, 0, 0};
  int count = 0;
  for (int path = 0; path < 100; ++path) {
    c.seed = 1000 + static_cast<std::uint64_t>(path);
    const auto u = simulate(p, {}, c);
    for (int m = 10; m <= u.step_count(); ++m) {
      for (int pair = 0; pair < 3; ++pair) {
        acc[pair] += 0.5 * (u.coeffs(m, 2 * pair) * u.coeffs(m, 2 * pair) +
                            u.coeffs(m, 2 * pair + 1) * u.coeffs(m, 2 * pair + 1));
      }
      ++count;
    }
  }
  for (int pair = 0; pair < 3; ++pair) {
    const double lambda = (pair + 1) * (pair + 1);
    CHECK(acc[pair] / count == doctest::Approx(1.0 / (2.0 * lambda)).epsilon(0.05));
  }
}

TEST_CASE("strong order one for the linear model") {
  const double T = 1.0;
  const int fine_steps = 4096;
  const auto model = linear_model(1.0, 0.5);
  double err[2] = {0.0, 0.0};
  for (int path = 0; path < 20; ++path) {
    auto ref = base_config(8, T, T / fine_steps);
    ref.seed = static_cast<std::uint64_t>(path);
    const auto basis = build_basis(ref.domain, 8, false);
    ref.increments = sample_increments({}, basis, ref.dt, fine_steps, ref.seed);
    const auto truth = simulate(model, {}, ref);
    const Vector x_ref = truth.coeffs.bottomRows(1).transpose();
    for (int level = 0; level < 2; ++level) {
      const int steps = 64 << level;
      const int block = fine_steps / steps;
      auto c = base_config(8, T, T / steps);
      c.increments.resize(steps, 8);
      for (int m = 0; m < steps; ++m) {
        c.increments.row(m) = ref.increments.middleRows(m * block, block).colwise().sum();
      }
      const auto coarse = simulate(model, {}, c);
      err[level] += (coarse.coeffs.bottomRows(1).transpose() - x_ref).squaredNorm();
    }
  }
  const double ratio = std::sqrt(err[0] / err[1]);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("diagonal models are invariant under truncation") {
  auto big = base_config(32, 1.0, 1e-3);
  big.seed = 17;
  big.observe = 16;
  auto small = base_config(16, 1.0, 1e-3);
  small.seed = 17;
  const auto model = linear_model(1.0, 0.5);
  CHECK(simulate(model, {}, big).coeffs == simulate(model, {}, small).coeffs);
}

TEST_CASE("Galerkin truncation error shrinks with N for a cubic drift") {
  DriftDictionary model;
  model.terms = {DriftTerm::diffusion(0.2), DriftTerm::poly(3, -1.0)};
  auto ref_cfg = base_config(64, 1.0, 1e-3, true);
  ref_cfg.seed = 5;
  ref_cfg.observe = 4;
  const auto ref = simulate(model, {}, ref_cfg);
  double prev = 1e300;
  for (int n : {8, 16, 32}) {
    auto c = base_config(n, 1.0, 1e-3, true);
    c.seed = 5;
    c.observe = 4;
    const double gap = (simulate(model, {}, c).coeffs - ref.coeffs).cwiseAbs().maxCoeff();
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("blow-up is reported with its step") {
  DriftDictionary model;
  model.terms = {DriftTerm::diffusion(1.0), DriftTerm::poly(3, 1.0)};
  auto c = base_config(3, 10.0, 1e-3, true);
  c.initial = Vector::Zero(3);
  c.initial[0] = 20.0;
  try {
    simulate(model, {}, c);
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.step() > 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("inhibitor tracks b U as eps grows") {
  double prev = 1e300;
  for (double eps : {1.0, 10.0, 100.0}) {
    FHNParams p;
    p.eps = eps;
    p.b = 2.0;
    p.k1 = 0.5;
    p.k2 = 0.5;
    auto c = base_config(8, 5.0, 1e-3, true);
    c.seed = 3;
    ModeTrajectory v;
    const auto u = simulate(p, {NoiseKind::White, 0.5}, c, &v);
    const double sup = (v.coeffs - p.b * u.coeffs).bottomRows(u.coeffs.rows() / 2).cwiseAbs().maxCoeff();
    CHECK(sup < prev);
    prev = sup;
  }
}

TEST_CASE("stride, observation and configuration errors") {
  auto c = base_config(8, 1.0, 0.01);
  c.stride = 10;
  c.observe = 3;
  const auto traj = simulate(linear_model(1.0, 0.0), {}, c);
  CHECK(traj.step_count() == 10);
  CHECK(traj.mode_count() == 3);
  CHECK(traj.uniform_dt() == doctest::Approx(0.1));

  auto bad = base_config(8, 1.0, 0.3);
  CHECK_THROWS_AS(simulate(linear_model(1.0, 0.0), {}, bad), InvalidArgument);
  bad = base_config(8, 1.0, 0.01);
  bad.increments = RowMatrix::Zero(5, 8);
  CHECK_THROWS_AS(simulate(linear_model(1.0, 0.0), {}, bad), InvalidArgument);
  bad = base_config(8, 1.0, 0.01);
  CHECK_THROWS_AS(simulate(linear_model(-1.0, 0.0), {}, bad), InvalidArgument);
  bad.initial = Vector::Zero(3);
  CHECK_THROWS_AS(simulate(linear_model(1.0, 0.0), {}, bad), InvalidArgument);
}

TEST_CASE("same seed gives identical trajectories") {
  auto c = base_config(12, 0.5, 1e-3, true);
  c.seed = 77;
  DriftDictionary model;
  model.terms = {DriftTerm::diffusion(1.0), DriftTerm::poly(2, -0.3)};
  CHECK(simulate(model, {}, c).coeffs == simulate(model, {}, c).coeffs);
}

TEST_CASE("Gaussian smoothing of frames") {
  const Domain dom({2.0, 3.0});
  const auto basis = build_basis(dom, 20, true);
  ModeTrajectory traj;
  traj.basis = basis;
  traj.times = {0.0, 1.0};
  traj.coeffs = RowMatrix::Random(2, 20);
  const auto frames = modes_to_grid(traj, {16, 16});

  CHECK(smooth_frames(frames, 0.0).frames == frames.frames);

  GridFrameSeries flat = frames;
  flat.frames.setConstant(1.7);
  CHECK((smooth_frames(flat, 0.4).frames.array() - 1.7).abs().maxCoeff() < 1e-12);

  const double s = 0.15;
  const auto twice = project_frames_to_modes(smooth_frames(smooth_frames(frames, s), s), basis);
  const auto once = project_frames_to_modes(smooth_frames(frames, s * std::sqrt(2.0)), basis);
  CHECK((twice.coeffs - once.coeffs).cwiseAbs().maxCoeff() < 1e-10);

  const auto direct = smooth_modes(traj, s);
  const auto via_grid = project_frames_to_modes(smooth_frames(frames, s), basis);
  CHECK((direct.coeffs - via_grid.coeffs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(smooth_modes(traj, 0.0).coeffs == traj.coeffs);
  CHECK_THROWS_AS(smooth_frames(frames, -1.0), InvalidArgument);
}

}  // TEST_SUITE
