#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spdekit/drift.hpp"
#include "spdekit/error.hpp"
#include "spdekit/spectral_grid.hpp"

using namespace spdekit;

namespace {

constexpr double kPi = std::numbers::pi;

double phi(const Mode& mode, const Domain& dom, const double* x) {
  if (mode.is_zero()) return 1.0 / std::sqrt(dom.volume());
  double phase = 0.0;
  for (int i = 0; i < dom.dim(); ++i) phase += 2.0 * kPi * mode.wavevector[static_cast<std::size_t>(i)] * x[i] / dom.length(i);
  const double c = std::sqrt(2.0 / dom.volume());
  return c * (mode.sine ? std::sin(phase) : std::cos(phase));
}

// Gradient of phi along one axis.
double dphi(const Mode& mode, const Domain& dom, const double* x, int axis) {
  if (mode.is_zero()) return 0.0;
  double phase = 0.0;
  for (int i = 0; i < dom.dim(); ++i) phase += 2.0 * kPi * mode.wavevector[static_cast<std::size_t>(i)] * x[i] / dom.length(i);
  const double q = 2.0 * kPi * mode.wavevector[static_cast<std::size_t>(axis)] / dom.length(axis);
  const double c = std::sqrt(2.0 / dom.volume());
  return c * q * (mode.sine ? std::cos(phase) : -std::sin(phase));
}

// Direct trigonometric-sum oracle on an n x n (or n) grid:
// out_k = sum_x integrand(X(x), x, k) * cell.
Vector grid_oracle(const SpectralBasis& basis, const Vector& c, int n,
                   const std::function<double(double, const double*, int)>& integrand) {
  const Domain& dom = basis.domain();
  const int d = dom.dim();
  Vector out = Vector::Zero(basis.size());
  double cell = 1.0;
  for (int i = 0; i < d; ++i) cell *= dom.length(i) / n;
  const int total = d == 1 ? n : n * n;
  for (int p = 0; p < total; ++p) {
    double x[2] = {(p % n) * dom.length(0) / n, d > 1 ? (p / n) * dom.length(1) / n : 0.0};
    double value = 0.0;
    for (int k = 0; k < basis.size(); ++k) value += c[k] * phi(basis.mode(k), dom, x);
    for (int k = 0; k < basis.size(); ++k) out[k] += integrand(value, x, k) * cell;
  }
  return out;
}

Vector random_state(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  Vector v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace

TEST_SUITE("drift") {

TEST_CASE("linear diagonal terms") {
  const auto basis = build_basis(Domain({2.0 * kPi}), 7, true);
  const Vector x = random_state(7, 1);
  CHECK(evaluate_drift_term(DriftTerm::poly(1, 1.0), x, basis) == x);

  Vector e = Vector::Zero(7);
  e[3] = 1.0;
  CHECK(basis.eigenvalues()[3] == doctest::Approx(4.0));
  const Vector lap = evaluate_drift_term(DriftTerm::diffusion(1.0), e, basis);
  CHECK(lap[3] == doctest::Approx(-4.0));
  CHECK(lap.norm() == doctest::Approx(4.0));

  const Vector frac = evaluate_drift_term(DriftTerm::fractional(1.0, 1.0), e, basis);
  CHECK(frac[3] == doctest::Approx(-2.0));
  CHECK(evaluate_drift_term(DriftTerm::fractional(1.0, 1.0), x, basis)[0] == 0.0);
}

TEST_CASE("square of a sine mode") {
  const auto basis = build_basis(Domain({2.0 * kPi}), 9, true);
  Vector x = Vector::Zero(9);
  x[2] = 1.0;  // sin(x) / sqrt(pi)
  REQUIRE(basis.mode(2).sine);
  const Vector y = evaluate_drift_term(DriftTerm::poly(2, 1.0), x, basis);
  for (int k = 0; k < 9; ++k) {
    double expected = 0.0;
    if (k == 0) expected = 1.0 / std::sqrt(2.0 * kPi);
    if (basis.mode(k).wavevector[0] == 2 && !basis.mode(k).sine) expected = -0.5 / std::sqrt(kPi);
    CHECK(std::abs(y[k] - expected) < 1e-10);
  }
}

TEST_CASE("pointwise terms match a direct quadrature oracle") {
  for (const Domain& dom : {Domain({3.0}), Domain({2.0, 1.5})}) {
    const auto basis = build_basis(dom, 13, true);
    const Vector x = random_state(13, 7);
    const int n = 48;
    const double u0 = 1.3;
    auto check = [&](const DriftTerm& term, const std::function<double(double)>& f) {
      const Vector fast = evaluate_drift_term(term, x, basis);
      const Vector slow = grid_oracle(basis, x, n, [&](double v, const double* p, int k) {
        return f(v) * phi(basis.mode(k), dom, p);
      });
      CHECK((fast - slow).norm() <= 1e-10 * (1.0 + slow.norm()));
    };
    check(DriftTerm::poly(2, 1.0), [](double v) { return v * v; });
    check(DriftTerm::poly(3, 1.0), [](double v) { return v * v * v; });
    check(DriftTerm::fhn_f1(u0, 1.0), [&](double v) { return -v * (u0 - v); });
    check(DriftTerm::fhn_f2(u0, 1.0), [&](double v) { return v * v * (u0 - v); });
  }
}

TEST_CASE("advection matches the weak-form oracle") {
  const Domain dom({2.0, 3.0});
  const auto basis = build_basis(dom, 13, true);
  const Vector x = random_state(13, 3);
  VelocityField v = VelocityField::compressible(2, 0.8);
  v.constant = {0.3, -0.2, 0.0};
  const DriftTerm term = DriftTerm::advection(v, 1.0);
  const Vector fast = evaluate_drift_term(term, x, basis);
  // <-div(X v), phi_k> = <X v, grad phi_k>.
  const Vector slow = grid_oracle(basis, x, 40, [&](double val, const double* p, int k) {
    double s = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      s += val * v.value(axis, {p, 2}, dom) * dphi(basis.mode(k), dom, p, axis);
    }
    return s;
  });
  CHECK((fast - slow).norm() <= 1e-10 * (1.0 + slow.norm()));

  // A constant velocity only transports: the result is orthogonal to X.
  VelocityField flat;
  flat.constant = {1.0, 2.0, 0.0};
  const Vector t = evaluate_drift_term(DriftTerm::advection(flat, 1.0), x, basis);
  CHECK(std::abs(t.dot(x)) < 1e-10);
}

TEST_CASE("dealiasing rule and grid rejection") {
  const auto basis = build_basis(Domain({1.0, 1.0}), 20, true);
  const auto shape = SpectralGrid::dealiased_shape(basis);
  const auto top = basis.max_wavenumber();
  CHECK(shape[0] > 4 * top[0]);
  CHECK(shape[1] > 4 * top[1]);
  const Vector x = random_state(20, 2);
  CHECK_THROWS_AS(evaluate_drift_term(DriftTerm::poly(2, 1.0), x, basis, nullptr, {4, 4}),
                  InvalidArgument);
}

TEST_CASE("term validation") {
  CHECK_THROWS_AS(DriftTerm::poly(4, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(DriftTerm::fractional(2.0, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(DriftTerm::fractional(0.0, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(DriftTerm::inhibitor(1.0, 0.0, 1.0).validate(), InvalidArgument);

  DriftDictionary dict;
  dict.terms = {DriftTerm::poly(1, 1.0)};
  CHECK_THROWS_AS(dict.validate(), InvalidArgument);
  dict.terms = {DriftTerm::diffusion(1.0), DriftTerm::poly(2, 1.0), DriftTerm::poly(2, 3.0)};
  CHECK_THROWS_AS(dict.validate(), InvalidArgument);
  dict.terms = {DriftTerm::diffusion(1.0), DriftTerm::poly(2, 1.0), DriftTerm::poly(3, 3.0)};
  CHECK_NOTHROW(dict.validate());
  CHECK(dict.terms[2].name() == "poly3");

  FHNParams bad;
  bad.a = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("FitzHugh-Nagumo parametrization") {
  FHNParams p;
  p.k1 = 2.0;
  p.k2 = 3.0;
  p.u0 = 1.5;
  p.a = 0.4;
  p.eps = 0.5;
  p.b = 4.0;
  const auto r = p.reaction_intensities();
  CHECK(r[0] == doctest::Approx(2.0 * 1.5 * 0.4));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(3.0 * 0.5 * 4.0));
  const auto dict = p.to_dictionary();
  REQUIRE(dict.terms.size() == 4);
  CHECK(dict.terms[0].kind == TermKind::Diffusion);
  CHECK(dict.terms[3].kind == TermKind::Inhibitor);
  CHECK(dict.terms[3].inhibitor_rate == 0.5);
}

TEST_CASE("inhibitor convolution") {
  const auto basis = build_basis(Domain({2.0 * kPi}), 3, true);  // lambda 0, 1, 1
  const double dv = 0.5;
  const double eps = 2.0;
  const double dt = 0.01;

  ModeTrajectory u;
  u.basis = basis;
  const int steps = 1000;
  for (int m = 0; m <= steps; ++m) u.times.push_back(m * dt);
  u.coeffs = RowMatrix::Zero(steps + 1, 3);
  CHECK(inhibitor_convolution(u, dv, eps).coeffs.cwiseAbs().maxCoeff() == 0.0);

  // Constant input: g -> 1/a, a = D_V lambda + eps.
  u.coeffs.col(1).setOnes();
  const auto conv = inhibitor_convolution(u, dv, eps);
  const double a = dv * 1.0 + eps;
  const int settle = static_cast<int>(std::ceil(10.0 / a / dt));
  CHECK(std::abs(-conv.coeffs(settle, 1) - 1.0 / a) < 1e-4);
  CHECK(conv.coeffs(0, 1) == 0.0);

  // Arbitrary input against a fine midpoint quadrature of the left-point path.
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) u.coeffs.data()[i] = normal(rng);
  const auto fast = inhibitor_convolution(u, dv, eps);
  for (int m : {1, 37, 500, steps}) {
    for (int k = 0; k < 3; ++k) {
      const double ak = dv * basis.eigenvalues()[k] + eps;
      double g = 0.0;
      const int sub = 100;
      const double h = dt / sub;
      for (int j = 0; j < m; ++j) {
        for (int s = 0; s < sub; ++s) {
          const double tau = j * dt + (s + 0.5) * h;
          g += std::exp(-ak * (m * dt - tau)) * u.coeffs(j, k) * h;
        }
      }
      CHECK(std::abs(-fast.coeffs(m, k) - g) <= 1e-4 * std::max(std::abs(g), 1e-3));
    }
  }

  const DriftTerm inh = DriftTerm::inhibitor(dv, eps, 1.0);
  CHECK_THROWS_AS(evaluate_drift_term(inh, Vector::Zero(3), basis), InvalidArgument);
  const Vector last = evaluate_drift_term(inh, u.coeffs.bottomRows(1).transpose(), basis, &u);
  CHECK((last - fast.coeffs.bottomRows(1).transpose()).norm() == 0.0);
}

TEST_CASE("inhibitor state recursion") {
  const auto basis = build_basis(Domain({1.0}), 2, true);
  InhibitorState state(basis, 1.0, 3.0, 0.1);
  const double u[2] = {1.0, 2.0};
  state.advance(u);
  const double a = 3.0;
  CHECK(state.convolution()[0] == doctest::Approx(-std::expm1(-a * 0.1) / a));
  double v[2];
  state.value(v);
  CHECK(v[0] == doctest::Approx(-state.convolution()[0]));
}

}  // TEST_SUITE
