#include "spdekit/drift.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spdekit/error.hpp"

namespace spdekit {

double VelocityField::value(int axis, std::span<const double> x, const Domain& domain) const {
  double v = constant[static_cast<std::size_t>(axis)];
  for (const auto& w : waves) {
    if (w.axis != axis) continue;
    double phase = w.phase;
    for (int i = 0; i < domain.dim(); ++i) {
      phase += 2.0 * std::numbers::pi * w.wavevector[i] * x[i] / domain.length(i);
    }
    v += w.amplitude * std::cos(phase);
  }
  return v;
}

int VelocityField::bandwidth() const noexcept {
  int b = 0;
  for (const auto& w : waves) {
    for (int m : w.wavevector) b = std::max(b, std::abs(m));
  }
  return b;
}

VelocityField VelocityField::compressible(int dim, double amplitude) {
  VelocityField v;
  for (int i = 0; i < dim; ++i) {
    VelocityWave w;
    w.axis = i;
    w.wavevector[static_cast<std::size_t>(i)] = 1;
    w.amplitude = amplitude;
    w.phase = -std::numbers::pi / 2.0;  // cos(theta - pi/2) = sin(theta)
    v.waves.push_back(w);
  }
  return v;
}

DriftTerm DriftTerm::diffusion(double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::Diffusion;
  t.intensity = intensity;
  t.known = known;
  return t;
}

DriftTerm DriftTerm::poly(int power, double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::Poly;
  t.power = power;
  t.intensity = intensity;
  t.known = known;
  return t;
}

DriftTerm DriftTerm::fhn_f1(double u0, double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::FhnF1;
  t.u0 = u0;
  t.intensity = intensity;
  t.known = known;
  return t;
}

DriftTerm DriftTerm::fhn_f2(double u0, double intensity, bool known) {
  DriftTerm t = fhn_f1(u0, intensity, known);
  t.kind = TermKind::FhnF2;
  return t;
}

DriftTerm DriftTerm::advection(VelocityField v, double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::Advection;
  t.velocity = std::move(v);
  t.intensity = intensity;
  t.known = known;
  return t;
}

DriftTerm DriftTerm::inhibitor(double diffusivity, double rate, double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::Inhibitor;
  t.inhibitor_diffusivity = diffusivity;
  t.inhibitor_rate = rate;
  t.intensity = intensity;
  t.known = known;
  return t;
}

DriftTerm DriftTerm::fractional(double alpha, double intensity, bool known) {
  DriftTerm t;
  t.kind = TermKind::FractionalDiffusion;
  t.alpha = alpha;
  t.intensity = intensity;
  t.known = known;
  return t;
}

std::string DriftTerm::name() const {
  switch (kind) {
    case TermKind::Diffusion: return "diffusion";
    case TermKind::Poly: return "poly" + std::to_string(power);
    case TermKind::FhnF1: return "fhn_f1";
    case TermKind::FhnF2: return "fhn_f2";
    case TermKind::Advection: return "advection";
    case TermKind::Inhibitor: return "inhibitor";
    case TermKind::FractionalDiffusion: return "fractional";
  }
  return "unknown";
}

bool DriftTerm::is_diagonal() const noexcept {
  return kind == TermKind::Diffusion || kind == TermKind::FractionalDiffusion ||
         (kind == TermKind::Poly && power == 1);
}

bool DriftTerm::same_operator(const DriftTerm& o) const noexcept {
  if (kind != o.kind) return false;
  switch (kind) {
    case TermKind::Poly: return power == o.power;
    case TermKind::FhnF1:
    case TermKind::FhnF2: return u0 == o.u0;
    case TermKind::Inhibitor:
      return inhibitor_diffusivity == o.inhibitor_diffusivity &&
             inhibitor_rate == o.inhibitor_rate;
    case TermKind::FractionalDiffusion: return alpha == o.alpha;
    case TermKind::Advection: return velocity == o.velocity;
    case TermKind::Diffusion: return true;
  }
  return false;
}

void DriftTerm::validate() const {
  if (!std::isfinite(intensity)) throw InvalidArgument("term intensity must be finite");
  switch (kind) {
    case TermKind::Poly:
      if (power < 1) throw InvalidArgument("polynomial power must be >= 1");
      if (power > 3) {
        throw InvalidArgument("polynomial powers above 3 are not dealiased by the quadrature grid");
      }
      break;
    case TermKind::FhnF1:
    case TermKind::FhnF2:
      if (!(u0 > 0.0)) throw InvalidArgument("u0 must be positive");
      break;
    case TermKind::Inhibitor:
      if (!(inhibitor_rate > 0.0) || inhibitor_diffusivity < 0.0) {
        throw InvalidArgument("inhibitor needs eps > 0 and D_V >= 0");
      }
      break;
    case TermKind::FractionalDiffusion:
      if (!(alpha > 0.0 && alpha < 2.0)) {
        throw InvalidArgument("fractional diffusion exponent must lie in (0, 2)");
      }
      break;
    default:
      break;
  }
}

void DriftDictionary::validate() const {
  if (terms.empty() || terms.front().kind != TermKind::Diffusion) {
    throw InvalidArgument("dictionary must start with the diffusion term");
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i].validate();
    if (i > 0 && terms[i].kind == TermKind::Diffusion) {
      throw InvalidArgument("dictionary holds more than one diffusion term");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (terms[i].same_operator(terms[j])) {
        throw InvalidArgument("dictionary term '" + terms[i].name() + "' appears twice");
      }
    }
  }
  for (const auto& t : fixed_terms) {
    t.validate();
    if (t.kind == TermKind::Diffusion) {
      throw InvalidArgument("the diffusion term cannot be a fixed term");
    }
  }
}

int DriftDictionary::velocity_bandwidth() const noexcept {
  int b = 0;
  for (const auto* list : {&terms, &fixed_terms}) {
    for (const auto& t : *list) {
      if (t.kind == TermKind::Advection) b = std::max(b, t.velocity.bandwidth());
    }
  }
  return b;
}

std::string DriftDictionary::describe() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto* list : {&terms, &fixed_terms}) {
    for (const auto& t : *list) {
      if (!first) os << " + ";
      first = false;
      os << t.intensity << "*" << t.name();
    }
  }
  return os.str();
}

void FHNParams::validate() const {
  for (double v : {diffusivity_u, diffusivity_v, eps, b, u0}) {
    if (!(v > 0.0)) throw InvalidArgument("FitzHugh-Nagumo rates and diffusivities must be positive");
  }
  // k1 = k2 = 0 decouples the reaction and leaves the stochastic heat equation.
  if (!(k1 >= 0.0 && k2 >= 0.0)) throw InvalidArgument("FitzHugh-Nagumo couplings k1, k2 must be >= 0");
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("FitzHugh-Nagumo threshold a must lie in (0, 1)");
}

std::array<double, 3> FHNParams::reaction_intensities() const noexcept {
  return {k1 * u0 * a, k1, k2 * eps * b};
}

DriftDictionary FHNParams::to_dictionary() const {
  validate();
  const auto theta = reaction_intensities();
  DriftDictionary dict;
  dict.terms = {DriftTerm::diffusion(diffusivity_u), DriftTerm::fhn_f1(u0, theta[0]),
                DriftTerm::fhn_f2(u0, theta[1]),
                DriftTerm::inhibitor(diffusivity_v, eps, theta[2])};
  return dict;
}

InhibitorState::InhibitorState(const SpectralBasis& basis, double diffusivity, double rate,
                               double dt) {
  if (!(rate > 0.0) || diffusivity < 0.0) {
    throw InvalidArgument("inhibitor needs eps > 0 and D_V >= 0");
  }
  const Vector a = basis.eigenvalues() * diffusivity + Vector::Constant(basis.size(), rate);
  decay_ = (-a * dt).array().exp();
  gain_ = (-(-a * dt).array().unaryExpr([](double x) { return std::expm1(x); })) / a.array();
  g_ = Vector::Zero(basis.size());
}

void InhibitorState::advance(std::span<const double> u) {
  const Eigen::Map<const Vector> uk(u.data(), static_cast<Eigen::Index>(u.size()));
  g_ = decay_.cwiseProduct(g_) + gain_.cwiseProduct(uk);
}

void InhibitorState::value(std::span<double> out) const {
  Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size())) = -g_;
}

DriftEvaluator::DriftEvaluator(const SpectralBasis& basis, int velocity_bandwidth,
                               std::vector<int> grid_shape)
    : basis_(basis),
      velocity_bandwidth_(velocity_bandwidth),
      requested_shape_(std::move(grid_shape)),
      cos_part_(basis.size()),
      sin_part_(basis.size()) {
  if (!requested_shape_.empty()) check_representable(basis_, requested_shape_);
}

std::optional<std::vector<int>> DriftEvaluator::grid_shape() const {
  if (!grid_) return std::nullopt;
  return grid_->shape();
}

SpectralGrid& DriftEvaluator::grid() {
  if (!grid_) {
    auto shape = requested_shape_.empty()
                     ? SpectralGrid::dealiased_shape(basis_, velocity_bandwidth_)
                     : requested_shape_;
    grid_ = std::make_unique<SpectralGrid>(basis_, shape);
    values_.resize(static_cast<std::size_t>(grid_->point_count()));
    work_.resize(values_.size());
  }
  return *grid_;
}

const std::vector<std::vector<double>>& DriftEvaluator::velocity_on_grid(
    const VelocityField& v) {
  for (const auto& [field, values] : velocity_cache_) {
    if (field == v) return values;
  }
  SpectralGrid& g = grid();
  const Domain& dom = basis_.domain();
  const int d = dom.dim();
  const auto& shape = g.shape();
  std::vector<std::vector<double>> values(static_cast<std::size_t>(d),
                                          std::vector<double>(values_.size()));
  std::array<int, 3> idx{0, 0, 0};
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (std::size_t p = 0; p < values_.size(); ++p) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = g.coordinate(i, idx[static_cast<std::size_t>(i)]);
    for (int axis = 0; axis < d; ++axis) {
      values[static_cast<std::size_t>(axis)][p] = v.value(axis, {x.data(), 3}, dom);
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < shape[static_cast<std::size_t>(i)]) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  velocity_cache_.emplace_back(v, std::move(values));
  return velocity_cache_.back().second;
}

void DriftEvaluator::evaluate(const DriftTerm& term, std::span<const double> state,
                              std::span<double> out) {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  if (static_cast<Eigen::Index>(state.size()) != n || static_cast<Eigen::Index>(out.size()) != n) {
    throw InvalidArgument("drift evaluation: state size does not match the basis");
  }
  const Eigen::Map<const Vector> x(state.data(), n);
  Eigen::Map<Vector> y(out.data(), n);
  const Vector& lambda = basis_.eigenvalues();
  switch (term.kind) {
    case TermKind::Diffusion:
      y = -lambda.cwiseProduct(x);
      return;
    case TermKind::FractionalDiffusion:
      y = -eigenvalue_powers(basis_, term.alpha / 2.0).cwiseProduct(x);
      return;
    case TermKind::Inhibitor:
      throw InvalidArgument("the inhibitor term needs the activator history");
    case TermKind::Poly:
      if (term.power == 1) {
        y = x;
        return;
      }
      break;
    default:
      break;
  }

  SpectralGrid& g = grid();
  g.synthesize(state, values_);
  if (term.kind == TermKind::Advection) {
    const Domain& dom = basis_.domain();
    const int d = dom.dim();
    y.setZero();
    const auto& velocity = velocity_on_grid(term.velocity);
    for (int axis = 0; axis < d; ++axis) {
      const auto& va = velocity[static_cast<std::size_t>(axis)];
      for (std::size_t p = 0; p < values_.size(); ++p) work_[p] = values_[p] * va[p];
      g.project_pairs(work_, {cos_part_.data(), static_cast<std::size_t>(n)},
                      {sin_part_.data(), static_cast<std::size_t>(n)});
      // <d_i Y, cos_m> = q_i <Y, sin_m>,  <d_i Y, sin_m> = -q_i <Y, cos_m>.
      for (Eigen::Index k = 0; k < n; ++k) {
        const Mode& mode = basis_.mode(static_cast<int>(k));
        const double q = 2.0 * std::numbers::pi * mode.wavevector[static_cast<std::size_t>(axis)] /
                         dom.length(axis);
        y[k] += mode.sine ? q * cos_part_[k] : -q * sin_part_[k];
      }
    }
    return;
  }

  const double u0 = term.u0;
  const int power = term.power;
  for (double& v : values_) {
    switch (term.kind) {
      case TermKind::Poly: v = power == 2 ? v * v : v * v * v; break;
      case TermKind::FhnF1: v = -v * (u0 - v); break;
      case TermKind::FhnF2: v = v * v * (u0 - v); break;
      default: break;
    }
  }
  g.project(values_, out);
}

Vector evaluate_drift_term(const DriftTerm& term, const Vector& state,
                           const SpectralBasis& basis, const ModeTrajectory* history,
                           std::vector<int> grid_shape) {
  term.validate();
  if (term.kind == TermKind::Inhibitor) {
    if (history == nullptr || history->coeffs.rows() == 0) {
      throw InvalidArgument("the inhibitor term needs the activator history");
    }
    const auto conv = inhibitor_convolution(*history, term.inhibitor_diffusivity,
                                            term.inhibitor_rate);
    return conv.coeffs.bottomRows(1).transpose();
  }
  DriftEvaluator eval(basis, term.kind == TermKind::Advection ? term.velocity.bandwidth() : 0,
                      std::move(grid_shape));
  Vector out(basis.size());
  eval.evaluate(term, {state.data(), static_cast<std::size_t>(state.size())},
                {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

ModeTrajectory inhibitor_convolution(const ModeTrajectory& u, double diffusivity, double rate) {
  u.validate();
  const double dt = u.times.size() >= 2 ? u.uniform_dt() : 1.0;
  InhibitorState state(u.basis, diffusivity, rate, dt);
  ModeTrajectory out{u.basis, u.times, RowMatrix(u.coeffs.rows(), u.coeffs.cols())};
  const auto n = static_cast<std::size_t>(u.coeffs.cols());
  for (Eigen::Index m = 0; m < u.coeffs.rows(); ++m) {
    state.value({out.coeffs.row(m).data(), n});
    state.advance({u.coeffs.row(m).data(), n});
  }
  return out;
}

}  // namespace spdekit
