#include "spdekit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "spdekit/error.hpp"
#include "spdekit/format.hpp"
#include "spdekit/rng.hpp"

namespace spdekit {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void GeneratorSpec::validate() const {
  if (fhn) {
    fhn->validate();
  } else {
    drift.validate();
  }
  noise.validate();
  sim.validate();
}

DriftDictionary GeneratorSpec::truth() const { return fhn ? fhn->to_dictionary() : drift; }

bool GeneratorSpec::diagonal() const {
  if (fhn) return false;
  for (const auto* list : {&drift.terms, &drift.fixed_terms}) {
    for (const auto& t : *list) {
      if (!t.is_diagonal()) return false;
    }
  }
  return true;
}

std::string GeneratorSpec::describe() const {
  std::ostringstream os;
  os << (fhn ? "fhn" : "dictionary") << " drift " << truth().describe() << "; noise "
     << to_string(noise.kind) << " sigma=" << format_double(noise.sigma)
     << " gamma=" << format_double(noise.gamma) << " mu=" << format_double(noise.mu)
     << "; d=" << sim.domain.dim() << " N_sim=" << sim.n_modes
     << " T=" << format_double(sim.T) << " dt=" << format_double(sim.dt);
  return os.str();
}

ModeTrajectory GeneratorSpec::simulate(std::uint64_t seed, int observe) const {
  SimulationConfig cfg = sim;
  cfg.seed = seed;
  if (observe > 0 && observe < cfg.n_modes && diagonal()) {
    cfg.n_modes = observe;
    cfg.observe = 0;
    if (cfg.initial.size() != 0) cfg.initial = Vector(cfg.initial.head(observe));
  } else {
    cfg.observe = observe;
  }
  if (fhn) return spdekit::simulate(*fhn, noise, cfg);
  return spdekit::simulate(drift, noise, cfg);
}

double true_intensity(const DriftDictionary& truth, const DriftTerm& term) {
  for (const auto* list : {&truth.terms, &truth.fixed_terms}) {
    for (const auto& t : *list) {
      if (t.same_operator(term)) return t.intensity;
    }
  }
  return 0.0;
}

std::vector<DriftTerm> misspecified_terms(const DriftDictionary& truth,
                                          const DriftDictionary& model) {
  std::vector<DriftTerm> out;
  for (const auto* list : {&truth.terms, &truth.fixed_terms}) {
    for (const auto& t : *list) {
      if (t.kind == TermKind::Diffusion || t.intensity == 0.0) continue;
      bool found = false;
      for (const auto* mlist : {&model.terms, &model.fixed_terms}) {
        for (const auto& m : *mlist) found = found || m.same_operator(t);
      }
      if (!found) out.push_back(t);
    }
  }
  return out;
}

void RateStudyConfig::validate() const {
  generator.validate();
  estimator.dictionary.validate();
  if (N_list.size() < 3) throw InvalidArgument("N_list needs at least three mode counts for the slope fit");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 1) throw InvalidArgument("N_list entries must be positive");
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw InvalidArgument("N_list must be ascending");
  }
  if (2 * N_list.back() > generator.sim.n_modes) {
    throw InvalidArgument("max(N_list) = " + std::to_string(N_list.back()) +
                          " exceeds half the simulated modes (" +
                          std::to_string(generator.sim.n_modes) + ")");
  }
  if (replicates < 20) throw InvalidArgument("a rate study needs at least 20 replicates");
}

std::pair<double, double> fit_loglog_slope(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw InvalidArgument("slope fit needs at least three points");
  }
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("slope fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / (n - 2.0) / sxx)};
}

namespace {

std::string replicate_tag(int r, std::uint64_t seed) {
  return "replicate " + std::to_string(r) + " (seed " + std::to_string(seed) + "): ";
}

template <class F>
auto with_replicate(int r, std::uint64_t seed, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(replicate_tag(r, seed) + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(replicate_tag(r, seed) + e.what());
  }
}

bool white_in_time(const NoiseSpec& noise) {
  return noise.kind == NoiseKind::White || noise.kind == NoiseKind::SpatialCorrelated;
}

RateStudyResult run_study(const RateStudyConfig& config, std::optional<double> eta,
                          bool predictions) {
  config.validate();
  const DriftDictionary truth = config.generator.truth();
  const int d = config.generator.sim.domain.dim();
  const int n_max = config.N_list.back();
  const auto nN = config.N_list.size();

  RateStudyResult result;
  result.N_list = config.N_list;
  result.replicates = config.replicates;
  result.eta = eta;
  result.generator = config.generator.describe();
  result.estimator = config.estimator.dictionary.describe();
  result.estimates.assign(static_cast<std::size_t>(config.replicates), {});

  std::vector<std::string> names;
  std::vector<int> term_index;
  parallel_for(config.replicates, config.threads, [&](int r) {
    const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(r));
    with_replicate(r, seed, [&] {
      const ModeTrajectory traj = config.generator.simulate(seed, n_max);
      auto& row = result.estimates[static_cast<std::size_t>(r)];
      for (int N : config.N_list) {
        EstimationProblem problem = config.estimator;
        problem.mode_count = N;
        const NormalEquations ne = assemble_normal_equations(traj, problem);
        row.push_back(solve_least_squares(ne.gram, ne.rhs, ne.names).theta);
        if (r == 0 && N == n_max) {
          names = ne.names;
          term_index = ne.term_index;
        }
      }
      return 0;
    });
  });

  for (std::size_t p = 0; p < names.size(); ++p) {
    ParameterRates pr;
    pr.name = names[p];
    pr.truth = true_intensity(truth, config.estimator.dictionary.terms[static_cast<std::size_t>(term_index[p])]);
    for (std::size_t j = 0; j < nN; ++j) {
      double sum = 0.0, sq = 0.0;
      for (const auto& rep : result.estimates) {
        const double e = rep[j][static_cast<Eigen::Index>(p)] - pr.truth;
        sum += e;
        sq += e * e;
      }
      const double n = config.replicates;
      pr.bias.push_back(sum / n);
      pr.mean.push_back(pr.truth + sum / n);
      pr.rmse.push_back(std::sqrt(sq / n));
    }
    std::vector<double> xs, ys;
    const std::size_t skip = config.discard_smallest && nN >= 4 ? 1 : 0;
    for (std::size_t j = skip; j < nN; ++j) {
      xs.push_back(config.N_list[j]);
      ys.push_back(pr.rmse[j]);
    }
    if (xs.size() >= 3) {
      std::tie(pr.slope, pr.slope_se) = fit_loglog_slope(xs, ys);
    } else {
      pr.slope = pr.slope_se = std::nan("");
    }
    if (predictions) {
      pr.predicted = term_index[p] == 0 ? predicted_rate(EstimatedParameter::Diffusivity, d, eta)
                                        : predicted_rate(EstimatedParameter::Reaction, d);
    }
    result.parameters.push_back(std::move(pr));
  }
  return result;
}

}  // namespace

RateStudyResult run_rate_study(const RateStudyConfig& config) {
  const auto missing = misspecified_terms(config.generator.truth(), config.estimator.dictionary);
  const bool white = white_in_time(config.generator.noise);
  std::optional<double> eta;
  if (!missing.empty()) eta = stability_index(missing);
  return run_study(config, eta, white);
}

RateStudyResult run_misspecification_study(const RateStudyConfig& config) {
  const auto missing = misspecified_terms(config.generator.truth(), config.estimator.dictionary);
  const bool white = white_in_time(config.generator.noise);
  if (missing.empty() && white) {
    throw InvalidArgument("the estimator model matches the generator; use a rate study");
  }
  std::optional<double> eta;
  if (!missing.empty()) eta = stability_index(missing);
  return run_study(config, eta, white);
}

CoverageResult run_coverage_study(const CoverageConfig& config) {
  config.generator.validate();
  const DriftDictionary truth = config.generator.truth();
  const DriftDictionary& model = config.estimator.dictionary;
  model.validate();
  if (model.diffusion().known) throw InvalidArgument("coverage needs an unknown diffusivity");
  if (!white_in_time(config.generator.noise)) {
    throw InvalidArgument("coverage intervals assume noise that is white in time");
  }
  const int d = config.generator.sim.domain.dim();
  const auto missing = misspecified_terms(truth, model);
  if (!missing.empty() && !(stability_index(missing) > 1.0 + d / 2.0)) {
    throw InvalidArgument("coverage needs a misspecification with stability index above 1 + d/2");
  }
  if (config.replicates < 1 || config.N < 1) {
    throw InvalidArgument("coverage needs positive N and replicate count");
  }
  if (config.N > config.generator.sim.n_modes) {
    throw InvalidArgument("N exceeds the simulated modes");
  }

  CoverageResult out;
  out.N = config.N;
  out.replicates = config.replicates;
  out.truth = true_intensity(truth, model.diffusion());
  std::vector<double> estimate_of(static_cast<std::size_t>(config.replicates));
  std::vector<std::optional<Interval>> interval_of(static_cast<std::size_t>(config.replicates));
  parallel_for(config.replicates, config.threads, [&](int r) {
    const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(r));
    with_replicate(r, seed, [&] {
      const ModeTrajectory traj = config.generator.simulate(seed, config.N);
      EstimationProblem problem = config.estimator;
      problem.mode_count = config.N;
      const EstimationResult res = estimate(traj, problem, config.z);
      estimate_of[static_cast<std::size_t>(r)] = res.theta_hat[0];
      interval_of[static_cast<std::size_t>(r)] = res.confidence[0];
      return 0;
    });
  });
  double sum = 0.0, half = 0.0;
  for (int r = 0; r < config.replicates; ++r) {
    const auto& ci = interval_of[static_cast<std::size_t>(r)];
    sum += estimate_of[static_cast<std::size_t>(r)];
    if (ci) {
      half += 0.5 * (ci->high - ci->low);
      if (ci->low <= out.truth && out.truth <= ci->high) ++out.covered;
    }
  }
  out.coverage = static_cast<double>(out.covered) / config.replicates;
  out.mean_estimate = sum / config.replicates;
  out.mean_half_width = half / config.replicates;
  return out;
}

std::vector<SmoothingRow> run_smoothing_invariance(const GridFrameSeries& frames,
                                                   const std::vector<double>& bandwidths,
                                                   int N, double weight_exponent,
                                                   bool include_zero_mode) {
  frames.validate();
  const SpectralBasis basis = build_basis(frames.domain, N, include_zero_mode);
  const double base = plain_diffusivity(project_frames_to_modes(frames, basis), weight_exponent);
  double nyquist = 0.0;
  for (int i = 0; i < frames.domain.dim(); ++i) {
    const double h = frames.domain.length(i) / frames.grid_shape[static_cast<std::size_t>(i)];
    nyquist += (std::numbers::pi / h) * (std::numbers::pi / h);
  }
  std::vector<SmoothingRow> rows;
  for (double bw : bandwidths) {
    if (!(bw >= 0.0)) throw InvalidArgument("smoothing bandwidth must be nonnegative");
    SmoothingRow row;
    row.bandwidth = bw;
    row.negligible = bw > 0.0 && nyquist * bw * bw / 2.0 < 1e-3;
    row.theta0 = bw == 0.0
                     ? base
                     : plain_diffusivity(project_frames_to_modes(smooth_frames(frames, bw), basis),
                                         weight_exponent);
    row.relative_deviation = (row.theta0 - base) / base;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ComparisonRow> run_estimator_comparison(const ModeTrajectory& traj,
                                                    const FHNParams& params,
                                                    const std::vector<int>& N_list,
                                                    const std::vector<int>& quad_shape) {
  const DriftDictionary full = params.to_dictionary();
  std::vector<ComparisonRow> rows;
  const std::vector<std::pair<std::string, int>> variants = {{"lin", 0}, {"2", 1}, {"3", 2}, {"4", 3}};
  for (const auto& [variant, unknown_reactions] : variants) {
    EstimationProblem problem;
    problem.quad_shape = quad_shape;
    if (unknown_reactions == 0) {
      problem.dictionary.terms = {DriftTerm::diffusion(0.0)};
    } else {
      problem.dictionary = full;
      for (std::size_t i = 1; i < problem.dictionary.terms.size(); ++i) {
        problem.dictionary.terms[i].known = static_cast<int>(i) > unknown_reactions;
      }
    }
    for (int N : N_list) {
      ComparisonRow row;
      row.variant = variant;
      row.N = N;
      problem.mode_count = N;
      try {
        const NormalEquations ne = assemble_normal_equations(traj, problem);
        row.theta0 = solve_least_squares(ne.gram, ne.rhs, ne.names).theta[0];
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_rate_csv(std::ostream& os, const RateStudyResult& r) {
  os << "# generator: " << r.generator << "\n";
  os << "# estimator: " << r.estimator << "\n";
  os << "# replicates: " << r.replicates;
  if (r.eta) os << "; stability index of omitted terms: " << format_double(*r.eta);
  os << "\n";
  os << "# columns: parameter name, N modes, rmse and bias of the estimate over replicates, "
        "mean estimate, true value, fitted log-log slope of rmse in N and its standard error, "
        "predicted exponent (empty unless a power law) and predicted kind\n";
  os << "parameter,N,rmse,bias,mean,truth,slope_fit,slope_se,predicted_exponent,predicted_kind\n";
  for (const auto& p : r.parameters) {
    std::string exponent, kind = "none";
    if (p.predicted) {
      switch (p.predicted->kind) {
        case RatePrediction::Kind::PowerLaw:
          exponent = format_double(p.predicted->exponent);
          kind = p.predicted->clt ? "power-clt" : "power";
          break;
        case RatePrediction::Kind::Logarithmic: kind = "logarithmic"; break;
        case RatePrediction::Kind::NoDecay: kind = "no-decay"; break;
      }
    }
    for (std::size_t j = 0; j < r.N_list.size(); ++j) {
      os << p.name << ',' << r.N_list[j] << ',' << format_double(p.rmse[j]) << ','
         << format_double(p.bias[j]) << ',' << format_double(p.mean[j]) << ','
         << format_double(p.truth) << ',' << format_double(p.slope) << ','
         << format_double(p.slope_se) << ',' << exponent << ',' << kind << "\n";
    }
  }
}

void write_coverage_csv(std::ostream& os, const CoverageResult& r) {
  os << "# columns: N modes, replicates, replicates whose interval holds the truth, "
        "empirical coverage, true diffusivity, mean estimate, mean interval half-width\n";
  os << "N,replicates,covered,coverage,truth,mean_estimate,mean_half_width\n";
  os << r.N << ',' << r.replicates << ',' << r.covered << ',' << format_double(r.coverage) << ','
     << format_double(r.truth) << ',' << format_double(r.mean_estimate) << ','
     << format_double(r.mean_half_width) << "\n";
}

void write_smoothing_csv(std::ostream& os, const std::vector<SmoothingRow>& rows) {
  os << "# columns: smoothing bandwidth (length units), diffusivity estimate, deviation "
        "relative to the unsmoothed estimate, 1 when the bandwidth is below grid resolution\n";
  os << "bandwidth,theta0,relative_deviation,negligible\n";
  for (const auto& r : rows) {
    os << format_double(r.bandwidth) << ',' << format_double(r.theta0) << ','
       << format_double(r.relative_deviation) << ',' << (r.negligible ? 1 : 0) << "\n";
  }
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "# data: simulated activator-inhibitor trajectories\n";
  os << "# columns: estimator variant (lin: diffusion only; 2, 3, 4: number of unknown "
        "parameters), N modes, diffusivity estimate (empty on failure), error message\n";
  os << "variant,N,theta0,error\n";
  for (const auto& r : rows) {
    os << r.variant << ',' << r.N << ',' << (r.theta0 ? format_double(*r.theta0) : "") << ','
       << (r.error.empty() ? "" : csv_quote(r.error)) << "\n";
  }
}

}  // namespace spdekit
