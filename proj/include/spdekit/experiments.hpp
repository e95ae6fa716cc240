#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdekit/drift.hpp"
#include "spdekit/estimator.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/simulator.hpp"
#include "spdekit/uncertainty.hpp"

namespace spdekit {

/// Data-generating model: a drift dictionary (or FHN system), a noise model
/// and the simulation settings. sim.seed is replaced per replicate.
struct GeneratorSpec {
  DriftDictionary drift;
  std::optional<FHNParams> fhn;
  NoiseSpec noise;
  SimulationConfig sim;

  void validate() const;
  /// The generator drift as a dictionary (FHN expanded to its four terms).
  DriftDictionary truth() const;
  /// True when every mode evolves independently of the others.
  bool diagonal() const;
  std::string describe() const;
  /// One trajectory of the first `observe` modes (0: all simulated modes).
  /// Diagonal generators only integrate the observed modes, which gives
  /// bitwise the same result.
  ModeTrajectory simulate(std::uint64_t seed, int observe = 0) const;
};

/// True intensity of `term` under `truth`; 0 when the operator is absent.
double true_intensity(const DriftDictionary& truth, const DriftTerm& term);

/// Generator terms that the estimator dictionary does not contain.
std::vector<DriftTerm> misspecified_terms(const DriftDictionary& truth,
                                          const DriftDictionary& model);

struct RateStudyConfig {
  GeneratorSpec generator;
  /// Template problem; mode_count is set to each entry of N_list.
  EstimationProblem estimator;
  std::vector<int> N_list;
  int replicates = 20;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = available cores
  /// Drop the smallest N from the slope fit when at least four are given.
  bool discard_smallest = true;

  void validate() const;
};

struct ParameterRates {
  std::string name;
  double truth = 0.0;
  std::vector<double> mean;
  std::vector<double> bias;
  std::vector<double> rmse;
  double slope = 0.0;
  double slope_se = 0.0;
  std::optional<RatePrediction> predicted;
};

struct RateStudyResult {
  std::vector<int> N_list;
  int replicates = 0;
  std::vector<ParameterRates> parameters;
  /// Stability index of the misspecified generator terms, when any.
  std::optional<double> eta;
  /// estimates[r][j] holds theta_hat of replicate r at N_list[j].
  std::vector<std::vector<Vector>> estimates;
  std::string generator;
  std::string estimator;
};

/// Least-squares slope of ln y against ln x with its standard error.
std::pair<double, double> fit_loglog_slope(const std::vector<double>& x,
                                           const std::vector<double>& y);

RateStudyResult run_rate_study(const RateStudyConfig& config);

/// Rate study where the estimator drift differs from the generator drift
/// (or the noise is not white in time). The diffusivity prediction uses the
/// stability index of the omitted terms.
RateStudyResult run_misspecification_study(const RateStudyConfig& config);

struct CoverageConfig {
  GeneratorSpec generator;
  EstimationProblem estimator;
  int N = 64;
  int replicates = 200;
  std::uint64_t seed = 0;
  int threads = 0;
  double z = 1.96;
};

struct CoverageResult {
  int N = 0;
  int replicates = 0;
  int covered = 0;
  double coverage = 0.0;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double mean_half_width = 0.0;
};

CoverageResult run_coverage_study(const CoverageConfig& config);

struct SmoothingRow {
  double bandwidth = 0.0;
  double theta0 = 0.0;
  double relative_deviation = 0.0;
  bool negligible = false;  ///< bandwidth far below the pixel size
};

/// Plain diffusivity on the first N modes of the frames after Gaussian
/// smoothing with each bandwidth (physical length units).
std::vector<SmoothingRow> run_smoothing_invariance(const GridFrameSeries& frames,
                                                   const std::vector<double>& bandwidths,
                                                   int N, double weight_exponent = 0.0,
                                                   bool include_zero_mode = true);

struct ComparisonRow {
  std::string variant;  ///< lin, 2, 3, 4
  int N = 0;
  std::optional<double> theta0;
  std::string error;
};

/// Four diffusivity estimators on FHN-type data: lin (diffusion only),
/// 2 (theta_0, theta_1 unknown), 3 (theta_0..theta_2 unknown), 4 (all
/// unknown). Known reaction intensities are taken from `params`.
std::vector<ComparisonRow> run_estimator_comparison(const ModeTrajectory& traj,
                                                    const FHNParams& params,
                                                    const std::vector<int>& N_list,
                                                    const std::vector<int>& quad_shape = {});

void write_rate_csv(std::ostream& os, const RateStudyResult& result);
void write_coverage_csv(std::ostream& os, const CoverageResult& result);
void write_smoothing_csv(std::ostream& os, const std::vector<SmoothingRow>& rows);
void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

/// Runs body(i) for i in [0, count) on up to `threads` threads (0 = all cores).
/// The first exception, by index, is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace spdekit
