#include "spdekit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spdekit/error.hpp"
#include "spdekit/experiments.hpp"
#include "spdekit/format.hpp"
#include "spdekit/io.hpp"

#ifndef SPDEKIT_VERSION
#define SPDEKIT_VERSION "0.0.0"
#endif

namespace spdekit {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("malformed number '" + s + "' in " + what);
}

std::vector<double> parse_reals(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item, what));
  return out;
}

std::vector<int> parse_ints(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_reals(s, what)) {
    if (v != static_cast<int>(v)) throw InvalidArgument("expected integers in " + what);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// Shape parameters shared by generator and estimator dictionaries.
struct ShapeOptions {
  double u0 = 1.0;
  double Dv = 1.0;
  double eps = 1.0;
  double velocity = 1.0;
  double frac_alpha = 1.0;

  void add(CLI::App* app) {
    app->add_option("--u0", u0, "stable level u0 of the FHN terms");
    app->add_option("--Dv", Dv, "inhibitor diffusivity D_V");
    app->add_option("--eps", eps, "inhibitor decay rate");
    app->add_option("--velocity-amplitude", velocity, "amplitude of the advection velocity field");
    app->add_option("--frac-alpha", frac_alpha, "order of the fractional diffusion term");
  }

  DriftTerm term(const std::string& name, double intensity, bool known, int dim) const {
    if (name == "diffusion") return DriftTerm::diffusion(intensity, known);
    if (name == "poly1") return DriftTerm::poly(1, intensity, known);
    if (name == "poly2") return DriftTerm::poly(2, intensity, known);
    if (name == "poly3") return DriftTerm::poly(3, intensity, known);
    if (name == "fhn_f1") return DriftTerm::fhn_f1(u0, intensity, known);
    if (name == "fhn_f2") return DriftTerm::fhn_f2(u0, intensity, known);
    if (name == "inhibitor") return DriftTerm::inhibitor(Dv, eps, intensity, known);
    if (name == "advection") {
      return DriftTerm::advection(VelocityField::compressible(dim, velocity), intensity, known);
    }
    if (name == "fractional") return DriftTerm::fractional(frac_alpha, intensity, known);
    throw InvalidArgument("unknown drift term '" + name +
                          "' (expected diffusion, poly1, poly2, poly3, fhn_f1, fhn_f2, inhibitor, "
                          "advection or fractional)");
  }
};

/// name:value,name:value
std::vector<std::pair<std::string, double>> parse_term_list(const std::string& s,
                                                            const std::string& what) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw InvalidArgument("expected name:value in " + what + ", got '" + item + "'");
    }
    out.emplace_back(item.substr(0, colon), parse_real(item.substr(colon + 1), what));
  }
  return out;
}

Domain make_domain(int d, const std::string& lengths) {
  if (d < 1 || d > 3) throw InvalidArgument("--d must be 1, 2 or 3");
  std::vector<double> L = lengths.empty() ? std::vector<double>(1, 2.0 * std::numbers::pi)
                                          : parse_reals(lengths, "--L");
  if (L.size() == 1) L.assign(static_cast<std::size_t>(d), L.front());
  if (static_cast<int>(L.size()) != d) {
    throw InvalidArgument("--L lists " + std::to_string(L.size()) + " lengths for d=" + std::to_string(d));
  }
  return Domain(L);
}

struct GeneratorOptions {
  std::string model = "heat";
  int d = 1;
  std::string L;
  double theta0 = 1.0;
  double theta1 = 0.5;
  std::string drift;
  std::string noise = "white";
  double sigma = 1.0;
  double gamma = 0.0;
  double mu = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  int N = 64;
  bool no_zero_mode = false;
  double k1 = 1.0, k2 = 1.0, b = 1.0, a = 0.3;
  double blowup = 1e12;
  std::string quad_grid;

  void add(CLI::App* app, const std::string& modes_flag) {
    app->add_option("--model", model, "heat, linear, custom or fhn")
        ->check(CLI::IsMember({"heat", "linear", "custom", "fhn"}));
    app->add_option("--d", d, "spatial dimension");
    app->add_option("--L", L, "domain lengths, comma separated (default 2*pi)");
    app->add_option("--theta0", theta0, "diffusivity (D_U for the fhn model)");
    app->add_option("--theta1", theta1, "linear reaction intensity of the linear model");
    app->add_option("--drift", drift, "extra drift terms name:intensity,... for the custom model");
    app->add_option("--noise", noise, "white, correlated, ou-forcing or ou-integrated");
    app->add_option("--sigma", sigma, "noise intensity");
    app->add_option("--gamma", gamma, "spatial correlation exponent");
    app->add_option("--mu", mu, "OU relaxation rate");
    app->add_option("--T", T, "time horizon");
    app->add_option("--dt", dt, "time step");
    app->add_option(modes_flag, N, "simulated modes");
    app->add_flag("--no-zero-mode", no_zero_mode, "exclude the constant mode");
    app->add_option("--k1", k1, "fhn activator rate");
    app->add_option("--k2", k2, "fhn coupling rate");
    app->add_option("--b", b, "fhn inhibitor gain");
    app->add_option("--a", a, "fhn threshold fraction");
    app->add_option("--blowup", blowup, "abort when a coefficient exceeds this magnitude");
    app->add_option("--quad-grid", quad_grid, "pseudospectral grid shape, comma separated");
  }

  GeneratorSpec build(const ShapeOptions& shape) const {
    GeneratorSpec g;
    g.sim.domain = make_domain(d, L);
    g.sim.n_modes = N;
    g.sim.include_zero_mode = !no_zero_mode;
    g.sim.T = T;
    g.sim.dt = dt;
    g.sim.blowup_bound = blowup;
    if (!quad_grid.empty()) g.sim.quad_shape = parse_ints(quad_grid, "--quad-grid");
    g.noise.kind = noise_kind_from_string(noise);
    g.noise.sigma = sigma;
    g.noise.gamma = gamma;
    g.noise.mu = mu;
    if (model == "fhn") {
      FHNParams p;
      p.diffusivity_u = theta0;
      p.diffusivity_v = shape.Dv;
      p.k1 = k1;
      p.k2 = k2;
      p.eps = shape.eps;
      p.b = b;
      p.u0 = shape.u0;
      p.a = a;
      g.fhn = p;
    } else {
      g.drift.terms = {DriftTerm::diffusion(theta0)};
      if (model == "linear") g.drift.terms.push_back(DriftTerm::poly(1, theta1));
      if (model == "custom") {
        for (const auto& [name, value] : parse_term_list(drift, "--drift")) {
          g.drift.terms.push_back(shape.term(name, value, false, d));
        }
      } else if (!drift.empty()) {
        throw InvalidArgument("--drift needs --model custom");
      }
    }
    g.validate();
    return g;
  }

  FHNParams fhn(const ShapeOptions& shape) const {
    FHNParams p;
    p.diffusivity_u = theta0;
    p.diffusivity_v = shape.Dv;
    p.k1 = k1;
    p.k2 = k2;
    p.eps = shape.eps;
    p.b = b;
    p.u0 = shape.u0;
    p.a = a;
    p.validate();
    return p;
  }
};

struct EstimatorOptions {
  std::string unknowns = "diffusion";
  std::string known;
  double alpha = 0.0;
  int N = 0;
  int first_mode = 0;
  std::string t_range;
  double z = 1.96;
  std::string quad_grid;

  void add(CLI::App* app, bool with_N) {
    app->add_option("--unknowns", unknowns, "unknown terms, comma separated; diffusion first");
    app->add_option("--known", known, "known terms name:intensity,...");
    app->add_option("--alpha", alpha, "weight exponent of (-Laplace)^alpha");
    if (with_N) app->add_option("--N", N, "observed modes (0: all)");
    app->add_option("--first-mode", first_mode, "first mode entering the sums");
    app->add_option("--t-range", t_range, "observation window a,b");
    app->add_option("--z", z, "normal quantile of the confidence interval");
    app->add_option("--est-quad-grid", quad_grid, "estimator pseudospectral grid shape");
  }

  EstimationProblem build(const ShapeOptions& shape, int dim) const {
    EstimationProblem p;
    p.weight_exponent = alpha;
    p.mode_count = N;
    p.first_mode = first_mode;
    if (!quad_grid.empty()) p.quad_shape = parse_ints(quad_grid, "--est-quad-grid");
    if (!t_range.empty()) {
      const auto r = parse_reals(t_range, "--t-range");
      if (r.size() != 2) throw InvalidArgument("--t-range needs two values a,b");
      p.time_range = std::make_pair(r[0], r[1]);
    }
    std::vector<DriftTerm> terms;
    for (const auto& name : split(unknowns, ',')) terms.push_back(shape.term(name, 0.0, false, dim));
    for (const auto& [name, value] : parse_term_list(known, "--known")) {
      terms.push_back(shape.term(name, value, true, dim));
    }
    auto diff = std::find_if(terms.begin(), terms.end(),
                             [](const DriftTerm& t) { return t.kind == TermKind::Diffusion; });
    if (diff == terms.end()) {
      throw InvalidArgument("the diffusion term must be listed in --unknowns or --known");
    }
    std::rotate(terms.begin(), diff, diff + 1);
    p.dictionary.terms = terms;
    p.dictionary.validate();
    return p;
  }
};

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Every option of `sub` with the value it resolved to, in declaration order.
KeyValues resolved_config(const CLI::App* sub, const std::set<std::string>& flag_names) {
  KeyValues kv;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->get_expected_max() == 0 || flag_names.count(name) > 0) {
      value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
    } else if (opt->count() > 0) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
    }
    kv.emplace_back(name, value);
  }
  return kv;
}

/// Expands `--config FILE` of the subcommand into option tokens placed
/// before the command-line options, so explicit flags take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::size_t sub = 0;
  while (sub < args.size() && !args[sub].empty() && args[sub][0] == '-') ++sub;
  if (sub >= args.size()) return args;
  std::string path;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> tokens(args.begin(), args.begin() + static_cast<long>(sub) + 1);
  for (const auto& [k, v] : read_key_values(path)) {
    if (k == "config" || v.empty()) continue;
    tokens.push_back("--" + k + "=" + v);
  }
  tokens.insert(tokens.end(), args.begin() + static_cast<long>(sub) + 1, args.end());
  return tokens;
}

void emit(std::ostream& out, const Common& c, const std::string& file, const std::string& text,
          std::vector<std::string>& outputs) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / file;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << text;
  outputs.push_back(path.string());
}

ModeTrajectory load_input_modes(const std::string& in, int N, bool no_zero_mode) {
  const fs::path dir(in);
  if (!fs::is_directory(dir)) throw InvalidArgument("missing input directory " + in);
  if (is_modes_dir(dir)) {
    ModeTrajectory traj = load_modes(dir);
    return N > 0 ? traj.truncated(N) : traj;
  }
  if (is_frames_dir(dir)) {
    const GridFrameSeries frames = load_frames(dir);
    if (N < 1) throw InvalidArgument("--N is required for frame input");
    return project_frames_to_modes(frames, build_basis(frames.domain, N, !no_zero_mode));
  }
  throw InvalidArgument("input directory " + in + " holds neither modes_manifest.txt nor manifest.txt");
}

std::string noise_json(const NoiseEstimate& e) {
  nlohmann::ordered_json j;
  j["sigma"] = e.sigma;
  j["gamma"] = e.gamma;
  j["lambda_a"] = e.lambda_a;
  j["lambda_b"] = e.lambda_b;
  return j.dump(2) + "\n";
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and spectral parameter estimation for stochastic reaction-diffusion equations",
               "spdekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPDEKIT_VERSION);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  Common common;
  ShapeOptions shape;
  GeneratorOptions gen;
  EstimatorOptions est;
  std::string in;
  std::string N_list = "16,32,64,128";
  int replicates = 50;
  int observe = 0;
  int stride = 1;
  std::string grid;
  std::string bandwidths = "0";
  bool pixels = false;
  bool no_zero_mode_in = false;
  int study_N = 64;
  bool discard_smallest = true;

  auto add_common = [&](CLI::App* sub, bool seeded, bool out_required) {
    sub->add_option("--config", common.config, "key=value file; command-line flags take precedence");
    auto* o = sub->add_option("--out", common.out, "output directory");
    if (out_required) o->required();
    if (seeded) {
      sub->add_option("--seed", common.seed, "master seed");
      sub->add_option("--threads", common.threads, "worker threads (0: all cores)");
    }
  };

  auto* sim = app.add_subcommand("simulate", "simulate a trajectory into a modes directory");
  add_common(sim, true, true);
  gen.add(sim, "--N");
  shape.add(sim);
  sim->add_option("--observe", observe, "modes written (0: all)");
  sim->add_option("--stride", stride, "keep every stride-th step");
  sim->add_option("--grid", grid, "also write pixel frames on this grid shape");

  auto* estc = app.add_subcommand("estimate", "least-squares drift estimation from modes or frames");
  add_common(estc, false, false);
  estc->add_option("--in", in, "modes or frames directory")->required();
  est.add(estc, true);
  shape.add(estc);
  estc->add_flag("--no-zero-mode", no_zero_mode_in, "frame input: basis without the constant mode");

  auto* nid = app.add_subcommand("noise-id", "identify sigma and gamma from quadratic variations");
  add_common(nid, false, false);
  nid->add_option("--in", in, "modes or frames directory")->required();
  nid->add_option("--N", est.N, "observed modes (0: all)");
  nid->add_flag("--no-zero-mode", no_zero_mode_in, "frame input: basis without the constant mode");

  auto add_study = [&](CLI::App* sub) {
    add_common(sub, true, false);
    gen.add(sub, "--N-sim");
    shape.add(sub);
    est.add(sub, false);
    sub->add_option("--N-list", N_list, "observed mode counts, ascending");
    sub->add_option("--replicates", replicates, "Monte Carlo replicates");
    sub->add_option("--discard-smallest", discard_smallest, "drop the smallest N from the slope fit");
  };
  auto* rates = app.add_subcommand("rates", "RMSE-versus-N rate study");
  add_study(rates);
  auto* misspec = app.add_subcommand("misspec", "rate study under a misspecified drift or noise");
  add_study(misspec);

  auto* cov = app.add_subcommand("coverage", "empirical coverage of the diffusivity interval");
  add_common(cov, true, false);
  gen.add(cov, "--N-sim");
  shape.add(cov);
  est.add(cov, false);
  cov->add_option("--N", study_N, "observed modes");
  cov->add_option("--replicates", replicates, "Monte Carlo replicates");

  auto* cmp = app.add_subcommand("compare-estimators", "four diffusivity estimators on FHN data");
  add_common(cmp, false, false);
  cmp->add_option("--in", in, "modes directory of an FHN activator trajectory")->required();
  shape.add(cmp);
  cmp->add_option("--k1", gen.k1, "fhn activator rate");
  cmp->add_option("--k2", gen.k2, "fhn coupling rate");
  cmp->add_option("--b", gen.b, "fhn inhibitor gain");
  cmp->add_option("--a", gen.a, "fhn threshold fraction");
  cmp->add_option("--N-list", N_list, "observed mode counts");
  cmp->add_option("--est-quad-grid", est.quad_grid, "pseudospectral grid shape");

  auto* smooth = app.add_subcommand("smooth-check", "diffusivity under Gaussian smoothing of frames");
  add_common(smooth, false, false);
  smooth->add_option("--in", in, "frames directory, or modes directory with --grid")->required();
  smooth->add_option("--grid", grid, "grid shape used to synthesize frames from modes");
  smooth->add_option("--bandwidths", bandwidths, "smoothing bandwidths, comma separated");
  smooth->add_flag("--pixels", pixels, "bandwidths are in pixels rather than length units");
  smooth->add_option("--N", study_N, "observed modes");
  smooth->add_option("--alpha", est.alpha, "weight exponent");
  smooth->add_flag("--no-zero-mode", no_zero_mode_in, "basis without the constant mode");

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(raw_args);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << SPDEKIT_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = sub->get_name();
  manifest.config = resolved_config(sub, {"no-zero-mode", "pixels"});
  manifest.seed = common.seed;
  manifest.version = SPDEKIT_VERSION;
  if (!in.empty()) manifest.inputs.push_back(in);
  std::vector<std::string>& outputs = manifest.outputs;

  try {
    const std::string name = sub->get_name();
    if (name == "simulate") {
      GeneratorSpec g = gen.build(shape);
      g.sim.seed = common.seed;
      g.sim.observe = observe;
      g.sim.stride = stride;
      const ModeTrajectory traj =
          g.fhn ? simulate(*g.fhn, g.noise, g.sim) : simulate(g.drift, g.noise, g.sim);
      ModesMetadata meta{g.sim.T, common.seed, g.describe()};
      save_modes(traj, common.out, meta);
      outputs.push_back((fs::path(common.out) / "modes.bin").string());
      outputs.push_back((fs::path(common.out) / "modes_manifest.txt").string());
      if (!grid.empty()) {
        const auto frames_dir = fs::path(common.out) / "frames";
        save_frames(modes_to_grid(traj, parse_ints(grid, "--grid")), frames_dir);
        outputs.push_back(frames_dir.string());
      }
    } else if (name == "estimate") {
      const ModeTrajectory traj = load_input_modes(in, est.N, no_zero_mode_in);
      EstimationProblem problem = est.build(shape, traj.basis.domain().dim());
      problem.mode_count = 0;
      const EstimationResult r = estimate(traj, problem, est.z);
      if (r.ill_conditioned) {
        err << "warning: Gram matrix condition number " << format_double(r.condition_number)
            << " exceeds 1e10\n";
      }
      emit(out, common, "report.json", estimation_report_json(r, est.alpha), outputs);
    } else if (name == "noise-id") {
      const ModeTrajectory traj = load_input_modes(in, est.N, no_zero_mode_in);
      emit(out, common, "noise.json", noise_json(identify_noise_parameters(traj)), outputs);
    } else if (name == "rates" || name == "misspec") {
      RateStudyConfig c;
      c.generator = gen.build(shape);
      c.estimator = est.build(shape, c.generator.sim.domain.dim());
      c.N_list = parse_ints(N_list, "--N-list");
      c.replicates = replicates;
      c.seed = common.seed;
      c.threads = common.threads;
      c.discard_smallest = discard_smallest;
      const RateStudyResult r =
          name == "rates" ? run_rate_study(c) : run_misspecification_study(c);
      std::ostringstream csv;
      write_rate_csv(csv, r);
      emit(out, common, name + ".csv", csv.str(), outputs);
    } else if (name == "coverage") {
      CoverageConfig c;
      c.generator = gen.build(shape);
      c.estimator = est.build(shape, c.generator.sim.domain.dim());
      c.N = study_N;
      c.replicates = replicates;
      c.seed = common.seed;
      c.threads = common.threads;
      c.z = est.z;
      std::ostringstream csv;
      write_coverage_csv(csv, run_coverage_study(c));
      emit(out, common, "coverage.csv", csv.str(), outputs);
    } else if (name == "compare-estimators") {
      const ModeTrajectory traj = load_input_modes(in, 0, false);
      std::vector<int> quad;
      if (!est.quad_grid.empty()) quad = parse_ints(est.quad_grid, "--est-quad-grid");
      const auto rows = run_estimator_comparison(traj, gen.fhn(shape), parse_ints(N_list, "--N-list"), quad);
      std::ostringstream csv;
      write_comparison_csv(csv, rows);
      emit(out, common, "comparison.csv", csv.str(), outputs);
    } else if (name == "smooth-check") {
      GridFrameSeries frames;
      if (is_frames_dir(in)) {
        frames = load_frames(in);
      } else {
        if (grid.empty()) throw InvalidArgument("--grid is required for modes input");
        frames = modes_to_grid(load_input_modes(in, 0, false), parse_ints(grid, "--grid"));
      }
      std::vector<double> bw = parse_reals(bandwidths, "--bandwidths");
      if (pixels) {
        const double h = frames.domain.length(0) / frames.grid_shape.front();
        for (double& b : bw) b *= h;
      }
      const auto rows = run_smoothing_invariance(frames, bw, study_N, est.alpha, !no_zero_mode_in);
      for (const auto& r : rows) {
        if (r.negligible) {
          err << "warning: bandwidth " << format_double(r.bandwidth)
              << " is below the grid resolution; smoothing has no effect\n";
        }
      }
      std::ostringstream csv;
      write_smoothing_csv(csv, rows);
      emit(out, common, "smoothing.csv", csv.str(), outputs);
    }
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!common.out.empty()) manifest.write(common.out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace spdekit
