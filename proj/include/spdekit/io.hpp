#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spdekit/estimator.hpp"
#include "spdekit/trajectory.hpp"

namespace spdekit {

inline constexpr int kFormatVersion = 1;

/// Ordered key=value pairs. Blank lines and lines starting with '#' are
/// skipped; keys must be unique.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text, const std::string& source = "input");
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Frame-series directory: manifest.txt + frames.bin (f64 little endian,
/// frame-major, row-major within a frame).
void save_frames(const GridFrameSeries& frames, const std::filesystem::path& dir);
GridFrameSeries load_frames(const std::filesystem::path& dir);

struct ModesMetadata {
  double T = 0.0;
  std::uint64_t seed = 0;
  std::string model;
};

/// Mode-trajectory directory: modes.bin ((M+1) x N f64 little endian, row
/// major) + modes_manifest.txt.
void save_modes(const ModeTrajectory& traj, const std::filesystem::path& dir,
                const ModesMetadata& meta = {});
ModeTrajectory load_modes(const std::filesystem::path& dir, ModesMetadata* meta = nullptr);

bool is_frames_dir(const std::filesystem::path& dir);
bool is_modes_dir(const std::filesystem::path& dir);

/// JSON estimation report with fields theta_hat, ci_low, ci_high,
/// gram_condition, N, T, dt and diagnostics.
std::string estimation_report_json(const EstimationResult& result, double weight_exponent);

struct RunManifest {
  std::string command;
  KeyValues config;  ///< every option with its resolved value
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;

  std::string to_json() const;
  /// Writes run_manifest.json and run_config.cfg into `dir`.
  void write(const std::filesystem::path& dir) const;
};

}  // namespace spdekit
