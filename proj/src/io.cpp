#include "spdekit/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spdekit/error.hpp"
#include "spdekit/format.hpp"

namespace spdekit {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

void to_little_endian(std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& x : v) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      std::uint64_t swapped = 0;
      for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
      x = std::bit_cast<double>(swapped);
    }
  }
}

void write_f64(const fs::path& path, const double* data, std::size_t count) {
  std::vector<double> buf(data, data + count);
  to_little_endian(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

std::vector<double> read_f64(const fs::path& path, std::size_t expected_count) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw FormatError("cannot read " + path.string());
  const auto expected = expected_count * sizeof(double);
  if (size != expected) {
    throw FormatError(path.filename().string() + " holds " + std::to_string(size) +
                      " bytes, expected " + std::to_string(expected) + " bytes");
  }
  std::vector<double> buf(expected_count);
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (!in) throw FormatError("failed reading " + path.string());
  to_little_endian(buf);
  return buf;
}

/// Validated view of a manifest: every required key present, no unknown keys.
class Manifest {
 public:
  Manifest(const fs::path& path, const std::vector<std::string>& required,
           const std::vector<std::string>& optional = {}) : path_(path) {
    if (!fs::exists(path)) throw InvalidArgument("missing manifest " + path.string());
    for (auto& [k, v] : parse_key_values(read_text(path), path.string())) map_[k] = v;
    std::vector<std::string> missing, unknown;
    for (const auto& k : required) {
      if (!map_.count(k)) missing.push_back(k);
    }
    for (const auto& [k, v] : map_) {
      if (std::find(required.begin(), required.end(), k) == required.end() &&
          std::find(optional.begin(), optional.end(), k) == optional.end()) {
        unknown.push_back(k);
      }
    }
    if (!missing.empty() || !unknown.empty()) {
      std::string msg = "malformed manifest " + path.string() + ":";
      if (!missing.empty()) msg += " missing keys [" + join(missing) + "]";
      if (!unknown.empty()) msg += " unknown keys [" + join(unknown) + "]";
      throw FormatError(msg);
    }
    if (map_.count("format_version") && map_.at("format_version") != std::to_string(kFormatVersion)) {
      throw FormatError("manifest version mismatch in " + path.string() + ": found " +
                        map_.at("format_version") + ", expected " + std::to_string(kFormatVersion));
    }
  }

  const std::string& str(const std::string& key) const { return map_.at(key); }
  bool has(const std::string& key) const { return map_.count(key) > 0; }

  double real(const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(str(key), &pos);
      if (pos != str(key).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw bad(key);
    }
  }
  long integer(const std::string& key) const {
    try {
      std::size_t pos = 0;
      const long v = std::stol(str(key), &pos);
      if (pos != str(key).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw bad(key);
    }
  }
  std::uint64_t unsigned_integer(const std::string& key) const {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(str(key), &pos);
      if (pos != str(key).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw bad(key);
    }
  }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(trim(item), &pos));
        if (pos != trim(item).size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw bad(key);
      }
    }
    return out;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  }
  FormatError bad(const std::string& key) const {
    return FormatError("malformed value for key '" + key + "' in " + path_.string() + ": '" +
                       str(key) + "'");
  }

  fs::path path_;
  std::map<std::string, std::string> map_;
};

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format_double(x);
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

Domain read_domain(const Manifest& m) {
  const long d = m.integer("d");
  if (d < 1 || d > 3) {
    throw FormatError("manifest dimension d=" + std::to_string(d) + " is not in {1, 2, 3}");
  }
  const auto lengths = m.reals("lengths");
  if (static_cast<long>(lengths.size()) != d) {
    throw FormatError("manifest lists " + std::to_string(lengths.size()) + " lengths for d=" +
                      std::to_string(d));
  }
  try {
    return Domain(lengths);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("manifest domain: ") + e.what());
  }
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw FormatError(source + ":" + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("config file not found: " + path.string());
  return parse_key_values(read_text(path), path.string());
}

void write_key_values(const fs::path& path, const KeyValues& kv) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  write_text(path, text);
}

void save_frames(const GridFrameSeries& frames, const fs::path& dir) {
  frames.validate();
  fs::create_directories(dir);
  KeyValues kv = {{"format_version", std::to_string(kFormatVersion)},
                  {"d", std::to_string(frames.domain.dim())},
                  {"lengths", join_reals(frames.domain.lengths())},
                  {"grid_shape", join_ints(frames.grid_shape)},
                  {"dt", format_double(frames.dt)},
                  {"frame_count", std::to_string(frames.frame_count())},
                  {"dtype", "f64le"}};
  write_key_values(dir / "manifest.txt", kv);
  write_f64(dir / "frames.bin", frames.frames.data(), static_cast<std::size_t>(frames.frames.size()));
}

GridFrameSeries load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("missing input directory " + dir.string());
  const Manifest m(dir / "manifest.txt",
                   {"format_version", "d", "lengths", "grid_shape", "dt", "frame_count", "dtype"});
  if (m.str("dtype") != "f64le") throw FormatError("unsupported dtype '" + m.str("dtype") + "'");
  GridFrameSeries f;
  f.domain = read_domain(m);
  for (double n : m.reals("grid_shape")) {
    if (n < 1 || n != static_cast<int>(n)) throw FormatError("malformed grid_shape");
    f.grid_shape.push_back(static_cast<int>(n));
  }
  if (static_cast<int>(f.grid_shape.size()) != f.domain.dim()) {
    throw FormatError("grid_shape has " + std::to_string(f.grid_shape.size()) +
                      " entries for d=" + std::to_string(f.domain.dim()));
  }
  f.dt = m.real("dt");
  const long count = m.integer("frame_count");
  if (count < 2) throw FormatError("frame_count must be at least 2");
  long points = 1;
  for (int n : f.grid_shape) points *= n;
  const auto data = read_f64(dir / "frames.bin", static_cast<std::size_t>(count * points));
  f.frames = Eigen::Map<const RowMatrix>(data.data(), count, points);
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return f;
}

void save_modes(const ModeTrajectory& traj, const fs::path& dir, const ModesMetadata& meta) {
  traj.validate();
  const double dt = traj.uniform_dt();
  fs::create_directories(dir);
  std::string model = meta.model;
  std::replace(model.begin(), model.end(), '\n', ' ');
  KeyValues kv = {{"format_version", std::to_string(kFormatVersion)},
                  {"d", std::to_string(traj.basis.domain().dim())},
                  {"lengths", join_reals(traj.basis.domain().lengths())},
                  {"include_zero_mode", traj.basis.has_zero_mode() ? "1" : "0"},
                  {"N", std::to_string(traj.mode_count())},
                  {"rows", std::to_string(traj.coeffs.rows())},
                  {"t0", format_double(traj.times.front())},
                  {"dt", format_double(dt)},
                  {"T", format_double(meta.T > 0 ? meta.T : traj.duration())},
                  {"seed", std::to_string(meta.seed)},
                  {"model", model},
                  {"dtype", "f64le"}};
  write_key_values(dir / "modes_manifest.txt", kv);
  write_f64(dir / "modes.bin", traj.coeffs.data(), static_cast<std::size_t>(traj.coeffs.size()));
}

ModeTrajectory load_modes(const fs::path& dir, ModesMetadata* meta) {
  if (!fs::is_directory(dir)) throw InvalidArgument("missing input directory " + dir.string());
  const Manifest m(dir / "modes_manifest.txt",
                   {"format_version", "d", "lengths", "include_zero_mode", "N", "rows", "t0", "dt",
                    "T", "seed", "model", "dtype"});
  if (m.str("dtype") != "f64le") throw FormatError("unsupported dtype '" + m.str("dtype") + "'");
  const Domain domain = read_domain(m);
  const long N = m.integer("N");
  const long rows = m.integer("rows");
  if (N < 1 || rows < 2) throw FormatError("modes manifest needs N >= 1 and rows >= 2");
  const double dt = m.real("dt");
  const double t0 = m.real("t0");
  if (!(dt > 0.0)) throw FormatError("modes manifest dt must be positive");
  ModeTrajectory traj;
  traj.basis = build_basis(domain, static_cast<int>(N), m.str("include_zero_mode") == "1");
  const auto data = read_f64(dir / "modes.bin", static_cast<std::size_t>(N * rows));
  traj.coeffs = Eigen::Map<const RowMatrix>(data.data(), rows, N);
  for (long i = 0; i < rows; ++i) traj.times.push_back(t0 + static_cast<double>(i) * dt);
  if (meta) {
    meta->T = m.real("T");
    meta->seed = m.unsigned_integer("seed");
    meta->model = m.str("model");
  }
  try {
    traj.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return traj;
}

bool is_frames_dir(const fs::path& dir) { return fs::exists(dir / "manifest.txt"); }
bool is_modes_dir(const fs::path& dir) { return fs::exists(dir / "modes_manifest.txt"); }

std::string estimation_report_json(const EstimationResult& r, double weight_exponent) {
  using nlohmann::json;
  json j;
  j["parameters"] = r.names;
  json theta = json::array(), lo = json::array(), hi = json::array(), se = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    theta.push_back(r.theta_hat[static_cast<Eigen::Index>(i)]);
    if (r.confidence[i]) {
      lo.push_back(r.confidence[i]->low);
      hi.push_back(r.confidence[i]->high);
    } else {
      lo.push_back(nullptr);
      hi.push_back(nullptr);
    }
    se.push_back(r.standard_error[i] ? json(*r.standard_error[i]) : json(nullptr));
  }
  j["theta_hat"] = theta;
  j["standard_error"] = se;
  j["ci_low"] = lo;
  j["ci_high"] = hi;
  j["gram_condition"] = r.condition_number;
  j["ill_conditioned"] = r.ill_conditioned;
  j["N"] = r.N_used;
  j["T"] = r.T_used;
  j["dt"] = r.dt;
  j["weight_exponent"] = weight_exponent;
  j["discretization"] = "left-point";
  json gram = json::array();
  for (Eigen::Index i = 0; i < r.gram.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.gram.cols(); ++k) row.push_back(r.gram(i, k));
    gram.push_back(row);
  }
  j["gram"] = gram;
  j["rhs"] = std::vector<double>(r.rhs.data(), r.rhs.data() + r.rhs.size());
  return j.dump(2) + "\n";
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = seed;
  j["version"] = version;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["duration_seconds"] = duration_seconds;
  return j.dump(2) + "\n";
}

void RunManifest::write(const fs::path& dir) const {
  fs::create_directories(dir);
  write_text(dir / "run_manifest.json", to_json());
  write_key_values(dir / "run_config.cfg", config);
}

}  // namespace spdekit
