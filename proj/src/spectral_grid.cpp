#include "spdekit/spectral_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

#include "spdekit/error.hpp"
#include "fftw_lock.hpp"

namespace spdekit {

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

std::mutex& planner_mutex() { return detail::fftw_planner_mutex(); }

int next_fft_size(int n) {
  for (;; ++n) {
    int r = n;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1 && n % 2 == 0) return n;
  }
}

}  // namespace

struct SpectralGrid::Slot {
  std::size_t index = 0;  // position in the half spectrum
  bool conjugate = false; // stored at -m because m_last < 0
  std::size_t mirror = 0; // index of -m when m_last == 0
  bool has_mirror = false;
  double scale = 0.0;     // basis normalization
  bool zero = false;
  bool sine = false;
};

struct SpectralGrid::Plans {
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(spectrum);
  }
};

void check_representable(const SpectralBasis& basis, const std::vector<int>& shape) {
  const int d = basis.domain().dim();
  if (static_cast<int>(shape.size()) != d) {
    throw InvalidArgument("grid shape has " + std::to_string(shape.size()) +
                          " axes but the domain has dimension " + std::to_string(d));
  }
  const auto kmax = basis.max_wavenumber();
  for (int i = 0; i < d; ++i) {
    if (shape[i] < 1) throw InvalidArgument("grid extents must be positive");
    if (2 * kmax[i] >= shape[i]) {
      throw InvalidArgument("wavenumber " + std::to_string(kmax[i]) + " on axis " +
                            std::to_string(i) + " aliases on a grid of " +
                            std::to_string(shape[i]) + " points");
    }
  }
}

std::vector<int> SpectralGrid::dealiased_shape(const SpectralBasis& basis,
                                               int extra_bandwidth) {
  const auto kmax = basis.max_wavenumber();
  std::vector<int> shape;
  for (int i = 0; i < basis.domain().dim(); ++i) {
    // A cubic product reaches 3K; it must not fold back onto |m| <= K.
    const int band = std::max(4 * kmax[i], 2 * kmax[i] + extra_bandwidth) + 2;
    shape.push_back(next_fft_size(std::max(band, 2)));
  }
  return shape;
}

std::vector<int> SpectralGrid::minimal_shape(const SpectralBasis& basis) {
  const auto kmax = basis.max_wavenumber();
  std::vector<int> shape;
  for (int i = 0; i < basis.domain().dim(); ++i) shape.push_back(2 * kmax[i] + 2);
  return shape;
}

SpectralGrid::SpectralGrid(const SpectralBasis& basis, std::vector<int> shape)
    : basis_(basis), shape_(std::move(shape)) {
  check_representable(basis_, shape_);
  const int d = basis_.domain().dim();
  points_ = 1;
  cell_volume_ = 1.0;
  for (int i = 0; i < d; ++i) {
    points_ *= shape_[i];
    cell_volume_ *= basis_.domain().length(i) / shape_[i];
  }
  const int last = shape_[d - 1] / 2 + 1;
  spectrum_size_ = points_ / shape_[d - 1] * last;

  auto flat = [&](const Wavevector& m) {
    std::size_t idx = 0;
    for (int i = 0; i < d - 1; ++i) {
      const int n = shape_[i];
      idx = idx * n + static_cast<std::size_t>(((m[i] % n) + n) % n);
    }
    return idx * last + static_cast<std::size_t>(m[d - 1]);
  };

  const double vol = basis_.domain().volume();
  slots_.reserve(basis_.modes().size());
  for (const auto& mode : basis_.modes()) {
    Slot s;
    s.sine = mode.sine;
    if (mode.is_zero()) {
      s.zero = true;
      s.scale = 1.0 / std::sqrt(vol);
      s.index = 0;
    } else {
      s.scale = std::sqrt(2.0 / vol);
      Wavevector m = mode.wavevector;
      Wavevector neg{-m[0], -m[1], -m[2]};
      if (m[d - 1] < 0) {
        s.conjugate = true;
        s.index = flat(neg);
      } else {
        s.index = flat(m);
        if (m[d - 1] == 0) {
          s.has_mirror = true;
          s.mirror = flat(neg);
        }
      }
    }
    slots_.push_back(s);
  }

  plans_ = std::make_unique<Plans>();
  std::vector<int> dims(shape_.begin(), shape_.end());
  std::lock_guard lock(planner_mutex());
  plans_->real = fftw_alloc_real(static_cast<std::size_t>(points_));
  plans_->spectrum = fftw_alloc_complex(static_cast<std::size_t>(spectrum_size_));
  plans_->r2c = fftw_plan_dft_r2c(d, dims.data(), plans_->real, plans_->spectrum,
                                  FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r(d, dims.data(), plans_->spectrum, plans_->real,
                                  FFTW_ESTIMATE);
  if (!plans_->r2c || !plans_->c2r) throw Error("FFTW planning failed");
}

SpectralGrid::~SpectralGrid() = default;
SpectralGrid::SpectralGrid(SpectralGrid&&) noexcept = default;
SpectralGrid& SpectralGrid::operator=(SpectralGrid&&) noexcept = default;

double SpectralGrid::coordinate(int axis, int j) const {
  return basis_.domain().length(axis) * j / shape_.at(axis);
}

void SpectralGrid::synthesize(std::span<const double> coeffs, std::span<double> values) {
  if (static_cast<int>(coeffs.size()) != basis_.size() ||
      static_cast<int>(values.size()) != points_) {
    throw InvalidArgument("synthesize: buffer sizes do not match the grid");
  }
  fftw_complex* h = plans_->spectrum;
  for (int i = 0; i < spectrum_size_; ++i) h[i][0] = h[i][1] = 0.0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const Slot& s = slots_[k];
    const double c = coeffs[k];
    if (s.zero) {
      h[0][0] += s.scale * c;
      continue;
    }
    // cos: a c/2 at +m and -m; sin: -i a c/2 at +m, +i a c/2 at -m.
    double re = 0.5 * s.scale * c;
    double im = 0.0;
    if (s.sine) {
      im = -re;
      re = 0.0;
    }
    if (s.conjugate) im = -im;
    h[s.index][0] += re;
    h[s.index][1] += im;
    if (s.has_mirror) {
      h[s.mirror][0] += re;
      h[s.mirror][1] -= im;
    }
  }
  fftw_execute(plans_->c2r);
  std::copy_n(plans_->real, points_, values.data());
}

void SpectralGrid::forward(std::span<const double> values) {
  if (static_cast<int>(values.size()) != points_) {
    throw InvalidArgument("project: value buffer does not match the grid");
  }
  std::copy(values.begin(), values.end(), plans_->real);
  fftw_execute(plans_->r2c);
}

void SpectralGrid::project(std::span<const double> values, std::span<double> coeffs) {
  if (static_cast<int>(coeffs.size()) != basis_.size()) {
    throw InvalidArgument("project: coefficient buffer does not match the basis");
  }
  forward(values);
  const fftw_complex* f = plans_->spectrum;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const Slot& s = slots_[k];
    const double w = s.scale * cell_volume_;
    if (s.zero) {
      coeffs[k] = w * f[0][0];
    } else if (s.sine) {
      const double im = s.conjugate ? -f[s.index][1] : f[s.index][1];
      coeffs[k] = -w * im;
    } else {
      coeffs[k] = w * f[s.index][0];
    }
  }
}

void SpectralGrid::project_pairs(std::span<const double> values,
                                 std::span<double> cos_part, std::span<double> sin_part) {
  if (static_cast<int>(cos_part.size()) != basis_.size() ||
      static_cast<int>(sin_part.size()) != basis_.size()) {
    throw InvalidArgument("project_pairs: buffers do not match the basis");
  }
  forward(values);
  const fftw_complex* f = plans_->spectrum;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const Slot& s = slots_[k];
    const double w = s.scale * cell_volume_;
    if (s.zero) {
      cos_part[k] = w * f[0][0];
      sin_part[k] = 0.0;
      continue;
    }
    const double im = s.conjugate ? -f[s.index][1] : f[s.index][1];
    cos_part[k] = w * f[s.index][0];
    sin_part[k] = -w * im;
  }
}

}  // namespace spdekit
