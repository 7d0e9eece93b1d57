#include "polariton/grid.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "polariton/errors.hpp"

namespace polariton {

namespace detail {

namespace {
// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

class FftPlans {
 public:
  FftPlans(int dimension, int points) {
    std::vector<int> dims(static_cast<std::size_t>(dimension), points);
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);

    std::lock_guard lock(planner_mutex());
    auto* buffer = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft(dimension, dims.data(), buffer, buffer, FFTW_FORWARD, flags);
    inverse_ = fftw_plan_dft(dimension, dims.data(), buffer, buffer, FFTW_BACKWARD, flags);
    fftw_free(buffer);
    if (forward_ == nullptr || inverse_ == nullptr) {
      throw std::runtime_error("FFTW failed to create a plan");
    }
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  void forward(ComplexArray& data) const { execute(forward_, data); }
  void inverse(ComplexArray& data) const { execute(inverse_, data); }

 private:
  static void execute(fftw_plan plan, ComplexArray& data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
  }

  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace detail

Grid::Grid(int dimension, int points_per_axis, double half_width, std::size_t max_points)
    : dimension_(dimension), points_(points_per_axis), half_width_(half_width) {
  if (dimension < 1 || dimension > 3) {
    throw ConfigError("grid dimension must be 1, 2 or 3 (got " + std::to_string(dimension) + ")",
                      "n");
  }
  if (points_per_axis % 2 != 0) {
    throw ConfigError("points per axis must be even (got " + std::to_string(points_per_axis) + ")",
                      "N");
  }
  if (points_per_axis < 4) {
    throw ConfigError("points per axis must be at least 4", "N");
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("half width L must be positive and finite", "L");
  }

  std::size_t total = 1;
  for (int d = 0; d < dimension; ++d) {
    total *= static_cast<std::size_t>(points_per_axis);
    if (total > max_points) {
      throw ConfigError("grid has more points than the configured cap of " +
                            std::to_string(max_points),
                        "max_points");
    }
  }
  size_ = total;
  spacing_ = 2.0 * half_width / points_per_axis;
  cell_volume_ = std::pow(spacing_, dimension);
  box_volume_ = std::pow(2.0 * half_width, dimension);

  const double kunit = std::numbers::pi / half_width;
  radius_squared_ = RealArray::Zero(static_cast<Eigen::Index>(size_));
  wavenumber_squared_ = RealArray::Zero(static_cast<Eigen::Index>(size_));
  centering_sign_ = RealArray::Ones(static_cast<Eigen::Index>(size_));

  // Walk all flat indices, decoding per-axis indices row-major.
  for (std::size_t flat = 0; flat < size_; ++flat) {
    std::size_t rest = flat;
    double r2 = 0.0;
    double k2 = 0.0;
    long long offset_sum = 0;
    for (int d = dimension - 1; d >= 0; --d) {
      const int i = static_cast<int>(rest % static_cast<std::size_t>(points_per_axis));
      rest /= static_cast<std::size_t>(points_per_axis);
      const double x = -half_width + i * spacing_;
      const int m = mode_offset(i);
      r2 += x * x;
      k2 += (kunit * m) * (kunit * m);
      offset_sum += m;
    }
    const auto e = static_cast<Eigen::Index>(flat);
    radius_squared_[e] = r2;
    wavenumber_squared_[e] = k2;
    centering_sign_[e] = (offset_sum % 2 == 0) ? 1.0 : -1.0;
  }

  plans_ = std::make_shared<const detail::FftPlans>(dimension, points_per_axis);
}

std::vector<double> Grid::axis_coordinates() const {
  std::vector<double> x(static_cast<std::size_t>(points_));
  for (int i = 0; i < points_; ++i) x[static_cast<std::size_t>(i)] = -half_width_ + i * spacing_;
  return x;
}

std::vector<double> Grid::axis_wavenumbers() const {
  const double kunit = std::numbers::pi / half_width_;
  std::vector<double> k(static_cast<std::size_t>(points_));
  for (int i = 0; i < points_; ++i) k[static_cast<std::size_t>(i)] = kunit * (i - points_ / 2);
  return k;
}

std::size_t Grid::mode_index(std::span<const int> offsets) const {
  if (offsets.size() != static_cast<std::size_t>(dimension_)) {
    throw ConfigError("mode offset rank does not match grid dimension");
  }
  std::size_t flat = 0;
  for (int m : offsets) {
    if (m < -points_ / 2 || m >= points_ / 2) throw ConfigError("mode offset out of range");
    const int i = m >= 0 ? m : m + points_;
    flat = flat * static_cast<std::size_t>(points_) + static_cast<std::size_t>(i);
  }
  return flat;
}

std::size_t Grid::point_index(std::span<const int> indices) const {
  if (indices.size() != static_cast<std::size_t>(dimension_)) {
    throw ConfigError("point index rank does not match grid dimension");
  }
  std::size_t flat = 0;
  for (int i : indices) {
    if (i < 0 || i >= points_) throw ConfigError("point index out of range");
    flat = flat * static_cast<std::size_t>(points_) + static_cast<std::size_t>(i);
  }
  return flat;
}

RealArray Grid::sobolev_weights(double s) const {
  if (s == 0.0) return RealArray::Ones(wavenumber_squared_.size());
  return (1.0 + wavenumber_squared_).pow(s);
}

void Grid::forward_fft(ComplexArray& data) const { plans_->forward(data); }
void Grid::inverse_fft(ComplexArray& data) const { plans_->inverse(data); }

GridPtr make_grid(int dimension, int points_per_axis, double half_width, std::size_t max_points) {
  return std::make_shared<const Grid>(dimension, points_per_axis, half_width, max_points);
}

// --- Field -----------------------------------------------------------------

Field::Field(GridPtr grid, ComplexArray values, Representation representation)
    : grid_(std::move(grid)), values_(std::move(values)), representation_(representation) {
  if (!grid_) throw ConfigError("field requires a grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
    throw ConfigError("field length " + std::to_string(values_.size()) +
                      " does not match grid size " + std::to_string(grid_->size()));
  }
  if (!values_.allFinite()) throw NumericalError("field contains non-finite values");
}

Field Field::zeros(GridPtr grid, Representation representation) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return Field(std::move(grid), ComplexArray::Zero(n), representation);
}

void Field::check_compatible(const Field& other) const {
  if (grid_ != other.grid_ && (grid_->dimension() != other.grid_->dimension() ||
                               grid_->points_per_axis() != other.grid_->points_per_axis() ||
                               grid_->half_width() != other.grid_->half_width())) {
    throw ConfigError("fields live on different grids");
  }
  if (representation_ != other.representation_) {
    throw ConfigError("fields have different representations");
  }
}

Field& Field::operator+=(const Field& other) {
  check_compatible(other);
  values_ += other.values_;
  return *this;
}

Field& Field::operator-=(const Field& other) {
  check_compatible(other);
  values_ -= other.values_;
  return *this;
}

Field& Field::operator*=(Complex factor) {
  values_ *= factor;
  if (!values_.allFinite()) throw NumericalError("field scaling produced non-finite values");
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(Complex factor, Field field) { return field *= factor; }
Field operator*(Field field, Complex factor) { return field *= factor; }

Field gaussian_initial(const GridPtr& grid, double amplitude) {
  if (!(amplitude >= 0.0)) throw ConfigError("Gaussian amplitude must be nonnegative", "amplitude");
  ComplexArray values = (amplitude * (-0.5 * grid->radius_squared()).exp()).cast<Complex>();
  return Field(grid, std::move(values));
}

Field spectral_transform(const Field& field, TransformDirection direction) {
  const Grid& grid = field.grid();
  ComplexArray data = field.values();
  if (direction == TransformDirection::forward) {
    if (field.representation() != Representation::physical) {
      throw ConfigError("forward transform needs a physical-space field");
    }
    grid.forward_fft(data);
    data *= grid.centering_sign().cast<Complex>() * grid.cell_volume();
    return Field(field.grid_ptr(), std::move(data), Representation::spectral);
  }
  if (field.representation() != Representation::spectral) {
    throw ConfigError("inverse transform needs a spectral-space field");
  }
  data *= grid.centering_sign().cast<Complex>() / grid.box_volume();
  grid.inverse_fft(data);
  return Field(field.grid_ptr(), std::move(data), Representation::physical);
}

double sobolev_norm(const Field& field, double s) {
  if (!(s >= 0.0)) throw ConfigError("Sobolev index must be nonnegative", "s");
  const Grid& grid = field.grid();
  if (field.representation() == Representation::spectral) {
    const RealArray weights = grid.sobolev_weights(s);
    return std::sqrt((weights * field.values().abs2()).sum() / grid.box_volume());
  }
  return SobolevNorm(field.grid_ptr(), s)(field.values());
}

double l2_norm_physical(const Field& field) {
  if (field.representation() != Representation::physical) {
    throw ConfigError("physical L2 norm needs a physical-space field");
  }
  return std::sqrt(field.values().abs2().sum() * field.grid().cell_volume());
}

Field free_propagate(const Field& field, double t) {
  if (field.representation() != Representation::physical) {
    throw ConfigError("free propagation needs a physical-space field");
  }
  const Grid& grid = field.grid();
  ComplexArray data = field.values();
  grid.forward_fft(data);
  const double norm = 1.0 / static_cast<double>(grid.size());
  const Complex minus_i_t(0.0, -t);
  data *= (minus_i_t * grid.wavenumber_squared().cast<Complex>()).exp() * norm;
  grid.inverse_fft(data);
  return Field(field.grid_ptr(), std::move(data));
}

SobolevNorm::SobolevNorm(GridPtr grid, double s)
    : grid_(std::move(grid)), s_(s), weights_(grid_->sobolev_weights(s)) {
  if (!(s >= 0.0)) throw ConfigError("Sobolev index must be nonnegative", "s");
  // Raw FFT coefficients are (dx^n)^-1 times the transform convention.
  scale_ = grid_->cell_volume() * grid_->cell_volume() / grid_->box_volume();
  scratch_.resize(static_cast<Eigen::Index>(grid_->size()));
}

double SobolevNorm::operator()(const ComplexArray& physical) const {
  scratch_ = physical;
  grid_->forward_fft(scratch_);
  return from_raw_spectrum(scratch_);
}

double SobolevNorm::from_raw_spectrum(const ComplexArray& raw) const {
  return std::sqrt((weights_ * raw.abs2()).sum() * scale_);
}

}  // namespace polariton
