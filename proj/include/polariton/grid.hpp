#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polariton {

using Complex = std::complex<double>;
using ComplexArray = Eigen::ArrayXcd;
using RealArray = Eigen::ArrayXd;

namespace detail {
class FftPlans;
}

/// Periodic tensor grid on [-L, L)^n with N points per axis.
///
/// Spectral arrays are stored in FFT order: along each axis index i maps to the
/// integer offset m = i for i < N/2 and m = i - N for i >= N/2, so the Nyquist
/// mode sits on the negative side. The physical wavenumber is k = (pi/L) m.
/// Multi-dimensional arrays are row-major with axis 0 slowest.
///
/// A Grid is immutable after construction and may be shared between threads.
class Grid {
 public:
  static constexpr std::size_t default_max_points = std::size_t{1} << 24;

  Grid(int dimension, int points_per_axis, double half_width,
       std::size_t max_points = default_max_points);

  int dimension() const noexcept { return dimension_; }
  int points_per_axis() const noexcept { return points_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return size_; }

  /// dx^n
  double cell_volume() const noexcept { return cell_volume_; }
  /// (2L)^n
  double box_volume() const noexcept { return box_volume_; }

  /// x_j = -L + j dx for j = 0..N-1.
  std::vector<double> axis_coordinates() const;
  /// Wavenumbers of one axis in ascending order, offsets -N/2..N/2-1.
  std::vector<double> axis_wavenumbers() const;

  /// Offset m of FFT-order index i along one axis.
  int mode_offset(int index) const noexcept { return index < points_ / 2 ? index : index - points_; }
  /// Flat FFT-order index of the mode with the given per-axis offsets.
  std::size_t mode_index(std::span<const int> offsets) const;
  /// Flat index of the physical point with the given per-axis indices.
  std::size_t point_index(std::span<const int> indices) const;

  /// |x|^2 at every physical point.
  const RealArray& radius_squared() const noexcept { return radius_squared_; }
  /// |k|^2 of every mode, FFT order.
  const RealArray& wavenumber_squared() const noexcept { return wavenumber_squared_; }
  /// (-1)^(sum of offsets) per mode; converts raw FFT sums to a box centred at 0.
  const RealArray& centering_sign() const noexcept { return centering_sign_; }

  /// (1 + |k|^2)^s per mode.
  RealArray sobolev_weights(double s) const;

  /// Unnormalised in-place DFT, sum_j u_j exp(-2 pi i j.m / N).
  void forward_fft(ComplexArray& data) const;
  /// Unnormalised in-place inverse DFT, sum_m u_m exp(+2 pi i j.m / N).
  void inverse_fft(ComplexArray& data) const;

 private:
  int dimension_;
  int points_;
  double half_width_;
  double spacing_;
  std::size_t size_;
  double cell_volume_;
  double box_volume_;
  RealArray radius_squared_;
  RealArray wavenumber_squared_;
  RealArray centering_sign_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dimension, int points_per_axis, double half_width,
                  std::size_t max_points = Grid::default_max_points);

enum class Representation { physical, spectral };
enum class TransformDirection { forward, inverse };

/// Complex samples on a grid, tagged with the space they live in.
/// Entries are always finite; construction from non-finite data throws.
class Field {
 public:
  Field(GridPtr grid, ComplexArray values, Representation representation = Representation::physical);

  static Field zeros(GridPtr grid, Representation representation = Representation::physical);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const ComplexArray& values() const noexcept { return values_; }
  Representation representation() const noexcept { return representation_; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(Complex factor);

 private:
  void check_compatible(const Field& other) const;

  GridPtr grid_;
  ComplexArray values_;
  Representation representation_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(Complex factor, Field field);
Field operator*(Field field, Complex factor);

/// amplitude * exp(-|x|^2 / 2)
Field gaussian_initial(const GridPtr& grid, double amplitude);

/// Forward: u_hat(k) = dx^n sum_j u(x_j) exp(-i k.x_j). Inverse is its exact inverse.
Field spectral_transform(const Field& field, TransformDirection direction);

/// ((2L)^-n sum_k (1+|k|^2)^s |u_hat(k)|^2)^(1/2); s = 0 is the discrete L2 norm.
double sobolev_norm(const Field& field, double s);

/// Discrete L2 norm computed in physical space, (sum_j |u_j|^2 dx^n)^(1/2).
double l2_norm_physical(const Field& field);

/// Exact free Schroedinger flow: each mode picks up exp(-i |k|^2 t).
Field free_propagate(const Field& field, double t);

/// Reusable H^s norm evaluator for raw physical arrays on one grid.
/// Not thread-safe; holds scratch storage.
class SobolevNorm {
 public:
  SobolevNorm(GridPtr grid, double s);

  double s() const noexcept { return s_; }
  double operator()(const ComplexArray& physical) const;
  /// Norm of a raw (unnormalised FFT) spectral array.
  double from_raw_spectrum(const ComplexArray& raw) const;

 private:
  GridPtr grid_;
  double s_;
  RealArray weights_;
  double scale_;
  mutable ComplexArray scratch_;
};

}  // namespace polariton
