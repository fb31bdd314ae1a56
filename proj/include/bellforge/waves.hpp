#pragma once

// Grid-sampled wavefunctions in one and two dimensions (hbar = 1).
//
// Every axis is centered: coordinate(i) = (i - n/2) * spacing with n a power
// of two, so index n/2 sits exactly at zero. The Fourier transform
//   psi~(p) = (2 pi)^(-1/2) int exp(-i p x) psi(x) dx
// maps a position axis of spacing dx onto a momentum axis of spacing
// 2 pi / (n dx) and is unitary on the grid.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bellforge::waves {

using Complex = std::complex<double>;

enum class Representation { Position, Momentum };

struct Axis {
  Representation rep = Representation::Position;
  std::size_t n = 0;
  double spacing = 0.0;

  /// n points spanning [-half_extent, half_extent). Throws InputError unless n
  /// is a power of two >= 2 and half_extent > 0.
  static Axis centered(std::size_t n, double half_extent,
                       Representation rep = Representation::Position);

  double coordinate(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(n / 2)) * spacing;
  }
  double half_extent() const { return static_cast<double>(n / 2) * spacing; }
  /// The axis this one is mapped onto by the Fourier transform.
  Axis conjugate() const;

  bool operator==(const Axis&) const = default;
};

/// Nonnegative values on a grid of one or two axes, row-major (last axis fastest).
struct Density {
  std::vector<Axis> axes;
  std::vector<double> values;

  double cell_volume() const;
  double total() const;
  double at(std::size_t i) const { return values[i]; }
  double at(std::size_t i, std::size_t j) const { return values[i * axes[1].n + j]; }
};

class GridWavefunction {
 public:
  GridWavefunction() = default;
  /// Throws InputError if the value count does not match the axes.
  GridWavefunction(std::vector<Axis> axes, std::vector<Complex> values);

  static GridWavefunction sample(const Axis& axis, const std::function<Complex(double)>& f);
  static GridWavefunction sample(const Axis& a0, const Axis& a1,
                                 const std::function<Complex(double, double)>& f);

  std::size_t dim() const { return axes_.size(); }
  const Axis& axis(std::size_t k) const { return axes_.at(k); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::vector<std::size_t> shape() const;
  std::size_t size() const { return values_.size(); }

  const std::vector<Complex>& values() const { return values_; }
  std::vector<Complex>& values() { return values_; }
  const Complex& at(std::size_t i) const { return values_[i]; }
  const Complex& at(std::size_t i, std::size_t j) const { return values_[i * axes_[1].n + j]; }

  /// sum |psi|^2 times the cell volume.
  double norm_squared() const;

  /// Rescales to unit discrete norm; returns 1 - (norm before).
  double normalize();

  /// The deficit recorded by the last normalize() call (0 if never normalized).
  double normalization_deficit() const { return deficit_; }
  /// For constructions that correct the raw samples before normalizing.
  void set_normalization_deficit(double d) { deficit_ = d; }

 private:
  std::vector<Axis> axes_;
  std::vector<Complex> values_;
  double deficit_ = 0.0;
};

/// Toggles the representation of one axis (position -> momentum uses
/// exp(-ipx), momentum -> position uses exp(+ipx)).
GridWavefunction fourier(const GridWavefunction& psi, std::size_t axis);

/// |psi|^2 on the same axes.
Density density(const GridWavefunction& psi);

/// sum |a - b| times cell volume; axes must agree.
double l1_distance(const Density& a, const Density& b);

/// Mean and variance of a one-axis density, or of axis k of a two-axis one.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments moments(const Density& d, std::size_t axis = 0);

/// Marginal of a two-axis density on the kept axis.
Density marginal(const Density& d, std::size_t keep_axis);

struct GaussianPacket {
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma = 1.0;  // position std at t = 0
  double t = 0.0;
  double mass = 1.0;
};

/// Position std of the freely spread packet, sqrt(sigma^2 + t^2/(4 sigma^2 m^2)).
double spread_width(const GaussianPacket& g);

/// Exact free evolution of a minimum-uncertainty Gaussian, sampled on a
/// position axis. Throws InputError for sigma <= 0 or mass <= 0, and
/// TruncationError when the grid does not hold the packet (center +- 4
/// widths outside the extent in position or momentum, or norm deficit > 1e-6).
GridWavefunction gaussian_packet(const GaussianPacket& g, const Axis& axis);

/// Analytic value of the packet above (unit norm in the continuum).
Complex gaussian_packet_value(const GaussianPacket& g, double x);

/// Normalized harmonic-oscillator eigenfunction (m = omega = 1).
GridWavefunction oscillator_state(unsigned level, const Axis& axis);

/// Normalized superposition sum_k c_k psi_k of states on identical axes.
GridWavefunction superpose(std::span<const Complex> coefficients,
                           std::span<const GridWavefunction> states);

/// Asymmetric two-packet superposition used as a non-Gaussian test state.
GridWavefunction two_gaussian(const Axis& axis);

/// psi(x1, x2) = f(x1) g(x2)
GridWavefunction product(const GridWavefunction& f, const GridWavefunction& g);

/// psi ~ exp(-(x - c)^T (A - i B)(x - c) / 2 + i p0 . x), discretely normalized.
/// A must be positive definite; B is a real symmetric chirp.
struct Gaussian2d {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double p1 = 0.0, p2 = 0.0;
};
GridWavefunction gaussian_2d(const Gaussian2d& g, const Axis& a0, const Axis& a1);

/// psi(x) -> psi(-x) on a 1-D grid (index i -> (n - i) mod n).
GridWavefunction reflect(const GridWavefunction& psi);

/// Embeds the samples in a grid `factor` times wider along `axis` (same
/// spacing, zeros outside); factor must be a power of two.
GridWavefunction zero_pad(const GridWavefunction& psi, std::size_t axis, std::size_t factor);

enum class MarginalSign { Plus, Minus };

/// h_L(q) = theta(L - q) / sqrt((q + 1) ln(L + 1)) evaluated at |q| (theta(0) = 1/2).
double cutoff_profile(double L, double q);

/// The two-mode states [1 +- e^{i pi/4} sgn q1 sgn q2] h_L(|q1|) h_L(|q2|) / (2 sqrt 2)
/// sampled on a 2-D position grid. The factors h and sgn h are each scaled to
/// their continuum norm before the state is assembled; the deficit of the raw
/// samples is kept on the result. Throws DomainError unless L > 0 and both
/// half extents exceed L.
GridWavefunction psi_marginal_state(MarginalSign sign, double L, const Axis& a0, const Axis& a1);

/// A finite sum of product terms c_k f_k(x1) g_k(x2) with 1-D factors.
class SeparableWavefunction {
 public:
  struct Term {
    Complex coefficient;
    GridWavefunction first;
    GridWavefunction second;
  };

  explicit SeparableWavefunction(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  const Axis& axis(std::size_t k) const;

  double norm_squared() const;
  double normalize();
  double normalization_deficit() const { return deficit_; }
  void set_normalization_deficit(double d) { deficit_ = d; }

  SeparableWavefunction fourier(std::size_t axis) const;
  GridWavefunction to_grid() const;

 private:
  std::vector<Term> terms_;
  double deficit_ = 0.0;
};

/// psi_marginal_state as a two-term separable state on one shared 1-D axis;
/// usable at cutoffs far beyond what a 2-D grid can hold.
SeparableWavefunction psi_marginal_separable(MarginalSign sign, double L, const Axis& axis);

}  // namespace bellforge::waves
