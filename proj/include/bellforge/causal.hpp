#pragma once

// De Broglie-Bohm momentum field, and Roy-Singh phase-space densities built
// from CDF-matching transport maps in one and two dimensions.
//
// Densities are given as cell masses. Each CDF passes through the cumulative
// masses at the cell edges and is a monotone cubic (Fritsch-Carlson limited
// Hermite) inside each cell, with edge slopes taken from the neighbouring cells.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellforge/waves.hpp"

namespace bellforge::causal {

struct MomentumField {
  waves::Axis axis;
  std::vector<double> values;  // NaN where undefined
  std::vector<bool> defined;   // false where |psi| < 1e-12
};

/// Im(psi'/psi) with psi' from a spectral derivative.
MomentumField debb_momentum_field(const waves::GridWavefunction& psi);

struct TakabayasiReport {
  double gap = 0.0;            // L1 distance of the pushforward to |psi~|^2
  double excluded_mass = 0.0;  // undefined field points plus mass pushed off the grid
};

/// Pushes |psi(x)|^2 through the DeBB field onto the conjugate momentum grid
/// (cloud-in-cell deposition) and compares with |psi~(p)|^2.
TakabayasiReport takabayasi_gap(const waves::GridWavefunction& psi);

/// Cumulative distribution of a nonnegative cell density; values[k] is the
/// normalized mass left of edge k (there are n + 1 edges).
class Cdf {
 public:
  Cdf() = default;
  /// Throws InputError for negative entries. An all-zero density gives an
  /// empty CDF whose inverse returns 0.
  Cdf(const waves::Axis& axis, const std::vector<double>& density);

  const waves::Axis& axis() const { return axis_; }
  const std::vector<double>& values() const { return values_; }
  double edge(std::size_t k) const;
  double total_mass() const { return total_; }
  bool empty() const { return total_ <= 0.0; }

  double operator()(double x) const;
  /// Interpolated inverse; a level held on a plateau maps to the plateau midpoint.
  double inverse(double u) const;

 private:
  double within(std::size_t cell, double t) const;

  waves::Axis axis_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  double total_ = 0.0;
};

/// p^(x) solving F_target(p^) = F_source(x) (epsilon = +1, nondecreasing) or
/// F_target(p^) = 1 - F_source(x) (epsilon = -1, nonincreasing).
class MonotoneMap {
 public:
  MonotoneMap() = default;
  MonotoneMap(Cdf source, Cdf target, int epsilon);

  const Cdf& source() const { return source_; }
  const Cdf& target() const { return target_; }
  int epsilon() const { return epsilon_; }

  double operator()(double x) const;
  /// p^ at the source grid points.
  std::vector<double> image() const;
  bool is_monotone() const;

 private:
  Cdf source_;
  Cdf target_;
  int epsilon_ = 1;
};

/// Position-to-momentum map of a 1-D position wavefunction. Throws InputError
/// unless epsilon is +1 or -1.
MonotoneMap rs_map_1d(const waves::GridWavefunction& psi, int epsilon);

/// CDF-preserving position flow from |psi_t|^2 to |psi_t'|^2.
MonotoneMap position_flow(const waves::GridWavefunction& psi_t, const waves::GridWavefunction& psi_t2);

enum class ChainOrdering {
  MomentumFirst,  // (X1X2) -> (P1X2) -> (P1P2)
  PositionFirst,  // (X1X2) -> (X1P2) -> (P1P2)
};

/// Conditional maps of a 2-D chain. For MomentumFirst, first[j] is
/// p^1(x1 | x2_j) and second[m] is p^2(x2 | p1_m); for PositionFirst,
/// first[i] is p^2(x2 | x1_i) and second[m] is p^1(x1 | p2_m). A continuous
/// conditioning variable uses the map of the cell it falls in.
struct ChainedMap2D {
  ChainOrdering ordering = ChainOrdering::MomentumFirst;
  int epsilon1 = 1;
  int epsilon2 = 1;
  waves::Axis x1, x2, p1, p2;
  std::vector<MonotoneMap> first;
  std::vector<MonotoneMap> second;

  /// (p1, p2) assigned to the phase-space point above (x1, x2).
  std::pair<double, double> image(double x1, double x2) const;
  /// image() at every grid point, layout [i][j] with p1 then p2 interleaved.
  std::vector<double> image_table() const;
};

/// Builds the chained maps; throws GridResolutionError when a slice total and
/// its transformed partner differ by more than 1e-5.
ChainedMap2D rs_map_2d(const waves::GridWavefunction& psi, int epsilon1, int epsilon2,
                       ChainOrdering ordering);

/// Largest |difference| of image tables over grid points whose position
/// density exceeds `floor` times its maximum.
double image_difference(const ChainedMap2D& a, const ChainedMap2D& b, const waves::GridWavefunction& psi,
                        double floor = 1e-6);

struct VerifyOptions {
  bool monte_carlo = false;
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  /// Extra CCS to report for a 2-D chain: any of "x1x2", "p1x2", "x1p2", "p1p2".
  std::vector<std::string> extra_ccs;
};

struct MarginalEntry {
  std::string ccs;
  double l1 = 0.0;
  bool in_chain = true;  // entries outside the chain are reported, never passed
  bool pass = false;
};

struct MarginalReport {
  std::vector<MarginalEntry> entries;
  double tolerance = 0.0;  // 5e-3 deterministic, 5e-2 Monte Carlo
  bool pass = false;       // every in-chain entry below tolerance

  const MarginalEntry* find(const std::string& ccs) const;
};

/// Distances between the densities the map reproduces and those of psi.
/// The deterministic path splits each cell into four sub-cells and spreads
/// each sub-cell's mass uniformly over its image; the Monte Carlo path draws
/// seeded samples and compares histograms on bins four cells wide.
MarginalReport verify_marginals(const MonotoneMap& map, const waves::GridWavefunction& psi,
                                const VerifyOptions& opts = {});
MarginalReport verify_marginals(const ChainedMap2D& map, const waves::GridWavefunction& psi,
                                const VerifyOptions& opts = {});

/// Pushforward of `source` through `map` compared with `target` (both on
/// the map's own axes), deterministic path.
double pushforward_distance(const MonotoneMap& map, const std::vector<double>& source,
                            const std::vector<double>& target);

struct ChainVariant {
  ChainOrdering ordering;
  int epsilon1;
  int epsilon2;
};

/// All eight (ordering, epsilon1, epsilon2) chains of psi, with groups of
/// variants whose image tables agree within `tolerance`.
struct VariantSurvey {
  std::vector<ChainVariant> variants;
  std::vector<int> group;  // variants with the same group id coincide
};
VariantSurvey survey_variants(const waves::GridWavefunction& psi, double tolerance = 1e-3);

std::string ordering_name(ChainOrdering o);  // "px" or "xp"

}  // namespace bellforge::causal
