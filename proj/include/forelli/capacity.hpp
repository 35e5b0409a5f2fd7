#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forelli/series.hpp"

namespace forelli {

/// Compact subset of C used by the one-variable capacity estimators.
class CompactSet1D {
public:
  enum class Kind { Disc, Segment, FinitePoints, SampleCloud };

  static CompactSet1D disc(Complex center, double radius);
  static CompactSet1D segment(Complex a, Complex b);
  static CompactSet1D finite_points(std::vector<Complex> points);
  static CompactSet1D sample_cloud(std::vector<Complex> points);
  /// "disc <c> <r>", "segment <a> <b>", "points <z1> <z2> ...", "cloud <z1> ...".
  static CompactSet1D parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  Complex center() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }
  Complex a() const noexcept { return a_; }
  Complex b() const noexcept { return b_; }
  const std::vector<Complex>& points() const noexcept { return points_; }

  /// Deterministic candidate set with at least `count` points for Disc and
  /// Segment; the stored points for the other kinds.
  std::vector<Complex> candidates(int count) const;
  /// The set scaled by a about the origin.
  CompactSet1D scaled(Complex a) const;

private:
  Kind kind_ = Kind::FinitePoints;
  Complex a_, b_;
  double radius_ = 0.0;
  std::vector<Complex> points_;
};

std::string to_string(CompactSet1D::Kind kind);

enum class CapacityMethod { TransfiniteDiameter, EnergyLowerBound, ClosedForm, SiciakExtremal };
std::string to_string(CapacityMethod method);

struct CapacityEstimate {
  double value = 0.0;
  CapacityMethod method = CapacityMethod::TransfiniteDiameter;
  int points_used = 0;
  /// Known exact value for reference sets, reported beside the estimate.
  std::optional<double> closed_form;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

/// Discrete logarithmic energy sum_{i != j} w_i w_j log|p_i - p_j|.
double energy(const std::vector<Complex>& points, const std::vector<double>& weights);

struct LejaSequence {
  std::vector<Complex> points;
  /// Set when the candidates ran out of distinct points.
  bool degenerate = false;
  int candidates = 0;
};

/// Greedy maximizer of the product of distances to the points chosen so far,
/// over at least 50 m candidates.
LejaSequence leja_points(const CompactSet1D& set, int m);

/// Transfinite-diameter estimate from m Leja points.
///
/// The m-point diameter of a disc overestimates its capacity by m^{1/(m-1)}
/// (about 4% at m = 128); value is corrected by that factor and the raw
/// diameter is kept under diagnostics["raw_delta"].
CapacityEstimate cap1d_transfinite(const CompactSet1D& set, int m);

/// Lower bound for the extremal function V_E(z) of a sampled compact E in C^d.
double siciak_lower_bound(const std::vector<Point>& set, const Point& z, int degree, int trials,
                          std::uint64_t seed = 42);

struct SiciakConfig {
  int degree = 32;
  int trials = 200;
  std::vector<double> probe_radii{10.0, 20.0, 40.0};
  int directions = 16;
  std::uint64_t seed = 42;
};

/// c(E) = exp(-gamma) with gamma estimated on the probe shells. Pass the
/// radius of a ball input to have it reported as the closed form.
CapacityEstimate cap_siciak(const std::vector<Point>& set, const SiciakConfig& cfg = {},
                            std::optional<double> ball_radius = std::nullopt);

/// Closed ball sample in C^d: 3/4 of the points on the sphere, the rest inside.
std::vector<Point> ball_sample(const Point& center, double radius, int count, std::uint64_t seed);

struct NormalityConfig {
  int probes = 4000;
  int max_centers = 400;
  std::uint64_t seed = 42;
};

struct NormalityResult {
  bool decidable = false;
  bool is_normal_sufficient = false;
  /// Inscribed ball of the chart image; the radius is a lower bound for c_{n-1}.
  Point center;
  double radius = 0.0;
  /// Median nearest-neighbour distance of the chart sample.
  double resolution = 0.0;
  int chart_points = 0;
  int excluded = 0;
  std::string note;
};

/// Looks for a ball inside the chart image {v_2/v_1, ..., v_n/v_1} of the
/// sampled direction set.
NormalityResult normality_check(const std::vector<Point>& directions, const NormalityConfig& cfg = {});

}  // namespace forelli
