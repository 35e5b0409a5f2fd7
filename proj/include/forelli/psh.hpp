#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "forelli/slices.hpp"

namespace forelli {

/// u_k(z) = (1/k) log|P_k(z)| over a polynomial family in the chart variables.
struct PshFamily {
  SlicePolyFamily source;

  int K() const noexcept { return source.K(); }
  int variables() const noexcept { return source.chart_variables(); }
  /// -inf exactly at zeros of P_k.
  double u(int k, const Point& z) const;
};

/// P_k = exp(log_coeff(k)) b_1^k in one chart variable, for k = 0..K.
PshFamily scaled_power_family(int K, const std::function<double(int)>& log_coeff);
/// P_k = 1 in `variables` chart variables.
PshFamily constant_family(int variables, int K);

struct TorusAverage {
  double value = 0.0;
  /// Number of quadrature nodes where u_k was below the floor.
  int clipped = 0;
  int nodes = 0;
};

inline constexpr double kAverageFloor = -1e3;

/// Trapezoidal mean of u_k over the torus z + r e^{i theta}, grid nodes per angle.
TorusAverage average_on_torus(const PshFamily& family, int k, const Point& z, const Polyradius& r, int grid = 32,
                              double floor = kAverageFloor);

struct LipschitzCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

inline constexpr double kQuadratureSlack = 1e-3;

/// |u_k^r(z) - u_k^s(w)| against (|r - s| + |z - w|)/r0, both norms l1.
LipschitzCheck lipschitz_check(const PshFamily& family, int k, const Point& z, const Point& w, const Polyradius& r,
                               const Polyradius& s, double r0, int grid = 32);

enum class TrichotomyCase { MinusInfinity, PlusInfinity, Finite };
std::string to_string(TrichotomyCase c);

struct TrichotomyConfig {
  int grid = 32;
  /// |alpha_r| at or beyond this is classified as infinite outright.
  double threshold = 50.0;
  /// Least-squares slope of u_k^r(0) against log k over the tail window;
  /// a slope of at least this size is classified as divergence.
  double slope_threshold = 0.5;
  /// Exceptional-set sample: square of half-width `extent` in the first
  /// chart coordinate with `nodes` points per side.
  double extent = 1.0;
  int nodes = 21;
  double gap = 0.5;
};

struct TrichotomyVerdict {
  double alpha_r = 0.0;
  TrichotomyCase kind = TrichotomyCase::Finite;
  /// u_k^r(0) for k = 1..K (entry k-1).
  std::vector<double> averages;
  int window = 0;
  double tail_slope = 0.0;
  /// For PlusInfinity: sample points where the normalized sequence
  /// u_k / u_k^r(0) does not extrapolate to 1.
  std::vector<Point> exceptional;
  int sampled = 0;
};

TrichotomyVerdict classify_trichotomy(const PshFamily& family, const Polyradius& r, const TrichotomyConfig& cfg = {});

struct GridRegion {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  int nx = 41, ny = 41;
};

struct EnvelopeNode {
  double x = 0.0, y = 0.0, u = 0.0, u_star = 0.0;
};

struct EnvelopeField {
  GridRegion region;
  int window = 0;
  double gap = 0.5;
  /// Row-major, x fastest.
  std::vector<EnvelopeNode> nodes;
  std::vector<Complex> exceptional;
};

/// u = max of u_k over the last `window` indices at each node of the region
/// (first chart coordinate, the others zero); u* = max of u over the 3x3
/// neighbourhood. window <= 0 selects floor(K/2).
EnvelopeField upper_envelope(const PshFamily& family, const GridRegion& region, int window = 0,
                             double gap = 0.5);

void write_envelope_csv(std::ostream& out, const EnvelopeField& field);

}  // namespace forelli
