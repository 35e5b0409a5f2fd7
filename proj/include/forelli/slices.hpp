#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forelli/errors.hpp"
#include "forelli/series.hpp"

namespace forelli {

/// Threshold below which |v_1| is treated as zero and the chart is undefined.
inline constexpr double kChartThreshold = 1e-9;

/// Unit direction v in C^n with its affine chart b = (v_2/v_1, ..., v_n/v_1).
struct Direction {
  Point unit;
  std::optional<Point> chart;

  /// Normalizes v (throws PreconditionError for a zero vector).
  static Direction from_vector(const Point& v);
  /// The unit vector (1, b)/|(1, b)|.
  static Direction from_chart(const Point& b);

  bool has_chart() const noexcept { return chart.has_value(); }
};

/// Restriction t -> S(a t): coefficients c(p, q) of t^p tbar^q, p + q <= N.
struct SliceSeries {
  int max_order = 0;
  Eigen::MatrixXcd coefficients;

  Complex coefficient(int p, int q) const;
};

SliceSeries slice(const FormalSeries& s, const Point& a);

/// Sparse polynomial in the chart variables, stored as exp(log_scale) * sum c_i b^i.
/// The scale lets families such as k^k b^k be represented without overflow.
class ChartPolynomial {
public:
  using TermMap = std::map<MultiIndex, Complex>;

  ChartPolynomial() = default;
  explicit ChartPolynomial(int variables, TermMap terms = {}, double log_scale = 0.0);

  static ChartPolynomial monomial(int variables, const MultiIndex& exponent, Complex c,
                                  double log_scale = 0.0);

  int variables() const noexcept { return variables_; }
  const TermMap& terms() const noexcept { return terms_; }
  double log_scale() const noexcept { return log_scale_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// Total degree; -1 for the zero polynomial.
  int degree() const;

  /// sum c_i b^i without the exp(log_scale) factor.
  Complex evaluate_unscaled(const Point& b) const;
  Complex evaluate(const Point& b) const;
  /// log|P(b)|, -inf at zeros.
  double log_abs(const Point& b) const;

private:
  int variables_ = 0;
  TermMap terms_;
  double log_scale_ = 0.0;
  int degree_ = -1;
};

/// P_0, ..., P_K in n - 1 chart variables.
struct SlicePolyFamily {
  int dimension = 1;  // n, the ambient dimension of the source series
  std::vector<ChartPolynomial> polys;

  int K() const noexcept { return static_cast<int>(polys.size()) - 1; }
  int chart_variables() const noexcept { return dimension - 1; }

  /// Family with P_k = generator(k) for k = 0..K.
  static SlicePolyFamily generate(int dimension, int K, const std::function<ChartPolynomial(int)>& generator);
};

/// Regroups a holomorphic-type series along total degree.
/// P_k(b) = sum_{|i| <= k} a_{k-|i|, i} b^i.
SlicePolyFamily chart_poly_family(const FormalSeries& s, int K);

struct RootTestResult {
  /// Estimated radius R = exp(-L), +inf when the tail vanishes.
  double radius = 0.0;
  /// Window maximum of (1/k) log|P_k|.
  double limsup_proxy = 0.0;
  int K = 0;
  int window = 0;
  bool tail_zero = false;
  /// (1/k) log|P_k| for k = 1..K (entry k-1), -inf at zeros.
  std::vector<double> sequence;
};

/// Default window: floor(K/2), the largest window with K >= 2 * window.
int default_window(int K);

/// Root test from |P_k| for k = 0..K; window <= 0 selects the default.
RootTestResult radius_root_test(const std::vector<double>& abs_values, int window = 0);
/// Same test from log|P_k| (k = 0..K), for families whose moduli overflow.
RootTestResult radius_root_test_log(const std::vector<double>& log_values, int window = 0);
/// Root test along the ray (1, b).
RootTestResult radius_along(const SlicePolyFamily& family, const Point& b, int window = 0);

struct Polydisc {
  Point center;
  Polyradius radius;
};

struct CertificateConfig {
  double margin = 0.05;
  /// Angular nodes per chart variable on the distinguished boundary.
  int boundary_grid = 48;
  /// Random points of P^n(0; r') used for the block-sum check.
  int check_points = 20;
  std::uint64_t seed = 42;
};

struct ConvergenceCertificate {
  double M = 0.0;
  double r0 = 0.0;
  Polyradius r_prime;
  int K_used = 0;
  double margin = 0.0;
  /// sup over the checked samples of |P_k(b)|^{1/k}, before the margin floor.
  double sampled_sup = 0.0;
  int boundary_points = 0;
  int interior_points = 0;
  bool cauchy_ok = false;
  bool block_ok = false;
  /// Largest |a| / (M^k r0^{-|i|}) over stored coefficients with k >= 1.
  double worst_cauchy_ratio = 0.0;
  /// Largest block sum / bound over the check points.
  double worst_block_ratio = 0.0;

  bool accepted() const noexcept { return cauchy_ok && block_ok; }
  Polydisc polydisc() const;
};

/// A certificate whose verification failed; the rejected data is attached.
class CertificateRefused : public NumericalError {
public:
  CertificateRefused(const std::string& message, ConvergenceCertificate cert)
      : NumericalError(message), certificate_(std::move(cert)) {}
  const ConvergenceCertificate& certificate() const noexcept { return certificate_; }

private:
  ConvergenceCertificate certificate_;
};

/// Bound used for the order-k block sum sum_{|I| = k} |a_I z^I| on P^n(0; r').
/// Each term is below 2^{-k} and there are C(k+n-1, n-1) of them.
double block_bound(int k, int n);

/// Builds the certificate and runs both verifications; never throws on a
/// failed check (see certify_polydisc).
ConvergenceCertificate build_certificate(const FormalSeries& s, double r0, int K, int sample_count,
                                         const CertificateConfig& cfg = {});

/// As build_certificate, but throws CertificateRefused when a check fails.
ConvergenceCertificate certify_polydisc(const FormalSeries& s, double r0, int K, int sample_count,
                                        const CertificateConfig& cfg = {});

}  // namespace forelli
