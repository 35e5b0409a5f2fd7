#include "forelli/slices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace forelli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Direction Direction::from_vector(const Point& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw PreconditionError("direction must be a nonzero finite vector");
  Direction d;
  d.unit = v / norm;
  if (std::abs(d.unit[0]) > kChartThreshold) d.chart = d.unit.tail(d.unit.size() - 1) / d.unit[0];
  return d;
}

Direction Direction::from_chart(const Point& b) {
  Point v(b.size() + 1);
  v[0] = 1.0;
  v.tail(b.size()) = b;
  Direction d;
  d.unit = v / v.norm();
  d.chart = b;
  return d;
}

Complex SliceSeries::coefficient(int p, int q) const {
  if (p < 0 || q < 0 || p + q > max_order) return 0.0;
  return coefficients(p, q);
}

SliceSeries slice(const FormalSeries& s, const Point& a) {
  if (a.size() != s.dimension()) throw DimensionMismatch("slice direction has the wrong dimension");
  SliceSeries out;
  out.max_order = s.max_order();
  out.coefficients = Eigen::MatrixXcd::Zero(s.max_order() + 1, s.max_order() + 1);
  for (const auto& [key, c] : s.terms()) {
    Complex m = c;
    for (Eigen::Index k = 0; k < a.size(); ++k)
      m *= std::pow(a[k], key.holo[k]) * std::pow(std::conj(a[k]), key.anti[k]);
    out.coefficients(key.holo.order(), key.anti.order()) += m;
  }
  return out;
}

ChartPolynomial::ChartPolynomial(int variables, TermMap terms, double log_scale)
    : variables_(variables), log_scale_(log_scale) {
  if (variables < 0) throw PreconditionError("chart polynomial needs >= 0 variables");
  for (auto& [e, c] : terms) {
    if (static_cast<int>(e.dimension()) != variables)
      throw DimensionMismatch("chart exponent has the wrong number of variables");
    if (c != Complex(0.0)) {
      terms_.emplace(e, c);
      degree_ = std::max(degree_, e.order());
    }
  }
}

ChartPolynomial ChartPolynomial::monomial(int variables, const MultiIndex& exponent, Complex c,
                                          double log_scale) {
  return ChartPolynomial(variables, TermMap{{exponent, c}}, log_scale);
}

int ChartPolynomial::degree() const { return degree_; }

Complex ChartPolynomial::evaluate_unscaled(const Point& b) const {
  if (b.size() != variables_) throw DimensionMismatch("chart point has the wrong number of variables");
  if (terms_.empty()) return 0.0;
  if (terms_.size() == 1) {
    const auto& [e, c] = *terms_.begin();
    Complex m = c;
    for (int k = 0; k < variables_; ++k) m *= std::pow(b[k], e[k]);
    return m;
  }
  Eigen::MatrixXcd powers(std::max(variables_, 1), degree_ + 1);
  for (int k = 0; k < variables_; ++k) {
    powers(k, 0) = 1.0;
    for (int e = 1; e <= degree_; ++e) powers(k, e) = powers(k, e - 1) * b[k];
  }
  Complex sum = 0.0;
  for (const auto& [e, c] : terms_) {
    Complex m = c;
    for (int k = 0; k < variables_; ++k) m *= powers(k, e[k]);
    sum += m;
  }
  return sum;
}

Complex ChartPolynomial::evaluate(const Point& b) const {
  return std::exp(log_scale_) * evaluate_unscaled(b);
}

double ChartPolynomial::log_abs(const Point& b) const {
  const double a = std::abs(evaluate_unscaled(b));
  return a == 0.0 ? -kInf : std::log(a) + log_scale_;
}

SlicePolyFamily SlicePolyFamily::generate(int dimension, int K,
                                          const std::function<ChartPolynomial(int)>& generator) {
  if (dimension < 1 || K < 0) throw PreconditionError("family needs dimension >= 1 and K >= 0");
  SlicePolyFamily f;
  f.dimension = dimension;
  f.polys.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    ChartPolynomial p = generator(k);
    if (p.variables() != dimension - 1) throw DimensionMismatch("generated polynomial has the wrong variables");
    if (p.degree() > k) throw PreconditionError("P_k must have degree <= k");
    f.polys.push_back(std::move(p));
  }
  return f;
}

SlicePolyFamily chart_poly_family(const FormalSeries& s, int K) {
  const auto verdict = is_holomorphic_type(s);
  if (!verdict.is_holomorphic_type) throw PreconditionError("series is not of holomorphic type");
  if (K < 0 || K > s.max_order())
    throw PreconditionError("K = " + std::to_string(K) + " outside [0, " + std::to_string(s.max_order()) + "]");
  const int n = s.dimension();
  std::vector<ChartPolynomial::TermMap> grouped(K + 1);
  for (const auto& [key, c] : s.terms()) {
    const int k = key.holo.order();
    if (k > K) break;
    std::vector<int> e(key.holo.entries().begin() + 1, key.holo.entries().end());
    grouped[k][MultiIndex(e)] += c;
  }
  SlicePolyFamily f;
  f.dimension = n;
  for (int k = 0; k <= K; ++k) f.polys.emplace_back(n - 1, std::move(grouped[k]));
  return f;
}

int default_window(int K) { return K / 2; }

RootTestResult radius_root_test_log(const std::vector<double>& log_values, int window) {
  const int K = static_cast<int>(log_values.size()) - 1;
  if (window <= 0) window = default_window(K);
  if (window < 4) throw PreconditionError("root test window must be >= 4 (K >= 8)");
  if (K < 2 * window)
    throw PreconditionError("root test needs K >= 2 * window (K = " + std::to_string(K) +
                            ", window = " + std::to_string(window) + ")");
  RootTestResult r;
  r.K = K;
  r.window = window;
  r.sequence.resize(K);
  for (int k = 1; k <= K; ++k) r.sequence[k - 1] = log_values[k] / k;
  double L = -kInf;
  for (int k = K - window + 1; k <= K; ++k) L = std::max(L, r.sequence[k - 1]);
  r.limsup_proxy = L;
  r.tail_zero = L == -kInf;
  r.radius = r.tail_zero ? kInf : std::exp(-L);
  return r;
}

RootTestResult radius_root_test(const std::vector<double>& abs_values, int window) {
  std::vector<double> logs(abs_values.size());
  for (std::size_t k = 0; k < abs_values.size(); ++k) {
    if (!(abs_values[k] >= 0.0)) throw PreconditionError("root test values must be nonnegative");
    logs[k] = abs_values[k] == 0.0 ? -kInf : std::log(abs_values[k]);
  }
  return radius_root_test_log(logs, window);
}

RootTestResult radius_along(const SlicePolyFamily& family, const Point& b, int window) {
  std::vector<double> logs(family.polys.size());
  for (std::size_t k = 0; k < logs.size(); ++k) logs[k] = family.polys[k].log_abs(b);
  return radius_root_test_log(logs, window);
}

Polydisc ConvergenceCertificate::polydisc() const {
  return Polydisc{Point::Zero(r_prime.size()), r_prime};
}

double block_bound(int k, int n) {
  // k^n alone is below the term count C(k+n-1, n-1) at k = 1 for n >= 2.
  double terms = 1.0;
  for (int i = 1; i <= n - 1; ++i) terms = terms * (k + i) / i;
  return std::max(std::pow(static_cast<double>(k), n), terms) * std::pow(2.0, -k);
}

namespace {

// Chart points used for the sup: the distinguished boundary of P^{n-1}(0; R)
// on a product angular grid, then random interior points.
std::vector<Point> sup_samples(int vars, double R, int grid, int interior, std::mt19937_64& rng,
                               int& boundary_count) {
  std::vector<Point> pts;
  if (vars == 0) {
    pts.emplace_back(0);
    boundary_count = 1;
    return pts;
  }
  std::size_t total = 1;
  for (int k = 0; k < vars; ++k) total *= grid;
  std::vector<int> t(vars, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point b(vars);
    for (int k = 0; k < vars; ++k) b[k] = std::polar(R, 2.0 * std::numbers::pi * t[k] / grid);
    pts.push_back(b);
    for (int k = 0; k < vars && ++t[k] == grid; ++k) t[k] = 0;
  }
  boundary_count = static_cast<int>(pts.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < interior; ++s) {
    Point b(vars);
    for (int k = 0; k < vars; ++k) b[k] = std::polar(R * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
    pts.push_back(b);
  }
  return pts;
}

}  // namespace

ConvergenceCertificate build_certificate(const FormalSeries& s, double r0, int K, int sample_count,
                                         const CertificateConfig& cfg) {
  if (!is_holomorphic_type(s).is_holomorphic_type)
    throw PreconditionError("certificate needs a series of holomorphic type");
  if (!(r0 > 0.0)) throw PreconditionError("r0 must be positive");
  if (K < 1 || K > s.max_order()) throw PreconditionError("K must lie in [1, max_order]");
  if (sample_count < 0 || cfg.boundary_grid < 1) throw PreconditionError("sample counts must be nonnegative");
  const int n = s.dimension();
  const SlicePolyFamily family = chart_poly_family(s, K);
  std::mt19937_64 rng(cfg.seed);

  ConvergenceCertificate cert;
  cert.r0 = r0;
  cert.K_used = K;
  cert.margin = cfg.margin;
  const auto pts = sup_samples(n - 1, 2.0 * r0, cfg.boundary_grid, sample_count, rng, cert.boundary_points);
  cert.interior_points = static_cast<int>(pts.size()) - cert.boundary_points;
  double log_sup = -kInf;  // of log|P_k(b)|^{1/k}
  for (int k = 1; k <= K; ++k) {
    if (family.polys[k].is_zero()) continue;
    for (const auto& b : pts) log_sup = std::max(log_sup, family.polys[k].log_abs(b) / k);
  }
  cert.sampled_sup = log_sup == -kInf ? 0.0 : std::exp(log_sup);
  cert.M = std::max(1.0 + cfg.margin, cert.sampled_sup);
  cert.r_prime = Polyradius::Constant(n, r0 / (2.0 * cert.M));
  cert.r_prime[0] = 1.0 / (2.0 * cert.M);

  // (a) Cauchy bound |a_{k-|i|, i}| <= M^k r0^{-|i|}.
  const double logM = std::log(cert.M), logr0 = std::log(r0);
  for (const auto& [key, c] : s.terms()) {
    const int k = key.holo.order();
    if (k == 0) continue;
    if (k > K) break;
    const int chart_order = k - key.holo[0];
    const double ratio = std::exp(std::log(std::abs(c)) - k * logM + chart_order * logr0);
    cert.worst_cauchy_ratio = std::max(cert.worst_cauchy_ratio, ratio);
  }
  cert.cauchy_ok = cert.worst_cauchy_ratio <= 1.0 + 1e-12;

  // (b) block sums at random points of P^n(0; r').
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> block(K + 1);
  for (int p = 0; p < cfg.check_points; ++p) {
    Point z(n);
    for (int k = 0; k < n; ++k)
      z[k] = std::polar(cert.r_prime[k] * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
    std::fill(block.begin(), block.end(), 0.0);
    for (const auto& [key, c] : s.terms()) {
      const int k = key.holo.order();
      if (k > K) break;
      double m = std::abs(c);
      for (int j = 0; j < n; ++j) m *= std::pow(std::abs(z[j]), key.holo[j]);
      block[k] += m;
    }
    for (int k = 1; k <= K; ++k)
      cert.worst_block_ratio = std::max(cert.worst_block_ratio, block[k] / block_bound(k, n));
  }
  cert.block_ok = cert.worst_block_ratio < 1.0;
  return cert;
}

ConvergenceCertificate certify_polydisc(const FormalSeries& s, double r0, int K, int sample_count,
                                        const CertificateConfig& cfg) {
  ConvergenceCertificate cert = build_certificate(s, r0, K, sample_count, cfg);
  if (!cert.cauchy_ok)
    throw CertificateRefused("certificate refused: a coefficient exceeds the Cauchy bound (ratio " +
                                 format_double(cert.worst_cauchy_ratio) + "); increase K or the sampling",
                             cert);
  if (!cert.block_ok)
    throw CertificateRefused("certificate refused: an order block exceeds its bound (ratio " +
                                 format_double(cert.worst_block_ratio) + ")",
                             cert);
  return cert;
}

}  // namespace forelli
