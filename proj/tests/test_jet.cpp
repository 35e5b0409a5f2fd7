#include "doctest_main.hpp"

#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "forelli/errors.hpp"
#include "forelli/jet.hpp"

using namespace forelli;

namespace {

double max_coefficient_error(const FormalSeries& got, const FormalSeries::TermMap& want) {
  double worst = 0.0;
  for (const auto& [k, c] : want) worst = std::max(worst, std::abs(got.coefficient(k.holo, k.anti) - c));
  for (const auto& [k, c] : got.terms())
    if (!want.count(k)) worst = std::max(worst, std::abs(c));
  return worst;
}

std::string monomial_text(const std::vector<int>& I, const std::vector<int>& J) {
  std::string s = "1";
  for (std::size_t k = 0; k < I.size(); ++k) {
    if (I[k]) s += "*z" + std::to_string(k + 1) + "^" + std::to_string(I[k]);
    if (J[k]) s += "*conj(z" + std::to_string(k + 1) + ")^" + std::to_string(J[k]);
  }
  return s;
}

}  // namespace

TEST_CASE("product monomial is recovered exactly") {
  JetConfig cfg;
  cfg.order = 4;
  auto r = extract_jet(Expr::parse("z1*z2", 2), 2, cfg);
  CHECK(r.verdict == JetVerdict::FullJet);
  CHECK(r.max_consistent_order == 4);
  FormalSeries::TermMap want;
  want[TermKey{MultiIndex{1, 1}, MultiIndex{0, 0}}] = 1.0;
  CHECK(max_coefficient_error(r.series, want) <= 1e-12);
}

TEST_CASE("geometric series in one variable") {
  JetConfig cfg;
  cfg.order = 8;
  cfg.radii.rho_max = 0.5;
  auto r = extract_jet(Expr::parse("1/(1-z1)", 1), 1, cfg);
  CHECK(r.verdict == JetVerdict::FullJet);
  for (double s : r.scales) CHECK(s <= 0.5);
  for (int k = 0; k <= 8; ++k) CHECK(std::abs(r.series.coefficient(MultiIndex{k}, MultiIndex{0}) - 1.0) <= 1e-8);
  CHECK(r.series.size() == 9);
}

TEST_CASE("degree-two homogeneous non-polynomial has a jet only to order one") {
  JetConfig cfg;
  cfg.order = 4;
  auto e = Expr::parse("z1^2*z2*conj(z1)/normsq(z)", 2);
  auto r = extract_jet(e, 2, cfg);
  CHECK(r.verdict == JetVerdict::JetUpTo);
  CHECK(r.max_consistent_order == 1);
  CHECK(r.series.is_zero());
  CHECK(r.per_order_residuals[1] <= cfg.tol);
  CHECK(r.per_order_residuals[2] > 1e-3);

  // Independent oracle: the (1,1) Fourier mode divided by rho^2 is not a
  // function of the scale alone; it changes with the ratio rho1/rho2.
  auto mode11 = [&](double r1, double r2) {
    const int G = 32;
    Complex acc = 0.0;
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < G; ++b) {
        const double t1 = 2 * std::numbers::pi * a / G, t2 = 2 * std::numbers::pi * b / G;
        Point z(2);
        z << std::polar(r1, t1), std::polar(r2, t2);
        acc += e(z) * std::polar(1.0, -(t1 + t2));
      }
    return acc / double(G * G);
  };
  const Complex q1 = mode11(0.3, 0.3) / (0.3 * 0.3);
  const Complex q2 = mode11(0.1, 0.3) / (0.1 * 0.3);
  CHECK(std::abs(q1 - q2) > 0.1);
}

TEST_CASE("random polynomials are recovered") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int N = 6;
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 2;
    std::string text = "0";
    FormalSeries::TermMap want;
    for (int t = 0; t < 5; ++t) {
      std::vector<int> I(n), J(n);
      int budget = std::uniform_int_distribution<int>(0, N)(rng);
      for (int k = 0; k < n; ++k) {
        I[k] = std::uniform_int_distribution<int>(0, budget)(rng);
        budget -= I[k];
        J[k] = std::uniform_int_distribution<int>(0, budget)(rng);
        budget -= J[k];
      }
      const Complex c(u(rng), u(rng));
      std::ostringstream os;
      os.precision(17);
      os << " + (" << c.real() << " + " << c.imag() << "i)*" << monomial_text(I, J);
      text += os.str();
      want[TermKey{MultiIndex(I), MultiIndex(J)}] += c;
    }
    JetConfig cfg;
    cfg.order = N;
    auto r = extract_jet(Expr::parse(text, n), n, cfg);
    CHECK(r.verdict == JetVerdict::FullJet);
    CHECK(max_coefficient_error(r.series, want) <= 1e-10);
  }
}

TEST_CASE("monomials over normsq fail at their homogeneity degree") {
  std::mt19937_64 rng(5);
  const int N = 6;
  int checked = 0;
  while (checked < 8) {
    const int total = std::uniform_int_distribution<int>(2, N)(rng);
    std::vector<int> I(2), J(2);
    int budget = total;
    for (int k = 0; k < 2; ++k) {
      I[k] = std::uniform_int_distribution<int>(0, budget)(rng);
      budget -= I[k];
      J[k] = k == 1 ? budget : std::uniform_int_distribution<int>(0, budget)(rng);
      budget -= J[k];
    }
    // z^I zbar^J / |z|^2 is a polynomial only when it is divisible by |z|^2,
    // which never happens for a single monomial in two variables.
    const int d = total - 2;
    JetConfig cfg;
    cfg.order = N;
    auto r = extract_jet(Expr::parse(monomial_text(I, J) + "/normsq(z)", 2), 2, cfg);
    CHECK(r.max_consistent_order <= d - 1);
    CHECK(r.verdict != JetVerdict::FullJet);
    ++checked;
  }
  JetConfig cfg;
  cfg.order = 4;
  CHECK(extract_jet(Expr::parse("z1*conj(z1)/normsq(z)", 2), 2, cfg).verdict == JetVerdict::NoJet);
}

TEST_CASE("conjugation maps the jet to its transpose") {
  JetConfig cfg;
  cfg.order = 6;
  const char* f = "exp(z1 + 0.5*conj(z2)) + z1*conj(z1)^2*z2";
  auto a = extract_jet(Expr::parse(f, 2), 2, cfg);
  auto b = extract_jet(Expr::parse(std::string("conj(") + f + ")", 2), 2, cfg);
  CHECK(a.verdict == JetVerdict::FullJet);
  CHECK(b.verdict == JetVerdict::FullJet);
  FormalSeries::TermMap want;
  for (const auto& [k, c] : a.series.terms()) want[TermKey{k.anti, k.holo}] = std::conj(c);
  CHECK(max_coefficient_error(b.series, want) <= 1e-8);
}

TEST_CASE("entire function with mixed terms") {
  // exp(|z|^2) = 1 + |z|^2 + |z|^4/2 + ..., so z1 z2 zbar1 zbar2 has coefficient 1.
  JetConfig cfg;
  cfg.order = 8;
  auto r = extract_jet(Expr::parse("exp(normsq(z))", 2), 2, cfg);
  CHECK(r.verdict == JetVerdict::FullJet);
  // The order-10 tail is not modelled; a smaller schedule suppresses it.
  CHECK(std::abs(r.series.coefficient(MultiIndex{1, 1}, MultiIndex{1, 1}) - 1.0) <= 1e-2);
  cfg.radii.rho_max = 0.2;
  r = extract_jet(Expr::parse("exp(normsq(z))", 2), 2, cfg);
  CHECK(r.verdict == JetVerdict::FullJet);
  CHECK(std::abs(r.series.coefficient(MultiIndex{1, 1}, MultiIndex{1, 1}) - 1.0) <= 1e-5);
  CHECK(std::abs(r.series.coefficient(MultiIndex{2, 0}, MultiIndex{2, 0}) - 0.5) <= 1e-5);
}

TEST_CASE("expansion about a translated center") {
  JetConfig cfg;
  cfg.order = 4;
  cfg.center = Point(1);
  cfg.center << 2.0;
  auto r = extract_jet(Expr::parse("z1^2", 1), 1, cfg);
  CHECK(r.verdict == JetVerdict::FullJet);
  CHECK(std::abs(r.series.coefficient(MultiIndex{0}, MultiIndex{0}) - 4.0) <= 1e-10);
  CHECK(std::abs(r.series.coefficient(MultiIndex{1}, MultiIndex{0}) - 4.0) <= 1e-10);
  CHECK(std::abs(r.series.coefficient(MultiIndex{2}, MultiIndex{0}) - 1.0) <= 1e-10);
}

TEST_CASE("error paths") {
  JetConfig cfg;
  cfg.order = 4;
  // z1 = 0.25 is a grid node of the second scale.
  CHECK_THROWS_AS(extract_jet(Expr::parse("1/(z1-0.25)", 1), 1, cfg), EvalError);
  JetConfig tight = cfg;
  tight.condition_bound = 10.0;
  CHECK_THROWS_AS(extract_jet(Expr::parse("z1", 1), 1, tight), NumericalError);
  JetConfig coarse = cfg;
  coarse.grid = 8;
  CHECK_THROWS_AS(extract_jet(Expr::parse("z1", 1), 1, coarse), PreconditionError);
  JetConfig few = cfg;
  few.radii.count = 2;
  CHECK_THROWS_AS(extract_jet(Expr::parse("z1", 1), 1, few), PreconditionError);
  CHECK_THROWS_AS(extract_jet(Expr::parse("z1", 2), 1, cfg), DimensionMismatch);
}

TEST_CASE("result does not depend on the worker count") {
  JetConfig cfg;
  cfg.order = 6;
  auto e = Expr::parse("exp(z1*conj(z2)) / (2 - z1)", 2);
  setenv("FORELLI_LAB_THREADS", "1", 1);
  auto a = extract_jet(e, 2, cfg);
  setenv("FORELLI_LAB_THREADS", "3", 1);
  auto b = extract_jet(e, 2, cfg);
  unsetenv("FORELLI_LAB_THREADS");
  CHECK(a.series == b.series);
  CHECK(a.per_order_residuals == b.per_order_residuals);
}
