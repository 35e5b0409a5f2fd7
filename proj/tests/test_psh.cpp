#include "doctest_main.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "forelli/capacity.hpp"
#include "forelli/errors.hpp"
#include "forelli/psh.hpp"

using namespace forelli;

namespace {

Point pt(std::initializer_list<Complex> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (Complex x : xs) p[k++] = x;
  return p;
}

Polyradius rad(std::initializer_list<double> xs) {
  Polyradius p(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (double x : xs) p[k++] = x;
  return p;
}

PshFamily power_family(int K) {
  return scaled_power_family(K, [](int) { return 0.0; });
}

// P_k(b) = sum_{|i| <= k} b^i in two chart variables.
PshFamily geometric_family(int K) {
  return PshFamily{SlicePolyFamily::generate(3, K, [](int k) {
    ChartPolynomial::TermMap t;
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) t[MultiIndex{a, b}] = 1.0;
    return ChartPolynomial(2, t);
  })};
}

PshFamily random_family(int variables, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  return PshFamily{SlicePolyFamily::generate(variables + 1, K, [&](int k) {
    ChartPolynomial::TermMap t;
    for (int d = 0; d <= k; ++d)
      for (const MultiIndex& e : indices_of_order(std::max(variables, 1), d))
        if (variables > 0) t[e] = Complex(g(rng), g(rng));
    if (variables == 0) t[MultiIndex()] = Complex(g(rng), g(rng));
    return ChartPolynomial(variables, t);
  })};
}

}  // namespace

TEST_CASE("torus averages of closed-form families") {
  const auto f = power_family(30);
  for (double r : {0.3, 1.0, 2.5})
    for (int k : {1, 7, 30}) CHECK(std::abs(average_on_torus(f, k, pt({0.0}), rad({r})).value - std::log(r)) <= 1e-6);
  for (int k : {1, 5, 30}) {
    auto a = average_on_torus(f, k, pt({2.0}), rad({1.0}));
    CHECK(std::abs(a.value - std::log(2.0)) <= 1e-6);
    CHECK(a.clipped == 0);
  }
  const auto c = PshFamily{SlicePolyFamily::generate(2, 10, [](int) {
    return ChartPolynomial::monomial(1, MultiIndex{0}, 3.0);
  })};
  for (int k = 1; k <= 10; ++k) CHECK(average_on_torus(c, k, pt({0.4}), rad({0.7})).value == std::log(3.0) / k);
  // the torus |z + 1| = 1 passes through the zero of z^k
  auto hit = average_on_torus(f, 3, pt({-1.0}), rad({1.0}));
  CHECK(hit.clipped == 1);
  CHECK(hit.nodes == 32);
  CHECK_THROWS_AS(average_on_torus(f, 0, pt({0.0}), rad({1.0})), PreconditionError);
  CHECK_THROWS_AS(average_on_torus(f, 1, pt({0.0}), rad({1.0}), 8), PreconditionError);
  CHECK_THROWS_AS(average_on_torus(f, 1, pt({0.0, 0.0}), rad({1.0, 1.0})), DimensionMismatch);
}

TEST_CASE("grid refinement changes closed-form averages by at most 1e-4") {
  const auto f = power_family(20);
  const auto g = geometric_family(12);
  for (int grid : {16, 32}) {
    CHECK(std::abs(average_on_torus(f, 20, pt({0.5}), rad({1.3}), grid).value -
                   average_on_torus(f, 20, pt({0.5}), rad({1.3}), 2 * grid).value) <= 1e-4);
    CHECK(std::abs(average_on_torus(f, 20, pt({2.0}), rad({1.0}), grid).value -
                   average_on_torus(f, 20, pt({2.0}), rad({1.0}), 2 * grid).value) <= 1e-4);
  }
  CHECK(std::abs(average_on_torus(g, 12, pt({0.0, 0.0}), rad({0.5, 0.4}), 32).value -
                 average_on_torus(g, 12, pt({0.0, 0.0}), rad({0.5, 0.4}), 64).value) <= 1e-4);
}

TEST_CASE("sub-mean-value inequality") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int vars = 1 + trial % 2;
    const auto f = random_family(vars, 8, 100 + trial);
    Point z(vars);
    Polyradius r(vars);
    for (int i = 0; i < vars; ++i) {
      z[i] = Complex(u(rng), u(rng));
      r[i] = 0.2 + std::abs(u(rng));
    }
    const int k = 1 + trial % 8;
    CHECK(f.u(k, z) <= average_on_torus(f, k, z, r, 32).value + kQuadratureSlack);
  }
}

TEST_CASE("Lipschitz estimate for the torus averages") {
  const auto g = geometric_family(50);
  auto same = lipschitz_check(g, 50, pt({0.0, 0.0}), pt({0.0, 0.0}), rad({1.0, 1.0}), rad({1.0, 1.0}), 0.9);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  CHECK(same.pass);
  auto moved = lipschitz_check(g, 50, pt({0.0, 0.0}), pt({0.1, 0.0}), rad({1.0, 1.0}), rad({1.2, 1.0}), 0.9);
  CHECK(moved.rhs == doctest::Approx(0.3 / 0.9));
  CHECK(moved.pass);
  CHECK(moved.lhs < 0.3 / 0.9);

  // random configurations, including degree-k polynomials of every k
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int passed = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const int vars = 1 + trial % 2;
    const int k = 1 + trial % 12;
    const auto f = random_family(vars, 12, 500 + trial);
    const double r0 = 0.2 + 0.5 * std::abs(u(rng));
    Point z(vars), w(vars);
    Polyradius r(vars), s(vars);
    for (int i = 0; i < vars; ++i) {
      z[i] = Complex(u(rng), u(rng));
      w[i] = z[i] + 0.3 * Complex(u(rng), u(rng));
      r[i] = r0 * (1.01 + std::abs(u(rng)));
      s[i] = r0 * (1.01 + std::abs(u(rng)));
    }
    passed += lipschitz_check(f, k, z, w, r, s, r0).pass;
  }
  CHECK(passed == trials);
  CHECK_THROWS_AS(lipschitz_check(g, 5, pt({0.0, 0.0}), pt({0.0, 0.0}), rad({1.0, 0.5}), rad({1.0, 1.0}), 0.9),
                  PreconditionError);
  CHECK_THROWS_AS(lipschitz_check(g, 5, pt({0.0, 0.0}), pt({0.0, 0.0}), rad({1.0, 1.0}), rad({1.0, 1.0}), 0.0),
                  PreconditionError);
}

TEST_CASE("trichotomy of the scaled power families") {
  const int K = 200;
  auto shrinking = scaled_power_family(K, [](int k) { return -k * std::log(std::max(k, 1)); });
  auto growing = scaled_power_family(K, [](int k) { return k * std::log(std::max(k, 1)); });
  auto plain = power_family(K);
  for (double r : {0.5, 1.0, 2.0}) {
    auto a = classify_trichotomy(shrinking, rad({r}));
    CHECK(a.kind == TrichotomyCase::MinusInfinity);
    CHECK(std::isinf(a.alpha_r));
    CHECK(a.alpha_r < 0);
    // u_k^r(0) = log r - log k
    for (int k : {1, 50, 200}) CHECK(std::abs(a.averages[k - 1] - (std::log(r) - std::log(k))) <= 1e-9);
    CHECK(a.tail_slope == doctest::Approx(-1.0).epsilon(1e-9));

    auto b = classify_trichotomy(growing, rad({r}));
    CHECK(b.kind == TrichotomyCase::PlusInfinity);
    CHECK(b.alpha_r > 0);
    CHECK(b.sampled == 21 * 21);
    REQUIRE(!b.exceptional.empty());
    for (const Point& z : b.exceptional) CHECK(std::abs(z[0]) <= 0.15);

    auto c = classify_trichotomy(plain, rad({r}));
    CHECK(c.kind == TrichotomyCase::Finite);
    CHECK(std::abs(c.alpha_r - std::log(r)) <= 1e-6);
    CHECK(c.exceptional.empty());
  }
  // far beyond the threshold with no trend
  auto huge = scaled_power_family(K, [](int k) { return 80.0 * k; });
  CHECK(classify_trichotomy(huge, rad({1.0})).kind == TrichotomyCase::PlusInfinity);
  auto tiny = scaled_power_family(K, [](int k) { return -80.0 * k; });
  CHECK(classify_trichotomy(tiny, rad({1.0})).kind == TrichotomyCase::MinusInfinity);
  CHECK_THROWS_AS(classify_trichotomy(power_family(10), rad({1.0})), PreconditionError);
}

TEST_CASE("upper envelope diagnostics") {
  const int K = 200;
  GridRegion region;
  region.nx = region.ny = 41;
  auto plain = upper_envelope(power_family(K), region);
  for (const auto& n : plain.nodes) {
    const double m = std::hypot(n.x, n.y);
    if (m > 0) CHECK(n.u == doctest::Approx(std::log(m)).epsilon(1e-12));
    CHECK(n.u <= n.u_star);
  }
  for (Complex z : plain.exceptional) CHECK(std::abs(z) <= 0.15);

  GridRegion fine{-0.5, 0.5, -0.5, 0.5, 41, 41};
  auto growing = upper_envelope(scaled_power_family(K, [](int k) { return k * std::log(std::max(k, 1)); }), fine);
  REQUIRE(!growing.exceptional.empty());
  for (Complex z : growing.exceptional) CHECK(std::abs(z) <= 0.15);
  std::vector<Complex> cloud = growing.exceptional;
  const double cap = cap1d_transfinite(CompactSet1D::sample_cloud(cloud), 16).value;
  CHECK(cap <= 0.05);

  auto flat = upper_envelope(constant_family(1, K), region);
  CHECK(flat.exceptional.empty());
  for (const auto& n : flat.nodes) {
    CHECK(n.u == 0.0);
    CHECK(n.u_star == 0.0);
  }
  std::ostringstream os;
  write_envelope_csv(os, flat);
  const std::string csv = os.str();
  CHECK(csv.rfind("x,y,u,u_star\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41 * 41 + 1);
  GridRegion bad;
  bad.x1 = bad.x0;
  CHECK_THROWS_AS(upper_envelope(constant_family(1, K), bad), PreconditionError);
}
