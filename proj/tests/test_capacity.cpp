#include "doctest_main.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "forelli/capacity.hpp"
#include "forelli/directions.hpp"
#include "forelli/errors.hpp"

using namespace forelli;
using namespace std::complex_literals;

namespace {

Point pt(std::initializer_list<Complex> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (Complex x : xs) p[k++] = x;
  return p;
}

std::vector<Complex> random_disc_cloud(double radius, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Complex> out;
  for (int j = 0; j < count; ++j) out.push_back(std::polar(radius * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng)));
  return out;
}

}  // namespace

TEST_CASE("discrete energy") {
  CHECK(energy({0.0, 1.0}, {0.5, 0.5}) == 0.0);
  CHECK(energy({0.5, 0.5}, {0.5, 0.5}) == -std::numeric_limits<double>::infinity());
  // coincident points with a zero weight do not matter
  CHECK(std::isfinite(energy({0.0, 0.0, 2.0}, {0.0, 0.5, 0.5})));
  const int m = 64;
  std::vector<Complex> pts;
  for (int j = 0; j < m; ++j) pts.push_back(std::polar(1.0, 2 * std::numbers::pi * j / m));
  const double I = energy(pts, std::vector<double>(m, 1.0 / m));
  // sum_{i != j} log|w^i - w^j| = m log m for the m-th roots of unity
  CHECK(I == doctest::Approx(std::log(m) / m).epsilon(1e-10));
  CHECK(std::abs(I) <= 0.1);
  CHECK_THROWS_AS(energy({0.0, 1.0}, {0.5, 0.6}), PreconditionError);
  CHECK_THROWS_AS(energy({0.0, 1.0}, {1.5, -0.5}), PreconditionError);
  CHECK_THROWS_AS(energy({0.0, 1.0}, {1.0}), DimensionMismatch);
}

TEST_CASE("leja sequences") {
  auto seg = leja_points(CompactSet1D::segment(-1.0, 1.0), 3);
  REQUIRE(seg.points.size() == 3);
  CHECK(std::abs(seg.points[0] + 1.0) <= 1e-12);
  CHECK(std::abs(seg.points[1] - 1.0) <= 1e-12);
  CHECK(std::abs(seg.points[2]) <= 1e-12);
  CHECK(seg.candidates >= 150);

  auto disc = leja_points(CompactSet1D::disc(0.0, 1.0), 2);
  CHECK(std::abs(std::abs(disc.points[0]) - 1.0) <= 1e-12);
  CHECK(std::abs(disc.points[0] + disc.points[1]) <= 1e-3);

  auto single = leja_points(CompactSet1D::finite_points({0.0}), 5);
  CHECK(single.degenerate);
  CHECK(single.points.size() == 5);
  for (Complex p : single.points) CHECK(p == Complex(0.0));
  CHECK_THROWS_AS(leja_points(CompactSet1D::segment(0.0, 1.0), 1), PreconditionError);
}

TEST_CASE("transfinite diameter of reference sets") {
  auto seg = cap1d_transfinite(CompactSet1D::segment(-1.0, 1.0), 128);
  CHECK(seg.value == doctest::Approx(0.5).epsilon(0.02));
  CHECK(*seg.closed_form == 0.5);
  auto disc = cap1d_transfinite(CompactSet1D::disc(0.0, 0.7), 128);
  CHECK(disc.value == doctest::Approx(0.7).epsilon(0.02));
  CHECK(*disc.closed_form == 0.7);
  // the uncorrected diameter of the disc is 0.7 m^{1/(m-1)}
  CHECK(disc.diagnostics["raw_delta"] == doctest::Approx(0.7 * std::pow(128.0, 1.0 / 127)).epsilon(1e-3));

  auto seg512 = cap1d_transfinite(CompactSet1D::segment(-1.0, 1.0), 512);
  CHECK(seg512.value == doctest::Approx(0.5).epsilon(0.01));

  auto fin = cap1d_transfinite(CompactSet1D::finite_points({0.0, 1.0, 2.0i}), 8);
  CHECK(fin.value == 0.0);
  CHECK(*fin.closed_form == 0.0);
  CHECK_THROWS_AS(cap1d_transfinite(CompactSet1D::segment(0.0, 1.0), 4), PreconditionError);
  CHECK_THROWS_AS(CompactSet1D::disc(0.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(CompactSet1D::segment(1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(CompactSet1D::sample_cloud({}), PreconditionError);
}

TEST_CASE("set text form") {
  auto s = CompactSet1D::parse("segment -1 1");
  CHECK(s.kind() == CompactSet1D::Kind::Segment);
  CHECK(s.a() == Complex(-1.0));
  auto d = CompactSet1D::parse("disc 1+2i 0.5");
  CHECK(d.center() == Complex(1.0, 2.0));
  CHECK(d.radius() == 0.5);
  CHECK(CompactSet1D::parse("points 0 1 2i").points().size() == 3);
  CHECK_THROWS_AS(CompactSet1D::parse("annulus 0 1"), ParseError);
  CHECK_THROWS_AS(CompactSet1D::parse("disc 0"), ParseError);
}

TEST_CASE("monotone under inclusion of clouds") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto small = random_disc_cloud(0.5, 300, seed);
    auto big = small;
    auto extra = random_disc_cloud(1.0, 300, seed + 100);
    big.insert(big.end(), extra.begin(), extra.end());
    const double cs = cap1d_transfinite(CompactSet1D::sample_cloud(small), 64).value;
    const double cb = cap1d_transfinite(CompactSet1D::sample_cloud(big), 64).value;
    CHECK(cs <= cb * 1.02);
  }
}

TEST_CASE("scaling covariance") {
  const Complex a(1.5, -2.0);
  for (const auto& set : {CompactSet1D::segment(-1.0, 0.5i), CompactSet1D::disc(0.3, 0.4),
                          CompactSet1D::sample_cloud(random_disc_cloud(1.0, 200, 9))}) {
    const double c = cap1d_transfinite(set, 32).value;
    const double ca = cap1d_transfinite(set.scaled(a), 32).value;
    CHECK(ca == doctest::Approx(std::abs(a) * c).epsilon(0.02));
  }
}

TEST_CASE("extremal function lower bound") {
  const auto ball = ball_sample(Point::Zero(2), 1.0, 400, 3);
  for (const Point& p : ball) CHECK(p.norm() <= 1.0 + 1e-12);
  const Point z = pt({1.2, Complex(0.0, 1.6)});
  REQUIRE(z.norm() == doctest::Approx(2.0));
  CHECK(siciak_lower_bound(ball, z, 8, 40) >= std::log(2.0) - 0.05);
  for (int j = 0; j < 20; ++j) CHECK(siciak_lower_bound(ball, ball[j * 17], 6, 20) <= 1e-12);
  CHECK(siciak_lower_bound(ball, Point::Zero(2), 6, 20) <= 0.0);
  CHECK_THROWS_AS(siciak_lower_bound({}, z, 4, 4), PreconditionError);
  CHECK_THROWS_AS(siciak_lower_bound(ball, z, 0, 4), PreconditionError);
}

TEST_CASE("extremal capacity of discs") {
  double previous = 0.0;
  for (double rho : {0.5, 1.0, 2.0}) {
    const auto ball = ball_sample(Point::Zero(1), rho, 200, 5);
    auto est = cap_siciak(ball, {}, rho);
    CHECK(est.method == CapacityMethod::SiciakExtremal);
    CHECK(est.value == doctest::Approx(rho).epsilon(0.05));
    CHECK(*est.closed_form == rho);
    if (previous > 0.0) CHECK(est.value / previous == doctest::Approx(2.0).epsilon(0.05));
    previous = est.value;
  }
  SiciakConfig bad;
  bad.probe_radii = {1.0, 5.0};
  CHECK_THROWS_AS(cap_siciak(ball_sample(Point::Zero(1), 1.0, 50, 1), bad), PreconditionError);
  bad.probe_radii = {20.0, 10.0};
  CHECK_THROWS_AS(cap_siciak(ball_sample(Point::Zero(1), 1.0, 50, 1), bad), PreconditionError);
}

TEST_CASE("direction samplers") {
  for (const Point& v : sphere_directions(3, 50, 1)) CHECK(v.norm() == doctest::Approx(1.0));
  const Point c = pt({1.0, 0.0});
  const auto cap = cap_directions(c, 0.2, 300, 2);
  double widest = 0.0;
  for (const Point& v : cap) {
    CHECK(v.norm() == doctest::Approx(1.0));
    widest = std::max(widest, real_angle(v, c));
  }
  CHECK(widest <= 0.2 + 1e-12);
  CHECK(widest >= 0.15);
  CHECK(parse_directions("sphere 20", 2, 100, 1).size() == 20);
  CHECK(parse_directions("cap 0.3 1 0 count=40", 2, 100, 1).size() == 40);
  CHECK(parse_complex("0.3-2i") == Complex(0.3, -2.0));
  CHECK_THROWS_AS(parse_directions("cap 0.3 1", 2, 10, 1), ParseError);
  CHECK_THROWS_AS(parse_directions("/nonexistent/file", 2, 10, 1), Error);
}

TEST_CASE("inscribed chart ball") {
  for (int n : {2, 3}) {
    auto full = normality_check(sphere_directions(n, 400, 11));
    CHECK(full.decidable);
    CHECK(full.is_normal_sufficient);
    CHECK(full.radius >= full.resolution);
    CHECK(full.chart_points == 400);
  }
  // image of the cap is the chart disc |b| <= tan(0.2)
  auto cap = normality_check(cap_directions(pt({1.0, 0.0}), 0.2, 600, 4));
  CHECK(cap.is_normal_sufficient);
  CHECK(cap.radius <= std::tan(0.2) * 1.1);
  CHECK(cap.radius >= 0.7 * std::tan(0.2));
  CHECK(std::abs(cap.center[0]) <= 0.7 * std::tan(0.2));

  std::vector<Point> edge;
  for (const Point& w : sphere_directions(1, 150, 3)) edge.push_back(pt({0.0, w[0]}));
  auto none = normality_check(edge);
  CHECK_FALSE(none.decidable);
  CHECK_FALSE(none.is_normal_sufficient);
  CHECK(none.excluded == 150);

  CHECK_THROWS_AS(normality_check(sphere_directions(2, 50, 1)), PreconditionError);
}

TEST_CASE("inscribed ball is covariant under chart isometries") {
  // (v1, v2, v3) -> (e^{ia} v1, U (v2, v3)) moves the chart by an isometry
  auto dirs = cap_directions(pt({1.0, 0.2, 0.1i}), 0.4, 500, 8);
  Eigen::Matrix2cd U;
  U << std::polar(1.0, 0.3) * std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::polar(1.0, -0.2) * std::cos(0.7);
  U = Eigen::Matrix2cd(U.householderQr().householderQ());
  std::vector<Point> rotated;
  for (const Point& v : dirs) {
    Point w(3);
    w[0] = std::polar(1.0, 1.1) * v[0];
    w.tail(2) = U * v.tail(2);
    rotated.push_back(w);
  }
  auto a = normality_check(dirs);
  auto b = normality_check(rotated);
  CHECK(a.is_normal_sufficient == b.is_normal_sufficient);
  CHECK(a.resolution == doctest::Approx(b.resolution).epsilon(1e-9));
  CHECK(b.radius == doctest::Approx(a.radius).epsilon(0.25));
}
