#include "doctest_main.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "forelli/directions.hpp"
#include "forelli/errors.hpp"
#include "forelli/pencil.hpp"

using namespace forelli;
using namespace std::complex_literals;

namespace {

Point pt(std::initializer_list<Complex> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  int k = 0;
  for (Complex x : xs) p[k++] = x;
  return p;
}

}  // namespace

TEST_CASE("standard pencils") {
  auto single = standard_pencil(2, {pt({1.0, 0.0})});
  CHECK(single.kind == PencilKind::Standard);
  CHECK(single.warnings.empty());
  const Point img = single(0.3 + 0.2i, single.directions[0]);
  CHECK(img[0] == 0.3 + 0.2i);
  CHECK(img[1] == Complex(0.0));

  auto full = standard_pencil(2, sphere_directions(2, 100, 1));
  CHECK(full.directions.size() == 100);
  CHECK(validate_pencil(full).ok());

  auto scaled = standard_pencil(2, {pt({2.0, 0.0})});
  REQUIRE(scaled.warnings.size() == 1);
  CHECK(scaled.directions[0].norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(standard_pencil(2, {}), PreconditionError);
  CHECK_THROWS_AS(standard_pencil(2, {pt({1.0})}), DimensionMismatch);
}

TEST_CASE("phase normalization makes the twisted map well defined") {
  const Point u = pt({0.6i, 0.8});
  for (double a : {0.0, 1.0, 2.5}) {
    const Point ua = u * std::polar(1.0, a);
    const Point nu = phase_normalize(ua);
    CHECK(std::abs(nu[0].imag()) <= 1e-15);
    CHECK(nu[0].real() > 0);
  }
  auto tw = twisted_pencil({u});
  // phi(y) = (y1, y2 + y1 y2) as a function of the point y = lambda u
  const Point y = pt({0.2 - 0.1i, 0.3i});
  const Point img = tw.at(y);
  CHECK(std::abs(img[0] - y[0]) <= 1e-15);
  CHECK(std::abs(img[1] - (y[1] + y[0] * y[1])) <= 1e-15);
  CHECK(validate_pencil(tw).ok());
}

TEST_CASE("pencil files") {
  auto p = pencil_from_json(R"({"n": 2, "p": [0, 0], "map": ["l*u1", "l*u2 + l^2*conj(u1)*u2"],
                                "directions": "cap 0.4 1 0", "count": 50})");
  CHECK(p.kind == PencilKind::General);
  CHECK(p.directions.size() == 50);
  auto q = pencil_from_json(R"({"n": 2, "directions": [[1, 0], ["0.6i", 0.8]]})");
  CHECK(q.kind == PencilKind::Standard);
  CHECK(q.directions[1][0] == 0.6i);
  CHECK_THROWS_AS(pencil_from_json("{"), ParseError);
  CHECK_THROWS_AS(pencil_from_json(R"({"n": 2})"), ParseError);
  CHECK_THROWS_AS(pencil_from_json(R"({"n": 2, "map": ["l*u1"], "directions": "sphere"})"), DimensionMismatch);
  CHECK_THROWS_AS(pencil_from_json(R"({"n": 2, "map": ["l*w1", "l"], "directions": "sphere"})"), ParseError);
  auto bad_base = pencil_from_json(R"({"n": 1, "map": ["1 + l*u1"], "directions": [[1]]})");
  CHECK_FALSE(validate_pencil(bad_base).base_ok);
}

TEST_CASE("disc holomorphy residual") {
  CHECK(disc_holo_residual([](Complex l) { return l * l * l; }, 1.0) <= 1e-12);
  CHECK(disc_holo_residual([](Complex l) { return std::conj(l); }, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(disc_holo_residual([](Complex l) { return l * l + 0.01 * std::conj(l); }, 1.0) ==
        doctest::Approx(0.01).epsilon(1e-10));
  // polynomials of degree <= modes/2
  const int modes = 32;
  for (int d = 0; d <= modes / 2; ++d) {
    auto g = [d](Complex l) {
      Complex s = 0.0;
      for (int j = 0; j <= d; ++j) s += std::pow(l, j) * Complex(std::cos(j + 1.0), std::sin(2.0 * j));
      return s;
    };
    CHECK(disc_holo_residual(g, 0.8, modes) <= 1e-10);
  }
  CHECK(disc_holo_residual([](Complex l) { return std::conj(l); }, 0.7) >= 0.5);
  CHECK_THROWS_AS(disc_holo_residual([](Complex l) { return l; }, 1.0, 8), PreconditionError);
}

TEST_CASE("holomorphy along pencils") {
  const std::vector<double> radii{0.3, 0.6, 0.9};
  auto tw = twisted_pencil(sphere_directions(2, 40, 3));
  auto ok = check_holo_along_pencil(Expr::parse("exp(z1 + z2)", 2), tw, radii, 1e-9);
  CHECK(ok.pass);
  CHECK(ok.worst <= 1e-9);
  CHECK(ok.discs.size() == 120);

  auto st = standard_pencil(2, sphere_directions(2, 40, 4));
  auto anti = check_holo_along_pencil(Expr::parse("conj(z1)", 2), st, {0.9}, 1e-8);
  CHECK_FALSE(anti.pass);
  for (const auto& d : anti.discs) {
    // lambda -> conj(lambda u1) on |lambda| = rho has its -1 mode equal to rho |u1|
    CHECK(d.residual == doctest::Approx(0.9 * std::abs(d.u[0])).epsilon(1e-9));
    CHECK(d.residual > 0.0);
  }
  auto line = check_holo_along_pencil(Expr::parse("z1^2*z2*conj(z1)/normsq(z)", 2), st, radii, 1e-8);
  CHECK(line.pass);

  // division by zero on one disc is reported, not thrown
  auto st1 = standard_pencil(1, {pt({1.0})});
  auto err = check_holo_along_pencil(Expr::parse("1/(z1 - 0.3)", 1), st1, {0.3, 0.5}, 1e-8);
  CHECK(err.errors == 1);
  CHECK_FALSE(err.pass);
  CHECK(err.discs[0].error.has_value());
}

TEST_CASE("holomorphy closure under algebra") {
  auto tw = twisted_pencil(sphere_directions(2, 20, 5));
  const std::vector<double> radii{0.5, 0.9};
  const char* f = "exp(z1)*z2 + z1^3";
  auto a = check_holo_along_pencil(Expr::parse(f, 2), tw, radii, 1e-9);
  auto b = check_holo_along_pencil(Expr::parse(std::string("(") + f + ")^2", 2), tw, radii, 1e-9);
  auto c = check_holo_along_pencil(Expr::parse(std::string("(2-1i)*(") + f + ") + 3", 2), tw, radii, 1e-9);
  CHECK(a.pass);
  CHECK(b.pass);
  CHECK(c.pass);
}

TEST_CASE("normalization of the standard and twisted pencils") {
  auto st = standard_pencil(2, sphere_directions(2, 20, 6));
  auto kd = tilde_normalize(st, pt({1.0, 0.0}));
  double worst = 0.0;
  for (Complex z1 : {0.1 + 0.05i, -0.2i, Complex(0.25)})
    for (Complex z2 : {0.1i, Complex(-0.2), 0.15 + 0.1i}) worst = std::max(worst, std::abs(kd.k(z1, z2) - z1 * z2));
  CHECK(worst <= 1e-10);

  // along a rotated v0
  auto kr = tilde_normalize(st, pt({0.6, 0.8i}));
  CHECK(std::abs(kr.k(0.2, 0.1) - 0.02) <= 1e-10);

  auto tw = twisted_pencil(sphere_directions(2, 20, 7));
  auto kt = tilde_normalize(tw, pt({1.0, 0.0}));
  // h~(z1, z2) = (z1, z1 z2 + z1^2 z2) by hand
  for (Complex z1 : {0.1 + 0.05i, -0.2i})
    for (Complex z2 : {0.1i, Complex(-0.2)}) CHECK(std::abs(kt.k(z1, z2) - z1 * z2 * (1.0 + z1)) <= 1e-12);
  CHECK(kt.k0_error <= 1e-8);
  CHECK(kt.derivative_error <= 1e-6);
  CHECK(kt.holomorphy_residual <= 1e-8);

  auto shifted = general_pencil(2, Point::Zero(2), {"0.1 + l*u1", "l*u2"}, {pt({1.0, 0.0})});
  CHECK_THROWS_AS(tilde_normalize(shifted, pt({1.0, 0.0})), PreconditionError);
  auto stretched = general_pencil(2, Point::Zero(2), {"l*u1", "2*l*u2"}, {pt({1.0, 0.0})});
  CHECK_THROWS_AS(tilde_normalize(stretched, pt({1.0, 0.0})), PreconditionError);
  CHECK_THROWS_AS(tilde_normalize(standard_pencil(3, {pt({1.0, 0.0, 0.0})}), pt({1.0, 0.0, 0.0})),
                  PreconditionError);
}

TEST_CASE("H and G along the distinguished disc") {
  auto st = standard_pencil(2, sphere_directions(2, 20, 8));
  auto kd = tilde_normalize(st, pt({1.0, 0.0}));
  auto hol = compute_H_G(Expr::parse("z1*z2", 2), kd);
  CHECK(hol.verdict == CrVerdict::Pass);
  CHECK(hol.max_G <= 1e-8);
  for (std::size_t i = 0; i < hol.z1.size(); ++i) CHECK(hol.H[i] == doctest::Approx(-std::norm(hol.z1[i])).epsilon(1e-6));

  auto anti = compute_H_G(Expr::parse("conj(z2)", 2), kd);
  CHECK(anti.verdict == CrVerdict::Fail);
  for (std::size_t i = 0; i < anti.z1.size(); ++i) {
    CHECK(std::abs(anti.G[i] - anti.H[i]) <= 1e-8);
    CHECK(std::abs(anti.df_dwbar[i] - 1.0) <= 1e-6);
  }

  auto tw = twisted_pencil(sphere_directions(2, 20, 9));
  auto kt = tilde_normalize(tw, pt({1.0, 0.0}));
  auto ex = compute_H_G(Expr::parse("exp(z1 + z2)", 2), kt);
  CHECK(ex.verdict == CrVerdict::Pass);
  CHECK(ex.max_G <= 1e-7);

  // a passing verdict agrees with direct differences of f on the disc
  for (const char* f : {"z1*z2", "exp(z1 + z2)", "z1^2 - 3*z2"}) {
    auto r = compute_H_G(Expr::parse(f, 2), kt);
    REQUIRE(r.verdict == CrVerdict::Pass);
    CHECK(r.max_direct_cr <= 10 * 1e-6);
  }
}

TEST_CASE("subpencil search") {
  auto st = standard_pencil(2, sphere_directions(2, 150, 10));
  auto all = find_subpencil(Expr::parse("exp(z1)*z2", 2), st);
  CHECK(all.V.size() == 150);
  CHECK(all.m == 1);

  auto none = find_subpencil(Expr::parse("conj(z1)", 2), st);
  CHECK(none.empty());
  CHECK(none.residual.size() == 150);
  for (double r : none.residual) CHECK(r >= 0.0);

  // the bump vanishes on the discs with |u1| >= |u2|
  const ScalarField bumped = [](const Point& z) {
    const double s = std::max(0.0, std::norm(z[1]) - std::norm(z[0]));
    return z[0] + s * s * std::conj(z[1]);
  };
  SubpencilConfig cfg;
  cfg.tol = 1e-6;
  auto half = find_subpencil(bumped, st, cfg);
  int agree = 0, half_count = 0;
  for (int i = 0; i < 150; ++i) {
    const Point& u = st.directions[i];
    const bool in_half = std::abs(u[0]) >= std::abs(u[1]);
    half_count += in_half;
    const bool in_v = std::binary_search(half.V.begin(), half.V.end(), i);
    if (in_half) CHECK(in_v);
    // outside the half only directions within sampling distance of |u1| = |u2| may pass
    if (!in_half && in_v) CHECK(std::abs(std::abs(u[1]) - std::abs(u[0])) <= 0.1);
    agree += in_half == in_v;
  }
  CHECK(agree >= 140);
  CHECK(half_count > 40);

  // larger tolerance never removes directions
  for (double tol : {1e-8, 1e-6, 1e-4, 1e-2}) {
    SubpencilConfig lo, hi;
    lo.tol = tol;
    hi.tol = tol * 100;
    auto a = find_subpencil(bumped, st, lo);
    auto b = find_subpencil(bumped, st, hi);
    CHECK(std::includes(b.V.begin(), b.V.end(), a.V.begin(), a.V.end()));
  }
}

TEST_CASE("radius of a standard subpencil") {
  auto st = standard_pencil(2, sphere_directions(2, 200, 11));
  std::vector<int> V(200);
  for (int i = 0; i < 200; ++i) V[i] = i;
  auto r = standard_subpencil_radius(st, V, cap_directions(pt({1.0, 0.0}), 0.3, 10, 1));
  CHECK(r.verified);
  CHECK(r.r == 1.0);

  const Point c = pt({1.0, 0.0});
  auto tw = twisted_pencil(cap_directions(c, 0.4, 300, 12));
  std::vector<int> Vt(300);
  for (int i = 0; i < 300; ++i) Vt[i] = i;
  auto rt = standard_subpencil_radius(tw, Vt, cap_directions(c, 0.2, 32, 2));
  CHECK(rt.verified);
  CHECK(rt.r >= 0.1);
  CHECK(rt.mesh_points >= 1000);

  // a direction on the edge of V
  std::vector<Point> edge = cap_directions(c, 0.2, 4, 3);
  Point out(2);
  out << std::cos(0.4), std::sin(0.4);
  edge.push_back(out);
  CHECK_THROWS_AS(standard_subpencil_radius(tw, Vt, edge), PreconditionError);
}
