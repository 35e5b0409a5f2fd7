#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "forelli/expr.hpp"
#include "forelli/series.hpp"

namespace forelli {

enum class PencilKind { Standard, General };
std::string to_string(PencilKind kind);

/// A pencil of discs lambda -> phi(lambda u), |lambda| < 1, u in a sampled
/// direction set.
///
/// General maps are expressions in l (lambda) and u1..un. The pair
/// (lambda, u) is only determined up to (lambda e^{-ia}, e^{ia} u), so u is
/// always passed with its leading coordinate real and positive; "leading" is
/// the first coordinate of modulus above 1e-9.
struct PencilSpec {
  int n = 0;
  Point base;
  std::vector<Point> directions;
  PencilKind kind = PencilKind::Standard;
  std::vector<Expr> map;
  std::vector<std::string> map_text;
  std::vector<std::string> warnings;

  /// phi(lambda u); u is phase-normalized first.
  Point operator()(Complex lambda, const Point& u) const;
  /// phi at the point y = lambda u of the unit ball.
  Point at(const Point& y) const;
};

/// The representative e^{-ia} u with leading coordinate real and positive.
Point phase_normalize(const Point& u);

/// psi(u, lambda) = lambda u at p = 0. Directions off the unit sphere by more
/// than 1e-8 are normalized and a warning is recorded.
PencilSpec standard_pencil(int n, std::vector<Point> directions);

/// General pencil from map expressions in l, u1..un.
PencilSpec general_pencil(int n, const Point& base, const std::vector<std::string>& map,
                          std::vector<Point> directions);

/// (lambda u1, lambda u2 + lambda^2 conj(u1) u2): the quadratic twist used in examples.
PencilSpec twisted_pencil(std::vector<Point> directions);

/// JSON object {n, p, map, directions, count, seed}; map absent means standard.
PencilSpec pencil_from_json(const std::string& json_text, std::uint64_t seed = 42);
PencilSpec load_pencil(const std::string& path, std::uint64_t seed = 42);

struct PencilValidation {
  bool base_ok = false;
  double base_error = 0.0;
  bool discs_holomorphic = false;
  double worst_disc_residual = 0.0;
  bool injective_on_mesh = false;
  int mesh_points = 0;
  std::vector<std::string> problems;

  bool ok() const noexcept { return base_ok && discs_holomorphic && injective_on_mesh; }
};

PencilValidation validate_pencil(const PencilSpec& pencil);

using DiscFunction = std::function<Complex(Complex)>;

/// Largest negative Fourier mode of g on |lambda| = rho, over max(1, largest
/// mode); 4 modes samples.
double disc_holo_residual(const DiscFunction& g, double rho, int modes = 32);

struct DiscResidual {
  int direction = 0;
  Point u;
  double rho = 0.0;
  double residual = 0.0;
  std::optional<std::string> error;
};

struct HoloCheck {
  std::vector<DiscResidual> discs;
  double tol = 0.0;
  double worst = 0.0;
  int failed = 0;
  int errors = 0;
  bool pass = false;
};

/// Residual of lambda -> f(phi(lambda u)) on every direction and radius.
HoloCheck check_holo_along_pencil(const Expr& f, const PencilSpec& pencil, const std::vector<double>& radii,
                                  double tol, int modes = 32);

/// h~(z1, z2) = R h(R^{-1}(z1, z1 z2)) with R v0 = e1, rewritten as (z1, k(z1, z2)).
class KData {
public:
  Complex k(Complex z1, Complex z2) const;
  /// Solves first(h~(t, z2)) = z1 for t.
  Complex reparametrize(Complex z1, Complex z2) const;
  /// The point of C^2 (original coordinates) over (z1, w) in the normalized chart.
  Point point(Complex z1, Complex w) const;

  const Eigen::Matrix2cd& rotation() const noexcept { return rotation_; }
  double epsilon() const noexcept { return epsilon_; }
  const Point& v0() const noexcept { return v0_; }

  double holomorphy_residual = 0.0;
  double k0_error = 0.0;
  double derivative_error = 0.0;

private:
  Point h_tilde(Complex z1, Complex z2) const;

  PencilSpec pencil_;
  Point v0_;
  Eigen::Matrix2cd rotation_;
  double epsilon_ = 0.0;

  friend KData tilde_normalize(const PencilSpec&, const Point&, double);
};

/// n = 2 only. Throws PreconditionError when the pencil is not admissible
/// at v0 (phi(0) != p, or one of the three properties of k fails).
KData tilde_normalize(const PencilSpec& pencil, const Point& v0, double epsilon = 0.3);

enum class CrVerdict { Pass, Fail, Inconclusive };
std::string to_string(CrVerdict v);

struct HgConfig {
  double delta = 1e-5;
  double tol_g = 1e-6;
  double h_floor = 1e-8;
  std::vector<double> radii{0.25, 0.5, 0.75};  // fractions of epsilon
  int angles = 8;
};

struct HgResult {
  std::vector<Complex> z1;
  /// H = |dk/dzbar2|^2 - |dk/dz2|^2 at (z1, 0).
  std::vector<double> H;
  /// G = dk/dzbar2 dF/dz2 - dk/dz2 dF/dzbar2 at (z1, 0), F = f(z1, k).
  std::vector<Complex> G;
  /// G / H, the anti-holomorphic w-derivative of f along L_{v0}.
  std::vector<Complex> df_dwbar;
  double max_G = 0.0;
  double min_H = 0.0;
  /// max over the grid of |df/dzbar_j| by direct differences at h(z1 v0).
  double max_direct_cr = 0.0;
  CrVerdict verdict = CrVerdict::Inconclusive;
  std::string message;
};

HgResult compute_H_G(const Expr& f, const KData& kdata, const HgConfig& cfg = {});

/// max_j |df/dzbar_j(x)| by central differences with step delta.
double cr_residual(const ScalarField& f, const Point& x, double delta = 1e-5);
double cr_residual(const Expr& f, const Point& x, double delta = 1e-5);

struct DirectionGraph {
  std::vector<std::vector<int>> adjacency;
  /// Median nearest-neighbour angle.
  double resolution = 0.0;
};

/// Edges between directions within 2.5 resolutions (real angle), plus each
/// direction's nearest neighbour.
DirectionGraph angular_graph(const std::vector<Point>& directions);

struct SubpencilConfig {
  double tol = 1e-6;
  int l_max = 10;
  double delta = 1e-5;
  int angles = 8;
  /// Patches with fewer directions are discarded.
  int min_patch = 3;
};

struct SubpencilResult {
  /// Indices into the pencil's directions.
  std::vector<int> V;
  /// Discs of radius 1/m through V satisfy the CR equations.
  int m = 0;
  /// Smallest passing l per direction, 0 when the disc of radius 1/l_max fails.
  std::vector<int> level;
  /// Residual per direction on the radius-1/l_max disc.
  std::vector<double> residual;
  std::vector<std::vector<int>> patches;
  std::string diagnostics;

  bool empty() const noexcept { return V.empty(); }
};

/// V is the union of the connected patches of passing directions with at
/// least min_patch members; a larger tol never removes directions.
SubpencilResult find_subpencil(const ScalarField& f, const PencilSpec& pencil, const SubpencilConfig& cfg = {});
SubpencilResult find_subpencil(const Expr& f, const PencilSpec& pencil, const SubpencilConfig& cfg = {});

struct RadiusConfig {
  int rings = 4;
  int angles = 8;
  int bisection_steps = 10;
  double r_min = 1e-6;
  int newton_iterations = 40;
};

struct SubpencilRadius {
  double r = 0.0;
  bool verified = false;
  int mesh_points = 0;
  /// Mesh point that failed at the smallest tried radius.
  std::optional<Point> witness;
  int inversions = 0;
};

/// Largest r (on the bisection grid) with P_0(W) cap B(p, r) inside the image
/// of the discs through V. V indexes pencil.directions.
SubpencilRadius standard_subpencil_radius(const PencilSpec& pencil, const std::vector<int>& V,
                                          const std::vector<Point>& W, const RadiusConfig& cfg = {});

/// Solves phi(y) = x for y in the unit ball by damped Newton from y = x - p.
std::optional<Point> invert_pencil(const PencilSpec& pencil, const Point& x, int iterations = 40);

}  // namespace forelli
