#include "forelli/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/LU>
#include <json.hpp>

#include "forelli/directions.hpp"
#include "forelli/errors.hpp"
#include "forelli/parallel.hpp"

namespace forelli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLeadThreshold = 1e-9;

Complex json_complex(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw ParseError("expected a complex number (number, string or [re, im])", 1, 1);
}

Point json_point(const nlohmann::json& j, int n, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ParseError(std::string(what) + " must be an array of " + std::to_string(n) + " entries", 1, 1);
  Point p(n);
  for (int k = 0; k < n; ++k) p[k] = json_complex(j[k]);
  return p;
}

std::vector<Point> normalized(std::vector<Point> dirs, int n, std::vector<std::string>& warnings) {
  if (dirs.empty()) throw PreconditionError("a pencil needs at least one direction");
  int fixed = 0;
  for (Point& u : dirs) {
    if (u.size() != n) throw DimensionMismatch("pencil direction has the wrong dimension");
    const double norm = u.norm();
    if (!(norm > 0.0)) throw PreconditionError("pencil direction must be nonzero");
    if (std::abs(norm - 1.0) > 1e-8) ++fixed;
    u /= norm;
  }
  if (fixed > 0) warnings.push_back(std::to_string(fixed) + " direction(s) were not unit vectors and were normalized");
  return dirs;
}

/// Wirtinger derivatives (d/dz, d/dzbar) of q at z by central differences.
std::pair<Complex, Complex> wirtinger(const std::function<Complex(Complex)>& q, Complex z, double delta) {
  const Complex dx = (q(z + delta) - q(z - delta)) / (2 * delta);
  const Complex dy = (q(z + Complex(0, delta)) - q(z - Complex(0, delta))) / (2 * delta);
  const Complex i(0, 1);
  return {0.5 * (dx - i * dy), 0.5 * (dx + i * dy)};
}

}  // namespace

std::string to_string(PencilKind kind) { return kind == PencilKind::Standard ? "Standard" : "General"; }

Point phase_normalize(const Point& u) {
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double a = std::abs(u[k]);
    if (a > kLeadThreshold) return u * (std::conj(u[k]) / a);
  }
  return u;
}

Point PencilSpec::operator()(Complex lambda, const Point& u) const {
  if (u.size() != n) throw DimensionMismatch("pencil direction has the wrong dimension");
  const Point un = phase_normalize(u);
  if (kind == PencilKind::Standard) return base + lambda * un;
  Point args(n + 1);
  args[0] = lambda;
  args.tail(n) = un;
  Point out(n);
  for (int c = 0; c < n; ++c) out[c] = map[c](args);
  return out;
}

Point PencilSpec::at(const Point& y) const {
  if (y.size() != n) throw DimensionMismatch("pencil point has the wrong dimension");
  const double r = y.norm();
  if (r == 0.0) {
    Point e = Point::Zero(n);
    e[0] = 1.0;
    return (*this)(0.0, directions.empty() ? e : directions.front());
  }
  const Point u = phase_normalize(y / r);
  // lambda u = y with u normalized: lambda = y_j / u_j at the leading coordinate
  for (int k = 0; k < n; ++k)
    if (std::abs(u[k]) > kLeadThreshold) return (*this)(y[k] / u[k], u);
  return (*this)(r, u);
}

PencilSpec standard_pencil(int n, std::vector<Point> directions) {
  if (n < 1) throw PreconditionError("pencil needs n >= 1");
  PencilSpec p;
  p.n = n;
  p.base = Point::Zero(n);
  p.kind = PencilKind::Standard;
  p.directions = normalized(std::move(directions), n, p.warnings);
  return p;
}

PencilSpec general_pencil(int n, const Point& base, const std::vector<std::string>& map,
                          std::vector<Point> directions) {
  if (n < 1) throw PreconditionError("pencil needs n >= 1");
  if (base.size() != n) throw DimensionMismatch("base point has the wrong dimension");
  if (static_cast<int>(map.size()) != n) throw DimensionMismatch("pencil map needs one expression per coordinate");
  PencilSpec p;
  p.n = n;
  p.base = base;
  p.kind = PencilKind::General;
  const VariableTable vars = VariableTable::pencil(n);
  for (const auto& text : map) {
    p.map.push_back(Expr::parse(text, vars));
    p.map_text.push_back(text);
  }
  p.directions = normalized(std::move(directions), n, p.warnings);
  return p;
}

PencilSpec twisted_pencil(std::vector<Point> directions) {
  return general_pencil(2, Point::Zero(2), {"l*u1", "l*u2 + l^2*conj(u1)*u2"}, std::move(directions));
}

PencilSpec pencil_from_json(const std::string& json_text, std::uint64_t seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("pencil file is not valid JSON: ") + e.what(), 1, static_cast<int>(e.byte));
  }
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("pencil file needs an integer field 'n'", 1, 1);
  const int n = j["n"].get<int>();
  if (n < 1) throw PreconditionError("pencil needs n >= 1");
  const Point base = j.contains("p") ? json_point(j["p"], n, "p") : Point(Point::Zero(n));
  const int count = j.value("count", 200);
  seed = j.value("seed", seed);
  std::vector<Point> dirs;
  if (!j.contains("directions")) throw ParseError("pencil file needs a 'directions' field", 1, 1);
  const auto& d = j["directions"];
  if (d.is_string()) {
    dirs = parse_directions(d.get<std::string>(), n, count, seed);
  } else if (d.is_array()) {
    for (const auto& row : d) dirs.push_back(json_point(row, n, "direction"));
  } else {
    throw ParseError("'directions' must be a preset string or a list", 1, 1);
  }
  if (!j.contains("map")) {
    PencilSpec p = standard_pencil(n, std::move(dirs));
    p.base = base;
    return p;
  }
  if (!j["map"].is_array()) throw ParseError("'map' must be a list of expressions", 1, 1);
  std::vector<std::string> map;
  for (const auto& e : j["map"]) {
    if (!e.is_string()) throw ParseError("'map' entries must be strings", 1, 1);
    map.push_back(e.get<std::string>());
  }
  return general_pencil(n, base, map, std::move(dirs));
}

PencilSpec load_pencil(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read pencil file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return pencil_from_json(ss.str(), seed);
}

double disc_holo_residual(const DiscFunction& g, double rho, int modes) {
  if (modes < 16) throw PreconditionError("disc residual needs modes >= 16");
  if (!(rho > 0.0)) throw PreconditionError("disc radius must be positive");
  const int M = 4 * modes;
  std::vector<Complex> samples(M);
  for (int j = 0; j < M; ++j) samples[j] = g(std::polar(rho, 2 * std::numbers::pi * j / M));
  double neg = 0.0, all = 0.0;
  for (int m = -(M / 2 - 1); m <= M / 2; ++m) {
    Complex a = 0.0;
    for (int j = 0; j < M; ++j) a += samples[j] * std::polar(1.0, -2 * std::numbers::pi * m * j / M);
    const double mag = std::abs(a) / M;
    all = std::max(all, mag);
    if (m < 0) neg = std::max(neg, mag);
  }
  return neg / std::max(1.0, all);
}

PencilValidation validate_pencil(const PencilSpec& pencil) {
  PencilValidation v;
  const Point at0 = pencil(0.0, pencil.directions.front());
  v.base_error = (at0 - pencil.base).norm();
  v.base_ok = v.base_error <= 1e-10;
  if (!v.base_ok) v.problems.push_back("phi(0) differs from the base point");
  // every disc is tested; the quadratic injectivity check uses at most 64 directions
  const int sampled = std::min<int>(64, static_cast<int>(pencil.directions.size()));
  const int stride = std::max(1, static_cast<int>(pencil.directions.size()) / sampled);
  std::vector<int> picks;
  for (int i = 0; i < static_cast<int>(pencil.directions.size()) && static_cast<int>(picks.size()) < sampled; i += stride)
    picks.push_back(i);
  for (const Point& u : pencil.directions)
    for (int c = 0; c < pencil.n; ++c) {
      v.worst_disc_residual = std::max(
          v.worst_disc_residual, disc_holo_residual([&](Complex l) { return pencil(l, u)[c]; }, 0.5, 16));
    }
  v.discs_holomorphic = v.worst_disc_residual <= 1e-8;
  if (!v.discs_holomorphic) v.problems.push_back("a disc of the pencil is not holomorphic");
  std::vector<Point> pre, img;
  for (int i : picks)
    for (double rho : {0.3, 0.6, 0.9})
      for (int a = 0; a < 8; ++a) {
        const Complex l = std::polar(rho, 2 * std::numbers::pi * a / 8);
        const Point u = phase_normalize(pencil.directions[i]);
        pre.push_back(l * u);
        img.push_back(pencil(l, u));
      }
  v.mesh_points = static_cast<int>(img.size());
  v.injective_on_mesh = true;
  for (std::size_t a = 0; a < img.size() && v.injective_on_mesh; ++a)
    for (std::size_t b = a + 1; b < img.size(); ++b)
      if ((img[a] - img[b]).norm() <= 1e-10 && (pre[a] - pre[b]).norm() > 1e-10) {
        v.injective_on_mesh = false;
        v.problems.push_back("two mesh points have the same image");
        break;
      }
  return v;
}

HoloCheck check_holo_along_pencil(const Expr& f, const PencilSpec& pencil, const std::vector<double>& radii,
                                  double tol, int modes) {
  if (f.arity() != pencil.n) throw DimensionMismatch("function and pencil dimensions differ");
  if (radii.empty()) throw PreconditionError("holomorphy check needs at least one radius");
  for (double r : radii)
    if (!(r > 0.0) || r >= 1.0) throw PreconditionError("disc radii must lie in (0, 1)");
  HoloCheck out;
  out.tol = tol;
  const std::size_t D = pencil.directions.size(), R = radii.size();
  out.discs.resize(D * R);
  parallel_for(D * R, [&](std::size_t t) {
    DiscResidual& d = out.discs[t];
    d.direction = static_cast<int>(t / R);
    d.u = pencil.directions[d.direction];
    d.rho = radii[t % R];
    try {
      d.residual = disc_holo_residual([&](Complex l) { return f(pencil(l, d.u)); }, d.rho, modes);
    } catch (const Error& e) {
      d.error = e.what();
      d.residual = kInf;
    }
  });
  for (const auto& d : out.discs) {
    if (d.error) ++out.errors;
    else if (d.residual > tol) ++out.failed;
    if (!d.error) out.worst = std::max(out.worst, d.residual);
  }
  out.pass = out.failed == 0 && out.errors == 0;
  return out;
}

// ---------------------------------------------------------------------------

Point KData::h_tilde(Complex z1, Complex z2) const {
  Point y(2);
  y << z1, z1 * z2;
  const Point pre = rotation_.adjoint() * y;
  return rotation_ * (pencil_.at(pre) - pencil_.base);
}

Complex KData::reparametrize(Complex z1, Complex z2) const {
  if (z1 == Complex(0.0)) return 0.0;
  Complex t = z1;
  const double step = 1e-4;
  for (int it = 0; it < 60; ++it) {
    const Complex g = h_tilde(t, z2)[0] - z1;
    if (std::abs(g) <= 1e-15 * (1.0 + std::abs(z1))) break;
    const Complex dg = (h_tilde(t + step, z2)[0] - h_tilde(t - step, z2)[0]) / (2 * step);
    if (std::abs(dg) < 1e-14) throw NumericalError("coordinate change is singular");
    t -= g / dg;
  }
  return t;
}

Complex KData::k(Complex z1, Complex z2) const { return h_tilde(reparametrize(z1, z2), z2)[1]; }

Point KData::point(Complex z1, Complex w) const {
  Point y(2);
  y << z1, w;
  return pencil_.base + rotation_.adjoint() * y;
}

KData tilde_normalize(const PencilSpec& pencil, const Point& v0, double epsilon) {
  if (pencil.n != 2) throw PreconditionError("the normalization is implemented for n = 2 only");
  if (v0.size() != 2 || !(v0.norm() > 0.0)) throw PreconditionError("v0 must be a nonzero vector of C^2");
  if (!(epsilon > 0.0) || epsilon >= 0.7) throw PreconditionError("epsilon must lie in (0, 0.7)");
  KData kd;
  kd.pencil_ = pencil;
  kd.v0_ = v0 / v0.norm();
  kd.epsilon_ = epsilon;
  const Complex a = kd.v0_[0], b = kd.v0_[1];
  kd.rotation_ << std::conj(a), std::conj(b), -b, a;
  const double base_error = (pencil(0.0, kd.v0_) - pencil.base).norm();
  if (base_error > 1e-10) throw PreconditionError("pencil is not admissible at v0: phi(0) is not the base point");

  const std::vector<Complex> z2s{0.0, epsilon / 2, Complex(0, epsilon / 2), -epsilon / 3, Complex(epsilon / 4, -epsilon / 4)};
  const double dz = 1e-4;
  for (Complex z2 : z2s) {
    kd.holomorphy_residual = std::max(
        kd.holomorphy_residual, disc_holo_residual([&](Complex z1) { return kd.k(z1, z2); }, epsilon / 2, 16));
    kd.k0_error = std::max(kd.k0_error, std::abs(kd.k(0.0, z2)));
    const Complex dk = (kd.k(dz, z2) - kd.k(-dz, z2)) / (2 * dz);
    kd.derivative_error = std::max(kd.derivative_error, std::abs(dk - z2));
  }
  if (kd.holomorphy_residual > 1e-8)
    throw PreconditionError("pencil is not admissible at v0: k is not holomorphic in z1");
  if (kd.k0_error > 1e-8) throw PreconditionError("pencil is not admissible at v0: k(0, z2) != 0");
  if (kd.derivative_error > 1e-6)
    throw PreconditionError("pencil is not admissible at v0: dk/dz1 at z1 = 0 differs from z2");
  return kd;
}

std::string to_string(CrVerdict v) {
  switch (v) {
    case CrVerdict::Pass: return "Pass";
    case CrVerdict::Fail: return "Fail";
    case CrVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double cr_residual(const Expr& f, const Point& x, double delta) {
  if (f.arity() != x.size()) throw DimensionMismatch("function and point dimensions differ");
  return cr_residual(f.field(), x, delta);
}

double cr_residual(const ScalarField& f, const Point& x, double delta) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    auto q = [&](Complex zj) {
      Point y = x;
      y[j] = zj;
      return f(y);
    };
    worst = std::max(worst, std::abs(wirtinger(q, x[j], delta).second));
  }
  return worst;
}

HgResult compute_H_G(const Expr& f, const KData& kd, const HgConfig& cfg) {
  if (f.arity() != 2) throw DimensionMismatch("H and G are defined for functions on C^2");
  HgResult out;
  for (double frac : cfg.radii)
    for (int a = 0; a < cfg.angles; ++a) out.z1.push_back(std::polar(frac * kd.epsilon(), 2 * std::numbers::pi * a / cfg.angles));
  const std::size_t P = out.z1.size();
  out.H.resize(P);
  out.G.resize(P);
  out.df_dwbar.resize(P);
  std::vector<double> direct(P);
  parallel_for(P, [&](std::size_t i) {
    const Complex z1 = out.z1[i];
    const auto [kz, kzb] = wirtinger([&](Complex z2) { return kd.k(z1, z2); }, 0.0, cfg.delta);
    const auto [Fz, Fzb] =
        wirtinger([&](Complex z2) { return f(kd.point(z1, kd.k(z1, z2))); }, 0.0, cfg.delta);
    out.H[i] = std::norm(kzb) - std::norm(kz);
    out.G[i] = kzb * Fz - kz * Fzb;
    out.df_dwbar[i] = out.H[i] != 0.0 ? out.G[i] / out.H[i] : Complex(std::nan(""), 0.0);
    direct[i] = cr_residual(f, kd.point(z1, kd.k(z1, 0.0)), cfg.delta);
  });
  out.min_H = kInf;
  double max_H = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    out.max_G = std::max(out.max_G, std::abs(out.G[i]));
    out.min_H = std::min(out.min_H, std::abs(out.H[i]));
    max_H = std::max(max_H, std::abs(out.H[i]));
    out.max_direct_cr = std::max(out.max_direct_cr, direct[i]);
  }
  if (max_H < cfg.h_floor) {
    out.verdict = CrVerdict::Inconclusive;
    out.message = "H is below the floor on the whole grid; the normalization is degenerate";
  } else if (out.max_G > cfg.tol_g) {
    out.verdict = CrVerdict::Fail;
    out.message = "G does not vanish: df/dwbar != 0 on L_v0";
  } else if (out.min_H < cfg.h_floor) {
    out.verdict = CrVerdict::Inconclusive;
    out.message = "H vanishes at some punctured grid point";
  } else {
    out.verdict = CrVerdict::Pass;
    out.message = "df/dwbar = 0 and df/dzbar = 0 on L_v0";
  }
  return out;
}

DirectionGraph angular_graph(const std::vector<Point>& dirs) {
  const int N = static_cast<int>(dirs.size());
  DirectionGraph g;
  g.adjacency.assign(N, {});
  if (N < 2) return g;
  Eigen::MatrixXd ang(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) ang(i, j) = ang(j, i) = i == j ? 0.0 : real_angle(dirs[i], dirs[j]);
  std::vector<double> nn(N, kInf);
  std::vector<int> nn_idx(N, -1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i != j && ang(i, j) < nn[i]) {
        nn[i] = ang(i, j);
        nn_idx[i] = j;
      }
  std::vector<double> sorted = nn;
  std::nth_element(sorted.begin(), sorted.begin() + N / 2, sorted.end());
  g.resolution = sorted[N / 2];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i != j && (ang(i, j) <= 2.5 * g.resolution || nn_idx[i] == j || nn_idx[j] == i)) g.adjacency[i].push_back(j);
  return g;
}

SubpencilResult find_subpencil(const Expr& f, const PencilSpec& pencil, const SubpencilConfig& cfg) {
  if (f.arity() != pencil.n) throw DimensionMismatch("function and pencil dimensions differ");
  return find_subpencil(f.field(), pencil, cfg);
}

SubpencilResult find_subpencil(const ScalarField& f, const PencilSpec& pencil, const SubpencilConfig& cfg) {
  if (cfg.l_max < 1) throw PreconditionError("l_max must be >= 1");
  const int D = static_cast<int>(pencil.directions.size());
  SubpencilResult out;
  out.level.assign(D, 0);
  out.residual.assign(D, 0.0);
  parallel_for(D, [&](std::size_t i) {
    const Point& u = pencil.directions[i];
    // ring_res[l] = residual on the two rings of the disc of radius 1/l
    std::vector<double> ring_res(cfg.l_max + 1, 0.0);
    auto at = [&](Complex l) {
      try {
        return cr_residual(f, pencil(l, u), cfg.delta);
      } catch (const Error&) {
        return kInf;
      }
    };
    const double center = at(0.0);
    for (int l = 1; l <= cfg.l_max; ++l)
      for (double frac : {0.999, 0.5})
        for (int a = 0; a < cfg.angles; ++a)
          ring_res[l] = std::max(ring_res[l], at(std::polar(frac / l, 2 * std::numbers::pi * (a + 0.5 * (frac < 1)) / cfg.angles)));
    // residual on the disc of radius 1/l is the max over rings l' >= l
    double acc = center;
    std::vector<double> disc(cfg.l_max + 2, 0.0);
    for (int l = cfg.l_max; l >= 1; --l) {
      acc = std::max(acc, ring_res[l]);
      disc[l] = acc;
    }
    out.residual[i] = disc[cfg.l_max];
    for (int l = 1; l <= cfg.l_max; ++l)
      if (disc[l] <= cfg.tol) {
        out.level[i] = l;
        break;
      }
  });
  const DirectionGraph g = angular_graph(pencil.directions);
  std::vector<int> comp(D, -1);
  for (int s = 0; s < D; ++s) {
    if (out.level[s] == 0 || comp[s] >= 0) continue;
    std::vector<int> patch{s}, stack{s};
    comp[s] = s;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : g.adjacency[v])
        if (out.level[w] > 0 && comp[w] < 0) {
          comp[w] = s;
          patch.push_back(w);
          stack.push_back(w);
        }
    }
    std::sort(patch.begin(), patch.end());
    out.patches.push_back(std::move(patch));
  }
  std::stable_sort(out.patches.begin(), out.patches.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  const std::size_t min_patch = std::min<std::size_t>(std::max(1, cfg.min_patch), D);
  for (const auto& p : out.patches)
    if (p.size() >= min_patch) out.V.insert(out.V.end(), p.begin(), p.end());
  std::sort(out.V.begin(), out.V.end());
  for (int v : out.V) out.m = std::max(out.m, out.level[v]);
  const int passing = static_cast<int>(std::count_if(out.level.begin(), out.level.end(), [](int l) { return l > 0; }));
  std::ostringstream os;
  os << passing << " of " << D << " directions pass on the disc of radius 1/" << cfg.l_max << "; "
     << out.patches.size() << " patch(es)";
  if (out.V.empty()) os << "; no patch of at least " << min_patch << " directions";
  out.diagnostics = os.str();
  return out;
}

std::optional<Point> invert_pencil(const PencilSpec& pencil, const Point& x, int iterations) {
  const int n = pencil.n;
  Point y = x - pencil.base;
  if (pencil.kind == PencilKind::Standard) {
    if (y.norm() < 1.0) return y;
    return std::nullopt;
  }
  auto residual = [&](const Point& q) -> Eigen::VectorXd {
    const Point d = pencil.at(q) - x;
    Eigen::VectorXd r(2 * n);
    for (int k = 0; k < n; ++k) {
      r[2 * k] = d[k].real();
      r[2 * k + 1] = d[k].imag();
    }
    return r;
  };
  const double target = 1e-12 * (1.0 + x.norm());
  try {
    Eigen::VectorXd r = residual(y);
    for (int it = 0; it < iterations && r.norm() > target; ++it) {
      Eigen::MatrixXd J(2 * n, 2 * n);
      const double h = 1e-7;
      for (int c = 0; c < 2 * n; ++c) {
        Point yp = y, ym = y;
        const Complex step = c % 2 == 0 ? Complex(h, 0) : Complex(0, h);
        yp[c / 2] += step;
        ym[c / 2] -= step;
        J.col(c) = (residual(yp) - residual(ym)) / (2 * h);
      }
      const Eigen::VectorXd dy = J.fullPivLu().solve(-r);
      double t = 1.0;
      bool improved = false;
      for (int back = 0; back < 30; ++back, t *= 0.5) {
        Point trial = y;
        for (int k = 0; k < n; ++k) trial[k] += t * Complex(dy[2 * k], dy[2 * k + 1]);
        const Eigen::VectorXd rt = residual(trial);
        if (rt.norm() < r.norm()) {
          y = trial;
          r = rt;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (r.norm() > target * 100 || !(y.norm() < 1.0)) return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
  return y;
}

SubpencilRadius standard_subpencil_radius(const PencilSpec& pencil, const std::vector<int>& V,
                                          const std::vector<Point>& W, const RadiusConfig& cfg) {
  const int D = static_cast<int>(pencil.directions.size());
  if (V.empty() || W.empty()) throw PreconditionError("V and W must be nonempty");
  std::vector<char> inV(D, 0);
  for (int v : V) {
    if (v < 0 || v >= D) throw PreconditionError("V index out of range");
    inV[v] = 1;
  }
  std::vector<Point> units(D);
  for (int i = 0; i < D; ++i) units[i] = pencil.directions[i];
  // line-angle resolution of the sample
  std::vector<double> nn(D, kInf);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      if (i != j) nn[i] = std::min(nn[i], line_angle(units[i], units[j]));
  std::vector<double> sorted = nn;
  std::nth_element(sorted.begin(), sorted.begin() + D / 2, sorted.end());
  const double h = D > 1 ? sorted[D / 2] : 0.0;

  // W must stay two cells inside V: no direction outside V within 2h, and
  // the V directions within 5h surround w, leaving no tangent direction
  // without a neighbour inside a cone of half-angle about 78 degrees.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  const int n = pencil.n;
  for (const Point& w0 : W) {
    if (w0.size() != n) throw DimensionMismatch("W direction has the wrong dimension");
    const Point w = w0 / w0.norm();
    std::vector<Point> tangents;
    for (int i = 0; i < D; ++i) {
      const double ang = line_angle(w, units[i]);
      if (!inV[i] && ang < 2 * h) throw PreconditionError("W is not inside V with a margin of two cells");
      if (inV[i] && ang <= 5 * h && ang > 1e-12) {
        const Complex ip = w.dot(units[i]);
        const Point aligned = units[i] * (std::conj(ip) / std::abs(ip));
        tangents.push_back(aligned - w * w.dot(aligned));
      }
    }
    if (n == 1) continue;
    for (int probe = 0; probe < 24; ++probe) {
      Point e(n);
      for (int k = 0; k < n; ++k) e[k] = Complex(gauss(rng), gauss(rng));
      e -= w * w.dot(e);
      e /= e.norm();
      const bool covered = std::any_of(tangents.begin(), tangents.end(), [&](const Point& t) {
        return e.dot(t).real() >= 0.2 * t.norm();
      });
      if (!covered) throw PreconditionError("W touches the boundary of V");
    }
  }

  SubpencilRadius out;
  auto inside = [&](const Point& y) {
    const double r = y.norm();
    if (r < 1e-14) return true;
    const Point dir = y / r;
    int best = -1;
    double best_a = kInf;
    for (int i = 0; i < D; ++i) {
      const double a = line_angle(dir, units[i]);
      if (a < best_a) {
        best_a = a;
        best = i;
      }
    }
    return inV[best] && best_a <= 3 * h + 1e-12;
  };
  auto test = [&](double r, std::optional<Point>& witness) {
    std::vector<Point> mesh{pencil.base};
    for (const Point& w0 : W) {
      const Point w = w0 / w0.norm();
      for (int ring = 1; ring <= cfg.rings; ++ring)
        for (int a = 0; a < cfg.angles; ++a) {
          const double frac = ring == cfg.rings ? 0.999 : static_cast<double>(ring) / cfg.rings;
          mesh.push_back(pencil.base + std::polar(r * frac, 2 * std::numbers::pi * a / cfg.angles) * w);
        }
    }
    out.mesh_points = static_cast<int>(mesh.size());
    std::vector<char> ok(mesh.size(), 0);
    parallel_for(mesh.size(), [&](std::size_t i) {
      const auto y = invert_pencil(pencil, mesh[i], cfg.newton_iterations);
      ok[i] = y && inside(*y) && (pencil.at(*y) - mesh[i]).norm() <= 1e-9 * (1.0 + mesh[i].norm());
    });
    out.inversions += static_cast<int>(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i)
      if (!ok[i]) {
        witness = mesh[i];
        return false;
      }
    return true;
  };
  std::optional<Point> witness;
  double hi = 1.0, lo = 0.0;
  if (test(1.0, witness)) {
    out.r = 1.0;
    out.verified = true;
    return out;
  }
  double r = 0.5;
  while (r >= cfg.r_min) {
    if (test(r, witness)) {
      lo = r;
      break;
    }
    hi = r;
    r *= 0.5;
  }
  if (lo == 0.0) {
    out.witness = witness;
    out.r = 0.0;
    out.verified = false;
    return out;
  }
  for (int s = 0; s < cfg.bisection_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    std::optional<Point> w;
    if (test(mid, w)) lo = mid;
    else {
      hi = mid;
      witness = w;
    }
  }
  out.r = lo;
  out.verified = true;
  out.witness = witness;
  return out;
}

}  // namespace forelli
