#include "forelli/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "forelli/directions.hpp"
#include "forelli/errors.hpp"
#include "forelli/parallel.hpp"
#include "forelli/slices.hpp"

namespace forelli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Complex> distinct(const std::vector<Complex>& pts) {
  std::vector<Complex> out;
  for (const Complex& p : pts)
    if (std::none_of(out.begin(), out.end(), [&](const Complex& q) { return q == p; })) out.push_back(p);
  return out;
}

}  // namespace

CompactSet1D CompactSet1D::disc(Complex center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("disc radius must be positive");
  CompactSet1D s;
  s.kind_ = Kind::Disc;
  s.a_ = center;
  s.radius_ = radius;
  return s;
}

CompactSet1D CompactSet1D::segment(Complex a, Complex b) {
  if (a == b) throw PreconditionError("segment endpoints must differ");
  CompactSet1D s;
  s.kind_ = Kind::Segment;
  s.a_ = a;
  s.b_ = b;
  return s;
}

CompactSet1D CompactSet1D::finite_points(std::vector<Complex> points) {
  if (points.empty()) throw PreconditionError("finite point set must be nonempty");
  CompactSet1D s;
  s.kind_ = Kind::FinitePoints;
  s.points_ = std::move(points);
  return s;
}

CompactSet1D CompactSet1D::sample_cloud(std::vector<Complex> points) {
  if (points.empty()) throw PreconditionError("sample cloud must be nonempty");
  CompactSet1D s;
  s.kind_ = Kind::SampleCloud;
  s.points_ = std::move(points);
  return s;
}

CompactSet1D CompactSet1D::parse(const std::string& text) {
  std::istringstream is(text);
  std::string head;
  is >> head;
  std::vector<Complex> args;
  for (std::string t; is >> t;) args.push_back(parse_complex(t));
  if (head == "disc") {
    if (args.size() != 2) throw ParseError("expected 'disc <center> <radius>'", 1, 1);
    return disc(args[0], args[1].real());
  }
  if (head == "segment") {
    if (args.size() != 2) throw ParseError("expected 'segment <a> <b>'", 1, 1);
    return segment(args[0], args[1]);
  }
  if (head == "points") return finite_points(args);
  if (head == "cloud") return sample_cloud(args);
  throw ParseError("unknown set kind '" + head + "'", 1, 1);
}

std::vector<Complex> CompactSet1D::candidates(int count) const {
  std::vector<Complex> out;
  switch (kind_) {
    case Kind::Disc: {
      // A power-of-two boundary count contains the m-th roots of unity for
      // every power-of-two m.
      int boundary = 1;
      while (boundary < (4 * count) / 5) boundary *= 2;
      const int interior = std::max(0, count - boundary);
      for (int j = 0; j < boundary; ++j)
        out.push_back(a_ + std::polar(radius_, 2 * std::numbers::pi * j / boundary));
      const int rings = 4;
      for (int j = 0; j < interior; ++j) {
        const int ring = j % rings;
        const double r = radius_ * (ring + 1) / (rings + 1);
        out.push_back(a_ + std::polar(r, 2 * std::numbers::pi * (j / rings) * rings / std::max(1, interior)));
      }
      break;
    }
    case Kind::Segment:
      for (int j = 0; j <= count; ++j) out.push_back(a_ + (b_ - a_) * (static_cast<double>(j) / count));
      break;
    case Kind::FinitePoints:
    case Kind::SampleCloud:
      out = points_;
      break;
  }
  return out;
}

CompactSet1D CompactSet1D::scaled(Complex a) const {
  switch (kind_) {
    case Kind::Disc: return disc(a * a_, std::abs(a) * radius_);
    case Kind::Segment: return segment(a * a_, a * b_);
    default: {
      std::vector<Complex> pts = points_;
      for (auto& p : pts) p *= a;
      return kind_ == Kind::FinitePoints ? finite_points(pts) : sample_cloud(pts);
    }
  }
}

std::string to_string(CompactSet1D::Kind kind) {
  switch (kind) {
    case CompactSet1D::Kind::Disc: return "disc";
    case CompactSet1D::Kind::Segment: return "segment";
    case CompactSet1D::Kind::FinitePoints: return "points";
    case CompactSet1D::Kind::SampleCloud: return "cloud";
  }
  return "?";
}

std::string to_string(CapacityMethod method) {
  switch (method) {
    case CapacityMethod::TransfiniteDiameter: return "TransfiniteDiameter";
    case CapacityMethod::EnergyLowerBound: return "EnergyLowerBound";
    case CapacityMethod::ClosedForm: return "ClosedForm";
    case CapacityMethod::SiciakExtremal: return "SiciakExtremal";
  }
  return "?";
}

double energy(const std::vector<Complex>& points, const std::vector<double>& weights) {
  if (points.size() != weights.size()) throw DimensionMismatch("energy needs one weight per point");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw PreconditionError("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("weights must sum to 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double w = weights[i] * weights[j];
      if (w == 0.0) continue;
      const double d = std::abs(points[i] - points[j]);
      if (d == 0.0) return -kInf;
      sum += 2.0 * w * std::log(d);
    }
  return sum;
}

LejaSequence leja_points(const CompactSet1D& set, int m) {
  if (m < 2) throw PreconditionError("leja_points needs m >= 2");
  LejaSequence out;
  const std::vector<Complex> cand = set.candidates(50 * m);
  out.candidates = static_cast<int>(cand.size());
  std::vector<double> logsum(cand.size(), 0.0);
  std::vector<char> used(cand.size(), 0);
  std::size_t pick = 0;
  for (std::size_t c = 1; c < cand.size(); ++c)
    if (std::abs(cand[c]) > std::abs(cand[pick])) pick = c;
  for (int step = 0; step < m; ++step) {
    if (step > 0) {
      double best = -kInf;
      std::size_t best_c = cand.size();
      for (std::size_t c = 0; c < cand.size(); ++c) {
        if (used[c]) continue;
        logsum[c] += std::log(std::abs(cand[c] - out.points.back()));
        if (logsum[c] > best) {
          best = logsum[c];
          best_c = c;
        }
      }
      if (best_c == cand.size()) {
        out.degenerate = true;
        out.points.push_back(out.points.back());
        continue;
      }
      pick = best_c;
    }
    used[pick] = 1;
    out.points.push_back(cand[pick]);
  }
  return out;
}

CapacityEstimate cap1d_transfinite(const CompactSet1D& set, int m) {
  if (m < 8) throw PreconditionError("cap1d_transfinite needs m >= 8");
  CapacityEstimate est;
  est.method = CapacityMethod::TransfiniteDiameter;
  switch (set.kind()) {
    case CompactSet1D::Kind::Disc: est.closed_form = set.radius(); break;
    case CompactSet1D::Kind::Segment: est.closed_form = std::abs(set.b() - set.a()) / 4.0; break;
    case CompactSet1D::Kind::FinitePoints: est.closed_form = 0.0; break;
    case CompactSet1D::Kind::SampleCloud: break;
  }
  int m_used = m;
  if (set.kind() == CompactSet1D::Kind::SampleCloud || set.kind() == CompactSet1D::Kind::FinitePoints) {
    const int card = static_cast<int>(distinct(set.points()).size());
    if (set.kind() == CompactSet1D::Kind::FinitePoints && m > card) {
      est.points_used = m;
      est.value = 0.0;
      est.diagnostics["raw_delta"] = 0.0;
      est.notes.push_back("m exceeds the number of distinct points");
      return est;
    }
    m_used = std::min(m, card);
    if (m_used < 2) {
      est.points_used = m_used;
      est.value = 0.0;
      est.diagnostics["raw_delta"] = 0.0;
      est.notes.push_back("sample has a single distinct point");
      return est;
    }
  }
  const LejaSequence leja = leja_points(set, m_used);
  est.points_used = m_used;
  est.diagnostics["candidates"] = leja.candidates;
  if (leja.degenerate) {
    est.value = 0.0;
    est.diagnostics["raw_delta"] = 0.0;
    est.notes.push_back("candidate set exhausted");
    return est;
  }
  double logsum = 0.0;
  for (int i = 0; i < m_used; ++i)
    for (int j = i + 1; j < m_used; ++j) logsum += std::log(std::abs(leja.points[i] - leja.points[j]));
  const double log_delta = 2.0 * logsum / (static_cast<double>(m_used) * (m_used - 1));
  est.diagnostics["raw_delta"] = std::exp(log_delta);
  est.value = std::exp(log_delta - std::log(static_cast<double>(m_used)) / (m_used - 1));
  return est;
}

namespace {

double log_abs_linear(const Point& a, const Point& x) { return std::log(std::abs((a.transpose() * x)(0))); }

/// Trial polynomials for the extremal function lower bound. Everything that
/// does not depend on the probe point is computed once.
class SiciakProbe {
public:
  SiciakProbe(const std::vector<Point>& set, int degree, int trials, std::uint64_t seed)
      : set_(set), degree_(degree) {
    if (set.empty()) throw PreconditionError("extremal bound needs a nonempty sample");
    if (degree < 1) throw PreconditionError("extremal bound needs degree >= 1");
    dim_ = static_cast<int>(set.front().size());
    for (const Point& p : set)
      if (p.size() != dim_) throw DimensionMismatch("sample points have mixed dimensions");
    centroid_ = Point::Zero(dim_);
    for (const Point& p : set) centroid_ += p;
    centroid_ /= static_cast<double>(set.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const int linear = std::max(0, trials / 2);
    for (int t = 0; t < linear; ++t) {
      Point a(dim_);
      for (int k = 0; k < dim_; ++k) a[k] = Complex(g(rng), g(rng));
      a /= a.norm();
      lin_.push_back(a);
      lin_sup_.push_back(sup_linear(a, Point::Zero(dim_)));
    }
    std::vector<MultiIndex> monos;
    for (int k = 0; k <= degree; ++k) {
      auto layer = indices_of_order(dim_, k);
      monos.insert(monos.end(), layer.begin(), layer.end());
    }
    for (int t = linear; t < trials; ++t) {
      Poly p;
      for (const MultiIndex& mi : monos) p.push_back({mi, Complex(g(rng), g(rng))});
      double s = -kInf;
      for (const Point& x : set) s = std::max(s, log_abs_poly(p, x));
      polys_.push_back(std::move(p));
      poly_sup_.push_back(s);
    }
  }

  int dimension() const noexcept { return dim_; }

  double bound(const Point& z) const {
    if (z.size() != dim_) throw DimensionMismatch("probe point has the wrong dimension");
    double best = -kInf;
    for (const Point* c : {&zero_or(), &centroid_}) {
      const Point w = z - *c;
      const double wn = w.norm();
      if (!(wn > 0.0)) continue;
      const Point a = w.conjugate() / wn;
      best = std::max(best, log_abs_linear(a, w) - sup_linear(a, *c));
    }
    for (std::size_t t = 0; t < lin_.size(); ++t) best = std::max(best, log_abs_linear(lin_[t], z) - lin_sup_[t]);
    for (std::size_t t = 0; t < polys_.size(); ++t)
      best = std::max(best, (log_abs_poly(polys_[t], z) - poly_sup_[t]) / degree_);
    return best;
  }

private:
  using Poly = std::vector<std::pair<MultiIndex, Complex>>;

  const Point& zero_or() const {
    if (zero_.size() != dim_) zero_ = Point::Zero(dim_);
    return zero_;
  }

  /// max over the sample of log|<a, x - c>|
  double sup_linear(const Point& a, const Point& c) const {
    double s = -kInf;
    for (const Point& x : set_) s = std::max(s, log_abs_linear(a, x - c));
    return s;
  }

  double log_abs_poly(const Poly& p, const Point& x) const {
    std::vector<std::vector<Complex>> pw(dim_, std::vector<Complex>(degree_ + 1, 1.0));
    for (int k = 0; k < dim_; ++k)
      for (int e = 1; e <= degree_; ++e) pw[k][e] = pw[k][e - 1] * x[k];
    Complex v = 0.0;
    for (const auto& [mi, c] : p) {
      Complex m = c;
      for (int k = 0; k < dim_; ++k) m *= pw[k][mi[k]];
      v += m;
    }
    return std::log(std::abs(v));
  }

  const std::vector<Point>& set_;
  int degree_;
  int dim_ = 0;
  Point centroid_;
  mutable Point zero_;
  std::vector<Point> lin_;
  std::vector<double> lin_sup_;
  std::vector<Poly> polys_;
  std::vector<double> poly_sup_;
};

}  // namespace

double siciak_lower_bound(const std::vector<Point>& set, const Point& z, int degree, int trials, std::uint64_t seed) {
  return SiciakProbe(set, degree, trials, seed).bound(z);
}

CapacityEstimate cap_siciak(const std::vector<Point>& set, const SiciakConfig& cfg, std::optional<double> ball_radius) {
  if (cfg.probe_radii.empty() || !std::is_sorted(cfg.probe_radii.begin(), cfg.probe_radii.end()) ||
      std::adjacent_find(cfg.probe_radii.begin(), cfg.probe_radii.end()) != cfg.probe_radii.end())
    throw PreconditionError("probe radii must be strictly increasing");
  if (cfg.probe_radii.back() < 10.0) throw PreconditionError("largest probe radius must be >= 10");
  if (cfg.directions < 1) throw PreconditionError("cap_siciak needs at least one direction");
  const SiciakProbe probe(set, cfg.degree, cfg.trials, cfg.seed);
  const int dim = probe.dimension();
  std::vector<Point> dirs;
  if (dim == 1) {
    for (int j = 0; j < cfg.directions; ++j) {
      Point w(1);
      w[0] = std::polar(1.0, 2 * std::numbers::pi * j / cfg.directions);
      dirs.push_back(w);
    }
  } else {
    dirs = sphere_directions(dim, cfg.directions, cfg.seed + 1);
  }
  std::vector<double> shell_gamma(cfg.probe_radii.size(), -kInf);
  parallel_for(cfg.probe_radii.size(), [&](std::size_t s) {
    const double R = cfg.probe_radii[s];
    for (const Point& w : dirs) shell_gamma[s] = std::max(shell_gamma[s], probe.bound(R * w) - std::log(R));
  });
  const double gamma = *std::max_element(shell_gamma.begin(), shell_gamma.end());
  CapacityEstimate est;
  est.method = CapacityMethod::SiciakExtremal;
  est.points_used = static_cast<int>(set.size());
  est.value = std::exp(-gamma);
  est.closed_form = ball_radius;
  est.diagnostics["gamma"] = gamma;
  for (std::size_t s = 0; s < shell_gamma.size(); ++s)
    est.diagnostics["gamma_shell_" + std::to_string(s)] = shell_gamma[s];
  return est;
}

std::vector<Point> ball_sample(const Point& center, double radius, int count, std::uint64_t seed) {
  const int dim = static_cast<int>(center.size());
  if (dim < 1 || count < 1 || !(radius > 0.0)) throw PreconditionError("ball sample needs dim, count, radius > 0");
  const int on_sphere = std::max(1, 3 * count / 4);
  std::vector<Point> out;
  if (dim == 1) {
    for (int j = 0; j < on_sphere; ++j) {
      Point w(1);
      w[0] = std::polar(1.0, 2 * std::numbers::pi * j / on_sphere);
      out.push_back(center + radius * w);
    }
  } else {
    for (const Point& w : sphere_directions(dim, on_sphere, seed)) out.push_back(center + radius * w);
  }
  std::mt19937_64 rng(seed + 7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Point& w : sphere_directions(dim, count - on_sphere > 0 ? count - on_sphere : 1, seed + 3)) {
    if (static_cast<int>(out.size()) >= count) break;
    out.push_back(center + radius * std::pow(u(rng), 1.0 / (2 * dim)) * w);
  }
  return out;
}

NormalityResult normality_check(const std::vector<Point>& directions, const NormalityConfig& cfg) {
  if (directions.size() < 100) throw PreconditionError("normality check needs at least 100 directions");
  const int n = static_cast<int>(directions.front().size());
  NormalityResult res;
  std::vector<Eigen::VectorXd> pts;
  for (const Point& v : directions) {
    if (v.size() != n) throw DimensionMismatch("directions have mixed dimensions");
    const Direction d = Direction::from_vector(v);
    if (!d.has_chart()) {
      ++res.excluded;
      continue;
    }
    Eigen::VectorXd x(2 * (n - 1));
    for (int k = 0; k < n - 1; ++k) {
      x[2 * k] = (*d.chart)[k].real();
      x[2 * k + 1] = (*d.chart)[k].imag();
    }
    pts.push_back(x);
  }
  res.chart_points = static_cast<int>(pts.size());
  if (n == 1) {
    // every unit vector of C^1 spans the same line
    res.decidable = true;
    res.is_normal_sufficient = res.chart_points > 0;
    res.center = Point(0);
    res.radius = kInf;
    res.note = "one-dimensional: the chart is a single point";
    return res;
  }
  if (res.chart_points < 2) {
    res.decidable = false;
    res.note = "the sample lies on {v1 = 0}; not decidable in this chart";
    return res;
  }
  const int P = res.chart_points;
  const int D = 2 * (n - 1);

  std::vector<double> nn(P, kInf);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      if (i != j) nn[i] = std::min(nn[i], (pts[i] - pts[j]).norm());
  std::vector<double> sorted = nn;
  std::nth_element(sorted.begin(), sorted.begin() + P / 2, sorted.end());
  const double h = sorted[P / 2];
  res.resolution = h;
  if (!(h > 0.0)) {
    res.decidable = false;
    res.note = "chart sample has no spread";
    return res;
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // A probe is covered when a sample lies within cover = f h. For Poisson
  // samples a point misses its f h neighbourhood with probability
  // 2^{-f^D}, so f^D >= 16 keeps random gaps out of the interior.
  const double cover = h * std::max(2.0, std::pow(2.0, 4.0 / D));
  // Probes: uniform over the central box of the sample, plus points just
  // beyond the cover radius of every sample, which locate the edge of the
  // covered region.
  Eigen::VectorXd lo(D), hi(D);
  for (int c = 0; c < D; ++c) {
    std::vector<double> col(P);
    for (int i = 0; i < P; ++i) col[i] = pts[i][c];
    std::sort(col.begin(), col.end());
    lo[c] = col[static_cast<std::size_t>(0.02 * (P - 1))] - cover;
    hi[c] = col[static_cast<std::size_t>(0.98 * (P - 1))] + cover;
  }
  std::vector<Eigen::VectorXd> probes;
  for (int t = 0; t < cfg.probes; ++t) {
    Eigen::VectorXd x(D);
    for (int c = 0; c < D; ++c) x[c] = lo[c] + (hi[c] - lo[c]) * u(rng);
    probes.push_back(x);
  }
  for (int rep = 0; rep < 2; ++rep)
    for (int i = 0; i < P; ++i) {
      Eigen::VectorXd e(D);
      for (int c = 0; c < D; ++c) e[c] = g(rng);
      probes.push_back(pts[i] + (cover + h) * e / e.norm());
    }
  std::vector<char> uncovered(probes.size(), 0);
  parallel_for(probes.size(), [&](std::size_t t) {
    double best = kInf;
    for (const auto& x : pts) best = std::min(best, (x - probes[t]).norm());
    uncovered[t] = best > cover;
  });
  std::vector<const Eigen::VectorXd*> holes;
  for (std::size_t t = 0; t < probes.size(); ++t)
    if (uncovered[t]) holes.push_back(&probes[t]);

  const int stride = std::max(1, P / std::max(1, cfg.max_centers));
  int best_i = 0;
  double best_r = -1.0;
  for (int i = 0; i < P; i += stride) {
    double r = kInf;
    for (const auto* p : holes) r = std::min(r, (*p - pts[i]).norm());
    if (r > best_r) {
      best_r = r;
      best_i = i;
    }
  }
  res.decidable = true;
  res.radius = best_r;
  res.center = Point(n - 1);
  for (int k = 0; k < n - 1; ++k) res.center[k] = Complex(pts[best_i][2 * k], pts[best_i][2 * k + 1]);
  res.is_normal_sufficient = best_r >= h;
  if (!res.is_normal_sufficient) res.note = "no inscribed ball above the sampling resolution";
  return res;
}

}  // namespace forelli
