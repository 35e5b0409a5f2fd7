#include "forelli/psh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "forelli/errors.hpp"
#include "forelli/parallel.hpp"
#include "forelli/series.hpp"

namespace forelli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point chart_point(int variables, Complex first) {
  Point b = Point::Zero(variables);
  if (variables > 0) b[0] = first;
  return b;
}

// Pairwise summation; exact for equal values when the count is a power of two.
double pairwise_sum(const double* x, std::size_t count) {
  if (count <= 2) return count == 0 ? 0.0 : count == 1 ? x[0] : x[0] + x[1];
  const std::size_t half = count / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, count - half);
}

}  // namespace

double PshFamily::u(int k, const Point& z) const {
  if (k < 1 || k > K()) throw PreconditionError("u_k needs 1 <= k <= K");
  return source.polys[k].log_abs(z) / k;
}

PshFamily scaled_power_family(int K, const std::function<double(int)>& log_coeff) {
  return PshFamily{SlicePolyFamily::generate(2, K, [&](int k) {
    return ChartPolynomial::monomial(1, MultiIndex{k}, 1.0, log_coeff(k));
  })};
}

PshFamily constant_family(int variables, int K) {
  return PshFamily{SlicePolyFamily::generate(variables + 1, K, [&](int) {
    return ChartPolynomial::monomial(variables, MultiIndex(static_cast<std::size_t>(variables)), 1.0);
  })};
}

TorusAverage average_on_torus(const PshFamily& family, int k, const Point& z, const Polyradius& r, int grid,
                              double floor) {
  if (k < 1 || k > family.K()) throw PreconditionError("torus average needs 1 <= k <= K");
  if (grid < 16) throw PreconditionError("torus average needs grid >= 16");
  const int v = family.variables();
  if (z.size() != v || r.size() != v) throw DimensionMismatch("torus center or radius has the wrong dimension");
  long nodes = 1;
  for (int i = 0; i < v; ++i) nodes *= grid;
  TorusAverage out;
  out.nodes = static_cast<int>(nodes);
  std::vector<double> values(nodes);
  std::vector<int> idx(v, 0);
  Point w(v);
  for (long t = 0; t < nodes; ++t) {
    for (int i = 0; i < v; ++i) w[i] = z[i] + std::polar(r[i], 2 * std::numbers::pi * idx[i] / grid);
    double val = family.u(k, w);
    if (!(val >= floor)) {
      val = floor;
      ++out.clipped;
    }
    values[t] = val;
    for (int i = 0; i < v && ++idx[i] == grid; ++i) idx[i] = 0;
  }
  out.value = pairwise_sum(values.data(), values.size()) / static_cast<double>(nodes);
  return out;
}

LipschitzCheck lipschitz_check(const PshFamily& family, int k, const Point& z, const Point& w, const Polyradius& r,
                               const Polyradius& s, double r0, int grid) {
  if (!(r0 > 0.0)) throw PreconditionError("r0 must be positive");
  if (r.size() != s.size()) throw DimensionMismatch("radii have different dimensions");
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!(r[i] > r0) || !(s[i] > r0)) throw PreconditionError("every radius must exceed r0");
  LipschitzCheck out;
  out.lhs = std::abs(average_on_torus(family, k, z, r, grid).value - average_on_torus(family, k, w, s, grid).value);
  out.rhs = ((r - s).cwiseAbs().sum() + (z - w).cwiseAbs().sum()) / r0;
  out.pass = out.lhs < out.rhs + kQuadratureSlack;
  return out;
}

std::string to_string(TrichotomyCase c) {
  switch (c) {
    case TrichotomyCase::MinusInfinity: return "MinusInfinity";
    case TrichotomyCase::PlusInfinity: return "PlusInfinity";
    case TrichotomyCase::Finite: return "Finite";
  }
  return "?";
}

TrichotomyVerdict classify_trichotomy(const PshFamily& family, const Polyradius& r, const TrichotomyConfig& cfg) {
  const int K = family.K();
  if (K < 20) throw PreconditionError("trichotomy needs K >= 20");
  const int v = family.variables();
  if (r.size() != v) throw DimensionMismatch("polyradius has the wrong dimension");
  TrichotomyVerdict out;
  out.averages.resize(K);
  const Point origin = Point::Zero(v);
  parallel_for(K, [&](std::size_t i) {
    out.averages[i] = average_on_torus(family, static_cast<int>(i) + 1, origin, r, cfg.grid).value;
  });
  out.window = (K + 1) / 2;
  const int first = K - out.window + 1;
  out.alpha_r = -kInf;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = first; k <= K; ++k) {
    const double a = out.averages[k - 1], x = std::log(static_cast<double>(k));
    out.alpha_r = std::max(out.alpha_r, a);
    sx += x;
    sy += a;
    sxx += x * x;
    sxy += x * a;
  }
  const double m = out.window;
  out.tail_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (out.alpha_r <= -cfg.threshold) out.kind = TrichotomyCase::MinusInfinity;
  else if (out.alpha_r >= cfg.threshold) out.kind = TrichotomyCase::PlusInfinity;
  else if (out.tail_slope <= -cfg.slope_threshold) out.kind = TrichotomyCase::MinusInfinity;
  else if (out.tail_slope >= cfg.slope_threshold) out.kind = TrichotomyCase::PlusInfinity;
  else out.kind = TrichotomyCase::Finite;
  if (out.kind == TrichotomyCase::MinusInfinity) out.alpha_r = -kInf;
  if (out.kind == TrichotomyCase::PlusInfinity) out.alpha_r = kInf;
  if (out.kind != TrichotomyCase::PlusInfinity) return out;

  // v_k = u_k(z)/u_k^r(0) = c(z) + d(z)/u_k^r(0) for the scaled families;
  // the intercept c(z) estimates lim v_k.
  std::vector<int> ks;
  for (int k = first; k <= K; ++k)
    if (out.averages[k - 1] > 0.0) ks.push_back(k);
  if (ks.empty()) return out;
  const int side = v == 0 ? 1 : cfg.nodes;
  std::vector<Point> sample;
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) {
      const double s = side == 1 ? 0.0 : cfg.extent * (2.0 * ix / (side - 1) - 1.0);
      const double t = side == 1 ? 0.0 : cfg.extent * (2.0 * iy / (side - 1) - 1.0);
      sample.push_back(chart_point(v, Complex(s, t)));
    }
  out.sampled = static_cast<int>(sample.size());
  std::vector<char> flag(sample.size(), 0);
  parallel_for(sample.size(), [&](std::size_t p) {
    double x1 = 0, y1 = 0, xx = 0, xy = 0, vmax = -kInf;
    for (int k : ks) {
      const double u = family.u(k, sample[p]);
      if (!std::isfinite(u)) {
        flag[p] = 1;
        return;
      }
      const double x = 1.0 / out.averages[k - 1], y = u / out.averages[k - 1];
      x1 += x;
      y1 += y;
      xx += x * x;
      xy += x * y;
      vmax = std::max(vmax, y);
    }
    const double c = static_cast<double>(ks.size());
    const double det = c * xx - x1 * x1;
    const double limit = ks.size() >= 3 && det > 1e-14 * c * xx ? (xx * y1 - x1 * xy) / det : vmax;
    flag[p] = limit < 1.0 - cfg.gap;
  });
  for (std::size_t p = 0; p < sample.size(); ++p)
    if (flag[p]) out.exceptional.push_back(sample[p]);
  return out;
}

EnvelopeField upper_envelope(const PshFamily& family, const GridRegion& region, int window, double gap) {
  if (!(region.x1 > region.x0) || !(region.y1 > region.y0) || region.nx < 2 || region.ny < 2)
    throw PreconditionError("envelope region must be a nondegenerate rectangle with >= 2 nodes per side");
  const int K = family.K();
  if (window <= 0) window = K / 2;
  if (window < 1 || window > K) throw PreconditionError("envelope window must lie in [1, K]");
  EnvelopeField f;
  f.region = region;
  f.window = window;
  f.gap = gap;
  const int v = family.variables();
  f.nodes.resize(static_cast<std::size_t>(region.nx) * region.ny);
  parallel_for(f.nodes.size(), [&](std::size_t i) {
    const int ix = static_cast<int>(i % region.nx), iy = static_cast<int>(i / region.nx);
    EnvelopeNode& node = f.nodes[i];
    node.x = region.x0 + (region.x1 - region.x0) * ix / (region.nx - 1);
    node.y = region.y0 + (region.y1 - region.y0) * iy / (region.ny - 1);
    const Point b = chart_point(v, Complex(node.x, node.y));
    node.u = -kInf;
    for (int k = K - window + 1; k <= K; ++k) node.u = std::max(node.u, family.u(k, b));
  });
  for (int iy = 0; iy < region.ny; ++iy)
    for (int ix = 0; ix < region.nx; ++ix) {
      double m = -kInf;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= region.nx || jy >= region.ny) continue;
          m = std::max(m, f.nodes[static_cast<std::size_t>(jy) * region.nx + jx].u);
        }
      EnvelopeNode& node = f.nodes[static_cast<std::size_t>(iy) * region.nx + ix];
      node.u_star = m;
      if (node.u < m - gap) f.exceptional.emplace_back(node.x, node.y);
    }
  return f;
}

void write_envelope_csv(std::ostream& out, const EnvelopeField& field) {
  out << "x,y,u,u_star\n";
  for (const auto& n : field.nodes)
    out << format_double(n.x) << ',' << format_double(n.y) << ',' << format_double(n.u) << ','
        << format_double(n.u_star) << '\n';
}

}  // namespace forelli
