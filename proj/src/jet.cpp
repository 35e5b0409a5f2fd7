#include "forelli/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <numbers>

#include <Eigen/SVD>

#include "forelli/errors.hpp"
#include "forelli/parallel.hpp"

namespace forelli {

std::vector<double> RadiusSchedule::scales(int order) const {
  const int m = count > 0 ? count : order / 2 + 2;
  if (!(rho0 > 0.0) || !(sigma > 1.0)) throw PreconditionError("radius schedule needs rho0 > 0 and sigma > 1");
  std::vector<double> s(m);
  for (int j = 0; j < m; ++j) s[j] = rho0 * std::pow(sigma, j);
  if (s.back() > rho_max) {
    if (!(rho_max > 0.0)) throw PreconditionError("rho_max must be positive");
    for (int j = 0; j < m; ++j) s[j] = rho_max * std::pow(sigma, j - (m - 1));
  }
  return s;
}

std::string to_string(JetVerdict v) {
  switch (v) {
    case JetVerdict::FullJet: return "FullJet";
    case JetVerdict::JetUpTo: return "JetUpTo";
    case JetVerdict::NoJet: return "NoJet";
  }
  return {};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// All v in N^n with |v| = total, in lexicographically descending order.
void compositions(int n, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  const int k = static_cast<int>(cur.size());
  if (k == n - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur.push_back(v);
    compositions(n, total - v, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> compositions(int n, int total) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  compositions(n, total, cur, out);
  return out;
}

// Unit shape vectors with positive entries: omega_k = sqrt(u_k) for the
// interior points u of a simplex lattice, enough of them to overdetermine
// every shape fit by a factor of two.
std::vector<VectorXd> shape_vectors(int n, int c) {
  if (n == 1) return {VectorXd::Ones(1)};
  const double needed = 2.0 * binomial(c + n - 1, n - 1);
  int L = 1;
  while (binomial(L + n - 1, n - 1) < needed) ++L;
  std::vector<VectorXd> out;
  for (const auto& idx : compositions(n, L)) {
    VectorXd w(n);
    for (int k = 0; k < n; ++k) w[k] = std::sqrt((idx[k] + 0.5) / (L + 0.5 * n));
    out.push_back(w);
  }
  return out;
}

// Least-squares solver through a thin SVD. The residual is formed as the
// component of b outside range(U), which stays accurate when A is badly
// conditioned (A * pinv * b would not).
struct Solver {
  MatrixXd u;
  MatrixXd v_scaled;  // V * Sigma^{-1}
  VectorXd row_l1;    // 1-norms of pinv rows: amplification of a uniform data bound
  double condition = 1.0;

  VectorXcd solve(const VectorXcd& b, VectorXcd& residual) const {
    const VectorXcd ub = u.transpose().cast<Complex>() * b;
    residual = b - u.cast<Complex>() * ub;
    return v_scaled.cast<Complex>() * ub;
  }
};

Solver make_solver(const MatrixXd& a) {
  Solver s;
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  s.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  VectorXd inv = sv;
  for (Eigen::Index k = 0; k < inv.size(); ++k) inv[k] = sv[k] > 0.0 ? 1.0 / sv[k] : 0.0;
  s.u = svd.matrixU();
  s.v_scaled = svd.matrixV() * inv.asDiagonal();
  s.row_l1 = (s.v_scaled * s.u.transpose()).cwiseAbs().rowwise().sum();
  return s;
}

// Sampled Fourier modes of one torus: value per requested mode.
struct TorusSample {
  std::vector<Complex> modes;
  double sup = 0.0;
};

class TorusSampler {
public:
  TorusSampler(const ScalarField& f, int n, int grid, const Point& center, int max_mode,
               const std::vector<std::vector<int>>& modes)
      : f_(f), n_(n), grid_(grid), center_(center), max_mode_(max_mode), modes_(modes) {
    const int width = 2 * max_mode + 1;
    twiddle_.resize(static_cast<std::size_t>(width) * grid);
    for (int m = -max_mode; m <= max_mode; ++m)
      for (int t = 0; t < grid; ++t)
        twiddle_[(m + max_mode) * grid + t] =
            std::polar(1.0 / grid, -2.0 * std::numbers::pi * m * t / grid);
    phase_.resize(grid);
    for (int t = 0; t < grid; ++t) phase_[t] = std::polar(1.0, 2.0 * std::numbers::pi * t / grid);
  }

  TorusSample sample(const VectorXd& radius) const {
    std::size_t total = 1;
    for (int k = 0; k < n_; ++k) total *= grid_;
    std::vector<Complex> values(total);
    TorusSample out;
    Point z(n_);
    std::vector<int> t(n_, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      for (int k = 0; k < n_; ++k) z[k] = center_[k] + radius[k] * phase_[t[k]];
      const Complex v = f_(z);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw EvalError("non-finite value on a sample torus", "f");
      values[idx] = v;
      out.sup = std::max(out.sup, std::abs(v));
      for (int k = 0; k < n_ && ++t[k] == grid_; ++k) t[k] = 0;
    }
    // Separable transform: axis k is replaced by the mode range [-M, M].
    const int width = 2 * max_mode_ + 1;
    std::vector<Complex> cur = std::move(values);
    std::size_t inner = 1;  // extent of already-transformed axes
    std::size_t outer = total / grid_;
    for (int k = 0; k < n_; ++k) {
      std::vector<Complex> next(inner * width * outer, 0.0);
      for (std::size_t o = 0; o < outer; ++o)
        for (int m = 0; m < width; ++m) {
          const Complex* tw = &twiddle_[m * grid_];
          for (std::size_t i = 0; i < inner; ++i) {
            Complex acc = 0.0;
            const Complex* src = &cur[i + inner * grid_ * o];
            for (int g = 0; g < grid_; ++g) acc += src[inner * g] * tw[g];
            next[i + inner * (m + width * o)] = acc;
          }
        }
      cur = std::move(next);
      inner *= width;
      outer /= grid_;
    }
    out.modes.reserve(modes_.size());
    for (const auto& mu : modes_) {
      std::size_t idx = 0, stride = 1;
      for (int k = 0; k < n_; ++k) {
        idx += stride * (mu[k] + max_mode_);
        stride *= width;
      }
      out.modes.push_back(cur[idx]);
    }
    return out;
  }

private:
  const ScalarField& f_;
  int n_;
  int grid_;
  Point center_;
  int max_mode_;
  const std::vector<std::vector<int>>& modes_;
  std::vector<Complex> twiddle_;
  std::vector<Complex> phase_;
};

std::vector<std::vector<int>> mode_list(int n, int max_total) {
  std::vector<std::vector<int>> out;
  for (int a = 0; a <= max_total; ++a)
    for (const auto& mag : compositions(n, a)) {
      // every sign pattern on the nonzero entries
      std::vector<int> nz;
      for (int k = 0; k < n; ++k)
        if (mag[k] != 0) nz.push_back(k);
      for (unsigned mask = 0; mask < (1u << nz.size()); ++mask) {
        std::vector<int> mu = mag;
        for (std::size_t b = 0; b < nz.size(); ++b)
          if (mask & (1u << b)) mu[nz[b]] = -mu[nz[b]];
        out.push_back(mu);
      }
    }
  return out;
}

// Degree estimate from two samples of a power law.
double log_slope(double y0, double y1, double x0, double x1) {
  return std::log(y1 / y0) / std::log(x1 / x0);
}

// Least-squares slope of log|y| against log x over entries above floor.
std::optional<double> loglog_slope(const VectorXcd& y, const std::vector<double>& x, double floor) {
  std::vector<double> lx, ly;
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (std::abs(y[j]) > floor) {
      lx.push_back(std::log(x[j]));
      ly.push_back(std::log(std::abs(y[j])));
    }
  if (lx.size() < 2) return std::nullopt;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

double relative_misfit(double residual, double scale, double floor) {
  return std::max(0.0, residual - floor) / std::max(scale, floor);
}

void check_condition(const Solver& s, double bound, const char* what, double& worst) {
  worst = std::max(worst, s.condition);
  if (!(s.condition <= bound))
    throw NumericalError(std::string("ill-conditioned ") + what + ": condition number " +
                         format_double(s.condition) + " exceeds bound " + format_double(bound));
}

}  // namespace

JetResult extract_jet(const ScalarField& f, int n, const JetConfig& cfg) {
  const int N = cfg.order;
  if (n < 1) throw PreconditionError("dimension must be >= 1");
  if (N < 0) throw PreconditionError("jet order must be >= 0");
  if (!(cfg.tol > 0.0)) throw PreconditionError("tolerance must be positive");
  const int grid = cfg.grid > 0 ? cfg.grid : (n <= 2 ? 64 : 32);
  if (grid < 2 * N + 1)
    throw PreconditionError("grid " + std::to_string(grid) + " below 2N+1 = " + std::to_string(2 * N + 1));
  const std::vector<double> lambda = cfg.radii.scales(N);
  const int m = static_cast<int>(lambda.size());
  if (m < (N + 1) / 2 + 1)
    throw PreconditionError("radius schedule needs at least ceil(N/2)+1 = " + std::to_string((N + 1) / 2 + 1) +
                            " scales");
  Point center = cfg.center.size() == 0 ? Point::Zero(n) : cfg.center;
  if (center.size() != n) throw DimensionMismatch("jet center has the wrong dimension");

  const int c = N / 2;
  const std::vector<VectorXd> shapes = shape_vectors(n, c);
  const int Q = static_cast<int>(shapes.size());
  const int max_mode = std::min(N + 2, (grid - 1) / 2);
  const auto modes = mode_list(n, max_mode);
  const double lambda_max = lambda.back();

  JetResult result;
  result.scales = lambda;
  result.shape_count = Q;
  result.grid = grid;
  result.tol = cfg.tol;

  // One scale-fit solver per |mu|_1; columns (lambda/lambda_max)^d, d = |mu| + 2i <= N.
  std::map<int, Solver> scale_solvers;
  for (int a = 0; a <= std::min(N, max_mode); ++a) {
    const int p = (N - a) / 2 + 1;
    MatrixXd A(m, p);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < p; ++i) A(j, i) = std::pow(lambda[j] / lambda_max, a + 2 * i);
    Solver s = make_solver(A);
    check_condition(s, cfg.condition_bound, "radius schedule", result.worst_condition);
    scale_solvers.emplace(a, std::move(s));
  }

  // Sample every (scale, shape) torus.
  TorusSampler sampler(f, n, grid, center, max_mode, modes);
  std::vector<TorusSample> samples(static_cast<std::size_t>(m) * Q);
  parallel_for(samples.size(), [&](std::size_t idx) {
    const int j = static_cast<int>(idx) / Q;
    const int q = static_cast<int>(idx) % Q;
    samples[idx] = sampler.sample(lambda[j] * shapes[q]);
  });
  double sup = 0.0;
  for (const auto& s : samples) sup = std::max(sup, s.sup);
  std::size_t per_torus = 1;
  for (int k = 0; k < n; ++k) per_torus *= grid;
  result.evaluations = static_cast<long long>(per_torus * samples.size());
  const double floor = cfg.abs_floor * std::max(1.0, sup);

  std::vector<double> raw(N + 1, 0.0);
  std::map<std::pair<std::vector<int>, int>, Solver> shape_solvers;
  FormalSeries::TermMap terms;

  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    const auto& mu = modes[mi];
    std::vector<int> absmu(n);
    int a = 0;
    for (int k = 0; k < n; ++k) {
      absmu[k] = std::abs(mu[k]);
      a += absmu[k];
    }
    const int p = a <= N ? (N - a) / 2 + 1 : 0;
    const Solver* ls = p > 0 ? &scale_solvers.at(a) : nullptr;
    // psi(i, q): coefficient of (lambda/lambda_max)^{a+2i} on shape q
    Eigen::MatrixXcd psi(std::max(p, 1), Q);

    for (int q = 0; q < Q; ++q) {
      VectorXcd F(m);
      for (int j = 0; j < m; ++j) F[j] = samples[static_cast<std::size_t>(j) * Q + q].modes[mi];
      VectorXcd r = F;
      if (ls) psi.col(q).head(p) = ls->solve(F, r);
      const double e = relative_misfit(r.cwiseAbs().maxCoeff(), F.cwiseAbs().maxCoeff(), floor);
      if (e <= cfg.tol) continue;
      // Attribute the misfit to the order at which the unrepresentable part enters.
      const auto tail_slope = loglog_slope(r, lambda, floor);
      if (tail_slope && *tail_slope > N + 0.5) continue;
      std::optional<double> d_hat;
      for (int j0 = 0; j0 + 1 < m && !d_hat; ++j0)
        if (std::abs(F[j0]) > floor && std::abs(F[j0 + 1]) > floor)
          d_hat = log_slope(std::abs(F[j0]), std::abs(F[j0 + 1]), lambda[j0], lambda[j0 + 1]);
      int order = a;
      if (d_hat && *d_hat < a - 0.5) order = std::max(0, static_cast<int>(std::lround(*d_hat)));
      if (order > N) continue;
      raw[order] = std::max(raw[order], e);
    }

    // Shape fits: psi_d(omega) = sum_{|s| = (d-a)/2} c_s omega^{|mu| + 2s}.
    for (int i = 0; i < p; ++i) {
      const int d = a + 2 * i;
      const auto svec = compositions(n, i);
      auto key = std::make_pair(absmu, i);
      auto it = shape_solvers.find(key);
      if (it == shape_solvers.end()) {
        MatrixXd B(Q, static_cast<Eigen::Index>(svec.size()));
        for (int q = 0; q < Q; ++q)
          for (std::size_t s = 0; s < svec.size(); ++s) {
            double v = 1.0;
            for (int k = 0; k < n; ++k) v *= std::pow(shapes[q][k], absmu[k] + 2 * svec[s][k]);
            B(q, static_cast<Eigen::Index>(s)) = v;
          }
        Solver s = make_solver(B);
        check_condition(s, cfg.condition_bound, "shape set", result.worst_condition);
        it = shape_solvers.emplace(std::move(key), std::move(s)).first;
      }
      const Solver& ss = it->second;
      const VectorXcd y = psi.row(i).transpose();
      VectorXcd r;
      const VectorXcd coef = ss.solve(y, r);
      const double floor_c = floor * ls->row_l1[i];
      raw[d] = std::max(raw[d], relative_misfit(r.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff(), floor_c));
      const double scale = std::pow(lambda_max, d);
      for (std::size_t s = 0; s < svec.size(); ++s) {
        const Complex cs = coef[static_cast<Eigen::Index>(s)];
        if (std::abs(cs) <= floor_c * ss.row_l1[static_cast<Eigen::Index>(s)]) continue;
        std::vector<int> I(n), J(n);
        for (int k = 0; k < n; ++k) {
          const int K = absmu[k] + 2 * svec[s][k];
          I[k] = (K + mu[k]) / 2;
          J[k] = (K - mu[k]) / 2;
        }
        terms[TermKey{MultiIndex(I), MultiIndex(J)}] = cs / scale;
      }
    }
  }

  result.per_order_residuals.resize(N + 1);
  double running = 0.0;
  int first_bad = -1;
  for (int d = 0; d <= N; ++d) {
    running = std::max(running, raw[d]);
    result.per_order_residuals[d] = running;
    if (first_bad < 0 && raw[d] > cfg.tol) first_bad = d;
  }
  result.max_consistent_order = first_bad < 0 ? N : first_bad - 1;
  result.verdict = first_bad < 0 ? JetVerdict::FullJet : first_bad == 0 ? JetVerdict::NoJet : JetVerdict::JetUpTo;
  const FormalSeries full = FormalSeries::from_terms(n, N, terms);
  result.series = result.max_consistent_order >= 0 ? truncate(full, result.max_consistent_order)
                                                   : FormalSeries(n, 0);
  return result;
}

JetResult extract_jet(const Expr& e, int n, const JetConfig& cfg) {
  if (e.arity() != n)
    throw DimensionMismatch("expression has " + std::to_string(e.arity()) + " variables, expected " +
                            std::to_string(n));
  return extract_jet(e.field(), n, cfg);
}

}  // namespace forelli
