#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "forelli/expr.hpp"
#include "forelli/series.hpp"

namespace forelli {

/// Geometric scale schedule lambda_j = rho0 * sigma^j, j < count.
///
/// Scales are radii along unit shape vectors omega, so each torus has
/// polyradius lambda_j * omega. When the largest scale exceeds rho_max the
/// whole schedule is shifted down so that it ends at rho_max.
struct RadiusSchedule {
  double rho0 = 0.2;
  double sigma = 1.25;
  int count = 0;  // 0: floor(N/2) + 2
  double rho_max = std::numeric_limits<double>::infinity();

  std::vector<double> scales(int order) const;
};

struct JetConfig {
  int order = 16;
  RadiusSchedule radii;
  int grid = 0;  // 0: 64 for n <= 2, 32 otherwise
  double tol = 1e-6;
  double abs_floor = 1e-12;
  double condition_bound = 1e13;
  /// Expansion point; empty means the origin.
  Point center;
};

enum class JetVerdict { FullJet, JetUpTo, NoJet };

std::string to_string(JetVerdict v);

struct JetResult {
  /// Candidate jet, truncated to max_consistent_order (order 0, empty, for NoJet).
  FormalSeries series{1, 0};
  int max_consistent_order = -1;
  /// Index d holds the worst relative misfit over orders <= d.
  std::vector<double> per_order_residuals;
  JetVerdict verdict = JetVerdict::NoJet;

  // Sampling record, reported alongside the verdict.
  std::vector<double> scales;
  int shape_count = 0;
  int grid = 0;
  double tol = 0.0;
  double worst_condition = 0.0;
  long long evaluations = 0;
};

/// Formal Taylor jet of f at cfg.center up to cfg.order from torus samples.
///
/// Throws EvalError if f fails on a sample torus, NumericalError if a solve
/// exceeds cfg.condition_bound, PreconditionError on invalid configuration.
JetResult extract_jet(const ScalarField& f, int n, const JetConfig& cfg = {});
JetResult extract_jet(const Expr& e, int n, const JetConfig& cfg = {});

}  // namespace forelli
