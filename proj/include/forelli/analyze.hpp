#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forelli/capacity.hpp"
#include "forelli/jet.hpp"
#include "forelli/report.hpp"
#include "forelli/slices.hpp"

namespace forelli {

struct AnalyzeConfig {
  /// jet.order is the truncation order N.
  JetConfig jet;
  /// Root-test length; 0 uses N.
  int K = 0;
  int window = 0;
  double r0 = 0.5;
  /// Disc radii for the holomorphy check along the straight rays (Expr input).
  std::vector<double> disc_radii{0.25, 0.5, 0.75};
  double disc_tol = 1e-8;
  int disc_modes = 32;
  /// Slice coefficients with a tbar factor above this fail the slice check (series input).
  double slice_tol = 1e-12;
  CertificateConfig certificate;
  int certificate_samples = 20;
  NormalityConfig normality;
};

struct DirectionRow {
  Point direction;
  std::optional<Point> chart;
  /// Root-test radius along (1, chart); absent without a chart.
  std::optional<double> radius;
};

struct AnalysisReport {
  std::vector<Stage> stages;
  std::vector<DirectionRow> directions;
  std::optional<ConvergenceCertificate> certificate;
  std::optional<JetResult> jet;
  std::vector<std::string> warnings;
  /// Radius of the ball inside the certified polydisc.
  double ball_radius = 0.0;
  bool success = false;
  std::string claim;

  const Stage* stage(const std::string& name) const;
  /// Fills the result and stage sections of a report envelope.
  void fill(Report& report) const;
};

/// Extracts the jet of f, checks holomorphy along the rays through U, then
/// runs the series pipeline below on the jet.
AnalysisReport forelli_analyze(const Expr& f, int n, const std::vector<Point>& U, const AnalyzeConfig& cfg = {});

/// Holomorphic type, chart family, radius along every direction of U with a
/// chart, normality of U, and the polydisc certificate.
AnalysisReport forelli_analyze(const FormalSeries& s, const std::vector<Point>& U, const AnalyzeConfig& cfg = {});

}  // namespace forelli
