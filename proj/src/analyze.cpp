#include "forelli/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "forelli/parallel.hpp"
#include "forelli/pencil.hpp"

namespace forelli {

namespace {

// Stage names in pipeline order.
const char* const kSeriesStages[] = {"holomorphic_type", "chart_family", "directional_radius", "normality",
                                     "certificate"};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

std::string term_text(const TermKey& key) {
  std::string s;
  for (std::size_t k = 0; k < key.holo.dimension(); ++k) {
    const std::string v = std::to_string(k + 1);
    if (key.holo[k]) s += "z" + v + (key.holo[k] > 1 ? "^" + std::to_string(key.holo[k]) : "") + " ";
    if (key.anti[k]) s += "conj(z" + v + ")" + (key.anti[k] > 1 ? "^" + std::to_string(key.anti[k]) : "") + " ";
  }
  if (s.empty()) return "1";
  s.pop_back();
  return s;
}

Stage make(const std::string& name, StageStatus status, std::string summary) {
  Stage s;
  s.name = name;
  s.status = status;
  s.summary = std::move(summary);
  return s;
}

void skip_rest(AnalysisReport& rep, std::size_t from) {
  for (std::size_t i = from; i < std::size(kSeriesStages); ++i)
    rep.stages.push_back(make(kSeriesStages[i], StageStatus::Skipped, "not run: an earlier stage failed"));
}

void run_series(AnalysisReport& rep, const FormalSeries& s, const std::vector<Point>& U, const AnalyzeConfig& cfg,
                std::vector<std::string>& fails) {
  const int n = s.dimension();
  const int N = s.max_order();

  // holomorphic type
  auto holo = is_holomorphic_type(s);
  {
    Stage st = make("holomorphic_type", holo.is_holomorphic_type ? StageStatus::Pass : StageStatus::Fail, "");
    st.samples = static_cast<long long>(s.size());
    if (holo.is_holomorphic_type) {
      st.summary = "every stored term is holomorphic";
    } else {
      const auto& [key, c] = *holo.witness;
      st.summary = "term " + term_text(key) + " has a nonzero coefficient";
      Json w;
      w["holo"] = key.holo.entries();
      w["anti"] = key.anti.entries();
      w["coefficient"] = json_complex(c);
      st.data["witness"] = w;
      fails.push_back("the formal series is not of holomorphic type (witness " + term_text(key) + ")");
    }
    rep.stages.push_back(st);
    if (!holo.is_holomorphic_type) return skip_rest(rep, 1);
  }

  // chart family
  const int K = cfg.K > 0 ? std::min(cfg.K, N) : N;
  if (K < 2) throw PreconditionError("analysis needs a series of order >= 2");
  const auto family = chart_poly_family(s, K);
  {
    Stage st = make("chart_family", StageStatus::Pass, "");
    int worst_degree = -1;
    for (int k = 0; k <= K; ++k) worst_degree = std::max(worst_degree, family.polys[k].degree() - k);
    if (worst_degree > 0) throw NumericalError("chart polynomial exceeds its degree bound");
    st.summary = "P_0..P_" + std::to_string(K) + " in " + std::to_string(n - 1) + " chart variables";
    st.samples = K + 1;
    Json deg = Json::array();
    for (const auto& p : family.polys) deg.push_back(p.degree());
    st.data["degrees"] = deg;
    rep.stages.push_back(st);
  }

  // directional radius
  {
    rep.directions.resize(U.size());
    parallel_for(U.size(), [&](std::size_t i) {
      const Direction d = Direction::from_vector(U[i]);
      DirectionRow& row = rep.directions[i];
      row.direction = d.unit;
      row.chart = d.chart;
      if (d.chart) row.radius = radius_along(family, *d.chart, cfg.window).radius;
    });
    int excluded = 0;
    double least = std::numeric_limits<double>::infinity();
    for (const auto& row : rep.directions) {
      if (!row.radius) {
        ++excluded;
        continue;
      }
      least = std::min(least, *row.radius);
    }
    const int used = static_cast<int>(U.size()) - excluded;
    if (excluded)
      rep.warnings.push_back(std::to_string(excluded) + " direction(s) with |v_1| <= 1e-9 excluded from the chart");
    Stage st = make("directional_radius", used > 0 && least > 0 ? StageStatus::Pass : StageStatus::Fail, "");
    st.samples = used;
    st.data["K"] = K;
    st.data["window"] = cfg.window > 0 ? cfg.window : default_window(K);
    st.data["min_radius"] = json_number(used ? least : 0.0);
    st.data["excluded"] = excluded;
    if (used == 0) {
      st.summary = "no direction has a chart";
      fails.push_back("no direction of U has a chart");
    } else {
      st.summary = "smallest root-test radius " + fmt(least) + " over " + std::to_string(used) + " directions";
    }
    rep.stages.push_back(st);
  }

  // normality of U through an inscribed chart ball
  {
    Stage st = make("normality", StageStatus::Fail, "");
    st.samples = static_cast<long long>(U.size());
    if (U.size() < 100) {
      st.summary = "fewer than 100 directions; the capacity check needs at least 100";
      fails.push_back("normality of U not established (too few directions)");
    } else {
      const auto nr = normality_check(U, cfg.normality);
      st.tolerance = nr.resolution;
      st.data["decidable"] = nr.decidable;
      st.data["center"] = json_point(nr.center);
      st.data["radius"] = json_number(nr.radius);
      st.data["resolution"] = json_number(nr.resolution);
      st.data["chart_points"] = nr.chart_points;
      st.data["excluded"] = nr.excluded;
      st.data["probes"] = cfg.normality.probes;
      if (nr.decidable && nr.is_normal_sufficient) {
        st.status = StageStatus::Pass;
        st.summary = "chart image contains a ball of radius " + fmt(nr.radius) + ", so its capacity is positive";
      } else {
        st.summary = nr.note.empty() ? "no inscribed ball above the sampling resolution" : nr.note;
        fails.push_back("normality of U not established (" + st.summary + ")");
      }
    }
    rep.stages.push_back(st);
  }

  // certificate
  {
    const auto cert = build_certificate(s, cfg.r0, K, cfg.certificate_samples, cfg.certificate);
    rep.certificate = cert;
    Stage st = make("certificate", cert.accepted() ? StageStatus::Pass : StageStatus::Fail, "");
    st.samples = cert.boundary_points + cert.interior_points;
    st.tolerance = cert.margin;
    st.data["cauchy_ok"] = cert.cauchy_ok;
    st.data["block_ok"] = cert.block_ok;
    st.data["worst_cauchy_ratio"] = json_number(cert.worst_cauchy_ratio);
    st.data["worst_block_ratio"] = json_number(cert.worst_block_ratio);
    st.data["sampled_sup"] = json_number(cert.sampled_sup);
    st.data["check_points"] = cfg.certificate.check_points;
    if (cert.accepted()) {
      rep.ball_radius = *std::min_element(cert.r_prime.begin(), cert.r_prime.end());
      st.summary = "M = " + fmt(cert.M) + ", both checks pass";
    } else {
      st.summary = std::string("certificate refused: ") + (cert.cauchy_ok ? "" : "Cauchy bound fails ") +
                   (cert.block_ok ? "" : "block bound fails");
      fails.push_back(st.summary);
    }
    rep.stages.push_back(st);
  }
}

void conclude(AnalysisReport& rep, const std::vector<std::string>& fails, int N) {
  rep.success = fails.empty();
  for (const Stage& s : rep.stages)
    if (s.status == StageStatus::Fail) rep.success = false;
  if (rep.success) {
    rep.claim = "holomorphic on B^n(0;r)∪P_0(U) modulo Hartogs extension (out of scope), r = " +
                fmt(rep.ball_radius) + "; certified for the series truncated at order " + std::to_string(N) +
                " only";
  } else {
    std::string c;
    for (const auto& f : fails) c += (c.empty() ? "" : "; ") + f;
    rep.claim = c.empty() ? "a stage failed" : c;
  }
}

}  // namespace

const Stage* AnalysisReport::stage(const std::string& name) const {
  for (const Stage& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

void AnalysisReport::fill(Report& report) const {
  report.stages = stages;
  report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
  Json& r = report.result;
  r["hypotheses"] = Json::array({"(1) f admits a formal Taylor series at the origin",
                                 "(2) f is holomorphic on every disc of P_0(U)"});
  Json table = Json::array();
  for (const auto& row : directions) {
    Json j;
    j["direction"] = json_point(row.direction);
    j["chart"] = row.chart ? json_point(*row.chart) : Json(nullptr);
    j["R_estimate"] = row.radius ? json_number(*row.radius) : Json(nullptr);
    table.push_back(j);
  }
  r["directions"] = table;
  if (certificate) {
    Json c;
    c["M"] = json_number(certificate->M);
    c["r0"] = json_number(certificate->r0);
    Json rp = Json::array();
    for (double x : certificate->r_prime) rp.push_back(json_number(x));
    c["r_prime"] = rp;
    c["K"] = certificate->K_used;
    c["accepted"] = certificate->accepted();
    r["certificate"] = c;
  } else {
    r["certificate"] = nullptr;
  }
  r["claim"] = claim;
  r["note"] = "only the series at hand is analysed, to its truncation order";
  report.verdict = success ? "pass" : "fail";
}

AnalysisReport forelli_analyze(const Expr& f, int n, const std::vector<Point>& U, const AnalyzeConfig& cfg) {
  if (U.empty()) throw PreconditionError("analysis needs a nonempty direction set");
  if (f.arity() != n) throw DimensionMismatch("expression arity differs from n");
  AnalysisReport rep;
  std::vector<std::string> fails;

  // holomorphy along the rays lambda -> lambda u
  {
    const auto pencil = standard_pencil(n, U);
    rep.warnings.insert(rep.warnings.end(), pencil.warnings.begin(), pencil.warnings.end());
    const auto hc = check_holo_along_pencil(f, pencil, cfg.disc_radii, cfg.disc_tol, cfg.disc_modes);
    Stage st = make("disc_holomorphy", hc.pass ? StageStatus::Pass : StageStatus::Fail, "");
    st.tolerance = cfg.disc_tol;
    st.samples = static_cast<long long>(hc.discs.size());
    st.data["worst_residual"] = json_number(hc.worst);
    st.data["failed"] = hc.failed;
    st.data["errors"] = hc.errors;
    st.data["modes"] = cfg.disc_modes;
    Json radii = Json::array();
    for (double r : cfg.disc_radii) radii.push_back(r);
    st.data["radii"] = radii;
    st.summary = "worst disc residual " + fmt(hc.worst) + " over " + std::to_string(hc.discs.size()) + " discs";
    if (!hc.pass)
      fails.push_back("hypothesis (2) fails: " + std::to_string(hc.failed + hc.errors) +
                      " disc(s) with residual above " + fmt(cfg.disc_tol));
    rep.stages.push_back(st);
  }

  // formal jet
  const int N = cfg.jet.order;
  auto jet = extract_jet(f, n, cfg.jet);
  rep.jet = jet;
  {
    Stage st = make("jet", jet.verdict == JetVerdict::FullJet ? StageStatus::Pass : StageStatus::Fail, "");
    st.tolerance = jet.tol;
    st.samples = jet.evaluations;
    st.data["verdict"] = to_string(jet.verdict);
    st.data["order"] = N;
    st.data["max_consistent_order"] = jet.max_consistent_order;
    Json res = Json::array();
    for (double r : jet.per_order_residuals) res.push_back(json_number(r));
    st.data["per_order_residuals"] = res;
    Json sc = Json::array();
    for (double r : jet.scales) sc.push_back(r);
    st.data["scales"] = sc;
    st.data["shapes"] = jet.shape_count;
    st.data["grid"] = jet.grid;
    st.data["worst_condition"] = json_number(jet.worst_condition);
    const int m = jet.max_consistent_order;
    if (jet.verdict == JetVerdict::FullJet) {
      st.summary = "jet consistent to order " + std::to_string(N);
    } else {
      const std::size_t bad = static_cast<std::size_t>(m + 1);
      const double r = bad < jet.per_order_residuals.size() ? jet.per_order_residuals[bad] : 0.0;
      st.summary = (m < 0 ? std::string("no formal Taylor jet at order 0")
                          : "no formal Taylor jet beyond order " + std::to_string(m)) +
                   ": order " + std::to_string(m + 1) + " residual " + fmt(r) + " > " + fmt(jet.tol);
      fails.push_back("hypothesis (1) fails: " + st.summary);
    }
    rep.stages.push_back(st);
  }
  if (jet.verdict != JetVerdict::FullJet) {
    skip_rest(rep, 0);
  } else {
    run_series(rep, jet.series, U, cfg, fails);
  }
  conclude(rep, fails, N);
  return rep;
}

AnalysisReport forelli_analyze(const FormalSeries& s, const std::vector<Point>& U, const AnalyzeConfig& cfg) {
  if (U.empty()) throw PreconditionError("analysis needs a nonempty direction set");
  AnalysisReport rep;
  std::vector<std::string> fails;

  // the slice t -> S(t u) carries no tbar terms along any sampled ray
  {
    double worst = 0.0;
    std::vector<double> per(U.size(), 0.0);
    parallel_for(U.size(), [&](std::size_t i) {
      if (U[i].size() != s.dimension()) throw DimensionMismatch("direction has the wrong dimension");
      const auto sl = slice(s, U[i].normalized());
      for (int p = 0; p <= sl.max_order; ++p)
        for (int q = 1; p + q <= sl.max_order; ++q) per[i] = std::max(per[i], std::abs(sl.coefficient(p, q)));
    });
    for (double w : per) worst = std::max(worst, w);
    const bool ok = worst <= cfg.slice_tol;
    Stage st = make("slice_holomorphy", ok ? StageStatus::Pass : StageStatus::Fail,
                    "largest tbar coefficient " + fmt(worst) + " over " + std::to_string(U.size()) + " rays");
    st.tolerance = cfg.slice_tol;
    st.samples = static_cast<long long>(U.size());
    st.data["worst_coefficient"] = json_number(worst);
    if (!ok) fails.push_back("hypothesis (2) fails: some slice has a tbar term");
    rep.stages.push_back(st);
  }
  run_series(rep, s, U, cfg, fails);
  conclude(rep, fails, s.max_order());
  return rep;
}

}  // namespace forelli
