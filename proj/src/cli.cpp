#include "forelli/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "forelli/analyze.hpp"
#include "forelli/capacity.hpp"
#include "forelli/directions.hpp"
#include "forelli/pencil.hpp"
#include "forelli/psh.hpp"

namespace forelli {

namespace {

// Defaults shared by every subcommand; README lists the same table.
struct Options {
  std::string expr;
  std::string series;
  std::string pencil;
  int n = 0;  // 0: inferred from the expression
  int order = 16;
  int K = 200;
  int window = 0;
  double r0 = 0.5;
  std::string directions = "sphere";
  int count = 200;
  std::string out;
  bool json = false;
  bool timings = false;
  std::uint64_t seed = 42;
  double tol = 0.0;  // 0: the subcommand's own default
  double rho_max = 0.0;
  int grid = 64;
  std::string set;
  int m = 128;
  std::string method = "transfinite";
  std::string v0 = "1 0";
  double eps = 0.3;
  std::string r = "1";
  bool classify = false;
  std::string csv;
  std::string family = "power";
  std::string region = "-1 1 -1 1";
  int l_max = 10;
  std::string w;
  int degree = 32;
  int trials = 200;
};

struct Outcome {
  Report report;
  int code = kExitPass;
};

int infer_dimension(const std::string& text) {
  int n = 1;
  static const std::regex var(R"(\bz([0-9]+)\b)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), var); it != std::sregex_iterator(); ++it)
    n = std::max(n, std::stoi((*it)[1]));
  return n;
}

int dimension(const Options& o) { return o.n > 0 ? o.n : infer_dimension(o.expr); }

std::vector<double> parse_reals(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("expected a real number, got '" + tok + "'", 1, 1);
    }
  }
  return v;
}

Point parse_point(const std::string& text) {
  std::istringstream in(text);
  std::vector<Complex> v;
  std::string tok;
  while (in >> tok) v.push_back(parse_complex(tok));
  if (v.empty()) throw ParseError("expected at least one coordinate", 1, 1);
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) p[k] = v[k];
  return p;
}

Json echo(const Options& o, std::initializer_list<const char*> keys) {
  Json all;
  all["expr"] = o.expr;
  all["series"] = o.series;
  all["pencil"] = o.pencil;
  all["n"] = o.n;
  all["order"] = o.order;
  all["K"] = o.K;
  all["window"] = o.window;
  all["r0"] = o.r0;
  all["directions"] = o.directions;
  all["count"] = o.count;
  all["seed"] = o.seed;
  all["tol"] = o.tol > 0 ? Json(o.tol) : Json(nullptr);
  all["rho_max"] = o.rho_max > 0 ? Json(o.rho_max) : Json(nullptr);
  all["grid"] = o.grid;
  all["set"] = o.set;
  all["m"] = o.m;
  all["method"] = o.method;
  all["v0"] = o.v0;
  all["eps"] = o.eps;
  all["r"] = o.r;
  all["classify"] = o.classify;
  all["family"] = o.family;
  all["region"] = o.region;
  all["l_max"] = o.l_max;
  all["w"] = o.w;
  all["degree"] = o.degree;
  all["trials"] = o.trials;
  Json j;
  for (const char* k : keys) j[k] = all[k];
  return j;
}

JetConfig jet_config(const Options& o) {
  JetConfig cfg;
  cfg.order = o.order;
  if (o.tol > 0) cfg.tol = o.tol;
  if (o.rho_max > 0) cfg.radii.rho_max = o.rho_max;
  return cfg;
}

Json jet_json(const JetResult& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["max_consistent_order"] = r.max_consistent_order;
  Json res = Json::array();
  for (double x : r.per_order_residuals) res.push_back(json_number(x));
  j["per_order_residuals"] = res;
  Json sc = Json::array();
  for (double x : r.scales) sc.push_back(x);
  j["scales"] = sc;
  j["shapes"] = r.shape_count;
  j["grid"] = r.grid;
  j["tol"] = r.tol;
  j["evaluations"] = r.evaluations;
  j["worst_condition"] = json_number(r.worst_condition);
  return j;
}

Json series_json(const FormalSeries& s) {
  Json j;
  j["dimension"] = s.dimension();
  j["max_order"] = s.max_order();
  Json terms = Json::array();
  for (const auto& [k, c] : s.terms()) {
    Json t;
    t["holo"] = k.holo.entries();
    t["anti"] = k.anti.entries();
    t["coefficient"] = json_complex(c);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

// The series given by --series, or the jet of --expr; the jet stage is
// recorded in the report.
FormalSeries series_input(const Options& o, Report& rep, bool& ok) {
  ok = true;
  if (!o.series.empty()) {
    if (!o.expr.empty()) throw PreconditionError("give either --expr or --series, not both");
    return read_series_file(o.series);
  }
  if (o.expr.empty()) throw PreconditionError("an input is required: --expr or --series");
  const int n = dimension(o);
  const auto jet = extract_jet(Expr::parse(o.expr, n), n, jet_config(o));
  Stage st;
  st.name = "jet";
  st.status = jet.verdict == JetVerdict::FullJet ? StageStatus::Pass : StageStatus::Fail;
  st.summary = to_string(jet.verdict) + " to order " + std::to_string(jet.max_consistent_order);
  st.tolerance = jet.tol;
  st.samples = jet.evaluations;
  st.data = jet_json(jet);
  rep.stages.push_back(st);
  ok = jet.verdict == JetVerdict::FullJet;
  return jet.series;
}

Outcome cmd_analyze(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"expr", "series", "n", "order", "K", "window", "r0", "directions", "count", "seed", "tol",
                        "rho_max"});
  AnalyzeConfig cfg;
  cfg.jet = jet_config(o);
  cfg.K = o.K;
  cfg.window = o.window;
  cfg.r0 = o.r0;
  cfg.certificate.seed = o.seed;
  cfg.normality.seed = o.seed;
  AnalysisReport an;
  if (!o.series.empty()) {
    if (!o.expr.empty()) throw PreconditionError("give either --expr or --series, not both");
    const auto s = read_series_file(o.series);
    an = forelli_analyze(s, parse_directions(o.directions, s.dimension(), o.count, o.seed), cfg);
  } else {
    if (o.expr.empty()) throw PreconditionError("an input is required: --expr or --series");
    const int n = dimension(o);
    an = forelli_analyze(Expr::parse(o.expr, n), n, parse_directions(o.directions, n, o.count, o.seed), cfg);
  }
  an.fill(rep);
  res.code = an.success ? kExitPass : kExitFail;
  return res;
}

Outcome cmd_jet(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"expr", "n", "order", "tol", "rho_max"});
  if (o.expr.empty()) throw PreconditionError("jet needs --expr");
  bool ok = true;
  const auto s = series_input(o, rep, ok);
  rep.result["series"] = series_json(s);
  rep.result["text"] = to_text(s);
  res.code = ok ? kExitPass : kExitFail;
  return res;
}

Outcome cmd_slice(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"expr", "series", "n", "order", "K", "window", "directions", "count", "seed"});
  bool ok = true;
  const auto s = series_input(o, rep, ok);
  if (!ok) {
    res.code = kExitFail;
    return res;
  }
  const auto holo = is_holomorphic_type(s);
  const auto U = parse_directions(o.directions, s.dimension(), o.count, o.seed);
  const int K = std::min(o.K, s.max_order());
  Json table = Json::array();
  std::optional<SlicePolyFamily> family;
  if (holo.is_holomorphic_type && K >= 2) family = chart_poly_family(s, K);
  double worst_tbar = 0.0;
  for (const Point& u : U) {
    const Direction d = Direction::from_vector(u);
    const auto sl = slice(s, d.unit);
    double tbar = 0.0;
    for (int p = 0; p <= sl.max_order; ++p)
      for (int q = 1; p + q <= sl.max_order; ++q) tbar = std::max(tbar, std::abs(sl.coefficient(p, q)));
    worst_tbar = std::max(worst_tbar, tbar);
    Json row;
    row["direction"] = json_point(d.unit);
    row["chart"] = d.chart ? json_point(*d.chart) : Json(nullptr);
    row["tbar_max"] = json_number(tbar);
    row["R_estimate"] = family && d.chart ? json_number(radius_along(*family, *d.chart, o.window).radius) : Json(nullptr);
    table.push_back(row);
  }
  Stage st;
  st.name = "slices";
  st.status = StageStatus::Pass;
  st.samples = static_cast<long long>(U.size());
  st.summary = "largest tbar coefficient " + format_double(worst_tbar);
  if (!holo.is_holomorphic_type) rep.warnings.push_back("series is not of holomorphic type; radii omitted");
  rep.stages.push_back(st);
  rep.result["K"] = K;
  rep.result["window"] = o.window > 0 ? o.window : (K >= 2 ? default_window(K) : 0);
  rep.result["directions"] = table;
  return res;
}

Outcome cmd_certify(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"expr", "series", "n", "order", "K", "r0", "seed"});
  bool ok = true;
  const auto s = series_input(o, rep, ok);
  if (!ok) {
    res.code = kExitFail;
    return res;
  }
  const auto holo = is_holomorphic_type(s);
  if (!holo.is_holomorphic_type) throw PreconditionError("certification needs a series of holomorphic type");
  CertificateConfig cfg;
  cfg.seed = o.seed;
  const auto c = build_certificate(s, o.r0, std::min(o.K, s.max_order()), 20, cfg);
  Stage st;
  st.name = "certificate";
  st.status = c.accepted() ? StageStatus::Pass : StageStatus::Fail;
  st.summary = c.accepted() ? "both checks pass" : "certificate refused";
  st.tolerance = c.margin;
  st.samples = c.boundary_points + c.interior_points;
  st.data["cauchy_ok"] = c.cauchy_ok;
  st.data["block_ok"] = c.block_ok;
  st.data["worst_cauchy_ratio"] = json_number(c.worst_cauchy_ratio);
  st.data["worst_block_ratio"] = json_number(c.worst_block_ratio);
  rep.stages.push_back(st);
  Json cert;
  cert["M"] = json_number(c.M);
  cert["r0"] = c.r0;
  Json rp = Json::array();
  for (double x : c.r_prime) rp.push_back(json_number(x));
  cert["r_prime"] = rp;
  cert["K"] = c.K_used;
  cert["sampled_sup"] = json_number(c.sampled_sup);
  rep.result["certificate"] = cert;
  res.code = c.accepted() ? kExitPass : kExitFail;
  return res;
}

Json estimate_json(const CapacityEstimate& e) {
  Json j;
  j["value"] = json_number(e.value);
  j["method"] = to_string(e.method);
  j["points_used"] = e.points_used;
  j["closed_form"] = e.closed_form ? json_number(*e.closed_form) : Json(nullptr);
  Json d = Json::object();
  for (const auto& [k, v] : e.diagnostics) d[k] = json_number(v);
  j["diagnostics"] = d;
  j["notes"] = e.notes;
  return j;
}

Outcome cmd_capacity(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"set", "m", "method", "directions", "count", "seed", "degree", "trials"});
  Stage st;
  st.status = StageStatus::Pass;
  if (o.method == "normality") {
    // inscribed chart ball of a direction set
    const int n = o.n > 0 ? o.n : 2;
    NormalityConfig cfg;
    cfg.seed = o.seed;
    const auto nr = normality_check(parse_directions(o.directions, n, o.count, o.seed), cfg);
    st.name = "normality";
    st.status = nr.decidable && nr.is_normal_sufficient ? StageStatus::Pass : StageStatus::Fail;
    st.summary = nr.note.empty() ? "inscribed ball radius " + format_double(nr.radius) : nr.note;
    st.tolerance = nr.resolution;
    st.samples = nr.chart_points;
    rep.result["center"] = json_point(nr.center);
    rep.result["radius"] = json_number(nr.radius);
    rep.result["resolution"] = json_number(nr.resolution);
    rep.result["excluded"] = nr.excluded;
  } else if (o.method == "siciak") {
    // "ball <r> [d]": a sampled closed ball in C^d
    std::istringstream in(o.set);
    std::string kind;
    in >> kind;
    if (kind != "ball") throw ParseError("siciak method expects --set \"ball <r> [d]\"", 1, 1);
    double r = 0;
    int d = 1;
    if (!(in >> r) || r <= 0) throw ParseError("ball needs a positive radius", 1, 6);
    if (!(in >> d)) d = 1;
    SiciakConfig cfg;
    cfg.degree = o.degree;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    const auto e = cap_siciak(ball_sample(Point::Zero(d), r, std::max(o.m, 64), o.seed), cfg, r);
    st.name = "siciak";
    st.summary = "extremal-function capacity " + format_double(e.value);
    st.samples = e.points_used;
    rep.result["estimate"] = estimate_json(e);
  } else if (o.method == "transfinite") {
    if (o.set.empty()) throw PreconditionError("capacity needs --set");
    const auto e = cap1d_transfinite(CompactSet1D::parse(o.set), o.m);
    st.name = "transfinite";
    st.summary = "transfinite diameter estimate " + format_double(e.value);
    st.samples = e.points_used;
    rep.result["estimate"] = estimate_json(e);
  } else {
    throw PreconditionError("unknown capacity method '" + o.method + "'");
  }
  rep.stages.push_back(st);
  res.code = st.status == StageStatus::Pass ? kExitPass : kExitFail;
  return res;
}

PshFamily psh_input(const Options& o, Report& rep) {
  if (!o.expr.empty() || !o.series.empty()) {
    bool ok = true;
    const auto s = series_input(o, rep, ok);
    if (!ok) throw PreconditionError("no full jet to build the family from");
    if (!is_holomorphic_type(s).is_holomorphic_type) throw PreconditionError("series is not of holomorphic type");
    return PshFamily{chart_poly_family(s, std::min(o.K, s.max_order()))};
  }
  // closed-form families P_k = c_k b^k
  if (o.family == "power") return scaled_power_family(o.K, [](int) { return 0.0; });
  if (o.family == "growing")
    return scaled_power_family(o.K, [](int k) { return k * std::log(std::max(k, 1)); });
  if (o.family == "shrinking")
    return scaled_power_family(o.K, [](int k) { return -k * std::log(std::max(k, 1)); });
  throw PreconditionError("unknown family '" + o.family + "' (power, growing, shrinking)");
}

Outcome cmd_psh(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"expr", "series", "n", "order", "K", "family", "r", "classify", "region", "grid"});
  const auto family = psh_input(o, rep);
  const int v = family.variables();
  if (v < 1) throw PreconditionError("the family needs at least one chart variable");
  const auto rv = parse_reals(o.r);
  Polyradius r(v);
  for (int k = 0; k < v; ++k) r[k] = rv.empty() ? 1.0 : rv[std::min<std::size_t>(k, rv.size() - 1)];
  if (o.classify) {
    TrichotomyConfig cfg;
    cfg.grid = std::max(16, std::min(o.grid, 64));
    const auto t = classify_trichotomy(family, r, cfg);
    Stage st;
    st.name = "trichotomy";
    st.status = StageStatus::Pass;
    st.summary = "case " + to_string(t.kind);
    st.samples = t.sampled;
    st.tolerance = cfg.threshold;
    st.data["alpha_r"] = json_number(t.alpha_r);
    st.data["tail_slope"] = json_number(t.tail_slope);
    st.data["window"] = t.window;
    st.data["grid"] = cfg.grid;
    rep.stages.push_back(st);
    Json avg = Json::array();
    for (double a : t.averages) avg.push_back(json_number(a));
    rep.result["averages"] = avg;
    rep.result["case"] = to_string(t.kind);
    rep.result["exceptional"] = json_points(t.exceptional);
  }
  if (!o.csv.empty()) {
    if (v != 1) throw PreconditionError("envelopes are drawn for one chart variable");
    const auto box = parse_reals(o.region);
    if (box.size() != 4) throw ParseError("--region needs x0 x1 y0 y1", 1, 1);
    GridRegion g{box[0], box[1], box[2], box[3], 41, 41};
    const auto field = upper_envelope(family, g);
    std::ofstream f(o.csv);
    if (!f) throw Error("cannot write " + o.csv);
    write_envelope_csv(f, field);
    Stage st;
    st.name = "envelope";
    st.status = StageStatus::Pass;
    st.summary = std::to_string(field.exceptional.size()) + " grid node(s) below the envelope by the gap";
    st.samples = static_cast<long long>(field.nodes.size());
    st.tolerance = field.gap;
    rep.stages.push_back(st);
    rep.result["csv"] = o.csv;
  }
  if (!o.classify && o.csv.empty()) rep.warnings.push_back("nothing requested: pass --classify or --csv");
  return res;
}

Expr field_expr(const Options& o, int n) {
  if (o.expr.empty()) throw PreconditionError("this subcommand needs --expr");
  return Expr::parse(o.expr, n);
}

PencilSpec pencil_input(const Options& o, Report& rep) {
  if (o.pencil.empty()) throw PreconditionError("this subcommand needs --pencil");
  auto p = load_pencil(o.pencil, o.seed);
  rep.warnings.insert(rep.warnings.end(), p.warnings.begin(), p.warnings.end());
  rep.result["pencil"] = {{"n", p.n}, {"kind", to_string(p.kind)}, {"directions", p.directions.size()}};
  return p;
}

Outcome cmd_pencil_check(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"pencil", "expr", "tol", "seed"});
  const auto p = pencil_input(o, rep);
  const auto v = validate_pencil(p);
  Stage a;
  a.name = "admissibility";
  a.status = v.ok() ? StageStatus::Pass : StageStatus::Fail;
  a.summary = v.ok() ? "base point, disc holomorphy and mesh injectivity pass" : "";
  for (const auto& pr : v.problems) a.summary += (a.summary.empty() ? "" : "; ") + pr;
  a.samples = v.mesh_points;
  a.data["base_error"] = json_number(v.base_error);
  a.data["worst_disc_residual"] = json_number(v.worst_disc_residual);
  a.data["injective_on_mesh"] = v.injective_on_mesh;
  rep.stages.push_back(a);
  if (!o.expr.empty()) {
    const double tol = o.tol > 0 ? o.tol : 1e-8;
    const auto h = check_holo_along_pencil(field_expr(o, p.n), p, {0.25, 0.5, 0.75}, tol);
    Stage st;
    st.name = "holomorphy_along_pencil";
    st.status = h.pass ? StageStatus::Pass : StageStatus::Fail;
    st.summary = "worst residual " + format_double(h.worst) + ", " + std::to_string(h.failed) + " failing disc(s)";
    st.tolerance = tol;
    st.samples = static_cast<long long>(h.discs.size());
    st.data["errors"] = h.errors;
    rep.stages.push_back(st);
  }
  res.code = rep.passed() ? kExitPass : kExitFail;
  return res;
}

Outcome cmd_subpencil(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"pencil", "expr", "tol", "l_max", "w", "count", "seed"});
  const auto p = pencil_input(o, rep);
  SubpencilConfig cfg;
  if (o.tol > 0) cfg.tol = o.tol;
  cfg.l_max = o.l_max;
  const auto sp = find_subpencil(field_expr(o, p.n), p, cfg);
  Stage st;
  st.name = "subpencil";
  st.status = sp.empty() ? StageStatus::Fail : StageStatus::Pass;
  st.summary = std::to_string(sp.V.size()) + " of " + std::to_string(p.directions.size()) +
               " directions, discs of radius 1/" + std::to_string(sp.m);
  st.tolerance = cfg.tol;
  st.samples = static_cast<long long>(p.directions.size());
  st.data["patches"] = sp.patches.size();
  st.data["diagnostics"] = sp.diagnostics;
  rep.stages.push_back(st);
  rep.result["V"] = sp.V;
  rep.result["m"] = sp.m;
  if (!o.w.empty() && !sp.empty()) {
    const auto W = parse_directions(o.w, p.n, 32, o.seed);
    const auto rr = standard_subpencil_radius(p, sp.V, W);
    Stage rs;
    rs.name = "standard_subpencil_radius";
    rs.status = rr.verified ? StageStatus::Pass : StageStatus::Fail;
    rs.summary = "r = " + format_double(rr.r);
    rs.samples = rr.mesh_points;
    rs.data["inversions"] = rr.inversions;
    rs.data["witness"] = rr.witness ? json_point(*rr.witness) : Json(nullptr);
    rep.stages.push_back(rs);
    rep.result["r"] = json_number(rr.r);
  }
  res.code = rep.passed() ? kExitPass : kExitFail;
  return res;
}

Outcome cmd_normalize(const Options& o) {
  Outcome res;
  Report& rep = res.report;
  rep.config = echo(o, {"pencil", "expr", "v0", "eps", "tol", "seed"});
  const auto p = pencil_input(o, rep);
  Stage st;
  st.name = "normalization";
  std::optional<KData> kd;
  try {
    kd = tilde_normalize(p, parse_point(o.v0), o.eps);
  } catch (const PreconditionError& e) {
    if (p.n != 2) throw;
    st.status = StageStatus::Fail;
    st.summary = e.what();
    rep.stages.push_back(st);
    res.code = kExitFail;
    return res;
  }
  st.status = StageStatus::Pass;
  st.summary = "k is holomorphic in z1, k(0, z2) = 0 and dk/dz1(0, z2) = z2";
  st.tolerance = 1e-6;
  st.data["holomorphy_residual"] = json_number(kd->holomorphy_residual);
  st.data["k0_error"] = json_number(kd->k0_error);
  st.data["derivative_error"] = json_number(kd->derivative_error);
  st.data["epsilon"] = kd->epsilon();
  rep.stages.push_back(st);
  if (!o.expr.empty()) {
    HgConfig cfg;
    if (o.tol > 0) cfg.tol_g = o.tol;
    const auto hg = compute_H_G(field_expr(o, p.n), *kd, cfg);
    Stage h;
    h.name = "H_G";
    h.status = hg.verdict == CrVerdict::Pass ? StageStatus::Pass : StageStatus::Fail;
    h.summary = to_string(hg.verdict) + (hg.message.empty() ? "" : ": " + hg.message);
    h.tolerance = cfg.tol_g;
    h.samples = static_cast<long long>(hg.z1.size());
    h.data["max_G"] = json_number(hg.max_G);
    h.data["min_H"] = json_number(hg.min_H);
    h.data["max_direct_cr"] = json_number(hg.max_direct_cr);
    rep.stages.push_back(h);
  }
  res.code = rep.passed() ? kExitPass : kExitFail;
  return res;
}

std::string summary(const Report& rep) {
  std::ostringstream os;
  os << "forelli-lab " << rep.command << "\n";
  for (const Stage& s : rep.stages) os << "  [" << to_string(s.status) << "] " << s.name << ": " << s.summary << "\n";
  for (const auto& w : rep.warnings) os << "  warning: " << w << "\n";
  if (rep.result.contains("claim")) os << "  claim: " << rep.result["claim"].get<std::string>() << "\n";
  if (rep.result.contains("estimate")) os << "  value: " << rep.result["estimate"]["value"].dump() << "\n";
  os << "verdict: " << rep.to_json()["verdict"].get<std::string>() << "\n";
  return os.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments on formal power series, capacities and pencils of discs", "forelli-lab"};
  app.require_subcommand(1);
  Options o;

  auto input = [&](CLI::App* c) {
    c->add_option("--expr", o.expr, "function of z1..zn");
    c->add_option("--series", o.series, "series file");
    c->add_option("--n", o.n, "dimension (default: largest zk in --expr)");
    c->add_option("--order", o.order, "jet order N")->check(CLI::Range(1, 200));
    c->add_option("--rho-max", o.rho_max, "largest sampling radius of the jet");
  };
  auto common = [&](CLI::App* c) {
    c->add_flag("--json", o.json, "print the full JSON report");
    c->add_option("--out", o.out, "also write the JSON report here");
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--tol", o.tol, "tolerance")->check(CLI::PositiveNumber);
    c->add_flag("--timings", o.timings, "record wall time (reports stop being reproducible)");
  };
  auto dirs = [&](CLI::App* c) {
    c->add_option("--directions", o.directions, "file, \"sphere [count]\" or \"cap theta c1 .. cn [count]\"");
    c->add_option("--count", o.count, "directions drawn by a preset")->check(CLI::Range(1, 100000));
  };

  std::map<CLI::App*, std::function<Outcome(const Options&)>> handlers;
  auto sub = [&](const char* name, const char* help, std::function<Outcome(const Options&)> h) {
    CLI::App* c = app.add_subcommand(name, help);
    common(c);
    handlers[c] = std::move(h);
    return c;
  };

  auto* an = sub("analyze", "full series pipeline with certificate", cmd_analyze);
  input(an);
  dirs(an);
  an->add_option("--K", o.K, "root-test length (capped at N)");
  an->add_option("--window", o.window, "root-test window (0: K/2)");
  an->add_option("--r0", o.r0, "chart radius of the certificate")->check(CLI::PositiveNumber);

  auto* jt = sub("jet", "formal Taylor jet of an expression", cmd_jet);
  input(jt);

  auto* sl = sub("slice", "slices and root-test radii along directions", cmd_slice);
  input(sl);
  dirs(sl);
  sl->add_option("--K", o.K, "root-test length");
  sl->add_option("--window", o.window, "root-test window");

  auto* ce = sub("certify", "polydisc convergence certificate", cmd_certify);
  input(ce);
  ce->add_option("--K", o.K, "largest order used");
  ce->add_option("--r0", o.r0, "chart radius")->check(CLI::PositiveNumber);

  auto* ca = sub("capacity", "capacity estimates", cmd_capacity);
  dirs(ca);
  ca->add_option("--set", o.set, "\"disc c r\", \"segment a b\", \"points ...\", \"cloud ...\" or \"ball r d\"");
  ca->add_option("--m", o.m, "number of points")->check(CLI::Range(1, 100000));
  ca->add_option("--method", o.method, "transfinite, siciak or normality");
  ca->add_option("--n", o.n, "dimension for --directions presets");
  ca->add_option("--degree", o.degree, "polynomial degree for siciak")->check(CLI::Range(1, 200));
  ca->add_option("--trials", o.trials, "random polynomials for siciak")->check(CLI::Range(2, 100000));

  auto* ps = sub("psh", "torus averages, trichotomy and envelopes", cmd_psh);
  input(ps);
  ps->add_option("--K", o.K, "family length");
  ps->add_option("--family", o.family, "power, growing or shrinking (without --expr/--series)");
  ps->add_option("--r", o.r, "polyradius entries");
  ps->add_flag("--classify", o.classify, "run the trichotomy");
  ps->add_option("--csv", o.csv, "write the envelope grid");
  ps->add_option("--region", o.region, "envelope box x0 x1 y0 y1");
  ps->add_option("--grid", o.grid, "torus nodes per variable")->check(CLI::Range(16, 256));

  auto* pc = sub("pencil-check", "pencil admissibility and holomorphy along its discs", cmd_pencil_check);
  pc->add_option("--pencil", o.pencil, "pencil file")->required();
  pc->add_option("--expr", o.expr, "function to check along the discs");

  auto* sp = sub("subpencil", "largest subpencil on which f satisfies the CR equations", cmd_subpencil);
  sp->add_option("--pencil", o.pencil, "pencil file")->required();
  sp->add_option("--expr", o.expr, "function")->required();
  sp->add_option("--l-max", o.l_max, "smallest disc radius is 1/l_max")->check(CLI::Range(1, 1000));
  sp->add_option("--w", o.w, "directions W for the standard-subpencil radius");

  auto* no = sub("normalize", "normalized pencil at v0 and the H, G test", cmd_normalize);
  no->add_option("--pencil", o.pencil, "pencil file")->required();
  no->add_option("--expr", o.expr, "function for H and G");
  no->add_option("--v0", o.v0, "direction, as complex tokens");
  no->add_option("--eps", o.eps, "chart radius epsilon")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const auto start = std::chrono::steady_clock::now();
    Outcome res = handlers.at(chosen)(o);
    res.report.command = chosen->get_name();
    if (o.timings)
      res.report.result["elapsed_ms"] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (res.report.verdict.empty()) res.report.verdict = res.code == kExitPass ? "pass" : "fail";
    const std::string text = res.report.dump();
    if (!o.out.empty()) {
      std::ofstream f(o.out, std::ios::binary);
      if (!f || !(f << text)) {
        err << "error: cannot write " << o.out << "\n";
        return kExitUsage;
      }
    }
    out << (o.json ? text : summary(res.report));
    return res.code;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const EvalError& e) {
    err << "evaluation failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace forelli
