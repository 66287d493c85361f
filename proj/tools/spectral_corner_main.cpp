// spectral-corner: heat traces, zeta determinants and conformal anomalies of
// planar domains with corners.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral_corner/io.hpp"

namespace {

using namespace spectral;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command;
  std::string domain_path;
  std::string sigma;
  double u = 0.0;
  std::optional<double> t_min, t_max;
  int t_points = 25;
  std::optional<double> grid_h;
  bool richardson = false;
  std::optional<std::size_t> eigs;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string out = "-";
  std::string format;
  std::vector<double> s_values;
  std::vector<double> alphas{3.0}, epss{1.0}, ts{0.1};
  std::size_t samples = 100000;
  int steps = 64;

  Json to_json() const {
    Json j{{"command", command}, {"u", u}, {"t_points", t_points}, {"richardson", richardson},
           {"seed", seed}, {"format", format}};
    if (!sigma.empty()) j["sigma"] = sigma;
    if (t_min) j["t_min"] = *t_min;
    if (t_max) j["t_max"] = *t_max;
    if (grid_h) j["grid_h"] = *grid_h;
    if (eigs) j["eigs"] = *eigs;
    if (tol) j["tol"] = *tol;
    if (command == "zeta") j["s"] = s_values;
    if (command == "wedge") {
      j["alpha"] = alphas;
      j["eps"] = epss;
      j["t"] = ts;
    }
    if (command == "mc") {
      j["samples"] = samples;
      j["steps"] = steps;
    }
    return j;
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw InvalidInput("cli.output", "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool to_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
};

// Everything a command needs to know about its inputs.
struct Context {
  RunConfig config;
  std::optional<DomainSpec> spec;
  Json inputs;
  std::string hash;

  const Domain& domain() const { return spec->domain; }

  ScalarField sigma() const {
    if (!config.sigma.empty()) return ScalarField::parse(config.sigma);
    return spec && spec->sigma ? *spec->sigma : ScalarField();
  }
  MetricSpec metric() const { return {sigma(), config.u}; }

  bool discrete() const {
    const Domain& d = domain();
    if (config.grid_h) return true;
    if (d.kind() == DomainKind::kPolygon || d.has_slits()) return true;
    return config.u != 0.0 && !(sigma().is_constant() && sigma().constant_value() == 0.0);
  }

  std::string format(const std::string& fallback) const {
    return config.format.empty() ? fallback : config.format;
  }

  Json envelope(Json result) const {
    return {{"tool", "spectral-corner"},
            {"version", tool_version()},
            {"input_hash", hash},
            {"inputs", inputs},
            {"result", std::move(result)}};
  }

  void csv_header(std::ostream& out) const {
    out << "# spectral-corner " << tool_version() << " input_hash " << hash << "\n";
  }

  void write_json(Output& out, Json result) const {
    out.stream() << envelope(std::move(result)).dump(2) << "\n";
  }
};

double grid_h(const Context& c) { return c.config.grid_h.value_or(1.0 / 64); }

std::vector<double> grid_pair(const Context& c) {
  const double h = grid_h(c);
  if (c.config.richardson) return {h, h / 2};
  return {h};
}

Spectrum fdm_spectrum(const Context& c, double h, double t_min) {
  const MetricSpec metric = c.metric();
  const DiscreteOperator op = assemble_fdm(c.domain(), metric, metric.u, h);
  return discrete_spectrum(op, c.config.eigs ? *c.config.eigs : eigenpairs_for(op, t_min));
}

// Eigenvalue count large enough that truncation is invisible at t_min.
Spectrum analytic_for(const Context& c, double t_min) {
  if (c.config.eigs) return analytic_spectrum(c.domain(), *c.config.eigs);
  if (c.domain().kind() == DomainKind::kRectangle) return analytic_spectrum(c.domain(), 1000);
  return analytic_spectrum_below(c.domain(), kTailThreshold / t_min);
}

// Default window: [1e-4, 1e-1] for exact spectra; grids start at 1e-2 and
// span the 1.5 decades a fit needs.
std::vector<double> window(const Context& c) {
  const double lo = c.config.t_min.value_or(c.discrete() ? 1e-2 : 1e-4);
  const double hi = c.config.t_max.value_or(c.discrete() ? lo * std::pow(10.0, 1.5) : 1e-1);
  if (!(lo > 0) || !(hi > lo) || c.config.t_points < 2) {
    throw InvalidInput("cli.window", "need 0 < t-min < t-max and at least two points");
  }
  return log_spaced(lo, hi, c.config.t_points);
}

HeatTraceCurve curve_for(const Context& c, const std::vector<double>& ts) {
  const double t_min = ts.front();
  if (!c.discrete()) return trace_curve(analytic_for(c, t_min), ts);
  const auto hs = grid_pair(c);
  std::vector<HeatTraceCurve> curves;
  for (double h : hs) curves.push_back(trace_curve(fdm_spectrum(c, h, t_min), ts));
  return curves.size() == 2 ? richardson(curves[0], curves[1]) : curves[0];
}

struct ZetaSource {
  std::unique_ptr<TraceProvider> trace;
  ExpansionCoefficients coefficients;
  double default_tol = 1e-6;
};

ZetaSource zeta_source(const Context& c) {
  ZetaSource z;
  const Domain& d = c.domain();
  if (!c.discrete()) {
    if (d.kind() == DomainKind::kRectangle) {
      auto r = std::make_unique<RectangleTrace>(d.width(), d.height());
      z.coefficients = r->coefficients();
      z.trace = std::move(r);
    } else {
      const double lambda_max = c.config.eigs ? 0.0 : 1e6;
      Spectrum s = lambda_max > 0 ? analytic_spectrum_below(d, lambda_max)
                                  : analytic_spectrum(d, *c.config.eigs);
      z.trace = std::make_unique<SpectrumTrace>(std::move(s));
      z.coefficients = flat_coefficients(d);
    }
    return z;
  }
  const double floor = c.config.t_min.value_or(1e-2);
  const auto hs = grid_pair(c);
  z.coefficients = geometric_coefficients(d, c.metric());
  z.default_tol = 1e-2;
  if (hs.size() == 2) {
    z.trace = std::make_unique<RichardsonTrace>(fdm_spectrum(c, hs[0], floor),
                                                fdm_spectrum(c, hs[1], floor), floor);
  } else {
    z.trace = std::make_unique<SpectrumTrace>(fdm_spectrum(c, hs[0], floor), floor);
  }
  return z;
}

ZetaOptions zeta_options(const Context& c, const ZetaSource& z) {
  ZetaOptions o;
  o.tol = c.config.tol.value_or(z.default_tol);
  if (c.discrete()) o.model_span = 5.0;
  return o;
}

// ---------------------------------------------------------------------------

void run_spectrum(const Context& c) {
  const double t_min = c.config.t_min.value_or(c.discrete() ? 1e-2 : 1e-3);
  const Spectrum s = c.discrete() ? fdm_spectrum(c, grid_h(c), t_min) : analytic_for(c, t_min);
  Output out(c.config.out);
  if (c.format("csv") == "csv") {
    c.csv_header(out.stream());
    write_csv(s, out.stream());
    return;
  }
  const bool exact = s.provenance == Spectrum::Provenance::kAnalytic;
  Json values = Json::array();
  for (double l : s.eigenvalues) values.push_back(measured(l, exact ? 0.0 : 1e-9 * std::max(1.0, l)));
  Json j{{"label", s.label},
         {"provenance", exact ? "analytic" : "discrete"},
         {"count", s.size()},
         {"completeness", measured(s.complete() ? -1.0 : s.completeness, 0.0)},
         {"volume", measured(s.volume, 0.0)},
         {"boundary_length", measured(s.boundary_length, 0.0)},
         {"eigenvalues", values}};
  if (!exact) {
    j["h"] = s.h;
    j["nodes"] = s.nodes;
  }
  c.write_json(out, j);
}

void run_trace(const Context& c) {
  const HeatTraceCurve curve = curve_for(c, window(c));
  Output out(c.config.out);
  if (c.format("csv") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "t,value,error\n";
    for (const auto& p : curve.samples) o << p.t << ',' << p.value << ',' << p.error << '\n';
    return;
  }
  Json samples = Json::array();
  for (const auto& p : curve.samples) samples.push_back({{"t", p.t}, {"trace", measured(p.value, p.error)}});
  c.write_json(out, {{"label", curve.label}, {"source", to_string(curve.source)}, {"samples", samples}});
}

void run_fit(const Context& c) {
  const HeatTraceCurve curve = curve_for(c, window(c));
  const ExpansionFit fit = fit_expansion(curve, FitMode::kFitAll);
  Output out(c.config.out);
  if (c.format("json") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "coefficient,value,error,ci_lo,ci_hi\n";
    auto row = [&o](const char* name, double v, const Interval& ci) {
      o << name << ',' << v << ',' << 0.5 * (ci.hi - ci.lo) << ',' << ci.lo << ',' << ci.hi << '\n';
    };
    row("a_m1", fit.a_m1, fit.a_m1_ci);
    row("a_mhalf", fit.a_mhalf, fit.a_mhalf_ci);
    row("a0", fit.a0, fit.a0_ci);
    return;
  }
  c.write_json(out, {{"label", curve.label}, {"fit", to_json(fit)}});
}

void run_compare(const Context& c) {
  const HeatTraceCurve curve = curve_for(c, window(c));
  const ExpansionComparison cmp =
      compare_expansion(c.domain(), c.metric(), ScalarField::constant(1.0), curve);
  Output out(c.config.out);
  if (c.format("json") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "coefficient,predicted,fitted,abs_gap,rel_gap,tolerance,pass\n";
    for (const auto& r : cmp.rows) {
      o << r.name << ',' << r.predicted << ',' << r.fitted << ',' << r.abs_gap << ',' << r.rel_gap
        << ',' << r.tolerance << ',' << (r.pass ? "true" : "false") << '\n';
    }
    return;
  }
  c.write_json(out, {{"label", curve.label}, {"comparison", to_json(cmp)}});
}

void run_zeta(const Context& c) {
  const ZetaSource z = zeta_source(c);
  const ZetaOptions options = zeta_options(c, z);
  std::vector<ZetaSample> samples;
  for (double s : c.config.s_values) samples.push_back(zeta_continued(*z.trace, z.coefficients, s, options));
  Output out(c.config.out);
  if (c.format("json") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "s,zeta,error\n";
    for (const auto& s : samples) o << s.s << ',' << s.value << ',' << s.error << '\n';
    return;
  }
  Json rows = Json::array();
  for (const auto& s : samples) rows.push_back(to_json(s));
  c.write_json(out, {{"provider", z.trace->label()},
                     {"zeta0", measured(z.coefficients.a0, z.coefficients.error)},
                     {"samples", rows}});
}

void run_zdet(const Context& c) {
  const ZetaSource z = zeta_source(c);
  const ZetaEvaluation e = zeta_prime_at_zero(*z.trace, z.coefficients, zeta_options(c, z));
  Output out(c.config.out);
  if (c.format("json") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "quantity,value,error\n";
    o << "zeta0,"  << e.zeta0 << ",0\n";
    o << "zeta_prime0," << e.zeta_prime0 << ',' << e.budget.total() << '\n';
    o << "zdet," << e.zdet << ',' << e.zdet * e.budget.total() << '\n';
    return;
  }
  Json j = to_json(e);
  j["provider"] = z.trace->label();
  c.write_json(out, j);
}

void run_anomaly(const Context& c) {
  AnomalyConfig config;
  config.h = {grid_h(c), grid_h(c) / 2};
  config.u = c.config.u;
  if (c.config.t_min) config.floor = *c.config.t_min;
  if (c.config.tol) config.tol_relative = config.tol_differentiated = *c.config.tol;
  const AnomalyReport report = pa_verify(c.domain(), c.sigma(), config);
  Output out(c.config.out);
  if (out.to_file()) print_table(std::cout, report);
  if (c.format("json") == "csv") {
    std::ostream& o = out.stream();
    c.csv_header(o);
    o.precision(17);
    o << "form,term,value,error\n";
    for (const AnomalyCheck* k : {&report.integrated, report.differentiated ? &*report.differentiated : nullptr}) {
      if (!k) continue;
      const std::string f = to_string(k->form);
      const AnomalyBreakdown& b = k->breakdown;
      o << f << ",dirichlet," << b.dirichlet << ',' << b.error << '\n';
      o << f << ",curvature," << b.curvature << ',' << b.error << '\n';
      o << f << ",boundary_curvature," << b.boundary_curvature << ',' << b.error << '\n';
      o << f << ",normal_derivative," << b.normal_derivative << ',' << b.error << '\n';
      for (std::size_t i = 0; i < b.corners.size(); ++i) o << f << ",corner" << i << ',' << b.corners[i] << ",0\n";
      o << f << ",rhs," << k->rhs << ',' << b.error << '\n';
      o << f << ",lhs," << k->lhs << ',' << (k->lhs_check ? std::abs(k->lhs - *k->lhs_check) : 0.0) << '\n';
    }
    return;
  }
  if (!out.to_file() && c.format("table") == "table") {
    print_table(std::cout, report);
    return;
  }
  c.write_json(out, to_json(report));
}

void run_wedge(const Context& c) {
  std::vector<WedgeBallQuery> queries;
  for (double a : c.config.alphas)
    for (double e : c.config.epss)
      for (double t : c.config.ts) queries.push_back({a, e, t});
  const auto rows = wedge_table(queries);
  Output out(c.config.out);
  if (c.format("csv") == "csv") {
    c.csv_header(out.stream());
    write_wedge_csv(out.stream(), rows);
    return;
  }
  Json j = Json::array();
  for (const auto& r : rows) j.push_back(to_json(r));
  c.write_json(out, {{"rows", j}});
}

void run_mc(const Context& c) {
  std::vector<double> ts;
  if (c.config.t_min && c.config.t_max) {
    ts = log_spaced(*c.config.t_min, *c.config.t_max, c.config.t_points);
  } else {
    ts = c.config.ts;
  }
  std::vector<BridgeEstimate> rows;
  for (double t : ts) rows.push_back(bridge_trace_estimate(c.domain(), t, c.config.samples, c.config.steps, c.config.seed));
  Output out(c.config.out);
  if (c.format("csv") == "csv") {
    c.csv_header(out.stream());
    write_csv(out.stream(), rows);
    return;
  }
  Json j = Json::array();
  for (const auto& r : rows) j.push_back(to_json(r));
  c.write_json(out, {{"rows", j}});
}

void fail(const Error& e, int code) {
  std::cerr << error_json(e).dump(2) << "\n";
  std::exit(code);
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Heat traces, zeta-regularized determinants and conformal anomalies of planar "
               "domains with corners"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  auto common = [&cfg](CLI::App* sub, bool needs_domain) {
    auto* d = sub->add_option("--domain", cfg.domain_path, "domain JSON document");
    if (needs_domain) d->required()->check(CLI::ExistingFile);
    sub->add_option("--sigma", cfg.sigma, "conformal factor expression in x, y (overrides the document)");
    sub->add_option("--u", cfg.u, "metric parameter: g = exp(2 u sigma) g0");
    sub->add_option("--t-min", cfg.t_min, "smallest t (fit window, trace floor)")->check(CLI::PositiveNumber);
    sub->add_option("--t-max", cfg.t_max, "largest t")->check(CLI::PositiveNumber);
    sub->add_option("--t-points", cfg.t_points, "log-spaced samples")->check(CLI::Range(2, 100000));
    sub->add_option("--grid-h", cfg.grid_h, "finite-difference spacing (forces the grid route)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--richardson", cfg.richardson, "combine grids h and h/2");
    sub->add_option("--eigs", cfg.eigs, "number of eigenvalues")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--tol", cfg.tol, "tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "output file, - for stdout");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json", "table"}));
  };

  struct Command {
    const char* name;
    const char* help;
    bool needs_domain;
    void (*run)(const Context&);
  };
  const Command commands[] = {
      {"spectrum", "eigenvalues (analytic or finite differences)", true, run_spectrum},
      {"trace", "heat trace over a t window", true, run_trace},
      {"fit", "fit the short-time expansion", true, run_fit},
      {"compare", "fitted against geometric coefficients", true, run_compare},
      {"zeta", "spectral zeta function at --s values", true, run_zeta},
      {"zdet", "zeta'(0) and the determinant with an error budget", true, run_zdet},
      {"anomaly", "check the conformal anomaly formula for --sigma", true, run_anomaly},
      {"wedge", "ball-restricted wedge traces and the remainder bound", false, run_wedge},
      {"mc", "Brownian-bridge Monte Carlo heat trace", true, run_mc},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    common(sub, cmd.needs_domain);
    subs.emplace_back(sub, &cmd);
  }
  subs[4].first->add_option("--s", cfg.s_values, "evaluation points")->required();
  CLI::App* wedge = subs[7].first;
  wedge->add_option("--alpha", cfg.alphas, "opening angles in units of pi");
  wedge->add_option("--eps", cfg.epss, "ball radii");
  wedge->add_option("--t", cfg.ts, "times");
  CLI::App* mc = subs[8].first;
  mc->add_option("--t", cfg.ts, "times (unless --t-min/--t-max are given)");
  mc->add_option("--samples", cfg.samples, "start points")->check(CLI::PositiveNumber);
  mc->add_option("--steps", cfg.steps, "bridge steps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail(InvalidInput("cli.arguments", e.what()), kExitInvalid);
  }

  try {
    Context ctx;
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      cfg.command = cmd->name;
      ctx.config = cfg;
      Json domain_doc = nullptr;
      if (!cfg.domain_path.empty()) {
        ctx.spec = load_domain_spec(cfg.domain_path);
        domain_doc = ctx.spec->source;
      }
      ctx.inputs = {{"domain", domain_doc}, {"options", cfg.to_json()}};
      ctx.hash = input_hash(ctx.inputs);
      cmd->run(ctx);
    }
  } catch (const InvalidInput& e) {
    fail(e, kExitInvalid);
  } catch (const NumericalError& e) {
    fail(e, kExitNumerical);
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump(2) << "\n";
    return 1;
  }
  return 0;
}
