#include "spectral_corner/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace spectral {

namespace {

const char* kStage = "io.domain";

double number(const Json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw InvalidInput(kStage, std::string("params.") + key + " must be a number");
  }
  return obj.at(key).get<double>();
}

double number_or(const Json& obj, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, key) : fallback;
}

Point point(const Json& p) {
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
    throw InvalidInput(kStage, "points are [x, y] pairs of numbers, got " + p.dump());
  }
  return {p[0].get<double>(), p[1].get<double>()};
}

Polyline polyline(const Json& line) {
  if (!line.is_array() || line.size() < 2) {
    throw InvalidInput(kStage, "a polyline needs at least two points");
  }
  Polyline out;
  for (const Json& p : line) out.push_back(point(p));
  return out;
}

Json interval(const Interval& i) { return Json::array({i.lo, i.hi}); }

// JSON has no NaN or infinity; they are written as null.
Json finite(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json breakdown(const AnomalyBreakdown& b) {
  return {{"dirichlet", b.dirichlet},
          {"curvature", b.curvature},
          {"boundary_curvature", b.boundary_curvature},
          {"normal_derivative", b.normal_derivative},
          {"corners", b.corners},
          {"corner_total", b.corner_total()},
          {"error", b.error}};
}

Json check(const AnomalyCheck& c) {
  Json j{{"form", to_string(c.form)},
         {"route", c.route},
         {"lhs", c.lhs},
         {"rhs", measured(c.rhs, c.breakdown.error)},
         {"gap", c.gap},
         {"relative_gap", c.rel_gap},
         {"tolerance", c.tolerance},
         {"tolerance_is_relative", c.relative},
         {"pass", c.pass},
         {"breakdown", breakdown(c.breakdown)},
         {"zeta_prime0", c.zeta_prime}};
  if (c.lhs_check) j["lhs_check_step"] = *c.lhs_check;
  return j;
}

}  // namespace

DomainSpec parse_domain_spec(const Json& doc) {
  if (!doc.is_object()) throw InvalidInput(kStage, "domain document must be a JSON object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw InvalidInput(kStage, "missing string field \"kind\"");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  const Json params = doc.value("params", Json::object());
  if (!params.is_object()) throw InvalidInput(kStage, "\"params\" must be an object");

  std::vector<Polyline> slits;
  if (doc.contains("slits")) {
    if (!doc.at("slits").is_array()) throw InvalidInput(kStage, "\"slits\" must be an array");
    for (const Json& line : doc.at("slits")) slits.push_back(polyline(line));
  }

  auto build = [&]() -> Domain {
    if (kind == "rectangle") return Domain::rectangle(number(params, "a"), number(params, "b"), slits);
    if (kind == "polygon" || kind == "slit-polygon") {
      if (!params.contains("vertices") || !params.at("vertices").is_array()) {
        throw InvalidInput(kStage, "polygon needs params.vertices");
      }
      std::vector<Point> v;
      for (const Json& p : params.at("vertices")) v.push_back(point(p));
      return Domain::polygon(std::move(v), slits);
    }
    if (!slits.empty()) throw InvalidInput(kStage, "slits are only supported on polygonal kinds");
    if (kind == "disk") return Domain::disk(number_or(params, "R", 1.0));
    if (kind == "sector") return Domain::sector(number(params, "alpha"), number_or(params, "R", 1.0));
    throw InvalidInput(kStage, "unknown kind \"" + kind + "\"");
  };

  DomainSpec spec{build(), std::nullopt, doc};
  if (doc.contains("sigma")) {
    const Json& s = doc.at("sigma");
    if (s.is_number()) {
      spec.sigma = ScalarField::constant(s.get<double>());
    } else if (s.is_string()) {
      spec.sigma = ScalarField::parse(s.get<std::string>());
    } else {
      throw InvalidInput(kStage, "\"sigma\" must be an expression string or a number");
    }
  }
  return spec;
}

DomainSpec load_domain_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(kStage, "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(kStage, path.string() + ": " + e.what());
  }
  return parse_domain_spec(doc);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string input_hash(const Json& doc) { return fnv1a_hex(doc.dump()); }

std::string tool_version() { return SPECTRAL_CORNER_VERSION; }

Json measured(double value, double error) { return {{"value", finite(value)}, {"error", finite(error)}}; }

Json to_json(const ExpansionCoefficients& c) {
  const auto& b = c.breakdown;
  return {{"a_m1", measured(c.a_m1, c.error)},
          {"a_mhalf", measured(c.a_mhalf, c.error)},
          {"a0", measured(c.a0, c.error)},
          {"breakdown",
           {{"area", b.area},
            {"perimeter", b.perimeter},
            {"interior_curvature", b.interior_curvature},
            {"boundary_curvature", b.boundary_curvature},
            {"normal_derivative", b.normal_derivative},
            {"corners", b.corners}}}};
}

Json to_json(const ExpansionFit& f) {
  static const char* modes[] = {"fit-all", "peel-known", "peel-all"};
  auto half_width = [](const Interval& i) { return 0.5 * (i.hi - i.lo); };
  return {{"mode", modes[static_cast<int>(f.mode)]},
          {"a_m1", measured(f.a_m1, half_width(f.a_m1_ci))},
          {"a_mhalf", measured(f.a_mhalf, half_width(f.a_mhalf_ci))},
          {"a0", measured(f.a0, half_width(f.a0_ci))},
          {"ci95", {{"a_m1", interval(f.a_m1_ci)}, {"a_mhalf", interval(f.a_mhalf_ci)}, {"a0", interval(f.a0_ci)}}},
          {"remainder", f.remainder},
          {"window", interval(f.window)},
          {"residual_rms", f.residual_norm},
          {"condition", f.condition},
          {"samples", f.samples}};
}

Json to_json(const ExpansionComparison& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"name", r.name},
                    {"predicted", r.predicted},
                    {"fitted", r.fitted},
                    {"abs_gap", r.abs_gap},
                    {"rel_gap", r.rel_gap},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass}});
  }
  return {{"predicted", to_json(c.predicted)},
          {"fit_all", to_json(c.fit_all)},
          {"peel_known", to_json(c.peeled)},
          {"rows", rows},
          {"pass", c.pass}};
}

Json to_json(const ZetaSample& z) { return {{"s", z.s}, {"zeta", measured(z.value, z.error)}}; }

Json to_json(const ZetaEvaluation& z) {
  Json samples = Json::array();
  for (const auto& s : z.samples) samples.push_back(to_json(s));
  const double err = z.budget.total();
  return {{"zeta0", measured(z.zeta0, 0.0)},
          {"zeta_prime0", measured(z.zeta_prime0, err)},
          {"zdet", measured(z.zdet, z.zdet * err)},
          {"budget",
           {{"trace", z.budget.trace},
            {"quadrature", z.budget.quadrature},
            {"model", z.budget.model},
            {"coefficient", z.budget.coefficient},
            {"total", err}}},
          {"floor", z.floor},
          {"remainder_model", z.model},
          {"samples", samples}};
}

Json to_json(const DerivativeIdentity& d) {
  return {{"lhs", d.lhs}, {"rhs", d.rhs}, {"residual", d.residual}};
}

Json to_json(const AnomalyReport& r) {
  Json j{{"domain", r.domain}, {"sigma", r.sigma}, {"integrated", check(r.integrated)}, {"pass", r.pass}};
  if (r.differentiated) j["differentiated"] = check(*r.differentiated);
  if (r.lemma) j["derivative_identity"] = to_json(*r.lemma);
  return j;
}

Json to_json(const BridgeEstimate& b) {
  return {{"t", b.t},
          {"trace", measured(b.estimate, b.standard_error)},
          {"samples", b.samples},
          {"inside", b.inside},
          {"survivors", b.survivors},
          {"steps", b.steps},
          {"seed", b.seed}};
}

Json to_json(const WedgeRow& w) {
  return {{"alpha", w.query.alpha},
          {"eps", w.query.eps},
          {"t", w.query.t},
          {"trace", measured(w.trace, 1e-12)},
          {"A", measured(w.remainder, 1e-12)},
          {"bound", w.bound},
          {"pass", w.pass}};
}

Json error_json(const Error& e) {
  Json j{{"stage", e.stage()}, {"message", e.what()}};
  if (const auto* n = dynamic_cast<const NumericalError*>(&e)) {
    j["kind"] = "numerical";
    j["best_estimate"] = finite(n->best_estimate());
    j["achieved"] = finite(n->achieved());
  } else {
    j["kind"] = "invalid_input";
  }
  return {{"error", j}};
}

}  // namespace spectral
