#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spectral_corner/anomaly.hpp"
#include "spectral_corner/error.hpp"
#include "spectral_corner/geometry.hpp"
#include "spectral_corner/heattrace.hpp"
#include "spectral_corner/spectrum.hpp"
#include "spectral_corner/walker.hpp"
#include "spectral_corner/wedge.hpp"
#include "spectral_corner/zeta.hpp"

namespace spectral {

using Json = nlohmann::json;

/// Parsed domain document:
///   {"kind": "rectangle" | "disk" | "sector" | "polygon" | "slit-polygon",
///    "params": {...}, "slits": [[[x, y], ...], ...], "sigma": "expression"}
struct DomainSpec {
  Domain domain;
  std::optional<ScalarField> sigma;
  Json source;  // the document as read
};

DomainSpec parse_domain_spec(const Json& doc);
DomainSpec load_domain_spec(const std::filesystem::path& path);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Hash of the canonical (sorted-key, compact) dump of a document.
std::string input_hash(const Json& doc);

std::string tool_version();

/// {"value": v, "error": e}
Json measured(double value, double error);

Json to_json(const ExpansionCoefficients& c);
Json to_json(const ExpansionFit& fit);
Json to_json(const ExpansionComparison& cmp);
Json to_json(const ZetaEvaluation& z);
Json to_json(const ZetaSample& z);
Json to_json(const AnomalyReport& r);
Json to_json(const BridgeEstimate& b);
Json to_json(const WedgeRow& w);
Json to_json(const DerivativeIdentity& d);
/// Machine-readable failure record with stage and, for numerical failures,
/// the best estimate and achieved accuracy.
Json error_json(const Error& e);

}  // namespace spectral
