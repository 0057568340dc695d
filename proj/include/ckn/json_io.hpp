#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "ckn/constants.hpp"
#include "ckn/functionals.hpp"
#include "ckn/gauge.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"
#include "ckn/search.hpp"

namespace ckn {

using Json = nlohmann::ordered_json;

// Finite doubles as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
[[nodiscard]] Json number(double x);

// Reads a number or one of the strings above. Throws "malformed-input".
[[nodiscard]] double read_number(const Json& j, const char* key);

// Parses text or reads a file. Throws "malformed-input" on I/O or syntax errors.
[[nodiscard]] Json parse_json_text(const std::string& text);
[[nodiscard]] Json read_json_file(const std::string& path);

// {"N","p","q","r","s","mu","theta"} plus optional "a".
[[nodiscard]] RawParams raw_params_from_json(const Json& j);

// Tuple, regime, reason and every derived exponent that applies.
[[nodiscard]] Json to_json(const CknParams& P);

// Profile kinds:
//   {"kind":"grid","points":[[rho,g],...],"origin_order":x,"tail_order":y,"interp":"value"|"log"}
//   {"kind":"analytic","shape":"bubble"|"compact"|"stretched_exp","A","B","beta","gamma"}
//   {"kind":"family","family":"T5",...,"A","B"}  (needs params)
//   {"kind":"composition","base":{...},"scale","dilation","exponent"}
// Throws "malformed-input".
[[nodiscard]] RadialProfile profile_from_json(const Json& j,
                                              const std::optional<CknParams>& params = std::nullopt);

// Opaque profiles are sampled onto a grid of `opaque_nodes` log-spaced nodes.
[[nodiscard]] Json to_json(const RadialProfile& g);

// {"rho": number | "inf"} with N taken from the params.
[[nodiscard]] Gauge gauge_from_json(const Json& j, double N);
[[nodiscard]] Json to_json(const Gauge& g);

[[nodiscard]] Json to_json(const QuotientReport& r);
[[nodiscard]] Json to_json(const SharpConstantReport& r);
[[nodiscard]] Json to_json(const FamilyFit& f);
[[nodiscard]] Json to_json(const SearchResult& r);
[[nodiscard]] Json to_json(const StationarityReport& r);
[[nodiscard]] Json to_json(const TransferResult& r);

}  // namespace ckn
