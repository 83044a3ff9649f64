#pragma once

// Internal JSON helpers shared by the persistence code. Not installed.

#include <string>
#include <string_view>

#include <json.hpp>

#include "facelve/error.hpp"
#include "facelve/generator.hpp"
#include "facelve/latent.hpp"

namespace facelve::detail {

using json = nlohmann::json;

inline json latent_to_json(const LatentVector& v) { return json(v.to_vector()); }

inline LatentVector latent_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "latent must be an array of numbers");
  std::vector<double> values;
  values.reserve(j.size());
  for (const json& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::Parse, "latent must be an array of numbers");
    values.push_back(x.get<double>());
  }
  return LatentVector(std::move(values));
}

/// Parses `text`, turning nlohmann's exception into a Parse error that
/// carries the byte offset.
inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse,
                "parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

/// Runs `fn`, mapping nlohmann type/lookup errors to Parse errors.
template <typename Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed document: ") + e.what());
  }
}

json descriptor_to_json(const GeneratorDescriptor& d);
/// Fields missing from `j` keep their value from `defaults`.
GeneratorDescriptor descriptor_from_json(const json& j, const GeneratorDescriptor& defaults);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename, so readers never see a torn file.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace facelve::detail
