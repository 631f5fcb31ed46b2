#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "aoi/errors.hpp"
#include "aoi/model.hpp"

namespace aoi::io {

/// Canonical network-spec document:
/// {"m":int,"n":int,"arrival_rates":[[...]],"service_rates":[...]}
inline nlohmann::json spec_to_json(const model::NetworkSpec& s) {
  return nlohmann::json{{"m", s.m},
                        {"n", s.n},
                        {"arrival_rates", s.arrival_rates},
                        {"service_rates", s.service_rates}};
}

inline model::NetworkSpec spec_from_json(const nlohmann::json& j) {
  model::NetworkSpec s;
  try {
    s.m = j.at("m").get<int>();
    s.n = j.at("n").get<int>();
    s.arrival_rates = j.at("arrival_rates").get<std::vector<std::vector<double>>>();
    s.service_rates = j.at("service_rates").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad network spec document: ") + e.what());
  }
  return s;
}

inline model::NetworkSpec parse_spec_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::ParseError, "network spec is not valid JSON");
  }
  return spec_from_json(j);
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stable hash of the canonical JSON form, for regression goldens.
inline std::string spec_hash(const model::NetworkSpec& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(spec_to_json(s).dump())));
  return buf;
}

/// Locale-free decimal with 12 significant digits, the CSV cell format.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace aoi::io
