#ifndef NPN_JSON_FIELDS_HPP_
#define NPN_JSON_FIELDS_HPP_

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "npn/errors.hpp"

namespace npn::json_fields {

inline void require_object(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
}

inline void reject_unknown(const nlohmann::json& j, const std::string& where,
                           std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ConfigError(where + "." + key, "unknown key");
  }
}

// Reads j[key] into `out` when present; type errors name the field.
template <typename T>
void read(const nlohmann::json& j, const char* key, const std::string& where, T& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (it->is_number_integer() && it->template get<long long>() < 0) {
        throw ConfigError(where + "." + key, "must be non-negative");
      }
      if (!it->is_number_integer()) throw ConfigError(where + "." + key, "expected an integer");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) throw ConfigError(where + "." + key, "expected an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(where + "." + key, "expected a boolean");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(where + "." + key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(where + "." + key, "expected a string");
    }
    out = it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key, e.what());
  }
}

}  // namespace npn::json_fields

#endif  // NPN_JSON_FIELDS_HPP_
