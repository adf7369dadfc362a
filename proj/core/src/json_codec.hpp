#pragma once

// Field accessors over nlohmann::json that turn type mismatches into
// DataError messages naming the field.

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace shiftlab::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

Json parse_object(std::string_view line);

const Json& require(const Json& obj, std::string_view field);
std::string get_string(const Json& obj, std::string_view field);
double get_finite(const Json& value, const std::string& what);
double get_number(const Json& obj, std::string_view field);
std::size_t get_index(const Json& obj, std::string_view field);
std::vector<std::string> get_string_array(const Json& obj, std::string_view field);
std::vector<double> get_number_array(const Json& obj, std::string_view field);

/// Compact dump; ordered_json keeps insertion order so output is stable.
std::string dump(const OrderedJson& j);

} // namespace shiftlab::detail
