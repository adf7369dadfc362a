#include "json_codec.hpp"

#include "shiftlab/error.hpp"

#include <cmath>

namespace shiftlab::detail {

Json parse_object(std::string_view line) {
    Json j;
    try {
        j = Json::parse(line.begin(), line.end());
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw DataError("expected a JSON object");
    }
    return j;
}

const Json& require(const Json& obj, std::string_view field) {
    const auto it = obj.find(std::string(field));
    if (it == obj.end()) {
        throw DataError("missing field '" + std::string(field) + "'");
    }
    return *it;
}

std::string get_string(const Json& obj, std::string_view field) {
    const Json& v = require(obj, field);
    if (!v.is_string()) {
        throw DataError("field '" + std::string(field) + "' must be a string");
    }
    return v.get<std::string>();
}

double get_finite(const Json& value, const std::string& what) {
    if (!value.is_number()) {
        throw DataError("field " + what + " must be a number");
    }
    const double x = value.get<double>();
    if (!std::isfinite(x)) {
        throw DataError("field " + what + " must be finite");
    }
    return x;
}

double get_number(const Json& obj, std::string_view field) {
    return get_finite(require(obj, field), "'" + std::string(field) + "'");
}

std::size_t get_index(const Json& obj, std::string_view field) {
    const Json& v = require(obj, field);
    if (v.is_number_unsigned()) {
        return v.get<std::size_t>();
    }
    if (v.is_number_integer()) {
        throw DataError("field '" + std::string(field) + "' must be non-negative");
    }
    throw DataError("field '" + std::string(field) + "' must be an integer");
}

std::vector<std::string> get_string_array(const Json& obj, std::string_view field) {
    const Json& v = require(obj, field);
    if (!v.is_array()) {
        throw DataError("field '" + std::string(field) + "' must be an array");
    }
    std::vector<std::string> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) {
            throw DataError("field '" + std::string(field) + "'[" + std::to_string(i) + "] must be a string");
        }
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

std::vector<double> get_number_array(const Json& obj, std::string_view field) {
    const Json& v = require(obj, field);
    if (!v.is_array()) {
        throw DataError("field '" + std::string(field) + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(get_finite(v[i], "'" + std::string(field) + "'[" + std::to_string(i) + "]"));
    }
    return out;
}

std::string dump(const OrderedJson& j) {
    return j.dump(-1, ' ', false, OrderedJson::error_handler_t::strict);
}

} // namespace shiftlab::detail
