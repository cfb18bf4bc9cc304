#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include "muce/errors.hpp"
#include "muce/feature_model.hpp"

namespace muce {

/// Shortest decimal string that parses back to the same double; keeps every
/// emitted file byte-deterministic.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(Errc::io_failure, "malformed number '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& s) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(Errc::io_failure, "malformed integer '" + s + "'");
    return v;
}

inline std::string format_value(const FeatureValue& v) {
    if (holds_real(v)) return format_double(std::get<double>(v));
    if (holds_int(v)) return format_int(std::get<std::int64_t>(v));
    return std::get<std::string>(v);
}

} // namespace muce
