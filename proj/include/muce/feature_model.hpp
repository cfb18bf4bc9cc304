#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "muce/errors.hpp"

namespace muce {

enum class FeatureKind { continuous, integer, binary, ordinal, categorical };

inline const char* kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::integer: return "integer";
        case FeatureKind::binary: return "binary";
        case FeatureKind::ordinal: return "ordinal";
        case FeatureKind::categorical: return "categorical";
    }
    return "?";
}

inline FeatureKind kind_from_name(const std::string& s) {
    if (s == "continuous") return FeatureKind::continuous;
    if (s == "integer") return FeatureKind::integer;
    if (s == "binary") return FeatureKind::binary;
    if (s == "ordinal") return FeatureKind::ordinal;
    if (s == "categorical") return FeatureKind::categorical;
    fail(Errc::schema_mismatch, "unknown feature kind '" + s + "'");
}

// Continuous values carry a double, integer-like kinds an int64, categorical a label.
using FeatureValue = std::variant<double, std::int64_t, std::string>;

inline bool is_numeric_kind(FeatureKind k) { return k != FeatureKind::categorical; }
inline bool is_integer_kind(FeatureKind k) {
    return k == FeatureKind::integer || k == FeatureKind::binary || k == FeatureKind::ordinal;
}

inline bool holds_real(const FeatureValue& v) { return std::holds_alternative<double>(v); }
inline bool holds_int(const FeatureValue& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool holds_label(const FeatureValue& v) { return std::holds_alternative<std::string>(v); }

/// Numeric view of a value; labels have none.
inline double numeric_value(const FeatureValue& v) {
    if (holds_real(v)) return std::get<double>(v);
    if (holds_int(v)) return static_cast<double>(std::get<std::int64_t>(v));
    fail(Errc::kind_mismatch, "categorical value has no numeric representation");
}

inline std::int64_t int_value(const FeatureValue& v) {
    if (holds_int(v)) return std::get<std::int64_t>(v);
    fail(Errc::kind_mismatch, "value is not integer-represented");
}

inline const std::string& label_value(const FeatureValue& v) {
    if (holds_label(v)) return std::get<std::string>(v);
    fail(Errc::kind_mismatch, "value is not a category label");
}

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    // Numeric kinds only; populated when the feature is described from data.
    double observed_min = 0.0;
    double observed_max = 0.0;
    std::vector<std::string> categories; // categorical only, ordered, duplicate-free
    std::int64_t level_min = 0;          // ordinal only
    std::int64_t level_max = 0;

    bool has_category(const std::string& label) const {
        return std::find(categories.begin(), categories.end(), label) != categories.end();
    }
};

using Schema = std::vector<FeatureSpec>;

inline const FeatureSpec* find_feature(const Schema& schema, const std::string& name) {
    for (const auto& spec : schema)
        if (spec.name == name) return &spec;
    return nullptr;
}

inline const FeatureSpec& require_feature(const Schema& schema, const std::string& name) {
    const FeatureSpec* spec = find_feature(schema, name);
    if (!spec) fail(Errc::unknown_feature, "feature '" + name + "' not in schema");
    return *spec;
}

struct Observation {
    std::map<std::string, FeatureValue> values;

    const FeatureValue& at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) fail(Errc::unknown_feature, "observation lacks feature '" + name + "'");
        return it->second;
    }
    void set(const std::string& name, FeatureValue v) { values[name] = std::move(v); }
    bool operator==(const Observation&) const = default;
};

struct Dataset {
    Schema schema;
    std::vector<Observation> rows;
    std::optional<std::vector<int>> labels; // binary class labels, one per row

    std::size_t size() const { return rows.size(); }
};

/// Checks one value against its feature's kind and (for categorical) label set.
inline void check_value(const FeatureSpec& spec, const FeatureValue& v) {
    switch (spec.kind) {
        case FeatureKind::continuous:
            if (!holds_real(v) && !holds_int(v))
                fail(Errc::kind_mismatch, "feature '" + spec.name + "' expects a real value");
            break;
        case FeatureKind::integer:
            if (!holds_int(v)) fail(Errc::kind_mismatch, "feature '" + spec.name + "' expects an integer");
            break;
        case FeatureKind::binary: {
            if (!holds_int(v)) fail(Errc::kind_mismatch, "feature '" + spec.name + "' expects 0 or 1");
            auto b = std::get<std::int64_t>(v);
            if (b != 0 && b != 1) fail(Errc::kind_mismatch, "feature '" + spec.name + "' admits only {0,1}");
            break;
        }
        case FeatureKind::ordinal: {
            if (!holds_int(v)) fail(Errc::kind_mismatch, "feature '" + spec.name + "' expects an ordinal level");
            auto l = std::get<std::int64_t>(v);
            if (l < spec.level_min || l > spec.level_max)
                fail(Errc::kind_mismatch, "feature '" + spec.name + "' level out of declared range");
            break;
        }
        case FeatureKind::categorical: {
            if (!holds_label(v)) fail(Errc::kind_mismatch, "feature '" + spec.name + "' expects a label");
            if (!spec.has_category(std::get<std::string>(v)))
                fail(Errc::unknown_category,
                     "label '" + std::get<std::string>(v) + "' not in feature '" + spec.name + "'");
            break;
        }
    }
}

/// Validates arity and per-value kind/label constraints. Numeric values outside
/// the observed range are legal inputs and pass unchanged.
inline const Observation& validate_observation(const Observation& obs, const Schema& schema) {
    for (const auto& spec : schema) {
        auto it = obs.values.find(spec.name);
        if (it == obs.values.end())
            fail(Errc::unknown_feature, "observation missing feature '" + spec.name + "'");
        check_value(spec, it->second);
    }
    for (const auto& [name, value] : obs.values)
        if (!find_feature(schema, name)) fail(Errc::unknown_feature, "feature '" + name + "' not in schema");
    return obs;
}

struct FeatureScaling {
    double mean = 0.0;
    double stddev = 0.0;
};

// Per-feature mean/stddev over a training dataset; categorical features carry none.
using ScalingStats = std::map<std::string, FeatureScaling>;

inline ScalingStats compute_scaling(const Dataset& data) {
    if (data.rows.empty()) fail(Errc::empty_dataset, "cannot compute scaling statistics");
    ScalingStats stats;
    for (const auto& spec : data.schema) {
        if (!is_numeric_kind(spec.kind)) continue;
        double sum = 0.0;
        for (const auto& row : data.rows) sum += numeric_value(row.at(spec.name));
        double mean = sum / static_cast<double>(data.rows.size());
        double sq = 0.0;
        for (const auto& row : data.rows) {
            double d = numeric_value(row.at(spec.name)) - mean;
            sq += d * d;
        }
        stats[spec.name] = {mean, std::sqrt(sq / static_cast<double>(data.rows.size()))};
    }
    return stats;
}

/// Mixed-type embedding used by every distance computation: z-scored numeric
/// coordinates, one-hot categorical blocks, the excluded feature contributing
/// none. Coordinate order follows schema order.
inline std::vector<double> encode_for_distance(const Observation& obs, const Schema& schema,
                                               const std::string& exclude, const ScalingStats& scaling) {
    std::vector<double> out;
    for (const auto& spec : schema) {
        if (spec.name == exclude) continue;
        const FeatureValue& v = obs.at(spec.name);
        check_value(spec, v);
        if (is_numeric_kind(spec.kind)) {
            auto it = scaling.find(spec.name);
            double mean = it != scaling.end() ? it->second.mean : 0.0;
            double sd = it != scaling.end() ? it->second.stddev : 1.0;
            out.push_back(sd == 0.0 ? 0.0 : (numeric_value(v) - mean) / sd);
        } else {
            const std::string& label = label_value(v);
            for (const auto& c : spec.categories) out.push_back(c == label ? 1.0 : 0.0);
        }
    }
    return out;
}

inline std::vector<double> encode_for_distance(const Observation& obs, const Schema& schema,
                                               const ScalingStats& scaling) {
    return encode_for_distance(obs, schema, std::string(), scaling);
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace muce
