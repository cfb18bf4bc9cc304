#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "muce/csv.hpp"
#include "muce/grid.hpp"
#include "muce/indices.hpp"

namespace muce {

// One feature's complete explanation payload. The full ICE curve backs the ICE
// plot, the restricted one the MUCE overlay and the stability index; plots are
// reproducible from this block alone.
struct FeatureReport {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    FeatureValue value;
    double stability = 0.0;
    double uncertainty = 0.0;
    double uncertainty_plus = 0.0;
    double uncertainty_minus = 0.0;
    bool negative_gap = false;
    StabilityInterval interval;
    std::vector<IcePoint> ice_full;
    std::vector<IcePoint> ice_restricted;
    FeatureValue ice_marker_value; // observation value clamped into the interval
    double ice_marker_prediction = 0.0;
    MuceCurve max_curve; // observations included (extremal vectors come from here)
    MuceCurve min_curve;
    Extremal extremal_max;
    Extremal extremal_min;
    FeatureVariation fv_max;
    FeatureVariation fv_min;
};

struct ReportConfig {
    int muce_n = 10;
    std::vector<int> nsteps = {5, 1, 1, 1, 1, 1};
    double stability_fraction = 0.05;
    std::size_t n_local = 11;
    std::size_t k_categories = 5;
    std::uint64_t seed = 0;
    int restarts = 0;
};

struct ExplanationReport {
    std::string model;
    ReportConfig config;
    Schema schema;
    Observation observation;
    double observation_prediction = 0.0;
    std::vector<FeatureReport> features;
};

/// Assembles the report from a summary; the full ICE sweeps are computed here
/// (one extra batch per feature).
inline ExplanationReport build_report(const ExplanationGrid& grid, const Observation& obs,
                                      const Predictor& model, const ObservationSummary& summary,
                                      const MuceConfig& config) {
    ExplanationReport report;
    report.model = model.name();
    report.config = {config.n_iterations, config.nsteps,      grid.stability_fraction,
                     config.n_local,      grid.k_categories,  config.seed,
                     config.restarts};
    report.schema = grid.schema();
    report.observation = obs;
    report.observation_prediction = summary.observation_prediction;
    for (std::size_t i = 0; i < summary.results.size(); ++i) {
        const MuceResult& r = summary.results[i];
        const ConfidenceIndices& ci = summary.indices[i];
        FeatureReport fr;
        fr.name = r.feature;
        fr.kind = grid.feature(r.feature).spec.kind;
        fr.value = obs.at(r.feature);
        fr.stability = ci.stability;
        fr.uncertainty = ci.uncertainty;
        fr.uncertainty_plus = ci.uncertainty_plus;
        fr.uncertainty_minus = ci.uncertainty_minus;
        fr.negative_gap = ci.negative_gap;
        fr.interval = stability_interval(grid, obs, r.feature);
        fr.ice_full = compute_ice(grid, obs, r.feature, model).points;
        fr.ice_restricted = r.ice_restricted.points;
        fr.ice_marker_value = r.ice_restricted.observation_value;
        fr.ice_marker_prediction = r.ice_restricted.observation_prediction;
        fr.max_curve = r.max_curve;
        fr.min_curve = r.min_curve;
        fr.extremal_max = r.extremal_max;
        fr.extremal_min = r.extremal_min;
        fr.fv_max = extract_feature_variation(r, obs, SearchMethod::maximize);
        fr.fv_min = extract_feature_variation(r, obs, SearchMethod::minimize);
        report.features.push_back(std::move(fr));
    }
    return report;
}

// --- JSON (full precision; round-trips exactly) ------------------------------

inline constexpr const char* kReportArtifactTag = "muce-report";
inline constexpr int kReportArtifactVersion = 1;

namespace detail {

inline nlohmann::json value_to_json(const FeatureValue& v) {
    if (holds_real(v)) return std::get<double>(v);
    if (holds_int(v)) return std::get<std::int64_t>(v);
    return std::get<std::string>(v);
}

inline FeatureValue value_from_json(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    return j.get<double>();
}

inline nlohmann::json observation_to_json(const Observation& obs) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : obs.values) j[name] = value_to_json(v);
    return j;
}

inline Observation observation_from_json(const nlohmann::json& j) {
    Observation obs;
    for (const auto& [name, v] : j.items()) obs.set(name, value_from_json(v));
    return obs;
}

inline nlohmann::json ice_points_to_json(const std::vector<IcePoint>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points) arr.push_back({{"value", value_to_json(p.value)}, {"prediction", p.prediction}});
    return arr;
}

inline std::vector<IcePoint> ice_points_from_json(const nlohmann::json& arr) {
    std::vector<IcePoint> out;
    for (const auto& p : arr) out.push_back({value_from_json(p.at("value")), p.at("prediction").get<double>()});
    return out;
}

inline nlohmann::json curve_to_json(const MuceCurve& curve) {
    nlohmann::json j;
    j["ordered"] = curve.ordered;
    j["points"] = nlohmann::json::array();
    for (const auto& p : curve.points)
        j["points"].push_back({{"index", p.index},
                               {"value", value_to_json(p.value)},
                               {"observation", observation_to_json(p.observation)},
                               {"prediction", p.prediction}});
    return j;
}

inline MuceCurve curve_from_json(const nlohmann::json& j) {
    MuceCurve curve;
    curve.ordered = j.at("ordered").get<bool>();
    for (const auto& p : j.at("points"))
        curve.points.push_back({p.at("index").get<int>(), value_from_json(p.at("value")),
                                observation_from_json(p.at("observation")),
                                p.at("prediction").get<double>()});
    return curve;
}

inline nlohmann::json interval_to_json(const StabilityInterval& s) {
    nlohmann::json j;
    j["feature"] = s.feature;
    j["kind"] = kind_name(s.kind);
    if (s.kind == FeatureKind::categorical)
        j["labels"] = s.labels;
    else {
        j["lower"] = s.lower;
        j["upper"] = s.upper;
    }
    return j;
}

inline StabilityInterval interval_from_json(const nlohmann::json& j) {
    StabilityInterval s;
    s.feature = j.at("feature").get<std::string>();
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    if (s.kind == FeatureKind::categorical)
        s.labels = j.at("labels").get<std::vector<std::string>>();
    else {
        s.lower = j.at("lower").get<double>();
        s.upper = j.at("upper").get<double>();
    }
    return s;
}

inline nlohmann::json variation_to_json(const FeatureVariation& fv) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, change] : fv.changes) {
        if (std::holds_alternative<std::string>(change))
            j[name] = std::get<std::string>(change);
        else if (std::holds_alternative<std::int64_t>(change))
            j[name] = std::get<std::int64_t>(change);
        else {
            const NumericDelta& d = std::get<NumericDelta>(change);
            j[name] = {{"delta", d.primary}, {"correction", d.correction}};
        }
    }
    return j;
}

inline FeatureVariation variation_from_json(const nlohmann::json& j) {
    FeatureVariation fv;
    for (const auto& [name, change] : j.items()) {
        if (change.is_string())
            fv.changes[name] = change.get<std::string>();
        else if (change.is_number_integer())
            fv.changes[name] = change.get<std::int64_t>();
        else
            fv.changes[name] = NumericDelta{change.at("delta").get<double>(),
                                            change.at("correction").get<double>()};
    }
    return fv;
}

} // namespace detail

inline nlohmann::json report_to_json(const ExplanationReport& report) {
    nlohmann::json j;
    j["artifact"] = kReportArtifactTag;
    j["version"] = kReportArtifactVersion;
    j["model"] = report.model;
    j["config"] = {{"muce_n", report.config.muce_n},
                   {"nsteps", report.config.nsteps},
                   {"stability_fraction", report.config.stability_fraction},
                   {"n_local", report.config.n_local},
                   {"k_categories", report.config.k_categories},
                   {"seed", report.config.seed},
                   {"restarts", report.config.restarts}};
    j["schema"] = schema_to_json(report.schema, "")["features"];
    j["observation"] = detail::observation_to_json(report.observation);
    j["observation_prediction"] = report.observation_prediction;
    j["features"] = nlohmann::json::array();
    for (const auto& fr : report.features) {
        nlohmann::json f;
        f["name"] = fr.name;
        f["kind"] = kind_name(fr.kind);
        f["value"] = detail::value_to_json(fr.value);
        f["stability"] = fr.stability;
        f["uncertainty"] = fr.uncertainty;
        f["uncertainty_plus"] = fr.uncertainty_plus;
        f["uncertainty_minus"] = fr.uncertainty_minus;
        f["negative_gap"] = fr.negative_gap;
        f["interval"] = detail::interval_to_json(fr.interval);
        f["ice_full"] = detail::ice_points_to_json(fr.ice_full);
        f["ice_restricted"] = detail::ice_points_to_json(fr.ice_restricted);
        f["ice_marker_value"] = detail::value_to_json(fr.ice_marker_value);
        f["ice_marker_prediction"] = fr.ice_marker_prediction;
        f["max_curve"] = detail::curve_to_json(fr.max_curve);
        f["min_curve"] = detail::curve_to_json(fr.min_curve);
        f["extremal_max"] = {{"observation", detail::observation_to_json(fr.extremal_max.observation)},
                             {"probability", fr.extremal_max.probability}};
        f["extremal_min"] = {{"observation", detail::observation_to_json(fr.extremal_min.observation)},
                             {"probability", fr.extremal_min.probability}};
        f["fv_max"] = detail::variation_to_json(fr.fv_max);
        f["fv_min"] = detail::variation_to_json(fr.fv_min);
        j["features"].push_back(std::move(f));
    }
    return j;
}

inline ExplanationReport report_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("artifact", "") != kReportArtifactTag)
        fail(Errc::io_failure, "not an explanation report");
    if (j.value("version", 0) != kReportArtifactVersion)
        fail(Errc::io_failure, "unsupported report version");
    ExplanationReport report;
    report.model = j.at("model").get<std::string>();
    const auto& c = j.at("config");
    report.config.muce_n = c.at("muce_n").get<int>();
    report.config.nsteps = c.at("nsteps").get<std::vector<int>>();
    report.config.stability_fraction = c.at("stability_fraction").get<double>();
    report.config.n_local = c.at("n_local").get<std::size_t>();
    report.config.k_categories = c.at("k_categories").get<std::size_t>();
    report.config.seed = c.at("seed").get<std::uint64_t>();
    report.config.restarts = c.at("restarts").get<int>();
    nlohmann::json schema_wrapper;
    schema_wrapper["artifact"] = kSchemaArtifactTag;
    schema_wrapper["version"] = kSchemaArtifactVersion;
    schema_wrapper["features"] = j.at("schema");
    report.schema = schema_from_json(schema_wrapper).schema;
    report.observation = detail::observation_from_json(j.at("observation"));
    report.observation_prediction = j.at("observation_prediction").get<double>();
    for (const auto& f : j.at("features")) {
        FeatureReport fr;
        fr.name = f.at("name").get<std::string>();
        fr.kind = kind_from_name(f.at("kind").get<std::string>());
        fr.value = detail::value_from_json(f.at("value"));
        fr.stability = f.at("stability").get<double>();
        fr.uncertainty = f.at("uncertainty").get<double>();
        fr.uncertainty_plus = f.at("uncertainty_plus").get<double>();
        fr.uncertainty_minus = f.at("uncertainty_minus").get<double>();
        fr.negative_gap = f.at("negative_gap").get<bool>();
        fr.interval = detail::interval_from_json(f.at("interval"));
        fr.ice_full = detail::ice_points_from_json(f.at("ice_full"));
        fr.ice_restricted = detail::ice_points_from_json(f.at("ice_restricted"));
        fr.ice_marker_value = detail::value_from_json(f.at("ice_marker_value"));
        fr.ice_marker_prediction = f.at("ice_marker_prediction").get<double>();
        fr.max_curve = detail::curve_from_json(f.at("max_curve"));
        fr.min_curve = detail::curve_from_json(f.at("min_curve"));
        fr.extremal_max = {detail::observation_from_json(f.at("extremal_max").at("observation")),
                           f.at("extremal_max").at("probability").get<double>()};
        fr.extremal_min = {detail::observation_from_json(f.at("extremal_min").at("observation")),
                           f.at("extremal_min").at("probability").get<double>()};
        fr.fv_max = detail::variation_from_json(f.at("fv_max"));
        fr.fv_min = detail::variation_from_json(f.at("fv_min"));
        report.features.push_back(std::move(fr));
    }
    return report;
}

// Index table exports; the human-readable table rounds to 2 decimals, the CSV
// keeps full precision.
inline std::string indices_table(const ExplanationReport& report) {
    std::ostringstream out;
    out << "feature            value      stability  uncertainty  uncertainty-  uncertainty+\n";
    auto fixed2 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    for (const auto& fr : report.features) {
        std::string value = format_value(fr.value);
        if (holds_real(fr.value)) value = fixed2(std::get<double>(fr.value));
        out << fr.name;
        for (std::size_t i = fr.name.size(); i < 19; ++i) out << ' ';
        out << value;
        for (std::size_t i = value.size(); i < 11; ++i) out << ' ';
        out << fixed2(fr.stability) << "       " << fixed2(fr.uncertainty) << "         "
            << fixed2(fr.uncertainty_minus) << "          " << fixed2(fr.uncertainty_plus);
        if (fr.negative_gap) out << "  [negative-gap]";
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json indices_json(const ExplanationReport& report) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& fr : report.features)
        arr.push_back({{"feature", fr.name},
                       {"value", detail::value_to_json(fr.value)},
                       {"stability", fr.stability},
                       {"uncertainty", fr.uncertainty},
                       {"uncertainty_minus", fr.uncertainty_minus},
                       {"uncertainty_plus", fr.uncertainty_plus},
                       {"negative_gap", fr.negative_gap}});
    return arr;
}

inline std::string indices_csv(const ExplanationReport& report) {
    std::ostringstream out;
    out << "feature,value,stability,uncertainty,uncertainty_minus,uncertainty_plus,negative_gap\n";
    for (const auto& fr : report.features) {
        out << detail::csv_escape(fr.name) << ',' << detail::csv_escape(format_value(fr.value)) << ','
            << format_double(fr.stability) << ',' << format_double(fr.uncertainty) << ','
            << format_double(fr.uncertainty_minus) << ',' << format_double(fr.uncertainty_plus) << ','
            << (fr.negative_gap ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace muce
