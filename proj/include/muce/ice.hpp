#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "muce/grid.hpp"
#include "muce/predictor.hpp"

namespace muce {

struct IcePoint {
    FeatureValue value;
    double prediction = 0.0;
};

struct IceCurve {
    std::string feature;
    std::vector<IcePoint> points; // ascending by value, or in category order
    FeatureValue observation_value;
    double observation_prediction = 0.0;
    bool restricted = false;
};

namespace detail {

inline void insert_sorted_unique(std::vector<double>& values, double v) {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    if (it == values.end() || *it != v) values.insert(it, v);
}

inline void insert_sorted_unique(std::vector<std::int64_t>& values, std::int64_t v) {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    if (it == values.end() || *it != v) values.insert(it, v);
}

// Substitutes each sweep value into the observation and predicts the whole
// sweep as one batch. `marker` names the sweep value standing in for the
// observation; it must be present.
inline IceCurve sweep(const Observation& obs, const std::string& feature, const Predictor& model,
                      std::vector<FeatureValue> values, bool restricted, const FeatureValue& marker) {
    std::vector<Observation> batch;
    batch.reserve(values.size());
    for (const auto& v : values) {
        Observation o = obs;
        o.set(feature, v);
        batch.push_back(std::move(o));
    }
    auto preds = model.predict_proba(batch);
    if (preds.size() != batch.size())
        fail(Errc::predictor_failure, model.name() + " returned a malformed batch");

    IceCurve curve;
    curve.feature = feature;
    curve.observation_value = marker;
    curve.restricted = restricted;
    bool found = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        curve.points.push_back({values[i], preds[i]});
        if (values[i] == marker) {
            curve.observation_prediction = preds[i];
            found = true;
        }
    }
    if (!found) fail(Errc::bad_config, "observation value missing from the evaluation set");
    return curve;
}

} // namespace detail

/// ICE over the feature's full grid; the observation's own value is injected
/// into the sweep so the curve passes exactly through model(obs).
inline IceCurve compute_ice(const ExplanationGrid& grid, const Observation& obs,
                            const std::string& feature, const Predictor& model) {
    validate_observation(obs, grid.schema());
    const GridFeature& gf = grid.feature(feature);
    std::vector<FeatureValue> values;
    switch (gf.spec.kind) {
        case FeatureKind::continuous: {
            std::vector<double> vs;
            for (const auto& v : gf.grid_values) vs.push_back(std::get<double>(v));
            detail::insert_sorted_unique(vs, numeric_value(obs.at(feature)));
            for (double v : vs) values.emplace_back(v);
            break;
        }
        case FeatureKind::integer:
        case FeatureKind::ordinal:
        case FeatureKind::binary: {
            std::vector<std::int64_t> vs;
            for (const auto& v : gf.grid_values) vs.push_back(std::get<std::int64_t>(v));
            detail::insert_sorted_unique(vs, int_value(obs.at(feature)));
            for (auto v : vs) values.emplace_back(v);
            break;
        }
        case FeatureKind::categorical: {
            auto ordering = order_categories(grid, feature, obs);
            for (const auto& label : ordering.labels) values.emplace_back(label);
            break;
        }
    }
    return detail::sweep(obs, feature, model, std::move(values), false, obs.at(feature));
}

/// ICE restricted to the stability range: n_local evenly spaced values across
/// the interval, always including both endpoints and the observation's value
/// (clamped into the interval if the observation sits outside the observed
/// range). Integer kinds are rounded and deduplicated.
inline IceCurve compute_ice_local(const ExplanationGrid& grid, const Observation& obs,
                                  const std::string& feature, const Predictor& model,
                                  std::size_t n_local = 11) {
    validate_observation(obs, grid.schema());
    if (n_local < 3) fail(Errc::bad_config, "restricted ICE needs at least 3 points");
    const GridFeature& gf = grid.feature(feature);
    StabilityInterval interval = stability_interval(grid, obs, feature);

    std::vector<FeatureValue> values;
    FeatureValue marker = obs.at(feature);
    switch (gf.spec.kind) {
        case FeatureKind::continuous: {
            std::vector<double> vs = detail::linspace(interval.lower, interval.upper, n_local);
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            double x = std::clamp(numeric_value(obs.at(feature)), interval.lower, interval.upper);
            detail::insert_sorted_unique(vs, x);
            marker = x;
            for (double v : vs) values.emplace_back(v);
            break;
        }
        case FeatureKind::integer:
        case FeatureKind::ordinal: {
            std::vector<std::int64_t> vs;
            for (double v : detail::linspace(interval.lower, interval.upper, n_local))
                detail::insert_sorted_unique(vs, std::llround(v));
            std::int64_t x = std::clamp(int_value(obs.at(feature)),
                                        static_cast<std::int64_t>(interval.lower),
                                        static_cast<std::int64_t>(interval.upper));
            detail::insert_sorted_unique(vs, x);
            marker = x;
            for (auto v : vs) values.emplace_back(v);
            break;
        }
        case FeatureKind::binary:
            values = {FeatureValue(std::int64_t{0}), FeatureValue(std::int64_t{1})};
            break;
        case FeatureKind::categorical:
            for (const auto& label : interval.labels) values.emplace_back(label);
            break;
    }
    return detail::sweep(obs, feature, model, std::move(values), true, marker);
}

} // namespace muce
