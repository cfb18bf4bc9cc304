#pragma once

#include <future>
#include <string>
#include <vector>

#include "muce/ice.hpp"
#include "muce/muce.hpp"

namespace muce {

struct UncertaintyIndices {
    double uncertainty = 0.0;
    double uncertainty_plus = 0.0;
    double uncertainty_minus = 0.0;
    bool negative_gap = false; // greedy artifact: max curve below min curve somewhere
};

struct ConfidenceIndices {
    std::string feature;
    FeatureValue value;
    double stability = 0.0;
    double uncertainty = 0.0;
    double uncertainty_plus = 0.0;
    double uncertainty_minus = 0.0;
    bool negative_gap = false;
};

/// stability = 1 - (max - min) over the restricted ICE predictions; a
/// single-point curve is perfectly stable.
inline double compute_stability(const IceCurve& ice) {
    if (ice.points.empty()) fail(Errc::empty_curve, "stability needs at least one ICE point");
    if (!ice.restricted) fail(Errc::bad_config, "stability is defined on the restricted ICE curve");
    double lo = ice.points.front().prediction;
    double hi = lo;
    for (const auto& p : ice.points) {
        lo = std::min(lo, p.prediction);
        hi = std::max(hi, p.prediction);
    }
    return 1.0 - (hi - lo);
}

/// Mean max/min MUCE gap: over all N+1 signed indices divided by N, and over
/// each half-range (index 0 included in both) divided by N/2. Features without
/// an ordering collapse all three to the mean gap over evaluated positions.
inline UncertaintyIndices compute_uncertainty_indices(const MuceResult& result) {
    const MuceCurve& mx = result.max_curve;
    const MuceCurve& mn = result.min_curve;
    if (mx.points.size() != mn.points.size() || mx.ordered != mn.ordered)
        fail(Errc::mismatched_curves, "max and min curves do not share an index set");
    for (std::size_t i = 0; i < mx.points.size(); ++i)
        if (mx.points[i].index != mn.points[i].index)
            fail(Errc::mismatched_curves, "max and min curves do not share an index set");
    if (mx.points.empty()) fail(Errc::empty_curve, "uncertainty needs at least one curve point");

    UncertaintyIndices out;
    if (mx.ordered) {
        int half = mx.points.back().index;
        if (half <= 0 || mx.points.front().index != -half)
            fail(Errc::mismatched_curves, "ordered curves must span -N/2..N/2");
        double n = 2.0 * half;
        double total = 0.0, plus = 0.0, minus = 0.0;
        for (std::size_t i = 0; i < mx.points.size(); ++i) {
            double d = mx.points[i].prediction - mn.points[i].prediction;
            int idx = mx.points[i].index;
            if (idx == 0 && d < 0.0)
                throw std::logic_error("max/min gap negative at index 0: searches share their start");
            total += d;
            if (idx >= 0) plus += d;
            if (idx <= 0) minus += d;
            if (d < 0.0) out.negative_gap = true;
        }
        out.uncertainty = total / n;
        out.uncertainty_plus = plus / (n / 2.0);
        out.uncertainty_minus = minus / (n / 2.0);
    } else {
        double total = 0.0;
        for (std::size_t i = 0; i < mx.points.size(); ++i) {
            double d = mx.points[i].prediction - mn.points[i].prediction;
            if (d < 0.0)
                throw std::logic_error("max/min gap negative at a shared-start position");
            total += d;
        }
        double mean = total / static_cast<double>(mx.points.size());
        out.uncertainty = out.uncertainty_plus = out.uncertainty_minus = mean;
    }
    return out;
}

struct ObservationSummary {
    double observation_prediction = 0.0;
    std::vector<ConfidenceIndices> indices; // schema order
    std::vector<MuceResult> results;        // aligned with indices
};

/// Restricted ICE + MUCE + indices for every feature of the schema, in schema
/// order. Features are processed concurrently when the predictor allows it and
/// threads > 1; the output is independent of scheduling.
inline ObservationSummary summarize_observation(const ExplanationGrid& grid, const Observation& obs,
                                                const Predictor& model, const MuceConfig& config = {},
                                                unsigned threads = 1) {
    validate_observation(obs, grid.schema());
    ObservationSummary summary;
    summary.observation_prediction = model.predict_one(obs);
    std::size_t count = grid.features.size();
    summary.results.resize(count);

    auto run_one = [&](std::size_t i) {
        summary.results[i] = compute_muce(grid, obs, grid.features[i].spec.name, model, config);
    };
    if (threads > 1 && model.concurrent_safe() && count > 1) {
        std::vector<std::future<void>> tasks;
        tasks.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            tasks.push_back(std::async(std::launch::async, run_one, i));
        for (auto& t : tasks) t.get();
    } else {
        for (std::size_t i = 0; i < count; ++i) run_one(i);
    }

    for (std::size_t i = 0; i < count; ++i) {
        const MuceResult& r = summary.results[i];
        auto unc = compute_uncertainty_indices(r);
        ConfidenceIndices ci;
        ci.feature = r.feature;
        ci.value = obs.at(r.feature);
        ci.stability = compute_stability(r.ice_restricted);
        ci.uncertainty = unc.uncertainty;
        ci.uncertainty_plus = unc.uncertainty_plus;
        ci.uncertainty_minus = unc.uncertainty_minus;
        ci.negative_gap = unc.negative_gap;
        summary.indices.push_back(std::move(ci));
    }
    return summary;
}

} // namespace muce
