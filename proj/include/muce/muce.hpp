#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "muce/grid.hpp"
#include "muce/ice.hpp"
#include "muce/predictor.hpp"
#include "muce/rng.hpp"

namespace muce {

enum class SearchMethod { maximize, minimize };
enum class SearchDirection { plus, minus };

struct MuceConfig {
    int n_iterations = 10;                    // N: total iterations across both directions, even
    std::vector<int> nsteps = {5, 1, 1, 1, 1, 1}; // repetitions per iteration, [0] for iteration 0
    std::map<std::string, double> epsilon;    // per-feature step overrides; derived when absent
    std::size_t n_local = 11;                 // restricted-ICE sample count
    int restarts = 0;                         // extra iteration-0 runs from random in-range starts
    std::uint64_t seed = 0;
};

struct MucePoint {
    int index = 0;      // signed iteration for ordered features, position otherwise
    FeatureValue value; // feature-of-interest value at this point
    Observation observation;
    double prediction = 0.0;
};

struct MuceCurve {
    bool ordered = true;
    std::vector<MucePoint> points; // ascending by index

    const MucePoint& at(int index) const {
        for (const auto& p : points)
            if (p.index == index) return p;
        fail(Errc::mismatched_curves, "curve has no point at index " + std::to_string(index));
    }
};

struct Extremal {
    Observation observation;
    double probability = 0.0;
};

struct MuceResult {
    std::string feature;
    MuceCurve max_curve;
    MuceCurve min_curve;
    IceCurve ice_restricted;
    Extremal extremal_max;
    Extremal extremal_min;
};

// Continuous-feature delta carried as a compensated pair: `primary` is the
// reportable difference, `correction` the sub-ulp residual that makes
// (x + primary) + correction land exactly on the extremal value.
struct NumericDelta {
    double primary = 0.0;
    double correction = 0.0;
    bool operator==(const NumericDelta&) const = default;
};

using VariationChange = std::variant<NumericDelta, std::int64_t, std::string>;

// Per-feature change taking the original observation to an extremal one:
// a numeric delta for continuous features, an integer delta for integer-coded
// kinds, a replacement label for categorical ones.
struct FeatureVariation {
    std::map<std::string, VariationChange> changes;
};

/// One candidate per single-feature move from x: +epsilon then -epsilon for
/// numeric kinds (clamped into the stability interval, integer steps for
/// integer kinds), the flipped value for binary, every other selected label
/// for categorical. Candidates that clamp back onto x are dropped. `features`
/// must be in schema order; output order is features-major, + before -.
inline std::vector<Observation> generate_candidates(
    const Observation& x, const std::vector<std::string>& features,
    const std::map<std::string, double>& epsilon,
    const std::map<std::string, StabilityInterval>& intervals) {
    std::vector<Observation> out;
    for (const auto& name : features) {
        const StabilityInterval& s = intervals.at(name);
        switch (s.kind) {
            case FeatureKind::continuous: {
                auto it = epsilon.find(name);
                double e = it == epsilon.end() ? 0.0 : it->second;
                double v = numeric_value(x.at(name));
                for (double cand : {std::clamp(v + e, s.lower, s.upper), std::clamp(v - e, s.lower, s.upper)}) {
                    if (cand != v) {
                        Observation o = x;
                        o.set(name, cand);
                        out.push_back(std::move(o));
                    }
                }
                break;
            }
            case FeatureKind::integer:
            case FeatureKind::ordinal: {
                auto it = epsilon.find(name);
                auto e = it == epsilon.end() ? std::int64_t{0}
                                             : static_cast<std::int64_t>(std::llround(it->second));
                auto v = int_value(x.at(name));
                auto lo = static_cast<std::int64_t>(s.lower);
                auto hi = static_cast<std::int64_t>(s.upper);
                for (auto cand : {std::clamp(v + e, lo, hi), std::clamp(v - e, lo, hi)}) {
                    if (cand != v) {
                        Observation o = x;
                        o.set(name, cand);
                        out.push_back(std::move(o));
                    }
                }
                break;
            }
            case FeatureKind::binary: {
                Observation o = x;
                o.set(name, FeatureValue(std::int64_t{1} - int_value(x.at(name))));
                out.push_back(std::move(o));
                break;
            }
            case FeatureKind::categorical: {
                const std::string& current = label_value(x.at(name));
                for (const auto& label : s.labels) {
                    if (label != current) {
                        Observation o = x;
                        o.set(name, label);
                        out.push_back(std::move(o));
                    }
                }
                break;
            }
        }
    }
    return out;
}

namespace detail {

struct SearchState {
    Observation obs;
    double prediction = 0.0;
};

inline bool is_better(double a, double b, SearchMethod m) {
    return m == SearchMethod::maximize ? a > b : a < b;
}

// Greedy neighborhood exploration: up to `repetitions` single-feature moves,
// each taking the best candidate, continuing only on strict improvement.
// Ties resolve to the earliest candidate (schema order, + before -).
inline SearchState explore(const Predictor& model, SearchState state,
                           const std::vector<std::string>& others, SearchMethod method,
                           int repetitions, const std::map<std::string, double>& epsilon,
                           const std::map<std::string, StabilityInterval>& intervals) {
    for (int k = 0; k < repetitions; ++k) {
        auto candidates = generate_candidates(state.obs, others, epsilon, intervals);
        if (candidates.empty()) break;
        auto preds = model.predict_proba(candidates);
        if (preds.size() != candidates.size())
            fail(Errc::predictor_failure, model.name() + " returned a malformed batch");
        std::size_t best = 0;
        for (std::size_t i = 1; i < preds.size(); ++i)
            if (is_better(preds[i], preds[best], method)) best = i;
        if (!is_better(preds[best], state.prediction, method)) break;
        state = {std::move(candidates[best]), preds[best]};
    }
    return state;
}

inline FeatureValue random_within(const StabilityInterval& s, const FeatureValue& current, Rng& rng) {
    switch (s.kind) {
        case FeatureKind::continuous: return rng.uniform(s.lower, s.upper);
        case FeatureKind::integer:
        case FeatureKind::ordinal:
            return rng.uniform_int(static_cast<std::int64_t>(s.lower), static_cast<std::int64_t>(s.upper));
        case FeatureKind::binary: return static_cast<std::int64_t>(rng.uniform_int(0, 1));
        case FeatureKind::categorical: return s.labels[rng.index(s.labels.size())];
    }
    return current;
}

// Iteration 0: explore from the observation itself, plus optional restarts
// from random in-range starts, keeping the best outcome for the method.
inline SearchState iteration_zero(const Predictor& model, const Observation& start, double start_pred,
                                  const std::vector<std::string>& others, SearchMethod method,
                                  const MuceConfig& config,
                                  const std::map<std::string, StabilityInterval>& intervals, Rng& rng) {
    SearchState best = explore(model, {start, start_pred}, others, method, config.nsteps[0],
                               config.epsilon, intervals);
    for (int r = 0; r < config.restarts; ++r) {
        Observation o = start;
        for (const auto& name : others) o.set(name, random_within(intervals.at(name), o.at(name), rng));
        SearchState s{o, model.predict_one(o)};
        s = explore(model, std::move(s), others, method, config.nsteps[0], config.epsilon, intervals);
        if (is_better(s.prediction, best.prediction, method)) best = s;
    }
    return best;
}

} // namespace detail

/// One direction of the MUCE loop: for each of N/2 iterations, shift the
/// feature of interest by one signed epsilon step (clamped into its stability
/// interval), re-evaluate, then run the greedy exploration over the remaining
/// features with that iteration's repetition budget. Records one point per
/// iteration at signed indices direction*1 .. direction*(N/2).
inline std::vector<MucePoint> muce_search(const std::string& feature, SearchMethod method,
                                          SearchDirection direction, const MuceConfig& config,
                                          const Predictor& model,
                                          const std::map<std::string, StabilityInterval>& intervals,
                                          const std::vector<std::string>& others,
                                          detail::SearchState start) {
    const StabilityInterval& si = intervals.at(feature);
    if (si.kind == FeatureKind::binary || si.kind == FeatureKind::categorical)
        fail(Errc::bad_config, "directional search applies to ordered features only");
    int half = config.n_iterations / 2;
    double sign = direction == SearchDirection::plus ? 1.0 : -1.0;
    auto it = config.epsilon.find(feature);
    double eps = it == config.epsilon.end() ? 0.0 : it->second;

    std::vector<MucePoint> points;
    points.reserve(static_cast<std::size_t>(half));
    detail::SearchState cur = std::move(start);
    for (int n = 1; n <= half; ++n) {
        bool moved = false;
        if (si.kind == FeatureKind::continuous) {
            double v = numeric_value(cur.obs.at(feature));
            double shifted = std::clamp(v + sign * eps, si.lower, si.upper);
            if (shifted != v) {
                cur.obs.set(feature, shifted);
                moved = true;
            }
        } else {
            auto v = int_value(cur.obs.at(feature));
            auto step = static_cast<std::int64_t>(std::llround(std::abs(eps)));
            auto shifted = std::clamp(v + (direction == SearchDirection::plus ? step : -step),
                                      static_cast<std::int64_t>(si.lower),
                                      static_cast<std::int64_t>(si.upper));
            if (shifted != v) {
                cur.obs.set(feature, shifted);
                moved = true;
            }
        }
        if (moved) cur.prediction = model.predict_one(cur.obs);
        cur = detail::explore(model, std::move(cur), others, method, config.nsteps[static_cast<std::size_t>(n)],
                              config.epsilon, intervals);
        int index = direction == SearchDirection::plus ? n : -n;
        points.push_back({index, cur.obs.at(feature), cur.obs, cur.prediction});
    }
    return points;
}

namespace detail {

inline MuceConfig resolve_config(const ExplanationGrid& grid, const MuceConfig& in) {
    MuceConfig config = in;
    if (config.n_iterations <= 0 || config.n_iterations % 2 != 0)
        fail(Errc::bad_config, "iteration count N must be even and positive");
    std::size_t needed = static_cast<std::size_t>(config.n_iterations / 2) + 1;
    if (config.nsteps.size() < needed)
        fail(Errc::bad_config, "nsteps must cover iteration 0 through N/2");
    for (int t : config.nsteps)
        if (t < 0) fail(Errc::bad_config, "repetition counts must be non-negative");
    if (config.n_local < 3) fail(Errc::bad_config, "n_local must be at least 3");
    if (config.restarts < 0) fail(Errc::bad_config, "restart count must be non-negative");

    double half = static_cast<double>(config.n_iterations) / 2.0;
    for (const auto& gf : grid.features) {
        const std::string& name = gf.spec.name;
        if (!is_numeric_kind(gf.spec.kind) || gf.spec.kind == FeatureKind::binary) continue;
        auto it = config.epsilon.find(name);
        if (it != config.epsilon.end()) {
            if (it->second <= 0.0) fail(Errc::bad_config, "epsilon for '" + name + "' must be positive");
            if (is_integer_kind(gf.spec.kind) && it->second < 1.0)
                fail(Errc::bad_config, "integer feature '" + name + "' requires epsilon >= 1");
            continue;
        }
        double eps = gf.delta / half;
        if (is_integer_kind(gf.spec.kind)) eps = std::max<double>(1.0, static_cast<double>(std::llround(eps)));
        config.epsilon[name] = eps;
    }
    return config;
}

inline void track_extremes(const MuceCurve& curve, SearchMethod method, Extremal& out) {
    bool first = true;
    for (const auto& p : curve.points) {
        if (first || is_better(p.prediction, out.probability, method)) {
            out = {p.observation, p.prediction};
            first = false;
        }
    }
}

} // namespace detail

/// Upper bound on the number of observations submitted to the predictor by one
/// compute_muce call, derivable from the configuration, the grid, and the
/// selected category subsets alone. Early exploration breaks and dropped
/// candidates only reduce the actual count.
inline std::size_t predictor_call_budget(const ExplanationGrid& grid, const Observation& obs,
                                         const std::string& feature, const MuceConfig& config_in) {
    MuceConfig config = detail::resolve_config(grid, config_in);
    auto intervals = stability_intervals(grid, obs);
    const GridFeature& gf = grid.feature(feature);

    std::size_t per_step = 0;
    for (const auto& f : grid.features) {
        if (f.spec.name == feature) continue;
        const StabilityInterval& s = intervals.at(f.spec.name);
        switch (s.kind) {
            case FeatureKind::binary: per_step += 1; break;
            case FeatureKind::categorical: per_step += s.labels.empty() ? 0 : s.labels.size() - 1; break;
            default: per_step += 2; break;
        }
    }

    std::size_t ice_points;
    switch (gf.spec.kind) {
        case FeatureKind::binary: ice_points = 2; break;
        case FeatureKind::categorical: ice_points = intervals.at(feature).labels.size(); break;
        default: ice_points = config.n_local + 1; break;
    }

    auto t1 = static_cast<std::size_t>(config.nsteps[0]);
    std::size_t iter0 = t1 * per_step +
                        static_cast<std::size_t>(config.restarts) * (1 + t1 * per_step);
    std::size_t budget = 1 + ice_points; // model(x) plus the restricted ICE batch
    if (gf.spec.kind == FeatureKind::binary || gf.spec.kind == FeatureKind::categorical) {
        std::size_t positions =
            gf.spec.kind == FeatureKind::binary ? 2 : intervals.at(feature).labels.size();
        budget += positions;            // per-position start evaluations
        budget += 2 * positions * iter0;
    } else {
        budget += 2 * iter0;
        std::size_t per_direction = 0;
        for (int n = 1; n <= config.n_iterations / 2; ++n)
            per_direction += 1 + static_cast<std::size_t>(config.nsteps[static_cast<std::size_t>(n)]) * per_step;
        budget += 2 * 2 * per_direction;
    }
    return budget;
}

/// Full MUCE explanation for one feature of interest: max and min curves over
/// signed indices -N/2..N/2 (ordered kinds) or one position per evaluated
/// value/label (binary/categorical), the restricted ICE overlay, and the
/// extremal observations. Iteration 0 is computed once per method and shared
/// by both directions.
inline MuceResult compute_muce(const ExplanationGrid& grid, const Observation& x,
                               const std::string& feature, const Predictor& model,
                               const MuceConfig& config_in = {}) {
    validate_observation(x, grid.schema());
    const GridFeature& gf = grid.feature(feature);
    MuceConfig config = detail::resolve_config(grid, config_in);
    auto intervals = stability_intervals(grid, x);
    std::vector<std::string> others;
    for (const auto& f : grid.features)
        if (f.spec.name != feature) others.push_back(f.spec.name);

    MuceResult result;
    result.feature = feature;
    result.ice_restricted = compute_ice_local(grid, x, feature, model, config.n_local);
    double y0 = model.predict_one(x);
    Rng rng(config.seed ^ fnv1a(feature));

    bool positional = gf.spec.kind == FeatureKind::binary || gf.spec.kind == FeatureKind::categorical;
    if (!positional) {
        for (SearchMethod method : {SearchMethod::maximize, SearchMethod::minimize}) {
            detail::SearchState s0 =
                detail::iteration_zero(model, x, y0, others, method, config, intervals, rng);
            auto plus = muce_search(feature, method, SearchDirection::plus, config, model, intervals,
                                    others, s0);
            auto minus = muce_search(feature, method, SearchDirection::minus, config, model, intervals,
                                     others, s0);
            MuceCurve curve;
            curve.ordered = true;
            for (auto it = minus.rbegin(); it != minus.rend(); ++it) curve.points.push_back(*it);
            curve.points.push_back({0, x.at(feature), s0.obs, s0.prediction});
            for (auto& p : plus) curve.points.push_back(std::move(p));
            (method == SearchMethod::maximize ? result.max_curve : result.min_curve) = std::move(curve);
        }
    } else {
        std::vector<FeatureValue> positions;
        if (gf.spec.kind == FeatureKind::binary)
            positions = {FeatureValue(std::int64_t{0}), FeatureValue(std::int64_t{1})};
        else
            for (const auto& label : intervals.at(feature).labels) positions.emplace_back(label);

        result.max_curve.ordered = false;
        result.min_curve.ordered = false;
        int idx = 0;
        for (const auto& value : positions) {
            Observation start = x;
            start.set(feature, value);
            double pred = value == x.at(feature) ? y0 : model.predict_one(start);
            for (SearchMethod method : {SearchMethod::maximize, SearchMethod::minimize}) {
                detail::SearchState s =
                    detail::iteration_zero(model, start, pred, others, method, config, intervals, rng);
                MuceCurve& curve =
                    method == SearchMethod::maximize ? result.max_curve : result.min_curve;
                curve.points.push_back({idx, value, s.obs, s.prediction});
            }
            ++idx;
        }
    }

    detail::track_extremes(result.max_curve, SearchMethod::maximize, result.extremal_max);
    detail::track_extremes(result.min_curve, SearchMethod::minimize, result.extremal_min);
    return result;
}

namespace detail {

// delta = fl(to - from); its rounding error relative to `to` is recovered
// exactly (the residual lives in the same binade as `to`), so applying both
// terms reconstructs `to` bit-exactly.
inline NumericDelta exact_numeric_delta(double from, double to) {
    NumericDelta d;
    d.primary = to - from;
    double landed = from + d.primary;
    d.correction = to - landed;
    if ((from + d.primary) + d.correction != to)
        throw std::logic_error("compensated delta failed to reconstruct the extremal value");
    return d;
}

} // namespace detail

/// Applies a feature variation to an observation.
inline Observation apply_variation(const Observation& x, const FeatureVariation& fv) {
    Observation out = x;
    for (const auto& [name, change] : fv.changes) {
        const FeatureValue& cur = out.at(name);
        if (std::holds_alternative<std::string>(change)) {
            out.set(name, std::get<std::string>(change));
        } else if (std::holds_alternative<std::int64_t>(change)) {
            out.set(name, int_value(cur) + std::get<std::int64_t>(change));
        } else {
            const NumericDelta& d = std::get<NumericDelta>(change);
            out.set(name, (numeric_value(cur) + d.primary) + d.correction);
        }
    }
    return out;
}

/// Per-feature deltas (or label replacements) from the original observation to
/// the chosen extremal one. apply_variation(x, result) reconstructs the
/// extremal observation bit-exactly.
inline FeatureVariation extract_feature_variation(const MuceResult& result, const Observation& x,
                                                  SearchMethod which) {
    const Extremal& target =
        which == SearchMethod::maximize ? result.extremal_max : result.extremal_min;
    FeatureVariation fv;
    for (const auto& [name, from] : x.values) {
        const FeatureValue& to = target.observation.at(name);
        if (holds_label(from)) {
            fv.changes[name] = std::get<std::string>(to);
        } else if (holds_int(from)) {
            fv.changes[name] = int_value(to) - int_value(from);
        } else {
            fv.changes[name] = detail::exact_numeric_delta(std::get<double>(from), std::get<double>(to));
        }
    }
    return fv;
}

} // namespace muce
