#pragma once

// Shared fixtures for the unit and acceptance suites: random schema/dataset
// generators, deterministic stand-in predictors, a counting/confinement
// predictor wrapper, and the brute-force lattice oracle for the greedy search.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "muce/grid.hpp"
#include "muce/muce.hpp"
#include "muce/predictor.hpp"
#include "muce/rng.hpp"

namespace muce::testing {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// --- random schemas and datasets ---------------------------------------------

struct InstanceOptions {
    std::size_t min_features = 2;
    std::size_t max_features = 8;
    bool continuous_only = false;
    bool allow_categorical = true;
};

inline Schema random_schema(Rng& rng, const InstanceOptions& opt = {}) {
    std::size_t n = opt.min_features + rng.index(opt.max_features - opt.min_features + 1);
    static const std::vector<std::string> label_pool = {"A", "B", "C", "D", "E", "F"};
    Schema schema;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureSpec spec;
        spec.name = "F" + std::to_string(i + 1);
        std::size_t kind = opt.continuous_only ? 0 : rng.index(opt.allow_categorical ? 5 : 4);
        switch (kind) {
            case 0: spec.kind = FeatureKind::continuous; break;
            case 1: spec.kind = FeatureKind::integer; break;
            case 2: spec.kind = FeatureKind::binary; break;
            case 3:
                spec.kind = FeatureKind::ordinal;
                spec.level_min = 0;
                spec.level_max = 4 + static_cast<std::int64_t>(rng.index(4));
                break;
            default: {
                spec.kind = FeatureKind::categorical;
                std::size_t card = 3 + rng.index(4);
                spec.categories.assign(label_pool.begin(), label_pool.begin() + static_cast<long>(card));
                break;
            }
        }
        schema.push_back(std::move(spec));
    }
    return schema;
}

// Extremes of the numeric observations each feature will take; anchor rows pin
// the observed min/max so fitted grids are exactly reproducible in tests.
struct FeatureRange {
    double lo = 0.0;
    double hi = 1.0;
};

inline std::map<std::string, FeatureRange> random_ranges(const Schema& schema, Rng& rng) {
    std::map<std::string, FeatureRange> ranges;
    for (const auto& spec : schema) {
        switch (spec.kind) {
            case FeatureKind::continuous: {
                double lo = rng.uniform(-5.0, 5.0);
                ranges[spec.name] = {lo, lo + rng.uniform(0.5, 8.0)};
                break;
            }
            case FeatureKind::integer: {
                auto lo = rng.uniform_int(-20, 20);
                ranges[spec.name] = {static_cast<double>(lo),
                                     static_cast<double>(lo + rng.uniform_int(4, 40))};
                break;
            }
            case FeatureKind::binary: ranges[spec.name] = {0.0, 1.0}; break;
            case FeatureKind::ordinal:
                ranges[spec.name] = {static_cast<double>(spec.level_min),
                                     static_cast<double>(spec.level_max)};
                break;
            case FeatureKind::categorical: break;
        }
    }
    return ranges;
}

inline FeatureValue value_at_fraction(const FeatureSpec& spec, const FeatureRange& r, double t) {
    switch (spec.kind) {
        case FeatureKind::continuous: return r.lo * (1.0 - t) + r.hi * t;
        case FeatureKind::binary: return std::int64_t{t >= 0.5 ? 1 : 0};
        default: return std::llround(r.lo * (1.0 - t) + r.hi * t);
    }
}

/// Rows covering every category and pinning numeric extremes exactly.
inline Dataset random_dataset(const Schema& schema, const std::map<std::string, FeatureRange>& ranges,
                              Rng& rng, std::size_t extra_rows = 12) {
    std::size_t max_card = 2;
    for (const auto& spec : schema)
        if (spec.kind == FeatureKind::categorical) max_card = std::max(max_card, spec.categories.size());

    Dataset data;
    data.schema = schema;
    data.labels.emplace();
    std::size_t total = 2 * max_card + extra_rows;
    for (std::size_t i = 0; i < total; ++i) {
        Observation obs;
        for (const auto& spec : schema) {
            if (spec.kind == FeatureKind::categorical) {
                obs.set(spec.name, spec.categories[i % spec.categories.size()]);
                continue;
            }
            const FeatureRange& r = ranges.at(spec.name);
            double t = i == 0 ? 0.0 : (i == 1 ? 1.0 : rng.unit());
            obs.set(spec.name, value_at_fraction(spec, r, t));
        }
        data.rows.push_back(std::move(obs));
        data.labels->push_back(static_cast<int>(rng.index(2)));
    }
    return data;
}

/// Observation away from the observed extremes (so stability intervals are
/// two-sided); `centered` puts numeric features exactly mid-range.
inline Observation random_observation(const Schema& schema,
                                      const std::map<std::string, FeatureRange>& ranges, Rng& rng,
                                      bool centered = false) {
    Observation obs;
    for (const auto& spec : schema) {
        if (spec.kind == FeatureKind::categorical) {
            obs.set(spec.name, spec.categories[rng.index(spec.categories.size())]);
            continue;
        }
        const FeatureRange& r = ranges.at(spec.name);
        double t = centered ? 0.5 : 0.25 + 0.5 * rng.unit();
        obs.set(spec.name, value_at_fraction(spec, r, t));
    }
    return obs;
}

// --- deterministic stand-in predictors ---------------------------------------

/// Piecewise-constant pseudo-random surface: every observation hashes its cell
/// coordinates (feature-wise bins for continuous values, exact values
/// otherwise) to a probability. Highly non-monotone; deterministic.
inline PredictorPtr make_cell_hash_predictor(const Schema& schema,
                                             const std::map<std::string, FeatureRange>& ranges,
                                             std::uint64_t seed, double cell_width_scale) {
    std::map<std::string, double> width, anchor;
    Rng rng(seed);
    for (const auto& spec : schema) {
        if (spec.kind != FeatureKind::continuous) continue;
        const FeatureRange& r = ranges.at(spec.name);
        width[spec.name] = cell_width_scale * (r.hi - r.lo) * (0.02 + 0.08 * rng.unit());
        anchor[spec.name] = r.lo + rng.uniform(0.0, width[spec.name]);
    }
    auto fn = [width, anchor, seed](const Observation& obs) {
        std::uint64_t h = seed;
        for (const auto& [name, v] : obs.values) {
            std::uint64_t cell;
            if (holds_label(v))
                cell = fnv1a(std::get<std::string>(v));
            else if (holds_int(v))
                cell = static_cast<std::uint64_t>(std::get<std::int64_t>(v) + 1000000);
            else
                cell = static_cast<std::uint64_t>(
                    static_cast<std::int64_t>(std::floor((std::get<double>(v) - anchor.at(name)) / width.at(name))) +
                    1000000);
            h = splitmix64(h ^ fnv1a(name) ^ cell);
        }
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    };
    return std::make_shared<FunctionPredictor>("cell-hash", fn);
}

/// Strictly monotone in every numeric coordinate (random sign per feature),
/// bounded well inside (0,1) so greedy improvements never saturate.
inline PredictorPtr make_monotone_predictor(const Schema& schema,
                                            const std::map<std::string, FeatureRange>& ranges,
                                            std::uint64_t seed,
                                            std::map<std::string, double>* signs_out = nullptr) {
    Rng rng(seed);
    std::map<std::string, double> weight;
    double total = 0.0;
    for (const auto& spec : schema) {
        double w = (0.5 + rng.unit()) * (rng.unit() < 0.5 ? -1.0 : 1.0);
        weight[spec.name] = w;
        total += std::abs(w);
    }
    if (signs_out) *signs_out = weight;
    auto fn = [weight, ranges, total](const Observation& obs) {
        double score = 0.0;
        for (const auto& [name, v] : obs.values) {
            const FeatureRange& r = ranges.at(name);
            double span = r.hi > r.lo ? r.hi - r.lo : 1.0;
            score += weight.at(name) * (numeric_value(v) - r.lo) / span;
        }
        return 0.5 + 0.3 * score / total;
    };
    return std::make_shared<FunctionPredictor>("monotone", fn);
}

// --- counting / confinement wrapper ------------------------------------------

class CountingPredictor final : public Predictor {
public:
    explicit CountingPredictor(PredictorPtr inner) : inner_(std::move(inner)) {}

    void set_intervals(const std::map<std::string, StabilityInterval>* intervals) {
        intervals_ = intervals;
    }
    void reset() {
        observations_ = 0;
        violations_ = 0;
    }
    std::size_t observations() const { return observations_.load(); }
    std::size_t violations() const { return violations_.load(); }

    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        observations_ += batch.size();
        if (intervals_)
            for (const auto& obs : batch)
                for (const auto& [name, v] : obs.values) {
                    auto it = intervals_->find(name);
                    if (it == intervals_->end()) continue;
                    const StabilityInterval& s = it->second;
                    if (s.kind == FeatureKind::categorical) {
                        const std::string& label = std::get<std::string>(v);
                        bool in = false;
                        for (const auto& l : s.labels) in = in || l == label;
                        if (!in) ++violations_;
                    } else {
                        double x = numeric_value(v);
                        if (x < s.lower || x > s.upper) ++violations_;
                    }
                }
        return inner_->predict_proba(batch);
    }
    bool concurrent_safe() const override { return inner_->concurrent_safe(); }
    std::string name() const override { return inner_->name(); }

private:
    PredictorPtr inner_;
    const std::map<std::string, StabilityInterval>* intervals_ = nullptr;
    mutable std::atomic<std::size_t> observations_{0};
    mutable std::atomic<std::size_t> violations_{0};
};

// --- brute-force lattice oracle ----------------------------------------------

/// All values a single feature can take under repeated +/-epsilon moves with
/// clamping, computed with the implementation's own arithmetic (closure over
/// exact doubles, including the boundary-anchored lattices).
inline std::vector<FeatureValue> reachable_values(const StabilityInterval& s, const FeatureValue& start,
                                                  double eps) {
    std::vector<FeatureValue> out;
    switch (s.kind) {
        case FeatureKind::continuous: {
            std::set<double> seen{std::get<double>(start)};
            std::vector<double> stack{std::get<double>(start)};
            while (!stack.empty()) {
                double v = stack.back();
                stack.pop_back();
                for (double nv : {std::clamp(v + eps, s.lower, s.upper),
                                  std::clamp(v - eps, s.lower, s.upper)}) {
                    if (seen.insert(nv).second) stack.push_back(nv);
                }
                if (seen.size() > 4096) throw std::runtime_error("reachable set blew up");
            }
            for (double v : seen) out.emplace_back(v);
            break;
        }
        case FeatureKind::integer:
        case FeatureKind::ordinal: {
            auto e = static_cast<std::int64_t>(std::llround(eps));
            auto lo = static_cast<std::int64_t>(s.lower);
            auto hi = static_cast<std::int64_t>(s.upper);
            std::set<std::int64_t> seen{std::get<std::int64_t>(start)};
            std::vector<std::int64_t> stack{std::get<std::int64_t>(start)};
            while (!stack.empty()) {
                auto v = stack.back();
                stack.pop_back();
                for (auto nv : {std::clamp(v + e, lo, hi), std::clamp(v - e, lo, hi)})
                    if (seen.insert(nv).second) stack.push_back(nv);
            }
            for (auto v : seen) out.emplace_back(v);
            break;
        }
        case FeatureKind::binary:
            out = {FeatureValue(std::int64_t{0}), FeatureValue(std::int64_t{1})};
            break;
        case FeatureKind::categorical:
            for (const auto& label : s.labels) out.emplace_back(label);
            break;
    }
    return out;
}

struct LatticeExtremes {
    double max = 0.0;
    double min = 1.0;
};

/// Exhaustive max/min prediction over the cartesian product of every other
/// feature's reachable set, with the feature of interest pinned.
inline LatticeExtremes exhaustive_extremes(const Predictor& model, const Observation& x,
                                           const std::string& feature, const FeatureValue& foi_value,
                                           const std::vector<std::string>& others,
                                           const std::map<std::string, std::vector<FeatureValue>>& reach) {
    std::vector<Observation> batch;
    Observation base = x;
    base.set(feature, foi_value);
    std::vector<std::size_t> idx(others.size(), 0);
    while (true) {
        Observation o = base;
        for (std::size_t j = 0; j < others.size(); ++j) o.set(others[j], reach.at(others[j])[idx[j]]);
        batch.push_back(std::move(o));
        std::size_t j = 0;
        for (; j < others.size(); ++j) {
            if (++idx[j] < reach.at(others[j]).size()) break;
            idx[j] = 0;
        }
        if (j == others.size()) break;
    }
    LatticeExtremes ex;
    ex.max = 0.0;
    ex.min = 1.0;
    bool first = true;
    for (std::size_t pos = 0; pos < batch.size(); pos += 2048) {
        std::size_t end = std::min(batch.size(), pos + 2048);
        std::vector<Observation> chunk(batch.begin() + static_cast<long>(pos),
                                       batch.begin() + static_cast<long>(end));
        auto preds = model.predict_proba(chunk);
        for (double p : preds) {
            if (first) {
                ex.max = ex.min = p;
                first = false;
            } else {
                ex.max = std::max(ex.max, p);
                ex.min = std::min(ex.min, p);
            }
        }
    }
    return ex;
}

} // namespace muce::testing
