#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "muce/feature_model.hpp"
#include "muce/geometry.hpp"

namespace muce {

/// Model-agnostic prediction contract: a batch of observations in, one
/// a-posteriori probability of the positive class per observation out.
/// Implementations must be deterministic and stay within [0,1].
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::vector<double> predict_proba(const std::vector<Observation>& batch) const = 0;

    /// Whether concurrent predict_proba calls are allowed; the explanation
    /// engine falls back to sequential calls otherwise.
    virtual bool concurrent_safe() const { return true; }

    virtual std::string name() const { return "predictor"; }

    double predict_one(const Observation& obs) const {
        auto out = predict_proba({obs});
        if (out.size() != 1) fail(Errc::predictor_failure, name() + " returned a malformed batch");
        return out[0];
    }
};

using PredictorPtr = std::shared_ptr<const Predictor>;

class ConstantPredictor final : public Predictor {
public:
    explicit ConstantPredictor(double p) : p_(p) {
        if (p < 0.0 || p > 1.0) fail(Errc::bad_config, "constant probability outside [0,1]");
    }
    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        return std::vector<double>(batch.size(), p_);
    }
    std::string name() const override { return "constant"; }

private:
    double p_;
};

/// Wraps an arbitrary per-observation scoring function; handy in tests and for
/// composing ad hoc models.
class FunctionPredictor final : public Predictor {
public:
    FunctionPredictor(std::string name, std::function<double(const Observation&)> fn,
                      bool concurrent = true)
        : name_(std::move(name)), fn_(std::move(fn)), concurrent_(concurrent) {}

    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        std::vector<double> out;
        out.reserve(batch.size());
        for (const auto& obs : batch) out.push_back(fn_(obs));
        return out;
    }
    bool concurrent_safe() const override { return concurrent_; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::function<double(const Observation&)> fn_;
    bool concurrent_;
};

enum class PositiveSide { inside, outside };

/// Sigmoid of a signed boundary distance: 1/(1+exp(-s*d(x))), exactly 0.5 on
/// the boundary and strictly monotone along any ray crossing it once.
class AnalyticBoundaryPredictor final : public Predictor {
public:
    using DistanceFn = std::function<double(const Observation&)>; // >0 on the positive side

    AnalyticBoundaryPredictor(std::string name, DistanceFn signed_distance, double sharpness)
        : name_(std::move(name)), distance_(std::move(signed_distance)), sharpness_(sharpness) {
        if (sharpness_ <= 0.0) fail(Errc::bad_config, "sharpness must be positive");
    }

    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        std::vector<double> out;
        out.reserve(batch.size());
        for (const auto& obs : batch) out.push_back(1.0 / (1.0 + std::exp(-sharpness_ * distance_(obs))));
        return out;
    }
    std::string name() const override { return name_; }

private:
    std::string name_;
    DistanceFn distance_;
    double sharpness_;
};

inline PredictorPtr make_cross_predictor(CrossGeometry geom, double sharpness = 10.0,
                                         PositiveSide side = PositiveSide::inside,
                                         std::string fx = "F1", std::string fy = "F2") {
    geom.validate();
    double sign = side == PositiveSide::inside ? 1.0 : -1.0;
    return std::make_shared<AnalyticBoundaryPredictor>(
        "cross", [geom, sign, fx, fy](const Observation& obs) {
            return sign * cross_signed_distance(geom, numeric_value(obs.at(fx)), numeric_value(obs.at(fy)));
        },
        sharpness);
}

inline PredictorPtr make_ellipsoid_predictor(EllipsoidGeometry geom, double sharpness = 10.0,
                                             PositiveSide side = PositiveSide::outside,
                                             std::string fx = "F1", std::string fy = "F2",
                                             std::string fz = "F3") {
    geom.validate();
    double sign = side == PositiveSide::outside ? 1.0 : -1.0;
    return std::make_shared<AnalyticBoundaryPredictor>(
        "ellipsoid", [geom, sign, fx, fy, fz](const Observation& obs) {
            return sign * ellipsoid_signed_distance(geom, numeric_value(obs.at(fx)),
                                                    numeric_value(obs.at(fy)), numeric_value(obs.at(fz)));
        },
        sharpness);
}

/// k-NN vote fraction over the encoded training set; distance ties break on the
/// lowest row index so predictions are reproducible.
class KnnProbabilityPredictor final : public Predictor {
public:
    KnnProbabilityPredictor(Schema schema, ScalingStats scaling, std::vector<std::vector<double>> rows,
                            std::vector<int> labels, std::size_t k)
        : schema_(std::move(schema)), scaling_(std::move(scaling)), rows_(std::move(rows)),
          labels_(std::move(labels)), k_(k) {}

    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        std::vector<double> out;
        out.reserve(batch.size());
        std::vector<std::size_t> idx(rows_.size());
        for (const auto& obs : batch) {
            auto q = encode_for_distance(obs, schema_, scaling_);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::vector<double> dist(rows_.size());
            for (std::size_t i = 0; i < rows_.size(); ++i) dist[i] = squared_distance(q, rows_[i]);
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_), idx.end(),
                              [&](std::size_t a, std::size_t b) {
                                  return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                              });
            int positives = 0;
            for (std::size_t i = 0; i < k_; ++i) positives += labels_[idx[i]];
            out.push_back(static_cast<double>(positives) / static_cast<double>(k_));
        }
        return out;
    }
    std::string name() const override { return "knn"; }

    std::size_t k() const { return k_; }

private:
    Schema schema_;
    ScalingStats scaling_;
    std::vector<std::vector<double>> rows_;
    std::vector<int> labels_;
    std::size_t k_;
};

inline std::shared_ptr<KnnProbabilityPredictor> fit_knn_predictor(const Dataset& data, std::size_t k) {
    if (!data.labels) fail(Errc::missing_labels, "k-NN predictor needs labeled data");
    if (k == 0 || k > data.rows.size()) fail(Errc::k_too_large, "k must be in [1, row count]");
    auto scaling = compute_scaling(data);
    std::vector<std::vector<double>> rows;
    rows.reserve(data.rows.size());
    for (const auto& row : data.rows) rows.push_back(encode_for_distance(row, data.schema, scaling));
    return std::make_shared<KnnProbabilityPredictor>(data.schema, std::move(scaling), std::move(rows),
                                                     *data.labels, k);
}

} // namespace muce
