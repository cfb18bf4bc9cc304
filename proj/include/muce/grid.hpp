#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "muce/feature_model.hpp"
#include "muce/format.hpp"

namespace muce {

enum class CategoryModelMode { rows, centroids };

// Inference-time stand-in for the training data when ordering a categorical
// feature's labels by proximity to the observation. The rows mode keeps the
// encoded training rows and reproduces the dataset computation exactly; the
// centroids mode keeps one mean vector per label and avoids persisting
// individual rows.
struct CategoryOrderModel {
    CategoryModelMode mode = CategoryModelMode::rows;
    std::size_t k = 5;
    std::vector<std::string> row_labels;
    std::vector<std::vector<double>> encoded_rows;
    std::vector<std::string> labels;    // centroids mode, aligned with centroids
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> counts;
};

struct GridFeature {
    FeatureSpec spec;                       // carries observed min/max after fitting
    std::vector<FeatureValue> grid_values;  // sorted ascending for numeric kinds
    double delta = 0.0;                     // stability_fraction * observed range
    std::optional<CategoryOrderModel> order_model;
};

struct GridOptions {
    std::size_t grid_size = 50;
    double stability_fraction = 0.05;
    std::size_t k_categories = 5;
    CategoryModelMode category_model = CategoryModelMode::rows;
    // Per-feature delta overrides, e.g. a sensor's known measurement error;
    // features absent from the map use stability_fraction * observed range.
    std::map<std::string, double> delta_overrides;
};

struct ExplanationGrid {
    std::vector<GridFeature> features;
    double stability_fraction = 0.05;
    std::size_t grid_size = 50;
    std::size_t k_categories = 5;
    CategoryModelMode category_model = CategoryModelMode::rows;
    ScalingStats scaling;

    Schema schema() const {
        Schema s;
        s.reserve(features.size());
        for (const auto& f : features) s.push_back(f.spec);
        return s;
    }

    const GridFeature& feature(const std::string& name) const {
        for (const auto& f : features)
            if (f.spec.name == name) return f;
        fail(Errc::unknown_feature, "feature '" + name + "' not in grid");
    }
};

// Either a numeric interval (already rounded for integer kinds and clamped to
// the observed range) or, for categorical features, the selected label subset.
struct StabilityInterval {
    std::string feature;
    FeatureKind kind = FeatureKind::continuous;
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::string> labels;

    bool single_point() const { return kind != FeatureKind::categorical && lower == upper; }
};

struct CategoryOrdering {
    std::vector<std::string> labels;    // permutation of the label set
    std::vector<double> mean_distances; // aligned; infinity for empty categories
    std::vector<bool> empty;            // true when the label had no training rows
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 1 || lo == hi) return {lo};
    std::vector<double> v(n);
    double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
    v.back() = hi;
    return v;
}

inline std::vector<std::int64_t> rounded_dedup(const std::vector<double>& vals) {
    std::vector<std::int64_t> out;
    out.reserve(vals.size());
    for (double v : vals) {
        std::int64_t r = std::llround(v);
        if (out.empty() || out.back() != r) out.push_back(r);
    }
    return out;
}

// Mean distance from the query to the min(k, n) nearest of the given encoded
// rows; ties at the cut are resolved by row index, which cannot change the mean.
inline double mean_knn_distance(const std::vector<double>& query,
                                const std::vector<const std::vector<double>*>& rows, std::size_t k) {
    std::vector<double> d;
    d.reserve(rows.size());
    for (const auto* r : rows) d.push_back(std::sqrt(squared_distance(query, *r)));
    std::size_t take = std::min(k, d.size());
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take - 1), d.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += d[i];
    return sum / static_cast<double>(take);
}

inline CategoryOrdering order_by_mean_distance(const std::vector<std::string>& all_labels,
                                               const std::map<std::string, double>& mean_by_label) {
    struct Entry {
        std::string label;
        double mean;
        bool empty;
    };
    std::vector<Entry> entries;
    entries.reserve(all_labels.size());
    for (const auto& label : all_labels) {
        auto it = mean_by_label.find(label);
        bool empty = it == mean_by_label.end();
        entries.push_back({label, empty ? std::numeric_limits<double>::infinity() : it->second, empty});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.empty != b.empty) return b.empty; // empty categories go last
        if (a.mean != b.mean) return a.mean < b.mean;
        return a.label < b.label;
    });
    CategoryOrdering ord;
    for (const auto& e : entries) {
        ord.labels.push_back(e.label);
        ord.mean_distances.push_back(e.mean);
        ord.empty.push_back(e.empty);
    }
    return ord;
}

} // namespace detail

/// Ranks a categorical feature's labels by the mean encoded-space distance from
/// the observation to each label's k nearest training rows. Ties break
/// lexicographically; labels without training rows sort last and are flagged.
inline CategoryOrdering order_categories(const Dataset& data, const std::string& feature,
                                         const Observation& obs, std::size_t k) {
    const FeatureSpec& spec = require_feature(data.schema, feature);
    if (spec.kind != FeatureKind::categorical)
        fail(Errc::not_categorical, "feature '" + feature + "' is not categorical");
    if (k == 0) fail(Errc::bad_config, "k must be positive");
    auto scaling = compute_scaling(data);
    auto query = encode_for_distance(obs, data.schema, feature, scaling);

    std::map<std::string, std::vector<std::vector<double>>> encoded_by_label;
    for (const auto& row : data.rows) {
        const std::string& label = label_value(row.at(feature));
        encoded_by_label[label].push_back(encode_for_distance(row, data.schema, feature, scaling));
    }
    std::map<std::string, double> means;
    for (const auto& [label, rows] : encoded_by_label) {
        std::vector<const std::vector<double>*> ptrs;
        ptrs.reserve(rows.size());
        for (const auto& r : rows) ptrs.push_back(&r);
        means[label] = detail::mean_knn_distance(query, ptrs, k);
    }
    return detail::order_by_mean_distance(spec.categories, means);
}

/// Same ranking computed from the grid's persisted ordering model, without the
/// training data.
inline CategoryOrdering order_categories(const ExplanationGrid& grid, const std::string& feature,
                                         const Observation& obs) {
    const GridFeature& gf = grid.feature(feature);
    if (gf.spec.kind != FeatureKind::categorical)
        fail(Errc::not_categorical, "feature '" + feature + "' is not categorical");
    if (!gf.order_model) fail(Errc::bad_config, "grid lacks an ordering model for '" + feature + "'");
    const CategoryOrderModel& m = *gf.order_model;
    auto query = encode_for_distance(obs, grid.schema(), feature, grid.scaling);

    std::map<std::string, double> means;
    if (m.mode == CategoryModelMode::rows) {
        std::map<std::string, std::vector<const std::vector<double>*>> by_label;
        for (std::size_t i = 0; i < m.encoded_rows.size(); ++i)
            by_label[m.row_labels[i]].push_back(&m.encoded_rows[i]);
        for (const auto& [label, rows] : by_label)
            means[label] = detail::mean_knn_distance(query, rows, m.k);
    } else {
        for (std::size_t i = 0; i < m.labels.size(); ++i)
            if (m.counts[i] > 0)
                means[m.labels[i]] = std::sqrt(squared_distance(query, m.centroids[i]));
    }
    return detail::order_by_mean_distance(gf.spec.categories, means);
}

/// Keeps the first max(3, ceil(2*fraction*cardinality)) labels of an ordering,
/// forcing the observation's own label into the last kept slot if it fell
/// outside. Label sets of cardinality <= 3 are kept whole.
inline std::vector<std::string> select_categories(const std::vector<std::string>& ordered,
                                                  const std::string& obs_label,
                                                  double stability_fraction) {
    if (std::find(ordered.begin(), ordered.end(), obs_label) == ordered.end())
        fail(Errc::unknown_category, "observation label '" + obs_label + "' not in ordering");
    std::size_t card = ordered.size();
    if (card <= 3) return ordered;
    auto keep = static_cast<std::size_t>(
        std::max(3.0, std::ceil(2.0 * stability_fraction * static_cast<double>(card))));
    keep = std::min(keep, card);
    std::vector<std::string> out(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(keep));
    if (std::find(out.begin(), out.end(), obs_label) == out.end()) out.back() = obs_label;
    return out;
}

/// Fits the explanation grid: per-feature value grids between the observed
/// extremes, stability deltas, and (for categorical features) the ordering
/// model. Depends only on feature extremes, label sets, and the rows fed to
/// the ordering model, never on row order.
inline ExplanationGrid fit_grid(const Dataset& data, const GridOptions& options = {}) {
    if (data.rows.empty()) fail(Errc::empty_dataset, "cannot fit a grid on an empty dataset");
    if (options.grid_size < 2) fail(Errc::bad_config, "grid size must be at least 2");
    if (!(options.stability_fraction > 0.0 && options.stability_fraction <= 0.5))
        fail(Errc::bad_config, "stability fraction must lie in (0, 0.5]");
    if (options.k_categories == 0) fail(Errc::bad_config, "k for category ordering must be positive");

    ExplanationGrid grid;
    grid.stability_fraction = options.stability_fraction;
    grid.grid_size = options.grid_size;
    grid.k_categories = options.k_categories;
    grid.category_model = options.category_model;
    grid.scaling = compute_scaling(data);

    for (const auto& spec : data.schema) {
        GridFeature gf;
        gf.spec = spec;
        if (is_numeric_kind(spec.kind)) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& row : data.rows) {
                double v = numeric_value(row.at(spec.name));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            gf.spec.observed_min = lo;
            gf.spec.observed_max = hi;
            auto ov = options.delta_overrides.find(spec.name);
            if (ov != options.delta_overrides.end()) {
                if (ov->second < 0.0) fail(Errc::bad_config, "delta override must be non-negative");
                gf.delta = ov->second;
            } else {
                gf.delta = options.stability_fraction * (hi - lo);
            }
            switch (spec.kind) {
                case FeatureKind::continuous:
                    for (double v : detail::linspace(lo, hi, options.grid_size)) gf.grid_values.emplace_back(v);
                    break;
                case FeatureKind::binary:
                    gf.grid_values = {FeatureValue(std::int64_t{0}), FeatureValue(std::int64_t{1})};
                    break;
                default: // integer, ordinal
                    for (auto v : detail::rounded_dedup(detail::linspace(lo, hi, options.grid_size)))
                        gf.grid_values.emplace_back(v);
                    break;
            }
        } else {
            for (const auto& label : spec.categories) gf.grid_values.emplace_back(label);
            CategoryOrderModel model;
            model.mode = options.category_model;
            model.k = options.k_categories;
            if (options.category_model == CategoryModelMode::rows) {
                model.row_labels.reserve(data.rows.size());
                model.encoded_rows.reserve(data.rows.size());
                for (const auto& row : data.rows) {
                    model.row_labels.push_back(label_value(row.at(spec.name)));
                    model.encoded_rows.push_back(
                        encode_for_distance(row, data.schema, spec.name, grid.scaling));
                }
            } else {
                std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
                for (const auto& row : data.rows) {
                    auto enc = encode_for_distance(row, data.schema, spec.name, grid.scaling);
                    auto& slot = acc[label_value(row.at(spec.name))];
                    if (slot.first.empty()) slot.first.assign(enc.size(), 0.0);
                    for (std::size_t i = 0; i < enc.size(); ++i) slot.first[i] += enc[i];
                    slot.second += 1;
                }
                for (const auto& label : spec.categories) {
                    model.labels.push_back(label);
                    auto it = acc.find(label);
                    if (it == acc.end()) {
                        model.centroids.emplace_back();
                        model.counts.push_back(0);
                    } else {
                        auto centroid = it->second.first;
                        for (auto& c : centroid) c /= static_cast<double>(it->second.second);
                        model.centroids.push_back(std::move(centroid));
                        model.counts.push_back(it->second.second);
                    }
                }
            }
            gf.order_model = std::move(model);
        }
        grid.features.push_back(std::move(gf));
    }
    return grid;
}

/// The region explored around the observation: numeric kinds get
/// [x - delta, x + delta] (integer endpoints rounded) clamped to the observed
/// range, binary features keep both values, categorical features the selected
/// label subset.
inline StabilityInterval stability_interval(const ExplanationGrid& grid, const Observation& obs,
                                            const std::string& feature) {
    const GridFeature& gf = grid.feature(feature);
    StabilityInterval out;
    out.feature = feature;
    out.kind = gf.spec.kind;
    switch (gf.spec.kind) {
        case FeatureKind::binary:
            out.lower = 0.0;
            out.upper = 1.0;
            break;
        case FeatureKind::continuous: {
            double x = numeric_value(obs.at(feature));
            out.lower = std::clamp(x - gf.delta, gf.spec.observed_min, gf.spec.observed_max);
            out.upper = std::clamp(x + gf.delta, gf.spec.observed_min, gf.spec.observed_max);
            break;
        }
        case FeatureKind::integer:
        case FeatureKind::ordinal: {
            double x = numeric_value(obs.at(feature));
            double lo = static_cast<double>(std::llround(x - gf.delta));
            double hi = static_cast<double>(std::llround(x + gf.delta));
            out.lower = std::clamp(lo, gf.spec.observed_min, gf.spec.observed_max);
            out.upper = std::clamp(hi, gf.spec.observed_min, gf.spec.observed_max);
            break;
        }
        case FeatureKind::categorical: {
            auto ordering = order_categories(grid, feature, obs);
            out.labels =
                select_categories(ordering.labels, label_value(obs.at(feature)), grid.stability_fraction);
            break;
        }
    }
    return out;
}

inline std::map<std::string, StabilityInterval> stability_intervals(const ExplanationGrid& grid,
                                                                    const Observation& obs) {
    std::map<std::string, StabilityInterval> out;
    for (const auto& gf : grid.features) out[gf.spec.name] = stability_interval(grid, obs, gf.spec.name);
    return out;
}

// --- persistence ------------------------------------------------------------

inline constexpr const char* kGridArtifactTag = "muce-grid";
inline constexpr int kGridArtifactVersion = 1;

inline nlohmann::json grid_to_json(const ExplanationGrid& grid) {
    nlohmann::json j;
    j["artifact"] = kGridArtifactTag;
    j["version"] = kGridArtifactVersion;
    j["stability_fraction"] = grid.stability_fraction;
    j["grid_size"] = grid.grid_size;
    j["k_categories"] = grid.k_categories;
    j["category_model"] = grid.category_model == CategoryModelMode::rows ? "rows" : "centroids";
    nlohmann::json scaling = nlohmann::json::object();
    for (const auto& [name, s] : grid.scaling) scaling[name] = {{"mean", s.mean}, {"stddev", s.stddev}};
    j["scaling"] = std::move(scaling);
    j["features"] = nlohmann::json::array();
    for (const auto& gf : grid.features) {
        nlohmann::json f;
        f["name"] = gf.spec.name;
        f["kind"] = kind_name(gf.spec.kind);
        if (is_numeric_kind(gf.spec.kind)) {
            f["observed_min"] = gf.spec.observed_min;
            f["observed_max"] = gf.spec.observed_max;
            f["delta"] = gf.delta;
            nlohmann::json vals = nlohmann::json::array();
            for (const auto& v : gf.grid_values) {
                if (holds_real(v))
                    vals.push_back(std::get<double>(v));
                else
                    vals.push_back(std::get<std::int64_t>(v));
            }
            f["grid"] = std::move(vals);
            if (gf.spec.kind == FeatureKind::ordinal)
                f["levels"] = {gf.spec.level_min, gf.spec.level_max};
        } else {
            f["categories"] = gf.spec.categories;
            const CategoryOrderModel& m = *gf.order_model;
            nlohmann::json om;
            om["mode"] = m.mode == CategoryModelMode::rows ? "rows" : "centroids";
            om["k"] = m.k;
            if (m.mode == CategoryModelMode::rows) {
                om["row_labels"] = m.row_labels;
                om["rows"] = m.encoded_rows;
            } else {
                om["labels"] = m.labels;
                om["centroids"] = m.centroids;
                om["counts"] = m.counts;
            }
            f["order_model"] = std::move(om);
        }
        j["features"].push_back(std::move(f));
    }
    return j;
}

inline ExplanationGrid grid_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("artifact", "") != kGridArtifactTag)
        fail(Errc::io_failure, "not a grid artifact");
    if (j.value("version", 0) != kGridArtifactVersion)
        fail(Errc::io_failure, "unsupported grid artifact version");
    ExplanationGrid grid;
    grid.stability_fraction = j.at("stability_fraction").get<double>();
    grid.grid_size = j.at("grid_size").get<std::size_t>();
    grid.k_categories = j.at("k_categories").get<std::size_t>();
    grid.category_model =
        j.at("category_model").get<std::string>() == "rows" ? CategoryModelMode::rows : CategoryModelMode::centroids;
    for (const auto& [name, s] : j.at("scaling").items())
        grid.scaling[name] = {s.at("mean").get<double>(), s.at("stddev").get<double>()};
    for (const auto& f : j.at("features")) {
        GridFeature gf;
        gf.spec.name = f.at("name").get<std::string>();
        gf.spec.kind = kind_from_name(f.at("kind").get<std::string>());
        if (is_numeric_kind(gf.spec.kind)) {
            gf.spec.observed_min = f.at("observed_min").get<double>();
            gf.spec.observed_max = f.at("observed_max").get<double>();
            gf.delta = f.at("delta").get<double>();
            for (const auto& v : f.at("grid")) {
                if (gf.spec.kind == FeatureKind::continuous)
                    gf.grid_values.emplace_back(v.get<double>());
                else
                    gf.grid_values.emplace_back(v.get<std::int64_t>());
            }
            if (gf.spec.kind == FeatureKind::ordinal) {
                gf.spec.level_min = f.at("levels")[0].get<std::int64_t>();
                gf.spec.level_max = f.at("levels")[1].get<std::int64_t>();
            }
        } else {
            gf.spec.categories = f.at("categories").get<std::vector<std::string>>();
            for (const auto& label : gf.spec.categories) gf.grid_values.emplace_back(label);
            const auto& om = f.at("order_model");
            CategoryOrderModel m;
            m.mode = om.at("mode").get<std::string>() == "rows" ? CategoryModelMode::rows
                                                                : CategoryModelMode::centroids;
            m.k = om.at("k").get<std::size_t>();
            if (m.mode == CategoryModelMode::rows) {
                m.row_labels = om.at("row_labels").get<std::vector<std::string>>();
                m.encoded_rows = om.at("rows").get<std::vector<std::vector<double>>>();
            } else {
                m.labels = om.at("labels").get<std::vector<std::string>>();
                m.centroids = om.at("centroids").get<std::vector<std::vector<double>>>();
                m.counts = om.at("counts").get<std::vector<std::size_t>>();
            }
            gf.order_model = std::move(m);
        }
        grid.features.push_back(std::move(gf));
    }
    return grid;
}

} // namespace muce
