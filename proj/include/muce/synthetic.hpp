#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "muce/feature_model.hpp"
#include "muce/geometry.hpp"
#include "muce/rng.hpp"

namespace muce {

namespace detail {

inline FeatureSpec continuous_spec(std::string name) {
    FeatureSpec s;
    s.name = std::move(name);
    s.kind = FeatureKind::continuous;
    return s;
}

} // namespace detail

/// Rejection-samples n_positive points uniformly inside the cross (label 1)
/// and the remainder outside it within the sampling box (label 0). Pure in
/// (parameters, seed).
inline Dataset generate_cross_2d(int n_total, int n_positive, const CrossGeometry& geometry,
                                 std::uint64_t seed) {
    geometry.validate();
    if (n_positive < 0 || n_positive > n_total)
        fail(Errc::bad_config, "positive count must lie in [0, total]");
    Dataset data;
    data.schema = {detail::continuous_spec("F1"), detail::continuous_spec("F2")};
    data.labels.emplace();
    Rng rng(seed);
    int pos = 0, neg = 0;
    int neg_needed = n_total - n_positive;
    while (pos < n_positive || neg < neg_needed) {
        double x = rng.uniform(geometry.bound_min, geometry.bound_max);
        double y = rng.uniform(geometry.bound_min, geometry.bound_max);
        bool inside = geometry.contains(x, y);
        if (inside && pos < n_positive) {
            data.rows.push_back({{{"F1", x}, {"F2", y}}});
            data.labels->push_back(1);
            ++pos;
        } else if (!inside && neg < neg_needed) {
            data.rows.push_back({{{"F1", x}, {"F2", y}}});
            data.labels->push_back(0);
            ++neg;
        }
    }
    return data;
}

/// 3D counterpart: the negative class fills the ellipsoid interior, positives
/// are sampled outside it within the box.
inline Dataset generate_ellipsoid_3d(int n_total, int n_positive, const EllipsoidGeometry& geometry,
                                     std::uint64_t seed) {
    geometry.validate();
    if (n_positive < 0 || n_positive > n_total)
        fail(Errc::bad_config, "positive count must lie in [0, total]");
    Dataset data;
    data.schema = {detail::continuous_spec("F1"), detail::continuous_spec("F2"),
                   detail::continuous_spec("F3")};
    data.labels.emplace();
    Rng rng(seed);
    int pos = 0, neg = 0;
    int neg_needed = n_total - n_positive;
    while (pos < n_positive || neg < neg_needed) {
        double x = rng.uniform(geometry.bound_min[0], geometry.bound_max[0]);
        double y = rng.uniform(geometry.bound_min[1], geometry.bound_max[1]);
        double z = rng.uniform(geometry.bound_min[2], geometry.bound_max[2]);
        bool inside = geometry.contains(x, y, z);
        if (!inside && pos < n_positive) {
            data.rows.push_back({{{"F1", x}, {"F2", y}, {"F3", z}}});
            data.labels->push_back(1);
            ++pos;
        } else if (inside && neg < neg_needed) {
            data.rows.push_back({{{"F1", x}, {"F2", y}, {"F3", z}}});
            data.labels->push_back(0);
            ++neg;
        }
    }
    return data;
}

/// Linear-interpolation percentile over the sorted values (index (n-1)*q).
inline double percentile_linear(std::vector<double> values, double pct) {
    if (values.empty()) fail(Errc::empty_dataset, "percentile of no values");
    std::sort(values.begin(), values.end());
    double h = (static_cast<double>(values.size()) - 1.0) * pct / 100.0;
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

inline double median(std::vector<double> values) {
    if (values.empty()) fail(Errc::empty_dataset, "median of no values");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Removes every row holding a value strictly below the low percentile or
/// strictly above the high one in any of the given features (all numeric
/// features when none are named). Percentiles are computed on the input.
inline Dataset filter_outliers(const Dataset& data, double low_pct = 5.0, double high_pct = 95.0,
                               std::vector<std::string> features = {}) {
    if (features.empty())
        for (const auto& spec : data.schema)
            if (is_numeric_kind(spec.kind)) features.push_back(spec.name);

    std::vector<std::pair<double, double>> bounds;
    bounds.reserve(features.size());
    for (const auto& name : features) {
        const FeatureSpec& spec = require_feature(data.schema, name);
        if (!is_numeric_kind(spec.kind))
            fail(Errc::kind_mismatch, "outlier filter applies to numeric features only");
        std::vector<double> vals;
        vals.reserve(data.rows.size());
        for (const auto& row : data.rows) vals.push_back(numeric_value(row.at(name)));
        bounds.emplace_back(percentile_linear(vals, low_pct), percentile_linear(vals, high_pct));
    }

    Dataset out;
    out.schema = data.schema;
    if (data.labels) out.labels.emplace();
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        bool keep = true;
        for (std::size_t f = 0; f < features.size(); ++f) {
            double v = numeric_value(data.rows[r].at(features[f]));
            if (v < bounds[f].first || v > bounds[f].second) {
                keep = false;
                break;
            }
        }
        if (keep) {
            out.rows.push_back(data.rows[r]);
            if (data.labels) out.labels->push_back((*data.labels)[r]);
        }
    }
    return out;
}

inline const std::vector<std::string>& housing_raw_features() {
    static const std::vector<std::string> names = {"medinc",     "houseage", "averooms",
                                                   "avebedrms",  "population", "aveoccup",
                                                   "latitude",   "longitude"};
    return names;
}

inline constexpr const char* kHousingTarget = "medhv";

/// Heterogenizes the raw housing table: outlier filter on the eight original
/// features, median split of the target into the class label, population and
/// income recoded as binary/ordinal, latitude+longitude folded into a
/// cardinal-point quadrant. Medians and quantiles come from the filtered rows;
/// values equal to a median fall on the >= side.
inline Dataset transform_housing(const Dataset& raw) {
    for (const auto& name : housing_raw_features())
        if (!find_feature(raw.schema, name))
            fail(Errc::schema_mismatch, "raw housing data lacks feature '" + name + "'");
    if (!find_feature(raw.schema, kHousingTarget))
        fail(Errc::schema_mismatch, "raw housing data lacks the 'medhv' target column");

    Dataset filtered = filter_outliers(raw, 5.0, 95.0, housing_raw_features());
    std::size_t n = filtered.rows.size();
    if (n == 0) fail(Errc::empty_dataset, "outlier filter removed every row");

    auto column = [&](const std::string& name) {
        std::vector<double> v;
        v.reserve(n);
        for (const auto& row : filtered.rows) v.push_back(numeric_value(row.at(name)));
        return v;
    };
    double target_median = median(column(kHousingTarget));
    double population_median = median(column("population"));
    double lat_median = median(column("latitude"));
    double lon_median = median(column("longitude"));

    // Equal-frequency income quintiles by rank; ties order by row index so the
    // bucket sizes differ by at most one.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto medinc = column("medinc");
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return medinc[a] < medinc[b]; });
    std::vector<std::int64_t> income_bucket(n);
    for (std::size_t rank = 0; rank < n; ++rank)
        income_bucket[order[rank]] = static_cast<std::int64_t>(rank * 5 / n);

    Dataset out;
    FeatureSpec houseage;
    houseage.name = "houseage";
    houseage.kind = FeatureKind::integer;
    FeatureSpec population_bin;
    population_bin.name = "population_bin";
    population_bin.kind = FeatureKind::binary;
    FeatureSpec medinc_ord;
    medinc_ord.name = "medinc_ord";
    medinc_ord.kind = FeatureKind::ordinal;
    medinc_ord.level_min = 0;
    medinc_ord.level_max = 4;
    FeatureSpec cardinal;
    cardinal.name = "cardinal_point";
    cardinal.kind = FeatureKind::categorical;
    cardinal.categories = {"NE", "NW", "SE", "SW"};
    out.schema = {houseage,
                  detail::continuous_spec("averooms"),
                  detail::continuous_spec("avebedrms"),
                  detail::continuous_spec("aveoccup"),
                  population_bin,
                  medinc_ord,
                  cardinal};
    out.labels.emplace();
    out.rows.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Observation& row = filtered.rows[r];
        Observation o;
        o.set("houseage", static_cast<std::int64_t>(std::llround(numeric_value(row.at("houseage")))));
        o.set("averooms", numeric_value(row.at("averooms")));
        o.set("avebedrms", numeric_value(row.at("avebedrms")));
        o.set("aveoccup", numeric_value(row.at("aveoccup")));
        o.set("population_bin",
              std::int64_t{numeric_value(row.at("population")) >= population_median ? 1 : 0});
        o.set("medinc_ord", income_bucket[r]);
        bool north = numeric_value(row.at("latitude")) >= lat_median;
        bool east = numeric_value(row.at("longitude")) >= lon_median;
        o.set("cardinal_point", std::string(north ? "N" : "S") + (east ? "E" : "W"));
        out.rows.push_back(std::move(o));
        out.labels->push_back(numeric_value(row.at(kHousingTarget)) >= target_median ? 1 : 0);
    }
    return out;
}

} // namespace muce
