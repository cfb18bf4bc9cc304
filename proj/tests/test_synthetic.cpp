#include <doctest.h>

#include <algorithm>
#include <map>

#include "muce/csv.hpp"
#include "muce/synthetic.hpp"

using namespace muce;

TEST_CASE("cross generator produces the configured counts with valid geometry") {
    CrossGeometry geom;
    auto data = generate_cross_2d(400, 132, geom, 7);
    CHECK(data.rows.size() == 400);
    REQUIRE(data.labels.has_value());
    int positives = 0;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        double x = numeric_value(data.rows[i].at("F1"));
        double y = numeric_value(data.rows[i].at("F2"));
        bool inside = geom.contains(x, y);
        if ((*data.labels)[i] == 1) {
            ++positives;
            CHECK(inside);
        } else {
            CHECK_FALSE(inside);
        }
        CHECK(x >= geom.bound_min);
        CHECK(x <= geom.bound_max);
    }
    CHECK(positives == 132);
}

TEST_CASE("generators are pure functions of parameters and seed") {
    CrossGeometry geom;
    auto a = generate_cross_2d(100, 33, geom, 42);
    auto b = generate_cross_2d(100, 33, geom, 42);
    CHECK(dataset_to_csv(a, "label") == dataset_to_csv(b, "label"));
    auto c = generate_cross_2d(100, 33, geom, 43);
    CHECK(dataset_to_csv(a, "label") != dataset_to_csv(c, "label"));
}

TEST_CASE("ellipsoid generator puts positives outside the surface") {
    EllipsoidGeometry geom;
    auto data = generate_ellipsoid_3d(400, 132, geom, 7);
    CHECK(data.rows.size() == 400);
    int positives = 0;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        double q = geom.quadratic_form(numeric_value(data.rows[i].at("F1")),
                                       numeric_value(data.rows[i].at("F2")),
                                       numeric_value(data.rows[i].at("F3")));
        if ((*data.labels)[i] == 1) {
            ++positives;
            CHECK(q > 1.0);
        } else {
            CHECK(q <= 1.0);
        }
    }
    CHECK(positives == 132);
    CHECK(geom.contains(0, 0, 0)); // origin sits in the negative region
    // the near-boundary reference point is just inside
    CHECK(geom.quadratic_form(0.37, -0.97, 0.02) == doctest::Approx(0.956485).epsilon(1e-4));
    CHECK(geom.contains(0.37, -0.97, 0.02));
}

TEST_CASE("impossible geometries are rejected") {
    CrossGeometry too_big;
    too_big.arm_half_length = 3.0;
    CHECK_THROWS_AS(generate_cross_2d(10, 5, too_big, 1), Error);
    CrossGeometry bad_wl;
    bad_wl.arm_half_width = 2.0;
    CHECK_THROWS_AS(generate_cross_2d(10, 5, bad_wl, 1), Error);
    CHECK_THROWS_AS(generate_cross_2d(10, 20, CrossGeometry{}, 1), Error);
}

TEST_CASE("percentile filter matches the brute-force route on 1..100") {
    FeatureSpec f;
    f.name = "v";
    Dataset data;
    data.schema = {f};
    for (int i = 1; i <= 100; ++i) data.rows.push_back({{{"v", static_cast<double>(i)}}});

    // independent percentile computation on the explicit sequence
    std::vector<double> sorted;
    for (const auto& r : data.rows) sorted.push_back(numeric_value(r.at("v")));
    std::sort(sorted.begin(), sorted.end());
    double h5 = 99.0 * 0.05, h95 = 99.0 * 0.95;
    double p5 = sorted[static_cast<std::size_t>(h5)] * (1.0 - (h5 - std::floor(h5))) +
                sorted[static_cast<std::size_t>(h5) + 1] * (h5 - std::floor(h5));
    double p95 = sorted[static_cast<std::size_t>(h95)] * (1.0 - (h95 - std::floor(h95))) +
                 sorted[static_cast<std::size_t>(h95) + 1] * (h95 - std::floor(h95));
    CHECK(p5 == doctest::Approx(5.95).epsilon(1e-12));
    CHECK(p95 == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(percentile_linear(sorted, 5.0) == doctest::Approx(p5).epsilon(1e-12));
    CHECK(percentile_linear(sorted, 95.0) == doctest::Approx(p95).epsilon(1e-12));

    auto filtered = filter_outliers(data);
    CHECK(filtered.rows.size() == 90);
    CHECK(numeric_value(filtered.rows.front().at("v")) == 6.0);
    CHECK(numeric_value(filtered.rows.back().at("v")) == 95.0);
}

TEST_CASE("an all-identical feature removes nothing") {
    FeatureSpec f;
    f.name = "v";
    Dataset data;
    data.schema = {f};
    for (int i = 0; i < 20; ++i) data.rows.push_back({{{"v", 3.0}}});
    CHECK(filter_outliers(data).rows.size() == 20);
}

namespace {

// small deterministic raw housing table exercising every transform rule
Dataset synthetic_raw_housing(std::size_t n) {
    Schema schema;
    for (const auto& name : housing_raw_features()) {
        FeatureSpec spec;
        spec.name = name;
        spec.kind = (name == "houseage" || name == "population") ? FeatureKind::integer
                                                                 : FeatureKind::continuous;
        schema.push_back(spec);
    }
    FeatureSpec target;
    target.name = kHousingTarget;
    schema.push_back(target);

    Dataset data;
    data.schema = schema;
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i);
        Observation o;
        o.set("medinc", 1.0 + std::fmod(t * 0.7, 9.0));
        o.set("houseage", static_cast<std::int64_t>(5 + (i * 13) % 47));
        o.set("averooms", 3.0 + std::fmod(t * 0.31, 5.0));
        o.set("avebedrms", 0.9 + std::fmod(t * 0.017, 0.4));
        o.set("population", static_cast<std::int64_t>(300 + (i * 379) % 3000));
        o.set("aveoccup", 1.5 + std::fmod(t * 0.13, 3.0));
        o.set("latitude", 32.0 + std::fmod(t * 0.37, 8.0));
        o.set("longitude", -123.0 + std::fmod(t * 0.53, 6.0));
        o.set(kHousingTarget, 0.5 + std::fmod(t * 1.7, 4.5));
        data.rows.push_back(std::move(o));
    }
    return data;
}

} // namespace

TEST_CASE("housing transform emits the final seven-feature schema") {
    auto out = transform_housing(synthetic_raw_housing(200));
    REQUIRE(out.schema.size() == 7);
    const char* names[] = {"houseage",       "averooms",   "avebedrms",     "aveoccup",
                           "population_bin", "medinc_ord", "cardinal_point"};
    FeatureKind kinds[] = {FeatureKind::integer,    FeatureKind::continuous, FeatureKind::continuous,
                           FeatureKind::continuous, FeatureKind::binary,     FeatureKind::ordinal,
                           FeatureKind::categorical};
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(out.schema[i].name == names[i]);
        CHECK(out.schema[i].kind == kinds[i]);
    }
    CHECK(out.schema[6].categories == std::vector<std::string>{"NE", "NW", "SE", "SW"});
    REQUIRE(out.labels.has_value());
    CHECK(out.labels->size() == out.rows.size());
}

TEST_CASE("housing transform splits on medians with ties going to the upper class") {
    auto raw = synthetic_raw_housing(201);
    auto out = transform_housing(raw);
    auto filtered = filter_outliers(raw, 5.0, 95.0, housing_raw_features());
    REQUIRE(filtered.rows.size() == out.rows.size());

    std::vector<double> population, medhv, lat, lon;
    for (const auto& r : filtered.rows) {
        population.push_back(numeric_value(r.at("population")));
        medhv.push_back(numeric_value(r.at(kHousingTarget)));
        lat.push_back(numeric_value(r.at("latitude")));
        lon.push_back(numeric_value(r.at("longitude")));
    }
    double pop_median = median(population);
    double hv_median = median(medhv);
    double lat_median = median(lat);
    double lon_median = median(lon);

    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        double pop = numeric_value(filtered.rows[i].at("population"));
        CHECK(int_value(out.rows[i].at("population_bin")) == (pop >= pop_median ? 1 : 0));
        CHECK((*out.labels)[i] == (numeric_value(filtered.rows[i].at(kHousingTarget)) >= hv_median ? 1 : 0));
        bool north = numeric_value(filtered.rows[i].at("latitude")) >= lat_median;
        bool east = numeric_value(filtered.rows[i].at("longitude")) >= lon_median;
        std::string expected = std::string(north ? "N" : "S") + (east ? "E" : "W");
        CHECK(label_value(out.rows[i].at("cardinal_point")) == expected);
    }
}

TEST_CASE("income buckets are equal-frequency within one row") {
    auto out = transform_housing(synthetic_raw_housing(233));
    std::map<std::int64_t, std::size_t> counts;
    for (const auto& r : out.rows) counts[int_value(r.at("medinc_ord"))]++;
    REQUIRE(counts.size() == 5);
    std::size_t lo = out.rows.size(), hi = 0;
    for (const auto& [bucket, count] : counts) {
        CHECK(bucket >= 0);
        CHECK(bucket <= 4);
        lo = std::min(lo, count);
        hi = std::max(hi, count);
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("housing transform rejects tables missing required columns") {
    Dataset bad;
    FeatureSpec f;
    f.name = "medinc";
    bad.schema = {f};
    bad.rows.push_back({{{"medinc", 3.0}}});
    CHECK_THROWS_AS(transform_housing(bad), Error);
}
