#include <doctest.h>

#include "muce/feature_model.hpp"
#include "support/test_support.hpp"

using namespace muce;

namespace {

Schema two_continuous() {
    FeatureSpec f1;
    f1.name = "F1";
    FeatureSpec f2;
    f2.name = "F2";
    return {f1, f2};
}

} // namespace

TEST_CASE("validate_observation accepts a well-formed observation") {
    Observation obs{{{"F1", 0.81}, {"F2", -0.12}}};
    const Observation& back = validate_observation(obs, two_continuous());
    CHECK(back == obs);
    CHECK(validate_observation(back, two_continuous()) == obs); // idempotent
}

TEST_CASE("validate_observation rejects arity and kind violations") {
    Schema schema = two_continuous();
    Observation missing{{{"F1", 0.81}}};
    CHECK_THROWS_WITH_AS(validate_observation(missing, schema), doctest::Contains("missing"), Error);

    Observation extra{{{"F1", 0.1}, {"F2", 0.2}, {"F3", 0.3}}};
    CHECK_THROWS_AS(validate_observation(extra, schema), Error);

    Observation wrong_tag{{{"F1", std::string("oops")}, {"F2", 0.2}}};
    try {
        validate_observation(wrong_tag, schema);
        FAIL("expected kind mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::kind_mismatch);
    }
}

TEST_CASE("validate_observation rejects labels outside the declared set") {
    FeatureSpec cp;
    cp.name = "cardinal_point";
    cp.kind = FeatureKind::categorical;
    cp.categories = {"NE", "NW", "SE", "SW"};
    Observation obs{{{"cardinal_point", std::string("XX")}}};
    try {
        validate_observation(obs, {cp});
        FAIL("expected unknown category");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_category);
    }
}

TEST_CASE("binary and ordinal constraint checks") {
    FeatureSpec b;
    b.name = "flag";
    b.kind = FeatureKind::binary;
    FeatureSpec o;
    o.name = "level";
    o.kind = FeatureKind::ordinal;
    o.level_min = 0;
    o.level_max = 4;
    Schema schema{b, o};

    CHECK_NOTHROW(validate_observation(Observation{{{"flag", std::int64_t{1}}, {"level", std::int64_t{4}}}}, schema));
    CHECK_THROWS_AS(validate_observation(Observation{{{"flag", std::int64_t{2}}, {"level", std::int64_t{0}}}}, schema),
                    Error);
    CHECK_THROWS_AS(validate_observation(Observation{{{"flag", std::int64_t{0}}, {"level", std::int64_t{9}}}}, schema),
                    Error);
    // integer-coded values survive a round trip untouched
    Observation obs{{{"flag", std::int64_t{1}}, {"level", std::int64_t{3}}}};
    CHECK(int_value(obs.at("flag")) == 1);
    CHECK(int_value(obs.at("level")) == 3);
}

TEST_CASE("encode_for_distance z-scores numeric features") {
    FeatureSpec num;
    num.name = "n";
    Schema schema{num};
    ScalingStats scaling{{"n", {2.0, 2.0}}};
    auto enc = encode_for_distance(Observation{{{"n", 4.0}}}, schema, scaling);
    REQUIRE(enc.size() == 1);
    CHECK(enc[0] == doctest::Approx(1.0));
}

TEST_CASE("encode_for_distance excludes the named feature and one-hot encodes the rest") {
    FeatureSpec num;
    num.name = "n";
    FeatureSpec cat;
    cat.name = "c";
    cat.kind = FeatureKind::categorical;
    cat.categories = {"a", "b", "x"};
    Schema schema{num, cat};
    ScalingStats scaling{{"n", {1.5, 0.5}}};

    auto enc = encode_for_distance(Observation{{{"n", 1.5}, {"c", std::string("x")}}}, schema, "c", scaling);
    CHECK(enc == std::vector<double>{0.0});
}

TEST_CASE("one-hot layout follows schema order") {
    FeatureSpec num;
    num.name = "n";
    FeatureSpec cat_a;
    cat_a.name = "catA";
    cat_a.kind = FeatureKind::categorical;
    cat_a.categories = {"x", "y"};
    FeatureSpec cat_b;
    cat_b.name = "catB";
    cat_b.kind = FeatureKind::categorical;
    cat_b.categories = {"p", "q"};
    Schema schema{num, cat_a, cat_b};
    ScalingStats scaling{{"n", {3.0, 1.0}}};

    Observation obs{{{"n", 3.0}, {"catA", std::string("x")}, {"catB", std::string("q")}}};
    auto enc = encode_for_distance(obs, schema, "catA", scaling);
    CHECK(enc == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("zero-variance features map to coordinate zero") {
    FeatureSpec num;
    num.name = "n";
    Schema schema{num};
    ScalingStats scaling{{"n", {7.0, 0.0}}};
    auto enc = encode_for_distance(Observation{{{"n", 12.0}}}, schema, scaling);
    CHECK(enc == std::vector<double>{0.0});
}

TEST_CASE("encoding length matches the schema-derived formula") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        Schema schema = testing::random_schema(rng);
        auto ranges = testing::random_ranges(schema, rng);
        Dataset data = testing::random_dataset(schema, ranges, rng);
        auto scaling = compute_scaling(data);
        std::string exclude = schema[rng.index(schema.size())].name;

        std::size_t expected = 0;
        for (const auto& spec : schema) {
            if (spec.name == exclude) continue;
            expected += spec.kind == FeatureKind::categorical ? spec.categories.size() : 1;
        }
        auto enc = encode_for_distance(data.rows[0], schema, exclude, scaling);
        CHECK(enc.size() == expected);

        // identical schema and scaling give identical coordinates
        auto enc2 = encode_for_distance(data.rows[0], schema, exclude, scaling);
        CHECK(enc == enc2);
    }
}
