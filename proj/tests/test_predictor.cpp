#include <doctest.h>

#include <algorithm>

#include "muce/predictor.hpp"
#include "muce/process_predictor.hpp"
#include "support/test_support.hpp"

using namespace muce;

namespace {

Observation obs2(double x, double y) { return Observation{{{"F1", x}, {"F2", y}}}; }
Observation obs3(double x, double y, double z) {
    return Observation{{{"F1", x}, {"F2", y}, {"F3", z}}};
}

} // namespace

TEST_CASE("constant predictor repeats its probability over a batch") {
    ConstantPredictor model(0.7);
    auto out = model.predict_proba({obs2(0, 0), obs2(1, 1), obs2(2, 2)});
    CHECK(out == std::vector<double>{0.7, 0.7, 0.7});
}

TEST_CASE("ellipsoid predictor: interior below 0.5, boundary exactly 0.5") {
    auto model = make_ellipsoid_predictor(EllipsoidGeometry{});
    CHECK(model->predict_one(obs3(0, 0, 0)) < 0.5);
    CHECK(model->predict_one(obs3(3.0, 0.0, 0.0)) == 0.5);
    CHECK(model->predict_one(obs3(0.0, 1.0, 0.0)) == 0.5);
    CHECK(model->predict_one(obs3(3.5, 0.0, 0.0)) > 0.5); // outside is the positive class
}

TEST_CASE("cross predictor signs match membership and the boundary is 0.5") {
    CrossGeometry geom;
    auto model = make_cross_predictor(geom);
    CHECK(model->predict_one(obs2(0.0, 0.0)) > 0.5);
    CHECK(model->predict_one(obs2(0.81, -0.12)) > 0.5);  // inside the horizontal arm
    CHECK(model->predict_one(obs2(-0.87, 1.30)) < 0.5);  // outside
    CHECK(model->predict_one(obs2(1.4, 0.0)) == 0.5);    // arm tip boundary
}

TEST_CASE("cross prediction is strictly monotone along a boundary-crossing ray") {
    auto model = make_cross_predictor(CrossGeometry{});
    double prev = 1.0;
    for (double y : {0.0, 0.15, 0.3, 0.35, 0.5, 0.8}) {
        double p = model->predict_one(obs2(0.8, y));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("knn predictor matches the brute-force neighbour vote") {
    FeatureSpec f;
    f.name = "x";
    Dataset data;
    data.schema = {f};
    for (double v : {0.0, 0.1, 5.0, 5.1}) data.rows.push_back({{{"x", v}}});
    data.labels = std::vector<int>{1, 1, 0, 0};

    auto all = fit_knn_predictor(data, 4);
    CHECK(all->predict_one({{{"x", 2.5}}}) == 0.5);

    auto k2 = fit_knn_predictor(data, 2);
    CHECK(k2->predict_one({{{"x", 0.05}}}) == 1.0);
    CHECK(k2->predict_one({{{"x", 5.05}}}) == 0.0);

    // independent check: order rows by |x - q| and vote
    auto brute = [&](double q, std::size_t k) {
        std::vector<std::pair<double, int>> d;
        for (std::size_t i = 0; i < data.rows.size(); ++i)
            d.emplace_back(std::abs(numeric_value(data.rows[i].at("x")) - q), (*data.labels)[i]);
        std::stable_sort(d.begin(), d.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        int pos = 0;
        for (std::size_t i = 0; i < k; ++i) pos += d[i].second;
        return static_cast<double>(pos) / static_cast<double>(k);
    };
    for (double q : {0.05, 5.05, 2.0, -3.0})
        CHECK(k2->predict_one({{{"x", q}}}) == brute(q, 2));
}

TEST_CASE("knn outputs are multiples of 1/k and batches match single calls") {
    Rng rng(11);
    Schema schema = testing::random_schema(rng, {2, 4});
    auto ranges = testing::random_ranges(schema, rng);
    Dataset data = testing::random_dataset(schema, ranges, rng);
    auto model = fit_knn_predictor(data, 3);

    std::vector<Observation> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(testing::random_observation(schema, ranges, rng));
    auto preds = model->predict_proba(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        double scaled = preds[i] * 3.0;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
        CHECK(preds[i] == model->predict_one(batch[i]));
        CHECK(preds[i] >= 0.0);
        CHECK(preds[i] <= 1.0);
    }
}

TEST_CASE("knn fitting validates labels and k") {
    FeatureSpec f;
    f.name = "x";
    Dataset unlabeled;
    unlabeled.schema = {f};
    unlabeled.rows.push_back({{{"x", 0.0}}});
    CHECK_THROWS_AS(fit_knn_predictor(unlabeled, 1), Error);

    Dataset labeled = unlabeled;
    labeled.labels = std::vector<int>{1};
    CHECK_THROWS_AS(fit_knn_predictor(labeled, 2), Error);
}

TEST_CASE("external process predictor speaks the line protocol") {
    FeatureSpec f1;
    f1.name = "F1";
    FeatureSpec f2;
    f2.name = "F2";
    ProcessPredictor model("while IFS= read -r line; do echo 0.25; done", {f1, f2});
    auto out = model.predict_proba({obs2(1, 2), obs2(3, 4), obs2(5, 6)});
    CHECK(out == std::vector<double>{0.25, 0.25, 0.25});
    // a second batch over the same process
    CHECK(model.predict_one(obs2(0, 0)) == 0.25);
    CHECK_FALSE(model.concurrent_safe());
}

TEST_CASE("external process predictor surfaces failures") {
    FeatureSpec f1;
    f1.name = "F1";
    ProcessPredictor dead("true", {f1});
    try {
        dead.predict_proba({Observation{{{"F1", 1.0}}}});
        FAIL("expected predictor failure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::predictor_failure);
    }

    ProcessPredictor garbled("while IFS= read -r line; do echo not-a-number; done", {f1});
    CHECK_THROWS_AS(garbled.predict_proba({Observation{{{"F1", 1.0}}}}), Error);
}
