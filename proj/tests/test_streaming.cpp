#include "doctest.h"

#include <cmath>
#include <vector>

#include "gestrec/streaming.hpp"
#include "helpers.hpp"

using namespace gestrec;
using testutil::random_seq;
using testutil::random_stochastic_params;

namespace {

const double kDt = 1.0 / 6.7;

Quat palm_up_quat() { return Quat::from_axis_angle({1, 0, 0}, 3.14159265358979323846 / 2.0); }

std::vector<std::pair<std::string, HmmPointParams>> one_binary_model(double p1) {
    HmmPointParams p;
    p.A = Matrix(1, 1, 1.0);
    p.C = Matrix(2, 1);
    p.C(0, 0) = p1;
    p.C(1, 0) = 1.0 - p1;
    p.pi = {1.0};
    return {{"m", p}};
}

}  // namespace

TEST_CASE("localized detector with gamma=1 telescopes to the full evidence") {
    Rng rng(321);
    for (int i = 0; i < 20; ++i) {
        const auto params = random_stochastic_params(rng, 3, 4);
        const auto y = random_seq(rng, 12, 4);
        const std::vector<std::pair<std::string, HmmPointParams>> models{{"m", params}};
        LocalizedDetector det = make_localized_detector(models, 1.0, 0.0);
        double last = 0.0;
        for (int sym : y.symbols()) {
            auto res = localized_step(det, sym, models);
            det = std::move(res.detector);
            last = res.scores[0].second;
        }
        CHECK(std::abs(last - forward_loglik(y, params)) < 1e-9);
    }
}

TEST_CASE("localized detector with gamma=0 is the instantaneous likelihood") {
    const auto models = one_binary_model(0.9);
    LocalizedDetector det = make_localized_detector(models, 0.0, 0.0);
    auto r1 = localized_step(det, 1, models);
    CHECK(r1.scores[0].second == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    auto r2 = localized_step(r1.detector, 2, models);
    CHECK(r2.scores[0].second == doctest::Approx(std::log(0.1)).epsilon(1e-12));
}

TEST_CASE("localized detector two-step hand recursion at gamma=0.5") {
    const auto models = one_binary_model(0.9);
    LocalizedDetector det = make_localized_detector(models, 0.5, 0.0);
    auto r1 = localized_step(det, 1, models);
    CHECK(r1.scores[0].second == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    auto r2 = localized_step(r1.detector, 1, models);
    CHECK(r2.scores[0].second == doctest::Approx(1.5 * std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("localized recursion accumulates a constant shift geometrically") {
    // Scaling every emission by s shifts each per-step log-likelihood by
    // log s, so L_t moves by log(s) * sum_{k<t} gamma^k.
    Rng rng(654);
    const double gamma = 0.8, s = 0.75;
    auto base = random_stochastic_params(rng, 3, 4);
    auto scaled = base;
    for (double& v : scaled.C.data()) v *= s;
    scaled.stochastic = false;
    const std::vector<std::pair<std::string, HmmPointParams>> m1{{"m", base}};
    const std::vector<std::pair<std::string, HmmPointParams>> m2{{"m", scaled}};
    LocalizedDetector d1 = make_localized_detector(m1, gamma, 0.0);
    LocalizedDetector d2 = make_localized_detector(m2, gamma, 0.0);
    const auto y = random_seq(rng, 10, 4);
    double geo = 0.0, pow = 1.0;
    for (int sym : y.symbols()) {
        auto r1 = localized_step(d1, sym, m1);
        auto r2 = localized_step(d2, sym, m2);
        d1 = std::move(r1.detector);
        d2 = std::move(r2.detector);
        geo += pow;
        pow *= gamma;
        CHECK(d2.tracks[0].loglik ==
              doctest::Approx(d1.tracks[0].loglik + std::log(s) * geo).epsilon(1e-10));
    }
}

TEST_CASE("localized score is non-increasing for gamma=1 and stochastic models") {
    Rng rng(987);
    const auto params = random_stochastic_params(rng, 2, 3);
    const std::vector<std::pair<std::string, HmmPointParams>> models{{"m", params}};
    LocalizedDetector det = make_localized_detector(models, 1.0, 0.0);
    double prev = 0.0;
    for (int t = 0; t < 30; ++t) {
        auto res = localized_step(det, static_cast<int>(rng.below(3)) + 1, models);
        det = std::move(res.detector);
        CHECK(det.tracks[0].loglik <= prev + 1e-12);
        prev = det.tracks[0].loglik;
    }
}

TEST_CASE("localized detections are thresholded and sorted") {
    auto models = one_binary_model(0.9);
    {
        HmmPointParams p;
        p.A = Matrix(1, 1, 1.0);
        p.C = Matrix(2, 1);
        p.C(0, 0) = 0.5;
        p.C(1, 0) = 0.5;
        p.pi = {1.0};
        models.emplace_back("flat", p);
    }
    LocalizedDetector det = make_localized_detector(models, 1.0, std::log(0.6));
    auto res = localized_step(det, 1, models);
    // log 0.9 > log 0.6 > log 0.5: only the first model passes.
    CHECK(res.detections == std::vector<std::string>{"m"});

    CHECK_THROWS_AS(localized_step(res.detector, 1, one_binary_model(0.2)), DataError);
}

TEST_CASE("key detector fires once after a long palm-up episode") {
    KeyGestureDetector det;
    int events = 0;
    // 1.34 s palm up (9 samples at 6.7 Hz), then down.
    for (int i = 0; i < 9; ++i) {
        auto [next, ev] = key_step(det, palm_up_quat(), kDt);
        det = next;
        CHECK(ev == KeyEvent::none);
    }
    for (int i = 0; i < 5; ++i) {
        auto [next, ev] = key_step(det, Quat::identity(), kDt);
        det = next;
        if (ev == KeyEvent::triggered) ++events;
    }
    CHECK(events == 1);
}

TEST_CASE("key detector ignores short palm-up episodes") {
    KeyGestureDetector det;
    for (int i = 0; i < 3; ++i) {  // 0.45 s
        auto [next, ev] = key_step(det, palm_up_quat(), kDt);
        det = next;
        CHECK(ev == KeyEvent::none);
    }
    auto [next, ev] = key_step(det, Quat::identity(), kDt);
    CHECK(ev == KeyEvent::none);
    CHECK(next.phase == KeyGestureDetector::Phase::idle);
}

TEST_CASE("key detector never fires while the palm stays horizontal") {
    KeyGestureDetector det;
    Rng rng(777);
    for (int i = 0; i < 500; ++i) {
        // Arbitrary rotation about the up axis keeps the palm in the plane.
        const Quat q = Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 6.28));
        auto [next, ev] = key_step(det, q, kDt);
        det = next;
        CHECK(ev == KeyEvent::none);
    }
}

TEST_CASE("key detector output is invariant to the sampling rate") {
    auto run = [](int up_samples, double dt) {
        KeyGestureDetector det;
        int events = 0;
        for (int i = 0; i < up_samples; ++i) {
            auto [next, ev] = key_step(det, palm_up_quat(), dt);
            det = next;
        }
        for (int i = 0; i < 3; ++i) {
            auto [next, ev] = key_step(det, Quat::identity(), dt);
            det = next;
            if (ev == KeyEvent::triggered) ++events;
        }
        return events;
    };
    // Same 1.34 s hold sampled at 6.7 Hz and 67 Hz.
    CHECK(run(9, 1.0 / 6.7) == run(90, 1.0 / 67.0));
    // Same 0.45 s hold.
    CHECK(run(3, 1.0 / 6.7) == run(30, 1.0 / 67.0));
}

namespace {

ClassRegistry trained_direction_registry() {
    VbConfig cfg;
    ClassRegistry reg(uninformative_prior(6, 6, 1.0), default_grid());
    std::vector<ObsSeq> a_data, b_data;
    for (int i = 0; i < 3; ++i) {
        a_data.push_back(ObsSeq({1, 1, 3, 3, 5, 5, 1, 1, 3, 3, 5, 5}, 6));
        b_data.push_back(ObsSeq({2, 2, 4, 4, 6, 6, 2, 2, 4, 4, 6, 6}, 6));
    }
    reg = register_class(std::move(reg), "A", a_data, cfg);
    reg = register_class(std::move(reg), "B", b_data, cfg);
    return reg;
}

// Orientation sample whose arm direction lands on the given symbol's basis
// vector; the shortest-arc rotation from +x keeps the palm horizontal.
Quat quat_for_symbol(int symbol, const QuantizerGrid& grid) {
    return rotation_between({1, 0, 0}, grid.basis_for(symbol));
}

}  // namespace

TEST_CASE("run_stream classifies the window after each key gesture") {
    const ClassRegistry reg = trained_direction_registry();
    std::vector<std::pair<double, Quat>> stream;
    double t = 0.0;
    auto push = [&](const Quat& q) {
        stream.emplace_back(t, q);
        t += kDt;
    };

    for (int i = 0; i < 4; ++i) push(Quat::identity());
    for (int i = 0; i < 10; ++i) push(palm_up_quat());  // 1.49 s hold
    push(Quat::identity());                             // down-transition triggers here
    for (int sym : {1, 1, 3, 3, 5, 5, 1, 1, 3, 3, 5, 5})
        push(quat_for_symbol(sym, reg.grid()));

    const auto events = run_stream(stream, KeyGestureDetector{}, reg, 3.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].label == "A");
    CHECK(events[0].scores.size() == 2);
}

TEST_CASE("run_stream reports well-separated key gestures in order") {
    const ClassRegistry reg = trained_direction_registry();
    std::vector<std::pair<double, Quat>> stream;
    double t = 0.0;
    auto push = [&](const Quat& q) {
        stream.emplace_back(t, q);
        t += kDt;
    };
    auto gesture = [&](std::initializer_list<int> symbols) {
        for (int i = 0; i < 10; ++i) push(palm_up_quat());
        push(Quat::identity());
        for (int sym : symbols) push(quat_for_symbol(sym, reg.grid()));
        for (int i = 0; i < 25; ++i) push(Quat::identity());  // separation gap
    };

    push(Quat::identity());
    gesture({1, 1, 3, 3, 5, 5, 1, 1, 3, 3, 5, 5});
    gesture({2, 2, 4, 4, 6, 6, 2, 2, 4, 4, 6, 6});

    const auto events = run_stream(stream, KeyGestureDetector{}, reg, 2.0);
    REQUIRE(events.size() == 2);
    CHECK(events[0].label == "A");
    CHECK(events[1].label == "B");
    CHECK(events[0].trigger_time_s < events[1].trigger_time_s);
}

TEST_CASE("run_stream handles empty and malformed streams") {
    const ClassRegistry reg = trained_direction_registry();
    CHECK(run_stream({}, KeyGestureDetector{}, reg, 3.0).empty());
    CHECK(run_stream({{0.0, Quat::identity()}}, KeyGestureDetector{}, reg, 3.0).empty());

    const std::vector<std::pair<double, Quat>> bad{{0.0, Quat::identity()},
                                                   {0.0, Quat::identity()}};
    CHECK_THROWS_AS(run_stream(bad, KeyGestureDetector{}, reg, 3.0), DataError);
}
