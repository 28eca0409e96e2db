#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/classifier.hpp"
#include "gestrec/errors.hpp"
#include "gestrec/geometry.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/quantizer.hpp"

namespace gestrec {

// Per-class localized log-likelihood L_t = gamma * L_{t-1} + log p(y_t | y_1..y_{t-1})
// with forgetting factor gamma. Value type threaded through localized_step.
struct LocalizedDetector {
    struct ClassTrack {
        std::string label;
        double loglik = 0.0;
        FilterState filter;
    };

    double gamma = 0.9;
    double threshold = 0.0;
    std::vector<ClassTrack> tracks;
};

inline LocalizedDetector make_localized_detector(
    const std::vector<std::pair<std::string, HmmPointParams>>& models, double gamma,
    double threshold) {
    if (gamma < 0.0 || gamma > 1.0) throw DataError("forgetting factor must be in [0,1]");
    LocalizedDetector det;
    det.gamma = gamma;
    det.threshold = threshold;
    det.tracks.reserve(models.size());
    for (const auto& [label, params] : models)
        det.tracks.push_back({label, 0.0, initial_filter_state(params)});
    return det;
}

struct LocalizedStepResult {
    LocalizedDetector detector;
    std::vector<std::pair<std::string, double>> scores;  // track order
    std::vector<std::string> detections;                 // descending score
};

// Advance every class filter by one symbol and update the localized
// log-likelihoods. Labels whose score exceeds the threshold are reported in
// descending score order.
inline LocalizedStepResult localized_step(
    const LocalizedDetector& det, int y_t,
    const std::vector<std::pair<std::string, HmmPointParams>>& models) {
    LocalizedStepResult result;
    result.detector = det;
    std::vector<std::pair<std::string, double>> hits;
    for (auto& track : result.detector.tracks) {
        const HmmPointParams* params = nullptr;
        for (const auto& [label, p] : models)
            if (label == track.label) params = &p;
        if (!params) throw DataError("no model for tracked class '" + track.label + "'");
        auto [next, step_ll] = filter_step(track.filter, y_t, *params);
        track.filter = std::move(next);
        track.loglik = det.gamma * track.loglik + step_ll;
        result.scores.emplace_back(track.label, track.loglik);
        if (track.loglik > det.threshold) hits.emplace_back(track.label, track.loglik);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [label, score] : hits) result.detections.push_back(std::move(label));
    return result;
}

enum class KeyEvent { none, triggered };

// Detects the key gesture: palm held up for at least min_duration_s, firing
// once on the transition back down.
struct KeyGestureDetector {
    Vec3 e_palm{0.0, 1.0, 0.0};  // sensor-frame palm axis
    Vec3 up{0.0, 0.0, 1.0};      // global up
    double cos_threshold = 0.8660254037844387;  // cos 30 degrees
    double min_duration_s = 1.0;
    double sample_rate_hz = 6.7;

    enum class Phase { idle, up };
    Phase phase = Phase::idle;
    double elapsed_s = 0.0;
};

// One sample covering dt_s seconds. While the palm points up the detector
// accumulates hold time; leaving palm-up emits `triggered` exactly when the
// accumulated hold reached min_duration_s, and always returns to idle.
inline std::pair<KeyGestureDetector, KeyEvent> key_step(const KeyGestureDetector& det,
                                                        const Quat& q_comp, double dt_s) {
    if (!(dt_s > 0.0)) throw DataError("sample interval must be positive");
    KeyGestureDetector next = det;
    const bool palm_up = dot(palm_vector(q_comp, det.e_palm), det.up) > det.cos_threshold;
    KeyEvent event = KeyEvent::none;
    if (next.phase == KeyGestureDetector::Phase::idle) {
        if (palm_up) {
            next.phase = KeyGestureDetector::Phase::up;
            next.elapsed_s = dt_s;
        }
    } else {
        if (palm_up) {
            next.elapsed_s += dt_s;
        } else {
            if (next.elapsed_s >= det.min_duration_s) event = KeyEvent::triggered;
            next.phase = KeyGestureDetector::Phase::idle;
            next.elapsed_s = 0.0;
        }
    }
    return {next, event};
}

struct StreamEvent {
    double trigger_time_s = 0.0;
    std::string label;
    std::vector<std::pair<std::string, double>> scores;
};

// Scan a timestamped orientation stream for key gestures; after each trigger,
// quantize the following window_s of samples and classify them. Timestamps
// must be strictly increasing. The first sample only initializes timing.
inline std::vector<StreamEvent> run_stream(const std::vector<std::pair<double, Quat>>& stream,
                                           KeyGestureDetector key_det, const ClassRegistry& reg,
                                           double window_s, const Quat& q_ref = Quat::identity()) {
    for (std::size_t i = 1; i < stream.size(); ++i)
        if (!(stream[i].first > stream[i - 1].first))
            throw DataError("stream timestamps must be strictly increasing");

    std::vector<StreamEvent> events;
    for (std::size_t i = 1; i < stream.size(); ++i) {
        const double dt = stream[i].first - stream[i - 1].first;
        const Quat q_comp = compensate(stream[i].second, q_ref);
        auto [next_det, event] = key_step(key_det, q_comp, dt);
        key_det = next_det;
        if (event != KeyEvent::triggered) continue;

        const double t0 = stream[i].first;
        std::vector<Quat> window;
        for (std::size_t j = i + 1; j < stream.size() && stream[j].first <= t0 + window_s; ++j)
            window.push_back(stream[j].second);
        if (window.empty()) continue;
        const ObsSeq y = quantize_stream(window, q_ref, reg.grid());
        Classification c = classify(reg, y);
        events.push_back({t0, std::move(c.label), std::move(c.scores)});
    }
    return events;
}

}  // namespace gestrec
