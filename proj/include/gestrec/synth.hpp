#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/io.hpp"
#include "gestrec/rng.hpp"
#include "gestrec/vb.hpp"

namespace gestrec {

// Recipe for a synthetic gesture dataset. A class is a distinct cyclic tour
// over a subset of the hidden direction states: the arm dwells in a
// direction, then advances to the next direction of the tour. Advances
// occasionally stray to some other direction, which is held for a while
// before rejoining the tour (a hesitation mid-gesture). Emissions bind each
// state to one symbol. Classes therefore differ in which directions they
// visit and in what order. The dwell scale, the stray behavior and the
// state-to-symbol binding are shared across classes; that shared structure is
// what a pooled prior can transfer to a class trained from a single example.
struct SynthSpec {
    std::size_t num_classes = 8;
    std::size_t hidden_states = 6;
    std::size_t alphabet = 6;
    std::size_t min_len = 15;
    std::size_t max_len = 30;
    std::size_t per_class = 20;
    std::size_t min_tour = 4;     // smallest direction subset a class may use
    std::size_t max_tour = 6;     // largest
    double dwell = 0.55;          // probability of holding the current direction
    double step_noise = 0.10;     // share of advances that stray off the tour order
    double stray_hold = 0.90;     // persistence of a stray direction before rejoining
    double emis_self = 0.99;      // probability a state emits its own symbol
    double dwell_wobble = 0.0;    // per-recording dwell jitter (+-) for repetition variability
    std::uint64_t seed = 0;

    void validate() const {
        if (num_classes < 1 || hidden_states < 1 || alphabet < 2 || per_class < 1)
            throw DataError("invalid dataset spec: counts must be positive (alphabet >= 2)");
        if (min_len < 1 || max_len < min_len)
            throw DataError("invalid dataset spec: need 1 <= min_len <= max_len");
        if (min_tour < 1 || max_tour < min_tour)
            throw DataError("invalid dataset spec: need 1 <= min_tour <= max_tour");
        if (!(dwell > 0.0 && dwell < 1.0)) throw DataError("dwell must be in (0,1)");
        if (step_noise < 0.0 || step_noise > 1.0) throw DataError("step_noise must be in [0,1]");
        if (!(stray_hold > 0.0 && stray_hold < 1.0)) throw DataError("stray_hold must be in (0,1)");
        if (!(emis_self > 0.0 && emis_self <= 1.0)) throw DataError("emis_self must be in (0,1]");
        if (dwell_wobble < 0.0 || dwell_wobble > 0.4)
            throw DataError("dwell_wobble must be in [0,0.4]");
    }
};

struct SynthDataset {
    std::vector<Recording> recordings;
    Manifest manifest;  // true generating parameters, keyed by class label
};

namespace synth_detail {

// Tours are cycles; rotate the smallest state to the front so that
// rotation-equivalent tours compare equal.
inline std::vector<std::size_t> canonical_cycle(std::vector<std::size_t> tour) {
    const auto smallest = std::min_element(tour.begin(), tour.end());
    std::rotate(tour.begin(), smallest, tour.end());
    return tour;
}

inline void fill_transitions(Matrix& A, const std::vector<std::size_t>& next_on_tour,
                             const std::vector<std::size_t>& tour, double dwell,
                             double step_noise, double stray_hold) {
    const std::size_t M = A.rows();
    for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t i = 0; i < M; ++i) A(i, j) = 0.0;
        if (next_on_tour[j] == M) {
            // Stray direction: hold it for a while, then rejoin the tour.
            A(j, j) = stray_hold;
            for (std::size_t s : tour) A(s, j) += (1.0 - stray_hold) / static_cast<double>(tour.size());
            continue;
        }
        A(j, j) += dwell;
        const double advance = 1.0 - dwell;
        std::size_t strays = 0;
        for (std::size_t i = 0; i < M; ++i)
            if (i != j && i != next_on_tour[j]) ++strays;
        const double noise = strays > 0 ? step_noise : 0.0;
        A(next_on_tour[j], j) += advance * (1.0 - noise);
        for (std::size_t i = 0; i < M; ++i)
            if (i != j && i != next_on_tour[j])
                A(i, j) += advance * noise / static_cast<double>(strays);
    }
}

}  // namespace synth_detail

inline SynthDataset generate_dataset(const SynthSpec& spec) {
    spec.validate();
    const std::size_t M = spec.hidden_states;
    const std::size_t N = spec.alphabet;
    const std::size_t lo = std::min(spec.min_tour, M);
    const std::size_t hi = std::min(spec.max_tour, M);
    Rng rng(spec.seed);
    SynthDataset out;

    std::set<std::vector<std::size_t>> used;
    const std::string grid_id = (N == 6) ? "axes6" : "fib" + std::to_string(N);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        // Distinct cyclic tour over a random direction subset.
        std::vector<std::size_t> tour;
        int attempts = 0;
        do {
            if (++attempts > 1000)
                throw DataError("cannot sample enough distinct classes; enlarge tour range");
            std::vector<std::size_t> order(M);
            for (std::size_t i = 0; i < M; ++i) order[i] = i;
            rng.shuffle(order);
            const std::size_t size = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
            tour.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
            tour = synth_detail::canonical_cycle(std::move(tour));
        } while (!used.insert(tour).second);

        std::vector<std::size_t> next_on_tour(M, M);
        for (std::size_t t = 0; t < tour.size(); ++t)
            next_on_tour[tour[t]] = tour[(t + 1) % tour.size()];

        HmmPointParams params;
        params.A = Matrix(M, M);
        params.C = Matrix(N, M);
        params.pi.assign(M, 0.0);
        params.stochastic = true;
        synth_detail::fill_transitions(params.A, next_on_tour, tour, spec.dwell, spec.step_noise,
                                       spec.stray_hold);
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t i = 0; i < N; ++i)
                params.C(i, j) = (i == j % N)
                                     ? spec.emis_self
                                     : (1.0 - spec.emis_self) / static_cast<double>(N - 1);
        }
        for (std::size_t s : tour) params.pi[s] = 1.0 / static_cast<double>(tour.size());

        const std::string label = "c" + std::to_string(k);
        for (std::size_t s = 0; s < spec.per_class; ++s) {
            Rng rec_rng(Rng::derive(spec.seed, 100000 + k * spec.per_class + s));
            HmmPointParams rec_params = params;
            if (spec.dwell_wobble > 0.0) {
                const double dw = std::clamp(
                    spec.dwell + rec_rng.uniform(-spec.dwell_wobble, spec.dwell_wobble), 0.05,
                    0.95);
                synth_detail::fill_transitions(rec_params.A, next_on_tour, tour, dw,
                                               spec.step_noise, spec.stray_hold);
            }
            const std::size_t len =
                spec.min_len + static_cast<std::size_t>(rng.below(spec.max_len - spec.min_len + 1));
            ObsSeq seq = sample_sequence(rec_params, len,
                                         Rng::derive(spec.seed, k * spec.per_class + s + 1));
            Recording rec;
            rec.user = "synth";
            rec.class_label = label;
            rec.sample_rate_hz = 6.7;
            rec.grid_id = grid_id;
            rec.symbols = seq.symbols();
            out.recordings.push_back(std::move(rec));
        }
        out.manifest.true_params.emplace_back(label, std::move(params));
    }
    return out;
}

}  // namespace gestrec
