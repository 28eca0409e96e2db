#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/classifier.hpp"
#include "gestrec/dtw.hpp"
#include "gestrec/errors.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/io.hpp"
#include "gestrec/quantizer.hpp"
#include "gestrec/rng.hpp"
#include "gestrec/vb.hpp"

namespace gestrec {

// Repeated random-split comparison of the classifier arms: HMM with learned
// shared prior, HMM with uninformative prior, and the DTW 1-NN baseline.
// All arms of one repetition see the identical split.
struct ExperimentSpec {
    std::size_t train_per_class = 5;
    std::size_t test_per_class = 15;
    std::size_t repetitions = 6;
    enum class PriorPolicy { learned, uninformative, both };
    PriorPolicy prior_policy = PriorPolicy::both;
    // When set, the recording used for the shared prior is removed from the
    // class training data; by default training may reuse it.
    bool exclude_prior_recordings = false;
    bool run_dtw = true;
    std::size_t hidden_states = 6;
    std::uint64_t seed = 0;
    VbConfig vb;

    void validate() const {
        if (train_per_class < 1 || test_per_class < 1 || repetitions < 1)
            throw DataError("experiment counts must be at least 1");
        if (exclude_prior_recordings && train_per_class < 2)
            throw DataError("excluding prior recordings needs train_per_class >= 2");
        vb.validate();
    }
};

struct ExperimentRow {
    std::size_t repetition = 0;
    std::string arm;
    double rate = 0.0;
};

struct ArmSummary {
    std::string arm;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation across repetitions
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::vector<ArmSummary> summary;
};

namespace exp_detail {

inline ArmSummary summarize(const std::string& arm, const std::vector<double>& rates) {
    ArmSummary s;
    s.arm = arm;
    for (double r : rates) s.mean += r;
    s.mean /= static_cast<double>(rates.size());
    if (rates.size() > 1) {
        double ss = 0.0;
        for (double r : rates) ss += (r - s.mean) * (r - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(rates.size() - 1));
    }
    return s;
}

}  // namespace exp_detail

inline ExperimentResult run_experiment(
    const std::vector<std::pair<std::string, std::vector<ObsSeq>>>& by_class,
    const ExperimentSpec& spec, const QuantizerGrid& grid) {
    spec.validate();
    if (by_class.empty()) throw DataError("experiment needs at least one class");
    for (const auto& [label, seqs] : by_class)
        if (seqs.size() < spec.train_per_class + spec.test_per_class)
            throw DataError("class '" + label + "' has " + std::to_string(seqs.size()) +
                            " recordings, needs " +
                            std::to_string(spec.train_per_class + spec.test_per_class));

    const bool learned_arm = spec.prior_policy != ExperimentSpec::PriorPolicy::uninformative;
    const bool uninf_arm = spec.prior_policy != ExperimentSpec::PriorPolicy::learned;

    ExperimentResult result;
    std::vector<double> learned_rates, uninf_rates, dtw_rates;
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        Rng rng(Rng::derive(spec.seed, rep));

        // One split shared by every arm.
        std::vector<std::pair<std::string, std::vector<ObsSeq>>> train;
        std::vector<std::pair<std::string, ObsSeq>> test;
        std::vector<ObsSeq> prior_data;
        std::vector<std::size_t> prior_pick(by_class.size());
        for (const auto& [label, seqs] : by_class) {
            std::vector<std::size_t> order(seqs.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            rng.shuffle(order);
            std::vector<ObsSeq> class_train;
            for (std::size_t i = 0; i < spec.train_per_class; ++i)
                class_train.push_back(seqs[order[i]]);
            for (std::size_t i = 0; i < spec.test_per_class; ++i)
                test.emplace_back(label, seqs[order[spec.train_per_class + i]]);
            train.emplace_back(label, std::move(class_train));
        }
        for (std::size_t c = 0; c < train.size(); ++c) {
            prior_pick[c] = static_cast<std::size_t>(rng.below(spec.train_per_class));
            prior_data.push_back(train[c].second[prior_pick[c]]);
        }

        VbConfig cfg = spec.vb;
        cfg.seed = Rng::derive(spec.seed, 1000 + rep);

        if (learned_arm) {
            auto train_for_classes = train;
            if (spec.exclude_prior_recordings)
                for (std::size_t c = 0; c < train_for_classes.size(); ++c)
                    train_for_classes[c].second.erase(train_for_classes[c].second.begin() +
                                                      static_cast<std::ptrdiff_t>(prior_pick[c]));
            EvalResult ev = evaluate(train_for_classes, test, &prior_data, spec.hidden_states,
                                     cfg, grid);
            result.rows.push_back({rep, "hmm-prior", ev.recognition_rate});
            learned_rates.push_back(ev.recognition_rate);
        }
        if (uninf_arm) {
            EvalResult ev = evaluate(train, test, nullptr, spec.hidden_states, cfg, grid);
            result.rows.push_back({rep, "hmm", ev.recognition_rate});
            uninf_rates.push_back(ev.recognition_rate);
        }
        if (spec.run_dtw) {
            DtwTemplateSet ts{{}, grid, DtwLocalCost::grid_euclidean};
            for (const auto& [label, seqs] : train)
                for (const ObsSeq& y : seqs) ts.templates.emplace_back(label, y);
            std::size_t correct = 0;
            for (const auto& [truth, y] : test)
                if (dtw_classify(ts, y).first == truth) ++correct;
            const double rate = static_cast<double>(correct) / static_cast<double>(test.size());
            result.rows.push_back({rep, "dtw", rate});
            dtw_rates.push_back(rate);
        }
    }

    if (learned_arm) result.summary.push_back(exp_detail::summarize("hmm-prior", learned_rates));
    if (uninf_arm) result.summary.push_back(exp_detail::summarize("hmm", uninf_rates));
    if (spec.run_dtw) result.summary.push_back(exp_detail::summarize("dtw", dtw_rates));
    return result;
}

inline void write_experiment_csv(const std::string& path, const ExperimentResult& result) {
    io_detail::AtomicWriter w(path);
    w.stream() << "repetition,arm,recognition_rate\n";
    for (const auto& row : result.rows)
        w.stream() << row.repetition << ',' << row.arm << ',' << io_detail::fmt(row.rate) << '\n';
    w.commit();
}

}  // namespace gestrec
