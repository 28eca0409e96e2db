#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/quantizer.hpp"
#include "gestrec/vb.hpp"

namespace gestrec {

// One trained gesture class: its Dirichlet posterior and the cached
// expected-value point parameters used for recognition.
struct GestureClassModel {
    std::string label;
    DirichletHmm posterior;
    HmmPointParams point;  // dirichlet_mean(posterior)
};

// Labeled class models sharing one prior and one quantizer grid. Value type;
// register_class returns an updated copy.
class ClassRegistry {
public:
    ClassRegistry(DirichletHmm shared_prior, QuantizerGrid grid)
        : shared_prior_(std::move(shared_prior)), grid_(std::move(grid)) {
        shared_prior_.validate();
        if (shared_prior_.alphabet_size() != static_cast<int>(grid_.size()))
            throw DimensionError("prior emission alphabet does not match quantizer grid");
    }

    std::size_t size() const { return classes_.size(); }
    const std::vector<GestureClassModel>& classes() const { return classes_; }
    const DirichletHmm& shared_prior() const { return shared_prior_; }
    const QuantizerGrid& grid() const { return grid_; }

    const GestureClassModel* find(const std::string& label) const {
        for (const auto& c : classes_)
            if (c.label == label) return &c;
        return nullptr;
    }

    // Used by register_class and deserialization.
    void add_model(GestureClassModel model) {
        if (find(model.label)) throw DataError("duplicate class label '" + model.label + "'");
        if (model.posterior.num_states() != shared_prior_.num_states() ||
            model.posterior.alphabet_size() != shared_prior_.alphabet_size())
            throw DimensionError("class model dimensions do not match registry prior");
        classes_.push_back(std::move(model));
    }

private:
    DirichletHmm shared_prior_;
    QuantizerGrid grid_;
    std::vector<GestureClassModel> classes_;
};

// Train a new class from the shared prior and return the grown registry.
inline ClassRegistry register_class(ClassRegistry reg, const std::string& label,
                                    const std::vector<ObsSeq>& class_data, const VbConfig& cfg) {
    if (reg.find(label)) throw DataError("duplicate class label '" + label + "'");
    if (class_data.empty()) throw DataError("empty dataset for class '" + label + "'");
    DirichletHmm posterior = learn_class(reg.shared_prior(), class_data, cfg);
    HmmPointParams point = dirichlet_mean(posterior);
    reg.add_model(GestureClassModel{label, std::move(posterior), std::move(point)});
    return reg;
}

struct Classification {
    std::string label;
    std::vector<std::pair<std::string, double>> scores;  // registration order
};

// Evidence of y under each class's expected parameters; the winner is the
// argmax, ties broken by registration order. With a uniform class prior this
// equals the maximum-posterior class.
inline Classification classify(const ClassRegistry& reg, const ObsSeq& y) {
    if (reg.size() == 0) throw DataError("registry has no classes");
    Classification result;
    double best = neg_infinity;
    bool first = true;
    for (const auto& c : reg.classes()) {
        const double score = forward_loglik(y, c.point);
        result.scores.emplace_back(c.label, score);
        if (first || score > best) {
            best = score;
            result.label = c.label;
            first = false;
        }
    }
    return result;
}

// Labels whose evidence exceeds the threshold, highest first. An empty
// result means the candidate gesture is sufficiently novel to register.
inline std::vector<std::string> similarity_check(const ClassRegistry& reg, const ObsSeq& y,
                                                 double threshold) {
    Classification c = classify(reg, y);
    std::vector<std::pair<std::string, double>> hits;
    for (const auto& [label, score] : c.scores)
        if (score > threshold) hits.emplace_back(label, score);
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> labels;
    labels.reserve(hits.size());
    for (auto& [label, score] : hits) labels.push_back(std::move(label));
    return labels;
}

struct EvalResult {
    double recognition_rate = 0.0;
    Matrix confusion;                 // rows = true class, cols = predicted class
    std::vector<std::string> labels;  // row/column order
};

// Build a registry from training data (shared prior learned from prior_data
// when given, symmetric otherwise), classify every test item, and report the
// recognition rate with the full confusion matrix.
inline EvalResult evaluate(const std::vector<std::pair<std::string, std::vector<ObsSeq>>>& train,
                           const std::vector<std::pair<std::string, ObsSeq>>& test,
                           const std::vector<ObsSeq>* prior_data, std::size_t hidden_states,
                           const VbConfig& cfg,
                           const std::optional<QuantizerGrid>& grid = std::nullopt) {
    if (train.empty()) throw DataError("empty training set");
    if (test.empty()) throw DataError("empty test set");
    for (const auto& [label, seqs] : train)
        if (seqs.empty()) throw DataError("empty dataset for class '" + label + "'");
    const int N = train.front().second.front().alphabet_size();
    if (N < 2) throw DataError("alphabet must have at least 2 symbols");
    for (const auto& [label, seqs] : test) {
        bool found = false;
        for (const auto& [tl, ts] : train) found = found || tl == label;
        if (!found) throw DataError("test label '" + label + "' missing from training set");
    }

    DirichletHmm prior =
        (prior_data && !prior_data->empty())
            ? learn_shared_prior(*prior_data, hidden_states, cfg)
            : uninformative_prior(hidden_states, static_cast<std::size_t>(N), cfg.alpha0);

    QuantizerGrid g = grid ? *grid : (N == 6 ? default_grid() : fibonacci_grid(static_cast<std::size_t>(N)));
    ClassRegistry reg(std::move(prior), std::move(g));
    for (const auto& [label, seqs] : train) reg = register_class(std::move(reg), label, seqs, cfg);

    EvalResult result;
    result.labels.reserve(train.size());
    for (const auto& [label, seqs] : train) result.labels.push_back(label);
    result.confusion = Matrix(train.size(), train.size());
    auto index_of = [&](const std::string& label) {
        for (std::size_t i = 0; i < result.labels.size(); ++i)
            if (result.labels[i] == label) return i;
        throw DataError("unknown label '" + label + "'");
    };

    std::size_t correct = 0;
    for (const auto& [truth, y] : test) {
        const Classification c = classify(reg, y);
        result.confusion(index_of(truth), index_of(c.label)) += 1.0;
        if (c.label == truth) ++correct;
    }
    result.recognition_rate = static_cast<double>(correct) / static_cast<double>(test.size());
    return result;
}

}  // namespace gestrec
