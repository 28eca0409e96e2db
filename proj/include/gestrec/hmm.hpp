#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/matrix.hpp"
#include "gestrec/rng.hpp"

namespace gestrec {

constexpr double neg_infinity = -std::numeric_limits<double>::infinity();

// Observation sequence over the alphabet {1..N}. Always nonempty.
class ObsSeq {
public:
    ObsSeq(std::vector<int> symbols, int alphabet_size)
        : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
        if (symbols_.empty()) throw DataError("empty observation sequence");
        if (alphabet_size_ < 1) throw DimensionError("alphabet size must be positive");
        for (int s : symbols_)
            if (s < 1 || s > alphabet_size_)
                throw DataError("observation symbol outside alphabet 1.." +
                                std::to_string(alphabet_size_));
    }

    const std::vector<int>& symbols() const { return symbols_; }
    int alphabet_size() const { return alphabet_size_; }
    std::size_t length() const { return symbols_.size(); }

    bool operator==(const ObsSeq&) const = default;

private:
    std::vector<int> symbols_;
    int alphabet_size_;
};

// Point-estimate HMM parameters with the column convention
//   A(i,j) = p(x_{t+1} = i+1 | x_t = j+1)
//   C(i,j) = p(y_t = i+1 | x_t = j+1)
// Columns of A and C and the vector pi sum to 1 when `stochastic` is set;
// geometric-mean parameters are sub-stochastic (column sums <= 1).
struct HmmPointParams {
    Matrix A;                // M x M
    Matrix C;                // N x M
    std::vector<double> pi;  // M
    bool stochastic = true;

    std::size_t num_states() const { return pi.size(); }
    int alphabet_size() const { return static_cast<int>(C.rows()); }

    void validate() const {
        const std::size_t M = pi.size();
        if (M == 0) throw DimensionError("HMM must have at least one state");
        if (A.rows() != M || A.cols() != M) throw DimensionError("transition matrix is not M x M");
        if (C.cols() != M || C.rows() == 0) throw DimensionError("emission matrix is not N x M");
        auto check_entry = [](double v) {
            if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw DataError("probability entry outside [0,1]");
        };
        for (double v : A.data()) check_entry(v);
        for (double v : C.data()) check_entry(v);
        double pi_sum = 0.0;
        for (double v : pi) {
            check_entry(v);
            pi_sum += v;
        }
        auto check_sum = [this](double s) {
            if (stochastic) {
                if (std::abs(s - 1.0) > 1e-9) throw DataError("column of stochastic model does not sum to 1");
            } else {
                if (s > 1.0 + 1e-9) throw DataError("column sum of sub-stochastic model exceeds 1");
            }
        };
        for (std::size_t j = 0; j < M; ++j) {
            check_sum(A.column_sum(j));
            check_sum(C.column_sum(j));
        }
        check_sum(pi_sum);
    }
};

// State of the streaming forward recursion: the one-step-ahead predictive
// p(x_t | y_1..y_{t-1}) and the number of symbols consumed so far.
struct FilterState {
    std::vector<double> predictive;
    std::size_t t = 0;
};

inline FilterState initial_filter_state(const HmmPointParams& params) {
    return FilterState{params.pi, 0};
}

namespace detail {

inline void check_alphabet(const ObsSeq& y, const HmmPointParams& params) {
    if (y.alphabet_size() != params.alphabet_size())
        throw DimensionError("sequence alphabet does not match model emission alphabet");
}

}  // namespace detail

// Log evidence log p(y | params) by the scaled forward recursion, O(M^2 T).
// Each step pulls out the predictive likelihood c_t = p(y_t | y_1..y_{t-1})
// and renormalizes, so nothing underflows; the result is sum log c_t.
// A sequence of probability zero yields -infinity.
inline double forward_loglik(const ObsSeq& y, const HmmPointParams& params) {
    detail::check_alphabet(y, params);
    const std::size_t M = params.num_states();
    std::vector<double> pred = params.pi;
    std::vector<double> filtered(M), next(M);
    double loglik = 0.0;
    const auto& symbols = y.symbols();
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        const std::size_t sym = static_cast<std::size_t>(symbols[t] - 1);
        double c = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            filtered[i] = params.C(sym, i) * pred[i];
            c += filtered[i];
        }
        if (c <= 0.0) return neg_infinity;
        loglik += std::log(c);
        if (t + 1 == symbols.size()) break;
        for (std::size_t i = 0; i < M; ++i) filtered[i] /= c;
        for (std::size_t i = 0; i < M; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < M; ++j) s += params.A(i, j) * filtered[j];
            next[i] = s;
        }
        pred.swap(next);
    }
    return loglik;
}

// One step of the forward filter. Returns the advanced state and
// log p(y_t | y_1..y_{t-1}); summing the step values over a sequence equals
// forward_loglik. A zero-probability symbol yields -infinity and resets the
// predictive to uniform so a stream can survive outliers.
inline std::pair<FilterState, double> filter_step(const FilterState& state, int y_t,
                                                  const HmmPointParams& params) {
    const std::size_t M = params.num_states();
    if (state.predictive.size() != M)
        throw DimensionError("filter state dimension does not match model");
    if (y_t < 1 || y_t > params.alphabet_size())
        throw DimensionError("symbol outside model alphabet");
    const std::size_t sym = static_cast<std::size_t>(y_t - 1);
    std::vector<double> filtered(M);
    double c = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        filtered[i] = params.C(sym, i) * state.predictive[i];
        c += filtered[i];
    }
    if (c <= 0.0) {
        FilterState reset{std::vector<double>(M, 1.0 / static_cast<double>(M)), state.t + 1};
        return {std::move(reset), neg_infinity};
    }
    for (std::size_t i = 0; i < M; ++i) filtered[i] /= c;
    FilterState next{std::vector<double>(M, 0.0), state.t + 1};
    for (std::size_t i = 0; i < M; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) s += params.A(i, j) * filtered[j];
        next.predictive[i] = s;
    }
    return {std::move(next), std::log(c)};
}

// Ancestral sampling from the generative model. Deterministic given seed.
inline ObsSeq sample_sequence(const HmmPointParams& params, std::size_t length,
                              std::uint64_t seed) {
    if (length < 1) throw DataError("sequence length must be at least 1");
    if (!params.stochastic) throw DataError("sampling requires stochastic parameters");
    const std::size_t M = params.num_states();
    Rng rng(seed);
    std::vector<double> col(M);
    std::vector<double> emis(params.C.rows());
    std::size_t x = rng.categorical(params.pi);
    std::vector<int> symbols;
    symbols.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t i = 0; i < emis.size(); ++i) emis[i] = params.C(i, x);
        symbols.push_back(static_cast<int>(rng.categorical(emis)) + 1);
        if (t + 1 < length) {
            for (std::size_t i = 0; i < M; ++i) col[i] = params.A(i, x);
            x = rng.categorical(col);
        }
    }
    return ObsSeq(std::move(symbols), params.alphabet_size());
}

// Exact log evidence by summing p(y, x) over all M^T hidden paths.
// Test oracle; guarded to M^T <= 1e6.
inline double brute_force_loglik(const ObsSeq& y, const HmmPointParams& params) {
    detail::check_alphabet(y, params);
    const std::size_t M = params.num_states();
    const std::size_t T = y.length();
    double paths = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        paths *= static_cast<double>(M);
        if (paths > 1e6) throw DataError("state space too large for brute-force enumeration");
    }
    const auto& symbols = y.symbols();
    std::vector<std::size_t> x(T, 0);
    double total = 0.0;
    for (;;) {
        double p = params.pi[x[0]] * params.C(static_cast<std::size_t>(symbols[0] - 1), x[0]);
        for (std::size_t t = 1; t < T; ++t)
            p *= params.A(x[t], x[t - 1]) *
                 params.C(static_cast<std::size_t>(symbols[t] - 1), x[t]);
        total += p;
        std::size_t pos = 0;
        while (pos < T && ++x[pos] == M) {
            x[pos] = 0;
            ++pos;
        }
        if (pos == T) break;
    }
    return total > 0.0 ? std::log(total) : neg_infinity;
}

}  // namespace gestrec
