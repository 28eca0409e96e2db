#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/matrix.hpp"
#include "gestrec/rng.hpp"

namespace gestrec {

// Dirichlet hyperparameters over the HMM parameters: one Dirichlet per column
// of A and C plus one over pi. This is the unit of learning and persistence;
// a gesture class is exactly one of these.
struct DirichletHmm {
    Matrix hA;                // M x M, column j parameterizes transitions out of state j+1
    Matrix hC;                // N x M
    std::vector<double> hpi;  // M

    std::size_t num_states() const { return hpi.size(); }
    int alphabet_size() const { return static_cast<int>(hC.rows()); }

    void validate() const {
        const std::size_t M = hpi.size();
        if (M == 0) throw DimensionError("Dirichlet HMM must have at least one state");
        if (hA.rows() != M || hA.cols() != M)
            throw DimensionError("transition hyperparameters are not M x M");
        if (hC.cols() != M || hC.rows() == 0)
            throw DimensionError("emission hyperparameters are not N x M");
        auto check = [](double v) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw DataError("Dirichlet hyperparameters must be positive and finite");
        };
        for (double v : hA.data()) check(v);
        for (double v : hC.data()) check(v);
        for (double v : hpi) check(v);
    }

    bool operator==(const DirichletHmm&) const = default;
};

// Posterior-expected counts from one E-step: state-1 marginals, transition
// counts, emission counts. For a length-T sequence the totals are 1, T-1
// and T respectively.
struct SufficientStats {
    std::vector<double> wpi;
    Matrix WA;
    Matrix WC;

    SufficientStats(std::size_t M, std::size_t N) : wpi(M, 0.0), WA(M, M), WC(N, M) {}

    SufficientStats& operator+=(const SufficientStats& o) {
        for (std::size_t i = 0; i < wpi.size(); ++i) wpi[i] += o.wpi[i];
        for (std::size_t i = 0; i < WA.data().size(); ++i) WA.data()[i] += o.WA.data()[i];
        for (std::size_t i = 0; i < WC.data().size(); ++i) WC.data()[i] += o.WC.data()[i];
        return *this;
    }
};

struct VbConfig {
    // Pooled fits need a few hundred iterations to move off the symmetric
    // saddle at this tolerance; 100 truncates them mid-escape.
    int max_iters = 500;
    double tol = 1e-4;      // max absolute hyperparameter change
    double alpha0 = 1.0;    // uninformative prior value
    double jitter = 0.01;   // symmetry-breaking perturbation of the first E-step
    int restarts = 6;       // seeded restarts for the shared-prior fit
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw DataError("max_iters must be at least 1");
        if (!(tol > 0.0)) throw DataError("tol must be positive");
        if (!(alpha0 > 0.0)) throw DataError("alpha0 must be positive");
        if (jitter < 0.0) throw DataError("jitter must be nonnegative");
        if (restarts < 1) throw DataError("restarts must be at least 1");
    }
};

// Convergence report for a vb_fit run.
struct VbTrace {
    int iterations = 0;           // E-M passes performed
    int changed_iterations = 0;   // passes whose update moved some h by >= tol
    double final_delta = std::numeric_limits<double>::infinity();
    bool converged = false;
};

namespace detail {

// Digamma via recurrence to x >= 10 plus the asymptotic series; absolute
// error is a few 1e-14 over the positive axis.
inline double digamma(double x) {
    if (!(x > 0.0)) throw DataError("digamma requires positive argument");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 -
                              inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return result;
}

}  // namespace detail

// Symmetric prior with every hyperparameter equal to alpha0.
inline DirichletHmm uninformative_prior(std::size_t M, std::size_t N, double alpha0) {
    if (M < 1 || N < 1) throw DimensionError("prior dimensions must be at least 1");
    if (!(alpha0 > 0.0)) throw DimensionError("alpha0 must be positive");
    DirichletHmm dh;
    dh.hA = Matrix(M, M, alpha0);
    dh.hC = Matrix(N, M, alpha0);
    dh.hpi.assign(M, alpha0);
    return dh;
}

// Expected parameter values: each column normalized by its sum. Stochastic.
inline HmmPointParams dirichlet_mean(const DirichletHmm& dh) {
    dh.validate();
    const std::size_t M = dh.num_states();
    const std::size_t N = dh.hC.rows();
    HmmPointParams p;
    p.A = Matrix(M, M);
    p.C = Matrix(N, M);
    p.pi.resize(M);
    p.stochastic = true;
    for (std::size_t j = 0; j < M; ++j) {
        const double sa = dh.hA.column_sum(j);
        for (std::size_t i = 0; i < M; ++i) p.A(i, j) = dh.hA(i, j) / sa;
        const double sc = dh.hC.column_sum(j);
        for (std::size_t i = 0; i < N; ++i) p.C(i, j) = dh.hC(i, j) / sc;
    }
    double sp = 0.0;
    for (double v : dh.hpi) sp += v;
    for (std::size_t i = 0; i < M; ++i) p.pi[i] = dh.hpi[i] / sp;
    return p;
}

// Geometric-mean parameters exp(E[log theta]) under the variational
// Dirichlets: entrywise exp(psi(h_ij) - psi(sum_i h_ij)). Sub-stochastic by
// Jensen; these drive the E-step recursion.
inline HmmPointParams geometric_params(const DirichletHmm& dh) {
    dh.validate();
    const std::size_t M = dh.num_states();
    const std::size_t N = dh.hC.rows();
    HmmPointParams p;
    p.A = Matrix(M, M);
    p.C = Matrix(N, M);
    p.pi.resize(M);
    p.stochastic = false;
    for (std::size_t j = 0; j < M; ++j) {
        const double da = detail::digamma(dh.hA.column_sum(j));
        for (std::size_t i = 0; i < M; ++i)
            p.A(i, j) = std::exp(detail::digamma(dh.hA(i, j)) - da);
        const double dc = detail::digamma(dh.hC.column_sum(j));
        for (std::size_t i = 0; i < N; ++i)
            p.C(i, j) = std::exp(detail::digamma(dh.hC(i, j)) - dc);
    }
    double sp = 0.0;
    for (double v : dh.hpi) sp += v;
    const double dp = detail::digamma(sp);
    for (std::size_t i = 0; i < M; ++i)
        p.pi[i] = std::exp(detail::digamma(dh.hpi[i]) - dp);
    return p;
}

// Posterior marginals of q(x) proportional to pi* prod A* prod C*, folded
// into expected counts via the scaled forward-backward recursion. Accepts
// sub-stochastic parameters.
inline SufficientStats expected_counts(const ObsSeq& y, const HmmPointParams& point) {
    detail::check_alphabet(y, point);
    const std::size_t M = point.num_states();
    const std::size_t T = y.length();
    const auto& symbols = y.symbols();

    // Forward pass: filtered alpha_t and scale factors c_t.
    std::vector<std::vector<double>> alpha(T, std::vector<double>(M));
    std::vector<double> scale(T);
    std::vector<double> pred = point.pi;
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t sym = static_cast<std::size_t>(symbols[t] - 1);
        double c = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            alpha[t][i] = point.C(sym, i) * pred[i];
            c += alpha[t][i];
        }
        if (c <= 0.0)
            throw NumericalError("sequence has zero posterior mass under the model");
        for (std::size_t i = 0; i < M; ++i) alpha[t][i] /= c;
        scale[t] = c;
        if (t + 1 < T) {
            for (std::size_t i = 0; i < M; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < M; ++j) s += point.A(i, j) * alpha[t][j];
                pred[i] = s;
            }
        }
    }

    // Backward pass with the same scaling; gamma_t(i) = alpha_t(i) beta_t(i).
    std::vector<double> beta(M, 1.0), beta_prev(M);
    SufficientStats stats(M, point.C.rows());
    for (std::size_t i = 0; i < M; ++i)
        stats.WC(static_cast<std::size_t>(symbols[T - 1] - 1), i) += alpha[T - 1][i];
    for (std::size_t t = T - 1; t-- > 0;) {
        const std::size_t sym_next = static_cast<std::size_t>(symbols[t + 1] - 1);
        for (std::size_t j = 0; j < M; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < M; ++i)
                s += point.A(i, j) * point.C(sym_next, i) * beta[i];
            beta_prev[j] = s / scale[t + 1];
        }
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t i = 0; i < M; ++i)
                stats.WA(i, j) += alpha[t][j] * point.A(i, j) * point.C(sym_next, i) * beta[i] /
                                  scale[t + 1];
            const double gamma = alpha[t][j] * beta_prev[j];
            stats.WC(static_cast<std::size_t>(symbols[t] - 1), j) += gamma;
        }
        beta.swap(beta_prev);
    }
    for (std::size_t i = 0; i < M; ++i) stats.wpi[i] = alpha[0][i] * beta[i];
    return stats;
}

namespace detail {

// Multiplicative symmetry-breaking perturbation of point parameters,
// rescaled so each column keeps its pre-jitter mass.
inline void apply_jitter(HmmPointParams& point, double jitter, std::uint64_t seed) {
    Rng rng(seed);
    auto perturb_column = [&](auto get, auto set, std::size_t rows) {
        double before = 0.0, after = 0.0;
        std::vector<double> v(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            const double u = rng.uniform(-0.5, 0.5);
            v[i] = get(i) * (1.0 + jitter * u);
            before += get(i);
            after += v[i];
        }
        const double rescale = after > 0.0 ? before / after : 1.0;
        for (std::size_t i = 0; i < rows; ++i) set(i, v[i] * rescale);
    };
    const std::size_t M = point.num_states();
    for (std::size_t j = 0; j < M; ++j) {
        perturb_column([&](std::size_t i) { return point.A(i, j); },
                       [&](std::size_t i, double v) { point.A(i, j) = v; }, M);
        perturb_column([&](std::size_t i) { return point.C(i, j); },
                       [&](std::size_t i, double v) { point.C(i, j) = v; }, point.C.rows());
    }
    perturb_column([&](std::size_t i) { return point.pi[i]; },
                   [&](std::size_t i, double v) { point.pi[i] = v; }, M);
}

inline double max_abs_diff(const DirichletHmm& a, const DirichletHmm& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.hpi.size(); ++i)
        d = std::max(d, std::abs(a.hpi[i] - b.hpi[i]));
    for (std::size_t i = 0; i < a.hA.data().size(); ++i)
        d = std::max(d, std::abs(a.hA.data()[i] - b.hA.data()[i]));
    for (std::size_t i = 0; i < a.hC.data().size(); ++i)
        d = std::max(d, std::abs(a.hC.data()[i] - b.hC.data()[i]));
    return d;
}

}  // namespace detail

// Variational Bayesian fit: alternate the E-step (expected counts under the
// geometric-mean parameters of the current posterior) with the conjugate
// M-step h_post = h_prior + counts, until the hyperparameters move less than
// cfg.tol or max_iters is reached.
inline DirichletHmm vb_fit(const std::vector<ObsSeq>& data, const DirichletHmm& prior,
                           const VbConfig& cfg, VbTrace* trace = nullptr) {
    cfg.validate();
    prior.validate();
    if (data.empty()) throw DataError("empty dataset");
    for (const ObsSeq& y : data)
        if (y.alphabet_size() != prior.alphabet_size())
            throw DimensionError("dataset alphabet does not match prior");

    const std::size_t M = prior.num_states();
    const std::size_t N = prior.hC.rows();
    DirichletHmm posterior = prior;
    VbTrace local;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        HmmPointParams point = geometric_params(posterior);
        if (iter == 1 && cfg.jitter > 0.0) detail::apply_jitter(point, cfg.jitter, cfg.seed);

        SufficientStats stats(M, N);
        for (const ObsSeq& y : data) stats += expected_counts(y, point);

        DirichletHmm next = prior;
        for (std::size_t i = 0; i < M; ++i) next.hpi[i] += stats.wpi[i];
        for (std::size_t i = 0; i < next.hA.data().size(); ++i)
            next.hA.data()[i] += stats.WA.data()[i];
        for (std::size_t i = 0; i < next.hC.data().size(); ++i)
            next.hC.data()[i] += stats.WC.data()[i];

        local.final_delta = detail::max_abs_diff(next, posterior);
        local.iterations = iter;
        posterior = std::move(next);
        if (local.final_delta >= cfg.tol) ++local.changed_iterations;
        if (local.final_delta < cfg.tol) {
            local.converged = true;
            break;
        }
    }
    if (trace) *trace = local;
    return posterior;
}

// First step of the two-step scheme: a pooled fit over one sequence per
// class, from a symmetric prior. The result is class independent.
//
// The symmetric start makes this fit prone to partially collapsed local
// optima (several hidden states left undifferentiated), so it runs
// cfg.restarts seeded fits and keeps the one whose expected parameters give
// the pooled data the highest evidence. Deterministic given cfg.seed.
inline DirichletHmm learn_shared_prior(const std::vector<ObsSeq>& one_per_class, std::size_t M,
                                       const VbConfig& cfg, VbTrace* trace = nullptr) {
    cfg.validate();
    if (one_per_class.empty()) throw DataError("empty dataset");
    const int N = one_per_class.front().alphabet_size();
    for (const ObsSeq& y : one_per_class)
        if (y.alphabet_size() != N) throw DimensionError("inconsistent alphabet across dataset");
    const DirichletHmm start = uninformative_prior(M, static_cast<std::size_t>(N), cfg.alpha0);

    DirichletHmm best = start;
    VbTrace best_trace;
    double best_score = -std::numeric_limits<double>::infinity();
    // Without jitter every restart takes the identical path.
    const int attempts = cfg.jitter > 0.0 ? cfg.restarts : 1;
    for (int r = 0; r < attempts; ++r) {
        VbConfig attempt = cfg;
        attempt.seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(r));
        VbTrace attempt_trace;
        DirichletHmm post = vb_fit(one_per_class, start, attempt, &attempt_trace);
        const HmmPointParams mean = dirichlet_mean(post);
        double score = 0.0;
        for (const ObsSeq& y : one_per_class) score += forward_loglik(y, mean);
        if (score > best_score) {
            best_score = score;
            best = std::move(post);
            best_trace = attempt_trace;
        }
    }
    if (trace) *trace = best_trace;
    return best;
}

// Second step: refine the shared prior with class-specific measurements.
// With no class data the prior is returned unchanged.
inline DirichletHmm learn_class(const DirichletHmm& prior, const std::vector<ObsSeq>& class_data,
                                const VbConfig& cfg, VbTrace* trace = nullptr) {
    if (class_data.empty()) {
        if (trace) *trace = VbTrace{0, 0, 0.0, true};
        return prior;
    }
    return vb_fit(class_data, prior, cfg, trace);
}

}  // namespace gestrec
