#pragma once

// Test-only oracles and generators. Everything here is deliberately
// implemented by a different route than the library code it checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gestrec/geometry.hpp"
#include "gestrec/hmm.hpp"
#include "gestrec/matrix.hpp"
#include "gestrec/rng.hpp"
#include "gestrec/vb.hpp"

namespace testutil {

using gestrec::Matrix;
using gestrec::ObsSeq;
using gestrec::Quat;
using gestrec::Rng;
using gestrec::Vec3;

// Independent rotation oracle: quaternion -> 3x3 rotation matrix by the
// textbook component formula, then a plain matrix-vector product.
inline std::array<std::array<double, 3>, 3> to_rotation_matrix(const Quat& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline Vec3 rotate_by_matrix(const Quat& q, const Vec3& v) {
    const auto r = to_rotation_matrix(q);
    return {r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z};
}

inline Quat random_unit_quat(Rng& rng) {
    // Normalized 4-vector of Gaussians is uniform on the quaternion sphere.
    double w, x, y, z, n;
    do {
        w = rng.normal();
        x = rng.normal();
        y = rng.normal();
        z = rng.normal();
        n = std::sqrt(w * w + x * x + y * y + z * z);
    } while (n < 1e-6);
    return Quat(w / n, x / n, y / n, z / n);
}

inline Vec3 random_unit_vec(Rng& rng) {
    double x, y, z, n;
    do {
        x = rng.normal();
        y = rng.normal();
        z = rng.normal();
        n = std::sqrt(x * x + y * y + z * z);
    } while (n < 1e-6);
    return {x / n, y / n, z / n};
}

inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) {
        x = 0.05 + rng.uniform01();
        total += x;
    }
    for (double& x : v) x /= total;
    return v;
}

inline gestrec::HmmPointParams random_stochastic_params(Rng& rng, std::size_t M, std::size_t N) {
    gestrec::HmmPointParams p;
    p.A = Matrix(M, M);
    p.C = Matrix(N, M);
    p.stochastic = true;
    for (std::size_t j = 0; j < M; ++j) {
        const auto a = random_simplex(rng, M);
        for (std::size_t i = 0; i < M; ++i) p.A(i, j) = a[i];
        const auto c = random_simplex(rng, N);
        for (std::size_t i = 0; i < N; ++i) p.C(i, j) = c[i];
    }
    p.pi = random_simplex(rng, M);
    return p;
}

inline ObsSeq random_seq(Rng& rng, std::size_t T, int N) {
    std::vector<int> symbols(T);
    for (int& s : symbols) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(N))) + 1;
    return ObsSeq(std::move(symbols), N);
}

inline gestrec::DirichletHmm random_dirichlet(Rng& rng, std::size_t M, std::size_t N) {
    gestrec::DirichletHmm dh;
    dh.hA = Matrix(M, M);
    dh.hC = Matrix(N, M);
    dh.hpi.resize(M);
    for (double& v : dh.hA.data()) v = 0.2 + 3.0 * rng.uniform01();
    for (double& v : dh.hC.data()) v = 0.2 + 3.0 * rng.uniform01();
    for (double& v : dh.hpi) v = 0.2 + 3.0 * rng.uniform01();
    return dh;
}

// Brute-force posterior expectations over all M^T hidden paths: the oracle
// for expected_counts. Weights each path by pi* prod A* prod C*, normalizes,
// and accumulates indicator counts.
inline gestrec::SufficientStats brute_force_counts(const ObsSeq& y,
                                                   const gestrec::HmmPointParams& point) {
    const std::size_t M = point.num_states();
    const std::size_t T = y.length();
    const auto& symbols = y.symbols();
    gestrec::SufficientStats stats(M, point.C.rows());
    std::vector<std::size_t> x(T, 0);
    double total = 0.0;
    std::vector<std::pair<std::vector<std::size_t>, double>> paths;
    for (;;) {
        double p = point.pi[x[0]] * point.C(static_cast<std::size_t>(symbols[0] - 1), x[0]);
        for (std::size_t t = 1; t < T; ++t)
            p *= point.A(x[t], x[t - 1]) * point.C(static_cast<std::size_t>(symbols[t] - 1), x[t]);
        paths.emplace_back(x, p);
        total += p;
        std::size_t pos = 0;
        while (pos < T && ++x[pos] == M) {
            x[pos] = 0;
            ++pos;
        }
        if (pos == T) break;
    }
    for (const auto& [path, p] : paths) {
        const double q = p / total;
        stats.wpi[path[0]] += q;
        for (std::size_t t = 0; t + 1 < T; ++t) stats.WA(path[t + 1], path[t]) += q;
        for (std::size_t t = 0; t < T; ++t)
            stats.WC(static_cast<std::size_t>(symbols[t] - 1), path[t]) += q;
    }
    return stats;
}

}  // namespace testutil
