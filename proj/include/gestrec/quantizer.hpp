#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gestrec/errors.hpp"
#include "gestrec/geometry.hpp"
#include "gestrec/hmm.hpp"

namespace gestrec {

// Ordered set of N unit basis vectors b_1..b_N defining the direction
// alphabet. Symbols are 1-based: symbol n corresponds to basis()[n-1].
class QuantizerGrid {
public:
    explicit QuantizerGrid(std::vector<Vec3> basis) : basis_(std::move(basis)) {
        if (basis_.size() < 2) throw DataError("quantizer grid needs at least 2 basis vectors");
        for (auto& b : basis_) {
            if (std::abs(b.norm() - 1.0) > 1e-6)
                throw DataError("quantizer grid basis vector is not unit length");
            b = b.normalized();
        }
        for (std::size_t i = 0; i < basis_.size(); ++i)
            for (std::size_t j = i + 1; j < basis_.size(); ++j)
                if (distance(basis_[i], basis_[j]) < 1e-6)
                    throw DataError("quantizer grid has duplicate basis vectors");
    }

    std::size_t size() const { return basis_.size(); }
    const std::vector<Vec3>& basis() const { return basis_; }
    const Vec3& basis_for(int symbol) const { return basis_[static_cast<std::size_t>(symbol - 1)]; }

private:
    std::vector<Vec3> basis_;
};

// The six signed coordinate axes, ordered (+x, -x, +y, -y, +z, -z).
inline QuantizerGrid default_grid() {
    return QuantizerGrid({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});
}

// N roughly evenly spread unit directions (Fibonacci sphere). Used where an
// alphabet of size other than 6 needs a geometric embedding.
inline QuantizerGrid fibonacci_grid(std::size_t n) {
    if (n < 2) throw DataError("fibonacci grid needs at least 2 points");
    const double golden_angle = 2.399963229728653;
    std::vector<Vec3> basis;
    basis.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * static_cast<double>(i);
        basis.push_back(Vec3{r * std::cos(phi), r * std::sin(phi), z}.normalized());
    }
    return QuantizerGrid(std::move(basis));
}

// Nearest-basis-vector quantization: the symbol minimizing ||d - b_n||,
// ties broken to the lowest index. Input is normalized first.
inline int quantize(const Vec3& d, const QuantizerGrid& grid) {
    const Vec3 u = d.normalized();
    std::size_t best = 0;
    double best_dist = distance(u, grid.basis()[0]);
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double dist = distance(u, grid.basis()[n]);
        if (dist < best_dist) {
            best = n;
            best_dist = dist;
        }
    }
    return static_cast<int>(best) + 1;
}

// Full per-sample pipeline: compensate, extract arm direction, quantize.
inline ObsSeq quantize_stream(const std::vector<Quat>& quats, const Quat& q_ref,
                              const QuantizerGrid& grid) {
    if (quats.empty()) throw DataError("empty quaternion stream");
    std::vector<int> symbols;
    symbols.reserve(quats.size());
    for (const Quat& q : quats)
        symbols.push_back(quantize(arm_direction(compensate(q, q_ref)), grid));
    return ObsSeq(std::move(symbols), static_cast<int>(grid.size()));
}

}  // namespace gestrec
