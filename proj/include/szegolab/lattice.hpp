#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "szegolab/core.hpp"

namespace szegolab {

// Torus weights mu = (mu_1, ..., mu_d) generating the transversal field
// T = sum_j mu_j T_j.  Entries are taken as exact real values; rational
// independence of the entries is an assumption on the instance, not
// something checked here (it is not decidable for floating-point input).
struct WeightVector {
    std::vector<double> entries;

    explicit WeightVector(std::vector<double> mu) : entries(std::move(mu)) {
        if (entries.empty())
            throw std::invalid_argument("WeightVector: need d >= 1 weights");
        for (double m : entries)
            if (!(m > 0.0))
                throw std::invalid_argument("WeightVector: entries must be strictly positive");
    }

    std::size_t dim() const { return entries.size(); }
    double operator[](std::size_t j) const { return entries[j]; }
    double min_entry() const { return *std::min_element(entries.begin(), entries.end()); }
};

// Fourier multi-index p in Z^d (nonnegative orthant on sphere instances).
using LatticePoint = std::vector<int>;

// Spectral value mu . p of the multi-index p.
inline double weight_value(const WeightVector& mu, const LatticePoint& p) {
    if (p.size() != mu.dim())
        throw std::invalid_argument("weight_value: dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += mu[j] * static_cast<double>(p[j]);
    return s;
}

namespace detail {

// Largest v >= 0 with partial + mu_j * v <= hi, decided by the dot product
// itself (the division only seeds the search), or -1 if none.
inline int last_in_window(double mu_j, double partial, double hi) {
    double seed = std::floor((hi - partial) / mu_j);
    int v = seed < -1.0 ? -1 : static_cast<int>(seed);
    while (v >= 0 && partial + mu_j * v > hi) --v;
    while (partial + mu_j * (v + 1) <= hi) ++v;
    return v;
}

inline void enumerate_rec(const WeightVector& mu, double lo, double hi, std::size_t j,
                          double partial, LatticePoint& p, std::vector<LatticePoint>& out) {
    const int pmax = last_in_window(mu[j], partial, hi);
    if (j + 1 == mu.dim()) {
        for (int v = 0; v <= pmax; ++v) {
            if (partial + mu[j] * v < lo) continue;
            p[j] = v;
            out.push_back(p);
        }
        p[j] = 0;
        return;
    }
    for (int v = 0; v <= pmax; ++v) {
        p[j] = v;
        enumerate_rec(mu, lo, hi, j + 1, partial + mu[j] * v, p, out);
    }
    p[j] = 0;
}

inline std::int64_t count_rec(const WeightVector& mu, double k, std::size_t j, double partial) {
    const int pmax = last_in_window(mu[j], partial, k);
    if (j + 1 == mu.dim()) return static_cast<std::int64_t>(pmax) + 1;
    std::int64_t total = 0;
    for (int v = 0; v <= pmax; ++v)
        total += count_rec(mu, k, j + 1, partial + mu[j] * v);
    return total;
}

}  // namespace detail

// All p in N_0^d with lo <= mu.p <= hi, in lexicographic order.  The window
// is closed at both ends; comparisons use the exact floating dot product with
// no tolerance, so for rational weights boundary hits are sensitive to the
// binary representation of the inputs.
inline std::vector<LatticePoint> enumerate_weights(const WeightVector& mu, double lo, double hi) {
    std::vector<LatticePoint> out;
    if (hi < lo || hi < 0.0) return out;
    lo = std::max(lo, 0.0);
    LatticePoint p(mu.dim(), 0);
    detail::enumerate_rec(mu, lo, hi, 0, 0.0, p, out);
    return out;
}

// |{p in N_0^d : 0 <= mu.p <= k}| without materializing the set.
inline std::int64_t count_weights(const WeightVector& mu, double k) {
    if (k < 0.0) return 0;
    return detail::count_rec(mu, k, 0, 0.0);
}

}  // namespace szegolab
