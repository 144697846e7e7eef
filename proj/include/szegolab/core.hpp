#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace szegolab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Neumaier-compensated accumulator for long sums of kernel terms.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// log(sum_i exp(v_i)) over a nonempty range; -inf inputs are permitted.
inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random source.  The raw mt19937_64 stream is pinned by the
// standard, and the uniform/normal mappings below are written out explicitly
// (std::*_distribution is implementation-defined), so a fixed seed yields a
// reproducible stream.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Substream for parallel chunk c of a seeded computation.
    static Rng for_chunk(uint64_t seed, uint64_t chunk) {
        return Rng(splitmix64(seed ^ splitmix64(chunk + 1)));
    }

    double uniform() {  // in [0,1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {  // Box-Muller, pair-cached
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    Complex complex_normal() { return Complex(normal(), normal()); }

    uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Runs fn(begin, end) over fixed-size chunks of [0, count).  Chunk boundaries
// depend only on `count`, never on `workers`, so per-chunk results can be
// combined in chunk order to give worker-count-independent output.
inline void parallel_chunks(std::size_t count, unsigned workers,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t chunk = 4096;
    const std::size_t nchunks = (count + chunk - 1) / chunk;
    if (workers <= 1 || nchunks <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            fn(c, c * chunk, std::min(count, (c + 1) * chunk));
        return;
    }
    std::vector<std::thread> pool;
    std::size_t per = (nchunks + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t c0 = w * per, c1 = std::min(nchunks, (w + 1) * per);
        if (c0 >= c1) break;
        pool.emplace_back([=, &fn]() {
            for (std::size_t c = c0; c < c1; ++c)
                fn(c, c * chunk, std::min(count, (c + 1) * chunk));
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace szegolab
