#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "szegolab/core.hpp"
#include "szegolab/cutoff.hpp"
#include "szegolab/lattice.hpp"
#include "szegolab/quadrature.hpp"
#include "szegolab/sphere_geometry.hpp"

// Equivariant Hardy-space kernels on the weighted sphere.  Under the full
// torus, every joint Fourier space of CR functions is spanned by the single
// monomial z^p with p in N_0^{n+1} (boundary values of holomorphic functions
// on the ball decompose into monomial weight spaces; a nonzero Fourier
// coefficient with some p_j < 0 would force a pole along z_j = 0), so the
// kernel diagonal of the window [0,k] is
//   S_k(z) = sum_{0 <= mu.p <= k} |z^p|^2 / ||z^p||^2,
// with squared norms taken in L^2(X, dv_X), dv_X = w_mu dsigma.
namespace szegolab {

// Squared L^2 norms log ||z^p||^2 for every p with mu.p <= k_max, built once
// per (mu, k_max, rule degree) on shared quadrature nodes and stored as logs
// in lexicographic order of p.
class NormTable {
  public:
    // Chooses rule degree max(min_degree, max total |p| + margin) so all
    // window monomials are integrated at polynomial exactness.
    static NormTable build(const WeightVector& mu, int n, double k_max, int min_degree = 20,
                           unsigned workers = 1) {
        if (static_cast<int>(mu.dim()) != n + 1)
            throw std::invalid_argument("NormTable: need d = n+1 torus weights");
        if (k_max < 0.0) throw std::invalid_argument("NormTable: k_max must be >= 0");
        const int needed = static_cast<int>(std::floor(k_max / mu.min_entry()));
        const int degree = std::max(min_degree, needed + 40);
        NormTable table;
        table.mu_values_ = mu.entries;
        table.n_ = n;
        table.degree_ = degree;
        table.k_max_ = k_max;

        SimplexRule rule = SimplexRule::build(n, degree);
        const std::size_t nn = rule.size();
        const int d = n + 1;
        // node data: log t_j per node, and log of (rule weight * density)
        std::vector<double> logt(nn * static_cast<std::size_t>(d));
        std::vector<double> logw(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            const double* t = rule.node(i);
            std::vector<double> tv(t, t + d);
            double dens = volume_density(mu, SpherePoint::from_t(tv));
            logw[i] = std::log(rule.weight(i) * dens);
            for (int j = 0; j < d; ++j) logt[i * d + j] = std::log(t[j]);
        }
        const double log_area_factor = std::log(2.0) + (n + 1) * std::log(kPi);

        std::vector<LatticePoint> pts = enumerate_weights(mu, 0.0, k_max);
        table.pflat_.resize(pts.size() * static_cast<std::size_t>(d));
        table.spectral_.resize(pts.size());
        table.lognorm_.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (int j = 0; j < d; ++j) table.pflat_[i * d + j] = pts[i][j];
            table.spectral_[i] = weight_value(mu, pts[i]);
        }

        if (d == 2)
            table.fill_lognorms_swept(logt, logw, log_area_factor, workers);
        else
            table.fill_lognorms_generic(logt, logw, log_area_factor, workers);
        return table;
    }

    const std::vector<double>& mu_values() const { return mu_values_; }

    void require_weights(const WeightVector& mu) const {
        if (mu.entries != mu_values_)
            throw std::invalid_argument("NormTable: table was built for different torus weights");
    }

    int n() const { return n_; }
    int dims() const { return n_ + 1; }
    int degree() const { return degree_; }
    double k_max() const { return k_max_; }
    std::size_t size() const { return lognorm_.size(); }

    const int* point(std::size_t i) const { return pflat_.data() + i * static_cast<std::size_t>(dims()); }
    double spectral(std::size_t i) const { return spectral_[i]; }
    double log_norm_at(std::size_t i) const { return lognorm_[i]; }

    bool contains(const LatticePoint& p) const { return find(p).has_value(); }

    double log_norm(const LatticePoint& p) const {
        auto idx = find(p);
        if (!idx) throw std::out_of_range("NormTable: no norm entry for requested lattice point");
        return lognorm_[*idx];
    }

    // Calls fn(index) for every entry with spectral value in [lo, hi].
    void for_each_in_window(double lo, double hi, const std::function<void(std::size_t)>& fn) const {
        for (std::size_t i = 0; i < spectral_.size(); ++i)
            if (spectral_[i] >= lo && spectral_[i] <= hi) fn(i);
    }

    // Text cache: one header line with the build key, then p_1,...,p_d,log_norm
    // rows at 17 significant digits (round-trip exact).
    void save_csv(const std::string& path, const std::vector<std::string>& mu_labels = {}) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("NormTable: cannot open " + path + " for writing");
        out << "# szegolab-normtable v1 n=" << n_ << " degree=" << degree_;
        char buf[64];
        std::snprintf(buf, sizeof buf, " kmax=%.17g mu=", k_max_);
        out << buf;
        for (std::size_t j = 0; j < mu_values_.size(); ++j) {
            if (j) out << ";";
            if (j < mu_labels.size())
                out << mu_labels[j];
            else {
                std::snprintf(buf, sizeof buf, "%.17g", mu_values_[j]);
                out << buf;
            }
        }
        out << "\n";
        const int d = dims();
        for (std::size_t i = 0; i < size(); ++i) {
            for (int j = 0; j < d; ++j) out << pflat_[i * d + j] << ",";
            std::snprintf(buf, sizeof buf, "%.17g", lognorm_[i]);
            out << buf << "\n";
        }
        if (!out) throw std::runtime_error("NormTable: write to " + path + " failed");
    }

    struct CacheKey {
        int n;
        int degree;
        double k_max;
        std::string mu_joined;  // labels joined by ';'
    };

    static std::optional<CacheKey> peek_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) return std::nullopt;
        std::string header;
        if (!std::getline(in, header)) return std::nullopt;
        CacheKey key;
        if (std::sscanf(header.c_str(), "# szegolab-normtable v1 n=%d degree=%d kmax=%lf",
                        &key.n, &key.degree, &key.k_max) != 3)
            return std::nullopt;
        auto pos = header.find("mu=");
        if (pos == std::string::npos) return std::nullopt;
        key.mu_joined = header.substr(pos + 3);
        return key;
    }

    static NormTable load_csv(const std::string& path, const WeightVector& mu) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("NormTable: cannot open " + path);
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("NormTable: empty cache file");
        NormTable table;
        if (std::sscanf(line.c_str(), "# szegolab-normtable v1 n=%d degree=%d kmax=%lf",
                        &table.n_, &table.degree_, &table.k_max_) != 3)
            throw std::runtime_error("NormTable: malformed cache header");
        table.mu_values_ = mu.entries;
        const int d = table.dims();
        if (static_cast<int>(mu.dim()) != d)
            throw std::runtime_error("NormTable: cache dimension does not match weights");
        LatticePoint p(d);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const char* s = line.c_str();
            char* end = nullptr;
            for (int j = 0; j < d; ++j) {
                p[j] = static_cast<int>(std::strtol(s, &end, 10));
                if (end == s || *end != ',') throw std::runtime_error("NormTable: malformed cache row");
                s = end + 1;
            }
            double v = std::strtod(s, &end);
            if (end == s) throw std::runtime_error("NormTable: malformed cache row");
            for (int j = 0; j < d; ++j) table.pflat_.push_back(p[j]);
            table.spectral_.push_back(weight_value(mu, p));
            table.lognorm_.push_back(v);
        }
        return table;
    }

  private:
    NormTable() = default;

    std::optional<std::size_t> find(const LatticePoint& p) const {
        const int d = dims();
        if (static_cast<int>(p.size()) != d) return std::nullopt;
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            const int* q = point(mid);
            int cmp = 0;
            for (int j = 0; j < d; ++j) {
                if (q[j] != p[j]) {
                    cmp = q[j] < p[j] ? -1 : 1;
                    break;
                }
            }
            if (cmp == 0) return mid;
            if (cmp < 0)
                lo = mid + 1;
            else
                hi = mid;
        }
        return std::nullopt;
    }

    // Generic path: per-point log-sum-exp over the shared nodes.
    void fill_lognorms_generic(const std::vector<double>& logt, const std::vector<double>& logw,
                               double log_area_factor, unsigned workers) {
        const int d = dims();
        const std::size_t nn = logw.size();
        parallel_chunks(size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
            std::vector<double> terms(nn);
            for (std::size_t i = b; i < e; ++i) {
                const int* p = point(i);
                for (std::size_t q = 0; q < nn; ++q) {
                    double l = logw[q];
                    for (int j = 0; j < d; ++j) l += p[j] * logt[q * d + j];
                    terms[q] = l;
                }
                lognorm_[i] = log_area_factor + log_sum_exp(terms);
            }
        });
    }

    // d = 2 fast path: for each row p_1 the node vector carries
    // exp(logw + p_1 log t_1 + p_2 log t_2 - M) and advances by an
    // elementwise multiply with t_2 per p_2 step.  The vector is refreshed
    // exactly from the logs (with a fresh max shift M) on a fixed cadence and
    // whenever the running sum has decayed past 1e-13: this caps the length
    // of every multiplicative chain and keeps live values out of the
    // denormal range, where repeated rounding would stall their decay.
    void fill_lognorms_swept(const std::vector<double>& logt, const std::vector<double>& logw,
                             double log_area_factor, unsigned workers) {
        const std::size_t nn = logw.size();
        // row offsets in the lex-ordered table: row = value of p_1
        std::vector<std::size_t> row_begin;
        {
            int last_p1 = -1;
            for (std::size_t i = 0; i < size(); ++i) {
                int p1 = point(i)[0];
                while (last_p1 < p1) {
                    row_begin.push_back(i);
                    ++last_p1;
                }
            }
            row_begin.push_back(size());
        }
        const std::size_t nrows = row_begin.size() - 1;
        std::vector<double> t2(nn);
        for (std::size_t q = 0; q < nn; ++q) t2[q] = std::exp(logt[q * 2 + 1]);
        const int refresh_every = 512;
        parallel_chunks(nrows, workers, [&](std::size_t, std::size_t rb, std::size_t re) {
            std::vector<double> r(nn);
            for (std::size_t row = rb; row < re; ++row) {
                const std::size_t begin = row_begin[row], end = row_begin[row + 1];
                if (begin == end) continue;
                const double p1 = static_cast<double>(row);
                double shift = 0.0;
                int since_refresh = refresh_every;  // force the initial fill
                for (std::size_t i = begin; i < end; ++i) {
                    const double p2 = static_cast<double>(i - begin);
                    if (since_refresh >= refresh_every) {
                        double m = -std::numeric_limits<double>::infinity();
                        for (std::size_t q = 0; q < nn; ++q)
                            m = std::max(m, logw[q] + p1 * logt[q * 2] + p2 * logt[q * 2 + 1]);
                        for (std::size_t q = 0; q < nn; ++q)
                            r[q] = std::exp(logw[q] + p1 * logt[q * 2] + p2 * logt[q * 2 + 1] - m);
                        shift = m;
                        since_refresh = 0;
                    }
                    double s = 0.0;
                    for (std::size_t q = 0; q < nn; ++q) s += r[q];
                    lognorm_[i] = log_area_factor + std::log(s) + shift;
                    ++since_refresh;
                    if (i + 1 < end) {
                        if (s < 1e-13) {
                            since_refresh = refresh_every;
                        } else {
                            for (std::size_t q = 0; q < nn; ++q) r[q] *= t2[q];
                        }
                    }
                }
            }
        });
    }

    std::vector<double> mu_values_;
    int n_ = 0;
    int degree_ = 0;
    double k_max_ = 0.0;
    std::vector<int> pflat_;
    std::vector<double> spectral_;
    std::vector<double> lognorm_;
};

// log ||z^p||^2 = log int prod t_j^{p_j} w_mu(t) dsigma via a shared rule.
inline double log_monomial_norm(const WeightVector& mu, const LatticePoint& p,
                                const SimplexRule& rule) {
    const int n = rule.n();
    if (static_cast<int>(p.size()) != n + 1 || static_cast<int>(mu.dim()) != n + 1)
        throw std::invalid_argument("monomial_norm: dimension mismatch");
    std::vector<double> terms(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double* t = rule.node(i);
        std::vector<double> tv(t, t + n + 1);
        double l = std::log(rule.weight(i) * volume_density(mu, SpherePoint::from_t(tv)));
        for (int j = 0; j <= n; ++j) l += p[j] * std::log(t[j]);
        terms[i] = l;
    }
    return std::log(2.0) + (n + 1) * std::log(kPi) + log_sum_exp(terms);
}

inline double monomial_norm(const WeightVector& mu, const LatticePoint& p, const SimplexRule& rule) {
    return std::exp(log_monomial_norm(mu, p, rule));
}

namespace detail {

// log |z^p|^2 = sum_j p_j log t_j, or -inf when some p_j > 0 sits on z_j = 0.
inline double log_monomial_value_sq(const int* p, int d, const std::vector<double>& t) {
    double l = 0.0;
    for (int j = 0; j < d; ++j) {
        if (p[j] == 0) continue;
        if (t[j] == 0.0) return -std::numeric_limits<double>::infinity();
        l += p[j] * std::log(t[j]);
    }
    return l;
}

}  // namespace detail

// Fourier component diagonal S_p(z) = |z^p|^2 / ||z^p||^2.
inline double szego_component(const WeightVector& mu, const LatticePoint& p, const SpherePoint& zp,
                              const NormTable& norms) {
    norms.require_weights(mu);
    if (p.size() != mu.dim()) throw std::invalid_argument("szego_component: dimension mismatch");
    double ln = norms.log_norm(p);  // throws when the entry is missing
    std::vector<double> t = zp.t();
    double lv = detail::log_monomial_value_sq(p.data(), static_cast<int>(p.size()), t);
    return std::isfinite(lv) ? std::exp(lv - ln) : 0.0;
}

// Windowed kernel diagonal S_k(z) = sum_{0 <= mu.p <= k} S_p(z).
inline double szego_window(const WeightVector& mu, double k, const SpherePoint& zp,
                           const NormTable& norms) {
    norms.require_weights(mu);
    if (k < 0.0) throw std::invalid_argument("szego_window: k must be >= 0");
    if (k > norms.k_max() * (1.0 + 1e-12))
        throw std::invalid_argument("szego_window: k exceeds the norm table window");
    std::vector<double> t = zp.t();
    const int d = norms.dims();
    CompensatedSum acc;
    norms.for_each_in_window(0.0, k, [&](std::size_t i) {
        double lv = detail::log_monomial_value_sq(norms.point(i), d, t);
        if (std::isfinite(lv)) acc.add(std::exp(lv - norms.log_norm_at(i)));
    });
    return acc.value();
}

// Weighted kernel diagonal S_{k,tau}(z) = sum_p tau(mu.p / k) S_p(z); the sum
// is finite by the compact support of tau.
inline double szego_weighted(const WeightVector& mu, const CutoffFunction& tau, double k,
                             const SpherePoint& zp, const NormTable& norms) {
    norms.require_weights(mu);
    if (!(k > 0.0)) throw std::invalid_argument("szego_weighted: k must be > 0");
    double lo = std::max(0.0, k * tau.support_lo());
    double hi = k * tau.support_hi();
    if (hi > norms.k_max() * (1.0 + 1e-12))
        throw std::invalid_argument("szego_weighted: tau window exceeds the norm table");
    std::vector<double> t = zp.t();
    const int d = norms.dims();
    CompensatedSum acc;
    norms.for_each_in_window(lo, hi, [&](std::size_t i) {
        double w = tau(norms.spectral(i) / k);
        if (w == 0.0) return;
        double lv = detail::log_monomial_value_sq(norms.point(i), d, t);
        if (std::isfinite(lv)) acc.add(w * std::exp(lv - norms.log_norm_at(i)));
    });
    return acc.value();
}

struct ExtremalCheck {
    double ratio;  // |u(z)|^2 / ||u||^2
    double bound;  // S_k(z)
};

// Extremal characterization: for u = sum c_p z^p over the window [0,k],
// |u(z)|^2 / ||u||^2 <= S_k(z), with equality for the reproducing-kernel
// coefficients c_p = conj(z^p) / ||z^p||^2.  Coefficients are indexed in the
// order of enumerate_weights(mu, 0, k).
inline ExtremalCheck extremal_check(const WeightVector& mu, double k, const SpherePoint& zp,
                                    const std::vector<Complex>& coeffs, const NormTable& norms) {
    norms.require_weights(mu);
    std::vector<std::size_t> window;
    norms.for_each_in_window(0.0, k, [&](std::size_t i) { window.push_back(i); });
    if (coeffs.size() != window.size())
        throw std::invalid_argument("extremal_check: coefficient count must match the window");
    bool any = false;
    for (const Complex& c : coeffs)
        if (c != Complex(0.0, 0.0)) any = true;
    if (!any) throw std::invalid_argument("extremal_check: all-zero coefficients");

    const int d = norms.dims();
    std::vector<double> t = zp.t();
    std::vector<double> phase(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) phase[j] = std::arg(zp.z(j));

    // log ||u||^2 = logsumexp(2 log|c_p| + log ||z^p||^2)
    std::vector<double> norm_terms;
    norm_terms.reserve(window.size());
    // u(z): scaled complex sum with shared exponent
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> logmag(window.size());
    std::vector<double> argsum(window.size());
    for (std::size_t w = 0; w < window.size(); ++w) {
        std::size_t i = window[w];
        const int* p = norms.point(i);
        double lc = std::log(std::abs(coeffs[w]));
        norm_terms.push_back(2.0 * lc + norms.log_norm_at(i));
        double lz = 0.5 * detail::log_monomial_value_sq(p, d, t);  // log |z^p|
        logmag[w] = lc + lz;
        double ph = std::arg(coeffs[w]);
        for (int j = 0; j < d; ++j) ph += p[j] * phase[j];
        argsum[w] = ph;
        if (std::isfinite(logmag[w])) m = std::max(m, logmag[w]);
    }
    double log_norm_sq = log_sum_exp(norm_terms);
    double log_val_sq;
    if (!std::isfinite(m)) {
        log_val_sq = -std::numeric_limits<double>::infinity();
    } else {
        Complex s(0.0, 0.0);
        for (std::size_t w = 0; w < window.size(); ++w) {
            if (!std::isfinite(logmag[w])) continue;
            s += std::polar(std::exp(logmag[w] - m), argsum[w]);
        }
        log_val_sq = 2.0 * (m + std::log(std::abs(s)));
    }
    double ratio = std::isfinite(log_val_sq) ? std::exp(log_val_sq - log_norm_sq) : 0.0;
    return {ratio, szego_window(mu, k, zp, norms)};
}

// Reproducing-kernel coefficients at z0, aligned with enumerate_weights order.
inline std::vector<Complex> reproducing_coefficients(const WeightVector& mu, double k,
                                                     const SpherePoint& z0, const NormTable& norms) {
    norms.require_weights(mu);
    std::vector<Complex> coeffs;
    const int d = norms.dims();
    std::vector<double> t = z0.t();
    norms.for_each_in_window(0.0, k, [&](std::size_t i) {
        const int* p = norms.point(i);
        double lv = 0.5 * detail::log_monomial_value_sq(p, d, t);
        if (!std::isfinite(lv)) {
            coeffs.push_back(Complex(0.0, 0.0));
            return;
        }
        double ph = 0.0;
        for (int j = 0; j < d; ++j) ph += p[j] * std::arg(z0.z(j));
        coeffs.push_back(std::polar(std::exp(lv - norms.log_norm_at(i)), -ph));
    });
    return coeffs;
}

}  // namespace szegolab
