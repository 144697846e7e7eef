#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "szegolab/core.hpp"
#include "szegolab/cutoff.hpp"
#include "szegolab/quadrature.hpp"
#include "szegolab/sphere_geometry.hpp"

namespace szegolab {

// Samples (k, S(k)) of a kernel diagonal along a k-sweep.
struct KernelSweep {
    std::vector<std::pair<double, double>> entries;  // strictly increasing k

    explicit KernelSweep(std::vector<std::pair<double, double>> e) : entries(std::move(e)) {
        if (entries.size() < 2) throw std::invalid_argument("KernelSweep: need >= 2 entries");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!(entries[i].first > 0.0))
                throw std::invalid_argument("KernelSweep: k values must be positive");
            if (entries[i].second < 0.0)
                throw std::invalid_argument("KernelSweep: kernel values must be >= 0");
            if (i > 0 && !(entries[i].first > entries[i - 1].first))
                throw std::invalid_argument("KernelSweep: k values must be strictly increasing");
        }
    }
};

// Leading coefficient of value ~ a0 k^power + a1 k^{power-1} + ... by
// polynomial-in-1/k elimination on f(k) = value / k^power.  Order 1 uses the
// two largest k (the classical two-point formula); higher orders run a
// Neville table on the order+1 largest k evaluated at 1/k = 0.
inline double fit_leading(const KernelSweep& sweep, int power, int order = 1) {
    if (order < 1) throw std::invalid_argument("fit_leading: order must be >= 1");
    const std::size_t m = static_cast<std::size_t>(order) + 1;
    if (sweep.entries.size() < m)
        throw std::invalid_argument("fit_leading: not enough sweep entries for requested order");
    std::vector<double> x(m), f(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto [k, v] = sweep.entries[sweep.entries.size() - m + i];
        x[i] = 1.0 / k;
        f[i] = v / std::pow(k, power);
    }
    // Neville at 0
    for (std::size_t level = 1; level < m; ++level)
        for (std::size_t i = 0; i + level < m; ++i)
            f[i] = (x[i + level] * f[i] - x[i] * f[i + 1]) / (x[i + level] - x[i]);
    return f[0];
}

enum class A0Variant { SingleTau, TauSquared };

inline std::string a0_variant_name(A0Variant v) {
    return v == A0Variant::SingleTau ? "a0_single_tau" : "a0_tau_squared";
}

// Leading coefficient prediction for the weighted kernel:
//   a0(x) = (2 pi)^{-n-1} |det L_x| int (2t)^n g(t) dt,
// with g = |tau|^2 in the stated expansion and g = tau for the variant the
// defining sum suggests.  Both are computed; neither is hard-coded as "the"
// answer.
inline double predicted_a0(const WeightVector& mu, const SpherePoint& zp, const CutoffFunction& tau,
                           A0Variant variant) {
    const int n = zp.n();
    double det = det_levi(mu, zp);
    double integral = integrate_cutoff(
        tau, n, variant == A0Variant::TauSquared ? CutoffIntegrand::TauSquared : CutoffIntegrand::Tau);
    return std::pow(2.0 * kPi, -(n + 1)) * std::abs(det) * integral;
}

// Sharp-window limit: lim k^{-n-1} S_k(x) = (1/2) pi^{-n-1} (n+1)^{-1} |det L_x|.
inline double predicted_limit(const WeightVector& mu, const SpherePoint& zp) {
    const int n = zp.n();
    return 0.5 * std::pow(kPi, -(n + 1)) / static_cast<double>(n + 1) *
           std::abs(det_levi(mu, zp));
}

struct AsymptoticReport {
    double fitted_leading = 0.0;
    int power = 0;                               // n + 1
    std::map<std::string, double> predicted;     // variant -> predicted constant
    std::map<std::string, double> relative_error;
    std::string best_variant;

    double best_error() const {
        auto it = relative_error.find(best_variant);
        return it == relative_error.end() ? 1.0 : it->second;
    }
};

inline double relative_error_of(double fitted, double predicted) {
    if (predicted == 0.0) return fitted == 0.0 ? 0.0 : 1.0;
    return std::abs(fitted - predicted) / std::abs(predicted);
}

// Fits the sweep and fills predictions: the sharp-window limit when no tau is
// given, both a0 variants when one is.  The report flags the better-matching
// variant.
inline AsymptoticReport verify(const KernelSweep& sweep, const WeightVector& mu,
                               const SpherePoint& zp,
                               const std::optional<CutoffFunction>& tau, int fit_order = 1) {
    AsymptoticReport report;
    report.power = zp.n() + 1;
    report.fitted_leading = fit_leading(sweep, report.power, fit_order);
    if (!tau) {
        double pred = predicted_limit(mu, zp);
        report.predicted["limit"] = pred;
        report.relative_error["limit"] = relative_error_of(report.fitted_leading, pred);
        report.best_variant = "limit";
        return report;
    }
    for (A0Variant v : {A0Variant::SingleTau, A0Variant::TauSquared}) {
        double pred = predicted_a0(mu, zp, *tau, v);
        report.predicted[a0_variant_name(v)] = pred;
        report.relative_error[a0_variant_name(v)] =
            relative_error_of(report.fitted_leading, pred);
    }
    report.best_variant =
        report.relative_error[a0_variant_name(A0Variant::SingleTau)] <=
                report.relative_error[a0_variant_name(A0Variant::TauSquared)]
            ? a0_variant_name(A0Variant::SingleTau)
            : a0_variant_name(A0Variant::TauSquared);
    return report;
}

}  // namespace szegolab
