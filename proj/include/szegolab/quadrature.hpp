#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "szegolab/core.hpp"
#include "szegolab/cutoff.hpp"
#include "szegolab/lattice.hpp"

namespace szegolab {

// One-dimensional rule on [0,1].
struct Quad1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [0,1].  Newton iteration on P_N with asymptotic initial
// guesses; nodes are computed for one half and mirrored so the rule is
// exactly symmetric under t -> 1-t.
inline Quad1D gauss_legendre(std::size_t npoints) {
    if (npoints == 0) throw std::invalid_argument("gauss_legendre: need npoints >= 1");
    const std::size_t n = npoints;
    Quad1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // root of P_n in (0,1] on the [-1,1] reference interval
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // evaluate P_n(x) and P_n'(x) by the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = 0.5 * (1.0 - x);  // x near 1 => node near 0
        rule.weights[i] = 0.5 * w;
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
    return rule;
}

// Gauss-Jacobi on [0,1] with weight (1-u)^alpha, alpha >= 0 integer or real.
// Golub-Welsch on the Jacobi(alpha, 0) recurrence.
inline Quad1D gauss_jacobi(std::size_t npoints, double alpha) {
    if (npoints == 0) throw std::invalid_argument("gauss_jacobi: need npoints >= 1");
    if (alpha == 0.0) return gauss_legendre(npoints);
    const double beta = 0.0;
    const std::size_t n = npoints;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    auto diag = [&](std::size_t k) -> double {
        double s = 2.0 * k + alpha + beta;
        if (k == 0) return (beta - alpha) / (alpha + beta + 2.0);
        return (beta * beta - alpha * alpha) / (s * (s + 2.0));
    };
    auto offdiag_sq = [&](std::size_t k) -> double {  // b_k for k >= 1
        double s = 2.0 * k + alpha + beta;
        return 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
               (s * s * (s + 1.0) * (s - 1.0));
    };
    for (std::size_t k = 0; k < n; ++k) {
        J(k, k) = diag(k);
        if (k + 1 < n) J(k, k + 1) = J(k + 1, k) = std::sqrt(offdiag_sq(k + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    // total mass of (1-x)^alpha (1+x)^beta on [-1,1]
    const double mu0 = std::exp((alpha + beta + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(alpha + beta + 2.0));
    Quad1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double scale = std::pow(2.0, -(alpha + 1.0));  // [-1,1] -> [0,1], beta = 0
    for (std::size_t i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule.nodes[i] = 0.5 * (x + 1.0);
        rule.weights[i] = mu0 * v0 * v0 * scale;
    }
    return rule;
}

// Quadrature over the standard simplex
//   Delta_n = { t in R_+^{n+1} : t_1 + ... + t_{n+1} = 1 },
// with nodes stored as full (n+1)-tuples and weights normalized so that
// sum(weights) = vol(Delta_n) = 1/n! (Lebesgue measure of the projected
// coordinate simplex).  Conical product construction: iterated map
//   t_1 = x_1, t_2 = x_2 (1-x_1), ..., t_{n+1} = prod (1-x_j),
// with Jacobi weight (1-x_j)^(n-j) absorbed into the axis-j rule, which makes
// the rule exact on polynomials of total degree <= `degree`.
class SimplexRule {
  public:
    static SimplexRule build(int n, int degree) {
        if (n < 1) throw std::invalid_argument("SimplexRule: need n >= 1");
        if (degree < 1) throw std::invalid_argument("SimplexRule: need degree >= 1");
        SimplexRule rule;
        rule.n_ = n;
        rule.degree_ = degree;
        const std::size_t pts = static_cast<std::size_t>(degree / 2) + 1;  // 2*pts-1 >= degree
        std::vector<Quad1D> axes;
        for (int j = 0; j < n; ++j)
            axes.push_back(gauss_jacobi(pts, static_cast<double>(n - 1 - j)));
        // tensor product, axis 0 slowest
        std::vector<std::size_t> idx(n, 0);
        std::vector<double> t(n + 1);
        while (true) {
            double w = 1.0, rem = 1.0;
            for (int j = 0; j < n; ++j) {
                double x = axes[j].nodes[idx[j]];
                w *= axes[j].weights[idx[j]];
                t[j] = x * rem;
                rem *= (1.0 - x);
            }
            t[n] = rem;
            rule.nodes_.insert(rule.nodes_.end(), t.begin(), t.end());
            rule.weights_.push_back(w);
            int j = n - 1;
            for (; j >= 0; --j) {
                if (++idx[j] < axes[j].size()) break;
                idx[j] = 0;
            }
            if (j < 0) break;
        }
        return rule;
    }

    int n() const { return n_; }
    int degree() const { return degree_; }
    std::size_t size() const { return weights_.size(); }
    double weight(std::size_t i) const { return weights_[i]; }
    const double* node(std::size_t i) const { return nodes_.data() + i * (n_ + 1); }

  private:
    int n_ = 0;
    int degree_ = 0;
    std::vector<double> nodes_;    // flattened (n+1)-tuples
    std::vector<double> weights_;
};

// Integral over S^{2n+1} of a torus-invariant integrand f(t), t_j = |z_j|^2,
// against the round surface measure:
//   int_{S^{2n+1}} f dsigma = 2 pi^{n+1} int_{Delta_n} f(t) dt.
inline double integrate_sphere_invariant(const std::function<double(const double*)>& f, int n,
                                         const SimplexRule& rule) {
    if (rule.n() != n) throw std::invalid_argument("integrate_sphere_invariant: rule dimension mismatch");
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        double v = f(rule.node(i));
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "integrate_sphere_invariant: non-finite integrand at node (";
            for (int j = 0; j <= n; ++j) os << (j ? "," : "") << rule.node(i)[j];
            os << ")";
            throw std::domain_error(os.str());
        }
        acc.add(rule.weight(i) * v);
    }
    return 2.0 * std::pow(kPi, n + 1) * acc.value();
}

// log of int_{S^{2n+1}} prod |z_j|^{2 p_j} dsigma = 2 pi^{n+1} p! / (n+|p|)!.
inline double log_monomial_moment(const LatticePoint& p, int n) {
    if (static_cast<int>(p.size()) != n + 1)
        throw std::invalid_argument("monomial_moment: p must have n+1 entries");
    double lg = std::log(2.0) + (n + 1) * std::log(kPi);
    long total = 0;
    for (int pj : p) {
        if (pj < 0) throw std::invalid_argument("monomial_moment: p must be nonnegative");
        lg += std::lgamma(static_cast<double>(pj) + 1.0);
        total += pj;
    }
    lg -= std::lgamma(static_cast<double>(n + total) + 1.0);
    return lg;
}

inline double monomial_moment(const LatticePoint& p, int n) {
    return std::exp(log_monomial_moment(p, n));
}

struct MonteCarloEstimate {
    double estimate;
    double std_error;
};

inline double sphere_area(int n) {  // |S^{2n+1}| = 2 pi^{n+1} / n!
    return 2.0 * std::pow(kPi, n + 1) / std::tgamma(static_cast<double>(n) + 1.0);
}

// Uniform sampling of S^{2n+1} via normalized Gaussian vectors; the integrand
// is a function of t = (|z_1|^2, ..., |z_{n+1}|^2).  Deterministic for a
// fixed seed.
inline MonteCarloEstimate monte_carlo_sphere(const std::function<double(const double*)>& f, int n,
                                             std::int64_t samples, std::uint64_t seed) {
    if (samples < 1000) throw std::invalid_argument("monte_carlo_sphere: need samples >= 1000");
    Rng rng(seed);
    const int dim = n + 1;
    std::vector<double> t(dim);
    CompensatedSum sum, sumsq;
    for (std::int64_t s = 0; s < samples; ++s) {
        double norm2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            double re = rng.normal(), im = rng.normal();
            t[j] = re * re + im * im;
            norm2 += t[j];
        }
        for (int j = 0; j < dim; ++j) t[j] /= norm2;
        double v = f(t.data());
        sum.add(v);
        sumsq.add(v * v);
    }
    const double area = sphere_area(n);
    const double mean = sum.value() / static_cast<double>(samples);
    double var = sumsq.value() / static_cast<double>(samples) - mean * mean;
    if (var < 0.0) var = 0.0;
    return {area * mean, area * std::sqrt(var / static_cast<double>(samples))};
}

enum class CutoffIntegrand { Tau, TauSquared };

// int_a^b (2t)^n g(t) dt with g = tau or tau^2, by composite Gauss-Legendre
// (order >= 40 per panel).
inline double integrate_cutoff(const CutoffFunction& tau, int n,
                               CutoffIntegrand kind = CutoffIntegrand::TauSquared,
                               std::size_t order = 48, std::size_t panels = 16) {
    if (order < 40) order = 40;
    const double a = tau.support_lo(), b = tau.support_hi();
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate_cutoff: unbounded or empty support");
    Quad1D gl = gauss_legendre(order);
    CompensatedSum acc;
    for (std::size_t p = 0; p < panels; ++p) {
        double lo = a + (b - a) * static_cast<double>(p) / static_cast<double>(panels);
        double hi = a + (b - a) * static_cast<double>(p + 1) / static_cast<double>(panels);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            double t = lo + (hi - lo) * gl.nodes[i];
            double g = tau(t);
            if (kind == CutoffIntegrand::TauSquared) g *= g;
            acc.add((hi - lo) * gl.weights[i] * std::pow(2.0 * t, n) * g);
        }
    }
    return acc.value();
}

}  // namespace szegolab
