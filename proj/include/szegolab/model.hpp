#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "szegolab/core.hpp"
#include "szegolab/hermitian.hpp"
#include "szegolab/quadrature.hpp"

// The Heisenberg-group model space H_{n+1} = C^n x R with CR fields
// U_j = d/dz_j + i lambda_j zbar_j d/dtheta.  Fourier transforming in theta
// (u^(z,eta) = int u e^{-i theta eta} dtheta) turns window CR functions into
// eta-families of entire functions weighted by
//   Phi_eta(z) = eta sum lambda_j |z_j|^2 + sum W_{jt} zbar_j z_t,
// and all volume integrals on C^n carry dv(z) = 2^n dx_1...dx_{2n}.
namespace szegolab {

struct ModelData {
    std::vector<double> lambda;  // Levi eigenvalues, positive
    HermitianForm weight;        // the Hermitian weight matrix (W_{jt})

    ModelData(std::vector<double> lam, HermitianForm w)
        : lambda(std::move(lam)), weight(std::move(w)) {
        if (lambda.empty()) throw std::invalid_argument("ModelData: need n >= 1");
        for (double l : lambda)
            if (!(l > 0.0)) throw std::invalid_argument("ModelData: lambda entries must be positive");
        if (weight.dim() != static_cast<int>(lambda.size()))
            throw std::invalid_argument("ModelData: weight matrix size must match lambda");
    }

    int n() const { return static_cast<int>(lambda.size()); }

    Eigen::MatrixXcd lambda_diag() const {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n(), n());
        for (int j = 0; j < n(); ++j) d(j, j) = lambda[static_cast<std::size_t>(j)];
        return d;
    }
};

// Phi_eta(z), real-valued.
inline double phi_eta(const ModelData& model, double eta, const Eigen::VectorXcd& z) {
    if (z.size() != model.n()) throw std::invalid_argument("phi_eta: dimension mismatch");
    double s = 0.0;
    for (int j = 0; j < model.n(); ++j)
        s += eta * model.lambda[static_cast<std::size_t>(j)] * std::norm(z(j));
    s += (z.adjoint() * model.weight.matrix() * z)(0).real();
    return s;
}

// Hessian form M_{Phi_eta} = 2 (eta diag(lambda) + W), from
// <M U | V> = 2 d dbar Phi_eta (U, Vbar).
inline HermitianForm m_phi(const ModelData& model, double eta) {
    return HermitianForm(2.0 * (eta * model.lambda_diag() + model.weight.matrix()));
}

// eta in the positivity window R^_0 iff M_{Phi_eta} is positive definite
// (all eigenvalues above 1e-12).
inline bool in_window_R0(const ModelData& model, double eta) {
    return m_phi(model, eta).is_positive_definite(1e-12);
}

// Model Bergman kernel diagonal: 0 off the window, else
//   B_{Phi_eta}(z,z) = e^{2 Phi_eta(z)} (2 pi)^{-n} |det M_{Phi_eta}|.
inline double bergman_diagonal(const ModelData& model, double eta, const Eigen::VectorXcd& z) {
    HermitianForm M = m_phi(model, eta);
    if (!M.is_positive_definite(1e-12)) return 0.0;
    return std::exp(2.0 * phi_eta(model, eta, z)) * std::pow(2.0 * kPi, -model.n()) *
           std::abs(M.det_real());
}

// Independent series oracle for the Bergman diagonal: unitarily diagonalize
// A = M/2 to weights c_j > 0; in rotated coordinates w the monomials are
// orthogonal with ||w^m||^2 = prod 2 pi m_j! / (2 c_j)^{m_j+1} under the
// volume convention dv(z) = 2^n dx, so
//   B(z,z) = prod_j [ (2c_j / 2pi) sum_m (2 c_j |w_j|^2)^m / m! ].
// Throws when the truncated exponential tails exceed 1e-13 relative.
inline double bergman_series(const ModelData& model, double eta, const Eigen::VectorXcd& z,
                             int degree_cutoff) {
    if (degree_cutoff < 0) throw std::invalid_argument("bergman_series: cutoff must be >= 0");
    HermitianForm M = m_phi(model, eta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * M.matrix());
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("bergman_series: eta outside the positivity window");
    Eigen::VectorXcd w = es.eigenvectors().adjoint() * z;
    double prod = 1.0;
    for (int j = 0; j < model.n(); ++j) {
        const double c = es.eigenvalues()(j);
        const double x = 2.0 * c * std::norm(w(j));
        double sum = 0.0, term = 1.0;
        for (int m = 0; m <= degree_cutoff; ++m) {
            sum += term;
            term *= x / static_cast<double>(m + 1);
        }
        // `term` is now the first omitted term; bound the geometric tail
        double tail = (x < degree_cutoff + 2)
                          ? term / (1.0 - x / static_cast<double>(degree_cutoff + 2))
                          : std::numeric_limits<double>::infinity();
        if (!(tail <= 1e-13 * sum)) {
            std::ostringstream os;
            os << "bergman_series: cutoff " << degree_cutoff
               << " too small, tail estimate " << tail << " vs partial sum " << sum;
            throw std::runtime_error(os.str());
        }
        prod *= (2.0 * c) / (2.0 * kPi) * sum;
    }
    return prod;
}

// int over { t in [lo,hi] : A + 2 t B positive definite } of |det(A + 2 t B)|.
// Window endpoints are located by bisection on the smallest eigenvalue to
// 1e-12; each positivity subinterval is integrated by Gauss-Legendre of order
// 64 (the determinant is a polynomial of degree <= dim in t, so this is exact).
inline double positivity_window_integral(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                         double lo = 0.0, double hi = 1.0) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("positivity_window_integral: matrix size mismatch");
    auto min_eig = [&](double t) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A + 2.0 * t * B,
                                                           Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    };
    const int grid = 512;
    std::vector<double> ts(grid + 1), ev(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        ts[i] = lo + (hi - lo) * static_cast<double>(i) / grid;
        ev[i] = min_eig(ts[i]);
    }
    auto bisect = [&](double a, double b) {
        // sign change of min_eig in [a,b]
        double fa = min_eig(a);
        for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
            double m = 0.5 * (a + b), fm = min_eig(m);
            if ((fa > 0.0) == (fm > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    std::vector<std::pair<double, double>> intervals;
    bool inside = ev[0] > 0.0;
    double start = ts[0];
    for (int i = 0; i < grid; ++i) {
        bool next_inside = ev[i + 1] > 0.0;
        if (next_inside == inside) continue;
        double crossing = bisect(ts[i], ts[i + 1]);
        if (inside)
            intervals.emplace_back(start, crossing);
        else
            start = crossing;
        inside = next_inside;
    }
    if (inside) intervals.emplace_back(start, ts[grid]);

    static const Quad1D gl = gauss_legendre(64);
    double total = 0.0;
    for (auto [a, b] : intervals) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            double t = a + (b - a) * gl.nodes[i];
            double det = (A + 2.0 * t * B).determinant().real();
            acc.add((b - a) * gl.weights[i] * std::abs(det));
        }
        total += acc.value();
    }
    return total;
}

// Same-space curvature pencil R + 2tL (both forms on one fiber), integrated
// over its positivity window inside [0,1].
inline double pencil_window_integral(const HermitianForm& R, const HermitianForm& L) {
    if (R.dim() != L.dim())
        throw std::invalid_argument("pencil_window_integral: forms must share a space");
    return positivity_window_integral(R.matrix(), L.matrix());
}

// Product-space variant: R on an a-dimensional block, L positive definite on
// a disjoint b-dimensional block, so the pencil is diag(R, 2tL) and for
// R > 0 the integral equals det R * det L * 2^b / (b+1).
inline double curvature_window_integral(const HermitianForm& R, const HermitianForm& L) {
    if (!L.is_positive_definite(1e-12))
        throw std::invalid_argument("curvature_window_integral: L must be positive definite");
    const int a = R.dim(), b = L.dim();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(a + b, a + b);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(a + b, a + b);
    A.topLeftCorner(a, a) = R.matrix();
    B.bottomRightCorner(b, b) = L.matrix();
    return positivity_window_integral(A, B);
}

// Upper bound of the model window kernel at the origin:
//   S_{H_{n+1},[0,1]}(0) <= (2 pi)^{-n-1} int_{[0,1] cap R^_0} |det M_{Phi_eta}| deta,
// with M(eta) = 2W + 2 eta diag(lambda).
inline double window_bound(const ModelData& model) {
    Eigen::MatrixXcd A = 2.0 * model.weight.matrix();
    Eigen::MatrixXcd B = model.lambda_diag();
    double integral = positivity_window_integral(A, B);
    return std::pow(2.0 * kPi, -(model.n() + 1)) * integral;
}

// ---------------------------------------------------------------------------
// Sampled window CR functions for the empirical bound check.

// Multivariate polynomial with complex coefficients, multi-indexed terms.
struct CPoly {
    int nvars = 0;
    std::vector<std::pair<std::vector<int>, Complex>> terms;

    static CPoly zero(int nvars) { return CPoly{nvars, {}}; }

    static CPoly constant(int nvars, Complex c) {
        CPoly p{nvars, {}};
        p.terms.emplace_back(std::vector<int>(nvars, 0), c);
        return p;
    }

    void add_term(std::vector<int> m, Complex c) {
        if (static_cast<int>(m.size()) != nvars)
            throw std::invalid_argument("CPoly: multi-index size mismatch");
        for (auto& [mi, ci] : terms) {
            if (mi == m) {
                ci += c;
                return;
            }
        }
        terms.emplace_back(std::move(m), c);
    }

    Complex eval(const Eigen::VectorXcd& z) const {
        Complex s(0.0, 0.0);
        for (const auto& [m, c] : terms) {
            Complex t = c;
            for (int j = 0; j < nvars; ++j)
                for (int r = 0; r < m[j]; ++r) t *= z(j);
            s += t;
        }
        return s;
    }

    Complex constant_term() const {
        for (const auto& [m, c] : terms) {
            bool all0 = true;
            for (int mj : m) all0 &= (mj == 0);
            if (all0) return c;
        }
        return Complex(0.0, 0.0);
    }

    CPoly operator*(const CPoly& other) const {
        CPoly out = zero(nvars);
        for (const auto& [ma, ca] : terms)
            for (const auto& [mb, cb] : other.terms) {
                std::vector<int> m(nvars);
                for (int j = 0; j < nvars; ++j) m[j] = ma[j] + mb[j];
                out.add_term(std::move(m), ca * cb);
            }
        return out;
    }

    // p(U w) as a polynomial in w.
    CPoly compose_linear(const Eigen::MatrixXcd& U) const {
        CPoly out = zero(nvars);
        for (const auto& [m, c] : terms) {
            CPoly term = constant(nvars, c);
            for (int j = 0; j < nvars; ++j) {
                CPoly lin = zero(nvars);
                for (int t = 0; t < nvars; ++t) {
                    std::vector<int> e(nvars, 0);
                    e[t] = 1;
                    lin.add_term(std::move(e), U(j, t));
                }
                for (int r = 0; r < m[j]; ++r) term = term * lin;
            }
            for (auto& [mt, ct] : term.terms) out.add_term(mt, ct);
        }
        return out;
    }
};

// ||h||^2 against e^{-2 sum c_j |w_j|^2} dv(w): monomials are orthogonal with
// ||w^m||^2 = prod 2 pi m_j! / (2 c_j)^{m_j + 1}.
inline double gaussian_poly_norm_sq(const CPoly& h, const Eigen::VectorXd& c) {
    double total = 0.0;
    for (const auto& [m, coef] : h.terms) {
        double nrm = 1.0;
        for (int j = 0; j < h.nvars; ++j) {
            double mj = static_cast<double>(m[j]);
            nrm *= 2.0 * kPi * std::tgamma(mj + 1.0) / std::pow(2.0 * c(j), mj + 1.0);
        }
        total += std::norm(coef) * nrm;
    }
    return total;
}

// ||h||^2_{Phi_eta} for a general Hermitian weight: rotate to the eigenbasis
// of A = eta diag(lambda) + W and use the diagonal Gaussian norms.
inline double weighted_poly_norm_sq(const ModelData& model, double eta, const CPoly& h) {
    Eigen::MatrixXcd A = eta * model.lambda_diag() + model.weight.matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("weighted_poly_norm_sq: weight not positive definite");
    CPoly rotated = h.compose_linear(es.eigenvectors());
    return gaussian_poly_norm_sq(rotated, es.eigenvalues());
}

// A window CR function u(z,theta) = int sigma(eta) e^{i eta theta} h_eta(z)
// e^{-eta sum lambda_j |z_j|^2} deta: each Fourier slice is annihilated by
// the conjugate CR fields, and supp(sigma) constrains u^ to [a,b].
// h_eta = h0 + eta h1 keeps the holomorphic factor polynomial in eta.
struct WindowFunction {
    double a, b;       // sigma support, must sit inside [0,1]
    double scale;      // bump amplitude
    CPoly h0, h1;

    WindowFunction(double a_, double b_, double scale_, CPoly h0_, CPoly h1_)
        : a(a_), b(b_), scale(scale_), h0(std::move(h0_)), h1(std::move(h1_)) {
        if (!(0.0 <= a && a < b && b <= 1.0))
            throw std::invalid_argument("WindowFunction: sigma support must sit inside [0,1]");
    }

    // width-scaled bump: max value scale * e^{-1} at the midpoint for every
    // support width
    double sigma(double eta) const {
        if (eta <= a || eta >= b) return 0.0;
        double x = (2.0 * eta - a - b) / (b - a);
        return scale * std::exp(-1.0 / (1.0 - x * x));
    }

    CPoly h_at(double eta) const {
        CPoly h = h0;
        for (const auto& [m, c] : h1.terms) h.add_term(m, eta * c);
        return h;
    }

    double sigma_mass(std::size_t order = 64) const {
        Quad1D gl = gauss_legendre(order);
        double s = 0.0;
        for (std::size_t i = 0; i < gl.size(); ++i)
            s += (b - a) * gl.weights[i] * sigma(a + (b - a) * gl.nodes[i]);
        return s;
    }
};

struct WindowSample {
    Complex value_at_origin;  // u(0,0)
    double norm_sq;           // ||u||^2_{Phi_0}
    double ratio() const { return std::norm(value_at_origin) / norm_sq; }
};

// u(0,0) = int sigma(eta) h_eta(0) deta and
// ||u||^2 = 2 pi int |sigma(eta)|^2 ||h_eta||^2_{Phi_eta} deta
// (Fourier-side Parseval), by composite Gauss-Legendre in eta.  Rejected when
// supp(sigma) leaves the positivity window (the norm diverges there).
inline WindowSample sample_window_value(const ModelData& model, const WindowFunction& wf,
                                        std::size_t order = 64, std::size_t panels = 8) {
    Quad1D gl = gauss_legendre(order);
    Complex value(0.0, 0.0);
    CompensatedSum norm_acc;
    for (std::size_t p = 0; p < panels; ++p) {
        double lo = wf.a + (wf.b - wf.a) * static_cast<double>(p) / panels;
        double hi = wf.a + (wf.b - wf.a) * static_cast<double>(p + 1) / panels;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            double eta = lo + (hi - lo) * gl.nodes[i];
            double s = wf.sigma(eta);
            if (s == 0.0) continue;
            if (!in_window_R0(model, eta))
                throw std::invalid_argument(
                    "sample_window_value: sigma support escapes the positivity window");
            double w = (hi - lo) * gl.weights[i];
            CPoly h = wf.h_at(eta);
            value += w * s * h.constant_term();
            norm_acc.add(w * s * s * weighted_poly_norm_sq(model, eta, h));
        }
    }
    return {value, 2.0 * kPi * norm_acc.value()};
}

// Positivity window of M(eta) inside [0,1].  With diag(lambda) > 0 the
// smallest eigenvalue is strictly increasing in eta, so the window is a
// single interval (eta0, 1] (possibly all of [0,1], possibly empty).
inline std::optional<std::pair<double, double>> window_interval_in_unit(const ModelData& model) {
    if (!in_window_R0(model, 1.0)) return std::nullopt;
    if (in_window_R0(model, 0.0)) return std::make_pair(0.0, 1.0);
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (in_window_R0(model, mid) ? hi : lo) = mid;
    }
    return std::make_pair(hi, 1.0);
}

// Random window CR function for bound sampling: a bump profile on a random
// subinterval strictly inside [0,1] cap R^_0, and a random polynomial factor
// h_eta = h0 + eta h1 of degree <= max_degree with complex normal
// coefficients.
inline WindowFunction sample_random_window_function(const ModelData& model, Rng& rng,
                                                    int max_degree = 2) {
    auto window = window_interval_in_unit(model);
    if (!window)
        throw std::invalid_argument("sample_random_window_function: empty positivity window");
    double span = window->second - window->first;
    double margin = 0.02 * span;
    double lo = window->first + margin, hi = window->second - margin;
    double a = lo + (hi - lo) * rng.uniform();
    double b = lo + (hi - lo) * rng.uniform();
    if (a > b) std::swap(a, b);
    if (b - a < 0.05 * span) {
        double c = 0.5 * (a + b), h = 0.05 * span;
        a = std::max(lo, c - h);
        b = std::min(hi, c + h);
    }
    const int n = model.n();
    CPoly h0 = CPoly::zero(n), h1 = CPoly::zero(n);
    std::vector<int> m(n, 0);
    std::function<void(int, int)> fill = [&](int j, int left) {
        if (j == n) {
            h0.add_term(m, rng.complex_normal());
            h1.add_term(m, 0.5 * rng.complex_normal());
            return;
        }
        for (int v = 0; v <= left; ++v) {
            m[j] = v;
            fill(j + 1, left - v);
        }
        m[j] = 0;
    };
    fill(0, max_degree);
    return WindowFunction(a, b, 1.0, std::move(h0), std::move(h1));
}

// Direct-side evaluation of the same u at (z, theta), for Parseval
// cross-checks.
inline Complex window_function_value(const ModelData& model, const WindowFunction& wf,
                                     const Eigen::VectorXcd& z, double theta,
                                     std::size_t order = 64) {
    Quad1D gl = gauss_legendre(order);
    double lam = 0.0;
    for (int j = 0; j < model.n(); ++j) lam += model.lambda[static_cast<std::size_t>(j)] * std::norm(z(j));
    Complex value(0.0, 0.0);
    for (std::size_t i = 0; i < gl.size(); ++i) {
        double eta = wf.a + (wf.b - wf.a) * gl.nodes[i];
        double s = wf.sigma(eta);
        if (s == 0.0) continue;
        value += (wf.b - wf.a) * gl.weights[i] * s *
                 std::exp(Complex(0.0, eta * theta)) * wf.h_at(eta).eval(z) * std::exp(-eta * lam);
    }
    return value;
}

}  // namespace szegolab
