#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "szegolab/core.hpp"
#include "szegolab/hermitian.hpp"
#include "szegolab/lattice.hpp"

// CR geometry of the weighted sphere X = S^{2n+1} in C^{n+1} under the full
// torus T^{n+1} acting coordinatewise.  Conventions, fixed once:
//
//   rho   = |z|^2 - 1,  theta = (i/2)(d rho - dbar rho),
//   T     = the real field with complex representative (i mu_1 z_1, ...),
//   m(z)  = sum mu_j |z_j|^2  (so <theta, T> = -m),
//   omega0 = theta / m        (so <omega0, T> = -1, omega0 | H = 0),
//
// and the Hermitian metric on T^{1,0}X is the restriction of the Euclidean
// Hermitian product (making a fixed unitary (1,0)-frame orthonormal), with T
// unit and orthogonal to the CR distribution.  Under this convention a real
// coordinate vector of a unitary (1,0)-frame has squared length 2, matching
// the flat-model volume normalization dv(z) = 2^n dx_1...dx_{2n}.
namespace szegolab {

using CVec = Eigen::VectorXcd;

// Point on the unit sphere S^{2n+1}, |z| = 1 within 1e-12.
struct SpherePoint {
    CVec z;

    explicit SpherePoint(CVec coords) : z(std::move(coords)) {
        if (z.size() < 2) throw std::invalid_argument("SpherePoint: need n >= 1 (at least 2 coordinates)");
        if (std::abs(z.squaredNorm() - 1.0) > 1e-12)
            throw std::invalid_argument("SpherePoint: |z|^2 must equal 1 within 1e-12");
    }

    static SpherePoint normalized(CVec coords) {
        double nrm = coords.norm();
        if (!(nrm > 0.0)) throw std::invalid_argument("SpherePoint: zero vector");
        return SpherePoint(coords / nrm);
    }

    // z_j = sqrt(t_j) for simplex coordinates t (sum t_j = 1).
    static SpherePoint from_t(const std::vector<double>& t) {
        CVec z(t.size());
        double s = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (t[j] < 0.0) throw std::invalid_argument("SpherePoint: t entries must be >= 0");
            s += t[j];
            z(static_cast<Eigen::Index>(j)) = std::sqrt(t[j]);
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("SpherePoint: t must sum to 1 within 1e-12");
        return SpherePoint(std::move(z));
    }

    int n() const { return static_cast<int>(z.size()) - 1; }

    std::vector<double> t() const {
        std::vector<double> out(z.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) out[j] = std::norm(z(j));
        return out;
    }
};

// Orthonormal frame u^(1), ..., u^(n) of T^{1,0}_z X = { u : <u, z> = 0 }.
struct CRFrame {
    std::vector<CVec> vectors;

    CRFrame(std::vector<CVec> vecs, const SpherePoint& at) : vectors(std::move(vecs)) {
        const int n = at.n();
        if (static_cast<int>(vectors.size()) != n)
            throw std::invalid_argument("CRFrame: need exactly n vectors");
        for (int a = 0; a < n; ++a) {
            if (vectors[a].size() != at.z.size())
                throw std::invalid_argument("CRFrame: vector dimension mismatch");
            if (std::abs(vectors[a].dot(at.z)) > 1e-10)
                throw std::invalid_argument("CRFrame: vector not tangent to the CR structure");
            for (int b = 0; b <= a; ++b) {
                std::complex<double> g = vectors[b].dot(vectors[a]);  // conj(v_b) . v_a
                double want = (a == b) ? 1.0 : 0.0;
                if (std::abs(g - want) > 1e-10)
                    throw std::invalid_argument("CRFrame: vectors not orthonormal");
            }
        }
    }

    int n() const { return static_cast<int>(vectors.size()); }
};

// Deterministic orthonormal completion of the CR distribution at z: pivot on
// the coordinate of largest modulus (lowest index on ties), then modified
// Gram-Schmidt of the remaining standard basis vectors against z.
inline CRFrame cr_frame(const SpherePoint& zp) {
    const Eigen::Index dim = zp.z.size();
    Eigen::Index pivot = 0;
    for (Eigen::Index j = 1; j < dim; ++j)
        if (std::abs(zp.z(j)) > std::abs(zp.z(pivot))) pivot = j;
    std::vector<CVec> frame;
    for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == pivot) continue;
        CVec u = CVec::Zero(dim);
        u(j) = 1.0;
        u -= zp.z * zp.z.dot(u);  // remove component along z
        for (const CVec& v : frame) u -= v * v.dot(u);
        double nrm = u.norm();
        u /= nrm;
        frame.push_back(std::move(u));
    }
    return CRFrame(std::move(frame), zp);
}

// (1,0) representative of the transversal field: T ~ (i mu_1 z_1, ...).
// Requires the full torus d = n+1.
inline CVec reeb_vector(const WeightVector& mu, const SpherePoint& zp) {
    if (static_cast<int>(mu.dim()) != zp.n() + 1)
        throw std::invalid_argument("reeb_vector: need d = n+1 torus weights");
    CVec t(zp.z.size());
    for (Eigen::Index j = 0; j < zp.z.size(); ++j)
        t(j) = std::complex<double>(0.0, 1.0) * mu[static_cast<std::size_t>(j)] * zp.z(j);
    return t;
}

// Normalizing scale m(z) = sum mu_j |z_j|^2 of the contact form omega0 = theta/m.
inline double contact_scale(const WeightVector& mu, const SpherePoint& zp) {
    if (static_cast<int>(mu.dim()) != zp.n() + 1)
        throw std::invalid_argument("contact_scale: need d = n+1 torus weights");
    double m = 0.0;
    for (Eigen::Index j = 0; j < zp.z.size(); ++j)
        m += mu[static_cast<std::size_t>(j)] * std::norm(zp.z(j));
    return m;
}

namespace detail {

// Ambient omega0 paired with the constant real vector field of complex
// representative v, at the (possibly off-sphere) point w:
//   theta_w(v) = -Im <v, w>,   omega0 = theta / m.
inline double omega0_pair(const WeightVector& mu, const CVec& w, const CVec& v) {
    std::complex<double> s = w.dot(v);  // sum conj(w_j) v_j
    double m = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        m += mu[static_cast<std::size_t>(j)] * std::norm(w(j));
    return -s.imag() / m;
}

// d omega0 (X_a, X_b) at z for constant ambient fields, by central
// differences of step h on the pairings:
//   d omega (X, Y) = X(omega(Y)) - Y(omega(X)).
inline double domega_real(const WeightVector& mu, const CVec& z, const CVec& a, const CVec& b,
                          double h) {
    auto d_along = [&](const CVec& dir, const CVec& arg) {
        return (omega0_pair(mu, z + h * dir, arg) - omega0_pair(mu, z - h * dir, arg)) / (2.0 * h);
    };
    return d_along(a, b) - d_along(b, a);
}

}  // namespace detail

// Levi matrix L_ab = L_z(u^(a), conj(u^(b))) = -(1/2i) < d omega0, U_a ^ Vbar_b >,
// computed by numerically differentiating omega0 along ambient constant
// extensions of the frame (central differences, step 1e-5).  For the weighted
// sphere the closed form is (1/(2 m(z))) delta_ab, which serves as a check,
// not as the computation.
inline HermitianForm levi_matrix(const WeightVector& mu, const SpherePoint& zp,
                                 const CRFrame& frame, double step = 1e-5) {
    for (const CVec& u : frame.vectors)
        if (std::abs(u.dot(zp.z)) > 1e-10)
            throw std::invalid_argument("levi_matrix: frame not tangent at z");
    const int n = frame.n();
    const std::complex<double> I(0.0, 1.0);
    Eigen::MatrixXcd L(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const CVec& u = frame.vectors[a];
            const CVec& v = frame.vectors[b];
            CVec iu = I * u, iv = I * v;
            // U_a = (X_u - i X_{iu})/2, Vbar_b = (X_v + i X_{iv})/2
            double d_uv = detail::domega_real(mu, zp.z, u, v, step);
            double d_uiv = detail::domega_real(mu, zp.z, u, iv, step);
            double d_iuv = detail::domega_real(mu, zp.z, iu, v, step);
            double d_iuiv = detail::domega_real(mu, zp.z, iu, iv, step);
            std::complex<double> domega =
                0.25 * (std::complex<double>(d_uv + d_iuiv, d_uiv - d_iuv));
            L(a, b) = (I / 2.0) * domega;  // -(1/2i) = i/2
        }
    }
    return HermitianForm(L);
}

// det of the Levi form with respect to the fixed Hermitian metric: product of
// the generalized eigenvalues of the Levi matrix against the frame Gram
// matrix (identity for orthonormal frames).
inline double det_levi(const WeightVector& mu, const SpherePoint& zp, const CRFrame& frame) {
    HermitianForm L = levi_matrix(mu, zp, frame);
    const int n = frame.n();
    Eigen::MatrixXcd gram(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) gram(a, b) = frame.vectors[a].dot(frame.vectors[b]);
    return (L.matrix().determinant() / gram.determinant()).real();
}

inline double det_levi(const WeightVector& mu, const SpherePoint& zp) {
    return det_levi(mu, zp, cr_frame(zp));
}

// Closed form on the weighted sphere: det L = (2 m(z))^{-n}.
inline double det_levi_closed_form(const WeightVector& mu, const SpherePoint& zp) {
    return std::pow(2.0 * contact_scale(mu, zp), -zp.n());
}

// Density of the invariant volume form dv_X against the round surface
// measure, w(z) = sqrt(det G_ours) / sqrt(det G_round) on the shared real
// basis {X_u, X_iu (u in frame), T}:
//   - our metric doubles the Euclidean square length of horizontal vectors
//     and declares T unit and orthogonal to them;
//   - the round Gram carries the Euclidean lengths and the T-H cross terms.
inline double volume_density(const WeightVector& mu, const SpherePoint& zp, const CRFrame& frame) {
    const int n = zp.n();
    const int dim = 2 * n + 1;
    const std::complex<double> I(0.0, 1.0);
    std::vector<CVec> basis;
    basis.reserve(dim);
    for (const CVec& u : frame.vectors) {
        basis.push_back(u);
        basis.push_back(I * u);
    }
    basis.push_back(reeb_vector(mu, zp));

    // Euclidean real inner product of realified vectors = Re<a, b>.
    Eigen::MatrixXd G_round(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G_round(i, j) = basis[j].dot(basis[i]).real();

    // our metric: g = 2 * Euclid on horizontal, T unit, T orthogonal to H
    Eigen::MatrixXd G_ours = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) G_ours(i, j) = 2.0 * G_round(i, j);
    G_ours(dim - 1, dim - 1) = 1.0;

    return std::sqrt(G_ours.determinant() / G_round.determinant());
}

inline double volume_density(const WeightVector& mu, const SpherePoint& zp) {
    return volume_density(mu, zp, cr_frame(zp));
}

// Closed form on the weighted sphere: w(z) = 2^n / m(z).
inline double volume_density_closed_form(const WeightVector& mu, const SpherePoint& zp) {
    return std::pow(2.0, zp.n()) / contact_scale(mu, zp);
}

}  // namespace szegolab
