#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "szegolab/model.hpp"

using namespace szegolab;

namespace {

HermitianForm scalar(double v) { return HermitianForm(Eigen::MatrixXcd::Constant(1, 1, v)); }

ModelData model1(double lambda, double w) { return ModelData({lambda}, scalar(w)); }

Eigen::VectorXcd cvec(std::initializer_list<Complex> vals) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (Complex c : vals) v(i++) = c;
    return v;
}

ModelData random_model(int n, Rng& rng, bool diagonal_weight, bool force_clipped = false) {
    std::vector<double> lam;
    for (int j = 0; j < n; ++j) lam.push_back(0.4 + 1.6 * rng.uniform());
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
    if (diagonal_weight) {
        for (int j = 0; j < n; ++j) w(j, j) = force_clipped ? -0.3 * rng.uniform() - 0.1
                                                            : 1.5 * rng.uniform() + 0.05;
    } else {
        for (int i = 0; i < n; ++i) {
            w(i, i) = force_clipped ? -0.3 * rng.uniform() - 0.1 : 1.5 * rng.uniform() + 0.05;
            for (int j = i + 1; j < n; ++j) {
                Complex off = 0.3 * rng.complex_normal();
                w(i, j) = off;
                w(j, i) = std::conj(off);
            }
        }
    }
    return ModelData(std::move(lam), HermitianForm(std::move(w)));
}

}  // namespace

TEST_CASE("ModelData and HermitianForm validation") {
    CHECK_THROWS_AS(ModelData({}, HermitianForm::zero(1)), std::invalid_argument);
    CHECK_THROWS_AS(ModelData({-1.0}, scalar(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(ModelData({1.0}, HermitianForm::zero(2)), std::invalid_argument);
    Eigen::MatrixXcd non_herm(2, 2);
    non_herm << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;  // skew off-diagonal
    CHECK_THROWS_AS(HermitianForm(non_herm), std::invalid_argument);
}

TEST_CASE("phi_eta examples") {
    CHECK(phi_eta(model1(1.0, 0.0), 1.0, cvec({1.0})) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(phi_eta(model1(2.0, 0.5), 0.7, cvec({0.0})) == 0.0);
    CHECK(phi_eta(model1(1.0, 1.0), 2.0, cvec({1.0})) == Catch::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("m_phi examples") {
    CHECK(m_phi(model1(1.0, 0.0), 1.0)(0, 0).real() == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(m_phi(model1(1.0, 0.7), 0.0)(0, 0).real() == Catch::Approx(1.4).epsilon(1e-15));
    ModelData two({1.0, 2.0}, HermitianForm::zero(2));
    HermitianForm m = m_phi(two, 0.5);
    CHECK(m(0, 0).real() == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(m(1, 1).real() == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(m(0, 1)) < 1e-15);
}

TEST_CASE("positivity window membership") {
    CHECK(in_window_R0(model1(1.0, 0.0), 1.0));
    CHECK_FALSE(in_window_R0(model1(1.0, 0.0), -1.0));
    ModelData half = model1(1.0, -0.5);  // eigenvalue 2(eta - 1/2)
    CHECK_FALSE(in_window_R0(half, 0.4));
    CHECK(in_window_R0(half, 0.6));
    auto win = window_interval_in_unit(half);
    REQUIRE(win.has_value());
    CHECK(win->first == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("bergman_diagonal closed form") {
    // off the window the kernel vanishes identically
    CHECK(bergman_diagonal(model1(1.0, 0.0), -0.3, cvec({0.5})) == 0.0);
    // n=1, effective weight c = 0.7: B(0,0) = c/pi
    CHECK(bergman_diagonal(model1(1.0, 0.7), 0.0, cvec({0.0})) ==
          Catch::Approx(0.7 / kPi).epsilon(1e-14));
    // c = 1, |z| = 1: e^2 / pi
    CHECK(bergman_diagonal(model1(1.0, 1.0), 0.0, cvec({1.0})) ==
          Catch::Approx(std::exp(2.0) / kPi).epsilon(1e-14));
}

TEST_CASE("bergman_series oracle") {
    CHECK(bergman_series(model1(1.0, 0.7), 0.0, cvec({0.0}), 0) ==
          Catch::Approx(0.7 / kPi).epsilon(1e-14));
    CHECK(bergman_series(model1(1.0, 1.0), 0.0, cvec({1.0}), 60) ==
          Catch::Approx(std::exp(2.0) / kPi).epsilon(1e-12));
    // cutoff too small for the tolerance is reported
    CHECK_THROWS_AS(bergman_series(model1(1.0, 1.0), 0.0, cvec({1.0}), 3), std::runtime_error);
    CHECK_THROWS_AS(bergman_series(model1(1.0, -1.0), 0.0, cvec({0.0}), 10),
                    std::invalid_argument);
}

TEST_CASE("series and closed form agree on random models") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + (trial % 2);
        bool diag = trial < 10;
        ModelData m = random_model(n, rng, diag);
        for (int zs = 0; zs < 5; ++zs) {
            Eigen::VectorXcd z(n);
            for (int j = 0; j < n; ++j) z(j) = 0.8 * rng.complex_normal();
            double eta = 0.1 + 0.9 * rng.uniform();
            if (!in_window_R0(m, eta)) continue;
            double closed = bergman_diagonal(m, eta, z);
            double series = bergman_series(m, eta, z, 200);
            CHECK(std::abs(closed - series) <= (diag ? 1e-10 : 1e-8) * std::abs(closed));
        }
    }
}

TEST_CASE("window_bound examples") {
    // det M = 2(eta+1): integral over [0,1] is 3
    CHECK(window_bound(model1(1.0, 1.0)) ==
          Catch::Approx(3.0 / (4.0 * kPi * kPi)).epsilon(1e-12));
    // clipped window (1/2, 1]: integral of 2(eta - 1/2) is 1/4
    CHECK(window_bound(model1(1.0, -0.5)) ==
          Catch::Approx(1.0 / (16.0 * kPi * kPi)).epsilon(1e-9));
    // zero weight matrix: int (2 eta)^n prod lambda = 2^n prod lambda / (n+1)
    ModelData zero2({1.5, 0.5}, HermitianForm::zero(2));
    CHECK(window_bound(zero2) ==
          Catch::Approx(std::pow(2.0 * kPi, -3) * 4.0 * 0.75 / 3.0).epsilon(1e-12));
}

TEST_CASE("window_bound is continuous across window clipping") {
    double prev = -1.0;
    for (double w = -0.7; w <= -0.3; w += 0.01) {
        double b = window_bound(model1(1.0, w));
        if (prev >= 0.0) CHECK(std::abs(b - prev) < 0.02);
        prev = b;
    }
}

TEST_CASE("curvature window integrals") {
    // block pencil diag(R, 2tL)
    CHECK(curvature_window_integral(scalar(1.0), scalar(1.0)) ==
          Catch::Approx(1.0).epsilon(1e-12));
    Eigen::MatrixXcd l2 = Eigen::MatrixXcd::Zero(2, 2);
    l2(0, 0) = 1.0;
    l2(1, 1) = 3.0;
    CHECK(curvature_window_integral(scalar(2.0), HermitianForm(l2)) ==
          Catch::Approx(8.0).epsilon(1e-12));
    CHECK_THROWS_AS(curvature_window_integral(scalar(1.0), scalar(-1.0)),
                    std::invalid_argument);

    // same-space pencil R + 2tL with clipped window (1/2, 1]
    CHECK(pencil_window_integral(scalar(-1.0), scalar(1.0)) ==
          Catch::Approx(0.25).epsilon(1e-9));

    // closed form det R det L 2^b/(b+1) for random positive-definite pairs
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        int a = 1 + (trial % 2), b = 1 + ((trial / 2) % 2);
        Eigen::MatrixXcd g(a, a);
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < a; ++j) g(i, j) = rng.complex_normal();
        Eigen::MatrixXcd R = g * g.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(a, a);
        Eigen::MatrixXcd h(b, b);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j) h(i, j) = rng.complex_normal();
        Eigen::MatrixXcd L = h * h.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(b, b);
        double got = curvature_window_integral(HermitianForm(R), HermitianForm(L));
        double want = R.determinant().real() * L.determinant().real() * std::pow(2.0, b) /
                      static_cast<double>(b + 1);
        CHECK(std::abs(got - want) <= 1e-12 * std::abs(want) + 1e-14);
    }

    // clipped same-space pencils against the adaptive oracle
    for (int trial = 0; trial < 10; ++trial) {
        int n = 1 + (trial % 2);
        Eigen::MatrixXcd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
        Eigen::MatrixXcd A = 0.5 * (g + g.adjoint().eval());
        A -= 0.8 * Eigen::MatrixXcd::Identity(n, n);  // push part of [0,1] out of the window
        Eigen::MatrixXcd h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h(i, j) = rng.complex_normal();
        Eigen::MatrixXcd B = h * h.adjoint() + 0.2 * Eigen::MatrixXcd::Identity(n, n);
        double got = pencil_window_integral(HermitianForm(A), HermitianForm(B));
        double want = oracles::adaptive_quadrature(
            [&](double t) {
                Eigen::MatrixXcd P = A + 2.0 * t * B;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P, Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() <= 0.0) return 0.0;
                return std::abs(P.determinant().real());
            },
            0.0, 1.0, 1e-13);
        CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("sampled window CR functions") {
    ModelData m = model1(1.0, 0.4);

    // unit-mass sigma with h == 1 reproduces u(0,0) = 1 down to narrow widths
    {
        CPoly h0 = CPoly::constant(1, Complex(1.0, 0.0));
        double c = 0.5;
        for (double w : {0.2, 0.05, 0.0125}) {
            WindowFunction wf(c - w, c + w, 1.0, h0, CPoly::zero(1));
            WindowFunction unit_mass(c - w, c + w, 1.0 / wf.sigma_mass(), h0, CPoly::zero(1));
            WindowSample ws = sample_window_value(m, unit_mass);
            CHECK(std::abs(ws.value_at_origin - Complex(1.0, 0.0)) < 1e-10);
        }
        // with an eta-linear factor the narrow limit picks out h_{eta0}(0)
        CPoly h1 = CPoly::constant(1, Complex(2.0, 0.0));
        double prev_err = 1e9;
        for (double w : {0.2, 0.05, 0.0125}) {
            WindowFunction wf(c - w, c + w, 1.0, h0, h1);
            WindowFunction unit_mass(c - w, c + w, 1.0 / wf.sigma_mass(), h0, h1);
            WindowSample ws = sample_window_value(m, unit_mass);
            double err = std::abs(ws.value_at_origin - Complex(1.0 + 2.0 * c, 0.0));
            CHECK(err < prev_err + 1e-12);
            prev_err = err;
        }
        CHECK(prev_err < 1e-6);
    }

    // odd holomorphic factor vanishes at the origin
    {
        CPoly h = CPoly::zero(1);
        h.add_term({1}, Complex(1.0, 0.0));
        WindowFunction wf(0.2, 0.8, 1.0, h, CPoly::zero(1));
        WindowSample ws = sample_window_value(m, wf);
        CHECK(std::abs(ws.value_at_origin) < 1e-15);
        CHECK(ws.norm_sq > 0.0);
    }

    // sigma escaping the positivity window is rejected
    {
        ModelData clipped = model1(1.0, -0.5);
        CPoly h0 = CPoly::constant(1, Complex(1.0, 0.0));
        WindowFunction bad(0.2, 0.8, 1.0, h0, CPoly::zero(1));
        CHECK_THROWS_AS(sample_window_value(clipped, bad), std::invalid_argument);
    }

    // sampled ratios satisfy the window bound
    Rng rng(7);
    for (ModelData mm : {model1(1.0, 0.4), model1(0.7, -0.3)}) {
        double bound = window_bound(mm);
        for (int s = 0; s < 60; ++s) {
            WindowFunction wf = sample_random_window_function(mm, rng);
            WindowSample ws = sample_window_value(mm, wf);
            CHECK(ws.ratio() <= bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("Parseval: direct (z, theta) integration converges to the Fourier-side norm") {
    ModelData m = model1(1.0, 0.5);
    CPoly h0 = CPoly::constant(1, Complex(1.0, 0.0));
    CPoly h1 = CPoly::zero(1);
    h1.add_term({1}, Complex(0.4, 0.2));
    WindowFunction wf(0.25, 0.75, 1.0, h0, h1);
    WindowSample ws = sample_window_value(m, wf);

    // ||u||^2 = int |u|^2 e^{-2 Phi_0} 2 dx dy dtheta over C x R, by polar
    // z-quadrature (periodic trapezoid in the angle, exact for the low
    // harmonic content of |u|^2) and a theta box growing with each level
    auto norm_on_box = [&](double rmax, double theta_max, int nr, int nphi, int ntheta) {
        Quad1D gr = gauss_legendre(nr), gthe = gauss_legendre(ntheta);
        double total = 0.0;
        for (int ir = 0; ir < nr; ++ir) {
            double r = rmax * gr.nodes[ir];
            double wr = rmax * gr.weights[ir];
            for (int it = 0; it < nphi; ++it) {
                double phi = 2.0 * kPi * it / nphi;
                double wphi = 2.0 * kPi / nphi;
                Eigen::VectorXcd z = cvec({std::polar(r, phi)});
                double weight = std::exp(-2.0 * phi_eta(m, 0.0, z));
                for (int ith = 0; ith < ntheta; ++ith) {
                    double theta = theta_max * (2.0 * gthe.nodes[ith] - 1.0);
                    double wtheta = 2.0 * theta_max * gthe.weights[ith];
                    Complex u = window_function_value(m, wf, z, theta);
                    total += wr * wphi * wtheta * 2.0 * r * std::norm(u) * weight;
                }
            }
        }
        return total;
    };
    double e1 = std::abs(norm_on_box(3.0, 30.0, 24, 8, 96) - ws.norm_sq);
    double e2 = std::abs(norm_on_box(4.0, 60.0, 32, 8, 192) - ws.norm_sq);
    double e3 = std::abs(norm_on_box(5.0, 120.0, 40, 8, 384) - ws.norm_sq);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
    CHECK(e3 < 5e-3 * ws.norm_sq);
}
