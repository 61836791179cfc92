#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "edgelab/chain.hpp"
#include "edgelab/edgeworth.hpp"
#include "edgelab/gallery.hpp"
#include "edgelab/quadrature.hpp"
#include "edgelab/transfer.hpp"

using namespace edgelab;
using cd = std::complex<double>;

namespace {

std::pair<ChainSpec, AdditiveFunctional> coin_chain(int N) {
    ChainSpec c;
    c.kernels.assign(N, Eigen::MatrixXd::Constant(2, 2, 0.5));
    c.mu1 = Eigen::VectorXd::Constant(2, 0.5);
    c.eps0 = 0.5;
    AdditiveFunctional f;
    f.lattice_den = 2;
    Eigen::MatrixXd tab(2, 2);
    tab << -0.5, 0.5, -0.5, 0.5;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(2, 2);
    nm << -1, 1, -1, 1;
    f.tables.assign(N, tab);
    f.lattice_num.assign(N, nm);
    return {c, f};
}

}  // namespace

TEST_CASE("cumulants: mean, variance, Gaussian and coin inputs") {
    Eigen::VectorXd alpha(5);
    alpha << 1, 0.3, 1.09, 0.9, 3.5;  // some law with mean 0.3, var 1
    CumulantTable cum = cumulants_from_moments(alpha);
    CHECK(cum.gammas(1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(cum.gammas(2) == doctest::Approx(1.0).epsilon(1e-13));

    Eigen::VectorXd gauss(5);
    gauss << 1, 0, 1, 0, 3;
    CumulantTable gc = cumulants_from_moments(gauss);
    CHECK(std::abs(gc.gammas(3)) <= 1e-13);
    CHECK(std::abs(gc.gammas(4)) <= 1e-13);

    // centered +-1/2 coin: Gamma_4 = -1/8, oracle by finite differences of
    // the log mgf log cosh(t/2)
    Eigen::VectorXd coin(5);
    coin << 1, 0, 0.25, 0, 0.0625;
    CumulantTable cc = cumulants_from_moments(coin);
    CHECK(cc.gammas(4) == doctest::Approx(-0.125).epsilon(1e-12));
    const double h = 0.02;
    auto lg = [&](double t) { return std::log(std::cosh(t / 2)); };
    const double fd4 = (lg(2 * h) - 4 * lg(h) + 6 * lg(0) - 4 * lg(-h) + lg(-2 * h)) /
                       (h * h * h * h);
    CHECK(std::abs(cc.gammas(4) - fd4) <= 1e-3);
    CHECK_THROWS(cumulants_from_moments((Eigen::VectorXd(3) << 1, 0.5, 0.25).finished()));
}

TEST_CASE("cumulant homogeneity Gamma_k(cS) = c^k Gamma_k(S)") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 19, 12);
    Eigen::VectorXd alpha = exact_moments(c, f, 6);
    CumulantTable base = cumulants_from_moments(alpha);
    for (double s : {2.0, 1.0 / 3.0}) {
        Eigen::VectorXd scaled(7);
        for (int j = 0; j <= 6; ++j) scaled(j) = std::pow(s, j) * alpha(j);
        CumulantTable cs = cumulants_from_moments(scaled);
        for (int k = 2; k <= 6; ++k)
            CHECK(cs.gammas(k) == doctest::Approx(std::pow(s, k) * base.gammas(k))
                                      .epsilon(1e-10));
    }
}

TEST_CASE("A polynomials: order 1 and 2 closed forms") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(7);
    a(3) = 0.4;
    a(4) = -0.2;
    auto A = aj_polynomials(a, 2);
    REQUIRE(A.size() == 2);
    // A_1 = a_3 t^3 (times i^3)
    CHECK(A[0].degree() == 3);
    CHECK(A[0].c(3) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(A[0].c(0) == 0.0);
    // A_2 = a_4 t^4 + (a_3^2/2) t^6
    CHECK(A[1].c(4) == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(A[1].c(6) == doctest::Approx(0.08).epsilon(1e-14));

    auto Z = aj_polynomials(Eigen::VectorXd::Zero(8), 3);
    for (const auto& P : Z) CHECK(P.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hermite polynomials by recurrence") {
    Poly he4 = hermite_poly(4);
    CHECK(he4.c(4) == 1.0);
    CHECK(he4.c(2) == -6.0);
    CHECK(he4.c(0) == 3.0);
    Poly he6 = hermite_poly(6);
    CHECK(he6.c(6) == 1.0);
    CHECK(he6.c(4) == -15.0);
    CHECK(he6.c(2) == 45.0);
    CHECK(he6.c(0) == -15.0);
}

TEST_CASE("hermite_translate: P_1 and P_2") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(7);
    a(3) = 0.4;
    a(4) = -0.2;
    auto A = aj_polynomials(a, 2);
    Poly P1 = hermite_translate(A[0]);
    CHECK(P1.c(3) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(P1.c(1) == doctest::Approx(-1.2).epsilon(1e-14));  // a_3 (z^3 - 3z)
    Poly P2 = hermite_translate(A[1]);
    // a_4 He_4 + (a_3^2/2) He_6
    for (int k = 0; k <= 6; ++k) {
        double want = -0.2 * (k <= 4 ? hermite_poly(4).c(k) : 0.0) +
                      0.08 * hermite_poly(6).c(k);
        CHECK(P2.c(k) == doctest::Approx(want).epsilon(1e-13));
    }
    Poly Pz = hermite_translate(Poly{Eigen::VectorXd::Zero(5)});
    CHECK(Pz.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expansion CDF: symmetric inputs collapse to the normal CDF") {
    auto [c, f] = coin_chain(64);
    EdgeworthExpansion e = build_expansion(c, f, 1);
    CHECK(std::abs(e.P[0].c.cwiseAbs().maxCoeff()) <= 1e-13);  // a_3 = 0
    CHECK(e(0.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(e(10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e(-10.0) == doctest::Approx(0.0).epsilon(1e-12));
    for (double z : {-1.3, 0.2, 2.4})
        CHECK(e(z) == doctest::Approx(normal_cdf(z)).epsilon(1e-13));
}

TEST_CASE("degree bound and A_j(0) = 0") {
    auto [c, f] = make_elliptic_random_chain(4, 1.0, 23, 24);
    EdgeworthExpansion e = build_expansion(c, f, 3);
    for (int j = 1; j <= 3; ++j) {
        CHECK(e.P[j - 1].degree() <= 3 * j);
        CHECK(e.A[j - 1].c(0) == 0.0);
    }
    CHECK(e.P[0].degree() == 3);
    CHECK(e.P[1].degree() == 6);
}

TEST_CASE("P_1 closed form on gallery chains") {
    BetaParams bp;
    auto [cb, fb] = make_beta_lattice_chain(bp, 128);
    auto [ce, fe] = make_elliptic_random_chain(4, 1.0, 42, 64);
    auto check_chain = [](const ChainSpec& c, const AdditiveFunctional& f) {
        EdgeworthExpansion e = build_expansion(c, f, 1);
        Eigen::VectorXd mom = exact_moments(c, f, 3);
        const double a3 = mom(3) / (6.0 * mom(2));
        CHECK(e.P[0].c(3) == doctest::Approx(a3).epsilon(1e-10));
        CHECK(e.P[0].c(1) == doctest::Approx(-3.0 * a3).epsilon(1e-10));
        CHECK(std::abs(e.P[0].c(0)) <= 1e-12);
        CHECK(std::abs(e.P[0].c(2)) <= 1e-12);
    };
    check_chain(cb, fb);
    check_chain(ce, fe);
}

TEST_CASE("Fourier transform of phi P_j reproduces the A_j side") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 31, 20);
    EdgeworthExpansion e = build_expansion(c, f, 3);
    for (int j = 1; j <= 3; ++j) {
        const Poly& P = e.P[j - 1];
        const Poly& A = e.A[j - 1];
        for (double t = -5; t <= 5.01; t += 1.0) {
            auto re = [&](double z) { return std::cos(t * z) * normal_pdf(z) * P.eval(z); };
            auto im = [&](double z) { return std::sin(t * z) * normal_pdf(z) * P.eval(z); };
            cd ft(adaptive_simpson(re, -12, 12, {}), adaptive_simpson(im, -12, 12, {}));
            cd rhs = 0, itp = 1;
            for (int k = 0; k < A.c.size(); ++k, itp *= cd(0, t)) rhs += A.c(k) * itp;
            rhs *= std::exp(-t * t / 2);
            CHECK(std::abs(ft - rhs) <= 1e-8);
        }
    }
}

TEST_CASE("esseen_bound trivial cases") {
    auto phi = [](double t) { return cd(std::exp(-t * t / 2), 0.0); };
    const double sup = 1.0 / std::sqrt(2.0 * M_PI);
    const double b2 = esseen_bound(phi, phi, 2.0, sup);
    CHECK(b2 == doctest::Approx(24.0 * sup / (M_PI * 2.0)).epsilon(1e-10));
    const double b4 = esseen_bound(phi, phi, 4.0, sup);
    CHECK(b4 <= b2);
}

TEST_CASE("kolmogorov distance: point mass, exact coin enumeration") {
    StepCdf point;
    point.x = Eigen::VectorXd::Zero(1);
    point.F = Eigen::VectorXd::Ones(1);
    CHECK(kolmogorov_distance(point, normal_cdf) == doctest::Approx(0.5).epsilon(1e-12));

    // near-normal step CDF sampled from Phi itself
    const int m = 20000;
    StepCdf fine;
    fine.x = Eigen::VectorXd::LinSpaced(m, -8.0, 8.0);
    fine.F.resize(m);
    for (int i = 0; i < m; ++i) fine.F(i) = normal_cdf(fine.x(i));
    CHECK(kolmogorov_distance(fine, normal_cdf) <= 1e-3);

    // fair-coin S_4 against Phi, oracle by direct enumeration over atoms
    auto [c, f] = coin_chain(4);
    LatticePMF pmf = lattice_distribution(c, f);
    Eigen::VectorXd mom = exact_moments(c, f, 2);
    StepCdf F = step_cdf_from_pmf(pmf, 0.0, std::sqrt(mom(2)));
    const double dist = kolmogorov_distance(F, normal_cdf);
    double oracle = 0, acc = 0;
    for (int i = 0; i < F.x.size(); ++i) {
        oracle = std::max(oracle, std::abs(acc - normal_cdf(F.x(i))));  // left limit
        acc = F.F(i);
        oracle = std::max(oracle, std::abs(acc - normal_cdf(F.x(i))));
    }
    CHECK(dist == doctest::Approx(oracle).epsilon(1e-12));

    StepCdf bad;
    bad.x = Eigen::VectorXd::LinSpaced(3, -1, 1);
    bad.F.resize(3);
    bad.F << 0.5, 0.4, 1.0;
    CHECK_THROWS(kolmogorov_distance(bad, normal_cdf));
}

TEST_CASE("log_derivatives matches cumulants of a discrete law") {
    // at t = 0 the log-derivatives are i^k Gamma_k
    Eigen::VectorXd atoms(3), probs(3);
    atoms << -1.0, 0.25, 1.5;
    probs << 0.3, 0.45, 0.25;
    Eigen::VectorXd alpha(5);
    for (int j = 0; j <= 4; ++j) {
        alpha(j) = 0;
        for (int i = 0; i < 3; ++i) alpha(j) += probs(i) * std::pow(atoms(i), j);
    }
    CumulantTable cum = cumulants_from_moments(alpha);
    std::vector<cd> psi(5);
    psi[0] = 1;
    for (int j = 1; j <= 4; ++j) psi[j] = std::pow(cd(0, 1), j) * alpha(j);
    auto lam = log_derivatives(psi);
    for (int k = 1; k <= 4; ++k)
        CHECK(std::abs(lam[k] - std::pow(cd(0, 1), k) * cum.gammas(k)) <= 1e-12);
}

TEST_CASE("CDF-level polynomials carry the Stieltjes identity") {
    // -it * FT(phi P_cdf_j) must reproduce e^{-t^2/2} A_j(it), the correction
    // the characteristic function actually sees
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 77, 32);
    EdgeworthExpansion e = build_expansion(c, f, 3);
    for (int j = 1; j <= 3; ++j) {
        const Poly& Q = e.P_cdf[j - 1];
        const Poly& A = e.A[j - 1];
        for (double t : {-4.0, -1.5, 0.5, 2.0, 5.0}) {
            auto re = [&, t](double z) {
                return std::cos(t * z) * normal_pdf(z) * Q.eval(z);
            };
            auto im = [&, t](double z) {
                return std::sin(t * z) * normal_pdf(z) * Q.eval(z);
            };
            cd ft(adaptive_simpson(re, -12, 12, {}), adaptive_simpson(im, -12, 12, {}));
            ft *= cd(0.0, -t);
            cd rhs = 0, itp = 1;
            for (int k = 0; k < A.c.size(); ++k, itp *= cd(0, t)) rhs += A.c(k) * itp;
            rhs *= std::exp(-t * t / 2);
            CHECK(std::abs(ft - rhs) <= 1e-8);
        }
    }
}

TEST_CASE("order-1 expansion beats the normal CDF on a skewed binomial") {
    // iid skewed coin, exact lattice law; independent oracle values computed
    // from the binomial pmf: dist_Phi ~ 0.042, dist_E1 ~ 0.033
    const int N = 400;
    const double p = 0.1;
    ChainSpec c;
    Eigen::MatrixXd R(2, 2);
    R << 1 - p, p, 1 - p, p;
    c.kernels.assign(N, R);
    c.mu1 = Eigen::VectorXd::Constant(2, 0.5);
    c.eps0 = 0.1;
    AdditiveFunctional f;
    Eigen::MatrixXd tab(2, 2);
    tab << -p, 1 - p, -p, 1 - p;  // mean zero, values on (1/10)Z
    f.tables.assign(N, tab);
    f.lattice_den = 10;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(2, 2);
    nm << -1, 9, -1, 9;
    f.lattice_num.assign(N, nm);

    Eigen::VectorXd mom = exact_moments(c, f, 2);
    const double sigma = std::sqrt(mom(2));
    CHECK(sigma == doctest::Approx(std::sqrt(N * p * (1 - p))).epsilon(1e-12));
    LatticePMF pmf = lattice_distribution(c, f);
    StepCdf F = step_cdf_from_pmf(pmf, 0.0, sigma);
    EdgeworthExpansion e1 = build_expansion(c, f, 1);
    const double d_phi = kolmogorov_distance(F, normal_cdf);
    const double d_e1 = kolmogorov_distance(F, [&](double z) { return e1(z); }, 2.0);
    CHECK(d_phi == doctest::Approx(0.0420).epsilon(0.02));
    CHECK(d_e1 == doctest::Approx(0.0333).epsilon(0.02));
    CHECK(d_e1 < d_phi);
}
