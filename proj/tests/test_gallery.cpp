#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "edgelab/chain.hpp"
#include "edgelab/gallery.hpp"
#include "edgelab/transfer.hpp"

using namespace edgelab;

TEST_CASE("beta lattice parameters at the pinned values") {
    BetaParams p;  // beta = 0.3, c = 0.35
    p.validate();
    CHECK(p.q(1) == 1);
    CHECK(p.p(1) == 1);
    CHECK(p.a(1) == 1);
    CHECK(p.q(8) == 2);
    CHECK(p.p(8) == 1);
    CHECK(p.a(8) == Rational(1, 2));
    CHECK(p.q(1024) == 8);
    CHECK(p.a(1024) == Rational(1, 8));

    BetaParams bad;
    bad.c = 0.25;  // below beta
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    BetaParams big;
    big.c = 0.5;  // above s_beta = 0.4
    CHECK_THROWS_AS(big.validate(), std::invalid_argument);
}

TEST_CASE("beta lattice: divisibility and range invariants") {
    BetaParams p;
    const int N = 4096;
    for (int n = 1; n <= N; n *= 2) CHECK(p.q(N) % p.q(n) == 0);
    for (int n = 1; n <= 2000; ++n) {
        Rational a = p.a(n);
        CHECK(a >= 0);
        CHECK(a <= Rational(1));
        // a_n <= n^{-beta} whenever positive
        if (a > 0)
            CHECK(a.convert_to<double>() <= std::pow(double(n), -0.3) + 1e-12);
    }
}

TEST_CASE("beta lattice chain: q_N S_N is an integer") {
    BetaParams p;
    auto [c, f] = make_beta_lattice_chain(p, 128);
    c.check_structure();
    f.check_against(c);
    CHECK(*f.lattice_den == p.q(128));
    CHECK(f.has_label("reducible-by-construction"));
    CHECK(f.has_label("lattice"));
    for (int t = 0; t < 128; ++t)
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
                CHECK(f.tables[t](x, y) ==
                      double(f.lattice_num[t](x, y)) / double(*f.lattice_den));
    CHECK(validate_ellipticity(c).pass);
}

TEST_CASE("cantor_eval pinned digit strings") {
    CantorParams p;  // p = 3, k = 1, base 5
    CHECK(cantor_eval(p, {0, 0, 0}) == 0);
    CHECK(cantor_eval(p, {2}) == Rational(1, 3));  // x = 2/5 -> 1/3
    CHECK(cantor_eval(p, {1}) == Rational(1, 3));  // plateau: stop rule
    // all digits base-1: f(1 - 5^-L) = 1 - 3^-L, increasing to f(1) = 1
    Rational prev = 0;
    for (int L = 1; L <= 6; ++L) {
        std::vector<int> digits(L, 4);
        Rational v = cantor_eval(p, digits);
        CHECK(v == 1 - Rational(1, std::int64_t(std::pow(3.0, L))));
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS(cantor_eval(p, {5}));
}

TEST_CASE("cantor_eval is monotone on exhaustive depth-5 grids") {
    for (auto [pp, kk] : {std::pair{3, 1}, {3, 2}, {5, 1}}) {
        CantorParams p{pp, kk};
        const int B = p.base();
        std::int64_t total = 1;
        for (int i = 0; i < 5; ++i) total *= B;
        Rational prev = -1;
        for (std::int64_t v = 0; v < total; ++v) {
            std::vector<int> digits(5);
            std::int64_t w = v;
            for (int i = 4; i >= 0; --i) {
                digits[i] = int(w % B);
                w /= B;
            }
            Rational cur = cantor_eval(p, digits);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("plateau_measure equals the closed form exactly") {
    CantorParams p31{3, 1};
    CHECK(plateau_measure(p31, 0) == 1);
    CHECK(plateau_measure(p31, 1) == Rational(3, 5));
    CantorParams p51{5, 1};
    CHECK(plateau_measure(p51, 3) == Rational(125, 729));
    for (auto [pp, kk] : {std::pair{3, 1}, {3, 2}, {5, 1}}) {
        CantorParams p{pp, kk};
        Rational ratio(p.p, p.base());
        Rational want = 1;
        for (int n = 0; n <= 6; ++n) {
            CHECK(plateau_measure(p, n) == want);
            want *= ratio;
        }
    }
}

TEST_CASE("cantor iid chain: odd symmetry, atoms, Holder quotient") {
    CantorParams p;
    auto [c, f] = make_cantor_iid_chain(p, 2 * 125, 8);
    c.check_structure();
    f.check_against(c);
    CHECK(validate_ellipticity(c).pass);
    CHECK_THROWS(make_cantor_iid_chain(p, 100, 8));

    const int M = 250, half = 125;
    for (int j = 0; j < half; ++j)
        CHECK(f.lattice_num[0](0, half + j) == -f.lattice_num[0](0, half - 1 - j));

    // two mirrored cells cancel: S_2 has an atom at 0
    auto [c2, f2] = make_cantor_iid_chain(p, 250, 2);
    LatticePMF pmf = lattice_distribution(c2, f2);
    bool zero_atom = false;
    for (int i = 0; i < pmf.size(); ++i)
        if (pmf.atom_value(i) == 0.0 && pmf.p(i) > 1.0 / (M * M)) zero_atom = true;
    CHECK(zero_atom);

    // measured Holder quotient at depth 4 (alpha = ln 3 / ln 5)
    auto [c4, f4] = make_cantor_iid_chain(p, 2 * 625, 1);
    const int M4 = 1250;
    const double alpha = p.alpha();
    double worst = 0;
    Eigen::VectorXd F(M4);
    for (int y = 0; y < M4; ++y) F(y) = f4.tables[0](0, y);
    for (int i = 0; i < M4; ++i)
        for (int j = i + 1; j < M4; ++j) {
            const double dx = double(j - i) / 625.0;  // cells of width 2/M4
            worst = std::max(worst, std::abs(F(i) - F(j)) / std::pow(dx, alpha));
        }
    CHECK(worst <= 2.1);
}

TEST_CASE("circle chain: densities, Holder norm, determinism") {
    const double alpha = std::log(3.0) / std::log(5.0);
    auto [c, f] = make_circle_holder_chain(125, alpha, 42, 16);
    c.check_structure();
    f.check_against(c);
    CHECK(validate_ellipticity(c).pass);
    const int M = 125;
    for (const auto& R : c.kernels) {
        CHECK(M * R.minCoeff() >= 0.5);
        CHECK(M * R.maxCoeff() <= 2.0);
    }
    // sup norm is exactly 1 and the grid Holder norm is uniformly bounded
    for (int t = 0; t < 16; ++t) {
        CHECK(f.tables[t].cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
        double norm = 0;
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j) {
                const int d = std::min(j - i, M - (j - i));
                norm = std::max(norm, std::abs(f.tables[t](0, i) - f.tables[t](0, j)) /
                                          std::pow(double(d) / M, alpha));
            }
        CHECK(norm <= 2.5);
    }
    auto [c2, f2] = make_circle_holder_chain(125, alpha, 42, 16);
    for (int t = 0; t < 16; ++t) {
        CHECK(c.kernels[t] == c2.kernels[t]);
        CHECK(f.tables[t] == f2.tables[t]);
    }
    CHECK(f.has_label("irreducible"));
}

TEST_CASE("elliptic random chain: uniform limit, audits, decay identity") {
    auto [cu, fu] = make_elliptic_random_chain(4, 1.0, 5, 8, std::nullopt, false, 0.0);
    EllipticityReport unif = validate_ellipticity(cu);
    CHECK(unif.eps_upper == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(unif.eps_two_step == doctest::Approx(1.0).epsilon(1e-13));

    auto [c, f] = make_elliptic_random_chain(4, 1.0, 42, 32);
    c.check_structure();
    CHECK(validate_ellipticity(c).pass);  // declared eps0 = 0.1

    auto [cd, fd] = make_elliptic_random_chain(4, 1.0, 9, 64, 0.3);
    for (int t = 0; t < 64; ++t) {
        const double norm = fd.tables[t].cwiseAbs().maxCoeff();
        CHECK(norm * std::pow(double(t + 1), 0.3) == doctest::Approx(1.0).epsilon(1e-12));
    }

    auto [cl, fl] = make_elliptic_random_chain(4, 1.0, 9, 16, std::nullopt, true);
    CHECK(*fl.lattice_den == 64);
    for (int t = 0; t < 16; ++t)
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                CHECK(fl.tables[t](x, y) == double(fl.lattice_num[t](x, y)) / 64.0);
}

TEST_CASE("all gallery chains pass their declared ellipticity audit") {
    BetaParams bp;
    auto [c1, f1] = make_beta_lattice_chain(bp, 64);
    CantorParams cp;
    auto [c2, f2] = make_cantor_iid_chain(cp, 50, 16);
    auto [c3, f3] = make_circle_holder_chain(64, 0.68, 42, 16);
    auto [c4, f4] = make_elliptic_random_chain(4, 1.0, 42, 32);
    CHECK(validate_ellipticity(c1).pass);
    CHECK(validate_ellipticity(c2).pass);
    CHECK(validate_ellipticity(c3).pass);
    CHECK(validate_ellipticity(c4).pass);
}
