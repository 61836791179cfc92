#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "edgelab/chain.hpp"
#include "edgelab/gallery.hpp"
#include "edgelab/quadrature.hpp"
#include "edgelab/transfer.hpp"

using namespace edgelab;
using cd = std::complex<double>;

namespace {

// brute-force characteristic function by path enumeration (small chains only)
cd enumerate_char(const ChainSpec& c, const AdditiveFunctional& f, double xi,
                  bool center) {
    const int N = c.n_steps();
    double mean = 0;
    if (center) {
        Eigen::VectorXd mom = exact_moments(c, f, 1, false);
        mean = mom(1);
    }
    cd out = 0;
    std::vector<int> path(N + 1, 0);
    std::function<void(int, double, double)> rec = [&](int t, double prob, double s) {
        if (t == N) {
            out += prob * std::polar(1.0, xi * (s - mean));
            return;
        }
        for (int y = 0; y < c.size(t + 1); ++y) {
            const double p = c.kernels[t](path[t], y);
            if (p == 0) continue;
            path[t + 1] = y;
            rec(t + 1, prob * p, s + f.tables[t](path[t], y));
        }
    };
    for (int x = 0; x < c.size(0); ++x) {
        path[0] = x;
        rec(0, c.mu1(x), 0.0);
    }
    return out;
}

double enumerate_moment(const ChainSpec& c, const AdditiveFunctional& f, int j,
                        double shift) {
    const int N = c.n_steps();
    double out = 0;
    std::vector<int> path(N + 1, 0);
    std::function<void(int, double, double)> rec = [&](int t, double prob, double s) {
        if (t == N) {
            out += prob * std::pow(s - shift, j);
            return;
        }
        for (int y = 0; y < c.size(t + 1); ++y) {
            const double p = c.kernels[t](path[t], y);
            if (p == 0) continue;
            path[t + 1] = y;
            rec(t + 1, prob * p, s + f.tables[t](path[t], y));
        }
    };
    for (int x = 0; x < c.size(0); ++x) {
        path[0] = x;
        rec(0, c.mu1(x), 0.0);
    }
    return out;
}

std::pair<ChainSpec, AdditiveFunctional> coin_chain(int N, double value) {
    // iid fair +-value steps as a lattice chain
    ChainSpec c;
    c.kernels.assign(N, Eigen::MatrixXd::Constant(2, 2, 0.5));
    c.mu1 = Eigen::VectorXd::Constant(2, 0.5);
    c.eps0 = 0.5;
    AdditiveFunctional f;
    f.lattice_den = 2;
    Eigen::MatrixXd tab(2, 2);
    tab << -value, value, -value, value;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nm(2, 2);
    nm << -1, 1, -1, 1;
    f.tables.assign(N, tab);
    f.lattice_num.assign(N, nm);
    f.labels = {"lattice"};
    return {c, f};
}

}  // namespace

TEST_CASE("char_fn at xi = 0 and for the zero functional") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 4, 6);
    CharFnTable tab = char_fn(c, f, {0.0, 1.3, -1.3, 2.0});
    CHECK(std::abs(tab.values[0] - 1.0) <= 1e-14);
    CHECK(std::abs(tab.values[1] - std::conj(tab.values[2])) <= 1e-13);
    for (double la : tab.log_abs) CHECK(la <= 1e-12);

    AdditiveFunctional f0;
    for (int t = 0; t < 6; ++t) f0.tables.push_back(Eigen::MatrixXd::Zero(3, 3));
    CharFnTable z = char_fn(c, f0, {0.0, 0.7, 5.0});
    for (auto v : z.values) CHECK(std::abs(v - 1.0) <= 1e-14);
}

TEST_CASE("char_fn matches brute-force enumeration at N = 2") {
    auto [c, f] = make_elliptic_random_chain(2, 1.0, 9, 2);
    for (double xi : {0.3, 1.0, 2.7}) {
        CharFnTable tab = char_fn(c, f, {xi});
        cd oracle = enumerate_char(c, f, xi, true);
        CHECK(std::abs(tab.values[0] - oracle) <= 1e-14);
    }
}

TEST_CASE("exact_moments: trivial rows and enumeration oracle") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 12, 4);
    Eigen::VectorXd mom = exact_moments(c, f, 6);
    CHECK(mom(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(mom(1)) <= 1e-13);  // centered

    // constant functional: E = cN raw, variance 0
    AdditiveFunctional fc;
    for (int t = 0; t < 4; ++t) fc.tables.push_back(Eigen::MatrixXd::Constant(3, 3, 0.7));
    Eigen::VectorXd raw = exact_moments(c, fc, 2, false);
    CHECK(raw(1) == doctest::Approx(2.8).epsilon(1e-14));
    Eigen::VectorXd cen = exact_moments(c, fc, 2, true);
    CHECK(std::abs(cen(2)) <= 1e-13);

    // N = 3 gallery chain against path enumeration, k <= 6
    auto [c3, f3] = make_elliptic_random_chain(3, 1.0, 42, 3);
    Eigen::VectorXd m3 = exact_moments(c3, f3, 6, true);
    const double mean = enumerate_moment(c3, f3, 1, 0.0);
    for (int j = 1; j <= 6; ++j) {
        const double oracle = enumerate_moment(c3, f3, j, mean);
        CHECK(std::abs(m3(j) - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
    }
}

TEST_CASE("moments agree with central differences of char_fn at 0") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 7, 16);
    Eigen::VectorXd mom = exact_moments(c, f, 4);
    const double sigma = std::sqrt(mom(2));
    const double h = 1e-3 / sigma;
    std::vector<double> grid;
    for (int i = -4; i <= 4; ++i) grid.push_back(i * h);
    CharFnTable tab = char_fn(c, f, grid);
    auto phi = [&](int i) { return tab.values[i + 4]; };
    // central stencils: phi^{(j)}(0) = i^j E[S^j]
    cd d1 = (phi(1) - phi(-1)) / (2 * h);
    cd d2 = (phi(1) - 2.0 * phi(0) + phi(-1)) / (h * h);
    cd d3 = (phi(2) - 2.0 * phi(1) + 2.0 * phi(-1) - phi(-2)) / (2 * h * h * h);
    cd d4 = (phi(2) - 4.0 * phi(1) + 6.0 * phi(0) - 4.0 * phi(-1) + phi(-2)) /
            (h * h * h * h);
    CHECK(std::abs(d1.imag() - mom(1)) <= 1e-4 * std::max(1.0, std::abs(mom(1))));
    CHECK(std::abs(-d2.real() - mom(2)) <= 1e-4 * std::abs(mom(2)));
    CHECK(std::abs(-d3.imag() - mom(3)) <= 1e-4 * std::max(1.0, std::abs(mom(3))));
    CHECK(std::abs(d4.real() - mom(4)) <= 1e-4 * std::abs(mom(4)));
}

TEST_CASE("lattice_distribution: point mass, two coins, rational EgThm1") {
    auto [c, f] = coin_chain(2, 0.5);
    AdditiveFunctional f0 = f;
    for (auto& t : f0.tables) t.setZero();
    for (auto& t : f0.lattice_num) t.setZero();
    LatticePMF z = lattice_distribution(c, f0);
    CHECK(z.size() == 1);
    CHECK(z.atom_value(0) == 0.0);
    CHECK(z.p(0) == 1.0);

    // atoms on (1/2)Z from -1 to 1; the odd slots carry no mass
    LatticePMF two = lattice_distribution(c, f);
    REQUIRE(two.size() == 5);
    CHECK(two.atom_value(0) == -1.0);
    CHECK(two.p(0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(two.p(1) == 0.0);
    CHECK(two.p(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(two.min_support_gap() == 2);

    BetaParams bp;
    auto [cb, fb] = make_beta_lattice_chain(bp, 16);
    LatticePMF pmf = lattice_distribution(cb, fb, true);
    Rational total = 0;
    for (const auto& r : pmf.p_exact) total += r;
    CHECK(total == 1);  // exact rational normalization
    CHECK(pmf.q == bp.q(16));
    CHECK(pmf.min_support_gap() >= 1);
}

TEST_CASE("char_fn equals the Fourier transform of the lattice pmf") {
    BetaParams bp;
    auto [c, f] = make_beta_lattice_chain(bp, 64);
    LatticePMF pmf = lattice_distribution(c, f);
    Eigen::VectorXd raw = exact_moments(c, f, 1, false);
    std::vector<double> grid;
    for (int i = 0; i < 24; ++i) grid.push_back(-6.0 + 12.0 * i / 23);
    CharFnTable tab = char_fn(c, f, grid);
    for (size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(tab.values[i] - pmf_char_fn(pmf, raw(1), grid[i])) <= 1e-10);
}

TEST_CASE("cdf_estimate: degenerate refusal, determinism, sanity vs normal") {
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 5, 64);
    AdditiveFunctional f0;
    for (int t = 0; t < 64; ++t) f0.tables.push_back(Eigen::MatrixXd::Zero(3, 3));
    CHECK_THROWS(cdf_estimate(c, f0, 1000, 1));

    EmpiricalCdf a = cdf_estimate(c, f, 20000, 8);
    EmpiricalCdf b = cdf_estimate(c, f, 20000, 8);
    CHECK((a.sorted - b.sorted).cwiseAbs().maxCoeff() == 0.0);

    auto [cl, fl] = make_elliptic_random_chain(3, 1.0, 5, 512);
    EmpiricalCdf e = cdf_estimate(cl, fl, 100000, 2);
    double worst = 0;
    for (double t = -4; t <= 4; t += 0.01)
        worst = std::max(worst, std::abs(e(t) - 0.5 * std::erfc(-t / std::sqrt(2.0))));
    CHECK(worst < 0.05);
}

TEST_CASE("tail_integral: range checks and quadrature oracle") {
    auto [c, f] = make_elliptic_random_chain(2, 1.0, 3, 8);
    CHECK_THROWS(tail_integral(c, f, 0.0, 1.0, 2));
    CHECK_THROWS(tail_integral(c, f, 5.0, 1e-6, 2));

    const double delta = 0.2, B = 0.8;
    const int r = 2;
    const double val = tail_integral(c, f, delta, B, r);
    // oracle: direct Simpson on |Phi(x)/x| over both sides
    Eigen::VectorXd mom = exact_moments(c, f, 2);
    const double hi = B * std::pow(std::sqrt(mom(2)), r - 1);
    auto absphi = [&](double x) {
        CharFnTable t = char_fn(c, f, {x});
        return std::abs(t.values[0]) / std::abs(x);
    };
    const double oracle = adaptive_simpson(absphi, delta, hi, {}) +
                          adaptive_simpson(absphi, -hi, -delta, {});
    CHECK(val == doctest::Approx(oracle).epsilon(1e-9));
    // even integrand: the two sides agree
    CHECK(adaptive_simpson(absphi, delta, hi, {}) ==
          doctest::Approx(adaptive_simpson(absphi, -hi, -delta, {})).epsilon(1e-9));
}

TEST_CASE("window moment bounds stay stable across window lengths") {
    // |E (S_w - E S_w)^p| <= R_p + C_p Var^{p/2 floor}: the fitted C_p must not
    // drift by more than a factor 4 across window lengths 25..200
    auto [c, f] = make_elliptic_random_chain(3, 1.0, 42, 256);
    for (int p : {3, 4}) {
        double cmin = 1e300, cmax = 0;
        for (int len : {25, 50, 100, 200}) {
            double worst = 0;
            for (int start = 0; start + len <= 256; start += 56) {
                auto mu = marginal_laws(c);
                ChainSpec sub;
                sub.mu1 = mu[start];
                sub.eps0 = c.eps0;
                AdditiveFunctional fs;
                for (int t = start; t < start + len; ++t) {
                    sub.kernels.push_back(c.kernels[t]);
                    fs.tables.push_back(f.tables[t]);
                }
                Eigen::VectorXd mom = exact_moments(sub, fs, p);
                worst = std::max(worst, std::abs(mom(p)) /
                                            (1.0 + std::pow(mom(2), p / 2)));
            }
            cmin = std::min(cmin, worst);
            cmax = std::max(cmax, worst);
        }
        CHECK(cmax / cmin < 4.0);
    }
}

TEST_CASE("transfer_mgf scale bookkeeping survives deep decay") {
    // |Phi| ~ e^{-c xi^2 V_N} underflows doubles long before N = 4096
    auto [c, f] = make_elliptic_random_chain(2, 1.0, 6, 4096);
    CharFnTable tab = char_fn(c, f, {3.0});
    CHECK(std::isfinite(tab.log_abs[0]));
    CHECK(tab.log_abs[0] < -600.0);  // collapsed value would underflow
}
