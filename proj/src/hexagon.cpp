#include "edgelab/hexagon.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "edgelab/transfer.hpp"

namespace edgelab {

namespace {

// order-2 truncated Taylor scalar: a0 + a1 e + a2 e^2 (mod e^3)
struct Jet2 {
    double a0 = 0, a1 = 0, a2 = 0;
    Jet2() = default;
    Jet2(double v) : a0(v) {}
    Jet2(double v0, double v1, double v2) : a0(v0), a1(v1), a2(v2) {}
    Jet2 operator+(const Jet2& o) const { return {a0 + o.a0, a1 + o.a1, a2 + o.a2}; }
    Jet2& operator+=(const Jet2& o) { a0 += o.a0; a1 += o.a1; a2 += o.a2; return *this; }
    Jet2 operator*(const Jet2& o) const {
        return {a0 * o.a0, a0 * o.a1 + a1 * o.a0, a0 * o.a2 + a1 * o.a1 + a2 * o.a0};
    }
    Jet2 operator*(double s) const { return {a0 * s, a1 * s, a2 * s}; }
    Jet2 operator/(double s) const { return {a0 / s, a1 / s, a2 / s}; }
};

template <class S>
struct Mat {
    int r = 0, c = 0;
    std::vector<S> a;
    Mat(int rr, int cc) : r(rr), c(cc), a(std::size_t(rr) * cc, S(0)) {}
    S& operator()(int i, int j) { return a[std::size_t(i) * c + j]; }
    const S& operator()(int i, int j) const { return a[std::size_t(i) * c + j]; }
};

void check_hexagon_index(const ChainSpec& chain, int n) {
    if (n < 2 || n > chain.n_steps() - 1)
        throw std::out_of_range("hexagon index needs 2 <= n <= N-1");
}

// E[w-product around the hexagon at n]: W(v) turns a signed f-value into an
// edge weight (e^{i xi v} or a jet). The conditional-independence graph is a
// 6-cycle; marginalizing the bridge midpoints C and D leaves a 4-cycle trace.
template <class S, class W>
S hexagon_expect(const ChainSpec& chain, const AdditiveFunctional& f, int n, W&& w) {
    check_hexagon_index(chain, n);
    const auto& R0 = chain.kernels[n - 2];  // A -> B/D
    const auto& R1 = chain.kernels[n - 1];  // B -> C, D -> E
    const auto& R2 = chain.kernels[n];      // C/E -> F
    const auto& f0 = f.tables[n - 2];
    const auto& f1 = f.tables[n - 1];
    const auto& f2 = f.tables[n];
    const int MA = int(R0.rows()), MB = int(R0.cols()), MC = int(R1.cols()),
              MF = int(R2.cols());
    const Eigen::MatrixXd J1 = pair_law(chain, n - 2);
    const Eigen::MatrixXd J2 = pair_law(chain, n);
    const Eigen::MatrixXd T1 = R1 * R2;  // (b,f) bridge normalizer
    const Eigen::MatrixXd T2 = R0 * R1;  // (a,e) bridge normalizer

    Mat<S> W1(MB, MF), W2(MA, MC), G1(MA, MB), G2(MC, MF);
    for (int b = 0; b < MB; ++b)
        for (int fj = 0; fj < MF; ++fj) {
            S acc(0);
            for (int c = 0; c < MC; ++c)
                if (R1(b, c) != 0 && R2(c, fj) != 0)
                    acc += w(f1(b, c)) * w(f2(c, fj)) * (R1(b, c) * R2(c, fj));
            if (T1(b, fj) == 0) {
                // unreachable pair; weight never used, but guard anyway
                continue;
            }
            W1(b, fj) = acc / T1(b, fj);
        }
    for (int a = 0; a < MA; ++a)
        for (int e = 0; e < MC; ++e) {
            S acc(0);
            for (int d = 0; d < MB; ++d)
                if (R0(a, d) != 0 && R1(d, e) != 0)
                    acc += w(-f0(a, d)) * w(-f1(d, e)) * (R0(a, d) * R1(d, e));
            if (T2(a, e) == 0) continue;
            W2(a, e) = acc / T2(a, e);
        }
    for (int a = 0; a < MA; ++a)
        for (int b = 0; b < MB; ++b) G1(a, b) = S(J1(a, b)) * w(f0(a, b));
    for (int e = 0; e < MC; ++e)
        for (int fj = 0; fj < MF; ++fj) G2(e, fj) = S(J2(e, fj)) * w(-f2(e, fj));

    Mat<S> H(MB, MC);  // H(b,e) = sum_f W1(b,f) G2(e,f)
    for (int b = 0; b < MB; ++b)
        for (int e = 0; e < MC; ++e) {
            S acc(0);
            for (int fj = 0; fj < MF; ++fj) acc += W1(b, fj) * G2(e, fj);
            H(b, e) = acc;
        }
    Mat<S> P(MB, MA);  // P(b,a) = sum_e H(b,e) W2(a,e)
    for (int b = 0; b < MB; ++b)
        for (int a = 0; a < MA; ++a) {
            S acc(0);
            for (int e = 0; e < MC; ++e) acc += H(b, e) * W2(a, e);
            P(b, a) = acc;
        }
    S total(0);
    for (int a = 0; a < MA; ++a)
        for (int b = 0; b < MB; ++b) total += G1(a, b) * P(b, a);
    return total;
}

double local_norm(const AdditiveFunctional& f, int n) {
    double m = 0;
    for (int t = n - 2; t <= n; ++t)
        m = std::max(m, f.tables[t].cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

std::vector<Eigen::MatrixXd> bridge_kernel(const ChainSpec& chain, int n) {
    if (n < 1 || n > chain.n_steps() - 1)
        throw std::out_of_range("bridge index needs 1 <= n <= N-1");
    const auto& Ra = chain.kernels[n - 1];
    const auto& Rb = chain.kernels[n];
    const Eigen::MatrixXd T = Ra * Rb;
    const int My = int(Ra.cols());
    std::vector<Eigen::MatrixXd> out(My);
    for (int y = 0; y < My; ++y) out[y].setZero(Ra.rows(), Rb.cols());
    for (int x = 0; x < Ra.rows(); ++x)
        for (int z = 0; z < Rb.cols(); ++z) {
            if (T(x, z) == 0) {
                // reachable (x,z) pairs always have positive normalizer under
                // ellipticity; an isolated zero just never occurs in the joint law
                bool reachable = false;
                for (int y = 0; y < My; ++y) reachable |= Ra(x, y) != 0 && Rb(y, z) != 0;
                if (reachable) throw std::runtime_error("zero bridge normalizer");
                continue;
            }
            for (int y = 0; y < My; ++y) out[y](x, z) = Ra(x, y) * Rb(y, z) / T(x, z);
        }
    return out;
}

double hexagon_u2(const ChainSpec& chain, const AdditiveFunctional& f, int n) {
    Jet2 e = hexagon_expect<Jet2>(chain, f, n,
                                  [](double v) { return Jet2(1.0, v, 0.5 * v * v); });
    return 2.0 * e.a2;  // E[e^{eps Gamma}] = 1 + eps E[Gamma] + eps^2 E[Gamma^2]/2
}

double hexagon_d2(const ChainSpec& chain, const AdditiveFunctional& f, int n,
                  double xi) {
    std::complex<double> e = hexagon_expect<std::complex<double>>(
        chain, f, n, [xi](double v) { return std::polar(1.0, xi * v); });
    return std::max(0.0, 2.0 - 2.0 * e.real());
}

Eigen::VectorXd hexagon_d2(const ChainSpec& chain, const AdditiveFunctional& f,
                           int n, const Eigen::VectorXd& xi_grid) {
    Eigen::VectorXd out(xi_grid.size());
    for (int i = 0; i < xi_grid.size(); ++i) out(i) = hexagon_d2(chain, f, n, xi_grid(i));
    return out;
}

namespace {

template <class G>
double hexagon_brute(const ChainSpec& chain, const AdditiveFunctional& f, int n,
                     G&& g) {
    check_hexagon_index(chain, n);
    const Eigen::MatrixXd J1 = pair_law(chain, n - 2);
    const Eigen::MatrixXd J2 = pair_law(chain, n);
    auto bn = bridge_kernel(chain, n);
    auto bm = bridge_kernel(chain, n - 1);
    const auto& f0 = f.tables[n - 2];
    const auto& f1 = f.tables[n - 1];
    const auto& f2 = f.tables[n];
    const int MA = int(J1.rows()), MB = int(J1.cols()), MC = int(J2.rows()),
              MF = int(J2.cols());
    double total = 0;
    for (int a = 0; a < MA; ++a)
        for (int b = 0; b < MB; ++b) {
            if (J1(a, b) == 0) continue;
            for (int e = 0; e < MC; ++e)
                for (int fj = 0; fj < MF; ++fj) {
                    if (J2(e, fj) == 0) continue;
                    for (int c = 0; c < MC; ++c)
                        for (int d = 0; d < MB; ++d) {
                            const double pr = J1(a, b) * J2(e, fj) * bn[c](b, fj) *
                                              bm[d](a, e);
                            if (pr == 0) continue;
                            const double gamma = f0(a, b) + f1(b, c) + f2(c, fj) -
                                                 f0(a, d) - f1(d, e) - f2(e, fj);
                            total += pr * g(gamma);
                        }
                }
        }
    return total;
}

}  // namespace

double hexagon_u2_brute(const ChainSpec& chain, const AdditiveFunctional& f, int n) {
    return hexagon_brute(chain, f, n, [](double g) { return g * g; });
}

double hexagon_d2_brute(const ChainSpec& chain, const AdditiveFunctional& f, int n,
                        double xi) {
    return hexagon_brute(chain, f, n, [xi](double g) {
        const double s = std::sin(0.5 * xi * g);
        return 4.0 * s * s;
    });
}

HexagonStats hexagon_stats(const ChainSpec& chain, const AdditiveFunctional& f,
                           int N, const Eigen::VectorXd& xi_grid) {
    if (N < 0) N = chain.n_steps();
    HexagonStats st;
    st.xi = xi_grid;
    for (int n = 2; n <= N - 1; ++n) st.n_range.push_back(n);
    const int rows = int(st.n_range.size());
    st.u2.setZero(rows);
    st.d2.setZero(rows, xi_grid.size());
    st.D.setZero(xi_grid.size());
    for (int i = 0; i < rows; ++i) {
        const int n = st.n_range[i];
        st.u2(i) = hexagon_u2(chain, f, n);
        for (int j = 0; j < xi_grid.size(); ++j) {
            st.d2(i, j) = hexagon_d2(chain, f, n, xi_grid(j));
            st.D(j) += st.d2(i, j);
        }
    }
    return st;
}

std::vector<WindowReport> sandwich_check(const ChainSpec& chain,
                                         const AdditiveFunctional& f,
                                         const std::vector<std::pair<int, int>>& windows) {
    auto mu = marginal_laws(chain);
    // u_n^2 cache over the union of requested base ranges
    std::vector<double> u2(chain.n_steps(), 0.0);
    std::vector<bool> have(chain.n_steps(), false);
    std::vector<WindowReport> out;
    for (auto [start, len] : windows) {
        if (start < 0 || len < 3 || start + len > chain.n_steps())
            throw std::out_of_range("sandwich window out of range");
        WindowReport rep;
        rep.start = start;
        rep.len = len;
        ChainSpec sub;
        AdditiveFunctional fsub;
        sub.mu1 = mu[start];
        sub.eps0 = chain.eps0;
        for (int t = start; t < start + len; ++t) {
            sub.kernels.push_back(chain.kernels[t]);
            fsub.tables.push_back(f.tables[t]);
        }
        rep.var = exact_moments(sub, fsub, 2, true)(2);
        for (int n = start + 2; n <= start + len - 1; ++n) {
            if (!have[n]) {
                u2[n] = hexagon_u2(chain, f, n);
                have[n] = true;
            }
            rep.sum_u2 += u2[n];
        }
        rep.ratio = (rep.var + 1.0) / (rep.sum_u2 + 1.0);
        out.push_back(rep);
    }
    return out;
}

DecayFit decay_check(const ChainSpec& chain, const AdditiveFunctional& f, int N,
                     const Eigen::VectorXd& xi_grid) {
    DecayFit fit;
    HexagonStats st = hexagon_stats(chain, f, N, xi_grid);
    std::vector<double> grid(xi_grid.data(), xi_grid.data() + xi_grid.size());
    CharFnTable phi = char_fn(chain, f, grid, true, N);
    // least squares of -log|Phi| = c D + b over points with D >= 1
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int j = 0; j < xi_grid.size(); ++j) {
        if (st.D(j) < 1.0) continue;
        const double x = st.D(j), y = -phi.log_abs[j];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 2) {
        fit.inconclusive = true;
        return fit;
    }
    const double det = m * sxx - sx * sx;
    fit.c = (m * sxy - sx * sy) / det;
    fit.intercept_ls = (sy * sxx - sx * sxy) / det;
    // envelope constant making the bound pointwise over the whole grid
    double logC = -1e300;
    for (int j = 0; j < xi_grid.size(); ++j)
        logC = std::max(logC, phi.log_abs[j] + fit.c * st.D(j));
    fit.C = std::exp(logC);
    for (int j = 0; j < xi_grid.size(); ++j)
        if (phi.log_abs[j] > logC - fit.c * st.D(j) + 1e-12) ++fit.violations;
    return fit;
}

std::vector<std::pair<int, double>> small_xi_check(const ChainSpec& chain,
                                                   const AdditiveFunctional& f,
                                                   int n_lo, int n_hi,
                                                   const Eigen::VectorXd& xi_grid,
                                                   double delta) {
    std::vector<std::pair<int, double>> bad;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double norm = local_norm(f, n);
        const double u2 = hexagon_u2(chain, f, n);
        for (int j = 0; j < xi_grid.size(); ++j) {
            const double xi = xi_grid(j);
            if (norm * std::abs(xi) > delta) continue;
            if (hexagon_d2(chain, f, n, xi) + 1e-13 < 0.5 * xi * xi * u2)
                bad.emplace_back(n, xi);
        }
    }
    return bad;
}

}  // namespace edgelab
