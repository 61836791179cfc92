#include "edgelab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgelab/quadrature.hpp"

namespace edgelab {

namespace {

int resolve_N(const ChainSpec& chain, int N) {
    if (N < 0) return chain.n_steps();
    if (N > chain.n_steps()) throw std::out_of_range("N exceeds chain length");
    if (N < 1) throw std::out_of_range("N must be at least 1");
    return N;
}

}  // namespace

ScaledComplex transfer_mgf(const ChainSpec& chain, const AdditiveFunctional& f,
                           std::complex<double> z, bool center, int N) {
    const int n = resolve_N(chain, N);
    Eigen::VectorXd means = center ? step_means(chain, f) : Eigen::VectorXd::Zero(n);
    Eigen::VectorXcd v = chain.mu1.cast<std::complex<double>>();
    double log_scale = 0;
    for (int t = 0; t < n; ++t) {
        const auto& R = chain.kernels[t];
        const auto& ft = f.tables[t];
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(R.cols());
        for (int y = 0; y < R.cols(); ++y) {
            std::complex<double> acc = 0;
            for (int x = 0; x < R.rows(); ++x)
                if (R(x, y) != 0)
                    acc += v(x) * R(x, y) * std::exp(z * (ft(x, y) - means(t)));
            w(y) = acc;
        }
        double m = w.cwiseAbs().maxCoeff();
        if (m == 0) return {std::complex<double>(0, 0), log_scale};
        w /= m;
        log_scale += std::log(m);
        v = std::move(w);
    }
    return {v.sum(), log_scale};
}

CharFnTable char_fn(const ChainSpec& chain, const AdditiveFunctional& f,
                    const std::vector<double>& xi_grid, bool center, int N) {
    CharFnTable tab;
    tab.centered = center;
    tab.xi = xi_grid;
    for (double xi : xi_grid) {
        ScaledComplex s = transfer_mgf(chain, f, {0.0, xi}, center, N);
        tab.values.push_back(s.collapse());
        tab.log_abs.push_back(s.log_abs());
    }
    return tab;
}

Eigen::VectorXd exact_moments(const ChainSpec& chain, const AdditiveFunctional& f,
                              int k_max, bool center, int N) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    const int n = resolve_N(chain, N);
    Eigen::VectorXd means = center ? step_means(chain, f) : Eigen::VectorXd::Zero(n);
    // binomial table
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k_max + 1, k_max + 1);
    for (int j = 0; j <= k_max; ++j) {
        C(j, 0) = 1;
        for (int l = 1; l <= j; ++l) C(j, l) = C(j - 1, l - 1) + (l <= j - 1 ? C(j - 1, l) : 0);
    }
    // m[j](x) = E[S_{t-partial}^j ; X_t = x]
    std::vector<Eigen::VectorXd> m(k_max + 1);
    m[0] = chain.mu1;
    for (int j = 1; j <= k_max; ++j) m[j] = Eigen::VectorXd::Zero(chain.mu1.size());
    for (int t = 0; t < n; ++t) {
        const auto& R = chain.kernels[t];
        const auto& ft = f.tables[t];
        std::vector<Eigen::VectorXd> nm(k_max + 1);
        for (int j = 0; j <= k_max; ++j) nm[j] = Eigen::VectorXd::Zero(R.cols());
        for (int y = 0; y < R.cols(); ++y)
            for (int x = 0; x < R.rows(); ++x) {
                if (R(x, y) == 0) continue;
                const double g = ft(x, y) - means(t);
                double gpow = 1;  // g^{j-l} built incrementally per j
                for (int j = 0; j <= k_max; ++j) {
                    double acc = 0, gp = 1;
                    for (int l = j; l >= 0; --l) {
                        acc += C(j, l) * gp * m[l](x);
                        gp *= g;
                    }
                    nm[j](y) += R(x, y) * acc;
                }
                (void)gpow;
            }
        m = std::move(nm);
        for (int j = 0; j <= k_max; ++j)
            if (m[j].cwiseAbs().maxCoeff() > 1e300)
                throw std::overflow_error(
                    "exact_moments overflow; center the functional first");
    }
    Eigen::VectorXd out(k_max + 1);
    for (int j = 0; j <= k_max; ++j) out(j) = m[j].sum();
    return out;
}

std::int64_t LatticePMF::min_support_gap() const {
    std::int64_t gap = 0, last = -1;
    for (std::ptrdiff_t i = 0; i < p.size(); ++i) {
        if (p(i) <= 0) continue;
        if (last >= 0) {
            std::int64_t g = std::int64_t(i) - last;
            gap = gap == 0 ? g : std::min(gap, g);
        }
        last = std::int64_t(i);
    }
    return gap;
}

LatticePMF lattice_distribution(const ChainSpec& chain, const AdditiveFunctional& f,
                                bool rational_mode, int N) {
    if (!f.lattice_den)
        throw std::invalid_argument("lattice_distribution needs a lattice functional");
    const int n = resolve_N(chain, N);
    if (int(f.lattice_num.size()) < n)
        throw std::invalid_argument("lattice numerators missing for requested length");
    const std::int64_t L = *f.lattice_den;

    // cumulative shift bounds
    std::vector<std::int64_t> lo(n + 1, 0), hi(n + 1, 0);
    for (int t = 0; t < n; ++t) {
        lo[t + 1] = lo[t] + f.lattice_num[t].minCoeff();
        hi[t + 1] = hi[t] + f.lattice_num[t].maxCoeff();
    }
    const std::int64_t kmin = lo[n], range = hi[n] - lo[n] + 1;
    const int M0 = static_cast<int>(chain.mu1.size());

    auto idx = [&](std::int64_t k, int x, int M) { return (k - kmin) * M + x; };

    if (!rational_mode) {
        std::vector<double> cur(range * M0, 0.0);
        for (int x = 0; x < M0; ++x) cur[idx(0, x, M0)] = chain.mu1(x);
        for (int t = 0; t < n; ++t) {
            const auto& R = chain.kernels[t];
            const int Mx = static_cast<int>(R.rows()), My = static_cast<int>(R.cols());
            std::vector<double> nxt(range * My, 0.0);
            for (std::int64_t k = lo[t]; k <= hi[t]; ++k)
                for (int x = 0; x < Mx; ++x) {
                    const double p = cur[idx(k, x, Mx)];
                    if (p < 1e-300) continue;  // real-mode pruning
                    for (int y = 0; y < My; ++y)
                        if (R(x, y) != 0)
                            nxt[idx(k + f.lattice_num[t](x, y), y, My)] += p * R(x, y);
                }
            cur = std::move(nxt);
        }
        const int Mn = static_cast<int>(chain.kernels[n - 1].cols());
        LatticePMF pmf;
        pmf.q = L;
        pmf.k_min = kmin;
        pmf.p.setZero(range);
        for (std::int64_t k = 0; k < range; ++k)
            for (int x = 0; x < Mn; ++x) pmf.p(k) += cur[(k)*Mn + x];
        return pmf;
    }

    std::vector<Rational> cur(range * M0, Rational(0));
    for (int x = 0; x < M0; ++x) cur[idx(0, x, M0)] = Rational(chain.mu1(x));
    for (int t = 0; t < n; ++t) {
        const auto& R = chain.kernels[t];
        const int Mx = static_cast<int>(R.rows()), My = static_cast<int>(R.cols());
        std::vector<Rational> nxt(range * My, Rational(0));
        for (std::int64_t k = lo[t]; k <= hi[t]; ++k)
            for (int x = 0; x < Mx; ++x) {
                const Rational& p = cur[idx(k, x, Mx)];
                if (p == 0) continue;
                for (int y = 0; y < My; ++y)
                    if (R(x, y) != 0)
                        nxt[idx(k + f.lattice_num[t](x, y), y, My)] += p * Rational(R(x, y));
            }
        cur = std::move(nxt);
    }
    const int Mn = static_cast<int>(chain.kernels[n - 1].cols());
    LatticePMF pmf;
    pmf.q = L;
    pmf.k_min = kmin;
    pmf.p.setZero(range);
    pmf.p_exact.assign(range, Rational(0));
    for (std::int64_t k = 0; k < range; ++k) {
        for (int x = 0; x < Mn; ++x) pmf.p_exact[k] += cur[k * Mn + x];
        pmf.p(k) = static_cast<double>(pmf.p_exact[k]);
    }
    return pmf;
}

double EmpiricalCdf::operator()(double t) const {
    const auto* b = sorted.data();
    return double(std::upper_bound(b, b + sorted.size(), t) - b) / double(sorted.size());
}

EmpiricalCdf cdf_estimate(const ChainSpec& chain, const AdditiveFunctional& f,
                          std::int64_t n_paths, std::uint64_t seed, int N) {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    const int n = resolve_N(chain, N);
    Eigen::VectorXd mom = exact_moments(chain, f, 2, /*center=*/true, n);
    const double sigma = std::sqrt(std::max(0.0, mom(2)));
    if (sigma < 1e-8) throw std::runtime_error("degenerate variance");

    ChainSpec prefix = chain;
    AdditiveFunctional fp = f;
    prefix.kernels.resize(n);
    if (!prefix.reference.empty()) prefix.reference.resize(n);
    fp.tables.resize(n);
    if (fp.lattice_den) fp.lattice_num.resize(n);
    PathSampleResult res = sample_paths(prefix, fp, n_paths, seed, /*center=*/true);

    EmpiricalCdf cdf;
    cdf.sigma = sigma;
    cdf.mean = 0;  // samples already centered per summand
    cdf.sorted = res.sums / sigma;
    std::sort(cdf.sorted.data(), cdf.sorted.data() + cdf.sorted.size());
    const double delta = 1e-3;
    cdf.dkw_halfwidth = std::sqrt(std::log(2.0 / delta) / (2.0 * double(n_paths)));
    return cdf;
}

std::complex<double> pmf_char_fn(const LatticePMF& pmf, double mean, double x) {
    const std::complex<double> step = std::polar(1.0, x / double(pmf.q));
    std::complex<double> phase = std::polar(1.0, x * (double(pmf.k_min) / double(pmf.q) - mean));
    std::complex<double> acc = 0;
    for (std::ptrdiff_t i = 0; i < pmf.p.size(); ++i) {
        if ((i & 1023) == 0)  // refresh against drift of the incremental product
            phase = std::polar(1.0, x * (pmf.atom_value(i) - mean));
        if (pmf.p(i) != 0) acc += pmf.p(i) * phase;
        phase *= step;
    }
    return acc;
}

double tail_integral(const ChainSpec& chain, const AdditiveFunctional& f,
                     double delta, double B, int r, int N) {
    const int n = resolve_N(chain, N);
    Eigen::VectorXd mom = exact_moments(chain, f, 2, true, n);
    const double sigma = std::sqrt(std::max(0.0, mom(2)));
    const double upper = B * std::pow(sigma, r - 1);
    if (!(delta > 0) || !(delta < upper))
        throw std::invalid_argument("tail_integral: need 0 < delta < B*sigma^{r-1}");

    std::function<double(double)> integrand;
    LatticePMF pmf;
    if (f.lattice_den) {
        pmf = lattice_distribution(chain, f, false, n);
        Eigen::VectorXd raw = exact_moments(chain, f, 1, false, n);
        const double mean = raw(1);
        integrand = [&pmf, mean](double x) {
            return std::abs(pmf_char_fn(pmf, mean, x)) / std::abs(x);
        };
    } else {
        const ChainSpec* c = &chain;
        const AdditiveFunctional* ff = &f;
        integrand = [c, ff, n](double x) {
            ScaledComplex s = transfer_mgf(*c, *ff, {0.0, x}, true, n);
            return std::abs(s.collapse()) / std::abs(x);
        };
    }
    QuadratureOptions opt;
    return adaptive_simpson(integrand, delta, upper, opt) +
           adaptive_simpson(integrand, -upper, -delta, opt);
}

}  // namespace edgelab
